use std::path::{Path, PathBuf};
use std::process::Command;

use jsonschema::{Registry, Validator};
use serde_json::Value;
use tklab::json::{kernel_spec_from_json, witness_from_json};
use tklab::witness::verify_witness;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("{e}: {}", self.stdout))
    }
}

fn tklab_env(args: &[&str], env: &[(&str, &str)]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_tklab"))
        .args(args)
        .current_dir(root())
        .envs(env.iter().copied())
        .output()
        .unwrap();
    Run {
        code: out.status.code().expect("exited normally"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn tklab(args: &[&str]) -> Run {
    tklab_env(args, &[])
}

fn load_schema(name: &str) -> Value {
    let text = std::fs::read_to_string(root().join("schemas").join(format!("{name}.schema.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn validator(name: &str) -> Validator {
    let registry = Registry::new().add("urn:tklab:schema:witness", load_schema("witness")).unwrap().prepare().unwrap();
    jsonschema::options().with_registry(&registry).build(&load_schema(name)).unwrap()
}

fn assert_valid(schema: &str, v: &Value) {
    let errors: Vec<String> =
        validator(schema).iter_errors(v).map(|e| format!("{e} at {}", e.instance_path())).collect();
    assert!(errors.is_empty(), "{schema} schema: {errors:#?}\n{v:#}");
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tklab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn status<'a>(report: &'a Value, property: &str) -> &'a str {
    report["product"][property]["status"].as_str().unwrap()
}

#[test]
fn reproduce_passes_and_validates() {
    let run = tklab(&["reproduce"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let report = run.json();
    assert_eq!(report["failed"], 0);
    assert!(report["passed"].as_u64().unwrap() >= 15);
    assert_valid("report", &report);
    let md = tklab(&["reproduce", "--format", "markdown"]);
    assert_eq!(md.code, 0);
    assert!(md.stdout.contains("| example2-w1 quad form | Ex2 | pass |"));
}

#[test]
fn corrupted_fixture_names_the_failing_check() {
    let run = tklab(&["reproduce", "--corrupt", "example2-w1"]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.starts_with("check failed: example2-w1 quad form"), "{}", run.stderr);
    assert_valid("report", &run.json());
    assert_eq!(tklab(&["reproduce", "--corrupt", "nope"]).code, 2);
}

#[test]
fn check_reports_verdicts_with_citations() {
    let run = tklab(&["check", "kernels/example1.json"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let r = run.json();
    assert_valid("report", &r);
    assert_eq!(status(&r, "tensor-char"), "Fails");
    assert_eq!(status(&r, "I-char"), "Holds");
    assert_eq!(r["product"]["I-char"]["citation"], "Thm2i");
    assert_eq!(r["config"]["kernel"], "kernels/example1.json");

    let r = tklab(&["check", "kernels/example3.json"]).json();
    assert_eq!(status(&r, "I-char"), "Undecided");
    let r = tklab(&["check", "kernels/example3.json", "--search", "--seed", "7"]).json();
    assert_valid("report", &r);
    assert_eq!(status(&r, "I-char"), "Fails");
    assert_eq!(r["product"]["I-char"]["provenance"], "search");
    assert_eq!(r["search"]["outcome"], "found");

    let r = tklab(&["check", "kernels/gaussian-pair.json"]).json();
    assert_valid("report", &r);
    for p in ["universal", "characteristic", "tensor-char", "tensor0-char", "I-char"] {
        assert_eq!(status(&r, p), "Holds", "{p}");
    }

    let md = tklab(&["check", "kernels/example1.json", "--format", "markdown"]);
    assert!(md.stdout.contains("| I-char | Holds | Thm2i |"), "{}", md.stdout);
}

#[test]
fn check_input_errors() {
    let bad_json = temp_file("bad.json", "{ \"components\": [");
    let run = tklab(&["check", bad_json.to_str().unwrap()]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.starts_with("error:"));

    let not_psd =
        temp_file("notpsd.json", r#"{ "components": [ { "type": "gram", "gram": [["0", "1"], ["1", "0"]] } ] }"#);
    let run = tklab(&["check", not_psd.to_str().unwrap()]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("[1, -1]") || run.stderr.contains("[\"1\", \"-1\"]"), "{}", run.stderr);

    let mixed = temp_file(
        "mixed.json",
        r#"{ "components": [ { "type": "discrete-delta", "size": 2 }, { "type": "gaussian", "bandwidth": 1.0 } ] }"#,
    );
    assert_eq!(tklab(&["check", mixed.to_str().unwrap()]).code, 2);
    assert_eq!(tklab(&["check", "kernels/missing.json"]).code, 2);
    assert_eq!(tklab(&["check", "kernels/gaussian-pair.json", "--search"]).code, 2);
}

#[test]
fn witness_search_finds_and_verifies() {
    let args = ["witness-search", "kernels/example2.json", "--budget", "1e5", "--seed", "7"];
    let run = tklab(&args);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let r = run.json();
    assert_valid("report", &r);
    assert_valid("witness", &r["witness"]);
    let report = witness_from_json(&r["witness"]).unwrap();
    let kernel = kernel_spec_from_json(
        &serde_json::from_str(&std::fs::read_to_string(root().join("kernels/example2.json")).unwrap()).unwrap(),
    )
    .unwrap()
    .as_finite_product()
    .unwrap();
    assert!(verify_witness(&kernel, &report).unwrap().ok);
    assert_eq!(tklab(&args).stdout, run.stdout);
}

#[test]
fn witness_search_short_circuits() {
    let run = tklab(&["witness-search", "kernels/example1.json"]);
    assert_eq!(run.code, 0);
    let r = run.json();
    assert_eq!(r["message"], "certified I-characteristic (Thm2i)");
    assert!(r.get("witness").is_none());
    let r = tklab(&["witness-search", "kernels/identity.json"]).json();
    assert_eq!(r["message"], "certified I-characteristic (Thm4)");
    assert_valid("report", &r);
}

#[test]
fn witness_search_failures() {
    let run = tklab(&["witness-search", "kernels/example2.json", "--budget", "10", "--seed", "1"]);
    assert_eq!(run.code, 3);
    assert!(run.stdout.contains("inconclusive"));
    assert_valid("report", &run.json());
    assert_eq!(tklab(&["witness-search", "kernels/gaussian-pair.json"]).code, 2);
    assert_eq!(tklab(&["witness-search", "kernels/example2.json", "--budget", "1.5"]).code, 2);
}

#[test]
fn hsic_on_bundled_data() {
    let run = tklab(&["hsic", "data/dependent.csv", "--seed", "1", "--perms", "199"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let r = run.json();
    assert_valid("report", &r);
    assert!(r["result"]["p_value"].as_f64().unwrap() <= 0.01);

    let r = tklab(&["hsic", "data/independent.csv", "--groups", "0,1-2"]).json();
    let stat = r["result"]["statistic"].as_f64().unwrap();
    assert!((0.0..=0.05).contains(&stat), "{stat}");
    assert_eq!(r["result"]["bandwidths"].as_array().unwrap().len(), 2);
}

#[test]
fn hsic_is_deterministic_across_thread_counts() {
    let args = ["hsic", "data/dependent.csv", "--seed", "3", "--perms", "50"];
    let one = tklab_env(&args, &[("TKLAB_THREADS", "1")]);
    let three = tklab_env(&args, &[("TKLAB_THREADS", "3")]);
    assert_eq!(one.code, 0);
    assert_eq!(one.stdout, three.stdout);
}

#[test]
fn hsic_input_errors() {
    let run = tklab(&["hsic", "data/independent.csv", "--groups", "0,0-1"]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("column 0"), "{}", run.stderr);
    assert_eq!(tklab(&["hsic", "data/independent.csv", "--groups", "0-2"]).code, 2);
    assert_eq!(tklab(&["hsic", "data/independent.csv", "--groups", "0,1"]).code, 2);
    let ragged = temp_file("ragged.csv", "a,b\n1,2\n3\n");
    assert_eq!(tklab(&["hsic", ragged.to_str().unwrap()]).code, 2);
    let text = temp_file("text.csv", "a,b\n1,x\n");
    assert_eq!(tklab(&["hsic", text.to_str().unwrap()]).code, 2);
    assert_eq!(tklab(&["hsic", "data/dependent.csv", "--kernel", "cosine"]).code, 2);
    assert_eq!(tklab(&["hsic", "data/dependent.csv", "--perms", "0"]).code, 2);
}

#[test]
fn usage_errors_exit_with_input_code() {
    assert_eq!(tklab(&[]).code, 2);
    assert_eq!(tklab(&["frobnicate"]).code, 2);
    assert_eq!(tklab(&["check"]).code, 2);
}

#[test]
fn shipped_files_validate() {
    for entry in std::fs::read_dir(root().join("kernels")).unwrap() {
        let path = entry.unwrap().path();
        let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_valid("kernel", &v);
        kernel_spec_from_json(&v).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
    for name in tklab::witness::FIXTURE_NAMES {
        let f = tklab::witness::fixture(name).unwrap();
        let v = tklab::json::witness_to_json(&f.witness);
        assert_valid("witness", &v);
        assert_valid("measure", &tklab::json::measure_to_json(&f.witness.witness));
    }
    let mut broken = tklab(&["check", "kernels/example1.json"]).json();
    broken["product"]["I-char"]["status"] = "Maybe".into();
    assert!(!validator("report").is_valid(&broken));
    let mut broken = tklab::json::witness_to_json(&tklab::witness::fixture("example1").unwrap().witness);
    broken["entries"][0] = "1.5".into();
    assert!(!validator("witness").is_valid(&broken));
    for schema in ["kernel", "measure", "witness", "report"] {
        assert!(jsonschema::meta::is_valid(&load_schema(schema)), "{schema}");
    }
}
