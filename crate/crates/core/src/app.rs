//! The `tklab` commands.
//!
//! Every command returns an [`Output`] holding the report text and the exit
//! code instead of printing, so the binary stays a thin wrapper and the
//! commands can be driven from tests. Reports are pure functions of the inputs
//! and the seed.
//!
//! Exit codes: 0 success or certified, 1 reproduction suite failure, 2 input
//! error, 3 inconclusive search.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use ndarray::Array2;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::hsic::{median_heuristic, permutation_test, SampleBlock, TestResult};
use crate::json::{self, property_report_to_json, to_pretty, witness_to_json};
use crate::kernel::{ContinuousKernel, Family, FiniteKernel, KernelSpec, ProductKernel};
use crate::measure::{i_class_element, outer};
use crate::property::{
    classify_translation_invariant, decide_product_properties, is_characteristic_finite, is_universal_finite,
    Certificate, Property, PropertyReport, Status,
};
use crate::scalar::{parse_rational, rat, Rational, Scalar};
use crate::witness::{
    factorizing_family, find_embedding_collision, fixture, search_i_witness, thm2ii_construct, verify_witness,
    SearchConfig, SearchOutcome, SignCubeFamily, PARITY_CONSTRAINTS,
};
use crate::{Error, Result};

pub const EXIT_OK: u8 = 0;
pub const EXIT_SUITE_FAILURE: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_INCONCLUSIVE: u8 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Markdown,
}

#[derive(Debug, Parser)]
#[command(
    name = "tklab",
    version,
    about = "Certified properties and independence statistics for tensor product kernels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the exact reproduction suite of the worked examples and rules.
    Reproduce {
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Perturb the named fixture before checking (fault injection).
        #[arg(long, hide = true)]
        corrupt: Option<String>,
    },
    /// Decide all five properties of a product kernel given as kernel JSON.
    Check {
        /// Kernel specification JSON (see schemas/kernel.schema.json).
        kernel: PathBuf,
        /// Search for an I-characteristic witness when the rules leave it undecided.
        #[arg(long)]
        search: bool,
        /// Objective evaluations over all restarts; accepts forms like 1e5.
        #[arg(long, default_value = "100000", value_parser = parse_count)]
        budget: u64,
        /// Seed for the restart starting points.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Lower bound on the l1 norm of the witness; decimal or p/q.
        #[arg(long, default_value = "1/100", value_parser = parse_number)]
        delta: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Search for an exact witness that a finite product kernel is not I-characteristic.
    WitnessSearch {
        /// Kernel specification JSON with finite components only.
        kernel: PathBuf,
        /// Objective evaluations over all restarts; accepts forms like 1e5.
        #[arg(long, default_value = "100000", value_parser = parse_count)]
        budget: u64,
        /// Seed for the restart starting points.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Lower bound on the l1 norm of the witness; decimal or p/q.
        #[arg(long, default_value = "1/100", value_parser = parse_number)]
        delta: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// dHSIC permutation test of joint independence on CSV data.
    Hsic {
        /// Numeric CSV with a header row; one sample per row.
        csv: PathBuf,
        /// Column groups, 0-based, e.g. "0-1,2,3-5". Default: one column per component.
        #[arg(long)]
        groups: Option<String>,
        /// gaussian, laplacian, discrete-delta or constant.
        #[arg(long, default_value = "gaussian")]
        kernel: String,
        /// Fixed bandwidth; the median heuristic per component when absent.
        #[arg(long)]
        bandwidth: Option<f64>,
        /// Number of permutation replicates.
        #[arg(long, default_value_t = 199)]
        perms: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

/// Accepts integers and integral scientific notation such as `1e5`.
pub fn parse_count(s: &str) -> std::result::Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    match s.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x <= u64::MAX as f64 => Ok(x as u64),
        _ => Err(format!("expected a nonnegative integer, got {s:?}")),
    }
}

/// Accepts decimals and rationals such as `1/100`.
pub fn parse_number(s: &str) -> std::result::Result<f64, String> {
    s.parse::<f64>()
        .ok()
        .or_else(|| parse_rational(s).ok().map(|r| r.to_f64()))
        .filter(|x| x.is_finite())
        .ok_or_else(|| format!("expected a number, got {s:?}"))
}

/// Result of a command.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Output {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    fn ok(code: u8, stdout: String) -> Self {
        Self { code, stdout, stderr: String::new() }
    }

    fn input_error(e: &Error) -> Self {
        Self { code: EXIT_INPUT, stdout: String::new(), stderr: format!("error: {e}\n") }
    }
}

pub fn run(cli: &Cli) -> Output {
    match &cli.command {
        Command::Reproduce { format, corrupt } => reproduce(*format, corrupt.as_deref()),
        Command::Check { kernel, search, budget, seed, delta, format } => {
            let config = search.then(|| SearchConfig { budget: *budget, seed: *seed, delta: *delta });
            check(kernel, config.as_ref(), *format)
        }
        Command::WitnessSearch { kernel, budget, seed, delta, format } => {
            witness_search(kernel, &SearchConfig { budget: *budget, seed: *seed, delta: *delta }, *format)
        }
        Command::Hsic { csv, groups, kernel, bandwidth, perms, seed, format } => hsic(&HsicOptions {
            csv: csv.clone(),
            groups: groups.clone(),
            kernel: kernel.clone(),
            bandwidth: *bandwidth,
            perms: *perms,
            seed: *seed,
            format: *format,
        }),
    }
}

fn format_name(f: Format) -> &'static str {
    match f {
        Format::Json => "json",
        Format::Markdown => "markdown",
    }
}

// ---------------------------------------------------------------- reproduce

/// One entry of the reproduction suite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    /// Report tag of the result being checked.
    pub anchor: &'static str,
    pub passed: bool,
    pub detail: String,
}

struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    fn record(&mut self, name: impl Into<String>, anchor: &'static str, outcome: Result<(bool, String)>) {
        let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        self.checks.push(Check { name: name.into(), anchor, passed, detail });
    }
}

fn pass_if(ok: bool, detail: impl Into<String>) -> Result<(bool, String)> {
    Ok((ok, detail.into()))
}

fn statuses(r: &PropertyReport) -> String {
    Property::ALL.iter().map(|&p| format!("{p}: {:?}", r.status(p))).collect::<Vec<_>>().join(", ")
}

fn sd() -> FiniteKernel<Rational> {
    FiniteKernel::signed_delta()
}

/// Random integer PSD Gram `B Bᵀ` with `B` of size `n × rank`.
fn random_gram(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> FiniteKernel<Rational> {
    let b: Vec<Vec<i64>> = (0..n).map(|_| (0..rank).map(|_| rng.random_range(-2..=2)).collect()).collect();
    FiniteKernel::from_fn(n, |i, j| Rational::from_integer((0..rank).map(|k| b[i][k] * b[j][k]).sum::<i64>().into()))
        .expect("B Bᵀ is PSD")
}

/// The checks of the reproduction suite, in order. `corrupt` perturbs one
/// entry of the named fixture's witness by 1/1000 first.
pub fn reproduction_checks(corrupt: Option<&str>) -> Vec<Check> {
    let mut s = Suite { checks: Vec::new() };

    // Worked example with two sign kernels.
    s.record(
        "example1 component verdicts",
        "Ex1",
        (|| {
            let r = decide_product_properties(&[sd(), sd()])?;
            let ok = r
                .components
                .iter()
                .all(|c| c.characteristic.status == Status::Holds && c.universal.status == Status::Fails);
            pass_if(ok, "both components characteristic, not universal")
        })(),
    );
    s.record(
        "example1 product verdicts",
        "Ex1",
        (|| {
            let r = decide_product_properties(&[sd(), sd()])?;
            let i = r.verdict(Property::ICharacteristic);
            let ok = r.status(Property::TensorCharacteristic) == Status::Fails
                && r.status(Property::Characteristic) == Status::Fails
                && i.status == Status::Holds
                && i.citation == Some("Thm2i");
            pass_if(ok, statuses(&r))
        })(),
    );

    for name in crate::witness::FIXTURE_NAMES {
        let f = match fixture(name) {
            Ok(f) => f,
            Err(e) => {
                s.record(format!("{name} fixture"), "Ex2", Err(e));
                continue;
            }
        };
        let anchor = match name {
            "example1" => "Ex1",
            "example3" => "Ex3",
            _ => "Ex2",
        };
        let mut w = f.witness.clone();
        if corrupt == Some(name) {
            let x = w.witness.get(&[0; 8][..w.witness.order()]).clone();
            let idx = vec![0; w.witness.order()];
            w.witness.set(&idx, x + rat(1, 1000));
        }
        match verify_witness(&f.kernel, &w) {
            Ok(v) => {
                s.record(
                    format!("{name} quad form"),
                    anchor,
                    pass_if(v.quad_form.is_zero(), format!("quad form = {}", v.quad_form)),
                );
                let residuals: Vec<String> = v
                    .residuals
                    .iter()
                    .filter(|(k, x)| k.as_str() != "quad_form" && !x.is_zero())
                    .map(|(k, x)| format!("{k} = {x}"))
                    .collect();
                s.record(
                    format!("{name} class residuals"),
                    anchor,
                    pass_if(
                        residuals.is_empty(),
                        if residuals.is_empty() {
                            format!("{} constraints exactly 0", w.class.name())
                        } else {
                            residuals.join(", ")
                        },
                    ),
                );
                s.record(
                    format!("{name} nonzero"),
                    anchor,
                    pass_if(
                        v.nonzero,
                        format!(
                            "entry {:?} = {}",
                            w.nonzero_entry.iter().map(|i| i + 1).collect::<Vec<_>>(),
                            w.witness.get(&w.nonzero_entry)
                        ),
                    ),
                );
            }
            Err(e) => s.record(format!("{name} verification"), anchor, Err(e)),
        }
    }

    s.record(
        "example1 witness is a zero-mass product",
        "Ex1",
        (|| {
            let w = fixture("example1")?.witness.witness;
            let expected = outer(&[vec![rat(1, 1), rat(-1, 1)], vec![rat(1, 1), rat(1, 1)]])?;
            pass_if(w == expected && w.mass().is_zero(), "(1,-1) ⊗ (1,1)")
        })(),
    );

    s.record(
        "two-way family factorizes",
        "Tab2",
        (|| {
            let mut count = 0;
            for a in 0..=10i64 {
                for b in 0..=10i64 {
                    if a + b == 0 || a + b > 10 {
                        continue;
                    }
                    let p = factorizing_family(&rat(a, 10), &rat(b, 10))?;
                    if !i_class_element(&p)?.is_zero() {
                        return pass_if(false, format!("a = {a}/10, b = {b}/10 does not factorize"));
                    }
                    count += 1;
                }
            }
            pass_if(count >= 50, format!("{count} grid points factorize exactly"))
        })(),
    );

    for (z, name) in [([1, 1, 1, 1, 1, 1], "example2-w1"), ([3, 1, 1, 1, 1, 2], "example2-w2")] {
        s.record(
            format!("sign cube family reproduces {name}"),
            "AppA",
            (|| {
                let family = SignCubeFamily::new(z.map(|x| rat(x, 10)))?;
                let (p, report) = family.generate()?;
                let f = fixture(name)?;
                let ok = Some(&p) == f.witness.joint.as_ref() && report.witness == f.witness.witness;
                pass_if(ok, format!("z = {:?}/10", z))
            })(),
        );
    }

    s.record(
        "example2 parity constraints",
        "Ex2",
        (|| {
            let mut details = Vec::new();
            for name in ["example2-w1", "example2-w2"] {
                let a = fixture(name)?.witness.witness;
                for group in PARITY_CONSTRAINTS {
                    let sum = group.iter().fold(Rational::zero(), |acc, idx| acc + a.get(idx));
                    if !sum.is_zero() {
                        details.push(format!("{name}: {sum}"));
                    }
                }
            }
            pass_if(
                details.is_empty(),
                if details.is_empty() { "both groups sum to 0 for both witnesses".into() } else { details.join(", ") },
            )
        })(),
    );

    s.record(
        "example2 verdicts",
        "Ex2",
        (|| {
            let mut r = decide_product_properties(&[sd(), sd(), sd()])?;
            let undecided = r.status(Property::ICharacteristic) == Status::Undecided;
            let f = fixture("example2-w1")?;
            r.refine_with_witness(&f.kernel, &f.witness)?;
            let ok = undecided
                && r.status(Property::ICharacteristic) == Status::Fails
                && r.status(Property::Tensor0Characteristic) == Status::Holds;
            pass_if(ok, statuses(&r))
        })(),
    );

    s.record(
        "example3 row equality",
        "Ex3",
        (|| {
            let a = fixture("example3")?.witness.witness;
            let ok = (0..2).all(|i2| (0..2).all(|i3| a.get(&[0, i2, i3]) == a.get(&[1, i2, i3]))) && a.mass().is_zero();
            pass_if(ok, "a(1,i,j) = a(2,i,j) for all i, j and zero mass")
        })(),
    );

    s.record(
        "example3 verdicts",
        "Ex3",
        (|| {
            let ks = [sd(), FiniteKernel::delta(2), FiniteKernel::delta(2)];
            let mut r = decide_product_properties(&ks)?;
            let premises = r.components[0].characteristic.status == Status::Holds
                && r.components[1].universal.status == Status::Holds
                && r.components[2].universal.status == Status::Holds;
            let f = fixture("example3")?;
            r.refine_with_witness(&f.kernel, &f.witness)?;
            pass_if(premises && r.status(Property::ICharacteristic) == Status::Fails, statuses(&r))
        })(),
    );

    s.record(
        "collision construction",
        "Thm2ii",
        (|| {
            let mut rng = ChaCha8Rng::seed_from_u64(2);
            for trial in 0..10 {
                let n = 2 + trial % 3;
                let base = random_gram(&mut rng, n, 2);
                // Blending with the all-ones kernel keeps the zero-sum null space when present.
                let k1 = FiniteKernel::from_fn(n, |i, j| &base.gram()[[i, j]] + Rational::one())?;
                let Some((p, q)) = find_embedding_collision(&k1) else { continue };
                let mut comps = vec![k1, FiniteKernel::delta(2)];
                let mut tails = Vec::new();
                for _ in 0..trial % 3 {
                    comps.push(sd());
                    tails.push(vec![rat(1, 2), rat(1, 2)]);
                }
                let kernel = ProductKernel::new(comps)?;
                let (_, report) = thm2ii_construct(&kernel, (&p, &q), (0, 1), &tails)?;
                if !report.is_certified() {
                    return pass_if(false, format!("trial {trial}: {}", verify_witness(&kernel, &report)?.summary()));
                }
            }
            pass_if(true, "constructed witnesses have zero embedding and are nonzero")
        })(),
    );

    s.record(
        "product universality spot checks",
        "Thm4",
        (|| {
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            for _ in 0..20 {
                let m = rng.random_range(2..=3);
                let comps: Vec<FiniteKernel<Rational>> = (0..m)
                    .map(|_| {
                        let n = rng.random_range(2..=3);
                        let rank = rng.random_range(1..=n);
                        random_gram(&mut rng, n, rank)
                    })
                    .collect();
                let explicit = FiniteKernel::new(ProductKernel::new(comps.clone())?.kronecker_gram())?;
                let rule = decide_product_properties(&comps)?.status(Property::Universal) == Status::Holds;
                let direct = is_universal_finite(&explicit).status == Status::Holds;
                let char_direct = is_characteristic_finite(&explicit).status == Status::Holds;
                if rule != direct || char_direct != direct {
                    return pass_if(false, "rule and explicit Kronecker Gram disagree");
                }
            }
            pass_if(true, "20 random products agree with the explicit Gram")
        })(),
    );

    s.record(
        "product factorization spot checks",
        "Rem1iii",
        (|| {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            for _ in 0..20 {
                let comps: Vec<FiniteKernel<Rational>> = (0..3).map(|_| random_gram(&mut rng, 2, 2)).collect();
                let factors: Vec<Vec<Rational>> = (0..3)
                    .map(|_| (0..2).map(|_| rat(rng.random_range(-5..=5), rng.random_range(1..=4))).collect())
                    .collect();
                let kernel = ProductKernel::new(comps.clone())?;
                let lhs = kernel.quad_form(&outer(&factors)?)?;
                let rhs = comps.iter().zip(&factors).fold(Rational::one(), |acc, (k, f)| acc * k.quad(f));
                if lhs != rhs {
                    return pass_if(false, format!("{lhs} != {rhs}"));
                }
            }
            pass_if(true, "quad form of a product equals the product of quad forms")
        })(),
    );

    s.checks
}

fn reproduce(format: Format, corrupt: Option<&str>) -> Output {
    if let Some(name) = corrupt {
        if let Err(e) = fixture(name) {
            return Output::input_error(&e);
        }
    }
    let checks = reproduction_checks(corrupt);
    let failed: Vec<&Check> = checks.iter().filter(|c| !c.passed).collect();
    let stdout = match format {
        Format::Json => to_pretty(&json!({
            "command": "reproduce",
            "config": { "format": format_name(format), "corrupt": corrupt },
            "checks": checks.iter().map(|c| json!({
                "name": c.name, "anchor": c.anchor, "passed": c.passed, "detail": c.detail,
            })).collect::<Vec<_>>(),
            "passed": checks.len() - failed.len(),
            "failed": failed.len(),
        })),
        Format::Markdown => {
            let mut md =
                String::from("# Reproduction suite\n\n| check | anchor | result | detail |\n|---|---|---|---|\n");
            for c in &checks {
                md.push_str(&format!(
                    "| {} | {} | {} | {} |\n",
                    c.name,
                    c.anchor,
                    if c.passed { "pass" } else { "FAIL" },
                    c.detail
                ));
            }
            md.push_str(&format!("\n{} passed, {} failed\n", checks.len() - failed.len(), failed.len()));
            md
        }
    };
    match failed.first() {
        None => Output::ok(EXIT_OK, stdout),
        Some(first) => Output {
            code: EXIT_SUITE_FAILURE,
            stdout,
            stderr: format!("check failed: {} ({})\n", first.name, first.detail),
        },
    }
}

// -------------------------------------------------------------------- check

fn search_config_json(c: &SearchConfig) -> Value {
    json!({ "budget": c.budget, "seed": c.seed, "delta": c.delta })
}

fn outcome_json(outcome: &SearchOutcome) -> Value {
    match outcome {
        SearchOutcome::Found { report, restart, evaluations } => json!({
            "outcome": "found",
            "message": "exact witness found and verified",
            "restart": restart,
            "evaluations": evaluations,
            "witness": witness_to_json(report),
        }),
        SearchOutcome::Certified { tag, reason } => json!({
            "outcome": "certified",
            "message": format!("certified I-characteristic ({tag})"),
            "citation": tag,
            "reason": reason,
        }),
        SearchOutcome::Inconclusive { restarts, evaluations } => json!({
            "outcome": "inconclusive",
            "message": "no witness found within budget: inconclusive",
            "restarts": restarts,
            "evaluations": evaluations,
        }),
    }
}

fn decide_spec(spec: &KernelSpec, search: Option<&SearchConfig>) -> Result<(PropertyReport, Option<Value>)> {
    if let Some(kernel) = spec.as_finite_product() {
        let mut report = decide_product_properties(kernel.components())?;
        let mut search_json = None;
        if let Some(config) = search {
            if report.status(Property::ICharacteristic) == Status::Undecided {
                let outcome = search_i_witness(&kernel, config)?;
                if let Some(w) = outcome.report() {
                    report.refine_with_witness(&kernel, w)?;
                }
                search_json = Some(outcome_json(&outcome));
            }
        }
        return Ok((report, search_json));
    }
    if let Some(ks) = spec.as_continuous() {
        if search.is_some() {
            return Err(Error::Input("--search needs a finite product kernel".into()));
        }
        return Ok((classify_translation_invariant(&ks)?, None));
    }
    Err(Error::Input("kernel components must be all finite or all continuous".into()))
}

fn certificate_summary(c: Option<&Certificate>) -> String {
    match c {
        None => "none".into(),
        Some(Certificate::Pivots(p)) => {
            format!("pivots [{}]", p.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "))
        }
        Some(Certificate::Witness(w)) => {
            format!("witness [{}]", w.to_flat().iter().map(ToString::to_string).collect::<Vec<_>>().join(", "))
        }
        Some(Certificate::IWitness(r)) => format!(
            "I-witness [{}]",
            r.witness.to_flat().iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
        ),
        Some(Certificate::Rule { tag, premises }) => {
            if premises.is_empty() {
                format!("rule {tag}")
            } else {
                format!("rule {tag} from {}", premises.join("; "))
            }
        }
    }
}

fn report_markdown(title: &str, r: &PropertyReport) -> String {
    let mut md = format!("# {title}\n\n## Components\n\n| component | characteristic | universal |\n|---|---|---|\n");
    for (i, c) in r.components.iter().enumerate() {
        md.push_str(&format!("| k{} | {:?} | {:?} |\n", i + 1, c.characteristic.status, c.universal.status));
    }
    md.push_str("\n## Product\n\n| property | status | citation | certificate |\n|---|---|---|---|\n");
    for p in [
        Property::Universal,
        Property::Characteristic,
        Property::TensorCharacteristic,
        Property::Tensor0Characteristic,
        Property::ICharacteristic,
    ] {
        let v = r.verdict(p);
        md.push_str(&format!(
            "| {p} | {:?} | {} | {} |\n",
            v.status,
            v.citation.unwrap_or("-"),
            certificate_summary(v.certificate.as_ref())
        ));
    }
    md.push_str("\n## Derivation\n\n");
    for t in &r.trace {
        md.push_str(&format!("- {t}\n"));
    }
    md
}

fn check(path: &Path, search: Option<&SearchConfig>, format: Format) -> Output {
    let result = json::load_kernel_spec(path).and_then(|spec| decide_spec(&spec, search));
    let (report, search_json) = match result {
        Ok(r) => r,
        Err(e) => return Output::input_error(&e),
    };
    let stdout = match format {
        Format::Json => {
            let mut v = property_report_to_json(&report);
            let map = v.as_object_mut().expect("object");
            map.insert("command".into(), "check".into());
            map.insert(
                "config".into(),
                json!({
                    "kernel": path.display().to_string(),
                    "search": search.map(search_config_json),
                    "format": format_name(format),
                }),
            );
            if let Some(s) = search_json {
                map.insert("search".into(), s);
            }
            to_pretty(&v)
        }
        Format::Markdown => {
            let mut md = report_markdown(&format!("Properties of {}", path.display()), &report);
            if let Some(s) = search_json {
                md.push_str(&format!("\nSearch: {}\n", s["message"].as_str().unwrap_or_default()));
            }
            md
        }
    };
    Output::ok(EXIT_OK, stdout)
}

// ----------------------------------------------------------- witness-search

fn witness_search(path: &Path, config: &SearchConfig, format: Format) -> Output {
    let outcome = json::load_kernel_spec(path).and_then(|spec| {
        let kernel = spec.as_finite_product().ok_or_else(|| {
            Error::Input("witness search needs finite kernels; continuous components are not supported".into())
        })?;
        search_i_witness(&kernel, config)
    });
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => return Output::input_error(&e),
    };
    let code = match outcome {
        SearchOutcome::Inconclusive { .. } => EXIT_INCONCLUSIVE,
        _ => EXIT_OK,
    };
    let body = outcome_json(&outcome);
    let stdout = match format {
        Format::Json => {
            let mut v = body;
            let map = v.as_object_mut().expect("object");
            map.insert("command".into(), "witness-search".into());
            map.insert("config".into(), json!({ "kernel": path.display().to_string(), "search": search_config_json(config), "format": format_name(format) }));
            to_pretty(&v)
        }
        Format::Markdown => {
            let mut md =
                format!("# Witness search on {}\n\n{}\n", path.display(), body["message"].as_str().unwrap_or_default());
            if let Some(w) = outcome.report() {
                md.push_str("\n| index | P | A |\n|---|---|---|\n");
                let p = w.joint.as_ref().map(|p| p.measure().to_flat());
                for (i, (idx, a)) in crate::measure::indices(w.witness.shape()).zip(w.witness.to_flat()).enumerate() {
                    let one_based: Vec<String> = idx.iter().map(|x| (x + 1).to_string()).collect();
                    let pv = p.as_ref().map_or("-".to_string(), |p| p[i].to_string());
                    md.push_str(&format!("| ({}) | {pv} | {a} |\n", one_based.join(",")));
                }
                md.push_str(&format!("\nquad form = {}\n", w.quad_form));
            }
            md
        }
    };
    Output::ok(code, stdout)
}

// --------------------------------------------------------------------- hsic

#[derive(Clone, Debug, PartialEq)]
pub struct HsicOptions {
    pub csv: PathBuf,
    pub groups: Option<String>,
    pub kernel: String,
    pub bandwidth: Option<f64>,
    pub perms: usize,
    pub seed: u64,
    pub format: Format,
}

/// Parses `"0-1,2,3-5"` into column groups and checks they partition `0..ncols`.
pub fn parse_groups(spec: &str, ncols: usize) -> Result<Vec<Vec<usize>>> {
    let bad = |part: &str| Error::Input(format!("malformed group {part:?} in {spec:?}"));
    let mut groups = Vec::new();
    let mut owner = vec![None; ncols];
    for (g, part) in spec.split(',').enumerate() {
        let part = part.trim();
        let (lo, hi) = match part.split_once('-') {
            Some((a, b)) => {
                (a.trim().parse::<usize>().map_err(|_| bad(part))?, b.trim().parse::<usize>().map_err(|_| bad(part))?)
            }
            None => {
                let c = part.parse::<usize>().map_err(|_| bad(part))?;
                (c, c)
            }
        };
        if lo > hi {
            return Err(bad(part));
        }
        if hi >= ncols {
            return Err(Error::Input(format!(
                "group {part:?} refers to column {hi}, but the file has {ncols} columns"
            )));
        }
        for (c, slot) in owner.iter_mut().enumerate().take(hi + 1).skip(lo) {
            if let Some(prev) = slot.replace(g) {
                return Err(Error::Input(format!("column {c} is in groups {} and {}", prev + 1, g + 1)));
            }
        }
        groups.push((lo..=hi).collect());
    }
    let missing: Vec<usize> = (0..ncols).filter(|&c| owner[c].is_none()).collect();
    if !missing.is_empty() {
        return Err(Error::Input(format!("columns {missing:?} are not assigned to any group")));
    }
    Ok(groups)
}

/// Reads a numeric CSV with a header row.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Array2<f64>)> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let mut values = Vec::new();
    let mut rows = 0;
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        for (c, field) in record.iter().enumerate() {
            let x: f64 = field
                .parse()
                .map_err(|_| Error::Input(format!("row {} column {}: {field:?} is not a number", r + 1, c)))?;
            values.push(x);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Input("no data rows".into()));
    }
    let data = Array2::from_shape_vec((rows, header.len()), values).map_err(|e| Error::Input(e.to_string()))?;
    Ok((header, data))
}

fn run_hsic(opts: &HsicOptions) -> Result<(Vec<Vec<usize>>, TestResult)> {
    let (_, data) = read_csv(&opts.csv)?;
    let groups = match &opts.groups {
        Some(g) => parse_groups(g, data.ncols())?,
        None => (0..data.ncols()).map(|c| vec![c]).collect(),
    };
    if groups.len() < 2 {
        return Err(Error::Input("independence testing needs at least two components".into()));
    }
    let samples = SampleBlock::from_columns(data.view(), &groups)?;
    let family = Family::parse(&opts.kernel)?;
    let kernels = (0..samples.order())
        .map(|m| {
            let bandwidth = if family.needs_bandwidth() {
                opts.bandwidth.unwrap_or_else(|| median_heuristic(samples.group(m)))
            } else {
                1.0
            };
            ContinuousKernel::new(family, bandwidth, samples.dims()[m])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((groups, permutation_test(&samples, &kernels, opts.perms, opts.seed)?))
}

pub fn hsic(opts: &HsicOptions) -> Output {
    let (groups, result) = match run_hsic(opts) {
        Ok(r) => r,
        Err(e) => return Output::input_error(&e),
    };
    let stdout = match opts.format {
        Format::Json => to_pretty(&json!({
            "command": "hsic",
            "config": {
                "csv": opts.csv.display().to_string(),
                "groups": groups,
                "kernel": opts.kernel,
                "bandwidth": opts.bandwidth,
                "perms": opts.perms,
                "seed": opts.seed,
                "format": format_name(opts.format),
            },
            "result": json::test_result_to_json(&result),
        })),
        Format::Markdown => {
            let bw: Vec<String> = result.bandwidths.iter().map(|b| format!("{b:.6}")).collect();
            format!(
                "# dHSIC permutation test on {}\n\n| n | statistic | p-value | permutations | seed | bandwidths |\n|---|---|---|---|---|---|\n| {} | {:.6e} | {:.6} | {} | {} | {} |\n",
                opts.csv.display(),
                result.n,
                result.statistic,
                result.p_value,
                result.permutations,
                result.seed,
                bw.join(", ")
            )
        }
    };
    Output::ok(EXIT_OK, stdout)
}
