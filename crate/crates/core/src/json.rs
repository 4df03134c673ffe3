//! JSON interchange formats.
//!
//! Rationals are strings `"p/q"` (integers may also be given as JSON numbers on
//! input). Tensors are flattened row-major, first index slowest. Indices in
//! documents are 1-based. Objects use sorted keys, so output is byte-stable.
//!
//! * measure: `{"shape": [2, 2], "entries": ["1/4", "-1/4", …]}`
//! * kernel: `{"components": [component, …]}` where a component is one of
//!   `{"type": "gram", "gram": [["2", "-1"], …]}`,
//!   `{"type": "discrete-delta" | "constant", "size": n}` (finite Grams),
//!   `{"type": "gaussian" | "laplacian", "bandwidth": h, "dim": d}` or
//!   `{"type": "discrete-delta" | "constant", "dim": d}` (kernels on `ℝ^d`).
//! * witness: a measure plus `quad_form`, `class`, `origin`, `nonzero`,
//!   `nonzero_entry`, `residuals` and, for the class `I`, `joint`.
//! * property report: per-component and product verdicts with certificates.

use std::path::Path;

use ndarray::Array2;
use serde_json::{json, Map, Value};

use crate::hsic::TestResult;
use crate::kernel::{ContinuousKernel, Family, FiniteKernel, KernelSpec};
use crate::measure::{JointDistribution, MeasureClass, SignedMeasure};
use crate::property::{Certificate, ComponentVerdicts, PropertyReport, Verdict};
use crate::scalar::{Rational, Scalar};
use crate::witness::{Origin, WitnessReport};
use crate::{Error, Result};

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| Error::Parse(format!("missing field {key:?}")))
}

fn as_usize(v: &Value, what: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| Error::Parse(format!("{what} must be a nonnegative integer, found {v}")))
}

fn as_array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| Error::Parse(format!("{what} must be an array, found {v}")))
}

pub fn rationals_to_json(xs: &[Rational]) -> Value {
    Value::Array(xs.iter().map(Scalar::to_json).collect())
}

fn rationals_from_json(v: &Value, what: &str) -> Result<Vec<Rational>> {
    as_array(v, what)?.iter().map(Rational::from_json).collect()
}

pub fn measure_to_json(m: &SignedMeasure<Rational>) -> Value {
    json!({ "shape": m.shape(), "entries": rationals_to_json(&m.to_flat()) })
}

pub fn measure_from_json(v: &Value) -> Result<SignedMeasure<Rational>> {
    let shape: Vec<usize> =
        as_array(field(v, "shape")?, "shape")?.iter().map(|s| as_usize(s, "shape entry")).collect::<Result<_>>()?;
    let entries = rationals_from_json(field(v, "entries")?, "entries")?;
    SignedMeasure::new(&shape, entries)
}

pub fn joint_from_json(v: &Value) -> Result<JointDistribution<Rational>> {
    JointDistribution::new(measure_from_json(v)?)
}

fn one_based(idx: &[usize]) -> Vec<usize> {
    idx.iter().map(|i| i + 1).collect()
}

pub fn witness_to_json(w: &WitnessReport) -> Value {
    let mut obj = measure_to_json(&w.witness);
    let map = obj.as_object_mut().expect("measure is an object");
    map.insert("quad_form".into(), w.quad_form.to_json());
    map.insert("class".into(), w.class.name().into());
    map.insert("origin".into(), w.origin.name().into());
    map.insert("nonzero".into(), w.nonzero.into());
    map.insert("nonzero_entry".into(), json!(one_based(&w.nonzero_entry)));
    let residuals: Map<String, Value> = w.residuals.iter().map(|(k, v)| (k.clone(), v.to_json())).collect();
    map.insert("residuals".into(), Value::Object(residuals));
    if let Some(p) = &w.joint {
        map.insert("joint".into(), measure_to_json(p.measure()));
    }
    obj
}

/// Reads a witness document as written, without recomputing anything; pass
/// the result to [`crate::witness::verify_witness`] to check it.
pub fn witness_from_json(v: &Value) -> Result<WitnessReport> {
    let witness = measure_from_json(v)?;
    let class = MeasureClass::parse(field(v, "class")?.as_str().unwrap_or_default())?;
    let origin = Origin::parse(field(v, "origin")?.as_str().unwrap_or_default())?;
    let quad_form = Rational::from_json(field(v, "quad_form")?)?;
    let nonzero = v.get("nonzero").and_then(Value::as_bool).unwrap_or_else(|| !witness.is_zero());
    let nonzero_entry = match v.get("nonzero_entry") {
        Some(e) => as_array(e, "nonzero_entry")?
            .iter()
            .map(|i| {
                as_usize(i, "nonzero_entry")
                    .and_then(|i| i.checked_sub(1).ok_or_else(|| Error::Parse("indices are 1-based".into())))
            })
            .collect::<Result<_>>()?,
        None => witness.max_abs_entry().0,
    };
    let residuals = match v.get("residuals") {
        Some(Value::Object(m)) => {
            m.iter().map(|(k, x)| Ok((k.clone(), Rational::from_json(x)?))).collect::<Result<_>>()?
        }
        Some(other) => return Err(Error::Parse(format!("residuals must be an object, found {other}"))),
        None => Default::default(),
    };
    let joint = v.get("joint").map(joint_from_json).transpose()?;
    Ok(WitnessReport { witness, class, quad_form, nonzero, nonzero_entry, residuals, origin, joint })
}

fn gram_from_json(v: &Value) -> Result<FiniteKernel<Rational>> {
    let rows = as_array(v, "gram")?;
    let n = rows.len();
    let mut entries = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        let row = rationals_from_json(row, "gram row")?;
        if row.len() != n {
            return Err(Error::InvalidKernel(format!("gram row {} has {} entries, expected {n}", i + 1, row.len())));
        }
        entries.extend(row);
    }
    let gram = Array2::from_shape_vec((n, n), entries).map_err(|e| Error::InvalidKernel(e.to_string()))?;
    FiniteKernel::new(gram)
}

fn component_from_json(v: &Value) -> Result<KernelSpec> {
    let kind = field(v, "type")?.as_str().ok_or_else(|| Error::Parse("component type must be a string".into()))?;
    if kind == "gram" {
        return Ok(KernelSpec::Finite(gram_from_json(field(v, "gram")?)?));
    }
    let family = Family::parse(kind)?;
    if let Some(size) = v.get("size") {
        let n = as_usize(size, "size")?;
        if n == 0 {
            return Err(Error::InvalidKernel("size must be at least 1".into()));
        }
        return match family {
            Family::DiscreteDelta => Ok(KernelSpec::Finite(FiniteKernel::delta(n))),
            Family::Constant => Ok(KernelSpec::Finite(FiniteKernel::constant(n))),
            _ => Err(Error::InvalidKernel(format!("{kind} kernels live on ℝ^d; give \"dim\", not \"size\""))),
        };
    }
    let dim = v.get("dim").map(|d| as_usize(d, "dim")).transpose()?.unwrap_or(1);
    let bandwidth = match v.get("bandwidth") {
        Some(b) => b.as_f64().ok_or_else(|| Error::Parse(format!("bandwidth must be a number, found {b}")))?,
        None if family.needs_bandwidth() => {
            return Err(Error::InvalidKernel(format!("{kind} kernel needs a bandwidth")));
        }
        None => 1.0,
    };
    Ok(KernelSpec::Continuous(ContinuousKernel::new(family, bandwidth, dim)?))
}

pub fn kernel_spec_from_json(v: &Value) -> Result<KernelSpec> {
    let comps = as_array(field(v, "components")?, "components")?;
    if comps.is_empty() {
        return Err(Error::EmptyFactors);
    }
    let parts = comps
        .iter()
        .enumerate()
        .map(|(m, c)| {
            component_from_json(c).map_err(|e| match e {
                Error::Parse(msg) => Error::Parse(format!("component {}: {msg}", m + 1)),
                Error::InvalidKernel(msg) => Error::InvalidKernel(format!("component {}: {msg}", m + 1)),
                other => other,
            })
        })
        .collect::<Result<_>>()?;
    Ok(KernelSpec::Product(parts))
}

pub fn kernel_spec_to_json(spec: &KernelSpec) -> Value {
    let comps: Vec<Value> = spec
        .components()
        .into_iter()
        .map(|c| match c {
            KernelSpec::Finite(k) => {
                let rows: Vec<Value> = k.gram().rows().into_iter().map(|r| rationals_to_json(&r.to_vec())).collect();
                json!({ "type": "gram", "gram": rows })
            }
            KernelSpec::Continuous(k) if k.family().needs_bandwidth() => {
                json!({ "type": k.family().name(), "bandwidth": k.bandwidth(), "dim": k.dim() })
            }
            KernelSpec::Continuous(k) => json!({ "type": k.family().name(), "dim": k.dim() }),
            KernelSpec::Product(_) => unreachable!("components are flattened"),
        })
        .collect();
    json!({ "components": comps })
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn load_kernel_spec(path: &Path) -> Result<KernelSpec> {
    kernel_spec_from_json(&read_json(path)?)
}

pub fn certificate_to_json(c: &Certificate) -> Value {
    match c {
        Certificate::Pivots(p) => json!({ "kind": "pivots", "pivots": rationals_to_json(p) }),
        Certificate::Witness(w) => {
            let mut v = measure_to_json(w);
            v.as_object_mut().expect("object").insert("kind".into(), "witness".into());
            v
        }
        Certificate::IWitness(r) => {
            let mut v = witness_to_json(r);
            v.as_object_mut().expect("object").insert("kind".into(), "i-witness".into());
            v
        }
        Certificate::Rule { tag, premises } => json!({ "kind": "rule", "tag": tag, "premises": premises }),
    }
}

pub fn verdict_to_json(v: &Verdict) -> Value {
    json!({
        "status": v.status,
        "provenance": v.provenance,
        "citation": v.citation,
        "certificate": v.certificate.as_ref().map(certificate_to_json),
    })
}

fn component_to_json(index: usize, c: &ComponentVerdicts) -> Value {
    json!({
        "index": index + 1,
        "characteristic": verdict_to_json(&c.characteristic),
        "universal": verdict_to_json(&c.universal),
    })
}

pub fn property_report_to_json(r: &PropertyReport) -> Value {
    let product: Map<String, Value> =
        r.product.iter().map(|(p, v)| (p.name().to_string(), verdict_to_json(v))).collect();
    json!({
        "components": r.components.iter().enumerate().map(|(i, c)| component_to_json(i, c)).collect::<Vec<_>>(),
        "product": product,
        "product_rule": r.product_rule,
        "trace": r.trace,
    })
}

pub fn test_result_to_json(t: &TestResult) -> Value {
    serde_json::to_value(t).expect("plain data")
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use crate::witness::{fixture, verify_witness, FIXTURE_NAMES};

    #[test]
    fn measure_round_trip() {
        let m = SignedMeasure::new(&[2, 3], (0..6).map(|i| rat(i - 2, 7)).collect()).unwrap();
        let v = measure_to_json(&m);
        assert_eq!(v["entries"][0], "-2/7");
        assert_eq!(measure_from_json(&v).unwrap(), m);
    }

    #[test]
    fn measures_reject_floats_and_bad_lengths() {
        assert!(measure_from_json(&json!({"shape": [2], "entries": [0.5, "1/2"]})).is_err());
        assert!(measure_from_json(&json!({"shape": [3], "entries": ["1/2", "1/2"]})).is_err());
        assert!(measure_from_json(&json!({"shape": [2], "entries": [1, "-1"]})).is_ok());
    }

    #[test]
    fn witness_round_trip() {
        for name in FIXTURE_NAMES {
            let f = fixture(name).unwrap();
            let v = witness_to_json(&f.witness);
            assert_eq!(v["quad_form"], "0");
            let back = witness_from_json(&v).unwrap();
            assert_eq!(back, f.witness);
            assert!(verify_witness(&f.kernel, &back).unwrap().ok);
        }
        let v = witness_to_json(&fixture("example2-w1").unwrap().witness);
        assert_eq!(v["class"], "I");
        assert_eq!(v["origin"], "fixture");
        assert_eq!(v["nonzero_entry"], json!([1, 1, 1]));
    }

    #[test]
    fn kernel_specs() {
        let v = json!({"components": [
            {"type": "gram", "gram": [["2", "-1"], [-1, 2]]},
            {"type": "discrete-delta", "size": 3},
            {"type": "constant", "size": 2}
        ]});
        let spec = kernel_spec_from_json(&v).unwrap();
        let k = spec.as_finite_product().unwrap();
        assert_eq!(k.shape(), vec![2, 3, 2]);
        let again = kernel_spec_from_json(&kernel_spec_to_json(&spec)).unwrap();
        assert_eq!(again.as_finite_product().unwrap(), k);

        let v = json!({"components": [{"type": "gaussian", "bandwidth": 0.5, "dim": 2}, {"type": "laplacian", "bandwidth": 1.0}]});
        let ks = kernel_spec_from_json(&v).unwrap().as_continuous().unwrap();
        assert_eq!(ks[0].dim(), 2);
        assert_eq!(ks[1].family(), Family::Laplacian);
    }

    #[test]
    fn kernel_spec_errors() {
        let not_psd = json!({"components": [{"type": "gram", "gram": [[0, 1], [1, 0]]}]});
        let err = kernel_spec_from_json(&not_psd).unwrap_err();
        assert!(matches!(&err, Error::NotPsd { certificate } if certificate == &["1", "-1"]), "{err}");
        let asym = json!({"components": [{"type": "gram", "gram": [[1, 0], [1, 1]]}]});
        assert!(matches!(kernel_spec_from_json(&asym), Err(Error::NotSymmetric { .. })));
        let no_bw = json!({"components": [{"type": "gaussian"}]});
        assert!(matches!(kernel_spec_from_json(&no_bw), Err(Error::InvalidKernel(_))));
        assert!(kernel_spec_from_json(&json!({"components": []})).is_err());
        assert!(kernel_spec_from_json(&json!({"components": [{"type": "cosine", "dim": 1}]})).is_err());
    }
}
