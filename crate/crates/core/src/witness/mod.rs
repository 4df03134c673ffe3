//! Witness measures: nonzero members of a measure class whose embedding
//! vanishes under a given product kernel.
//!
//! A [`WitnessReport`] is self-describing. [`verify_witness`] recomputes every
//! claim in exact arithmetic from the measure alone (plus the generating joint
//! distribution for the class `I`), so reports can be produced by fixtures,
//! constructions or a float search and checked the same way.

mod collision;
mod fixtures;
mod search;
mod sign_cube;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::kernel::ProductKernel;
use crate::linalg;
use crate::measure::{class_membership, i_class_element, JointDistribution, MeasureClass, SignedMeasure};
use crate::scalar::Rational;
use crate::{Error, Result};

pub use collision::{find_embedding_collision, lift_collision, thm2ii_construct};
pub use fixtures::{factorizing_family, fixture, Fixture, FIXTURE_NAMES};
pub use search::{
    hsic2_gradient, hsic2_objective, search_i_witness, SearchConfig, SearchOutcome, CANDIDATE_TOL, MAX_DENOMINATOR,
};
pub use sign_cube::{SignCubeFamily, PARITY_CONSTRAINTS};

/// How a witness was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    Fixture,
    Construction,
    Search,
}

impl Origin {
    pub fn name(self) -> &'static str {
        match self {
            Origin::Fixture => "fixture",
            Origin::Construction => "construction",
            Origin::Search => "search",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "fixture" => Origin::Fixture,
            "construction" => Origin::Construction,
            "search" => Origin::Search,
            other => return Err(Error::Parse(format!("unknown witness origin {other:?}"))),
        })
    }
}

/// A candidate witness together with the values that certify it.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessReport {
    pub witness: SignedMeasure<Rational>,
    pub class: MeasureClass,
    /// `‖μ_k(witness)‖²`; zero for a valid witness.
    pub quad_form: Rational,
    pub nonzero: bool,
    /// Index (0-based) of the largest absolute entry.
    pub nonzero_entry: Vec<usize>,
    /// Class constraint values, all zero for a member.
    pub residuals: BTreeMap<String, Rational>,
    pub origin: Origin,
    /// The joint distribution `P` with `witness = P − ⊗ P_m`, for the class `I`.
    pub joint: Option<JointDistribution<Rational>>,
}

impl WitnessReport {
    /// Evaluates `witness` against `kernel` and fills in every derived field.
    pub fn assess(
        kernel: &ProductKernel<Rational>,
        witness: SignedMeasure<Rational>,
        class: MeasureClass,
        origin: Origin,
        joint: Option<JointDistribution<Rational>>,
    ) -> Result<Self> {
        let quad_form = kernel.quad_form(&witness)?;
        let (nonzero_entry, largest) = witness.max_abs_entry();
        let residuals = class_residuals(&witness, class, joint.as_ref())?;
        Ok(Self { nonzero: !largest.is_zero(), witness, class, quad_form, nonzero_entry, residuals, origin, joint })
    }

    /// True when every recorded value certifies a witness.
    pub fn is_certified(&self) -> bool {
        self.nonzero && self.quad_form.is_zero() && self.residuals.values().all(Zero::is_zero)
    }
}

fn class_residuals(
    witness: &SignedMeasure<Rational>,
    class: MeasureClass,
    joint: Option<&JointDistribution<Rational>>,
) -> Result<BTreeMap<String, Rational>> {
    let mut residuals: BTreeMap<String, Rational> = class_membership(witness, class).residuals.into_iter().collect();
    if class == MeasureClass::I {
        residuals.insert("mass".into(), witness.mass());
        let p = joint.ok_or_else(|| Error::Constraint("a witness of class I needs its joint distribution".into()))?;
        let expected = i_class_element(p)?;
        let diff = witness.checked_sub(&expected)?;
        residuals.insert("joint_mismatch".into(), diff.max_abs_entry().1);
    }
    Ok(residuals)
}

/// Outcome of [`verify_witness`].
#[derive(Clone, Debug, PartialEq)]
pub struct Verification {
    pub ok: bool,
    /// Recomputed values: `quad_form`, the class residuals and, when the
    /// report disagrees with the recomputation, `reported_quad_form`.
    pub residuals: BTreeMap<String, Rational>,
    pub quad_form: Rational,
    pub nonzero: bool,
}

impl Verification {
    /// Names and values of the nonzero residuals, or `"ok"`.
    pub fn summary(&self) -> String {
        let mut parts: Vec<String> =
            self.residuals.iter().filter(|(_, v)| !v.is_zero()).map(|(k, v)| format!("{k} = {v}")).collect();
        if !self.nonzero {
            parts.push("witness is zero".into());
        }
        if parts.is_empty() {
            "ok".into()
        } else {
            parts.join(", ")
        }
    }
}

impl fmt::Display for Verification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.summary())
    }
}

/// Recomputes the quadratic form, nonzeroness and class residuals of `w`.
///
/// The quadratic form is evaluated with the explicit Kronecker Gram when it is
/// small and by mode products otherwise, never trusting `w.quad_form`.
pub fn verify_witness(kernel: &ProductKernel<Rational>, w: &WitnessReport) -> Result<Verification> {
    let shape = kernel.shape();
    if w.witness.shape() != shape.as_slice() {
        return Err(Error::ShapeMismatch(format!("witness shape {:?} vs kernel shape {:?}", w.witness.shape(), shape)));
    }
    let quad_form = if w.witness.len() <= 256 {
        linalg::quadratic(&kernel.kronecker_gram(), &w.witness.to_flat())
    } else {
        kernel.quad_form(&w.witness)?
    };
    let nonzero = w.witness.coefficients().iter().any(|x| !x.is_zero());
    let mut residuals = class_residuals(&w.witness, w.class, w.joint.as_ref())?;
    residuals.insert("quad_form".into(), quad_form.clone());
    if w.quad_form != quad_form {
        residuals.insert("reported_quad_form".into(), (&w.quad_form - &quad_form).abs());
    }
    let ok = nonzero && residuals.values().all(Zero::is_zero);
    Ok(Verification { ok, residuals, quad_form, nonzero })
}
