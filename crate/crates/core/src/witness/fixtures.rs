//! The worked examples as exact fixtures.

use num_traits::{One, Signed, Zero};

use super::{Origin, WitnessReport};
use crate::kernel::{FiniteKernel, ProductKernel};
use crate::measure::{i_class_element, outer, JointDistribution, MeasureClass};
use crate::scalar::{rat, Rational};
use crate::{Error, Result};

pub const FIXTURE_NAMES: [&str; 4] = ["example1", "example2-w1", "example2-w2", "example3"];

/// A kernel with a witness showing that it lacks some property.
#[derive(Clone, Debug, PartialEq)]
pub struct Fixture {
    pub name: &'static str,
    pub kernel: ProductKernel<Rational>,
    pub witness: WitnessReport,
}

fn signed_delta_product(m: usize) -> ProductKernel<Rational> {
    ProductKernel::new(vec![FiniteKernel::signed_delta(); m]).expect("nonempty")
}

fn tenths(entries: [i64; 8]) -> Vec<Rational> {
    entries.iter().map(|&p| rat(p, 10)).collect()
}

/// `P` of the first three-component witness: `p₁₁₁ = p₂₁₁ = 1/5`, others `1/10`.
pub(crate) fn w1_joint() -> JointDistribution<Rational> {
    JointDistribution::from_flat(&[2, 2, 2], tenths([2, 1, 1, 1, 2, 1, 1, 1])).expect("valid distribution")
}

/// `P` of the second three-component witness.
pub(crate) fn w2_joint() -> JointDistribution<Rational> {
    JointDistribution::from_flat(&[2, 2, 2], tenths([0, 1, 1, 1, 1, 1, 3, 2])).expect("valid distribution")
}

fn i_fixture(name: &'static str, kernel: ProductKernel<Rational>, p: JointDistribution<Rational>) -> Result<Fixture> {
    let a = i_class_element(&p)?;
    let witness = WitnessReport::assess(&kernel, a, MeasureClass::I, Origin::Fixture, Some(p))?;
    Ok(Fixture { name, kernel, witness })
}

/// Looks up a fixture by name. See [`FIXTURE_NAMES`].
///
/// * `example1`: `(2δ−1) ⊗ (2δ−1)` with the zero-mass product `(1,−1) ⊗ (1,1)`.
/// * `example2-w1`, `example2-w2`: `⊗³ (2δ−1)` with two joints whose
///   `P − ⊗ P_m` has zero embedding.
/// * `example3`: `(2δ−1) ⊗ δ ⊗ δ` with the joint of `example2-w1`.
pub fn fixture(name: &str) -> Result<Fixture> {
    match name {
        "example1" => {
            let kernel = signed_delta_product(2);
            let f = outer(&[vec![rat(1, 1), rat(-1, 1)], vec![rat(1, 1), rat(1, 1)]])?;
            let witness = WitnessReport::assess(&kernel, f, MeasureClass::SumZeroProduct, Origin::Fixture, None)?;
            Ok(Fixture { name: "example1", kernel, witness })
        }
        "example2-w1" => i_fixture("example2-w1", signed_delta_product(3), w1_joint()),
        "example2-w2" => i_fixture("example2-w2", signed_delta_product(3), w2_joint()),
        "example3" => {
            let kernel =
                ProductKernel::new(vec![FiniteKernel::signed_delta(), FiniteKernel::delta(2), FiniteKernel::delta(2)])?;
            i_fixture("example3", kernel, w1_joint())
        }
        other => Err(Error::Input(format!("unknown fixture {other:?}; expected one of {}", FIXTURE_NAMES.join(", ")))),
    }
}

/// Two-parameter family of 2×2 joints
/// `p₁₁ = a(1−s)/s, p₁₂ = b(1−s)/s, p₂₁ = a, p₂₂ = b` with `s = a + b`.
///
/// Every member factorizes; this is checked on the result.
pub fn factorizing_family(a: &Rational, b: &Rational) -> Result<JointDistribution<Rational>> {
    let one = Rational::one();
    let s = a + b;
    if a.is_negative() || b.is_negative() || a > &one || b > &one || s > one || s.is_zero() {
        return Err(Error::Constraint(format!("need 0 ≤ a, b ≤ 1 and 0 < a + b ≤ 1, got a = {a}, b = {b}")));
    }
    let rest = (&one - &s) / &s;
    let p = JointDistribution::from_flat(&[2, 2], vec![a * &rest, b * &rest, a.clone(), b.clone()])?;
    if !i_class_element(&p)?.is_zero() {
        return Err(Error::Inconsistent(format!("family member at a = {a}, b = {b} does not factorize")));
    }
    Ok(p)
}
