//! Closed-form family of three-component witnesses for `⊗³ (2δ−1)`.
//!
//! Six entries of `P` are free parameters `z₀ … z₅`; `p₁₁₁` and `p₂₁₁` are
//! rational functions of them chosen so that `A = P − ⊗ P_m` satisfies both
//! parity constraints. Feasibility is checked on the generated `P` directly.

use num_traits::{One, Signed, Zero};

use super::{Origin, WitnessReport};
use crate::kernel::{FiniteKernel, ProductKernel};
use crate::measure::{i_class_element, JointDistribution, MeasureClass, SignedMeasure};
use crate::scalar::Rational;
use crate::{Error, Result};

/// The two parity groups of `A` whose sums must vanish: even and odd numbers
/// of second indices, 0-based.
pub const PARITY_CONSTRAINTS: [[[usize; 3]; 4]; 2] =
    [[[0, 0, 0], [0, 1, 1], [1, 0, 1], [1, 1, 0]], [[0, 0, 1], [0, 1, 0], [1, 0, 0], [1, 1, 1]]];

/// Monomials `(coefficient, exponents of z₀ … z₅)`.
type Polynomial = &'static [(i64, [u8; 6])];

const NUM_111: Polynomial = &[
    (1, [0, 1, 0, 0, 0, 0]),
    (1, [0, 0, 1, 0, 0, 0]),
    (1, [0, 0, 0, 0, 1, 0]),
    (1, [0, 0, 0, 0, 0, 1]),
    (-1, [1, 1, 0, 0, 0, 0]),
    (-2, [1, 0, 1, 0, 0, 0]),
    (-1, [1, 0, 0, 1, 0, 0]),
    (-2, [1, 0, 0, 0, 1, 0]),
    (-1, [1, 0, 0, 0, 0, 1]),
    (-1, [0, 2, 0, 0, 0, 0]),
    (-3, [0, 1, 1, 0, 0, 0]),
    (-2, [0, 1, 0, 1, 0, 0]),
    (-4, [0, 1, 0, 0, 1, 0]),
    (-3, [0, 1, 0, 0, 0, 1]),
    (-1, [0, 0, 2, 0, 0, 0]),
    (-1, [0, 0, 1, 1, 0, 0]),
    (-4, [0, 0, 1, 0, 1, 0]),
    (-3, [0, 0, 1, 0, 0, 1]),
    (-2, [0, 0, 0, 1, 1, 0]),
    (-1, [0, 0, 0, 1, 0, 1]),
    (-3, [0, 0, 0, 0, 2, 0]),
    (-4, [0, 0, 0, 0, 1, 1]),
    (-1, [0, 0, 0, 0, 0, 2]),
    (2, [1, 1, 1, 0, 0, 0]),
    (2, [1, 1, 0, 1, 0, 0]),
    (2, [1, 1, 0, 0, 1, 0]),
    (2, [1, 1, 0, 0, 0, 1]),
    (2, [1, 0, 2, 0, 0, 0]),
    (2, [1, 0, 1, 1, 0, 0]),
    (4, [1, 0, 1, 0, 1, 0]),
    (2, [1, 0, 1, 0, 0, 1]),
    (2, [1, 0, 0, 1, 1, 0]),
    (2, [1, 0, 0, 0, 2, 0]),
    (2, [1, 0, 0, 0, 1, 1]),
    (2, [0, 2, 1, 0, 0, 0]),
    (2, [0, 2, 0, 1, 0, 0]),
    (2, [0, 2, 0, 0, 1, 0]),
    (2, [0, 2, 0, 0, 0, 1]),
    (2, [0, 1, 2, 0, 0, 0]),
    (2, [0, 1, 1, 1, 0, 0]),
    (6, [0, 1, 1, 0, 1, 0]),
    (4, [0, 1, 1, 0, 0, 1]),
    (4, [0, 1, 0, 1, 1, 0]),
    (2, [0, 1, 0, 1, 0, 1]),
    (4, [0, 1, 0, 0, 2, 0]),
    (6, [0, 1, 0, 0, 1, 1]),
    (2, [0, 1, 0, 0, 0, 2]),
    (2, [0, 0, 2, 0, 1, 0]),
    (2, [0, 0, 2, 0, 0, 1]),
    (2, [0, 0, 1, 1, 1, 0]),
    (2, [0, 0, 1, 1, 0, 1]),
    (4, [0, 0, 1, 0, 2, 0]),
    (6, [0, 0, 1, 0, 1, 1]),
    (2, [0, 0, 1, 0, 0, 2]),
    (2, [0, 0, 0, 1, 2, 0]),
    (2, [0, 0, 0, 1, 1, 1]),
    (2, [0, 0, 0, 0, 3, 0]),
    (4, [0, 0, 0, 0, 2, 1]),
    (2, [0, 0, 0, 0, 1, 2]),
];
const NUM_211: Polynomial = &[
    (1, [1, 0, 0, 0, 0, 0]),
    (1, [0, 0, 0, 1, 0, 0]),
    (1, [0, 0, 0, 0, 1, 0]),
    (1, [0, 0, 0, 0, 0, 1]),
    (-1, [2, 0, 0, 0, 0, 0]),
    (-1, [1, 1, 0, 0, 0, 0]),
    (-2, [1, 0, 1, 0, 0, 0]),
    (-3, [1, 0, 0, 1, 0, 0]),
    (-3, [1, 0, 0, 0, 1, 0]),
    (-4, [1, 0, 0, 0, 0, 1]),
    (-1, [0, 1, 1, 0, 0, 0]),
    (-2, [0, 1, 0, 1, 0, 0]),
    (-1, [0, 1, 0, 0, 1, 0]),
    (-2, [0, 1, 0, 0, 0, 1]),
    (-1, [0, 0, 1, 1, 0, 0]),
    (-1, [0, 0, 1, 0, 1, 0]),
    (-2, [0, 0, 1, 0, 0, 1]),
    (-1, [0, 0, 0, 2, 0, 0]),
    (-3, [0, 0, 0, 1, 1, 0]),
    (-4, [0, 0, 0, 1, 0, 1]),
    (-1, [0, 0, 0, 0, 2, 0]),
    (-4, [0, 0, 0, 0, 1, 1]),
    (-3, [0, 0, 0, 0, 0, 2]),
    (2, [2, 0, 1, 0, 0, 0]),
    (2, [2, 0, 0, 1, 0, 0]),
    (2, [2, 0, 0, 0, 1, 0]),
    (2, [2, 0, 0, 0, 0, 1]),
    (2, [1, 1, 1, 0, 0, 0]),
    (2, [1, 1, 0, 1, 0, 0]),
    (2, [1, 1, 0, 0, 1, 0]),
    (2, [1, 1, 0, 0, 0, 1]),
    (2, [1, 0, 1, 1, 0, 0]),
    (2, [1, 0, 1, 0, 1, 0]),
    (4, [1, 0, 1, 0, 0, 1]),
    (2, [1, 0, 0, 2, 0, 0]),
    (4, [1, 0, 0, 1, 1, 0]),
    (6, [1, 0, 0, 1, 0, 1]),
    (2, [1, 0, 0, 0, 2, 0]),
    (6, [1, 0, 0, 0, 1, 1]),
    (4, [1, 0, 0, 0, 0, 2]),
    (2, [0, 1, 1, 1, 0, 0]),
    (2, [0, 1, 1, 0, 0, 1]),
    (2, [0, 1, 0, 2, 0, 0]),
    (2, [0, 1, 0, 1, 1, 0]),
    (4, [0, 1, 0, 1, 0, 1]),
    (2, [0, 1, 0, 0, 1, 1]),
    (2, [0, 1, 0, 0, 0, 2]),
    (2, [0, 0, 1, 1, 1, 0]),
    (2, [0, 0, 1, 1, 0, 1]),
    (2, [0, 0, 1, 0, 1, 1]),
    (2, [0, 0, 1, 0, 0, 2]),
    (2, [0, 0, 0, 2, 1, 0]),
    (2, [0, 0, 0, 2, 0, 1]),
    (2, [0, 0, 0, 1, 2, 0]),
    (6, [0, 0, 0, 1, 1, 1]),
    (4, [0, 0, 0, 1, 0, 2]),
    (2, [0, 0, 0, 0, 2, 1]),
    (4, [0, 0, 0, 0, 1, 2]),
    (2, [0, 0, 0, 0, 0, 3]),
];
const DEN: Polynomial = &[
    (-1, [1, 0, 0, 0, 0, 0]),
    (-1, [0, 1, 0, 0, 0, 0]),
    (-1, [0, 0, 1, 0, 0, 0]),
    (-1, [0, 0, 0, 1, 0, 0]),
    (-2, [0, 0, 0, 0, 1, 0]),
    (-2, [0, 0, 0, 0, 0, 1]),
    (2, [1, 0, 1, 0, 0, 0]),
    (2, [1, 0, 0, 1, 0, 0]),
    (2, [1, 0, 0, 0, 1, 0]),
    (2, [1, 0, 0, 0, 0, 1]),
    (2, [0, 1, 1, 0, 0, 0]),
    (2, [0, 1, 0, 1, 0, 0]),
    (2, [0, 1, 0, 0, 1, 0]),
    (2, [0, 1, 0, 0, 0, 1]),
    (2, [0, 0, 1, 0, 1, 0]),
    (2, [0, 0, 1, 0, 0, 1]),
    (2, [0, 0, 0, 1, 1, 0]),
    (2, [0, 0, 0, 1, 0, 1]),
    (2, [0, 0, 0, 0, 2, 0]),
    (4, [0, 0, 0, 0, 1, 1]),
    (2, [0, 0, 0, 0, 0, 2]),
];

fn evaluate(poly: Polynomial, z: &[Rational; 6]) -> Rational {
    poly.iter().fold(Rational::zero(), |acc, (c, exps)| {
        let term = exps
            .iter()
            .zip(z)
            .fold(Rational::from_integer((*c).into()), |t, (&e, x)| t * num_traits::pow(x.clone(), e as usize));
        acc + term
    })
}

/// Parameters `z₀ … z₅ ∈ [0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SignCubeFamily {
    z: [Rational; 6],
}

impl SignCubeFamily {
    pub fn new(z: [Rational; 6]) -> Result<Self> {
        if let Some(i) = z.iter().position(|x| x.is_negative() || x > &Rational::one()) {
            return Err(Error::Constraint(format!("z{i} = {} outside [0, 1]", z[i])));
        }
        Ok(Self { z })
    }

    pub fn z(&self) -> &[Rational; 6] {
        &self.z
    }

    /// The joint `P(z)` and the report of `A(P)` against `⊗³ (2δ−1)`.
    ///
    /// Fails with [`Error::Constraint`] naming the first violated condition:
    /// vanishing denominator, an entry outside `[0, 1]`, total mass, or a
    /// parity group.
    pub fn generate(&self) -> Result<(JointDistribution<Rational>, WitnessReport)> {
        let z = &self.z;
        let den = evaluate(DEN, z);
        if den.is_zero() {
            return Err(Error::Constraint("denominator of p111 and p211 vanishes".into()));
        }
        let p111 = -evaluate(NUM_111, z) / &den;
        let p211 = -evaluate(NUM_211, z) / &den;
        let [z0, z1, z2, z3, z4, z5] = z.clone();
        let entries = vec![p111, z2, z1, z4, p211, z3, z0, z5];
        for (i, p) in entries.iter().enumerate() {
            if p.is_negative() || p > &Rational::one() {
                return Err(Error::Constraint(format!(
                    "p{} = {p} outside [0, 1]",
                    label(&crate::measure::indices(&[2, 2, 2]).nth(i).expect("eight entries"))
                )));
            }
        }
        let measure = SignedMeasure::new(&[2, 2, 2], entries)?;
        let mass = measure.mass();
        if !mass.is_one() {
            return Err(Error::Constraint(format!("entries sum to {mass}, not 1")));
        }
        let p = JointDistribution::new(measure)?;
        let a = i_class_element(&p)?;
        for (g, group) in PARITY_CONSTRAINTS.iter().enumerate() {
            let s = group.iter().fold(Rational::zero(), |acc, idx| acc + a.get(idx));
            if !s.is_zero() {
                let names: Vec<String> = group.iter().map(|idx| format!("a{}", label(idx))).collect();
                return Err(Error::Constraint(format!("parity group {} sums to {s}: {}", g + 1, names.join(" + "))));
            }
        }
        let kernel = ProductKernel::new(vec![FiniteKernel::signed_delta(); 3])?;
        let report = WitnessReport::assess(&kernel, a, MeasureClass::I, Origin::Construction, Some(p.clone()))?;
        Ok((p, report))
    }
}

fn label(idx: &[usize]) -> String {
    idx.iter().map(|i| (i + 1).to_string()).collect()
}
