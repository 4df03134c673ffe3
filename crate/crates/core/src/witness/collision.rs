//! Witnesses against I-characteristic built from a non-characteristic component.
//!
//! If `μ_{k_m}(P) = μ_{k_m}(P′)` for distinct `P, P′`, the joint
//! `F = (P ⊗ δ_z + P′ ⊗ δ_{z′}) ⊗ Q / 2` (with `P, P′` on component `m`, the
//! Diracs on a partner component and fixed distributions `Q` elsewhere) has
//! `F − ⊗ F_m = (P − P′)/4 ⊗ (δ_z − δ_{z′}) ⊗ Q`, which is nonzero and has
//! zero embedding.

use num_traits::{One, Signed, Zero};

use super::{Origin, WitnessReport};
use crate::kernel::{FiniteKernel, ProductKernel};
use crate::measure::{i_class_element, outer, total, JointDistribution, MeasureClass};
use crate::property::zero_sum_null_space;
use crate::scalar::Rational;
use crate::{Error, Result};

/// Two distinct distributions with equal embeddings under `k`, or `None` when
/// `k` is characteristic.
///
/// The zero-sum null vector `v` (sum of the null-space basis) is split into
/// positive and negative parts, each normalized by `s = Σ v⁺ = Σ v⁻`.
pub fn find_embedding_collision(
    k: &FiniteKernel<Rational>,
) -> Option<(JointDistribution<Rational>, JointDistribution<Rational>)> {
    let basis = zero_sum_null_space(k);
    let mut v = vec![Rational::zero(); k.size()];
    for b in &basis {
        for (x, y) in v.iter_mut().zip(b) {
            *x += y;
        }
    }
    if v.iter().all(Zero::is_zero) {
        return None;
    }
    let plus: Vec<Rational> = v.iter().map(|x| if x.is_positive() { x.clone() } else { Rational::zero() }).collect();
    let minus: Vec<Rational> = v.iter().map(|x| if x.is_negative() { -x } else { Rational::zero() }).collect();
    let s = total(&plus);
    let normalize = |w: Vec<Rational>| {
        JointDistribution::from_flat(&[w.len()], w.into_iter().map(|x| x / &s).collect())
            .expect("normalized nonnegative vector")
    };
    Some((normalize(plus), normalize(minus)))
}

fn distribution_vector(p: &JointDistribution<Rational>, n: usize, what: &str) -> Result<Vec<Rational>> {
    if p.shape() != [n] {
        return Err(Error::ShapeMismatch(format!(
            "{what} must be a distribution on {n} points, got shape {:?}",
            p.shape()
        )));
    }
    Ok(p.measure().to_flat())
}

/// Builds the joint `F` from a collision on component `m`, Diracs at `z.0` and
/// `z.1` on component `partner`, and `tails` (distributions on the remaining
/// components in increasing order), with the report of `F − ⊗ F_m`.
///
/// Identical collision distributions give a zero measure; the report then has
/// `nonzero = false`.
pub fn lift_collision(
    kernel: &ProductKernel<Rational>,
    m: usize,
    collision: (&JointDistribution<Rational>, &JointDistribution<Rational>),
    partner: usize,
    z: (usize, usize),
    tails: &[Vec<Rational>],
) -> Result<(JointDistribution<Rational>, WitnessReport)> {
    let order = kernel.order();
    if order < 2 {
        return Err(Error::SingleComponent);
    }
    for idx in [m, partner] {
        if idx >= order {
            return Err(Error::IndexOutOfRange { index: idx, order });
        }
    }
    if m == partner {
        return Err(Error::Constraint("collision and partner components must differ".into()));
    }
    let sizes = kernel.shape();
    if z.0 == z.1 || z.0 >= sizes[partner] || z.1 >= sizes[partner] {
        return Err(Error::Constraint(format!(
            "need two distinct points of component {} (size {}), got {} and {}",
            partner + 1,
            sizes[partner],
            z.0 + 1,
            z.1 + 1
        )));
    }
    let p = distribution_vector(collision.0, sizes[m], "first collision distribution")?;
    let q = distribution_vector(collision.1, sizes[m], "second collision distribution")?;
    let gap = kernel.components()[m].quad(&p.iter().zip(&q).map(|(a, b)| a - b).collect::<Vec<_>>());
    if !gap.is_zero() {
        return Err(Error::Constraint(format!("collision embeddings differ: MMD² = {gap}")));
    }
    let others: Vec<usize> = (0..order).filter(|&n| n != m && n != partner).collect();
    if tails.len() != others.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} tail distributions for {} components",
            tails.len(),
            others.len()
        )));
    }
    for (t, &n) in tails.iter().zip(&others) {
        if t.len() != sizes[n] || t.iter().any(Signed::is_negative) || !total(t).is_one() {
            return Err(Error::NotDistribution(format!(
                "tail for component {} is not a distribution on {} points",
                n + 1,
                sizes[n]
            )));
        }
    }
    let half = Rational::new(1.into(), 2.into());
    let branch = |first: &[Rational], point: usize| -> Result<_> {
        let mut tail = tails.iter();
        let factors: Vec<Vec<Rational>> = (0..order)
            .map(|n| {
                if n == m {
                    first.iter().map(|x| x * &half).collect()
                } else if n == partner {
                    let mut d = vec![Rational::zero(); sizes[n]];
                    d[point] = Rational::one();
                    d
                } else {
                    tail.next().expect("one tail per remaining component").clone()
                }
            })
            .collect();
        outer(&factors)
    };
    let f = JointDistribution::new(branch(&p, z.0)?.checked_add(&branch(&q, z.1)?)?)?;
    let a = i_class_element(&f)?;
    let report = WitnessReport::assess(kernel, a, MeasureClass::I, Origin::Construction, Some(f.clone()))?;
    Ok((f, report))
}

/// [`lift_collision`] with the collision on the first component and the
/// Diracs on the second.
pub fn thm2ii_construct(
    kernel: &ProductKernel<Rational>,
    collision: (&JointDistribution<Rational>, &JointDistribution<Rational>),
    z: (usize, usize),
    tails: &[Vec<Rational>],
) -> Result<(JointDistribution<Rational>, WitnessReport)> {
    lift_collision(kernel, 0, collision, 1, z, tails)
}
