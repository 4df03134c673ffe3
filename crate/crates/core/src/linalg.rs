//! Dense linear algebra on small matrices.
//!
//! Exact mode uses a fraction-free (Bareiss style) symmetric LDLᵀ elimination
//! over big integers with diagonal pivoting, run on the augmented matrix
//! `[G | I]` so that every verdict comes with a certificate in the original
//! coordinates: the pivots for PD, integral null vectors for singular PSD, and
//! a direction of negative curvature otherwise. Float mode uses a symmetric
//! eigendecomposition with a relative threshold.

use nalgebra::DMatrix;
use ndarray::Array2;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::scalar::{Rational, Scalar};

/// Default relative eigenvalue threshold for float PSD checks.
pub const FLOAT_PSD_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsdClass {
    PositiveDefinite,
    PositiveSemidefinite,
    NotPsd,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PsdReport<T> {
    pub class: PsdClass,
    /// LDLᵀ pivots in elimination order (exact) or ascending eigenvalues (float).
    pub pivots: Vec<T>,
    /// Basis of the null space when the matrix is singular PSD.
    pub null_vectors: Vec<Vec<T>>,
    /// `v` with `vᵀGv < 0` when the matrix is not PSD.
    pub negative_direction: Option<Vec<T>>,
}

impl<T> PsdReport<T> {
    pub fn is_psd(&self) -> bool {
        self.class != PsdClass::NotPsd
    }

    pub fn is_pd(&self) -> bool {
        self.class == PsdClass::PositiveDefinite
    }
}

/// PSD classification dispatched on the scalar mode.
pub trait PsdCheck: Scalar {
    fn classify_psd(gram: &Array2<Self>) -> PsdReport<Self>;
}

impl PsdCheck for Rational {
    fn classify_psd(gram: &Array2<Self>) -> PsdReport<Self> {
        ldl_exact(gram)
    }
}

impl PsdCheck for f64 {
    fn classify_psd(gram: &Array2<Self>) -> PsdReport<Self> {
        eigen_psd(gram, FLOAT_PSD_TOL)
    }
}

/// `vᵀ G v`.
pub fn quadratic<T: Scalar>(gram: &Array2<T>, v: &[T]) -> T {
    let n = v.len();
    let mut acc = T::zero();
    for i in 0..n {
        if v[i].is_zero() {
            continue;
        }
        let mut row = T::zero();
        for j in 0..n {
            row = row + gram[[i, j]].clone() * v[j].clone();
        }
        acc = acc + v[i].clone() * row;
    }
    acc
}

/// Explicit Kronecker product `a ⊗ b`. Only used for small checks and oracles.
pub fn kronecker<T: Scalar>(a: &Array2<T>, b: &Array2<T>) -> Array2<T> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    Array2::from_shape_fn((ar * br, ac * bc), |(i, j)| a[[i / br, j / bc]].clone() * b[[i % br, j % bc]].clone())
}

fn lcm_of_denominators(gram: &Array2<Rational>) -> BigInt {
    gram.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// Divides by the gcd and makes the first nonzero entry positive.
fn normalize_integer_vector(v: &[BigInt]) -> Vec<Rational> {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    let sign = v
        .iter()
        .find(|x| !x.is_zero())
        .map(|x| if x.is_negative() { -BigInt::one() } else { BigInt::one() })
        .unwrap_or_else(BigInt::one);
    let g = if g.is_zero() { BigInt::one() } else { g * sign };
    v.iter().map(|x| Rational::from_integer(x / &g)).collect()
}

/// Fraction-free symmetric LDLᵀ with diagonal pivoting.
///
/// The first remaining positive diagonal entry is chosen as pivot. A negative
/// remaining diagonal, or a zero diagonal block with a nonzero off-diagonal,
/// proves the matrix indefinite. A zero remaining block means PSD with the
/// corresponding transformed unit vectors spanning the null space.
pub fn ldl_exact(gram: &Array2<Rational>) -> PsdReport<Rational> {
    let n = gram.nrows();
    assert_eq!(n, gram.ncols(), "square matrix expected");
    let scale = lcm_of_denominators(gram);
    let scale_q = Rational::from_integer(scale.clone());
    let mut s: Array2<BigInt> = gram.mapv(|x| (x * &scale_q).to_integer());
    // Column j of `t` is the current basis vector for remaining index j.
    let mut t: Array2<BigInt> =
        Array2::from_shape_fn((n, n), |(i, j)| if i == j { BigInt::one() } else { BigInt::zero() });
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut prev = BigInt::one();
    let mut pivots = Vec::new();

    let column = |t: &Array2<BigInt>, j: usize| -> Vec<BigInt> { t.column(j).to_vec() };

    loop {
        if remaining.is_empty() {
            return PsdReport {
                class: PsdClass::PositiveDefinite,
                pivots,
                null_vectors: Vec::new(),
                negative_direction: None,
            };
        }
        if let Some(&i) = remaining.iter().find(|&&i| s[[i, i]].is_negative()) {
            return PsdReport {
                class: PsdClass::NotPsd,
                pivots,
                null_vectors: Vec::new(),
                negative_direction: Some(normalize_integer_vector(&column(&t, i))),
            };
        }
        let Some(pos) = remaining.iter().position(|&i| s[[i, i]].is_positive()) else {
            // Zero diagonal block: any nonzero off-diagonal gives vᵀGv < 0.
            for (a, &i) in remaining.iter().enumerate() {
                for &j in &remaining[a + 1..] {
                    if !s[[i, j]].is_zero() {
                        let ti = column(&t, i);
                        let tj = column(&t, j);
                        let v: Vec<BigInt> = if s[[i, j]].is_positive() {
                            ti.iter().zip(&tj).map(|(x, y)| x - y).collect()
                        } else {
                            ti.iter().zip(&tj).map(|(x, y)| x + y).collect()
                        };
                        return PsdReport {
                            class: PsdClass::NotPsd,
                            pivots,
                            null_vectors: Vec::new(),
                            negative_direction: Some(normalize_integer_vector(&v)),
                        };
                    }
                }
            }
            let null_vectors = remaining.iter().map(|&i| normalize_integer_vector(&column(&t, i))).collect();
            return PsdReport { class: PsdClass::PositiveSemidefinite, pivots, null_vectors, negative_direction: None };
        };

        let p = remaining.remove(pos);
        let spp = s[[p, p]].clone();
        pivots.push(Rational::new(spp.clone(), &prev * &scale));

        for &j in &remaining {
            let spj = s[[p, j]].clone();
            for r in 0..n {
                let num = &spp * &t[[r, j]] - &spj * &t[[r, p]];
                t[[r, j]] = exact_div(num, &prev);
            }
        }
        for (a, &i) in remaining.iter().enumerate() {
            for &j in &remaining[a..] {
                let num = &spp * &s[[i, j]] - &s[[i, p]] * &s[[p, j]];
                let v = exact_div(num, &prev);
                s[[j, i]] = v.clone();
                s[[i, j]] = v;
            }
        }
        prev = spp;
    }
}

fn exact_div(num: BigInt, den: &BigInt) -> BigInt {
    let (q, r) = num.div_rem(den);
    debug_assert!(r.is_zero(), "fraction-free division must be exact");
    q
}

/// Float PSD classification by symmetric eigendecomposition.
///
/// With `τ = rel_tol · max|λ|`: PD iff `λ_min > τ`, PSD iff `λ_min ≥ −τ`.
/// Eigenvectors with `|λ| ≤ τ` are reported as null vectors.
pub fn eigen_psd(gram: &Array2<f64>, rel_tol: f64) -> PsdReport<f64> {
    let n = gram.nrows();
    let m = DMatrix::from_fn(n, n, |i, j| gram[[i, j]]);
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let norm = eig.eigenvalues.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    let tau = rel_tol * norm;
    let vector = |k: usize| eig.eigenvectors.column(k).iter().copied().collect::<Vec<_>>();
    let pivots: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();

    if n == 0 {
        return PsdReport {
            class: PsdClass::PositiveDefinite,
            pivots,
            null_vectors: Vec::new(),
            negative_direction: None,
        };
    }
    let min = pivots[0];
    if min < -tau {
        return PsdReport {
            class: PsdClass::NotPsd,
            pivots,
            null_vectors: Vec::new(),
            negative_direction: Some(vector(order[0])),
        };
    }
    let null_vectors: Vec<Vec<f64>> =
        order.iter().filter(|&&k| eig.eigenvalues[k].abs() <= tau || norm == 0.0).map(|&k| vector(k)).collect();
    let class = if null_vectors.is_empty() { PsdClass::PositiveDefinite } else { PsdClass::PositiveSemidefinite };
    PsdReport { class, pivots, null_vectors, negative_direction: None }
}

/// Reduced row echelon form in place; returns the pivot columns.
fn rref(m: &mut Array2<Rational>) -> Vec<usize> {
    let (rows, cols) = m.dim();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[[i, c]].is_zero()) else {
            continue;
        };
        if p != r {
            for k in 0..cols {
                let tmp = m[[p, k]].clone();
                m[[p, k]] = m[[r, k]].clone();
                m[[r, k]] = tmp;
            }
        }
        let inv = m[[r, c]].recip();
        for k in 0..cols {
            m[[r, k]] = &m[[r, k]] * &inv;
        }
        for i in 0..rows {
            if i != r && !m[[i, c]].is_zero() {
                let f = m[[i, c]].clone();
                for k in 0..cols {
                    let delta = &f * &m[[r, k]];
                    m[[i, k]] = &m[[i, k]] - delta;
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    pivot_cols
}

fn augmented(a: &Array2<Rational>, b: &[Rational]) -> Array2<Rational> {
    let (rows, cols) = a.dim();
    assert_eq!(rows, b.len());
    Array2::from_shape_fn((rows, cols + 1), |(i, j)| if j < cols { a[[i, j]].clone() } else { b[i].clone() })
}

/// Basic exact solution of `a x = b` (free variables zero), or `None` when inconsistent.
pub fn solve_basic(a: &Array2<Rational>, b: &[Rational]) -> Option<Vec<Rational>> {
    let cols = a.ncols();
    let mut aug = augmented(a, b);
    let pivots = rref(&mut aug);
    if pivots.contains(&cols) {
        return None;
    }
    let mut x = vec![Rational::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = aug[[i, cols]].clone();
    }
    Some(x)
}

/// Minimum norm exact solution of `a x = b`, or `None` when inconsistent.
pub fn solve_min_norm(a: &Array2<Rational>, b: &[Rational]) -> Option<Vec<Rational>> {
    let cols = a.ncols();
    let mut aug = augmented(a, b);
    let pivots = rref(&mut aug);
    if pivots.contains(&cols) {
        return None;
    }
    let rank = pivots.len();
    if rank == 0 {
        return Some(vec![Rational::zero(); cols]);
    }
    // Rows 0..rank of the RREF span the row space; x = Rᵀ y with (R Rᵀ) y = b'.
    let r = aug.slice(ndarray::s![..rank, ..cols]).to_owned();
    let rhs: Vec<Rational> = (0..rank).map(|i| aug[[i, cols]].clone()).collect();
    let mut normal = Array2::from_shape_fn((rank, rank + 1), |(i, j)| {
        if j < rank {
            (0..cols).fold(Rational::zero(), |acc, k| acc + &r[[i, k]] * &r[[j, k]])
        } else {
            rhs[i].clone()
        }
    });
    rref(&mut normal);
    let y: Vec<Rational> = (0..rank).map(|i| normal[[i, rank]].clone()).collect();
    Some((0..cols).map(|k| (0..rank).fold(Rational::zero(), |acc, i| acc + &r[[i, k]] * &y[i])).collect())
}
