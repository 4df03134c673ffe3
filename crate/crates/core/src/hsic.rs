//! HSIC for finite distributions and the dHSIC V-statistic for samples.
//!
//! Population: `HSIC²(P) = ‖μ_k(P) − μ_k(⊗ P_m)‖²`, a quadratic form of
//! `P − ⊗ P_m`. Empirical: the same functional at the empirical distribution,
//!
//! ```text
//! (1/n²) Σ_{i,j} Π_m K_m[i,j] + Π_m (1/n²) Σ_{i,j} K_m[i,j] − (2/n) Σ_i Π_m (1/n) Σ_j K_m[i,j]
//! ```
//!
//! The permutation test keeps component 1 fixed and permutes the rows of every
//! other component independently; replicate `r` draws from stream `r` of a
//! ChaCha8 generator seeded with `seed`, so the permutations depend only on
//! `(seed, B, n)`.

use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::kernel::{ContinuousKernel, ProductKernel};
use crate::linalg::PsdCheck;
use crate::measure::{i_class_element, JointDistribution, SignedMeasure};
use crate::scalar::Rational;
use crate::{worker_pool, Error, Result};

/// Lower bound accepted for the statistic; it is a squared norm up to rounding.
pub const NONNEGATIVITY_TOL: f64 = 1e-12;

/// Bandwidth used when the median pairwise distance is zero.
pub const FALLBACK_BANDWIDTH: f64 = 1.0;

/// Squared HSIC of a finite joint distribution.
pub fn population_hsic<T: PsdCheck>(kernel: &ProductKernel<T>, p: &JointDistribution<T>) -> Result<T> {
    kernel.quad_form(&i_class_element(p)?)
}

/// The empirical joint distribution of coded samples: `codes[i][m]` is the
/// index of sample `i` on component `m`.
pub fn empirical_joint(shape: &[usize], codes: &[Vec<usize>]) -> Result<JointDistribution<Rational>> {
    if codes.is_empty() {
        return Err(Error::Input("no samples".into()));
    }
    let mut counts = SignedMeasure::<Rational>::zeros(shape)?;
    let weight = Rational::new(1.into(), codes.len().into());
    for (i, code) in codes.iter().enumerate() {
        if code.len() != shape.len() || code.iter().zip(shape).any(|(c, s)| c >= s) {
            return Err(Error::ShapeMismatch(format!("sample {} code {code:?} outside shape {shape:?}", i + 1)));
        }
        let x = counts.get(code) + &weight;
        counts.set(code, x);
    }
    JointDistribution::new(counts)
}

/// `n` rows of real samples split into `M` component blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBlock {
    groups: Vec<Array2<f64>>,
}

impl SampleBlock {
    pub fn new(groups: Vec<Array2<f64>>) -> Result<Self> {
        let Some(first) = groups.first() else {
            return Err(Error::EmptyFactors);
        };
        let n = first.nrows();
        for (m, g) in groups.iter().enumerate() {
            if g.nrows() != n {
                return Err(Error::ShapeMismatch(format!(
                    "component {} has {} rows, component 1 has {n}",
                    m + 1,
                    g.nrows()
                )));
            }
            if g.ncols() == 0 {
                return Err(Error::InvalidShape(format!("component {} has no columns", m + 1)));
            }
            if g.iter().any(|x| !x.is_finite()) {
                return Err(Error::Input(format!("component {} has a non-finite value", m + 1)));
            }
        }
        Ok(Self { groups })
    }

    /// Splits the columns of `data` into groups; groups must not overlap.
    pub fn from_columns(data: ArrayView2<'_, f64>, groups: &[Vec<usize>]) -> Result<Self> {
        let mut seen = vec![false; data.ncols()];
        for g in groups {
            for &c in g {
                if c >= data.ncols() {
                    return Err(Error::Input(format!("column {c} out of range for {} columns", data.ncols())));
                }
                if std::mem::replace(&mut seen[c], true) {
                    return Err(Error::Input(format!("column {c} assigned to more than one group")));
                }
            }
        }
        Self::new(groups.iter().map(|g| data.select(ndarray::Axis(1), g)).collect())
    }

    pub fn len(&self) -> usize {
        self.groups[0].nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn order(&self) -> usize {
        self.groups.len()
    }

    /// Column widths `d_m`.
    pub fn dims(&self) -> Vec<usize> {
        self.groups.iter().map(Array2::ncols).collect()
    }

    pub fn group(&self, m: usize) -> ArrayView2<'_, f64> {
        self.groups[m].view()
    }
}

/// `K[i, j] = k(x_i, x_j)` over the rows of `x`.
pub fn sample_gram(x: ArrayView2<'_, f64>, k: &ContinuousKernel) -> Result<Array2<f64>> {
    if x.ncols() != k.dim() {
        return Err(Error::ShapeMismatch(format!("kernel dimension {} vs {} columns", k.dim(), x.ncols())));
    }
    let n = x.nrows();
    let rows: Vec<Vec<f64>> = x.rows().into_iter().map(|r| r.to_vec()).collect();
    let mut g = Array2::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let v = k.eval_unchecked(&rows[i], &rows[j]);
            g[[i, j]] = v;
            g[[j, i]] = v;
        }
    }
    Ok(g)
}

fn check_grams(grams: &[Array2<f64>]) -> Result<usize> {
    let Some(first) = grams.first() else {
        return Err(Error::EmptyFactors);
    };
    let n = first.nrows();
    if grams.iter().any(|g| g.dim() != (n, n)) {
        return Err(Error::ShapeMismatch("sample Grams must all be n × n".into()));
    }
    Ok(n)
}

/// dHSIC V-statistic from per-component sample Grams, with component `m`'s
/// rows read through `perms[m]` (the identity when `perms` is empty).
fn dhsic_permuted(grams: &[Array2<f64>], perms: &[Vec<usize>]) -> f64 {
    let n = grams[0].nrows();
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let at = |m: usize, i: usize| perms.get(m).map_or(i, |p| p[i]);
    let permuted: Vec<Vec<usize>> = (0..grams.len()).map(|m| (0..n).map(|i| at(m, i)).collect()).collect();
    let mut joint = 0.0;
    let mut acc = vec![0.0; n];
    for i in 0..n {
        acc.fill(1.0);
        for (g, p) in grams.iter().zip(&permuted) {
            let row = g.row(p[i]);
            for (a, &pj) in acc.iter_mut().zip(p) {
                *a *= row[pj];
            }
        }
        joint += acc.iter().sum::<f64>();
    }
    let row_means: Vec<Vec<f64>> = grams.iter().map(|g| g.rows().into_iter().map(|r| r.sum() / nf).collect()).collect();
    let totals: f64 = row_means.iter().map(|r| r.iter().sum::<f64>() / nf).product();
    let cross: f64 = (0..n).map(|i| row_means.iter().enumerate().map(|(m, r)| r[at(m, i)]).product::<f64>()).sum();
    joint / (nf * nf) + totals - 2.0 * cross / nf
}

/// dHSIC V-statistic from per-component `n × n` sample Grams.
pub fn dhsic_from_grams(grams: &[Array2<f64>]) -> Result<f64> {
    check_grams(grams)?;
    Ok(dhsic_permuted(grams, &[]))
}

fn grams_for(samples: &SampleBlock, kernels: &[ContinuousKernel]) -> Result<Vec<Array2<f64>>> {
    if kernels.len() != samples.order() {
        return Err(Error::ShapeMismatch(format!("{} kernels for {} components", kernels.len(), samples.order())));
    }
    kernels.iter().enumerate().map(|(m, k)| sample_gram(samples.group(m), k)).collect()
}

/// dHSIC V-statistic of `samples` under the product of `kernels`.
pub fn dhsic_vstat(samples: &SampleBlock, kernels: &[ContinuousKernel]) -> Result<f64> {
    dhsic_from_grams(&grams_for(samples, kernels)?)
}

/// Outcome of [`permutation_test`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub permutations: usize,
    /// `(1 + #{replicates ≥ statistic}) / (1 + permutations)`.
    pub p_value: f64,
    pub seed: u64,
    pub bandwidths: Vec<f64>,
    pub n: usize,
}

/// Row permutations of components `2 … M` for replicate `r`.
pub fn replicate_permutations(seed: u64, replicate: usize, n: usize, order: usize) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate as u64);
    let mut perms = vec![(0..n).collect::<Vec<usize>>()];
    for _ in 1..order {
        let mut p: Vec<usize> = (0..n).collect();
        p.shuffle(&mut rng);
        perms.push(p);
    }
    perms
}

/// Permutation test of joint independence with `permutations` replicates.
pub fn permutation_test(
    samples: &SampleBlock,
    kernels: &[ContinuousKernel],
    permutations: usize,
    seed: u64,
) -> Result<TestResult> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::Input(format!("permutation test needs at least 2 samples, got {n}")));
    }
    if permutations == 0 {
        return Err(Error::Input("permutation count must be at least 1".into()));
    }
    let grams = grams_for(samples, kernels)?;
    let statistic = dhsic_permuted(&grams, &[]);
    let order = grams.len();
    let replicates: Vec<f64> = worker_pool().install(|| {
        (0..permutations)
            .into_par_iter()
            .map(|r| dhsic_permuted(&grams, &replicate_permutations(seed, r, n, order)))
            .collect()
    });
    let exceed = replicates.iter().filter(|&&s| s >= statistic).count();
    Ok(TestResult {
        statistic,
        permutations,
        p_value: (1 + exceed) as f64 / (1 + permutations) as f64,
        seed,
        bandwidths: kernels.iter().map(ContinuousKernel::bandwidth).collect(),
        n,
    })
}

/// Lower median of the pairwise Euclidean distances between rows, or
/// [`FALLBACK_BANDWIDTH`] when it is zero or there are fewer than two rows.
pub fn median_heuristic(x: ArrayView2<'_, f64>) -> f64 {
    let rows: Vec<Vec<f64>> = x.rows().into_iter().map(|r| r.to_vec()).collect();
    let mut d = Vec::with_capacity(rows.len() * rows.len().saturating_sub(1) / 2);
    for (i, a) in rows.iter().enumerate() {
        for b in &rows[i + 1..] {
            d.push(a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt());
        }
    }
    if d.is_empty() {
        return FALLBACK_BANDWIDTH;
    }
    d.sort_by(f64::total_cmp);
    let median = d[(d.len() - 1) / 2];
    if median > 0.0 {
        median
    } else {
        FALLBACK_BANDWIDTH
    }
}
