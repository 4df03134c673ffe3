//! Numerical search for joints `P` with `HSIC²(P) = 0` and `P ≠ ⊗ P_m`.
//!
//! Each restart runs projected gradient descent on the simplex for
//! `HSIC²(P) + max(0, δ − ‖P − ⊗ P_m‖₁)²` from a seeded random start. A run
//! reaching `CANDIDATE_TOL` is rounded to rationals with bounded denominators
//! and checked exactly. If the rounded point misses, one exact repair is tried:
//! moving mass along the fibers of a single component keeps the other
//! marginals fixed, so `A(P)` is affine in the move and `K·A = 0` is a linear
//! system. Only exactly verified witnesses are returned.
//!
//! Restarts are independent (restart `r` draws from stream `r` of a ChaCha
//! generator seeded with `seed`) and run in fixed-size batches on the worker
//! pool; the lowest successful index wins, so the outcome does not depend on
//! the number of threads.

use ndarray::Array2;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Origin, WitnessReport};
use crate::kernel::ProductKernel;
use crate::linalg::{solve_basic, solve_min_norm};
use crate::measure::{i_class_element, indices, outer, JointDistribution, MeasureClass, SignedMeasure};
use crate::property::{decide_product_properties, tags, Certificate, Property, Status};
use crate::scalar::{limit_denominator, Rational};
use crate::{worker_pool, Error, Result};

/// Objective value below which a float point is rounded and checked exactly.
pub const CANDIDATE_TOL: f64 = 1e-18;
/// Denominator cap of the rational rounding.
pub const MAX_DENOMINATOR: u64 = 10_000;

/// Denominator caps tried in order, ending at `MAX_DENOMINATOR`.
const ROUNDING_CAPS: [u64; 4] = [10, 100, 1_000, MAX_DENOMINATOR];
const RESTART_EVALUATIONS: u64 = 4_000;
const BATCH: usize = 8;
const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-30;

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    /// Total number of objective and gradient evaluations.
    pub budget: u64,
    pub seed: u64,
    /// Required separation `‖P − ⊗ P_m‖₁ ≥ δ` enforced by the penalty.
    pub delta: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { budget: 100_000, seed: 0, delta: 0.01 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SearchOutcome {
    /// An exactly verified witness; `restart` is `None` when it was constructed
    /// without searching.
    Found { report: Box<WitnessReport>, restart: Option<usize>, evaluations: u64 },
    /// The product is I-characteristic, so no witness exists.
    Certified { tag: &'static str, reason: String },
    /// No witness found within budget.
    Inconclusive { restarts: usize, evaluations: u64 },
}

impl SearchOutcome {
    pub fn report(&self) -> Option<&WitnessReport> {
        match self {
            SearchOutcome::Found { report, .. } => Some(report),
            _ => None,
        }
    }
}

fn i_element(shape: &[usize], p: &[f64]) -> (SignedMeasure<f64>, Vec<Vec<f64>>) {
    let joint = SignedMeasure::new(shape, p.to_vec()).expect("shape checked by caller");
    let marginals = joint.marginal_vectors();
    let product = outer(&marginals).expect("nonempty");
    (&joint - &product, marginals)
}

/// Penalized objective `HSIC²(P) + max(0, δ − ‖A‖₁)²` at the flattened point `p`.
///
/// `p` need not lie on the simplex; the expression is a polynomial in it.
pub fn hsic2_objective(kernel: &ProductKernel<f64>, p: &[f64], delta: f64) -> f64 {
    let shape = kernel.shape();
    let (a, _) = i_element(&shape, p);
    let q = kernel.quad_form(&a).expect("shape matches");
    let l1: f64 = a.coefficients().iter().map(|x| x.abs()).sum();
    let gap = (delta - l1).max(0.0);
    q + gap * gap
}

/// `v_x − Σ_m h_m(x_m)` with `h_m(j) = Σ_{y : y_m = j} v_y Π_{n≠m} p_n(y_n)`:
/// the pullback of a linear functional `v` on `A` to the entries of `P`.
fn pull_back(v: &SignedMeasure<f64>, marginals: &[Vec<f64>]) -> Vec<f64> {
    let shape = v.shape().to_vec();
    let order = shape.len();
    let mut h: Vec<Vec<f64>> = shape.iter().map(|&n| vec![0.0; n]).collect();
    for (idx, x) in v.coefficients().indexed_iter() {
        let idx = ndarray::Dimension::slice(&idx);
        for m in 0..order {
            let w: f64 = (0..order).filter(|&n| n != m).map(|n| marginals[n][idx[n]]).product();
            h[m][idx[m]] += x * w;
        }
    }
    indices(&shape)
        .zip(v.coefficients().iter())
        .map(|(idx, x)| x - (0..order).map(|m| h[m][idx[m]]).sum::<f64>())
        .collect()
}

/// Gradient of [`hsic2_objective`] with respect to the entries of `p`.
pub fn hsic2_gradient(kernel: &ProductKernel<f64>, p: &[f64], delta: f64) -> Vec<f64> {
    let shape = kernel.shape();
    let (a, marginals) = i_element(&shape, p);
    let g = SignedMeasure::from_array(kernel.embed(&a).expect("shape matches").map(|x| 2.0 * x)).expect("valid shape");
    let mut grad = pull_back(&g, &marginals);
    let l1: f64 = a.coefficients().iter().map(|x| x.abs()).sum();
    let gap = delta - l1;
    if gap > 0.0 {
        let signs = a.map(|x| x.signum());
        for (gr, s) in grad.iter_mut().zip(pull_back(&signs, &marginals)) {
            *gr -= 2.0 * gap * s;
        }
    }
    grad
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, x) in u.iter().enumerate() {
        cumulative += x;
        let t = (cumulative - 1.0) / (i + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

struct Problem<'a> {
    exact: &'a ProductKernel<Rational>,
    float: ProductKernel<f64>,
    shape: Vec<usize>,
    delta: f64,
}

struct RestartResult {
    report: Option<WitnessReport>,
    evaluations: u64,
}

impl Problem<'_> {
    fn start(&self, seed: u64, restart: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(restart as u64);
        let n: usize = self.shape.iter().product();
        let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let s: f64 = e.iter().sum();
        e.into_iter().map(|x| x / s).collect()
    }

    fn run(&self, seed: u64, restart: usize, max_evaluations: u64) -> RestartResult {
        let mut p = self.start(seed, restart);
        let mut f = hsic2_objective(&self.float, &p, self.delta);
        let mut evaluations = 1;
        let mut step = 1.0;
        while evaluations < max_evaluations {
            if f < CANDIDATE_TOL {
                let report = self.exactify(&p);
                return RestartResult { report, evaluations };
            }
            let g = hsic2_gradient(&self.float, &p, self.delta);
            evaluations += 1;
            let mut accepted = false;
            while evaluations < max_evaluations && step > MIN_STEP {
                let trial: Vec<f64> = p.iter().zip(&g).map(|(x, d)| x - step * d).collect();
                let candidate = project_simplex(&trial);
                let fc = hsic2_objective(&self.float, &candidate, self.delta);
                evaluations += 1;
                let decrease: f64 = g.iter().zip(candidate.iter().zip(&p)).map(|(d, (c, x))| d * (c - x)).sum();
                if fc <= f + ARMIJO * decrease && fc < f {
                    p = candidate;
                    f = fc;
                    step *= 2.0;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        let report = (f < CANDIDATE_TOL).then(|| self.exactify(&p)).flatten();
        RestartResult { report, evaluations }
    }

    /// Rounds `p` and checks it exactly, repairing along single-component
    /// fibers if needed. Coarser roundings are tried first.
    fn exactify(&self, p: &[f64]) -> Option<WitnessReport> {
        let largest = (0..p.len()).max_by(|&i, &j| p[i].total_cmp(&p[j]))?;
        ROUNDING_CAPS.iter().find_map(|&cap| {
            let mut entries: Vec<Rational> = p.iter().map(|&x| limit_denominator(x, cap)).collect::<Option<_>>()?;
            let rest =
                entries.iter().enumerate().filter(|&(i, _)| i != largest).fold(Rational::zero(), |acc, (_, x)| acc + x);
            entries[largest] = Rational::one() - rest;
            let rounded = JointDistribution::from_flat(&self.shape, entries).ok()?;
            self.certify(rounded.clone()).or_else(|| (0..self.shape.len()).find_map(|m| self.repair(&rounded, m)))
        })
    }

    fn certify(&self, p: JointDistribution<Rational>) -> Option<WitnessReport> {
        let a = i_class_element(&p).ok()?;
        let report = WitnessReport::assess(self.exact, a, MeasureClass::I, Origin::Search, Some(p)).ok()?;
        report.is_certified().then_some(report)
    }

    /// Solves `K·A(P₀ + D t) = 0` for moves `D` along the fibers of component `m`.
    fn repair(&self, p0: &JointDistribution<Rational>, m: usize) -> Option<WitnessReport> {
        let shape = &self.shape;
        let n_m = shape[m];
        let marginals = p0.marginals();
        // One direction per (fiber, j ≥ 1): mass moves from index 0 to j on component m.
        let fibers: Vec<Vec<usize>> = indices(shape).filter(|idx| idx[m] == 0).collect();
        let mut moves = Vec::new();
        let mut columns = Vec::new();
        for fiber in &fibers {
            for j in 1..n_m {
                let mut d = SignedMeasure::<Rational>::zeros(shape).ok()?;
                let mut target = fiber.clone();
                target[m] = j;
                d.set(&target, Rational::one());
                d.set(fiber, -Rational::one());
                // ⊗ p_m is linear in the moved marginal.
                let mut factors = marginals.clone();
                factors[m] = vec![Rational::zero(); n_m];
                factors[m][j] = Rational::one();
                factors[m][0] = -Rational::one();
                let b = d.checked_sub(&outer(&factors).ok()?).ok()?;
                columns.push(self.exact.embed(&b).ok()?);
                moves.push(d);
            }
        }
        let a0 = i_class_element(p0).ok()?;
        let rhs: Vec<Rational> = self.exact.embed(&a0).ok()?.iter().map(|x| -x.clone()).collect();
        let rows = rhs.len();
        let matrix = Array2::from_shape_fn((rows, columns.len()), |(i, k)| {
            columns[k].as_slice().expect("standard layout")[i].clone()
        });
        [solve_basic(&matrix, &rhs), solve_min_norm(&matrix, &rhs)].into_iter().flatten().find_map(|t| {
            let mut p = p0.measure().clone();
            for (d, tk) in moves.iter().zip(&t) {
                if !tk.is_zero() {
                    p = p.checked_add(&d.scaled(tk)).ok()?;
                }
            }
            if p.coefficients().iter().any(Signed::is_negative) {
                return None;
            }
            self.certify(JointDistribution::new(p).ok()?)
        })
    }
}

/// Searches for an exact witness that `kernel` is not I-characteristic.
///
/// Short-circuits when the property engine already decides the question: a
/// certified `Holds` returns [`SearchOutcome::Certified`], a constructed
/// witness returns [`SearchOutcome::Found`] without searching.
pub fn search_i_witness(kernel: &ProductKernel<Rational>, config: &SearchConfig) -> Result<SearchOutcome> {
    if kernel.order() < 2 {
        return Err(Error::SingleComponent);
    }
    if !(config.delta >= 0.0 && config.delta.is_finite()) {
        return Err(Error::Input(format!("separation must be a nonnegative number, got {}", config.delta)));
    }
    let decided = decide_product_properties(kernel.components())?;
    let verdict = decided.verdict(Property::ICharacteristic);
    match (verdict.status, &verdict.certificate) {
        (Status::Holds, _) if decided.status(Property::Universal) == Status::Holds => {
            let reason = "product universal, so every nonzero measure has positive norm".into();
            return Ok(SearchOutcome::Certified { tag: tags::PRODUCT_UNIVERSAL, reason });
        }
        (Status::Holds, _) => {
            let tag = verdict.citation.unwrap_or(tags::IMPLICATION);
            let reason = decided
                .trace
                .iter()
                .find(|t| t.starts_with("I-char"))
                .cloned()
                .unwrap_or_else(|| "I-char: Holds".into());
            return Ok(SearchOutcome::Certified { tag, reason });
        }
        (Status::Fails, Some(Certificate::IWitness(report))) => {
            return Ok(SearchOutcome::Found { report: report.clone(), restart: None, evaluations: 0 });
        }
        _ => {}
    }

    let problem = Problem { exact: kernel, float: kernel.to_f64(), shape: kernel.shape(), delta: config.delta };
    let per_restart = RESTART_EVALUATIONS.min(config.budget.max(1));
    let restarts = config.budget.div_ceil(per_restart) as usize;
    let mut evaluations = 0;
    for batch_start in (0..restarts).step_by(BATCH) {
        let batch_end = (batch_start + BATCH).min(restarts);
        let results: Vec<RestartResult> = worker_pool().install(|| {
            (batch_start..batch_end).into_par_iter().map(|r| problem.run(config.seed, r, per_restart)).collect()
        });
        for (offset, result) in results.into_iter().enumerate() {
            evaluations += result.evaluations;
            if let Some(report) = result.report {
                return Ok(SearchOutcome::Found {
                    report: Box::new(report),
                    restart: Some(batch_start + offset),
                    evaluations,
                });
            }
        }
    }
    Ok(SearchOutcome::Inconclusive { restarts, evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::FiniteKernel;
    use crate::witness::verify_witness;

    fn product(ks: Vec<FiniteKernel<Rational>>) -> ProductKernel<Rational> {
        ProductKernel::new(ks).unwrap()
    }

    #[test]
    fn simplex_projection() {
        let p = project_simplex(&[0.5, 0.5, 0.5]);
        assert!(p.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
        assert_eq!(project_simplex(&[2.0, 0.0]), vec![1.0, 0.0]);
        let p = project_simplex(&[0.3, -0.2, 0.9]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(p.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn short_circuits() {
        let sd = FiniteKernel::signed_delta();
        let out = search_i_witness(&product(vec![sd.clone(), sd.clone()]), &SearchConfig::default()).unwrap();
        assert!(matches!(out, SearchOutcome::Certified { tag: "Thm2i", .. }), "{out:?}");
        let id = FiniteKernel::delta(2);
        let out = search_i_witness(&product(vec![id.clone(), id.clone(), id]), &SearchConfig::default()).unwrap();
        assert!(matches!(out, SearchOutcome::Certified { tag: "Thm4", .. }), "{out:?}");
        let out = search_i_witness(&product(vec![FiniteKernel::constant(2), sd.clone(), sd]), &SearchConfig::default())
            .unwrap();
        assert!(matches!(out, SearchOutcome::Found { restart: None, .. }), "{out:?}");
    }

    #[test]
    fn finds_three_component_witness() {
        let kernel = product(vec![FiniteKernel::signed_delta(); 3]);
        let config = SearchConfig { budget: 100_000, seed: 7, delta: 0.01 };
        let out = search_i_witness(&kernel, &config).unwrap();
        let report = out.report().expect("witness found");
        assert_eq!(report.origin, Origin::Search);
        assert!(verify_witness(&kernel, report).unwrap().ok);
        assert_eq!(search_i_witness(&kernel, &config).unwrap(), out);
    }

    #[test]
    fn single_component_is_rejected() {
        let kernel = product(vec![FiniteKernel::signed_delta()]);
        assert!(matches!(search_i_witness(&kernel, &SearchConfig::default()), Err(Error::SingleComponent)));
    }
}
