//! Kernels: finite Gram kernels, their tensor products, and continuous kernels
//! on `ℝ^d`.
//!
//! The RKHS is never materialized. For a product kernel `k = ⊗ k_m` on a finite
//! space the squared embedding norm of a signed measure is
//! `‖μ_k(F)‖² = vec(F)ᵀ (G_1 ⊗ … ⊗ G_M) vec(F)`, computed by applying each
//! `G_m` along its own axis of the coefficient tensor.

use ndarray::{Array2, ArrayD, Axis, Zip};
use serde::Serialize;

use crate::linalg::{self, PsdCheck, PsdReport};
use crate::measure::{JointDistribution, SignedMeasure};
use crate::scalar::{Rational, Scalar};
use crate::{Error, Result};

/// Symmetry tolerance for float Gram matrices.
pub const FLOAT_SYMMETRY_TOL: f64 = 1e-12;

/// A PSD-validated Gram matrix on a finite space.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteKernel<T> {
    gram: Array2<T>,
    psd: PsdReport<T>,
}

impl<T: PsdCheck> FiniteKernel<T> {
    /// Validates symmetry and positive semidefiniteness.
    pub fn new(gram: Array2<T>) -> Result<Self> {
        let (n, c) = gram.dim();
        if n != c || n == 0 {
            return Err(Error::InvalidKernel(format!("gram must be square and nonempty, got {n}×{c}")));
        }
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (&gram[[i, j]], &gram[[j, i]]);
                let symmetric = if T::EXACT {
                    a == b
                } else {
                    (a.to_f64() - b.to_f64()).abs() <= FLOAT_SYMMETRY_TOL * a.to_f64().abs().max(1.0)
                };
                if !symmetric {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        let psd = T::classify_psd(&gram);
        if let Some(v) = &psd.negative_direction {
            return Err(Error::NotPsd { certificate: v.iter().map(|x| x.to_string()).collect() });
        }
        Ok(Self { gram, psd })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> T) -> Result<Self> {
        Self::new(Array2::from_shape_fn((n, n), |(i, j)| f(i, j)))
    }

    /// `k(x, x') = δ_{x,x'}` on `n` points.
    pub fn delta(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { T::one() } else { T::zero() }).expect("identity is PD")
    }

    /// `k(x, x') = 1` on `n` points.
    pub fn constant(n: usize) -> Self {
        Self::from_fn(n, |_, _| T::one()).expect("all-ones is PSD")
    }

    /// `k(x, x') = 2δ_{x,x'} − 1` on two points.
    pub fn signed_delta() -> Self {
        Self::from_fn(2, |i, j| if i == j { T::one() } else { -T::one() }).expect("rank one PSD")
    }

    pub fn size(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &Array2<T> {
        &self.gram
    }

    pub fn psd_report(&self) -> &PsdReport<T> {
        &self.psd
    }

    /// `vᵀ G v`.
    pub fn quad(&self, v: &[T]) -> T {
        linalg::quadratic(&self.gram, v)
    }
}

impl FiniteKernel<Rational> {
    pub fn from_integers(rows: &[&[i64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidKernel("gram rows must all have length n".into()));
        }
        Self::from_fn(n, |i, j| Rational::from_integer(rows[i][j].into()))
    }

    pub fn to_f64(&self) -> FiniteKernel<f64> {
        FiniteKernel::new(self.gram.map(|x| x.to_f64())).expect("float image of a PSD gram")
    }
}

/// Tensor product `k_1 ⊗ … ⊗ k_M` of finite kernels.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductKernel<T> {
    components: Vec<FiniteKernel<T>>,
}

impl<T: PsdCheck> ProductKernel<T> {
    pub fn new(components: Vec<FiniteKernel<T>>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptyFactors);
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[FiniteKernel<T>] {
        &self.components
    }

    pub fn order(&self) -> usize {
        self.components.len()
    }

    /// Component sizes, the shape of measures this kernel acts on.
    pub fn shape(&self) -> Vec<usize> {
        self.components.iter().map(FiniteKernel::size).collect()
    }

    fn check_shape(&self, f: &SignedMeasure<T>) -> Result<()> {
        if f.shape() != self.shape().as_slice() {
            return Err(Error::ShapeMismatch(format!(
                "measure shape {:?} vs kernel shape {:?}",
                f.shape(),
                self.shape()
            )));
        }
        Ok(())
    }

    /// Mean embedding coordinates `(G_1 ⊗ … ⊗ G_M) vec(F)` as a tensor.
    pub fn embed(&self, f: &SignedMeasure<T>) -> Result<ArrayD<T>> {
        self.check_shape(f)?;
        let mut t = f.coefficients().clone();
        for (m, k) in self.components.iter().enumerate() {
            t = mode_product(&t, k.gram(), m);
        }
        Ok(t)
    }

    /// `‖μ_k(F)‖² = vec(F)ᵀ (G_1 ⊗ … ⊗ G_M) vec(F)`.
    pub fn quad_form(&self, f: &SignedMeasure<T>) -> Result<T> {
        let g = self.embed(f)?;
        Ok(f.coefficients().iter().zip(g.iter()).fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone()))
    }

    /// Squared MMD `‖μ_k(P) − μ_k(Q)‖²`.
    pub fn mmd2(&self, p: &JointDistribution<T>, q: &JointDistribution<T>) -> Result<T> {
        self.quad_form(&p.measure().checked_sub(q.measure())?)
    }

    /// Explicit Gram of the product kernel on the flattened space.
    pub fn kronecker_gram(&self) -> Array2<T> {
        let mut it = self.components.iter();
        let first = it.next().expect("nonempty").gram().clone();
        it.fold(first, |acc, k| linalg::kronecker(&acc, k.gram()))
    }
}

impl ProductKernel<Rational> {
    pub fn to_f64(&self) -> ProductKernel<f64> {
        ProductKernel { components: self.components.iter().map(FiniteKernel::to_f64).collect() }
    }
}

/// Applies `gram` along axis `m`: `out[…, i, …] = Σ_j G[i, j] t[…, j, …]`.
pub fn mode_product<T: Scalar>(t: &ArrayD<T>, gram: &Array2<T>, m: usize) -> ArrayD<T> {
    let mut out = ArrayD::from_elem(t.raw_dim(), T::zero());
    let n = gram.nrows();
    Zip::from(out.lanes_mut(Axis(m))).and(t.lanes(Axis(m))).for_each(|mut o, lane| {
        for i in 0..n {
            let mut acc = T::zero();
            for (j, x) in lane.iter().enumerate() {
                if !x.is_zero() {
                    acc = acc + gram[[i, j]].clone() * x.clone();
                }
            }
            o[i] = acc;
        }
    });
    out
}

/// Continuous kernel families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Gaussian,
    Laplacian,
    Constant,
    DiscreteDelta,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::Laplacian => "laplacian",
            Family::Constant => "constant",
            Family::DiscreteDelta => "discrete-delta",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "gaussian" => Family::Gaussian,
            "laplacian" => Family::Laplacian,
            "constant" => Family::Constant,
            "discrete-delta" => Family::DiscreteDelta,
            other => return Err(Error::InvalidKernel(format!("unknown kernel family {other:?}"))),
        })
    }

    pub fn needs_bandwidth(self) -> bool {
        matches!(self, Family::Gaussian | Family::Laplacian)
    }

    /// Whether the Bochner spectral measure has full support. Known analytically
    /// for the translation-invariant families, `None` otherwise.
    pub fn spectral_support_full(self) -> Option<bool> {
        match self {
            Family::Gaussian | Family::Laplacian => Some(true),
            Family::Constant => Some(false),
            Family::DiscreteDelta => None,
        }
    }
}

/// A kernel on `ℝ^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuousKernel {
    family: Family,
    bandwidth: f64,
    dim: usize,
}

impl ContinuousKernel {
    pub fn new(family: Family, bandwidth: f64, dim: usize) -> Result<Self> {
        if family.needs_bandwidth() && !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::InvalidKernel(format!("{} bandwidth must be positive, got {bandwidth}", family.name())));
        }
        if dim == 0 {
            return Err(Error::InvalidKernel("dimension must be at least 1".into()));
        }
        Ok(Self { family, bandwidth, dim })
    }

    pub fn gaussian(bandwidth: f64, dim: usize) -> Result<Self> {
        Self::new(Family::Gaussian, bandwidth, dim)
    }

    pub fn laplacian(bandwidth: f64, dim: usize) -> Result<Self> {
        Self::new(Family::Laplacian, bandwidth, dim)
    }

    pub fn constant(dim: usize) -> Self {
        Self::new(Family::Constant, 1.0, dim).expect("valid")
    }

    pub fn discrete_delta(dim: usize) -> Self {
        Self::new(Family::DiscreteDelta, 1.0, dim).expect("valid")
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `k(x, y)`.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != self.dim || y.len() != self.dim {
            return Err(Error::ShapeMismatch(format!(
                "kernel dimension {} vs inputs of length {} and {}",
                self.dim,
                x.len(),
                y.len()
            )));
        }
        Ok(self.eval_unchecked(x, y))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.family {
            Family::Gaussian => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-d2 / (2.0 * self.bandwidth * self.bandwidth)).exp()
            }
            Family::Laplacian => {
                let d1: f64 = x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum();
                (-d1 / self.bandwidth).exp()
            }
            Family::Constant => 1.0,
            Family::DiscreteDelta => {
                if x == y {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Any kernel the tools accept.
#[derive(Clone, Debug, PartialEq)]
pub enum KernelSpec {
    Finite(FiniteKernel<Rational>),
    Continuous(ContinuousKernel),
    Product(Vec<KernelSpec>),
}

impl KernelSpec {
    /// Product components, flattening nested products. A lone kernel is a product of one.
    pub fn components(&self) -> Vec<&KernelSpec> {
        match self {
            KernelSpec::Product(parts) => parts.iter().flat_map(KernelSpec::components).collect(),
            other => vec![other],
        }
    }

    /// The finite product kernel, when every component is finite.
    pub fn as_finite_product(&self) -> Option<ProductKernel<Rational>> {
        let comps: Option<Vec<FiniteKernel<Rational>>> = self
            .components()
            .into_iter()
            .map(|c| match c {
                KernelSpec::Finite(k) => Some(k.clone()),
                _ => None,
            })
            .collect();
        comps.and_then(|c| ProductKernel::new(c).ok())
    }

    /// The continuous components, when every component is continuous.
    pub fn as_continuous(&self) -> Option<Vec<ContinuousKernel>> {
        self.components()
            .into_iter()
            .map(|c| match c {
                KernelSpec::Continuous(k) => Some(k.clone()),
                _ => None,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{outer, product_measure};
    use crate::scalar::rat;

    fn ints(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&p| rat(p, 1)).collect()
    }

    /// Σ_{x,x'} k(x,x') F(x) F(x') by direct enumeration.
    fn brute_quad(k: &ProductKernel<Rational>, f: &SignedMeasure<Rational>) -> Rational {
        let idx: Vec<Vec<usize>> = crate::measure::indices(f.shape()).collect();
        let mut acc = rat(0, 1);
        for x in &idx {
            for y in &idx {
                let mut kv = rat(1, 1);
                for (m, c) in k.components().iter().enumerate() {
                    kv *= &c.gram()[[x[m], y[m]]];
                }
                acc += kv * f.get(x) * f.get(y);
            }
        }
        acc
    }

    #[test]
    fn psd_validation_rejects_bad_grams() {
        assert!(matches!(
            FiniteKernel::<Rational>::from_integers(&[&[0, 1], &[1, 0]]),
            Err(Error::NotPsd { certificate }) if certificate == vec!["1".to_string(), "-1".to_string()]
        ));
        assert!(matches!(
            FiniteKernel::<Rational>::from_integers(&[&[1, 1], &[0, 1]]),
            Err(Error::NotSymmetric { row: 0, col: 1 })
        ));
        assert!(FiniteKernel::<Rational>::from_integers(&[&[1, -1], &[-1, 1]]).is_ok());
        // 2δ − 1 on three points is not PSD.
        assert!(FiniteKernel::<Rational>::from_fn(3, |i, j| if i == j { rat(1, 1) } else { rat(-1, 1) }).is_err());
    }

    #[test]
    fn single_component_quad_form_is_difference_squared() {
        let k = ProductKernel::new(vec![FiniteKernel::<Rational>::signed_delta()]).unwrap();
        let f = SignedMeasure::vector(ints(&[3, -5])).unwrap();
        assert_eq!(k.quad_form(&f).unwrap(), rat(64, 1));
        let z = SignedMeasure::zeros(&[2]).unwrap();
        assert_eq!(k.quad_form(&z).unwrap(), rat(0, 1));
    }

    #[test]
    fn mmd_examples() {
        let k = ProductKernel::new(vec![FiniteKernel::<Rational>::signed_delta()]).unwrap();
        let d1 = JointDistribution::from_flat(&[2], ints(&[1, 0])).unwrap();
        let d2 = JointDistribution::from_flat(&[2], ints(&[0, 1])).unwrap();
        let u = JointDistribution::from_flat(&[2], vec![rat(1, 2), rat(1, 2)]).unwrap();
        assert_eq!(k.mmd2(&d1, &d2).unwrap(), rat(4, 1));
        assert_eq!(k.mmd2(&u, &d1).unwrap(), rat(1, 1));
        assert_eq!(k.mmd2(&u, &u).unwrap(), rat(0, 1));
        assert_eq!(k.mmd2(&d2, &d1).unwrap(), k.mmd2(&d1, &d2).unwrap());
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let k = ProductKernel::new(vec![FiniteKernel::<Rational>::signed_delta(); 2]).unwrap();
        let f = SignedMeasure::zeros(&[2, 3]).unwrap();
        assert!(matches!(k.quad_form(&f), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn quad_form_matches_brute_force_and_kronecker() {
        let k = ProductKernel::new(vec![
            FiniteKernel::from_integers(&[&[2, 1], &[1, 1]]).unwrap(),
            FiniteKernel::from_integers(&[&[1, 1, 0], &[1, 2, 1], &[0, 1, 3]]).unwrap(),
            FiniteKernel::signed_delta(),
        ])
        .unwrap();
        let f = SignedMeasure::new(&[2, 3, 2], (0..12).map(|i| rat(i * i % 7 - 3, 1 + i % 3)).collect()).unwrap();
        let q = k.quad_form(&f).unwrap();
        assert_eq!(q, brute_quad(&k, &f));
        assert_eq!(q, linalg::quadratic(&k.kronecker_gram(), &f.to_flat()));
    }

    #[test]
    fn product_measures_factorize() {
        let g1 = FiniteKernel::from_integers(&[&[2, 1], &[1, 1]]).unwrap();
        let g2 = FiniteKernel::<Rational>::signed_delta();
        let k = ProductKernel::new(vec![g1.clone(), g2.clone()]).unwrap();
        let (a, b) = (ints(&[1, -2]), ints(&[3, 1]));
        let f =
            product_measure(&[SignedMeasure::vector(a.clone()).unwrap(), SignedMeasure::vector(b.clone()).unwrap()])
                .unwrap();
        assert_eq!(k.quad_form(&f).unwrap(), g1.quad(&a) * g2.quad(&b));
    }

    #[test]
    fn example_two_witness_has_zero_quad_form() {
        let k = ProductKernel::new(vec![FiniteKernel::<Rational>::signed_delta(); 3]).unwrap();
        let a = outer(&[ints(&[1, 1]), ints(&[1, -1]), ints(&[1, -1])]).unwrap().scaled(&rat(1, 50));
        assert_eq!(k.quad_form(&a).unwrap(), rat(0, 1));
    }

    #[test]
    fn continuous_kernel_values() {
        let g = ContinuousKernel::gaussian(1.0, 1).unwrap();
        assert_eq!(g.eval(&[0.3], &[0.3]).unwrap(), 1.0);
        assert!((g.eval(&[0.0], &[2.0]).unwrap() - (-2.0f64).exp()).abs() < 1e-15);
        assert!((g.eval(&[0.0], &[2.0]).unwrap() - 0.135335).abs() < 1e-6);
        let l = ContinuousKernel::laplacian(2.0, 2).unwrap();
        assert!((l.eval(&[0.0, 0.0], &[1.0, -1.0]).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(ContinuousKernel::constant(1).eval(&[1.0], &[5.0]).unwrap(), 1.0);
        let d = ContinuousKernel::discrete_delta(1);
        assert_eq!(d.eval(&[1.0], &[1.0]).unwrap(), 1.0);
        assert_eq!(d.eval(&[1.0], &[2.0]).unwrap(), 0.0);
        assert!(g.eval(&[0.0, 1.0], &[0.0]).is_err());
        assert!(ContinuousKernel::gaussian(0.0, 1).is_err());
        assert!(ContinuousKernel::laplacian(-1.0, 1).is_err());
    }

    #[test]
    fn spectral_metadata() {
        assert_eq!(Family::Gaussian.spectral_support_full(), Some(true));
        assert_eq!(Family::Laplacian.spectral_support_full(), Some(true));
        assert_eq!(Family::Constant.spectral_support_full(), Some(false));
        assert_eq!(Family::DiscreteDelta.spectral_support_full(), None);
    }
}
