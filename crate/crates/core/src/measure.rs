//! Finite signed measures on product spaces `X_1 × … × X_M`.
//!
//! A measure is stored as its coefficient tensor `a[i_1, …, i_M]`, i.e.
//! `F = Σ a_{i_1…i_M} δ_{(i_1,…,i_M)}`, row-major with `i_1` varying slowest.

use std::fmt;
use std::ops::{Add, Sub};

use ndarray::{ArrayD, Dimension, IxDyn};
use serde::Serialize;

use crate::scalar::Scalar;
use crate::{Error, Result};

/// Largest total size accepted for a product space.
pub const MAX_TOTAL_SIZE: usize = 1 << 24;

/// Validates component sizes and returns the total size.
pub fn check_shape(sizes: &[usize]) -> Result<usize> {
    if sizes.is_empty() {
        return Err(Error::InvalidShape("at least one component required".into()));
    }
    if let Some(pos) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::InvalidShape(format!("component {} has size 0", pos + 1)));
    }
    sizes
        .iter()
        .try_fold(1usize, |acc, &s| acc.checked_mul(s))
        .filter(|&t| t <= MAX_TOTAL_SIZE)
        .ok_or_else(|| Error::InvalidShape(format!("total size of {sizes:?} is too large")))
}

/// A finite signed measure as a dense coefficient tensor.
#[derive(Clone, PartialEq)]
pub struct SignedMeasure<T> {
    coefficients: ArrayD<T>,
}

impl<T: fmt::Display> fmt::Debug for SignedMeasure<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let flat: Vec<String> = self.coefficients.iter().map(|x| x.to_string()).collect();
        write!(f, "SignedMeasure{:?}[{}]", self.coefficients.shape(), flat.join(", "))
    }
}

impl<T: Scalar> SignedMeasure<T> {
    /// Builds a measure from its row-major flattened coefficients.
    pub fn new(shape: &[usize], coefficients: Vec<T>) -> Result<Self> {
        let total = check_shape(shape)?;
        if coefficients.len() != total {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients for shape {shape:?} (expected {total})",
                coefficients.len()
            )));
        }
        let coefficients = ArrayD::from_shape_vec(IxDyn(shape), coefficients).expect("length checked above");
        Ok(Self { coefficients })
    }

    pub fn from_array(coefficients: ArrayD<T>) -> Result<Self> {
        check_shape(coefficients.shape())?;
        Ok(Self { coefficients: coefficients.as_standard_layout().into_owned() })
    }

    pub fn zeros(shape: &[usize]) -> Result<Self> {
        check_shape(shape)?;
        Ok(Self { coefficients: ArrayD::from_elem(IxDyn(shape), T::zero()) })
    }

    /// A measure on a single component.
    pub fn vector(coefficients: Vec<T>) -> Result<Self> {
        let n = coefficients.len();
        Self::new(&[n], coefficients)
    }

    /// Point mass at `index`.
    pub fn dirac(shape: &[usize], index: &[usize]) -> Result<Self> {
        let mut m = Self::zeros(shape)?;
        if index.len() != shape.len() || index.iter().zip(shape).any(|(i, s)| i >= s) {
            return Err(Error::ShapeMismatch(format!("index {index:?} outside shape {shape:?}")));
        }
        m.coefficients[IxDyn(index)] = T::one();
        Ok(m)
    }

    pub fn shape(&self) -> &[usize] {
        self.coefficients.shape()
    }

    /// Number of components `M`.
    pub fn order(&self) -> usize {
        self.coefficients.ndim()
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn coefficients(&self) -> &ArrayD<T> {
        &self.coefficients
    }

    pub fn into_coefficients(self) -> ArrayD<T> {
        self.coefficients
    }

    /// Row-major flattening, first index slowest.
    pub fn to_flat(&self) -> Vec<T> {
        self.coefficients.iter().cloned().collect()
    }

    pub fn get(&self, index: &[usize]) -> &T {
        &self.coefficients[IxDyn(index)]
    }

    pub fn set(&mut self, index: &[usize], value: T) {
        self.coefficients[IxDyn(index)] = value;
    }

    /// Total mass `F(X)`.
    pub fn mass(&self) -> T {
        self.coefficients.iter().fold(T::zero(), |acc, x| acc + x.clone())
    }

    /// Exact zero test (rationals) or every entry negligible (floats).
    pub fn is_zero(&self) -> bool {
        let scale = T::one();
        self.coefficients.iter().all(|x| x.is_negligible(&scale))
    }

    /// Largest absolute coefficient and its index, first in row-major order on ties.
    pub fn max_abs_entry(&self) -> (Vec<usize>, T) {
        let mut best: Option<(Vec<usize>, T)> = None;
        for (idx, x) in self.coefficients.indexed_iter() {
            let a = x.abs();
            if best.as_ref().is_none_or(|(_, b)| a > *b) {
                best = Some((idx.slice().to_vec(), a));
            }
        }
        best.expect("measures are never empty")
    }

    pub fn scaled(&self, factor: &T) -> Self {
        Self { coefficients: self.coefficients.map(|x| x.clone() * factor.clone()) }
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", self.shape(), other.shape())));
        }
        Ok(())
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self - other)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self + other)
    }

    /// Marginal on component `m` (0-based): the sum over all other indices.
    pub fn marginal(&self, m: usize) -> Result<Self> {
        if m >= self.order() {
            return Err(Error::IndexOutOfRange { index: m, order: self.order() });
        }
        let n = self.shape()[m];
        let mut out = vec![T::zero(); n];
        for (idx, x) in self.coefficients.indexed_iter() {
            let j = idx[m];
            out[j] = out[j].clone() + x.clone();
        }
        Self::vector(out)
    }

    /// All `M` marginals as plain vectors.
    pub fn marginal_vectors(&self) -> Vec<Vec<T>> {
        (0..self.order()).map(|m| self.marginal(m).expect("in range").to_flat()).collect()
    }

    /// Mode-`m` fiber through `index`: `j ↦ F[index with i_m = j]`.
    pub fn fiber(&self, index: &[usize], m: usize) -> Vec<T> {
        let mut idx = index.to_vec();
        (0..self.shape()[m])
            .map(|j| {
                idx[m] = j;
                self.coefficients[IxDyn(&idx)].clone()
            })
            .collect()
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> SignedMeasure<U> {
        SignedMeasure { coefficients: self.coefficients.map(f) }
    }
}

impl<T: Scalar> Sub for &SignedMeasure<T> {
    type Output = SignedMeasure<T>;

    /// Panics on shape mismatch; use [`SignedMeasure::checked_sub`] for untrusted input.
    fn sub(self, rhs: Self) -> SignedMeasure<T> {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch");
        let mut c = self.coefficients.clone();
        c.zip_mut_with(&rhs.coefficients, |a, b| *a = a.clone() - b.clone());
        SignedMeasure { coefficients: c }
    }
}

impl<T: Scalar> Add for &SignedMeasure<T> {
    type Output = SignedMeasure<T>;

    fn add(self, rhs: Self) -> SignedMeasure<T> {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch");
        let mut c = self.coefficients.clone();
        c.zip_mut_with(&rhs.coefficients, |a, b| *a = a.clone() + b.clone());
        SignedMeasure { coefficients: c }
    }
}

/// Outer product of plain vectors.
pub fn outer<T: Scalar>(factors: &[Vec<T>]) -> Result<SignedMeasure<T>> {
    if factors.is_empty() {
        return Err(Error::EmptyFactors);
    }
    let shape: Vec<usize> = factors.iter().map(Vec::len).collect();
    check_shape(&shape)?;
    let coefficients = ArrayD::from_shape_fn(IxDyn(&shape), |idx| {
        factors.iter().enumerate().fold(T::one(), |acc, (m, f)| acc * f[idx[m]].clone())
    });
    Ok(SignedMeasure { coefficients })
}

/// Product measure `F_1 ⊗ … ⊗ F_M` of single-component measures.
pub fn product_measure<T: Scalar>(factors: &[SignedMeasure<T>]) -> Result<SignedMeasure<T>> {
    if factors.is_empty() {
        return Err(Error::EmptyFactors);
    }
    if let Some(f) = factors.iter().find(|f| f.order() != 1) {
        return Err(Error::ShapeMismatch(format!(
            "product factors must have one component, got shape {:?}",
            f.shape()
        )));
    }
    let vectors: Vec<Vec<T>> = factors.iter().map(SignedMeasure::to_flat).collect();
    outer(&vectors)
}

/// A probability distribution on a finite product space.
#[derive(Clone, PartialEq)]
pub struct JointDistribution<T> {
    measure: SignedMeasure<T>,
}

impl<T: fmt::Display> fmt::Debug for JointDistribution<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "JointDistribution({:?})", self.measure)
    }
}

/// Tolerance on total mass in float mode.
pub const FLOAT_MASS_TOL: f64 = 1e-12;

impl<T: Scalar> JointDistribution<T> {
    /// Validates nonnegativity and unit mass (exact for rationals, within
    /// `FLOAT_MASS_TOL` for floats).
    pub fn new(measure: SignedMeasure<T>) -> Result<Self> {
        if let Some((idx, _)) = measure.coefficients().indexed_iter().find(|(_, x)| x.is_negative()) {
            let one_based: Vec<usize> = idx.slice().iter().map(|i| i + 1).collect();
            return Err(Error::NotDistribution(format!("negative coefficient at {one_based:?}")));
        }
        let mass = measure.mass();
        let ok = if T::EXACT { mass == T::one() } else { (mass.to_f64() - 1.0).abs() <= FLOAT_MASS_TOL };
        if !ok {
            return Err(Error::NotDistribution(format!("total mass {mass} != 1")));
        }
        Ok(Self { measure })
    }

    pub fn from_flat(shape: &[usize], coefficients: Vec<T>) -> Result<Self> {
        Self::new(SignedMeasure::new(shape, coefficients)?)
    }

    pub fn measure(&self) -> &SignedMeasure<T> {
        &self.measure
    }

    pub fn into_measure(self) -> SignedMeasure<T> {
        self.measure
    }

    pub fn shape(&self) -> &[usize] {
        self.measure.shape()
    }

    pub fn order(&self) -> usize {
        self.measure.order()
    }

    pub fn marginals(&self) -> Vec<Vec<T>> {
        self.measure.marginal_vectors()
    }

    /// `⊗_m P_m` of the marginals.
    pub fn product_of_marginals(&self) -> SignedMeasure<T> {
        outer(&self.marginals()).expect("marginals of a valid measure")
    }

    pub fn is_product(&self) -> bool {
        (&self.measure - &self.product_of_marginals()).is_zero()
    }
}

/// `P − ⊗_m P_m`, the generator of the class `I`.
pub fn i_class_element<T: Scalar>(p: &JointDistribution<T>) -> Result<SignedMeasure<T>> {
    if p.order() < 2 {
        return Err(Error::SingleComponent);
    }
    Ok(&p.measure - &p.product_of_marginals())
}

/// Measure classes used by the property definitions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum MeasureClass {
    /// All finite signed measures.
    #[serde(rename = "Mb")]
    Mb,
    /// Zero total mass.
    #[serde(rename = "Mb0")]
    Mb0,
    /// Product measures `⊗ F_m` with every factor of zero mass.
    #[serde(rename = "ProdMb0")]
    ProdMb0,
    /// Product measures `⊗ F_m` with zero total mass.
    #[serde(rename = "SumZeroProduct")]
    SumZeroProduct,
    /// Necessary condition for `I`: every marginal is zero.
    #[serde(rename = "I-marginal-necessary")]
    IMarginalNecessary,
    /// `P − ⊗ P_m` for a joint distribution `P`; only checkable with `P` at hand.
    #[serde(rename = "I")]
    I,
}

impl MeasureClass {
    pub fn name(self) -> &'static str {
        match self {
            MeasureClass::Mb => "Mb",
            MeasureClass::Mb0 => "Mb0",
            MeasureClass::ProdMb0 => "ProdMb0",
            MeasureClass::SumZeroProduct => "SumZeroProduct",
            MeasureClass::IMarginalNecessary => "I-marginal-necessary",
            MeasureClass::I => "I",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "Mb" => MeasureClass::Mb,
            "Mb0" => MeasureClass::Mb0,
            "ProdMb0" => MeasureClass::ProdMb0,
            "SumZeroProduct" => MeasureClass::SumZeroProduct,
            "I-marginal-necessary" => MeasureClass::IMarginalNecessary,
            "I" => MeasureClass::I,
            other => return Err(Error::Parse(format!("unknown measure class {other:?}"))),
        })
    }
}

/// Outcome of a membership test with the values that decided it.
#[derive(Clone, Debug, PartialEq)]
pub struct Membership<T> {
    pub member: bool,
    /// Named constraint values; all zero for a member.
    pub residuals: Vec<(String, T)>,
}

/// Rank-one structure of a tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct RankOne<T> {
    pub is_rank_one: bool,
    /// Largest anchored 2×2 minor over all mode matricizations.
    pub max_minor: T,
    /// Factors with `F = f_1 ⊗ … ⊗ f_M`, present when rank ≤ 1.
    pub factors: Option<Vec<Vec<T>>>,
}

/// Rank ≤ 1 test and factor extraction.
///
/// A matrix with a nonzero pivot `(r*, c*)` has rank ≤ 1 iff every minor
/// `M[r,c]·M[r*,c*] − M[r,c*]·M[r*,c]` vanishes; the test is applied to every
/// mode matricization with the largest entry as pivot. Factors are the fibers
/// through the pivot, the first rescaled by `pivot^{1−M}`.
pub fn rank_one<T: Scalar>(f: &SignedMeasure<T>) -> RankOne<T> {
    let order = f.order();
    let (pivot_idx, pivot_abs) = f.max_abs_entry();
    if pivot_abs.is_negligible(&T::one()) {
        let factors = f.shape().iter().map(|&n| vec![T::zero(); n]).collect();
        return RankOne { is_rank_one: true, max_minor: T::zero(), factors: Some(factors) };
    }
    let pivot = f.get(&pivot_idx).clone();
    let scale = pivot.clone() * pivot.clone();
    let mut max_minor = T::zero();
    let mut column_idx = pivot_idx.clone();
    let mut row_idx = pivot_idx.clone();
    for m in 0..order {
        for (idx, x) in f.coefficients().indexed_iter() {
            let idx = idx.slice();
            // M[r, c*]: this row, pivot's other indices.
            column_idx.copy_from_slice(&pivot_idx);
            column_idx[m] = idx[m];
            // M[r*, c]: pivot row, this entry's other indices.
            row_idx.copy_from_slice(idx);
            row_idx[m] = pivot_idx[m];
            let minor = x.clone() * pivot.clone() - f.get(&column_idx).clone() * f.get(&row_idx).clone();
            let a = minor.abs();
            if a > max_minor {
                max_minor = a;
            }
        }
    }
    let is_rank_one = max_minor.is_negligible(&scale);
    let factors = is_rank_one.then(|| {
        let mut fs: Vec<Vec<T>> = (0..order).map(|m| f.fiber(&pivot_idx, m)).collect();
        let mut denom = T::one();
        for _ in 1..order {
            denom = denom * pivot.clone();
        }
        fs[0] = fs[0].iter().map(|x| x.clone() / denom.clone()).collect();
        fs
    });
    RankOne { is_rank_one, max_minor, factors }
}

/// Membership of `f` in `class`.
///
/// `I` itself cannot be decided from `f` alone; asking for it runs the
/// necessary zero-marginals test, same as [`MeasureClass::IMarginalNecessary`].
pub fn class_membership<T: Scalar>(f: &SignedMeasure<T>, class: MeasureClass) -> Membership<T> {
    let scale = f.max_abs_entry().1;
    let mass = f.mass();
    match class {
        MeasureClass::Mb => Membership { member: true, residuals: Vec::new() },
        MeasureClass::Mb0 => Membership { member: mass.is_negligible(&scale), residuals: vec![("mass".into(), mass)] },
        MeasureClass::ProdMb0 | MeasureClass::SumZeroProduct => {
            let r1 = rank_one(f);
            let mut residuals = vec![("rank_one_minor".to_string(), r1.max_minor.clone())];
            let member = match (&r1.factors, class) {
                (None, _) => false,
                (Some(fs), MeasureClass::ProdMb0) => {
                    if f.is_zero() {
                        true
                    } else {
                        let mut all = true;
                        for (m, factor) in fs.iter().enumerate() {
                            let s = factor.iter().fold(T::zero(), |a, x| a + x.clone());
                            let fscale = factor.iter().fold(T::zero(), |a, x| if x.abs() > a { x.abs() } else { a });
                            all &= s.is_negligible(&fscale);
                            residuals.push((format!("factor_sum_{}", m + 1), s));
                        }
                        all
                    }
                }
                (Some(_), _) => {
                    residuals.push(("mass".into(), mass.clone()));
                    mass.is_negligible(&scale)
                }
            };
            Membership { member, residuals }
        }
        MeasureClass::IMarginalNecessary | MeasureClass::I => {
            let mut member = true;
            let mut residuals = Vec::new();
            for (m, marginal) in f.marginal_vectors().into_iter().enumerate() {
                let worst = marginal.into_iter().fold(T::zero(), |a, x| if x.abs() > a { x.abs() } else { a });
                member &= worst.is_negligible(&scale);
                residuals.push((format!("marginal_{}", m + 1), worst));
            }
            Membership { member, residuals }
        }
    }
}

/// Sum of the entries of a vector.
pub fn total<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |a, x| a + x.clone())
}

/// Iterator over all multi-indices of `shape` in row-major order.
pub fn indices(shape: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total: usize = shape.iter().product();
    (0..total).map(move |mut flat| {
        let mut idx = vec![0; shape.len()];
        for m in (0..shape.len()).rev() {
            idx[m] = flat % shape[m];
            flat /= shape[m];
        }
        idx
    })
}
