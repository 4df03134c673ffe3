//! # tklab
//!
//! Kernel mean embeddings for tensor product kernels on finite product spaces.
//!
//! The crate answers two kinds of questions:
//!
//! * **Quantities.** MMD, HSIC and dHSIC of distributions under a product
//!   kernel `k = k_1 ⊗ … ⊗ k_M`. On finite spaces every RKHS norm is a Gram
//!   quadratic form `vec(F)ᵀ (G_1 ⊗ … ⊗ G_M) vec(F)`, evaluated exactly in
//!   rational arithmetic without materializing the Kronecker product. For
//!   samples on `ℝ^d` the V-statistic dHSIC with a permutation test is provided.
//! * **Properties.** Whether the product kernel is characteristic, universal,
//!   ⊗₀-characteristic, ⊗-characteristic or I-characteristic, with a
//!   machine-checkable certificate for every verdict: LDLᵀ pivots, an exact
//!   witness measure, or the name of the rule that implied it.
//!
//! Modules, bottom up:
//!
//! | module | contents |
//! |--------|----------|
//! | [`scalar`] | exact rationals and floats behind one [`Scalar`](scalar::Scalar) trait |
//! | [`linalg`] | fraction-free LDLᵀ, float eigen checks, exact linear solves |
//! | [`measure`] | signed measures as coefficient tensors, marginals, measure classes |
//! | [`kernel`] | finite Gram kernels, product kernels, continuous kernels, quadratic forms |
//! | [`property`] | certified property decisions and the implication closure |
//! | [`witness`] | witness fixtures, parametric families, constructions, numerical search |
//! | [`hsic`] | population HSIC, dHSIC V-statistic, permutation test |
//! | [`json`] | the JSON interchange formats for measures, kernels, witnesses and reports |
//! | [`app`] | the command implementations behind the `tklab` binary |
//!
//! Indices are 0-based in the API and 1-based in reports. Tensors are stored
//! row-major with the first component's index varying slowest.

pub mod app;
pub mod hsic;
pub mod json;
pub mod kernel;
pub mod linalg;
pub mod measure;
pub mod property;
pub mod scalar;
pub mod witness;

mod error;
mod threads;

pub use error::Error;
pub use kernel::{ContinuousKernel, Family, FiniteKernel, KernelSpec, ProductKernel};
pub use measure::{JointDistribution, MeasureClass, SignedMeasure};
pub use property::{Property, PropertyReport, Status, Verdict};
pub use scalar::{rat, Rational, Scalar};
pub use threads::worker_pool;
pub use witness::WitnessReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;
