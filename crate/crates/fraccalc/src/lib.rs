//! Fractional differintegrals defined through the Fourier multiplier `(-ik)^α`.
//!
//! The crate evaluates the operator on functions of a real variable (Liouville and
//! regularized quadrature forms), on rational pole sums in closed form with explicit
//! branch-cut and winding bookkeeping, and on curves in the complex plane. It also
//! verifies the composition law and the supporting Gamma/Beta identities, and offers
//! an FFT implementation of the multiplier as an independent cross-check.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the `*64` aliases below fix
//! the scalar to `f64`.

pub mod branchcut;
pub mod cli;
pub mod composition;
pub mod contour;
pub mod error;
pub mod functions;
pub mod kernel;
pub mod poleform;
pub mod quad;
pub mod realline;
pub mod scalar;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::{Real, C};

pub use branchcut::{BranchAssignment, CutCurve, CutOrientation, UnitPhase};
pub use kernel::{Order, OrderClass};
pub use poleform::{BranchChoice, PoleForm, PoleTerm};
pub use quad::QuadratureConfig;
pub use realline::{DifferintResult, Method, RealFunction};

pub type Complex64 = num_complex::Complex<f64>;
pub type Order64 = Order<f64>;
pub type UnitPhase64 = UnitPhase<f64>;
pub type CutCurve64 = CutCurve<f64>;
pub type PoleForm64 = PoleForm<f64>;
pub type BranchAssignment64 = BranchAssignment<f64>;
pub type BranchChoice64 = BranchChoice<f64>;
pub type QuadratureConfig64 = QuadratureConfig<f64>;
pub type DifferintResult64 = DifferintResult<f64>;
pub type CurvePsi64 = contour::CurvePsi<f64>;
pub type SampledGrid64 = spectral::SampledGrid<f64>;
pub type SpectralConfig64 = spectral::SpectralConfig<f64>;
pub type CompositionReport64 = composition::CompositionReport<f64>;
