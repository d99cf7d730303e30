//! Holographic MIMO channel modelling under physical constraints.
//!
//! The crate synthesises narrowband channel matrices from a discretised
//! plane-wave expansion of the field between two planar arrays, applies
//! antenna-efficiency bounds, embedded element patterns and polarisation
//! leakage, and evaluates single- and multi-user rates.
//!
//! Numeric kernels are generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix them to `f64`.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angular;
pub mod array;
pub mod capacity;
pub mod channel;
pub mod efficiency;
pub mod error;
pub mod io;
pub mod leakage;
pub mod multiuser;
pub mod pattern;
pub mod postprocess;
pub mod quadrature;
pub mod reduced;
pub mod rng;
pub mod scalar;
pub mod scattering;

pub use error::{Error, Result};
pub use scalar::Real;

/// `f64` instantiations of the generic types.
pub type Complex64 = num_complex::Complex64;
pub type CMatrix = nalgebra::DMatrix<Complex64>;
pub type Geometry = array::ArrayGeometry<f64>;
pub type SampleSet = array::WavenumberSampleSet<f64>;
pub type VarianceMap = angular::AngularVarianceMap<f64>;
pub type Pattern = pattern::PolarizedPattern<f64>;
pub type Leakage = leakage::LeakageMatrix<f64>;
pub type Xpr = leakage::XprParameters<f64>;
pub type Efficiencies = efficiency::EfficiencyProfile<f64>;
pub type Realization = channel::ChannelRealization<f64>;
pub type Link = reduced::ReducedLink<f64>;
pub type UserScenario = multiuser::MultiUserScenario<f64>;
