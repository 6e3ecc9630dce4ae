//! Rate, key and link-budget modelling for entangled-photon QKD links that
//! split a broadband pair source into conjugate wavelength channels.
//!
//! The analytic modules are generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix them to `f64`. Event simulation and scenario tooling
//! work in `f64` only.

pub mod coincidence;
pub mod demux;
pub mod error;
pub mod montecarlo;
pub mod qkd;
pub mod quadrature;
pub mod scalar;
pub mod scenario;
pub mod source;
pub mod units;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Wavelength = units::Wavelength<f64>;
pub type AttenuationDb = units::AttenuationDb<f64>;
pub type SpectralShape = units::SpectralShape<f64>;
pub type SourceSpec = source::SourceSpec<f64>;
pub type GridSpec = demux::GridSpec<f64>;
pub type ChannelPlan = demux::ChannelPlan<f64>;
pub type DetectorSpec = coincidence::DetectorSpec<f64>;
pub type ArmEfficiency = coincidence::ArmEfficiency<f64>;
pub type CoincidenceConfig = coincidence::CoincidenceConfig<f64>;
pub type DetectionSetup = coincidence::DetectionSetup<f64>;
pub type PairFlux = coincidence::PairFlux<f64>;
pub type PairStats = coincidence::PairStats<f64>;
pub type RateReport = coincidence::RateReport<f64>;
pub type KeyRateParams = qkd::KeyRateParams<f64>;
pub type KeyRateReport = qkd::KeyRateReport<f64>;
