//! Joint receive-beamformer and RIS optimization for an RIS-assisted THz
//! uplink with molecular absorption and re-radiation.
//!
//! Re-radiated power is modeled either as an NLOS scattered component of a
//! Rician channel (`ReRadiation::Scattering`, zeta = 0) or as additive noise
//! whose RIS-reflected part scales with the RIS configuration power
//! (`ReRadiation::Noise`, zeta = 1).
//!
//! The numerical core is generic over the scalar type ([`Real`], i.e. `f32`
//! or `f64`); the `*64` / `*32` aliases below name the concrete forms.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod absorption;
pub mod channel;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod optimizer;
pub mod rng;
pub mod scalar;
pub mod scenario;
pub mod sdp;
pub mod signal_model;

pub use error::{Error, Result};
pub use scalar::Real;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.99792458e8;

pub type AbsorptionModel64 = absorption::AbsorptionModel<f64>;
pub type AbsorptionModel32 = absorption::AbsorptionModel<f32>;
pub type ChannelSet64 = channel::ChannelSet<f64>;
pub type ChannelSet32 = channel::ChannelSet<f32>;
pub type Geometry64 = scenario::Geometry<f64>;
pub type Geometry32 = scenario::Geometry<f32>;
pub type Placement64 = scenario::Placement<f64>;
pub type Placement32 = scenario::Placement<f32>;
pub type SystemParams64 = scenario::SystemParams<f64>;
pub type SystemParams32 = scenario::SystemParams<f32>;
pub type NoiseModel64 = signal_model::NoiseModel<f64>;
pub type NoiseModel32 = signal_model::NoiseModel<f32>;
pub type RisConfig64 = signal_model::RisConfig<f64>;
pub type RisConfig32 = signal_model::RisConfig<f32>;
pub type Beamformer64 = signal_model::Beamformer<f64>;
pub type Beamformer32 = signal_model::Beamformer<f32>;
pub type FeasibilityProblem64 = sdp::FeasibilityProblem<f64>;
pub type FeasibilityProblem32 = sdp::FeasibilityProblem<f32>;
pub type BcdOutcome64 = optimizer::BcdOutcome<f64>;
pub type BcdOutcome32 = optimizer::BcdOutcome<f32>;
