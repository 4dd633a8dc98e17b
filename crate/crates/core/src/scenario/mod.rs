//! Scenario description: system parameters, node placement, and the link
//! distances and angles derived from it.

mod config;
mod geometry;

pub use config::{
    OptimizerSection, PlacementSection, ScenarioConfig, SweepSection, SystemSection,
};
pub use geometry::{Geometry, Hemisphere, Placement, TxLinks, centered_normal, resolve_geometry};

use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result};

/// How molecular re-radiation manifests at the receiver.
///
/// `Noise` is the additive-Gaussian model (zeta = 1); `Scattering` treats the
/// re-radiated power as an NLOS Rician component (zeta = 0).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum ReRadiation {
    Scattering,
    Noise,
}

impl ReRadiation {
    pub fn zeta(self) -> u8 {
        match self {
            ReRadiation::Scattering => 0,
            ReRadiation::Noise => 1,
        }
    }

    pub fn zeta_as<T: Real>(self) -> T {
        T::lit(self.zeta() as f64)
    }
}

impl TryFrom<u8> for ReRadiation {
    type Error = String;

    fn try_from(z: u8) -> std::result::Result<Self, String> {
        match z {
            0 => Ok(ReRadiation::Scattering),
            1 => Ok(ReRadiation::Noise),
            other => Err(format!("zeta must be 0 or 1, got {other}")),
        }
    }
}

impl From<ReRadiation> for u8 {
    fn from(r: ReRadiation) -> u8 {
        r.zeta()
    }
}

/// Radio and atmosphere parameters of one experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemParams<T: Real> {
    /// Carrier frequency in Hz.
    pub carrier_frequency: T,
    /// Bandwidth in Hz.
    pub bandwidth: T,
    /// Transmit power in W per transmitter; index 0 is the Tx of interest.
    pub tx_powers: Vec<T>,
    /// Thermal noise power spectral density in W/Hz.
    pub thermal_noise_density: T,
    pub re_radiation: ReRadiation,
    /// Temperature in K. Provenance metadata for the absorption table only.
    pub temperature: T,
    /// Pressure in atm. Provenance metadata only.
    pub pressure: T,
    /// Relative humidity as a fraction. Provenance metadata only.
    pub relative_humidity: T,
    pub direct_link_present: bool,
    /// Element spacing over wavelength for both ULAs.
    pub spacing_ratio: T,
}

impl<T: Real> SystemParams<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: T, what: &str| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{what} must be positive, got {v}")))
            }
        };
        positive(self.carrier_frequency, "carrier_frequency")?;
        positive(self.bandwidth, "bandwidth")?;
        positive(self.spacing_ratio, "spacing_ratio")?;
        if self.tx_powers.is_empty() {
            return Err(Error::InvalidParameter("at least one transmitter required".into()));
        }
        for (i, &p) in self.tx_powers.iter().enumerate() {
            positive(p, &format!("tx_powers[{i}]"))?;
        }
        if !(self.thermal_noise_density >= T::zero()) {
            return Err(Error::InvalidParameter("thermal_noise_density must be >= 0".into()));
        }
        Ok(())
    }

    /// `sigma_w^2 = N0 * B`.
    pub fn thermal_noise_power(&self) -> T {
        self.thermal_noise_density * self.bandwidth
    }

    pub fn zeta(&self) -> T {
        self.re_radiation.zeta_as()
    }

    pub fn n_interferers(&self) -> usize {
        self.tx_powers.len() - 1
    }
}

/// Converts a density in dBm/Hz to W/Hz.
pub fn dbm_per_hz_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}
