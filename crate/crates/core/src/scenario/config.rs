//! TOML experiment configuration with `[system]`, `[placement]`,
//! `[optimizer]` and `[sweep]` sections. Lengths in meters, frequencies in
//! Hz, powers in W, angles in degrees.

use std::path::{Path, PathBuf};

use nalgebra::Point2;
use serde::{Deserialize, Serialize};

use super::{Hemisphere, Placement, ReRadiation, SystemParams, centered_normal, dbm_per_hz_to_watts};
use crate::experiments::{Mode, SweepSpec, SweepVariable};
use crate::optimizer::OptimizerConfig;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub system: SystemSection,
    pub placement: PlacementSection,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    /// Directory relative paths in the file are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub carrier_frequency_hz: f64,
    pub bandwidth_hz: f64,
    /// One entry per transmitter, or a single entry shared by all.
    pub tx_power_w: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thermal_noise_w_per_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thermal_noise_dbm_per_hz: Option<f64>,
    pub zeta: ReRadiation,
    #[serde(default = "default_temperature")]
    pub temperature_k: f64,
    #[serde(default = "default_pressure")]
    pub pressure_atm: f64,
    #[serde(default = "default_humidity")]
    pub relative_humidity: f64,
    #[serde(default = "default_true")]
    pub direct_link: bool,
    #[serde(default = "default_spacing")]
    pub spacing_ratio: f64,
    /// CSV with header `frequency_hz,k_per_m`. The bundled sample table is
    /// used when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub absorption_table: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementSection {
    pub rx: [f64; 2],
    pub ris: [f64; 2],
    /// Tx of interest first, then the interferers.
    pub tx: Vec<[f64; 2]>,
    /// Centred on the node bearings when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rx_array_normal_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ris_array_normal_deg: Option<f64>,
    pub n_rx_antennas: usize,
    pub n_ris_elements: usize,
    #[serde(default)]
    pub hemisphere: Hemisphere,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSection {
    pub epsilon: f64,
    pub bisection_upper: f64,
    pub bisection_tol: f64,
    pub n_randomizations: usize,
    pub max_bcd_iterations: usize,
    pub rng_seed: u64,
    pub sdp_tolerance: f64,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        let d = OptimizerConfig::default();
        Self {
            epsilon: d.epsilon,
            bisection_upper: d.bisection_upper,
            bisection_tol: d.bisection_tol,
            n_randomizations: d.n_randomizations,
            max_bcd_iterations: d.max_bcd_iterations,
            rng_seed: d.rng_seed,
            sdp_tolerance: d.sdp.tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub variable: SweepVariable,
    #[serde(default)]
    pub values: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_modes")]
    pub modes: Vec<Mode>,
    #[serde(default = "default_zetas")]
    pub zeta_values: Vec<ReRadiation>,
    #[serde(default = "default_direct")]
    pub direct_link: Vec<bool>,
}

fn default_temperature() -> f64 {
    300.15
}
fn default_pressure() -> f64 {
    1.0
}
fn default_humidity() -> f64 {
    0.5
}
fn default_true() -> bool {
    true
}
fn default_spacing() -> f64 {
    0.5
}
fn default_trials() -> usize {
    50
}
fn default_modes() -> Vec<Mode> {
    vec![Mode::Optimized, Mode::Random]
}
fn default_zetas() -> Vec<ReRadiation> {
    vec![ReRadiation::Scattering, ReRadiation::Noise]
}
fn default_direct() -> Vec<bool> {
    vec![true, false]
}

fn point(p: [f64; 2]) -> Point2<f64> {
    Point2::new(p[0], p[1])
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Absorption table path with relative paths resolved against the
    /// config file's directory.
    pub fn absorption_table_path(&self) -> Option<PathBuf> {
        self.system.absorption_table.as_ref().map(|p| match &self.base_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.clone(),
        })
    }

    pub fn system_params(&self) -> Result<SystemParams<f64>> {
        let s = &self.system;
        let n_tx = self.placement.tx.len();
        let tx_powers = match s.tx_power_w.len() {
            1 => vec![s.tx_power_w[0]; n_tx],
            n if n == n_tx => s.tx_power_w.clone(),
            n => {
                return Err(Error::Config(format!(
                    "tx_power_w has {n} entries for {n_tx} transmitters"
                )));
            }
        };
        let density = match (s.thermal_noise_w_per_hz, s.thermal_noise_dbm_per_hz) {
            (Some(w), None) => w,
            (None, Some(dbm)) => dbm_per_hz_to_watts(dbm),
            (None, None) => dbm_per_hz_to_watts(-174.0),
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "give thermal noise either in W/Hz or in dBm/Hz, not both".into(),
                ));
            }
        };
        let params = SystemParams {
            carrier_frequency: s.carrier_frequency_hz,
            bandwidth: s.bandwidth_hz,
            tx_powers,
            thermal_noise_density: density,
            re_radiation: s.zeta,
            temperature: s.temperature_k,
            pressure: s.pressure_atm,
            relative_humidity: s.relative_humidity,
            direct_link_present: s.direct_link,
            spacing_ratio: s.spacing_ratio,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn placement(&self) -> Result<Placement<f64>> {
        self.placement.to_placement()
    }

    pub fn optimizer_config(&self) -> Result<OptimizerConfig> {
        let o = &self.optimizer;
        let mut cfg = OptimizerConfig {
            epsilon: o.epsilon,
            bisection_upper: o.bisection_upper,
            bisection_tol: o.bisection_tol,
            n_randomizations: o.n_randomizations,
            max_bcd_iterations: o.max_bcd_iterations,
            rng_seed: o.rng_seed,
            ..OptimizerConfig::default()
        };
        cfg.sdp.tolerance = o.sdp_tolerance;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn sweep_spec(&self) -> Option<Result<SweepSpec>> {
        self.sweep.as_ref().map(|s| {
            let values = if s.values.is_empty() { s.variable.default_values() } else { s.values.clone() };
            let spec = SweepSpec {
                variable: s.variable,
                values,
                trials: s.trials,
                modes: s.modes.clone(),
                zeta_values: s.zeta_values.clone(),
                direct_link: s.direct_link.clone(),
            };
            spec.validate().map(|_| spec)
        })
    }
}

impl PlacementSection {
    pub fn to_placement(&self) -> Result<Placement<f64>> {
        let rx = point(self.rx);
        let ris = point(self.ris);
        let txs: Vec<Point2<f64>> = self.tx.iter().copied().map(point).collect();
        let rx_normal = match self.rx_array_normal_deg {
            Some(deg) => deg.to_radians(),
            None => {
                let mut targets = txs.clone();
                targets.push(ris);
                centered_normal(&rx, &targets).ok_or_else(|| {
                    Error::Geometry("no Rx orientation sees every node; set rx_array_normal_deg".into())
                })?
            }
        };
        let ris_normal = match self.ris_array_normal_deg {
            Some(deg) => deg.to_radians(),
            None => {
                let mut targets = txs.clone();
                targets.push(rx);
                centered_normal(&ris, &targets).ok_or_else(|| {
                    Error::Geometry("no RIS orientation sees every node; set ris_array_normal_deg".into())
                })?
            }
        };
        Ok(Placement {
            rx_position: rx,
            ris_position: ris,
            tx_positions: txs,
            rx_array_normal: rx_normal,
            ris_array_normal: ris_normal,
            n_rx_antennas: self.n_rx_antennas,
            n_ris_elements: self.n_ris_elements,
            hemisphere: self.hemisphere,
        })
    }
}
