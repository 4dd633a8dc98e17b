//! Monte-Carlo sweeps over one scenario parameter.
//!
//! Each (value, trial) pair gets its own channel, random-configuration and
//! optimizer streams, shared by every zeta / direct-link / mode cell at that
//! value, so cells at the same sweep point are compared on paired draws.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::absorption::AbsorptionModel;
use crate::channel::build_channel_set;
use crate::optimizer::{BcdTrace, OptimizerConfig, bcd_optimize_from, optimal_beamformer};
use crate::rng::{Purpose, derived_stream};
use crate::scenario::{Hemisphere, PlacementSection, ReRadiation, ScenarioConfig, SystemSection, resolve_geometry};
use crate::signal_model::{RisConfig, molecular_noise, sinr, throughput};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    RisElements,
    RxAntennas,
    RisPositionX,
    Frequency,
}

impl SweepVariable {
    pub const ALL: [SweepVariable; 4] = [Self::RisElements, Self::RxAntennas, Self::RisPositionX, Self::Frequency];

    pub fn name(self) -> &'static str {
        match self {
            Self::RisElements => "ris_elements",
            Self::RxAntennas => "rx_antennas",
            Self::RisPositionX => "ris_position_x",
            Self::Frequency => "frequency",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == name)
    }

    pub fn default_values(self) -> Vec<f64> {
        match self {
            Self::RisElements => vec![50.0, 100.0, 150.0, 200.0, 250.0],
            Self::RxAntennas => vec![20.0, 40.0, 60.0, 80.0, 100.0],
            Self::RisPositionX => vec![0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75],
            Self::Frequency => (0..13).map(|i| 200e9 + 20e9 * i as f64).collect(),
        }
    }

    fn is_count(self) -> bool {
        matches!(self, Self::RisElements | Self::RxAntennas)
    }

    /// Writes `value` into a copy of `base`.
    pub fn apply(self, base: &ScenarioConfig, value: f64) -> ScenarioConfig {
        let mut cfg = base.clone();
        match self {
            Self::RisElements => cfg.placement.n_ris_elements = value as usize,
            Self::RxAntennas => cfg.placement.n_rx_antennas = value as usize,
            Self::RisPositionX => cfg.placement.ris = [value, cfg.placement.ris[1]],
            Self::Frequency => cfg.system.carrier_frequency_hz = value,
        }
        cfg
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Optimized,
    Random,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Optimized => "optimized",
            Self::Random => "random",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub trials: usize,
    pub modes: Vec<Mode>,
    pub zeta_values: Vec<ReRadiation>,
    pub direct_link: Vec<bool>,
}

impl SweepSpec {
    /// Every zeta, direct-link setting and mode at the variable's default values.
    pub fn full(variable: SweepVariable, trials: usize) -> Self {
        Self {
            variable,
            values: variable.default_values(),
            trials,
            modes: vec![Mode::Optimized, Mode::Random],
            zeta_values: vec![ReRadiation::Scattering, ReRadiation::Noise],
            direct_link: vec![true, false],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.values.is_empty() {
            return bad("sweep has no values".into());
        }
        if self.values.iter().any(|v| !v.is_finite()) || self.values.windows(2).any(|w| w[1] < w[0]) {
            return bad(format!("sweep values must be finite and sorted, got {:?}", self.values));
        }
        if self.variable.is_count() && self.values.iter().any(|&v| v < 1.0 || v.fract() != 0.0) {
            return bad(format!("{} values must be positive integers", self.variable.name()));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.modes.is_empty() || self.zeta_values.is_empty() || self.direct_link.is_empty() {
            return bad("modes, zeta values and direct-link settings must be non-empty".into());
        }
        Ok(())
    }

    /// Number of output rows.
    pub fn n_cells(&self) -> usize {
        self.values.len() * self.zeta_values.len() * self.direct_link.len() * self.modes.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub sweep_var: SweepVariable,
    pub value: f64,
    pub zeta: ReRadiation,
    pub direct_link: bool,
    pub mode: Mode,
    /// Mean over successful trials; NaN when every trial failed.
    pub mean_throughput_bps: f64,
    pub stderr_bps: f64,
    pub mean_iters: f64,
    pub failures: usize,
    /// Summed per-trial compute time.
    pub wall_s: f64,
    /// Per-trial throughput, `None` for failed trials, in trial order.
    pub samples: Vec<Option<f64>>,
}

pub const CSV_HEADER: &str = "sweep_var,value,zeta,direct,mode,mean_throughput_bps,stderr_bps,mean_iters,failures,wall_s";

pub fn write_rows_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in rows {
        w.write_record([
            r.sweep_var.name().to_string(),
            r.value.to_string(),
            r.zeta.zeta().to_string(),
            r.direct_link.to_string(),
            r.mode.name().to_string(),
            format!("{:.6e}", r.mean_throughput_bps),
            format!("{:.6e}", r.stderr_bps),
            format!("{:.3}", r.mean_iters),
            r.failures.to_string(),
            format!("{:.3}", r.wall_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Identifies one trial of one cell, for trace callbacks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialKey {
    pub value: f64,
    pub zeta: ReRadiation,
    pub direct_link: bool,
    pub trial: usize,
}

pub type TraceSink<'a> = &'a (dyn Fn(&TrialKey, &BcdTrace<f64>) + Sync);

#[derive(Clone, Copy, Debug, Default)]
struct Sample {
    throughput: Option<f64>,
    iterations: usize,
    seconds: f64,
}

/// Reference layout: Rx with 100 antennas at the origin, a 250-element RIS
/// at (1, 0), Tx0 1 m away at 60 degrees and three interferers on a 6 m ring
/// at 5, 75 and 135 degrees, all transmitting 2 W at 220 GHz over 10 GHz.
/// Array orientations are chosen so every node is in front of both arrays.
pub fn default_scenario() -> ScenarioConfig {
    let ring = |deg: f64, r: f64| [r * deg.to_radians().cos(), r * deg.to_radians().sin()];
    ScenarioConfig {
        system: SystemSection {
            carrier_frequency_hz: 220e9,
            bandwidth_hz: 10e9,
            tx_power_w: vec![2.0],
            thermal_noise_w_per_hz: None,
            thermal_noise_dbm_per_hz: Some(-174.0),
            zeta: ReRadiation::Noise,
            temperature_k: 300.15,
            pressure_atm: 1.0,
            relative_humidity: 0.5,
            direct_link: true,
            spacing_ratio: 0.5,
            absorption_table: None,
        },
        placement: PlacementSection {
            rx: [0.0, 0.0],
            ris: [1.0, 0.0],
            tx: vec![ring(60.0, 1.0), ring(5.0, 6.0), ring(75.0, 6.0), ring(135.0, 6.0)],
            rx_array_normal_deg: None,
            ris_array_normal_deg: None,
            n_rx_antennas: 100,
            n_ris_elements: 250,
            hemisphere: Hemisphere::Open,
        },
        optimizer: Default::default(),
        sweep: None,
        base_dir: None,
    }
}

/// Default scenario adjusted for `variable`: the position sweep moves Tx0 to
/// (2, 0) and turns the RIS to face +y so the collinear Tx0-RIS-Rx layout
/// sits on the closed front half-plane; position and frequency sweeps use
/// 50 RIS elements.
pub fn scenario_for_sweep(variable: SweepVariable) -> ScenarioConfig {
    let mut cfg = default_scenario();
    match variable {
        SweepVariable::RisPositionX => {
            cfg.placement.tx[0] = [2.0, 0.0];
            cfg.placement.ris_array_normal_deg = Some(90.0);
            cfg.placement.hemisphere = Hemisphere::Closed;
            cfg.placement.n_ris_elements = 50;
        }
        SweepVariable::Frequency => cfg.placement.n_ris_elements = 50,
        SweepVariable::RisElements | SweepVariable::RxAntennas => {}
    }
    cfg
}

/// Loads the configured absorption table, or the bundled sample.
pub fn absorption_model(cfg: &ScenarioConfig) -> Result<AbsorptionModel<f64>> {
    match cfg.absorption_table_path() {
        Some(path) => AbsorptionModel::from_csv_path(path),
        None => Ok(AbsorptionModel::sample()),
    }
}

/// Runs a sweep with the absorption table named in `base`.
pub fn run_sweep(spec: &SweepSpec, base: &ScenarioConfig, seed: u64) -> Result<Vec<ResultRow>> {
    let model = absorption_model(base)?;
    run_sweep_with(spec, base, &model, seed, None)
}

/// Runs every cell of `spec`. Trial failures are counted per row and left
/// out of the means; configuration errors abort the sweep.
pub fn run_sweep_with(
    spec: &SweepSpec,
    base: &ScenarioConfig,
    model: &AbsorptionModel<f64>,
    seed: u64,
    trace: Option<TraceSink<'_>>,
) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let optimizer = base.optimizer_config()?;

    // Resolve every sweep point up front so layout errors surface before any work.
    let mut points = Vec::with_capacity(spec.values.len());
    for &value in &spec.values {
        let cfg = spec.variable.apply(base, value);
        let params = cfg.system_params()?;
        let geometry = resolve_geometry(&cfg.placement()?)?;
        model.coefficient(params.carrier_frequency)?;
        points.push((params, geometry));
    }

    let want_optimized = spec.modes.contains(&Mode::Optimized);
    let want_random = spec.modes.contains(&Mode::Random);
    let mut jobs = Vec::new();
    for vi in 0..spec.values.len() {
        for &zeta in &spec.zeta_values {
            for &direct in &spec.direct_link {
                for trial in 0..spec.trials {
                    jobs.push((vi, zeta, direct, trial));
                }
            }
        }
    }
    info!("sweep {}: {} cells, {} trials each", spec.variable.name(), spec.n_cells(), spec.trials);

    let results: Vec<(Sample, Sample)> = jobs
        .par_iter()
        .map(|&(vi, zeta, direct, trial)| {
            let (base_params, geometry) = &points[vi];
            let mut params = base_params.clone();
            params.re_radiation = zeta;
            params.direct_link_present = direct;
            let key = TrialKey { value: spec.values[vi], zeta, direct_link: direct, trial };
            run_trial(&params, geometry, model, &optimizer, seed, vi as u32, &key, want_optimized, want_random, trace)
        })
        .collect();

    let mut rows = Vec::with_capacity(spec.n_cells());
    let mut chunks = results.chunks(spec.trials);
    for &value in &spec.values {
        for &zeta in &spec.zeta_values {
            for &direct in &spec.direct_link {
                let chunk = chunks.next().expect("one chunk per cell");
                for &mode in &spec.modes {
                    let samples: Vec<Sample> = chunk
                        .iter()
                        .map(|(opt, rnd)| if mode == Mode::Optimized { *opt } else { *rnd })
                        .collect();
                    rows.push(aggregate(spec.variable, value, zeta, direct, mode, &samples));
                }
            }
        }
    }
    Ok(rows)
}

#[allow(clippy::too_many_arguments)]
fn run_trial(
    params: &crate::scenario::SystemParams<f64>,
    geometry: &crate::scenario::Geometry<f64>,
    model: &AbsorptionModel<f64>,
    optimizer: &OptimizerConfig,
    seed: u64,
    cell: u32,
    key: &TrialKey,
    want_optimized: bool,
    want_random: bool,
    trace: Option<TraceSink<'_>>,
) -> (Sample, Sample) {
    let trial = key.trial as u32;
    let start = Instant::now();
    let setup = (|| -> Result<_> {
        let mut rng = derived_stream(seed, cell, trial, Purpose::Channel);
        let channels = build_channel_set(geometry, params, model, &mut rng)?;
        let noise = molecular_noise(geometry, params, model)?;
        let mut rng = derived_stream(seed, cell, trial, Purpose::RandomConfig);
        let random = RisConfig::random_phases(geometry.n_ris_elements, &mut rng);
        Ok((channels, noise, random))
    })();
    let (channels, noise, random) = match setup {
        Ok(s) => s,
        Err(e) => {
            warn!("trial {key:?}: setup failed: {e}");
            return (Sample::default(), Sample::default());
        }
    };

    let mut random_sample = Sample::default();
    if want_random {
        let t0 = Instant::now();
        let gamma = optimal_beamformer(&random, &channels, &noise, params)
            .and_then(|u| sinr(&u, &random, &channels, &noise, params));
        match gamma {
            Ok(g) => random_sample.throughput = Some(throughput(g, params.bandwidth)),
            Err(e) => warn!("trial {key:?}: random baseline failed: {e}"),
        }
        random_sample.seconds = t0.elapsed().as_secs_f64();
    }

    let mut optimized_sample = Sample::default();
    if want_optimized {
        let t0 = Instant::now();
        let mut rng = derived_stream(seed, cell, trial, Purpose::Optimizer);
        match bcd_optimize_from(&channels, &noise, params, optimizer, std::slice::from_ref(&random), &mut rng) {
            Ok(out) => {
                optimized_sample.throughput = Some(throughput(out.gamma, params.bandwidth));
                optimized_sample.iterations = out.trace.len();
                if let Some(sink) = trace {
                    sink(key, &out.trace);
                }
            }
            Err(e) => warn!("trial {key:?}: optimization failed: {e}"),
        }
        optimized_sample.seconds = t0.elapsed().as_secs_f64();
    }
    log::trace!("trial {key:?} done in {:.3} s", start.elapsed().as_secs_f64());
    (optimized_sample, random_sample)
}

fn aggregate(variable: SweepVariable, value: f64, zeta: ReRadiation, direct: bool, mode: Mode, samples: &[Sample]) -> ResultRow {
    let ok: Vec<f64> = samples.iter().filter_map(|s| s.throughput).collect();
    let n = ok.len();
    let mean = if n > 0 { ok.iter().sum::<f64>() / n as f64 } else { f64::NAN };
    let stderr = if n > 1 {
        let var = ok.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    let iters: Vec<usize> = samples.iter().filter(|s| s.throughput.is_some()).map(|s| s.iterations).collect();
    let mean_iters = if n > 0 { iters.iter().sum::<usize>() as f64 / n as f64 } else { 0.0 };
    ResultRow {
        sweep_var: variable,
        value,
        zeta,
        direct_link: direct,
        mode,
        mean_throughput_bps: mean,
        stderr_bps: stderr,
        mean_iters,
        failures: samples.len() - n,
        wall_s: samples.iter().map(|s| s.seconds).sum(),
        samples: samples.iter().map(|s| s.throughput).collect(),
    }
}

/// Default output file name for a sweep.
pub fn default_output_path(variable: SweepVariable) -> PathBuf {
    PathBuf::from(format!("sweep_{}.csv", variable.name()))
}
