//! Batch sweep driver.
//!
//! Runs one Monte-Carlo sweep over the default layout (or a TOML scenario)
//! and writes one CSV row per (value, zeta, direct link, mode) cell. Failures
//! print a single JSON object on stderr and exit nonzero.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Mutex;

use clap::{Parser, ValueEnum};
use log::info;
use thz_ris::experiments::{
    Mode, SweepSpec, SweepVariable, TrialKey, absorption_model, run_sweep_with, scenario_for_sweep, write_rows_csv,
};
use thz_ris::optimizer::BcdTrace;
use thz_ris::scenario::{ReRadiation, ScenarioConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Sweep {
    RisElements,
    RxAntennas,
    RisPositionX,
    Frequency,
}

impl From<Sweep> for SweepVariable {
    fn from(s: Sweep) -> Self {
        match s {
            Sweep::RisElements => SweepVariable::RisElements,
            Sweep::RxAntennas => SweepVariable::RxAntennas,
            Sweep::RisPositionX => SweepVariable::RisPositionX,
            Sweep::Frequency => SweepVariable::Frequency,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ZetaChoice {
    #[value(name = "0")]
    Scattering,
    #[value(name = "1")]
    Noise,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OnOff {
    On,
    Off,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeChoice {
    Optimized,
    Random,
    Both,
}

#[derive(Debug, Parser)]
#[command(name = "thz-ris-cli", version, about = "RIS-assisted THz uplink sweeps under molecular re-radiation")]
struct Args {
    /// Scenario TOML; the built-in layout for the sweep is used when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sweep axis; required unless the config has a [sweep] section.
    #[arg(long, value_enum)]
    sweep: Option<Sweep>,
    /// Comma-separated sweep values, overriding the config and defaults.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<usize>,
    /// Base seed; defaults to optimizer.rng_seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    zeta: Option<ZetaChoice>,
    #[arg(long = "direct-link", value_enum)]
    direct_link: Option<OnOff>,
    #[arg(long, value_enum)]
    mode: Option<ModeChoice>,
    /// Result CSV; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Absorption table CSV (`frequency_hz,k_per_m`).
    #[arg(long = "absorption-table")]
    absorption_table: Option<PathBuf>,
    /// Per-iteration BCD log (`<output>.trace.csv`, or stderr).
    #[arg(long)]
    trace: bool,
    /// Print the effective scenario as TOML and exit.
    #[arg(long = "dump-config")]
    dump_config: bool,
}

#[derive(Debug)]
struct CliError {
    kind: &'static str,
    message: String,
}

impl From<thz_ris::Error> for CliError {
    fn from(e: thz_ris::Error) -> Self {
        Self { kind: e.kind(), message: e.to_string() }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self { kind: "io", message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError { kind: "usage", message: message.into() }
}

fn build_spec(args: &Args, cfg: &ScenarioConfig) -> Result<SweepSpec, CliError> {
    let mut spec = match (args.sweep, cfg.sweep_spec()) {
        (Some(s), Some(from_file)) => {
            let from_file = from_file?;
            let variable = SweepVariable::from(s);
            if from_file.variable == variable {
                from_file
            } else {
                SweepSpec { variable, values: variable.default_values(), ..from_file }
            }
        }
        (Some(s), None) => SweepSpec::full(s.into(), 50),
        (None, Some(from_file)) => from_file?,
        (None, None) => return Err(usage("no sweep given: pass --sweep or add a [sweep] section")),
    };
    if let Some(values) = &args.values {
        spec.values = values.clone();
    }
    if let Some(trials) = args.trials {
        spec.trials = trials;
    }
    match args.zeta {
        Some(ZetaChoice::Scattering) => spec.zeta_values = vec![ReRadiation::Scattering],
        Some(ZetaChoice::Noise) => spec.zeta_values = vec![ReRadiation::Noise],
        Some(ZetaChoice::Both) => spec.zeta_values = vec![ReRadiation::Scattering, ReRadiation::Noise],
        None => {}
    }
    match args.direct_link {
        Some(OnOff::On) => spec.direct_link = vec![true],
        Some(OnOff::Off) => spec.direct_link = vec![false],
        Some(OnOff::Both) => spec.direct_link = vec![true, false],
        None => {}
    }
    match args.mode {
        Some(ModeChoice::Optimized) => spec.modes = vec![Mode::Optimized],
        Some(ModeChoice::Random) => spec.modes = vec![Mode::Random],
        Some(ModeChoice::Both) => spec.modes = vec![Mode::Optimized, Mode::Random],
        None => {}
    }
    spec.validate()?;
    Ok(spec)
}

fn load_config(args: &Args) -> Result<ScenarioConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => {
            let sweep = args.sweep.ok_or_else(|| usage("pass --sweep or --config"))?;
            scenario_for_sweep(sweep.into())
        }
    };
    if let Some(table) = &args.absorption_table {
        cfg.system.absorption_table = Some(table.clone());
        cfg.base_dir = None;
    }
    Ok(cfg)
}

fn trace_row(key: &TrialKey, trace: &BcdTrace<f64>) -> String {
    let mut out = String::new();
    for it in &trace.iterations {
        out.push_str(&format!(
            "{},{},{},{},{},{:e},{:e},{:e}\n",
            key.value,
            key.zeta.zeta(),
            key.direct_link,
            key.trial,
            it.iteration,
            it.gamma,
            it.t_star,
            it.delta
        ));
    }
    out
}

fn run(args: Args) -> Result<(), CliError> {
    let cfg = load_config(&args)?;
    if args.dump_config {
        print!("{}", cfg.to_toml_string());
        return Ok(());
    }
    let spec = build_spec(&args, &cfg)?;
    let seed = args.seed.unwrap_or(cfg.optimizer.rng_seed);
    let model = absorption_model(&cfg)?;

    let trace_out: Option<Mutex<Box<dyn Write + Send>>> = if args.trace {
        let sink: Box<dyn Write + Send> = match &args.output {
            Some(path) => {
                let mut name = path.clone().into_os_string();
                name.push(".trace.csv");
                Box::new(BufWriter::new(File::create(PathBuf::from(name))?))
            }
            None => Box::new(io::stderr()),
        };
        let sink = Mutex::new(sink);
        writeln!(sink.lock().expect("trace lock"), "value,zeta,direct,trial,iteration,gamma,t_star,delta")?;
        Some(sink)
    } else {
        None
    };
    let on_trace = |key: &TrialKey, trace: &BcdTrace<f64>| {
        if let Some(sink) = &trace_out {
            let rows = trace_row(key, trace);
            let _ = sink.lock().expect("trace lock").write_all(rows.as_bytes());
        }
    };

    info!("running {} cells x {} trials, seed {seed}", spec.n_cells(), spec.trials);
    let rows = run_sweep_with(&spec, &cfg, &model, seed, Some(&on_trace))?;
    if let Some(sink) = &trace_out {
        sink.lock().expect("trace lock").flush()?;
    }
    match &args.output {
        Some(path) => write_rows_csv(&rows, BufWriter::new(File::create(path)?))?,
        None => write_rows_csv(&rows, io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = serde_json::json!({ "error": e.kind, "message": e.message });
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}
