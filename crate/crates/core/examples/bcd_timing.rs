//! Times one BCD run on the default layout at a given size.
//!
//! `cargo run --release --example bcd_timing -- <N> <N_R> <zeta> <direct>`

use std::time::Instant;

use thz_ris::channel::build_channel_set;
use thz_ris::experiments::default_scenario;
use thz_ris::optimizer::bcd_optimize;
use thz_ris::rng::stream;
use thz_ris::scenario::{ReRadiation, resolve_geometry};
use thz_ris::signal_model::molecular_noise;
use thz_ris::AbsorptionModel64;

fn main() {
    env_logger::init();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, d: usize| args.get(i).and_then(|s| s.parse().ok()).unwrap_or(d);
    let mut cfg = default_scenario();
    cfg.placement.n_ris_elements = arg(0, 64);
    cfg.placement.n_rx_antennas = arg(1, 16);
    cfg.system.zeta = if arg(2, 0) == 1 { ReRadiation::Noise } else { ReRadiation::Scattering };
    cfg.system.direct_link = arg(3, 0) == 1;
    let params = cfg.system_params().unwrap();
    let geometry = resolve_geometry(&cfg.placement().unwrap()).unwrap();
    let model = AbsorptionModel64::sample();
    let optimizer = cfg.optimizer_config().unwrap();
    let seeds: u64 = std::env::var("SEEDS").ok().and_then(|s| s.parse().ok()).unwrap_or(3);
    for seed in 0..seeds {
        let channels = build_channel_set(&geometry, &params, &model, &mut stream(seed)).unwrap();
        let noise = molecular_noise(&geometry, &params, &model).unwrap();
        let t0 = Instant::now();
        let out = match bcd_optimize(&channels, &noise, &params, &optimizer, &mut stream(100 + seed)) {
            Ok(out) => out,
            Err(thz_ris::optimizer::OptimizeError::Solver { t, source: thz_ris::sdp::SdpError::NoConvergence { lower_bound, upper_bound, .. }, best }) => {
                println!("seed {seed}: no verdict at t = {t:e}, slack in [{lower_bound:e}, {upper_bound:e}], best gamma {:e}", best.map(|b| b.gamma).unwrap_or(0.0));
                continue;
            }
            Err(e) => panic!("{e}"),
        };
        let probes: usize = out.trace.iterations.iter().map(|it| it.probes.len()).sum();
        println!(
            "seed {seed}: gamma {:.4e}, t* {:.4e}, {} iterations, {probes} probes, converged {}, {:.2} s",
            out.gamma,
            out.trace.iterations.last().unwrap().t_star,
            out.trace.len(),
            out.trace.converged,
            t0.elapsed().as_secs_f64()
        );
    }
}
