use nalgebra::{Complex, Point2};
use proptest::prelude::*;

use thz_ris::absorption::{AbsorptionModel, rician_factor_from_transmittance, transmittance_from_coefficient};
use thz_ris::channel::{ChannelSet, build_channel_set, free_space_amplitude};
use thz_ris::linalg::{CMatrix, CVector, outer_self};
use thz_ris::optimizer::{OptimizerConfig, RisObjective, bcd_optimize, optimal_beamformer, phase_project, relaxed_ratio};
use thz_ris::rng::{complex_normal_matrix, complex_normal_vector, stream};
use thz_ris::scenario::{Hemisphere, Placement, ReRadiation, SystemParams, centered_normal, resolve_geometry};
use thz_ris::sdp::{FeasibilityProblem, SdpOptions, solve_feasibility};
use thz_ris::signal_model::{Beamformer, NoiseModel, RisConfig, molecular_noise, sinr};

fn params(n_tx: usize, zeta: ReRadiation, direct: bool) -> SystemParams<f64> {
    SystemParams {
        carrier_frequency: 220e9,
        bandwidth: 10e9,
        tx_powers: vec![2.0; n_tx],
        thermal_noise_density: 3.98e-21,
        re_radiation: zeta,
        temperature: 300.15,
        pressure: 1.0,
        relative_humidity: 0.5,
        direct_link_present: direct,
        spacing_ratio: 0.5,
    }
}

fn point() -> impl Strategy<Value = Point2<f64>> {
    (-8.0..8.0f64, -8.0..8.0f64).prop_map(|(x, y)| Point2::new(x, y))
}

/// Placement with auto-centred normals, or `None` when no orientation works.
fn placement(rx: Point2<f64>, ris: Point2<f64>, txs: Vec<Point2<f64>>) -> Option<Placement<f64>> {
    let mut rx_targets = txs.clone();
    rx_targets.push(ris);
    let mut ris_targets = txs.clone();
    ris_targets.push(rx);
    Some(Placement {
        rx_position: rx,
        ris_position: ris,
        rx_array_normal: centered_normal(&rx, &rx_targets)?,
        ris_array_normal: centered_normal(&ris, &ris_targets)?,
        tx_positions: txs,
        n_rx_antennas: 3,
        n_ris_elements: 4,
        hemisphere: Hemisphere::Closed,
    })
}

fn random_channels(seed: u64, n_rx: usize, n_ris: usize, n_tx: usize) -> ChannelSet<f64> {
    let mut rng = stream(seed);
    let h_sr: CMatrix<f64> = complex_normal_matrix(&mut rng, n_rx, n_ris);
    let h_rt = (0..n_tx).map(|_| complex_normal_vector(&mut rng, n_rx)).collect();
    let h_st = (0..n_tx).map(|_| complex_normal_vector(&mut rng, n_ris)).collect();
    ChannelSet::from_links(h_rt, h_st, h_sr).unwrap()
}

fn noise(thermal: f64, m1: f64, m2: f64, zeta: ReRadiation) -> NoiseModel<f64> {
    NoiseModel { thermal, direct_molecular: m1, reflected_molecular: m2, re_radiation: zeta }
}

fn zeta() -> impl Strategy<Value = ReRadiation> {
    prop_oneof![Just(ReRadiation::Scattering), Just(ReRadiation::Noise)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn geometry_distances_obey_triangle_inequality(rx in point(), ris in point(), txs in prop::collection::vec(point(), 1..4)) {
        let Some(p) = placement(rx, ris, txs) else { return Ok(()) };
        let Ok(g) = resolve_geometry(&p) else { return Ok(()) };
        let d_alpha = g.ris_rx_distance;
        prop_assert!(d_alpha > 0.0);
        for link in &g.tx {
            prop_assert!(link.rx_distance <= link.ris_distance + d_alpha + 1e-12);
            prop_assert!(link.ris_distance <= link.rx_distance + d_alpha + 1e-12);
            prop_assert!(d_alpha <= link.rx_distance + link.ris_distance + 1e-12);
            prop_assert!(link.rx_arrival.abs() <= std::f64::consts::FRAC_PI_2 + 1e-9);
            prop_assert!(link.ris_arrival.abs() <= std::f64::consts::FRAC_PI_2 + 1e-9);
        }
    }

    #[test]
    fn transmittance_multiplies_over_segments(k in 0.0..5.0f64, d1 in 0.0..20.0f64, d2 in 0.0..20.0f64) {
        let whole = transmittance_from_coefficient(k, d1 + d2);
        let parts = transmittance_from_coefficient(k, d1) * transmittance_from_coefficient(k, d2);
        prop_assert!((whole - parts).abs() <= 1e-12 * parts.max(1e-300) + 1e-300);
    }

    #[test]
    fn transmittance_decreases_with_distance(f in 100e9..450e9f64, d in 0.01..30.0f64, extra in 0.0..10.0f64) {
        let model = AbsorptionModel::<f64>::sample();
        let near = model.transmittance(f, d).unwrap();
        let far = model.transmittance(f, d + extra).unwrap();
        prop_assert!(far <= near);
        prop_assert!(near > 0.0 && near <= 1.0);
    }

    #[test]
    fn rician_factor_recovers_transmittance(tau in 1e-6..0.999_999f64) {
        let k = rician_factor_from_transmittance(tau);
        prop_assert!(((k / (k + 1.0)) - tau).abs() < 1e-9);
        prop_assert!(((1.0 / (k + 1.0)) - (1.0 - tau)).abs() < 1e-9);
    }

    #[test]
    fn sinr_ignores_combiner_phase_and_scale(seed in any::<u64>(), phi in 0.0..6.3f64, scale in 0.1..10.0f64, z in zeta()) {
        let ch = random_channels(seed, 3, 4, 3);
        let p = params(3, z, true);
        let nm = noise(1e-3, 2e-4, 3e-5, z);
        let mut rng = stream(seed ^ 0xabc);
        let theta = RisConfig::random_phases(4, &mut rng);
        let u = Beamformer::normalized(complex_normal_vector(&mut rng, 3)).unwrap();
        let turned = Beamformer::new(u.as_vector() * Complex::from_polar(1.0, phi)).unwrap();
        let stretched = Beamformer::normalized(u.as_vector() * Complex::from_polar(scale, phi)).unwrap();
        let a = sinr(&u, &theta, &ch, &nm, &p).unwrap();
        let b = sinr(&turned, &theta, &ch, &nm, &p).unwrap();
        let c = sinr(&stretched, &theta, &ch, &nm, &p).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a.max(1e-300));
        prop_assert!((a - c).abs() <= 1e-10 * a.max(1e-300));
    }

    #[test]
    fn sinr_falls_as_noise_rises(seed in any::<u64>(), thermal in 1e-6..1e-2f64, factor in 1.0..100.0f64, z in zeta()) {
        let ch = random_channels(seed, 3, 4, 2);
        let p = params(2, z, true);
        let mut rng = stream(seed);
        let theta = RisConfig::random_phases(4, &mut rng);
        let u = Beamformer::normalized(complex_normal_vector(&mut rng, 3)).unwrap();
        let quiet = sinr(&u, &theta, &ch, &noise(thermal, 1e-4, 1e-5, z), &p).unwrap();
        let loud = sinr(&u, &theta, &ch, &noise(thermal * factor, 1e-4, 1e-5, z), &p).unwrap();
        let louder_molecular = sinr(&u, &theta, &ch, &noise(thermal, 1e-4 * factor, 1e-5 * factor, z), &p).unwrap();
        prop_assert!(loud <= quiet * (1.0 + 1e-12));
        prop_assert!(louder_molecular <= quiet * (1.0 + 1e-12));
    }

    #[test]
    fn effective_noise_matches_zeta(thermal in 1e-9..1.0f64, m1 in 0.0..1.0f64, m2 in 0.0..1.0f64, power in 0.0..300.0f64) {
        prop_assert_eq!(noise(thermal, m1, m2, ReRadiation::Scattering).effective(power), thermal);
        let with = noise(thermal, m1, m2, ReRadiation::Noise).effective(power);
        prop_assert!((with - (thermal + m1 + m2 * power)).abs() <= 1e-12 * with);
    }

    #[test]
    fn relaxed_ratio_equals_sinr_on_rank_one(seed in any::<u64>(), z in zeta()) {
        let ch = random_channels(seed, 3, 5, 3);
        let p = params(3, z, true);
        let nm = noise(0.5, 0.2, 0.03, z);
        let mut rng = stream(seed);
        let theta = RisConfig::random_phases(5, &mut rng);
        let u = optimal_beamformer(&theta, &ch, &nm, &p).unwrap();
        let obj = RisObjective::new(&u, &ch, &nm, &p).unwrap();
        let (l0, m, alpha) = obj.relaxation();
        let relaxed = relaxed_ratio(&outer_self(theta.as_vector()), &l0, &m, alpha);
        let direct = sinr(&u, &theta, &ch, &nm, &p).unwrap();
        prop_assert!((relaxed - direct).abs() <= 1e-9 * direct.max(1e-300));
    }

    #[test]
    fn phase_projection_is_unit_modulus(seed in any::<u64>(), n in 1usize..12) {
        let mut rng = stream(seed);
        let v: CVector<f64> = complex_normal_vector(&mut rng, n);
        let theta = phase_project(&v);
        let all = theta.as_vector();
        prop_assert!(all.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        prop_assert_eq!(all[n - 1], Complex::new(1.0, 0.0));
        // Only a common phase is removed, so relative phases survive.
        for l in 0..n {
            let want = v[l] / v[n - 1];
            prop_assert!((all[l] - want / want.norm()).norm() < 1e-9);
        }
    }

    #[test]
    fn zeta_one_channels_are_line_of_sight(seed in any::<u64>(), f in 150e9..400e9f64) {
        let p = placement(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), vec![Point2::new(0.5, 0.9), Point2::new(3.0, 4.0)]).unwrap();
        let g = resolve_geometry(&p).unwrap();
        let model = AbsorptionModel::<f64>::sample();
        let mut sp = params(2, ReRadiation::Noise, true);
        sp.carrier_frequency = f;
        let ch = build_channel_set(&g, &sp, &model, &mut stream(seed)).unwrap();
        let expect = |d: f64| model.transmittance(f, d).unwrap().sqrt() * free_space_amplitude(f, d);
        let sr = expect(g.ris_rx_distance);
        prop_assert!(ch.h_sr.iter().all(|z| (z.norm() - sr).abs() <= 1e-12 * sr));
        for (i, link) in g.tx.iter().enumerate() {
            let rt = expect(link.rx_distance);
            prop_assert!(ch.h_rt[i].iter().all(|z| (z.norm() - rt).abs() <= 1e-12 * rt));
        }
    }

    #[test]
    fn molecular_noise_grows_with_absorption(k1 in 0.0..2.0f64, extra in 0.0..2.0f64, direct in any::<bool>()) {
        let p = placement(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), vec![Point2::new(0.5, 0.9), Point2::new(3.0, 4.0)]).unwrap();
        let g = resolve_geometry(&p).unwrap();
        let sp = params(2, ReRadiation::Noise, direct);
        let low = molecular_noise(&g, &sp, &AbsorptionModel::constant(k1, 100e9, 450e9).unwrap()).unwrap();
        let high = molecular_noise(&g, &sp, &AbsorptionModel::constant(k1 + extra, 100e9, 450e9).unwrap()).unwrap();
        prop_assert!(high.direct_molecular >= low.direct_molecular);
        prop_assert!(high.reflected_molecular >= low.reflected_molecular);
        if !direct {
            prop_assert_eq!(high.direct_molecular, 0.0);
        }
    }
}

fn sdp_instance(seed: u64, n: usize) -> (CMatrix<f64>, CMatrix<f64>, f64) {
    let mut rng = stream(seed);
    let f0: CVector<f64> = complex_normal_vector(&mut rng, n);
    let f1: CVector<f64> = complex_normal_vector(&mut rng, n);
    let l0 = outer_self(&f0);
    let m = outer_self(&f1) * Complex::new(0.5, 0.0) + CMatrix::identity(n, n) * Complex::new(0.1, 0.0);
    (l0, m, 1.3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sdp_verdict_survives_rescaling(seed in any::<u64>(), n in 2usize..7, frac in 0.05..1.5f64, log_lambda in -8.0..8.0f64) {
        let (l0, m, alpha) = sdp_instance(seed, n);
        let bound = l0.trace().re * n as f64 / alpha;
        let t = frac * bound / n as f64;
        let opts = SdpOptions::default();
        let base = solve_feasibility(&FeasibilityProblem::new(l0.clone(), m.clone(), alpha, t).unwrap(), &opts);
        let lambda = 10f64.powf(log_lambda);
        let c = Complex::new(lambda, 0.0);
        let scaled = solve_feasibility(&FeasibilityProblem::new(l0 * c, m * c, alpha * lambda, t).unwrap(), &opts);
        if let (Ok(a), Ok(b)) = (base, scaled) {
            prop_assert_eq!(a.is_feasible(), b.is_feasible());
        }
    }

    #[test]
    fn sdp_feasibility_is_monotone_in_t(seed in any::<u64>(), n in 2usize..7, a in 0.01..1.0f64, b in 0.01..1.0f64) {
        let (l0, m, alpha) = sdp_instance(seed, n);
        let bound = l0.trace().re * n as f64 / alpha;
        let (lo, hi) = if a < b { (a * bound, b * bound) } else { (b * bound, a * bound) };
        let opts = SdpOptions::default();
        let at = |t| solve_feasibility(&FeasibilityProblem::new(l0.clone(), m.clone(), alpha, t).unwrap(), &opts);
        if let (Ok(low), Ok(high)) = (at(lo), at(hi)) {
            prop_assert!(!high.is_feasible() || low.is_feasible());
            if let Some(psi) = high.psi() {
                prop_assert!(relaxed_ratio(psi, &l0, &m, alpha) >= hi * (1.0 - 1e-6));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn bcd_sinr_never_decreases(seed in any::<u64>(), z in zeta()) {
        let ch = random_channels(seed, 3, 4, 2);
        let p = params(2, z, true);
        let nm = noise(0.3, 0.1, 0.02, z);
        let cfg = OptimizerConfig { n_randomizations: 200, ..OptimizerConfig::default() };
        let out = bcd_optimize(&ch, &nm, &p, &cfg, &mut stream(seed)).unwrap();
        let gammas: Vec<f64> = out.trace.gammas().collect();
        prop_assert!(gammas.windows(2).all(|w| w[1] >= w[0]));
        for it in &out.trace.iterations {
            prop_assert!(it.gamma <= it.t_star * (1.0 + 1e-6));
        }
        let all_ones = RisConfig::all_ones(4);
        let u = optimal_beamformer(&all_ones, &ch, &nm, &p).unwrap();
        prop_assert!(out.gamma >= sinr(&u, &all_ones, &ch, &nm, &p).unwrap() * (1.0 - 1e-12));
    }
}
