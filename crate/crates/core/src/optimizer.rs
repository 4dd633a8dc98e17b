//! Joint receive-beamformer / RIS optimization by block coordinate descent.
//!
//! For a fixed RIS configuration the best combiner is the MVDR-type solution
//! `u = A^{-1} G0 / ||A^{-1} G0||`. For a fixed combiner the RIS problem is a
//! fractional quadratic program in `Theta0`; its rank relaxation is solved by
//! bisection on the SINR level `t` with [`solve_feasibility`] as the oracle,
//! and unit-modulus candidates are drawn from the relaxed solution by
//! Gaussian randomization.

use std::io::Write;

use log::{debug, warn};
use nalgebra::ComplexField as _;
use nalgebra::Complex;
use rand::Rng;
use thiserror::Error;

use crate::channel::ChannelSet;
use crate::linalg::{CMatrix, CVector, inner, norm_sq, outer_self, psd_factor, real_trace_product, solve_hpd};
use crate::rng::complex_normal_vector;
use crate::scenario::SystemParams;
use crate::sdp::{FeasibilityProblem, FeasibilityStatus, Residuals, SdpError, SdpOptions, solve_feasibility};
use crate::signal_model::{Beamformer, NoiseModel, RisConfig, sinr};
use crate::{Error, Real};

/// Tuning of the BCD loop, the bisection and the randomization.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    /// Relative SINR change below which BCD stops.
    pub epsilon: f64,
    /// Initial upper end of the bisection bracket.
    pub bisection_upper: f64,
    /// Relative bracket width at which bisection stops.
    pub bisection_tol: f64,
    /// Gaussian randomization draws per RIS step.
    pub n_randomizations: usize,
    pub max_bcd_iterations: usize,
    pub max_bisection_steps: usize,
    pub rng_seed: u64,
    pub sdp: SdpOptions<f64>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-5,
            bisection_upper: 1e10,
            bisection_tol: 1e-5,
            n_randomizations: 5000,
            max_bcd_iterations: 50,
            max_bisection_steps: 200,
            rng_seed: 1,
            sdp: SdpOptions::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<(), Error> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("epsilon", self.epsilon)?;
        positive("bisection_upper", self.bisection_upper)?;
        positive("bisection_tol", self.bisection_tol)?;
        positive("sdp tolerance", self.sdp.tolerance)?;
        if !(self.sdp.step_fraction > 0.0 && self.sdp.step_fraction < 1.0) {
            return Err(Error::InvalidParameter("step fraction must lie in (0, 1)".into()));
        }
        for (name, v) in [
            ("n_randomizations", self.n_randomizations),
            ("max_bcd_iterations", self.max_bcd_iterations),
            ("max_bisection_steps", self.max_bisection_steps),
            ("sdp iterations", self.sdp.max_iterations),
        ] {
            if v == 0 {
                return Err(Error::InvalidParameter(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    fn sdp_options<T: Real>(&self) -> SdpOptions<T> {
        SdpOptions {
            tolerance: T::lit(self.sdp.tolerance),
            max_iterations: self.sdp.max_iterations,
            step_fraction: T::lit(self.sdp.step_fraction),
        }
    }
}

/// A RIS configuration and the SINR it achieved.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate<T: Real> {
    pub theta0: RisConfig<T>,
    pub gamma: T,
}

#[derive(Debug, Error)]
pub enum OptimizeError<T: Real> {
    #[error(transparent)]
    Model(#[from] Error),
    #[error("feasibility solve at t = {t} failed: {source}")]
    Solver {
        t: T,
        #[source]
        source: SdpError<T>,
        /// Best configuration found before the failure.
        best: Option<Box<Candidate<T>>>,
    },
}

/// Combiner maximizing the SINR for a fixed `theta0`.
pub fn optimal_beamformer<T: Real>(
    theta0: &RisConfig<T>,
    channels: &ChannelSet<T>,
    noise: &NoiseModel<T>,
    params: &SystemParams<T>,
) -> Result<Beamformer<T>, Error> {
    if theta0.n_elements() != channels.n_ris() || channels.n_transmitters() != params.tx_powers.len() {
        return Err(Error::Dimension("RIS configuration, channels and powers disagree".into()));
    }
    let sigma2 = noise.effective(theta0.power());
    if !(sigma2 > T::zero()) {
        return Err(Error::InvalidParameter(format!("effective noise power must be positive, got {sigma2}")));
    }
    let n_rx = channels.n_rx();
    let g: Vec<CVector<T>> = channels.stacked.iter().map(|h| h * theta0.as_vector()).collect();
    let mut a = CMatrix::<T>::identity(n_rx, n_rx);
    for (gi, &p) in g.iter().zip(&params.tx_powers).skip(1) {
        a += outer_self(gi) * Complex::new(p / sigma2, T::zero());
    }
    let x = solve_hpd(&a, &g[0]).expect("identity-regularized matrix is positive definite");
    Ok(Beamformer::normalized(x).unwrap_or_else(|| {
        warn!("no signal reaches the receiver; using the first antenna");
        Beamformer::first_antenna(n_rx)
    }))
}

/// SINR of any `theta0` for a fixed unit-norm combiner, through the
/// effective channels `F_i = H_i^H u`.
#[derive(Clone, Debug)]
pub struct RisObjective<T: Real> {
    f: Vec<CVector<T>>,
    powers: Vec<T>,
    noise: NoiseModel<T>,
}

impl<T: Real> RisObjective<T> {
    pub fn new(u: &Beamformer<T>, channels: &ChannelSet<T>, noise: &NoiseModel<T>, params: &SystemParams<T>) -> Result<Self, Error> {
        if u.len() != channels.n_rx() || channels.n_transmitters() != params.tx_powers.len() {
            return Err(Error::Dimension("combiner, channels and powers disagree".into()));
        }
        let f = channels.stacked.iter().map(|h| h.adjoint() * u.as_vector()).collect();
        Ok(Self { f, powers: params.tx_powers.clone(), noise: *noise })
    }

    pub fn dim(&self) -> usize {
        self.f[0].len()
    }

    pub fn gamma(&self, theta0: &CVector<T>) -> T {
        let gain = |i: usize| self.powers[i] * inner(&self.f[i], theta0).modulus_squared();
        let signal = gain(0);
        let interference = (1..self.f.len()).fold(T::zero(), |s, i| s + gain(i));
        let denominator = interference + self.noise.effective(norm_sq(theta0));
        if denominator > T::zero() {
            signal / denominator
        } else if signal > T::zero() {
            T::infinity()
        } else {
            T::zero()
        }
    }

    /// `L_i = (P_i / sigma_w^2) F_i F_i^H`.
    fn l(&self, i: usize) -> CMatrix<T> {
        outer_self(&self.f[i]) * Complex::new(self.powers[i] / self.noise.thermal, T::zero())
    }

    /// `(L0, M, alpha)` of the relaxed problem.
    pub fn relaxation(&self) -> (CMatrix<T>, CMatrix<T>, T) {
        let n = self.dim();
        let zeta = self.noise.re_radiation.zeta_as::<T>();
        let w = self.noise.thermal;
        let mut m = CMatrix::<T>::identity(n, n) * Complex::new(zeta * self.noise.reflected_molecular / w, T::zero());
        for i in 1..self.f.len() {
            m += self.l(i);
        }
        let alpha = T::one() + zeta * self.noise.direct_molecular / w;
        (self.l(0), m, alpha)
    }
}

/// `Tr(Psi L0) / (Tr(Psi M) + alpha)`; equals the SINR when `Psi = theta theta^H`.
pub fn relaxed_ratio<T: Real>(psi: &CMatrix<T>, l0: &CMatrix<T>, m: &CMatrix<T>, alpha: T) -> T {
    let num = real_trace_product(psi, l0);
    let den = real_trace_product(psi, m) + alpha;
    if num > T::zero() { num / den } else { T::zero() }
}

/// Projects a direction onto unit-modulus configurations: `theta_l = v_l/|v_l|`
/// (zero maps to 1), rotated so the last entry is exactly 1.
pub fn phase_project<T: Real>(v: &CVector<T>) -> RisConfig<T> {
    let one = Complex::new(T::one(), T::zero());
    let unit = |z: Complex<T>| {
        let r = z.modulus();
        if r > T::zero() { z / r } else { one }
    };
    let n = v.len();
    let rotation = unit(v[n - 1]).conj();
    let mut theta = CVector::from_fn(n, |l, _| unit(unit(v[l]) * rotation));
    theta[n - 1] = one;
    RisConfig::new(theta).expect("unit-modulus projection is a valid configuration")
}

/// Draws unit-modulus candidates from a relaxed solution `Psi`.
#[derive(Clone, Debug)]
pub struct Randomizer<T: Real> {
    factor: CMatrix<T>,
}

impl<T: Real> Randomizer<T> {
    pub fn new(psi: &CMatrix<T>) -> Self {
        Self { factor: psd_factor(psi, T::lit(1e-12).max(T::eps())) }
    }

    pub fn rank(&self) -> usize {
        self.factor.ncols()
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> RisConfig<T> {
        let g = complex_normal_vector::<T, R>(rng, self.factor.ncols());
        phase_project(&(&self.factor * g))
    }
}

/// One candidate `theta ~ phase(Psi^{1/2} g)`.
pub fn gaussian_randomize<T: Real, R: Rng + ?Sized>(psi: &CMatrix<T>, rng: &mut R) -> RisConfig<T> {
    Randomizer::new(psi).draw(rng)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Feasible,
    Infeasible,
    /// The solver stopped with the slack bracket straddling the threshold.
    Undecided,
}

/// One feasibility call made by the bisection.
#[derive(Clone, Debug, PartialEq)]
pub struct BisectionProbe<T: Real> {
    pub t: T,
    pub verdict: Verdict,
    pub residuals: Option<Residuals<T>>,
    /// Constraint scale the trace residual is measured against.
    pub scale: T,
    /// Frobenius norm of the returned `Psi`, zero when infeasible.
    pub psi_norm: T,
}

/// Result of one RIS step.
#[derive(Clone, Debug, PartialEq)]
pub struct RisStep<T: Real> {
    pub theta0: RisConfig<T>,
    pub gamma: T,
    /// Certified upper bound on the relaxation optimum, hence on any
    /// achievable SINR for this combiner.
    pub t_star: T,
    /// Certified lower bound from the relaxation.
    pub t_lower: T,
    pub probes: Vec<BisectionProbe<T>>,
}

/// RIS configuration step for a fixed combiner.
pub fn optimize_ris<T: Real, R: Rng + ?Sized>(
    u: &Beamformer<T>,
    channels: &ChannelSet<T>,
    noise: &NoiseModel<T>,
    params: &SystemParams<T>,
    config: &OptimizerConfig,
    rng: &mut R,
) -> Result<RisStep<T>, OptimizeError<T>> {
    let objective = RisObjective::new(u, channels, noise, params)?;
    let n = objective.dim();
    let (l0, m, alpha) = objective.relaxation();
    let options = config.sdp_options::<T>();
    let base = FeasibilityProblem::new(l0.clone(), m.clone(), alpha, T::zero()).map_err(|source| OptimizeError::Solver {
        t: T::zero(),
        source,
        best: None,
    })?;

    // Phase-aligning with F0 gives a feasible rank-one point and so a lower bound.
    let matched = phase_project(&objective.f[0]);
    let mut psi_lo = outer_self(matched.as_vector());
    let mut lo = relaxed_ratio(&psi_lo, &l0, &m, alpha);

    // max Tr(Psi L0) over the box is (P0/sigma_w^2) ||F0||_1^2 <= Tr(L0) (N+1).
    let l1 = objective.f[0].iter().fold(T::zero(), |s, z| s + z.modulus());
    let bound = (objective.powers[0] / noise.thermal * l1 * l1)
        .min(real_trace_product(&CMatrix::identity(n, n), &l0) * T::lit(n as f64))
        / alpha;
    let mut hi = T::lit(config.bisection_upper).min(bound);
    if lo > hi {
        warn!("SINR lower bound {lo} exceeds the bisection ceiling; widening to {bound}");
        hi = bound.max(lo);
    }

    let eps1 = T::lit(config.bisection_tol);
    let mut probes = Vec::new();
    let extract = |psi: &CMatrix<T>, rng: &mut R| -> Candidate<T> {
        let randomizer = Randomizer::new(psi);
        let mut best = Candidate { gamma: objective.gamma(matched.as_vector()), theta0: matched.clone() };
        for _ in 0..config.n_randomizations {
            let theta0 = randomizer.draw(rng);
            let gamma = objective.gamma(theta0.as_vector());
            if gamma > best.gamma {
                best = Candidate { theta0, gamma };
            }
        }
        best
    };

    while hi > T::zero() && hi - lo > eps1 * (hi + lo) / T::lit(2.0) && probes.len() < config.max_bisection_steps {
        let t = if lo > T::zero() { (lo * hi).sqrt() } else { hi / T::lit(2.0) };
        let problem = base.with_t(t).expect("bracket points are finite and nonnegative");
        let scale = problem.scale();
        let result = match solve_feasibility(&problem, &options) {
            Ok(r) => r,
            Err(SdpError::NoConvergence { best_psi, upper_bound, .. }) => {
                // The dual point at t stays feasible for every larger t, so
                // its value still caps t*; the primal iterate still gives a ratio.
                probes.push(BisectionProbe { t, verdict: Verdict::Undecided, residuals: None, scale, psi_norm: T::zero() });
                let (old_lo, old_hi) = (lo, hi);
                hi = hi.min((upper_bound / alpha).max(t));
                let r = relaxed_ratio(&best_psi, &l0, &m, alpha).min(hi);
                if r > lo {
                    lo = r;
                    psi_lo = best_psi;
                }
                if !(lo > old_lo || hi < old_hi) {
                    warn!("bisection stalled at relative width {}", (hi - lo) / hi);
                    break;
                }
                continue;
            }
            Err(source) => {
                let best = extract(&psi_lo, rng);
                return Err(OptimizeError::Solver { t, source, best: Some(Box::new(best)) });
            }
        };
        match &result.status {
            FeasibilityStatus::Feasible(psi) => {
                probes.push(BisectionProbe {
                    t,
                    verdict: Verdict::Feasible,
                    residuals: result.residuals,
                    scale,
                    psi_norm: psi.norm(),
                });
                // The certificate's own ratio can sit well above t.
                let r = relaxed_ratio(psi, &l0, &m, alpha);
                let next = t.max(r).min(hi);
                if next > lo {
                    lo = next;
                    psi_lo = psi.clone();
                }
            }
            FeasibilityStatus::Infeasible => {
                probes.push(BisectionProbe { t, verdict: Verdict::Infeasible, residuals: None, scale, psi_norm: T::zero() });
                hi = t;
            }
        }
    }
    debug!("bisection: {} probes, bracket [{lo}, {hi}]", probes.len());

    let best = extract(&psi_lo, rng);
    Ok(RisStep { theta0: best.theta0, gamma: best.gamma, t_star: hi.max(lo), t_lower: lo, probes })
}

/// One BCD iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct BcdIteration<T: Real> {
    pub iteration: usize,
    /// SINR after the iteration; the sequence is non-decreasing.
    pub gamma: T,
    pub theta0: RisConfig<T>,
    pub u: Beamformer<T>,
    pub t_star: T,
    /// SINR after the beamformer update alone.
    pub beamformer_gamma: T,
    /// SINR of the RIS step's candidate, kept only if it beats `beamformer_gamma`.
    pub candidate_gamma: T,
    pub delta: T,
    pub probes: Vec<BisectionProbe<T>>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BcdTrace<T: Real> {
    pub iterations: Vec<BcdIteration<T>>,
    pub converged: bool,
}

impl<T: Real> BcdTrace<T> {
    pub fn len(&self) -> usize {
        self.iterations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterations.is_empty()
    }

    pub fn gammas(&self) -> impl Iterator<Item = T> + '_ {
        self.iterations.iter().map(|it| it.gamma)
    }

    pub fn final_delta(&self) -> Option<T> {
        self.iterations.last().map(|it| it.delta)
    }

    /// Rows `iteration,gamma,t_star,delta`.
    pub fn write_csv<W: Write>(&self, mut out: W, with_header: bool) -> std::io::Result<()> {
        if with_header {
            writeln!(out, "iteration,gamma,t_star,delta")?;
        }
        for it in &self.iterations {
            writeln!(out, "{},{:e},{:e},{:e}", it.iteration, it.gamma.as_f64(), it.t_star.as_f64(), it.delta.as_f64())?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BcdOutcome<T: Real> {
    pub theta0: RisConfig<T>,
    pub u: Beamformer<T>,
    pub gamma: T,
    pub trace: BcdTrace<T>,
}

fn relative_change<T: Real>(gamma: T, previous: T) -> T {
    if previous > T::zero() {
        (gamma - previous).abs() / previous
    } else if gamma > T::zero() {
        T::infinity()
    } else {
        T::zero()
    }
}

/// BCD from the all-ones configuration.
pub fn bcd_optimize<T: Real, R: Rng + ?Sized>(
    channels: &ChannelSet<T>,
    noise: &NoiseModel<T>,
    params: &SystemParams<T>,
    config: &OptimizerConfig,
    rng: &mut R,
) -> Result<BcdOutcome<T>, OptimizeError<T>> {
    bcd_optimize_from(channels, noise, params, config, &[], rng)
}

/// BCD whose starting point is the best of all-ones and `warm_starts`, each
/// judged with its own optimal combiner.
pub fn bcd_optimize_from<T: Real, R: Rng + ?Sized>(
    channels: &ChannelSet<T>,
    noise: &NoiseModel<T>,
    params: &SystemParams<T>,
    config: &OptimizerConfig,
    warm_starts: &[RisConfig<T>],
    rng: &mut R,
) -> Result<BcdOutcome<T>, OptimizeError<T>> {
    config.validate()?;
    let mut theta0 = RisConfig::all_ones(channels.n_ris());
    let mut u = optimal_beamformer(&theta0, channels, noise, params)?;
    let mut gamma_start = sinr(&u, &theta0, channels, noise, params)?;
    for warm in warm_starts {
        let wu = optimal_beamformer(warm, channels, noise, params)?;
        let wg = sinr(&wu, warm, channels, noise, params)?;
        if wg > gamma_start {
            (theta0, u, gamma_start) = (warm.clone(), wu, wg);
        }
    }

    let mut trace = BcdTrace::default();
    let mut gamma = T::zero();
    let eps = T::lit(config.epsilon);
    for iteration in 1..=config.max_bcd_iterations {
        let u_new = optimal_beamformer(&theta0, channels, noise, params)?;
        let beamformer_gamma = sinr(&u_new, &theta0, channels, noise, params)?;
        // Rounding can make the fresh combiner a hair worse; keep the old one then.
        let previous = if iteration == 1 { gamma_start } else { gamma };
        if beamformer_gamma >= previous {
            u = u_new;
        }
        let current = beamformer_gamma.max(previous);

        let step = optimize_ris(&u, channels, noise, params, config, rng).map_err(|e| match e {
            OptimizeError::Solver { t, source, best } => {
                let keep = Candidate { theta0: theta0.clone(), gamma: current };
                let best = match best {
                    Some(b) if b.gamma > current => b,
                    _ => Box::new(keep),
                };
                OptimizeError::Solver { t, source, best: Some(best) }
            }
            other => other,
        })?;
        let new_gamma = if step.gamma > current {
            theta0 = step.theta0.clone();
            step.gamma
        } else {
            current
        };
        let delta = relative_change(new_gamma, gamma);
        debug!("bcd iteration {iteration}: gamma {new_gamma}, t* {}, delta {delta}", step.t_star);
        trace.iterations.push(BcdIteration {
            iteration,
            gamma: new_gamma,
            theta0: theta0.clone(),
            u: u.clone(),
            t_star: step.t_star,
            beamformer_gamma,
            candidate_gamma: step.gamma,
            delta,
            probes: step.probes,
        });
        gamma = new_gamma;
        if iteration >= 2 && delta <= eps {
            trace.converged = true;
            break;
        }
    }
    if !trace.converged {
        warn!("BCD stopped at the iteration cap without converging");
    }
    Ok(BcdOutcome { theta0, u, gamma, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{complex_normal_matrix, stream};
    use crate::scenario::ReRadiation;

    fn params(n_tx: usize) -> SystemParams<f64> {
        SystemParams {
            carrier_frequency: 220e9,
            bandwidth: 1.0,
            tx_powers: vec![1.0; n_tx],
            thermal_noise_density: 1.0,
            re_radiation: ReRadiation::Scattering,
            temperature: 300.15,
            pressure: 1.0,
            relative_humidity: 0.5,
            direct_link_present: true,
            spacing_ratio: 0.5,
        }
    }

    fn random_channels(n_rx: usize, n_ris: usize, n_tx: usize, seed: u64) -> ChannelSet<f64> {
        let mut rng = stream(seed);
        let h_sr = complex_normal_matrix(&mut rng, n_rx, n_ris);
        let h_rt = (0..n_tx).map(|_| complex_normal_matrix(&mut rng, n_rx, 1).column(0).into_owned()).collect();
        let h_st = (0..n_tx).map(|_| complex_normal_matrix(&mut rng, n_ris, 1).column(0).into_owned()).collect();
        ChannelSet::from_links(h_rt, h_st, h_sr).unwrap()
    }

    fn fast_config() -> OptimizerConfig {
        OptimizerConfig { n_randomizations: 200, ..OptimizerConfig::default() }
    }

    #[test]
    fn defaults_and_validation() {
        let d = OptimizerConfig::default();
        assert_eq!((d.epsilon, d.bisection_upper, d.bisection_tol, d.n_randomizations), (1e-5, 1e10, 1e-5, 5000));
        assert!(d.validate().is_ok());
        assert!(OptimizerConfig { epsilon: 0.0, ..d.clone() }.validate().is_err());
        assert!(OptimizerConfig { n_randomizations: 0, ..d }.validate().is_err());
    }

    #[test]
    fn matched_filter_without_interferers() {
        let ch = random_channels(3, 2, 1, 4);
        let theta = RisConfig::all_ones(2);
        let u = optimal_beamformer(&theta, &ch, &NoiseModel::thermal_only(1.0), &params(1)).unwrap();
        let g0 = &ch.stacked[0] * theta.as_vector();
        let expected = g0.normalize();
        assert!((u.as_vector() - expected).norm() < 1e-12);
    }

    #[test]
    fn parallel_interferer_keeps_direction() {
        let ch = random_channels(3, 2, 1, 5);
        let mut stacked = ch.stacked.clone();
        stacked.push(&stacked[0] * Complex::new(0.3, -0.7));
        let two = ChannelSet { stacked, ..ch };
        let theta = RisConfig::all_ones(2);
        let u = optimal_beamformer(&theta, &two, &NoiseModel::thermal_only(1.0), &params(2)).unwrap();
        let g0 = &two.stacked[0] * theta.as_vector();
        assert!((inner(u.as_vector(), &g0).modulus() - g0.norm()).abs() < 1e-12);
    }

    #[test]
    fn zero_signal_falls_back_to_first_antenna() {
        let mut ch = random_channels(2, 2, 1, 6);
        ch.stacked[0].fill(Complex::new(0.0, 0.0));
        let u = optimal_beamformer(&RisConfig::all_ones(2), &ch, &NoiseModel::thermal_only(1.0), &params(1)).unwrap();
        assert_eq!(u, Beamformer::first_antenna(2));
    }

    #[test]
    fn randomization_of_all_ones_is_all_ones() {
        let psi = CMatrix::from_element(5, 5, Complex::new(1.0, 0.0));
        let r = Randomizer::new(&psi);
        assert_eq!(r.rank(), 1);
        let mut rng = stream(1);
        for _ in 0..20 {
            let theta = r.draw(&mut rng);
            assert!(theta.as_vector().iter().all(|z| (z - Complex::new(1.0, 0.0)).norm() < 1e-12));
            assert_eq!(theta.as_vector()[4], Complex::new(1.0, 0.0));
        }
    }

    #[test]
    fn randomization_of_identity_is_unit_modulus() {
        let mut rng = stream(2);
        let theta = gaussian_randomize(&CMatrix::<f64>::identity(6, 6), &mut rng);
        assert!(theta.as_vector().iter().all(|z| (z.norm() - 1.0).abs() < 1e-14));
        assert_eq!(theta.as_vector()[5], Complex::new(1.0, 0.0));
        let zero = phase_project(&CVector::<f64>::zeros(3));
        assert_eq!(zero, RisConfig::all_ones(2));
    }

    #[test]
    fn rank_one_unit_modulus_psi_is_recovered() {
        let mut rng = stream(9);
        let v = complex_normal_vector::<f64, _>(&mut rng, 4).map(|z| z / z.norm());
        let target = phase_project(&v);
        let psi = outer_self(target.as_vector());
        let theta = gaussian_randomize(&psi, &mut rng);
        assert!((theta.as_vector() - target.as_vector()).norm() < 1e-10);
    }

    #[test]
    fn ris_step_respects_relaxation_bound() {
        for seed in 0..5 {
            let ch = random_channels(3, 4, 3, seed);
            let p = params(3);
            let noise = NoiseModel::thermal_only(1.0);
            let u = optimal_beamformer(&RisConfig::all_ones(4), &ch, &noise, &p).unwrap();
            let step = optimize_ris(&u, &ch, &noise, &p, &fast_config(), &mut stream(seed)).unwrap();
            assert!(step.gamma <= step.t_star * (1.0 + 1e-6), "{} > {}", step.gamma, step.t_star);
            assert!(step.t_lower <= step.t_star);
            assert!((step.t_star - step.t_lower) <= 1e-5 * step.t_star);
        }
    }

    #[test]
    fn bcd_is_monotone_and_deterministic() {
        let ch = random_channels(4, 6, 4, 11);
        let p = params(4);
        let noise = NoiseModel::thermal_only(1.0);
        let a = bcd_optimize(&ch, &noise, &p, &fast_config(), &mut stream(3)).unwrap();
        let b = bcd_optimize(&ch, &noise, &p, &fast_config(), &mut stream(3)).unwrap();
        assert_eq!(a, b);
        let g: Vec<f64> = a.trace.gammas().collect();
        assert!(g.windows(2).all(|w| w[1] >= w[0]));
        assert!(a.trace.converged);
        assert!(a.trace.len() >= 2);
    }

    #[test]
    fn direct_only_channel_converges_to_matched_filter() {
        let mut ch = random_channels(3, 4, 2, 12);
        ch.h_sr.fill(Complex::new(0.0, 0.0));
        for h in ch.h_rt.iter_mut().skip(1) {
            h.fill(Complex::new(0.0, 0.0));
        }
        let ch = ChannelSet::from_links(ch.h_rt, ch.h_st, ch.h_sr).unwrap();
        let p = params(2);
        let out = bcd_optimize(&ch, &NoiseModel::thermal_only(1.0), &p, &fast_config(), &mut stream(0)).unwrap();
        let h0 = &ch.h_rt[0];
        assert!((inner(out.u.as_vector(), h0).modulus() - h0.norm()).abs() < 1e-12);
        assert!((out.gamma - h0.norm_squared()).abs() < 1e-12 * out.gamma);
        assert_eq!(out.trace.iterations[0].gamma, out.gamma);
        assert!(out.trace.converged);
    }

    #[test]
    fn trace_csv_rows() {
        let ch = random_channels(2, 2, 1, 13);
        let out = bcd_optimize(&ch, &NoiseModel::thermal_only(1.0), &params(1), &fast_config(), &mut stream(0)).unwrap();
        let mut buf = Vec::new();
        out.trace.write_csv(&mut buf, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), out.trace.len() + 1);
        assert!(text.starts_with("iteration,gamma,t_star,delta\n1,"));
    }
}
