//! Feasibility test for the rank-relaxed RIS subproblem:
//! find Hermitian `Psi >= 0` with `Psi_ll <= 1` and
//! `Tr(Psi L0) >= t Tr(Psi M) + t alpha`.
//!
//! The verdict comes from maximizing the slack `Tr(Psi (L0 - t M))` over
//! `{Psi >= 0, diag(Psi) <= 1}`, whose Lagrange dual is
//! `min sum(y) s.t. Z = Diag(y) - C >= 0, y >= 0` with `C = L0 - t M`.
//! Both are solved together by a primal-dual log-barrier path-following
//! method: Newton steps on the perturbed optimality conditions
//! `Psi Z = mu I`, `y (1 - diag Psi) = mu` (HKM direction), step lengths kept
//! a fixed fraction inside the cones, and `mu` picked each iteration by
//! Mehrotra's predictor-corrector rule.
//!
//! Every iterate carries two certificates: `sum(y)` bounds the maximal slack
//! from above (so `sum(y) < t alpha` proves infeasibility), and the primal
//! iterate rescaled to unit largest diagonal is a feasible `Psi` whose slack
//! bounds it from below.

use log::trace;
use nalgebra::ComplexField as _;
use nalgebra::{Cholesky, Complex, DMatrix, DVector, Dyn};
use thiserror::Error;

use crate::linalg::{CMatrix, frobenius, hermitian_deviation, hermitize, max_modulus, min_eigenvalue, real_trace_product};
use crate::Real;

#[derive(Debug, Error)]
pub enum SdpError<T: Real> {
    #[error("{which} is not Hermitian (deviation {deviation})")]
    NotHermitian { which: &'static str, deviation: T },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no verdict after the iteration cap (slack bracket [{lower_bound}, {upper_bound}])")]
    NoConvergence {
        /// Best primal iterate found, feasible for the cone and box constraints.
        best_psi: CMatrix<T>,
        lower_bound: T,
        upper_bound: T,
    },
}

/// One instance of the feasibility problem.
#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityProblem<T: Real> {
    signal: CMatrix<T>,
    interference: CMatrix<T>,
    alpha: T,
    t: T,
}

impl<T: Real> FeasibilityProblem<T> {
    /// `signal` is `L0`, `interference` is `M`.
    pub fn new(signal: CMatrix<T>, interference: CMatrix<T>, alpha: T, t: T) -> Result<Self, SdpError<T>> {
        let n = signal.nrows();
        if signal.ncols() != n || interference.shape() != (n, n) {
            return Err(SdpError::Dimension(format!(
                "L0 is {:?}, M is {:?}",
                signal.shape(),
                interference.shape()
            )));
        }
        let herm_tol = T::lit(1e-10).max(T::lit(100.0) * T::eps());
        for (which, m) in [("L0", &signal), ("M", &interference)] {
            let deviation = hermitian_deviation(m);
            if deviation > herm_tol * T::one().max(max_modulus(m)) {
                return Err(SdpError::NotHermitian { which, deviation });
            }
        }
        if !(alpha > T::zero() && alpha.is_finite()) {
            return Err(SdpError::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        if !(t >= T::zero() && t.is_finite()) {
            return Err(SdpError::InvalidParameter(format!("t must be finite and >= 0, got {t}")));
        }
        Ok(Self { signal: hermitize(&signal), interference: hermitize(&interference), alpha, t })
    }

    pub fn dim(&self) -> usize {
        self.signal.nrows()
    }

    pub fn signal(&self) -> &CMatrix<T> {
        &self.signal
    }

    pub fn interference(&self) -> &CMatrix<T> {
        &self.interference
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn t(&self) -> T {
        self.t
    }

    /// Same matrices at another threshold.
    pub fn with_t(&self, t: T) -> Result<Self, SdpError<T>> {
        if !(t >= T::zero() && t.is_finite()) {
            return Err(SdpError::InvalidParameter(format!("t must be finite and >= 0, got {t}")));
        }
        Ok(Self { t, ..self.clone() })
    }

    /// `Tr(Psi L0) - t Tr(Psi M)`.
    pub fn slack(&self, psi: &CMatrix<T>) -> T {
        real_trace_product(psi, &self.signal) - self.t * real_trace_product(psi, &self.interference)
    }

    /// `max(||L0||, t ||M||, t alpha)` (Frobenius norms); the unit the
    /// constraint tolerance is measured in.
    pub fn scale(&self) -> T {
        frobenius(&self.signal)
            .max(self.t * frobenius(&self.interference))
            .max(self.t * self.alpha)
    }

    /// Constraint violations of a candidate `Psi`.
    pub fn residuals(&self, psi: &CMatrix<T>) -> Residuals<T> {
        let psd = (-min_eigenvalue(psi)).max(T::zero());
        let diagonal = (0..psi.nrows())
            .map(|l| psi[(l, l)].re - T::one())
            .fold(T::zero(), |a, b| a.max(b));
        let trace = (self.t * self.alpha - self.slack(psi)).max(T::zero());
        Residuals { psd, diagonal, trace }
    }
}

/// Constraint violations: `max(0, -lambda_min)`, `max(0, max_l Psi_ll - 1)`
/// and `max(0, t alpha - slack)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residuals<T: Real> {
    pub psd: T,
    pub diagonal: T,
    pub trace: T,
}

impl<T: Real> Residuals<T> {
    /// Checks against `tol * ||Psi||`, `tol` and `tol * scale` respectively.
    pub fn within(&self, tol: T, psi_norm: T, scale: T) -> bool {
        self.psd <= tol * psi_norm.max(T::eps()) && self.diagonal <= tol && self.trace <= tol * scale
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FeasibilityStatus<T: Real> {
    Feasible(CMatrix<T>),
    Infeasible,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityResult<T: Real> {
    pub status: FeasibilityStatus<T>,
    /// Residuals of the returned `Psi`; `None` when infeasible.
    pub residuals: Option<Residuals<T>>,
    /// Certified lower bound on the maximal slack.
    pub lower_bound: T,
    /// Certified upper bound on the maximal slack.
    pub upper_bound: T,
    pub iterations: usize,
}

impl<T: Real> FeasibilityResult<T> {
    pub fn is_feasible(&self) -> bool {
        matches!(self.status, FeasibilityStatus::Feasible(_))
    }

    pub fn psi(&self) -> Option<&CMatrix<T>> {
        match &self.status {
            FeasibilityStatus::Feasible(psi) => Some(psi),
            FeasibilityStatus::Infeasible => None,
        }
    }
}

/// Interior-point settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdpOptions<T: Real> {
    /// Constraint tolerance relative to [`FeasibilityProblem::scale`].
    pub tolerance: T,
    pub max_iterations: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: T,
}

impl<T: Real> Default for SdpOptions<T> {
    fn default() -> Self {
        Self {
            tolerance: T::lit(1e-7).max(T::lit(1e3) * T::eps()),
            max_iterations: 50,
            step_fraction: T::lit(0.98),
        }
    }
}

/// Largest `a` with `A + a D >= 0`, given the Cholesky factor of `A`.
fn max_step<T: Real>(chol: &Cholesky<Complex<T>, Dyn>, d: &CMatrix<T>) -> T {
    let l = chol.l();
    let Some(half) = l.solve_lower_triangular(d) else {
        return T::zero();
    };
    let Some(w) = l.solve_lower_triangular(&half.adjoint()) else {
        return T::zero();
    };
    let lowest = min_eigenvalue(&w);
    if lowest < T::zero() { -T::one() / lowest } else { T::infinity() }
}

/// A step in `(0, cap]` keeping `A + a D` positive definite, found by
/// backtracking; cheaper and rougher than [`max_step`].
fn backtracked_step<T: Real>(a: &CMatrix<T>, d: &CMatrix<T>, cap: T) -> T {
    let mut step = cap;
    for _ in 0..40 {
        if Cholesky::new(a + d * Complex::new(step, T::zero())).is_some() {
            return step;
        }
        step *= T::lit(0.8);
    }
    T::zero()
}

/// Largest `a` with `v + a dv >= 0` componentwise.
fn max_step_vec<T: Real>(v: &DVector<T>, dv: &DVector<T>) -> T {
    v.iter()
        .zip(dv.iter())
        .filter(|&(_, &d)| d < T::zero())
        .fold(T::infinity(), |a, (&x, &d)| a.min(-x / d))
}

/// Search direction with its largest feasible step lengths.
struct Step<T: Real> {
    dx: CMatrix<T>,
    ds: DVector<T>,
    dy: DVector<T>,
    dz: CMatrix<T>,
    primal: T,
    dual: T,
}

/// `A Diag(v)`.
fn scale_columns<T: Real>(a: &CMatrix<T>, v: &DVector<T>) -> CMatrix<T> {
    let mut out = a.clone();
    for (k, mut col) in out.column_iter_mut().enumerate() {
        col *= Complex::new(v[k], T::zero());
    }
    out
}

fn dual_slack<T: Real>(c: &CMatrix<T>, y: &DVector<T>) -> CMatrix<T> {
    let mut z = -c.clone();
    for l in 0..y.len() {
        z[(l, l)] += Complex::new(y[l], T::zero());
    }
    z
}

/// Decides feasibility of `problem`.
pub fn solve_feasibility<T: Real>(
    problem: &FeasibilityProblem<T>,
    options: &SdpOptions<T>,
) -> Result<FeasibilityResult<T>, SdpError<T>> {
    let n = problem.dim();
    let zero_psi = || CMatrix::zeros(n, n);
    let threshold = problem.t * problem.alpha;
    if problem.t == T::zero() || n == 0 {
        // Psi = 0 meets every constraint with zero slack.
        return Ok(FeasibilityResult {
            status: FeasibilityStatus::Feasible(zero_psi()),
            residuals: Some(Residuals { psd: T::zero(), diagonal: T::zero(), trace: T::zero() }),
            lower_bound: T::zero(),
            upper_bound: T::infinity(),
            iterations: 0,
        });
    }

    // Work in units where max(||L0||, t||M||, t alpha) = 1.
    let scale = problem.scale();
    let inv_scale = T::one() / scale;
    let c = hermitize(&(&problem.signal - &problem.interference * Complex::new(problem.t, T::zero())))
        .map(|z| z * inv_scale);
    let b = threshold * inv_scale;
    let tol = options.tolerance;
    let half = T::lit(0.5);

    // Strictly feasible start: Psi = I/2, and y above the Gershgorin bound of C.
    let gershgorin = (0..n)
        .map(|l| (0..n).fold(T::zero(), |s, k| s + c[(l, k)].modulus()))
        .fold(T::zero(), |a, v| a.max(v));
    let mut y = DVector::from_element(n, gershgorin + T::one());
    let mut x = CMatrix::<T>::identity(n, n) * Complex::new(half, T::zero());
    let mut s = DVector::from_element(n, half);

    let mut best_lower = T::zero();
    let mut best_psi = zero_psi();
    let mut upper = T::infinity();

    let finish = |status: FeasibilityStatus<T>, lower: T, upper: T, iterations: usize| {
        let residuals = match &status {
            FeasibilityStatus::Feasible(psi) => Some(problem.residuals(psi)),
            FeasibilityStatus::Infeasible => None,
        };
        let result = FeasibilityResult { status, residuals, lower_bound: lower * scale, upper_bound: upper * scale, iterations };
        #[cfg(debug_assertions)]
        if let (Some(r), Some(psi)) = (&result.residuals, result.psi()) {
            debug_assert!(
                r.within(T::lit(1e-6).max(tol), frobenius(psi), scale),
                "certificate residuals {r:?} exceed tolerance"
            );
        }
        Ok(result)
    };

    for iteration in 0..options.max_iterations {
        let z = dual_slack(&c, &y);
        let Some(chol_z) = Cholesky::new(z.clone()) else {
            break;
        };
        let dual_value = y.sum();
        upper = upper.min(dual_value);
        if dual_value < b {
            trace!("sdp: infeasible at iteration {iteration}, dual {dual_value} < {b}");
            return finish(FeasibilityStatus::Infeasible, best_lower, upper, iteration);
        }
        // Largest multiple of Psi that stays in the box.
        let raw = real_trace_product(&x, &c);
        let max_diag = (0..n).fold(T::zero(), |m, l| m.max(x[(l, l)].re));
        if raw > T::zero() && max_diag > T::zero() {
            let lower = raw / max_diag;
            if lower >= b - tol {
                trace!("sdp: feasible at iteration {iteration}, slack {lower} >= {b}");
                let psi = hermitize(&x.map(|v| v / max_diag));
                return finish(FeasibilityStatus::Feasible(psi), best_lower.max(lower), upper, iteration);
            }
            if lower > best_lower {
                best_lower = lower;
                best_psi = hermitize(&x.map(|v| v / max_diag));
            }
        }

        let gap = real_trace_product(&x, &z) + y.dot(&s);
        trace!("sdp: iteration {iteration}, gap {gap}, dual {dual_value}, primal {best_lower}, target {b}");
        let z_inv = hermitize(&chol_z.inverse());
        let Some(chol_x) = Cholesky::new(x.clone()) else {
            break;
        };

        // Schur complement system for dy, shared by predictor and corrector.
        let mut schur = DMatrix::from_fn(n, n, |l, k| (x[(l, k)] * z_inv[(l, k)].conj()).re);
        for l in 0..n {
            schur[(l, l)] += s[l] / y[l];
        }
        let Some(schur) = Cholesky::new(schur) else {
            break;
        };
        let direction = |mu: T, predictor: Option<&Step<T>>, exact: bool| {
            // Second-order term dPsi_a dZ_a Z^{-1} of the predictor, if any.
            let cross = predictor.map(|p| scale_columns(&p.dx, &p.dy) * &z_inv);
            let rhs = DVector::from_fn(n, |l, _| {
                let mut r = mu * z_inv[(l, l)].re + mu / y[l] - T::one();
                if let (Some(cr), Some(p)) = (&cross, predictor) {
                    r -= cr[(l, l)].re + p.ds[l] * p.dy[l] / y[l];
                }
                r
            });
            let dy = schur.solve(&rhs);
            let mut dx = &z_inv * Complex::new(mu, T::zero()) - &x - hermitize(&(scale_columns(&x, &dy) * &z_inv));
            let mut ds = DVector::from_fn(n, |l, _| mu / y[l] - s[l] - s[l] * dy[l] / y[l]);
            if let (Some(cr), Some(p)) = (&cross, predictor) {
                dx -= hermitize(cr);
                ds -= DVector::from_fn(n, |l, _| p.ds[l] * p.dy[l] / y[l]);
            }
            let dz = CMatrix::from_diagonal(&dy.map(|v| Complex::new(v, T::zero())));
            let (primal, dual) = if exact {
                (
                    max_step(&chol_x, &dx).min(max_step_vec(&s, &ds)),
                    max_step(&chol_z, &dz).min(max_step_vec(&y, &dy)),
                )
            } else {
                let cap_p = max_step_vec(&s, &ds).min(T::one());
                let cap_d = max_step_vec(&y, &dy).min(T::one());
                (backtracked_step(&x, &dx, cap_p), backtracked_step(&z, &dz, cap_d))
            };
            Step { dx, ds, dy, dz, primal, dual }
        };

        // Mehrotra: the gap the pure affine step would leave sets the centering.
        let affine = direction(T::zero(), None, false);
        let (ap, ad) = (affine.primal.min(T::one()), affine.dual.min(T::one()));
        let x_a = &x + &affine.dx * Complex::new(ap, T::zero());
        let z_a = &z + &affine.dz * Complex::new(ad, T::zero());
        let gap_a = real_trace_product(&x_a, &z_a) + (&y + &affine.dy * ad).dot(&(&s + &affine.ds * ap));
        let sigma = (gap_a / gap).max(T::zero()).powi(3).min(T::one());
        let mu = sigma * gap / T::lit(2.0 * n as f64);
        let step = direction(mu, Some(&affine), true);

        let primal_step = (options.step_fraction * step.primal).min(T::one());
        let dual_step = (options.step_fraction * step.dual).min(T::one());
        if !(primal_step > T::zero() || dual_step > T::zero()) {
            break;
        }
        x += step.dx * Complex::new(primal_step, T::zero());
        s += step.ds * primal_step;
        y += step.dy * dual_step;
    }

    Err(SdpError::NoConvergence { best_psi, lower_bound: best_lower * scale, upper_bound: upper * scale })
}
