//! Received-signal model: RIS configuration, receive beamformer, molecular
//! re-radiation noise, SINR and throughput.

use log::warn;
use nalgebra::ComplexField as _;
use nalgebra::{Complex, DVector};
use rand::Rng;

use crate::absorption::AbsorptionModel;
use crate::channel::{ChannelSet, free_space_amplitude};
use crate::linalg::{CVector, inner, norm_sq};
use crate::rng::{complex_normal, uniform_phase};
use crate::scenario::{Geometry, ReRadiation, SystemParams};
use crate::{Error, Real, Result};

/// Noise powers entering the SINR denominator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel<T: Real> {
    /// Thermal noise power `sigma_w^2` in W.
    pub thermal: T,
    /// Re-radiation from the direct paths, summed over transmitters (`sigma_m1^2`).
    pub direct_molecular: T,
    /// Re-radiation through the RIS per unit `Theta0^H Theta0` (`sigma_m2^2`).
    pub reflected_molecular: T,
    pub re_radiation: ReRadiation,
}

impl<T: Real> NoiseModel<T> {
    pub fn thermal_only(thermal: T) -> Self {
        Self {
            thermal,
            direct_molecular: T::zero(),
            reflected_molecular: T::zero(),
            re_radiation: ReRadiation::Scattering,
        }
    }

    /// `sigma_w^2 + zeta (sigma_m1^2 + sigma_m2^2 Theta0^H Theta0)`.
    pub fn effective(&self, ris_power: T) -> T {
        let zeta: T = self.re_radiation.zeta_as();
        self.thermal + zeta * (self.direct_molecular + self.reflected_molecular * ris_power)
    }
}

/// RIS configuration `Theta0 = [Theta, 1]`: `N` reflection coefficients of
/// modulus at most one followed by the constant direct-path element.
#[derive(Clone, Debug, PartialEq)]
pub struct RisConfig<T: Real> {
    theta0: CVector<T>,
}

impl<T: Real> RisConfig<T> {
    pub fn new(theta0: CVector<T>) -> Result<Self> {
        let n = theta0.len();
        if n == 0 {
            return Err(Error::InvalidParameter("empty RIS configuration".into()));
        }
        if theta0[n - 1] != Complex::new(T::one(), T::zero()) {
            return Err(Error::InvalidParameter("last element of Theta0 must be exactly 1".into()));
        }
        let slack = T::one() + T::lit(64.0) * T::eps();
        if let Some(l) = theta0.iter().position(|z| !(z.modulus() <= slack)) {
            return Err(Error::InvalidParameter(format!("|Theta0[{l}]| exceeds 1")));
        }
        Ok(Self { theta0 })
    }

    /// Appends the unit element to `N` reflection coefficients.
    pub fn from_reflection(theta: &[Complex<T>]) -> Result<Self> {
        let mut v = theta.to_vec();
        v.push(Complex::new(T::one(), T::zero()));
        Self::new(DVector::from_vec(v))
    }

    pub fn all_ones(n_elements: usize) -> Self {
        Self { theta0: DVector::from_element(n_elements + 1, Complex::new(T::one(), T::zero())) }
    }

    /// Unit-modulus coefficients with i.i.d. uniform phases.
    pub fn random_phases<R: Rng + ?Sized>(n_elements: usize, rng: &mut R) -> Self {
        let mut v: Vec<Complex<T>> = (0..n_elements)
            .map(|_| {
                let p: T = uniform_phase(rng);
                Complex::new(p.cos(), p.sin())
            })
            .collect();
        v.push(Complex::new(T::one(), T::zero()));
        Self { theta0: DVector::from_vec(v) }
    }

    pub fn as_vector(&self) -> &CVector<T> {
        &self.theta0
    }

    /// Physical reflection coefficients, without the appended 1.
    pub fn elements(&self) -> &[Complex<T>] {
        let n = self.theta0.len();
        &self.theta0.as_slice()[..n - 1]
    }

    pub fn n_elements(&self) -> usize {
        self.theta0.len() - 1
    }

    /// `Theta0^H Theta0`, counting the appended unit element.
    pub fn power(&self) -> T {
        norm_sq(&self.theta0)
    }

    /// `Theta^H Theta` over the physical elements only.
    pub fn element_power(&self) -> T {
        self.power() - T::one()
    }
}

/// Unit-norm receive combiner.
#[derive(Clone, Debug, PartialEq)]
pub struct Beamformer<T: Real> {
    u: CVector<T>,
}

impl<T: Real> Beamformer<T> {
    pub fn new(u: CVector<T>) -> Result<Self> {
        let norm = norm_sq(&u).sqrt();
        if (norm - T::one()).abs() > T::lit(1e-6) {
            return Err(Error::InvalidParameter(format!("beamformer norm {norm} is not 1")));
        }
        Ok(Self { u })
    }

    /// Scales `v` to unit norm; `None` for the zero vector.
    pub fn normalized(v: CVector<T>) -> Option<Self> {
        let norm = norm_sq(&v).sqrt();
        (norm > T::zero() && norm.is_finite()).then(|| Self { u: v.map(|z| z / norm) })
    }

    /// First standard basis vector.
    pub fn first_antenna(n: usize) -> Self {
        let mut u = CVector::zeros(n);
        u[0] = Complex::new(T::one(), T::zero());
        Self { u }
    }

    pub fn as_vector(&self) -> &CVector<T> {
        &self.u
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }
}

/// Closed-form re-radiation noise powers.
///
/// `sigma_m1^2 = sum_i (c/4 pi f d_i)^2 P_i (1 - tau(d_i))` and
/// `sigma_m2^2 = sum_i (c^2/(16 pi^2 f^2 d_alpha d_gamma_i))^2 P_i (1 - tau(d_alpha) tau(d_gamma_i))`,
/// both summed over every transmitter including the Tx of interest. With the
/// direct link blocked there is no direct path to re-radiate, so
/// `sigma_m1^2` is zero.
pub fn molecular_noise<T: Real>(
    geometry: &Geometry<T>,
    params: &SystemParams<T>,
    model: &AbsorptionModel<T>,
) -> Result<NoiseModel<T>> {
    params.validate()?;
    if geometry.n_transmitters() != params.tx_powers.len() {
        return Err(Error::Dimension("geometry and power list disagree".into()));
    }
    let f = params.carrier_frequency;
    let tau_alpha = model.transmittance(f, geometry.ris_rx_distance)?;
    let amp_alpha = free_space_amplitude(f, geometry.ris_rx_distance);
    let mut direct = T::zero();
    let mut reflected = T::zero();
    for (link, &p) in geometry.tx.iter().zip(&params.tx_powers) {
        if params.direct_link_present {
            let tau = model.transmittance(f, link.rx_distance)?;
            direct += free_space_amplitude(f, link.rx_distance).powi(2) * p * (T::one() - tau);
        }
        let tau_gamma = model.transmittance(f, link.ris_distance)?;
        let cascade = amp_alpha * free_space_amplitude(f, link.ris_distance);
        reflected += cascade.powi(2) * p * (T::one() - tau_alpha * tau_gamma);
    }
    Ok(NoiseModel {
        thermal: params.thermal_noise_power(),
        direct_molecular: direct,
        reflected_molecular: reflected,
        re_radiation: params.re_radiation,
    })
}

fn check_dims<T: Real>(u: &Beamformer<T>, theta0: &RisConfig<T>, channels: &ChannelSet<T>, params: &SystemParams<T>) -> Result<()> {
    if u.len() != channels.n_rx() || theta0.n_elements() != channels.n_ris() {
        return Err(Error::Dimension(format!(
            "u has {} entries, Theta0 {} elements; channels are {}x{}",
            u.len(),
            theta0.n_elements(),
            channels.n_rx(),
            channels.n_ris()
        )));
    }
    if channels.n_transmitters() != params.tx_powers.len() {
        return Err(Error::Dimension("channel set and power list disagree".into()));
    }
    Ok(())
}

/// SINR at the combiner output,
/// `P_0 |u^H H_0 Theta0|^2 / (sum_{i>=1} P_i |u^H H_i Theta0|^2 + u^H u sigma^2(Theta0))`.
///
/// A 0/0 ratio (no signal, interference or noise) yields 0 with a warning.
pub fn sinr<T: Real>(
    u: &Beamformer<T>,
    theta0: &RisConfig<T>,
    channels: &ChannelSet<T>,
    noise: &NoiseModel<T>,
    params: &SystemParams<T>,
) -> Result<T> {
    check_dims(u, theta0, channels, params)?;
    let uu = u.as_vector();
    let gain = |i: usize| -> T { inner(uu, &(&channels.stacked[i] * theta0.as_vector())).modulus_squared() };
    let signal = params.tx_powers[0] * gain(0);
    let interference = (1..channels.n_transmitters()).fold(T::zero(), |s, i| s + params.tx_powers[i] * gain(i));
    let denominator = interference + norm_sq(uu) * noise.effective(theta0.power());
    Ok(ratio_or_zero(signal, denominator))
}

pub(crate) fn ratio_or_zero<T: Real>(signal: T, denominator: T) -> T {
    if denominator > T::zero() {
        signal / denominator
    } else if signal > T::zero() {
        T::infinity()
    } else {
        warn!("degenerate SINR: zero signal over zero interference and noise");
        T::zero()
    }
}

/// Throughput `B log2(1 + gamma)` in bit/s.
pub fn throughput<T: Real>(gamma: T, bandwidth: T) -> T {
    bandwidth * (T::one() + gamma).log2()
}

/// Monte-Carlo estimate of the re-radiation noise power reaching the Rx
/// through the RIS.
///
/// Per element `m` and transmitter `i` the noise term is
/// `(n1 theta_m sqrt(tau_alpha) + n2) * pathloss`, with
/// `n1 ~ CN(0, P_i (1 - tau_gamma_i))` the absorption noise on the incident
/// hop and `n2 ~ CN(0, |theta_m|^2 P_i (1 - tau_alpha))` the one on the
/// reflected hop. Terms are independent across elements and transmitters and
/// are summed; the sample variance of the sum is returned. Only the `N`
/// physical elements contribute.
pub fn simulate_appendix_chain<T: Real, R: Rng + ?Sized>(
    theta0: &RisConfig<T>,
    geometry: &Geometry<T>,
    params: &SystemParams<T>,
    model: &AbsorptionModel<T>,
    n_samples: usize,
    rng: &mut R,
) -> Result<T> {
    if n_samples < 10_000 {
        return Err(Error::InvalidParameter(format!("need at least 1e4 samples, got {n_samples}")));
    }
    if theta0.n_elements() != geometry.n_ris_elements {
        return Err(Error::Dimension("Theta0 length disagrees with the RIS size".into()));
    }
    let f = params.carrier_frequency;
    let tau_alpha = model.transmittance(f, geometry.ris_rx_distance)?;
    let amp_alpha = free_space_amplitude(f, geometry.ris_rx_distance);
    let hops: Vec<(T, T, T)> = geometry
        .tx
        .iter()
        .zip(&params.tx_powers)
        .map(|(link, &p)| {
            let tau_gamma = model.transmittance(f, link.ris_distance)?;
            let pathloss = amp_alpha * free_space_amplitude(f, link.ris_distance);
            Ok((pathloss, (p * (T::one() - tau_gamma)).sqrt(), (p * (T::one() - tau_alpha)).sqrt()))
        })
        .collect::<Result<_>>()?;
    let sqrt_tau_alpha = tau_alpha.sqrt();

    let zero = Complex::new(T::zero(), T::zero());
    let mut mean = zero;
    let mut m2 = T::zero();
    for s in 0..n_samples {
        let mut total = zero;
        for &(pathloss, incident_std, reflected_std) in &hops {
            let mut acc = zero;
            for &theta in theta0.elements() {
                let n1 = complex_normal::<T, R>(rng) * incident_std;
                let n2 = complex_normal::<T, R>(rng) * (reflected_std * theta.modulus());
                acc += n1 * theta * sqrt_tau_alpha + n2;
            }
            total += acc * pathloss;
        }
        // Welford update on the complex sample.
        let k = T::lit((s + 1) as f64);
        let delta = total - mean;
        mean += delta / k;
        m2 += (delta.conj() * (total - mean)).re;
    }
    Ok(m2 / T::lit((n_samples - 1) as f64))
}
