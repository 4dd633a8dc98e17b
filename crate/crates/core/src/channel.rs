//! Unified Rician THz channels for every link and the stacked per-transmitter
//! matrices `H_i = [h_SR Diag(h_ST_i), h_RT_i]`.
//!
//! A link is `(sqrt(tau) F_LOS + sqrt((1 - zeta)(1 - tau)) H_nlos) c / (4 pi f d)`
//! with `H_nlos` i.i.d. unit-variance circular complex Gaussian. The LOS and
//! NLOS weights are written in terms of the transmittance so that a lossless
//! link (infinite Rician factor) needs no special case.

use std::io::Write;

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;

use crate::absorption::AbsorptionModel;
use crate::linalg::{CMatrix, CVector};
use crate::rng::complex_normal_matrix;
use crate::scenario::{Geometry, ReRadiation, SystemParams};
use crate::{Error, Real, Result, SPEED_OF_LIGHT};

/// ULA array factor `[1, e^{j 2 pi s sin(theta)}, ..., e^{j 2 pi s (n-1) sin(theta)}]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SteeringVector<T: Real> {
    entries: CVector<T>,
    spacing_ratio: T,
}

impl<T: Real> SteeringVector<T> {
    pub fn entries(&self) -> &CVector<T> {
        &self.entries
    }

    pub fn spacing_ratio(&self) -> T {
        self.spacing_ratio
    }

    /// Elementwise conjugate, i.e. the `a^H` of the link table as a column.
    pub fn conjugate(&self) -> CVector<T> {
        self.entries.map(|z| z.conj())
    }

    pub fn into_inner(self) -> CVector<T> {
        self.entries
    }
}

pub fn steering<T: Real>(n_elements: usize, theta: T, spacing_ratio: T) -> SteeringVector<T> {
    let step = T::two_pi() * spacing_ratio * theta.sin();
    let entries = DVector::from_fn(n_elements, |m, _| {
        let phase = step * T::lit(m as f64);
        Complex::new(phase.cos(), phase.sin())
    });
    SteeringVector { entries, spacing_ratio }
}

/// Free-space amplitude `c / (4 pi f d)`.
pub fn free_space_amplitude<T: Real>(f: T, d: T) -> T {
    T::lit(SPEED_OF_LIGHT) / (T::lit(4.0) * T::pi() * f * d)
}

/// Draws one link realization around a unit-modulus LOS response.
///
/// The NLOS matrix is always drawn, even when its weight is zero, so that two
/// runs differing only in `zeta` consume the random stream identically.
pub fn synthesize_link<T: Real, R: Rng + ?Sized>(
    los: &CMatrix<T>,
    d: T,
    f: T,
    re_radiation: ReRadiation,
    model: &AbsorptionModel<T>,
    rng: &mut R,
) -> Result<CMatrix<T>> {
    if !(d > T::zero()) {
        return Err(Error::Geometry(format!("link distance must be positive, got {d}")));
    }
    let tau = model.transmittance(f, d)?;
    let zeta: T = re_radiation.zeta_as();
    let los_weight = tau.sqrt();
    let nlos_weight = ((T::one() - zeta) * (T::one() - tau)).max(T::zero()).sqrt();
    let amplitude = free_space_amplitude(f, d);
    let nlos: CMatrix<T> = complex_normal_matrix(rng, los.nrows(), los.ncols());
    Ok(los.zip_map(&nlos, |l, n| (l * los_weight + n * nlos_weight) * amplitude))
}

/// Realized channels for one scenario draw.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSet<T: Real> {
    /// Direct Tx_i -> Rx, `N_R` entries each.
    pub h_rt: Vec<CVector<T>>,
    /// Tx_i -> RIS, `N` entries each.
    pub h_st: Vec<CVector<T>>,
    /// RIS -> Rx, `N_R x N`.
    pub h_sr: CMatrix<T>,
    /// `H_i`, `N_R x (N + 1)`.
    pub stacked: Vec<CMatrix<T>>,
}

impl<T: Real> ChannelSet<T> {
    /// Assembles the stacked matrices from per-link channels.
    pub fn from_links(h_rt: Vec<CVector<T>>, h_st: Vec<CVector<T>>, h_sr: CMatrix<T>) -> Result<Self> {
        let (n_rx, n_ris) = h_sr.shape();
        if h_rt.len() != h_st.len() || h_rt.is_empty() {
            return Err(Error::Dimension(format!(
                "{} direct and {} RIS-incident channels",
                h_rt.len(),
                h_st.len()
            )));
        }
        if h_rt.iter().any(|h| h.len() != n_rx) || h_st.iter().any(|h| h.len() != n_ris) {
            return Err(Error::Dimension("link lengths disagree with h_SR".into()));
        }
        let stacked = h_rt
            .iter()
            .zip(&h_st)
            .map(|(rt, st)| {
                let mut h = CMatrix::zeros(n_rx, n_ris + 1);
                for c in 0..n_ris {
                    for r in 0..n_rx {
                        h[(r, c)] = h_sr[(r, c)] * st[c];
                    }
                }
                h.set_column(n_ris, rt);
                h
            })
            .collect();
        Ok(Self { h_rt, h_st, h_sr, stacked })
    }

    pub fn n_rx(&self) -> usize {
        self.h_sr.nrows()
    }

    pub fn n_ris(&self) -> usize {
        self.h_sr.ncols()
    }

    pub fn n_transmitters(&self) -> usize {
        self.stacked.len()
    }

    /// Writes every matrix as `name,row,col,re,im` rows for inspection.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "name,row,col,re,im")?;
        let mut dump = |name: &str, m: &DMatrix<Complex<T>>| -> std::io::Result<()> {
            for c in 0..m.ncols() {
                for r in 0..m.nrows() {
                    let z = m[(r, c)];
                    writeln!(out, "{name},{r},{c},{:e},{:e}", z.re.as_f64(), z.im.as_f64())?;
                }
            }
            Ok(())
        };
        dump("h_sr", &self.h_sr)?;
        for (i, h) in self.h_rt.iter().enumerate() {
            dump(&format!("h_rt_{i}"), &CMatrix::from_column_slice(h.len(), 1, h.as_slice()))?;
        }
        for (i, h) in self.h_st.iter().enumerate() {
            dump(&format!("h_st_{i}"), &CMatrix::from_column_slice(h.len(), 1, h.as_slice()))?;
        }
        Ok(())
    }
}

fn column<T: Real>(v: CVector<T>) -> CMatrix<T> {
    let n = v.len();
    CMatrix::from_column_slice(n, 1, v.as_slice())
}

/// Draws all channels of a scenario.
///
/// Draw order is fixed (`h_SR`, then `h_RT_i`, `h_ST_i` per transmitter) and
/// the direct links are drawn even when blocked, so toggling the direct link
/// leaves every RIS channel unchanged for the same stream.
pub fn build_channel_set<T: Real, R: Rng + ?Sized>(
    geometry: &Geometry<T>,
    params: &SystemParams<T>,
    model: &AbsorptionModel<T>,
    rng: &mut R,
) -> Result<ChannelSet<T>> {
    if geometry.n_transmitters() != params.tx_powers.len() {
        return Err(Error::Dimension(format!(
            "geometry has {} transmitters, params list {} powers",
            geometry.n_transmitters(),
            params.tx_powers.len()
        )));
    }
    let (n_rx, n_ris) = (geometry.n_rx_antennas, geometry.n_ris_elements);
    let f = params.carrier_frequency;
    let s = params.spacing_ratio;
    let mode = params.re_radiation;

    let rx_side = steering(n_rx, geometry.rx_arrival_from_ris, s).conjugate();
    let ris_side = steering(n_ris, geometry.ris_departure, s).into_inner();
    let sr_los = CMatrix::from_fn(n_rx, n_ris, |r, c| rx_side[r] * ris_side[c]);
    let h_sr = synthesize_link(&sr_los, geometry.ris_rx_distance, f, mode, model, rng)?;

    let mut h_rt = Vec::with_capacity(geometry.n_transmitters());
    let mut h_st = Vec::with_capacity(geometry.n_transmitters());
    for link in &geometry.tx {
        let rt_los = column(steering(n_rx, link.rx_arrival, s).conjugate());
        let rt = synthesize_link(&rt_los, link.rx_distance, f, mode, model, rng)?.column(0).into_owned();
        let st_los = column(steering(n_ris, link.ris_arrival, s).conjugate());
        let st = synthesize_link(&st_los, link.ris_distance, f, mode, model, rng)?.column(0).into_owned();
        h_rt.push(if params.direct_link_present { rt } else { CVector::zeros(n_rx) });
        h_st.push(st);
    }
    ChannelSet::from_links(h_rt, h_st, h_sr)
}
