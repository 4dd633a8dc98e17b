//! Molecular absorption: tabulated coefficient `k(f)`, transmittance
//! `tau(f, d) = exp(-k(f) d)` and the distance-dependent Rician factor.

use std::io::Read;
use std::path::Path;

use serde::Deserialize;

use crate::{Error, Real, Result};

/// Bundled sample table, 100-450 GHz at 1 GHz spacing.
pub const SAMPLE_TABLE_CSV: &str = include_str!("../data/absorption_100_450ghz.csv");

/// Piecewise-linear absorption coefficient table.
#[derive(Clone, Debug, PartialEq)]
pub struct AbsorptionModel<T: Real> {
    /// `(frequency in Hz, k in 1/m)` with strictly increasing frequency.
    samples: Vec<(T, T)>,
}

#[derive(Deserialize)]
struct Row {
    frequency_hz: f64,
    k_per_m: f64,
}

impl<T: Real> AbsorptionModel<T> {
    pub fn new(samples: Vec<(T, T)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidTable("table is empty".into()));
        }
        for (i, &(f, k)) in samples.iter().enumerate() {
            if !f.is_finite() || !k.is_finite() || k < T::zero() {
                return Err(Error::InvalidTable(format!("row {i}: bad sample ({f}, {k})")));
            }
            if i > 0 && f <= samples[i - 1].0 {
                return Err(Error::InvalidTable(format!(
                    "row {i}: frequencies must be strictly increasing"
                )));
            }
        }
        Ok(Self { samples })
    }

    /// Frequency-independent coefficient over `[f_min, f_max]`.
    pub fn constant(k: T, f_min: T, f_max: T) -> Result<Self> {
        Self::new(vec![(f_min, k), (f_max, k)])
    }

    /// The bundled sample table.
    pub fn sample() -> Self {
        Self::from_csv_reader(SAMPLE_TABLE_CSV.as_bytes()).expect("bundled table is valid")
    }

    /// Reads a CSV with header `frequency_hz,k_per_m`.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["frequency_hz", "k_per_m"] {
            return Err(Error::InvalidTable(format!(
                "expected header `frequency_hz,k_per_m`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut samples = Vec::new();
        for row in rdr.deserialize() {
            let row: Row = row?;
            samples.push((T::lit(row.frequency_hz), T::lit(row.k_per_m)));
        }
        Self::new(samples)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|e| Error::InvalidTable(format!("{}: {e}", path.display())))?;
        Self::from_csv_reader(file)
    }

    pub fn samples(&self) -> &[(T, T)] {
        &self.samples
    }

    pub fn frequency_range(&self) -> (T, T) {
        (self.samples[0].0, self.samples[self.samples.len() - 1].0)
    }

    /// Absorption coefficient `k(f)` in 1/m. No extrapolation.
    pub fn coefficient(&self, f: T) -> Result<T> {
        let (lo, hi) = self.frequency_range();
        if !(f >= lo && f <= hi) {
            return Err(Error::FrequencyOutOfRange {
                frequency_hz: f.as_f64(),
                min_hz: lo.as_f64(),
                max_hz: hi.as_f64(),
            });
        }
        let idx = self.samples.partition_point(|&(fs, _)| fs <= f);
        if idx == 0 {
            return Ok(self.samples[0].1);
        }
        if idx == self.samples.len() {
            return Ok(self.samples[idx - 1].1);
        }
        let (f0, k0) = self.samples[idx - 1];
        let (f1, k1) = self.samples[idx];
        let w = (f - f0) / (f1 - f0);
        Ok(k0 + (k1 - k0) * w)
    }

    /// `tau(f, d) = exp(-k(f) d)`, the fraction of power surviving absorption.
    pub fn transmittance(&self, f: T, d: T) -> Result<T> {
        if !(d >= T::zero()) {
            return Err(Error::InvalidParameter(format!("distance must be >= 0, got {d}")));
        }
        Ok(transmittance_from_coefficient(self.coefficient(f)?, d))
    }

    /// Rician factor `K_d = tau / (1 - tau)`; `+inf` for a lossless link.
    ///
    /// Callers building channels should use `tau` and `1 - tau` directly
    /// (they equal `K/(K+1)` and `1/(K+1)`) to stay finite at `K = inf`.
    pub fn rician_factor(&self, f: T, d: T) -> Result<T> {
        Ok(rician_factor_from_transmittance(self.transmittance(f, d)?))
    }
}

pub fn transmittance_from_coefficient<T: Real>(k: T, d: T) -> T {
    (-(k * d)).exp()
}

pub fn rician_factor_from_transmittance<T: Real>(tau: T) -> T {
    let absorbed = T::one() - tau;
    if absorbed <= T::zero() { T::infinity() } else { tau / absorbed }
}
