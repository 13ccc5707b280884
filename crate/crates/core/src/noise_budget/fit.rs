use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Frequency at which [`PowerLawFit::log_amplitude`] is quoted.
pub const FIT_REFERENCE_HZ: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatingPoint {
    /// Hz
    pub frequency: f64,
    /// quanta/s
    pub rate: f64,
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatingDataset {
    points: Vec<HeatingPoint>,
}

impl HeatingDataset {
    pub fn new(points: Vec<HeatingPoint>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if !(p.frequency > 0.0) || !p.frequency.is_finite() {
                return Err(Error::validation(
                    format!("points[{i}].frequency_hz"),
                    format!("must be > 0, got {}", p.frequency),
                ));
            }
            if !(p.rate > 0.0) || !p.rate.is_finite() {
                return Err(Error::validation(
                    format!("points[{i}].rate_quanta_per_s"),
                    format!("must be > 0, got {}", p.rate),
                ));
            }
            if let Some(s) = p.sigma {
                if !(s >= 0.0) || !s.is_finite() {
                    return Err(Error::validation(
                        format!("points[{i}].sigma"),
                        format!("must be >= 0, got {s}"),
                    ));
                }
            }
            if points[..i].iter().any(|q| q.frequency == p.frequency) {
                return Err(Error::validation(
                    format!("points[{i}].frequency_hz"),
                    format!("duplicate frequency {}", p.frequency),
                ));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[HeatingPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Reads CSV with columns `frequency_hz`, `rate_quanta_per_s` and an
    /// optional `sigma`.
    pub fn from_csv_reader(reader: impl Read) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            frequency_hz: f64,
            rate_quanta_per_s: f64,
            #[serde(default)]
            sigma: Option<f64>,
        }
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut points = Vec::new();
        for row in rdr.deserialize::<Row>() {
            let row = row.map_err(|e| Error::parse("heating dataset", e))?;
            points.push(HeatingPoint {
                frequency: row.frequency_hz,
                rate: row.rate_quanta_per_s,
                sigma: row.sigma,
            });
        }
        Self::new(points)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(file)
    }

    /// True when every point carries a positive uncertainty.
    pub fn has_sigmas(&self) -> bool {
        !self.points.is_empty() && self.points.iter().all(|p| p.sigma.is_some_and(|s| s > 0.0))
    }
}

/// ln(rate) = log_amplitude + exponent · ln(f / 1 MHz).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub exponent_stderr: f64,
    pub log_amplitude: f64,
    /// Covariance of (log_amplitude, exponent).
    pub covariance: [[f64; 2]; 2],
    pub weighted: bool,
    pub points: usize,
}

impl PowerLawFit {
    pub fn predict(&self, frequency: f64) -> f64 {
        (self.log_amplitude + self.exponent * (frequency / FIT_REFERENCE_HZ).ln()).exp()
    }
}

/// Weighted least-squares line through (ln f, ln rate).
///
/// With per-point sigmas the log-space weights are (rate/σ)² and the
/// covariance is scaled by the reduced χ²; without them the residual
/// variance is used.
pub fn fit_power_law(data: &HeatingDataset) -> Result<PowerLawFit> {
    let n = data.len();
    if n < 3 {
        return Err(Error::Precondition(format!(
            "power-law fit needs at least 3 points, got {n}"
        )));
    }
    let weighted = data.has_sigmas();
    let rows: Vec<(f64, f64, f64)> = data
        .points()
        .iter()
        .map(|p| {
            let w = if weighted {
                let rel = p.sigma.unwrap() / p.rate;
                1.0 / (rel * rel)
            } else {
                1.0
            };
            ((p.frequency / FIT_REFERENCE_HZ).ln(), p.rate.ln(), w)
        })
        .collect();

    // centre x for conditioning
    let sw: f64 = rows.iter().map(|r| r.2).sum();
    let x_bar = rows.iter().map(|r| r.2 * r.0).sum::<f64>() / sw;
    let y_bar = rows.iter().map(|r| r.2 * r.1).sum::<f64>() / sw;
    let sxx: f64 = rows.iter().map(|r| r.2 * (r.0 - x_bar).powi(2)).sum();
    let sxy: f64 = rows.iter().map(|r| r.2 * (r.0 - x_bar) * (r.1 - y_bar)).sum();
    let spread = rows.iter().map(|r| r.0.abs()).fold(1.0, f64::max);
    if !(sxx > 1e-24 * spread * spread * sw) {
        return Err(Error::Precondition(
            "degenerate design: all frequencies are equal".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = y_bar - slope * x_bar;

    let chi2: f64 = rows
        .iter()
        .map(|r| r.2 * (r.1 - intercept - slope * r.0).powi(2))
        .sum();
    let scale = chi2 / (n as f64 - 2.0);

    let var_slope = scale / sxx;
    let var_intercept = scale * (1.0 / sw + x_bar * x_bar / sxx);
    let cov = -scale * x_bar / sxx;
    Ok(PowerLawFit {
        exponent: slope,
        exponent_stderr: var_slope.sqrt(),
        log_amplitude: intercept,
        covariance: [[var_intercept, cov], [cov, var_slope]],
        weighted,
        points: n,
    })
}
