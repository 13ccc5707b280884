//! Electric-field noise at the ion and the motional heating it drives.
//!
//! Sources add incoherently: the field PSD along a mode axis is the sum of
//! each source's PSD, and a voltage source on electrode n contributes
//! ε_n² S_Vn where ε_n is the field at the ion per volt on that electrode.

mod filter;
mod fit;

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constants::{BOLTZMANN, HBAR};
use crate::error::{Error, Result};
use crate::trap_model::IonSpecies;
use crate::units::format_number;

pub use filter::{chebyshev_t, filter_gain_sq, FilterKind, FilterSpec};
pub use fit::{fit_power_law, HeatingDataset, HeatingPoint, PowerLawFit, FIT_REFERENCE_HZ};

/// One control electrode's lead resistance and field coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectrodeLead {
    /// ohms
    pub resistance: f64,
    /// Field at the ion per volt on the electrode, 1/m.
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSource {
    /// White voltage noise at the source, shaped by a low-pass filter.
    Technical {
        name: String,
        /// V²/Hz
        white_voltage_psd: f64,
        filter: FilterSpec,
        /// Σε² over the driven electrodes, 1/m².
        coupling: f64,
    },
    /// Thermal noise of the electrode leads, 4 k_B T R_n per electrode.
    Johnson {
        name: String,
        electrodes: Vec<ElectrodeLead>,
        /// kelvin
        temperature: f64,
    },
    /// Surface-fluctuator noise A (f/f_ref)^(−exponent).
    Anomalous {
        name: String,
        /// V²/m²/Hz at `reference_frequency`.
        amplitude: f64,
        reference_frequency: f64,
        exponent: f64,
    },
}

impl NoiseSource {
    pub fn name(&self) -> &str {
        match self {
            NoiseSource::Technical { name, .. }
            | NoiseSource::Johnson { name, .. }
            | NoiseSource::Anomalous { name, .. } => name,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let field = |f: &str| format!("sources.{}.{f}", self.name());
        let nonneg = |f: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::validation(field(f), format!("must be >= 0, got {v}")))
            }
        };
        match self {
            NoiseSource::Technical {
                white_voltage_psd,
                filter,
                coupling,
                ..
            } => {
                nonneg("white_voltage_psd", *white_voltage_psd)?;
                nonneg("coupling", *coupling)?;
                filter.validate()
            }
            NoiseSource::Johnson {
                electrodes,
                temperature,
                ..
            } => {
                nonneg("temperature", *temperature)?;
                for e in electrodes {
                    nonneg("electrodes.resistance", e.resistance)?;
                    if !e.epsilon.is_finite() {
                        return Err(Error::validation(field("electrodes.epsilon"), "not finite"));
                    }
                }
                Ok(())
            }
            NoiseSource::Anomalous {
                amplitude,
                reference_frequency,
                exponent,
                ..
            } => {
                nonneg("amplitude", *amplitude)?;
                if !(*reference_frequency > 0.0) {
                    return Err(Error::validation(field("reference_frequency"), "must be > 0"));
                }
                if !(0.0..=6.0).contains(exponent) {
                    return Err(Error::validation(
                        field("exponent"),
                        format!("must lie in [0, 6], got {exponent}"),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Field PSD at the ion from this source alone, V²/m²/Hz.
    pub fn field_psd(&self, frequency: f64) -> f64 {
        match self {
            NoiseSource::Technical {
                white_voltage_psd,
                filter,
                coupling,
                ..
            } => coupling * white_voltage_psd * filter_gain_sq(filter, frequency),
            NoiseSource::Johnson {
                electrodes,
                temperature,
                ..
            } => electrodes
                .iter()
                .map(|e| e.epsilon * e.epsilon * johnson_voltage_psd(e.resistance, *temperature))
                .sum(),
            NoiseSource::Anomalous {
                amplitude,
                reference_frequency,
                exponent,
                ..
            } => amplitude * (frequency / reference_frequency).powf(-exponent),
        }
    }
}

/// 4 k_B T R, V²/Hz.
pub fn johnson_voltage_psd(resistance: f64, temperature: f64) -> f64 {
    4.0 * BOLTZMANN * temperature * resistance
}

/// Incoherent sum of all sources at `frequency`.
pub fn field_noise_psd(sources: &[NoiseSource], frequency: f64) -> f64 {
    sources.iter().map(|s| s.field_psd(frequency)).sum()
}

/// ṅ = q² S_E(ω) / (4 m ħ ω), quanta/s, with ω = 2π·`secular_hz`.
pub fn heating_rate(species: &IonSpecies, secular_hz: f64, psd: f64) -> f64 {
    let omega = 2.0 * PI * secular_hz;
    species.charge * species.charge * psd / (4.0 * species.mass * HBAR * omega)
}

/// Field PSD that produces `rate` at `secular_hz`; inverse of [`heating_rate`].
pub fn psd_for_heating_rate(species: &IonSpecies, secular_hz: f64, rate: f64) -> f64 {
    rate / heating_rate(species, secular_hz, 1.0)
}

/// Set of noise sources plus the ion they act on, as read from a noise config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub name: String,
    /// Species preset name.
    pub species: String,
    pub sources: Vec<NoiseSource>,
}

impl NoiseConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: NoiseConfig = toml::from_str(text).map_err(|e| Error::parse("noise config", e))?;
        cfg.species()?;
        let mut seen = std::collections::BTreeSet::new();
        for s in &cfg.sources {
            s.validate()?;
            if !seen.insert(s.name()) {
                return Err(Error::validation(
                    "sources.name",
                    format!("duplicate source name `{}`", s.name()),
                ));
            }
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn species(&self) -> Result<IonSpecies> {
        IonSpecies::preset(&self.species).ok_or_else(|| {
            Error::validation("species", format!("unknown species preset `{}`", self.species))
        })
    }
}

pub const BUNDLED_NOISE: &[(&str, &str)] = &[
    (
        "enchilada_johnson",
        include_str!("../../configs/enchilada_johnson.toml"),
    ),
    (
        "technical_example",
        include_str!("../../configs/technical_example.toml"),
    ),
];

pub fn bundled_noise(name: &str) -> Option<NoiseConfig> {
    BUNDLED_NOISE
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| NoiseConfig::from_toml_str(text).expect("bundled noise config is valid"))
}

/// Heating rate per source and in total over a frequency sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetReport {
    pub species: String,
    pub sources: Vec<String>,
    pub rows: Vec<BudgetRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetRow {
    pub frequency_hz: f64,
    /// quanta/s, in the order of [`BudgetReport::sources`].
    pub per_source: Vec<f64>,
    pub total: f64,
}

pub fn budget_report(species: &IonSpecies, frequencies: &[f64], sources: &[NoiseSource]) -> BudgetReport {
    let rows = frequencies
        .iter()
        .map(|&f| {
            let per_source: Vec<f64> = sources
                .iter()
                .map(|s| heating_rate(species, f, s.field_psd(f)))
                .collect();
            let total = per_source.iter().sum();
            BudgetRow {
                frequency_hz: f,
                per_source,
                total,
            }
        })
        .collect();
    BudgetReport {
        species: species.name.clone(),
        sources: sources.iter().map(|s| s.name().to_string()).collect(),
        rows,
    }
}

impl BudgetReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("frequency_hz");
        for s in &self.sources {
            out.push_str(&format!(",{s}_quanta_per_s"));
        }
        out.push_str(",total_quanta_per_s\n");
        for row in &self.rows {
            out.push_str(&format_number(row.frequency_hz));
            for v in &row.per_source {
                out.push(',');
                out.push_str(&format_number(*v));
            }
            out.push(',');
            out.push_str(&format_number(row.total));
            out.push('\n');
        }
        out
    }

    /// Total-rate column as a dataset, for fitting.
    pub fn total_dataset(&self) -> Result<HeatingDataset> {
        HeatingDataset::new(
            self.rows
                .iter()
                .map(|r| HeatingPoint {
                    frequency: r.frequency_hz,
                    rate: r.total,
                    sigma: None,
                })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn johnson(r: f64, eps: f64) -> NoiseSource {
        NoiseSource::Johnson {
            name: "leads".into(),
            electrodes: vec![ElectrodeLead {
                resistance: r,
                epsilon: eps,
            }],
            temperature: 300.0,
        }
    }

    fn anomalous(exponent: f64) -> NoiseSource {
        NoiseSource::Anomalous {
            name: "surface".into(),
            amplitude: 1.0,
            reference_frequency: 1e6,
            exponent,
        }
    }

    #[test]
    fn single_johnson_electrode() {
        let s = [johnson(12.0, 1.0)];
        let a = field_noise_psd(&s, 1e6);
        assert!((a - 1.988_13e-19).abs() < 1e-24, "{a}");
        assert_eq!(a, field_noise_psd(&s, 3e6));
    }

    #[test]
    fn empty_sources() {
        assert_eq!(field_noise_psd(&[], 1e6), 0.0);
    }

    #[test]
    fn anomalous_power_law() {
        assert!((field_noise_psd(&[anomalous(2.0)], 2e6) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn additivity() {
        let a = vec![johnson(12.0, 300.0), anomalous(2.8)];
        let b = vec![NoiseSource::Technical {
            name: "dac".into(),
            white_voltage_psd: 1e-14,
            filter: FilterSpec::cascaded_rc(3, 206e3),
            coupling: 1e6,
        }];
        let joined: Vec<_> = a.iter().chain(b.iter()).cloned().collect();
        for f in [1e5, 1e6, 2.5e6] {
            assert_eq!(
                field_noise_psd(&joined, f),
                field_noise_psd(&a, f) + field_noise_psd(&b, f)
            );
        }
    }

    #[test]
    fn calcium_rate_one_mhz() {
        let r = heating_rate(&IonSpecies::ca40(), 1e6, 1e-12);
        assert!((r - 145.81).abs() < 0.01, "{r}");
        assert_eq!(heating_rate(&IonSpecies::ca40(), 1e6, 0.0), 0.0);
    }

    #[test]
    fn rate_scaling() {
        let ca = IonSpecies::ca40();
        let base = heating_rate(&ca, 2e6, 1e-13);
        assert!((heating_rate(&ca, 2e6, 3e-13) / base - 3.0).abs() < 1e-14);
        assert!((heating_rate(&ca, 4e6, 1e-13) / base - 0.5).abs() < 1e-14);
    }

    #[test]
    fn bundled_johnson_gives_fifteen_quanta() {
        let cfg = bundled_noise("enchilada_johnson").unwrap();
        let sp = cfg.species().unwrap();
        let report = budget_report(&sp, &[2e6], &cfg.sources);
        assert!((report.rows[0].total - 15.0).abs() < 0.15, "{:?}", report.rows);
        let NoiseSource::Johnson { electrodes, .. } = &cfg.sources[0] else {
            panic!("expected johnson source");
        };
        let sum_eps2: f64 = electrodes.iter().map(|e| e.epsilon * e.epsilon).sum();
        assert!((sum_eps2 / 1.04e6 - 1.0).abs() < 0.01, "{sum_eps2}");
    }

    #[test]
    fn coupling_inversion() {
        // Σε² = S_E(15 quanta/s at 2 MHz) / (4 k_B T R)
        let ca = IonSpecies::ca40();
        let sum_eps2 = psd_for_heating_rate(&ca, 2e6, 15.0) / johnson_voltage_psd(12.0, 300.0);
        assert!((sum_eps2 - 1.0349e6).abs() < 100.0, "{sum_eps2}");
    }

    #[test]
    fn zero_sources_report() {
        let zero = vec![johnson(0.0, 100.0), NoiseSource::Anomalous {
            name: "a".into(),
            amplitude: 0.0,
            reference_frequency: 1e6,
            exponent: 1.0,
        }];
        let r = budget_report(&IonSpecies::ca40(), &[1e6, 2e6], &zero);
        assert!(r.rows.iter().all(|row| row.total == 0.0 && row.per_source.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn report_total_is_column_sum() {
        let cfg = bundled_noise("technical_example").unwrap();
        let freqs: Vec<f64> = (0..11).map(|i| 1e6 + i as f64 * 2e5).collect();
        let r = budget_report(&cfg.species().unwrap(), &freqs, &cfg.sources);
        for row in &r.rows {
            assert_eq!(row.total, row.per_source.iter().sum::<f64>());
        }
        let csv = r.to_csv();
        assert!(csv.starts_with("frequency_hz,"));
        assert_eq!(csv.lines().count(), 12);
    }

    #[test]
    fn config_validation() {
        let bad = r#"
name = "x"
species = "Ca-40"
[[sources]]
kind = "anomalous"
name = "a"
amplitude = 1.0
reference_frequency = 1e6
exponent = 7.0
"#;
        assert!(matches!(
            NoiseConfig::from_toml_str(bad),
            Err(Error::Validation { .. })
        ));
        let unknown = bad.replace("Ca-40", "Xe-129").replace("7.0", "1.0");
        assert!(NoiseConfig::from_toml_str(&unknown).is_err());
    }
}
