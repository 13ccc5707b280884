//! Command-line front end. Parsing lives here so integration tests can run
//! subcommands in-process; `main.rs` only handles exit codes and writing.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::noise_budget::{self, budget_report, fit_power_law, HeatingDataset, NoiseConfig};
use crate::optics::{clip_report, BeamSpec};
use crate::plot::{log_log_svg, Series};
use crate::pseudopotential::{pseudo_report, PseudoParams};
use crate::rf_power::{
    fixed_launch_projection, ohmic_power_distributed, power_breakdown, scaling_projection,
    solve_ladder, RfDrive, ScalingCoefficients,
};
use crate::trap_model::{self, IonSpecies, TrapDescription};
use crate::units::{format_number as num, parse_drive, parse_quantity};
use crate::wiring::{self, check_budget, conflict_regions, WiringMap};

/// Directory searched for `<name>.toml` before the bundled configs.
pub const CONFIG_DIR_ENV: &str = "TRAPBUDGET_CONFIG_DIR";

#[derive(Debug, Parser)]
#[command(name = "trapbudget", disable_version_flag = true)]
#[command(about = "RF power, pseudopotential, optical access and heating budgets for surface ion traps")]
pub struct Cli {
    /// Print the version and checksums of the bundled configs.
    #[arg(long, short = 'V')]
    pub version: bool,

    /// Write the result here instead of stdout; a `.meta.json` sidecar is written next to it.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Output format (each subcommand has its own default).
    #[arg(long, short, global = true, value_enum)]
    pub format: Option<Format>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ohmic and dielectric power for trap and lead.
    Power {
        #[arg(long, short)]
        config: String,
        /// Drive as `<volts>V@<freq>Hz`, e.g. `300V@50MHz`; defaults to the config's drive.
        #[arg(long)]
        drive: Option<String>,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// RC-ladder convergence toward the distributed closed form.
    Ladder {
        #[arg(long, short)]
        config: Option<String>,
        #[arg(long)]
        drive: Option<String>,
        /// Comma-separated segment counts.
        #[arg(long, value_delimiter = ',', default_value = "1,10,100,1000")]
        segments: Vec<usize>,
        /// Override the trap-region capacitance, e.g. `5.1pF`.
        #[arg(long)]
        capacitance: Option<String>,
        /// Override the trap-region resistance, e.g. `0.25Ohm`.
        #[arg(long)]
        resistance: Option<String>,
    },
    /// Total power vs. number of sites and RF launches.
    Scale {
        /// W per site³; otherwise derived from `--config`'s trap region.
        #[arg(long)]
        alpha_o: Option<f64>,
        /// W per site.
        #[arg(long)]
        alpha_d: Option<f64>,
        #[arg(long, short)]
        config: Option<String>,
        #[arg(long)]
        drive: Option<String>,
        /// Sites held by the config's trap region (or per launch with explicit alphas).
        #[arg(long, default_value_t = 200)]
        sites_per_launch: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
        launches: Vec<usize>,
        /// Total site count; omit to keep sites-per-launch fixed.
        #[arg(long)]
        sites: Option<usize>,
    },
    /// Radial secular frequency, depth and Mathieu q.
    Pseudo {
        #[arg(long, short)]
        config: Option<String>,
        #[arg(long)]
        drive: Option<String>,
        /// Species preset (Ca-40, Yb-171, Ba-138).
        #[arg(long)]
        species: Option<String>,
        /// Characteristic distance, e.g. `124um`.
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Side-access NA and beam clipping at the isthmus edge.
    Clip {
        #[arg(long, short)]
        config: Option<String>,
        #[arg(long, default_value = "532nm")]
        wavelength: String,
        #[arg(long, default_value = "5um")]
        waist: String,
        /// Distance from focus to the edge; defaults to the isthmus half-width.
        #[arg(long)]
        edge_distance: Option<String>,
        /// Beam height above the clipping plane; defaults to the ion height above the control plane.
        #[arg(long)]
        edge_height: Option<String>,
    },
    /// Per-source heating-rate budget.
    Heating {
        /// Noise config name or path.
        #[arg(long, short)]
        noise: String,
        #[arg(long)]
        species: Option<String>,
        /// Single secular frequency, e.g. `2MHz`.
        #[arg(long, conflicts_with = "sweep")]
        at: Option<String>,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Power-law fit of a heating dataset.
    Fit {
        /// CSV with frequency_hz, rate_quanta_per_s[, sigma].
        #[arg(long, short)]
        data: PathBuf,
    },
    /// Co-wiring signal budget and region conflicts.
    Wiring {
        #[arg(long, short, default_value = "enchilada_wiring")]
        wiring: String,
        /// Override the map's I/O budget.
        #[arg(long)]
        budget: Option<usize>,
        /// Comma-separated region tags in simultaneous use.
        #[arg(long, value_delimiter = ',')]
        active: Vec<String>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Frequency sweep `<start>:<stop>:<points>`, e.g. `10MHz:100MHz:10`.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Log-spaced sweep points.
    #[arg(long)]
    pub log: bool,
}

/// Parsed frequency sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sweep {
    pub start_hz: f64,
    pub stop_hz: f64,
    pub points: usize,
    pub log_spacing: bool,
}

impl Sweep {
    pub fn parse(text: &str, log_spacing: bool) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, stop, points] = parts[..] else {
            return Err(Error::parse("sweep", format!("`{text}`: expected start:stop:points")));
        };
        let sweep = Self {
            start_hz: parse_quantity(start, "Hz")?,
            stop_hz: parse_quantity(stop, "Hz")?,
            points: points
                .trim()
                .parse()
                .map_err(|_| Error::parse("sweep", format!("`{points}` is not a point count")))?,
            log_spacing,
        };
        sweep.validate()?;
        Ok(sweep)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 1 {
            return Err(Error::validation("sweep.points", "must be >= 1"));
        }
        if !(self.start_hz > 0.0) || !(self.start_hz < self.stop_hz) {
            return Err(Error::validation(
                "sweep",
                format!("need 0 < start < stop, got {} .. {}", self.start_hz, self.stop_hz),
            ));
        }
        Ok(())
    }

    pub fn frequencies(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start_hz];
        }
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let t = i as f64 / last;
                if i + 1 == self.points {
                    self.stop_hz
                } else if self.log_spacing {
                    (self.start_hz.ln() + t * (self.stop_hz.ln() - self.start_hz.ln())).exp()
                } else {
                    self.start_hz + t * (self.stop_hz - self.start_hz)
                }
            })
            .collect()
    }
}

impl SweepArgs {
    fn parse(&self) -> Result<Option<Sweep>> {
        self.sweep.as_deref().map(|s| Sweep::parse(s, self.log)).transpose()
    }
}

/// Result of one subcommand, ready to write.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub format: Format,
    pub body: String,
    /// Resolved inputs with their SHA-256, for the sidecar.
    pub inputs: Vec<(String, String)>,
}

/// Process exit status for an error.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Parse { .. } | Error::Validation { .. } | Error::Precondition(_) => 2,
        Error::Numerical(_) => 3,
        Error::Io { .. } => 4,
    }
}

/// Machine-readable error line for stderr.
pub fn error_json(err: &Error) -> String {
    json!({
        "error": {
            "kind": err.kind(),
            "message": err.to_string(),
            "exit_code": exit_code(err),
        }
    })
    .to_string()
}

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// `--version` text: crate version plus a checksum ledger of bundled configs.
pub fn version_text() -> String {
    let mut out = format!("trapbudget {}\n", env!("CARGO_PKG_VERSION"));
    let bundles = trap_model::BUNDLED_TRAPS
        .iter()
        .chain(noise_budget::BUNDLED_NOISE)
        .chain(wiring::BUNDLED_WIRING);
    for (name, text) in bundles {
        let _ = writeln!(out, "{}  {name}", sha256_hex(text));
    }
    out
}

/// Finds config text by path, then `$TRAPBUDGET_CONFIG_DIR/<name>.toml`,
/// then among the bundled configs.
fn resolve_config(name: &str, bundled: &[(&str, &str)]) -> Result<(String, String)> {
    let path = Path::new(name);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        return Ok((name.to_string(), text));
    }
    if let Ok(dir) = std::env::var(CONFIG_DIR_ENV) {
        let candidate = Path::new(&dir).join(format!("{name}.toml"));
        if candidate.is_file() {
            let text = std::fs::read_to_string(&candidate).map_err(|e| Error::io(&candidate, e))?;
            return Ok((candidate.display().to_string(), text));
        }
    }
    bundled
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(n, t)| (format!("bundled:{n}"), t.to_string()))
        .ok_or_else(|| {
            let names: Vec<&str> = bundled.iter().map(|(n, _)| *n).collect();
            Error::validation(
                "config",
                format!("`{name}` is neither a file nor a bundled config ({})", names.join(", ")),
            )
        })
}

struct Inputs(Vec<(String, String)>);

impl Inputs {
    fn trap(&mut self, name: &str) -> Result<TrapDescription> {
        let (label, text) = resolve_config(name, trap_model::BUNDLED_TRAPS)?;
        let trap = TrapDescription::from_toml_str(&text)?;
        self.0.push((label, sha256_hex(&text)));
        Ok(trap)
    }

    fn noise(&mut self, name: &str) -> Result<NoiseConfig> {
        let (label, text) = resolve_config(name, noise_budget::BUNDLED_NOISE)?;
        let cfg = NoiseConfig::from_toml_str(&text)?;
        self.0.push((label, sha256_hex(&text)));
        Ok(cfg)
    }

    fn wiring(&mut self, name: &str) -> Result<WiringMap> {
        let (label, text) = resolve_config(name, wiring::BUNDLED_WIRING)?;
        let map = WiringMap::from_toml_str(&text)?;
        self.0.push((label, sha256_hex(&text)));
        Ok(map)
    }

    fn file(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let text = String::from_utf8_lossy(&bytes);
        self.0.push((path.display().to_string(), sha256_hex(&text)));
        Ok(())
    }
}

fn drive_or_default(text: Option<&str>, trap: Option<&TrapDescription>) -> Result<RfDrive> {
    let drive = match (text, trap.and_then(|t| t.drive)) {
        (Some(t), _) => {
            let (v, f) = parse_drive(t)?;
            RfDrive::from_hz(v, f)
        }
        (None, Some(d)) => d,
        (None, None) => {
            return Err(Error::validation(
                "drive",
                "no --drive given and the config has no [drive] section",
            ))
        }
    };
    drive.validate()?;
    Ok(drive)
}

fn species(name: &str) -> Result<IonSpecies> {
    IonSpecies::preset(name)
        .ok_or_else(|| Error::validation("species", format!("unknown species preset `{name}`")))
}

fn reject_format(cmd: &str, format: Format) -> Error {
    Error::validation("format", format!("`{cmd}` does not produce {format:?} output"))
}

fn json_body(value: serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(&value).expect("json serializes");
    s.push('\n');
    s
}

/// Runs a parsed command and returns its artifact.
pub fn execute(cli: &Cli) -> Result<Artifact> {
    let Some(command) = &cli.command else {
        return Err(Error::validation("command", "no subcommand given"));
    };
    let mut inputs = Inputs(Vec::new());
    let (format, body) = match command {
        Command::Power { config, drive, sweep } => {
            let trap = inputs.trap(config)?;
            let base = drive_or_default(drive.as_deref(), Some(&trap))?;
            let freqs = match sweep.parse()? {
                Some(s) => s.frequencies(),
                None => vec![base.frequency_hz()],
            };
            let rows: Vec<_> = freqs
                .iter()
                .map(|&f| (f, power_breakdown(&trap, RfDrive::from_hz(base.amplitude, f))))
                .collect();
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let mut out = String::from(
                        "frequency_hz,ohmic_trap_w,ohmic_lead_w,dielectric_trap_w,dielectric_lead_w,total_w\n",
                    );
                    for (f, b) in &rows {
                        let _ = writeln!(
                            out,
                            "{},{},{},{},{},{}",
                            num(*f),
                            num(b.ohmic_trap),
                            num(b.ohmic_lead),
                            num(b.dielectric_trap),
                            num(b.dielectric_lead),
                            num(b.total)
                        );
                    }
                    (Format::Csv, out)
                }
                Format::Json => {
                    let rows: Vec<_> = rows
                        .iter()
                        .map(|(f, b)| {
                            json!({
                                "frequency_hz": f,
                                "ohmic_trap_w": b.ohmic_trap,
                                "ohmic_lead_w": b.ohmic_lead,
                                "dielectric_trap_w": b.dielectric_trap,
                                "dielectric_lead_w": b.dielectric_lead,
                                "total_w": b.total,
                            })
                        })
                        .collect();
                    (
                        Format::Json,
                        json_body(json!({
                            "config": trap.name,
                            "amplitude_v": base.amplitude,
                            "rows": rows,
                        })),
                    )
                }
                Format::Svg => {
                    let column = |pick: fn(&crate::rf_power::PowerBreakdown) -> f64| -> Vec<(f64, f64)> {
                        rows.iter().map(|(f, b)| (*f, pick(b))).collect()
                    };
                    let columns = [
                        ("ohmic trap", "#1f77b4", column(|b| b.ohmic_trap)),
                        ("ohmic lead", "#9467bd", column(|b| b.ohmic_lead)),
                        ("dielectric trap", "#d62728", column(|b| b.dielectric_trap)),
                        ("dielectric lead", "#ff7f0e", column(|b| b.dielectric_lead)),
                        ("total", "black", column(|b| b.total)),
                    ];
                    let series: Vec<Series> = columns
                        .iter()
                        .map(|(label, color, pts)| Series {
                            label,
                            color,
                            points: pts,
                            line: rows.len() > 1,
                        })
                        .collect();
                    (
                        Format::Svg,
                        log_log_svg(
                            &format!("RF power: {} at {} V", trap.name, num(base.amplitude)),
                            "drive frequency (Hz)",
                            "power (W)",
                            &series,
                        ),
                    )
                }
            }
        }
        Command::Ladder {
            config,
            drive,
            segments,
            capacitance,
            resistance,
        } => {
            let trap = config.as_deref().map(|c| inputs.trap(c)).transpose()?;
            let drive = drive_or_default(drive.as_deref(), trap.as_ref())?;
            let pick = |text: &Option<String>, unit: &str, from_trap: Option<f64>, what: &str| -> Result<f64> {
                match (text, from_trap) {
                    (Some(t), _) => parse_quantity(t, unit),
                    (None, Some(v)) => Ok(v),
                    (None, None) => Err(Error::validation(what, "give --config or an explicit value")),
                }
            };
            let c = pick(capacitance, "F", trap.as_ref().map(|t| t.rf_model.c_trap), "capacitance")?;
            let r = pick(resistance, "Ohm", trap.as_ref().map(|t| t.rf_model.r_trap), "resistance")?;
            let closed = ohmic_power_distributed(drive, c, r);
            let mut rows = Vec::new();
            for &n in segments {
                let s = solve_ladder(drive, c, r, n)?;
                let rel = if closed > 0.0 {
                    (s.resistor_power - closed) / closed
                } else {
                    0.0
                };
                rows.push((n, s.resistor_power, rel));
            }
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let mut out = String::from("segments,ladder_w,closed_form_w,relative_error\n");
                    for (n, p, rel) in &rows {
                        let _ = writeln!(out, "{n},{},{},{}", num(*p), num(closed), num(*rel));
                    }
                    (Format::Csv, out)
                }
                Format::Json => {
                    let rows: Vec<_> = rows
                        .iter()
                        .map(|(n, p, rel)| json!({"segments": n, "ladder_w": p, "relative_error": rel}))
                        .collect();
                    (
                        Format::Json,
                        json_body(json!({
                            "capacitance_f": c,
                            "resistance_ohm": r,
                            "closed_form_w": closed,
                            "rows": rows,
                        })),
                    )
                }
                f => return Err(reject_format("ladder", f)),
            }
        }
        Command::Scale {
            alpha_o,
            alpha_d,
            config,
            drive,
            sites_per_launch,
            launches,
            sites,
        } => {
            let coeffs = match (alpha_o, alpha_d, config) {
                (Some(o), Some(d), None) => ScalingCoefficients {
                    alpha_o: *o,
                    alpha_d: *d,
                    sites_per_launch: *sites_per_launch,
                },
                (None, None, Some(cfg)) => {
                    let trap = inputs.trap(cfg)?;
                    let drive = drive_or_default(drive.as_deref(), Some(&trap))?;
                    ScalingCoefficients::from_trap_region(&power_breakdown(&trap, drive), *sites_per_launch)?
                }
                _ => {
                    return Err(Error::validation(
                        "scale",
                        "give either --alpha-o and --alpha-d, or --config",
                    ))
                }
            };
            if coeffs.alpha_o < 0.0 || coeffs.alpha_d < 0.0 {
                return Err(Error::validation("alpha", "coefficients must be >= 0"));
            }
            let mut rows = Vec::new();
            for &k in launches {
                let (n, p) = match sites {
                    Some(n) => (*n, scaling_projection(&coeffs, *n, k)?),
                    None => (coeffs.sites_per_launch * k, fixed_launch_projection(&coeffs, k)?),
                };
                rows.push((k, n, p));
            }
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let mut out = String::from("launches,sites,total_w\n");
                    for (k, n, p) in &rows {
                        let _ = writeln!(out, "{k},{n},{}", num(*p));
                    }
                    (Format::Csv, out)
                }
                Format::Json => {
                    let rows: Vec<_> = rows
                        .iter()
                        .map(|(k, n, p)| json!({"launches": k, "sites": n, "total_w": p}))
                        .collect();
                    (Format::Json, json_body(json!({"coefficients": coeffs, "rows": rows})))
                }
                f => return Err(reject_format("scale", f)),
            }
        }
        Command::Pseudo {
            config,
            drive,
            species: sp,
            lambda,
            alpha,
        } => {
            let trap = config.as_deref().map(|c| inputs.trap(c)).transpose()?;
            let drive = drive_or_default(drive.as_deref(), trap.as_ref())?;
            let ion = match (sp, &trap) {
                (Some(name), _) => species(name)?,
                (None, Some(t)) => t.species.clone(),
                (None, None) => IonSpecies::ca40(),
            };
            let mut pseudo = trap.as_ref().map(|t| t.pseudo).unwrap_or(PseudoParams {
                lambda: 124e-6,
                alpha_depth: 0.023,
            });
            if let Some(l) = lambda {
                pseudo.lambda = parse_quantity(l, "m")?;
            }
            if let Some(a) = alpha {
                pseudo.alpha_depth = *a;
            }
            pseudo.validate()?;
            let report = pseudo_report(&ion, drive, &pseudo);
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => (Format::Json, json_body(serde_json::to_value(report).unwrap())),
                f => return Err(reject_format("pseudo", f)),
            }
        }
        Command::Clip {
            config,
            wavelength,
            waist,
            edge_distance,
            edge_height,
        } => {
            let trap = config.as_deref().map(|c| inputs.trap(c)).transpose()?;
            let beam = BeamSpec::new(parse_quantity(wavelength, "m")?, parse_quantity(waist, "m")?);
            beam.validate()?;
            let geometry = trap.as_ref().map(|t| t.geometry);
            let distance = match (edge_distance, geometry) {
                (Some(d), _) => parse_quantity(d, "m")?,
                (None, Some(g)) => g.isthmus_half_width,
                (None, None) => 825e-6,
            };
            let height = match (edge_height, geometry) {
                (Some(h), _) => parse_quantity(h, "m")?,
                (None, Some(g)) => g.ion_height_above_control,
                (None, None) => 72.1e-6,
            };
            if !(distance > 0.0 && height > 0.0) {
                return Err(Error::validation("clip", "edge distance and height must be > 0"));
            }
            let report = clip_report(&beam, height, distance);
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => (Format::Json, json_body(serde_json::to_value(report).unwrap())),
                f => return Err(reject_format("clip", f)),
            }
        }
        Command::Heating {
            noise,
            species: sp,
            at,
            sweep,
        } => {
            let cfg = inputs.noise(noise)?;
            let ion = match sp {
                Some(name) => species(name)?,
                None => cfg.species()?,
            };
            let freqs = match (at, sweep.parse()?) {
                (Some(f), _) => {
                    let f = parse_quantity(f, "Hz")?;
                    if !(f > 0.0) {
                        return Err(Error::validation("at", "frequency must be > 0"));
                    }
                    vec![f]
                }
                (None, Some(s)) => s.frequencies(),
                (None, None) => Sweep {
                    start_hz: 1e6,
                    stop_hz: 5e6,
                    points: 9,
                    log_spacing: false,
                }
                .frequencies(),
            };
            let report = budget_report(&ion, &freqs, &cfg.sources);
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => (Format::Csv, report.to_csv()),
                Format::Json => (Format::Json, json_body(serde_json::to_value(&report).unwrap())),
                Format::Svg => {
                    const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
                    let columns: Vec<Vec<(f64, f64)>> = (0..report.sources.len())
                        .map(|i| report.rows.iter().map(|r| (r.frequency_hz, r.per_source[i])).collect())
                        .chain(std::iter::once(
                            report.rows.iter().map(|r| (r.frequency_hz, r.total)).collect(),
                        ))
                        .collect();
                    let labels: Vec<&str> = report
                        .sources
                        .iter()
                        .map(String::as_str)
                        .chain(std::iter::once("total"))
                        .collect();
                    let series: Vec<Series> = columns
                        .iter()
                        .zip(&labels)
                        .enumerate()
                        .map(|(i, (pts, label))| Series {
                            label,
                            color: if *label == "total" { "black" } else { COLORS[i % COLORS.len()] },
                            points: pts,
                            line: true,
                        })
                        .collect();
                    (
                        Format::Svg,
                        log_log_svg(
                            &format!("Heating budget: {}", cfg.name),
                            "secular frequency (Hz)",
                            "heating rate (quanta/s)",
                            &series,
                        ),
                    )
                }
            }
        }
        Command::Fit { data } => {
            inputs.file(data)?;
            let dataset = HeatingDataset::from_csv_path(data)?;
            let fit = fit_power_law(&dataset)?;
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => (Format::Json, json_body(serde_json::to_value(fit).unwrap())),
                Format::Csv => (
                    Format::Csv,
                    format!(
                        "exponent,exponent_stderr,log_amplitude,points\n{},{},{},{}\n",
                        num(fit.exponent),
                        num(fit.exponent_stderr),
                        num(fit.log_amplitude),
                        fit.points
                    ),
                ),
                Format::Svg => {
                    let pts: Vec<(f64, f64)> = dataset.points().iter().map(|p| (p.frequency, p.rate)).collect();
                    let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
                    let hi = pts.iter().map(|p| p.0).fold(0.0, f64::max);
                    let line: Vec<(f64, f64)> = (0..=32)
                        .map(|i| {
                            let f = (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / 32.0).exp();
                            (f, fit.predict(f))
                        })
                        .collect();
                    let label = format!("fit: f^({:.2} ± {:.2})", fit.exponent, fit.exponent_stderr);
                    (
                        Format::Svg,
                        log_log_svg(
                            "Heating rate vs. frequency",
                            "frequency (Hz)",
                            "heating rate (quanta/s)",
                            &[
                                Series {
                                    label: "data",
                                    color: "#1f77b4",
                                    points: &pts,
                                    line: false,
                                },
                                Series {
                                    label: &label,
                                    color: "#d62728",
                                    points: &line,
                                    line: true,
                                },
                            ],
                        ),
                    )
                }
            }
        }
        Command::Wiring {
            wiring,
            budget,
            active,
        } => {
            let mut map = inputs.wiring(wiring)?;
            if let Some(b) = budget {
                map.io_budget = *b;
                map.validate()?;
            }
            let check = check_budget(&map);
            let conflicts = conflict_regions(&map, active)?;
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => (
                    Format::Json,
                    json_body(json!({
                        "electrodes": map.electrodes.len(),
                        "signals": check.signals,
                        "io_budget": check.io_budget,
                        "pass": check.pass,
                        "margin": check.margin,
                        "active_regions": active,
                        "conflicts": conflicts,
                    })),
                ),
                f => return Err(reject_format("wiring", f)),
            }
        }
    };
    Ok(Artifact {
        format,
        body,
        inputs: inputs.0,
    })
}

/// Sidecar metadata for an output file. Contains no timestamps.
pub fn sidecar_json(args: &[String], artifact: &Artifact) -> String {
    let inputs: Vec<_> = artifact
        .inputs
        .iter()
        .map(|(name, sha)| json!({"source": name, "sha256": sha}))
        .collect();
    json_body(json!({
        "tool": "trapbudget",
        "version": env!("CARGO_PKG_VERSION"),
        "args": args,
        "format": artifact.format,
        "output_sha256": sha256_hex(&artifact.body),
        "inputs": inputs,
    }))
}

pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Writes the artifact (and sidecar) or prints it.
pub fn emit(cli: &Cli, args: &[String], artifact: &Artifact) -> Result<()> {
    match &cli.output {
        Some(path) => {
            std::fs::write(path, &artifact.body).map_err(|e| Error::io(path, e))?;
            let meta = sidecar_path(path);
            std::fs::write(&meta, sidecar_json(args, artifact)).map_err(|e| Error::io(&meta, e))?;
        }
        None => print!("{}", artifact.body),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> Result<Artifact> {
        let cli = Cli::try_parse_from(std::iter::once("trapbudget").chain(args.iter().copied())).unwrap();
        execute(&cli)
    }

    #[test]
    fn sweep_spacing() {
        let lin = Sweep::parse("1MHz:3MHz:3", false).unwrap();
        assert_eq!(lin.frequencies(), vec![1e6, 2e6, 3e6]);
        let log = Sweep::parse("1MHz:100MHz:3", true).unwrap().frequencies();
        assert!((log[1] - 1e7).abs() < 1e-3);
        assert_eq!(Sweep::parse("1MHz:3MHz:1", false).unwrap().frequencies(), vec![1e6]);
        assert!(Sweep::parse("3MHz:1MHz:3", false).is_err());
        assert!(Sweep::parse("1MHz:3MHz:0", false).is_err());
        assert!(Sweep::parse("1MHz:3MHz", false).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Precondition("x".into())), 2);
        assert_eq!(exit_code(&Error::Numerical("x".into())), 3);
        let io = Error::io("p", std::io::Error::other("x"));
        assert_eq!(exit_code(&io), 4);
        let j: serde_json::Value = serde_json::from_str(&error_json(&io)).unwrap();
        assert_eq!(j["error"]["kind"], "io");
    }

    #[test]
    fn unknown_config_is_config_error() {
        let e = run(&["power", "--config", "no_such_trap"]).unwrap_err();
        assert_eq!(exit_code(&e), 2);
    }

    #[test]
    fn format_rejected() {
        let e = run(&["pseudo", "--format", "csv"]).unwrap_err();
        assert_eq!(exit_code(&e), 2);
    }

    #[test]
    fn version_lists_bundles() {
        let v = version_text();
        assert!(v.contains("enchilada_solid"));
        assert!(v.contains("enchilada_wiring"));
        assert_eq!(v.lines().count(), 1 + 5);
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(sidecar_path(Path::new("/tmp/a.csv")), PathBuf::from("/tmp/a.csv.meta.json"));
    }
}
