//! Ohmic and dielectric RF dissipation of the trap electrode and lead.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::trap_model::TrapDescription;

/// RF drive: peak amplitude in volts and angular frequency in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfDrive {
    pub amplitude: f64,
    pub frequency: f64,
    // kept so values given in Hz print back unchanged
    hz: f64,
}

impl RfDrive {
    pub fn new(amplitude: f64, angular_frequency: f64) -> Self {
        Self {
            amplitude,
            frequency: angular_frequency,
            hz: angular_frequency / (2.0 * PI),
        }
    }

    pub fn from_hz(amplitude: f64, frequency_hz: f64) -> Self {
        Self {
            amplitude,
            frequency: 2.0 * PI * frequency_hz,
            hz: frequency_hz,
        }
    }

    pub fn frequency_hz(&self) -> f64 {
        self.hz
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return Err(Error::validation(
                "drive.amplitude_v",
                format!("must be >= 0, got {}", self.amplitude),
            ));
        }
        if !(self.frequency > 0.0) || !self.frequency.is_finite() {
            return Err(Error::validation(
                "drive.frequency_hz",
                format!("must be > 0, got {}", self.frequency_hz()),
            ));
        }
        Ok(())
    }

    fn v2(&self) -> f64 {
        self.amplitude * self.amplitude
    }
}

/// Dissipated power split by mechanism and region, watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerBreakdown {
    pub ohmic_trap: f64,
    pub ohmic_lead: f64,
    pub dielectric_trap: f64,
    pub dielectric_lead: f64,
    pub total: f64,
}

impl PowerBreakdown {
    fn from_parts(ohmic_trap: f64, ohmic_lead: f64, dielectric_trap: f64, dielectric_lead: f64) -> Self {
        Self {
            ohmic_trap,
            ohmic_lead,
            dielectric_trap,
            dielectric_lead,
            total: ohmic_trap + ohmic_lead + dielectric_trap + dielectric_lead,
        }
    }

    pub fn ohmic(&self) -> f64 {
        self.ohmic_trap + self.ohmic_lead
    }

    pub fn dielectric(&self) -> f64 {
        self.dielectric_trap + self.dielectric_lead
    }
}

/// Ohmic loss of a uniform distributed RC electrode driven at one end:
/// ½ V² Ω² C² R / 3.
pub fn ohmic_power_distributed(drive: RfDrive, c: f64, r: f64) -> f64 {
    0.5 * drive.v2() * drive.frequency.powi(2) * c * c * r / 3.0
}

/// Ohmic loss in a lumped lead resistance that carries the charging current
/// of all downstream capacitance: ½ V² Ω² C² R.
pub fn ohmic_power_lead(drive: RfDrive, c_total_downstream: f64, r_lead: f64) -> f64 {
    0.5 * drive.v2() * drive.frequency.powi(2) * c_total_downstream.powi(2) * r_lead
}

/// Dielectric loss in oxide with capacitance `c_ox`: ½ V² Ω C_ox tan δ.
pub fn dielectric_power(drive: RfDrive, c_ox: f64, tan_delta: f64) -> f64 {
    0.5 * drive.v2() * drive.frequency * c_ox * tan_delta
}

pub fn power_breakdown(trap: &TrapDescription, drive: RfDrive) -> PowerBreakdown {
    let m = &trap.rf_model;
    PowerBreakdown::from_parts(
        ohmic_power_distributed(drive, m.c_trap, m.r_trap),
        ohmic_power_lead(drive, m.c_total(), m.r_lead),
        dielectric_power(drive, m.c_ox_trap, m.tan_delta),
        dielectric_power(drive, m.c_ox_lead, m.tan_delta),
    )
}

/// Phasor solution of an RC ladder driven at one end and open at the other.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderSolution {
    /// Time-averaged power summed over the series resistors.
    pub resistor_power: f64,
    /// ½ Re(V I*) at the driven port.
    pub input_power: f64,
    pub input_impedance: Complex64,
}

/// Solves an `n_segments` ladder of series `r/n` resistors and shunt `c/n`
/// capacitors at the drive frequency by sequential impedance reduction from
/// the open end, then propagates currents forward from the source.
pub fn solve_ladder(drive: RfDrive, c: f64, r: f64, n_segments: usize) -> Result<LadderSolution> {
    if n_segments == 0 {
        return Err(Error::Precondition("n_segments must be >= 1".into()));
    }
    if !(c >= 0.0 && r >= 0.0) {
        return Err(Error::Precondition(format!(
            "c and r must be >= 0, got c={c}, r={r}"
        )));
    }
    if c == 0.0 || drive.amplitude == 0.0 {
        // open circuit or no drive: no current flows
        return Ok(LadderSolution {
            resistor_power: 0.0,
            input_power: 0.0,
            input_impedance: Complex64::new(f64::INFINITY, 0.0),
        });
    }
    let n = n_segments as f64;
    let r_seg = Complex64::new(r / n, 0.0);
    let z_shunt = Complex64::new(0.0, -1.0 / (drive.frequency * c / n));

    // downstream[k]: impedance from node k+1 to ground, including everything beyond
    let mut downstream = vec![Complex64::new(0.0, 0.0); n_segments];
    let mut z = z_shunt;
    downstream[n_segments - 1] = z;
    for k in (0..n_segments - 1).rev() {
        let branch = r_seg + z;
        z = z_shunt * branch / (z_shunt + branch);
        downstream[k] = z;
    }
    let z_in = r_seg + downstream[0];
    if !z_in.re.is_finite() || !z_in.im.is_finite() || z_in.norm() == 0.0 {
        return Err(Error::Numerical(format!(
            "ladder input impedance is not finite and nonzero: {z_in}"
        )));
    }

    let source = Complex64::new(drive.amplitude, 0.0);
    let mut node_v = source;
    let mut resistor_power = 0.0;
    let mut input_current = Complex64::new(0.0, 0.0);
    for (k, z_down) in downstream.iter().enumerate() {
        let i = node_v / (r_seg + z_down);
        if k == 0 {
            input_current = i;
        }
        resistor_power += 0.5 * i.norm_sqr() * r_seg.re;
        node_v -= i * r_seg;
    }
    if !resistor_power.is_finite() {
        return Err(Error::Numerical("ladder currents overflowed".into()));
    }
    Ok(LadderSolution {
        resistor_power,
        input_power: 0.5 * (source * input_current.conj()).re,
        input_impedance: z_in,
    })
}

/// Power dissipated in the resistors of an `n_segments` RC ladder; the
/// numerical check on the 1/3 distributed factor.
pub fn ladder_power_oracle(drive: RfDrive, c: f64, r: f64, n_segments: usize) -> Result<f64> {
    solve_ladder(drive, c, r, n_segments).map(|s| s.resistor_power)
}

/// Per-site loss coefficients for projecting total RF power vs. trap size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingCoefficients {
    /// W per site³.
    pub alpha_o: f64,
    /// W per site.
    pub alpha_d: f64,
    pub sites_per_launch: usize,
}

impl ScalingCoefficients {
    /// Coefficients from the trap-region losses of a design holding `n_sites`.
    /// Lead losses are excluded since they do not grow with the rail.
    pub fn from_trap_region(breakdown: &PowerBreakdown, n_sites: usize) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::Precondition("n_sites must be >= 1".into()));
        }
        let n = n_sites as f64;
        Ok(Self {
            alpha_o: breakdown.ohmic_trap / n.powi(3),
            alpha_d: breakdown.dielectric_trap / n,
            sites_per_launch: n_sites,
        })
    }
}

/// n_launches · (α_o (n/k)³ + α_d (n/k)).
pub fn scaling_projection(coeffs: &ScalingCoefficients, n_sites: usize, n_launches: usize) -> Result<f64> {
    if n_launches == 0 {
        return Err(Error::Precondition("n_launches must be >= 1".into()));
    }
    if !n_sites.is_multiple_of(n_launches) {
        return Err(Error::Precondition(format!(
            "{n_sites} sites cannot be split evenly over {n_launches} launches"
        )));
    }
    let per_launch = (n_sites / n_launches) as f64;
    Ok(n_launches as f64 * (coeffs.alpha_o * per_launch.powi(3) + coeffs.alpha_d * per_launch))
}

/// Projection with `coeffs.sites_per_launch` held fixed.
pub fn fixed_launch_projection(coeffs: &ScalingCoefficients, n_launches: usize) -> Result<f64> {
    scaling_projection(coeffs, coeffs.sites_per_launch * n_launches, n_launches)
}
