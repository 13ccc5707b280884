//! Radial secular frequency, trap depth and Mathieu q from the trap's
//! characteristic distance and the RF drive.

use std::f64::consts::{PI, SQRT_2};

use serde::Serialize;

use crate::constants::ELEMENTARY_CHARGE;
use crate::error::{Error, Result};
use crate::rf_power::RfDrive;
use crate::trap_model::IonSpecies;

/// Above this q the pseudopotential approximation is flagged as marginal.
pub const MATHIEU_Q_WARNING: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseudoParams {
    /// Characteristic distance Λ, meters: 1/Λ² is the RF potential
    /// curvature per volt at the pseudopotential minimum.
    pub lambda: f64,
    /// Depth efficiency relative to an ideal hyperbolic trap, in (0, 1].
    pub alpha_depth: f64,
}

impl PseudoParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(Error::validation(
                "pseudo.lambda_um",
                format!("must be > 0, got {}", self.lambda),
            ));
        }
        if !(self.alpha_depth > 0.0 && self.alpha_depth <= 1.0) {
            return Err(Error::validation(
                "pseudo.alpha_depth",
                format!("must lie in (0, 1], got {}", self.alpha_depth),
            ));
        }
        Ok(())
    }
}

/// ω/2π with ω = qV / (√2 Ω m Λ²).
pub fn radial_frequency(species: &IonSpecies, drive: RfDrive, pseudo: &PseudoParams) -> f64 {
    let omega = species.charge * drive.amplitude
        / (SQRT_2 * drive.frequency * species.mass * pseudo.lambda.powi(2));
    omega / (2.0 * PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrapDepth {
    pub joules: f64,
    pub ev: f64,
}

/// ½ α m ω² Λ² for a secular frequency given in hertz.
pub fn trap_depth(species: &IonSpecies, secular_hz: f64, pseudo: &PseudoParams) -> TrapDepth {
    let omega = 2.0 * PI * secular_hz;
    let joules = 0.5 * pseudo.alpha_depth * species.mass * omega * omega * pseudo.lambda.powi(2);
    TrapDepth {
        joules,
        ev: joules / ELEMENTARY_CHARGE,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MathieuQ {
    pub q: f64,
    /// Set when q exceeds [`MATHIEU_Q_WARNING`].
    pub warning: bool,
}

/// q = 2√2 ω_radial / Ω.
pub fn mathieu_q(species: &IonSpecies, drive: RfDrive, pseudo: &PseudoParams) -> MathieuQ {
    let omega_r = 2.0 * PI * radial_frequency(species, drive, pseudo);
    let q = 2.0 * SQRT_2 * omega_r / drive.frequency;
    MathieuQ {
        q,
        warning: q > MATHIEU_Q_WARNING,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PseudoReport {
    pub radial_hz: f64,
    pub depth_ev: f64,
    pub mathieu_q: f64,
    pub stable: bool,
}

pub fn pseudo_report(species: &IonSpecies, drive: RfDrive, pseudo: &PseudoParams) -> PseudoReport {
    let radial_hz = radial_frequency(species, drive, pseudo);
    let q = mathieu_q(species, drive, pseudo);
    PseudoReport {
        radial_hz,
        depth_ev: trap_depth(species, radial_hz, pseudo).ev,
        mathieu_q: q.q,
        stable: !q.warning,
    }
}
