//! Side optical access through the isthmus and Gaussian-beam clipping at
//! the chip edge.

use std::f64::consts::{PI, SQRT_2};

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSpec {
    /// meters
    pub wavelength: f64,
    /// 1/e² intensity radius at the focus, meters.
    pub waist: f64,
    pub focus_at_ion: bool,
}

impl BeamSpec {
    pub fn new(wavelength: f64, waist: f64) -> Self {
        Self {
            wavelength,
            waist,
            focus_at_ion: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength > 0.0) {
            return Err(Error::validation("beam.wavelength", "must be > 0"));
        }
        if !(self.waist > 0.0) {
            return Err(Error::validation("beam.waist", "must be > 0"));
        }
        Ok(())
    }

    pub fn rayleigh_range(&self) -> f64 {
        PI * self.waist * self.waist / self.wavelength
    }

    /// 1/e² radius at distance `z` from the waist.
    pub fn radius_at(&self, z: f64) -> f64 {
        self.waist * (1.0 + (z / self.rayleigh_range()).powi(2)).sqrt()
    }
}

/// Largest NA of a beam skimming the surface: sin(atan(height / half_width)).
pub fn max_side_na(ion_height: f64, half_width: f64) -> f64 {
    (ion_height / half_width).atan().sin()
}

/// Far-field divergence half-angle λ/(π w₀).
pub fn gaussian_na(beam: &BeamSpec) -> f64 {
    beam.wavelength / (PI * beam.waist)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClipResult {
    pub fraction: f64,
    pub db: f64,
}

/// Fraction of beam power that falls below the chip surface at the edge:
/// ½ erfc(√2 h / w(z)).
pub fn edge_clip_fraction(beam: &BeamSpec, edge_distance: f64, edge_height: f64) -> ClipResult {
    let w = beam.radius_at(edge_distance);
    let fraction = 0.5 * libm::erfc(SQRT_2 * edge_height / w);
    ClipResult {
        fraction,
        db: 10.0 * fraction.log10(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClipReport {
    pub na_beam: f64,
    pub na_max: f64,
    pub clip_fraction: f64,
    pub clip_db: f64,
}

/// Beam NA, geometric NA limit and clipping for a beam focused on an ion
/// `ion_height` above the clipping plane, `half_width` from the edge.
pub fn clip_report(beam: &BeamSpec, ion_height: f64, half_width: f64) -> ClipReport {
    let clip = edge_clip_fraction(beam, half_width, ion_height);
    ClipReport {
        na_beam: gaussian_na(beam),
        na_max: max_side_na(ion_height, half_width),
        clip_fraction: clip.fraction,
        clip_db: clip.db,
    }
}
