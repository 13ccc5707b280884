//! Geometric and electrical description of a surface trap, and its config
//! file format.
//!
//! Configs are TOML. Lengths are written in micrometers, capacitances in
//! picofarads, resistances in ohms, frequencies in hertz, voltages in volts
//! (peak) and masses in kilograms. Everything is converted to SI on load.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constants::{
    ELEMENTARY_CHARGE, SIO2_LOSS_TANGENT, SIO2_RELATIVE_PERMITTIVITY, VACUUM_PERMITTIVITY,
};
use crate::error::{Error, Result};
use crate::pseudopotential::PseudoParams;
use crate::rf_power::RfDrive;

const UM: f64 = 1e-6;
const PF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Material {
    Metal,
    Oxide,
    Vacuum,
}

/// What a metal layer is used for. Only `Rf` and `Ground` are required.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerRole {
    Rf,
    Ground,
    Control,
    Shield,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub name: String,
    /// meters
    pub thickness: f64,
    pub material: Material,
    /// Set for insulators only (vacuum is 1).
    pub relative_permittivity: Option<f64>,
    pub role: Option<LayerRole>,
}

/// Metal and insulator layers ordered bottom to top.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStack {
    pub layers: Vec<Layer>,
}

impl LayerStack {
    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::validation("layers", "stack is empty"));
        }
        for (i, layer) in self.layers.iter().enumerate() {
            let field = format!("layers[{i}] ({})", layer.name);
            if !(layer.thickness > 0.0) || !layer.thickness.is_finite() {
                return Err(Error::validation(
                    format!("{field}.thickness"),
                    format!("must be > 0, got {} m", layer.thickness),
                ));
            }
            match (layer.material, layer.relative_permittivity) {
                (Material::Metal, Some(_)) => {
                    return Err(Error::validation(
                        format!("{field}.relative_permittivity"),
                        "metal layers carry no permittivity",
                    ))
                }
                (Material::Oxide | Material::Vacuum, Some(er)) if !(er >= 1.0) => {
                    return Err(Error::validation(
                        format!("{field}.relative_permittivity"),
                        format!("must be >= 1, got {er}"),
                    ))
                }
                _ => {}
            }
            if layer.role.is_some() && layer.material != Material::Metal {
                return Err(Error::validation(
                    format!("{field}.role"),
                    "only metal layers take a role",
                ));
            }
            if let Some(next) = self.layers.get(i + 1) {
                let metal_here = layer.material == Material::Metal;
                let metal_next = next.material == Material::Metal;
                if metal_here == metal_next {
                    return Err(Error::validation(
                        format!("{field}.material"),
                        format!(
                            "metal and insulator layers must alternate; `{}` follows `{}`",
                            next.name, layer.name
                        ),
                    ));
                }
            }
        }
        for (role, label) in [(LayerRole::Rf, "rf"), (LayerRole::Ground, "ground")] {
            if !self.layers.iter().any(|l| l.role == Some(role)) {
                return Err(Error::validation(
                    "layers",
                    format!("no metal layer has role `{label}`"),
                ));
            }
        }
        Ok(())
    }

    pub fn metal_layers(&self) -> impl Iterator<Item = &Layer> {
        self.layers.iter().filter(|l| l.material == Material::Metal)
    }

    pub fn layer_with_role(&self, role: LayerRole) -> Option<&Layer> {
        self.layers.iter().find(|l| l.role == Some(role))
    }

    /// Insulator layers strictly between the ground-reference and RF
    /// metals, as a dielectric fill for [`plate_capacitance_estimate`].
    pub fn fill_between_ground_and_rf(&self) -> Vec<DielectricFill> {
        let idx = |role| self.layers.iter().position(|l| l.role == Some(role));
        let (Some(g), Some(rf)) = (idx(LayerRole::Ground), idx(LayerRole::Rf)) else {
            return Vec::new();
        };
        let (lo, hi) = if g < rf { (g, rf) } else { (rf, g) };
        self.layers[lo + 1..hi]
            .iter()
            .filter(|l| l.material != Material::Metal)
            .map(|l| DielectricFill {
                thickness: l.thickness,
                relative_permittivity: l.relative_permittivity.unwrap_or(match l.material {
                    Material::Vacuum => 1.0,
                    _ => SIO2_RELATIVE_PERMITTIVITY,
                }),
            })
            .collect()
    }
}

/// Lumped/distributed electrical parameters of the RF electrode and its lead.
/// All values SI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfElectrodeModel {
    /// Trap-region RF-to-ground capacitance.
    pub c_trap: f64,
    pub c_lead: f64,
    /// Part of `c_trap` that is supported by oxide.
    pub c_ox_trap: f64,
    pub c_ox_lead: f64,
    /// End-to-end distributed resistance of the trap RF rail network.
    pub r_trap: f64,
    /// Lumped lead resistance.
    pub r_lead: f64,
    pub tan_delta: f64,
    /// Fraction of the RF footprint still supported by oxide; 1.0 is solid.
    pub perforation_fraction: f64,
}

impl RfElectrodeModel {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("rf_model.c_trap_pf", self.c_trap),
            ("rf_model.c_lead_pf", self.c_lead),
            ("rf_model.c_ox_trap_pf", self.c_ox_trap),
            ("rf_model.c_ox_lead_pf", self.c_ox_lead),
            ("rf_model.r_trap_ohm", self.r_trap),
            ("rf_model.r_lead_ohm", self.r_lead),
        ];
        for (field, v) in nonneg {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::validation(field, format!("must be >= 0, got {v}")));
            }
        }
        if self.c_ox_trap > self.c_trap {
            return Err(Error::validation(
                "rf_model.c_ox_trap_pf",
                "oxide-supported capacitance exceeds c_trap",
            ));
        }
        if self.c_ox_lead > self.c_lead {
            return Err(Error::validation(
                "rf_model.c_ox_lead_pf",
                "oxide-supported capacitance exceeds c_lead",
            ));
        }
        if !(0.0..=0.1).contains(&self.tan_delta) {
            return Err(Error::validation(
                "rf_model.tan_delta",
                format!("must lie in [0, 0.1], got {}", self.tan_delta),
            ));
        }
        if !(0.0..=1.0).contains(&self.perforation_fraction) {
            return Err(Error::validation(
                "rf_model.perforation_fraction",
                format!("must lie in [0, 1], got {}", self.perforation_fraction),
            ));
        }
        Ok(())
    }

    /// Total RF capacitance seen by the lead.
    pub fn c_total(&self) -> f64 {
        self.c_trap + self.c_lead
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IonSpecies {
    pub name: String,
    /// kg
    pub mass: f64,
    /// C
    pub charge: f64,
}

impl IonSpecies {
    /// Singly charged presets: `Ca-40`, `Yb-171`, `Ba-138`.
    pub fn preset(name: &str) -> Option<Self> {
        use crate::constants::ATOMIC_MASS_UNIT as U;
        let (canonical, mass) = match name.to_ascii_lowercase().as_str() {
            "ca-40" | "ca40" | "40ca+" => ("Ca-40", 6.6422e-26),
            "yb-171" | "yb171" | "171yb+" => ("Yb-171", 170.936_325_8 * U),
            "ba-138" | "ba138" | "138ba+" => ("Ba-138", 137.905_247_2 * U),
            _ => return None,
        };
        Some(Self {
            name: canonical.to_string(),
            mass,
            charge: ELEMENTARY_CHARGE,
        })
    }

    pub fn ca40() -> Self {
        Self::preset("Ca-40").unwrap()
    }

    pub fn charge_state(&self) -> f64 {
        self.charge / ELEMENTARY_CHARGE
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) || !self.mass.is_finite() {
            return Err(Error::validation(
                "species.mass_kg",
                format!("must be > 0, got {}", self.mass),
            ));
        }
        let z = self.charge_state();
        if !(z >= 0.5) || (z - z.round()).abs() > 1e-9 {
            return Err(Error::validation(
                "species.charge_e",
                format!("must be a positive multiple of e, got {z} e"),
            ));
        }
        Ok(())
    }
}

/// Lateral and vertical trap dimensions, meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapGeometry {
    pub rf_rail_width: f64,
    pub rf_separation: f64,
    pub ion_height_above_rf: f64,
    pub ion_height_above_control: f64,
    pub isthmus_half_width: f64,
}

impl TrapGeometry {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("geometry.rf_rail_width_um", self.rf_rail_width),
            ("geometry.rf_separation_um", self.rf_separation),
            ("geometry.ion_height_above_rf_um", self.ion_height_above_rf),
            (
                "geometry.ion_height_above_control_um",
                self.ion_height_above_control,
            ),
            ("geometry.isthmus_half_width_um", self.isthmus_half_width),
        ];
        for (field, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::validation(field, format!("must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// True when the RF electrode sits above the control-electrode plane.
    pub fn is_raised_rf(&self) -> bool {
        self.ion_height_above_control > self.ion_height_above_rf
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrapDescription {
    pub name: String,
    pub layer_stack: LayerStack,
    pub rf_model: RfElectrodeModel,
    pub pseudo: PseudoParams,
    pub geometry: TrapGeometry,
    pub species: IonSpecies,
    /// Default drive, if the config carries one.
    pub drive: Option<RfDrive>,
}

impl TrapDescription {
    pub fn validate(&self) -> Result<()> {
        self.layer_stack.validate()?;
        self.rf_model.validate()?;
        self.pseudo.validate()?;
        self.geometry.validate()?;
        self.species.validate()?;
        if let Some(drive) = &self.drive {
            drive.validate()?;
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: TrapFile = toml::from_str(text).map_err(|e| Error::parse("trap config", e))?;
        let trap = file.into_description()?;
        trap.validate()?;
        Ok(trap)
    }

    /// Serializes back to the config format (with the units header).
    pub fn to_toml_string(&self) -> String {
        let file = TrapFile::from_description(self);
        let body = toml::to_string(&file).expect("trap config always serializes");
        format!("{UNITS_HEADER}{body}")
    }
}

/// Loads and validates a trap config from disk.
pub fn load_trap_description(path: impl AsRef<Path>) -> Result<TrapDescription> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    TrapDescription::from_toml_str(&text)
}

pub const UNITS_HEADER: &str = "\
# Units: lengths in micrometers, capacitance in picofarads, resistance in ohms,
# frequency in hertz, voltage in volts (peak), mass in kilograms,
# charge in multiples of the elementary charge.
";

pub const BUNDLED_TRAPS: &[(&str, &str)] = &[
    (
        "enchilada_solid",
        include_str!("../configs/enchilada_solid.toml"),
    ),
    (
        "enchilada_perforated",
        include_str!("../configs/enchilada_perforated.toml"),
    ),
];

/// Returns the bundled trap config called `name`.
pub fn bundled_trap(name: &str) -> Option<TrapDescription> {
    BUNDLED_TRAPS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| TrapDescription::from_toml_str(text).expect("bundled config is valid"))
}

/// One insulating layer of a parallel-plate fill.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DielectricFill {
    pub thickness: f64,
    pub relative_permittivity: f64,
}

/// Fringe-free parallel-plate estimate: per-layer plate capacitances
/// combined in series. Expect ±30% against field-solved values.
pub fn plate_capacitance_estimate(area: f64, gap: f64, fill: &[DielectricFill]) -> Result<f64> {
    if !(area > 0.0) {
        return Err(Error::Precondition(format!("area must be > 0, got {area}")));
    }
    if !(gap > 0.0) {
        return Err(Error::Precondition(format!("gap must be > 0, got {gap}")));
    }
    let total: f64 = fill.iter().map(|l| l.thickness).sum();
    if (total - gap).abs() > 1e-9 * gap {
        return Err(Error::Precondition(format!(
            "layer thicknesses sum to {total} m, gap is {gap} m"
        )));
    }
    // 1/C = Σ t_i / (ε0 ε_i A)
    let inverse: f64 = fill
        .iter()
        .map(|l| l.thickness / (VACUUM_PERMITTIVITY * l.relative_permittivity * area))
        .sum();
    Ok(1.0 / inverse)
}

// ---- file schema ----

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrapFile {
    name: String,
    layers: Vec<LayerFile>,
    rf_model: RfModelFile,
    geometry: GeometryFile,
    pseudo: PseudoFile,
    species: SpeciesFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    drive: Option<DriveFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerFile {
    name: String,
    material: Material,
    thickness_um: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    relative_permittivity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    role: Option<LayerRole>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RfModelFile {
    c_trap_pf: f64,
    c_lead_pf: f64,
    c_ox_trap_pf: f64,
    c_ox_lead_pf: f64,
    r_trap_ohm: f64,
    r_lead_ohm: f64,
    #[serde(default = "default_tan_delta")]
    tan_delta: f64,
    #[serde(default = "default_perforation")]
    perforation_fraction: f64,
}

fn default_tan_delta() -> f64 {
    SIO2_LOSS_TANGENT
}

fn default_perforation() -> f64 {
    1.0
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryFile {
    rf_rail_width_um: f64,
    rf_separation_um: f64,
    ion_height_above_rf_um: f64,
    ion_height_above_control_um: f64,
    isthmus_half_width_um: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PseudoFile {
    lambda_um: f64,
    alpha_depth: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpeciesFile {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mass_kg: Option<f64>,
    #[serde(default = "default_charge")]
    charge_e: u32,
}

fn default_charge() -> u32 {
    1
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DriveFile {
    amplitude_v: f64,
    frequency_hz: f64,
}

impl TrapFile {
    fn into_description(self) -> Result<TrapDescription> {
        let layers = self
            .layers
            .into_iter()
            .map(|l| {
                let relative_permittivity = match l.material {
                    Material::Metal => l.relative_permittivity,
                    Material::Oxide => l.relative_permittivity.or(Some(SIO2_RELATIVE_PERMITTIVITY)),
                    Material::Vacuum => l.relative_permittivity.or(Some(1.0)),
                };
                Layer {
                    name: l.name,
                    thickness: l.thickness_um * UM,
                    material: l.material,
                    relative_permittivity,
                    role: l.role,
                }
            })
            .collect();
        let rf = self.rf_model;
        let species = match self.species.mass_kg {
            Some(mass) => IonSpecies {
                name: self.species.name,
                mass,
                charge: f64::from(self.species.charge_e) * ELEMENTARY_CHARGE,
            },
            None => {
                let mut s = IonSpecies::preset(&self.species.name).ok_or_else(|| {
                    Error::validation(
                        "species.name",
                        format!(
                            "`{}` is not a preset; give mass_kg explicitly",
                            self.species.name
                        ),
                    )
                })?;
                s.charge = f64::from(self.species.charge_e) * ELEMENTARY_CHARGE;
                s
            }
        };
        Ok(TrapDescription {
            name: self.name,
            layer_stack: LayerStack { layers },
            rf_model: RfElectrodeModel {
                c_trap: rf.c_trap_pf * PF,
                c_lead: rf.c_lead_pf * PF,
                c_ox_trap: rf.c_ox_trap_pf * PF,
                c_ox_lead: rf.c_ox_lead_pf * PF,
                r_trap: rf.r_trap_ohm,
                r_lead: rf.r_lead_ohm,
                tan_delta: rf.tan_delta,
                perforation_fraction: rf.perforation_fraction,
            },
            pseudo: PseudoParams {
                lambda: self.pseudo.lambda_um * UM,
                alpha_depth: self.pseudo.alpha_depth,
            },
            geometry: TrapGeometry {
                rf_rail_width: self.geometry.rf_rail_width_um * UM,
                rf_separation: self.geometry.rf_separation_um * UM,
                ion_height_above_rf: self.geometry.ion_height_above_rf_um * UM,
                ion_height_above_control: self.geometry.ion_height_above_control_um * UM,
                isthmus_half_width: self.geometry.isthmus_half_width_um * UM,
            },
            species,
            drive: self
                .drive
                .map(|d| RfDrive::from_hz(d.amplitude_v, d.frequency_hz)),
        })
    }

    fn from_description(t: &TrapDescription) -> Self {
        let to_um = |m: f64| m / UM;
        let to_pf = |f: f64| f / PF;
        TrapFile {
            name: t.name.clone(),
            layers: t
                .layer_stack
                .layers
                .iter()
                .map(|l| LayerFile {
                    name: l.name.clone(),
                    material: l.material,
                    thickness_um: to_um(l.thickness),
                    relative_permittivity: l.relative_permittivity,
                    role: l.role,
                })
                .collect(),
            rf_model: RfModelFile {
                c_trap_pf: to_pf(t.rf_model.c_trap),
                c_lead_pf: to_pf(t.rf_model.c_lead),
                c_ox_trap_pf: to_pf(t.rf_model.c_ox_trap),
                c_ox_lead_pf: to_pf(t.rf_model.c_ox_lead),
                r_trap_ohm: t.rf_model.r_trap,
                r_lead_ohm: t.rf_model.r_lead,
                tan_delta: t.rf_model.tan_delta,
                perforation_fraction: t.rf_model.perforation_fraction,
            },
            geometry: GeometryFile {
                rf_rail_width_um: to_um(t.geometry.rf_rail_width),
                rf_separation_um: to_um(t.geometry.rf_separation),
                ion_height_above_rf_um: to_um(t.geometry.ion_height_above_rf),
                ion_height_above_control_um: to_um(t.geometry.ion_height_above_control),
                isthmus_half_width_um: to_um(t.geometry.isthmus_half_width),
            },
            pseudo: PseudoFile {
                lambda_um: to_um(t.pseudo.lambda),
                alpha_depth: t.pseudo.alpha_depth,
            },
            species: SpeciesFile {
                name: t.species.name.clone(),
                mass_kg: Some(t.species.mass),
                charge_e: t.species.charge_state().round() as u32,
            },
            drive: t.drive.map(|d| DriveFile {
                amplitude_v: d.amplitude,
                frequency_hz: d.frequency_hz(),
            }),
        }
    }
}
