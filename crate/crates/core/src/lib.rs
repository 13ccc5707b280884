//! Design budgets for surface-electrode ion traps: RF power dissipation,
//! pseudopotential metrics, side optical access, electrode co-wiring and the
//! electric-field noise budget behind motional heating.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod constants;
pub mod error;
pub mod noise_budget;
pub mod optics;
pub mod plot;
pub mod pseudopotential;
pub mod rf_power;
pub mod trap_model;
pub mod units;
pub mod wiring;

pub use error::{Error, Result};
pub use pseudopotential::PseudoParams;
pub use rf_power::RfDrive;
pub use trap_model::{IonSpecies, TrapDescription};
