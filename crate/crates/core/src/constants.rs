//! Physical constants (CODATA 2018).

/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
/// Unified atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Relative permittivity assumed for SiO₂ when a config omits it.
pub const SIO2_RELATIVE_PERMITTIVITY: f64 = 3.9;
/// Default oxide loss tangent.
pub const SIO2_LOSS_TANGENT: f64 = 1.0e-3;
