//! Physical constants (CODATA 2018) and the map between SI and reduced units.
//!
//! Reduced units take the lattice spacing `d`, the ion mass `M` and the
//! frequency `ω_c = √(Q²/(4πε₀Md³))` as unity. Coupling constants `γ` are then
//! pure numbers and the band scale is `ω₀ = 1/(2ω̄)`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
pub const VACUUM_PERMEABILITY: f64 = 1.256_637_062_12e-6;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const PLANCK: f64 = 6.626_070_15e-34;
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Coulomb constant `1/(4πε₀)`.
pub fn coulomb_constant() -> f64 {
    1.0 / (4.0 * PI * VACUUM_PERMITTIVITY)
}

/// Scale factors between reduced and SI units for one ion species and spacing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReducedUnits {
    /// Ion charge in coulomb.
    pub charge: f64,
    /// Ion mass in kilogram.
    pub mass: f64,
    /// Lattice spacing in metre.
    pub spacing: f64,
}

impl ReducedUnits {
    pub fn new(charge: f64, mass: f64, spacing: f64) -> Result<Self> {
        let u = ReducedUnits {
            charge,
            mass,
            spacing,
        };
        u.validate()?;
        Ok(u)
    }

    /// ⁹Be⁺ at 30 μm.
    pub fn beryllium() -> Self {
        ReducedUnits {
            charge: ELEMENTARY_CHARGE,
            mass: 9.0 * ATOMIC_MASS_UNIT,
            spacing: 30e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.charge != 0.0 && self.charge.is_finite()) {
            return Err(Error::Config("ion charge must be finite and nonzero".into()));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::Config("ion mass must be positive".into()));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(Error::Config("lattice spacing must be positive".into()));
        }
        Ok(())
    }

    /// `ω_c` in rad/s.
    pub fn frequency(&self) -> f64 {
        (coulomb_constant() * self.charge * self.charge / (self.mass * self.spacing.powi(3))).sqrt()
    }

    /// Energy unit `Mω_c²d² = Q²/(4πε₀d)` in joule.
    pub fn energy(&self) -> f64 {
        coulomb_constant() * self.charge * self.charge / self.spacing
    }

    /// Force unit `Mω_c²d` in newton.
    pub fn force(&self) -> f64 {
        self.energy() / self.spacing
    }

    /// `ħ` in units of `Mω_c d²`.
    pub fn hbar(&self) -> f64 {
        HBAR / (self.mass * self.frequency() * self.spacing * self.spacing)
    }

    /// Angular frequency in rad/s to reduced units.
    pub fn to_reduced_frequency(&self, omega: f64) -> f64 {
        omega / self.frequency()
    }

    pub fn to_si_frequency(&self, omega: f64) -> f64 {
        omega * self.frequency()
    }
}

/// Energy in joule to electronvolt.
pub fn joule_to_ev(e: f64) -> f64 {
    e / ELEMENTARY_CHARGE
}

/// Energy in joule to kelvin.
pub fn joule_to_kelvin(e: f64) -> f64 {
    e / BOLTZMANN
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beryllium_design_frequency() {
        let u = ReducedUnits::beryllium();
        let w = u.to_reduced_frequency(2.0 * PI * 5e6);
        assert!((w - 41.55).abs() < 0.01, "{w}");
        assert!((u.to_si_frequency(w) / (2.0 * PI * 5e6) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn unit_consistency() {
        let u = ReducedUnits::beryllium();
        let m_w2_d2 = u.mass * u.frequency().powi(2) * u.spacing.powi(2);
        assert!((m_w2_d2 / u.energy() - 1.0).abs() < 1e-12);
        assert!((PLANCK / (2.0 * PI) / HBAR - 1.0).abs() < 1e-9);
        assert!(ReducedUnits::new(1.0, -1.0, 1.0).is_err());
    }
}
