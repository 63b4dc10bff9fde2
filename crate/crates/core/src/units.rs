//! Conversion between the dimensionless energy unit `ħ²/(2 m_e d²)` and SI / eV.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Electron rest mass, kg.
    pub electron_mass: f64,
    /// Electron-volt, J.
    pub electron_volt: f64,
}

/// CODATA 2018 values (ħ and eV are exact since the 2019 SI redefinition).
pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
    hbar: 1.054_571_817e-34,
    electron_mass: 9.109_383_701_5e-31,
    electron_volt: 1.602_176_634e-19,
};

/// Order of magnitude of `d` quoted in the literature for a 1 meV gap.
pub const QUOTED_EXTENSION_ORDER_M: f64 = 1e-6;

impl Default for PhysicalConstants {
    fn default() -> Self {
        CODATA_2018
    }
}

/// `(symbol, value, unit, description)` rows for display.
pub fn constants_table(c: &PhysicalConstants) -> Vec<(&'static str, f64, &'static str, &'static str)> {
    vec![
        ("hbar", c.hbar, "J s", "reduced Planck constant"),
        ("m_e", c.electron_mass, "kg", "electron mass"),
        ("eV", c.electron_volt, "J", "electron-volt"),
        ("hbar^2/(2 m_e)", c.hbar * c.hbar / (2.0 * c.electron_mass), "J m^2", "energy unit times d^2"),
    ]
}

fn check_extension(d: f64) -> Result<()> {
    if d.is_finite() && d > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("pair extension must be positive, got {d} m")))
    }
}

impl PhysicalConstants {
    /// `ħ²/(2 m_e d²)` in joules.
    pub fn energy_unit(&self, d: f64) -> Result<f64> {
        check_extension(d)?;
        Ok(self.hbar * self.hbar / (2.0 * self.electron_mass * d * d))
    }

    /// Dimensionless energy to joules.
    pub fn to_physical(&self, energy: f64, d: f64) -> Result<f64> {
        Ok(energy * self.energy_unit(d)?)
    }

    pub fn to_physical_ev(&self, energy: f64, d: f64) -> Result<f64> {
        Ok(self.to_physical(energy, d)? / self.electron_volt)
    }

    /// Joules to the dimensionless unit.
    pub fn from_physical(&self, joules: f64, d: f64) -> Result<f64> {
        Ok(joules / self.energy_unit(d)?)
    }

    /// `ħ²π²/(m_e d²)`, the continuum threshold, in eV.
    pub fn threshold_ev(&self, d: f64) -> Result<f64> {
        Ok(2.0 * PI * PI * self.energy_unit(d)? / self.electron_volt)
    }

    /// Gap in eV for a pair of extension `d`, where `gap_ratio` is the gap
    /// as a fraction of the threshold.
    pub fn gap_from_d(&self, d: f64, gap_ratio: f64) -> Result<f64> {
        check_ratio(gap_ratio)?;
        Ok(gap_ratio * self.threshold_ev(d)?)
    }

    /// Extension `d` in meters for which the gap equals `gap_ev`.
    pub fn d_from_gap(&self, gap_ev: f64, gap_ratio: f64) -> Result<f64> {
        if !(gap_ev.is_finite() && gap_ev > 0.0) {
            return Err(Error::Domain(format!("gap must be positive, got {gap_ev} eV")));
        }
        check_ratio(gap_ratio)?;
        let scale = self.hbar * self.hbar * PI * PI / self.electron_mass;
        Ok((gap_ratio * scale / (gap_ev * self.electron_volt)).sqrt())
    }
}

fn check_ratio(r: f64) -> Result<()> {
    if (0.0..=1.0).contains(&r) {
        Ok(())
    } else {
        Err(Error::Domain(format!("gap ratio must lie in [0, 1], got {r}")))
    }
}

pub fn to_physical(energy: f64, d: f64) -> Result<f64> {
    CODATA_2018.to_physical(energy, d)
}

pub fn from_physical(joules: f64, d: f64) -> Result<f64> {
    CODATA_2018.from_physical(joules, d)
}

pub fn gap_from_d(d: f64, gap_ratio: f64) -> Result<f64> {
    CODATA_2018.gap_from_d(d, gap_ratio)
}

pub fn d_from_gap(gap_ev: f64, gap_ratio: f64) -> Result<f64> {
    CODATA_2018.d_from_gap(gap_ev, gap_ratio)
}
