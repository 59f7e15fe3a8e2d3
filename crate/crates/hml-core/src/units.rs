//! Physical constants, material parameters, and the macrospin magnet model.
//!
//! Unit conventions used throughout the crate:
//!
//! * every angular frequency and rate is carried in rad/s; conversion to
//!   ordinary frequency (Hz) happens only at the reporting layer,
//! * lengths are in metres, magnetic fields in tesla, magnetization in A/m,
//!   anisotropy energy density in J/m^3,
//! * the static bias field points along -z; each magnet's equilibrium moment
//!   is therefore -mu * z_hat.

use serde::{Deserialize, Serialize};

use crate::error::{HmlError, Result};

/// Vacuum permeability, T*m/A (defined value 4*pi*1e-7).
pub const MU0: f64 = 4.0e-7 * std::f64::consts::PI;

/// Reduced Planck constant, J*s.
pub const HBAR: f64 = 1.054571817e-34;

/// Convert an angular frequency in rad/s to an ordinary frequency in Hz.
pub fn rad_to_hz(omega: f64) -> f64 {
    omega / (2.0 * std::f64::consts::PI)
}

/// Fundamental constants bundle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    /// Vacuum permeability (T*m/A).
    pub mu0: f64,
    /// Reduced Planck constant (J*s).
    pub hbar: f64,
}

impl Constants {
    /// SI values.
    pub fn si() -> Self {
        Constants {
            mu0: MU0,
            hbar: HBAR,
        }
    }
}

impl Default for Constants {
    fn default() -> Self {
        Constants::si()
    }
}

/// Material and qubit parameters of one site species.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialParams {
    /// Gyromagnetic ratio of the magnet's collective spin (rad/s per T).
    pub gamma0: f64,
    /// Gyromagnetic ratio of the spin qubit (rad/s per T).
    pub gammaq: f64,
    /// Saturation magnetization (A/m).
    pub ms: f64,
    /// Uniaxial anisotropy energy density (J/m^3).
    pub ka: f64,
    /// Qubit zero-field splitting (rad/s).
    pub delta_nv: f64,
}

impl MaterialParams {
    /// All parameters must be strictly positive.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("gamma0", self.gamma0),
            ("gammaq", self.gammaq),
            ("ms", self.ms),
            ("ka", self.ka),
            ("delta_nv", self.delta_nv),
        ];
        for (name, value) in fields {
            if !(value > 0.0) || !value.is_finite() {
                return Err(HmlError::config(
                    format!("material.{name}"),
                    format!("must be a finite positive number, got {value}"),
                ));
            }
        }
        Ok(())
    }
}

/// Parameters of a YIG microsphere hosting an NV-center qubit.
pub fn yig_preset() -> MaterialParams {
    MaterialParams {
        gamma0: 1.76199e11,
        gammaq: 1.76149e11,
        ms: 196e3,
        ka: 2480.0,
        delta_nv: 2.0 * std::f64::consts::PI * 2.87e9,
    }
}

/// Static bias field; the field vector is -b0 * z_hat.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldBias {
    /// Bias field magnitude (T).
    pub b0: f64,
    /// Critical field bounding superconducting operation (T), when relevant.
    #[serde(default)]
    pub b_c: Option<f64>,
}

impl FieldBias {
    /// The magnitude must be non-negative and finite.
    pub fn validate(&self) -> Result<()> {
        if !(self.b0 >= 0.0) || !self.b0.is_finite() {
            return Err(HmlError::config(
                "field.b0",
                format!("must be a finite non-negative number, got {}", self.b0),
            ));
        }
        if let Some(bc) = self.b_c {
            if !(bc > 0.0) || !bc.is_finite() {
                return Err(HmlError::config(
                    "field.b_c",
                    format!("must be a finite positive number, got {bc}"),
                ));
            }
        }
        Ok(())
    }
}

/// Saturated moment and collective spin of one spherical magnet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagnetMoment {
    /// Magnetic dipole moment mu = Ms * (4 pi / 3) * R^3 (A*m^2).
    pub mu: f64,
    /// Dimensionless collective spin length F = mu / (hbar * gamma0).
    pub f_total: f64,
}

/// Moment and collective spin of a uniformly magnetized sphere of radius
/// `radius` (m). The sphere is treated as a single macrospin, so the moment
/// scales with the volume and the spin length with moment over hbar*gamma0.
pub fn magnet_moment(radius: f64, mat: &MaterialParams) -> Result<MagnetMoment> {
    mat.validate()?;
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(HmlError::domain(format!(
            "magnet radius must be a finite positive length, got {radius}"
        )));
    }
    let volume = 4.0 * std::f64::consts::PI / 3.0 * radius.powi(3);
    let mu = mat.ms * volume;
    let f_total = mu / (HBAR * mat.gamma0);
    Ok(MagnetMoment { mu, f_total })
}
