//! Loop and magnet geometry: thin-wire inductance, resonator modes, the
//! dimensionless loop-magnet flux factors, dipole field maps, and derived
//! distances (levitation-critical gap, direct wire-mediated tunneling).

use serde::{Deserialize, Serialize};

use crate::error::{HmlError, Result};
use crate::numerics::quad;
use crate::units::{MaterialParams, HBAR, MU0};

/// Absolute tolerance used for the flux-factor quadratures.
pub const FLUX_QUAD_TOL: f64 = 1e-9;

/// Superconducting loop: radius, wire thickness, and optional circuit data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopSpec {
    /// Loop radius (m).
    pub l: f64,
    /// Wire thickness (m).
    pub tau: f64,
    /// Total lumped capacitance (F), for circuit-coupling estimates.
    #[serde(default)]
    pub cap: Option<f64>,
    /// Inductance per unit length (H/m) of the transmission-line model.
    #[serde(default)]
    pub per_unit_l: Option<f64>,
    /// Capacitance per unit length (F/m) of the transmission-line model.
    #[serde(default)]
    pub per_unit_c: Option<f64>,
}

impl LoopSpec {
    /// Bare loop with radius `l` and wire thickness `tau`.
    pub fn new(l: f64, tau: f64) -> Self {
        LoopSpec {
            l,
            tau,
            cap: None,
            per_unit_l: None,
            per_unit_c: None,
        }
    }

    /// Validate the geometry; returns warnings for parameter ranges where the
    /// thin-wire formulas lose accuracy.
    pub fn validate(&self) -> Result<Vec<String>> {
        if !(self.l > 0.0) || !self.l.is_finite() {
            return Err(HmlError::config(
                "loop.l",
                format!("loop radius must be a finite positive length, got {}", self.l),
            ));
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(HmlError::config(
                "loop.tau",
                format!(
                    "wire thickness must be a finite positive length, got {}",
                    self.tau
                ),
            ));
        }
        if self.tau >= self.l {
            return Err(HmlError::domain(format!(
                "wire thickness ({} m) must be smaller than the loop radius ({} m)",
                self.tau, self.l
            )));
        }
        let mut warnings = Vec::new();
        if self.tau >= self.l / 10.0 {
            warnings.push(format!(
                "wire thickness {} m is not small against the loop radius {} m \
                 (tau >= l/10); thin-wire inductance and flux expressions degrade",
                self.tau, self.l
            ));
        }
        Ok(warnings)
    }
}

/// Magnet position relative to the loop: lateral edge-to-center gap `d` in the
/// loop plane and height `h` above it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Placement {
    /// Lateral gap between the wire and the magnet center (m).
    pub d: f64,
    /// Height of the magnet center above the loop plane (m).
    #[serde(default)]
    pub h: f64,
}

impl Placement {
    /// `d` must be positive, `h` non-negative.
    pub fn validate(&self) -> Result<()> {
        if !(self.d > 0.0) || !self.d.is_finite() {
            return Err(HmlError::config(
                "placement.d",
                format!("gap must be a finite positive length, got {}", self.d),
            ));
        }
        if !(self.h >= 0.0) || !self.h.is_finite() {
            return Err(HmlError::config(
                "placement.h",
                format!("height must be finite and non-negative, got {}", self.h),
            ));
        }
        Ok(())
    }
}

/// Thin-wire inductance model variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InductanceModel {
    /// mu0 * l * (ln(8 l / tau) - 7/4).
    Full,
    /// mu0 * l * ln(8 l / tau), keeping only the logarithm.
    LeadingLog,
}

/// Self-inductance of a circular loop of radius `l` and wire thickness `tau`.
pub fn loop_inductance(lp: &LoopSpec, model: InductanceModel) -> Result<f64> {
    lp.validate()?;
    let log = (8.0 * lp.l / lp.tau).ln();
    let value = match model {
        InductanceModel::Full => MU0 * lp.l * (log - 1.75),
        InductanceModel::LeadingLog => MU0 * lp.l * log,
    };
    Ok(value)
}

/// Mode frequencies (rad/s) of the loop read as a transmission-line resonator:
/// omega_n = n / (l * sqrt(L_l * C_l)) for n = 1..=n_max.
pub fn resonator_mode_frequencies(lp: &LoopSpec, n_max: usize) -> Result<Vec<f64>> {
    lp.validate()?;
    let per_l = lp.per_unit_l.ok_or_else(|| {
        HmlError::config("loop.per_unit_l", "transmission-line inductance per unit length is required for resonator modes")
    })?;
    let per_c = lp.per_unit_c.ok_or_else(|| {
        HmlError::config("loop.per_unit_c", "transmission-line capacitance per unit length is required for resonator modes")
    })?;
    if !(per_l > 0.0) || !(per_c > 0.0) {
        return Err(HmlError::domain(format!(
            "per-unit-length line parameters must be positive, got L_l = {per_l}, C_l = {per_c}"
        )));
    }
    if n_max == 0 {
        return Err(HmlError::domain(
            "at least one resonator mode must be requested".to_string(),
        ));
    }
    let base = 1.0 / (lp.l * (per_l * per_c).sqrt());
    Ok((1..=n_max).map(|n| n as f64 * base).collect())
}

/// Dimensionless flux factors and flux scales of one loop-magnet pair.
///
/// `ix`, `iy`, `iz` weight the three components of the magnet's moment
/// fluctuation in the flux threading the loop. For a magnet in the plane
/// defined by the loop center and the x axis, `iy` vanishes by symmetry and
/// `iz` vanishes when the magnet sits in the loop plane (h = 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxFactors {
    /// In-plane (x) flux factor.
    pub ix: f64,
    /// Transverse (y) flux factor; zero in the coplanar arrangement.
    pub iy: f64,
    /// Axial (z) flux factor; zero for h = 0.
    pub iz: f64,
    /// Flux scale per unit spin fluctuation, hbar*gamma0*mu0/(4 pi d) (Wb).
    pub phi_e: f64,
    /// Static flux from the equilibrium moment -mu * z_hat (Wb).
    pub phi_bias: f64,
}

/// Integrands of the flux quadratures, written over the half-period angle u
/// after substituting lambda = x sin(u). The common radicand
///
///   D(u) = y^2 + x^2 + (x+1)^2 + 2 x (x+1) sin(u)
///
/// is the squared distance (in units of d) between the magnet and a point on
/// the wire, and stays positive (D >= y^2 + 1) for every u.
fn flux_radicand(x: f64, y: f64, s: f64) -> f64 {
    y * y + x * x + (x + 1.0) * (x + 1.0) + 2.0 * x * (x + 1.0) * s
}

/// Dimensionless flux factors (ix, iz) for a loop of radius x*d and a magnet
/// at lateral gap d and height y*d, computed by adaptive quadrature with an
/// explicit base-rule order.
pub fn flux_factor_integrals_with_order(
    x: f64,
    y: f64,
    abs_tol: f64,
    order: usize,
) -> Result<(f64, f64)> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(HmlError::domain(format!(
            "loop-to-gap ratio x = l/d must be positive and finite, got {x}"
        )));
    }
    if !(y >= 0.0) || !y.is_finite() {
        return Err(HmlError::domain(format!(
            "height-to-gap ratio y = h/d must be non-negative and finite, got {y}"
        )));
    }
    let half_pi = std::f64::consts::FRAC_PI_2;
    let ix_integrand = |u: f64| {
        let s = u.sin();
        let lambda = x * s;
        let c = u.cos();
        let d = flux_radicand(x, y, s);
        -2.0 * (x * x * c * c + lambda * (x + 1.0 + lambda)) / (d * d.sqrt())
    };
    let ix = quad::integrate_with_order(ix_integrand, -half_pi, half_pi, abs_tol, order)?.value;
    let iz = if y == 0.0 {
        // The axial integrand carries an overall factor of y.
        0.0
    } else {
        let iz_integrand = |u: f64| {
            let s = u.sin();
            let lambda = x * s;
            let d = flux_radicand(x, y, s);
            -2.0 * y * lambda / (d * d.sqrt())
        };
        quad::integrate_with_order(iz_integrand, -half_pi, half_pi, abs_tol, order)?.value
    };
    Ok((ix, iz))
}

/// Dimensionless flux factors (ix, iz) at the default quadrature order and
/// tolerance.
pub fn flux_factor_integrals(x: f64, y: f64) -> Result<(f64, f64)> {
    flux_factor_integrals_with_order(x, y, FLUX_QUAD_TOL, quad::DEFAULT_ORDER)
}

/// Flux factors and flux scales of a circular loop with a magnet of static
/// moment magnitude `mu` (A*m^2, pointing along -z) at the given placement.
pub fn flux_factors_circular(
    lp: &LoopSpec,
    place: &Placement,
    mat: &MaterialParams,
    mu: f64,
) -> Result<FluxFactors> {
    lp.validate()?;
    place.validate()?;
    mat.validate()?;
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(HmlError::domain(format!(
            "moment magnitude must be finite and non-negative, got {mu}"
        )));
    }
    let x = lp.l / place.d;
    let y = place.h / place.d;
    let (ix, iz) = flux_factor_integrals(x, y)?;
    let four_pi_d = 4.0 * std::f64::consts::PI * place.d;
    let phi_e = HBAR * mat.gamma0 * MU0 / four_pi_d;
    // Static flux of the equilibrium moment -mu * z_hat; vanishes with iz at
    // h = 0 where the moment is parallel to the loop plane.
    let phi_bias = -MU0 * mu * iz / four_pi_d;
    Ok(FluxFactors {
        ix,
        iy: 0.0,
        iz,
        phi_e,
        phi_bias,
    })
}

/// Magnetic field (T) of a point dipole `moment` (A*m^2) located at `r_src`,
/// evaluated at `r_obs` (m).
pub fn dipole_field(
    moment: nalgebra::Vector3<f64>,
    r_src: nalgebra::Vector3<f64>,
    r_obs: nalgebra::Vector3<f64>,
) -> Result<nalgebra::Vector3<f64>> {
    let dr = r_obs - r_src;
    let r = dr.norm();
    if r == 0.0 {
        return Err(HmlError::domain(
            "dipole field is singular at the source point".to_string(),
        ));
    }
    let r3 = r * r * r;
    let r5 = r3 * r * r;
    Ok((MU0 / (4.0 * std::f64::consts::PI)) * (3.0 * dr * moment.dot(&dr) / r5 - moment / r3))
}

/// Smallest magnet-wire gap at which the magnet's own field at the wire stays
/// below the critical field `b_c` (T):
///
///   d_c = tau/2 + (2 mu0 Ms / (3 b_c))^(1/3) * R.
pub fn critical_distance(radius: f64, mat: &MaterialParams, b_c: f64, tau: f64) -> Result<f64> {
    mat.validate()?;
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(HmlError::domain(format!(
            "magnet radius must be a finite positive length, got {radius}"
        )));
    }
    if !(b_c > 0.0) || !b_c.is_finite() {
        return Err(HmlError::domain(format!(
            "critical field must be a finite positive value, got {b_c}"
        )));
    }
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(HmlError::domain(format!(
            "wire thickness must be finite and non-negative, got {tau}"
        )));
    }
    Ok(tau / 2.0 + (2.0 * MU0 * mat.ms / (3.0 * b_c)).cbrt() * radius)
}

/// Direct wire-mediated tunneling rate between two magnets sharing a short
/// superconducting link of length scale `d` and wire thickness `tau`:
///
///   J = gamma0^2 mu0^2 hbar F / (8 d^2 L),
///
/// with L the full thin-wire inductance of a circular coil of radius `d`.
/// Returns the rate (rad/s) together with validity warnings.
pub fn bone_tunneling(
    d: f64,
    tau: f64,
    magnet_radius: f64,
    f_total: f64,
    mat: &MaterialParams,
) -> Result<(f64, Vec<String>)> {
    mat.validate()?;
    if !(d > 0.0) || !d.is_finite() {
        return Err(HmlError::domain(format!(
            "link length scale must be a finite positive length, got {d}"
        )));
    }
    if d <= tau {
        return Err(HmlError::domain(format!(
            "link length scale ({d} m) must exceed the wire thickness ({tau} m)"
        )));
    }
    if !(f_total > 0.0) || !f_total.is_finite() {
        return Err(HmlError::domain(format!(
            "collective spin length must be positive and finite, got {f_total}"
        )));
    }
    let coil = LoopSpec::new(d, tau);
    let inductance = loop_inductance(&coil, InductanceModel::Full)?;
    let mut warnings = Vec::new();
    if magnet_radius >= d {
        warnings.push(format!(
            "magnet radius {magnet_radius} m is not small against the link scale {d} m; \
             the point-dipole flux estimate degrades"
        ));
    }
    let j = mat.gamma0.powi(2) * MU0 * MU0 * HBAR * f_total / (8.0 * d * d * inductance);
    Ok((j, warnings))
}
