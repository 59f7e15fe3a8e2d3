//! Coupling rates between sites: loop-mediated and dipolar magnon tunneling,
//! dressed site frequencies, counter-rotating and linear diagnostic
//! coefficients, and the magnet-qubit exchange coupling.

use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{HmlError, Result};
use crate::geometry::FluxFactors;
use crate::units::{magnet_moment, MaterialParams, HBAR, MU0};

/// Relative geometry of a pair of magnets: separation vector length and the
/// polar/azimuthal angles of r_i - r_j with respect to the bias axis z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SitePair {
    /// Position of site i (m).
    pub r_i: Vector3<f64>,
    /// Position of site j (m).
    pub r_j: Vector3<f64>,
    /// Separation |r_i - r_j| (m).
    pub r_ij: f64,
    /// Polar angle of the separation vector in [0, pi].
    pub theta_ij: f64,
    /// Azimuthal angle of the separation vector.
    pub phi_ij: f64,
}

impl SitePair {
    /// Build the pair geometry from the two site positions.
    pub fn new(r_i: Vector3<f64>, r_j: Vector3<f64>) -> Result<Self> {
        let dr = r_i - r_j;
        let r = dr.norm();
        if r == 0.0 {
            return Err(HmlError::domain(
                "site pair requires two distinct positions".to_string(),
            ));
        }
        let theta = (dr.z / r).clamp(-1.0, 1.0).acos();
        let phi = dr.y.atan2(dr.x);
        Ok(SitePair {
            r_i,
            r_j,
            r_ij: r,
            theta_ij: theta,
            phi_ij: phi,
        })
    }

    /// Pair at separation `r` with explicit angles (positions placed
    /// accordingly, with site j at the origin).
    pub fn from_angles(r: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(HmlError::domain(format!(
                "pair separation must be a finite positive length, got {r}"
            )));
        }
        let dr = Vector3::new(
            r * theta.sin() * phi.cos(),
            r * theta.sin() * phi.sin(),
            r * theta.cos(),
        );
        SitePair::new(dr, Vector3::zeros())
    }
}

/// Complex in-plane flux factor I = ix + i * iy of one site.
fn complex_flux(f: &FluxFactors) -> Complex64 {
    Complex64::new(f.ix, f.iy)
}

/// Loop-mediated magnon tunneling rate (rad/s) between sites i and j sharing
/// one loop of self-inductance `inductance`:
///
///   J_ij = Phi_e_i Phi_e_j conj(I_i) I_j F / (2 hbar L).
///
/// The rate is complex for general flux factors and Hermitian under index
/// exchange; the diagonal J_jj is real and enters the site frequency.
pub fn loop_tunneling(
    f_i: &FluxFactors,
    f_j: &FluxFactors,
    inductance: f64,
    f_total: f64,
) -> Result<Complex64> {
    if !(inductance > 0.0) || !inductance.is_finite() {
        return Err(HmlError::domain(format!(
            "loop inductance must be a finite positive value, got {inductance}"
        )));
    }
    if !(f_total > 0.0) || !f_total.is_finite() {
        return Err(HmlError::domain(format!(
            "collective spin length must be positive and finite, got {f_total}"
        )));
    }
    let overlap = complex_flux(f_i).conj() * complex_flux(f_j);
    Ok(overlap * (f_i.phi_e * f_j.phi_e * f_total / (2.0 * HBAR * inductance)))
}

/// Direct dipolar magnon tunneling rate (rad/s) between a pair of magnets:
///
///   J^d_ij = -hbar gamma0^2 mu0 F (3 sin^2(theta_ij) - 2) / (8 pi r_ij^3).
pub fn dipolar_tunneling(pair: &SitePair, f_total: f64, mat: &MaterialParams) -> Result<f64> {
    mat.validate()?;
    if !(f_total > 0.0) || !f_total.is_finite() {
        return Err(HmlError::domain(format!(
            "collective spin length must be positive and finite, got {f_total}"
        )));
    }
    let s = pair.theta_ij.sin();
    Ok(-HBAR * mat.gamma0.powi(2) * MU0 * f_total * (3.0 * s * s - 2.0)
        / (8.0 * std::f64::consts::PI * pair.r_ij.powi(3)))
}

/// Magnon frequency (rad/s) of one site: Zeeman term, shape-anisotropy gap,
/// loop-induced self-energy, and the static dipolar shift from its neighbors:
///
///   omega_j = gamma0 B0 + 2 gamma0 ka / Ms + J_jj
///             + sum_i hbar gamma0^2 mu0 (3 cos^2(theta_ij) - 1) F / (4 pi r_ij^3).
///
/// `loop_term` carries this site's flux factors and the loop inductance when
/// a loop is present; `neighbors` lists the pair geometries (j, i) to every
/// other magnet.
pub fn site_frequency(
    b0: f64,
    mat: &MaterialParams,
    f_total: f64,
    loop_term: Option<(&FluxFactors, f64)>,
    neighbors: &[SitePair],
) -> Result<f64> {
    mat.validate()?;
    if !(b0 >= 0.0) || !b0.is_finite() {
        return Err(HmlError::domain(format!(
            "bias field must be finite and non-negative, got {b0}"
        )));
    }
    let mut omega = mat.gamma0 * b0 + 2.0 * mat.gamma0 * mat.ka / mat.ms;
    if let Some((flux, inductance)) = loop_term {
        omega += loop_tunneling(flux, flux, inductance, f_total)?.re;
    }
    for pair in neighbors {
        let c = pair.theta_ij.cos();
        omega += HBAR * mat.gamma0.powi(2) * MU0 * (3.0 * c * c - 1.0) * f_total
            / (4.0 * std::f64::consts::PI * pair.r_ij.powi(3));
    }
    Ok(omega)
}

/// One site's inputs to the diagnostic coefficient calculation.
#[derive(Debug, Clone, Copy)]
pub struct SiteInput {
    /// Magnet position (m).
    pub position: Vector3<f64>,
    /// Flux factors of this site through the shared loop.
    pub flux: FluxFactors,
}

/// Counter-rotating and linear coefficient families for a set of sites
/// sharing one loop. These quantify the corrections dropped by the quadratic
/// hopping model and are reported as diagnostics, not fed into dynamics.
#[derive(Debug, Clone)]
pub struct DiagnosticCouplings {
    /// Counter-rotating pair-creation coefficients (rad/s).
    pub lambda: DMatrix<Complex64>,
    /// Magnon-photon coefficients (rad/s); present only when the loop
    /// capacitance and mode frequency are supplied.
    pub chi: Option<Vec<Complex64>>,
    /// Linear drive coefficients (rad/s).
    pub eta: Vec<Complex64>,
}

/// Compute the counter-rotating matrix Lambda, the magnon-photon couplings
/// chi (when `circuit = Some((capacitance, omega_c))`), and the linear drives
/// eta for `sites` sharing a loop of self-inductance `inductance`.
pub fn counter_rotating_and_linear(
    sites: &[SiteInput],
    inductance: f64,
    f_total: f64,
    mat: &MaterialParams,
    circuit: Option<(f64, f64)>,
) -> Result<DiagnosticCouplings> {
    mat.validate()?;
    if !(inductance > 0.0) || !inductance.is_finite() {
        return Err(HmlError::domain(format!(
            "loop inductance must be a finite positive value, got {inductance}"
        )));
    }
    if !(f_total > 0.0) || !f_total.is_finite() {
        return Err(HmlError::domain(format!(
            "collective spin length must be positive and finite, got {f_total}"
        )));
    }
    let n = sites.len();
    let sqrt_2f = (2.0 * f_total).sqrt();
    let total_bias_flux: f64 = sites.iter().map(|s| s.flux.phi_bias).sum();

    let mut lambda = DMatrix::<Complex64>::zeros(n, n);
    let mut eta = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        let i_j = complex_flux(&sites[j].flux);
        for i in 0..n {
            let i_i = complex_flux(&sites[i].flux);
            let loop_part = i_j
                * i_i
                * (sites[j].flux.phi_e * sites[i].flux.phi_e * f_total
                    / (2.0 * HBAR * inductance));
            let dipolar_part = if i == j {
                Complex64::new(0.0, 0.0)
            } else {
                let pair = SitePair::new(sites[j].position, sites[i].position)?;
                let s = pair.theta_ij.sin();
                let phase = Complex64::from_polar(1.0, 2.0 * pair.phi_ij);
                phase
                    * (-3.0 * HBAR * mat.gamma0.powi(2) * MU0 * f_total * s * s
                        / (16.0 * std::f64::consts::PI * pair.r_ij.powi(3)))
            };
            lambda[(j, i)] = dipolar_part + loop_part;

            if i != j {
                let pair = SitePair::new(sites[j].position, sites[i].position)?;
                let s = pair.theta_ij.sin();
                let c = pair.theta_ij.cos();
                let phase = Complex64::from_polar(1.0, 2.0 * pair.phi_ij);
                eta[j] += phase
                    * (3.0 * HBAR * MU0 * mat.gamma0.powi(2) * f_total * sqrt_2f * c * s
                        / (8.0 * std::f64::consts::PI * pair.r_ij.powi(3)));
            }
        }
        eta[j] += i_j
            * (sites[j].flux.phi_e * total_bias_flux * sqrt_2f / (2.0 * HBAR * inductance));
    }

    let chi = match circuit {
        None => None,
        Some((cap, omega_c)) => {
            if !(cap > 0.0) || !cap.is_finite() {
                return Err(HmlError::config(
                    "loop.cap",
                    format!("capacitance must be a finite positive value, got {cap}"),
                ));
            }
            if !(omega_c > 0.0) || !omega_c.is_finite() {
                return Err(HmlError::domain(format!(
                    "circuit mode frequency must be positive and finite, got {omega_c}"
                )));
            }
            // Zero-point flux of the circuit mode.
            let phi_c = (HBAR / (2.0 * cap * omega_c)).sqrt();
            Some(
                sites
                    .iter()
                    .map(|s| {
                        complex_flux(&s.flux)
                            * (s.flux.phi_e * phi_c * sqrt_2f / (2.0 * HBAR * inductance))
                    })
                    .collect(),
            )
        }
    };

    Ok(DiagnosticCouplings { lambda, chi, eta })
}

/// Bare and dressed coupling parameters of a spin qubit embedded at polar
/// angle `theta` and azimuth `varphi` on a sphere of radius r_q around one
/// magnet.
///
/// The bare parameters depend only on theta; diagonalizing the qubit's static
/// part mixes its levels through the angle `theta_mix`, producing the dressed
/// frequency and couplings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitCoupling {
    /// Static qubit splitting before mixing (rad/s).
    pub omega_sigma_bare: f64,
    /// Bare transverse-mixing coupling (rad/s).
    pub xi_theta: f64,
    /// Bare exchange coupling (rad/s).
    pub g_theta: f64,
    /// Bare counter-rotating coupling (rad/s).
    pub w_theta: f64,
    /// Level-mixing angle in [0, pi].
    pub theta_mix: f64,
    /// Dressed qubit splitting (rad/s).
    pub omega_sigma: f64,
    /// Dressed transverse coupling (rad/s); complex through the azimuth.
    pub xi: Complex64,
    /// Dressed exchange coupling (rad/s); drives the state-transfer dynamics.
    pub g: f64,
    /// Dressed counter-rotating coupling (rad/s).
    pub w: f64,
    /// Zeeman-shifted qubit frequency delta_nv - gammaq * B0 (rad/s).
    pub omega_q: f64,
}

/// Couplings of a spin qubit at (theta, varphi, r_q) from the center of a
/// magnet of radius `radius` under bias field `b0`.
pub fn qubit_coupling(
    theta: f64,
    varphi: f64,
    r_q: f64,
    radius: f64,
    mat: &MaterialParams,
    b0: f64,
) -> Result<QubitCoupling> {
    mat.validate()?;
    if !(b0 >= 0.0) || !b0.is_finite() {
        return Err(HmlError::domain(format!(
            "bias field must be finite and non-negative, got {b0}"
        )));
    }
    if !(r_q > radius) {
        return Err(HmlError::domain(format!(
            "qubit distance r_q = {r_q} m must exceed the magnet radius {radius} m"
        )));
    }
    let moment = magnet_moment(radius, mat)?;
    let f = moment.f_total;
    let sqrt_f = f.sqrt();
    let scale4 = HBAR * mat.gamma0 * mat.gammaq * MU0
        / (4.0 * std::f64::consts::PI * r_q.powi(3));
    let scale8 = 0.5 * scale4;
    let (sin_t, cos_t) = theta.sin_cos();

    let omega_q = mat.delta_nv - mat.gammaq * b0;
    let omega_sigma_bare = omega_q - scale4 * f * (3.0 * cos_t * cos_t - 1.0);
    let xi_theta = 3.0 * scale4 * (2.0 * f).sqrt() * sin_t * cos_t;
    let w_theta = scale8 * sqrt_f * (3.0 * sin_t * sin_t - 2.0);
    let g_theta = 3.0 * scale8 * sqrt_f * sin_t * sin_t;

    // Mixing angle of the static qubit part. The branch keeps theta_mix in
    // [0, pi]: an opposing sign between xi and the bare splitting pushes the
    // mixing past pi/2.
    let theta_mix = if xi_theta == 0.0 {
        0.0
    } else if omega_sigma_bare == 0.0 {
        std::f64::consts::FRAC_PI_2
    } else {
        let t = (sqrt_f * xi_theta.abs() / omega_sigma_bare.abs()).atan();
        if xi_theta / omega_sigma_bare < 0.0 {
            std::f64::consts::PI - t
        } else {
            t
        }
    };

    let omega_sigma = (omega_sigma_bare * omega_sigma_bare + f * xi_theta * xi_theta).sqrt();
    let (sin_m, cos_m) = theta_mix.sin_cos();
    let (sin_h, cos_h) = (0.5 * theta_mix).sin_cos();
    let e_phi = Complex64::from_polar(1.0, varphi);
    let xi = e_phi * (xi_theta * cos_m)
        + (e_phi.conj() * w_theta + e_phi * e_phi * g_theta) * sin_m;
    let g = 0.25 * xi_theta * sin_m + g_theta * cos_h * cos_h - w_theta * sin_h * sin_h;
    let w = 0.25 * xi_theta * sin_m + w_theta * cos_h - g_theta * sin_h;

    Ok(QubitCoupling {
        omega_sigma_bare,
        xi_theta,
        g_theta,
        w_theta,
        theta_mix,
        omega_sigma,
        xi,
        g,
        w,
        omega_q,
    })
}

/// Exchange model of one qubit-magnon site pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JaynesCummingsSite {
    /// Magnon site frequency (rad/s).
    pub omega_magnon: f64,
    /// Shifted qubit frequency (rad/s).
    pub omega_qubit: f64,
    /// Exchange coupling used by the dynamics (rad/s).
    pub g: f64,
    /// Alternative exchange normalization carrying sqrt(2F) in place of
    /// sqrt(F); reported alongside for comparison.
    pub g_maintext: f64,
    /// Rotating-wave validity warnings, if any.
    pub warnings: Vec<String>,
}

/// Package the qubit-magnon pair as an exchange model. The qubit frequency
/// carries the isotropic part of the magnet's static shift,
/// omega_qubit = omega_q + hbar gamma0 gammaq mu0 F / (4 pi r_q^3).
pub fn jaynes_cummings_site(
    qc: &QubitCoupling,
    omega_magnon: f64,
    r_q: f64,
    f_total: f64,
    mat: &MaterialParams,
) -> Result<JaynesCummingsSite> {
    mat.validate()?;
    if !(omega_magnon > 0.0) || !omega_magnon.is_finite() {
        return Err(HmlError::domain(format!(
            "magnon frequency must be positive and finite, got {omega_magnon}"
        )));
    }
    let scale4 = HBAR * mat.gamma0 * mat.gammaq * MU0
        / (4.0 * std::f64::consts::PI * r_q.powi(3));
    let omega_qubit = qc.omega_q + scale4 * f_total;
    let g_maintext = 3.0 * 0.5 * scale4 * (2.0 * f_total).sqrt();
    let mut warnings = Vec::new();
    let g_abs = qc.g.abs();
    if g_abs > 0.1 * omega_magnon {
        warnings.push(format!(
            "exchange coupling {g_abs:.3e} rad/s is not small against the magnon \
             frequency {omega_magnon:.3e} rad/s; the rotating-wave form degrades"
        ));
    }
    if (omega_magnon - omega_qubit).abs() > 0.1 * omega_magnon {
        warnings.push(format!(
            "qubit-magnon detuning {:.3e} rad/s is not small against the magnon \
             frequency {omega_magnon:.3e} rad/s; the rotating-wave form degrades",
            omega_magnon - omega_qubit
        ));
    }
    Ok(JaynesCummingsSite {
        omega_magnon,
        omega_qubit,
        g: qc.g,
        g_maintext,
        warnings,
    })
}
