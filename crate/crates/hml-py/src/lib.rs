//! Python bindings: thin wrappers over the core library. Structured results
//! cross the boundary as dictionaries; invalid inputs raise ValueError and
//! accuracy failures raise RuntimeError.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use hml_core::couplings as cpl;
use hml_core::dynamics as dynx;
use hml_core::geometry as geo;
use hml_core::lattice as lat;
use hml_core::units;
use hml_core::HmlError;

fn to_py(e: HmlError) -> PyErr {
    match e {
        HmlError::Config { .. } | HmlError::Domain(_) => PyValueError::new_err(e.to_string()),
        HmlError::Convergence { .. } => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Magnet and qubit material parameters.
#[pyclass(frozen)]
#[derive(Clone)]
struct Material {
    inner: units::MaterialParams,
}

#[pymethods]
impl Material {
    #[new]
    fn new(gamma0: f64, gammaq: f64, ms: f64, ka: f64, delta_nv: f64) -> PyResult<Self> {
        let inner = units::MaterialParams {
            gamma0,
            gammaq,
            ms,
            ka,
            delta_nv,
        };
        inner.validate().map_err(to_py)?;
        Ok(Material { inner })
    }

    /// Yttrium-iron-garnet preset.
    #[staticmethod]
    fn yig() -> Self {
        Material {
            inner: units::yig_preset(),
        }
    }

    #[getter]
    fn gamma0(&self) -> f64 {
        self.inner.gamma0
    }

    #[getter]
    fn gammaq(&self) -> f64 {
        self.inner.gammaq
    }

    #[getter]
    fn ms(&self) -> f64 {
        self.inner.ms
    }

    #[getter]
    fn ka(&self) -> f64 {
        self.inner.ka
    }

    #[getter]
    fn delta_nv(&self) -> f64 {
        self.inner.delta_nv
    }

    fn __repr__(&self) -> String {
        format!(
            "Material(gamma0={:e}, gammaq={:e}, ms={:e}, ka={:e}, delta_nv={:e})",
            self.inner.gamma0, self.inner.gammaq, self.inner.ms, self.inner.ka, self.inner.delta_nv
        )
    }
}

fn lattice_spec(
    kind: &str,
    omega0: f64,
    j_rate: f64,
    a: f64,
    n: usize,
    boundary: &str,
) -> PyResult<lat::LatticeSpec> {
    let kind = match kind {
        "chain" => lat::LatticeKind::Chain,
        "ring" => lat::LatticeKind::Ring,
        "checkerboard" => lat::LatticeKind::Checkerboard,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown lattice kind \"{other}\"; expected chain, ring, or checkerboard"
            )))
        }
    };
    let boundary = match boundary {
        "periodic" => lat::Boundary::Periodic,
        "open" => lat::Boundary::Open,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown boundary \"{other}\"; expected periodic or open"
            )))
        }
    };
    let spec = lat::LatticeSpec {
        kind,
        omega0,
        j_rate,
        a,
        n,
        boundary,
    };
    spec.validate().map_err(to_py)?;
    Ok(spec)
}

fn two_site_model(
    omega0: f64,
    j_rate: f64,
    omega_sigma: f64,
    g: f64,
    kappa: f64,
    gamma: f64,
) -> dynx::TwoSiteModel {
    dynx::TwoSiteModel {
        omega0,
        j_rate,
        omega_sigma,
        g,
        kappa,
        gamma,
    }
}

/// Saturated moment and collective spin length of a spherical magnet:
/// returns (mu, f_total).
#[pyfunction]
fn magnet_moment(radius: f64, material: &Material) -> PyResult<(f64, f64)> {
    let m = units::magnet_moment(radius, &material.inner).map_err(to_py)?;
    Ok((m.mu, m.f_total))
}

/// Dimensionless flux factors (ix, iz) of a loop of radius x*d with the
/// magnet at lateral gap d and height y*d.
#[pyfunction]
fn flux_factor_integrals(x: f64, y: f64) -> PyResult<(f64, f64)> {
    geo::flux_factor_integrals(x, y).map_err(to_py)
}

/// Thin-wire self-inductance of a circular loop; model is "full" or
/// "leading_log".
#[pyfunction]
#[pyo3(signature = (l, tau, model = "full"))]
fn loop_inductance(l: f64, tau: f64, model: &str) -> PyResult<f64> {
    let m = match model {
        "full" => geo::InductanceModel::Full,
        "leading_log" => geo::InductanceModel::LeadingLog,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown inductance model \"{other}\"; expected full or leading_log"
            )))
        }
    };
    geo::loop_inductance(&geo::LoopSpec::new(l, tau), m).map_err(to_py)
}

/// Flux factors and flux scales of one loop-magnet pair.
#[pyfunction]
fn flux_factors_circular<'py>(
    py: Python<'py>,
    l: f64,
    tau: f64,
    d: f64,
    h: f64,
    material: &Material,
    radius: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let lp = geo::LoopSpec::new(l, tau);
    let place = geo::Placement { d, h };
    let moment = units::magnet_moment(radius, &material.inner).map_err(to_py)?;
    let f = geo::flux_factors_circular(&lp, &place, &material.inner, moment.mu).map_err(to_py)?;
    let out = PyDict::new_bound(py);
    out.set_item("ix", f.ix)?;
    out.set_item("iy", f.iy)?;
    out.set_item("iz", f.iz)?;
    out.set_item("phi_e", f.phi_e)?;
    out.set_item("phi_bias", f.phi_bias)?;
    Ok(out)
}

/// Smallest magnet-wire gap keeping the magnet's field at the wire below the
/// critical field.
#[pyfunction]
fn critical_distance(radius: f64, material: &Material, b_c: f64, tau: f64) -> PyResult<f64> {
    geo::critical_distance(radius, &material.inner, b_c, tau).map_err(to_py)
}

/// Loop-mediated tunneling rate (rad/s) between two identical magnets that
/// share one loop symmetrically.
#[pyfunction]
fn loop_tunneling_rate(
    l: f64,
    tau: f64,
    d: f64,
    h: f64,
    material: &Material,
    radius: f64,
) -> PyResult<f64> {
    let lp = geo::LoopSpec::new(l, tau);
    let place = geo::Placement { d, h };
    let moment = units::magnet_moment(radius, &material.inner).map_err(to_py)?;
    let flux =
        geo::flux_factors_circular(&lp, &place, &material.inner, moment.mu).map_err(to_py)?;
    let inductance = geo::loop_inductance(&lp, geo::InductanceModel::Full).map_err(to_py)?;
    Ok(cpl::loop_tunneling(&flux, &flux, inductance, moment.f_total)
        .map_err(to_py)?
        .re)
}

/// Direct dipolar tunneling rate (rad/s) between two magnets at separation r
/// and polar/azimuthal angles (theta, phi) from the bias axis.
#[pyfunction]
fn dipolar_tunneling_rate(
    r: f64,
    theta: f64,
    phi: f64,
    material: &Material,
    radius: f64,
) -> PyResult<f64> {
    let pair = cpl::SitePair::from_angles(r, theta, phi).map_err(to_py)?;
    let moment = units::magnet_moment(radius, &material.inner).map_err(to_py)?;
    cpl::dipolar_tunneling(&pair, moment.f_total, &material.inner).map_err(to_py)
}

/// Dressed couplings of a spin qubit at (theta, varphi, r_q) from the center
/// of a magnet of radius `radius` under bias b0.
#[pyfunction]
fn qubit_coupling<'py>(
    py: Python<'py>,
    theta: f64,
    varphi: f64,
    r_q: f64,
    radius: f64,
    material: &Material,
    b0: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let qc = cpl::qubit_coupling(theta, varphi, r_q, radius, &material.inner, b0).map_err(to_py)?;
    let out = PyDict::new_bound(py);
    out.set_item("omega_sigma_bare", qc.omega_sigma_bare)?;
    out.set_item("xi_theta", qc.xi_theta)?;
    out.set_item("g_theta", qc.g_theta)?;
    out.set_item("w_theta", qc.w_theta)?;
    out.set_item("theta_mix", qc.theta_mix)?;
    out.set_item("omega_sigma", qc.omega_sigma)?;
    out.set_item("xi", (qc.xi.re, qc.xi.im))?;
    out.set_item("g", qc.g)?;
    out.set_item("w", qc.w)?;
    out.set_item("omega_q", qc.omega_q)?;
    Ok(out)
}

/// Chain dispersion on the periodic momentum grid: (k_list, omega_list).
#[pyfunction]
#[pyo3(signature = (omega0, j_rate, a, nk, n = 8))]
fn chain_dispersion(
    omega0: f64,
    j_rate: f64,
    a: f64,
    nk: usize,
    n: usize,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let spec = lattice_spec("chain", omega0, j_rate, a, n, "periodic")?;
    let b = lat::chain_dispersion(&spec, nk).map_err(to_py)?;
    let ks = b.kpoints.iter().map(|k| k[0]).collect();
    let os = b.bands.iter().map(|p| p[0]).collect();
    Ok((ks, os))
}

/// Spectrum of the all-to-all coupled array.
#[pyfunction]
fn ring_spectrum(omega0: f64, j_rate: f64, n: usize) -> PyResult<Vec<f64>> {
    let spec = lattice_spec("ring", omega0, j_rate, 1e-6, n, "periodic")?;
    lat::ring_spectrum(&spec).map_err(to_py)
}

/// Two checkerboard bands on an nk x nk momentum grid:
/// (kpoints, lower_band, upper_band).
#[pyfunction]
fn checkerboard_bands(
    omega0: f64,
    j_rate: f64,
    a: f64,
    n: usize,
    nk: usize,
) -> PyResult<(Vec<(f64, f64)>, Vec<f64>, Vec<f64>)> {
    let spec = lattice_spec("checkerboard", omega0, j_rate, a, n, "periodic")?;
    let b = lat::checkerboard_bands(&spec, nk).map_err(to_py)?;
    let ks = b.kpoints.iter().map(|k| (k[0], k[1])).collect();
    let lo = b.bands.iter().map(|p| p[0]).collect();
    let hi = b.bands.iter().map(|p| p[1]).collect();
    Ok((ks, lo, hi))
}

/// Eigenvalues of the finite real-space lattice Hamiltonian.
#[pyfunction]
#[pyo3(signature = (kind, omega0, j_rate, a, n, boundary = "periodic"))]
fn finite_lattice_spectrum(
    kind: &str,
    omega0: f64,
    j_rate: f64,
    a: f64,
    n: usize,
    boundary: &str,
) -> PyResult<Vec<f64>> {
    let spec = lattice_spec(kind, omega0, j_rate, a, n, boundary)?;
    lat::finite_lattice_oracle(&spec).map_err(to_py)
}

/// Normalized density of states: (bin_edges, density).
#[pyfunction]
#[pyo3(signature = (kind, omega0, j_rate, a, n, nbins, nk, band = None))]
#[allow(clippy::too_many_arguments)]
fn density_of_states(
    kind: &str,
    omega0: f64,
    j_rate: f64,
    a: f64,
    n: usize,
    nbins: usize,
    nk: usize,
    band: Option<usize>,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let spec = lattice_spec(kind, omega0, j_rate, a, n, "periodic")?;
    let h = lat::density_of_states(&spec, nbins, nk, band).map_err(to_py)?;
    Ok((h.edges, h.density))
}

/// Dispersive reduction of the two-site transfer model.
#[pyfunction]
#[pyo3(signature = (omega0, j_rate, omega_sigma, g, kappa = 0.0, gamma = 0.0))]
fn effective_model<'py>(
    py: Python<'py>,
    omega0: f64,
    j_rate: f64,
    omega_sigma: f64,
    g: f64,
    kappa: f64,
    gamma: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let m = two_site_model(omega0, j_rate, omega_sigma, g, kappa, gamma);
    let eff = dynx::effective_model(&m).map_err(to_py)?;
    let out = PyDict::new_bound(py);
    out.set_item("delta", eff.delta)?;
    out.set_item("g_eff", eff.g_eff)?;
    out.set_item("kappa_eff", eff.kappa_eff)?;
    out.set_item("gamma_eff", eff.gamma_eff)?;
    out.set_item("omega_sigma_tilde", eff.omega_sigma_tilde)?;
    out.set_item("c0", eff.c0)?;
    out.set_item("warnings", eff.warnings)?;
    Ok(out)
}

/// Run the state-transfer protocol; returns times, fidelity trace, the
/// refined transfer time, and the swap error.
#[pyfunction]
#[pyo3(signature = (omega0, j_rate, omega_sigma, g, kappa = 0.0, gamma = 0.0, t_max = None, nt = 2048))]
#[allow(clippy::too_many_arguments)]
fn swap_fidelity<'py>(
    py: Python<'py>,
    omega0: f64,
    j_rate: f64,
    omega_sigma: f64,
    g: f64,
    kappa: f64,
    gamma: f64,
    t_max: Option<f64>,
    nt: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let m = two_site_model(omega0, j_rate, omega_sigma, g, kappa, gamma);
    let o = dynx::swap_fidelity(&m, t_max, nt).map_err(to_py)?;
    let out = PyDict::new_bound(py);
    out.set_item("times", o.times)?;
    out.set_item("fidelity", o.fidelity)?;
    out.set_item("t_star", o.t_star)?;
    out.set_item("epsilon", o.epsilon)?;
    out.set_item("warnings", o.warnings)?;
    Ok(out)
}

/// Swap-error slopes against the two decoherence rates at Delta = J.
#[pyfunction]
#[pyo3(signature = (omega0, j_rate, omega_sigma, g, n_points = 9))]
fn fit_alpha<'py>(
    py: Python<'py>,
    omega0: f64,
    j_rate: f64,
    omega_sigma: f64,
    g: f64,
    n_points: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let m = two_site_model(omega0, j_rate, omega_sigma, g, 0.0, 0.0);
    let fit = dynx::fit_alpha(&m, n_points).map_err(to_py)?;
    let out = PyDict::new_bound(py);
    out.set_item("alpha_gamma", fit.alpha_gamma)?;
    out.set_item("alpha_kappa", fit.alpha_kappa)?;
    out.set_item("r2_gamma", fit.r2_gamma)?;
    out.set_item("r2_kappa", fit.r2_kappa)?;
    out.set_item("poor_linearity", fit.poor_linearity)?;
    out.set_item("gamma_points", fit.gamma_points)?;
    out.set_item("kappa_points", fit.kappa_points)?;
    out.set_item("trajectories", fit.trajectories)?;
    Ok(out)
}

/// Single-site cooperativity g^2 / (gamma kappa) with gamma = pi / T2.
#[pyfunction]
fn cooperativity(g: f64, kappa: f64, t2: f64) -> PyResult<f64> {
    dynx::cooperativity(g, kappa, t2).map_err(to_py)
}

/// Cooperativity on log-spaced (kappa, T2) grids:
/// (kappas, t2s, c0_rows).
#[pyfunction]
fn cooperativity_map(
    g: f64,
    kappa_range: (f64, f64, usize),
    t2_range: (f64, f64, usize),
) -> PyResult<(Vec<f64>, Vec<f64>, Vec<Vec<f64>>)> {
    let m = dynx::cooperativity_map(g, kappa_range, t2_range).map_err(to_py)?;
    Ok((m.kappas, m.t2s, m.c0))
}

#[pymodule]
fn hml_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Material>()?;
    m.add_function(wrap_pyfunction!(magnet_moment, m)?)?;
    m.add_function(wrap_pyfunction!(flux_factor_integrals, m)?)?;
    m.add_function(wrap_pyfunction!(loop_inductance, m)?)?;
    m.add_function(wrap_pyfunction!(flux_factors_circular, m)?)?;
    m.add_function(wrap_pyfunction!(critical_distance, m)?)?;
    m.add_function(wrap_pyfunction!(loop_tunneling_rate, m)?)?;
    m.add_function(wrap_pyfunction!(dipolar_tunneling_rate, m)?)?;
    m.add_function(wrap_pyfunction!(qubit_coupling, m)?)?;
    m.add_function(wrap_pyfunction!(chain_dispersion, m)?)?;
    m.add_function(wrap_pyfunction!(ring_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(checkerboard_bands, m)?)?;
    m.add_function(wrap_pyfunction!(finite_lattice_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(density_of_states, m)?)?;
    m.add_function(wrap_pyfunction!(effective_model, m)?)?;
    m.add_function(wrap_pyfunction!(swap_fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(fit_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(cooperativity, m)?)?;
    m.add_function(wrap_pyfunction!(cooperativity_map, m)?)?;
    Ok(())
}
