//! `hml`: structured configuration in, deterministic CSV/JSON out.
//!
//! Exit codes: 0 success, 2 configuration error, 3 physics-domain error,
//! 4 numerical-convergence error. `HML_THREADS` caps sweep parallelism.

mod config;
mod output;
mod sweep;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use hml_core::couplings::{
    dipolar_tunneling, jaynes_cummings_site, loop_tunneling, qubit_coupling, site_frequency,
    SitePair,
};
use hml_core::dynamics::{cooperativity, effective_model, fit_alpha, swap_fidelity, TwoSiteModel};
use hml_core::geometry::{
    critical_distance, flux_factor_integrals, flux_factors_circular, loop_inductance,
    InductanceModel,
};
use hml_core::lattice::{chain_dispersion, checkerboard_bands, ring_spectrum, LatticeKind};
use hml_core::units::{magnet_moment, rad_to_hz};
use hml_core::{HmlError, Result};

use config::{load_config, OutFormat, RunConfig};
use output::{csv_table, emit, sig, JsonReport};
use sweep::parse_sweep;

const PI: f64 = std::f64::consts::PI;

#[derive(Parser)]
#[command(
    name = "hml",
    version,
    about = "Hybrid magnonic lattice toolkit: geometry, couplings, bands, and transfer dynamics"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration (strict schema).
    #[arg(long)]
    config: PathBuf,
    /// Parameter sweep, `key=a:b:n` (bounds accept multiples of pi).
    #[arg(long)]
    sweep: Option<String>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Loop-magnet geometry: flux factors, inductances, critical distance.
    Geometry {
        #[command(flatten)]
        common: Common,
        /// Loop-radius-to-gap ratio for dimensionless sweeps.
        #[arg(long = "l_over_d")]
        l_over_d: Option<f64>,
    },
    /// Pair tunneling rates, site frequency, and dressed qubit couplings.
    Coupling {
        #[command(flatten)]
        common: Common,
    },
    /// Lattice band structure on the momentum grid.
    Bands {
        #[command(flatten)]
        common: Common,
        /// Lattice topology override: chain, ring, or checkerboard.
        #[arg(long)]
        kind: Option<String>,
        /// Momentum grid resolution (points per direction).
        #[arg(long, default_value_t = 64)]
        nk: usize,
    },
    /// Two-site state-transfer protocol.
    Swap {
        #[command(flatten)]
        common: Common,
    },
    /// Error-slope regression of the transfer protocol.
    FitAlpha {
        #[command(flatten)]
        common: Common,
        /// Points per decoherence-rate sweep.
        #[arg(long = "n_points", default_value_t = 9)]
        n_points: usize,
    },
    /// Single-site cooperativity from the dressed coupling and rates.
    Cooperativity {
        #[command(flatten)]
        common: Common,
    },
}

fn exit_code(e: &HmlError) -> i32 {
    match e {
        HmlError::Config { .. } => 2,
        HmlError::Domain(_) => 3,
        HmlError::Convergence { .. } => 4,
    }
}

/// Cap the global worker pool when HML_THREADS is set.
fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("HML_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| {
            HmlError::config(
                "HML_THREADS",
                format!("expected a positive integer, got \"{v}\""),
            )
        })?;
        if n == 0 {
            return Err(HmlError::config(
                "HML_THREADS",
                "thread count must be at least 1",
            ));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| HmlError::config("HML_THREADS", e.to_string()))?;
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}

fn run(cli: Cli) -> Result<()> {
    init_threads()?;
    match cli.cmd {
        Cmd::Geometry { common, l_over_d } => cmd_geometry(&common, l_over_d),
        Cmd::Coupling { common } => cmd_coupling(&common),
        Cmd::Bands { common, kind, nk } => cmd_bands(&common, kind.as_deref(), nk),
        Cmd::Swap { common } => cmd_swap(&common),
        Cmd::FitAlpha { common, n_points } => cmd_fit_alpha(&common, n_points),
        Cmd::Cooperativity { common } => cmd_cooperativity(&common),
    }
}

fn load(common: &Common) -> Result<RunConfig> {
    let (cfg, warnings) = load_config(&common.config)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

fn resolve_out(common: &Common, cfg: &RunConfig) -> Option<PathBuf> {
    common
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().and_then(|o| o.path.clone()))
}

/// Output format: explicit config choice, then the effective path extension,
/// then the subcommand default.
fn resolve_format(common: &Common, cfg: &RunConfig, default: OutFormat) -> OutFormat {
    if let Some(f) = cfg.output.as_ref().and_then(|o| o.format) {
        return f;
    }
    match resolve_out(common, cfg)
        .as_deref()
        .and_then(|p| p.extension())
        .and_then(|e| e.to_str())
    {
        Some("csv") => OutFormat::Csv,
        Some("json") => OutFormat::Json,
        _ => default,
    }
}

/// Two frequency cells, rad/s then Hz.
fn freq_cells(omega: f64) -> [String; 2] {
    [sig(omega), sig(rad_to_hz(omega))]
}

fn cmd_geometry(common: &Common, l_over_d: Option<f64>) -> Result<()> {
    let cfg = load(common)?;
    let out = resolve_out(common, &cfg);
    if let Some(spec) = &common.sweep {
        let sw = parse_sweep(spec)?;
        if sw.key != "h_over_d" {
            return Err(HmlError::config(
                "sweep",
                format!("geometry sweeps support the key h_over_d, got \"{}\"", sw.key),
            ));
        }
        let x = match l_over_d {
            Some(x) => x,
            None => {
                let lp = cfg.require_loop()?;
                let place = cfg.require_placement()?;
                lp.l / place.d
            }
        };
        if !(x > 0.0) || !x.is_finite() {
            return Err(HmlError::config(
                "l_over_d",
                format!("loop-to-gap ratio must be a finite positive number, got {x}"),
            ));
        }
        let rows = sw
            .values
            .par_iter()
            .map(|&y| {
                let (ix, iz) = flux_factor_integrals(x, y)?;
                Ok(vec![sig(y), sig(ix), sig(0.0), sig(iz)])
            })
            .collect::<Result<Vec<_>>>()?;
        return emit(
            out.as_deref(),
            &csv_table(&["h_over_d", "ix", "iy", "iz"], &rows),
        );
    }

    let lp = cfg.require_loop()?;
    let place = cfg.require_placement()?;
    let mat = cfg.require_material()?;
    let radius = cfg.require_magnet_radius()?;
    let moment = magnet_moment(radius, &mat)?;
    let flux = flux_factors_circular(lp, place, &mat, moment.mu)?;
    let l_full = loop_inductance(lp, InductanceModel::Full)?;
    let l_log = loop_inductance(lp, InductanceModel::LeadingLog)?;
    let d_c = match cfg.field.as_ref().and_then(|f| f.b_c) {
        Some(bc) => Some(critical_distance(radius, &mat, bc, lp.tau)?),
        None => None,
    };
    let mut r = JsonReport::new();
    r.num("Ix", flux.ix)
        .num("Iy", flux.iy)
        .num("Iz", flux.iz)
        .num("L_full", l_full)
        .num("L_leading_log", l_log)
        .opt_num("d_c", d_c)
        .num("Phi_e", flux.phi_e);
    emit(out.as_deref(), &r.render())
}

fn cmd_coupling(common: &Common) -> Result<()> {
    let cfg = load(common)?;
    let out = resolve_out(common, &cfg);
    let lp = cfg.require_loop()?;
    let place = cfg.require_placement()?;
    let mat = cfg.require_material()?;
    let radius = cfg.require_magnet_radius()?;
    let field = cfg.require_field()?;
    let moment = magnet_moment(radius, &mat)?;

    if let Some(spec) = &common.sweep {
        let sw = parse_sweep(spec)?;
        if sw.key != "theta" {
            return Err(HmlError::config(
                "sweep",
                format!("coupling sweeps support the key theta, got \"{}\"", sw.key),
            ));
        }
        let q = cfg.require_qubit()?;
        let rows = sw
            .values
            .par_iter()
            .map(|&theta| {
                let qc = qubit_coupling(theta, q.varphi, q.r_q, radius, &mat, field.b0)?;
                let [g_r, g_h] = freq_cells(qc.g);
                let [w_r, w_h] = freq_cells(qc.w);
                let [xi_r, xi_h] = freq_cells(qc.xi.norm());
                let [os_r, os_h] = freq_cells(qc.omega_sigma);
                Ok(vec![
                    sig(theta),
                    g_r,
                    g_h,
                    w_r,
                    w_h,
                    xi_r,
                    xi_h,
                    os_r,
                    os_h,
                    sig(qc.theta_mix),
                ])
            })
            .collect::<Result<Vec<_>>>()?;
        return emit(
            out.as_deref(),
            &csv_table(
                &[
                    "theta_rad",
                    "g_rad_s",
                    "g_hz",
                    "w_rad_s",
                    "w_hz",
                    "xi_abs_rad_s",
                    "xi_abs_hz",
                    "omega_sigma_rad_s",
                    "omega_sigma_hz",
                    "theta_mix_rad",
                ],
                &rows,
            ),
        );
    }

    let flux = flux_factors_circular(lp, place, &mat, moment.mu)?;
    let inductance = loop_inductance(lp, InductanceModel::Full)?;
    // Two identical magnets sharing the loop from opposite sides.
    let pair = SitePair::from_angles(2.0 * (lp.l + place.d), 0.0, PI / 2.0)?;
    let j12 = loop_tunneling(&flux, &flux, inductance, moment.f_total)?.re;
    let j12d = dipolar_tunneling(&pair, moment.f_total, &mat)?;
    let omega_j = site_frequency(
        field.b0,
        &mat,
        moment.f_total,
        Some((&flux, inductance)),
        &[pair],
    )?;

    let qubit = match cfg.qubit.as_ref() {
        Some(q) => {
            let qc = qubit_coupling(q.theta, q.varphi, q.r_q, radius, &mat, field.b0)?;
            let jc = jaynes_cummings_site(&qc, omega_j, q.r_q, moment.f_total, &mat)?;
            for w in &jc.warnings {
                eprintln!("warning: {w}");
            }
            Some((qc, jc))
        }
        None => None,
    };

    let mut r = JsonReport::new();
    r.num("J12_rad_s", j12)
        .num("J12_hz", rad_to_hz(j12))
        .num("J12_dipolar_rad_s", j12d)
        .num("J12_dipolar_hz", rad_to_hz(j12d))
        .num("ratio", j12 / j12d)
        .num("omega_j_rad_s", omega_j)
        .num("omega_j_hz", rad_to_hz(omega_j));
    match &qubit {
        Some((qc, jc)) => {
            r.num("g_dressed_rad_s", qc.g)
                .num("g_dressed_hz", rad_to_hz(qc.g))
                .num("g_maintext_rad_s", jc.g_maintext)
                .num("g_maintext_hz", rad_to_hz(jc.g_maintext))
                .num("omega_sigma_rad_s", qc.omega_sigma)
                .num("omega_sigma_hz", rad_to_hz(qc.omega_sigma))
                .num("Theta_rad", qc.theta_mix);
        }
        None => {
            r.opt_num("g_dressed_rad_s", None)
                .opt_num("g_dressed_hz", None)
                .opt_num("g_maintext_rad_s", None)
                .opt_num("g_maintext_hz", None)
                .opt_num("omega_sigma_rad_s", None)
                .opt_num("omega_sigma_hz", None)
                .opt_num("Theta_rad", None);
        }
    }
    emit(out.as_deref(), &r.render())
}

fn cmd_bands(common: &Common, kind: Option<&str>, nk: usize) -> Result<()> {
    let cfg = load(common)?;
    let out = resolve_out(common, &cfg);
    if common.sweep.is_some() {
        return Err(HmlError::config(
            "sweep",
            "bands does not take a sweep; the momentum grid is set by --nk",
        ));
    }
    let kind_override = match kind {
        None => None,
        Some("chain") => Some(LatticeKind::Chain),
        Some("ring") => Some(LatticeKind::Ring),
        Some("checkerboard") => Some(LatticeKind::Checkerboard),
        Some(other) => {
            return Err(HmlError::config(
                "kind",
                format!("unknown lattice kind \"{other}\"; expected chain, ring, or checkerboard"),
            ))
        }
    };
    let spec = cfg.require_lattice()?.to_spec(kind_override)?;

    let table = match spec.kind {
        LatticeKind::Chain => {
            let bands = chain_dispersion(&spec, nk)?;
            let mut rows = Vec::new();
            for (k, omegas) in bands.kpoints.iter().zip(&bands.bands) {
                for (idx, &omega) in omegas.iter().enumerate() {
                    let [o_r, o_h] = freq_cells(omega);
                    rows.push(vec![sig(k[0]), idx.to_string(), o_r, o_h]);
                }
            }
            csv_table(&["kx_rad_m", "band_index", "omega_rad_s", "omega_hz"], &rows)
        }
        LatticeKind::Checkerboard => {
            let bands = checkerboard_bands(&spec, nk)?;
            let mut rows = Vec::new();
            for (k, omegas) in bands.kpoints.iter().zip(&bands.bands) {
                for (idx, &omega) in omegas.iter().enumerate() {
                    let [o_r, o_h] = freq_cells(omega);
                    rows.push(vec![sig(k[0]), sig(k[1]), idx.to_string(), o_r, o_h]);
                }
            }
            csv_table(
                &["kx_rad_m", "ky_rad_m", "band_index", "omega_rad_s", "omega_hz"],
                &rows,
            )
        }
        LatticeKind::Ring => {
            let spectrum = ring_spectrum(&spec)?;
            let rows = spectrum
                .iter()
                .enumerate()
                .map(|(idx, &omega)| {
                    let [o_r, o_h] = freq_cells(omega);
                    vec![idx.to_string(), o_r, o_h]
                })
                .collect::<Vec<_>>();
            csv_table(&["mode_index", "omega_rad_s", "omega_hz"], &rows)
        }
    };
    emit(out.as_deref(), &table)
}

fn cmd_swap(common: &Common) -> Result<()> {
    let cfg = load(common)?;
    let out = resolve_out(common, &cfg);
    let model = cfg.assemble_model()?;
    let nt = cfg.n_t();
    let t_max = cfg.t_max();

    if let Some(spec) = &common.sweep {
        let sw = parse_sweep(spec)?;
        let build = |v: f64| -> Result<TwoSiteModel> {
            let m = match sw.key.as_str() {
                "kappa" => TwoSiteModel { kappa: v, ..model },
                "gamma" => TwoSiteModel { gamma: v, ..model },
                other => {
                    return Err(HmlError::config(
                        "sweep",
                        format!("swap sweeps support kappa or gamma, got \"{other}\""),
                    ))
                }
            };
            Ok(m)
        };
        // Validate the key once before the parallel map.
        build(model.kappa.max(model.gamma))?;
        let rows = sw
            .values
            .par_iter()
            .map(|&v| {
                let o = swap_fidelity(&build(v)?, t_max, nt)?;
                Ok(vec![sig(v), sig(o.t_star), sig(o.epsilon)])
            })
            .collect::<Result<Vec<_>>>()?;
        let header = match sw.key.as_str() {
            "kappa" => ["kappa_rad_s", "t_star_s", "epsilon"],
            _ => ["gamma_rad_s", "t_star_s", "epsilon"],
        };
        return emit(out.as_deref(), &csv_table(&header, &rows));
    }

    let outcome = swap_fidelity(&model, t_max, nt)?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    match resolve_format(common, &cfg, OutFormat::Json) {
        OutFormat::Csv => {
            let rows = outcome
                .times
                .iter()
                .zip(&outcome.fidelity)
                .map(|(&t, &f)| vec![sig(t), sig(f)])
                .collect::<Vec<_>>();
            emit(out.as_deref(), &csv_table(&["t_s", "fidelity"], &rows))
        }
        OutFormat::Json => {
            let eff = effective_model(&model)?;
            let mut r = JsonReport::new();
            r.num("t_star_s", outcome.t_star)
                .num("epsilon", outcome.epsilon)
                .num("g_eff_rad_s", eff.g_eff)
                .num("kappa_eff_rad_s", eff.kappa_eff)
                .num("Gamma_eff_rad_s", eff.gamma_eff)
                .num("C0", eff.c0)
                .opt_num("alpha_gamma", outcome.alpha_gamma)
                .opt_num("alpha_kappa", outcome.alpha_kappa);
            emit(out.as_deref(), &r.render())
        }
    }
}

fn cmd_fit_alpha(common: &Common, n_points: usize) -> Result<()> {
    let cfg = load(common)?;
    let out = resolve_out(common, &cfg);
    if common.sweep.is_some() {
        return Err(HmlError::config(
            "sweep",
            "fit-alpha runs fixed decoherence sweeps; use --n_points to size them",
        ));
    }
    let model = cfg.assemble_model()?;
    let fit = fit_alpha(&model, n_points)?;
    let mut r = JsonReport::new();
    r.num("alpha_gamma", fit.alpha_gamma)
        .num("alpha_kappa", fit.alpha_kappa)
        .num("r2_gamma", fit.r2_gamma)
        .num("r2_kappa", fit.r2_kappa)
        .boolean("poor_linearity", fit.poor_linearity)
        .int("trajectories", fit.trajectories)
        .pairs("gamma_points", &fit.gamma_points)
        .pairs("kappa_points", &fit.kappa_points);
    emit(out.as_deref(), &r.render())
}

fn cmd_cooperativity(common: &Common) -> Result<()> {
    let cfg = load(common)?;
    let out = resolve_out(common, &cfg);
    let qc = cfg.qubit_chain()?;
    let g = qc.g;
    let dynamics = cfg.dynamics.ok_or_else(|| {
        HmlError::config("dynamics", "cooperativity needs the dynamics section")
    })?;
    let t2 = dynamics.t2_star.ok_or_else(|| {
        HmlError::config(
            "dynamics.T2_star",
            "cooperativity needs the qubit coherence time",
        )
    })?;

    if let Some(spec) = &common.sweep {
        let sw = parse_sweep(spec)?;
        match sw.key.as_str() {
            "kappa" => {
                let rows = sw
                    .values
                    .par_iter()
                    .map(|&k| {
                        let c0 = cooperativity(g, k, t2)?;
                        let [k_r, k_h] = freq_cells(k);
                        Ok(vec![k_r, k_h, sig(c0)])
                    })
                    .collect::<Result<Vec<_>>>()?;
                emit(
                    out.as_deref(),
                    &csv_table(&["kappa_rad_s", "kappa_hz", "c0"], &rows),
                )
            }
            "t2_star" => {
                if !(dynamics.kappa > 0.0) {
                    return Err(HmlError::config(
                        "dynamics.kappa",
                        "a positive magnon decay rate is required to sweep the coherence time",
                    ));
                }
                let rows = sw
                    .values
                    .par_iter()
                    .map(|&t| {
                        let c0 = cooperativity(g, dynamics.kappa, t)?;
                        let [g_r, g_h] = freq_cells(PI / t);
                        Ok(vec![sig(t), g_r, g_h, sig(c0)])
                    })
                    .collect::<Result<Vec<_>>>()?;
                emit(
                    out.as_deref(),
                    &csv_table(&["t2_s", "gamma_rad_s", "gamma_hz", "c0"], &rows),
                )
            }
            other => Err(HmlError::config(
                "sweep",
                format!("cooperativity sweeps support kappa or t2_star, got \"{other}\""),
            )),
        }
    } else {
        if !(dynamics.kappa > 0.0) {
            return Err(HmlError::config(
                "dynamics.kappa",
                "cooperativity needs a positive magnon decay rate",
            ));
        }
        let c0 = cooperativity(g, dynamics.kappa, t2)?;
        let gamma = PI / t2;
        let mut r = JsonReport::new();
        r.num("g_rad_s", g)
            .num("g_hz", rad_to_hz(g))
            .num("kappa_rad_s", dynamics.kappa)
            .num("kappa_hz", rad_to_hz(dynamics.kappa))
            .num("gamma_rad_s", gamma)
            .num("gamma_hz", rad_to_hz(gamma))
            .num("t2_s", t2)
            .num("c0", c0);
        emit(out.as_deref(), &r.render())
    }
}
