//! Tunneling-rate, site-frequency, and qubit-coupling properties.

use approx::assert_relative_eq;
use hml_core::couplings::{
    counter_rotating_and_linear, dipolar_tunneling, jaynes_cummings_site, loop_tunneling,
    qubit_coupling, site_frequency, SiteInput, SitePair,
};
use hml_core::geometry::{
    flux_factor_integrals, flux_factors_circular, loop_inductance, InductanceModel, LoopSpec,
    Placement,
};
use hml_core::units::{magnet_moment, yig_preset, MaterialParams, HBAR, MU0};
use nalgebra::Vector3;
use num_complex::Complex64;
use proptest::prelude::*;

const PI: f64 = std::f64::consts::PI;

/// Synthetic flux factors with a nonzero transverse part, for phase tests.
fn synthetic_flux(ix: f64, iy: f64, d: f64) -> hml_core::geometry::FluxFactors {
    let mat = yig_preset();
    hml_core::geometry::FluxFactors {
        ix,
        iy,
        iz: 0.0,
        phi_e: HBAR * mat.gamma0 * MU0 / (4.0 * PI * d),
        phi_bias: 0.0,
    }
}

/// The quoted two-magnet arrangement: R = 1 um spheres at d = 1.5 um from a
/// 30 um loop of 50 nm wire, h = 0, separated along the bias axis.
struct RingConfig {
    flux: hml_core::geometry::FluxFactors,
    inductance: f64,
    f_total: f64,
    separation: f64,
}

fn ring_config() -> RingConfig {
    let mat = yig_preset();
    let magnet = magnet_moment(1e-6, &mat).unwrap();
    let lp = LoopSpec::new(30e-6, 50e-9);
    let place = Placement { d: 1.5e-6, h: 0.0 };
    RingConfig {
        flux: flux_factors_circular(&lp, &place, &mat, magnet.mu).unwrap(),
        inductance: loop_inductance(&lp, InductanceModel::Full).unwrap(),
        f_total: magnet.f_total,
        separation: 2.0 * (30e-6 + 1.5e-6),
    }
}

#[test]
fn quoted_configuration_anchors() {
    let mat = yig_preset();
    let cfg = ring_config();
    let j12 = loop_tunneling(&cfg.flux, &cfg.flux, cfg.inductance, cfg.f_total).unwrap();
    assert_relative_eq!(j12.re, 3.8998666e6, max_relative = 1e-7);
    assert_eq!(j12.im, 0.0);

    let pair = SitePair::from_angles(cfg.separation, 0.0, PI / 2.0).unwrap();
    let j12d = dipolar_tunneling(&pair, cfg.f_total, &mat).unwrap();
    assert_relative_eq!(j12d / (2.0 * PI), 9.2076e3, max_relative = 1e-4);
    assert_relative_eq!(j12.re / j12d, 67.41, max_relative = 1e-3);
}

#[test]
fn loop_tunneling_is_hermitian() {
    let a = synthetic_flux(1.2, 0.4, 1.5e-6);
    let b = synthetic_flux(-0.7, 0.9, 2.5e-6);
    let inductance = 2.5e-10;
    let f_total = 4.4e10;
    let ij = loop_tunneling(&a, &b, inductance, f_total).unwrap();
    let ji = loop_tunneling(&b, &a, inductance, f_total).unwrap();
    assert_eq!(ij.re, ji.re);
    assert_eq!(ij.im, -ji.im);
    assert!(ij.im != 0.0, "transverse flux must produce a complex rate");
    // Zero geometric overlap kills the rate entirely.
    let zero = synthetic_flux(0.0, 0.0, 1.5e-6);
    let none = loop_tunneling(&zero, &b, inductance, f_total).unwrap();
    assert_eq!(none, Complex64::new(0.0, 0.0));
}

#[test]
fn diagonal_loop_rate_is_real_and_positive() {
    let cfg = ring_config();
    let jjj = loop_tunneling(&cfg.flux, &cfg.flux, cfg.inductance, cfg.f_total).unwrap();
    assert_eq!(jjj.im, 0.0);
    // Equal real flux factors reduce to the scalar substitution form.
    let expected = cfg.flux.phi_e * cfg.flux.phi_e * cfg.flux.ix * cfg.flux.ix * cfg.f_total
        / (2.0 * HBAR * cfg.inductance);
    assert_relative_eq!(jjj.re, expected, max_relative = 1e-12);
}

/// The rate ratio J12 / J12_dipolar is a pure geometry number: the collective
/// spin F and the saturation magnetization cancel.
#[test]
fn tunneling_ratio_is_material_independent() {
    let ratio_for = |mat: &MaterialParams| {
        let magnet = magnet_moment(1e-6, mat).unwrap();
        let lp = LoopSpec::new(30e-6, 50e-9);
        let place = Placement { d: 1.5e-6, h: 0.0 };
        let flux = flux_factors_circular(&lp, &place, mat, magnet.mu).unwrap();
        let inductance = loop_inductance(&lp, InductanceModel::Full).unwrap();
        let j12 = loop_tunneling(&flux, &flux, inductance, magnet.f_total).unwrap();
        let pair = SitePair::from_angles(63e-6, 0.0, PI / 2.0).unwrap();
        let j12d = dipolar_tunneling(&pair, magnet.f_total, mat).unwrap();
        j12.re / j12d
    };
    let yig = yig_preset();
    let mut other = yig.clone();
    other.ms = 100e3;
    other.gamma0 = 2.0e11;
    let r1 = ratio_for(&yig);
    let r2 = ratio_for(&other);
    assert_relative_eq!(r1, r2, max_relative = 1e-12);
}

/// J12 falls off as 1/l up to the logarithmic inductance factor: the log-log
/// slope over l in [10 d, 1000 d] stays within [-1.15, -0.95].
#[test]
fn loop_rate_inverse_length_scaling() {
    let mat = yig_preset();
    let magnet = magnet_moment(1e-6, &mat).unwrap();
    let d = 1.5e-6;
    let mut lnl = Vec::new();
    let mut lnj = Vec::new();
    for i in 0..8 {
        let l = 10.0 * d * (100.0f64).powf(i as f64 / 7.0);
        let lp = LoopSpec::new(l, 50e-9);
        let flux =
            flux_factors_circular(&lp, &Placement { d, h: 0.0 }, &mat, magnet.mu).unwrap();
        let inductance = loop_inductance(&lp, InductanceModel::Full).unwrap();
        let j = loop_tunneling(&flux, &flux, inductance, magnet.f_total).unwrap();
        lnl.push(l.ln());
        lnj.push(j.re.ln());
    }
    let n = lnl.len() as f64;
    let mx = lnl.iter().sum::<f64>() / n;
    let my = lnj.iter().sum::<f64>() / n;
    let slope = lnl
        .iter()
        .zip(&lnj)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / lnl.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
    assert!(
        (-1.15..=-0.95).contains(&slope),
        "log-log slope {slope} outside [-1.15, -0.95]"
    );
}

#[test]
fn dipolar_rate_angle_structure() {
    let mat = yig_preset();
    let f_total = 4.4184e10;
    let r = 63e-6;
    // Bias-axis pair: (3 sin^2 - 2) = -2 flips the leading minus sign.
    let axial = dipolar_tunneling(&SitePair::from_angles(r, 0.0, 0.0).unwrap(), f_total, &mat)
        .unwrap();
    let expected = HBAR * mat.gamma0.powi(2) * MU0 * f_total / (4.0 * PI * r.powi(3));
    assert_relative_eq!(axial, expected, max_relative = 1e-12);
    // Magic angle sin^2 = 2/3 kills the rate.
    let magic = (2.0f64 / 3.0).sqrt().asin();
    let zero = dipolar_tunneling(
        &SitePair::from_angles(r, magic, 1.0).unwrap(),
        f_total,
        &mat,
    )
    .unwrap();
    assert!(zero.abs() < 1e-12 * expected.abs());
    // In-plane pair: half the axial magnitude, opposite sign.
    let planar = dipolar_tunneling(
        &SitePair::from_angles(r, PI / 2.0, 0.3).unwrap(),
        f_total,
        &mat,
    )
    .unwrap();
    assert_relative_eq!(planar, -expected / 2.0, max_relative = 1e-12);
}

#[test]
fn site_pair_geometry() {
    let up = SitePair::new(Vector3::new(0.0, 0.0, 2e-6), Vector3::zeros()).unwrap();
    assert_relative_eq!(up.theta_ij, 0.0, epsilon = 1e-15);
    assert_relative_eq!(up.r_ij, 2e-6, max_relative = 1e-15);
    let planar = SitePair::new(Vector3::new(0.0, 3e-6, 0.0), Vector3::zeros()).unwrap();
    assert_relative_eq!(planar.theta_ij, PI / 2.0, epsilon = 1e-12);
    assert_relative_eq!(planar.phi_ij, PI / 2.0, epsilon = 1e-12);
    assert!(SitePair::new(Vector3::zeros(), Vector3::zeros()).is_err());
}

#[test]
fn site_frequency_composition() {
    let mat = yig_preset();
    let b0 = 70e-3;
    let f_total = 4.4184e10;
    // Isolated magnet: Zeeman plus anisotropy terms only.
    let bare = site_frequency(b0, &mat, f_total, None, &[]).unwrap();
    assert_relative_eq!(
        bare,
        mat.gamma0 * b0 + 2.0 * mat.gamma0 * mat.ka / mat.ms,
        max_relative = 1e-14
    );
    // A bias-axis neighbor shifts the frequency up by twice the dipolar scale.
    let r = 63e-6;
    let pair = SitePair::from_angles(r, 0.0, 0.0).unwrap();
    let shifted = site_frequency(b0, &mat, f_total, None, &[pair]).unwrap();
    let dipolar_scale = HBAR * mat.gamma0.powi(2) * MU0 * f_total / (4.0 * PI * r.powi(3));
    assert_relative_eq!(shifted - bare, 2.0 * dipolar_scale, max_relative = 1e-9);
    // The loop self-term adds the diagonal tunneling rate.
    let cfg = ring_config();
    let with_loop =
        site_frequency(b0, &mat, cfg.f_total, Some((&cfg.flux, cfg.inductance)), &[]).unwrap();
    let jjj = loop_tunneling(&cfg.flux, &cfg.flux, cfg.inductance, cfg.f_total).unwrap();
    let bare_cfg = site_frequency(b0, &mat, cfg.f_total, None, &[]).unwrap();
    assert_relative_eq!(with_loop - bare_cfg, jjj.re, max_relative = 1e-9);
}

#[test]
fn diagnostic_couplings_structure() {
    let mat = yig_preset();
    let cfg = ring_config();
    let z = 63e-6 / 2.0;
    let sites = vec![
        SiteInput {
            position: Vector3::new(0.0, 0.0, -z),
            flux: cfg.flux,
        },
        SiteInput {
            position: Vector3::new(0.0, 0.0, z),
            flux: cfg.flux,
        },
    ];
    // Without the circuit mode chi is absent; a non-positive capacitance is
    // rejected as a configuration error naming the field.
    let no_circuit =
        counter_rotating_and_linear(&sites, cfg.inductance, cfg.f_total, &mat, None).unwrap();
    assert!(no_circuit.chi.is_none());
    let bad = counter_rotating_and_linear(
        &sites,
        cfg.inductance,
        cfg.f_total,
        &mat,
        Some((0.0, 2.0 * PI * 5e8)),
    );
    match bad {
        Err(hml_core::HmlError::Config { path, .. }) => assert_eq!(path, "loop.cap"),
        other => panic!("zero capacitance must be a config error, got {other:?}"),
    }
    let diag = counter_rotating_and_linear(
        &sites,
        cfg.inductance,
        cfg.f_total,
        &mat,
        Some((1e-13, 2.0 * PI * 5e8)),
    )
    .unwrap();
    assert!(diag.chi.is_some());
    assert_eq!(diag.lambda.nrows(), 2);
    // Bias-axis pair at h = 0: both linear-drive sources vanish (the dipolar
    // one through sin(theta) cos(theta), the loop one through the bias flux).
    // The natural scale of the dipolar drive sets the roundoff tolerance.
    let r = 2.0 * z;
    let eta_scale = 3.0 * HBAR * MU0 * mat.gamma0.powi(2) * cfg.f_total
        * (2.0 * cfg.f_total).sqrt()
        / (8.0 * PI * r.powi(3));
    for eta in &diag.eta {
        assert!(
            eta.norm() < 1e-12 * eta_scale,
            "in-plane placement must give zero linear drive, got {eta}"
        );
    }
    // Lambda is symmetric in the site indices for identical flux factors.
    assert_relative_eq!(
        diag.lambda[(0, 1)].re,
        diag.lambda[(1, 0)].re,
        max_relative = 1e-12
    );
    // A bias-axis pair has no transverse dipolar factor: Lambda reduces to
    // the loop-mediated part, so removing the flux must zero it.
    let bare_sites: Vec<SiteInput> = sites
        .iter()
        .map(|s| SiteInput {
            position: s.position,
            flux: synthetic_flux(0.0, 0.0, 1.5e-6),
        })
        .collect();
    let bare = counter_rotating_and_linear(&bare_sites, cfg.inductance, cfg.f_total, &mat, None)
        .unwrap();
    let lambda_scale =
        3.0 * HBAR * mat.gamma0.powi(2) * MU0 * cfg.f_total / (16.0 * PI * r.powi(3));
    assert!(
        bare.lambda[(0, 1)].norm() < 1e-12 * lambda_scale,
        "theta = 0 kills the dipolar part and I = 0 kills the loop part"
    );
}

#[test]
fn qubit_coupling_spot_and_scaling() {
    let mat = yig_preset();
    let qc = qubit_coupling(PI / 2.0, 0.0, 370e-9, 350e-9, &mat, 70e-3).unwrap();
    assert_relative_eq!(qc.g / (2.0 * PI), 67.143e3, max_relative = 1e-4);
    assert_relative_eq!(qc.omega_q / (2.0 * PI), 0.907551e9, max_relative = 1e-6);
    // theta = pi/2 kills the transverse mixing up to the sin/cos roundoff of
    // the angle itself: compare against the coupling scale.
    assert!(qc.theta_mix.abs() < 1e-12);
    assert!(qc.xi.norm() < 1e-12 * qc.g.abs());
    assert_relative_eq!(qc.omega_sigma, qc.omega_sigma_bare, max_relative = 1e-15);
    // The scaling-law constant.
    let qc2 = qubit_coupling(PI / 2.0, 0.0, 800e-9, 500e-9, &mat, 70e-3).unwrap();
    let constant = (qc2.g / (2.0 * PI) / 1e6) / (500.0f64.sqrt() / 800.0).powi(3);
    assert_relative_eq!(constant, 519.402, max_relative = 1e-5);
    // Qubit inside the magnet is rejected.
    assert!(qubit_coupling(PI / 2.0, 0.0, 300e-9, 350e-9, &mat, 70e-3).is_err());
}

proptest! {
    /// Dressing preserves the quadrature sum: omega_sigma^2 - omega_sigma(theta)^2
    /// = F xi(theta)^2 to 1e-10 relative.
    #[test]
    fn dressed_identity(
        theta in 0.05..3.09f64,
        r_scale in 1.1..3.0f64,
        radius in 1e-7..1e-6f64,
        b0 in 0.02..0.2f64,
    ) {
        let mat = yig_preset();
        let r_q = r_scale * radius;
        let f_total = magnet_moment(radius, &mat).unwrap().f_total;
        let qc = qubit_coupling(theta, 0.4, r_q, radius, &mat, b0).unwrap();
        let lhs = qc.omega_sigma * qc.omega_sigma - qc.omega_sigma_bare * qc.omega_sigma_bare;
        let rhs = f_total * qc.xi_theta * qc.xi_theta;
        let scale = qc.omega_sigma * qc.omega_sigma;
        prop_assert!(((lhs - rhs) / scale).abs() < 1e-10,
            "identity violated by {:.3e}", ((lhs - rhs) / scale).abs());
        // The dressed splitting majorizes the bare one.
        prop_assert!(qc.omega_sigma >= qc.omega_sigma_bare.abs() * (1.0 - 1e-15));
    }

    /// Mixing-angle branch: a negative xi(theta)/omega_sigma(theta) ratio
    /// puts Theta in the upper half-branch.
    #[test]
    fn mixing_angle_branch(
        theta in 0.05..3.09f64,
        r_scale in 1.1..3.0f64,
        radius in 1e-7..1e-6f64,
        b0 in 0.02..0.2f64,
    ) {
        let mat = yig_preset();
        let qc = qubit_coupling(theta, 0.0, r_scale * radius, radius, &mat, b0).unwrap();
        prop_assert!((0.0..=PI).contains(&qc.theta_mix));
        let ratio = qc.xi_theta / qc.omega_sigma_bare;
        if ratio < -1e-12 {
            prop_assert!(qc.theta_mix > PI / 2.0,
                "ratio {ratio} demands the upper branch, got Theta = {}", qc.theta_mix);
        } else if ratio > 1e-12 {
            prop_assert!(qc.theta_mix < PI / 2.0);
        }
    }
}

#[test]
fn jaynes_cummings_site_normalizations() {
    let mat = yig_preset();
    let radius = 350e-9;
    let r_q = 370e-9;
    let f_total = magnet_moment(radius, &mat).unwrap().f_total;
    let qc = qubit_coupling(PI / 2.0, 0.0, r_q, radius, &mat, 70e-3).unwrap();
    let omega_magnon = 2.0 * PI * 2e9;
    let jc = jaynes_cummings_site(&qc, omega_magnon, r_q, f_total, &mat).unwrap();
    assert_relative_eq!(jc.g_maintext / jc.g, 2.0f64.sqrt(), max_relative = 1e-12);
    assert_eq!(jc.g, qc.g);
    // The shifted qubit frequency carries the static dipole shift.
    let shift = HBAR * mat.gamma0 * mat.gammaq * MU0 * f_total / (4.0 * PI * r_q.powi(3));
    assert_relative_eq!(jc.omega_qubit, qc.omega_q + shift, max_relative = 1e-12);

    // sqrt(F) scaling: four times the collective spin doubles g.
    let big_radius = radius * 4.0f64.cbrt();
    let big_f = magnet_moment(big_radius, &mat).unwrap().f_total;
    assert_relative_eq!(big_f, 4.0 * f_total, max_relative = 1e-12);
    let r_q_big = 3.0 * big_radius;
    let g_small = qubit_coupling(PI / 2.0, 0.0, r_q_big, radius, &mat, 70e-3).unwrap().g;
    let g_big = qubit_coupling(PI / 2.0, 0.0, r_q_big, big_radius, &mat, 70e-3).unwrap().g;
    assert_relative_eq!(g_big, 2.0 * g_small, max_relative = 1e-12);

    // Detuned far off resonance the rotating-wave warning must fire.
    let detuned = jaynes_cummings_site(&qc, 100.0 * qc.omega_q.abs(), r_q, f_total, &mat).unwrap();
    assert!(
        !detuned.warnings.is_empty(),
        "|omega - omega_sigma| comparable to omega must warn"
    );
}

/// The qubit and magnon frequency curves cross as the bias field sweeps:
/// omega_q falls with B0 while the magnon frequency rises, so a matching
/// field exists (the crossing used to bring the pair into resonance).
#[test]
fn bias_field_resonance_crossing() {
    let mat = yig_preset();
    let f_total = magnet_moment(350e-9, &mat).unwrap().f_total;
    let gap = |b0: f64| {
        let magnon = site_frequency(b0, &mat, f_total, None, &[]).unwrap();
        let qc = qubit_coupling(PI / 2.0, 0.0, 370e-9, 350e-9, &mat, b0).unwrap();
        qc.omega_sigma - magnon
    };
    let (mut lo, mut hi) = (1e-3, 0.15);
    assert!(gap(lo) > 0.0, "qubit must start above the magnon branch");
    assert!(gap(hi) < 0.0, "qubit must end below the magnon branch");
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // The static dipole shift at r_q = 370 nm pushes the qubit branch well
    // above the bare zero-field splitting, so the crossing lands near 73 mT.
    let crossing = 0.5 * (lo + hi);
    assert!(
        (0.05..0.10).contains(&crossing),
        "resonance field {crossing} T outside the expected window around 73 mT"
    );
}

#[test]
fn flux_neutral_height_exists() {
    // The in-plane factor changes sign with height: a lift-off y* with
    // Ix(y*) ~ 0 decouples the magnet from the loop. At l/d = 20 the
    // neutral height sits at h/d = 3.70835938.
    let y_star = 3.70835938;
    let (ix, _) = flux_factor_integrals(20.0, y_star).unwrap();
    assert!(ix.abs() < 1e-7, "Ix at the neutral height came out {ix:.3e}");
    // The crossing is a genuine sign change, not a grazing touch.
    let (below, _) = flux_factor_integrals(20.0, 0.9 * y_star).unwrap();
    let (above, _) = flux_factor_integrals(20.0, 1.1 * y_star).unwrap();
    assert!(below > 0.0 && above < 0.0);
}
