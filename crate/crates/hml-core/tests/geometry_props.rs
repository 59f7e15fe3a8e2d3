//! Loop geometry, flux quadrature, dipole field, and placement properties.

use approx::assert_relative_eq;
use hml_core::geometry::{
    bone_tunneling, critical_distance, dipole_field, flux_factor_integrals,
    flux_factor_integrals_with_order, flux_factors_circular, loop_inductance,
    resonator_mode_frequencies, InductanceModel, LoopSpec, Placement, FLUX_QUAD_TOL,
};
use hml_core::units::{magnet_moment, yig_preset, HBAR, MU0};
use hml_core::HmlError;
use nalgebra::Vector3;
use proptest::prelude::*;

const PI: f64 = std::f64::consts::PI;

#[test]
fn inductance_anchors() {
    let lp = LoopSpec::new(30e-6, 50e-9);
    let full = loop_inductance(&lp, InductanceModel::Full).unwrap();
    let log = loop_inductance(&lp, InductanceModel::LeadingLog).unwrap();
    assert_relative_eq!(full, 2.535782200e-10, max_relative = 1e-9);
    assert_relative_eq!(log, 3.195516658e-10, max_relative = 1e-9);
    assert!(log > full, "dropping the -7/4 correction must increase L");
}

#[test]
fn inductance_rejects_thick_wire() {
    let lp = LoopSpec::new(30e-6, 30e-6);
    assert!(loop_inductance(&lp, InductanceModel::Full).is_err());
    // Thin but not thin enough: validity warning, not an error.
    let warnish = LoopSpec::new(30e-6, 29e-6);
    assert!(loop_inductance(&warnish, InductanceModel::Full).is_ok());
    let warnings = warnish.validate().unwrap();
    assert!(
        !warnings.is_empty(),
        "tau close to l must raise a thin-wire validity warning"
    );
    assert!(LoopSpec::new(30e-6, 50e-9).validate().unwrap().is_empty());
}

#[test]
fn inductance_is_nearly_linear_in_radius() {
    // L(2l)/L(l) -> 2 as l grows, up to the logarithmic correction.
    let tau = 50e-9;
    let ratio_at = |l: f64| {
        let a = loop_inductance(&LoopSpec::new(l, tau), InductanceModel::Full).unwrap();
        let b = loop_inductance(&LoopSpec::new(2.0 * l, tau), InductanceModel::Full).unwrap();
        b / a
    };
    let mut prev = f64::INFINITY;
    for l in [1e-4f64, 1e-3, 1e-2, 1e-1] {
        let ratio = ratio_at(l);
        assert!(ratio > 2.0 && ratio < 2.2, "ratio {ratio} at l = {l}");
        assert!(ratio < prev, "ratio must fall toward 2 as l grows; broke at l = {l}");
        prev = ratio;
    }
}

#[test]
fn resonator_modes_are_harmonic() {
    let mut lp = LoopSpec::new(30e-6, 50e-9);
    assert!(matches!(
        resonator_mode_frequencies(&lp, 3),
        Err(HmlError::Config { .. })
    ));
    lp.per_unit_l = Some(1e-6);
    lp.per_unit_c = Some(100e-12);
    let modes = resonator_mode_frequencies(&lp, 3).unwrap();
    assert_eq!(modes.len(), 3);
    // omega_n = n / (l sqrt(Ll Cl)); the example parameters give 1/(30e-6 * 1e-8).
    assert_relative_eq!(modes[0], 1.0 / (30e-6 * 1e-8), max_relative = 1e-12);
    assert_relative_eq!(modes[1], 2.0 * modes[0], max_relative = 1e-12);
    assert_relative_eq!(modes[2], 3.0 * modes[0], max_relative = 1e-12);
    // Doubling the radius halves every mode.
    let mut lp2 = lp.clone();
    lp2.l *= 2.0;
    let modes2 = resonator_mode_frequencies(&lp2, 1).unwrap();
    assert_relative_eq!(modes2[0], modes[0] / 2.0, max_relative = 1e-12);
}

#[test]
fn flux_factor_anchors() {
    let (ix, iz) = flux_factor_integrals(20.0, 0.0).unwrap();
    assert_relative_eq!(ix, 1.753933195, max_relative = 1e-8);
    assert_eq!(iz, 0.0, "axial factor vanishes identically at h = 0");
    let (ix, iz) = flux_factor_integrals(1000.0, 1.0).unwrap();
    assert_relative_eq!(ix, 0.9918648548, max_relative = 1e-8);
    assert_relative_eq!(iz, 0.9994945276, max_relative = 1e-8);
}

#[test]
fn flux_factors_struct_fields() {
    let mat = yig_preset();
    let mu = magnet_moment(1e-6, &mat).unwrap().mu;
    let lp = LoopSpec::new(30e-6, 50e-9);
    let d = 1.5e-6;

    let flat = flux_factors_circular(&lp, &Placement { d, h: 0.0 }, &mat, mu).unwrap();
    assert_eq!(flat.iy, 0.0);
    assert_eq!(flat.iz, 0.0);
    assert_eq!(flat.phi_bias, 0.0, "no static flux from an in-plane moment");
    assert_relative_eq!(flat.phi_e, HBAR * mat.gamma0 * MU0 / (4.0 * PI * d), max_relative = 1e-15);

    let lifted = flux_factors_circular(&lp, &Placement { d, h: 0.75e-6 }, &mat, mu).unwrap();
    assert!(lifted.iz > 0.0);
    // The static flux is the -z moment threading the axial factor.
    assert_relative_eq!(
        lifted.phi_bias,
        -MU0 * mu * lifted.iz / (4.0 * PI * d),
        max_relative = 1e-12
    );
}

/// The two flux integrands stay finite for every d > 0 and the factors are
/// bounded on physical ranges.
#[test]
fn flux_factors_finite_on_wide_ranges() {
    for &x in &[0.1, 1.0, 20.0, 1e3] {
        for &y in &[0.0, 0.3, 1.0, 2.0, 5.0] {
            let (ix, iz) = flux_factor_integrals(x, y).unwrap();
            assert!(ix.is_finite() && iz.is_finite(), "non-finite at x={x}, y={y}");
            assert!(ix.abs() < 10.0 && iz.abs() < 10.0, "unbounded at x={x}, y={y}");
        }
    }
    let (ix, iz) = flux_factor_integrals(1e4, 0.5).unwrap();
    assert!(ix.is_finite() && iz.is_finite());
}

/// At extreme aspect ratios the integrand's floating-point cancellation puts
/// a floor under the reachable accuracy; the quadrature must refuse with the
/// achieved error rather than return a silently degraded value.
#[test]
fn quadrature_refuses_beyond_roundoff_floor() {
    let far = flux_factor_integrals(1e5, 2.0);
    match far {
        Err(HmlError::Convergence { achieved, tolerance, .. }) => {
            assert!(achieved > tolerance);
            assert!(achieved < 1e-6, "achieved error {achieved:.3e} should still be near-tolerance");
        }
        other => panic!("expected an honest convergence refusal, got {other:?}"),
    }
}

/// Fig. 2-style shape at l/d = 1000: the in-plane factor decreases
/// monotonically with height while the axial factor has one interior maximum.
#[test]
fn flux_factor_height_profiles() {
    let x = 1000.0;
    let heights: Vec<f64> = (0..=40).map(|i| i as f64 * 0.05).collect();
    let mut ix_prev = f64::INFINITY;
    let mut iz_values = Vec::new();
    for &y in &heights {
        let (ix, iz) = flux_factor_integrals(x, y).unwrap();
        assert!(ix < ix_prev, "Ix must decrease with height; broke at y = {y}");
        ix_prev = ix;
        iz_values.push(iz);
    }
    assert_eq!(iz_values[0], 0.0);
    let peak = iz_values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap()
        .0;
    assert!(
        peak > 0 && peak < iz_values.len() - 1,
        "Iz must peak strictly inside the height range, peaked at index {peak}"
    );
    for i in 1..iz_values.len() {
        let rising = i <= peak;
        assert_eq!(
            iz_values[i] > iz_values[i - 1],
            rising,
            "Iz must rise before its single peak and fall after it; broke at index {i}"
        );
    }
}

/// Large-loop limit: the factors at l/d = 1e2 and 1e3 are claimed to agree
/// within 2% for h/d <= 2. The axial factor does; the in-plane factor still
/// changes by 3-11% between the two loop sizes at h/d >= 1 because its
/// large-x limit is approached only logarithmically, so this bound fails as
/// stated. The assertion is kept at the claimed 2% and the failure documents
/// the measured gap.
#[test]
fn flux_factor_large_loop_collapse() {
    let mut worst: (f64, f64, &str) = (0.0, 0.0, "");
    for i in 0..=8 {
        let y = 0.25 * i as f64;
        let (ix2, iz2) = flux_factor_integrals(1e2, y).unwrap();
        let (ix3, iz3) = flux_factor_integrals(1e3, y).unwrap();
        let rel_ix = ((ix2 - ix3) / ix3).abs();
        if rel_ix > worst.0 {
            worst = (rel_ix, y, "Ix");
        }
        if y > 0.0 {
            let rel_iz = ((iz2 - iz3) / iz3).abs();
            if rel_iz > worst.0 {
                worst = (rel_iz, y, "Iz");
            }
        }
    }
    assert!(
        worst.0 <= 0.02,
        "{} at h/d = {} differs by {:.2}% between l/d = 1e2 and 1e3; the stated 2% \
         collapse bound is not met (the curves only look coincident on a coarse plot)",
        worst.2,
        worst.1,
        100.0 * worst.0
    );
}

#[test]
fn critical_distance_anchor_and_limits() {
    let mat = yig_preset();
    let tau = 50e-9;
    let r = 350e-9;
    // Unit cube root: Bc = 2 mu0 Ms / 3 makes d_c = tau/2 + R exactly.
    let bc_unit = 2.0 * MU0 * mat.ms / 3.0;
    assert_relative_eq!(
        critical_distance(r, &mat, bc_unit, tau).unwrap(),
        tau / 2.0 + r,
        max_relative = 1e-12
    );
    // Strong-field limit: the magnet part falls off as Bc^(-1/3), so the gap
    // collapses onto the wire half-thickness.
    let gap = |bc: f64| critical_distance(r, &mat, bc, tau).unwrap() - tau / 2.0;
    assert_relative_eq!(gap(1e3 * bc_unit), gap(bc_unit) / 10.0, max_relative = 1e-12);
    assert!(gap(1e18) < 1e-6 * r);
    assert!(critical_distance(r, &mat, 0.0, tau).is_err());
    assert!(critical_distance(r, &mat, -1.0, tau).is_err());
}

proptest! {
    /// Doubling the quadrature base order moves each factor by less than 1e-8.
    #[test]
    fn quadrature_order_doubling(x in 1.0..2000.0f64, y in 0.0..3.0f64) {
        let coarse = flux_factor_integrals_with_order(x, y, FLUX_QUAD_TOL, 8).unwrap();
        let fine = flux_factor_integrals_with_order(x, y, FLUX_QUAD_TOL, 16).unwrap();
        prop_assert!((coarse.0 - fine.0).abs() < 1e-8, "Ix moved by {:.3e}", (coarse.0 - fine.0).abs());
        prop_assert!((coarse.1 - fine.1).abs() < 1e-8, "Iz moved by {:.3e}", (coarse.1 - fine.1).abs());
    }

    /// The dipole field is exactly antisymmetric under moment reversal.
    #[test]
    fn dipole_antisymmetry(
        mx in -1e-12..1e-12f64, my in -1e-12..1e-12f64, mz in -1e-12..1e-12f64,
        px in 0.1e-6..5e-6f64, py in 0.1e-6..5e-6f64, pz in 0.1e-6..5e-6f64,
    ) {
        let m = Vector3::new(mx, my, mz);
        let src = Vector3::zeros();
        let obs = Vector3::new(px, py, pz);
        let plus = dipole_field(m, src, obs).unwrap();
        let minus = dipole_field(-m, src, obs).unwrap();
        prop_assert_eq!(plus, -minus);
    }

    /// The dipole field is divergence-free away from the source: central
    /// differences at a random observation point cancel to relative 1e-8.
    #[test]
    fn dipole_divergence_free(
        r in 0.5e-6..5e-6f64,
        costheta in -0.99..0.99f64,
        phi in 0.0..(2.0 * PI),
        mz in 0.2e-12..1e-12f64,
    ) {
        let m = Vector3::new(0.3 * mz, -0.5 * mz, mz);
        let src = Vector3::zeros();
        let sintheta = (1.0 - costheta * costheta).sqrt();
        let obs = r * Vector3::new(sintheta * phi.cos(), sintheta * phi.sin(), costheta);
        let h = 1e-5 * r;
        let mut div = 0.0;
        for axis in 0..3 {
            let mut e = Vector3::zeros();
            e[axis] = h;
            let fp = dipole_field(m, src, obs + e).unwrap();
            let fm = dipole_field(m, src, obs - e).unwrap();
            div += (fp[axis] - fm[axis]) / (2.0 * h);
        }
        // Normalize by the derivative scale |B| / r; individual diagonal
        // gradients pass through zeros at special angles and cannot serve
        // as the reference.
        let scale = dipole_field(m, src, obs).unwrap().norm() / r;
        prop_assert!(
            div.abs() <= 1e-8 * scale,
            "relative divergence {:.3e}", div.abs() / scale
        );
    }

    /// A stronger critical field always allows a smaller gap.
    #[test]
    fn critical_distance_monotone(bc in 1e-3..1.0f64, factor in 1.01..10.0f64, r in 1e-7..2e-6f64) {
        let mat = yig_preset();
        let near = critical_distance(r, &mat, bc * factor, 50e-9).unwrap();
        let far = critical_distance(r, &mat, bc, 50e-9).unwrap();
        prop_assert!(near < far);
    }
}

#[test]
fn dipole_axial_and_equatorial_anchors() {
    let mu = 8.21e-13;
    let m = Vector3::new(0.0, 0.0, mu);
    let r = 2e-6;
    let axial = dipole_field(m, Vector3::zeros(), Vector3::new(0.0, 0.0, r)).unwrap();
    let expected_axial = MU0 * mu / (2.0 * PI * r.powi(3));
    assert_relative_eq!(axial.z, expected_axial, max_relative = 1e-12);
    assert!(axial.x.abs() < 1e-30 && axial.y.abs() < 1e-30);
    let equatorial = dipole_field(m, Vector3::zeros(), Vector3::new(r, 0.0, 0.0)).unwrap();
    assert_relative_eq!(equatorial.z, -MU0 * mu / (4.0 * PI * r.powi(3)), max_relative = 1e-12);
    assert!(dipole_field(m, Vector3::zeros(), Vector3::zeros()).is_err());
}

#[test]
fn bone_link_scales_with_gap_and_inductance() {
    let mat = yig_preset();
    let f = magnet_moment(1e-6, &mat).unwrap().f_total;
    let tau = 50e-9;
    assert!(bone_tunneling(40e-9, tau, 1e-6, f, &mat).is_err(), "d <= tau must be rejected");

    let d = 500e-9;
    let (j1, warn1) = bone_tunneling(d, tau, 1e-6, f, &mat).unwrap();
    assert!(
        !warn1.is_empty(),
        "R >= d leaves the point-dipole regime and must carry a validity warning"
    );
    let (j2, _) = bone_tunneling(2.0 * d, tau, 1e-6, f, &mat).unwrap();
    let l1 = loop_inductance(&LoopSpec::new(d, tau), InductanceModel::Full).unwrap();
    let l2 = loop_inductance(&LoopSpec::new(2.0 * d, tau), InductanceModel::Full).unwrap();
    assert_relative_eq!(j1 / j2, 4.0 * l2 / l1, max_relative = 1e-12);
}
