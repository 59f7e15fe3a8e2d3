//! Band structure of loop-coupled magnet arrays: chain and checkerboard Bloch
//! bands, the all-to-all ring spectrum, a finite-lattice eigensolver used as
//! an independent check, and densities of states.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{HmlError, Result};

/// Largest site count accepted by the finite-lattice eigensolver.
pub const MAX_ORACLE_SITES: usize = 512;

/// Lattice topologies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeKind {
    /// Linear array, nearest-neighbor hopping.
    Chain,
    /// All-to-all coupled array (every pair shares the same hopping).
    Ring,
    /// Two-sublattice planar array with next-nearest same-sublattice bonds.
    Checkerboard,
}

/// Boundary conditions of the finite lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    Open,
}

impl Default for Boundary {
    fn default() -> Self {
        Boundary::Periodic
    }
}

/// Lattice description: topology, on-site frequency, hopping rate, lattice
/// constant, and linear size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub kind: LatticeKind,
    /// On-site magnon frequency (rad/s).
    pub omega0: f64,
    /// Hopping rate J (rad/s).
    pub j_rate: f64,
    /// Lattice constant (m).
    pub a: f64,
    /// Linear size: sites for chain/ring, unit cells per direction for the
    /// checkerboard.
    pub n: usize,
    /// Boundary conditions of finite realizations.
    #[serde(default)]
    pub boundary: Boundary,
}

impl LatticeSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.omega0.is_finite() {
            return Err(HmlError::config(
                "lattice.omega0",
                format!("on-site frequency must be finite, got {}", self.omega0),
            ));
        }
        if !self.j_rate.is_finite() {
            return Err(HmlError::config(
                "lattice.j_rate",
                format!("hopping rate must be finite, got {}", self.j_rate),
            ));
        }
        if !(self.a > 0.0) || !self.a.is_finite() {
            return Err(HmlError::config(
                "lattice.a",
                format!("lattice constant must be a finite positive length, got {}", self.a),
            ));
        }
        if self.n < 2 {
            return Err(HmlError::config(
                "lattice.n",
                format!("lattice size must be at least 2, got {}", self.n),
            ));
        }
        Ok(())
    }
}

/// Band energies sampled on a k-point list.
#[derive(Debug, Clone, PartialEq)]
pub struct BandResult {
    /// Sampled k points (kx, ky) in rad/m; chains use ky = 0.
    pub kpoints: Vec<[f64; 2]>,
    /// Band frequencies (rad/s) per k point, ascending within each point.
    pub bands: Vec<Vec<f64>>,
}

/// Chain dispersion omega(k) = omega0 + 2 J cos(k a), sampled on the
/// periodic-lattice momentum grid k = 2 pi n / (nk a) for
/// n = -nk/2 .. nk/2 - 1.
pub fn chain_dispersion(spec: &LatticeSpec, nk: usize) -> Result<BandResult> {
    spec.validate()?;
    if spec.kind != LatticeKind::Chain {
        return Err(HmlError::domain(
            "chain dispersion requested for a non-chain lattice".to_string(),
        ));
    }
    if nk < 2 {
        return Err(HmlError::domain(format!(
            "momentum grid needs at least 2 points, got {nk}"
        )));
    }
    let nk_i = nk as i64;
    let mut kpoints = Vec::with_capacity(nk);
    let mut bands = Vec::with_capacity(nk);
    for n in -(nk_i / 2)..(nk_i - nk_i / 2) {
        let k = 2.0 * std::f64::consts::PI * n as f64 / (nk as f64 * spec.a);
        kpoints.push([k, 0.0]);
        bands.push(vec![spec.omega0 + 2.0 * spec.j_rate * (k * spec.a).cos()]);
    }
    Ok(BandResult { kpoints, bands })
}

/// Spectrum of the all-to-all ring of `n` sites: one collective mode at
/// omega0 + (n-1) J and an (n-1)-fold level at omega0 - J. Returned ascending.
pub fn ring_spectrum(spec: &LatticeSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    if spec.kind != LatticeKind::Ring {
        return Err(HmlError::domain(
            "ring spectrum requested for a non-ring lattice".to_string(),
        ));
    }
    let mut eigs = vec![spec.omega0 - spec.j_rate; spec.n - 1];
    eigs.push(spec.omega0 + (spec.n as f64 - 1.0) * spec.j_rate);
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(eigs)
}

/// Checkerboard Bloch bands at momentum `k = [kx, ky]` (rad/m), ascending.
///
/// The two-site unit cell has lattice vectors v1 = (2a, 0) and v2 = (a, a);
/// one sublattice links along +-v1, the other along +-(v1 - v2), and the four
/// inter-sublattice bonds sit at real-space offsets (+-a, 0) and (0, +-a).
/// With Bloch phases referred to the actual site positions the matrix is real
/// symmetric:
///
///   M = [[w0 + 2J cos(2 a kx),        2J (cos(a kx) + cos(a ky))],
///        [2J (cos(a kx) + cos(a ky)), w0 + 2J cos(a (kx - ky))  ]].
pub fn checkerboard_bloch(spec: &LatticeSpec, k: [f64; 2]) -> Result<(f64, f64)> {
    spec.validate()?;
    if spec.kind != LatticeKind::Checkerboard {
        return Err(HmlError::domain(
            "checkerboard bands requested for a non-checkerboard lattice".to_string(),
        ));
    }
    let (w0, j, a) = (spec.omega0, spec.j_rate, spec.a);
    let (kx, ky) = (k[0], k[1]);
    let m_dd = w0 + 2.0 * j * (2.0 * a * kx).cos();
    let m_aa = w0 + 2.0 * j * (a * (kx - ky)).cos();
    let m_da = 2.0 * j * ((a * kx).cos() + (a * ky).cos());
    let avg = 0.5 * (m_dd + m_aa);
    let half_diff = 0.5 * (m_dd - m_aa);
    let r = (half_diff * half_diff + m_da * m_da).sqrt();
    Ok((avg - r, avg + r))
}

/// Momentum grid commensurate with an n x n periodic checkerboard: integer
/// combinations k = (n1/n) b1 + (n2/n) b2 of cell-reciprocal vectors
/// b1 = (pi/a)(1, -1) and b2 = (0, 2 pi/a).
pub fn checkerboard_k_grid(spec: &LatticeSpec, n: usize) -> Vec<[f64; 2]> {
    let b1 = [std::f64::consts::PI / spec.a, -std::f64::consts::PI / spec.a];
    let b2 = [0.0, 2.0 * std::f64::consts::PI / spec.a];
    let mut grid = Vec::with_capacity(n * n);
    for n1 in 0..n {
        for n2 in 0..n {
            let f1 = n1 as f64 / n as f64;
            let f2 = n2 as f64 / n as f64;
            grid.push([f1 * b1[0] + f2 * b2[0], f1 * b1[1] + f2 * b2[1]]);
        }
    }
    grid
}

/// Checkerboard bands on the commensurate grid of an n x n lattice.
pub fn checkerboard_bands(spec: &LatticeSpec, n: usize) -> Result<BandResult> {
    spec.validate()?;
    let kpoints = checkerboard_k_grid(spec, n);
    let mut bands = Vec::with_capacity(kpoints.len());
    for &k in &kpoints {
        let (lo, hi) = checkerboard_bloch(spec, k)?;
        bands.push(vec![lo, hi]);
    }
    Ok(BandResult { kpoints, bands })
}

/// Closed-form checkerboard band expression retained for comparison with the
/// bond-list construction; the two disagree away from special points, so the
/// bond-list bands are authoritative and [`band_comparison_report`] measures
/// the difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormBands {
    /// Radicand of the closed-form expression.
    pub lambda: f64,
    /// Band pair (ascending) when lambda >= 0; `None` flags a complex-band
    /// point instead of raising an error.
    pub bands: Option<(f64, f64)>,
}

/// Evaluate the closed-form band expression
/// omega(k) = omega0 + 2J [4 cos(kx a) cos(ky a) +- sqrt(Lambda)] with
/// Lambda = 4 + 4 cos(kx a) cos(ky a) - cos(2 ky a) - cos(kx a)
///          + 2 cos(2 kx a) cos(2 ky a).
pub fn closed_form_bands(spec: &LatticeSpec, k: [f64; 2]) -> Result<ClosedFormBands> {
    spec.validate()?;
    let a = spec.a;
    let (kx, ky) = (k[0], k[1]);
    let cc = (kx * a).cos() * (ky * a).cos();
    let lambda = 4.0 + 4.0 * cc - (2.0 * ky * a).cos() - (kx * a).cos()
        + 2.0 * (2.0 * kx * a).cos() * (2.0 * ky * a).cos();
    let bands = if lambda >= 0.0 {
        let root = lambda.sqrt();
        let lo = spec.omega0 + 2.0 * spec.j_rate * (4.0 * cc - root);
        let hi = spec.omega0 + 2.0 * spec.j_rate * (4.0 * cc + root);
        Some((lo.min(hi), lo.max(hi)))
    } else {
        None
    };
    Ok(ClosedFormBands { lambda, bands })
}

/// Pointwise comparison of the closed-form expression against the bond-list
/// Bloch bands on the commensurate grid.
#[derive(Debug, Clone)]
pub struct BandComparisonReport {
    /// Largest |closed-form - Bloch| over all real-valued points (rad/s).
    pub max_abs_diff: f64,
    /// k points where the bands differ by more than 1e-6 * |J|.
    pub flagged: Vec<[f64; 2]>,
    /// k points where the closed form turns complex.
    pub complex_points: Vec<[f64; 2]>,
}

/// Compare the two checkerboard band constructions on an n x n grid, flagging
/// every k where they differ by more than 1e-6 * |J|.
pub fn band_comparison_report(spec: &LatticeSpec, n: usize) -> Result<BandComparisonReport> {
    spec.validate()?;
    let threshold = 1e-6 * spec.j_rate.abs();
    let mut report = BandComparisonReport {
        max_abs_diff: 0.0,
        flagged: Vec::new(),
        complex_points: Vec::new(),
    };
    for k in checkerboard_k_grid(spec, n) {
        let bloch = checkerboard_bloch(spec, k)?;
        match closed_form_bands(spec, k)?.bands {
            None => report.complex_points.push(k),
            Some(closed) => {
                let diff = (closed.0 - bloch.0).abs().max((closed.1 - bloch.1).abs());
                report.max_abs_diff = report.max_abs_diff.max(diff);
                if diff > threshold {
                    report.flagged.push(k);
                }
            }
        }
    }
    Ok(report)
}

fn chain_matrix(spec: &LatticeSpec) -> DMatrix<f64> {
    let n = spec.n;
    let mut m = DMatrix::<f64>::from_diagonal_element(n, n, spec.omega0);
    for i in 0..n {
        let j = (i + 1) % n;
        if j == 0 && spec.boundary == Boundary::Open {
            continue;
        }
        m[(i, j)] += spec.j_rate;
        m[(j, i)] += spec.j_rate;
    }
    m
}

fn ring_matrix(spec: &LatticeSpec) -> DMatrix<f64> {
    let n = spec.n;
    DMatrix::<f64>::from_fn(n, n, |i, j| {
        if i == j {
            spec.omega0
        } else {
            spec.j_rate
        }
    })
}

fn checkerboard_matrix(spec: &LatticeSpec) -> Result<DMatrix<f64>> {
    if spec.boundary == Boundary::Open {
        return Err(HmlError::domain(
            "finite checkerboard supports periodic boundaries only".to_string(),
        ));
    }
    let n = spec.n;
    let idx = |s: usize, c1: i64, c2: i64| -> usize {
        let w1 = c1.rem_euclid(n as i64) as usize;
        let w2 = c2.rem_euclid(n as i64) as usize;
        (w1 * n + w2) * 2 + s
    };
    let mut m = DMatrix::<f64>::from_diagonal_element(2 * n * n, 2 * n * n, spec.omega0);
    let mut add_bond = |p: usize, q: usize| {
        m[(p, q)] += spec.j_rate;
        m[(q, p)] += spec.j_rate;
    };
    for c1 in 0..n as i64 {
        for c2 in 0..n as i64 {
            // Same-sublattice bonds: one neighbor per cell in each family so
            // every periodic bond is generated exactly once.
            add_bond(idx(0, c1, c2), idx(0, c1 + 1, c2));
            add_bond(idx(1, c1, c2), idx(1, c1 + 1, c2 - 1));
            // Inter-sublattice bonds from the first sublattice site of this
            // cell to the four surrounding second-sublattice sites.
            add_bond(idx(0, c1, c2), idx(1, c1, c2));
            add_bond(idx(0, c1, c2), idx(1, c1 - 1, c2));
            add_bond(idx(0, c1, c2), idx(1, c1 - 1, c2 + 1));
            add_bond(idx(0, c1, c2), idx(1, c1, c2 - 1));
        }
    }
    Ok(m)
}

/// Full real-space coupling matrix of the finite lattice (site frequencies on
/// the diagonal, hopping rates off it); capped at [`MAX_ORACLE_SITES`] sites.
pub fn real_space_hamiltonian(spec: &LatticeSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let sites = match spec.kind {
        LatticeKind::Chain | LatticeKind::Ring => spec.n,
        LatticeKind::Checkerboard => 2 * spec.n * spec.n,
    };
    if sites > MAX_ORACLE_SITES {
        return Err(HmlError::domain(format!(
            "finite lattice has {sites} sites, above the {MAX_ORACLE_SITES}-site cap"
        )));
    }
    match spec.kind {
        LatticeKind::Chain => Ok(chain_matrix(spec)),
        LatticeKind::Ring => Ok(ring_matrix(spec)),
        LatticeKind::Checkerboard => checkerboard_matrix(spec),
    }
}

/// Eigenfrequencies (ascending) of the full real-space coupling matrix of the
/// finite lattice. Serves as an independent check of the Bloch constructions;
/// capped at [`MAX_ORACLE_SITES`] sites.
pub fn finite_lattice_oracle(spec: &LatticeSpec) -> Result<Vec<f64>> {
    let matrix = real_space_hamiltonian(spec)?;
    let mut eigs: Vec<f64> = matrix.symmetric_eigen().eigenvalues.iter().copied().collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(eigs)
}

/// Normalized histogram of band frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// Bin edges (length nbins + 1), rad/s.
    pub edges: Vec<f64>,
    /// Probability density per bin (1 / (rad/s)); integrates to one.
    pub density: Vec<f64>,
}

/// Density of states sampled on `nk` momenta per direction and binned into
/// `nbins` uniform bins. `band` restricts the histogram to one band index;
/// `None` pools all bands.
pub fn density_of_states(
    spec: &LatticeSpec,
    nbins: usize,
    nk: usize,
    band: Option<usize>,
) -> Result<Histogram> {
    spec.validate()?;
    if nbins == 0 {
        return Err(HmlError::domain("histogram needs at least one bin".to_string()));
    }
    let result = match spec.kind {
        LatticeKind::Chain => chain_dispersion(spec, nk)?,
        LatticeKind::Checkerboard => checkerboard_bands(spec, nk)?,
        LatticeKind::Ring => {
            let eigs = ring_spectrum(spec)?;
            BandResult {
                kpoints: vec![[0.0, 0.0]; eigs.len()],
                bands: eigs.into_iter().map(|e| vec![e]).collect(),
            }
        }
    };
    let mut samples = Vec::new();
    for point in &result.bands {
        match band {
            None => samples.extend_from_slice(point),
            Some(b) => {
                let v = point.get(b).ok_or_else(|| {
                    HmlError::domain(format!(
                        "band index {b} out of range ({} bands)",
                        point.len()
                    ))
                })?;
                samples.push(*v);
            }
        }
    }
    let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // A flat band collapses the range; widen it so all weight lands in the
    // single bin containing the level.
    let center = 0.5 * (min + max);
    let half_range = (0.5 * (max - min)).max(1e-9 * center.abs().max(1.0));
    let (lo, hi) = (center - half_range, center + half_range);
    let width = (hi - lo) / nbins as f64;
    let mut counts = vec![0.0_f64; nbins];
    for &s in &samples {
        let bin = (((s - lo) / width) as usize).min(nbins - 1);
        counts[bin] += 1.0;
    }
    let norm = samples.len() as f64 * width;
    Ok(Histogram {
        edges: (0..=nbins).map(|i| lo + i as f64 * width).collect(),
        density: counts.into_iter().map(|c| c / norm).collect(),
    })
}
