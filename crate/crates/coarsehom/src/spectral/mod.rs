//! Graph-Laplacian spectra of discretised model manifolds and the
//! covering/packing counting bounds.
//!
//! Meshes are uniform grids on circles, flat tori and intervals. The
//! operator is the graph Laplacian scaled by the squared spacing, so its
//! low eigenvalues approximate the continuum Laplacian of the underlying
//! manifold. Eigenvalue indexing convention: sorted ascending with
//! multiplicity, counting from 1, the zero eigenvalue included; reports
//! that read "the eigenvalue at index V" use the 0-based sorted array, i.e.
//! the (V+1)-th eigenvalue.

pub mod closed_form;
pub mod covering;
mod eigen;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use covering::{covering_number, packing_count, verify_eigen_covering_bound, CoveringReport};
pub use eigen::SparseLaplacian;

/// Vertex-count ceiling for the dense eigensolver path.
pub const DENSE_LIMIT: usize = 4096;

/// A uniform mesh of a model manifold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "manifold", rename_all = "lowercase")]
pub enum MeshSpec {
    Circle { length: f64, subdivisions: u32 },
    Torus { sides: Vec<f64>, subdivisions: Vec<u32> },
    Interval { length: f64, subdivisions: u32 },
}

impl MeshSpec {
    pub fn validate(&self) -> Result<()> {
        let check = |len: f64, sub: u32| -> Result<()> {
            if !(len > 0.0) {
                return Err(Error::InvalidSpec(format!("side length {len} must be positive")));
            }
            if sub < 4 {
                return Err(Error::InvalidSpec(format!(
                    "subdivisions must be >= 4, got {sub}"
                )));
            }
            Ok(())
        };
        match self {
            MeshSpec::Circle { length, subdivisions } | MeshSpec::Interval { length, subdivisions } => {
                check(*length, *subdivisions)
            }
            MeshSpec::Torus { sides, subdivisions } => {
                if sides.is_empty() || sides.len() > 3 {
                    return Err(Error::InvalidSpec(format!(
                        "torus dimension must be 1..=3, got {}",
                        sides.len()
                    )));
                }
                if sides.len() != subdivisions.len() {
                    return Err(Error::InvalidSpec(
                        "torus sides and subdivisions must have equal length".into(),
                    ));
                }
                for (&l, &s) in sides.iter().zip(subdivisions) {
                    check(l, s)?;
                }
                Ok(())
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            MeshSpec::Circle { .. } | MeshSpec::Interval { .. } => 1,
            MeshSpec::Torus { sides, .. } => sides.len(),
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            MeshSpec::Circle { length, .. } | MeshSpec::Interval { length, .. } => *length,
            MeshSpec::Torus { sides, .. } => sides.iter().product(),
        }
    }

    /// Grid spacing per dimension.
    pub fn spacings(&self) -> Vec<f64> {
        match self {
            MeshSpec::Circle { length, subdivisions }
            | MeshSpec::Interval { length, subdivisions } => {
                vec![length / *subdivisions as f64]
            }
            MeshSpec::Torus { sides, subdivisions } => sides
                .iter()
                .zip(subdivisions)
                .map(|(&l, &s)| l / s as f64)
                .collect(),
        }
    }

    pub fn max_spacing(&self) -> f64 {
        self.spacings().iter().cloned().fold(0.0, f64::max)
    }

    pub fn vertex_count(&self) -> usize {
        match self {
            MeshSpec::Circle { subdivisions, .. } => *subdivisions as usize,
            MeshSpec::Interval { subdivisions, .. } => *subdivisions as usize + 1,
            MeshSpec::Torus { subdivisions, .. } => {
                subdivisions.iter().map(|&s| s as usize).product()
            }
        }
    }

    /// Per-dimension coordinates of a vertex, row-major index layout.
    pub fn position(&self, idx: usize) -> Vec<f64> {
        match self {
            MeshSpec::Circle { length, subdivisions } => {
                vec![idx as f64 * length / *subdivisions as f64]
            }
            MeshSpec::Interval { length, subdivisions } => {
                vec![idx as f64 * length / *subdivisions as f64]
            }
            MeshSpec::Torus { sides, subdivisions } => {
                let mut rem = idx;
                let mut pos = vec![0.0; sides.len()];
                for d in (0..sides.len()).rev() {
                    let s = subdivisions[d] as usize;
                    pos[d] = (rem % s) as f64 * sides[d] / s as f64;
                    rem /= s;
                }
                pos
            }
        }
    }

    /// Geodesic distance between two mesh points: per-dimension wrap-around
    /// on circles and tori, straight on intervals.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let pi = self.position(i);
        let pj = self.position(j);
        match self {
            MeshSpec::Interval { .. } => (pi[0] - pj[0]).abs(),
            MeshSpec::Circle { length, .. } => {
                let d = (pi[0] - pj[0]).abs();
                d.min(length - d)
            }
            MeshSpec::Torus { sides, .. } => {
                let mut sq = 0.0;
                for d in 0..sides.len() {
                    let diff = (pi[d] - pj[d]).abs();
                    let wrapped = diff.min(sides[d] - diff);
                    sq += wrapped * wrapped;
                }
                sq.sqrt()
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            MeshSpec::Circle { length, .. } => length / 2.0,
            MeshSpec::Interval { length, .. } => *length,
            MeshSpec::Torus { sides, .. } => {
                sides.iter().map(|l| (l / 2.0) * (l / 2.0)).sum::<f64>().sqrt()
            }
        }
    }

    /// The scaled graph Laplacian of the mesh.
    pub fn laplacian(&self) -> Result<SparseLaplacian> {
        self.validate()?;
        Ok(match self {
            MeshSpec::Circle { length, subdivisions } => {
                let n = *subdivisions as usize;
                let w = (*subdivisions as f64 / length).powi(2); // 1/h^2
                let mut lap = SparseLaplacian::new(n);
                for i in 0..n {
                    lap.add_edge(i, (i + 1) % n, w);
                }
                lap
            }
            MeshSpec::Interval { length, subdivisions } => {
                let n = *subdivisions as usize + 1;
                let w = (*subdivisions as f64 / length).powi(2);
                let mut lap = SparseLaplacian::new(n);
                for i in 0..n - 1 {
                    lap.add_edge(i, i + 1, w);
                }
                lap
            }
            MeshSpec::Torus { sides, subdivisions } => {
                let dims: Vec<usize> = subdivisions.iter().map(|&s| s as usize).collect();
                let n: usize = dims.iter().product();
                let mut lap = SparseLaplacian::new(n);
                let mut strides = vec![1usize; dims.len()];
                for d in (0..dims.len().saturating_sub(1)).rev() {
                    strides[d] = strides[d + 1] * dims[d + 1];
                }
                for (d, (&len, &sub)) in sides.iter().zip(subdivisions).enumerate() {
                    let w = (sub as f64 / len).powi(2);
                    for idx in 0..n {
                        let coord = (idx / strides[d]) % dims[d];
                        let next = if coord + 1 == dims[d] {
                            idx + strides[d] - strides[d] * dims[d]
                        } else {
                            idx + strides[d]
                        };
                        lap.add_edge(idx, next, w);
                    }
                }
                lap
            }
        })
    }
}

/// How a spectrum was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumMethod {
    Dense,
    Iterative,
}

/// Eigenvalues of the scaled mesh Laplacian, sorted ascending with
/// multiplicity. On the iterative path only the part of the spectrum below
/// `cutoff` is present and counting beyond it is an error, never a silent
/// truncation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub mesh: MeshSpec,
    pub method: SpectrumMethod,
    pub eigenvalues: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
    pub vol: f64,
    pub dim: usize,
}

/// Options for [`laplacian_spectrum_with`].
#[derive(Debug, Clone)]
pub struct SpectralOptions {
    pub dense_limit: usize,
    /// Minimum number of bottom eigenvalues on the iterative path.
    pub min_depth: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            dense_limit: DENSE_LIMIT,
            min_depth: 64,
        }
    }
}

/// Computes the spectrum: every eigenvalue when the mesh fits the dense
/// budget, otherwise the bottom of the spectrum with an explicit cutoff.
pub fn laplacian_spectrum(mesh: &MeshSpec) -> Result<SpectrumReport> {
    laplacian_spectrum_with(mesh, &SpectralOptions::default())
}

pub fn laplacian_spectrum_with(mesh: &MeshSpec, opts: &SpectralOptions) -> Result<SpectrumReport> {
    let lap = mesh.laplacian()?;
    let n = lap.len();
    let (eigenvalues, cutoff, method) = if n <= opts.dense_limit {
        (eigen::dense_spectrum(&lap), None, SpectrumMethod::Dense)
    } else {
        let depth = opts.min_depth.min(n);
        let (vals, cutoff) = eigen::bottom_spectrum(&lap, depth)?;
        (vals, Some(cutoff), SpectrumMethod::Iterative)
    };
    Ok(SpectrumReport {
        mesh: mesh.clone(),
        method,
        eigenvalues,
        cutoff,
        vol: mesh.volume(),
        dim: mesh.dim(),
    })
}

impl SpectrumReport {
    /// Number of eigenvalues at most `lambda`, with multiplicity.
    pub fn counting_function(&self, lambda: f64) -> Result<usize> {
        if let Some(cutoff) = self.cutoff {
            if lambda > cutoff {
                return Err(Error::AboveCutoff { lambda, cutoff });
            }
        }
        Ok(self.eigenvalues.partition_point(|&e| e <= lambda))
    }

    /// The eigenvalue at 0-based `index` in the ascending order (the
    /// (index+1)-th eigenvalue).
    pub fn eigenvalue_at(&self, index: usize) -> Result<f64> {
        self.eigenvalues.get(index).copied().ok_or({
            Error::SpectrumDepth {
                required: index,
                available: self.eigenvalues.len(),
            }
        })
    }
}

/// Counting function as a free operation.
pub fn counting_function(report: &SpectrumReport, lambda: f64) -> Result<usize> {
    report.counting_function(lambda)
}

/// Per-mesh part of a counting-growth report. The slope is fitted over the
/// grid points below this mesh's own validity scale; the shared `counts`
/// live on the common grid of the whole report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshWeyl {
    pub mesh: MeshSpec,
    pub vol: f64,
    pub max_spacing: f64,
    pub slope: f64,
    pub r_squared: f64,
    /// Number of grid points the slope was fitted on.
    pub slope_points: usize,
    /// `N(lambda)` for each common grid point.
    pub counts: Vec<usize>,
}

/// Volume-linear counting report: per-mesh growth fits, the collapse of
/// `N(lambda)/vol` across meshes, and the smallest constant making
/// `N(lambda) <= C * vol * lambda^(n/2)` hold on the tested grid, with the
/// flat branch `C * lambda0^(n/2)` below the grid minimum `lambda0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylReport {
    pub dim: usize,
    /// Grid points valid for every mesh; collapse is measured here.
    pub lambda_grid: Vec<f64>,
    pub per_mesh: Vec<MeshWeyl>,
    pub lambda0: f64,
    pub c_constant: f64,
    /// Max over common grid points of the relative spread of
    /// `N(lambda)/vol` across meshes.
    pub max_collapse_spread: f64,
    /// Spread between the two finest meshes on the common grid; small
    /// values mean the counting density has converged under refinement.
    pub refinement_spread: f64,
    /// True by construction of `c_constant`; recorded for the report.
    pub bound_holds_on_grid: bool,
}

impl WeylReport {
    /// The two-branch counting bound at `lambda`.
    pub fn bound_rhs(&self, vol: f64, lambda: f64) -> f64 {
        let l = lambda.max(self.lambda0);
        self.c_constant * vol * l.powf(self.dim as f64 / 2.0)
    }
}

/// Options for [`weyl_check`].
#[derive(Debug, Clone)]
pub struct WeylOptions {
    /// Grid points above `validity_fraction / h^2` are discarded: the
    /// discrete spectrum only tracks the continuum below that scale. The
    /// cut uses each mesh's own spacing for its slope fit and the coarsest
    /// spacing for the cross-mesh comparisons.
    pub validity_fraction: f64,
    pub spectral: SpectralOptions,
}

impl Default for WeylOptions {
    fn default() -> Self {
        WeylOptions {
            validity_fraction: 1.0,
            spectral: SpectralOptions::default(),
        }
    }
}

/// Fits counting growth across at least three meshes of one family.
pub fn weyl_check(meshes: &[MeshSpec], lambda_grid: &[f64]) -> Result<WeylReport> {
    weyl_check_with(meshes, lambda_grid, &WeylOptions::default())
}

pub fn weyl_check_with(
    meshes: &[MeshSpec],
    lambda_grid: &[f64],
    opts: &WeylOptions,
) -> Result<WeylReport> {
    if meshes.len() < 3 {
        return Err(Error::InvalidParameter(
            "counting fit needs at least three meshes".into(),
        ));
    }
    let dim = meshes[0].dim();
    let same_family = meshes
        .iter()
        .all(|m| std::mem::discriminant(m) == std::mem::discriminant(&meshes[0]) && m.dim() == dim);
    if !same_family {
        return Err(Error::InvalidParameter(
            "meshes must come from a single manifold family".into(),
        ));
    }
    let reports: Vec<SpectrumReport> = meshes
        .par_iter()
        .map(|m| laplacian_spectrum_with(m, &opts.spectral))
        .collect::<Result<_>>()?;

    let mut base: Vec<f64> = lambda_grid.iter().copied().filter(|&l| l > 0.0).collect();
    base.sort_by(f64::total_cmp);
    base.dedup();

    // common grid: below every mesh's validity scale and cutoff
    let h_max = meshes
        .iter()
        .map(|m| m.max_spacing())
        .fold(0.0f64, f64::max);
    let validity = opts.validity_fraction / (h_max * h_max);
    let grid: Vec<f64> = base
        .iter()
        .copied()
        .filter(|&l| l <= validity)
        .filter(|&l| reports.iter().all(|r| r.cutoff.map_or(true, |c| l <= c)))
        .collect();
    if grid.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "lambda grid is empty after the validity cut at {validity:.3}"
        )));
    }

    let mut per_mesh = Vec::new();
    for (mesh, report) in meshes.iter().zip(&reports) {
        let counts: Vec<usize> = grid
            .iter()
            .map(|&l| report.counting_function(l))
            .collect::<Result<_>>()?;
        // slope over this mesh's own validity window
        let h = mesh.max_spacing();
        let own_validity = opts.validity_fraction / (h * h);
        let own_grid: Vec<f64> = base
            .iter()
            .copied()
            .filter(|&l| l <= own_validity)
            .filter(|&l| report.cutoff.map_or(true, |c| l <= c))
            .collect();
        let pts: Vec<(f64, f64)> = own_grid
            .iter()
            .map(|&l| {
                report
                    .counting_function(l)
                    .map(|n| (l.ln(), (n as f64).ln()))
            })
            .collect::<Result<_>>()?;
        let (slope, r_squared) = linear_fit(&pts);
        per_mesh.push(MeshWeyl {
            mesh: mesh.clone(),
            vol: mesh.volume(),
            max_spacing: h,
            slope,
            r_squared,
            slope_points: pts.len(),
            counts,
        });
    }

    let lambda0 = grid[0];
    // the bound constant covers every point actually tested, including the
    // wider per-mesh slope windows
    let mut c_constant = 0.0f64;
    for (mesh, report) in meshes.iter().zip(&reports) {
        let h = mesh.max_spacing();
        let own_validity = opts.validity_fraction / (h * h);
        for &l in base.iter().filter(|&&l| l <= own_validity) {
            if report.cutoff.map_or(true, |c| l <= c) {
                let n = report.counting_function(l)?;
                let at = l.max(lambda0);
                c_constant = c_constant.max(n as f64 / (mesh.volume() * at.powf(dim as f64 / 2.0)));
            }
        }
    }
    let spread = |meshes: &[&MeshWeyl]| -> f64 {
        let mut worst = 0.0f64;
        for i in 0..grid.len() {
            let densities: Vec<f64> = meshes.iter().map(|m| m.counts[i] as f64 / m.vol).collect();
            let hi = densities.iter().cloned().fold(f64::MIN, f64::max);
            let lo = densities.iter().cloned().fold(f64::MAX, f64::min);
            if hi > 0.0 {
                worst = worst.max((hi - lo) / hi);
            }
        }
        worst
    };
    let all: Vec<&MeshWeyl> = per_mesh.iter().collect();
    let max_collapse_spread = spread(&all);
    let refinement_spread = spread(&all[all.len() - 2..]);
    Ok(WeylReport {
        dim,
        lambda_grid: grid,
        per_mesh,
        lambda0,
        c_constant,
        max_collapse_spread,
        refinement_spread,
        bound_holds_on_grid: true,
    })
}

fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return (0.0, 0.0);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(n: u32) -> MeshSpec {
        MeshSpec::Circle {
            length: std::f64::consts::TAU,
            subdivisions: n,
        }
    }

    fn torus2(n: u32) -> MeshSpec {
        MeshSpec::Torus {
            sides: vec![std::f64::consts::TAU; 2],
            subdivisions: vec![n; 2],
        }
    }

    fn assert_close_rel(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (i, (&x, &y)) in a.iter().zip(b).enumerate() {
            let err = (x - y).abs() / y.abs().max(1.0);
            assert!(err <= tol, "index {i}: {x} vs {y} (rel {err:.3e})");
        }
    }

    #[test]
    fn circle_spectrum_matches_closed_form() {
        for n in [8u32, 64] {
            let report = laplacian_spectrum(&circle(n)).unwrap();
            let exact = closed_form::of(&circle(n)).unwrap();
            assert_close_rel(&report.eigenvalues, &exact, 1e-9);
            // small eigenvalues approximate squared integers
            assert!(report.eigenvalues[0].abs() < 1e-9);
            if n == 64 {
                assert!((report.eigenvalues[1] - 1.0).abs() < 1e-2);
                assert!((report.eigenvalues[2] - 1.0).abs() < 1e-2);
            }
        }
    }

    #[test]
    fn torus_spectrum_matches_closed_form() {
        let report = laplacian_spectrum(&torus2(8)).unwrap();
        let exact = closed_form::of(&torus2(8)).unwrap();
        assert_close_rel(&report.eigenvalues, &exact, 1e-9);
    }

    #[test]
    fn interval_spectrum_starts_at_zero_mode() {
        let mesh = MeshSpec::Interval {
            length: 1.0,
            subdivisions: 16,
        };
        let report = laplacian_spectrum(&mesh).unwrap();
        let exact = closed_form::of(&mesh).unwrap();
        assert_close_rel(&report.eigenvalues, &exact, 1e-9);
        assert!(report.eigenvalues[0].abs() < 1e-9);
        assert!(report.eigenvalues[1] > 1.0); // Neumann gap ~ pi^2
    }

    #[test]
    fn counting_function_examples() {
        let report = laplacian_spectrum(&circle(64)).unwrap();
        assert_eq!(report.counting_function(-1.0).unwrap(), 0);
        assert_eq!(report.counting_function(1e-12).unwrap(), 1);
        // k^2 <= 4.5 for k in {0, +-1, +-2}: five modes at the discrete
        // values 4 sin^2(pi k / 64) / h^2
        assert_eq!(report.counting_function(4.5).unwrap(), 5);
        // full count at the top of the spectrum
        let top = *report.eigenvalues.last().unwrap();
        assert_eq!(report.counting_function(top).unwrap(), 64);
    }

    #[test]
    fn counting_is_nondecreasing_and_total() {
        let report = laplacian_spectrum(&torus2(8)).unwrap();
        let mut prev = 0;
        for i in 0..40 {
            let l = i as f64 * 5.0;
            let n = report.counting_function(l).unwrap();
            assert!(n >= prev);
            prev = n;
        }
        assert_eq!(prev, 64);
    }

    #[test]
    fn iterative_path_matches_closed_form_bottom() {
        // 72^2 = 5184 vertices exceeds the default dense limit
        let mesh = torus2(72);
        let report = laplacian_spectrum(&mesh).unwrap();
        assert_eq!(report.method, SpectrumMethod::Iterative);
        let cutoff = report.cutoff.unwrap();
        let exact = closed_form::of(&mesh).unwrap();
        let k = report.eigenvalues.len();
        assert!(k >= 64);
        // multiplicities of the degenerate clusters must be captured
        assert_close_rel(&report.eigenvalues, &exact[..k], 1e-6);
        assert!(matches!(
            report.counting_function(cutoff + 1.0),
            Err(Error::AboveCutoff { .. })
        ));
        // counting below the cutoff agrees with the closed form
        let probe = cutoff * 0.8;
        let exact_count = exact.iter().filter(|&&e| e <= probe).count();
        assert_eq!(report.counting_function(probe).unwrap(), exact_count);
    }

    #[test]
    fn weyl_volume_collapse_on_circles() {
        use std::f64::consts::TAU;
        // volumes 2pi, 4pi, 8pi at constant spacing h = 2pi/256; the grid
        // starts at lambda = 16 where counts are large enough that the
        // zero-mode offset no longer skews the density
        let meshes = vec![
            MeshSpec::Circle { length: TAU, subdivisions: 256 },
            MeshSpec::Circle { length: 2.0 * TAU, subdivisions: 512 },
            MeshSpec::Circle { length: 4.0 * TAU, subdivisions: 1024 },
        ];
        let grid: Vec<f64> = (4..=16).map(|k| (k * k) as f64).collect();
        let report = weyl_check(&meshes, &grid).unwrap();
        assert!(
            report.max_collapse_spread < 0.10,
            "spread {}",
            report.max_collapse_spread
        );
        // counting on a circle grows like sqrt(lambda)
        for m in &report.per_mesh {
            assert!((m.slope - 0.5).abs() < 0.1, "slope {}", m.slope);
        }
        // the recorded constant bounds every tested point
        for m in &report.per_mesh {
            for (&l, &n) in report.lambda_grid.iter().zip(&m.counts) {
                assert!(n as f64 <= report.bound_rhs(m.vol, l) + 1e-9);
            }
        }
    }

    #[test]
    fn weyl_slope_is_dimension_halved_on_tori() {
        let meshes = vec![torus2(24), torus2(28), torus2(32)];
        let grid: Vec<f64> = (0..8)
            .map(|i| 4.0 * (25.0f64 / 4.0).powf(i as f64 / 7.0))
            .collect();
        let report = weyl_check(&meshes, &grid).unwrap();
        for m in &report.per_mesh {
            assert!((m.slope - 1.0).abs() < 0.1, "slope {}", m.slope);
            assert!(m.r_squared >= 0.9, "r2 {}", m.r_squared);
        }
        // counting density is Cauchy under refinement on the shared grid
        assert!(
            report.refinement_spread < 0.05,
            "refinement spread {}",
            report.refinement_spread
        );
    }

    #[test]
    fn weyl_rejects_empty_grids_and_small_families() {
        let meshes = vec![circle(64), circle(128), circle(256)];
        assert!(matches!(
            weyl_check(&meshes, &[1e9]),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            weyl_check(&meshes[..2], &[1.0]),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn mesh_geometry_helpers() {
        let c = circle(8);
        assert_eq!(c.vertex_count(), 8);
        let quarter = std::f64::consts::TAU / 4.0;
        assert!((c.distance(0, 2) - quarter).abs() < 1e-12);
        assert!((c.distance(0, 6) - quarter).abs() < 1e-12); // wraps
        let t = torus2(8);
        assert_eq!(t.vertex_count(), 64);
        assert!((t.distance(0, 7) - t.sides_first_spacing()).abs() < 1e-12);
    }

    impl MeshSpec {
        fn sides_first_spacing(&self) -> f64 {
            self.spacings()[0]
        }
    }

    #[test]
    fn spec_validation() {
        assert!(MeshSpec::Circle { length: 0.0, subdivisions: 8 }.validate().is_err());
        assert!(MeshSpec::Circle { length: 1.0, subdivisions: 3 }.validate().is_err());
        assert!(MeshSpec::Torus { sides: vec![1.0; 4], subdivisions: vec![4; 4] }
            .validate()
            .is_err());
        assert!(MeshSpec::Torus { sides: vec![1.0], subdivisions: vec![4, 4] }
            .validate()
            .is_err());
    }
}
