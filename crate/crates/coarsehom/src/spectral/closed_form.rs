//! Circulant and path-graph closed forms for the mesh Laplacians.
//!
//! These are the independent oracle the eigensolvers are checked against:
//! no linear algebra, just the trigonometric eigenvalue formulas of
//! circulant and tridiagonal-Toeplitz matrices, scaled by the spacing.

use crate::error::Result;

use super::MeshSpec;

/// Scaled circle spectrum: `4 sin^2(pi k / n) / h^2` for `k = 0..n`.
pub fn circle(length: f64, subdivisions: u32) -> Vec<f64> {
    let n = subdivisions as f64;
    let h = length / n;
    let mut vals: Vec<f64> = (0..subdivisions)
        .map(|k| {
            let s = (std::f64::consts::PI * k as f64 / n).sin();
            4.0 * s * s / (h * h)
        })
        .collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// Scaled torus spectrum: sums of per-dimension circle terms over all mode
/// combinations.
pub fn torus(sides: &[f64], subdivisions: &[u32]) -> Vec<f64> {
    let per_dim: Vec<Vec<f64>> = sides
        .iter()
        .zip(subdivisions)
        .map(|(&l, &s)| {
            let n = s as f64;
            let h = l / n;
            (0..s)
                .map(|k| {
                    let t = (std::f64::consts::PI * k as f64 / n).sin();
                    4.0 * t * t / (h * h)
                })
                .collect()
        })
        .collect();
    let mut vals = vec![0.0f64];
    for dim in per_dim {
        let mut next = Vec::with_capacity(vals.len() * dim.len());
        for &base in &vals {
            for &term in &dim {
                next.push(base + term);
            }
        }
        vals = next;
    }
    vals.sort_by(f64::total_cmp);
    vals
}

/// Scaled interval spectrum with the natural (Neumann-like) path-graph
/// boundary: `(2 - 2 cos(pi k / m)) / h^2` on `m = subdivisions + 1`
/// vertices.
pub fn interval(length: f64, subdivisions: u32) -> Vec<f64> {
    let m = subdivisions as usize + 1;
    let h = length / subdivisions as f64;
    let mut vals: Vec<f64> = (0..m)
        .map(|k| {
            let c = (std::f64::consts::PI * k as f64 / m as f64).cos();
            (2.0 - 2.0 * c) / (h * h)
        })
        .collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// Closed-form spectrum of any mesh, sorted ascending.
pub fn of(mesh: &MeshSpec) -> Result<Vec<f64>> {
    mesh.validate()?;
    Ok(match mesh {
        MeshSpec::Circle {
            length,
            subdivisions,
        } => circle(*length, *subdivisions),
        MeshSpec::Torus {
            sides,
            subdivisions,
        } => torus(sides, subdivisions),
        MeshSpec::Interval {
            length,
            subdivisions,
        } => interval(*length, *subdivisions),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_modes_pair_up() {
        let vals = circle(std::f64::consts::TAU, 8);
        assert_eq!(vals.len(), 8);
        assert_eq!(vals[0], 0.0);
        // modes k and n-k coincide up to the sine rounding
        assert!((vals[1] - vals[2]).abs() < 1e-12 * vals[2]);
        assert!((vals[3] - vals[4]).abs() < 1e-12 * vals[4]);
    }

    #[test]
    fn torus_is_sum_of_circles() {
        let t = torus(&[1.0, 2.0], &[4, 4]);
        assert_eq!(t.len(), 16);
        let c1 = circle(1.0, 4);
        let c2 = circle(2.0, 4);
        let mut expect: Vec<f64> = c1
            .iter()
            .flat_map(|&a| c2.iter().map(move |&b| a + b))
            .collect();
        expect.sort_by(f64::total_cmp);
        for (a, b) in t.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn interval_has_simple_spectrum() {
        let vals = interval(1.0, 8);
        assert_eq!(vals.len(), 9);
        for w in vals.windows(2) {
            assert!(w[1] > w[0]);
        }
    }
}
