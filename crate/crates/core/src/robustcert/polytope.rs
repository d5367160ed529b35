//! Regular-polygon approximation of the disks for the VUF objective.
//!
//! Replacing each disk by a circumscribed regular `2m`-gon turns
//! `max J` into a finite maximum over `(2m)³` vertex combinations, which
//! upper-bounds the true value. The inscribed polygon (vertices on the
//! circles) gives a matching lower bound, and the two meet as `m` grows.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix6, SymmetricEigen, Vector2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solvability::DiskBundle;
use crate::unbalance::{build_quadratic_forms, VufKind};

use super::{check_eps, vuf_metric, Exactness, Method, RobustVerdict, Sense};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrpMode {
    Circumscribed,
    Inscribed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrpVertices {
    pub m: usize,
    pub mode: CrpMode,
    /// `2m` planar vertices per phase.
    pub vertices: [Vec<[f64; 2]>; 3],
}

/// Polygon vertices `C + ρ(cos φ_k, sin φ_k)` with `φ_k = (2k-1)π/(2m)`,
/// `ρ = r / cos(π/2m)` when circumscribed and `ρ = r` when inscribed.
pub fn build_crp(disks: &DiskBundle, m: usize, mode: CrpMode) -> Result<CrpVertices> {
    if m < 2 {
        return Err(Error::PolygonOrder(m));
    }
    let scale = match mode {
        CrpMode::Circumscribed => 1.0 / (PI / (2 * m) as f64).cos(),
        CrpMode::Inscribed => 1.0,
    };
    let vertices = [0, 1, 2].map(|p| {
        let c = disks.centers[p];
        let rho = disks.radii[p] * scale;
        (1..=2 * m)
            .map(|k| {
                let phi = (2 * k - 1) as f64 * PI / (2 * m) as f64;
                [c.re + rho * phi.cos(), c.im + rho * phi.sin()]
            })
            .collect()
    });
    Ok(CrpVertices { m, mode, vertices })
}

impl CrpVertices {
    /// Maximum of `V^⊤ M V` over all vertex combinations.
    pub fn max_quadratic(&self, m: &Matrix6<f64>) -> f64 {
        let block = |p: usize, q: usize| -> Matrix2<f64> { m.fixed_view::<2, 2>(2 * p, 2 * q).into_owned() };
        let pts: [Vec<Vector2<f64>>; 3] = [0, 1, 2].map(|p| {
            self.vertices[p]
                .iter()
                .map(|v| Vector2::new(v[0], v[1]))
                .collect()
        });
        let diag: [Vec<f64>; 3] = [0, 1, 2].map(|p| {
            let b = block(p, p);
            pts[p].iter().map(|x| x.dot(&(b * x))).collect()
        });
        // cross terms, symmetric M so both off-diagonal blocks fold into 2×
        let cross = |p: usize, q: usize| -> Vec<Vec<f64>> {
            let b = block(p, q) * 2.0;
            pts[p]
                .iter()
                .map(|x| pts[q].iter().map(|y| x.dot(&(b * y))).collect())
                .collect()
        };
        let (ab, ac, bc) = (cross(0, 1), cross(0, 2), cross(1, 2));
        (0..pts[0].len())
            .into_par_iter()
            .map(|i| {
                let mut best = f64::NEG_INFINITY;
                for j in 0..pts[1].len() {
                    let head = diag[0][i] + diag[1][j] + ab[i][j];
                    for k in 0..pts[2].len() {
                        let v = head + diag[2][k] + ac[i][k] + bc[j][k];
                        if v > best {
                            best = v;
                        }
                    }
                }
                best
            })
            .reduce(|| f64::NEG_INFINITY, f64::max)
    }
}

/// `2‖M‖₂ · max ‖V‖` over the product of disks `D̄(C_p, √2 r_p)`, which
/// contains every circumscribed polygon with `m ≥ 2`.
pub fn lipschitz_constant(disks: &DiskBundle, objective: &Matrix6<f64>) -> f64 {
    let spectral = SymmetricEigen::new(*objective)
        .eigenvalues
        .iter()
        .map(|l| l.abs())
        .fold(0.0, f64::max);
    let reach: f64 = (0..3)
        .map(|p| (disks.centers[p].norm() + 2f64.sqrt() * disks.radii[p]).powi(2))
        .sum::<f64>()
        .sqrt();
    2.0 * spectral * reach
}

/// `(1/cos(π/2m) - 1) · L · ‖r‖`.
pub fn gap_bound(disks: &DiskBundle, objective: &Matrix6<f64>, m: usize) -> f64 {
    let stretch = 1.0 / (PI / (2 * m) as f64).cos() - 1.0;
    stretch * lipschitz_constant(disks, objective) * disks.radius_norm()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolytopeResult {
    /// Circumscribed maximum, an upper bound on `max J`.
    pub f_outer: f64,
    /// Inscribed maximum, a lower bound on `max J`.
    pub f_inner: f64,
    pub gap_bound: f64,
    pub verdict: RobustVerdict,
}

pub fn vuf_polytope(disks: &DiskBundle, eps: f64, m: usize, which: VufKind) -> Result<PolytopeResult> {
    check_eps(eps)?;
    let objective = build_quadratic_forms().objective(eps, which);
    let f_outer = build_crp(disks, m, CrpMode::Circumscribed)?.max_quadratic(&objective);
    let f_inner = build_crp(disks, m, CrpMode::Inscribed)?.max_quadratic(&objective);
    let gap = gap_bound(disks, &objective, m);
    let mut verdict = RobustVerdict::new(
        vuf_metric(which),
        Method::Polytope,
        eps,
        Sense::NonPositive,
        vec![f_outer],
        Exactness::SafeApproximation,
    );
    verdict.diagnostics.polygon_order = Some(m);
    verdict.diagnostics.inner_value = Some(f_inner);
    verdict.diagnostics.gap_bound = Some(gap);
    Ok(PolytopeResult {
        f_outer,
        f_inner,
        gap_bound: gap,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robustcert::vuf_objective;
    use num_complex::Complex64;

    fn unit_disk() -> DiskBundle {
        DiskBundle::new([Complex64::new(0.0, 0.0); 3], [1.0; 3]).unwrap()
    }

    #[test]
    fn square_around_unit_disk() {
        let crp = build_crp(&unit_disk(), 2, CrpMode::Circumscribed).unwrap();
        let mut got: Vec<(i64, i64)> = crp.vertices[0]
            .iter()
            .map(|v| ((v[0] * 1e9).round() as i64, (v[1] * 1e9).round() as i64))
            .collect();
        got.sort();
        let s = 1_000_000_000;
        assert_eq!(got, vec![(-s, -s), (-s, s), (s, -s), (s, s)]);
    }

    #[test]
    fn inscribed_vertices_on_circle() {
        let d = DiskBundle::new(
            [Complex64::new(2.0, 0.0), Complex64::new(-1.0, 0.5), Complex64::new(0.0, 1.0)],
            [0.6, 0.1, 0.25],
        )
        .unwrap();
        for m in [2, 3, 7, 32] {
            let crp = build_crp(&d, m, CrpMode::Inscribed).unwrap();
            for p in 0..3 {
                assert_eq!(crp.vertices[p].len(), 2 * m);
                for v in &crp.vertices[p] {
                    let dist = (Complex64::new(v[0], v[1]) - d.centers[p]).norm();
                    assert!((dist - d.radii[p]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn circumscribed_polygon_contains_disk() {
        let d = unit_disk();
        let m = 32;
        let crp = build_crp(&d, m, CrpMode::Circumscribed).unwrap();
        let rho = 1.0 / (PI / 64.0).cos();
        for v in &crp.vertices[0] {
            assert!(((v[0] * v[0] + v[1] * v[1]).sqrt() - rho).abs() < 1e-12);
        }
        // apothem equals r: every edge midpoint touches the circle
        for k in 0..2 * m {
            let a = crp.vertices[0][k];
            let b = crp.vertices[0][(k + 1) % (2 * m)];
            let mid = ((a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0);
            assert!(((mid.0 * mid.0 + mid.1 * mid.1).sqrt() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_low_order() {
        assert!(matches!(
            build_crp(&unit_disk(), 1, CrpMode::Inscribed),
            Err(Error::PolygonOrder(1))
        ));
    }

    #[test]
    fn zero_radius_collapses_to_point() {
        let d = DiskBundle::new(
            [Complex64::new(1.0, 0.1), Complex64::new(-0.4, -0.9), Complex64::new(-0.5, 0.8)],
            [0.0; 3],
        )
        .unwrap();
        let res = vuf_polytope(&d, 0.3, 4, VufKind::Negative).unwrap();
        let j = vuf_objective(&d.centers, 0.3, VufKind::Negative);
        assert!((res.f_outer - j).abs() < 1e-12);
        assert!((res.f_inner - j).abs() < 1e-12);
        assert_eq!(res.gap_bound, 0.0);
    }
}
