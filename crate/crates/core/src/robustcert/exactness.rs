//! Sufficient conditions under which the Lagrangian dual bound is tight.
//!
//! Both checks are one-sided: a `true`/[`TriState::Holds`] answer certifies
//! tightness, anything else says nothing.

use nalgebra::{Matrix6, SMatrix, SVector, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::solvability::DiskBundle;
use crate::unbalance::{build_quadratic_forms, VufKind};

use super::check_eps;

/// `λ_min(ε²A_p - A_x)` for every `ε ∈ (0, 1)` and both `x ∈ {n, 0}`.
const LAMBDA_MIN: f64 = -3.0;

const PG_TOL: f64 = 1e-10;
const PG_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TriState {
    Holds,
    Fails,
    Indeterminate,
}

impl TriState {
    pub fn holds(self) -> bool {
        self == TriState::Holds
    }
}

/// Outcome of the coordinate-pair condition, per phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suff1Report {
    /// `f_pair` lies outside the box `[-r_i, r_i] × [-r_{i+1}, r_{i+1}]`.
    pub outside_box: [bool; 3],
    /// Certified lower bound on the pair minimum.
    pub lower: [f64; 3],
    /// Value at the best feasible point found.
    pub upper: [f64; 3],
    /// `4(2+ε²)² r_p²`.
    pub threshold: [f64; 3],
    pub iterations: [usize; 3],
    pub phases: [TriState; 3],
    pub result: TriState,
}

impl Suff1Report {
    pub fn holds(&self) -> bool {
        self.result.holds()
    }
}

type Pair = SMatrix<f64, 2, 6>;

fn project(y: &mut Vector6<f64>, radii: &[f64; 3]) {
    for (p, &r) in radii.iter().enumerate() {
        let mut seg = y.fixed_rows_mut::<2>(2 * p);
        let n = seg.norm();
        if n > r {
            if n > 0.0 {
                seg *= r / n;
            } else {
                seg.fill(0.0);
            }
        }
    }
}

/// Minimize `‖M y + f‖²` over the product of centered disks with the given
/// radii. Returns `(lower bound, upper bound, iterations)`.
fn pair_minimum(m: &Pair, f: &SVector<f64, 2>, radii: &[f64; 3]) -> (f64, f64, usize) {
    let phi = |y: &Vector6<f64>| (m * y + f).norm_squared();
    let grad = |y: &Vector6<f64>| m.transpose() * (m * y + f) * 2.0;
    let lipschitz = 2.0 * (m.transpose() * m).symmetric_eigenvalues().max();
    let mut y = Vector6::zeros();
    let mut iterations = 0;
    if lipschitz > 0.0 {
        while iterations < PG_MAX_ITER {
            iterations += 1;
            let mut next = y - grad(&y) / lipschitz;
            project(&mut next, radii);
            let mapping = (next - y).norm() * lipschitz;
            y = next;
            if mapping <= PG_TOL {
                break;
            }
        }
    }
    let upper = phi(&y);
    // linear minorant at y, minimized over the disks
    let g = grad(&y);
    let support: f64 = (0..3)
        .map(|p| radii[p] * g.fixed_rows::<2>(2 * p).norm())
        .sum();
    let lower = (upper - g.dot(&y) - support).max(0.0);
    (lower.min(upper), upper, iterations)
}

/// Coordinate-pair condition for tightness of the dual bound.
///
/// With `A = ε²A_p - A_x`, `B = A + 3I`, `f = 2AC` and
/// `ρ_i = 2 Σ_p r_p ‖B_i[p]‖`, each phase `p` (coordinates `i, i+1`) needs
/// `f_{i,i+1}` outside `[-ρ_i, ρ_i] × [-ρ_{i+1}, ρ_{i+1}]` and
/// `min ‖(2BY + f)_{i,i+1}‖² ≥ 4(2+ε²)² r_p²` over `Y` in the product of
/// centered disks of radii `r`.
pub fn suff1_check(disks: &DiskBundle, eps: f64, which: VufKind) -> Result<Suff1Report> {
    check_eps(eps)?;
    let q = build_quadratic_forms();
    let a: Matrix6<f64> = q.a_p * (eps * eps) - q.unbalance_form(which);
    let b = a - Matrix6::identity() * LAMBDA_MIN;
    let c = Vector6::from_row_slice(&disks.center_coords());
    let f = a * c * 2.0;
    let r = disks.radii;
    let rho: [f64; 6] = std::array::from_fn(|i| {
        2.0 * (0..3)
            .map(|p| r[p] * b.fixed_view::<1, 2>(i, 2 * p).norm())
            .sum::<f64>()
    });

    let mut report = Suff1Report {
        outside_box: [false; 3],
        lower: [0.0; 3],
        upper: [0.0; 3],
        threshold: [0.0; 3],
        iterations: [0; 3],
        phases: [TriState::Indeterminate; 3],
        result: TriState::Indeterminate,
    };
    for p in 0..3 {
        let i = 2 * p;
        report.outside_box[p] = f[i].abs() > rho[i] || f[i + 1].abs() > rho[i + 1];
        let m: Pair = b.fixed_rows::<2>(i) * 2.0;
        let fp = SVector::<f64, 2>::new(f[i], f[i + 1]);
        let (lower, upper, iterations) = pair_minimum(&m, &fp, &r);
        let threshold = 4.0 * (2.0 + eps * eps).powi(2) * r[p] * r[p];
        report.lower[p] = lower;
        report.upper[p] = upper;
        report.threshold[p] = threshold;
        report.iterations[p] = iterations;
        report.phases[p] = if !report.outside_box[p] || upper < threshold {
            TriState::Fails
        } else if lower >= threshold {
            TriState::Holds
        } else {
            TriState::Indeterminate
        };
    }
    report.result = if report.phases.iter().all(|s| s.holds()) {
        TriState::Holds
    } else if report.phases.contains(&TriState::Fails) {
        TriState::Fails
    } else {
        TriState::Indeterminate
    };
    Ok(report)
}

/// Centers in the null space of `A_x - ε²A_p`.
pub fn suff2_check(disks: &DiskBundle, eps: f64, which: VufKind) -> Result<bool> {
    check_eps(eps)?;
    let c = Vector6::from_row_slice(&disks.center_coords());
    let residual = build_quadratic_forms().objective(eps, which) * c;
    Ok(residual.amax() <= 1e-9 * c.amax().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn bundle(ca: f64, r: f64) -> DiskBundle {
        let s = 3f64.sqrt();
        DiskBundle::new(
            [
                Complex64::new(ca, 0.0),
                Complex64::new(-1.0, -s),
                Complex64::new(-1.0, s),
            ],
            [r; 3],
        )
        .unwrap()
    }

    #[test]
    fn tight_instance_holds() {
        let rep = suff1_check(&bundle(3.0, 0.1), 0.1, VufKind::Negative).unwrap();
        assert!(rep.holds(), "{rep:?}");
        for p in 0..3 {
            assert!(rep.lower[p] <= rep.upper[p]);
            assert!(rep.upper[p] - rep.lower[p] < 1e-6);
        }
    }

    #[test]
    fn wide_instance_fails() {
        let rep = suff1_check(&bundle(2.0, 0.6), 0.3, VufKind::Negative).unwrap();
        assert_eq!(rep.result, TriState::Fails);
    }

    #[test]
    fn zero_radius_holds_when_pairs_nonzero() {
        let rep = suff1_check(&bundle(3.0, 0.0), 0.1, VufKind::Negative).unwrap();
        assert!(rep.outside_box.iter().all(|b| *b));
        assert!(rep.holds());
    }

    #[test]
    fn suff2_cases() {
        let zero = DiskBundle::new([Complex64::new(0.0, 0.0); 3], [0.3; 3]).unwrap();
        assert!(suff2_check(&zero, 0.2, VufKind::Negative).unwrap());
        let common = Complex64::new(0.7, -0.2);
        let null = DiskBundle::new([common; 3], [0.1; 3]).unwrap();
        assert!(suff2_check(&null, 0.2, VufKind::Negative).unwrap());
        assert!(!suff2_check(&bundle(2.0, 0.6), 0.3, VufKind::Negative).unwrap());
    }
}
