//! Lagrangian dual bound on the worst-case VUF objective.
//!
//! The worst case lies on the boundary circles, so each free phase carries
//! the equality `‖V_p - C_p‖² = r_p²` with multiplier `μ_p`. Phases with
//! zero radius are substituted out. For `Q(μ) = -(M_FF + diag(μ)) ≻ 0` the
//! Lagrangian has the finite maximum
//!
//! ```text
//! g(μ) = Σ μ_p (‖C_p‖² - r_p²) + C_Dᵀ M_DD C_D + q(μ)ᵀ Q(μ)⁻¹ q(μ),
//! q(μ) = M_FD C_D - (μ_p C_p)_p,
//! ```
//!
//! which bounds `max J` from above for every such `μ`. The bound is
//! minimized over `μ` by a multistart simplex search.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::Result;
use crate::solvability::DiskBundle;
use crate::unbalance::{build_quadratic_forms, VufKind};

use super::exactness::{suff1_check, suff2_check, TriState};
use super::neldermead::{nelder_mead, NelderMeadOptions};
use super::vufbound::vuf_objective;
use super::{check_eps, vuf_metric, Exactness, Method, RobustVerdict, Sense};

/// Smallest eigenvalue accepted on the bordered dual certificate.
pub const PSD_TOL: f64 = -1e-8;

/// Relative smallest eigenvalue of `Q(μ)` accepted as positive definite.
const PD_MARGIN: f64 = 1e-12;
const START_OFFSETS: [f64; 3] = [0.5, 2.0, 8.0];
const RESTARTS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct LgrResult {
    /// Dual bound `γ*`.
    pub gamma: f64,
    /// Multipliers per phase; zero-radius phases report `0`.
    pub multipliers: [f64; 3],
    pub converged: bool,
    /// Smallest eigenvalue of the bordered matrix at `(γ*, μ*)`.
    pub min_eigenvalue: Option<f64>,
    pub verdict: RobustVerdict,
}

struct Reduced {
    free: Vec<usize>,
    m_ff: DMatrix<f64>,
    linear: DVector<f64>,
    constant: f64,
    centers: Vec<[f64; 2]>,
    offsets: Vec<f64>,
}

impl Reduced {
    fn new(disks: &DiskBundle, eps: f64, which: VufKind) -> Self {
        let m = build_quadratic_forms().objective(eps, which);
        let c = disks.center_coords();
        let free: Vec<usize> = (0..3).filter(|&p| disks.radii[p] > 0.0).collect();
        let fixed: Vec<usize> = (0..3).filter(|&p| disks.radii[p] == 0.0).collect();
        let coords = |phases: &[usize]| -> Vec<usize> {
            phases.iter().flat_map(|&p| [2 * p, 2 * p + 1]).collect()
        };
        let (fi, di) = (coords(&free), coords(&fixed));
        let m_ff = DMatrix::from_fn(fi.len(), fi.len(), |i, j| m[(fi[i], fi[j])]);
        let linear = DVector::from_fn(fi.len(), |i, _| di.iter().map(|&j| m[(fi[i], j)] * c[j]).sum());
        let constant = di
            .iter()
            .map(|&i| di.iter().map(|&j| c[i] * m[(i, j)] * c[j]).sum::<f64>())
            .sum();
        let centers = free.iter().map(|&p| [c[2 * p], c[2 * p + 1]]).collect();
        let offsets = free
            .iter()
            .map(|&p| disks.centers[p].norm_sqr() - disks.radii[p].powi(2))
            .collect();
        Self {
            free,
            m_ff,
            linear,
            constant,
            centers,
            offsets,
        }
    }

    fn q_matrix(&self, mu: &[f64]) -> DMatrix<f64> {
        let mut q = -&self.m_ff;
        for (k, &u) in mu.iter().enumerate() {
            q[(2 * k, 2 * k)] -= u;
            q[(2 * k + 1, 2 * k + 1)] -= u;
        }
        q
    }

    fn q_vector(&self, mu: &[f64]) -> DVector<f64> {
        let mut q = self.linear.clone();
        for (k, &u) in mu.iter().enumerate() {
            q[2 * k] -= u * self.centers[k][0];
            q[2 * k + 1] -= u * self.centers[k][1];
        }
        q
    }

    fn affine(&self, mu: &[f64]) -> f64 {
        self.constant + mu.iter().zip(&self.offsets).map(|(u, o)| u * o).sum::<f64>()
    }

    /// Dual function; `+∞` unless `Q(μ)` is positive definite with margin.
    ///
    /// Evaluated through the eigendecomposition so that the quadratic term
    /// stays a sum of non-negative terms; a Cholesky solve on a nearly
    /// singular `Q` can return large negative values.
    fn dual(&self, mu: &[f64]) -> f64 {
        let eig = SymmetricEigen::new(self.q_matrix(mu));
        let scale = eig.eigenvalues.amax().max(1.0);
        if eig.eigenvalues.min() <= PD_MARGIN * scale {
            return f64::INFINITY;
        }
        let q = self.q_vector(mu);
        let proj = eig.eigenvectors.transpose() * &q;
        let quad: f64 = proj.iter().zip(eig.eigenvalues.iter()).map(|(p, l)| p * p / l).sum();
        self.affine(mu) + quad
    }

    /// Smallest eigenvalue of `[[γ - affine, qᵀ], [q, Q]]`.
    fn bordered_min_eigenvalue(&self, gamma: f64, mu: &[f64]) -> f64 {
        let n = self.linear.len();
        let q = self.q_vector(mu);
        let big = self.q_matrix(mu);
        let mut b = DMatrix::zeros(n + 1, n + 1);
        b[(0, 0)] = gamma - self.affine(mu);
        for i in 0..n {
            b[(0, i + 1)] = q[i];
            b[(i + 1, 0)] = q[i];
            for j in 0..n {
                b[(i + 1, j + 1)] = big[(i, j)];
            }
        }
        SymmetricEigen::new(b).eigenvalues.min()
    }
}

/// Minimize the dual over the multipliers. Returns `(γ*, μ*, converged)`.
fn minimize_dual(problem: &Reduced) -> (f64, Vec<f64>, bool) {
    let n = problem.free.len();
    let lambda_max = SymmetricEigen::new(problem.m_ff.clone()).eigenvalues.max();
    let mut best: Option<(f64, Vec<f64>, bool)> = None;
    let consider = |f: f64, x: Vec<f64>, ok: bool, best: &mut Option<(f64, Vec<f64>, bool)>| {
        if best.as_ref().is_none_or(|b| f < b.0) {
            *best = Some((f, x, ok));
        }
    };
    for delta in START_OFFSETS {
        let x0 = vec![-(lambda_max + delta); n];
        let opts = NelderMeadOptions {
            initial_step: delta.max(1.0),
            ..Default::default()
        };
        let res = nelder_mead(|mu| problem.dual(mu), &x0, &opts);
        consider(res.f, res.x, res.converged, &mut best);
    }
    // restart from the incumbent with shrinking simplices
    let mut step = 0.5;
    for _ in 0..RESTARTS {
        let (f0, x0, _) = best.clone().expect("at least one start");
        let opts = NelderMeadOptions {
            initial_step: step,
            ..Default::default()
        };
        let res = nelder_mead(|mu| problem.dual(mu), &x0, &opts);
        let improved = res.f < f0;
        consider(res.f, res.x, res.converged, &mut best);
        if !improved {
            break;
        }
        step *= 0.1;
    }
    best.expect("at least one start")
}

/// Dual bound `γ*` alone, without exactness checks.
pub(crate) fn lgr_bound(disks: &DiskBundle, eps: f64, which: VufKind) -> Result<LgrResult> {
    check_eps(eps)?;
    let problem = Reduced::new(disks, eps, which);
    let metric = vuf_metric(which);
    if problem.free.is_empty() {
        let gamma = vuf_objective(&disks.centers, eps, which);
        let mut verdict = RobustVerdict::new(
            metric,
            Method::Lgr,
            eps,
            Sense::NonPositive,
            vec![gamma],
            Exactness::SafeApproximation,
        );
        verdict.diagnostics.multipliers = Some(vec![0.0; 3]);
        verdict.diagnostics.dual_converged = Some(true);
        return Ok(LgrResult {
            gamma,
            multipliers: [0.0; 3],
            converged: true,
            min_eigenvalue: None,
            verdict,
        });
    }
    let (gamma, mu, converged) = minimize_dual(&problem);
    let min_eig = problem.bordered_min_eigenvalue(gamma, &mu);
    let mut multipliers = [0.0; 3];
    for (k, &p) in problem.free.iter().enumerate() {
        multipliers[p] = mu[k];
    }
    let mut verdict = RobustVerdict::new(
        metric,
        Method::Lgr,
        eps,
        Sense::NonPositive,
        vec![gamma],
        Exactness::SafeApproximation,
    );
    verdict.diagnostics.multipliers = Some(multipliers.to_vec());
    verdict.diagnostics.dual_converged = Some(converged && min_eig >= PSD_TOL);
    verdict.diagnostics.min_eigenvalue = Some(min_eig);
    Ok(LgrResult {
        gamma,
        multipliers,
        converged,
        min_eigenvalue: Some(min_eig),
        verdict,
    })
}

/// Dual bound with the tightness certificates attached.
pub fn vuf_lgr(disks: &DiskBundle, eps: f64, which: VufKind) -> Result<LgrResult> {
    let mut res = lgr_bound(disks, eps, which)?;
    let suff1 = suff1_check(disks, eps, which)?.result;
    let suff2 = suff2_check(disks, eps, which)?;
    let d = &mut res.verdict.diagnostics;
    d.suff1 = Some(suff1);
    d.suff2 = Some(suff2);
    if suff1 == TriState::Holds || suff2 {
        res.verdict.exactness = Exactness::StrongDualityCertified;
    }
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn bundle(ca: f64, r: [f64; 3]) -> DiskBundle {
        let s = 3f64.sqrt();
        DiskBundle::new(
            [
                Complex64::new(ca, 0.0),
                Complex64::new(-1.0, -s),
                Complex64::new(-1.0, s),
            ],
            r,
        )
        .unwrap()
    }

    #[test]
    fn degenerate_disks_give_point_value() {
        let d = bundle(2.0, [0.0; 3]);
        let res = vuf_lgr(&d, 0.3, VufKind::Negative).unwrap();
        assert_eq!(res.gamma, vuf_objective(&d.centers, 0.3, VufKind::Negative));
    }

    #[test]
    fn tight_instance_is_certified() {
        let res = vuf_lgr(&bundle(3.0, [0.1; 3]), 0.1, VufKind::Negative).unwrap();
        assert!((res.gamma - 1.200550).abs() < 1e-4, "{}", res.gamma);
        assert_eq!(res.verdict.exactness, Exactness::StrongDualityCertified);
        assert!(res.min_eigenvalue.unwrap() >= PSD_TOL);
        assert!(res.multipliers.iter().all(|m| *m < -3.0));
    }

    #[test]
    fn singular_multipliers_are_rejected() {
        // zero-sequence centers put the optimum where Q(μ) is singular
        let z = Complex64::new(0.4, -0.3);
        let d = DiskBundle::new([z; 3], [0.3, 0.15, 0.45]).unwrap();
        for eps in [0.1, 0.5, 0.9] {
            let res = vuf_lgr(&d, eps, VufKind::Negative).unwrap();
            let sampled = super::super::sample_oracle(&d, eps, VufKind::Negative, 200_000, 1);
            assert!(res.gamma >= sampled, "{eps}: {} < {sampled}", res.gamma);
            assert!(res.gamma <= sampled + 1e-2, "{eps}: {} vs {sampled}", res.gamma);
            assert!(res.min_eigenvalue.unwrap() >= PSD_TOL);
        }
    }

    #[test]
    fn bound_dominates_centers() {
        for r in [[0.6; 3], [0.2, 0.0, 0.4], [0.0, 0.0, 0.3]] {
            let d = bundle(2.0, r);
            let res = vuf_lgr(&d, 0.3, VufKind::Negative).unwrap();
            let j = vuf_objective(&d.centers, 0.3, VufKind::Negative);
            assert!(res.gamma >= j - 1e-9, "{} < {j}", res.gamma);
        }
    }
}
