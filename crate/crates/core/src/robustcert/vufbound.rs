//! Triangle-inequality bound on the VUF objective.

use num_complex::Complex64;

use crate::error::Result;
use crate::solvability::DiskBundle;
use crate::unbalance::{build_quadratic_forms, quadratic, VufKind, ALPHA};

use super::{check_eps, vuf_metric, Exactness, Method, RobustVerdict, Sense};

/// `J(V) = V^⊤(A_x - ε²A_p)V` at a voltage triple.
pub fn vuf_objective(v: &[Complex64; 3], eps: f64, which: VufKind) -> f64 {
    let q = build_quadratic_forms();
    let x = [v[0].re, v[0].im, v[1].re, v[1].im, v[2].re, v[2].im];
    quadratic(&q.objective(eps, which), &x)
}

/// Upper bound on `max J` over the disks:
/// `(|3V_x(C)| + Σr)² - ε² max(|3V_p(C)| - Σr, 0)²`.
pub fn vuf_bound(disks: &DiskBundle, eps: f64, which: VufKind) -> Result<RobustVerdict> {
    check_eps(eps)?;
    let [a, b, c] = disks.centers;
    let a2 = ALPHA * ALPHA;
    let unbalanced = match which {
        VufKind::Negative => a + a2 * b + ALPHA * c,
        VufKind::Zero => a + b + c,
    };
    let positive = a + ALPHA * b + a2 * c;
    let spread: f64 = disks.radii.iter().sum();
    let lhs = (unbalanced.norm() + spread).powi(2);
    let rhs = eps * eps * (positive.norm() - spread).max(0.0).powi(2);
    Ok(RobustVerdict::new(
        vuf_metric(which),
        Method::Bound,
        eps,
        Sense::NonPositive,
        vec![lhs - rhs],
        Exactness::SafeApproximation,
    ))
}
