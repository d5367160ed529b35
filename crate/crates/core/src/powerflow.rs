//! Picard iteration on the normalized fixed-point map
//! `v ↦ 1 - Ẑ diag⁻¹(v̄) S̄`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::PowerFlowError;
use crate::netmodel::NetworkModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOptions {
    /// Stop once `‖v^{k+1} - v^k‖∞ < tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Report divergence when `‖v‖∞` exceeds this.
    pub blowup: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 500,
            blowup: 10.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PowerFlowResult {
    /// Normalized voltages `v_L`.
    pub normalized: DVector<Complex64>,
    /// Physical voltages `V_L = diag(E) v_L`.
    pub voltages: DVector<Complex64>,
    pub iterations: usize,
    /// Final update norm; below the requested tolerance on success.
    pub residual: f64,
}

fn inf_norm(v: &DVector<Complex64>) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// One application of the fixed-point map. Returns the index of a zero
/// entry of `v` instead when there is one.
fn apply_map(
    z_hat: &DMatrix<Complex64>,
    v: &DVector<Complex64>,
    s: &DVector<Complex64>,
) -> Result<DVector<Complex64>, usize> {
    let mut current = DVector::zeros(v.len());
    for (i, (vi, si)) in v.iter().zip(s.iter()).enumerate() {
        if vi.norm() == 0.0 {
            return Err(i);
        }
        current[i] = si.conj() / vi.conj();
    }
    Ok(DVector::from_element(v.len(), Complex64::new(1.0, 0.0)) - z_hat * current)
}

/// `‖v - (1 - Ẑ diag⁻¹(v̄) S̄)‖∞`, or infinity if `v` has a zero entry.
pub fn fixed_point_residual(
    model: &NetworkModel,
    v: &DVector<Complex64>,
    s: &DVector<Complex64>,
) -> f64 {
    match apply_map(model.z_hat(), v, s) {
        Ok(next) => inf_norm(&(next - v)),
        Err(_) => f64::INFINITY,
    }
}

/// Solve for the normalized load voltages under withdrawal `s`, starting
/// from `init`.
pub fn solve_fixed_point(
    model: &NetworkModel,
    s: &DVector<Complex64>,
    init: &DVector<Complex64>,
    opts: &FixedPointOptions,
) -> Result<PowerFlowResult, PowerFlowError> {
    let normalized = iterate(model.z_hat(), s, init, opts)?;
    Ok(PowerFlowResult {
        voltages: model.denormalize(&normalized.0),
        normalized: normalized.0,
        iterations: normalized.1,
        residual: normalized.2,
    })
}

/// Fixed-point iteration on a bare normalized impedance matrix.
///
/// Returns `(v, iterations, final update norm)`.
pub fn iterate(
    z_hat: &DMatrix<Complex64>,
    s: &DVector<Complex64>,
    init: &DVector<Complex64>,
    opts: &FixedPointOptions,
) -> Result<(DVector<Complex64>, usize, f64), PowerFlowError> {
    let n = z_hat.nrows();
    if z_hat.ncols() != n || s.len() != n || init.len() != n {
        return Err(PowerFlowError::InvalidInput(format!(
            "dimension mismatch: Ẑ is {}x{}, load {}, init {}",
            z_hat.nrows(),
            z_hat.ncols(),
            s.len(),
            init.len()
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(PowerFlowError::InvalidInput(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    if init.iter().any(|z| z.norm() == 0.0) {
        return Err(PowerFlowError::InvalidInput(
            "initial point has a zero entry".into(),
        ));
    }
    let mut v = init.clone();
    let mut update = f64::INFINITY;
    for k in 1..=opts.max_iter {
        let next = apply_map(z_hat, &v, s).map_err(|index| PowerFlowError::ZeroCrossing {
            iteration: k,
            index,
        })?;
        update = inf_norm(&(&next - &v));
        let size = inf_norm(&next);
        if !update.is_finite() || !(size <= opts.blowup) {
            return Err(PowerFlowError::Diverged {
                iterations: k,
                update_norm: update,
            });
        }
        // when the update is tiny the previous iterate already satisfies
        // the residual contract
        if update < opts.tol {
            return Ok((v, k, update));
        }
        v = next;
    }
    Err(PowerFlowError::Diverged {
        iterations: opts.max_iter,
        update_norm: update,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(z: f64, s: f64) -> Result<(DVector<Complex64>, usize, f64), PowerFlowError> {
        iterate(
            &DMatrix::from_element(1, 1, Complex64::new(z, 0.0)),
            &DVector::from_element(1, Complex64::new(s, 0.0)),
            &DVector::from_element(1, Complex64::new(1.0, 0.0)),
            &FixedPointOptions::default(),
        )
    }

    #[test]
    fn no_load_converges_immediately() {
        let (v, k, res) = scalar(0.3, 0.0).unwrap();
        assert_eq!(k, 1);
        assert_eq!(res, 0.0);
        assert_eq!(v[0], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn scalar_high_voltage_root() {
        let (v, _, res) = scalar(0.1, 0.1).unwrap();
        let root = (1.0 + (1.0f64 - 0.04).sqrt()) / 2.0;
        assert!((v[0].re - root).abs() < 1e-9, "{} vs {root}", v[0]);
        assert!(v[0].im.abs() < 1e-12);
        assert!(res < 1e-10);
    }

    #[test]
    fn scalar_without_real_root_diverges() {
        assert!(matches!(
            scalar(1.0, 0.3),
            Err(PowerFlowError::Diverged { .. })
        ));
    }

    #[test]
    fn rejects_bad_inputs() {
        let z = DMatrix::from_element(1, 1, Complex64::new(0.1, 0.0));
        let s = DVector::from_element(1, Complex64::new(0.1, 0.0));
        let zero = DVector::from_element(1, Complex64::new(0.0, 0.0));
        assert!(matches!(
            iterate(&z, &s, &zero, &FixedPointOptions::default()),
            Err(PowerFlowError::InvalidInput(_))
        ));
        let opts = FixedPointOptions {
            tol: 0.0,
            ..Default::default()
        };
        assert!(iterate(&z, &s, &s, &opts).is_err());
    }
}
