//! Stress measures of a load scenario, the existence/uniqueness certificate
//! they feed, and the voltage disks it yields.
//!
//! With `Z̃ = diag⁻¹(v⁰) Ẑ diag⁻¹(v̄⁰)`, each PQ node-phase `i` gets
//!
//! ```text
//! η_i = Σ_j Z̃_ij σ̄_j          (incremental load)
//! ξ_i = Σ_j |Z̃_ij| |S_j|       (total load)
//! γ_i = 2(ξ_i + Re η_i) - |η_i|² - ξ_i²
//! ```
//!
//! and the aggregates `η = max|η_i|`, `ξ = max ξ_i`, `γ = max γ_i`. When
//! `γ + 2ξη < 1` and `ξ - η ≤ 1`, a unique solution exists with
//! `|v_i / v⁰_i - (1 - η_i)| ≤ r ξ_i`, where `2ξ²r² = 1 - γ - √Δ` and
//! `Δ = (1-γ)² - 4ξ²η²`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netmodel::{LoadState, NetworkModel};
use crate::phase::{NodePhase, Phase};

/// Round-off allowance before a negative `Δ` is treated as an internal error.
const DELTA_CLAMP: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct StressSummary {
    index: Vec<NodePhase>,
    z_tilde: DMatrix<Complex64>,
    /// Per node-phase `η_i`.
    pub eta: Vec<Complex64>,
    /// Per node-phase `ξ_i`.
    pub xi: Vec<f64>,
    /// Per node-phase `γ_i`.
    pub gamma: Vec<f64>,
    pub eta_max: f64,
    pub xi_max: f64,
    pub gamma_max: f64,
    pub delta: f64,
    pub feasible: bool,
    /// Disk scale `r`; `None` when the certificate fails.
    pub radius: Option<f64>,
}

impl StressSummary {
    pub fn index(&self) -> &[NodePhase] {
        &self.index
    }

    /// `Z̃`.
    pub fn z_tilde(&self) -> &DMatrix<Complex64> {
        &self.z_tilde
    }

    /// `γ + 2ξη`, which must stay below 1.
    pub fn margin_lhs(&self) -> f64 {
        self.gamma_max + 2.0 * self.xi_max * self.eta_max
    }
}

/// Evaluate the stress measures of `loads` on `model`.
pub fn compute_stress(model: &NetworkModel, loads: &LoadState) -> Result<StressSummary> {
    let n = model.load_count();
    let v0 = loads.nominal_voltage();
    if v0.len() != n || loads.actual().len() != n {
        return Err(Error::Dimension(format!(
            "load state has {} entries, model has {n} PQ phases",
            v0.len()
        )));
    }
    let z_hat = model.z_hat();
    let z_tilde = DMatrix::from_fn(n, n, |i, j| z_hat[(i, j)] / (v0[i] * v0[j].conj()));

    let sigma_conj: Vec<Complex64> = loads.increment().iter().map(|s| s.conj()).collect();
    let s_abs: Vec<f64> = loads.actual().iter().map(|s| s.norm()).collect();

    let mut eta = Vec::with_capacity(n);
    let mut xi = Vec::with_capacity(n);
    let mut gamma = Vec::with_capacity(n);
    for i in 0..n {
        let mut e = Complex64::new(0.0, 0.0);
        let mut x = 0.0;
        for j in 0..n {
            let z = z_tilde[(i, j)];
            e += z * sigma_conj[j];
            x += z.norm() * s_abs[j];
        }
        eta.push(e);
        xi.push(x);
        gamma.push(2.0 * (x + e.re) - e.norm_sqr() - x * x);
    }

    let eta_max = eta.iter().map(|e| e.norm()).fold(0.0, f64::max);
    let xi_max = xi.iter().copied().fold(0.0, f64::max);
    let gamma_max = gamma.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let delta = (1.0 - gamma_max).powi(2) - 4.0 * xi_max * xi_max * eta_max * eta_max;
    let feasible = gamma_max + 2.0 * xi_max * eta_max < 1.0 && xi_max - eta_max <= 1.0;

    let radius = if !feasible {
        None
    } else if xi_max == 0.0 {
        Some(0.0)
    } else {
        debug_assert!(delta >= -DELTA_CLAMP, "feasible stress with Δ = {delta}");
        let sqrt_delta = delta.max(0.0).sqrt();
        // equal to sqrt((1 - γ - √Δ) / (2ξ²)) without the cancellation
        Some(eta_max * (2.0 / (1.0 - gamma_max + sqrt_delta)).sqrt())
    };

    Ok(StressSummary {
        index: model.load_index().to_vec(),
        z_tilde,
        eta,
        xi,
        gamma,
        eta_max,
        xi_max,
        gamma_max,
        delta,
        feasible,
        radius,
    })
}

/// Per-phase disks `{V : |V - C_p| ≤ r_p}` around one three-phase node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskBundle {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node: Option<String>,
    /// Centers for phases a, b, c, as `[re, im]`.
    pub centers: [Complex64; 3],
    pub radii: [f64; 3],
}

impl DiskBundle {
    pub fn new(centers: [Complex64; 3], radii: [f64; 3]) -> Result<Self> {
        let bundle = Self {
            node: None,
            centers,
            radii,
        };
        bundle.validate()?;
        Ok(bundle)
    }

    pub fn with_node(mut self, node: impl Into<String>) -> Self {
        self.node = Some(node.into());
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.radii.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "disk radii must be finite and non-negative, got {:?}",
                self.radii
            )));
        }
        if self.centers.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidArgument("disk centers must be finite".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let bundle: Self = serde_json::from_str(text)?;
        bundle.validate()?;
        Ok(bundle)
    }

    /// A phase whose voltage is pinned to its center.
    pub fn is_degenerate(&self, phase: Phase) -> bool {
        self.radii[phase.index()] == 0.0
    }

    /// Centers in real coordinates `(a^r, a^i, b^r, b^i, c^r, c^i)`.
    pub fn center_coords(&self) -> [f64; 6] {
        let c = &self.centers;
        [c[0].re, c[0].im, c[1].re, c[1].im, c[2].re, c[2].im]
    }

    pub fn radius_norm(&self) -> f64 {
        self.radii.iter().map(|r| r * r).sum::<f64>().sqrt()
    }

    /// Is `v` inside disk `phase`, allowing a relative slack `rel`?
    pub fn contains(&self, phase: Phase, v: Complex64, rel: f64) -> bool {
        let p = phase.index();
        (v - self.centers[p]).norm() <= self.radii[p] * (1.0 + rel)
    }
}

/// Disks of every PQ node-phase, in model order: `(centers, radii)`.
pub fn node_phase_disks(
    model: &NetworkModel,
    loads: &LoadState,
    stress: &StressSummary,
) -> Result<(Vec<Complex64>, Vec<f64>)> {
    let r = stress.radius.ok_or(Error::Unsolvable)?;
    let e = model.no_load_voltage();
    let v0 = loads.nominal_voltage();
    let mut centers = Vec::with_capacity(e.len());
    let mut radii = Vec::with_capacity(e.len());
    for i in 0..e.len() {
        let anchor = e[i] * v0[i];
        centers.push((Complex64::new(1.0, 0.0) - stress.eta[i]) * anchor);
        radii.push(r * anchor.norm() * stress.xi[i]);
    }
    Ok((centers, radii))
}

/// Disks of the three phases of `node`.
pub fn build_disks(
    model: &NetworkModel,
    loads: &LoadState,
    stress: &StressSummary,
    node: &str,
) -> Result<DiskBundle> {
    if !stress.feasible {
        return Err(Error::Unsolvable);
    }
    let pos = model.three_phase_positions(node)?;
    let (centers, radii) = node_phase_disks(model, loads, stress)?;
    Ok(DiskBundle {
        node: Some(node.to_string()),
        centers: pos.map(|i| centers[i]),
        radii: pos.map(|i| radii[i]),
    })
}
