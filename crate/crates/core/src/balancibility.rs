//! End-to-end balance certification: solvability first, then robust
//! unbalance checks on the disks of each critical node.

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netmodel::{LoadDocument, LoadState, NetworkModel};
use crate::powerflow::{solve_fixed_point, FixedPointOptions};
use crate::robustcert::{certify_disks, check_compatible, check_eps, Method, MethodOptions, RobustVerdict};
use crate::solvability::{build_disks, compute_stress, DiskBundle, StressSummary};
use crate::unbalance::{Metric, VoltageTriple};

/// One balance requirement: `metric ≤ eps`, checked with `method`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub metric: Metric,
    pub method: Method,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StressSnapshot {
    pub eta: f64,
    pub xi: f64,
    pub gamma: f64,
    pub delta: f64,
    pub margin_lhs: f64,
    pub feasible: bool,
    pub radius: Option<f64>,
}

impl From<&StressSummary> for StressSnapshot {
    fn from(s: &StressSummary) -> Self {
        Self {
            eta: s.eta_max,
            xi: s.xi_max,
            gamma: s.gamma_max,
            delta: s.delta,
            margin_lhs: s.margin_lhs(),
            feasible: s.feasible,
            radius: s.radius,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeCertificate {
    pub node: String,
    pub disks: DiskBundle,
    pub verdicts: Vec<RobustVerdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceCertificate {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    pub solvable: bool,
    pub stress: StressSnapshot,
    pub nodes: Vec<NodeCertificate>,
    /// Solvable and every verdict passed.
    pub balanced: bool,
}

fn validate_requests(requests: &[Request]) -> Result<()> {
    for r in requests {
        check_compatible(r.metric, r.method)?;
        check_eps(r.eps)?;
    }
    Ok(())
}

/// Check solvability and, when it holds, every request at every critical
/// node.
pub fn certify(
    model: &NetworkModel,
    loads: &LoadState,
    critical_nodes: &[String],
    requests: &[Request],
    opts: &MethodOptions,
) -> Result<BalanceCertificate> {
    validate_requests(requests)?;
    for node in critical_nodes {
        model.three_phase_positions(node)?;
    }
    let stress = compute_stress(model, loads)?;
    if !stress.feasible {
        return Ok(BalanceCertificate {
            scenario: None,
            solvable: false,
            stress: (&stress).into(),
            nodes: Vec::new(),
            balanced: false,
        });
    }
    let mut nodes = Vec::with_capacity(critical_nodes.len());
    for node in critical_nodes {
        let disks = build_disks(model, loads, &stress, node)?;
        let verdicts = requests
            .iter()
            .map(|r| certify_disks(&disks, r.metric, r.method, r.eps, opts))
            .collect::<Result<Vec<_>>>()?;
        nodes.push(NodeCertificate {
            node: node.clone(),
            disks,
            verdicts,
        });
    }
    let balanced = nodes.iter().all(|n| n.verdicts.iter().all(|v| v.pass));
    Ok(BalanceCertificate {
        scenario: None,
        solvable: true,
        stress: (&stress).into(),
        nodes,
        balanced,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinEpsOptions {
    pub lo: f64,
    pub hi: f64,
    /// Final bracket width.
    pub tol: f64,
    pub max_iter: usize,
    /// Points of the monotonicity pre-check grid.
    pub grid: usize,
    pub method: MethodOptions,
}

impl Default for MinEpsOptions {
    fn default() -> Self {
        Self {
            lo: 1e-4,
            hi: 1.0 - 1e-4,
            tol: 1e-4,
            max_iter: 40,
            grid: 12,
            method: MethodOptions {
                exactness_checks: false,
                ..Default::default()
            },
        }
    }
}

/// Smallest tolerance (to within `opts.tol`) that `method` certifies on
/// `disks`. Returns the passing end of the final bracket.
pub fn min_epsilon_disks(
    disks: &DiskBundle,
    metric: Metric,
    method: Method,
    opts: &MinEpsOptions,
) -> Result<f64> {
    check_compatible(metric, method)?;
    if !(opts.tol > 0.0) || opts.grid < 2 {
        return Err(Error::InvalidArgument(
            "bisection needs a positive tolerance and at least two grid points".into(),
        ));
    }
    check_eps(opts.lo)?;
    check_eps(opts.hi)?;
    if opts.lo >= opts.hi {
        return Err(Error::InvalidArgument(format!(
            "empty tolerance range [{}, {}]",
            opts.lo, opts.hi
        )));
    }
    let passes = |eps: f64| -> Result<bool> {
        Ok(certify_disks(disks, metric, method, eps, &opts.method)?.pass)
    };

    let step = (opts.hi - opts.lo) / (opts.grid - 1) as f64;
    let grid: Vec<f64> = (0..opts.grid)
        .map(|k| if k + 1 == opts.grid { opts.hi } else { opts.lo + step * k as f64 })
        .collect();
    let verdicts = grid.iter().map(|&e| passes(e)).collect::<Result<Vec<_>>>()?;
    let Some(first) = verdicts.iter().position(|v| *v) else {
        return Err(Error::Unbalanceable {
            metric: metric.to_string(),
            method: method.to_string(),
            eps_hi: opts.hi,
        });
    };
    if let Some(k) = verdicts[first..].iter().position(|v| !*v) {
        return Err(Error::NonMonotone {
            metric: metric.to_string(),
            method: method.to_string(),
            eps: grid[first + k],
        });
    }
    if first == 0 {
        return Ok(opts.lo);
    }

    let (mut lo, mut hi) = (grid[first - 1], grid[first]);
    for _ in 0..opts.max_iter {
        if hi - lo <= opts.tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if passes(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Smallest certifiable tolerance at `node` for the given scenario.
pub fn min_epsilon(
    model: &NetworkModel,
    loads: &LoadState,
    node: &str,
    metric: Metric,
    method: Method,
    opts: &MinEpsOptions,
) -> Result<f64> {
    let stress = compute_stress(model, loads)?;
    let disks = build_disks(model, loads, &stress, node)?;
    min_epsilon_disks(&disks, metric, method, opts)
}

/// Voltages of `node` from the fixed-point solver started at `v⁰`.
pub fn node_voltages(model: &NetworkModel, loads: &LoadState, node: &str) -> Result<VoltageTriple> {
    let pos = model.three_phase_positions(node)?;
    let pf = solve_fixed_point(
        model,
        loads.actual(),
        loads.nominal_voltage(),
        &FixedPointOptions::default(),
    )?;
    Ok(VoltageTriple::from_array(pos.map(|i| pf.voltages[i])))
}

/// Metric value at the solved operating point.
pub fn true_unbalance(model: &NetworkModel, loads: &LoadState, node: &str, metric: Metric) -> Result<f64> {
    metric.evaluate(node_voltages(model, loads, node)?)
}

/// Loading scenario family `S⁰ + k σ` read from a case document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepCase {
    pub nominal: LoadDocument,
    pub increment: LoadDocument,
    pub critical_node: String,
}

impl SweepCase {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Nominal load state; `v⁰` is solved once here and shared by every `k`.
    pub fn nominal_state(&self, model: &NetworkModel) -> Result<LoadState> {
        let s0 = self.nominal.to_vector(model)?;
        crate::netmodel::make_load_state(model, s0.clone(), s0, None)
    }

    /// `S⁰ + k σ`.
    pub fn actual(&self, model: &NetworkModel, k: f64) -> Result<DVector<Complex64>> {
        Ok(self.nominal.to_vector(model)? + self.increment.to_vector(model)? * Complex64::new(k, 0.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: u32,
    pub metric: Metric,
    pub method: Method,
    pub min_eps: Option<f64>,
    pub true_value: Option<f64>,
    /// `min_eps / true_value`, when both exist and the latter is positive.
    pub ratio: Option<f64>,
    pub solvable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// For each `k`, the true unbalance and the smallest certified tolerance of
/// each `(metric, method)` pair. Rows come out sorted by `k`, then by the
/// order of `pairs`; failures are recorded in the row.
pub fn sweep<G>(
    model: &NetworkModel,
    nominal: &LoadState,
    generator: G,
    ks: &[u32],
    node: &str,
    pairs: &[(Metric, Method)],
    opts: &MinEpsOptions,
) -> Result<Vec<SweepRow>>
where
    G: Fn(u32) -> Result<DVector<Complex64>> + Sync,
{
    for &(metric, method) in pairs {
        check_compatible(metric, method)?;
    }
    model.three_phase_positions(node)?;
    let per_k: Vec<Vec<SweepRow>> = ks
        .par_iter()
        .map(|&k| sweep_one(model, nominal, &generator, k, node, pairs, opts))
        .collect();
    Ok(per_k.into_iter().flatten().collect())
}

fn sweep_one<G>(
    model: &NetworkModel,
    nominal: &LoadState,
    generator: &G,
    k: u32,
    node: &str,
    pairs: &[(Metric, Method)],
    opts: &MinEpsOptions,
) -> Vec<SweepRow>
where
    G: Fn(u32) -> Result<DVector<Complex64>>,
{
    let row = |metric, method| SweepRow {
        k,
        metric,
        method,
        min_eps: None,
        true_value: None,
        ratio: None,
        solvable: false,
        error: None,
    };
    let failed = |e: Error| {
        pairs
            .iter()
            .map(|&(metric, method)| SweepRow {
                error: Some(e.to_string()),
                ..row(metric, method)
            })
            .collect()
    };
    let loads = match generator(k).and_then(|s| nominal.with_actual(s)) {
        Ok(l) => l,
        Err(e) => return failed(e),
    };
    let stress = match compute_stress(model, &loads) {
        Ok(s) => s,
        Err(e) => return failed(e),
    };
    let truth = node_voltages(model, &loads, node);
    if !stress.feasible {
        return pairs
            .iter()
            .map(|&(metric, method)| SweepRow {
                true_value: truth.as_ref().ok().and_then(|v| metric.evaluate(*v).ok()),
                error: Some(Error::Unsolvable.to_string()),
                ..row(metric, method)
            })
            .collect();
    }
    let disks = match build_disks(model, &loads, &stress, node) {
        Ok(d) => d,
        Err(e) => return failed(e),
    };
    pairs
        .iter()
        .map(|&(metric, method)| {
            let mut out = SweepRow {
                solvable: true,
                ..row(metric, method)
            };
            let mut errors = Vec::new();
            match truth.as_ref().map_err(|e| e.to_string()).and_then(|v| {
                metric.evaluate(*v).map_err(|e| e.to_string())
            }) {
                Ok(t) => out.true_value = Some(t),
                Err(e) => errors.push(e),
            }
            match min_epsilon_disks(&disks, metric, method, opts) {
                Ok(e) => out.min_eps = Some(e),
                Err(e) => errors.push(e.to_string()),
            }
            if let (Some(e), Some(t)) = (out.min_eps, out.true_value) {
                if t > 0.0 {
                    out.ratio = Some(e / t);
                }
            }
            if !errors.is_empty() {
                out.error = Some(errors.join("; "));
            }
            out
        })
        .collect()
}
