//! Robust unbalance certification over a [`DiskBundle`].
//!
//! Every method answers "does the metric stay within `ε` for all voltages
//! in the disks?" either exactly or conservatively:
//!
//! | metric            | method       | kind                       |
//! |-------------------|--------------|----------------------------|
//! | PVUR (both forms) | `closed`     | exact                      |
//! | LVUR              | `line-bound` | safe                       |
//! | LVUR              | `mag-bound`  | safe                       |
//! | VUF               | `bound`      | safe                       |
//! | VUF               | `polytope`   | safe, converges in `m`     |
//! | VUF               | `lgr`        | safe, exact when certified |
//!
//! VUF methods bound `max J(V)` with `J(V) = V^⊤(A_x - ε²A_p)V`, and pass
//! when the bound is non-positive. Magnitude methods bound the minimum of
//! each row of the linear system and pass when all are non-negative.

mod exactness;
mod lgr;
mod magnitude;
mod neldermead;
mod polytope;
mod sampling;
mod vufbound;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solvability::DiskBundle;
use crate::unbalance::{Metric, PvurVariant, VufKind};

pub use exactness::{suff1_check, suff2_check, Suff1Report, TriState};
pub use lgr::{vuf_lgr, LgrResult};
pub use magnitude::{robust_lvur_linebound, robust_lvur_magbound, robust_pvur};
pub use neldermead::{nelder_mead, NelderMeadOptions, NelderMeadResult};
pub use polytope::{build_crp, gap_bound, lipschitz_constant, vuf_polytope, CrpMode, CrpVertices, PolytopeResult};
pub use sampling::{boundary_sample_max, sample_oracle, SAMPLE_BATCH};
pub use vufbound::{vuf_bound, vuf_objective};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Closed,
    LineBound,
    MagBound,
    Bound,
    Polytope,
    Lgr,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Closed,
        Method::LineBound,
        Method::MagBound,
        Method::Bound,
        Method::Polytope,
        Method::Lgr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Closed => "closed",
            Method::LineBound => "line-bound",
            Method::MagBound => "mag-bound",
            Method::Bound => "bound",
            Method::Polytope => "polytope",
            Method::Lgr => "lgr",
        }
    }

    pub fn supports(self, metric: Metric) -> bool {
        matches!(
            (metric, self),
            (Metric::Pvur | Metric::PvurMaxMin, Method::Closed)
                | (Metric::Lvur, Method::LineBound | Method::MagBound)
                | (
                    Metric::VufN | Metric::Vuf0,
                    Method::Bound | Method::Polytope | Method::Lgr
                )
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method `{s}`")))
    }
}

pub fn check_compatible(metric: Metric, method: Method) -> Result<()> {
    if method.supports(metric) {
        Ok(())
    } else {
        Err(Error::IncompatibleMethod {
            metric: metric.to_string(),
            method: method.to_string(),
        })
    }
}

pub fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::Tolerance(eps))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exactness {
    Exact,
    SafeApproximation,
    StrongDualityCertified,
}

/// Which side of zero the certified values must fall on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sense {
    /// Row minima, each must be `≥ 0`.
    NonNegative,
    /// Upper bounds on `max J`, each must be `≤ 0`.
    NonPositive,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polygon_order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multipliers: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_converged: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_eigenvalue: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suff1: Option<TriState>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suff2: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustVerdict {
    pub metric: Metric,
    pub method: Method,
    pub eps: f64,
    pub pass: bool,
    pub sense: Sense,
    pub worst_values: Vec<f64>,
    pub exactness: Exactness,
    #[serde(default)]
    pub diagnostics: Diagnostics,
}

impl RobustVerdict {
    pub(crate) fn new(
        metric: Metric,
        method: Method,
        eps: f64,
        sense: Sense,
        worst_values: Vec<f64>,
        exactness: Exactness,
    ) -> Self {
        let pass = match sense {
            Sense::NonNegative => worst_values.iter().all(|v| *v >= 0.0),
            Sense::NonPositive => worst_values.iter().all(|v| *v <= 0.0),
        };
        Self {
            metric,
            method,
            eps,
            pass,
            sense,
            worst_values,
            exactness,
            diagnostics: Diagnostics::default(),
        }
    }

    /// The binding certified value: smallest row minimum or largest bound.
    pub fn worst(&self) -> f64 {
        match self.sense {
            Sense::NonNegative => self.worst_values.iter().copied().fold(f64::INFINITY, f64::min),
            Sense::NonPositive => self
                .worst_values
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Tuning for methods that have any.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodOptions {
    /// Polygon order `m` for the polytope method.
    pub polygon_order: usize,
    /// Attach tightness certificates to dual-bound verdicts.
    pub exactness_checks: bool,
}

impl Default for MethodOptions {
    fn default() -> Self {
        Self {
            polygon_order: 32,
            exactness_checks: true,
        }
    }
}

/// Run `method` for `metric` at tolerance `eps`.
pub fn certify_disks(
    disks: &DiskBundle,
    metric: Metric,
    method: Method,
    eps: f64,
    opts: &MethodOptions,
) -> Result<RobustVerdict> {
    check_compatible(metric, method)?;
    check_eps(eps)?;
    disks.validate()?;
    match (metric, method) {
        (Metric::Pvur, _) => robust_pvur(disks, eps, PvurVariant::AvgDeviation),
        (Metric::PvurMaxMin, _) => robust_pvur(disks, eps, PvurVariant::MaxMinusMin),
        (Metric::Lvur, Method::LineBound) => robust_lvur_linebound(disks, eps),
        (Metric::Lvur, _) => robust_lvur_magbound(disks, eps),
        (_, Method::Bound) => vuf_bound(disks, eps, vuf_kind(metric)),
        (_, Method::Polytope) => {
            Ok(vuf_polytope(disks, eps, opts.polygon_order, vuf_kind(metric))?.verdict)
        }
        (_, _) if opts.exactness_checks => Ok(vuf_lgr(disks, eps, vuf_kind(metric))?.verdict),
        (_, _) => Ok(lgr::lgr_bound(disks, eps, vuf_kind(metric))?.verdict),
    }
}

fn vuf_kind(metric: Metric) -> VufKind {
    metric.vuf_kind().expect("VUF method dispatched for a non-VUF metric")
}

pub(crate) fn vuf_metric(which: VufKind) -> Metric {
    match which {
        VufKind::Negative => Metric::VufN,
        VufKind::Zero => Metric::Vuf0,
    }
}
