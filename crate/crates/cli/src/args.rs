use std::path::PathBuf;

use balcert_core::robustcert::{check_compatible, Method};
use balcert_core::unbalance::{Metric, VufKind};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "balcert",
    version,
    about = "Certify solvability and voltage balance of three-phase distribution networks"
)]
pub struct Cli {
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true, env = "BALCERT_THREADS")]
    pub threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,

    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the power flow by fixed-point iteration.
    Pf(PfArgs),
    /// Stress measures of a load scenario.
    Solvability(ScenarioArgs),
    /// Voltage disks at a critical node.
    Disks(DisksArgs),
    /// Unbalance metrics of one voltage triple.
    Metrics(MetricsArgs),
    /// Robust unbalance verdict at a fixed tolerance.
    Certify(CertifyArgs),
    /// Smallest tolerance a method certifies.
    MinEps(MinEpsArgs),
    /// Compare the VUF methods against boundary sampling.
    CompareApprox(CompareArgs),
    /// Sweep the increment scale of a loading case.
    SweepCase(SweepArgs),
}

/// Network and loading. Without `--loads`, the scenario is
/// `nominal + k × increment` from a case file (the bundled one by default).
#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// Network document (JSON); defaults to the bundled five-bus feeder.
    #[arg(long)]
    pub network: Option<PathBuf>,

    /// Actual loads (JSON load document).
    #[arg(long, conflicts_with_all = ["case", "k"])]
    pub loads: Option<PathBuf>,

    /// Nominal loads used with `--loads`; zero when omitted.
    #[arg(long, requires = "loads")]
    pub nominal: Option<PathBuf>,

    /// Case document with nominal loads, increment and critical node.
    #[arg(long)]
    pub case: Option<PathBuf>,

    /// Increment scale for the case.
    #[arg(long, default_value_t = 0.0)]
    pub k: f64,

    /// Zero load everywhere.
    #[arg(long, conflicts_with_all = ["loads", "nominal", "case"])]
    pub no_load: bool,
}

#[derive(Debug, Args)]
pub struct PfArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,

    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,

    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct DisksArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,

    /// Critical bus; defaults to the case's.
    #[arg(long)]
    pub node: Option<String>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// JSON voltage triple: `[[re, im], [re, im], [re, im]]` or
    /// `{"a": [re, im], "b": ..., "c": ...}`.
    #[arg(long)]
    pub voltages: PathBuf,
}

/// Where the disks come from: a network scenario or a raw bundle.
#[derive(Debug, Args)]
pub struct DiskSource {
    #[command(flatten)]
    pub scenario: ScenarioArgs,

    /// Critical bus (repeatable); defaults to the case's.
    #[arg(long)]
    pub node: Vec<String>,

    /// Raw disk bundle (JSON), bypassing the network.
    #[arg(long, conflicts_with_all = ["network", "loads", "case", "node", "no_load"])]
    pub disks: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub source: DiskSource,

    /// pvur, pvur-maxmin, lvur, vuf-n or vuf-0.
    #[arg(long, value_parser = parse_metric)]
    pub metric: Metric,

    /// Defaults to closed, line-bound or lgr depending on the metric.
    #[arg(long, value_parser = parse_method)]
    pub method: Option<Method>,

    /// Unbalance tolerance in (0, 1).
    #[arg(long)]
    pub eps: f64,

    /// Polygon order for the polytope method.
    #[arg(long, default_value_t = 32)]
    pub m: usize,
}

#[derive(Debug, Args)]
pub struct MinEpsArgs {
    #[command(flatten)]
    pub source: DiskSource,

    /// pvur, pvur-maxmin, lvur, vuf-n or vuf-0.
    #[arg(long, value_parser = parse_metric)]
    pub metric: Metric,

    #[arg(long, value_parser = parse_method)]
    pub method: Option<Method>,

    /// Search range and final bracket width.
    #[arg(long, default_value_t = 1e-4)]
    pub lo: f64,

    #[arg(long, default_value_t = 1.0 - 1e-4)]
    pub hi: f64,

    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,

    #[arg(long, default_value_t = 32)]
    pub m: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Wide disks, dual bound not tight (ε = 0.3).
    Wide,
    /// Narrow disks, dual bound tight (ε = 0.1).
    Tight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sequence {
    /// Negative sequence.
    N,
    /// Zero sequence.
    #[value(name = "0")]
    Zero,
}

impl From<Sequence> for VufKind {
    fn from(s: Sequence) -> Self {
        match s {
            Sequence::N => VufKind::Negative,
            Sequence::Zero => VufKind::Zero,
        }
    }
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long, value_enum, required_unless_present = "disks", conflicts_with = "disks")]
    pub preset: Option<Preset>,

    /// Raw disk bundle (JSON); needs `--eps`.
    #[arg(long, requires = "eps")]
    pub disks: Option<PathBuf>,

    /// Tolerance; defaults to the preset's.
    #[arg(long)]
    pub eps: Option<f64>,

    /// Polygon orders.
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,32")]
    pub m: Vec<usize>,

    #[arg(long, default_value_t = 500_000)]
    pub samples: usize,

    #[arg(long, default_value_t = 7)]
    pub seed: u64,

    #[arg(long, value_enum, default_value = "n")]
    pub which: Sequence,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub network: Option<PathBuf>,

    /// Case document; defaults to the bundled five-bus case.
    #[arg(long)]
    pub case: Option<PathBuf>,

    /// Scales: `1..10`, `1,2,5` or a single value.
    #[arg(long, value_parser = parse_k_range, default_value = "1..10")]
    pub k: KRange,

    /// Critical bus; defaults to the case's.
    #[arg(long)]
    pub node: Option<String>,

    /// LVUR method in the default pair set.
    #[arg(long, value_parser = parse_method, default_value = "line-bound")]
    pub lvur_method: Method,

    /// Replace the default pairs, as `metric:method` (repeatable).
    #[arg(long, value_parser = parse_pair)]
    pub pair: Vec<(Metric, Method)>,

    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KRange(pub Vec<u32>);

fn parse_metric(s: &str) -> Result<Metric, String> {
    s.parse().map_err(|e: balcert_core::Error| e.to_string())
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: balcert_core::Error| e.to_string())
}

fn parse_pair(s: &str) -> Result<(Metric, Method), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected `metric:method`, got `{s}`"))?;
    let pair = (parse_metric(a)?, parse_method(b)?);
    check_compatible(pair.0, pair.1).map_err(|e| e.to_string())?;
    Ok(pair)
}

fn parse_k_range(s: &str) -> Result<KRange, String> {
    let num = |t: &str| t.trim().parse::<u32>().map_err(|e| format!("bad scale `{t}`: {e}"));
    let ks = if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (a, b) = (num(a)?, num(b)?);
        if a > b {
            return Err(format!("empty range `{s}`"));
        }
        (a..=b).collect()
    } else {
        s.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    Ok(KRange(ks))
}

/// Method used when none is given.
pub fn default_method(metric: Metric) -> Method {
    match metric {
        Metric::Pvur | Metric::PvurMaxMin => Method::Closed,
        Metric::Lvur => Method::LineBound,
        Metric::VufN | Metric::Vuf0 => Method::Lgr,
    }
}

impl Cli {
    /// Checks clap cannot express, run before any input is read.
    pub fn validate(&self) -> Result<(), String> {
        let pair = |metric: Metric, method: Option<Method>| {
            check_compatible(metric, method.unwrap_or(default_method(metric))).map_err(|e| e.to_string())
        };
        match &self.command {
            Command::Certify(a) => pair(a.metric, a.method),
            Command::MinEps(a) => pair(a.metric, a.method),
            Command::SweepCase(a) => {
                check_compatible(Metric::Lvur, a.lvur_method).map_err(|e| e.to_string())
            }
            _ => Ok(()),
        }?;
        if self.threads == Some(0) {
            return Err("--threads must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_ranges() {
        assert_eq!(parse_k_range("1..10").unwrap().0, (1..=10).collect::<Vec<_>>());
        assert_eq!(parse_k_range("2..=3").unwrap().0, vec![2, 3]);
        assert_eq!(parse_k_range("1,4,7").unwrap().0, vec![1, 4, 7]);
        assert_eq!(parse_k_range("5").unwrap().0, vec![5]);
        assert!(parse_k_range("3..1").is_err());
        assert!(parse_k_range("x").is_err());
    }

    #[test]
    fn incompatible_pair_rejected() {
        let cli = Cli::try_parse_from([
            "balcert", "certify", "--metric", "vuf-n", "--method", "closed", "--eps", "0.1",
        ])
        .unwrap();
        assert!(cli.validate().is_err());
        assert!(parse_pair("lvur:lgr").is_err());
        assert_eq!(parse_pair("lvur:mag-bound").unwrap(), (Metric::Lvur, Method::MagBound));
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
