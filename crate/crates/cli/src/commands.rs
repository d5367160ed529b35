use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use balcert_core::balancibility::{
    certify, min_epsilon_disks, sweep, MinEpsOptions, Request, StressSnapshot, SweepCase,
};
use balcert_core::fixtures::{five_bus_case, five_bus_network, tight_disks, wide_disks, TIGHT_EPS, WIDE_EPS};
use balcert_core::netmodel::LoadDocument;
use balcert_core::robustcert::{
    certify_disks, sample_oracle, vuf_bound, vuf_lgr, vuf_polytope, Method, MethodOptions,
};
use balcert_core::unbalance::{Metric, VoltageTriple, VufKind};
use balcert_core::{
    build_disks, compute_stress, make_load_state, solve_fixed_point, Complex64, DiskBundle, Error,
    FixedPointOptions, LoadState, NetworkModel, PowerFlowError,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{
    default_method, CertifyArgs, CompareArgs, DiskSource, DisksArgs, MetricsArgs, MinEpsArgs, PfArgs,
    Preset, ScenarioArgs, SweepArgs,
};
use crate::output::{num, opt, Report, Status};

const BUNDLED: &str = "bundled:five-bus";

struct Scenario {
    model: NetworkModel,
    loads: LoadState,
    critical_node: Option<String>,
}

fn path_label(p: &Option<PathBuf>) -> String {
    p.as_ref().map_or_else(|| BUNDLED.to_string(), |p| p.display().to_string())
}

fn load_model(path: &Option<PathBuf>) -> Result<NetworkModel> {
    Ok(match path {
        Some(p) => NetworkModel::from_path(p).with_context(|| format!("loading {}", p.display()))?,
        None => five_bus_network()?,
    })
}

fn load_case(path: &Option<PathBuf>) -> Result<SweepCase> {
    Ok(match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            SweepCase::from_json(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => five_bus_case()?,
    })
}

fn load_scenario(a: &ScenarioArgs, report: &mut Report) -> Result<Scenario> {
    let model = load_model(&a.network)?;
    report.config("network", path_label(&a.network));
    if a.no_load {
        report.config("loads", "none");
        let zero = model.zero_loads();
        let loads = make_load_state(&model, zero.clone(), zero, None)?;
        return Ok(Scenario {
            model,
            loads,
            critical_node: None,
        });
    }
    if let Some(path) = &a.loads {
        let read = |p: &Path| -> Result<_> {
            LoadDocument::from_path(p)
                .with_context(|| format!("loading {}", p.display()))?
                .to_vector(&model)
                .with_context(|| format!("mapping {}", p.display()))
        };
        let actual = read(path)?;
        let nominal = match &a.nominal {
            Some(p) => read(p)?,
            None => model.zero_loads(),
        };
        report.config("loads", path.display());
        report.config("nominal", a.nominal.as_ref().map_or("zero".into(), |p| p.display().to_string()));
        let loads = make_load_state(&model, nominal, actual, None)?;
        return Ok(Scenario {
            model,
            loads,
            critical_node: None,
        });
    }
    let case = load_case(&a.case)?;
    report.config("case", path_label(&a.case));
    report.config("k", num(a.k));
    let loads = case.nominal_state(&model)?.with_actual(case.actual(&model, a.k)?)?;
    Ok(Scenario {
        model,
        loads,
        critical_node: Some(case.critical_node),
    })
}

fn label<T: Serialize>(x: &T) -> String {
    match serde_json::to_value(x) {
        Ok(Value::String(s)) => s,
        Ok(v) => v.to_string(),
        Err(_) => String::new(),
    }
}

fn is_divergence(e: &PowerFlowError) -> bool {
    matches!(e, PowerFlowError::Diverged { .. } | PowerFlowError::ZeroCrossing { .. })
}

pub fn pf(a: &PfArgs) -> Result<Report> {
    let mut report = Report::new(
        "pf",
        &["bus", "phase", "v_re", "v_im", "v_abs", "v_angle_deg", "v_pu_re", "v_pu_im"],
    );
    let sc = load_scenario(&a.scenario, &mut report)?;
    report.config("tol", num(a.tol));
    report.config("max_iter", a.max_iter);
    let opts = FixedPointOptions {
        tol: a.tol,
        max_iter: a.max_iter,
        ..Default::default()
    };
    let res = match solve_fixed_point(&sc.model, sc.loads.actual(), sc.loads.nominal_voltage(), &opts) {
        Ok(r) => r,
        Err(e) if is_divergence(&e) => {
            eprintln!("power flow: {e}");
            report.status = Status::Failed;
            report.document = json!({ "converged": false, "reason": e.to_string() });
            return Ok(report);
        }
        Err(e) => return Err(e.into()),
    };
    report.config("iterations", res.iterations);
    let mut rows = Vec::new();
    for (i, np) in sc.model.load_index().iter().enumerate() {
        let v = res.voltages[i];
        let u = res.normalized[i];
        report.row(vec![
            np.bus.clone(),
            np.phase.to_string(),
            num(v.re),
            num(v.im),
            num(v.norm()),
            num(v.arg().to_degrees()),
            num(u.re),
            num(u.im),
        ]);
        rows.push(json!({ "node": np.to_string(), "voltage": v, "normalized": u }));
    }
    report.document = json!({
        "converged": true,
        "iterations": res.iterations,
        "residual": res.residual,
        "voltages": rows,
    });
    Ok(report)
}

pub fn solvability(a: &ScenarioArgs) -> Result<Report> {
    let mut report = Report::new("solvability", &["bus", "phase", "eta_re", "eta_im", "xi", "gamma"]);
    let sc = load_scenario(a, &mut report)?;
    let stress = compute_stress(&sc.model, &sc.loads)?;
    let mut rows = Vec::new();
    for (i, np) in stress.index().iter().enumerate() {
        let eta = stress.eta[i];
        report.row(vec![
            np.bus.clone(),
            np.phase.to_string(),
            num(eta.re),
            num(eta.im),
            num(stress.xi[i]),
            num(stress.gamma[i]),
        ]);
        rows.push(json!({ "node": np.to_string(), "eta": eta, "xi": stress.xi[i], "gamma": stress.gamma[i] }));
    }
    // aggregate row: η holds max |η_i|
    report.row(vec![
        "max".into(),
        String::new(),
        num(stress.eta_max),
        String::new(),
        num(stress.xi_max),
        num(stress.gamma_max),
    ]);
    let snapshot = StressSnapshot::from(&stress);
    report.config("feasible", snapshot.feasible);
    report.config("margin_lhs", num(snapshot.margin_lhs));
    report.config("radius", opt(snapshot.radius));
    if !stress.feasible {
        report.status = Status::Failed;
    }
    report.document = json!({ "summary": snapshot, "node_phases": rows });
    Ok(report)
}

fn critical_nodes(given: &[String], sc: &Scenario) -> Result<Vec<String>> {
    if !given.is_empty() {
        return Ok(given.to_vec());
    }
    sc.critical_node
        .clone()
        .map(|n| vec![n])
        .ok_or_else(|| anyhow!("no critical node: pass --node"))
}

pub fn disks(a: &DisksArgs) -> Result<Report> {
    let mut report = Report::new("disks", &["node", "phase", "c_re", "c_im", "radius"]);
    let sc = load_scenario(&a.scenario, &mut report)?;
    let node = critical_nodes(a.node.as_slice(), &sc)?.remove(0);
    report.config("node", &node);
    let stress = compute_stress(&sc.model, &sc.loads)?;
    if !stress.feasible {
        eprintln!("solvability condition does not hold; no disks");
        report.status = Status::Failed;
        report.document = json!({ "solvable": false });
        return Ok(report);
    }
    let bundle = build_disks(&sc.model, &sc.loads, &stress, &node)?;
    for (p, ph) in ["a", "b", "c"].iter().enumerate() {
        report.row(vec![
            node.clone(),
            ph.to_string(),
            num(bundle.centers[p].re),
            num(bundle.centers[p].im),
            num(bundle.radii[p]),
        ]);
    }
    report.document = serde_json::to_value(&bundle)?;
    Ok(report)
}

fn parse_triple(v: &Value) -> Result<VoltageTriple> {
    let pair = |x: &Value| -> Result<Complex64> {
        let a: [f64; 2] = serde_json::from_value(x.clone()).context("expected [re, im]")?;
        Ok(Complex64::new(a[0], a[1]))
    };
    match v {
        Value::Array(items) if items.len() == 3 => {
            Ok(VoltageTriple::new(pair(&items[0])?, pair(&items[1])?, pair(&items[2])?))
        }
        Value::Object(map) => {
            let get = |k: &str| map.get(k).ok_or_else(|| anyhow!("missing phase `{k}`"));
            Ok(VoltageTriple::new(pair(get("a")?)?, pair(get("b")?)?, pair(get("c")?)?))
        }
        _ => bail!("expected three [re, im] pairs"),
    }
}

pub fn metrics(a: &MetricsArgs) -> Result<Report> {
    let mut report = Report::new("metrics", &["metric", "value"]);
    report.config("voltages", a.voltages.display());
    let text = std::fs::read_to_string(&a.voltages)
        .with_context(|| format!("reading {}", a.voltages.display()))?;
    let v = parse_triple(&serde_json::from_str(&text)?)?;
    let mut doc = serde_json::Map::new();
    for m in Metric::ALL {
        let value = m.evaluate(v)?;
        report.row(vec![m.name().into(), num(value)]);
        doc.insert(m.name().into(), json!(value));
    }
    report.document = Value::Object(doc);
    Ok(report)
}

/// Read a bundle, either bare or wrapped in a `disks --format json` report.
fn read_disks(path: &Path) -> Result<DiskBundle> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: Value = serde_json::from_str(&text)?;
    let inner = match value.get("result") {
        Some(r) => r.clone(),
        None => value,
    };
    let bundle: DiskBundle = serde_json::from_value(inner).with_context(|| format!("parsing {}", path.display()))?;
    bundle.validate()?;
    Ok(bundle)
}

enum Disks {
    Raw(DiskBundle),
    Network(Box<Scenario>, Vec<String>),
}

fn disk_source(src: &DiskSource, report: &mut Report) -> Result<Disks> {
    if let Some(path) = &src.disks {
        report.config("disks", path.display());
        return Ok(Disks::Raw(read_disks(path)?));
    }
    let sc = load_scenario(&src.scenario, report)?;
    let nodes = critical_nodes(&src.node, &sc)?;
    report.config("nodes", nodes.join(" "));
    Ok(Disks::Network(Box::new(sc), nodes))
}

fn bundle_label(b: &DiskBundle) -> String {
    b.node.clone().unwrap_or_else(|| "disks".into())
}

pub fn certify_cmd(a: &CertifyArgs) -> Result<Report> {
    let mut report = Report::new(
        "certify",
        &["node", "metric", "method", "eps", "pass", "worst", "exactness"],
    );
    let method = a.method.unwrap_or(default_method(a.metric));
    report.config("metric", a.metric);
    report.config("method", method);
    report.config("eps", num(a.eps));
    report.config("m", a.m);
    let opts = MethodOptions {
        polygon_order: a.m,
        ..Default::default()
    };
    let verdict_row = |report: &mut Report, node: String, v: &balcert_core::robustcert::RobustVerdict| {
        report.row(vec![
            node,
            v.metric.to_string(),
            v.method.to_string(),
            num(v.eps),
            v.pass.to_string(),
            num(v.worst()),
            label(&v.exactness),
        ]);
    };
    match disk_source(&a.source, &mut report)? {
        Disks::Raw(bundle) => {
            let v = certify_disks(&bundle, a.metric, method, a.eps, &opts)?;
            verdict_row(&mut report, bundle_label(&bundle), &v);
            if !v.pass {
                report.status = Status::Failed;
            }
            report.document = json!({ "disks": bundle, "verdict": v });
        }
        Disks::Network(sc, nodes) => {
            let request = Request {
                metric: a.metric,
                method,
                eps: a.eps,
            };
            let cert = certify(&sc.model, &sc.loads, &nodes, &[request], &opts)?;
            if !cert.solvable {
                eprintln!("solvability condition does not hold");
            }
            for n in &cert.nodes {
                for v in &n.verdicts {
                    verdict_row(&mut report, n.node.clone(), v);
                }
            }
            if !cert.balanced {
                report.status = Status::Failed;
            }
            report.document = serde_json::to_value(&cert)?;
        }
    }
    Ok(report)
}

pub fn min_eps(a: &MinEpsArgs) -> Result<Report> {
    let mut report = Report::new("min-eps", &["node", "metric", "method", "min_eps"]);
    let method = a.method.unwrap_or(default_method(a.metric));
    report.config("metric", a.metric);
    report.config("method", method);
    report.config("range", format!("{}..{}", num(a.lo), num(a.hi)));
    report.config("tol", num(a.tol));
    report.config("m", a.m);
    let opts = MinEpsOptions {
        lo: a.lo,
        hi: a.hi,
        tol: a.tol,
        method: MethodOptions {
            polygon_order: a.m,
            exactness_checks: false,
        },
        ..Default::default()
    };
    let bundles = match disk_source(&a.source, &mut report)? {
        Disks::Raw(b) => vec![b],
        Disks::Network(sc, nodes) => {
            let stress = compute_stress(&sc.model, &sc.loads)?;
            if !stress.feasible {
                eprintln!("solvability condition does not hold");
                report.status = Status::Failed;
                report.document = json!({ "solvable": false });
                return Ok(report);
            }
            nodes
                .iter()
                .map(|n| build_disks(&sc.model, &sc.loads, &stress, n))
                .collect::<balcert_core::Result<Vec<_>>>()?
        }
    };
    let mut results = Vec::new();
    for b in &bundles {
        let node = bundle_label(b);
        let value = match min_epsilon_disks(b, a.metric, method, &opts) {
            Ok(e) => Some(e),
            Err(e @ Error::Unbalanceable { .. }) => {
                eprintln!("{node}: {e}");
                report.status = Status::Failed;
                None
            }
            Err(e) => return Err(e.into()),
        };
        report.row(vec![node.clone(), a.metric.to_string(), method.to_string(), opt(value)]);
        results.push(json!({ "node": node, "min_eps": value }));
    }
    report.document = json!({ "metric": a.metric, "method": method, "results": results });
    Ok(report)
}

pub fn compare_approx(a: &CompareArgs) -> Result<Report> {
    let mut report = Report::new("compare-approx", &["method", "m", "value", "F_sample", "gap"]);
    let (disks, eps) = match (a.preset, &a.disks) {
        (Some(p), _) => {
            report.config("preset", label_preset(p));
            let (d, e) = match p {
                Preset::Wide => (wide_disks(), WIDE_EPS),
                Preset::Tight => (tight_disks(), TIGHT_EPS),
            };
            (d, a.eps.unwrap_or(e))
        }
        (None, Some(path)) => {
            report.config("disks", path.display());
            (read_disks(path)?, a.eps.expect("clap requires --eps with --disks"))
        }
        (None, None) => bail!("pass --preset or --disks"),
    };
    let which: VufKind = a.which.into();
    report.seed = Some(a.seed);
    report.config("eps", num(eps));
    report.config("which", if which == VufKind::Negative { "n" } else { "0" });
    report.config("samples", a.samples);
    report.config("m", a.m.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(","));

    let sampled = sample_oracle(&disks, eps, which, a.samples, a.seed);
    let mut entries = Vec::new();
    let mut push = |report: &mut Report, method: &str, m: Option<usize>, value: f64| {
        report.row(vec![
            method.into(),
            m.map(|m| m.to_string()).unwrap_or_default(),
            num(value),
            num(sampled),
            num(value - sampled),
        ]);
        entries.push(json!({ "method": method, "m": m, "value": value, "gap": value - sampled }));
    };
    let mut gaps = Vec::new();
    for &m in &a.m {
        let res = vuf_polytope(&disks, eps, m, which)?;
        push(&mut report, "polytope-outer", Some(m), res.f_outer);
        push(&mut report, "polytope-inner", Some(m), res.f_inner);
        gaps.push(json!({ "m": m, "gap_bound": res.gap_bound }));
    }
    let bound = vuf_bound(&disks, eps, which)?;
    push(&mut report, "bound", None, bound.worst());
    let lgr = vuf_lgr(&disks, eps, which)?;
    push(&mut report, "lgr", None, lgr.gamma);
    report.document = json!({
        "disks": disks,
        "eps": eps,
        "F_sample": sampled,
        "rows": entries,
        "gap_bounds": gaps,
        "lgr": lgr.verdict,
    });
    Ok(report)
}

fn label_preset(p: Preset) -> &'static str {
    match p {
        Preset::Wide => "wide",
        Preset::Tight => "tight",
    }
}

pub fn sweep_case(a: &SweepArgs) -> Result<Report> {
    let mut report = Report::new(
        "sweep-case",
        &["k", "metric", "method", "min_eps", "true_value", "ratio", "solvable"],
    );
    let model = load_model(&a.network)?;
    let case = load_case(&a.case)?;
    let node = a.node.clone().unwrap_or_else(|| case.critical_node.clone());
    let pairs = if a.pair.is_empty() {
        vec![
            (Metric::Pvur, Method::Closed),
            (Metric::Lvur, a.lvur_method),
            (Metric::VufN, Method::Lgr),
        ]
    } else {
        a.pair.clone()
    };
    report.config("network", path_label(&a.network));
    report.config("case", path_label(&a.case));
    report.config("node", &node);
    report.config("k", a.k.0.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(","));
    report.config(
        "pairs",
        pairs.iter().map(|(m, x)| format!("{m}:{x}")).collect::<Vec<_>>().join(" "),
    );
    report.config("tol", num(a.tol));
    let nominal = case.nominal_state(&model)?;
    let opts = MinEpsOptions {
        tol: a.tol,
        ..Default::default()
    };
    let rows = sweep(
        &model,
        &nominal,
        |k| case.actual(&model, k as f64),
        &a.k.0,
        &node,
        &pairs,
        &opts,
    )?;
    for r in &rows {
        if let Some(e) = &r.error {
            eprintln!("k={} {}/{}: {e}", r.k, r.metric, r.method);
        }
        if !r.solvable || r.error.is_some() {
            report.status = Status::Failed;
        }
        report.row(vec![
            r.k.to_string(),
            r.metric.to_string(),
            r.method.to_string(),
            opt(r.min_eps),
            opt(r.true_value),
            opt(r.ratio),
            r.solvable.to_string(),
        ]);
    }
    report.document = serde_json::to_value(&rows)?;
    Ok(report)
}
