//! Network ingestion and the no-load normalization.
//!
//! A network document lists buses with their phases and either line
//! primitives (per-phase-pair admittance or impedance blocks, plus optional
//! shunts) or an explicit nodal admittance matrix. The assembled matrix is
//! partitioned slack-first:
//!
//! ```text
//! [ I_G ]   [ Y_GG  Y_GL ] [ V_G ]
//! [-I_L ] = [ Y_LG  Y_LL ] [ V_L ]
//! ```
//!
//! from which the no-load voltage `E = -Y_LL⁻¹ Y_LG V_G` and the normalized
//! impedance `Ẑ = diag⁻¹(E) Y_LL⁻¹ diag⁻¹(Ē)` follow. With `v_L = V_L / E`
//! the load voltages satisfy `v_L = 1 - Ẑ diag⁻¹(v̄_L) S̄_L`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{NodePhase, Phase};
use crate::powerflow::{fixed_point_residual, solve_fixed_point, FixedPointOptions};

/// Complex number in documents: `[re, im]`.
pub type JsonComplex = [f64; 2];

/// Residual allowed on the normalization identities after construction.
pub const NORMALIZATION_TOL: f64 = 1e-10;
/// Residual allowed on a nominal power-flow point.
pub const NOMINAL_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BusKind {
    Slack,
    Pq,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BusSpec {
    pub id: String,
    pub phases: Vec<Phase>,
    pub kind: BusKind,
    /// Slack voltage per listed phase (p.u.); defaults to a balanced
    /// positive-sequence set of magnitude 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub voltage: Option<Vec<JsonComplex>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LineSpec {
    pub from: String,
    pub to: String,
    /// Phases carried by the line; defaults to the phases of `from`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<Phase>>,
    /// Series admittance block, row-major, indexed by `phases`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_block: Option<Vec<Vec<JsonComplex>>>,
    /// Series impedance block; inverted when `y_block` is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_block: Option<Vec<Vec<JsonComplex>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShuntSpec {
    pub bus: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<Phase>>,
    pub y_block: Vec<Vec<JsonComplex>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct YMatrixSpec {
    /// `bus.phase` label of every row/column.
    pub index: Vec<String>,
    pub entries: Vec<Vec<JsonComplex>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Power base in kVA used to convert kW/kvar load files to per unit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_kva: Option<f64>,
    pub buses: Vec<BusSpec>,
    #[serde(default)]
    pub lines: Vec<LineSpec>,
    #[serde(default)]
    pub shunts: Vec<ShuntSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_matrix: Option<YMatrixSpec>,
}

impl NetworkDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bus {
    pub id: String,
    pub phases: Vec<Phase>,
    pub kind: BusKind,
}

/// Partitioned admittance model with its no-load normalization.
///
/// Immutable once built; share it freely across threads.
#[derive(Debug, Clone)]
pub struct NetworkModel {
    name: Option<String>,
    base_kva: Option<f64>,
    buses: Vec<Bus>,
    slack_index: Vec<NodePhase>,
    load_index: Vec<NodePhase>,
    load_positions: HashMap<NodePhase, usize>,
    slack_voltage: DVector<Complex64>,
    y_gg: DMatrix<Complex64>,
    y_gl: DMatrix<Complex64>,
    y_lg: DMatrix<Complex64>,
    y_ll: DMatrix<Complex64>,
    z_ll: DMatrix<Complex64>,
    no_load: DVector<Complex64>,
    z_hat: DMatrix<Complex64>,
}

/// Build a [`NetworkModel`] from a parsed document.
pub fn build_network(doc: &NetworkDocument) -> Result<NetworkModel> {
    NetworkModel::from_document(doc)
}

fn to_complex(c: &JsonComplex) -> Complex64 {
    Complex64::new(c[0], c[1])
}

fn square_block(rows: &[Vec<JsonComplex>], n: usize, what: &str) -> Result<DMatrix<Complex64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Document(format!("{what} must be {n}x{n}")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| to_complex(&rows[i][j])))
}

fn inf_norm(m: &DMatrix<Complex64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn vec_inf_norm(v: &DVector<Complex64>) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn sorted_phases(phases: &[Phase], bus: &str) -> Result<Vec<Phase>> {
    let mut out = phases.to_vec();
    out.sort();
    out.dedup();
    if out.is_empty() || out.len() != phases.len() {
        return Err(Error::Document(format!(
            "bus `{bus}` must list distinct, non-empty phases"
        )));
    }
    Ok(out)
}

fn default_slack_voltage(phase: Phase) -> Complex64 {
    // balanced positive sequence: a at 0, b lagging by 120°, c leading by 120°
    let shift = -(phase.index() as f64) * 2.0 * std::f64::consts::PI / 3.0;
    Complex64::from_polar(1.0, shift)
}

impl NetworkModel {
    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_document(&NetworkDocument::from_json(text)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_document(&NetworkDocument::from_path(path)?)
    }

    pub fn from_document(doc: &NetworkDocument) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut buses = Vec::with_capacity(doc.buses.len());
        for spec in &doc.buses {
            if !seen.insert(spec.id.as_str()) {
                return Err(Error::Document(format!("duplicate bus id `{}`", spec.id)));
            }
            buses.push(Bus {
                id: spec.id.clone(),
                phases: sorted_phases(&spec.phases, &spec.id)?,
                kind: spec.kind,
            });
        }
        let slack_count = buses.iter().filter(|b| b.kind == BusKind::Slack).count();
        if slack_count != 1 {
            return Err(Error::SlackCount(slack_count));
        }
        let slack_pos = buses.iter().position(|b| b.kind == BusKind::Slack).unwrap();
        let slack_spec = &doc.buses[slack_pos];
        let slack_bus = &buses[slack_pos];

        let slack_index: Vec<NodePhase> = slack_bus
            .phases
            .iter()
            .map(|&p| NodePhase::new(slack_bus.id.clone(), p))
            .collect();
        let load_index: Vec<NodePhase> = buses
            .iter()
            .filter(|b| b.kind == BusKind::Pq)
            .flat_map(|b| b.phases.iter().map(move |&p| NodePhase::new(b.id.clone(), p)))
            .collect();
        if load_index.is_empty() {
            return Err(Error::Document("network has no PQ bus".into()));
        }

        let slack_voltage = match &slack_spec.voltage {
            Some(vs) => {
                if vs.len() != slack_spec.phases.len() {
                    return Err(Error::Document(
                        "slack voltage must list one value per slack phase".into(),
                    ));
                }
                // voltages follow the phase order written in the document
                let mut by_phase: Vec<(Phase, Complex64)> = slack_spec
                    .phases
                    .iter()
                    .zip(vs)
                    .map(|(&p, v)| (p, to_complex(v)))
                    .collect();
                by_phase.sort_by_key(|(p, _)| *p);
                DVector::from_iterator(by_phase.len(), by_phase.into_iter().map(|(_, v)| v))
            }
            None => DVector::from_iterator(
                slack_bus.phases.len(),
                slack_bus.phases.iter().map(|&p| default_slack_voltage(p)),
            ),
        };

        let full_index: Vec<NodePhase> = slack_index.iter().chain(&load_index).cloned().collect();
        let position: HashMap<NodePhase, usize> = full_index
            .iter()
            .enumerate()
            .map(|(i, np)| (np.clone(), i))
            .collect();
        let bus_by_id: HashMap<&str, &Bus> = buses.iter().map(|b| (b.id.as_str(), b)).collect();

        let n = full_index.len();
        let y = match &doc.y_matrix {
            Some(ym) => {
                if !doc.lines.is_empty() || !doc.shunts.is_empty() {
                    return Err(Error::Document(
                        "give either `y_matrix` or `lines`/`shunts`, not both".into(),
                    ));
                }
                assemble_from_matrix(ym, &position, n)?
            }
            None => assemble_from_lines(doc, &position, &bus_by_id, n)?,
        };

        let ng = slack_index.len();
        let nl = load_index.len();
        let y_gg = y.view((0, 0), (ng, ng)).into_owned();
        let y_gl = y.view((0, ng), (ng, nl)).into_owned();
        let y_lg = y.view((ng, 0), (nl, ng)).into_owned();
        let y_ll = y.view((ng, ng), (nl, nl)).into_owned();

        let z_ll = y_ll
            .clone()
            .try_inverse()
            .ok_or(Error::SingularAdmittance)?;
        let y_norm = inf_norm(&y_ll);
        let cond = y_norm * inf_norm(&z_ll);
        if !cond.is_finite() || cond > 1e13 {
            return Err(Error::SingularAdmittance);
        }

        let no_load: DVector<Complex64> = -(&z_ll * (&y_lg * &slack_voltage));
        let e_scale = vec_inf_norm(&no_load);
        for (i, e) in no_load.iter().enumerate() {
            if !(e.norm() > 1e-12 * e_scale.max(1e-300)) {
                return Err(Error::ZeroNoLoadVoltage(load_index[i].to_string()));
            }
        }
        let kcl = &y_ll * &no_load + &y_lg * &slack_voltage;
        let kcl_scale = (y_norm * e_scale).max(1.0);
        if vec_inf_norm(&kcl) > NORMALIZATION_TOL * kcl_scale {
            return Err(Error::Normalization(format!(
                "no-load KCL residual {:.3e}",
                vec_inf_norm(&kcl)
            )));
        }

        let z_hat = DMatrix::from_fn(nl, nl, |i, j| {
            z_ll[(i, j)] / (no_load[i] * no_load[j].conj())
        });
        let back = DMatrix::from_fn(nl, nl, |i, j| {
            no_load[i] * z_hat[(i, j)] * no_load[j].conj()
        });
        let z_scale = inf_norm(&z_ll).max(1.0);
        if inf_norm(&(back - &z_ll)) > NORMALIZATION_TOL * z_scale {
            return Err(Error::Normalization("Ẑ does not reproduce Y_LL⁻¹".into()));
        }

        let load_positions = load_index
            .iter()
            .enumerate()
            .map(|(i, np)| (np.clone(), i))
            .collect();

        Ok(Self {
            name: doc.name.clone(),
            base_kva: doc.base_kva,
            buses,
            slack_index,
            load_index,
            load_positions,
            slack_voltage,
            y_gg,
            y_gl,
            y_lg,
            y_ll,
            z_ll,
            no_load,
            z_hat,
        })
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn base_kva(&self) -> Option<f64> {
        self.base_kva
    }

    pub fn buses(&self) -> &[Bus] {
        &self.buses
    }

    pub fn bus(&self, id: &str) -> Option<&Bus> {
        self.buses.iter().find(|b| b.id == id)
    }

    /// Slack (bus, phase) entries in matrix order.
    pub fn slack_index(&self) -> &[NodePhase] {
        &self.slack_index
    }

    /// PQ (bus, phase) entries in matrix order.
    pub fn load_index(&self) -> &[NodePhase] {
        &self.load_index
    }

    pub fn load_count(&self) -> usize {
        self.load_index.len()
    }

    pub fn load_position(&self, bus: &str, phase: Phase) -> Option<usize> {
        self.load_positions.get(&NodePhase::new(bus, phase)).copied()
    }

    /// Positions of phases a, b, c of a PQ bus; errors if any is missing.
    pub fn three_phase_positions(&self, bus: &str) -> Result<[usize; 3]> {
        let b = self.bus(bus).ok_or_else(|| Error::UnknownBus(bus.into()))?;
        if b.kind != BusKind::Pq {
            return Err(Error::Document(format!("bus `{bus}` is not a PQ bus")));
        }
        let mut out = [0; 3];
        for p in Phase::ALL {
            out[p.index()] = self.load_position(bus, p).ok_or(Error::MissingPhase {
                bus: bus.into(),
                phase: p.label(),
            })?;
        }
        Ok(out)
    }

    pub fn slack_voltage(&self) -> &DVector<Complex64> {
        &self.slack_voltage
    }

    pub fn y_gg(&self) -> &DMatrix<Complex64> {
        &self.y_gg
    }

    pub fn y_gl(&self) -> &DMatrix<Complex64> {
        &self.y_gl
    }

    pub fn y_lg(&self) -> &DMatrix<Complex64> {
        &self.y_lg
    }

    pub fn y_ll(&self) -> &DMatrix<Complex64> {
        &self.y_ll
    }

    /// `Y_LL⁻¹`.
    pub fn z_ll(&self) -> &DMatrix<Complex64> {
        &self.z_ll
    }

    /// No-load voltage `E`.
    pub fn no_load_voltage(&self) -> &DVector<Complex64> {
        &self.no_load
    }

    /// Normalized impedance `Ẑ`.
    pub fn z_hat(&self) -> &DMatrix<Complex64> {
        &self.z_hat
    }

    /// `‖E + Y_LL⁻¹ Y_LG V_G‖∞`.
    pub fn reconstruction_residual(&self) -> f64 {
        vec_inf_norm(&(&self.no_load + &self.z_ll * (&self.y_lg * &self.slack_voltage)))
    }

    pub fn zero_loads(&self) -> DVector<Complex64> {
        DVector::zeros(self.load_count())
    }

    /// Physical voltages `V_L = diag(E) v_L`.
    pub fn denormalize(&self, normalized: &DVector<Complex64>) -> DVector<Complex64> {
        self.no_load.component_mul(normalized)
    }
}

fn assemble_from_matrix(
    ym: &YMatrixSpec,
    position: &HashMap<NodePhase, usize>,
    n: usize,
) -> Result<DMatrix<Complex64>> {
    if ym.index.len() != n {
        return Err(Error::Document(format!(
            "y_matrix index has {} labels, buses declare {n} phases",
            ym.index.len()
        )));
    }
    let mut perm = Vec::with_capacity(n);
    let mut used = HashSet::new();
    for label in &ym.index {
        let np: NodePhase = label.parse()?;
        let pos = *position
            .get(&np)
            .ok_or_else(|| Error::Document(format!("y_matrix label `{label}` is not a bus phase")))?;
        if !used.insert(pos) {
            return Err(Error::Document(format!("duplicate y_matrix label `{label}`")));
        }
        perm.push(pos);
    }
    let raw = square_block(&ym.entries, n, "y_matrix.entries")?;
    let mut y = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            y[(perm[i], perm[j])] = raw[(i, j)];
        }
    }
    Ok(y)
}

fn line_phases(
    declared: &Option<Vec<Phase>>,
    default_bus: &Bus,
    ends: &[&Bus],
) -> Result<Vec<Phase>> {
    let phases = match declared {
        Some(ps) => sorted_phases(ps, &default_bus.id)?,
        None => default_bus.phases.clone(),
    };
    for bus in ends {
        for p in &phases {
            if !bus.phases.contains(p) {
                return Err(Error::MissingPhase {
                    bus: bus.id.clone(),
                    phase: p.label(),
                });
            }
        }
    }
    Ok(phases)
}

fn assemble_from_lines(
    doc: &NetworkDocument,
    position: &HashMap<NodePhase, usize>,
    bus_by_id: &HashMap<&str, &Bus>,
    n: usize,
) -> Result<DMatrix<Complex64>> {
    let mut y = DMatrix::<Complex64>::zeros(n, n);
    let lookup = |id: &str, line: usize| -> Result<&Bus> {
        bus_by_id
            .get(id)
            .copied()
            .ok_or_else(|| Error::DanglingLine {
                line,
                bus: id.to_string(),
            })
    };
    for (k, line) in doc.lines.iter().enumerate() {
        let from = lookup(&line.from, k)?;
        let to = lookup(&line.to, k)?;
        if from.id == to.id {
            return Err(Error::Document(format!("line {k} connects bus `{}` to itself", from.id)));
        }
        let phases = line_phases(&line.phases, from, &[from, to])?;
        let m = phases.len();
        let block = match (&line.y_block, &line.z_block) {
            (Some(yb), None) => square_block(yb, m, "y_block")?,
            (None, Some(zb)) => square_block(zb, m, "z_block")?
                .try_inverse()
                .ok_or_else(|| Error::Document(format!("line {k} has a singular z_block")))?,
            _ => {
                return Err(Error::Document(format!(
                    "line {k} needs exactly one of `y_block` or `z_block`"
                )))
            }
        };
        for (i, &pi) in phases.iter().enumerate() {
            let fi = position[&NodePhase::new(from.id.clone(), pi)];
            let ti = position[&NodePhase::new(to.id.clone(), pi)];
            for (j, &pj) in phases.iter().enumerate() {
                let fj = position[&NodePhase::new(from.id.clone(), pj)];
                let tj = position[&NodePhase::new(to.id.clone(), pj)];
                let yij = block[(i, j)];
                y[(fi, fj)] += yij;
                y[(ti, tj)] += yij;
                y[(fi, tj)] -= yij;
                y[(ti, fj)] -= yij;
            }
        }
    }
    for (k, shunt) in doc.shunts.iter().enumerate() {
        let bus = bus_by_id
            .get(shunt.bus.as_str())
            .copied()
            .ok_or_else(|| Error::UnknownBus(shunt.bus.clone()))?;
        let phases = line_phases(&shunt.phases, bus, &[bus])?;
        let block = square_block(&shunt.y_block, phases.len(), &format!("shunt {k} y_block"))?;
        for (i, &pi) in phases.iter().enumerate() {
            let a = position[&NodePhase::new(bus.id.clone(), pi)];
            for (j, &pj) in phases.iter().enumerate() {
                let b = position[&NodePhase::new(bus.id.clone(), pj)];
                y[(a, b)] += block[(i, j)];
            }
        }
    }
    Ok(y)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PowerUnit {
    /// Per unit on the network power base.
    #[default]
    Pu,
    /// kW / kvar, converted with the network's `base_kva`.
    Kw,
}

/// Per-phase wye load withdrawals keyed by `bus.phase`, values `[P, Q]`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct LoadDocument {
    #[serde(default)]
    pub unit: PowerUnit,
    pub loads: BTreeMap<String, [f64; 2]>,
}

impl LoadDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Per-unit withdrawal vector in the model's PQ ordering; unlisted
    /// entries are zero.
    pub fn to_vector(&self, model: &NetworkModel) -> Result<DVector<Complex64>> {
        let scale = match self.unit {
            PowerUnit::Pu => 1.0,
            PowerUnit::Kw => {
                let base = model.base_kva().ok_or_else(|| {
                    Error::Document("kW loads need `base_kva` in the network document".into())
                })?;
                if !(base > 0.0) {
                    return Err(Error::Document("`base_kva` must be positive".into()));
                }
                1.0 / base
            }
        };
        let mut s = model.zero_loads();
        for (label, pq) in &self.loads {
            let np: NodePhase = label.parse()?;
            let bus = model
                .bus(&np.bus)
                .ok_or_else(|| Error::UnknownBus(np.bus.clone()))?;
            if bus.kind == BusKind::Slack {
                return Err(Error::Document(format!("load `{label}` sits on the slack bus")));
            }
            let pos = model
                .load_position(&np.bus, np.phase)
                .ok_or(Error::MissingPhase {
                    bus: np.bus.clone(),
                    phase: np.phase.label(),
                })?;
            s[pos] = Complex64::new(pq[0], pq[1]) * scale;
        }
        Ok(s)
    }
}

/// Nominal and actual loading of a network, with the nominal normalized
/// voltage `v⁰_L` that anchors the solvability certificate.
#[derive(Debug, Clone)]
pub struct LoadState {
    nominal: DVector<Complex64>,
    actual: DVector<Complex64>,
    increment: DVector<Complex64>,
    nominal_voltage: DVector<Complex64>,
}

impl LoadState {
    /// `S⁰_L`.
    pub fn nominal(&self) -> &DVector<Complex64> {
        &self.nominal
    }

    /// `S_L`.
    pub fn actual(&self) -> &DVector<Complex64> {
        &self.actual
    }

    /// `σ_L = S_L - S⁰_L`.
    pub fn increment(&self) -> &DVector<Complex64> {
        &self.increment
    }

    /// `v⁰_L`.
    pub fn nominal_voltage(&self) -> &DVector<Complex64> {
        &self.nominal_voltage
    }

    /// Same nominal point, different actual loading.
    pub fn with_actual(&self, actual: DVector<Complex64>) -> Result<LoadState> {
        if actual.len() != self.nominal.len() {
            return Err(Error::Dimension(format!(
                "actual load has {} entries, nominal has {}",
                actual.len(),
                self.nominal.len()
            )));
        }
        let increment = &actual - &self.nominal;
        Ok(LoadState {
            nominal: self.nominal.clone(),
            actual,
            increment,
            nominal_voltage: self.nominal_voltage.clone(),
        })
    }
}

/// Assemble a [`LoadState`], solving for `v⁰_L` when it is not supplied.
pub fn make_load_state(
    model: &NetworkModel,
    nominal: DVector<Complex64>,
    actual: DVector<Complex64>,
    nominal_voltage: Option<DVector<Complex64>>,
) -> Result<LoadState> {
    let n = model.load_count();
    for (what, v) in [("nominal load", &nominal), ("actual load", &actual)] {
        if v.len() != n {
            return Err(Error::Dimension(format!(
                "{what} has {} entries, model has {n} PQ phases",
                v.len()
            )));
        }
    }
    let trivial = nominal.iter().all(|s| *s == Complex64::new(0.0, 0.0));
    let nominal_voltage = match nominal_voltage {
        Some(v0) => {
            if v0.len() != n {
                return Err(Error::Dimension(format!(
                    "nominal voltage has {} entries, model has {n} PQ phases",
                    v0.len()
                )));
            }
            v0
        }
        None if trivial => DVector::from_element(n, Complex64::new(1.0, 0.0)),
        None => {
            let init = DVector::from_element(n, Complex64::new(1.0, 0.0));
            solve_fixed_point(model, &nominal, &init, &FixedPointOptions::default())?.normalized
        }
    };
    if let Some(i) = nominal_voltage.iter().position(|v| v.norm() == 0.0) {
        return Err(Error::ZeroNominalVoltage(model.load_index()[i].to_string()));
    }
    let residual = fixed_point_residual(model, &nominal_voltage, &nominal);
    if !(residual <= NOMINAL_RESIDUAL_TOL) {
        return Err(Error::NominalResidual {
            residual,
            tol: NOMINAL_RESIDUAL_TOL,
        });
    }
    let increment = &actual - &nominal;
    Ok(LoadState {
        nominal,
        actual,
        increment,
        nominal_voltage,
    })
}
