//! Pointwise unbalance metrics and their quadratic-form representation.
//!
//! Real coordinates are always ordered `(a^r, a^i, b^r, b^i, c^r, c^i)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix2, Matrix6, Vector6};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `α = e^{j2π/3}`.
pub const ALPHA: Complex64 = Complex64::new(-0.5, 0.866_025_403_784_438_6);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoltageTriple {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
}

impl VoltageTriple {
    pub fn new(a: Complex64, b: Complex64, c: Complex64) -> Self {
        Self { a, b, c }
    }

    pub fn from_array(v: [Complex64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn to_array(self) -> [Complex64; 3] {
        [self.a, self.b, self.c]
    }

    pub fn from_coords(x: &[f64; 6]) -> Self {
        Self::new(
            Complex64::new(x[0], x[1]),
            Complex64::new(x[2], x[3]),
            Complex64::new(x[4], x[5]),
        )
    }

    pub fn coords(self) -> [f64; 6] {
        [self.a.re, self.a.im, self.b.re, self.b.im, self.c.re, self.c.im]
    }

    pub fn magnitudes(self) -> [f64; 3] {
        [self.a.norm(), self.b.norm(), self.c.norm()]
    }

    /// `(|V_ab|, |V_bc|, |V_ca|)`.
    pub fn line_magnitudes(self) -> [f64; 3] {
        [
            (self.a - self.b).norm(),
            (self.b - self.c).norm(),
            (self.c - self.a).norm(),
        ]
    }

    pub fn sequence(self) -> SequenceComponents {
        SequenceComponents::of(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SequenceComponents {
    pub positive: Complex64,
    pub negative: Complex64,
    pub zero: Complex64,
}

impl SequenceComponents {
    pub fn of(v: VoltageTriple) -> Self {
        let a2 = ALPHA * ALPHA;
        Self {
            positive: (v.a + ALPHA * v.b + a2 * v.c) / 3.0,
            negative: (v.a + a2 * v.b + ALPHA * v.c) / 3.0,
            zero: (v.a + v.b + v.c) / 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PvurVariant {
    /// Largest deviation from the average, over the average.
    #[default]
    AvgDeviation,
    /// Spread between largest and smallest, over the average.
    MaxMinusMin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VufKind {
    Negative,
    Zero,
}

/// Unbalance metric selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "pvur")]
    Pvur,
    #[serde(rename = "pvur-maxmin")]
    PvurMaxMin,
    #[serde(rename = "lvur")]
    Lvur,
    #[serde(rename = "vuf-n")]
    VufN,
    #[serde(rename = "vuf-0")]
    Vuf0,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Pvur,
        Metric::PvurMaxMin,
        Metric::Lvur,
        Metric::VufN,
        Metric::Vuf0,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Pvur => "pvur",
            Metric::PvurMaxMin => "pvur-maxmin",
            Metric::Lvur => "lvur",
            Metric::VufN => "vuf-n",
            Metric::Vuf0 => "vuf-0",
        }
    }

    pub fn vuf_kind(self) -> Option<VufKind> {
        match self {
            Metric::VufN => Some(VufKind::Negative),
            Metric::Vuf0 => Some(VufKind::Zero),
            _ => None,
        }
    }

    /// Pointwise value of the metric at `v`.
    pub fn evaluate(self, v: VoltageTriple) -> Result<f64> {
        match self {
            Metric::Pvur => pvur(v.magnitudes(), PvurVariant::AvgDeviation),
            Metric::PvurMaxMin => pvur(v.magnitudes(), PvurVariant::MaxMinusMin),
            Metric::Lvur => lvur(v.line_magnitudes()),
            Metric::VufN => vuf(v, VufKind::Negative),
            Metric::Vuf0 => vuf(v, VufKind::Zero),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown metric `{s}`")))
    }
}

fn average(x: [f64; 3], what: &'static str) -> Result<f64> {
    let avg = (x[0] + x[1] + x[2]) / 3.0;
    if !(avg > 0.0) {
        return Err(Error::DegenerateVoltage(what));
    }
    Ok(avg)
}

pub fn pvur(magnitudes: [f64; 3], variant: PvurVariant) -> Result<f64> {
    let avg = average(magnitudes, "average phase magnitude is zero")?;
    let spread = match variant {
        PvurVariant::AvgDeviation => magnitudes
            .iter()
            .map(|m| (m - avg).abs())
            .fold(0.0, f64::max),
        PvurVariant::MaxMinusMin => {
            let hi = magnitudes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = magnitudes.iter().copied().fold(f64::INFINITY, f64::min);
            hi - lo
        }
    };
    Ok(spread / avg)
}

/// LVUR from `(|V_ab|, |V_bc|, |V_ca|)`, measured against the line-to-line
/// average.
pub fn lvur(line_magnitudes: [f64; 3]) -> Result<f64> {
    let avg = average(line_magnitudes, "average line-to-line magnitude is zero")?;
    let dev = line_magnitudes
        .iter()
        .map(|m| (m - avg).abs())
        .fold(0.0, f64::max);
    Ok(dev / avg)
}

/// Errors when the positive sequence vanishes relative to the phase
/// magnitudes.
pub fn vuf(v: VoltageTriple, which: VufKind) -> Result<f64> {
    let seq = v.sequence();
    let pos = seq.positive.norm();
    let scale = v.magnitudes().into_iter().fold(0.0, f64::max);
    if !(pos > 1e-12 * scale) {
        return Err(Error::DegenerateVoltage("positive-sequence voltage is zero"));
    }
    Ok(match which {
        VufKind::Negative => seq.negative.norm(),
        VufKind::Zero => seq.zero.norm(),
    } / pos)
}

/// Rows `R` such that `metric ≤ ε ⇔ R x ≥ 0` for a magnitude triple `x`
/// (phase magnitudes for PVUR, line magnitudes for LVUR).
pub fn deviation_rows(eps: f64) -> [[f64; 3]; 6] {
    let (p, m) = (eps + 2.0, eps - 1.0);
    let (n, q) = (eps - 2.0, eps + 1.0);
    [
        [p, m, m],
        [m, p, m],
        [m, m, p],
        [n, q, q],
        [q, n, q],
        [q, q, n],
    ]
}

/// Rows for the max-minus-min PVUR: one per ordered pair `(p, q)`, `p ≠ q`,
/// encoding `3(x_p - x_q) ≤ ε Σx`.
pub fn spread_rows(eps: f64) -> [[f64; 3]; 6] {
    let mut rows = [[eps; 3]; 6];
    let pairs = [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)];
    for (row, (p, q)) in rows.iter_mut().zip(pairs) {
        row[p] -= 3.0;
        row[q] += 3.0;
    }
    rows
}

pub fn pvur_rows(eps: f64, variant: PvurVariant) -> [[f64; 3]; 6] {
    match variant {
        PvurVariant::AvgDeviation => deviation_rows(eps),
        PvurVariant::MaxMinusMin => spread_rows(eps),
    }
}

pub fn row_values(rows: &[[f64; 3]; 6], x: [f64; 3]) -> [f64; 6] {
    rows.map(|r| r[0] * x[0] + r[1] * x[1] + r[2] * x[2])
}

/// `2×2` real matrix of multiplication by `w`.
pub fn rotation(w: Complex64) -> Matrix2<f64> {
    Matrix2::new(w.re, -w.im, w.im, w.re)
}

/// `V^⊤ A_x V = 9 |V_x|²` for x ∈ {n, 0, p}.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForms {
    pub a_n: Matrix6<f64>,
    pub a_0: Matrix6<f64>,
    pub a_p: Matrix6<f64>,
    pub b_n: Matrix2<f64>,
    pub b_0: Matrix2<f64>,
    pub b_p: Matrix2<f64>,
}

fn circulant(b: &Matrix2<f64>) -> Matrix6<f64> {
    let i = Matrix2::identity();
    let bt = b.transpose();
    let blocks = [[i, *b, bt], [bt, i, *b], [*b, bt, i]];
    let mut out = Matrix6::zeros();
    for (r, row) in blocks.iter().enumerate() {
        for (c, blk) in row.iter().enumerate() {
            out.fixed_view_mut::<2, 2>(2 * r, 2 * c).copy_from(blk);
        }
    }
    out
}

pub fn build_quadratic_forms() -> QuadraticForms {
    let b_n = rotation(ALPHA * ALPHA);
    let b_0 = Matrix2::identity();
    let b_p = rotation(ALPHA);
    QuadraticForms {
        a_n: circulant(&b_n),
        a_0: circulant(&b_0),
        a_p: circulant(&b_p),
        b_n,
        b_0,
        b_p,
    }
}

impl QuadraticForms {
    /// `A_n` or `A_0`.
    pub fn unbalance_form(&self, which: VufKind) -> &Matrix6<f64> {
        match which {
            VufKind::Negative => &self.a_n,
            VufKind::Zero => &self.a_0,
        }
    }

    /// `A_x - ε² A_p`, whose quadratic form is non-positive exactly where
    /// `VUF_x ≤ ε`.
    pub fn objective(&self, eps: f64, which: VufKind) -> Matrix6<f64> {
        self.unbalance_form(which) - self.a_p * (eps * eps)
    }
}

pub fn quadratic(m: &Matrix6<f64>, x: &[f64; 6]) -> f64 {
    let v = Vector6::from_row_slice(x);
    v.dot(&(m * v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pvur_examples() {
        for v in [PvurVariant::AvgDeviation, PvurVariant::MaxMinusMin] {
            assert_eq!(pvur([1.0, 1.0, 1.0], v).unwrap(), 0.0);
        }
        let x = [1.02, 0.98, 1.00];
        assert!((pvur(x, PvurVariant::AvgDeviation).unwrap() - 0.02).abs() < 1e-12);
        assert!((pvur(x, PvurVariant::MaxMinusMin).unwrap() - 0.04).abs() < 1e-12);
        let y = pvur([1.0, 1.0, 0.7], PvurVariant::AvgDeviation).unwrap();
        assert!((y - 0.2 / 0.9).abs() < 1e-12);
        assert!(pvur([0.0; 3], PvurVariant::AvgDeviation).is_err());
    }

    #[test]
    fn lvur_examples() {
        let s = 3f64.sqrt();
        assert!(lvur([s, s, s]).unwrap() < 1e-15);
        assert!((lvur([1.02, 0.98, 1.00]).unwrap() - 0.02).abs() < 1e-12);
        let x = [1.3, 0.4, 2.2];
        let scaled = x.map(|v| v * 7.5);
        assert!((lvur(x).unwrap() - lvur(scaled).unwrap()).abs() < 1e-14);
        assert!(lvur([0.0; 3]).is_err());
    }

    #[test]
    fn vuf_examples() {
        let one = c(1.0, 0.0);
        let positive = VoltageTriple::new(one, ALPHA * ALPHA, ALPHA);
        assert!(vuf(positive, VufKind::Negative).unwrap() < 1e-15);
        assert!(vuf(positive, VufKind::Zero).unwrap() < 1e-15);
        let negative = VoltageTriple::new(one, ALPHA, ALPHA * ALPHA);
        assert!(vuf(negative, VufKind::Negative).is_err());
    }

    #[test]
    fn sequence_matches_quadratic_forms() {
        let q = build_quadratic_forms();
        let v = VoltageTriple::new(c(1.05, 0.0), ALPHA * ALPHA, ALPHA * 0.95);
        let seq = v.sequence();
        let x = v.coords();
        assert!((quadratic(&q.a_n, &x) - 9.0 * seq.negative.norm_sqr()).abs() < 1e-10);
        assert!((quadratic(&q.a_p, &x) - 9.0 * seq.positive.norm_sqr()).abs() < 1e-10);
        assert!((quadratic(&q.a_0, &x) - 9.0 * seq.zero.norm_sqr()).abs() < 1e-10);
    }

    #[test]
    fn form_structure() {
        let q = build_quadratic_forms();
        assert!((q.b_p.transpose() * q.b_p - Matrix2::identity()).norm() < 1e-15);
        assert!((q.a_n.trace() - 6.0).abs() < 1e-15);
        let sum = q.a_n + q.a_0 + q.a_p;
        assert!((sum - Matrix6::identity() * 3.0).norm() < 1e-14);
    }

    #[test]
    fn spread_rows_encode_max_minus_min() {
        let eps = 0.05;
        let ok = [1.0, 1.02, 0.99];
        let bad = [1.0, 1.07, 0.99];
        let rows = spread_rows(eps);
        assert!(row_values(&rows, ok).iter().all(|v| *v >= 0.0));
        assert!(row_values(&rows, bad).iter().any(|v| *v < 0.0));
    }

    #[test]
    fn metric_names_round_trip() {
        for m in Metric::ALL {
            assert_eq!(m.name().parse::<Metric>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.name()));
        }
    }
}
