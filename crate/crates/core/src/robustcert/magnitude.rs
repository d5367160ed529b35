//! Magnitude-based metrics (PVUR, LVUR) over disks.
//!
//! Each metric is a set of rows `R x ≥ 0` over a magnitude triple. Because
//! each phase moves independently, a row's worst case takes the smallest
//! admissible magnitude where its coefficient is positive and the largest
//! where it is negative.

use crate::error::{Error, Result};
use crate::solvability::DiskBundle;
use crate::unbalance::{deviation_rows, pvur_rows, Metric, PvurVariant};

use super::{check_eps, Exactness, Method, RobustVerdict, Sense};

/// Line-to-line pairs `(ab, bc, ca)` as phase indices.
const LINE_PAIRS: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

fn row_minimum(row: &[f64; 3], lo: &[f64; 3], hi: &[f64; 3]) -> f64 {
    (0..3)
        .map(|p| {
            let c = row[p];
            c * if c >= 0.0 { lo[p] } else { hi[p] }
        })
        .sum()
}

/// Magnitude range `[max(|C|-r, 0), |C|+r]` of each phase.
pub(crate) fn phase_magnitude_bounds(disks: &DiskBundle) -> ([f64; 3], [f64; 3]) {
    let lo = [0, 1, 2].map(|p| (disks.centers[p].norm() - disks.radii[p]).max(0.0));
    let hi = [0, 1, 2].map(|p| disks.centers[p].norm() + disks.radii[p]);
    (lo, hi)
}

/// Exact worst case of every PVUR row over the disks.
pub fn robust_pvur(disks: &DiskBundle, eps: f64, variant: PvurVariant) -> Result<RobustVerdict> {
    check_eps(eps)?;
    if disks.radii.iter().all(|r| *r == 0.0) && disks.centers.iter().all(|c| c.norm() == 0.0) {
        return Err(Error::DegenerateVoltage("all disks collapse to the origin"));
    }
    let (lo, hi) = phase_magnitude_bounds(disks);
    let rows = pvur_rows(eps, variant);
    let values = rows.iter().map(|r| row_minimum(r, &lo, &hi)).collect();
    let metric = match variant {
        PvurVariant::AvgDeviation => Metric::Pvur,
        PvurVariant::MaxMinusMin => Metric::PvurMaxMin,
    };
    Ok(RobustVerdict::new(
        metric,
        Method::Closed,
        eps,
        Sense::NonNegative,
        values,
        Exactness::Exact,
    ))
}

/// LVUR rows with each line-to-line magnitude bounded by
/// `‖C_p - C_q‖ ∓ (r_p + r_q)`.
pub fn robust_lvur_linebound(disks: &DiskBundle, eps: f64) -> Result<RobustVerdict> {
    check_eps(eps)?;
    let c = &disks.centers;
    let r = &disks.radii;
    let dist = LINE_PAIRS.map(|(p, q)| (c[p] - c[q]).norm());
    let spread = LINE_PAIRS.map(|(p, q)| r[p] + r[q]);
    let lo = [0, 1, 2].map(|k| (dist[k] - spread[k]).max(0.0));
    let hi = [0, 1, 2].map(|k| dist[k] + spread[k]);
    let values = deviation_rows(eps)
        .iter()
        .map(|row| row_minimum(row, &lo, &hi))
        .collect();
    Ok(RobustVerdict::new(
        Metric::Lvur,
        Method::LineBound,
        eps,
        Sense::NonNegative,
        values,
        Exactness::SafeApproximation,
    ))
}

/// Row value after replacing each line magnitude by its phase-magnitude
/// bound: `||x_p| - |x_q||` under a positive coefficient, `|x_p| + |x_q|`
/// under a negative one.
fn relaxed_row(row: &[f64; 3], x: &[f64; 3]) -> f64 {
    LINE_PAIRS
        .iter()
        .zip(row)
        .map(|(&(p, q), &c)| {
            if c >= 0.0 {
                c * (x[p] - x[q]).abs()
            } else {
                c * (x[p] + x[q])
            }
        })
        .sum()
}

/// Exact minimum of [`relaxed_row`] over the magnitude box `[lo, hi]`.
///
/// The relaxed row is piecewise linear with kinks where two magnitudes
/// coincide, so its minimum over the box can sit where a coordinate equals
/// another coordinate's bound rather than at a box corner. Candidate values
/// per coordinate are therefore all six bounds clipped into its own range;
/// every vertex of every linear piece is among the combinations.
pub(crate) fn relaxed_row_minimum(row: &[f64; 3], lo: &[f64; 3], hi: &[f64; 3]) -> f64 {
    let bounds = [lo[0], lo[1], lo[2], hi[0], hi[1], hi[2]];
    let cands: [[f64; 6]; 3] = [0, 1, 2].map(|p| bounds.map(|b| b.clamp(lo[p], hi[p])));
    let mut best = f64::INFINITY;
    for &xa in &cands[0] {
        for &xb in &cands[1] {
            for &xc in &cands[2] {
                best = best.min(relaxed_row(row, &[xa, xb, xc]));
            }
        }
    }
    best
}

/// LVUR rows relaxed to phase magnitudes and minimized over the magnitude
/// box.
pub fn robust_lvur_magbound(disks: &DiskBundle, eps: f64) -> Result<RobustVerdict> {
    check_eps(eps)?;
    let (lo, hi) = phase_magnitude_bounds(disks);
    let values = deviation_rows(eps)
        .iter()
        .map(|row| relaxed_row_minimum(row, &lo, &hi))
        .collect();
    Ok(RobustVerdict::new(
        Metric::Lvur,
        Method::MagBound,
        eps,
        Sense::NonNegative,
        values,
        Exactness::SafeApproximation,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unbalance::{lvur, pvur, row_values, VoltageTriple, ALPHA};
    use num_complex::Complex64;

    fn balanced(radius: f64) -> DiskBundle {
        DiskBundle::new(
            [Complex64::new(1.0, 0.0), ALPHA * ALPHA, ALPHA],
            [radius; 3],
        )
        .unwrap()
    }

    fn wide() -> DiskBundle {
        let s = 3f64.sqrt();
        DiskBundle::new(
            [
                Complex64::new(2.0, 0.0),
                Complex64::new(-1.0, -s),
                Complex64::new(-1.0, s),
            ],
            [0.6; 3],
        )
        .unwrap()
    }

    #[test]
    fn magbound_rejects_even_a_balanced_point() {
        // negative-coefficient lines relax to |V_p| + |V_q|, which drives
        // every row below zero even at a balanced point
        let v = robust_lvur_magbound(&balanced(0.0), 0.99).unwrap();
        assert!(!v.pass);
        assert!(v.worst_values.iter().all(|&w| w < 0.0), "{:?}", v.worst_values);
        assert!((v.worst_values[0] - 4.0 * (0.99 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn balanced_point_passes_pvur() {
        let v = robust_pvur(&balanced(0.0), 0.01, PvurVariant::AvgDeviation).unwrap();
        assert!(v.pass);
        assert!(v.worst_values.iter().all(|x| *x > 0.0));
        assert_eq!(v.exactness, Exactness::Exact);
    }

    #[test]
    fn zero_radius_reduces_to_pointwise_rows() {
        let d = DiskBundle::new(
            [Complex64::new(1.03, 0.0), ALPHA * ALPHA * 0.98, ALPHA],
            [0.0; 3],
        )
        .unwrap();
        let point = VoltageTriple::from_array(d.centers);
        for eps in [0.01, 0.02, 0.05] {
            let lv = robust_lvur_linebound(&d, eps).unwrap();
            let rows = row_values(&deviation_rows(eps), point.line_magnitudes());
            for (a, b) in lv.worst_values.iter().zip(rows) {
                assert!((a - b).abs() < 1e-14);
            }
            assert_eq!(lv.pass, lvur(point.line_magnitudes()).unwrap() <= eps);
            let pv = robust_pvur(&d, eps, PvurVariant::AvgDeviation).unwrap();
            assert_eq!(pv.pass, pvur(point.magnitudes(), PvurVariant::AvgDeviation).unwrap() <= eps);
        }
    }

    #[test]
    fn inflated_radius_takes_zero_branch() {
        let mut d = wide();
        d.radii[0] = 2.0;
        let (lo, _) = phase_magnitude_bounds(&d);
        assert_eq!(lo[0], 0.0);
        let v = robust_pvur(&d, 0.3, PvurVariant::AvgDeviation).unwrap();
        // row a has positive coefficient on phase a, which contributes 0
        let expected = (0.3 - 1.0) * 2.0 * 2.6;
        assert!((v.worst_values[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn overlapping_disks_clamp_line_bound() {
        let d = DiskBundle::new(
            [Complex64::new(1.0, 0.0), Complex64::new(0.9, 0.0), ALPHA],
            [0.1, 0.1, 0.0],
        )
        .unwrap();
        let v = robust_lvur_linebound(&d, 0.5).unwrap();
        // row ab: positive coefficient on |V_ab| whose lower bound clamps to 0
        let bc = (d.centers[1] - d.centers[2]).norm() + 0.1;
        let ca = (d.centers[2] - d.centers[0]).norm() + 0.1;
        assert!((v.worst_values[0] - (0.5 - 1.0) * (bc + ca)).abs() < 1e-12);
    }

    #[test]
    fn magbound_beats_corner_enumeration_when_boxes_overlap() {
        let row = [2.5, -0.5, -0.5];
        let lo = [1.0, 0.0, 1.0];
        let hi = [2.0, 3.0, 1.0];
        let exact = relaxed_row_minimum(&row, &lo, &hi);
        let mut corners = f64::INFINITY;
        for xa in [lo[0], hi[0]] {
            for xb in [lo[1], hi[1]] {
                corners = corners.min(relaxed_row(&row, &[xa, xb, 1.0]));
            }
        }
        assert!(exact < corners - 1e-9, "{exact} vs {corners}");
        // dense grid agrees with the enumeration
        let mut grid = f64::INFINITY;
        for i in 0..=400 {
            for j in 0..=600 {
                let x = [1.0 + i as f64 / 400.0, 3.0 * j as f64 / 600.0, 1.0];
                grid = grid.min(relaxed_row(&row, &x));
            }
        }
        assert!((grid - exact).abs() < 1e-9);
    }

    #[test]
    fn magbound_zero_radius_is_pointwise_relaxation() {
        let d = wide();
        let mut z = d.clone();
        z.radii = [0.0; 3];
        let v = robust_lvur_magbound(&z, 0.3).unwrap();
        let x = [2.0, 2.0, 2.0];
        for (row, got) in deviation_rows(0.3).iter().zip(&v.worst_values) {
            assert!((relaxed_row(row, &x) - got).abs() < 1e-12);
        }
    }
}
