//! Bundled example data.
//!
//! The five-bus feeder is synthetic: a meshed three-phase network with
//! transposed line impedances `z_s = 0.12 + 0.24j`, `z_m = 0.04 + 0.08j`
//! p.u. per unit length, a balanced 1 p.u. slack and a 1000 kVA base. The
//! case loads buses 4 and 5 at 10 kW and 50 kW per phase (unity power
//! factor) and unbalances bus 5 by `k × (10, -5, -5)` kW.

use num_complex::Complex64;

use crate::balancibility::SweepCase;
use crate::error::Result;
use crate::netmodel::NetworkModel;
use crate::solvability::DiskBundle;

pub const FIVE_BUS_NETWORK: &str = include_str!("../fixtures/five_bus.json");
pub const FIVE_BUS_CASE: &str = include_str!("../fixtures/five_bus_case.json");

pub fn five_bus_network() -> Result<NetworkModel> {
    NetworkModel::from_json(FIVE_BUS_NETWORK)
}

pub fn five_bus_case() -> Result<SweepCase> {
    SweepCase::from_json(FIVE_BUS_CASE)
}

fn symmetric_bundle(a: f64, r: f64) -> DiskBundle {
    let s = 3f64.sqrt();
    DiskBundle::new(
        [
            Complex64::new(a, 0.0),
            Complex64::new(-1.0, -s),
            Complex64::new(-1.0, s),
        ],
        [r; 3],
    )
    .expect("valid bundle")
}

/// Large disks around a strongly unbalanced triple; evaluate at `ε = 0.3`.
/// The dual bound is not tight here.
pub fn wide_disks() -> DiskBundle {
    symmetric_bundle(2.0, 0.6)
}

pub const WIDE_EPS: f64 = 0.3;

/// Small disks around a strongly unbalanced triple; evaluate at `ε = 0.1`.
/// The dual bound is tight here.
pub fn tight_disks() -> DiskBundle {
    symmetric_bundle(3.0, 0.1)
}

pub const TIGHT_EPS: f64 = 0.1;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_files_parse() {
        let model = five_bus_network().unwrap();
        assert_eq!(model.load_count(), 12);
        let case = five_bus_case().unwrap();
        assert_eq!(case.critical_node, "4");
        model.three_phase_positions(&case.critical_node).unwrap();
        let state = case.nominal_state(&model).unwrap();
        assert_eq!(state.increment().iter().map(|s| s.norm()).sum::<f64>(), 0.0);
    }
}
