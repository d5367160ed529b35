use balcert_core::fixtures::{five_bus_case, five_bus_network, FIVE_BUS_NETWORK};
use balcert_core::netmodel::NetworkDocument;
use balcert_core::powerflow::fixed_point_residual;
use balcert_core::{make_load_state, Complex64, NetworkModel};
use serde::Deserialize;

#[derive(Deserialize)]
struct Oracle {
    #[serde(rename = "E")]
    e: Vec<[f64; 2]>,
    z_hat: Vec<Vec<[f64; 2]>>,
    nominal_voltage: Vec<[f64; 2]>,
}

fn oracle() -> Oracle {
    serde_json::from_str(include_str!("../fixtures/five_bus_oracle.json")).unwrap()
}

fn c(x: &[f64; 2]) -> Complex64 {
    Complex64::new(x[0], x[1])
}

#[test]
fn five_bus_matches_dense_inverse_oracle() {
    let model = five_bus_network().unwrap();
    let o = oracle();
    let n = model.load_count();
    assert_eq!(o.e.len(), n);
    for i in 0..n {
        assert!((model.no_load_voltage()[i] - c(&o.e[i])).norm() < 1e-10);
        for j in 0..n {
            assert!((model.z_hat()[(i, j)] - c(&o.z_hat[i][j])).norm() < 1e-10);
        }
    }
    assert!(model.reconstruction_residual() <= 1e-10);
}

#[test]
fn five_bus_nominal_point() {
    let model = five_bus_network().unwrap();
    let case = five_bus_case().unwrap();
    let state = case.nominal_state(&model).unwrap();
    let residual = fixed_point_residual(&model, state.nominal_voltage(), state.nominal());
    assert!(residual <= 1e-8, "{residual}");
    let o = oracle();
    for (v, w) in state.nominal_voltage().iter().zip(&o.nominal_voltage) {
        assert!((v - c(w)).norm() < 1e-9);
    }
    // an explicitly supplied consistent v⁰ is accepted as is
    let again = make_load_state(
        &model,
        state.nominal().clone(),
        state.nominal().clone(),
        Some(state.nominal_voltage().clone()),
    )
    .unwrap();
    assert_eq!(again.nominal_voltage(), state.nominal_voltage());
}

#[test]
fn bus_order_only_permutes_results() {
    let base = five_bus_network().unwrap();
    let mut doc: NetworkDocument = serde_json::from_str(FIVE_BUS_NETWORK).unwrap();
    doc.buses.reverse();
    let permuted = NetworkModel::from_document(&doc).unwrap();
    let idx = base.load_index();
    let map: Vec<usize> = idx
        .iter()
        .map(|np| permuted.load_position(&np.bus, np.phase).unwrap())
        .collect();
    assert_ne!(map, (0..idx.len()).collect::<Vec<_>>());
    for i in 0..idx.len() {
        let e = base.no_load_voltage()[i] - permuted.no_load_voltage()[map[i]];
        assert!(e.norm() < 1e-12);
        for j in 0..idx.len() {
            let z = base.z_hat()[(i, j)] - permuted.z_hat()[(map[i], map[j])];
            assert!(z.norm() < 1e-12);
        }
    }
}

#[test]
fn admittance_scaling() {
    let base = five_bus_network().unwrap();
    let s = 2.5;
    let mut doc: NetworkDocument = serde_json::from_str(FIVE_BUS_NETWORK).unwrap();
    for line in &mut doc.lines {
        for row in line.z_block.as_mut().unwrap() {
            for z in row {
                z[0] /= s;
                z[1] /= s;
            }
        }
    }
    let scaled = NetworkModel::from_document(&doc).unwrap();
    let n = base.load_count();
    for i in 0..n {
        assert!((base.no_load_voltage()[i] - scaled.no_load_voltage()[i]).norm() < 1e-12);
        for j in 0..n {
            assert!((base.z_hat()[(i, j)] / s - scaled.z_hat()[(i, j)]).norm() < 1e-12);
        }
    }
}

#[test]
fn single_phase_lateral() {
    let doc: NetworkDocument = serde_json::from_value(serde_json::json!({
        "buses": [
            {"id": "s", "phases": ["a", "b", "c"], "kind": "slack"},
            {"id": "m", "phases": ["a", "b", "c"], "kind": "pq"},
            {"id": "l", "phases": ["b"], "kind": "pq"}
        ],
        "lines": [
            {"from": "s", "to": "m", "z_block": [
                [[0.1, 0.2], [0.03, 0.06], [0.03, 0.06]],
                [[0.03, 0.06], [0.1, 0.2], [0.03, 0.06]],
                [[0.03, 0.06], [0.03, 0.06], [0.1, 0.2]]
            ]},
            {"from": "m", "to": "l", "phases": ["b"], "z_block": [[[0.2, 0.1]]]}
        ]
    }))
    .unwrap();
    let model = NetworkModel::from_document(&doc).unwrap();
    assert_eq!(model.load_count(), 4);
    assert!(model.three_phase_positions("l").is_err());
    assert!(model.three_phase_positions("m").is_ok());
    assert!(model.reconstruction_residual() <= 1e-10);
}
