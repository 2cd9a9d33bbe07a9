//! Fixtures shared by the benchmarks.

use plaquette_core::circuit::{model_circuit, Circuit, InitialState};
use plaquette_core::harness::ExperimentConfig;
use plaquette_core::{Basis, GaugeModel, Geometry};

/// Measured Z2 square evolution circuit at time `t`.
pub fn z2_square(t: f64) -> Circuit {
    let init = InitialState {
        label: "0000".into(),
        basis: Basis::X,
    };
    model_circuit(&GaugeModel::z2(1.0), Geometry::Square1, t, &init, Basis::X).expect("valid")
}

/// Measured Z2 two-plaquette evolution circuit at time `t`.
pub fn z2_two_plaquette(t: f64) -> Circuit {
    let init = InitialState {
        label: "000000".into(),
        basis: Basis::X,
    };
    model_circuit(&GaugeModel::z2(1.0), Geometry::TwoSquarePbc, t, &init, Basis::X).expect("valid")
}

/// A reduced Z2 square experiment: 4 times, 3 scale factors, 2 repetitions.
pub fn small_experiment() -> ExperimentConfig {
    ExperimentConfig::from_json(
        r#"{
            "model": "z2", "geometry": "square1", "g": 1.0,
            "times": {"start": 0.0, "stop": 3.0, "n": 4},
            "shots": 8192, "repetitions": 2, "scale_factors": [1, 2, 3],
            "initial_state": {"label": "0000", "basis": "x"},
            "observables": ["loschmidt:0000", "gauss:A"]
        }"#,
    )
    .expect("valid")
}
