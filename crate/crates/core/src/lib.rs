//! Real-time dynamics of Z2 and U(1) plaquette gauge models on simulated
//! noisy quantum hardware.
//!
//! The crate builds plaquette Hamiltonians ([`models`]), compiles them into
//! ancilla-mediated evolution circuits ([`circuit`]), routes those circuits
//! onto small coupling graphs ([`transpile`]), executes them on a
//! trajectory-based noisy statevector simulator ([`sim`]), applies readout
//! and zero-noise-extrapolation mitigation ([`mitigation`]) and checks
//! everything against exact diagonalization ([`exact`]). The [`harness`]
//! module ties the pieces into a reproducible experiment pipeline.

pub mod circuit;
pub mod dense;
pub mod error;
pub mod exact;
pub mod harness;
pub mod mitigation;
pub mod models;
pub mod pauli;
pub mod seed;
pub mod sim;
pub mod transpile;

pub use dense::{loschmidt, DenseOperator, StateVector};
pub use error::{Error, Result};
pub use exact::{exact_evolve, Spectrum};
pub use models::{Basis, Convention, GaugeModel, Geometry, Group, SectorSpec};
pub use pauli::{commutes, term_to_matrix, Pauli, PauliSum, PauliTerm};
pub use circuit::{compile_evolution, model_circuit, BlockForm, Circuit, Gate, InitialState};
pub use harness::{run_experiment, ExperimentConfig, Observable, ResultRow, ResultTable};
pub use mitigation::{calibrate, fold, mitigate_readout, zne, ResponseMatrix, ZneMethod, ZneResult};
pub use seed::derive_seed;
pub use sim::{run_ideal, run_noisy, Counts, Engine, NoiseModel};
pub use transpile::{transpile, volume_report, Layout, Topology, VolumeReport};
