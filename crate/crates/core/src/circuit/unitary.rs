use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use super::{Circuit, Gate};
use crate::dense::{DenseOperator, StateVector};
use crate::error::{Error, Result};

/// Largest circuit for which [`circuit_unitary`] builds a dense matrix.
pub const MAX_UNITARY_QUBITS: usize = 12;

#[inline]
fn apply_1q(amps: &mut [Complex64], q: usize, m: [[Complex64; 2]; 2]) {
    let bit = 1usize << q;
    for i in 0..amps.len() {
        if i & bit == 0 {
            let a0 = amps[i];
            let a1 = amps[i | bit];
            amps[i] = m[0][0] * a0 + m[0][1] * a1;
            amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
}

#[inline]
fn apply_phase(amps: &mut [Complex64], mask: usize, phase: Complex64) {
    for (i, a) in amps.iter_mut().enumerate() {
        if i & mask == mask {
            *a *= phase;
        }
    }
}

/// Applies a unitary gate in place. Measurements are ignored.
pub fn apply_gate(amps: &mut [Complex64], gate: &Gate) {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    match *gate {
        Gate::H(q) => {
            let h = c(FRAC_1_SQRT_2, 0.0);
            apply_1q(amps, q, [[h, h], [h, -h]]);
        }
        Gate::X(q) => {
            let bit = 1usize << q;
            for i in 0..amps.len() {
                if i & bit == 0 {
                    amps.swap(i, i | bit);
                }
            }
        }
        Gate::S(q) => apply_phase(amps, 1 << q, c(0.0, 1.0)),
        Gate::Sdg(q) => apply_phase(amps, 1 << q, c(0.0, -1.0)),
        Gate::Rx(q, theta) => {
            let (s, co) = (theta / 2.0).sin_cos();
            apply_1q(amps, q, [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]);
        }
        Gate::Rz(q, theta) => {
            let bit = 1usize << q;
            let lo = Complex64::from_polar(1.0, -theta / 2.0);
            let hi = Complex64::from_polar(1.0, theta / 2.0);
            for (i, a) in amps.iter_mut().enumerate() {
                *a *= if i & bit == 0 { lo } else { hi };
            }
        }
        Gate::Cnot { control, target } => {
            let cb = 1usize << control;
            let tb = 1usize << target;
            for i in 0..amps.len() {
                if i & cb != 0 && i & tb == 0 {
                    amps.swap(i, i | tb);
                }
            }
        }
        Gate::Cp(a, b, phi) => apply_phase(amps, (1 << a) | (1 << b), Complex64::from_polar(1.0, phi)),
        Gate::Measure { .. } => {}
    }
}

impl StateVector {
    /// Runs the unitary part of `circuit` on this state.
    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.n_qubits() != self.n_qubits() {
            return Err(Error::QubitMismatch {
                expected: circuit.n_qubits(),
                got: self.n_qubits(),
            });
        }
        let amps = self.amplitudes_mut();
        for g in circuit.gates() {
            apply_gate(amps, g);
        }
        Ok(())
    }
}

/// The product of the circuit's gate matrices, in gate order.
pub fn circuit_unitary(c: &Circuit) -> Result<DenseOperator> {
    if c.n_qubits() > MAX_UNITARY_QUBITS {
        return Err(Error::DimensionCap {
            what: "circuit unitary",
            n: c.n_qubits(),
            cap: MAX_UNITARY_QUBITS,
        });
    }
    if c.has_measurements() {
        return Err(Error::MeasurementPresent);
    }
    let n = c.n_qubits();
    let dim = 1usize << n;
    let mut u = DenseOperator::zeros(n);
    for col in 0..dim {
        let mut psi = StateVector::basis(n, col);
        psi.apply_circuit(c)?;
        for (row, a) in psi.amplitudes().iter().enumerate() {
            u[(row, col)] = *a;
        }
    }
    Ok(u)
}
