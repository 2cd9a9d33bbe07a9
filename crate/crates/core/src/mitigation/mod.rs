//! Readout unfolding through a calibrated response matrix and zero-noise
//! extrapolation over CNOT-folded circuits.

mod readout;
mod zne;

pub use readout::{calibrate, mitigate_readout, project_to_simplex, ResponseMatrix, MAX_CALIBRATION_QUBITS};
pub use zne::{zne, ZneMethod, ZnePoint, ZneResult};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};

/// Scales the CNOT count to the attainable value nearest `lambda * N` by
/// inserting `CNOT . CNOT` pairs right after existing CNOTs, one pair per CNOT
/// in turn from the start of the circuit. Returns the folded circuit and the
/// achieved factor.
pub fn fold(c: &Circuit, lambda: f64) -> Result<(Circuit, f64)> {
    if !lambda.is_finite() || lambda < 1.0 {
        return Err(Error::InvalidScale(lambda));
    }
    let n = c.cnot_count();
    if n == 0 {
        return Err(Error::NothingToFold);
    }
    let pairs = ((lambda * n as f64 - n as f64) / 2.0).round() as usize;
    let mut extra = vec![pairs / n; n];
    for e in extra.iter_mut().take(pairs % n) {
        *e += 1;
    }
    let mut out = Circuit::new(c.n_qubits());
    for &a in c.ancillas() {
        out.mark_ancilla(a)?;
    }
    let mut k = 0;
    for &g in c.gates() {
        out.push(g)?;
        if let Gate::Cnot { .. } = g {
            for _ in 0..2 * extra[k] {
                out.push(g)?;
            }
            k += 1;
        }
    }
    let achieved = out.cnot_count() as f64 / n as f64;
    Ok((out, achieved))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::circuit_unitary;

    fn ten_cnots() -> Circuit {
        let mut c = Circuit::new(3);
        for k in 0..10 {
            c.push(Gate::Rz(k % 3, 0.1 * k as f64)).unwrap();
            c.push(Gate::Cnot { control: k % 3, target: (k + 1) % 3 }).unwrap();
        }
        c
    }

    #[test]
    fn folding_examples() {
        let c = ten_cnots();
        let (f, a) = fold(&c, 1.6).unwrap();
        assert_eq!(f.cnot_count(), 16);
        assert!((a - 1.6).abs() < 1e-15);
        let (f, _) = fold(&c, 3.0).unwrap();
        assert_eq!(f.cnot_count(), 30);
        let (f, a) = fold(&c, 1.0).unwrap();
        assert_eq!(f, c);
        assert_eq!(a, 1.0);
    }

    #[test]
    fn folding_keeps_unitary() {
        let c = ten_cnots();
        let u = circuit_unitary(&c).unwrap();
        for lambda in [1.3, 1.6, 2.0, 4.7, 8.0] {
            let (f, _) = fold(&c, lambda).unwrap();
            assert!(circuit_unitary(&f).unwrap().sub(&u).max_abs() < 1e-12);
        }
    }

    #[test]
    fn pairs_go_round_robin_from_the_start() {
        let c = ten_cnots();
        let (f, _) = fold(&c, 1.6).unwrap();
        // first three CNOTs each gain a pair: runs of three
        let runs: Vec<usize> = f
            .gates()
            .split(|g| !matches!(g, Gate::Cnot { .. }))
            .filter(|r| !r.is_empty())
            .map(|r| r.len())
            .collect();
        assert_eq!(runs, vec![3, 3, 3, 1, 1, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn folding_errors() {
        assert!(matches!(fold(&Circuit::new(2), 2.0), Err(Error::NothingToFold)));
        assert!(matches!(fold(&ten_cnots(), 0.5), Err(Error::InvalidScale(_))));
        assert!(matches!(fold(&ten_cnots(), f64::NAN), Err(Error::InvalidScale(_))));
    }
}
