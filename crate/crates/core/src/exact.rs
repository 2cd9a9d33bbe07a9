//! Exact time evolution by full diagonalization: the ground-truth oracle for
//! every dynamics result in the crate.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::dense::{DenseOperator, StateVector};
use crate::error::{Error, Result};
use crate::pauli::{check_cap, PauliSum};

const HERMITIAN_TOL: f64 = 1e-12;

/// Eigen-decomposition `H = V diag(E) V^dagger` of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct Spectrum {
    n_qubits: usize,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
}

impl Spectrum {
    pub fn of_operator(op: &DenseOperator) -> Result<Self> {
        check_cap(op.n_qubits())?;
        let deviation = op.hermiticity_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let eig = SymmetricEigen::new(op.to_nalgebra());
        Ok(Self {
            n_qubits: op.n_qubits(),
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn of_sum(h: &PauliSum) -> Result<Self> {
        Self::of_operator(&h.to_matrix()?)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Column `k` is the eigenvector for `eigenvalues()[k]`.
    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigenvectors
    }

    /// `e^{-iHt} |psi>` as `sum_n e^{-i E_n t} c_n |psi_n>` with `c_n = <psi_n|psi>`.
    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        if psi.n_qubits() != self.n_qubits {
            return Err(Error::QubitMismatch {
                expected: self.n_qubits,
                got: psi.n_qubits(),
            });
        }
        let v = &self.eigenvectors;
        let mut overlaps = v.adjoint() * psi.to_nalgebra();
        for (c, e) in overlaps.iter_mut().zip(&self.eigenvalues) {
            *c *= Complex64::from_polar(1.0, -e * t);
        }
        let out = v * overlaps;
        Ok(StateVector::from_raw(
            self.n_qubits,
            out.iter().copied().collect(),
        ))
    }

    /// The full propagator `e^{-iHt}`.
    pub fn propagator(&self, t: f64) -> DenseOperator {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, e) in self.eigenvalues.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, -e * t);
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= phase);
        }
        DenseOperator::from_nalgebra(self.n_qubits, &(scaled * v.adjoint()))
    }
}

type Cache = RwLock<HashMap<String, Arc<Spectrum>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Spectrum of `h`, computed once per distinct Hamiltonian and shared afterwards.
pub fn spectrum(h: &PauliSum) -> Result<Arc<Spectrum>> {
    let key = h.cache_key();
    if let Some(s) = cache().read().expect("spectrum cache poisoned").get(&key) {
        return Ok(Arc::clone(s));
    }
    let s = Arc::new(Spectrum::of_sum(h)?);
    let mut guard = cache().write().expect("spectrum cache poisoned");
    Ok(Arc::clone(guard.entry(key).or_insert(s)))
}

/// `e^{-iHt} |psi0>`.
pub fn exact_evolve(h: &PauliSum, psi0: &StateVector, t: f64) -> Result<StateVector> {
    if psi0.n_qubits() != h.n_qubits() {
        return Err(Error::QubitMismatch {
            expected: h.n_qubits(),
            got: psi0.n_qubits(),
        });
    }
    spectrum(h)?.evolve(psi0, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::loschmidt;
    use crate::pauli::PauliTerm;

    #[test]
    fn zero_time_is_identity() {
        let h = PauliSum::from_term(PauliTerm::parse(-1.3, "XYZ").unwrap());
        let psi = StateVector::basis(3, 5);
        let out = exact_evolve(&h, &psi, 0.0).unwrap();
        assert!((loschmidt(&psi, &out).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvectors_are_orthonormal() {
        let h = PauliSum::new(
            3,
            [
                PauliTerm::parse(0.4, "XXI").unwrap(),
                PauliTerm::parse(-0.9, "ZIZ").unwrap(),
                PauliTerm::parse(0.2, "IYY").unwrap(),
            ],
        )
        .unwrap();
        let s = Spectrum::of_sum(&h).unwrap();
        let v = s.eigenvectors();
        let gram = v.adjoint() * v;
        for i in 0..8 {
            for j in 0..8 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - Complex64::new(want, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut op = DenseOperator::zeros(1);
        op[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(matches!(
            Spectrum::of_operator(&op),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn single_z_phase() {
        let h = PauliSum::from_term(PauliTerm::parse(1.0, "Z").unwrap());
        let out = exact_evolve(&h, &StateVector::basis(1, 0), 0.7).unwrap();
        let want = Complex64::from_polar(1.0, -0.7);
        assert!((out.amplitudes()[0] - want).norm() < 1e-12);
    }
}
