//! Dense operators and state vectors over `2^n` computational-basis amplitudes.

use std::ops::{Index, IndexMut};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-10;

/// A `2^n x 2^n` complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    n_qubits: usize,
    dim: usize,
    data: Vec<Complex64>,
}

impl DenseOperator {
    pub fn zeros(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self {
            n_qubits,
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(n_qubits: usize) -> Self {
        let mut op = Self::zeros(n_qubits);
        for i in 0..op.dim {
            op[(i, i)] = Complex64::new(1.0, 0.0);
        }
        op
    }

    /// Builds from row-major entries; `entries.len()` must be `4^n`.
    pub fn from_row_major(n_qubits: usize, entries: Vec<Complex64>) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        Ok(Self {
            n_qubits,
            dim,
            data: entries,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matmul(&self, rhs: &DenseOperator) -> DenseOperator {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let d = self.dim;
        let mut out = DenseOperator::zeros(self.n_qubits);
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = &rhs.data[k * d..(k + 1) * d];
                let dst = &mut out.data[i * d..(i + 1) * d];
                for (o, b) in dst.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn sub(&self, rhs: &DenseOperator) -> DenseOperator {
        assert_eq!(self.dim, rhs.dim, "sub dimension mismatch");
        DenseOperator {
            n_qubits: self.n_qubits,
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> DenseOperator {
        DenseOperator {
            n_qubits: self.n_qubits,
            dim: self.dim,
            data: self.data.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn adjoint(&self) -> DenseOperator {
        let d = self.dim;
        let mut out = DenseOperator::zeros(self.n_qubits);
        for i in 0..d {
            for j in 0..d {
                out.data[j * d + i] = self.data[i * d + j].conj();
            }
        }
        out
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |A - A^dagger|` over entries.
    pub fn hermiticity_deviation(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.data[i * d + j] - self.data[j * d + i].conj()).norm());
            }
        }
        worst
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: psi.dim(),
            });
        }
        let d = self.dim;
        let amps = (0..d)
            .map(|i| {
                self.data[i * d..(i + 1) * d]
                    .iter()
                    .zip(psi.amplitudes())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect();
        Ok(StateVector::from_raw(self.n_qubits, amps))
    }

    /// `<psi| A |psi>`.
    pub fn expectation(&self, psi: &StateVector) -> Result<Complex64> {
        let a_psi = self.apply(psi)?;
        Ok(psi.inner(&a_psi))
    }

    /// Restriction to the span of the given basis indices: `A[basis[i], basis[j]]`.
    pub fn restrict(&self, basis: &[usize]) -> Vec<Vec<Complex64>> {
        basis
            .iter()
            .map(|&r| basis.iter().map(|&c| self[(r, c)]).collect())
            .collect()
    }

    /// Smallest `max |A - e^{i theta} B|` over global phases, using the phase
    /// that aligns the largest entry of `B`.
    pub fn distance_up_to_phase(&self, other: &DenseOperator) -> f64 {
        let (idx, _) = other
            .data
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .expect("non-empty operator");
        let b = other.data[idx];
        let a = self.data[idx];
        if b.norm() == 0.0 || a.norm() == 0.0 {
            return self.sub(other).max_abs();
        }
        let phase = (a / b) / (a / b).norm();
        self.sub(&other.scale(phase)).max_abs()
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    pub(crate) fn from_nalgebra(n_qubits: usize, m: &DMatrix<Complex64>) -> Self {
        let dim = m.nrows();
        let mut out = Self::zeros(n_qubits);
        for i in 0..dim {
            for j in 0..dim {
                out.data[i * dim + j] = m[(i, j)];
            }
        }
        out
    }
}

impl Index<(usize, usize)> for DenseOperator {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for DenseOperator {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.dim + c]
    }
}

/// A normalized pure state. Amplitude index bit `q` is the state of qubit `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Validates length and norm (within 1e-10).
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: len.next_power_of_two().max(1),
                got: len,
            });
        }
        let psi = Self::from_raw(len.trailing_zeros() as usize, amplitudes);
        let norm = psi.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidLabel {
                label: format!("{len} amplitudes"),
                reason: format!("state norm {norm} is not 1"),
            });
        }
        Ok(psi)
    }

    pub(crate) fn from_raw(n_qubits: usize, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1usize << n_qubits);
        Self {
            n_qubits,
            amplitudes,
        }
    }

    /// Computational basis state `|index>`.
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << n_qubits];
        amps[index] = Complex64::new(1.0, 0.0);
        Self::from_raw(n_qubits, amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Tensor product `self (x) low`, where `low` occupies the low-order qubits.
    pub fn tensor(&self, low: &StateVector) -> StateVector {
        let mut amps = Vec::with_capacity(self.dim() * low.dim());
        for a in &self.amplitudes {
            for b in &low.amplitudes {
                amps.push(a * b);
            }
        }
        StateVector::from_raw(self.n_qubits + low.n_qubits, amps)
    }

    pub(crate) fn to_nalgebra(&self) -> DVector<Complex64> {
        DVector::from_column_slice(&self.amplitudes)
    }
}

/// Return probability `|<psi0|psit>|^2`, clamped to `[0, 1]`.
pub fn loschmidt(psi0: &StateVector, psit: &StateVector) -> Result<f64> {
    if psi0.dim() != psit.dim() {
        return Err(Error::DimensionMismatch {
            expected: psi0.dim(),
            got: psit.dim(),
        });
    }
    Ok(psi0.inner(psit).norm_sqr().clamp(0.0, 1.0))
}
