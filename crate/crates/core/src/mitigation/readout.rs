use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::seed::derive_seed;
use crate::sim::{run_noisy, NoiseModel};

/// Calibration needs `2^n` experiments; larger registers are refused.
pub const MAX_CALIBRATION_QUBITS: usize = 6;

const MAX_ITERATIONS: usize = 10_000;
const TOLERANCE: f64 = 1e-12;

/// Column-stochastic matrix `P` with `P[i][j]` = probability of reading `i`
/// when the true outcome is `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResponseMatrix {
    pub n: usize,
    /// Row-major entries.
    pub values: Vec<f64>,
}

impl ResponseMatrix {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        let m = Self { n, values };
        m.validate()?;
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        let dim = 1 << n;
        let mut values = vec![0.0; dim * dim];
        for i in 0..dim {
            values[i * dim + i] = 1.0;
        }
        Self { n, values }
    }

    /// Kronecker product of per-qubit matrices `[[1-e01, e10], [e01, 1-e10]]`,
    /// qubit 0 acting on the lowest bit.
    pub fn from_flip_rates(rates: &[(f64, f64)]) -> Result<Self> {
        let n = rates.len();
        let dim = 1usize << n;
        let mut values = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                values[i * dim + j] = rates
                    .iter()
                    .enumerate()
                    .map(|(q, &(e01, e10))| match ((i >> q) & 1, (j >> q) & 1) {
                        (0, 0) => 1.0 - e01,
                        (1, 0) => e01,
                        (0, 1) => e10,
                        _ => 1.0 - e10,
                    })
                    .product();
            }
        }
        Self::new(n, values)
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.dim() + j]
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.dim();
        if self.values.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: self.values.len(),
            });
        }
        if let Some(&v) = self.values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidProbability {
                name: "response entry",
                value: v,
            });
        }
        for j in 0..dim {
            let s: f64 = (0..dim).map(|i| self.get(i, j)).sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidProbability {
                    name: "response column sum",
                    value: s,
                });
            }
        }
        Ok(())
    }

    /// `P t`.
    pub fn apply(&self, t: &[f64]) -> Vec<f64> {
        let dim = self.dim();
        (0..dim)
            .map(|i| (0..dim).map(|j| self.get(i, j) * t[j]).sum())
            .collect()
    }

    fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim(), self.dim(), &self.values)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: ResponseMatrix =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("response matrix: {e}")))?;
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Measures each of the `2^n` basis states under the readout part of `noise`
/// and stores the normalized counts as columns.
pub fn calibrate(n: usize, noise: &NoiseModel, shots: u64, seed: u64) -> Result<ResponseMatrix> {
    if n == 0 || n > MAX_CALIBRATION_QUBITS {
        return Err(Error::DimensionCap {
            what: "calibration",
            n,
            cap: MAX_CALIBRATION_QUBITS,
        });
    }
    let readout = noise.readout_only();
    let dim = 1usize << n;
    let columns = (0..dim)
        .into_par_iter()
        .map(|j| {
            let mut c = Circuit::new(n);
            for q in (0..n).filter(|q| (j >> q) & 1 == 1) {
                c.push(Gate::X(q))?;
            }
            for q in 0..n {
                c.push(Gate::Measure { qubit: q, cbit: q })?;
            }
            let counts = run_noisy(&c, &readout, shots, derive_seed(seed, &[j as u64]))?;
            Ok(counts.distribution())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut values = vec![0.0; dim * dim];
    for (j, col) in columns.iter().enumerate() {
        for (i, &p) in col.iter().enumerate() {
            values[i * dim + j] = p;
        }
    }
    ResponseMatrix::new(n, values)
}

/// Euclidean projection onto `{t : t >= 0, sum t = 1}`.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, &x) in u.iter().enumerate() {
        cumulative += x;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if x - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

fn objective(p: &DMatrix<f64>, m: &DVector<f64>, t: &DVector<f64>) -> f64 {
    (m - p * t).norm_squared()
}

/// Solves `min ||m - P_S t_S||^2` subject to `sum t_S = 1` on the support `S`.
fn solve_on_support(p: &DMatrix<f64>, m: &DVector<f64>, support: &[usize]) -> Option<DVector<f64>> {
    let k = support.len();
    let ps = p.select_columns(support);
    let mut kkt = DMatrix::zeros(k + 1, k + 1);
    kkt.view_mut((0, 0), (k, k)).copy_from(&(ps.transpose() * &ps * 2.0));
    for i in 0..k {
        kkt[(i, k)] = 1.0;
        kkt[(k, i)] = 1.0;
    }
    let mut rhs = DVector::zeros(k + 1);
    rhs.rows_mut(0, k).copy_from(&(ps.transpose() * m * 2.0));
    rhs[k] = 1.0;
    let sol = kkt.lu().solve(&rhs)?;
    let mut t = DVector::zeros(p.ncols());
    for (i, &s) in support.iter().enumerate() {
        t[s] = sol[i];
    }
    Some(t)
}

/// First-order optimality on the simplex: the gradient is minimal and equal
/// on the support.
fn is_kkt_point(p: &DMatrix<f64>, m: &DVector<f64>, t: &DVector<f64>) -> bool {
    if t.iter().any(|&x| x < 0.0) || (t.sum() - 1.0).abs() > 1e-9 {
        return false;
    }
    let grad = p.transpose() * (p * t - m) * 2.0;
    let scale = 1e-9 * (1.0 + grad.amax());
    let support: Vec<usize> = (0..t.len()).filter(|&i| t[i] > 0.0).collect();
    let nu = support.iter().map(|&i| grad[i]).fold(f64::INFINITY, f64::min);
    support.iter().all(|&i| (grad[i] - nu).abs() <= scale)
        && (0..t.len()).all(|i| grad[i] >= nu - scale)
}

/// The probability vector `t` minimizing `sum_i (m_i - (P t)_i)^2`.
///
/// Accelerated projected gradient runs until the objective changes by less
/// than `1e-12` (at most `10^4` iterations); the support it finds is then
/// polished with an exact equality-constrained solve.
pub fn mitigate_readout(m: &[f64], response: &ResponseMatrix) -> Result<Vec<f64>> {
    let dim = response.dim();
    if m.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: m.len(),
        });
    }
    let p = response.matrix();
    let mv = DVector::from_column_slice(m);
    // 2 ||P||_2^2 bounds the gradient's Lipschitz constant
    let lipschitz = 2.0 * p.singular_values().max().powi(2);
    let step = 1.0 / lipschitz.max(f64::MIN_POSITIVE);

    let mut t = DVector::from_vec(project_to_simplex(m));
    let mut y = t.clone();
    let mut momentum = 1.0f64;
    let mut last = objective(&p, &mv, &t);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let grad = p.transpose() * (&p * &y - &mv) * 2.0;
        let next = DVector::from_vec(project_to_simplex((&y - grad * step).as_slice()));
        let next_momentum = (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt()) / 2.0;
        y = &next + (&next - &t) * ((momentum - 1.0) / next_momentum);
        momentum = next_momentum;
        t = next;
        let f = objective(&p, &mv, &t);
        if (last - f).abs() < TOLERANCE {
            converged = true;
            break;
        }
        last = f;
    }

    let support: Vec<usize> = (0..dim).filter(|&i| t[i] > 1e-10).collect();
    if let Some(polished) = solve_on_support(&p, &mv, &support) {
        if polished.iter().all(|&x| x >= 0.0)
            && objective(&p, &mv, &polished) <= objective(&p, &mv, &t) + 1e-15
        {
            t = polished;
        }
    }
    if !converged && !is_kkt_point(&p, &mv, &t) {
        return Err(Error::NoConvergence { iterations });
    }
    let mut out: Vec<f64> = t.iter().map(|&x| x.max(0.0)).collect();
    let s: f64 = out.iter().sum();
    out.iter_mut().for_each(|x| *x /= s);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_simplex(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let v: Vec<f64> = (0..dim).map(|_| -rng.random::<f64>().ln()).collect();
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    }

    #[test]
    fn projection_basics() {
        assert_eq!(project_to_simplex(&[0.2, 0.8]), vec![0.2, 0.8]);
        let p = project_to_simplex(&[2.0, 0.0]);
        assert_eq!(p, vec![1.0, 0.0]);
        let p = project_to_simplex(&[-1.0, 0.5, 0.5, 0.4]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn identity_response_returns_input() {
        let m = vec![0.1, 0.2, 0.3, 0.4];
        let t = mitigate_readout(&m, &ResponseMatrix::identity(2)).unwrap();
        for (a, b) in t.iter().zip(&m) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_synthetic_recovery() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = ResponseMatrix::from_flip_rates(&[(0.05, 0.08), (0.03, 0.1), (0.07, 0.02)]).unwrap();
        for _ in 0..20 {
            let truth = random_simplex(8, &mut rng);
            let t = mitigate_readout(&p.apply(&truth), &p).unwrap();
            for (a, b) in t.iter().zip(&truth) {
                assert!((a - b).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn negative_naive_inverse_still_gives_distribution() {
        let p = ResponseMatrix::from_flip_rates(&[(0.3, 0.3), (0.3, 0.3)]).unwrap();
        let m = vec![0.0, 0.0, 0.0, 1.0];
        let naive = p.matrix().try_inverse().unwrap() * DVector::from_column_slice(&m);
        assert!(naive.iter().any(|&x| x < 0.0) || naive.iter().any(|&x| x > 1.0));
        let t = mitigate_readout(&m, &p).unwrap();
        assert!(t.iter().all(|&x| x >= 0.0));
        assert!((t.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let resid = |v: &[f64]| -> f64 { p.apply(v).iter().zip(&m).map(|(a, b)| (a - b).powi(2)).sum() };
        assert!(resid(&t) <= resid(&m));
    }

    #[test]
    fn kronecker_columns_sum_to_one() {
        let p = ResponseMatrix::from_flip_rates(&[(0.1, 0.2)]).unwrap();
        assert_eq!(p.values, vec![0.9, 0.2, 0.1, 0.8]);
        assert!(ResponseMatrix::new(1, vec![0.9, 0.2, 0.2, 0.8]).is_err());
        assert!(mitigate_readout(&[1.0], &p).is_err());
    }

    #[test]
    fn json_round_trip() {
        let p = ResponseMatrix::from_flip_rates(&[(0.1, 0.2), (0.0, 0.05)]).unwrap();
        assert_eq!(ResponseMatrix::from_json(&p.to_json()).unwrap(), p);
        assert!(ResponseMatrix::from_json(r#"{"n":1,"values":[1,0,0,1],"extra":0}"#).is_err());
    }

    #[test]
    fn calibration_without_noise_is_identity() {
        let p = calibrate(2, &NoiseModel::ideal(), 1000, 1).unwrap();
        assert_eq!(p, ResponseMatrix::identity(2));
        assert!(calibrate(7, &NoiseModel::ideal(), 10, 1).is_err());
    }
}
