//! Statevector execution, shot sampling and noisy runs with two-qubit
//! depolarizing errors and per-qubit readout flips.
//!
//! Two engines produce the same outcome law. [`Engine::Trajectory`] follows
//! Pauli-error trajectories, batching shots that share an error history: after
//! every two-qubit gate a branch holding `k` shots splits off
//! `Binomial(k, p2)` of them, spread uniformly over the 15 non-identity
//! two-qubit Paulis. [`Engine::Channel`] evolves the density matrix through
//! the same depolarizing channel. Either way the shots are then drawn from the
//! resulting distribution after the readout flips have been applied to it.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::circuit::{apply_gate, Circuit, Gate};
use crate::dense::StateVector;
use crate::error::{Error, Result};
use crate::models::{diagonal_value, format_label, Basis};
use crate::pauli::PauliSum;
use crate::seed::derive_seed;

pub const MAX_STATEVECTOR_QUBITS: usize = 20;
/// Largest register the density-matrix engine accepts.
pub const MAX_CHANNEL_QUBITS: usize = 10;

const NOISE_STREAM: u64 = 0x6e6f_6973;
const BRANCH_STREAM: u64 = 0x6272_616e;

/// Depolarizing probability per two-qubit gate and readout flip rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    pub p2: f64,
    /// P(read 1 | true 0).
    pub e01: f64,
    /// P(read 0 | true 1).
    pub e10: f64,
    /// Optional `(e01, e10)` per physical qubit, overriding the defaults.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_qubit: Vec<(f64, f64)>,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            p2: 0.02,
            e01: 0.02,
            e10: 0.02,
            per_qubit: Vec::new(),
        }
    }
}

impl NoiseModel {
    pub fn ideal() -> Self {
        Self::new(0.0, 0.0, 0.0).expect("valid")
    }

    pub fn new(p2: f64, e01: f64, e10: f64) -> Result<Self> {
        let m = Self {
            p2,
            e01,
            e10,
            per_qubit: Vec::new(),
        };
        m.validate()?;
        Ok(m)
    }

    /// The same readout errors without gate noise.
    pub fn readout_only(&self) -> Self {
        Self {
            p2: 0.0,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &'static str, value: f64| {
            if (0.0..=1.0).contains(&value) {
                Ok(())
            } else {
                Err(Error::InvalidProbability { name, value })
            }
        };
        check("p2", self.p2)?;
        check("e01", self.e01)?;
        check("e10", self.e10)?;
        for &(a, b) in &self.per_qubit {
            check("e01", a)?;
            check("e10", b)?;
        }
        Ok(())
    }

    pub fn readout_for(&self, qubit: usize) -> (f64, f64) {
        self.per_qubit
            .get(qubit)
            .copied()
            .unwrap_or((self.e01, self.e10))
    }

    pub fn has_readout_error(&self) -> bool {
        self.e01 != 0.0 || self.e10 != 0.0 || self.per_qubit.iter().any(|&(a, b)| a != 0.0 || b != 0.0)
    }
}

/// Outcome histogram over classical bits; bitstrings print bit 0 rightmost.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Counts {
    n_bits: usize,
    map: BTreeMap<usize, u64>,
}

impl Counts {
    pub fn new(n_bits: usize) -> Self {
        Self {
            n_bits,
            map: BTreeMap::new(),
        }
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn add(&mut self, outcome: usize, count: u64) {
        assert!(outcome < 1 << self.n_bits, "outcome {outcome} out of range");
        if count > 0 {
            *self.map.entry(outcome).or_insert(0) += count;
        }
    }

    pub fn get(&self, outcome: usize) -> u64 {
        self.map.get(&outcome).copied().unwrap_or(0)
    }

    pub fn shots(&self) -> u64 {
        self.map.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.map.iter().map(|(&k, &v)| (k, v))
    }

    /// Relative frequencies as a dense vector of length `2^n_bits`.
    pub fn distribution(&self) -> Vec<f64> {
        let mut out = vec![0.0; 1 << self.n_bits];
        let total = self.shots() as f64;
        if total > 0.0 {
            for (k, v) in self.iter() {
                out[k] = v as f64 / total;
            }
        }
        out
    }

    pub fn merge(&mut self, other: &Counts) -> Result<()> {
        if other.n_bits != self.n_bits {
            return Err(Error::DimensionMismatch {
                expected: self.n_bits,
                got: other.n_bits,
            });
        }
        for (k, v) in other.iter() {
            self.add(k, v);
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let m: BTreeMap<String, u64> = self
            .iter()
            .map(|(k, v)| (format_label(k, self.n_bits), v))
            .collect();
        serde_json::to_string_pretty(&m).expect("string keys")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: BTreeMap<String, u64> =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("counts: {e}")))?;
        let n_bits = m.keys().next().map_or(0, |k| k.len());
        let mut c = Counts::new(n_bits);
        for (k, v) in m {
            if k.len() != n_bits || !k.chars().all(|ch| ch == '0' || ch == '1') {
                return Err(Error::Config(format!("counts: bad bitstring {k:?}")));
            }
            c.add(usize::from_str_radix(&k, 2).expect("binary"), v);
        }
        Ok(c)
    }
}

/// Final state of the unitary part of `c` from `|0...0>`.
pub fn run_ideal(c: &Circuit) -> Result<StateVector> {
    cap(c.n_qubits(), MAX_STATEVECTOR_QUBITS, "statevector")?;
    let mut psi = StateVector::basis(c.n_qubits(), 0);
    psi.apply_circuit(c)?;
    Ok(psi)
}

fn cap(n: usize, cap: usize, what: &'static str) -> Result<()> {
    if n > cap {
        return Err(Error::DimensionCap { what, n, cap });
    }
    Ok(())
}

/// Multinomial draw by sequential conditional binomials.
fn draw(dist: &[f64], shots: u64, rng: &mut ChaCha8Rng) -> Vec<(usize, u64)> {
    let mut out = Vec::new();
    let mut remaining = shots;
    let mut mass: f64 = dist.iter().sum();
    let last = dist.iter().rposition(|&p| p > 0.0);
    for (i, &p) in dist.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if p <= 0.0 {
            continue;
        }
        let k = if Some(i) == last {
            remaining
        } else {
            let q = (p / mass).clamp(0.0, 1.0);
            Binomial::new(remaining, q).expect("valid p").sample(rng)
        };
        if k > 0 {
            out.push((i, k));
        }
        remaining -= k;
        mass -= p;
    }
    out
}

/// I.i.d. measurements of every qubit (qubit `q` into bit `q`).
pub fn sample(state: &StateVector, shots: u64, seed: u64) -> Counts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = Counts::new(state.n_qubits());
    for (k, v) in draw(&state.probabilities(), shots, &mut rng) {
        counts.add(k, v);
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    /// Channel evolution when the register is small enough, else trajectories.
    #[default]
    Auto,
    Trajectory,
    Channel,
}

/// How measured qubits map onto the outcome register.
struct Readout {
    pairs: Vec<(usize, usize)>,
    n_bits: usize,
}

impl Readout {
    fn of(c: &Circuit) -> Result<Self> {
        let pairs = c.measurements();
        if pairs.is_empty() {
            return Err(Error::InvalidGate("circuit has no measurements".into()));
        }
        Ok(Readout {
            n_bits: c.n_cbits(),
            pairs,
        })
    }

    fn outcome(&self, index: usize) -> usize {
        self.pairs
            .iter()
            .fold(0, |o, &(q, b)| o | ((index >> q) & 1) << b)
    }

    /// Distribution over outcomes from basis-state probabilities, with the
    /// readout flips applied.
    fn distribution(&self, probs: impl Iterator<Item = (usize, f64)>, noise: &NoiseModel) -> Vec<f64> {
        let mut d = vec![0.0; 1 << self.n_bits];
        for (i, p) in probs {
            d[self.outcome(i)] += p;
        }
        for &(q, b) in &self.pairs {
            let (e01, e10) = noise.readout_for(q);
            if e01 == 0.0 && e10 == 0.0 {
                continue;
            }
            let bit = 1usize << b;
            for o in 0..d.len() {
                if o & bit == 0 {
                    let (p0, p1) = (d[o], d[o | bit]);
                    d[o] = (1.0 - e01) * p0 + e10 * p1;
                    d[o | bit] = e01 * p0 + (1.0 - e10) * p1;
                }
            }
        }
        d
    }
}

/// Noisy execution of `c` for `shots` shots. Deterministic per seed; with
/// `p2 = 0` and no readout error it reproduces [`sample`] of [`run_ideal`]
/// for the same seed when every qubit `q` is measured into bit `q`.
pub fn run_noisy(c: &Circuit, noise: &NoiseModel, shots: u64, seed: u64) -> Result<Counts> {
    run_noisy_with(c, noise, shots, seed, Engine::Auto)
}

pub fn run_noisy_with(
    c: &Circuit,
    noise: &NoiseModel,
    shots: u64,
    seed: u64,
    engine: Engine,
) -> Result<Counts> {
    noise.validate()?;
    let readout = Readout::of(c)?;
    let engine = match engine {
        _ if noise.p2 == 0.0 => Engine::Trajectory,
        Engine::Auto if c.n_qubits() <= MAX_CHANNEL_QUBITS => Engine::Channel,
        Engine::Auto => Engine::Trajectory,
        e => e,
    };
    let mut counts = Counts::new(readout.n_bits);
    match engine {
        Engine::Channel => {
            let rho = DensityMatrix::evolve(c, noise.p2)?;
            let d = readout.distribution(rho.diagonal().enumerate(), noise);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for (k, v) in draw(&d, shots, &mut rng) {
                counts.add(k, v);
            }
        }
        _ => {
            cap(c.n_qubits(), MAX_STATEVECTOR_QUBITS, "statevector")?;
            let mut walk = Walk {
                gates: c.gates(),
                noise,
                readout: &readout,
                seed,
                noise_rng: ChaCha8Rng::seed_from_u64(derive_seed(seed, &[NOISE_STREAM])),
                branches: 0,
                counts: &mut counts,
            };
            let psi = StateVector::basis(c.n_qubits(), 0);
            let mut amps = psi.amplitudes().to_vec();
            walk.branch(&mut amps, 0, shots);
        }
    }
    Ok(counts)
}

struct Walk<'a> {
    gates: &'a [Gate],
    noise: &'a NoiseModel,
    readout: &'a Readout,
    seed: u64,
    noise_rng: ChaCha8Rng,
    branches: u64,
    counts: &'a mut Counts,
}

impl Walk<'_> {
    fn branch(&mut self, amps: &mut [Complex64], start: usize, mut shots: u64) {
        let id = self.branches;
        self.branches += 1;
        for (i, g) in self.gates.iter().enumerate().skip(start) {
            apply_gate(amps, g);
            if !g.is_two_qubit() || self.noise.p2 == 0.0 {
                continue;
            }
            let hit = Binomial::new(shots, self.noise.p2)
                .expect("valid p")
                .sample(&mut self.noise_rng);
            if hit == 0 {
                continue;
            }
            shots -= hit;
            let mut per_pauli = [0u64; 16];
            for _ in 0..hit {
                per_pauli[self.noise_rng.random_range(1..16)] += 1;
            }
            let q = g.qubits();
            for (p, &k) in per_pauli.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let mut child = amps.to_vec();
                apply_pauli(&mut child, q[0], p & 3);
                apply_pauli(&mut child, q[1], p >> 2);
                self.branch(&mut child, i + 1, k);
            }
            if shots == 0 {
                return;
            }
        }
        let d = self.readout.distribution(
            amps.iter().map(|a| a.norm_sqr()).enumerate(),
            self.noise,
        );
        let seed = if id == 0 {
            self.seed
        } else {
            derive_seed(self.seed, &[BRANCH_STREAM, id])
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (k, v) in draw(&d, shots, &mut rng) {
            self.counts.add(k, v);
        }
    }
}

/// Applies I, X, Y or Z (codes 0..4) to qubit `q`.
fn apply_pauli(amps: &mut [Complex64], q: usize, code: usize) {
    let bit = 1usize << q;
    match code {
        0 => {}
        1 => apply_gate(amps, &Gate::X(q)),
        2 => {
            // Y = i X Z
            for i in 0..amps.len() {
                if i & bit == 0 {
                    let (a0, a1) = (amps[i], amps[i | bit]);
                    amps[i] = Complex64::new(0.0, -1.0) * a1;
                    amps[i | bit] = Complex64::new(0.0, 1.0) * a0;
                }
            }
        }
        3 => {
            for (i, a) in amps.iter_mut().enumerate() {
                if i & bit != 0 {
                    *a = -*a;
                }
            }
        }
        _ => unreachable!("Pauli code {code}"),
    }
}

/// Density matrix stored as a vector on `2n` qubits: column index in the low
/// `n` bits, row index in the high `n` bits.
pub struct DensityMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn pure(psi: &StateVector) -> Result<Self> {
        let n = psi.n_qubits();
        cap(n, MAX_CHANNEL_QUBITS, "density matrix")?;
        let a = psi.amplitudes();
        let dim = a.len();
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                data[r * dim + c] = a[r] * a[c].conj();
            }
        }
        Ok(Self { n, data })
    }

    /// Runs `c` from `|0...0>` with depolarizing probability `p2` after every
    /// two-qubit gate.
    pub fn evolve(c: &Circuit, p2: f64) -> Result<Self> {
        let mut rho = Self::pure(&StateVector::basis(c.n_qubits(), 0))?;
        for g in c.gates() {
            if g.is_measurement() {
                continue;
            }
            rho.apply(g);
            if g.is_two_qubit() && p2 > 0.0 {
                let q = g.qubits();
                rho.depolarize(q[0], q[1], p2);
            }
        }
        Ok(rho)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[(r << self.n) | c]
    }

    pub fn diagonal(&self) -> impl Iterator<Item = f64> + '_ {
        let dim = 1usize << self.n;
        (0..dim).map(move |i| self.data[i * dim + i].re)
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().sum()
    }

    /// `U rho U^dagger`.
    pub fn apply(&mut self, g: &Gate) {
        let n = self.n;
        apply_gate(&mut self.data, &g.remap(|q| q + n));
        apply_gate(&mut self.data, &conjugate(g));
    }

    /// `(1 - p) rho + p/15 sum_{P != II} P rho P` on qubits `a`, `b`.
    pub fn depolarize(&mut self, a: usize, b: usize, p: f64) {
        // sum over all 16 Paulis is 4 Tr_ab(rho) (x) I
        let keep = 1.0 - 16.0 * p / 15.0;
        let mix = 4.0 * p / 15.0;
        let n = self.n;
        let col = [0, 1 << a, 1 << b, (1 << a) | (1 << b)];
        let row = col.map(|m| m << n);
        let mask = row[3] | col[3];
        for base in 0..self.data.len() {
            if base & mask != 0 {
                continue;
            }
            let s: Complex64 = (0..4).map(|x| self.data[base | row[x] | col[x]]).sum();
            for x in 0..4 {
                for y in 0..4 {
                    let i = base | row[x] | col[y];
                    self.data[i] *= keep;
                    if x == y {
                        self.data[i] += mix * s;
                    }
                }
            }
        }
    }
}

fn conjugate(g: &Gate) -> Gate {
    match *g {
        Gate::S(q) => Gate::Sdg(q),
        Gate::Sdg(q) => Gate::S(q),
        Gate::Rx(q, t) => Gate::Rx(q, -t),
        Gate::Rz(q, t) => Gate::Rz(q, -t),
        Gate::Cp(a, b, t) => Gate::Cp(a, b, -t),
        other => other,
    }
}

/// `sum_s value(s) * dist[s]` for an operator diagonal in `basis`, where `dist`
/// is indexed by outcome bitstrings of the operator's qubits.
pub fn expectation_of_distribution(dist: &[f64], obs: &PauliSum, basis: Basis) -> Result<f64> {
    if dist.len() != 1 << obs.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: 1 << obs.n_qubits(),
            got: dist.len(),
        });
    }
    let mut total = 0.0;
    for (i, &p) in dist.iter().enumerate() {
        if p != 0.0 {
            total += p * diagonal_value(obs, basis, i)?;
        }
    }
    Ok(total)
}

/// Estimate of a diagonal observable from measured counts.
pub fn expectation_diagonal(counts: &Counts, obs: &PauliSum, basis: Basis) -> Result<f64> {
    if !obs.is_diagonal_in(basis.letter()) {
        return Err(Error::NotDiagonal(obs.to_string()));
    }
    expectation_of_distribution(&counts.distribution(), obs, basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliTerm;

    fn bell() -> Circuit {
        let mut c = Circuit::new(2);
        c.push(Gate::H(0)).unwrap();
        c.push(Gate::Cnot { control: 0, target: 1 }).unwrap();
        c
    }

    fn measure_all(mut c: Circuit) -> Circuit {
        for q in 0..c.n_qubits() {
            c.push(Gate::Measure { qubit: q, cbit: q }).unwrap();
        }
        c
    }

    #[test]
    fn hadamard_amplitudes() {
        let mut c = Circuit::new(1);
        c.push(Gate::H(0)).unwrap();
        let psi = run_ideal(&c).unwrap();
        for a in psi.amplitudes() {
            assert!((a.re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        }
        let id = run_ideal(&Circuit::new(3)).unwrap();
        assert_eq!(id.amplitudes()[0], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn bell_sampling_is_binomial() {
        let psi = run_ideal(&bell()).unwrap();
        let counts = sample(&psi, 8192, 11);
        let sigma = (8192.0f64 * 0.25 * 0.75).sqrt();
        assert_eq!(counts.get(1) + counts.get(2), 0);
        for k in [0, 3] {
            assert!((counts.get(k) as f64 - 4096.0).abs() < 3.0 * sigma);
        }
        assert_eq!(counts, sample(&psi, 8192, 11));
        assert_eq!(counts.shots(), 8192);
    }

    #[test]
    fn basis_state_single_outcome() {
        let counts = sample(&StateVector::basis(3, 5), 100, 1);
        assert_eq!(counts.get(5), 100);
    }

    #[test]
    fn noiseless_run_equals_sampling() {
        let c = measure_all(bell());
        let a = run_noisy(&c, &NoiseModel::ideal(), 4096, 99).unwrap();
        let b = sample(&run_ideal(&c).unwrap(), 4096, 99);
        assert_eq!(a, b);
    }

    #[test]
    fn readout_flip_rate() {
        let c = measure_all(Circuit::new(1));
        let noise = NoiseModel::new(0.0, 0.1, 0.0).unwrap();
        let n = 100_000u64;
        let counts = run_noisy(&c, &noise, n, 5).unwrap();
        let p = counts.get(1) as f64 / n as f64;
        let sigma = (0.1 * 0.9 / n as f64).sqrt();
        assert!((p - 0.1).abs() < 3.0 * sigma, "{p}");
    }

    #[test]
    fn channel_preserves_trace_and_hermiticity() {
        let mut c = bell();
        c.push(Gate::Rx(1, 0.4)).unwrap();
        c.push(Gate::Cp(0, 1, 0.9)).unwrap();
        let rho = DensityMatrix::evolve(&c, 0.3).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        for r in 0..4 {
            for s in 0..4 {
                assert!((rho.get(r, s) - rho.get(s, r).conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn full_depolarization_is_maximally_mixed() {
        let rho = DensityMatrix::evolve(&bell(), 15.0 / 16.0).unwrap();
        for r in 0..4 {
            for s in 0..4 {
                let want = if r == s { 0.25 } else { 0.0 };
                assert!((rho.get(r, s).re - want).abs() < 1e-12);
                assert!(rho.get(r, s).im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn channel_matches_explicit_pauli_average() {
        // oracle: average of the 16 conjugated pure states
        let psi = run_ideal(&bell()).unwrap();
        let p = 0.2;
        let mut want = [[Complex64::new(0.0, 0.0); 4]; 4];
        for code in 0..16 {
            let mut a = psi.amplitudes().to_vec();
            apply_pauli(&mut a, 0, code & 3);
            apply_pauli(&mut a, 1, code >> 2);
            let w = if code == 0 { 1.0 - p } else { p / 15.0 };
            for r in 0..4 {
                for s in 0..4 {
                    want[r][s] += w * a[r] * a[s].conj();
                }
            }
        }
        let rho = DensityMatrix::evolve(&bell(), p).unwrap();
        for r in 0..4 {
            for s in 0..4 {
                assert!((rho.get(r, s) - want[r][s]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn counts_json_round_trip() {
        let mut c = Counts::new(4);
        c.add(0b0011, 7);
        c.add(0b1000, 2);
        let text = c.to_json();
        assert!(text.contains("\"0011\": 7"));
        assert_eq!(Counts::from_json(&text).unwrap(), c);
        assert!(Counts::from_json(r#"{"01": 1, "1": 2}"#).is_err());
    }

    #[test]
    fn diagonal_expectations() {
        let va = PauliSum::from_term(PauliTerm::parse(1.0, "XIIX").unwrap());
        let mut zeros = Counts::new(4);
        zeros.add(0, 10);
        assert_eq!(expectation_diagonal(&zeros, &va, Basis::X).unwrap(), 1.0);
        assert!(matches!(
            expectation_diagonal(&zeros, &va, Basis::Z),
            Err(Error::NotDiagonal(_))
        ));
    }

    #[test]
    fn invalid_noise_rejected() {
        assert!(NoiseModel::new(1.5, 0.0, 0.0).is_err());
        assert!(NoiseModel::new(0.0, -0.1, 0.0).is_err());
        let c = measure_all(bell());
        let bad = NoiseModel { p2: 2.0, ..NoiseModel::ideal() };
        assert!(run_noisy(&c, &bad, 10, 0).is_err());
        assert!(run_noisy(&bell(), &NoiseModel::ideal(), 10, 0).is_err());
    }
}
