//! Pauli strings and weighted sums of them.
//!
//! Qubit ordering: `letters[q]` acts on qubit `q`, and qubit `q` is bit `q` of a
//! computational-basis index (little-endian). In text form a string is written
//! with qubit 0 as the *rightmost* character, the same way basis labels are
//! written, so `"XZ"` is `X` on qubit 1 and `Z` on qubit 0. In a Kronecker
//! product qubit 0 is likewise the rightmost factor.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;

use crate::dense::DenseOperator;
use crate::error::{Error, Result};

/// Largest qubit count for which dense matrices are built.
pub const MAX_DENSE_QUBITS: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' | 'i' => Some(Pauli::I),
            'X' | 'x' => Some(Pauli::X),
            'Y' | 'y' => Some(Pauli::Y),
            'Z' | 'z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// The 2x2 matrix, row-major.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }
}

/// A real coefficient times a Pauli string.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    coefficient: f64,
    letters: Vec<Pauli>,
}

impl PauliTerm {
    pub fn new(coefficient: f64, letters: Vec<Pauli>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidPauli(String::new()));
        }
        if !coefficient.is_finite() {
            return Err(Error::InvalidPauli(format!(
                "non-finite coefficient {coefficient}"
            )));
        }
        Ok(Self {
            coefficient,
            letters,
        })
    }

    /// Parses a string written with qubit 0 rightmost, e.g. `"XXYY"`.
    pub fn parse(coefficient: f64, text: &str) -> Result<Self> {
        let letters = text
            .chars()
            .rev()
            .map(|c| Pauli::from_char(c).ok_or_else(|| Error::InvalidPauli(text.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Self::new(coefficient, letters)
    }

    /// Builds a term on `n` qubits from `(qubit, letter)` pairs; unlisted qubits get `I`.
    pub fn from_sparse(n: usize, coefficient: f64, ops: &[(usize, Pauli)]) -> Result<Self> {
        let mut letters = vec![Pauli::I; n];
        for &(q, p) in ops {
            if q >= n {
                return Err(Error::InvalidPauli(format!("qubit {q} out of range for {n}")));
            }
            letters[q] = p;
        }
        Self::new(coefficient, letters)
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn with_coefficient(&self, coefficient: f64) -> Self {
        Self {
            coefficient,
            letters: self.letters.clone(),
        }
    }

    /// Qubits carrying a non-identity letter, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.letters.len())
            .filter(|&q| self.letters[q] != Pauli::I)
            .collect()
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    /// The letters as a string, qubit 0 rightmost.
    pub fn label(&self) -> String {
        self.letters.iter().rev().map(|p| p.as_char()).collect()
    }

    /// Bit masks `(x, z)` in the symplectic representation: X = (1,0), Z = (0,1), Y = (1,1).
    pub(crate) fn masks(&self) -> (usize, usize) {
        let mut x = 0usize;
        let mut z = 0usize;
        for (q, p) in self.letters.iter().enumerate() {
            match p {
                Pauli::I => {}
                Pauli::X => x |= 1 << q,
                Pauli::Y => {
                    x |= 1 << q;
                    z |= 1 << q;
                }
                Pauli::Z => z |= 1 << q,
            }
        }
        (x, z)
    }

    /// Action on a basis state: `P|b> = phase * |b ^ xmask>`. Returns `(xmask, phase)`.
    pub(crate) fn basis_action(&self, b: usize) -> (usize, Complex64) {
        let (x, z) = self.masks();
        let n_y = (x & z).count_ones();
        let sign = if (b & z).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        let phase = match n_y % 4 {
            0 => Complex64::new(sign, 0.0),
            1 => Complex64::new(0.0, sign),
            2 => Complex64::new(-sign, 0.0),
            _ => Complex64::new(0.0, -sign),
        };
        (x, phase)
    }

    /// Dense matrix `coefficient * P`.
    pub fn to_matrix(&self) -> Result<DenseOperator> {
        check_cap(self.n_qubits())?;
        let mut op = DenseOperator::zeros(self.n_qubits());
        self.accumulate_into(&mut op, 1.0);
        Ok(op)
    }

    fn accumulate_into(&self, op: &mut DenseOperator, scale: f64) {
        let dim = op.dim();
        let c = self.coefficient * scale;
        for col in 0..dim {
            let (x, phase) = self.basis_action(col);
            let row = col ^ x;
            op[(row, col)] += phase * c;
        }
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}*{}", self.coefficient, self.label())
    }
}

/// Dense matrix of a single Pauli string (coefficient included).
pub fn term_to_matrix(term: &PauliTerm) -> Result<DenseOperator> {
    term.to_matrix()
}

/// Whether two Pauli strings commute: they do iff the number of positions where
/// both letters are non-identity and differ is even.
pub fn commutes(a: &PauliTerm, b: &PauliTerm) -> Result<bool> {
    if a.n_qubits() != b.n_qubits() {
        return Err(Error::QubitMismatch {
            expected: a.n_qubits(),
            got: b.n_qubits(),
        });
    }
    let clashes = a
        .letters
        .iter()
        .zip(&b.letters)
        .filter(|(p, q)| **p != Pauli::I && **q != Pauli::I && p != q)
        .count();
    Ok(clashes % 2 == 0)
}

pub(crate) fn check_cap(n: usize) -> Result<()> {
    if n > MAX_DENSE_QUBITS {
        return Err(Error::DimensionCap {
            what: "dense operator",
            n,
            cap: MAX_DENSE_QUBITS,
        });
    }
    Ok(())
}

/// A real linear combination of Pauli strings in canonical form: one entry per
/// distinct string, in order of first appearance, with exact zeros dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: Vec::new(),
        }
    }

    pub fn new(n_qubits: usize, terms: impl IntoIterator<Item = PauliTerm>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidPauli("zero-qubit sum".into()));
        }
        let mut order: Vec<Vec<Pauli>> = Vec::new();
        let mut coeffs: HashMap<Vec<Pauli>, f64> = HashMap::new();
        for term in terms {
            if term.n_qubits() != n_qubits {
                return Err(Error::QubitMismatch {
                    expected: n_qubits,
                    got: term.n_qubits(),
                });
            }
            match coeffs.get_mut(&term.letters) {
                Some(c) => *c += term.coefficient,
                None => {
                    order.push(term.letters.clone());
                    coeffs.insert(term.letters, term.coefficient);
                }
            }
        }
        let terms = order
            .into_iter()
            .filter_map(|letters| {
                let coefficient = coeffs[&letters];
                (coefficient != 0.0).then_some(PauliTerm {
                    coefficient,
                    letters,
                })
            })
            .collect();
        Ok(Self { n_qubits, terms })
    }

    pub fn from_term(term: PauliTerm) -> Self {
        let n = term.n_qubits();
        Self::new(n, [term]).expect("single term has consistent width")
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(
            self.n_qubits,
            self.terms
                .iter()
                .map(|t| t.with_coefficient(t.coefficient * factor)),
        )
        .expect("scaling keeps widths")
    }

    pub fn add(&self, other: &PauliSum) -> Result<Self> {
        Self::new(
            self.n_qubits,
            self.terms.iter().chain(other.terms.iter()).cloned(),
        )
    }

    /// Operator product, simplified with the single-qubit Pauli algebra. The
    /// result must stay real, which holds for products of commuting sums such
    /// as `G^2`.
    pub fn multiply(&self, other: &PauliSum) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch {
                expected: self.n_qubits,
                got: other.n_qubits,
            });
        }
        let mut out = Vec::new();
        for a in &self.terms {
            for b in &other.terms {
                let mut phase = Complex64::new(a.coefficient * b.coefficient, 0.0);
                let letters = a
                    .letters
                    .iter()
                    .zip(&b.letters)
                    .map(|(&p, &q)| {
                        let (ph, r) = single_product(p, q);
                        phase *= ph;
                        r
                    })
                    .collect();
                if phase.im.abs() > 1e-12 {
                    return Err(Error::InvalidPauli(
                        "product has an imaginary coefficient".into(),
                    ));
                }
                out.push(PauliTerm {
                    coefficient: phase.re,
                    letters,
                });
            }
        }
        Self::new(self.n_qubits, out)
    }

    /// Whether every term consists only of `I` and the given letter.
    pub fn is_diagonal_in(&self, letter: Pauli) -> bool {
        self.terms
            .iter()
            .all(|t| t.letters.iter().all(|&p| p == Pauli::I || p == letter))
    }

    /// Whether every pair of terms commutes; returns the first offending pair otherwise.
    pub fn first_noncommuting_pair(&self) -> Option<(&PauliTerm, &PauliTerm)> {
        for (i, a) in self.terms.iter().enumerate() {
            for b in &self.terms[i + 1..] {
                if !commutes(a, b).expect("same width") {
                    return Some((a, b));
                }
            }
        }
        None
    }

    pub fn to_matrix(&self) -> Result<DenseOperator> {
        check_cap(self.n_qubits)?;
        let mut op = DenseOperator::zeros(self.n_qubits);
        for t in &self.terms {
            t.accumulate_into(&mut op, 1.0);
        }
        Ok(op)
    }

    /// Stable textual key, used for caching spectral decompositions.
    pub(crate) fn cache_key(&self) -> String {
        let mut key = format!("{}:", self.n_qubits);
        for t in &self.terms {
            key.push_str(&format!("{:016x}{};", t.coefficient.to_bits(), t.label()));
        }
        key
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// `p * q = phase * r` for single-qubit Paulis.
fn single_product(p: Pauli, q: Pauli) -> (Complex64, Pauli) {
    use Pauli::*;
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match (p, q) {
        (I, r) | (r, I) => (one, r),
        (X, X) | (Y, Y) | (Z, Z) => (one, I),
        (X, Y) => (i, Z),
        (Y, X) => (-i, Z),
        (Y, Z) => (i, X),
        (Z, Y) => (-i, X),
        (Z, X) => (i, Y),
        (X, Z) => (-i, Y),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kron(a: &[Vec<Complex64>], b: &[[Complex64; 2]; 2]) -> Vec<Vec<Complex64>> {
        let n = a.len();
        let mut out = vec![vec![Complex64::new(0.0, 0.0); 2 * n]; 2 * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..2 {
                    for l in 0..2 {
                        out[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                    }
                }
            }
        }
        out
    }

    /// Independent Kronecker construction: highest qubit leftmost, qubit 0 rightmost.
    fn kron_oracle(term: &PauliTerm) -> Vec<Vec<Complex64>> {
        let mut m = vec![vec![Complex64::new(term.coefficient(), 0.0)]];
        for p in term.letters().iter().rev() {
            m = kron(&m, &p.matrix());
        }
        m
    }

    #[test]
    fn z_is_diag_one_minus_one() {
        let m = PauliTerm::parse(1.0, "Z").unwrap().to_matrix().unwrap();
        assert_eq!(m[(0, 0)].re, 1.0);
        assert_eq!(m[(1, 1)].re, -1.0);
        assert_eq!(m[(0, 1)].norm(), 0.0);
    }

    #[test]
    fn xx_is_antidiagonal() {
        let m = PauliTerm::parse(1.0, "XX").unwrap().to_matrix().unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let expect = if r + c == 3 { 1.0 } else { 0.0 };
                assert_eq!(m[(r, c)], Complex64::new(expect, 0.0));
            }
        }
    }

    #[test]
    fn zzzz_on_1111_is_plus_one() {
        let m = PauliTerm::parse(1.0, "ZZZZ").unwrap().to_matrix().unwrap();
        assert_eq!(m[(15, 15)].re, 1.0);
    }

    #[test]
    fn matches_kronecker_oracle_on_all_three_qubit_strings() {
        let letters = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        for a in letters {
            for b in letters {
                for c in letters {
                    let t = PauliTerm::new(0.7, vec![a, b, c]).unwrap();
                    let m = t.to_matrix().unwrap();
                    let o = kron_oracle(&t);
                    for r in 0..8 {
                        for col in 0..8 {
                            assert!((m[(r, col)] - o[r][col]).norm() < 1e-15);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn commutation_examples() {
        let p = |s| PauliTerm::parse(1.0, s).unwrap();
        assert!(commutes(&p("XXXX"), &p("YYYY")).unwrap());
        assert!(!commutes(&p("X"), &p("Z")).unwrap());
        assert!(commutes(&p("XXXX"), &p("XXYY")).unwrap());
        assert!(commutes(&p("XX"), &p("XYZ")).is_err());
    }

    #[test]
    fn commutes_agrees_with_matrix_commutator_exhaustively() {
        let letters = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        for n in 1..=5usize {
            let count = 4usize.pow(n as u32);
            let decode = |mut k: usize| {
                let mut v = Vec::with_capacity(n);
                for _ in 0..n {
                    v.push(letters[k % 4]);
                    k /= 4;
                }
                PauliTerm::new(1.0, v).unwrap()
            };
            let mats: Vec<_> = (0..count).map(|k| decode(k).to_matrix().unwrap()).collect();
            let dim = 1usize << n;
            // [A,B] column by column, skipping the zeros of the right factor
            let commutator_vanishes = |a: &DenseOperator, b: &DenseOperator| {
                for c in 0..dim {
                    let mut col = vec![Complex64::new(0.0, 0.0); dim];
                    for k in 0..dim {
                        if b[(k, c)].norm() > 0.0 {
                            for r in 0..dim {
                                col[r] += a[(r, k)] * b[(k, c)];
                            }
                        }
                        if a[(k, c)].norm() > 0.0 {
                            for r in 0..dim {
                                col[r] -= b[(r, k)] * a[(k, c)];
                            }
                        }
                    }
                    if col.iter().any(|z| z.norm() >= 1e-12) {
                        return false;
                    }
                }
                true
            };
            for ia in 0..count {
                let a = decode(ia);
                for ib in ia..count {
                    let b = decode(ib);
                    assert_eq!(
                        commutes(&a, &b).unwrap(),
                        commutator_vanishes(&mats[ia], &mats[ib]),
                        "{a} {b}"
                    );
                }
            }
        }
    }

    #[test]
    fn sums_merge_duplicates_and_drop_zeros() {
        let s = PauliSum::new(
            2,
            [
                PauliTerm::parse(1.0, "XZ").unwrap(),
                PauliTerm::parse(2.0, "ZZ").unwrap(),
                PauliTerm::parse(-1.0, "XZ").unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.terms()[0].label(), "ZZ");
        assert_eq!(s.terms()[0].coefficient(), 2.0);
    }

    #[test]
    fn square_of_gauss_like_sum() {
        // (Z0/2 + Z1/2)^2 = 1/2 + Z0 Z1 / 2
        let g = PauliSum::new(
            2,
            [
                PauliTerm::parse(0.5, "IZ").unwrap(),
                PauliTerm::parse(0.5, "ZI").unwrap(),
            ],
        )
        .unwrap();
        let sq = g.multiply(&g).unwrap();
        let direct = g.to_matrix().unwrap().matmul(&g.to_matrix().unwrap());
        assert!(sq.to_matrix().unwrap().sub(&direct).max_abs() < 1e-15);
        assert_eq!(sq.len(), 2);
    }

    #[test]
    fn cap_is_enforced() {
        let t = PauliTerm::new(1.0, vec![Pauli::Z; MAX_DENSE_QUBITS + 1]).unwrap();
        assert!(matches!(t.to_matrix(), Err(Error::DimensionCap { .. })));
    }
}
