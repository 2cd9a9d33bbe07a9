//! Ancilla-mediated evolution under commuting Pauli strings.
//!
//! For a string `P` with `N` non-identity letters the compiler rotates each
//! letter to `Z`, then applies
//!
//! ```text
//! E(-pi/2) . RX_A(2 theta) . E(pi/2),   E(phi) = prod_j exp(-i phi/2 Z_A Z_j)
//! ```
//!
//! and undoes the basis change. Conjugating `exp(-i theta X_A)` by `E(pi/2)`
//! gives `exp(-i theta X_A prod_j(-i Z_A Z_j))`, which with the ancilla held
//! in an eigenstate of `X_A` (even `N`) or `Y_A` (odd `N`) acts on the system
//! as `exp(-i (+-theta) Z...Z)`. The sign is `(-1)^(N/2)` for even `N` and
//! `(-1)^((N+1)/2)` for odd `N`, so the pattern repeats with period four in `N`.
//!
//! The sandwich equals `exp(-i c t X_A Z...Z)` (even `N`) or
//! `exp(-i c t Y_A Z...Z)` (odd `N`), which the default [`BlockForm::Ladder`]
//! emits as a basis change on A around `C . RZ_A(2 c t) . C` with
//! `C = prod_j CNOT(j -> A)`: two CNOTs per letter instead of four.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Circuit, Gate};
use crate::dense::{DenseOperator, StateVector};
use crate::error::{Error, Result};
use crate::models::{build_hamiltonian, Basis, GaugeModel, Geometry, parse_label};
use crate::pauli::{Pauli, PauliSum, PauliTerm};

/// How each `exp(-i phi/2 Z_A Z_j)` factor is decomposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZzStyle {
    /// `CNOT(j -> A) . RZ_A(phi) . CNOT(j -> A)`.
    #[default]
    Cnot,
    /// `RZ_A(phi) RZ_j(phi) CP(-2 phi)`, equal up to a global phase `e^{-i phi/2}`.
    ControlledPhase,
}

/// Gate realization of one term block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlockForm {
    /// Parity ladder into the ancilla, `2N` CNOTs.
    #[default]
    Ladder,
    /// Literal `E(-pi/2) . RX_A . E(pi/2)` with the given factor decomposition.
    Sandwich(ZzStyle),
}

/// Eigenstate the ancilla is held in while a block runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AncillaState {
    /// `|+>`, the `+1` eigenstate of sigma-x; used for even weights.
    Plus,
    /// `|+i>`, the `+1` eigenstate of sigma-y; used for odd weights.
    PlusI,
}

impl AncillaState {
    pub fn for_weight(n: usize) -> Self {
        if n % 2 == 0 {
            AncillaState::Plus
        } else {
            AncillaState::PlusI
        }
    }

    pub fn vector(self) -> StateVector {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let second = match self {
            AncillaState::Plus => Complex64::new(a, 0.0),
            AncillaState::PlusI => Complex64::new(0.0, a),
        };
        StateVector::new(vec![Complex64::new(a, 0.0), second]).expect("normalized")
    }

    /// Gates taking `|0>` to this state.
    fn preparation(self, q: usize) -> Vec<Gate> {
        match self {
            AncillaState::Plus => vec![Gate::H(q)],
            AncillaState::PlusI => vec![Gate::H(q), Gate::S(q)],
        }
    }

    /// Gates taking this state to `next`.
    fn transition(self, next: AncillaState, q: usize) -> Option<Gate> {
        match (self, next) {
            (AncillaState::Plus, AncillaState::PlusI) => Some(Gate::S(q)),
            (AncillaState::PlusI, AncillaState::Plus) => Some(Gate::Sdg(q)),
            _ => None,
        }
    }
}

/// `prod_j exp(-i phi/2 Z_A Z_j)` over `system`, in the listed order.
pub fn entangler(
    n_qubits: usize,
    ancilla: usize,
    system: &[usize],
    phi: f64,
    style: ZzStyle,
) -> Result<Circuit> {
    if system.contains(&ancilla) {
        return Err(Error::InvalidGate(format!(
            "ancilla {ancilla} overlaps the system qubits"
        )));
    }
    let mut c = Circuit::new(n_qubits);
    c.mark_ancilla(ancilla)?;
    if phi == 0.0 {
        return Ok(c);
    }
    for &j in system {
        match style {
            ZzStyle::Cnot => {
                c.push(Gate::Cnot {
                    control: j,
                    target: ancilla,
                })?;
                c.push(Gate::Rz(ancilla, phi))?;
                c.push(Gate::Cnot {
                    control: j,
                    target: ancilla,
                })?;
            }
            ZzStyle::ControlledPhase => {
                c.push(Gate::Rz(ancilla, phi))?;
                c.push(Gate::Rz(j, phi))?;
                c.push(Gate::Cp(ancilla, j, -2.0 * phi))?;
            }
        }
    }
    Ok(c)
}

fn basis_change(term: &PauliTerm, forward: bool) -> Vec<Gate> {
    term.support()
        .into_iter()
        .filter_map(|q| match term.letters()[q] {
            Pauli::X => Some(Gate::H(q)),
            // RX(pi/2) Y RX(-pi/2) = Z
            Pauli::Y => Some(Gate::Rx(q, if forward { FRAC_PI_2 } else { -FRAC_PI_2 })),
            _ => None,
        })
        .collect()
}

/// Circuit inducing `exp(-i c t P)` on the system for `term = c P`, with the
/// ancilla held in [`AncillaState::for_weight`] of the term's weight.
pub fn term_evolution(
    term: &PauliTerm,
    t: f64,
    n_qubits: usize,
    ancilla: usize,
    form: BlockForm,
) -> Result<Circuit> {
    let support = term.support();
    if support.is_empty() {
        return Err(Error::IdentityTerm);
    }
    if term.n_qubits() > n_qubits || ancilla >= n_qubits || ancilla < term.n_qubits() {
        return Err(Error::InvalidGate(format!(
            "term on {} qubits with ancilla {ancilla} does not fit {n_qubits} qubits",
            term.n_qubits()
        )));
    }
    let n = support.len();
    let sign = if n % 2 == 0 {
        if (n / 2) % 2 == 0 { 1.0 } else { -1.0 }
    } else if ((n + 1) / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    let theta = sign * term.coefficient() * t;

    let mut c = Circuit::new(n_qubits);
    c.mark_ancilla(ancilla)?;
    for g in basis_change(term, true) {
        c.push(g)?;
    }
    match form {
        BlockForm::Ladder => {
            // exp(-i c t A_A Z...Z) directly, with A = X (even) or Y (odd)
            let (pre, post) = if n % 2 == 0 {
                (Gate::H(ancilla), Gate::H(ancilla))
            } else {
                (Gate::Rx(ancilla, FRAC_PI_2), Gate::Rx(ancilla, -FRAC_PI_2))
            };
            c.push(pre)?;
            for &j in &support {
                c.push(Gate::Cnot { control: j, target: ancilla })?;
            }
            c.push(Gate::Rz(ancilla, 2.0 * term.coefficient() * t))?;
            for &j in support.iter().rev() {
                c.push(Gate::Cnot { control: j, target: ancilla })?;
            }
            c.push(post)?;
        }
        BlockForm::Sandwich(style) => {
            let forward = entangler(n_qubits, ancilla, &support, FRAC_PI_2, style)?;
            c.append(&forward)?;
            c.push(Gate::Rx(ancilla, 2.0 * theta))?;
            c.append(&forward.inverse()?)?;
        }
    }
    for g in basis_change(term, false) {
        c.push(g)?;
    }
    Ok(c)
}

/// An evolution circuit that expects its ancilla in `ancilla_state` and
/// returns it there.
#[derive(Debug, Clone)]
pub struct EvolutionCircuit {
    pub circuit: Circuit,
    pub system_qubits: usize,
    pub ancilla: usize,
    pub ancilla_state: AncillaState,
}

/// `exp(-iHt)` for a Hamiltonian whose terms pairwise commute, as one block per
/// term sharing a single ancilla (qubit `h.n_qubits()`).
pub fn compile_evolution(h: &PauliSum, t: f64, form: BlockForm) -> Result<EvolutionCircuit> {
    if let Some((a, b)) = h.first_noncommuting_pair() {
        return Err(Error::NonCommutingTerms {
            a: a.to_string(),
            b: b.to_string(),
        });
    }
    let system = h.n_qubits();
    let ancilla = system;
    let n = system + 1;
    let start = h
        .terms()
        .iter()
        .find(|t| !t.is_identity())
        .map_or(AncillaState::Plus, |t| AncillaState::for_weight(t.weight()));
    let mut c = Circuit::new(n);
    c.mark_ancilla(ancilla)?;
    let mut state = start;
    for term in h.terms() {
        // identity terms only contribute a global phase
        if term.is_identity() {
            continue;
        }
        let want = AncillaState::for_weight(term.weight());
        if let Some(g) = state.transition(want, ancilla) {
            c.push(g)?;
        }
        state = want;
        c.append(&term_evolution(term, t, n, ancilla, form)?)?;
    }
    if let Some(g) = state.transition(start, ancilla) {
        c.push(g)?;
    }
    Ok(EvolutionCircuit {
        circuit: c,
        system_qubits: system,
        ancilla,
        ancilla_state: start,
    })
}

/// The system operator `<a| U |a>` induced by an evolution circuit with the
/// ancilla (the highest qubit) in its designated state `|a>`.
pub fn induced_system_unitary(evo: &EvolutionCircuit) -> Result<DenseOperator> {
    let n = evo.system_qubits;
    if evo.ancilla != n || evo.circuit.n_qubits() != n + 1 {
        return Err(Error::InvalidGate(
            "induced unitary needs the ancilla as the single highest qubit".into(),
        ));
    }
    let anc = evo.ancilla_state.vector();
    let dim = 1usize << n;
    let mut out = DenseOperator::zeros(n);
    for col in 0..dim {
        let mut psi = anc.tensor(&StateVector::basis(n, col));
        psi.apply_circuit(&evo.circuit)?;
        let amps = psi.amplitudes();
        for row in 0..dim {
            out[(row, col)] =
                anc.amplitudes()[0].conj() * amps[row] + anc.amplitudes()[1].conj() * amps[dim + row];
        }
    }
    Ok(out)
}

/// Label and basis of an initial product state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    pub label: String,
    pub basis: Basis,
}

/// Full experiment circuit: initial-state preparation, ancilla preparation,
/// the exact (Trotter-free) evolution, a measurement-basis layer and
/// measurement of every system qubit `q` into classical bit `q`.
///
/// The ancilla is left in its prepared eigenstate and is not measured.
pub fn model_circuit(
    model: &GaugeModel,
    geom: Geometry,
    t: f64,
    initial: &InitialState,
    measure_basis: Basis,
) -> Result<Circuit> {
    if model.gamma != 0.0 {
        return Err(Error::NonZeroGamma(model.gamma));
    }
    let h = build_hamiltonian(model, geom)?;
    let evo = compile_evolution(&h, t, BlockForm::Ladder)?;
    let n = evo.system_qubits;
    let index = parse_label(&initial.label, n)?;

    let mut c = Circuit::new(n + 1);
    c.mark_ancilla(evo.ancilla)?;
    for q in 0..n {
        if index >> q & 1 == 1 {
            c.push(Gate::X(q))?;
        }
    }
    if initial.basis == Basis::X {
        for q in 0..n {
            c.push(Gate::H(q))?;
        }
    }
    for g in evo.ancilla_state.preparation(evo.ancilla) {
        c.push(g)?;
    }
    c.append(&evo.circuit)?;
    if measure_basis == Basis::X {
        for q in 0..n {
            c.push(Gate::H(q))?;
        }
    }
    for q in 0..n {
        c.push(Gate::Measure { qubit: q, cbit: q })?;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::circuit_unitary;
    use crate::exact::Spectrum;
    use crate::models::{initial_state, Group};

    fn exp_term(term: &PauliTerm, t: f64) -> DenseOperator {
        Spectrum::of_sum(&PauliSum::from_term(term.clone()))
            .unwrap()
            .propagator(t)
    }

    #[test]
    fn zero_angle_entangler_is_empty() {
        let c = entangler(3, 2, &[0, 1], 0.0, ZzStyle::Cnot).unwrap();
        assert!(c.gates().is_empty());
        assert!(entangler(3, 1, &[0, 1], 0.3, ZzStyle::Cnot).is_err());
    }

    #[test]
    fn single_pair_entangler_matches_diagonal_up_to_phase() {
        let phi = 0.77;
        // diag(e^{-i phi/2}, e^{i phi/2}, e^{i phi/2}, e^{-i phi/2})
        let mut want = DenseOperator::zeros(2);
        for (i, s) in [-1.0, 1.0, 1.0, -1.0].into_iter().enumerate() {
            want[(i, i)] = Complex64::from_polar(1.0, s * phi / 2.0);
        }
        for style in [ZzStyle::Cnot, ZzStyle::ControlledPhase] {
            let u = circuit_unitary(&entangler(2, 1, &[0], phi, style).unwrap()).unwrap();
            assert!(u.distance_up_to_phase(&want) < 1e-12, "{style:?}");
        }
        // the CNOT form is exact, the CP form carries e^{-i phi/2}
        let cnot = circuit_unitary(&entangler(2, 1, &[0], phi, ZzStyle::Cnot).unwrap()).unwrap();
        assert!(cnot.sub(&want).max_abs() < 1e-12);
        let cp = circuit_unitary(&entangler(2, 1, &[0], phi, ZzStyle::ControlledPhase).unwrap()).unwrap();
        let shifted = want.scale(Complex64::from_polar(1.0, -phi / 2.0));
        assert!(cp.sub(&shifted).max_abs() < 1e-12);
    }

    #[test]
    fn entangler_inverse_cancels() {
        for style in [ZzStyle::Cnot, ZzStyle::ControlledPhase] {
            let mut c = entangler(5, 4, &[0, 1, 2, 3], 1.1, style).unwrap();
            c.append(&entangler(5, 4, &[0, 1, 2, 3], -1.1, style).unwrap()).unwrap();
            let u = circuit_unitary(&c).unwrap();
            assert!(u.distance_up_to_phase(&DenseOperator::identity(5)) < 1e-12);
        }
    }

    #[test]
    fn n4_block_matches_closed_form_on_full_space() {
        // E(-pi/2) RX_A(2 g t) E(pi/2) = exp(-i g t X_A Z1 Z2 Z3 Z4)
        let (g, t) = (1.0, 0.37);
        let fwd = entangler(5, 4, &[0, 1, 2, 3], FRAC_PI_2, ZzStyle::Cnot).unwrap();
        let mut c = fwd.clone();
        c.push(Gate::Rx(4, 2.0 * g * t)).unwrap();
        c.append(&fwd.inverse().unwrap()).unwrap();
        let u = circuit_unitary(&c).unwrap();
        let want = exp_term(&PauliTerm::parse(g, "XZZZZ").unwrap(), t);
        assert!(u.sub(&want).max_abs() < 1e-12);
    }

    #[test]
    fn weight_pattern_through_n8() {
        let letters = [Pauli::X, Pauli::Y, Pauli::Z];
        for n in 1..=8usize {
            let mut ls = vec![Pauli::I; n + 1];
            for (k, l) in ls.iter_mut().take(n).enumerate() {
                *l = letters[k % 3];
            }
            ls[n] = Pauli::I;
            let term = PauliTerm::new(-0.6, ls).unwrap();
            let evo = compile_evolution(&PauliSum::from_term(term.clone()), 0.9, BlockForm::Ladder).unwrap();
            let induced = induced_system_unitary(&evo).unwrap();
            let want = exp_term(&term, 0.9);
            assert!(induced.sub(&want).max_abs() < 1e-10, "N = {n}");
            assert_eq!(evo.circuit.cnot_count(), 2 * n);
        }
    }

    #[test]
    fn minus_g_zzzz_gives_plus_i_g_t() {
        let (g, t) = (1.3, 0.55);
        let term = PauliTerm::parse(-g, "ZZZZ").unwrap();
        let c = term_evolution(&term, t, 5, 4, BlockForm::Ladder).unwrap();
        let evo = EvolutionCircuit {
            circuit: c,
            system_qubits: 4,
            ancilla: 4,
            ancilla_state: AncillaState::Plus,
        };
        let induced = induced_system_unitary(&evo).unwrap();
        let want = exp_term(&PauliTerm::parse(1.0, "ZZZZ").unwrap(), -g * t);
        assert!(induced.sub(&want).max_abs() < 1e-10);
    }

    #[test]
    fn ladder_equals_sandwich() {
        for text in ["ZZZZ", "XYZ", "YIX", "Z"] {
            let term = PauliTerm::parse(0.83, text).unwrap();
            let n = term.n_qubits();
            let ladder = circuit_unitary(&term_evolution(&term, 1.3, n + 1, n, BlockForm::Ladder).unwrap()).unwrap();
            for style in [ZzStyle::Cnot, ZzStyle::ControlledPhase] {
                let c = term_evolution(&term, 1.3, n + 1, n, BlockForm::Sandwich(style)).unwrap();
                let u = circuit_unitary(&c).unwrap();
                assert!(u.distance_up_to_phase(&ladder) < 1e-12, "{text} {style:?}");
            }
        }
    }

    #[test]
    fn minus_g_over_root2_xxx_on_all_basis_states() {
        let g = 1.4;
        let term = PauliTerm::parse(-g / 2f64.sqrt(), "XXX").unwrap();
        let h = PauliSum::from_term(term.clone());
        let evo = compile_evolution(&h, 0.6, BlockForm::Ladder).unwrap();
        let induced = induced_system_unitary(&evo).unwrap();
        for i in 0..8 {
            let psi = StateVector::basis(3, i);
            let want = crate::exact::exact_evolve(&h, &psi, 0.6).unwrap();
            let got = induced.apply(&psi).unwrap();
            for (a, b) in got.amplitudes().iter().zip(want.amplitudes()) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn basis_layers_are_involutive() {
        let term = PauliTerm::parse(1.0, "XYZY").unwrap();
        let mut c = Circuit::new(4);
        for g in basis_change(&term, true).into_iter().chain(basis_change(&term, false)) {
            c.push(g).unwrap();
        }
        let u = circuit_unitary(&c).unwrap();
        assert!(u.sub(&DenseOperator::identity(4)).max_abs() < 1e-12);
    }

    #[test]
    fn zero_time_is_identity() {
        let term = PauliTerm::parse(-2.0, "XYY").unwrap();
        let c = term_evolution(&term, 0.0, 4, 3, BlockForm::Ladder).unwrap();
        let u = circuit_unitary(&c).unwrap();
        assert!(u.distance_up_to_phase(&DenseOperator::identity(4)) < 1e-12);
    }

    #[test]
    fn identity_term_rejected() {
        let term = PauliTerm::parse(1.0, "III").unwrap();
        assert!(matches!(
            term_evolution(&term, 1.0, 4, 3, BlockForm::Ladder),
            Err(Error::IdentityTerm)
        ));
    }

    #[test]
    fn cnot_counts() {
        let init = |l: &str| InitialState { label: l.into(), basis: Basis::X };
        let c = model_circuit(&GaugeModel::z2(1.0), Geometry::Square1, 0.3, &init("1111"), Basis::X).unwrap();
        assert_eq!(c.cnot_count(), 8);
        assert_eq!(c.metrics().two_qubit_depth, 8);
        assert_eq!(c.n_qubits(), 5);
        let c = model_circuit(&GaugeModel::z2(1.0), Geometry::TwoSquarePbc, 0.3, &init("000000"), Basis::X)
            .unwrap();
        assert_eq!(c.cnot_count(), 16);
        assert_eq!(c.n_qubits(), 7);
    }

    #[test]
    fn guards() {
        let init = InitialState { label: "000000".into(), basis: Basis::Z };
        assert!(matches!(
            model_circuit(&GaugeModel::u1(1.0), Geometry::TwoSquarePbc, 0.1, &init, Basis::Z),
            Err(Error::NonCommutingTerms { .. })
        ));
        let init = InitialState { label: "0000".into(), basis: Basis::X };
        assert!(matches!(
            model_circuit(&GaugeModel::z2(1.0).with_gamma(0.5), Geometry::Square1, 0.1, &init, Basis::X),
            Err(Error::NonZeroGamma(_))
        ));
    }

    #[test]
    fn ancilla_returns_to_its_eigenstate() {
        for (model, geom, label) in [
            (GaugeModel::z2(1.0), Geometry::Square1, "1111"),
            (GaugeModel::u1(1.0), Geometry::Triangle1, "000"),
            (GaugeModel::u1(0.8), Geometry::Square1, "0011"),
        ] {
            let h = build_hamiltonian(&model, geom).unwrap();
            let evo = compile_evolution(&h, 0.7, BlockForm::Ladder).unwrap();
            let n = geom.n_links();
            let anc = evo.ancilla_state.vector();
            let basis = if model.group == Group::Z2 { Basis::X } else { Basis::Z };
            let sys = initial_state(n, label, basis).unwrap();
            let mut psi = anc.tensor(&sys);
            psi.apply_circuit(&evo.circuit).unwrap();
            // project on the ancilla: the leftover norm must be the whole state
            let dim = 1usize << n;
            let a = anc.amplitudes();
            let kept: f64 = (0..dim)
                .map(|i| (a[0].conj() * psi.amplitudes()[i] + a[1].conj() * psi.amplitudes()[dim + i]).norm_sqr())
                .sum();
            assert!((kept - 1.0).abs() < 1e-9, "{model:?} {geom}");
        }
    }
}
