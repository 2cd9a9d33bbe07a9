//! Z2 and U(1) plaquette models on the single square, single triangle and
//! periodic two-square geometries: Hamiltonians, Gauss-law and winding
//! operators, sector bases and initial product states.
//!
//! Link `k` (1-based, as numbered in the usual figures of these geometries)
//! lives on qubit `k - 1`. Basis labels are written with link 1 as the
//! rightmost character, so the two-plaquette label `"111010"` reads links
//! 6,5,4,3,2,1 from left to right.
//!
//! Z2 models are analysed in the sigma-x basis: label bit 0 is the `+1`
//! eigenstate `|+>` and bit 1 is `|-> = (|0> - |1>)/sqrt(2)`. U(1) models
//! are quantized in the sigma-z basis with bit 0 meaning `E = +1/2`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dense::StateVector;
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliSum, PauliTerm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Z2,
    U1,
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Group::Z2 => "z2",
            Group::U1 => "u1",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    #[serde(rename = "square1")]
    Square1,
    #[serde(rename = "triangle1")]
    Triangle1,
    TwoSquarePbc,
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Geometry::Square1 => "square1",
            Geometry::Triangle1 => "triangle1",
            Geometry::TwoSquarePbc => "two_square_pbc",
        })
    }
}

/// A plaquette: its links in operator order, with `true` for a raising factor.
type Plaquette = &'static [(usize, bool)];

impl Geometry {
    pub fn n_links(self) -> usize {
        match self {
            Geometry::Square1 => 4,
            Geometry::Triangle1 => 3,
            Geometry::TwoSquarePbc => 6,
        }
    }

    pub fn sites(self) -> &'static [char] {
        match self {
            Geometry::Square1 | Geometry::TwoSquarePbc => &['A', 'B', 'C', 'D'],
            Geometry::Triangle1 => &['A', 'B', 'C'],
        }
    }

    pub fn site_index(self, site: char) -> Option<usize> {
        let site = site.to_ascii_uppercase();
        self.sites().iter().position(|&s| s == site)
    }

    /// Links touching each site, with the sign of that link's electric flux in
    /// the U(1) Gauss law (`+1` outgoing, `-1` incoming).
    fn site_links(self) -> &'static [&'static [(usize, i8)]] {
        match self {
            // A=(0,0) B=(1,0) C=(1,1) D=(0,1); links 1:A->B 2:B->C 3:D->C 4:A->D
            Geometry::Square1 => &[
                &[(1, 1), (4, 1)],
                &[(1, -1), (2, 1)],
                &[(2, -1), (3, -1)],
                &[(3, 1), (4, -1)],
            ],
            // flux circulates A -> B -> C -> A: link 2 leaves A, link 1 enters it
            Geometry::Triangle1 => &[
                &[(1, -1), (2, 1)],
                &[(2, -1), (3, 1)],
                &[(3, -1), (1, 1)],
            ],
            // as Square1 plus links 5:B->A and 6:C->D closing the periodic direction
            Geometry::TwoSquarePbc => &[
                &[(1, 1), (4, 1), (5, -1)],
                &[(5, 1), (2, 1), (1, -1)],
                &[(6, 1), (2, -1), (3, -1)],
                &[(3, 1), (4, -1), (6, -1)],
            ],
        }
    }

    fn plaquettes(self) -> &'static [Plaquette] {
        match self {
            Geometry::Square1 => &[&[(1, true), (2, true), (3, false), (4, false)]],
            Geometry::Triangle1 => &[&[(1, true), (2, true), (3, true)]],
            Geometry::TwoSquarePbc => &[
                &[(1, true), (2, true), (3, false), (4, false)],
                &[(5, true), (4, true), (6, false), (2, false)],
            ],
        }
    }
}

/// How the couplings multiply Pauli strings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// Couplings multiply full Pauli strings (`-g ZZZZ`, `-g/2` per U(1) square term).
    #[default]
    Pauli,
    /// Z2 spins are `S = sigma/2`, so an `N`-link plaquette carries `-g/2^N`
    /// and the transverse field `-Gamma/2`. U(1) terms are unchanged because
    /// the raising operators are already `(sigma^x +- i sigma^y)/sqrt(2)`.
    SpinHalf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeModel {
    pub group: Group,
    pub g: f64,
    /// Transverse field, Z2 only. Must be zero for anything that compiles circuits.
    pub gamma: f64,
    pub convention: Convention,
}

impl GaugeModel {
    pub fn z2(g: f64) -> Self {
        Self {
            group: Group::Z2,
            g,
            gamma: 0.0,
            convention: Convention::Pauli,
        }
    }

    pub fn u1(g: f64) -> Self {
        Self {
            group: Group::U1,
            g,
            gamma: 0.0,
            convention: Convention::Pauli,
        }
    }

    pub fn with_gamma(self, gamma: f64) -> Self {
        Self { gamma, ..self }
    }

    pub fn with_convention(self, convention: Convention) -> Self {
        Self { convention, ..self }
    }

    /// The basis the model's states are labelled and measured in.
    pub fn natural_basis(&self) -> Basis {
        match self.group {
            Group::Z2 => Basis::X,
            Group::U1 => Basis::Z,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    X,
    Z,
}

impl Basis {
    pub fn letter(self) -> Pauli {
        match self {
            Basis::X => Pauli::X,
            Basis::Z => Pauli::Z,
        }
    }
}

/// Gauss-law eigenvalue per site (Z2: `+-1`; U(1): charges, possibly
/// half-integer on odd-coordination sites) and optional `(W_x, W_y)` labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorSpec {
    pub gauss: Vec<f64>,
    pub winding: Option<(i8, i8)>,
}

impl SectorSpec {
    pub fn uniform(geom: Geometry, value: f64) -> Self {
        Self {
            gauss: vec![value; geom.sites().len()],
            winding: None,
        }
    }
}

fn plaquette_scale(model: &GaugeModel, links: usize) -> f64 {
    match (model.group, model.convention) {
        (Group::Z2, Convention::SpinHalf) => 0.5f64.powi(links as i32),
        _ => 1.0,
    }
}

/// Pauli-string expansion of `U + U^dagger` where `U` is a product of
/// `(X +- iY)/sqrt(2)` factors. Only strings with a real coefficient survive.
fn plaquette_flip_terms(n: usize, plaq: Plaquette, coupling: f64) -> Result<Vec<PauliTerm>> {
    let k = plaq.len();
    let mut out = Vec::new();
    for choice in 0..(1usize << k) {
        let mut amp = Complex64::new(1.0, 0.0);
        let mut ops = Vec::with_capacity(k);
        for (j, &(link, raising)) in plaq.iter().enumerate() {
            if choice >> j & 1 == 1 {
                let s = if raising { 1.0 } else { -1.0 };
                amp *= Complex64::new(0.0, s);
                ops.push((link - 1, Pauli::Y));
            } else {
                ops.push((link - 1, Pauli::X));
            }
        }
        // U + U^dagger keeps 2 Re(amp); odd numbers of Y give purely imaginary amp
        let re = 2.0 * amp.re * 0.5f64.powf(k as f64 / 2.0);
        if re.abs() > 1e-12 {
            out.push(PauliTerm::from_sparse(n, -coupling * re, &ops)?);
        }
    }
    Ok(out)
}

/// The Hamiltonian of `model` on `geom`.
///
/// Z2: `-g Z...Z` per plaquette (plus `-Gamma X` per link when gamma is
/// non-zero). U(1): `-g (U + U^dagger)` per plaquette expanded into Pauli
/// strings (8 per square, 4 per triangle).
pub fn build_hamiltonian(model: &GaugeModel, geom: Geometry) -> Result<PauliSum> {
    let n = geom.n_links();
    let mut terms = Vec::new();
    match model.group {
        Group::Z2 => {
            for plaq in geom.plaquettes() {
                let ops: Vec<_> = plaq.iter().map(|&(l, _)| (l - 1, Pauli::Z)).collect();
                let c = -model.g * plaquette_scale(model, plaq.len());
                terms.push(PauliTerm::from_sparse(n, c, &ops)?);
            }
            if model.gamma != 0.0 {
                let c = match model.convention {
                    Convention::Pauli => -model.gamma,
                    Convention::SpinHalf => -model.gamma / 2.0,
                };
                for q in 0..n {
                    terms.push(PauliTerm::from_sparse(n, c, &[(q, Pauli::X)])?);
                }
            }
        }
        Group::U1 => {
            if model.gamma != 0.0 {
                return Err(Error::UnsupportedModel(
                    "the transverse field exists only for Z2".into(),
                ));
            }
            for plaq in geom.plaquettes() {
                terms.extend(plaquette_flip_terms(n, plaq, model.g)?);
            }
        }
    }
    PauliSum::new(n, terms)
}

/// One Gauss-law operator per site, in site order.
///
/// Z2: `V_r` is the product of sigma-x over the links touching `r`.
/// U(1): `G_x = sum (+-) E_l` with `E = sigma^z / 2` and the link orientation
/// fixed by the geometry.
pub fn gauss_operators(model: &GaugeModel, geom: Geometry) -> Result<Vec<PauliSum>> {
    let n = geom.n_links();
    geom.site_links()
        .iter()
        .map(|links| match model.group {
            Group::Z2 => {
                let ops: Vec<_> = links.iter().map(|&(l, _)| (l - 1, Pauli::X)).collect();
                Ok(PauliSum::from_term(PauliTerm::from_sparse(n, 1.0, &ops)?))
            }
            Group::U1 => PauliSum::new(
                n,
                links
                    .iter()
                    .map(|&(l, s)| PauliTerm::from_sparse(n, 0.5 * f64::from(s), &[(l - 1, Pauli::Z)]))
                    .collect::<Result<Vec<_>>>()?,
            ),
        })
        .collect()
}

/// `sum_x G_x^2` for U(1) models.
pub fn gauss_squared_sum(model: &GaugeModel, geom: Geometry) -> Result<PauliSum> {
    if model.group != Group::U1 {
        return Err(Error::UnsupportedModel(
            "sum of squared Gauss charges is defined for U(1) only".into(),
        ));
    }
    let mut total = PauliSum::zero(geom.n_links());
    for g in gauss_operators(model, geom)? {
        total = total.add(&g.multiply(&g)?)?;
    }
    Ok(total)
}

/// Winding operators of the periodic two-plaquette lattice.
#[derive(Debug, Clone)]
pub struct Windings {
    pub x: PauliSum,
    /// Cut through links 1 and 3.
    pub y13: PauliSum,
    /// Cut through links 5 and 6.
    pub y56: PauliSum,
}

pub fn winding_operators(geom: Geometry) -> Result<Windings> {
    if geom != Geometry::TwoSquarePbc {
        return Err(Error::UnsupportedModel(format!(
            "winding numbers need the periodic two-plaquette lattice, not {geom}"
        )));
    }
    let n = geom.n_links();
    let xx = |a: usize, b: usize| {
        PauliTerm::from_sparse(n, 1.0, &[(a - 1, Pauli::X), (b - 1, Pauli::X)]).map(PauliSum::from_term)
    };
    Ok(Windings {
        x: xx(4, 2)?,
        y13: xx(1, 3)?,
        y56: xx(5, 6)?,
    })
}

/// Eigenvalue of a single-term product operator (all letters equal to the
/// basis letter) on a basis string, or of a diagonal sum.
pub fn diagonal_value(op: &PauliSum, basis: Basis, index: usize) -> Result<f64> {
    if !op.is_diagonal_in(basis.letter()) {
        return Err(Error::NotDiagonal(op.to_string()));
    }
    Ok(op
        .terms()
        .iter()
        .map(|t| {
            let mask = t.support().iter().fold(0usize, |m, &q| m | 1 << q);
            let sign = if (index & mask).count_ones() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            sign * t.coefficient()
        })
        .sum())
}

/// Basis strings (as indices, ascending) whose Gauss-law eigenvalues, and
/// winding labels when given, match `sector`.
pub fn enumerate_sector(
    model: &GaugeModel,
    geom: Geometry,
    sector: &SectorSpec,
) -> Result<Vec<usize>> {
    let sites = geom.sites().len();
    if sector.gauss.len() != sites {
        return Err(Error::Config(format!(
            "sector has {} Gauss values but {geom} has {sites} sites",
            sector.gauss.len()
        )));
    }
    if model.group == Group::Z2 && sector.gauss.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::Config("Z2 Gauss eigenvalues must be +1 or -1".into()));
    }
    let windings = match sector.winding {
        Some(w) => {
            if model.group != Group::Z2 {
                return Err(Error::UnsupportedModel(
                    "winding sectors are defined for Z2 only".into(),
                ));
            }
            Some((w, winding_operators(geom)?))
        }
        None => None,
    };
    let basis = model.natural_basis();
    let gauss = gauss_operators(model, geom)?;
    let mut states = Vec::new();
    'scan: for index in 0..(1usize << geom.n_links()) {
        for (op, &want) in gauss.iter().zip(&sector.gauss) {
            if (diagonal_value(op, basis, index)? - want).abs() > 1e-9 {
                continue 'scan;
            }
        }
        if let Some(((wx, wy), ops)) = &windings {
            if diagonal_value(&ops.x, basis, index)? != f64::from(*wx)
                || diagonal_value(&ops.y13, basis, index)? != f64::from(*wy)
            {
                continue;
            }
        }
        states.push(index);
    }
    Ok(states)
}

/// Parses a label of `n` characters `0`/`1`, link 1 rightmost, into a basis index.
pub fn parse_label(label: &str, n: usize) -> Result<usize> {
    if label.chars().count() != n {
        return Err(Error::InvalidLabel {
            label: label.into(),
            reason: format!("expected {n} characters"),
        });
    }
    label.chars().try_fold(0usize, |acc, c| match c {
        '0' => Ok(acc << 1),
        '1' => Ok(acc << 1 | 1),
        _ => Err(Error::InvalidLabel {
            label: label.into(),
            reason: format!("unexpected character {c:?}"),
        }),
    })
}

pub fn format_label(index: usize, n: usize) -> String {
    (0..n)
        .rev()
        .map(|q| if index >> q & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Product state for `label` in the given basis. In the x basis bit 0 maps to
/// `|+>` and bit 1 to `|->`, i.e. the Hadamard transform of the z-basis state.
pub fn initial_state(n: usize, label: &str, basis: Basis) -> Result<StateVector> {
    let index = parse_label(label, n)?;
    Ok(basis_state(n, index, basis))
}

pub fn basis_state(n: usize, index: usize, basis: Basis) -> StateVector {
    match basis {
        Basis::Z => StateVector::basis(n, index),
        Basis::X => {
            let dim = 1usize << n;
            let a = (dim as f64).sqrt().recip();
            let amps = (0..dim)
                .map(|i| {
                    let s = if (i & index).count_ones() % 2 == 0 { a } else { -a };
                    Complex64::new(s, 0.0)
                })
                .collect();
            StateVector::from_raw(n, amps)
        }
    }
}
