// Copyright 2026 The dicke-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Finite-dimensional qubit state algebra.
//!
//! Basis ordering is fixed across the crate: qubit 0 (mode `a`) is the most
//! significant bit of a basis index, and `H ↦ 0`, `V ↦ 1`. A four-qubit basis
//! string `VVHH` is therefore index `0b1100`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, ONE, ZERO};

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 20;

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
/// Eigenvalue floor below which a density matrix is considered unphysical.
pub const PSD_TOL: f64 = 1e-8;

fn check_capacity(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 {
        return Err(Error::Domain("a register needs at least one qubit".into()));
    }
    if n_qubits > MAX_QUBITS {
        return Err(Error::Capacity { n_qubits, max: MAX_QUBITS });
    }
    Ok(())
}

#[inline]
pub(crate) fn bit_of(index: usize, qubit: usize, n_qubits: usize) -> usize {
    (index >> (n_qubits - 1 - qubit)) & 1
}

/// Normalized pure state of `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "wire::PureStateWire", into = "wire::PureStateWire")]
pub struct PureState {
    n_qubits: usize,
    amplitudes: CVector,
}

impl PureState {
    /// Builds a state from raw amplitudes, renormalizing them.
    pub fn new(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_capacity(n_qubits)?;
        let dim = 1usize << n_qubits;
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: amplitudes.len() });
        }
        let v = CVector::from_vec(amplitudes);
        let norm = v.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Domain("state vector has zero or non-finite norm".into()));
        }
        Ok(Self { n_qubits, amplitudes: v.unscale(norm) })
    }

    pub fn from_real(n_qubits: usize, amplitudes: &[f64]) -> Result<Self> {
        Self::new(n_qubits, amplitudes.iter().map(|&a| c(a, 0.0)).collect())
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_capacity(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::InvalidIndex { index, n_qubits });
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Self::new(n_qubits, amps)
    }

    /// Parses a string of `H`/`V` (or `0`/`1`) into a product basis state.
    pub fn from_label(label: &str) -> Result<Self> {
        let mut index = 0usize;
        for ch in label.chars() {
            let bit = match ch {
                'H' | 'h' | '0' => 0,
                'V' | 'v' | '1' => 1,
                other => return Err(Error::Parse(format!("unexpected polarization '{other}'"))),
            };
            index = (index << 1) | bit;
        }
        Self::basis(label.chars().count(), index)
    }

    /// Tensor product of single-qubit states, first factor is qubit 0.
    pub fn product(factors: &[PureState]) -> Result<Self> {
        let mut iter = factors.iter();
        let first = iter.next().ok_or_else(|| Error::Domain("empty product".into()))?;
        let mut acc = first.clone();
        for f in iter {
            acc = acc.tensor(f)?;
        }
        Ok(acc)
    }

    pub fn tensor(&self, other: &PureState) -> Result<Self> {
        let n = self.n_qubits + other.n_qubits;
        check_capacity(n)?;
        Ok(Self { n_qubits: n, amplitudes: linalg::kron_vec(&self.amplitudes, &other.amplitudes) })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `|⟨self|other⟩|²`, insensitive to global phase.
    pub fn overlap(&self, other: &PureState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix { n_qubits: self.n_qubits, elements: linalg::outer(&self.amplitudes) }
    }

    /// Applies a 2×2 operator to one qubit and renormalizes.
    pub fn apply_single(&self, qubit: usize, op: &CMatrix) -> Result<Self> {
        if qubit >= self.n_qubits {
            return Err(Error::InvalidIndex { index: qubit, n_qubits: self.n_qubits });
        }
        let n = self.n_qubits;
        let shift = n - 1 - qubit;
        let mut out = CVector::zeros(self.dim());
        for (idx, amp) in self.amplitudes.iter().enumerate() {
            if *amp == ZERO {
                continue;
            }
            let b = (idx >> shift) & 1;
            let base = idx & !(1 << shift);
            for nb in 0..2 {
                let coeff = op[(nb, b)];
                if coeff != ZERO {
                    out[base | (nb << shift)] += coeff * amp;
                }
            }
        }
        Self::new(n, out.iter().copied().collect())
    }

    /// Reorders qubits so that new qubit `k` is old qubit `order[k]`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        let n = self.n_qubits;
        validate_permutation(order, n)?;
        let mut out = vec![ZERO; self.dim()];
        for (idx, amp) in self.amplitudes.iter().enumerate() {
            let mut new_idx = 0;
            for &old in order {
                new_idx = (new_idx << 1) | bit_of(idx, old, n);
            }
            out[new_idx] = *amp;
        }
        Self::new(n, out)
    }

    /// `⟨J_axis²⟩` evaluated directly on the state vector.
    pub fn collective_spin_squared(&self, axis: CollectiveAxis) -> f64 {
        let j = apply_collective(axis, self.n_qubits, &self.amplitudes);
        j.norm_squared()
    }
}

fn validate_permutation(order: &[usize], n: usize) -> Result<()> {
    if order.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: order.len() });
    }
    let mut seen = vec![false; n];
    for &k in order {
        if k >= n {
            return Err(Error::InvalidIndex { index: k, n_qubits: n });
        }
        if std::mem::replace(&mut seen[k], true) {
            return Err(Error::InvalidSelection(format!("qubit {k} listed twice")));
        }
    }
    Ok(())
}

/// Hermitian, unit-trace density matrix of `n_qubits` qubits.
///
/// Construction checks Hermiticity and trace; positivity is checked by
/// [`DensityMatrix::new_physical`] and reported by [`DensityMatrix::min_eigenvalue`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "wire::DensityWire", into = "wire::DensityWire")]
pub struct DensityMatrix {
    n_qubits: usize,
    elements: CMatrix,
}

impl DensityMatrix {
    pub fn new(n_qubits: usize, elements: CMatrix) -> Result<Self> {
        check_capacity(n_qubits)?;
        let dim = 1usize << n_qubits;
        if elements.nrows() != dim || elements.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: elements.nrows() });
        }
        let defect = linalg::hermiticity_defect(&elements);
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let tr = linalg::trace(&elements);
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::Domain(format!("density matrix trace {tr} differs from 1")));
        }
        Ok(Self { n_qubits, elements: linalg::hermitize(&elements) })
    }

    /// As [`DensityMatrix::new`], additionally rejecting eigenvalues below `-1e-8`.
    pub fn new_physical(n_qubits: usize, elements: CMatrix) -> Result<Self> {
        let rho = Self::new(n_qubits, elements)?;
        let min = rho.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::Domain(format!("density matrix has eigenvalue {min:.3e}")));
        }
        Ok(rho)
    }

    /// Hermitizes and divides by the trace before validating.
    pub fn from_unnormalized(n_qubits: usize, elements: CMatrix) -> Result<Self> {
        let tr = linalg::trace(&elements).re;
        if !(tr > 0.0) {
            return Err(Error::Domain("matrix has non-positive trace".into()));
        }
        Self::new(n_qubits, linalg::hermitize(&elements).unscale(tr))
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        check_capacity(n_qubits)?;
        let dim = 1usize << n_qubits;
        Ok(Self { n_qubits, elements: linalg::identity(dim).unscale(dim as f64) })
    }

    /// Convex combination `Σ wᵢ ρᵢ`; weights are normalized.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let (_, first) = parts.first().ok_or_else(|| Error::Domain("empty mixture".into()))?;
        let mut acc = CMatrix::zeros(first.dim(), first.dim());
        let mut total = 0.0;
        for (w, rho) in parts {
            if *w < 0.0 {
                return Err(Error::Domain("negative mixture weight".into()));
            }
            if rho.dim() != first.dim() {
                return Err(Error::DimensionMismatch { expected: first.dim(), found: rho.dim() });
            }
            acc += rho.elements.scale(*w);
            total += w;
        }
        Self::from_unnormalized(first.n_qubits, acc.unscale(total))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn elements(&self) -> &CMatrix {
        &self.elements
    }

    pub fn into_elements(self) -> CMatrix {
        self.elements
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.elements[(row, col)]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.elements)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigh(&self.elements).0
    }

    pub fn purity(&self) -> f64 {
        linalg::trace_product(&self.elements, &self.elements).re
    }

    /// Eigenvector with the largest eigenvalue, as a pure state.
    pub fn principal_component(&self) -> PureState {
        let (_, vecs) = linalg::eigh(&self.elements);
        let col = vecs.column(self.dim() - 1).iter().copied().collect();
        PureState::new(self.n_qubits, col).expect("eigenvectors are normalized")
    }

    /// Reorders qubits so that new qubit `k` is old qubit `order[k]`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        let n = self.n_qubits;
        validate_permutation(order, n)?;
        let map: Vec<usize> = (0..self.dim())
            .map(|idx| order.iter().fold(0, |acc, &old| (acc << 1) | bit_of(idx, old, n)))
            .collect();
        let mut out = CMatrix::zeros(self.dim(), self.dim());
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                out[(map[i], map[j])] = self.elements[(i, j)];
            }
        }
        Ok(Self { n_qubits: n, elements: out })
    }

    /// `O ρ O†` followed by renormalization; fails if the result vanishes.
    pub fn conjugate(&self, op: &CMatrix) -> Result<Self> {
        if op.ncols() != self.dim() || op.nrows() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: op.nrows() });
        }
        Self::from_unnormalized(self.n_qubits, op * &self.elements * op.adjoint())
    }
}

/// One single-qubit Pauli factor; `I` is written `0` in labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> CMatrix {
        use linalg::pauli;
        match self {
            Pauli::I => pauli::id(),
            Pauli::X => pauli::x(),
            Pauli::Y => pauli::y(),
            Pauli::Z => pauli::z(),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => '0',
            Pauli::X => 'x',
            Pauli::Y => 'y',
            Pauli::Z => 'z',
        }
    }
}

/// Tensor label `σ_i ⊗ σ_j ⊗ …`, one factor per qubit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliLabel(pub Vec<Pauli>);

impl PauliLabel {
    pub fn n_qubits(&self) -> usize {
        self.0.len()
    }

    /// Position in the base-4 enumeration of all labels (qubit 0 most significant).
    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, p| acc * 4 + p.index())
    }

    pub fn from_index(n_qubits: usize, mut index: usize) -> Self {
        let mut factors = vec![Pauli::I; n_qubits];
        for slot in factors.iter_mut().rev() {
            *slot = Pauli::ALL[index % 4];
            index /= 4;
        }
        Self(factors)
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self(vec![Pauli::I; n_qubits])
    }

    pub fn all(n_qubits: usize) -> impl Iterator<Item = PauliLabel> {
        (0..1usize << (2 * n_qubits)).map(move |k| PauliLabel::from_index(n_qubits, k))
    }
}

impl FromStr for PauliLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|ch| match ch.to_ascii_lowercase() {
                '0' | 'i' => Ok(Pauli::I),
                'x' => Ok(Pauli::X),
                'y' => Ok(Pauli::Y),
                'z' => Ok(Pauli::Z),
                other => Err(Error::Parse(format!("unknown Pauli symbol '{other}'"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(PauliLabel)
    }
}

impl fmt::Display for PauliLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|p| write!(f, "{}", p.symbol()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CollectiveAxis {
    X,
    Y,
    Z,
}

impl CollectiveAxis {
    pub const ALL: [CollectiveAxis; 3] = [CollectiveAxis::X, CollectiveAxis::Y, CollectiveAxis::Z];
}

/// Symmetric Dicke state `|D_n^(m)⟩`: equal superposition of all basis
/// strings with exactly `m` V's.
pub fn dicke_state(n: usize, m: usize) -> Result<PureState> {
    check_capacity(n)?;
    if m > n {
        return Err(Error::Domain(format!("excitation number {m} exceeds qubit count {n}")));
    }
    let dim = 1usize << n;
    let amps = (0..dim)
        .map(|idx| if idx.count_ones() as usize == m { ONE } else { ZERO })
        .collect();
    PureState::new(n, amps)
}

/// Frequently used named states.
pub mod states {
    use super::*;

    pub fn h() -> PureState {
        PureState::from_real(1, &[1.0, 0.0]).unwrap()
    }
    pub fn v() -> PureState {
        PureState::from_real(1, &[0.0, 1.0]).unwrap()
    }
    /// `|+⟩ = (|H⟩ + |V⟩)/√2`, the +45° polarization.
    pub fn plus() -> PureState {
        PureState::from_real(1, &[1.0, 1.0]).unwrap()
    }
    pub fn minus() -> PureState {
        PureState::from_real(1, &[1.0, -1.0]).unwrap()
    }
    /// `|L⟩ = (|H⟩ + i|V⟩)/√2`.
    pub fn left() -> PureState {
        PureState::new(1, vec![ONE, linalg::I]).unwrap()
    }
    /// `|R⟩ = (|H⟩ − i|V⟩)/√2`.
    pub fn right() -> PureState {
        PureState::new(1, vec![ONE, -linalg::I]).unwrap()
    }

    /// Single-qubit state at polar angle `theta` from `|H⟩` and azimuth `phi`.
    pub fn bloch(theta: f64, phi: f64) -> PureState {
        let (s, co) = (theta / 2.0).sin_cos();
        PureState::new(1, vec![c(co, 0.0), Complex64::from_polar(s, phi)]).unwrap()
    }

    pub fn w3() -> PureState {
        dicke_state(3, 1).unwrap()
    }
    /// Spin-flipped W state `(|HVV⟩+|VHV⟩+|VVH⟩)/√3`.
    pub fn w3_bar() -> PureState {
        dicke_state(3, 2).unwrap()
    }
    /// `(|W₃⟩ − |W̄₃⟩)/√2`.
    pub fn g3() -> PureState {
        let w = w3();
        let wb = w3_bar();
        let amps = w.amplitudes().iter().zip(wb.amplitudes().iter()).map(|(a, b)| a - b).collect();
        PureState::new(3, amps).unwrap()
    }
    /// `(|H…H⟩ + |V…V⟩)/√2`.
    pub fn ghz(n: usize) -> Result<PureState> {
        check_capacity(n)?;
        let dim = 1usize << n;
        let mut amps = vec![ZERO; dim];
        amps[0] = ONE;
        amps[dim - 1] = ONE;
        PureState::new(n, amps)
    }
    /// Equal mixture of `|W₃⟩` and `|W̄₃⟩`.
    pub fn w3_mixture() -> DensityMatrix {
        DensityMatrix::mixture(&[(0.5, &w3().to_density()), (0.5, &w3_bar().to_density())]).unwrap()
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Dense matrix of a Pauli tensor product in the fixed qubit order.
pub fn pauli_operator(label: &PauliLabel) -> CMatrix {
    label
        .0
        .iter()
        .fold(CMatrix::identity(1, 1), |acc, p| linalg::kron(&acc, &p.matrix()))
}

/// `Tr(ρ O)` for a Hermitian observable.
pub fn expectation(rho: &DensityMatrix, observable: &CMatrix) -> Result<f64> {
    check_dims(rho.dim(), observable.nrows())?;
    check_dims(rho.dim(), observable.ncols())?;
    let defect = linalg::hermiticity_defect(observable);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let value = linalg::trace_product(rho.elements(), observable);
    debug_assert!(value.im.abs() < 1e-10 * (1.0 + value.re.abs()));
    Ok(value.re)
}

/// Expectation of a Pauli string without building the dense operator.
pub fn pauli_expectation(rho: &DensityMatrix, label: &PauliLabel) -> Result<f64> {
    check_dims(rho.n_qubits(), label.n_qubits())?;
    let (flip, ymask, zmask) = pauli_masks(label);
    let mut acc = ZERO;
    for col in 0..rho.dim() {
        // σ|col⟩ = phase · |col ^ flip⟩
        let row = col ^ flip;
        let phase = pauli_phase(col, ymask, zmask);
        acc += rho.elements()[(col, row)] * phase;
    }
    Ok(acc.re)
}

fn pauli_masks(label: &PauliLabel) -> (usize, usize, usize) {
    let n = label.n_qubits();
    let (mut flip, mut ymask, mut zmask) = (0, 0, 0);
    for (k, p) in label.0.iter().enumerate() {
        let bit = 1 << (n - 1 - k);
        match p {
            Pauli::I => {}
            Pauli::X => flip |= bit,
            Pauli::Y => {
                flip |= bit;
                ymask |= bit;
            }
            Pauli::Z => zmask |= bit,
        }
    }
    (flip, ymask, zmask)
}

/// Phase picked up by `|col⟩` under the Pauli string encoded by the masks.
fn pauli_phase(col: usize, ymask: usize, zmask: usize) -> Complex64 {
    // Y|0⟩ = i|1⟩, Y|1⟩ = −i|0⟩, Z|1⟩ = −|1⟩.
    let ny = ymask.count_ones();
    let y_ones = (col & ymask).count_ones();
    let z_ones = (col & zmask).count_ones();
    let mut phase = match ny % 4 {
        0 => ONE,
        1 => linalg::I,
        2 => -ONE,
        _ => -linalg::I,
    };
    if (y_ones + z_ones) % 2 == 1 {
        phase = -phase;
    }
    phase
}

/// `⟨target|ρ|target⟩`, clamped to `[0, 1]`.
pub fn fidelity_pure(rho: &DensityMatrix, target: &PureState) -> Result<f64> {
    check_dims(rho.dim(), target.dim())?;
    let v = target.amplitudes();
    let value = v.dotc(&(rho.elements() * v));
    debug_assert!(value.im.abs() < 1e-10);
    Ok(value.re.clamp(0.0, 1.0))
}

/// Outcome of projecting one qubit onto a given direction.
#[derive(Clone, Debug)]
pub struct Projection<S> {
    /// Post-measurement state of the other qubits; `None` when the outcome
    /// has zero probability.
    pub remaining: Option<S>,
    pub probability: f64,
}

const ZERO_PROBABILITY: f64 = 1e-14;

/// Contracts `qubit` with `⟨direction|` and returns the renormalized remainder.
pub fn project_qubit(
    state: &PureState,
    qubit: usize,
    direction: &PureState,
) -> Result<Projection<PureState>> {
    let n = state.n_qubits();
    if qubit >= n {
        return Err(Error::InvalidIndex { index: qubit, n_qubits: n });
    }
    if n < 2 {
        return Err(Error::Domain("cannot project the only qubit of a register".into()));
    }
    check_dims(2, direction.dim())?;
    let d = direction.amplitudes();
    let mut out = vec![ZERO; 1 << (n - 1)];
    for (idx, amp) in state.amplitudes().iter().enumerate() {
        let b = bit_of(idx, qubit, n);
        out[remove_bit(idx, qubit, n)] += d[b].conj() * amp;
    }
    let probability: f64 = out.iter().map(|a| a.norm_sqr()).sum();
    let remaining = if probability > ZERO_PROBABILITY {
        Some(PureState::new(n - 1, out)?)
    } else {
        None
    };
    Ok(Projection { remaining, probability })
}

/// Mixed-state version of [`project_qubit`]: `⟨d|ρ|d⟩ / p`.
pub fn project_qubit_mixed(
    rho: &DensityMatrix,
    qubit: usize,
    direction: &PureState,
) -> Result<Projection<DensityMatrix>> {
    let n = rho.n_qubits();
    if qubit >= n {
        return Err(Error::InvalidIndex { index: qubit, n_qubits: n });
    }
    if n < 2 {
        return Err(Error::Domain("cannot project the only qubit of a register".into()));
    }
    check_dims(2, direction.dim())?;
    let d = direction.amplitudes();
    let sub = 1usize << (n - 1);
    let mut out = CMatrix::zeros(sub, sub);
    for i in 0..rho.dim() {
        let bi = bit_of(i, qubit, n);
        let ri = remove_bit(i, qubit, n);
        for j in 0..rho.dim() {
            let bj = bit_of(j, qubit, n);
            out[(ri, remove_bit(j, qubit, n))] += d[bi].conj() * rho.elements()[(i, j)] * d[bj];
        }
    }
    let probability = linalg::trace(&out).re;
    let remaining = if probability > ZERO_PROBABILITY {
        Some(DensityMatrix::from_unnormalized(n - 1, out)?)
    } else {
        None
    };
    Ok(Projection { remaining, probability })
}

fn remove_bit(index: usize, qubit: usize, n: usize) -> usize {
    let shift = n - 1 - qubit;
    let high = (index >> (shift + 1)) << shift;
    let low = index & ((1 << shift) - 1);
    high | low
}

/// Reduced state on `keep`; output qubits follow ascending original order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.n_qubits();
    if keep.is_empty() {
        return Err(Error::InvalidSelection("keep set is empty".into()));
    }
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if let Some(&bad) = keep.iter().find(|&&k| k >= n) {
        return Err(Error::InvalidIndex { index: bad, n_qubits: n });
    }
    let traced: Vec<usize> = (0..n).filter(|k| !keep.contains(k)).collect();
    let kdim = 1usize << keep.len();
    let tdim = 1usize << traced.len();
    let compose = |kept: usize, env: usize| -> usize {
        let mut idx = 0usize;
        for q in 0..n {
            let bit = if let Some(pos) = keep.iter().position(|&k| k == q) {
                (kept >> (keep.len() - 1 - pos)) & 1
            } else {
                let pos = traced.iter().position(|&k| k == q).unwrap();
                (env >> (traced.len() - 1 - pos)) & 1
            };
            idx = (idx << 1) | bit;
        }
        idx
    };
    let table: Vec<Vec<usize>> =
        (0..kdim).map(|a| (0..tdim).map(|e| compose(a, e)).collect()).collect();
    let mut out = CMatrix::zeros(kdim, kdim);
    for a in 0..kdim {
        for b in 0..kdim {
            let mut acc = ZERO;
            for e in 0..tdim {
                acc += rho.elements()[(table[a][e], table[b][e])];
            }
            out[(a, b)] = acc;
        }
    }
    DensityMatrix::new(keep.len(), out)
}

/// `J_axis |ψ⟩` with `J_axis = ½ Σ_k σ_axis^(k)`.
pub(crate) fn apply_collective(axis: CollectiveAxis, n: usize, v: &CVector) -> CVector {
    let mut out = CVector::zeros(v.len());
    for (idx, amp) in v.iter().enumerate() {
        if *amp == ZERO {
            continue;
        }
        for k in 0..n {
            let bit = 1usize << (n - 1 - k);
            let set = idx & bit != 0;
            match axis {
                CollectiveAxis::X => out[idx ^ bit] += amp * 0.5,
                CollectiveAxis::Y => {
                    // Y|0⟩ = i|1⟩, Y|1⟩ = −i|0⟩
                    let ph = if set { -linalg::I } else { linalg::I };
                    out[idx ^ bit] += amp * ph * 0.5;
                }
                CollectiveAxis::Z => out[idx] += amp * if set { -0.5 } else { 0.5 },
            }
        }
    }
    out
}

/// Dense collective spin component `J_axis` on `n` qubits.
pub fn collective_spin_operator(n: usize, axis: CollectiveAxis) -> Result<CMatrix> {
    check_capacity(n)?;
    let dim = 1usize << n;
    let mut m = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let e = CVector::from_fn(dim, |i, _| if i == col { ONE } else { ZERO });
        m.set_column(col, &apply_collective(axis, n, &e));
    }
    Ok(m)
}

/// `⟨J_axis²⟩ = Tr(ρ J_axis²)`.
pub fn collective_spin_squared(rho: &DensityMatrix, axis: CollectiveAxis) -> f64 {
    let n = rho.n_qubits();
    // Jρ column by column, then Tr(J·Jρ) using J|i⟩ as column i of J.
    let dim = rho.dim();
    let mut jr = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let column = rho.elements().column(col).into_owned();
        jr.set_column(col, &apply_collective(axis, n, &column));
    }
    let mut acc = ZERO;
    for i in 0..dim {
        let e = CVector::from_fn(dim, |r, _| if r == i { ONE } else { ZERO });
        let ji = apply_collective(axis, n, &e); // column i of J
        for (j, jji) in ji.iter().enumerate() {
            if *jji != ZERO {
                acc += jji.conj() * jr[(j, i)];
            }
        }
    }
    acc.re
}

pub(crate) mod wire {
    use super::*;

    pub const PURE_SCHEMA: &str = "dicke-lab/pure-state/v1";
    pub const DENSITY_SCHEMA: &str = "dicke-lab/density-matrix/v1";

    #[derive(Serialize, Deserialize)]
    pub struct PureStateWire {
        #[serde(default = "pure_schema")]
        pub schema: String,
        pub n_qubits: usize,
        pub amplitudes: Vec<[f64; 2]>,
    }

    #[derive(Serialize, Deserialize)]
    pub struct DensityWire {
        #[serde(default = "density_schema")]
        pub schema: String,
        pub n_qubits: usize,
        /// Row-major `(re, im)` pairs.
        pub elements: Vec<[f64; 2]>,
    }

    fn pure_schema() -> String {
        PURE_SCHEMA.into()
    }
    fn density_schema() -> String {
        DENSITY_SCHEMA.into()
    }

    impl From<PureState> for PureStateWire {
        fn from(s: PureState) -> Self {
            Self {
                schema: PURE_SCHEMA.into(),
                n_qubits: s.n_qubits,
                amplitudes: s.amplitudes.iter().map(|a| [a.re, a.im]).collect(),
            }
        }
    }

    impl TryFrom<PureStateWire> for PureState {
        type Error = Error;

        fn try_from(w: PureStateWire) -> Result<Self> {
            if w.schema != PURE_SCHEMA {
                return Err(Error::Parse(format!("unexpected schema '{}'", w.schema)));
            }
            check_capacity(w.n_qubits)?;
            let amps: Vec<Complex64> = w.amplitudes.iter().map(|p| c(p[0], p[1])).collect();
            let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>();
            if (norm - 1.0).abs() > 1e-10 {
                return Err(Error::Domain(format!("amplitudes have squared norm {norm}")));
            }
            let dim = 1usize << w.n_qubits;
            if amps.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: amps.len() });
            }
            // Stored amplitudes are kept bit-exact; no renormalization.
            Ok(PureState { n_qubits: w.n_qubits, amplitudes: CVector::from_vec(amps) })
        }
    }

    impl From<DensityMatrix> for DensityWire {
        fn from(rho: DensityMatrix) -> Self {
            let dim = rho.dim();
            let mut elements = Vec::with_capacity(dim * dim);
            for i in 0..dim {
                for j in 0..dim {
                    let z = rho.elements[(i, j)];
                    elements.push([z.re, z.im]);
                }
            }
            Self { schema: DENSITY_SCHEMA.into(), n_qubits: rho.n_qubits, elements }
        }
    }

    impl TryFrom<DensityWire> for DensityMatrix {
        type Error = Error;

        fn try_from(w: DensityWire) -> Result<Self> {
            if w.schema != DENSITY_SCHEMA {
                return Err(Error::Parse(format!("unexpected schema '{}'", w.schema)));
            }
            check_capacity(w.n_qubits)?;
            let dim = 1usize << w.n_qubits;
            if w.elements.len() != dim * dim {
                return Err(Error::DimensionMismatch { expected: dim * dim, found: w.elements.len() });
            }
            let m = CMatrix::from_row_iterator(dim, dim, w.elements.iter().map(|p| c(p[0], p[1])));
            let defect = linalg::hermiticity_defect(&m);
            if defect > HERMITIAN_TOL {
                return Err(Error::NotHermitian(defect));
            }
            let tr = linalg::trace(&m);
            if (tr - ONE).norm() > TRACE_TOL {
                return Err(Error::Domain(format!("density matrix trace {tr} differs from 1")));
            }
            Ok(DensityMatrix { n_qubits: w.n_qubits, elements: m })
        }
    }
}
