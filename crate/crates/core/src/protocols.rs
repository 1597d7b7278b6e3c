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

//! Measurement-induced protocols on four-qubit resources: single-qubit
//! projections, photon loss, singlet fraction, telecloning and
//! open-destination teleportation.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, ZERO};
use crate::optim::{Lbfgs, StepOutcome};
use crate::source::Basis;
use crate::state::{
    fidelity_pure, partial_trace, project_qubit, project_qubit_mixed, states, DensityMatrix, PureState,
};
use crate::witness::{collective_spin_witness, filtered_ghz_witness, FilterConfig, WitnessVerdict};

/// The four Bell states: `ψ± = (HV ± VH)/√2`, `φ± = (HH ± VV)/√2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BellState {
    #[serde(rename = "phi+")]
    PhiPlus,
    #[serde(rename = "phi-")]
    PhiMinus,
    #[serde(rename = "psi+")]
    PsiPlus,
    #[serde(rename = "psi-")]
    PsiMinus,
}

impl BellState {
    pub const ALL: [BellState; 4] = [BellState::PhiPlus, BellState::PhiMinus, BellState::PsiPlus, BellState::PsiMinus];

    pub fn state(self) -> PureState {
        let amps: [f64; 4] = match self {
            BellState::PhiPlus => [1.0, 0.0, 0.0, 1.0],
            BellState::PhiMinus => [1.0, 0.0, 0.0, -1.0],
            BellState::PsiPlus => [0.0, 1.0, 1.0, 0.0],
            BellState::PsiMinus => [0.0, 1.0, -1.0, 0.0],
        };
        PureState::from_real(2, &amps).expect("valid Bell amplitudes")
    }

    pub fn name(self) -> &'static str {
        match self {
            BellState::PhiPlus => "phi+",
            BellState::PhiMinus => "phi-",
            BellState::PsiPlus => "psi+",
            BellState::PsiMinus => "psi-",
        }
    }
}

/// Bell state with the largest fidelity (first one on ties) and that fidelity.
pub fn best_bell(rho2: &DensityMatrix) -> Result<(BellState, f64)> {
    let mut best = (BellState::PhiPlus, f64::NEG_INFINITY);
    for b in BellState::ALL {
        let f = fidelity_pure(rho2, &b.state())?;
        if f > best.1 + 1e-12 {
            best = (b, f);
        }
    }
    Ok(best)
}

/// Named three-qubit references for projection results.
#[derive(Clone, Debug, PartialEq)]
pub enum Reference {
    W3,
    W3Bar,
    G3,
    /// The named state with the highest fidelity.
    Closest,
    Custom(String, PureState),
}

impl Reference {
    fn candidates(&self) -> Vec<(String, PureState)> {
        match self {
            Reference::W3 => vec![("W3".into(), states::w3())],
            Reference::W3Bar => vec![("W3bar".into(), states::w3_bar())],
            Reference::G3 => vec![("G3".into(), states::g3())],
            Reference::Closest => vec![
                ("W3".into(), states::w3()),
                ("W3bar".into(), states::w3_bar()),
                ("G3".into(), states::g3()),
            ],
            Reference::Custom(name, s) => vec![(name.clone(), s.clone())],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", content = "state", rename_all = "snake_case")]
pub enum Residual {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl Residual {
    pub fn density(&self) -> DensityMatrix {
        match self {
            Residual::Pure(p) => p.to_density(),
            Residual::Mixed(m) => m.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProjectionReport {
    pub measured_qubit: usize,
    pub direction: PureState,
    pub probability: f64,
    pub residual_state: Residual,
    pub fidelity_to_reference: f64,
    pub reference_name: String,
    /// Three-qubit collective-spin witness on the residual.
    pub spin_witness: Option<WitnessVerdict>,
    /// Filtered GHZ witness, when requested.
    pub ghz_witness: Option<WitnessVerdict>,
}

fn finish_projection(
    qubit: usize,
    direction: &PureState,
    probability: f64,
    residual: Residual,
    reference: &Reference,
    ghz: Option<&FilterConfig>,
) -> Result<ProjectionReport> {
    let rho = residual.density();
    let mut best: Option<(String, f64)> = None;
    for (name, target) in reference.candidates() {
        let f = fidelity_pure(&rho, &target)?;
        if best.as_ref().map_or(true, |(_, b)| f > *b + 1e-12) {
            best = Some((name, f));
        }
    }
    let (reference_name, fidelity_to_reference) = best.expect("at least one reference");
    let spin_witness = if rho.n_qubits() == 3 { Some(collective_spin_witness(&rho, 3)?) } else { None };
    let ghz_witness = match ghz {
        Some(cfg) => Some(filtered_ghz_witness(&rho, cfg)?.0),
        None => None,
    };
    Ok(ProjectionReport {
        measured_qubit: qubit,
        direction: direction.clone(),
        probability,
        residual_state: residual,
        fidelity_to_reference,
        reference_name,
        spin_witness,
        ghz_witness,
    })
}

/// Projects `qubit` of a pure state onto `direction` and compares the
/// residual with `reference`.
pub fn classify_projection(
    state: &PureState,
    qubit: usize,
    direction: &PureState,
    reference: &Reference,
    ghz: Option<&FilterConfig>,
) -> Result<ProjectionReport> {
    let proj = project_qubit(state, qubit, direction)?;
    let residual = proj.remaining.ok_or(Error::ZeroProbability)?;
    finish_projection(qubit, direction, proj.probability, Residual::Pure(residual), reference, ghz)
}

/// Mixed-state version of [`classify_projection`].
pub fn classify_projection_mixed(
    rho: &DensityMatrix,
    qubit: usize,
    direction: &PureState,
    reference: &Reference,
    ghz: Option<&FilterConfig>,
) -> Result<ProjectionReport> {
    let proj = project_qubit_mixed(rho, qubit, direction)?;
    let residual = proj.remaining.ok_or(Error::ZeroProbability)?;
    finish_projection(qubit, direction, proj.probability, Residual::Mixed(residual), reference, ghz)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LossReport {
    pub lost: Vec<usize>,
    pub rho: DensityMatrix,
    /// Uhlmann fidelity with `(|W₃⟩⟨W₃| + |W̄₃⟩⟨W̄₃|)/2`, attached when one
    /// qubit of a four-qubit state is lost.
    pub fidelity_to_w_mixture: Option<f64>,
    pub spin_witness: Option<WitnessVerdict>,
}

/// `(Tr √(√σ ρ √σ))²`; only used for the mixed loss reference.
fn mixed_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let s = linalg::hermitian_map(sigma.elements(), |x| x.max(0.0).sqrt());
    let inner = &s * rho.elements() * &s;
    let tr: f64 = linalg::eigh(&inner).0.iter().map(|x| x.max(0.0).sqrt()).sum();
    (tr * tr).min(1.0)
}

/// Traces out `lost` and reports the remaining state.
pub fn loss_analysis(rho: &DensityMatrix, lost: &[usize]) -> Result<LossReport> {
    let n = rho.n_qubits();
    let mut lost: Vec<usize> = lost.to_vec();
    lost.sort_unstable();
    lost.dedup();
    if lost.is_empty() || lost.len() >= n {
        return Err(Error::InvalidSelection("lost qubits must form a non-empty proper subset".into()));
    }
    if let Some(&bad) = lost.iter().find(|&&k| k >= n) {
        return Err(Error::InvalidIndex { index: bad, n_qubits: n });
    }
    let keep: Vec<usize> = (0..n).filter(|k| !lost.contains(k)).collect();
    let reduced = partial_trace(rho, &keep)?;
    let fidelity_to_w_mixture =
        (n == 4 && lost.len() == 1).then(|| mixed_fidelity(&reduced, &states::w3_mixture()));
    let spin_witness = match reduced.n_qubits() {
        3 | 4 => Some(collective_spin_witness(&reduced, reduced.n_qubits())?),
        _ => None,
    };
    Ok(LossReport { lost, rho: reduced, fidelity_to_w_mixture, spin_witness })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MsfMethod {
    Spectral,
    Optimization,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MsfReport {
    pub value: f64,
    pub optimal_bell_state: PureState,
    pub method: MsfMethod,
}

/// Columns are the magic basis `(φ⁺, iφ⁻, iψ⁺, ψ⁻)`; every maximally
/// entangled state is a real combination of them up to a global phase.
fn magic_basis() -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let i = linalg::I;
    #[rustfmt::skip]
    let cols = [
        [c(h, 0.0), ZERO, ZERO, c(h, 0.0)],
        [i * h, ZERO, ZERO, -i * h],
        [ZERO, i * h, i * h, ZERO],
        [ZERO, c(h, 0.0), c(-h, 0.0), ZERO],
    ];
    CMatrix::from_fn(4, 4, |r, k| cols[k][r])
}

fn check_two_qubits(rho2: &DensityMatrix) -> Result<()> {
    if rho2.n_qubits() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: rho2.n_qubits() });
    }
    Ok(())
}

/// Largest overlap with a maximally entangled state: the top eigenvalue of
/// the real part of `ρ` in the magic basis.
pub fn maximal_singlet_fraction(rho2: &DensityMatrix) -> Result<MsfReport> {
    check_two_qubits(rho2)?;
    let e = magic_basis();
    let rm = e.adjoint() * rho2.elements() * &e;
    let real: DMatrix<f64> = rm.map(|z| z.re);
    let eig = (&real + real.transpose()).scale(0.5).symmetric_eigen();
    let k = eig.eigenvalues.imax();
    let x = eig.eigenvectors.column(k);
    let vec: Vec<_> = (0..4).map(|r| (0..4).map(|j| e[(r, j)] * x[j]).sum()).collect();
    Ok(MsfReport {
        value: eig.eigenvalues[k],
        optimal_bell_state: PureState::new(2, vec)?,
        method: MsfMethod::Spectral,
    })
}

fn euler_unitary(a: f64, b: f64, g: f64) -> CMatrix {
    let rz = |t: f64| {
        CMatrix::from_row_slice(2, 2, &[num_complex::Complex64::from_polar(1.0, -t / 2.0), ZERO, ZERO, num_complex::Complex64::from_polar(1.0, t / 2.0)])
    };
    let (s, co) = (b / 2.0).sin_cos();
    let ry = CMatrix::from_row_slice(2, 2, &[c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)]);
    rz(a) * ry * rz(g)
}

/// Independent check on [`maximal_singlet_fraction`]: ascent of
/// `⟨ψ⁺|(U⊗1)†ρ(U⊗1)|ψ⁺⟩` over Euler angles of `U`, from `restarts`
/// seeded starting points, with central-difference gradients.
pub fn maximal_singlet_fraction_search(rho2: &DensityMatrix, restarts: usize, seed: u64) -> Result<MsfReport> {
    check_two_qubits(rho2)?;
    let psi = BellState::PsiPlus.state();
    let overlap = |x: &[f64]| -> f64 {
        let u = linalg::kron(&euler_unitary(x[0], x[1], x[2]), &linalg::identity(2));
        let v = &u * psi.amplitudes();
        linalg::quadratic_form(rho2.elements(), &v)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<Vec<f64>> = (0..restarts.max(1))
        .map(|_| (0..3).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect())
        .collect();
    let mut best = (f64::NEG_INFINITY, vec![0.0; 3]);
    for x0 in starts {
        let objective = |x: &[f64], g: &mut [f64]| {
            let h = 1e-6;
            let mut xp = x.to_vec();
            for i in 0..3 {
                xp[i] = x[i] + h;
                let fp = overlap(&xp);
                xp[i] = x[i] - h;
                let fm = overlap(&xp);
                xp[i] = x[i];
                g[i] = -(fp - fm) / (2.0 * h);
            }
            -overlap(x)
        };
        let mut opt = Lbfgs::new(objective, x0, 6);
        for _ in 0..200 {
            if opt.step() == StepOutcome::Stalled {
                break;
            }
        }
        if -opt.value() > best.0 {
            best = (-opt.value(), opt.x().to_vec());
        }
    }
    let u = linalg::kron(&euler_unitary(best.1[0], best.1[1], best.1[2]), &linalg::identity(2));
    let v = &u * psi.amplitudes();
    Ok(MsfReport {
        value: best.0,
        optimal_bell_state: PureState::new(2, v.iter().copied().collect())?,
        method: MsfMethod::Optimization,
    })
}

/// Average teleportation fidelity `(2f + 1)/3` of a channel with singlet fraction `f`.
pub fn teleportation_fidelity(singlet_fraction: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&singlet_fraction) {
        return Err(Error::Domain(format!("singlet fraction {singlet_fraction} outside [0, 1]")));
    }
    Ok((2.0 * singlet_fraction + 1.0) / 3.0)
}

/// Gauss–Legendre nodes and weights on `[−1, 1]` (Golub–Welsch).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let jacobi = DMatrix::<f64>::from_fn(n, n, |i, j| {
        if i.abs_diff(j) == 1 {
            let k = i.max(j) as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = jacobi.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], 2.0 * eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Pairwise (tree) summation in index order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => pairwise_sum(&values[..n / 2]) + pairwise_sum(&values[n / 2..]),
    }
}

fn pauli_by_index(k: usize) -> CMatrix {
    use linalg::pauli;
    match k {
        0 => pauli::id(),
        1 => pauli::x(),
        2 => pauli::y(),
        _ => pauli::z(),
    }
}

/// Residual state of the resource after a Bell measurement of
/// `(input, sender)` with outcome `bell`, and its probability.
fn bell_measure(input: &PureState, resource: &PureState, sender: usize, bell: BellState) -> Option<(PureState, f64)> {
    let n = resource.n_qubits();
    let joint = input.tensor(resource).ok()?;
    // Qubit 0 is the input, resource qubit k is joint qubit k + 1.
    let b = bell.state();
    let total = n + 1;
    let s = sender + 1;
    let mut out = vec![ZERO; 1 << (n - 1)];
    for (idx, amp) in joint.amplitudes().iter().enumerate() {
        if *amp == ZERO {
            continue;
        }
        let bi = (idx >> (total - 1)) & 1;
        let bs = (idx >> (total - 1 - s)) & 1;
        let mut rest = 0usize;
        for q in 1..total {
            if q != s {
                rest = (rest << 1) | ((idx >> (total - 1 - q)) & 1);
            }
        }
        out[rest] += b.amplitude(bi * 2 + bs).conj() * amp;
    }
    let p: f64 = out.iter().map(|a| a.norm_sqr()).sum();
    if p < 1e-14 {
        return None;
    }
    Some((PureState::new(n - 1, out).ok()?, p))
}

/// Index of `qubit` among the resource qubits other than `sender`.
fn residual_index(qubit: usize, sender: usize) -> usize {
    if qubit > sender { qubit - 1 } else { qubit }
}

/// Pauli correction per Bell outcome for a channel in Bell state `frame`:
/// the one that makes ideal teleportation through `frame` exact.
fn corrections_for(frame: BellState) -> [usize; 4] {
    let probe = states::bloch(1.1, 0.7);
    let mut table = [0; 4];
    for (k, outcome) in BellState::ALL.iter().enumerate() {
        let (res, _) = bell_measure(&probe, &frame.state(), 0, *outcome).expect("ideal channel");
        let mut best = (0, -1.0);
        for p in 0..4 {
            let corrected = res.apply_single(0, &pauli_by_index(p)).expect("single qubit");
            let f = corrected.overlap(&probe).expect("same size");
            if f > best.1 {
                best = (p, f);
            }
        }
        table[k] = best.0;
    }
    table
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReceiverFidelity {
    pub qubit: usize,
    pub channel: BellState,
    pub average: f64,
    pub equatorial: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TeleclonReport {
    pub sender: usize,
    /// Mean over receivers of the sphere-averaged fidelity.
    pub average: f64,
    /// Mean over receivers of the equator-averaged fidelity.
    pub equatorial: f64,
    pub receivers: Vec<ReceiverFidelity>,
    /// Seeded Monte-Carlo estimate of `average` over 64 random inputs.
    pub monte_carlo_average: f64,
    /// `(2f+1)/3` from the sender–receiver singlet fraction, averaged over receivers.
    pub channel_formula: f64,
    pub quadrature_nodes: usize,
}

/// Per-receiver fidelities for one input state.
fn telecloning_point(
    resource: &PureState,
    sender: usize,
    receivers: &[(usize, [usize; 4])],
    input: &PureState,
) -> Vec<f64> {
    let mut acc = vec![0.0; receivers.len()];
    for (k, outcome) in BellState::ALL.iter().enumerate() {
        let Some((res, p)) = bell_measure(input, resource, sender, *outcome) else { continue };
        let rho = res.to_density();
        for (slot, (q, table)) in receivers.iter().enumerate() {
            let single = partial_trace(&rho, &[residual_index(*q, sender)]).expect("valid index");
            let fixed = single.conjugate(&pauli_by_index(table[k])).expect("unitary");
            acc[slot] += p * fidelity_pure(&fixed, input).expect("one qubit");
        }
    }
    acc
}

/// 1→(n−1) telecloning: the input is Bell-measured against `sender`'s
/// qubit and each receiver applies the Pauli correction of its channel
/// frame (the best Bell state of its marginal with the sender).
///
/// The sphere average uses a Gauss–Legendre(cos θ) × uniform-φ product rule
/// with about `n_samples` nodes; the equator uses `n_samples` uniform nodes.
/// `seed` only drives the Monte-Carlo cross-check.
pub fn telecloning_fidelities(state: &PureState, sender: usize, n_samples: usize, seed: u64) -> Result<TeleclonReport> {
    let n = state.n_qubits();
    if n < 2 {
        return Err(Error::Domain("telecloning needs at least two qubits".into()));
    }
    if sender >= n {
        return Err(Error::InvalidIndex { index: sender, n_qubits: n });
    }
    if n_samples < 8 {
        return Err(Error::Domain("at least 8 quadrature nodes are required".into()));
    }
    let rho = state.to_density();
    let mut receivers = Vec::new();
    let mut channel = Vec::new();
    for q in (0..n).filter(|&q| q != sender) {
        let pair = partial_trace(&rho, &[sender.min(q), sender.max(q)])?;
        // Order the pair as (sender, receiver).
        let pair = if sender < q { pair } else { pair.permute(&[1, 0])? };
        let (frame, _) = best_bell(&pair)?;
        receivers.push((q, corrections_for(frame), frame));
        channel.push(teleportation_fidelity(maximal_singlet_fraction(&pair)?.value.clamp(0.0, 1.0))?);
    }
    let rx: Vec<(usize, [usize; 4])> = receivers.iter().map(|(q, t, _)| (*q, *t)).collect();

    let n_theta = ((n_samples as f64 / 2.0).sqrt().ceil() as usize).max(7);
    let n_phi = 2 * n_theta;
    let (xs, ws) = gauss_legendre(n_theta);
    let mut nodes = Vec::with_capacity(n_theta * n_phi);
    for (x, w) in xs.iter().zip(&ws) {
        for j in 0..n_phi {
            let phi = std::f64::consts::TAU * j as f64 / n_phi as f64;
            nodes.push((x.acos(), phi, w / (2.0 * n_phi as f64)));
        }
    }
    let sphere: Vec<Vec<f64>> = nodes
        .par_iter()
        .map(|(t, p, w)| telecloning_point(state, sender, &rx, &states::bloch(*t, *p)).iter().map(|f| f * w).collect())
        .collect();
    let equator: Vec<Vec<f64>> = (0..n_samples)
        .into_par_iter()
        .map(|j| {
            let phi = std::f64::consts::TAU * j as f64 / n_samples as f64;
            telecloning_point(state, sender, &rx, &states::bloch(std::f64::consts::FRAC_PI_2, phi))
                .iter()
                .map(|f| f / n_samples as f64)
                .collect()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mc_inputs: Vec<(f64, f64)> = (0..64)
        .map(|_| (rng.random_range(-1.0f64..1.0).acos(), rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    let mc: Vec<f64> = mc_inputs
        .par_iter()
        .map(|(t, p)| {
            let f = telecloning_point(state, sender, &rx, &states::bloch(*t, *p));
            f.iter().sum::<f64>() / f.len() as f64
        })
        .collect();

    let column = |rows: &[Vec<f64>], k: usize| pairwise_sum(&rows.iter().map(|r| r[k]).collect::<Vec<_>>());
    let receivers: Vec<ReceiverFidelity> = receivers
        .iter()
        .enumerate()
        .map(|(k, (q, _, frame))| ReceiverFidelity {
            qubit: *q,
            channel: *frame,
            average: column(&sphere, k),
            equatorial: column(&equator, k),
        })
        .collect();
    let m = receivers.len() as f64;
    Ok(TeleclonReport {
        sender,
        average: receivers.iter().map(|r| r.average).sum::<f64>() / m,
        equatorial: receivers.iter().map(|r| r.equatorial).sum::<f64>() / m,
        receivers,
        monte_carlo_average: pairwise_sum(&mc) / mc.len() as f64,
        channel_formula: channel.iter().sum::<f64>() / m,
        quadrature_nodes: nodes.len(),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OdtOutcome {
    /// Outcome symbols, e.g. `"HV"`, `"+-"`, `"RL"`.
    pub outcome: String,
    pub probability: f64,
    pub residual: Option<PureState>,
    pub bell_fidelity: f64,
    pub bell_state: Option<BellState>,
}

fn outcome_symbol(basis: Basis, bit: usize) -> char {
    match (basis, bit) {
        (Basis::Z, 0) => 'H',
        (Basis::Z, _) => 'V',
        (Basis::X, 0) => '+',
        (Basis::X, _) => '-',
        (Basis::Y, 0) => 'L',
        (Basis::Y, _) => 'R',
    }
}

/// Measures two qubits in the given local bases and reports, per joint
/// outcome, the remaining pair and its best Bell fidelity.
pub fn odt_projection(state: &PureState, measured: [usize; 2], bases: [Basis; 2]) -> Result<Vec<OdtOutcome>> {
    let n = state.n_qubits();
    if n < 3 {
        return Err(Error::Domain("open-destination teleportation needs at least three qubits".into()));
    }
    for &q in &measured {
        if q >= n {
            return Err(Error::InvalidIndex { index: q, n_qubits: n });
        }
    }
    if measured[0] == measured[1] {
        return Err(Error::InvalidSelection("measured qubits must differ".into()));
    }
    let mut out = Vec::with_capacity(4);
    for b0 in 0..2 {
        for b1 in 0..2 {
            let v0 = bases[0].vectors()[b0].clone();
            let v1 = bases[1].vectors()[b1].clone();
            // Project the higher index first so the lower one keeps its position.
            let (first, second) = if measured[0] > measured[1] {
                ((measured[0], v0.clone()), (measured[1], v1.clone()))
            } else {
                ((measured[1], v1.clone()), (measured[0], v0.clone()))
            };
            let p1 = project_qubit(state, first.0, &first.1)?;
            let (residual, probability) = match p1.remaining {
                Some(r) => {
                    let p2 = project_qubit(&r, second.0, &second.1)?;
                    (p2.remaining, p1.probability * p2.probability)
                }
                None => (None, 0.0),
            };
            let (bell_state, bell_fidelity) = match (&residual, n) {
                (Some(r), 4) => {
                    let (b, f) = best_bell(&r.to_density())?;
                    (Some(b), f)
                }
                _ => (None, 0.0),
            };
            out.push(OdtOutcome {
                outcome: [outcome_symbol(bases[0], b0), outcome_symbol(bases[1], b1)].iter().collect(),
                probability,
                residual,
                bell_fidelity,
                bell_state,
            });
        }
    }
    Ok(out)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::dicke_state;
    use approx::assert_abs_diff_eq;

    fn d() -> PureState {
        dicke_state(4, 2).unwrap()
    }

    #[test]
    fn projection_classes() {
        let v = classify_projection(&d(), 3, &states::v(), &Reference::Closest, None).unwrap();
        assert_eq!(v.reference_name, "W3");
        assert_abs_diff_eq!(v.probability, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(v.fidelity_to_reference, 1.0, epsilon = 1e-12);

        let m = classify_projection(&d(), 3, &states::minus(), &Reference::G3, Some(&FilterConfig::default())).unwrap();
        assert_abs_diff_eq!(m.probability, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(m.fidelity_to_reference, 1.0, epsilon = 1e-12);
        assert!(m.ghz_witness.unwrap().entangled);

        let h = classify_projection(&d(), 3, &states::h(), &Reference::Closest, None).unwrap();
        assert_eq!(h.reference_name, "W3bar");
        assert_abs_diff_eq!(h.probability, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(h.fidelity_to_reference, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(h.spin_witness.unwrap().value, 3.5, epsilon = 1e-12);
    }

    #[test]
    fn zero_probability_projection_is_an_error() {
        let hh = PureState::from_label("HHH").unwrap();
        assert!(matches!(
            classify_projection(&hh, 0, &states::v(), &Reference::W3, None),
            Err(Error::ZeroProbability)
        ));
    }

    #[test]
    fn mixed_projection_matches_pure() {
        let pure = classify_projection(&d(), 1, &states::bloch(0.9, 2.2), &Reference::Closest, None).unwrap();
        let mixed = classify_projection_mixed(&d().to_density(), 1, &states::bloch(0.9, 2.2), &Reference::Closest, None).unwrap();
        assert_abs_diff_eq!(pure.probability, mixed.probability, epsilon = 1e-12);
        assert_abs_diff_eq!(pure.fidelity_to_reference, mixed.fidelity_to_reference, epsilon = 1e-12);
    }

    #[test]
    fn loss_of_one_photon() {
        let rho = d().to_density();
        let r = loss_analysis(&rho, &[3]).unwrap();
        assert_abs_diff_eq!(r.fidelity_to_w_mixture.unwrap(), 1.0, epsilon = 1e-10);
        let w = r.spin_witness.unwrap();
        assert_abs_diff_eq!(w.value, 3.5, epsilon = 1e-12);
        assert!(w.entangled);
        for q in 0..3 {
            let other = loss_analysis(&rho, &[q]).unwrap();
            assert!((other.rho.elements() - r.rho.elements()).norm() < 1e-12);
        }
    }

    #[test]
    fn loss_of_two_photons() {
        let r = loss_analysis(&d().to_density(), &[2, 3]).unwrap();
        for (i, want) in [1.0, 2.0, 2.0, 1.0].iter().enumerate() {
            assert_abs_diff_eq!(r.rho.get(i, i).re, want / 6.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(r.rho.get(1, 2).re, 1.0 / 3.0, epsilon = 1e-12);
        assert!(r.fidelity_to_w_mixture.is_none());
        assert!(loss_analysis(&d().to_density(), &[]).is_err());
        assert!(loss_analysis(&d().to_density(), &[0, 1, 2, 3]).is_err());
        assert!(loss_analysis(&d().to_density(), &[9]).is_err());
    }

    #[test]
    fn singlet_fraction_examples() {
        let pair = partial_trace(&d().to_density(), &[0, 1]).unwrap();
        let msf = maximal_singlet_fraction(&pair).unwrap();
        assert_abs_diff_eq!(msf.value, 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fidelity_pure(&pair, &msf.optimal_bell_state).unwrap(), msf.value, epsilon = 1e-12);
        let psi = maximal_singlet_fraction(&BellState::PsiPlus.state().to_density()).unwrap();
        assert_abs_diff_eq!(psi.value, 1.0, epsilon = 1e-12);
        let flat = maximal_singlet_fraction(&DensityMatrix::maximally_mixed(2).unwrap()).unwrap();
        assert_abs_diff_eq!(flat.value, 0.25, epsilon = 1e-12);
        assert!(maximal_singlet_fraction(&d().to_density()).is_err());
    }

    #[test]
    fn singlet_fraction_search_agrees_on_remnant() {
        let pair = partial_trace(&d().to_density(), &[0, 1]).unwrap();
        let a = maximal_singlet_fraction(&pair).unwrap();
        let b = maximal_singlet_fraction_search(&pair, 32, 3).unwrap();
        assert_abs_diff_eq!(a.value, b.value, epsilon = 1e-6);
        assert_eq!(b.method, MsfMethod::Optimization);
    }

    #[test]
    fn teleportation_fidelity_examples() {
        assert_abs_diff_eq!(teleportation_fidelity(1.0).unwrap(), 1.0);
        assert_abs_diff_eq!(teleportation_fidelity(0.25).unwrap(), 0.5);
        assert_abs_diff_eq!(teleportation_fidelity(2.0 / 3.0).unwrap(), 7.0 / 9.0, epsilon = 1e-15);
        assert!(teleportation_fidelity(1.5).is_err());
        assert!(teleportation_fidelity(-0.1).is_err());
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
        // Exact up to degree 13.
        let int: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert_abs_diff_eq!(int, 2.0 / 13.0, epsilon = 1e-13);
    }

    #[test]
    fn pairwise_sum_matches_plain_sum() {
        let v: Vec<f64> = (0..1000).map(|k| 1.0 / (k as f64 + 1.0)).collect();
        assert_abs_diff_eq!(pairwise_sum(&v), v.iter().sum::<f64>(), epsilon = 1e-12);
    }

    #[test]
    fn telecloning_on_dicke() {
        let r = telecloning_fidelities(&d(), 3, 974, 1).unwrap();
        assert!(r.quadrature_nodes >= 974);
        assert_abs_diff_eq!(r.equatorial, 5.0 / 6.0, epsilon = 1e-10);
        assert_abs_diff_eq!(r.average, 7.0 / 9.0, epsilon = 1e-10);
        assert_abs_diff_eq!(r.channel_formula, 7.0 / 9.0, epsilon = 1e-10);
        assert!((r.monte_carlo_average - r.average).abs() < 0.02);
        for rx in &r.receivers {
            assert_eq!(rx.channel, BellState::PsiPlus);
            assert_abs_diff_eq!(rx.average, r.receivers[0].average, epsilon = 1e-10);
            assert_abs_diff_eq!(rx.equatorial, r.receivers[0].equatorial, epsilon = 1e-10);
        }
    }

    #[test]
    fn telecloning_through_bell_pairs() {
        let psi = BellState::PsiPlus.state();
        let r = telecloning_fidelities(&psi.tensor(&psi).unwrap(), 0, 100, 1).unwrap();
        assert_eq!(r.receivers[0].qubit, 1);
        assert_abs_diff_eq!(r.receivers[0].average, 1.0, epsilon = 1e-10);
        for rx in &r.receivers[1..] {
            assert_abs_diff_eq!(rx.average, 0.5, epsilon = 1e-10);
        }
    }

    #[test]
    fn odt_zz_on_last_pair() {
        let out = odt_projection(&d(), [2, 3], [Basis::Z, Basis::Z]).unwrap();
        let get = |s: &str| out.iter().find(|o| o.outcome == s).unwrap();
        for s in ["HV", "VH"] {
            assert_abs_diff_eq!(get(s).probability, 1.0 / 3.0, epsilon = 1e-12);
            assert_eq!(get(s).bell_state, Some(BellState::PsiPlus));
            assert_abs_diff_eq!(get(s).bell_fidelity, 1.0, epsilon = 1e-12);
        }
        for s in ["HH", "VV"] {
            assert_abs_diff_eq!(get(s).probability, 1.0 / 6.0, epsilon = 1e-12);
            assert_abs_diff_eq!(get(s).bell_fidelity, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn odt_rotated_bases() {
        // Derived by projection algebra: (+,−) leaves φ⁻ and (R,L) leaves φ⁺,
        // each with probability 1/12.
        let xx = odt_projection(&d(), [2, 3], [Basis::X, Basis::X]).unwrap();
        let pm = xx.iter().find(|o| o.outcome == "+-").unwrap();
        assert_eq!(pm.bell_state, Some(BellState::PhiMinus));
        assert_abs_diff_eq!(pm.bell_fidelity, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pm.probability, 1.0 / 12.0, epsilon = 1e-12);
        let pp = xx.iter().find(|o| o.outcome == "++").unwrap();
        assert_abs_diff_eq!(pp.probability, 5.0 / 12.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pp.bell_fidelity, 0.8, epsilon = 1e-12);

        let yy = odt_projection(&d(), [2, 3], [Basis::Y, Basis::Y]).unwrap();
        let rl = yy.iter().find(|o| o.outcome == "RL").unwrap();
        assert_eq!(rl.bell_state, Some(BellState::PhiPlus));
        assert_abs_diff_eq!(rl.bell_fidelity, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rl.probability, 1.0 / 12.0, epsilon = 1e-12);
    }

    #[test]
    fn odt_errors() {
        assert!(odt_projection(&d(), [2, 2], [Basis::Z, Basis::Z]).is_err());
        assert!(odt_projection(&d(), [2, 4], [Basis::Z, Basis::Z]).is_err());
    }

    #[test]
    fn odt_measured_order_is_respected() {
        let a = odt_projection(&d(), [3, 1], [Basis::X, Basis::Z]).unwrap();
        let b = odt_projection(&d(), [1, 3], [Basis::Z, Basis::X]).unwrap();
        for (oa, sym) in a.iter().zip(["+H", "+V", "-H", "-V"]) {
            assert_eq!(oa.outcome, sym);
            let swapped: String = sym.chars().rev().collect();
            let ob = b.iter().find(|o| o.outcome == swapped).unwrap();
            assert_abs_diff_eq!(oa.probability, ob.probability, epsilon = 1e-12);
        }
    }
}
