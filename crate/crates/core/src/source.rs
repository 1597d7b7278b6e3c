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

//! Noisy source surrogate, local measurement settings and Poissonian
//! coincidence counting.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, ONE};
use crate::state::{
    collective_spin_squared, dicke_state, fidelity_pure, CollectiveAxis, DensityMatrix, PureState,
};

/// Three-knob noise surrogate.
///
/// Applied in order: white-noise admixture `p`, excitation admixture `c`
/// (population leaking into the neighbouring excitation sectors through
/// `J₊ρJ₋ + J₋ρJ₊`), then uniform damping `q` of every off-diagonal element
/// in the H/V product basis. With `c = 0` this is
/// `q`-damped `(1−p)ρ + p·I/2ⁿ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub white_noise: f64,
    pub dephasing: f64,
    #[serde(default)]
    pub excitation: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::IDEAL
    }
}

impl NoiseModel {
    pub const IDEAL: NoiseModel = NoiseModel { white_noise: 0.0, dephasing: 1.0, excitation: 0.0 };

    /// Knobs reproducing fidelity 0.844 and `⟨J_x²⟩+⟨J_y²⟩ = 5.58` on `|D₄⁽²⁾⟩`;
    /// frozen output of [`NoiseModel::calibrate`].
    pub const CALIBRATED: NoiseModel =
        NoiseModel { white_noise: 0.0, dephasing: 0.916_223_036_4, excitation: 0.092_654_454_4 };

    pub fn new(white_noise: f64, dephasing: f64, excitation: f64) -> Result<Self> {
        let model = Self { white_noise, dephasing, excitation };
        model.validate()?;
        Ok(model)
    }

    pub fn white(p: f64) -> Result<Self> {
        Self::new(p, 1.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("white-noise weight", self.white_noise),
            ("dephasing factor", self.dephasing),
            ("excitation weight", self.excitation),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(format!("{name} {v} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Interpolates every knob towards the identity channel: `t = 0` is
    /// noiseless, `t = 1` is `self`.
    pub fn scaled(&self, t: f64) -> Self {
        Self {
            white_noise: (self.white_noise * t).clamp(0.0, 1.0),
            dephasing: (1.0 - (1.0 - self.dephasing) * t).clamp(0.0, 1.0),
            excitation: (self.excitation * t).clamp(0.0, 1.0),
        }
    }

    /// Finds `(q, c)` at `p = 0` such that the noisy `|D₄⁽²⁾⟩` has the given
    /// fidelity and `⟨J_x²⟩+⟨J_y²⟩` value.
    pub fn calibrate(fidelity: f64, spin_xy: f64) -> Result<Self> {
        let d = dicke_state(4, 2)?;
        let rho = d.to_density();
        let eval = |q: f64, c: f64| -> (f64, f64) {
            let noisy = apply_noise(&rho, &NoiseModel { white_noise: 0.0, dephasing: q, excitation: c });
            let f = fidelity_pure(&noisy, &d).unwrap_or(0.0);
            let w = collective_spin_squared(&noisy, CollectiveAxis::X)
                + collective_spin_squared(&noisy, CollectiveAxis::Y);
            (f, w)
        };
        // q matching the spin value for a given c (spin value increases with q).
        let q_for = |c: f64| -> Option<f64> {
            if eval(1.0, c).1 < spin_xy || eval(0.0, c).1 > spin_xy {
                return None;
            }
            Some(bisect(0.0, 1.0, |q| eval(q, c).1 - spin_xy))
        };
        let q0 = q_for(0.0).ok_or_else(|| Error::Domain("spin target unreachable".into()))?;
        if eval(q0, 0.0).0 < fidelity {
            return Err(Error::Domain("fidelity target unreachable with this spin value".into()));
        }
        // Fidelity decreases with c along the constant-spin curve.
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            match q_for(mid) {
                Some(q) if eval(q, mid).0 > fidelity => lo = mid,
                _ => hi = mid,
            }
        }
        let c = 0.5 * (lo + hi);
        let q = q_for(c).ok_or_else(|| Error::Domain("calibration failed".into()))?;
        Self::new(0.0, q, c)
    }
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let f_lo = f(lo);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn ladder(n: usize, raising: bool) -> CMatrix {
    let dim = 1usize << n;
    let mut m = CMatrix::zeros(dim, dim);
    for idx in 0..dim {
        for k in 0..n {
            let bit = 1usize << (n - 1 - k);
            if (idx & bit == 0) == raising {
                m[(idx ^ bit, idx)] += ONE;
            }
        }
    }
    m
}

/// Applies the noise surrogate; the output is always a valid density matrix.
pub fn apply_noise(rho: &DensityMatrix, model: &NoiseModel) -> DensityMatrix {
    let n = rho.n_qubits();
    let dim = rho.dim();
    let p = model.white_noise;
    let mut m = rho.elements().scale(1.0 - p);
    for i in 0..dim {
        m[(i, i)] += c(p / dim as f64, 0.0);
    }
    if model.excitation > 0.0 {
        let up = ladder(n, true);
        let down = up.adjoint();
        let leak = &up * &m * &down + &down * &m * &up;
        let tr = linalg::trace(&leak).re;
        if tr > 1e-14 {
            m = m.scale(1.0 - model.excitation) + leak.scale(model.excitation / tr);
        }
    }
    let q = model.dephasing;
    for i in 0..dim {
        for j in 0..dim {
            if i != j {
                m[(i, j)] *= q;
            }
        }
    }
    DensityMatrix::from_unnormalized(n, m).expect("noise channels preserve validity")
}

/// Local analysis basis. Bit 0 of an outcome is the first listed vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    /// H / V
    Z,
    /// +45° / −45°
    X,
    /// L / R with `|L⟩ = (|H⟩ + i|V⟩)/√2`
    Y,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::Z, Basis::X, Basis::Y];

    /// The two analysis states, outcome 0 first.
    pub fn vectors(self) -> [PureState; 2] {
        use crate::state::states::*;
        match self {
            Basis::Z => [h(), v()],
            Basis::X => [plus(), minus()],
            Basis::Y => [left(), right()],
        }
    }

    /// Rows are `⟨outcome|`.
    pub fn analyzer(self) -> CMatrix {
        let [a, b] = self.vectors();
        let mut m = CMatrix::zeros(2, 2);
        for col in 0..2 {
            m[(0, col)] = a.amplitude(col).conj();
            m[(1, col)] = b.amplitude(col).conj();
        }
        m
    }

    pub fn symbol(self) -> char {
        match self {
            Basis::Z => 'Z',
            Basis::X => 'X',
            Basis::Y => 'Y',
        }
    }

    /// Pauli operator whose eigenbasis this is.
    pub fn pauli(self) -> crate::state::Pauli {
        use crate::state::Pauli;
        match self {
            Basis::Z => Pauli::Z,
            Basis::X => Pauli::X,
            Basis::Y => Pauli::Y,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MeasurementSetting(pub Vec<Basis>);

impl MeasurementSetting {
    pub fn n_qubits(&self) -> usize {
        self.0.len()
    }

    /// Position in the Z < X < Y lexicographic enumeration.
    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, b| acc * 3 + *b as usize)
    }

    pub fn from_index(n: usize, mut index: usize) -> Self {
        let mut bases = vec![Basis::Z; n];
        for slot in bases.iter_mut().rev() {
            *slot = Basis::ALL[index % 3];
            index /= 3;
        }
        Self(bases)
    }
}

impl FromStr for MeasurementSetting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::Parse("empty measurement setting".into()));
        }
        s.chars()
            .map(|ch| match ch.to_ascii_uppercase() {
                'Z' => Ok(Basis::Z),
                'X' => Ok(Basis::X),
                'Y' => Ok(Basis::Y),
                other => Err(Error::Parse(format!("unknown basis '{other}'"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(MeasurementSetting)
    }
}

impl fmt::Display for MeasurementSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|b| write!(f, "{}", b.symbol()))
    }
}

/// All `3ⁿ` settings in lexicographic Z < X < Y order.
pub fn enumerate_settings(n: usize) -> Vec<MeasurementSetting> {
    let total = 3usize.pow(n as u32);
    (0..total).map(|k| MeasurementSetting::from_index(n, k)).collect()
}

/// Counts for one setting. Detector `2k + b` fires when mode `k` gives
/// outcome bit `b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RecordWire", into = "RecordWire")]
pub struct CountRecord {
    pub setting: MeasurementSetting,
    pub counts: Vec<u64>,
    pub efficiencies: Vec<f64>,
    pub duration_tag: Option<String>,
}

pub const RECORD_SCHEMA: &str = "dicke-lab/count-record/v1";

#[derive(Serialize, Deserialize)]
struct RecordWire {
    #[serde(default = "record_schema")]
    schema: String,
    setting: String,
    counts: Vec<u64>,
    efficiencies: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    duration_tag: Option<String>,
}

fn record_schema() -> String {
    RECORD_SCHEMA.into()
}

impl From<CountRecord> for RecordWire {
    fn from(r: CountRecord) -> Self {
        Self {
            schema: RECORD_SCHEMA.into(),
            setting: r.setting.to_string(),
            counts: r.counts,
            efficiencies: r.efficiencies,
            duration_tag: r.duration_tag,
        }
    }
}

impl TryFrom<RecordWire> for CountRecord {
    type Error = Error;

    fn try_from(w: RecordWire) -> Result<Self> {
        if w.schema != RECORD_SCHEMA {
            return Err(Error::Parse(format!("unexpected schema '{}'", w.schema)));
        }
        let record = CountRecord {
            setting: w.setting.parse()?,
            counts: w.counts,
            efficiencies: w.efficiencies,
            duration_tag: w.duration_tag,
        };
        record.validate()?;
        Ok(record)
    }
}

impl CountRecord {
    pub fn n_qubits(&self) -> usize {
        self.setting.n_qubits()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_qubits();
        if n > crate::state::MAX_QUBITS {
            return Err(Error::Capacity { n_qubits: n, max: crate::state::MAX_QUBITS });
        }
        if self.counts.len() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, found: self.counts.len() });
        }
        validate_efficiencies(&self.efficiencies, n)
    }

    /// Product of the efficiencies of the detectors firing for `outcome`.
    pub fn outcome_efficiency(&self, outcome: usize) -> f64 {
        outcome_efficiency(&self.efficiencies, outcome, self.n_qubits())
    }
}

fn validate_efficiencies(eff: &[f64], n: usize) -> Result<()> {
    if eff.len() != 2 * n {
        return Err(Error::DimensionMismatch { expected: 2 * n, found: eff.len() });
    }
    for (detector, &value) in eff.iter().enumerate() {
        if !(value > 0.0 && value <= 1.0) {
            return Err(Error::InvalidEfficiency { detector, value });
        }
    }
    Ok(())
}

pub(crate) fn outcome_efficiency(eff: &[f64], outcome: usize, n: usize) -> f64 {
    (0..n).map(|k| eff[2 * k + ((outcome >> (n - 1 - k)) & 1)]).product()
}

/// `U ρ U†` with `U` the tensor product of the setting's analyzers.
pub(crate) fn rotate(rho: &CMatrix, setting: &MeasurementSetting) -> CMatrix {
    let n = setting.n_qubits();
    let mut m = rho.clone();
    for (k, basis) in setting.0.iter().enumerate() {
        if *basis == Basis::Z {
            continue;
        }
        let u = basis.analyzer();
        m = apply_local(&m, &u, k, n);
    }
    m
}

/// `U_k M U_k†` for a single-qubit `U` acting on qubit `k`.
fn apply_local(m: &CMatrix, u: &CMatrix, k: usize, n: usize) -> CMatrix {
    let dim = m.nrows();
    let bit = 1usize << (n - 1 - k);
    let mut left = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        let b = usize::from(i & bit != 0);
        let i0 = i & !bit;
        for col in 0..dim {
            left[(i, col)] = u[(b, 0)] * m[(i0, col)] + u[(b, 1)] * m[(i0 | bit, col)];
        }
    }
    let mut out = CMatrix::zeros(dim, dim);
    for j in 0..dim {
        let b = usize::from(j & bit != 0);
        let j0 = j & !bit;
        for row in 0..dim {
            out[(row, j)] =
                left[(row, j0)] * u[(b, 0)].conj() + left[(row, j0 | bit)] * u[(b, 1)].conj();
        }
    }
    out
}

/// Born probabilities of the `2ⁿ` joint outcomes, outcome bit `b` of qubit
/// `k` at position `n−1−k`.
pub fn outcome_probabilities(rho: &DensityMatrix, setting: &MeasurementSetting) -> Result<Vec<f64>> {
    if setting.n_qubits() != rho.n_qubits() {
        return Err(Error::DimensionMismatch { expected: rho.n_qubits(), found: setting.n_qubits() });
    }
    let rotated = rotate(rho.elements(), setting);
    Ok((0..rho.dim()).map(|i| rotated[(i, i)].re.max(0.0)).collect())
}

/// Per-setting seed: splitmix64 finalizer applied to
/// `master + (index + 1)·0x9E3779B97F4A7C15`.
pub fn setting_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent Poisson draw per outcome with mean
/// `mean_events × probability × outcome efficiency`.
pub fn sample_counts(
    rho: &DensityMatrix,
    setting: &MeasurementSetting,
    mean_events: f64,
    efficiencies: &[f64],
    seed: u64,
) -> Result<CountRecord> {
    if !(mean_events > 0.0) || !mean_events.is_finite() {
        return Err(Error::Domain(format!("mean events {mean_events} must be positive")));
    }
    let n = rho.n_qubits();
    validate_efficiencies(efficiencies, n)?;
    let probs = outcome_probabilities(rho, setting)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = probs
        .iter()
        .enumerate()
        .map(|(outcome, p)| {
            let lambda = mean_events * p * outcome_efficiency(efficiencies, outcome, n);
            if lambda > 0.0 {
                Poisson::new(lambda).map(|d| d.sample(&mut rng) as u64).unwrap_or(0)
            } else {
                0
            }
        })
        .collect();
    Ok(CountRecord {
        setting: setting.clone(),
        counts,
        efficiencies: efficiencies.to_vec(),
        duration_tag: None,
    })
}

/// Samples every setting of a full tomography run; setting `k` uses
/// [`setting_seed`]`(seed, k)`, so the result does not depend on thread count.
pub fn simulate_tomography(
    rho: &DensityMatrix,
    mean_events: f64,
    efficiencies: &[f64],
    seed: u64,
) -> Result<Vec<CountRecord>> {
    enumerate_settings(rho.n_qubits())
        .into_par_iter()
        .enumerate()
        .map(|(k, s)| sample_counts(rho, &s, mean_events, efficiencies, setting_seed(seed, k as u64)))
        .collect()
}

/// Counts divided by the efficiency product of the firing detectors.
pub fn efficiency_correct(record: &CountRecord) -> Result<Vec<f64>> {
    validate_efficiencies(&record.efficiencies, record.n_qubits())?;
    Ok(record
        .counts
        .iter()
        .enumerate()
        .map(|(o, &n)| n as f64 / record.outcome_efficiency(o))
        .collect())
}

/// One JSON object per line.
pub fn records_to_json_lines(records: &[CountRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

/// Parses JSON lines; errors carry the 1-based line number. Blank lines are skipped.
pub fn records_from_json_lines(text: &str) -> Result<Vec<CountRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str::<CountRecord>(l)
                .map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))
        })
        .collect()
}
