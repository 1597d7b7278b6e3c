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

//! State reconstruction from coincidence counts: correlation tensor, linear
//! inversion and maximum-likelihood fitting.
//!
//! The likelihood is the Poisson likelihood with each setting's unknown
//! overall rate profiled out:
//!
//! `L(ρ) = Σ_s [ Σ_o n_so ln max(η_so p_so, 1e-12) − N_s ln Σ_o η_so p_so ]`
//!
//! where `p_so` is the Born probability, `η_so` the outcome efficiency and
//! `N_s` the setting total. Constant terms are dropped, so all-zero data
//! gives `L = 0`.

use nalgebra::Cholesky;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix};
use crate::optim::{Lbfgs, StepOutcome};
use crate::source::{
    efficiency_correct, enumerate_settings, outcome_efficiency, outcome_probabilities,
    setting_seed, Basis, CountRecord, MeasurementSetting,
};
use crate::state::{pauli_expectation, pauli_operator, DensityMatrix, Pauli, PauliLabel};

/// Probability floor inside the logarithm.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// The `4ⁿ` Pauli correlators, indexed by [`PauliLabel::index`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTensor {
    pub n_qubits: usize,
    pub values: Vec<f64>,
}

impl CorrelationTensor {
    pub fn get(&self, label: &PauliLabel) -> f64 {
        self.values[label.index()]
    }

    /// Exact correlators `Tr(ρ σ_label)`.
    pub fn from_state(rho: &DensityMatrix) -> Self {
        let n = rho.n_qubits();
        let values = PauliLabel::all(n)
            .map(|l| pauli_expectation(rho, &l).expect("label length matches"))
            .collect();
        Self { n_qubits: n, values }
    }
}

fn check_coverage<'a, I>(n: usize, settings: I) -> Result<Vec<usize>>
where
    I: Iterator<Item = &'a MeasurementSetting>,
{
    let total = 3usize.pow(n as u32);
    let mut slot = vec![usize::MAX; total];
    for (pos, s) in settings.enumerate() {
        if s.n_qubits() != n {
            return Err(Error::DimensionMismatch { expected: n, found: s.n_qubits() });
        }
        let k = s.index();
        if slot[k] != usize::MAX {
            return Err(Error::DuplicateSetting(s.to_string()));
        }
        slot[k] = pos;
    }
    if let Some(k) = slot.iter().position(|&p| p == usize::MAX) {
        return Err(Error::MissingSetting(MeasurementSetting::from_index(n, k).to_string()));
    }
    Ok(slot)
}

/// Correlators from efficiency-corrected counts. Labels containing
/// identities average the marginal correlator over every compatible setting.
pub fn correlation_tensor(records: &[CountRecord]) -> Result<CorrelationTensor> {
    let rates = records
        .iter()
        .map(|r| Ok((r.setting.clone(), efficiency_correct(r)?)))
        .collect::<Result<Vec<_>>>()?;
    correlation_tensor_from_rates(&rates)
}

/// As [`correlation_tensor`], from already corrected rates per setting.
pub fn correlation_tensor_from_rates(rates: &[(MeasurementSetting, Vec<f64>)]) -> Result<CorrelationTensor> {
    let n = rates.first().ok_or_else(|| Error::MissingSetting("(all)".into()))?.0.n_qubits();
    check_coverage(n, rates.iter().map(|(s, _)| s))?;
    let dim = 1usize << n;
    let mut values = vec![0.0; 1 << (2 * n)];
    for (setting, r) in rates {
        if r.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: r.len() });
        }
        let total: f64 = r.iter().sum();
        if !(total > 0.0) {
            return Err(Error::EmptySetting(setting.to_string()));
        }
        // Each subset of measured qubits (bit k ↔ qubit n−1−k) defines one label.
        for subset in 0..dim {
            let corr: f64 = r
                .iter()
                .enumerate()
                .map(|(o, x)| if (o & subset).count_ones() % 2 == 0 { *x } else { -*x })
                .sum::<f64>()
                / total;
            let label = PauliLabel(
                (0..n)
                    .map(|k| if subset >> (n - 1 - k) & 1 == 1 { setting.0[k].pauli() } else { Pauli::I })
                    .collect(),
            );
            let identities = n - subset.count_ones() as usize;
            values[label.index()] += corr / 3f64.powi(identities as i32);
        }
    }
    Ok(CorrelationTensor { n_qubits: n, values })
}

/// `ρ = 2⁻ⁿ Σ T[label] σ_label`; Hermitian with unit trace, possibly not positive.
pub fn linear_inversion(t: &CorrelationTensor) -> CMatrix {
    let dim = 1usize << t.n_qubits;
    let mut rho = CMatrix::zeros(dim, dim);
    for label in PauliLabel::all(t.n_qubits) {
        let v = t.get(&label);
        if v != 0.0 {
            rho += pauli_operator(&label).scale(v);
        }
    }
    rho.unscale(dim as f64)
}

/// Clips negative eigenvalues of a Hermitian matrix and renormalizes.
pub fn project_to_physical(m: &CMatrix, n_qubits: usize) -> Result<DensityMatrix> {
    let clipped = linalg::hermitian_map(m, |x| x.max(0.0));
    DensityMatrix::from_unnormalized(n_qubits, clipped)
}

struct SettingData {
    analyzer: CMatrix,
    counts: Vec<f64>,
    eta: Vec<f64>,
    total: f64,
}

/// Count data prepared for likelihood evaluation.
pub struct TomographyData {
    n_qubits: usize,
    settings: Vec<SettingData>,
    skipped: Vec<String>,
    rates: Option<Vec<(MeasurementSetting, Vec<f64>)>>,
}

fn analyzer_of(setting: &MeasurementSetting) -> CMatrix {
    setting
        .0
        .iter()
        .fold(CMatrix::identity(1, 1), |acc, b: &Basis| linalg::kron(&acc, &b.analyzer()))
}

impl TomographyData {
    /// Requires every setting exactly once; settings without counts are skipped.
    pub fn from_records(records: &[CountRecord]) -> Result<Self> {
        let first = records.first().ok_or_else(|| Error::MissingSetting("(all)".into()))?;
        let n = first.n_qubits();
        check_coverage(n, records.iter().map(|r| &r.setting))?;
        let entries = records
            .iter()
            .map(|r| {
                r.validate()?;
                let eta = (0..1usize << n).map(|o| r.outcome_efficiency(o)).collect();
                Ok((r.setting.clone(), r.counts.iter().map(|&x| x as f64).collect(), eta))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::build(n, entries)
    }

    /// Expected (non-integer) counts `mean × η × p` of `rho`; infinite-statistics data.
    pub fn expected(rho: &DensityMatrix, mean_events: f64, efficiencies: &[f64]) -> Result<Self> {
        let n = rho.n_qubits();
        let entries = enumerate_settings(n)
            .into_iter()
            .map(|s| {
                let p = outcome_probabilities(rho, &s)?;
                let eta: Vec<f64> = (0..p.len()).map(|o| outcome_efficiency(efficiencies, o, n)).collect();
                let counts = p.iter().zip(&eta).map(|(p, e)| mean_events * p * e).collect();
                Ok((s, counts, eta))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::build(n, entries)
    }

    fn build(n: usize, entries: Vec<(MeasurementSetting, Vec<f64>, Vec<f64>)>) -> Result<Self> {
        let mut settings = Vec::new();
        let mut skipped = Vec::new();
        let mut rates = Vec::new();
        let mut complete = true;
        for (s, counts, eta) in entries {
            let total: f64 = counts.iter().sum();
            if total > 0.0 {
                rates.push((s.clone(), counts.iter().zip(&eta).map(|(x, e)| x / e).collect()));
                settings.push(SettingData { analyzer: analyzer_of(&s), counts, eta, total });
            } else {
                complete = false;
                skipped.push(s.to_string());
            }
        }
        Ok(Self { n_qubits: n, settings, skipped, rates: complete.then_some(rates) })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn skipped(&self) -> &[String] {
        &self.skipped
    }

    pub fn total_counts(&self) -> f64 {
        self.settings.iter().map(|s| s.total).sum()
    }

    /// Correlators of the data, or `None` when a setting has no counts.
    pub fn correlation_tensor(&self) -> Option<CorrelationTensor> {
        self.rates.as_ref().and_then(|r| correlation_tensor_from_rates(r).ok())
    }

    fn setting_terms(&self, rho: &CMatrix, s: &SettingData, want_grad: bool) -> (f64, Option<CMatrix>) {
        let u = &s.analyzer;
        let ur = u * rho;
        let dim = rho.nrows();
        let mut ll = 0.0;
        let mut big_p = 0.0;
        let mut probs = vec![0.0; dim];
        for o in 0..dim {
            let p: f64 = (0..dim).map(|j| (ur[(o, j)] * u[(o, j)].conj()).re).sum();
            probs[o] = p.max(0.0);
            big_p += probs[o] * s.eta[o];
        }
        for o in 0..dim {
            let n = s.counts[o];
            if n > 0.0 {
                ll += n * (probs[o] * s.eta[o]).max(PROBABILITY_FLOOR).ln();
            }
        }
        ll -= s.total * big_p.max(PROBABILITY_FLOOR).ln();
        if !want_grad {
            return (ll, None);
        }
        let mut weighted = u.clone();
        for o in 0..dim {
            let pe = probs[o] * s.eta[o];
            let first = if pe > PROBABILITY_FLOOR { s.counts[o] / probs[o] } else { 0.0 };
            let w = first - s.total / big_p.max(PROBABILITY_FLOOR) * s.eta[o];
            for j in 0..dim {
                weighted[(o, j)] *= w;
            }
        }
        (ll, Some(u.adjoint() * weighted))
    }

    /// Log-likelihood and, optionally, `G = ∂L/∂ρ` (so `dL = Tr(G dρ)`).
    fn evaluate(&self, rho: &CMatrix, want_grad: bool) -> (f64, Option<CMatrix>) {
        let parts: Vec<(f64, Option<CMatrix>)> =
            self.settings.par_iter().map(|s| self.setting_terms(rho, s, want_grad)).collect();
        let dim = rho.nrows();
        let mut ll = 0.0;
        let mut g = want_grad.then(|| CMatrix::zeros(dim, dim));
        for (l, gs) in parts {
            ll += l;
            if let (Some(acc), Some(gs)) = (g.as_mut(), gs) {
                *acc += gs;
            }
        }
        (ll, g)
    }

    pub fn log_likelihood(&self, rho: &DensityMatrix) -> Result<f64> {
        if rho.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, found: rho.n_qubits() });
        }
        Ok(self.evaluate(rho.elements(), false).0)
    }

    /// `R` and `H` of the `RρR` iteration: `G = R − H`.
    fn rrr_operators(&self, rho: &CMatrix) -> (CMatrix, CMatrix) {
        let dim = rho.nrows();
        let parts: Vec<(CMatrix, CMatrix)> = self
            .settings
            .par_iter()
            .map(|s| {
                let u = &s.analyzer;
                let ur = u * rho;
                let probs: Vec<f64> = (0..dim)
                    .map(|o| (0..dim).map(|j| (ur[(o, j)] * u[(o, j)].conj()).re).sum::<f64>().max(0.0))
                    .collect();
                let big_p: f64 = probs.iter().zip(&s.eta).map(|(p, e)| p * e).sum();
                let mut wr = u.clone();
                let mut wh = u.clone();
                for o in 0..dim {
                    let pe = probs[o] * s.eta[o];
                    let r = if pe > PROBABILITY_FLOOR { s.counts[o] / probs[o] } else { 0.0 };
                    let h = s.total / big_p.max(PROBABILITY_FLOOR) * s.eta[o];
                    for j in 0..dim {
                        wr[(o, j)] *= r;
                        wh[(o, j)] *= h;
                    }
                }
                (u.adjoint() * wr, u.adjoint() * wh)
            })
            .collect();
        let mut r = CMatrix::zeros(dim, dim);
        let mut h = CMatrix::zeros(dim, dim);
        for (a, b) in parts {
            r += a;
            h += b;
        }
        (r, h)
    }
}

/// Log-likelihood of `rho` given the records.
pub fn log_likelihood(rho: &DensityMatrix, records: &[CountRecord]) -> Result<f64> {
    if records.is_empty() {
        return Ok(0.0);
    }
    let n = records[0].n_qubits();
    if n != rho.n_qubits() {
        return Err(Error::DimensionMismatch { expected: rho.n_qubits(), found: n });
    }
    let mut ll = 0.0;
    for r in records {
        if r.n_qubits() != n {
            return Err(Error::DimensionMismatch { expected: n, found: r.n_qubits() });
        }
        r.validate()?;
        let data = TomographyData::build(
            n,
            vec![(
                r.setting.clone(),
                r.counts.iter().map(|&x| x as f64).collect(),
                (0..1usize << n).map(|o| r.outcome_efficiency(o)).collect(),
            )],
        )?;
        ll += data.evaluate(rho.elements(), false).0;
    }
    Ok(ll)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MleConfig {
    pub max_iterations: usize,
    /// Relative log-likelihood improvement below which an iteration counts as stalled.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for MleConfig {
    fn default() -> Self {
        Self { max_iterations: 20_000, tolerance: 1e-10, seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MleReport {
    pub rho: DensityMatrix,
    pub log_likelihood: f64,
    pub initial_log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Norm of the gradient of `−L/N_total` with respect to the real
    /// parameters of `T`, evaluated at `Tr(T†T) = 1`.
    pub gradient_norm_final: f64,
    pub skipped_settings: Vec<String>,
}

const CONSECUTIVE_SMALL_STEPS: usize = 3;
/// Improvement for the MLE stopping rule is measured over this many iterations.
const IMPROVEMENT_WINDOW: usize = 10;
const GRADIENT_TOLERANCE: f64 = 1e-8;

fn unpack(x: &[f64], dim: usize) -> CMatrix {
    let mut t = CMatrix::zeros(dim, dim);
    let mut k = 0;
    for i in 0..dim {
        for j in 0..i {
            t[(i, j)] = c(x[k], x[k + 1]);
            k += 2;
        }
        t[(i, i)] = c(x[k], 0.0);
        k += 1;
    }
    t
}

fn pack(t: &CMatrix) -> Vec<f64> {
    let dim = t.nrows();
    let mut x = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..i {
            x.push(t[(i, j)].re);
            x.push(t[(i, j)].im);
        }
        x.push(t[(i, i)].re);
    }
    x
}

/// Lower-triangular `T` with `T†T = ρ`, via a Cholesky factorization of the
/// index-reversed matrix. Requires `ρ` positive definite.
fn factor(rho: &CMatrix) -> Option<CMatrix> {
    let dim = rho.nrows();
    let reversed = CMatrix::from_fn(dim, dim, |i, j| rho[(dim - 1 - i, dim - 1 - j)]);
    let l = Cholesky::new(reversed)?.unpack();
    let upper = CMatrix::from_fn(dim, dim, |i, j| l[(dim - 1 - i, dim - 1 - j)]);
    let mut t = upper.adjoint();
    // Make the diagonal real and non-negative (row phases of T leave T†T unchanged).
    for i in 0..dim {
        let d = t[(i, i)];
        if d.norm() > 0.0 {
            let phase = d.conj() / d.norm();
            for j in 0..dim {
                t[(i, j)] *= phase;
            }
        }
    }
    Some(t)
}

fn random_full_rank(dim: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        c(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
    });
    let m = &g * g.adjoint();
    let tr = linalg::trace(&m).re;
    m.unscale(tr)
}

/// Clipped linear-inversion estimate, or `I/d` when some setting is empty.
pub fn initial_estimate(data: &TomographyData) -> DensityMatrix {
    data.correlation_tensor()
        .and_then(|t| project_to_physical(&linear_inversion(&t), data.n_qubits).ok())
        .unwrap_or_else(|| DensityMatrix::maximally_mixed(data.n_qubits).expect("valid size"))
}

/// Maximum-likelihood fit over `ρ = T†T / Tr(T†T)` with `T` lower triangular.
pub fn mle_fit(records: &[CountRecord], config: &MleConfig) -> Result<MleReport> {
    mle_fit_data(&TomographyData::from_records(records)?, config)
}

pub fn mle_fit_data(data: &TomographyData, config: &MleConfig) -> Result<MleReport> {
    let n = data.n_qubits;
    let dim = 1usize << n;
    let init = initial_estimate(data);
    let initial_log_likelihood = data.log_likelihood(&init)?;
    let blended = init.elements().scale(1.0 - 1e-6) + random_full_rank(dim, config.seed).scale(1e-6);
    let t0 = factor(&blended).ok_or_else(|| Error::Domain("initial state not positive definite".into()))?;
    let scale = data.total_counts().max(1.0);

    let objective = |x: &[f64], grad: &mut [f64]| -> f64 {
        let t = unpack(x, dim);
        let a = t.adjoint() * &t;
        let tr = linalg::trace(&a).re;
        let rho = a.unscale(tr);
        let (ll, g) = data.evaluate(&rho, true);
        let g = g.expect("gradient requested");
        let mean = linalg::trace_product(&g, &rho).re;
        let mut gp = g;
        for i in 0..dim {
            gp[(i, i)] -= c(mean, 0.0);
        }
        let tg = &t * gp.unscale(tr);
        let mut k = 0;
        for i in 0..dim {
            for j in 0..i {
                grad[k] = -2.0 * tg[(i, j)].re / scale;
                grad[k + 1] = -2.0 * tg[(i, j)].im / scale;
                k += 2;
            }
            grad[k] = -2.0 * tg[(i, i)].re / scale;
            k += 1;
        }
        -ll / scale
    };

    let mut opt = Lbfgs::new(objective, pack(&t0), 20);
    let mut history = std::collections::VecDeque::from([opt.value()]);
    let mut iterations = 0;
    let mut converged = false;
    let normalized_grad_norm = |x: &[f64], g: &[f64]| -> f64 {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        norm * g.iter().map(|v| v * v).sum::<f64>().sqrt()
    };
    while iterations < config.max_iterations {
        iterations += 1;
        match opt.step() {
            StepOutcome::Improved(_, after) => {
                history.push_back(after);
                if history.len() > IMPROVEMENT_WINDOW + 1 {
                    history.pop_front();
                }
                let full = history.len() == IMPROVEMENT_WINDOW + 1;
                let rel = (history[0] - after) / after.abs().max(f64::MIN_POSITIVE);
                if (full && rel < config.tolerance)
                    || normalized_grad_norm(opt.x(), opt.gradient()) < GRADIENT_TOLERANCE
                {
                    converged = true;
                    break;
                }
            }
            StepOutcome::Stalled => {
                // No ascent direction left at double precision.
                converged = normalized_grad_norm(opt.x(), opt.gradient()) < 1e-6;
                break;
            }
        }
    }
    let gradient_norm_final = normalized_grad_norm(opt.x(), opt.gradient());
    let t = unpack(opt.x(), dim);
    let rho = DensityMatrix::from_unnormalized(n, t.adjoint() * &t)?;
    let log_likelihood = data.log_likelihood(&rho)?;
    Ok(MleReport {
        rho,
        log_likelihood,
        initial_log_likelihood,
        iterations,
        converged,
        gradient_norm_final,
        skipped_settings: data.skipped.clone(),
    })
}

/// Diluted `RρR` fixed-point iteration, kept as an independent check on
/// [`mle_fit`]. Starts from `I/d`; `ρ ← KρK†/Tr` with `K = I + ε(H⁻¹R − I)`,
/// halving `ε` whenever the likelihood would drop.
pub fn rrr_fit(data: &TomographyData, max_iterations: usize, tolerance: f64) -> Result<MleReport> {
    let n = data.n_qubits;
    let dim = 1usize << n;
    let mut rho = DensityMatrix::maximally_mixed(n)?.into_elements();
    let initial_log_likelihood = data.evaluate(&rho, false).0;
    let mut ll = initial_log_likelihood;
    let mut eps = 1.0;
    let mut iterations = 0;
    let mut converged = false;
    let mut small = 0;
    while iterations < max_iterations {
        iterations += 1;
        let (r, h) = data.rrr_operators(&rho);
        let h_inv = linalg::hermitian_map(&h, |x| if x > 0.0 { 1.0 / x } else { 0.0 });
        let k_full = h_inv * r - linalg::identity(dim);
        let mut accepted = false;
        while eps > 1e-12 {
            let k = linalg::identity(dim) + k_full.scale(eps);
            let next = &k * &rho * k.adjoint();
            let tr = linalg::trace(&next).re;
            let next = linalg::hermitize(&next.unscale(tr));
            let ll_next = data.evaluate(&next, false).0;
            if ll_next >= ll {
                let rel = (ll_next - ll) / ll_next.abs().max(f64::MIN_POSITIVE);
                small = if rel < tolerance { small + 1 } else { 0 };
                rho = next;
                ll = ll_next;
                accepted = true;
                eps = (eps * 2.0).min(1.0);
                break;
            }
            eps *= 0.5;
        }
        if !accepted || small >= CONSECUTIVE_SMALL_STEPS {
            converged = true;
            break;
        }
    }
    let rho = DensityMatrix::from_unnormalized(n, rho)?;
    Ok(MleReport {
        log_likelihood: data.log_likelihood(&rho)?,
        rho,
        initial_log_likelihood,
        iterations,
        converged,
        gradient_norm_final: f64::NAN,
        skipped_settings: data.skipped.clone(),
    })
}

/// Mean and standard deviation of statistics over Poisson resamples.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub resamples: usize,
    pub mean: Vec<f64>,
    pub std_dev: Vec<f64>,
}

/// Parametric bootstrap: every count is redrawn as Poisson with the
/// observed count as mean, the state is refitted and `statistic` evaluated.
/// Resample `r` uses [`setting_seed`]`(seed, r)`.
pub fn bootstrap<S>(
    records: &[CountRecord],
    config: &MleConfig,
    resamples: usize,
    seed: u64,
    statistic: S,
) -> Result<BootstrapSummary>
where
    S: Fn(&DensityMatrix) -> Vec<f64> + Sync,
{
    if resamples < 2 {
        return Err(Error::Domain("bootstrap needs at least two resamples".into()));
    }
    let samples: Vec<Vec<f64>> = (0..resamples)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(setting_seed(seed, r as u64));
            let resampled: Vec<CountRecord> = records
                .iter()
                .map(|rec| {
                    let counts = rec
                        .counts
                        .iter()
                        .map(|&k| {
                            if k == 0 {
                                0
                            } else {
                                Poisson::new(k as f64).map(|d| d.sample(&mut rng) as u64).unwrap_or(k)
                            }
                        })
                        .collect();
                    CountRecord { counts, ..rec.clone() }
                })
                .collect();
            mle_fit(&resampled, config).map(|rep| statistic(&rep.rho))
        })
        .collect::<Result<Vec<_>>>()?;
    let k = samples[0].len();
    let m = samples.len() as f64;
    let mean: Vec<f64> = (0..k).map(|i| samples.iter().map(|s| s[i]).sum::<f64>() / m).collect();
    let std_dev = (0..k)
        .map(|i| {
            let var = samples.iter().map(|s| (s[i] - mean[i]).powi(2)).sum::<f64>() / (m - 1.0);
            var.sqrt()
        })
        .collect();
    Ok(BootstrapSummary { resamples, mean, std_dev })
}
