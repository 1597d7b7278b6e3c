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

//! Entanglement witnesses: fidelity-based, collective-spin and locally
//! filtered GHZ-class witnesses.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, ZERO};
use crate::source::setting_seed;
use crate::state::{collective_spin_squared, fidelity_pure, states, CollectiveAxis, DensityMatrix, PureState};

/// `7/2 + √3`: biseparable maximum of `⟨J_x²⟩+⟨J_y²⟩` for four qubits.
pub const SPIN_BOUND_4: f64 = 5.232_050_807_568_877;
/// `2 + √5/2`: biseparable maximum of `⟨J_x²⟩+⟨J_y²⟩` for three qubits.
pub const SPIN_BOUND_3: f64 = 3.118_033_988_749_895;
/// `5/2 − √3`: lower limit on `⟨J_z²⟩` for symmetric biseparable states.
pub const JZ_SQUARED_BOUND: f64 = 0.767_949_192_431_122_7;
/// Fidelity threshold for the `|D₄⁽²⁾⟩` fidelity witness.
pub const DICKE_ALPHA: f64 = 2.0 / 3.0;
/// Fidelity threshold for the `|GHZ₃⟩` witness.
pub const GHZ_ALPHA: f64 = 0.75;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    BelowIsEntangled,
    AboveIsEntangled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessVerdict {
    pub witness: String,
    pub value: f64,
    pub bound: f64,
    pub direction: Direction,
    pub entangled: bool,
    #[serde(rename = "error")]
    pub statistical_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl WitnessVerdict {
    pub fn new(witness: &str, value: f64, bound: f64, direction: Direction) -> Self {
        let entangled = match direction {
            Direction::BelowIsEntangled => value < bound,
            Direction::AboveIsEntangled => value > bound,
        };
        Self {
            witness: witness.into(),
            value,
            bound,
            direction,
            entangled,
            statistical_error: None,
            warning: None,
        }
    }

    pub fn with_error(mut self, sigma: f64) -> Self {
        self.statistical_error = Some(sigma);
        self
    }

    /// Forces an inconclusive verdict.
    fn inconclusive(mut self, reason: String) -> Self {
        self.entangled = false;
        self.warning = Some(reason);
        self
    }
}

/// `value = alpha − ⟨target|ρ|target⟩`, entangled below zero.
pub fn fidelity_witness(rho: &DensityMatrix, target: &PureState, alpha: f64) -> Result<WitnessVerdict> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha {alpha} outside (0, 1)")));
    }
    let f = fidelity_pure(rho, target)?;
    Ok(WitnessVerdict::new("fidelity", alpha - f, 0.0, Direction::BelowIsEntangled))
}

/// `⟨J_x²⟩ + ⟨J_y²⟩` against the biseparable bound for `n = 3` or `n = 4`.
pub fn collective_spin_witness(rho: &DensityMatrix, n: usize) -> Result<WitnessVerdict> {
    let bound = match n {
        3 => SPIN_BOUND_3,
        4 => SPIN_BOUND_4,
        _ => return Err(Error::Domain(format!("no collective-spin bound for {n} qubits"))),
    };
    if rho.n_qubits() != n {
        return Err(Error::DimensionMismatch { expected: n, found: rho.n_qubits() });
    }
    let value = collective_spin_squared(rho, CollectiveAxis::X) + collective_spin_squared(rho, CollectiveAxis::Y);
    Ok(WitnessVerdict::new(&format!("collective_spin_{n}"), value, bound, Direction::AboveIsEntangled))
}

/// `⟨J_z²⟩` of a four-qubit state. For symmetric states
/// `⟨J_x²⟩+⟨J_y²⟩ = 6 − ⟨J_z²⟩`, so the spin witness fires exactly when
/// this drops below [`JZ_SQUARED_BOUND`].
pub fn jz_squared_check(rho: &DensityMatrix) -> Result<f64> {
    if rho.n_qubits() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: rho.n_qubits() });
    }
    Ok(collective_spin_squared(rho, CollectiveAxis::Z))
}

/// Local filter `A ⊗ B ⊗ C`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "FilterWire", try_from = "FilterWire")]
pub struct LocalFilter {
    pub factors: [CMatrix; 3],
}

#[derive(Serialize, Deserialize)]
struct FilterWire {
    /// Three row-major 2×2 matrices of `(re, im)` pairs.
    matrices: Vec<[[f64; 2]; 4]>,
}

impl From<LocalFilter> for FilterWire {
    fn from(f: LocalFilter) -> Self {
        let matrices = f
            .factors
            .iter()
            .map(|m| {
                let z = |i, j| {
                    let v: num_complex::Complex64 = m[(i, j)];
                    [v.re, v.im]
                };
                [z(0, 0), z(0, 1), z(1, 0), z(1, 1)]
            })
            .collect();
        Self { matrices }
    }
}

impl TryFrom<FilterWire> for LocalFilter {
    type Error = Error;

    fn try_from(w: FilterWire) -> Result<Self> {
        if w.matrices.len() != 3 {
            return Err(Error::DimensionMismatch { expected: 3, found: w.matrices.len() });
        }
        let m = |k: usize| CMatrix::from_row_iterator(2, 2, w.matrices[k].iter().map(|p| c(p[0], p[1])));
        Ok(Self { factors: [m(0), m(1), m(2)] })
    }
}

impl LocalFilter {
    pub fn identity() -> Self {
        Self { factors: [linalg::identity(2), linalg::identity(2), linalg::identity(2)] }
    }

    pub fn operator(&self) -> CMatrix {
        let [a, b, cc] = &self.factors;
        linalg::kron(&linalg::kron(a, b), cc)
    }

    /// Largest `σ_max/σ_min` over the three factors.
    pub fn condition_number(&self) -> f64 {
        self.factors
            .iter()
            .map(|m| {
                let s = m.clone().singular_values();
                let (hi, lo) = (s.max(), s.min());
                if lo > 0.0 { hi / lo } else { f64::INFINITY }
            })
            .fold(1.0, f64::max)
    }

    /// Rescales each factor to unit largest singular value.
    pub fn normalized(&self) -> Self {
        let f = |m: &CMatrix| {
            let s = m.clone().singular_values().max();
            if s > 0.0 { m.unscale(s) } else { m.clone() }
        };
        Self { factors: [f(&self.factors[0]), f(&self.factors[1]), f(&self.factors[2])] }
    }

    /// Filter acting on permuted qubits: new factor `k` is old factor `order[k]`.
    pub fn permuted(&self, order: [usize; 3]) -> Self {
        Self { factors: order.map(|k| self.factors[k].clone()) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub restarts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    /// Stop a descent once one step lowers the value by less than this.
    pub tolerance: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self { restarts: 16, seed: 0, max_iterations: 5000, tolerance: 1e-13 }
    }
}

/// Condition number beyond which a filter is treated as singular.
pub const MAX_FILTER_CONDITION: f64 = 1e8;

/// Filtered values above `−NUMERICAL_ZERO` never count as detection.
pub const NUMERICAL_ZERO: f64 = 1e-10;

/// `¾·1 − |GHZ₃⟩⟨GHZ₃|`.
pub fn ghz_witness_operator() -> CMatrix {
    let ghz = states::ghz(3).expect("three qubits");
    linalg::identity(8).scale(GHZ_ALPHA) - ghz.to_density().into_elements()
}

/// `Tr(ρ F† W F)`.
pub fn filtered_value(rho: &CMatrix, filter: &LocalFilter) -> f64 {
    let f = filter.operator();
    linalg::trace_product(&(ghz_witness_operator() * &f), &(rho * f.adjoint())).re
}

struct Descent {
    filter: LocalFilter,
    value: f64,
    converged: bool,
}

/// Value and the Wirtinger gradients `∂/∂Ā, ∂/∂B̄, ∂/∂C̄`.
fn value_and_gradient(w: &CMatrix, rho: &CMatrix, filter: &LocalFilter) -> (f64, [CMatrix; 3]) {
    let f = filter.operator();
    let g = w * &f * rho;
    let value = linalg::trace_product(&g, &f.adjoint()).re;
    let [a, b, cm] = &filter.factors;
    let (a, b, cm) = (a.map(|z| z.conj()), b.map(|z| z.conj()), cm.map(|z| z.conj()));
    let mut ga = CMatrix::zeros(2, 2);
    let mut gb = CMatrix::zeros(2, 2);
    let mut gc = CMatrix::zeros(2, 2);
    for i in 0..2 {
        for k in 0..2 {
            for m in 0..2 {
                let row = 4 * i + 2 * k + m;
                for j in 0..2 {
                    for l in 0..2 {
                        for n in 0..2 {
                            let x = g[(row, 4 * j + 2 * l + n)];
                            if x == ZERO {
                                continue;
                            }
                            ga[(i, j)] += x * b[(k, l)] * cm[(m, n)];
                            gb[(k, l)] += x * a[(i, j)] * cm[(m, n)];
                            gc[(m, n)] += x * a[(i, j)] * b[(k, l)];
                        }
                    }
                }
            }
        }
    }
    (value, [ga, gb, gc])
}

/// Projection onto the unit spectral-norm ball.
fn clip_spectral(m: &CMatrix) -> CMatrix {
    let svd = m.clone().svd(true, true);
    let (u, v_t) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let s = CMatrix::from_diagonal(&svd.singular_values.map(|x| c(x.min(1.0), 0.0)));
    u * s * v_t
}

fn descend(w: &CMatrix, rho: &CMatrix, start: LocalFilter, cfg: &FilterConfig) -> Descent {
    let mut filter = LocalFilter { factors: start.factors.map(|m| clip_spectral(&m)) };
    let (mut value, mut grad) = value_and_gradient(w, rho, &filter);
    let mut step = 0.5;
    for _ in 0..cfg.max_iterations {
        let mut accepted = None;
        while step > 1e-14 {
            let trial = LocalFilter {
                factors: [0, 1, 2].map(|k| clip_spectral(&(&filter.factors[k] - grad[k].scale(2.0 * step)))),
            };
            let moved: f64 = (0..3).map(|k| (&trial.factors[k] - &filter.factors[k]).norm_squared()).sum();
            let (tv, tg) = value_and_gradient(w, rho, &trial);
            if tv <= value - 1e-4 * moved / step {
                accepted = Some((trial, tv, tg, moved));
                break;
            }
            step *= 0.5;
        }
        let Some((trial, tv, tg, moved)) = accepted else {
            return Descent { filter, value, converged: true };
        };
        let decrease = value - tv;
        filter = trial;
        value = tv;
        grad = tg;
        step *= 2.0;
        if decrease < cfg.tolerance || moved == 0.0 {
            return Descent { filter, value, converged: true };
        }
    }
    Descent { filter, value, converged: false }
}

fn random_filter(seed: u64) -> LocalFilter {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample = || {
        CMatrix::from_fn(2, 2, |_, _| c(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
    };
    let factors = [sample(), sample(), sample()];
    LocalFilter { factors: factors.map(|m| clip_spectral(&m)) }
}

/// Minimizes `Tr(ρ F†(¾·1 − |GHZ₃⟩⟨GHZ₃|)F)` over product filters with unit
/// largest singular values by projected gradient descent.
///
/// Restart 0 starts at the identity, restart 1 first optimizes against the
/// dominant eigenvector of `ρ`, the rest start from random filters seeded by
/// `(seed, restart)`. A negative optimum certifies GHZ-class entanglement.
pub fn filtered_ghz_witness(rho3: &DensityMatrix, config: &FilterConfig) -> Result<(WitnessVerdict, LocalFilter)> {
    if rho3.n_qubits() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: rho3.n_qubits() });
    }
    if config.restarts == 0 {
        return Err(Error::Domain("at least one restart is required".into()));
    }
    let w = ghz_witness_operator();
    let rho = rho3.elements();
    let runs: Vec<Descent> = (0..config.restarts)
        .into_par_iter()
        .map(|r| match r {
            0 => descend(&w, rho, LocalFilter::identity(), config),
            1 => {
                let top = rho3.principal_component().to_density().into_elements();
                let warm = descend(&w, &top, LocalFilter::identity(), config);
                descend(&w, rho, warm.filter, config)
            }
            _ => descend(&w, rho, random_filter(setting_seed(config.seed, r as u64)), config),
        })
        .collect();
    let mut best: Option<&Descent> = None;
    for run in &runs {
        if best.map_or(true, |b| run.value < b.value) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart");
    // Rescaling to unit singular values only deepens a negative optimum.
    let filter = if best.value < 0.0 { best.filter.normalized() } else { best.filter.clone() };
    let value = filtered_value(rho, &filter);
    let verdict = WitnessVerdict::new("filtered_ghz", value, 0.0, Direction::BelowIsEntangled);
    let verdict = if !runs.iter().any(|r| r.converged) {
        verdict.inconclusive("filter optimization did not converge in any restart".into())
    } else if value > -NUMERICAL_ZERO {
        verdict.inconclusive("optimum is zero within numerical precision".into())
    } else if filter.condition_number() >= MAX_FILTER_CONDITION {
        verdict.inconclusive(format!("optimal filter is near-singular (condition {:.2e})", filter.condition_number()))
    } else {
        verdict
    };
    Ok((verdict, filter))
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::dicke_state;
    use approx::assert_abs_diff_eq;

    fn rho_d() -> DensityMatrix {
        dicke_state(4, 2).unwrap().to_density()
    }

    #[test]
    fn bound_constants() {
        assert_abs_diff_eq!(SPIN_BOUND_4, 3.5 + 3f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(SPIN_BOUND_3, 2.0 + 5f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(JZ_SQUARED_BOUND, 2.5 - 3f64.sqrt(), epsilon = 1e-15);
        assert!((SPIN_BOUND_4 - 5.2320508).abs() < 1e-7);
        assert!((SPIN_BOUND_3 - 3.1180340).abs() < 1e-7);
        assert!((JZ_SQUARED_BOUND - 0.7679492).abs() < 1e-7);
    }

    #[test]
    fn fidelity_witness_examples() {
        let d = dicke_state(4, 2).unwrap();
        let ideal = fidelity_witness(&rho_d(), &d, DICKE_ALPHA).unwrap();
        assert_abs_diff_eq!(ideal.value, -1.0 / 3.0, epsilon = 1e-12);
        assert!(ideal.entangled);

        // Mixture with fidelity exactly 0.844.
        let mixed = DensityMatrix::maximally_mixed(4).unwrap();
        let p = (0.844 - 1.0 / 16.0) / (1.0 - 1.0 / 16.0);
        let noisy = DensityMatrix::mixture(&[(p, &rho_d()), (1.0 - p, &mixed)]).unwrap();
        let v = fidelity_witness(&noisy, &d, DICKE_ALPHA).unwrap();
        assert_abs_diff_eq!(v.value, -0.177, epsilon = 5e-4);
        assert!(v.entangled);

        let flat = fidelity_witness(&mixed, &d, DICKE_ALPHA).unwrap();
        assert_abs_diff_eq!(flat.value, 2.0 / 3.0 - 1.0 / 16.0, epsilon = 1e-12);
        assert!(!flat.entangled);
        assert!(fidelity_witness(&mixed, &d, 1.5).is_err());
    }

    #[test]
    fn collective_spin_witness_examples() {
        let v = collective_spin_witness(&rho_d(), 4).unwrap();
        assert_abs_diff_eq!(v.value, 6.0, epsilon = 1e-12);
        assert!(v.entangled);
        let v3 = collective_spin_witness(&states::w3_mixture(), 3).unwrap();
        assert_abs_diff_eq!(v3.value, 3.5, epsilon = 1e-12);
        assert!(v3.entangled);
        let hhhh = PureState::from_label("HHHH").unwrap().to_density();
        let vp = collective_spin_witness(&hhhh, 4).unwrap();
        assert_abs_diff_eq!(vp.value, 2.0, epsilon = 1e-12);
        assert!(!vp.entangled);
        assert!(collective_spin_witness(&rho_d(), 5).is_err());
        assert!(collective_spin_witness(&rho_d(), 3).is_err());
    }

    #[test]
    fn jz_squared_examples() {
        assert_abs_diff_eq!(jz_squared_check(&rho_d()).unwrap(), 0.0, epsilon = 1e-12);
        let hhhh = PureState::from_label("HHHH").unwrap().to_density();
        assert_abs_diff_eq!(jz_squared_check(&hhhh).unwrap(), 4.0, epsilon = 1e-12);
        assert!(jz_squared_check(&states::w3_mixture()).is_err());
    }

    #[test]
    fn symmetric_product_states_respect_jz_bound() {
        // |φ⟩^⊗4 has ⟨J_z²⟩ = 1 + 3cos²θ.
        for k in 0..=20 {
            let theta = std::f64::consts::PI * k as f64 / 20.0;
            let phi = states::bloch(theta, 0.7);
            let psi = PureState::product(&[phi.clone(), phi.clone(), phi.clone(), phi]).unwrap();
            let jz = jz_squared_check(&psi.to_density()).unwrap();
            assert_abs_diff_eq!(jz, 1.0 + 3.0 * theta.cos().powi(2), epsilon = 1e-12);
            assert!(jz >= JZ_SQUARED_BOUND);
        }
    }

    #[test]
    fn symmetric_states_link_spin_witness_and_jz() {
        // Random pure states in the span of |D₄⁽ᵐ⁾⟩: value = 6 − ⟨J_z²⟩, so
        // the spin witness fires exactly below 5/2 − √3.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let dickes: Vec<PureState> = (0..=4).map(|m| dicke_state(4, m).unwrap()).collect();
        for _ in 0..100 {
            let mut amps = vec![c(0.0, 0.0); 16];
            for d in &dickes {
                let w = c(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
                for (a, x) in amps.iter_mut().zip(d.amplitudes().iter()) {
                    *a += w * x;
                }
            }
            let rho = PureState::new(4, amps).unwrap().to_density();
            let jz = jz_squared_check(&rho).unwrap();
            let spin = collective_spin_witness(&rho, 4).unwrap();
            assert_abs_diff_eq!(spin.value + jz, 6.0, epsilon = 1e-10);
            assert_eq!(spin.entangled, jz < JZ_SQUARED_BOUND);
        }
    }

    #[test]
    fn filtered_witness_on_ghz() {
        let (v, f) = filtered_ghz_witness(&states::ghz(3).unwrap().to_density(), &FilterConfig::default()).unwrap();
        assert!(v.value <= -0.25 + 1e-9);
        assert!(v.entangled);
        assert!(f.condition_number() < 1e3);
    }

    #[test]
    fn filtered_witness_on_g3_regression() {
        // Frozen optimum for the ideal G state; an independent numpy
        // projected-gradient run gives the same −1/18.
        let (v, f) = filtered_ghz_witness(&states::g3().to_density(), &FilterConfig::default()).unwrap();
        assert_abs_diff_eq!(v.value, -1.0 / 18.0, epsilon = 1e-7);
        assert!(v.entangled);
        assert_abs_diff_eq!(filtered_value(states::g3().to_density().elements(), &f), v.value, epsilon = 1e-12);
    }

    #[test]
    fn filtered_witness_detects_white_noise_g3() {
        // Independent numpy optimum: −0.010528 at visibility 0.882.
        let mixed = DensityMatrix::maximally_mixed(3).unwrap();
        let rho = DensityMatrix::mixture(&[(0.882, &states::g3().to_density()), (0.118, &mixed)]).unwrap();
        let (v, _) = filtered_ghz_witness(&rho, &FilterConfig::default()).unwrap();
        assert_abs_diff_eq!(v.value, -0.010_528_5, epsilon = 2e-6);
        assert!(v.entangled);
    }

    #[test]
    fn filtered_witness_is_inconclusive_on_w_class() {
        let (v, _) = filtered_ghz_witness(&states::w3().to_density(), &FilterConfig::default()).unwrap();
        assert!(!v.entangled);
        assert!(v.value > -NUMERICAL_ZERO);
        assert!(v.warning.is_some());
    }

    #[test]
    fn filtered_gradient_matches_finite_differences() {
        let rho = DensityMatrix::mixture(&[(0.7, &states::g3().to_density()), (0.3, &states::w3().to_density())]).unwrap();
        let w = ghz_witness_operator();
        let f = random_filter(3);
        let (_, g) = value_and_gradient(&w, rho.elements(), &f);
        let h = 1e-6;
        for k in 0..3 {
            for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                for unit in [c(1.0, 0.0), c(0.0, 1.0)] {
                    let mut fp = f.clone();
                    fp.factors[k][(i, j)] += unit * h;
                    let mut fm = f.clone();
                    fm.factors[k][(i, j)] -= unit * h;
                    let numeric = (filtered_value(rho.elements(), &fp) - filtered_value(rho.elements(), &fm)) / (2.0 * h);
                    // d/dx = 2 Re ∂/∂z̄, d/dy = 2 Im ∂/∂z̄
                    let analytic = 2.0 * if unit.re == 1.0 { g[k][(i, j)].re } else { g[k][(i, j)].im };
                    assert_abs_diff_eq!(numeric, analytic, epsilon = 1e-7);
                }
            }
        }
    }

    #[test]
    fn verdict_serializes() {
        let v = WitnessVerdict::new("collective_spin_4", 5.6, SPIN_BOUND_4, Direction::AboveIsEntangled).with_error(0.02);
        let json = serde_json::to_value(&v).unwrap();
        assert_eq!(json["witness"], "collective_spin_4");
        assert_eq!(json["entangled"], true);
        assert_eq!(json["error"], 0.02);
        let f = random_filter(1);
        let back: LocalFilter = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(back, f);
    }
}
