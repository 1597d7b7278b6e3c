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


//! Random state generators shared by the integration tests.

#![allow(dead_code)]

use dicke_core::linalg::{c, CMatrix};
use dicke_core::{DensityMatrix, PureState};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_pure(n: usize, rng: &mut ChaCha8Rng) -> PureState {
    let amps = (0..1usize << n).map(|_| gaussian(rng)).collect();
    PureState::new(n, amps).unwrap()
}

/// Ginibre-distributed mixed state of the given rank.
pub fn random_mixed(n: usize, rank: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let dim = 1usize << n;
    let g = CMatrix::from_fn(dim, rank, |_, _| gaussian(rng));
    DensityMatrix::from_unnormalized(n, &g * g.adjoint()).unwrap()
}

/// Random 2×2 unitary from the QR factor of a Gaussian matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng) -> CMatrix {
    let g = CMatrix::from_fn(2, 2, |_, _| gaussian(rng));
    g.qr().q()
}

/// Pure state that factorizes across `part | rest`, qubits in original order.
pub fn random_biseparable_pure(n: usize, part: &[usize], rng: &mut ChaCha8Rng) -> PureState {
    let rest: Vec<usize> = (0..n).filter(|q| !part.contains(q)).collect();
    let a = random_pure(part.len(), rng);
    let b = random_pure(rest.len(), rng);
    let joined = a.tensor(&b).unwrap();
    // `joined` holds qubits in the order part ++ rest; send each to its slot.
    let order: Vec<usize> = part.iter().chain(&rest).copied().collect();
    let mut inverse = vec![0; n];
    for (pos, &q) in order.iter().enumerate() {
        inverse[q] = pos;
    }
    joined.permute(&inverse).unwrap()
}

/// Every non-trivial bipartition, listed by its side that holds qubit 0.
pub fn bipartitions(n: usize) -> Vec<Vec<usize>> {
    (1..(1usize << n) - 1)
        .filter(|mask| mask & 1 == 1)
        .map(|mask| (0..n).filter(|q| mask >> q & 1 == 1).collect())
        .collect()
}

/// Quasi-uniform points on the sphere as `(theta, phi)`.
pub fn fibonacci_sphere(count: usize) -> Vec<(f64, f64)> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
            (z.acos(), (golden * k as f64).rem_euclid(std::f64::consts::TAU))
        })
        .collect()
}
