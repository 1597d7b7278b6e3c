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

//! Limited-memory BFGS minimizer with Armijo backtracking.
//!
//! The driver is stepwise so callers keep control of their own stopping
//! rules.

use std::collections::VecDeque;

pub struct Lbfgs<F>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    objective: F,
    x: Vec<f64>,
    f: f64,
    g: Vec<f64>,
    history: VecDeque<(Vec<f64>, Vec<f64>, f64)>,
    memory: usize,
    evaluations: usize,
}

/// Result of one [`Lbfgs::step`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepOutcome {
    /// Objective decreased from the first value to the second.
    Improved(f64, f64),
    /// No decrease found along the search direction, even after a reset to
    /// steepest descent.
    Stalled,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl<F> Lbfgs<F>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    pub fn new(mut objective: F, x0: Vec<f64>, memory: usize) -> Self {
        let mut g = vec![0.0; x0.len()];
        let f = objective(&x0, &mut g);
        Self { objective, x: x0, f, g, history: VecDeque::new(), memory: memory.max(1), evaluations: 1 }
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn value(&self) -> f64 {
        self.f
    }

    pub fn gradient(&self) -> &[f64] {
        &self.g
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    fn direction(&self) -> Vec<f64> {
        let mut q: Vec<f64> = self.g.iter().map(|v| -v).collect();
        let mut alphas = Vec::with_capacity(self.history.len());
        for (s, y, rho) in self.history.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        if let Some((s, y, _)) = self.history.back() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|qi| *qi *= gamma);
        } else {
            let gn = dot(&self.g, &self.g).sqrt();
            if gn > 0.0 {
                q.iter_mut().for_each(|qi| *qi /= gn);
            }
        }
        for ((s, y, rho), a) in self.history.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        q
    }

    fn line_search(&mut self, d: &[f64]) -> Option<(Vec<f64>, f64, Vec<f64>)> {
        let slope = dot(&self.g, d);
        if !(slope < 0.0) {
            return None;
        }
        let mut t = 1.0;
        let mut trial = vec![0.0; self.x.len()];
        let mut g_new = vec![0.0; self.x.len()];
        for _ in 0..60 {
            trial.iter_mut().zip(&self.x).zip(d).for_each(|((ti, xi), di)| *ti = xi + t * di);
            let f_new = (self.objective)(&trial, &mut g_new);
            self.evaluations += 1;
            if f_new.is_finite() && f_new <= self.f + 1e-4 * t * slope {
                return Some((trial, f_new, g_new));
            }
            t *= 0.5;
        }
        None
    }

    pub fn step(&mut self) -> StepOutcome {
        let d = self.direction();
        let found = match self.line_search(&d) {
            Some(r) => Some(r),
            None if !self.history.is_empty() => {
                self.history.clear();
                let d = self.direction();
                self.line_search(&d)
            }
            None => None,
        };
        let Some((x_new, f_new, g_new)) = found else {
            return StepOutcome::Stalled;
        };
        let s: Vec<f64> = x_new.iter().zip(&self.x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&self.g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 && sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if self.history.len() == self.memory {
                self.history.pop_front();
            }
            self.history.push_back((s, y, 1.0 / sy));
        }
        let before = self.f;
        self.x = x_new;
        self.f = f_new;
        self.g = g_new;
        StepOutcome::Improved(before, f_new)
    }

    /// Replaces the current point; curvature history is discarded.
    pub fn reset_to(&mut self, x: Vec<f64>) {
        self.f = (self.objective)(&x, &mut self.g);
        self.evaluations += 1;
        self.x = x;
        self.history.clear();
    }
}
