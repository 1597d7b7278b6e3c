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

use thiserror::Error;

/// Errors returned by the state algebra, simulation and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested register is larger than the dense simulator supports.
    #[error("capacity error: {n_qubits} qubits requested, at most {max} supported")]
    Capacity { n_qubits: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("observable is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    InvalidIndex { index: usize, n_qubits: usize },

    #[error("invalid qubit selection: {0}")]
    InvalidSelection(String),

    #[error("projection has zero probability")]
    ZeroProbability,

    #[error("invalid efficiency {value} for detector {detector}")]
    InvalidEfficiency { detector: usize, value: f64 },

    #[error("measurement setting {0} missing from the record set")]
    MissingSetting(String),

    #[error("measurement setting {0} appears more than once")]
    DuplicateSetting(String),

    #[error("setting {0} has no counts")]
    EmptySetting(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
