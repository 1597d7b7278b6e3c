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

//! Simulation and analysis toolkit for multi-photon polarization-entangled
//! states, centered on the four-photon symmetric Dicke state `|D₄⁽²⁾⟩`.
//!
//! The crate covers state algebra ([`state`]), a noisy source and detection
//! model ([`source`]), state reconstruction ([`tomography`]), entanglement
//! witnesses ([`witness`]) and measurement-induced protocols ([`protocols`]).

pub mod error;
pub mod linalg;
pub mod optim;
pub mod protocols;
pub mod source;
pub mod state;
pub mod tomography;
pub mod witness;

pub use error::{Error, Result};
pub use state::{
    collective_spin_squared, dicke_state, expectation, fidelity_pure, partial_trace,
    pauli_operator, project_qubit, project_qubit_mixed, CollectiveAxis, DensityMatrix, Pauli,
    PauliLabel, PureState,
};
