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


//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export returns a JSON string; errors come back as
//! `{"error": "..."}` so the page never has to catch exceptions.

use dicke_core::protocols::{classify_projection, odt_projection, Reference};
use dicke_core::source::{apply_noise, Basis, MeasurementSetting, NoiseModel};
use dicke_core::state::states;
use dicke_core::witness::{collective_spin_witness, fidelity_witness, jz_squared_check, DICKE_ALPHA};
use dicke_core::{dicke_state, fidelity_pure};
use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn respond<T: Serialize>(result: dicke_core::Result<T>) -> String {
    match result {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| json!({ "error": e.to_string() }).to_string()),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

#[derive(Serialize)]
struct ProjectionView {
    probability: f64,
    reference: String,
    fidelity: f64,
    fidelities: [(String, f64); 3],
    spin_value: f64,
    spin_bound: f64,
    entangled: bool,
}

/// Projects qubit `qubit` of the ideal four-qubit Dicke state onto the Bloch
/// direction `(theta, phi)` and classifies the remaining three qubits.
#[wasm_bindgen]
pub fn project_dicke(qubit: usize, theta: f64, phi: f64) -> String {
    respond((|| {
        let d = dicke_state(4, 2)?;
        let r = classify_projection(&d, qubit, &states::bloch(theta, phi), &Reference::Closest, None)?;
        let rho = r.residual_state.density();
        let fidelities = [
            ("W3".to_string(), fidelity_pure(&rho, &states::w3())?),
            ("W3bar".to_string(), fidelity_pure(&rho, &states::w3_bar())?),
            ("G3".to_string(), fidelity_pure(&rho, &states::g3())?),
        ];
        let w = r.spin_witness.expect("three-qubit residual");
        Ok(ProjectionView {
            probability: r.probability,
            reference: r.reference_name,
            fidelity: r.fidelity_to_reference,
            fidelities,
            spin_value: w.value,
            spin_bound: w.bound,
            entangled: w.entangled,
        })
    })())
}

#[derive(Serialize)]
struct NoiseView {
    fidelity: f64,
    fidelity_witness: f64,
    spin_value: f64,
    spin_bound: f64,
    jz_squared: f64,
    fidelity_entangled: bool,
    spin_entangled: bool,
}

/// Exact witness values of the noisy four-qubit Dicke state.
#[wasm_bindgen]
pub fn noisy_witnesses(white_noise: f64, dephasing: f64, excitation: f64) -> String {
    respond((|| {
        let d = dicke_state(4, 2)?;
        let model = NoiseModel::new(white_noise, dephasing, excitation)?;
        let rho = apply_noise(&d.to_density(), &model);
        let fw = fidelity_witness(&rho, &d, DICKE_ALPHA)?;
        let sw = collective_spin_witness(&rho, 4)?;
        Ok(NoiseView {
            fidelity: fidelity_pure(&rho, &d)?,
            fidelity_witness: fw.value,
            spin_value: sw.value,
            spin_bound: sw.bound,
            jz_squared: jz_squared_check(&rho)?,
            fidelity_entangled: fw.entangled,
            spin_entangled: sw.entangled,
        })
    })())
}

/// Noise knobs reproducing fidelity 0.844 and spin value 5.58.
#[wasm_bindgen]
pub fn calibrated_noise() -> String {
    respond(Ok(NoiseModel::CALIBRATED))
}

/// Open-destination teleportation on the ideal Dicke state: measures
/// qubits `first` and `second` in `bases` (two letters from X, Y, Z).
#[wasm_bindgen]
pub fn teleport_outcomes(first: usize, second: usize, bases: &str) -> String {
    respond((|| {
        let setting: MeasurementSetting = bases.parse()?;
        if setting.0.len() != 2 {
            return Err(dicke_core::Error::Parse(format!("need two bases, got '{bases}'")));
        }
        let pair: [Basis; 2] = [setting.0[0], setting.0[1]];
        let outcomes = odt_projection(&dicke_state(4, 2)?, [first, second], pair)?;
        Ok(outcomes
            .into_iter()
            .map(|o| {
                json!({
                    "outcome": o.outcome,
                    "probability": o.probability,
                    "bell_state": o.bell_state.map(|b| b.name()),
                    "bell_fidelity": o.bell_fidelity,
                })
            })
            .collect::<Vec<_>>())
    })())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_become_json_objects() {
        let s = respond::<f64>(Err(dicke_core::Error::ZeroProbability));
        assert_eq!(s, r#"{"error":"projection has zero probability"}"#);
        assert_eq!(respond(Ok(0.5)), "0.5");
    }
}
