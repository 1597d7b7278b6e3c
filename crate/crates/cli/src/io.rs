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


//! File formats, argument parsers and plain-text tables.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use dicke_core::source::{records_from_json_lines, records_to_json_lines, CountRecord};
use dicke_core::state::states;
use dicke_core::{DensityMatrix, PureState};
use serde::Serialize;

pub const MLE_REPORT_SCHEMA: &str = "dicke-lab/mle-report/v1";
pub const WITNESS_REPORT_SCHEMA: &str = "dicke-lab/witness-report/v1";
pub const PROJECTION_REPORT_SCHEMA: &str = "dicke-lab/projection-report/v1";
pub const PROTOCOLS_REPORT_SCHEMA: &str = "dicke-lab/protocols-report/v1";

/// A state file holds either amplitudes or a density matrix.
#[derive(Clone, Debug)]
pub enum StateFile {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl StateFile {
    pub fn density(&self) -> DensityMatrix {
        match self {
            StateFile::Pure(p) => p.to_density(),
            StateFile::Mixed(m) => m.clone(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            StateFile::Pure(p) => p.n_qubits(),
            StateFile::Mixed(m) => m.n_qubits(),
        }
    }

    pub fn pure(&self, what: &str) -> Result<&PureState> {
        match self {
            StateFile::Pure(p) => Ok(p),
            StateFile::Mixed(_) => bail!("{what} needs a pure-state file"),
        }
    }
}

pub fn read_state(path: &Path) -> Result<StateFile> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("{}: invalid JSON", path.display()))?;
    // Decide the kind from the value, then parse the text again so that
    // errors keep their line numbers.
    let is_pure = match value.get("schema").and_then(|s| s.as_str()) {
        Some(s) => s.contains("pure-state"),
        None => value.get("amplitudes").is_some(),
    };
    let parsed = if is_pure {
        serde_json::from_str::<PureState>(&text).map(StateFile::Pure)
    } else {
        serde_json::from_str::<DensityMatrix>(&text).map(StateFile::Mixed)
    };
    parsed.with_context(|| format!("{}: not a valid state file", path.display()))
}

pub fn read_records(path: &Path) -> Result<Vec<CountRecord>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    records_from_json_lines(&text).with_context(|| format!("{}", path.display()))
}

fn check_overwrite(path: &Path, force: bool) -> Result<()> {
    if path.exists() && !force {
        bail!("{} exists; pass --force to overwrite", path.display());
    }
    Ok(())
}

pub fn prepare_output(dir: &Path, name: &str, force: bool) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    check_overwrite(&path, force)?;
    Ok(path)
}

pub fn write_text(dir: &Path, name: &str, text: &str, force: bool) -> Result<PathBuf> {
    let path = prepare_output(dir, name, force)?;
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T, force: bool) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(dir, name, &text, force)
}

pub fn write_records(dir: &Path, name: &str, records: &[CountRecord], force: bool) -> Result<PathBuf> {
    write_text(dir, name, &records_to_json_lines(records), force)
}

/// Report body with the schema tag in front.
#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema: &'a str,
    #[serde(flatten)]
    pub body: &'a T,
}

/// `a`, `b`, ... or a zero-based index.
pub fn parse_qubit(text: &str, n_qubits: usize) -> Result<usize> {
    let t = text.trim();
    let index = match t.chars().next() {
        Some(ch) if t.len() == 1 && ch.is_ascii_lowercase() => ch as usize - 'a' as usize,
        _ => t.parse::<usize>().map_err(|_| anyhow!("bad qubit '{t}'"))?,
    };
    if index >= n_qubits {
        bail!("qubit '{t}' out of range for {n_qubits} qubits");
    }
    Ok(index)
}

pub fn qubit_name(q: usize) -> String {
    if q < 26 {
        ((b'a' + q as u8) as char).to_string()
    } else {
        q.to_string()
    }
}

pub fn parse_qubits(text: &str, n_qubits: usize) -> Result<Vec<usize>> {
    text.split(',').map(|s| parse_qubit(s, n_qubits)).collect()
}

pub fn parse_direction(text: &str) -> Result<PureState> {
    Ok(match text.trim() {
        "H" | "h" => states::h(),
        "V" | "v" => states::v(),
        "+" => states::plus(),
        "-" => states::minus(),
        "L" | "l" => states::left(),
        "R" | "r" => states::right(),
        other => {
            let (t, p) = other.split_once(',').ok_or_else(|| anyhow!("bad direction '{other}'"))?;
            let theta: f64 = t.trim().parse().with_context(|| format!("bad polar angle '{t}'"))?;
            let phi: f64 = p.trim().parse().with_context(|| format!("bad azimuth '{p}'"))?;
            states::bloch(theta, phi)
        }
    })
}

pub fn named_state(name: &str) -> Result<PureState> {
    let lower = name.to_ascii_lowercase();
    Ok(match lower.as_str() {
        "w3" => states::w3(),
        "w3bar" => states::w3_bar(),
        "g3" => states::g3(),
        _ => match lower.strip_prefix("ghz").and_then(|n| n.parse::<usize>().ok()) {
            Some(n) => states::ghz(n)?,
            None => bail!("unknown state name '{name}'"),
        },
    })
}

/// Left-aligned plain-text table.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let line = |cells: Vec<&str>, out: &mut String| {
        let parts: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(header.to_vec(), &mut out);
    line(widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(|s| s.as_str()).collect(), &mut out);
    for row in rows {
        line(row.iter().map(|s| s.as_str()).collect(), &mut out);
    }
    out
}
