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


//! TOML run configuration and its merge with command-line flags.
//!
//! Precedence is flags, then the config file, then built-in defaults.
//! Relative paths in a config file are resolved against the file's directory.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use dicke_core::source::NoiseModel;
use serde::Deserialize;

use crate::cli::{CommonArgs, SourceArgs};

pub const DEFAULT_EVENTS: f64 = 1556.0;
pub const DEFAULT_EFFICIENCY: f64 = 1.0;

#[derive(Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub dicke: Option<[usize; 2]>,
    pub named: Option<String>,
    pub state: Option<PathBuf>,
    pub white_noise: Option<f64>,
    pub dephase: Option<f64>,
    pub excitation: Option<f64>,
    pub calibrated: Option<bool>,
    pub events: Option<f64>,
    pub efficiencies: Option<EfficiencySpec>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub bootstrap: Option<usize>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum EfficiencySpec {
    Scalar(f64),
    List(Vec<f64>),
    Text(String),
}

impl EfficiencySpec {
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<f64> = text
            .split(',')
            .map(|s| s.trim().parse::<f64>().with_context(|| format!("bad efficiency '{s}'")))
            .collect::<Result<_>>()?;
        Ok(if parts.len() == 1 { Self::Scalar(parts[0]) } else { Self::List(parts) })
    }

    /// One value per detector, two detectors per qubit.
    pub fn expand(&self, n_qubits: usize) -> Result<Vec<f64>> {
        let values = match self {
            Self::Scalar(v) => vec![*v; 2 * n_qubits],
            Self::List(v) => v.clone(),
            Self::Text(t) => return Self::parse(t)?.expand(n_qubits),
        };
        if values.len() != 2 * n_qubits {
            bail!("{} efficiencies given, {} detectors expected", values.len(), 2 * n_qubits);
        }
        if let Some(bad) = values.iter().find(|v| !(**v > 0.0 && **v <= 1.0)) {
            bail!("efficiency {bad} outside (0, 1]");
        }
        Ok(values)
    }
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: FileConfig = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.state, &mut cfg.out].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn from_common(common: &CommonArgs) -> Result<Self> {
        match &common.config {
            Some(path) => Self::load(path),
            None => Ok(Self::default()),
        }
    }
}

/// Which state a command starts from.
#[derive(Clone, Debug, PartialEq)]
pub enum StateSource {
    Dicke(usize, usize),
    Named(String),
    File(PathBuf),
}

pub fn output_dir(common: &CommonArgs, file: &FileConfig) -> PathBuf {
    common.out.clone().or_else(|| file.out.clone()).unwrap_or_else(|| PathBuf::from("."))
}

pub fn resolve_source(args: &SourceArgs, file: &FileConfig) -> Result<StateSource> {
    if let Some(d) = &args.dicke {
        return Ok(StateSource::Dicke(d[0], d[1]));
    }
    if let Some(name) = &args.named {
        return Ok(StateSource::Named(name.clone()));
    }
    if let Some(path) = &args.state {
        return Ok(StateSource::File(path.clone()));
    }
    // Nothing on the command line: fall back to the file, which must not be ambiguous.
    let given = [file.dicke.is_some(), file.named.is_some(), file.state.is_some()];
    if given.iter().filter(|g| **g).count() > 1 {
        bail!("config sets more than one of dicke, named and state");
    }
    if let Some([n, m]) = file.dicke {
        return Ok(StateSource::Dicke(n, m));
    }
    if let Some(name) = &file.named {
        return Ok(StateSource::Named(name.clone()));
    }
    if let Some(path) = &file.state {
        return Ok(StateSource::File(path.clone()));
    }
    bail!("no state given: use --dicke N M, --named NAME or --state FILE")
}

pub fn resolve_noise(args: &SourceArgs, file: &FileConfig) -> Result<NoiseModel> {
    let calibrated = args.calibrated || file.calibrated.unwrap_or(false);
    let base = if calibrated { NoiseModel::CALIBRATED } else { NoiseModel::IDEAL };
    let model = NoiseModel {
        white_noise: args.white_noise.or(file.white_noise).unwrap_or(base.white_noise),
        dephasing: args.dephase.or(file.dephase).unwrap_or(base.dephasing),
        excitation: args.excitation.or(file.excitation).unwrap_or(base.excitation),
    };
    model.validate()?;
    Ok(model)
}
