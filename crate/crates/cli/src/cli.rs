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


//! Command-line argument definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "dicke-lab", version, about = "Dicke-state simulation, tomography and entanglement analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write an ideal or noisy state file and print its fidelity to the ideal target.
    Gen(GenArgs),
    /// Sample Poisson counts for every local Pauli setting.
    Simulate(SimulateArgs),
    /// Maximum-likelihood reconstruction from a count file.
    Tomo(TomoArgs),
    /// Evaluate entanglement witnesses on a state.
    Witness(WitnessArgs),
    /// Project one qubit and classify the remaining three.
    Project(ProjectArgs),
    /// Singlet fraction, telecloning, open-destination teleportation and loss.
    Protocols(ProtocolsArgs),
}

/// Options shared by every subcommand that writes files.
#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// TOML run configuration; flags take precedence over it.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Overwrite existing output files.
    #[arg(long)]
    pub force: bool,
}

/// Where the state comes from and which noise is applied to it.
#[derive(Debug, Args, Clone, Default)]
pub struct SourceArgs {
    /// Dicke state with N qubits and M excitations.
    #[arg(long, num_args = 2, value_names = ["N", "M"], conflicts_with_all = ["state", "named"])]
    pub dicke: Option<Vec<usize>>,
    /// Named state: w3, w3bar, g3 or ghzN.
    #[arg(long, conflicts_with = "state")]
    pub named: Option<String>,
    /// Pure-state or density-matrix JSON file.
    #[arg(long, value_name = "FILE")]
    pub state: Option<PathBuf>,
    /// White-noise weight p.
    #[arg(long, value_name = "P")]
    pub white_noise: Option<f64>,
    /// Factor q multiplying every off-diagonal element (1 = no dephasing).
    #[arg(long, value_name = "Q")]
    pub dephase: Option<f64>,
    /// Weight of the neighbouring-excitation admixture.
    #[arg(long, value_name = "C")]
    pub excitation: Option<f64>,
    /// Start from the noise calibrated to fidelity 0.844 and spin value 5.58.
    #[arg(long)]
    pub calibrated: bool,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Mean detected events per setting.
    #[arg(long, value_name = "X")]
    pub events: Option<f64>,
    /// Detector efficiencies: one scalar or 2n comma-separated values.
    #[arg(long, value_name = "CSV|SCALAR")]
    pub efficiencies: Option<String>,
    #[arg(long, value_name = "S")]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct TomoArgs {
    /// Count-record file; defaults to counts.jsonl in the output directory.
    #[arg(long, value_name = "FILE")]
    pub counts: Option<PathBuf>,
    #[arg(long, value_name = "S")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "N")]
    pub max_iterations: Option<usize>,
    #[arg(long, value_name = "TOL")]
    pub tolerance: Option<f64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    /// State to test; defaults to rho.json in the output directory.
    #[arg(long, value_name = "FILE")]
    pub state: Option<PathBuf>,
    /// Count file used for bootstrap errors; defaults to counts.jsonl in the output directory.
    #[arg(long, value_name = "FILE")]
    pub counts: Option<PathBuf>,
    /// Number of bootstrap resamples.
    #[arg(long, value_name = "N")]
    pub bootstrap: Option<usize>,
    #[arg(long, value_name = "S")]
    pub seed: Option<u64>,
    /// Filter restarts for the three-qubit GHZ witness.
    #[arg(long, value_name = "N")]
    pub restarts: Option<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[arg(long, value_name = "FILE")]
    pub state: Option<PathBuf>,
    /// Measured qubit: a letter (a, b, ...) or a zero-based index.
    #[arg(long, default_value = "d")]
    pub qubit: String,
    /// H, V, +, -, L, R or "theta,phi" in radians.
    #[arg(long, default_value = "V", allow_hyphen_values = true)]
    pub direction: String,
    /// w3, w3bar, g3 or closest.
    #[arg(long, default_value = "closest")]
    pub reference: String,
    /// Also run the filtered GHZ witness on the residual.
    #[arg(long)]
    pub ghz: bool,
    #[arg(long, value_name = "S")]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct ProtocolsArgs {
    #[arg(long, value_name = "FILE")]
    pub state: Option<PathBuf>,
    /// Maximal singlet fraction of a qubit pair.
    #[arg(long)]
    pub msf: bool,
    /// Pair kept for the singlet fraction.
    #[arg(long, default_value = "a,b")]
    pub pair: String,
    /// Telecloning fidelities with the given sender.
    #[arg(long)]
    pub telecloning: bool,
    #[arg(long, default_value = "d")]
    pub sender: String,
    /// Bloch-sphere quadrature size.
    #[arg(long, default_value_t = 974)]
    pub samples: usize,
    /// Open-destination teleportation: measured pair, e.g. c,d.
    #[arg(long, value_name = "PAIR")]
    pub odt: Option<String>,
    /// Analyzer bases for the measured pair, e.g. ZZ.
    #[arg(long, default_value = "ZZ")]
    pub bases: String,
    /// Lost qubits, e.g. d or c,d.
    #[arg(long, value_name = "LIST")]
    pub loss: Option<String>,
    #[arg(long, value_name = "S")]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub common: CommonArgs,
}
