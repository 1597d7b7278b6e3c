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


//! Subcommand implementations. Each returns the process exit code.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use dicke_core::protocols::{
    classify_projection, classify_projection_mixed, loss_analysis, maximal_singlet_fraction,
    maximal_singlet_fraction_search, odt_projection, teleportation_fidelity, telecloning_fidelities, LossReport,
    OdtOutcome, ProjectionReport, Reference, TeleclonReport,
};
use dicke_core::source::{apply_noise, simulate_tomography, Basis, MeasurementSetting, NoiseModel};
use dicke_core::tomography::{bootstrap, mle_fit, MleConfig};
use dicke_core::witness::{
    collective_spin_witness, filtered_ghz_witness, fidelity_witness, jz_squared_check, FilterConfig,
    WitnessVerdict, DICKE_ALPHA,
};
use dicke_core::{dicke_state, fidelity_pure, partial_trace, DensityMatrix};
use serde::Serialize;

use crate::cli::{CommonArgs, GenArgs, ProjectArgs, ProtocolsArgs, SimulateArgs, TomoArgs, WitnessArgs};
use crate::config::{
    output_dir, resolve_noise, resolve_source, EfficiencySpec, FileConfig, StateSource, DEFAULT_EFFICIENCY,
    DEFAULT_EVENTS,
};
use crate::io::{self, Envelope, StateFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INCONCLUSIVE: i32 = 2;

fn load_source(source: &StateSource) -> Result<StateFile> {
    Ok(match source {
        StateSource::Dicke(n, m) => StateFile::Pure(dicke_state(*n, *m)?),
        StateSource::Named(name) => StateFile::Pure(io::named_state(name)?),
        StateSource::File(path) => io::read_state(path)?,
    })
}

fn describe(source: &StateSource) -> String {
    match source {
        StateSource::Dicke(n, m) => format!("D({n},{m})"),
        StateSource::Named(name) => name.clone(),
        StateSource::File(path) => path.display().to_string(),
    }
}

/// Noisy state, or the untouched input when the model is the identity.
fn with_noise(input: &StateFile, noise: &NoiseModel) -> StateFile {
    if *noise == NoiseModel::IDEAL {
        input.clone()
    } else {
        StateFile::Mixed(apply_noise(&input.density(), noise))
    }
}

fn input_path(explicit: &Option<PathBuf>, common: &CommonArgs, file: &FileConfig, default: &str) -> PathBuf {
    explicit.clone().unwrap_or_else(|| output_dir(common, file).join(default))
}

fn verdict_word(v: &WitnessVerdict) -> &'static str {
    if v.entangled {
        "ENTANGLED"
    } else {
        "INCONCLUSIVE"
    }
}

fn verdict_line(v: &WitnessVerdict) -> String {
    let op = match v.direction {
        dicke_core::witness::Direction::AboveIsEntangled => ">",
        dicke_core::witness::Direction::BelowIsEntangled => "<",
    };
    format!("{} = {:.6} (entangled if {op} {:.6}): {}", v.witness, v.value, v.bound, verdict_word(v))
}

pub fn gen(args: &GenArgs) -> Result<i32> {
    let file = FileConfig::from_common(&args.common)?;
    let source = resolve_source(&args.source, &file)?;
    let noise = resolve_noise(&args.source, &file)?;
    let input = load_source(&source)?;
    let ideal = match &input {
        StateFile::Pure(p) => p.clone(),
        StateFile::Mixed(m) => m.principal_component(),
    };
    let out = with_noise(&input, &noise);
    let dir = output_dir(&args.common, &file);
    let path = match &out {
        StateFile::Pure(p) => io::write_json(&dir, "state.json", p, args.common.force)?,
        StateFile::Mixed(m) => io::write_json(&dir, "state.json", m, args.common.force)?,
    };
    let f = fidelity_pure(&out.density(), &ideal)?;
    println!("wrote {}", path.display());
    println!("fidelity to ideal {}: {f:.6}", describe(&source));
    Ok(EXIT_OK)
}

pub fn simulate(args: &SimulateArgs) -> Result<i32> {
    let file = FileConfig::from_common(&args.common)?;
    let source = resolve_source(&args.source, &file)?;
    let noise = resolve_noise(&args.source, &file)?;
    let seed = args.seed.or(file.seed).context("a seed is required: pass --seed S or set seed in the config")?;
    let events = args.events.or(file.events).unwrap_or(DEFAULT_EVENTS);
    let rho = with_noise(&load_source(&source)?, &noise).density();
    let n = rho.n_qubits();
    let spec = match &args.efficiencies {
        Some(text) => EfficiencySpec::parse(text)?,
        None => file.efficiencies.clone().unwrap_or(EfficiencySpec::Scalar(DEFAULT_EFFICIENCY)),
    };
    let efficiencies = spec.expand(n)?;
    let records = simulate_tomography(&rho, events, &efficiencies, seed)?;
    let dir = output_dir(&args.common, &file);
    let path = io::write_records(&dir, "counts.jsonl", &records, args.common.force)?;
    let total: u64 = records.iter().map(|r| r.total()).sum();
    println!("wrote {} ({} settings)", path.display(), records.len());
    println!(
        "{}",
        io::table(
            &["state", "events/setting", "total counts", "seed"],
            &[vec![describe(&source), format!("{events}"), total.to_string(), seed.to_string()]],
        )
    );
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct MleSummary<'a> {
    n_qubits: usize,
    log_likelihood: f64,
    initial_log_likelihood: f64,
    iterations: usize,
    converged: bool,
    gradient_norm_final: f64,
    skipped_settings: &'a [String],
}

pub fn tomo(args: &TomoArgs) -> Result<i32> {
    let file = FileConfig::from_common(&args.common)?;
    let counts = input_path(&args.counts, &args.common, &file, "counts.jsonl");
    let records = io::read_records(&counts)?;
    let defaults = MleConfig::default();
    let config = MleConfig {
        max_iterations: args.max_iterations.unwrap_or(defaults.max_iterations),
        tolerance: args.tolerance.unwrap_or(defaults.tolerance),
        seed: args.seed.or(file.seed).unwrap_or(defaults.seed),
    };
    let report = mle_fit(&records, &config)?;
    let dir = output_dir(&args.common, &file);
    let rho_path = io::write_json(&dir, "rho.json", &report.rho, args.common.force)?;
    let summary = MleSummary {
        n_qubits: report.rho.n_qubits(),
        log_likelihood: report.log_likelihood,
        initial_log_likelihood: report.initial_log_likelihood,
        iterations: report.iterations,
        converged: report.converged,
        gradient_norm_final: report.gradient_norm_final,
        skipped_settings: &report.skipped_settings,
    };
    let envelope = Envelope { schema: io::MLE_REPORT_SCHEMA, body: &summary };
    let report_path = io::write_json(&dir, "mle_report.json", &envelope, args.common.force)?;
    println!("wrote {} and {}", rho_path.display(), report_path.display());
    let mut rows = vec![
        vec!["log-likelihood".into(), format!("{:.6}", report.log_likelihood)],
        vec!["initial log-likelihood".into(), format!("{:.6}", report.initial_log_likelihood)],
        vec!["iterations".into(), report.iterations.to_string()],
        vec!["converged".into(), report.converged.to_string()],
    ];
    if report.rho.n_qubits() == 4 {
        let f = fidelity_pure(&report.rho, &dicke_state(4, 2)?)?;
        rows.push(vec!["fidelity to D(4,2)".into(), format!("{f:.6}")]);
    }
    if !report.skipped_settings.is_empty() {
        rows.push(vec!["skipped settings".into(), report.skipped_settings.join(" ")]);
    }
    print!("{}", io::table(&["quantity", "value"], &rows));
    if !report.converged {
        eprintln!("warning: the fit did not converge within {} iterations", config.max_iterations);
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct WitnessReport {
    n_qubits: usize,
    /// Fidelity to `D(4,2)` for four-qubit input.
    fidelity: Option<f64>,
    jz_squared: Option<f64>,
    bootstrap_resamples: Option<usize>,
    verdicts: Vec<WitnessVerdict>,
}

/// Witness values in the order of the verdict list.
fn witness_values(rho: &DensityMatrix, filter: &FilterConfig) -> Result<Vec<WitnessVerdict>> {
    match rho.n_qubits() {
        4 => Ok(vec![
            fidelity_witness(rho, &dicke_state(4, 2)?, DICKE_ALPHA)?,
            collective_spin_witness(rho, 4)?,
        ]),
        3 => Ok(vec![collective_spin_witness(rho, 3)?, filtered_ghz_witness(rho, filter)?.0]),
        n => bail!("witnesses are defined for three or four qubits, got {n}"),
    }
}

pub fn witness(args: &WitnessArgs) -> Result<i32> {
    let file = FileConfig::from_common(&args.common)?;
    let state_path = input_path(&args.state, &args.common, &file, "rho.json");
    let rho = io::read_state(&state_path)?.density();
    let seed = args.seed.or(file.seed);
    let filter = FilterConfig {
        restarts: args.restarts.unwrap_or(FilterConfig::default().restarts),
        seed: seed.unwrap_or(0),
        ..FilterConfig::default()
    };
    let mut verdicts = witness_values(&rho, &filter)?;
    let resamples = args.bootstrap.or(file.bootstrap);
    if let Some(resamples) = resamples {
        let seed = seed.context("--bootstrap needs a seed: pass --seed S or set seed in the config")?;
        let counts = input_path(&args.counts, &args.common, &file, "counts.jsonl");
        let records = io::read_records(&counts)?;
        let summary = bootstrap(&records, &MleConfig { seed, ..MleConfig::default() }, resamples, seed, |fit| {
            witness_values(fit, &filter)
                .map(|vs| vs.iter().map(|v| v.value).collect())
                .unwrap_or_else(|_| vec![f64::NAN; 2])
        })?;
        verdicts = verdicts.into_iter().zip(&summary.std_dev).map(|(v, s)| v.with_error(*s)).collect();
    }
    let n = rho.n_qubits();
    let fidelity = if n == 4 { Some(fidelity_pure(&rho, &dicke_state(4, 2)?)?) } else { None };
    let jz_squared = if n == 4 { Some(jz_squared_check(&rho)?) } else { None };
    let report = WitnessReport { n_qubits: n, fidelity, jz_squared, bootstrap_resamples: resamples, verdicts };
    let dir = output_dir(&args.common, &file);
    let path = io::write_json(
        &dir,
        "witness.json",
        &Envelope { schema: io::WITNESS_REPORT_SCHEMA, body: &report },
        args.common.force,
    )?;
    println!("wrote {}", path.display());
    let rows: Vec<Vec<String>> = report
        .verdicts
        .iter()
        .map(|v| {
            let op = match v.direction {
                dicke_core::witness::Direction::AboveIsEntangled => ">",
                dicke_core::witness::Direction::BelowIsEntangled => "<",
            };
            vec![
                v.witness.clone(),
                format!("{:.6}", v.value),
                v.statistical_error.map_or("-".into(), |e| format!("{e:.6}")),
                format!("{op} {:.6}", v.bound),
                verdict_word(v).into(),
            ]
        })
        .collect();
    print!("{}", io::table(&["witness", "value", "error", "entangled if", "verdict"], &rows));
    if let Some(f) = fidelity {
        println!("fidelity to D(4,2): {f:.6}");
    }
    for v in &report.verdicts {
        if let Some(w) = &v.warning {
            eprintln!("warning: {}: {w}", v.witness);
        }
    }
    Ok(if report.verdicts.iter().all(|v| v.entangled) { EXIT_OK } else { EXIT_INCONCLUSIVE })
}

fn parse_reference(text: &str) -> Result<Reference> {
    Ok(match text.to_ascii_lowercase().as_str() {
        "w3" => Reference::W3,
        "w3bar" => Reference::W3Bar,
        "g3" => Reference::G3,
        "closest" => Reference::Closest,
        other => bail!("unknown reference '{other}' (w3, w3bar, g3 or closest)"),
    })
}

pub fn project(args: &ProjectArgs) -> Result<i32> {
    let file = FileConfig::from_common(&args.common)?;
    let state_path = input_path(&args.state, &args.common, &file, "rho.json");
    let state = io::read_state(&state_path)?;
    let qubit = io::parse_qubit(&args.qubit, state.n_qubits())?;
    let direction = io::parse_direction(&args.direction)?;
    let reference = parse_reference(&args.reference)?;
    let filter = FilterConfig { seed: args.seed.or(file.seed).unwrap_or(0), ..FilterConfig::default() };
    let ghz = args.ghz.then_some(&filter);
    let report: ProjectionReport = match &state {
        StateFile::Pure(p) => classify_projection(p, qubit, &direction, &reference, ghz)?,
        StateFile::Mixed(m) => classify_projection_mixed(m, qubit, &direction, &reference, ghz)?,
    };
    let dir = output_dir(&args.common, &file);
    let path = io::write_json(
        &dir,
        "projection.json",
        &Envelope { schema: io::PROJECTION_REPORT_SCHEMA, body: &report },
        args.common.force,
    )?;
    println!("wrote {}", path.display());
    let mut rows = vec![
        vec!["measured qubit".into(), io::qubit_name(qubit)],
        vec!["direction".into(), args.direction.clone()],
        vec!["probability".into(), format!("{:.6}", report.probability)],
        vec![format!("fidelity to {}", report.reference_name), format!("{:.6}", report.fidelity_to_reference)],
    ];
    for v in report.spin_witness.iter().chain(&report.ghz_witness) {
        rows.push(vec!["witness".into(), verdict_line(v)]);
    }
    print!("{}", io::table(&["quantity", "value"], &rows));
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct MsfSummary {
    pair: Vec<String>,
    spectral: f64,
    search: f64,
    teleportation_fidelity: f64,
}

#[derive(Serialize)]
struct OdtSummary {
    measured: Vec<String>,
    bases: String,
    outcomes: Vec<OdtOutcome>,
}

#[derive(Serialize)]
struct ProtocolsReport {
    n_qubits: usize,
    msf: Option<MsfSummary>,
    telecloning: Option<TeleclonReport>,
    odt: Option<OdtSummary>,
    loss: Option<LossReport>,
}

pub fn protocols(args: &ProtocolsArgs) -> Result<i32> {
    let file = FileConfig::from_common(&args.common)?;
    let state_path = input_path(&args.state, &args.common, &file, "rho.json");
    let state = io::read_state(&state_path)?;
    let n = state.n_qubits();
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let everything = !(args.msf || args.telecloning || args.odt.is_some() || args.loss.is_some());
    let pure = matches!(state, StateFile::Pure(_));
    let mut rows: Vec<Vec<String>> = Vec::new();

    let msf = if args.msf || everything {
        let rho = state.density();
        let (pair, reduced) = if n == 2 {
            (vec![0, 1], rho)
        } else {
            let pair = io::parse_qubits(&args.pair, n)?;
            if pair.len() != 2 || pair[0] == pair[1] {
                bail!("--pair needs two distinct qubits");
            }
            let reduced = partial_trace(&rho, &pair)?;
            (pair, reduced)
        };
        let spectral = maximal_singlet_fraction(&reduced)?.value;
        let search = maximal_singlet_fraction_search(&reduced, 32, seed)?.value;
        let tele = teleportation_fidelity(spectral.clamp(0.0, 1.0))?;
        let names: Vec<String> = pair.iter().map(|&q| io::qubit_name(q)).collect();
        rows.push(vec![format!("singlet fraction ({})", names.join(",")), format!("{spectral:.6} (search {search:.6})")]);
        rows.push(vec!["teleportation fidelity (2f+1)/3".into(), format!("{tele:.6}")]);
        Some(MsfSummary { pair: names, spectral, search, teleportation_fidelity: tele })
    } else {
        None
    };

    let telecloning = if args.telecloning || (everything && pure && n >= 3) {
        let resource = state.pure("telecloning")?;
        let sender = io::parse_qubit(&args.sender, n)?;
        let r = telecloning_fidelities(resource, sender, args.samples, seed)?;
        rows.push(vec!["telecloning average".into(), format!("{:.6}", r.average)]);
        rows.push(vec!["telecloning equatorial".into(), format!("{:.6}", r.equatorial)]);
        let agrees = (r.average - r.channel_formula).abs() < 1e-6;
        rows.push(vec![
            "channel formula (2f+1)/3".into(),
            format!("{:.6} ({})", r.channel_formula, if agrees { "matches the average" } else { "differs" }),
        ]);
        Some(r)
    } else {
        None
    };

    let odt = if args.odt.is_some() || (everything && pure && n >= 3) {
        let resource = state.pure("open-destination teleportation")?;
        let default_pair = format!("{},{}", io::qubit_name(n - 2), io::qubit_name(n - 1));
        let measured = io::parse_qubits(args.odt.as_deref().unwrap_or(&default_pair), n)?;
        if measured.len() != 2 {
            bail!("--odt needs exactly two qubits");
        }
        let setting: MeasurementSetting = args.bases.parse().context("bad --bases")?;
        if setting.0.len() != 2 {
            bail!("--bases needs two letters, e.g. ZZ");
        }
        let bases: [Basis; 2] = [setting.0[0], setting.0[1]];
        let outcomes = odt_projection(resource, [measured[0], measured[1]], bases)?;
        for o in &outcomes {
            rows.push(vec![
                format!("ODT {}", o.outcome),
                format!(
                    "p = {:.6}, best Bell {} fidelity {:.6}",
                    o.probability,
                    o.bell_state.map_or("-", |b| b.name()),
                    o.bell_fidelity
                ),
            ]);
        }
        Some(OdtSummary { measured: measured.iter().map(|&q| io::qubit_name(q)).collect(), bases: args.bases.clone(), outcomes })
    } else {
        None
    };

    let loss = if args.loss.is_some() || (everything && n == 4) {
        let lost = io::parse_qubits(args.loss.as_deref().unwrap_or("d"), n)?;
        let r = loss_analysis(&state.density(), &lost)?;
        if let Some(f) = r.fidelity_to_w_mixture {
            rows.push(vec!["loss: fidelity to W mixture".into(), format!("{f:.6}")]);
        }
        if let Some(v) = &r.spin_witness {
            rows.push(vec!["loss: spin witness".into(), verdict_line(v)]);
        }
        Some(r)
    } else {
        None
    };

    if everything && !pure {
        rows.push(vec!["skipped".into(), "telecloning and ODT need a pure-state file".into()]);
    }
    let report = ProtocolsReport { n_qubits: n, msf, telecloning, odt, loss };
    let dir = output_dir(&args.common, &file);
    let path = io::write_json(
        &dir,
        "protocols.json",
        &Envelope { schema: io::PROTOCOLS_REPORT_SCHEMA, body: &report },
        args.common.force,
    )?;
    println!("wrote {}", path.display());
    print!("{}", io::table(&["quantity", "value"], &rows));
    Ok(EXIT_OK)
}
