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


//! `dicke-lab` command-line front end.

pub mod cli;
pub mod commands;
pub mod config;
pub mod io;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;

use cli::{Cli, Command};

pub const EXIT_ERROR: i32 = 1;

/// Caps the global rayon pool when `DICKE_LAB_THREADS` is set.
fn configure_threads() -> anyhow::Result<()> {
    if let Ok(text) = std::env::var("DICKE_LAB_THREADS") {
        let n: usize = text
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| anyhow::anyhow!("DICKE_LAB_THREADS must be a positive integer, got '{text}'"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

/// Parses `args` and runs the subcommand: 0 on success, 1 on error, 2 when
/// a witness is inconclusive.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_ERROR,
            };
        }
    };
    let result = configure_threads().and_then(|_| match &cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Tomo(a) => commands::tomo(a),
        Command::Witness(a) => commands::witness(a),
        Command::Project(a) => commands::project(a),
        Command::Protocols(a) => commands::protocols(a),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}
