use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use afl_core::harness::{
    cayley_suite, sweep, verify_instance, InstanceSpec, ModeSelection, SweepGrid, VerificationRecord, VerifyOptions,
};
use afl_core::oracle::Parity;
use afl_core::{AflError, PrecisionContext};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

const EXIT_IDENTITY: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_PRECISION: u8 = 3;

#[derive(Parser)]
#[command(name = "afl", version, about = "Check the n=3 Lie-algebra AFL identity on p-adic instances")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ParityArg {
    Odd,
    Even,
}

impl From<ParityArg> for Parity {
    fn from(p: ParityArg) -> Self {
        match p {
            ParityArg::Odd => Parity::Odd,
            ParityArg::Even => Parity::Even,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Closed,
    Oracle,
    Both,
}

impl From<ModeArg> for ModeSelection {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Closed => ModeSelection::Closed,
            ModeArg::Oracle => ModeSelection::Oracle,
            ModeArg::Both => ModeSelection::Both,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// `v(a)`: an integer, or `inf` for `a = 0`.
#[derive(Clone, Copy)]
struct Va(Option<i32>);

fn parse_va(s: &str) -> Result<Va, String> {
    if s.eq_ignore_ascii_case("inf") {
        return Ok(Va(None));
    }
    s.parse::<i32>().map(|v| Va(Some(v))).map_err(|e| format!("expected an integer or 'inf': {e}"))
}

#[derive(Subcommand)]
enum Command {
    /// Verify a single instance and print its record as JSON.
    Verify {
        #[arg(long)]
        p: u32,
        #[arg(long, value_enum)]
        parity: ParityArg,
        #[arg(long)]
        m: i32,
        #[arg(long, value_parser = parse_va, allow_hyphen_values = true)]
        va: Va,
        /// Negative values produce a non-integral instance.
        #[arg(long, allow_hyphen_values = true)]
        vb: i32,
        #[arg(long, default_value_t = 0)]
        unit_seed: u64,
        #[arg(long)]
        precision: Option<u32>,
        #[arg(long, value_enum, default_value = "both")]
        mode: ModeArg,
        /// Include wall-clock timings (makes output non-reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// Verify every point of a parameter grid.
    Sweep {
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<u32>,
        #[arg(long, value_enum, value_delimiter = ',', default_values = ["odd", "even"])]
        parity: Vec<ParityArg>,
        #[arg(long, default_value_t = 0)]
        max_m: i32,
        /// Finite valuations 0..=max-va are swept, plus `a = 0`.
        #[arg(long, default_value_t = 0)]
        max_va: i32,
        /// Leave out the `a = 0` instances.
        #[arg(long)]
        skip_va_inf: bool,
        #[arg(long, default_value_t = 0)]
        max_vb: i32,
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long, value_enum, default_value = "both")]
        mode: ModeArg,
        #[arg(long)]
        timings: bool,
    },
    /// Randomized checks of the Cayley-transform identities.
    CayleySuite {
        #[arg(long)]
        p: u32,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn error_code(e: &AflError) -> u8 {
    match e {
        AflError::PrecisionExhausted(_) | AflError::PrecisionOutOfRange { .. } => EXIT_PRECISION,
        _ => EXIT_USAGE,
    }
}

fn fail(e: &AflError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(error_code(e))
}

fn print_json<T: Serialize>(value: &T, out: &mut dyn Write) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)
}

fn record_ok(r: &VerificationRecord) -> bool {
    r.afl_holds && r.pairing_holds && r.alpha_mismatches.unwrap_or(0) == 0
}

#[derive(Serialize)]
struct SweepSummary {
    total: usize,
    passed: usize,
    failed: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    aborted_at: Option<String>,
}

#[derive(Serialize)]
struct SweepReport<'a> {
    records: &'a [VerificationRecord],
    summary: SweepSummary,
}

fn write_csv(records: &[VerificationRecord], out: &mut dyn Write) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["instance", "analytic_closed", "analytic_oracle", "geometric", "afl_holds"])?;
    let opt = |v: Option<i64>| v.map(|v| v.to_string()).unwrap_or_default();
    for r in records {
        w.write_record([
            r.label.clone(),
            opt(r.analytic_closed),
            opt(r.analytic_oracle),
            r.geometric_total.to_string(),
            r.afl_holds.to_string(),
        ])?;
    }
    w.flush()
}

fn open_output(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> io::Result<ExitCode> {
    match cli.command {
        Command::Verify { p, parity, m, va, vb, unit_seed, precision, mode, timings } => {
            let spec = InstanceSpec { p, parity: parity.into(), m, va: va.0, vb, seed: unit_seed, precision };
            let opts = VerifyOptions { timings, ..VerifyOptions::from_env(mode.into()) };
            match verify_instance(&spec, &opts) {
                Ok(rec) => {
                    print_json(&rec, &mut io::stdout().lock())?;
                    Ok(if record_ok(&rec) { ExitCode::SUCCESS } else { ExitCode::from(EXIT_IDENTITY) })
                }
                Err(e) => Ok(fail(&e)),
            }
        }
        Command::Sweep { p, parity, max_m, max_va, skip_va_inf, max_vb, seeds, out, format, mode, timings } => {
            if let Some(&bad) = p.iter().find(|&&p| PrecisionContext::new(p, 1).is_err()) {
                return Ok(fail(&AflError::InvalidPrime(bad)));
            }
            let grid = SweepGrid {
                primes: p,
                parities: parity.into_iter().map(Parity::from).collect(),
                max_m,
                max_va,
                include_va_inf: !skip_va_inf,
                max_vb,
                seeds,
            };
            let opts = VerifyOptions { timings, ..VerifyOptions::from_env(mode.into()) };
            let outcome = sweep(&grid.instances(), &opts);
            let passed = outcome.records.iter().filter(|r| record_ok(r)).count();
            let failed = outcome.records.len() - passed;
            let mut sink = open_output(&out)?;
            match format {
                Format::Json => {
                    let summary = SweepSummary {
                        total: outcome.records.len(),
                        passed,
                        failed,
                        aborted_at: outcome.error.as_ref().map(|(s, e)| format!("{}: {e}", s.label())),
                    };
                    print_json(&SweepReport { records: &outcome.records, summary }, &mut *sink)?;
                }
                Format::Csv => write_csv(&outcome.records, &mut *sink)?,
            }
            sink.flush()?;
            eprintln!("sweep: {} instances, {passed} passed, {failed} failed", outcome.records.len());
            if let Some((spec, e)) = &outcome.error {
                eprintln!("aborted at {}", spec.label());
                return Ok(fail(e));
            }
            Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(EXIT_IDENTITY) })
        }
        Command::CayleySuite { p, n, samples, seed } => match cayley_suite(p, n, samples, seed) {
            Ok(report) => {
                print_json(&report, &mut io::stdout().lock())?;
                Ok(if report.all_passed() { ExitCode::SUCCESS } else { ExitCode::from(EXIT_IDENTITY) })
            }
            Err(e) => Ok(fail(&e)),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
