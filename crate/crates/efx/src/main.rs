//! Command-line front end: solve instances, verify allocations, enumerate
//! brute-force EFX sets, and generate seeded instances.
//!
//! Machine-readable JSON goes to stdout; human-readable diagnostics go to
//! stderr. Exit codes are a stable contract:
//!
//! | code | meaning                                             |
//! |------|-----------------------------------------------------|
//! | 0    | success (solve certified / allocation is EFX)       |
//! | 1    | verify: allocation is not EFX (witness on stdout);  |
//! |      | elsewhere: output file could not be written         |
//! | 2    | parse error (unreadable file or malformed JSON)     |
//! | 3    | validation error (well-formed but invalid input)    |
//! | 4    | iteration cap reached (trace still written)         |
//! | 5    | internal assertion or certification failure         |
//! | 6    | instance too large for the brute-force oracle       |

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use efx::checker::{self, ValueMode};
use efx::engine::{self, EngineError, SolveOptions, StepRecord};
use efx::generator::{self, GenSpec, ValueDist};
use efx::model::{allocation_valid, rational_from_json, ParseError, Rational};
use efx::{Allocation, Instance};

const EXIT_OK: u8 = 0;
const EXIT_NOT_EFX: u8 = 1;
const EXIT_WRITE_FAILED: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_ITERATION_CAP: u8 = 4;
const EXIT_INTERNAL: u8 = 5;
const EXIT_ORACLE_TOO_LARGE: u8 = 6;

#[derive(Parser)]
#[command(
    name = "efx",
    version,
    about = "EFX allocation solver for agents of two additive valuation types"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a complete EFX allocation and print it as JSON.
    Solve {
        /// Instance JSON file.
        instance: PathBuf,
        /// Write a JSON-lines trace of every improvement step here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Runtime-check theorem-guaranteed facts on every step
        /// (always on in debug builds).
        #[arg(long)]
        assert_lemmas: bool,
        /// Defensive cap on improvement steps.
        #[arg(long, default_value_t = 1_000_000)]
        max_steps: u64,
    },
    /// Check that an allocation is valid and EFX for an instance.
    Verify {
        /// Instance JSON file.
        instance: PathBuf,
        /// Allocation JSON file.
        allocation: PathBuf,
        /// Value order to check under: true values or the symbolic
        /// tie-broken order.
        #[arg(long, value_enum, default_value_t = ModeArg::Raw)]
        mode: ModeArg,
    },
    /// Enumerate EFX allocations by brute force, one JSON object per line.
    Oracle {
        /// Instance JSON file.
        instance: PathBuf,
        /// Print every EFX allocation (the default).
        #[arg(long, conflicts_with = "first")]
        all: bool,
        /// Stop after the first EFX allocation.
        #[arg(long)]
        first: bool,
        /// Abort if the assignment count exceeds this cap
        /// (default 10^7 complete, 10^6 partial).
        #[arg(long)]
        cap: Option<u64>,
        /// Enumerate partial allocations (pool allowed) instead of
        /// complete ones.
        #[arg(long)]
        partial: bool,
    },
    /// Generate a seeded random instance and print it as JSON.
    Gen {
        /// Read a full generation spec from a JSON file instead of flags.
        #[arg(long, conflicts_with_all = ["n_alpha", "n_beta", "m", "dist", "lo", "hi", "den_max", "rho", "seed"])]
        spec: Option<PathBuf>,
        /// Number of type-α agents.
        #[arg(long, default_value_t = 2)]
        n_alpha: usize,
        /// Number of type-β agents.
        #[arg(long, default_value_t = 2)]
        n_beta: usize,
        /// Number of items.
        #[arg(long, default_value_t = 6)]
        m: usize,
        /// Value distribution.
        #[arg(long, value_enum, default_value_t = DistArg::UniformInt)]
        dist: DistArg,
        /// Lower bound for uniform-int values.
        #[arg(long, default_value_t = 0)]
        lo: i64,
        /// Upper bound for uniform-int values.
        #[arg(long, default_value_t = 10)]
        hi: i64,
        /// Denominator bound for uniform-rational values.
        #[arg(long, default_value_t = 6)]
        den_max: u32,
        /// Correlation weight for the correlated distribution
        /// (integer or "p/q", in [0, 1]).
        #[arg(long, default_value = "1/2")]
        rho: String,
        /// RNG seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the instance here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Raw,
    Symbolic,
}

impl ModeArg {
    fn to_mode(self) -> ValueMode {
        match self {
            ModeArg::Raw => ValueMode::Raw,
            ModeArg::Symbolic => ValueMode::Symbolic,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            ModeArg::Raw => "raw",
            ModeArg::Symbolic => "symbolic",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DistArg {
    UniformInt,
    UniformRational,
    Correlated,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Solve {
            instance,
            trace,
            assert_lemmas,
            max_steps,
        } => cmd_solve(&instance, trace.as_deref(), assert_lemmas, max_steps),
        Command::Verify {
            instance,
            allocation,
            mode,
        } => cmd_verify(&instance, &allocation, mode),
        Command::Oracle {
            instance,
            all: _,
            first,
            cap,
            partial,
        } => cmd_oracle(&instance, first, cap, partial),
        Command::Gen {
            spec,
            n_alpha,
            n_beta,
            m,
            dist,
            lo,
            hi,
            den_max,
            rho,
            seed,
            out,
        } => cmd_gen(
            spec.as_deref(),
            GenFlags {
                n_alpha,
                n_beta,
                m,
                dist,
                lo,
                hi,
                den_max,
                rho,
                seed,
            },
            out.as_deref(),
        ),
    };
    ExitCode::from(code)
}

fn fail(code: u8, message: impl std::fmt::Display) -> u8 {
    eprintln!("error: {message}");
    code
}

fn read_instance(path: &Path) -> Result<Instance, u8> {
    let text = fs::read_to_string(path)
        .map_err(|e| fail(EXIT_PARSE, format_args!("cannot read {}: {e}", path.display())))?;
    Instance::from_json(&text)
        .map_err(|e| fail(EXIT_PARSE, format_args!("{}: {e}", path.display())))
}

fn validated_instance(path: &Path) -> Result<Instance, u8> {
    let instance = read_instance(path)?;
    let violations = instance.validate();
    if violations.is_empty() {
        Ok(instance)
    } else {
        for violation in &violations {
            eprintln!("error: {violation}");
        }
        Err(EXIT_VALIDATION)
    }
}

fn write_trace(path: &Path, steps: &[StepRecord]) -> io::Result<()> {
    let mut file = BufWriter::new(fs::File::create(path)?);
    for step in steps {
        for line in step.to_trace_lines() {
            writeln!(file, "{line}")?;
        }
    }
    file.flush()
}

fn emit_trace(path: Option<&Path>, steps: &[StepRecord]) -> Result<(), u8> {
    if let Some(path) = path {
        write_trace(path, steps).map_err(|e| {
            fail(
                EXIT_WRITE_FAILED,
                format_args!("cannot write trace {}: {e}", path.display()),
            )
        })?;
    }
    Ok(())
}

fn cmd_solve(instance_path: &Path, trace: Option<&Path>, assert_lemmas: bool, max_steps: u64) -> u8 {
    let instance = match read_instance(instance_path) {
        Ok(instance) => instance,
        Err(code) => return code,
    };
    let options = SolveOptions {
        max_steps,
        assert_lemmas: assert_lemmas || SolveOptions::default().assert_lemmas,
    };
    match engine::solve(&instance, &options) {
        Ok(result) => {
            if let Err(code) = emit_trace(trace, &result.steps) {
                return code;
            }
            println!("{}", result.allocation.to_json());
            EXIT_OK
        }
        Err(EngineError::InvalidInstance { violations }) => {
            for violation in violations {
                eprintln!("error: {violation}");
            }
            EXIT_VALIDATION
        }
        Err(EngineError::IterationCap { cap, steps }) => {
            if let Err(code) = emit_trace(trace, &steps) {
                return code;
            }
            fail(
                EXIT_ITERATION_CAP,
                format_args!(
                    "iteration cap of {cap} steps exceeded before the allocation completed"
                ),
            )
        }
        Err(EngineError::Assertion {
            step,
            failure,
            steps,
        }) => {
            if let Err(code) = emit_trace(trace, &steps) {
                return code;
            }
            fail(
                EXIT_INTERNAL,
                format_args!("assertion failed at step {step}: {failure}"),
            )
        }
        Err(error @ EngineError::Certification { .. }) => fail(EXIT_INTERNAL, error),
    }
}

fn cmd_verify(instance_path: &Path, allocation_path: &Path, mode: ModeArg) -> u8 {
    let instance = match validated_instance(instance_path) {
        Ok(instance) => instance,
        Err(code) => return code,
    };
    let text = match fs::read_to_string(allocation_path) {
        Ok(text) => text,
        Err(e) => {
            return fail(
                EXIT_PARSE,
                format_args!("cannot read {}: {e}", allocation_path.display()),
            )
        }
    };
    let allocation = match Allocation::from_json(&text) {
        Ok(allocation) => allocation,
        Err(e) => return fail(EXIT_PARSE, format_args!("{}: {e}", allocation_path.display())),
    };
    let violations = allocation_valid(&instance, &allocation);
    if !violations.is_empty() {
        for violation in &violations {
            eprintln!("error: {violation}");
        }
        return EXIT_VALIDATION;
    }
    match checker::check_efx(&instance, &allocation, mode.to_mode()) {
        Ok(()) => {
            println!(
                "{}",
                serde_json::json!({ "status": "efx", "mode": mode.as_str() })
            );
            EXIT_OK
        }
        Err(witness) => {
            println!(
                "{}",
                serde_json::json!({
                    "status": "not_efx",
                    "mode": mode.as_str(),
                    "witness": {
                        "envious": witness.envious,
                        "envied": witness.envied,
                        "removed": witness.removed,
                    },
                })
            );
            eprintln!(
                "error: agent {} EFX-envies agent {} even after removing item {}",
                witness.envious, witness.envied, witness.removed
            );
            EXIT_NOT_EFX
        }
    }
}

fn cmd_oracle(instance_path: &Path, first: bool, cap: Option<u64>, partial: bool) -> u8 {
    let instance = match validated_instance(instance_path) {
        Ok(instance) => instance,
        Err(code) => return code,
    };
    let result = if partial {
        let cap = cap.unwrap_or(checker::PARTIAL_ORACLE_CAP);
        checker::brute_force_partial_efx(&instance, ValueMode::Raw, cap).map(|mut found| {
            if first {
                found.truncate(1);
            }
            found
        })
    } else {
        let cap = cap.unwrap_or(checker::ORACLE_CAP);
        checker::brute_force_complete_efx(&instance, ValueMode::Raw, first, cap)
    };
    match result {
        Ok(allocations) => {
            let stdout = io::stdout();
            let mut out = BufWriter::new(stdout.lock());
            for allocation in &allocations {
                writeln!(out, "{}", allocation.to_json()).expect("stdout write cannot fail");
            }
            out.flush().expect("stdout flush cannot fail");
            EXIT_OK
        }
        Err(too_large) => fail(EXIT_ORACLE_TOO_LARGE, too_large),
    }
}

struct GenFlags {
    n_alpha: usize,
    n_beta: usize,
    m: usize,
    dist: DistArg,
    lo: i64,
    hi: i64,
    den_max: u32,
    rho: String,
    seed: u64,
}

fn parse_rho(text: &str) -> Result<Rational, ParseError> {
    if let Ok(i) = text.trim().parse::<i64>() {
        return Ok(Rational::from_integer(i.into()));
    }
    rational_from_json(&serde_json::Value::String(text.to_string()))
}

fn cmd_gen(spec_path: Option<&Path>, flags: GenFlags, out: Option<&Path>) -> u8 {
    let spec = if let Some(path) = spec_path {
        let text = match fs::read_to_string(path) {
            Ok(text) => text,
            Err(e) => {
                return fail(EXIT_PARSE, format_args!("cannot read {}: {e}", path.display()))
            }
        };
        match GenSpec::from_json(&text) {
            Ok(spec) => spec,
            Err(e) => return fail(EXIT_PARSE, format_args!("{}: {e}", path.display())),
        }
    } else {
        let value_dist = match flags.dist {
            DistArg::UniformInt => ValueDist::UniformInt {
                lo: flags.lo,
                hi: flags.hi,
            },
            DistArg::UniformRational => ValueDist::UniformRational {
                den_max: flags.den_max,
            },
            DistArg::Correlated => match parse_rho(&flags.rho) {
                Ok(rho) => ValueDist::Correlated { rho },
                Err(e) => return fail(EXIT_PARSE, e),
            },
        };
        GenSpec {
            n_alpha: flags.n_alpha,
            n_beta: flags.n_beta,
            m: flags.m,
            value_dist,
            seed: flags.seed,
        }
    };
    match generator::generate(&spec) {
        Ok(instance) => {
            let json = instance.to_json();
            match out {
                Some(path) => {
                    if let Err(e) = fs::write(path, format!("{json}\n")) {
                        return fail(
                            EXIT_WRITE_FAILED,
                            format_args!("cannot write {}: {e}", path.display()),
                        );
                    }
                }
                None => println!("{json}"),
            }
            EXIT_OK
        }
        Err(e) => fail(EXIT_VALIDATION, e),
    }
}
