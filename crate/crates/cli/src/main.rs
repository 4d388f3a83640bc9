//! `mteq`: multitape automaton equivalence from the command line.
//!
//! Exit codes: 0 equivalent (or plain success), 1 inequivalent, 2 for
//! usage or input errors. Randomized commands are reproducible from
//! `--seed` (default from `MTEQ_SEED`, then 0); report output is byte
//! identical across reruns except for the timing field.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use multitape::document::{
    display_tuple, parse_automaton, parse_tuple, serialize_automaton, Report,
};
use multitape::{
    brute_force_equivalence, check_equivalence, encode_sharp_sat, extract_counterexample,
    planned_primes, random_automaton, BruteForceVerdict, CheckConfig, CnfFormula,
    MultitapeAutomaton, Mode, PrimePolicy, Verdict, WitnessResult,
    DEFAULT_ENUMERATION_BUDGET,
};

const SEED_ENV: &str = "MTEQ_SEED";

#[derive(Parser)]
#[command(
    name = "mteq",
    version,
    about = "Multiplicity equivalence of multitape automata",
    long_about = "Decides multiplicity equivalence of nondeterministic k-tape automata \
                  (language equivalence for deterministic ones) with a randomized check, \
                  extracts verified distinguishing tuples, and ships an exact brute-force \
                  oracle for small instances."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Randomized equivalence check; prints a JSON report.
    Check {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        opts: CheckOpts,
    },
    /// Equivalence check plus verified witness extraction.
    Witness {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        opts: CheckOpts,
        /// Cap on weight-sampling attempts.
        #[arg(long, default_value_t = 20)]
        attempts: usize,
    },
    /// Exact multiplicity of one tuple, e.g. mteq eval loop.json '("aaa")'.
    Eval { automaton: PathBuf, tuple: String },
    /// Exact equivalence by exhaustive short-witness search.
    Brute {
        a: PathBuf,
        b: PathBuf,
        /// Max tuples to enumerate before refusing.
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
        budget: u64,
    },
    /// Write a random automaton document.
    Gen {
        #[arg(long)]
        tapes: usize,
        #[arg(long)]
        states: usize,
        /// Per-tape alphabet sizes, comma separated; a single value applies
        /// to every tape.
        #[arg(long, default_value = "2")]
        sizes: String,
        /// Probability of each possible edge.
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        #[arg(long)]
        seed: Option<u64>,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Encode a DIMACS CNF as a run-counting instance and cross-check the
    /// multiplicity against direct #SAT enumeration.
    SatDemo { cnf: PathBuf },
}

#[derive(Args)]
struct CheckOpts {
    /// Valuation rounds with the base prime.
    #[arg(long, default_value_t = 2)]
    rounds: usize,
    /// "fixed" (the 61-bit Mersenne prime) or "random:BITS".
    #[arg(long, default_value = "fixed", value_parser = parse_prime_policy)]
    prime: PrimePolicy,
    /// RNG seed; falls back to $MTEQ_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Fast)]
    mode: ModeArg,
}

#[derive(ValueEnum, Clone, Copy)]
enum ModeArg {
    /// Track only the first grid row (complete, and n^k times cheaper).
    Fast,
    /// Track the full matrix; cross-validation on small inputs.
    Full,
}

impl ModeArg {
    fn to_mode(self) -> Mode {
        match self {
            ModeArg::Fast => Mode::FirstRow,
            ModeArg::Full => Mode::FullMatrix,
        }
    }

    fn label(self) -> &'static str {
        match self {
            ModeArg::Fast => "fast",
            ModeArg::Full => "full",
        }
    }
}

fn parse_prime_policy(s: &str) -> Result<PrimePolicy, String> {
    if s == "fixed" {
        return Ok(PrimePolicy::Fixed);
    }
    if let Some(bits) = s.strip_prefix("random:") {
        let bits: u32 = bits
            .parse()
            .map_err(|_| format!("bad bit count {bits:?}"))?;
        if !(16..=62).contains(&bits) {
            return Err(format!("bit count must be in 16..=62, got {bits}"));
        }
        return Ok(PrimePolicy::Random { bits });
    }
    Err("expected \"fixed\" or \"random:BITS\"".to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, String> {
    match command {
        Command::Check { a, b, opts } => cmd_check(&a, &b, &opts),
        Command::Witness {
            a,
            b,
            opts,
            attempts,
        } => cmd_witness(&a, &b, &opts, attempts),
        Command::Eval { automaton, tuple } => cmd_eval(&automaton, &tuple),
        Command::Brute { a, b, budget } => cmd_brute(&a, &b, budget),
        Command::Gen {
            tapes,
            states,
            sizes,
            density,
            seed,
            out,
        } => cmd_gen(tapes, states, &sizes, density, seed, out.as_deref()),
        Command::SatDemo { cnf } => cmd_sat_demo(&cnf),
    }
}

fn load_automaton(path: &Path) -> Result<MultitapeAutomaton, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_automaton(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, String> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(text) => text
            .parse()
            .map_err(|_| format!("{SEED_ENV} must be an unsigned integer, got {text:?}")),
        Err(_) => Ok(0),
    }
}

fn config_from(opts: &CheckOpts, attempts: usize) -> Result<CheckConfig, String> {
    if opts.rounds == 0 {
        return Err("--rounds must be at least 1".to_string());
    }
    Ok(CheckConfig {
        rounds: opts.rounds,
        prime: opts.prime,
        seed: resolve_seed(opts.seed)?,
        mode: opts.mode.to_mode(),
        witness_attempts: attempts,
    })
}

fn distinct_primes(primes: &[u64]) -> Vec<String> {
    let mut seen = BTreeSet::new();
    primes
        .iter()
        .filter(|&&p| seen.insert(p))
        .map(|p| p.to_string())
        .collect()
}

fn base_report(
    command: &str,
    verdict_label: &str,
    cfg: &CheckConfig,
    opts: &CheckOpts,
    primes: &[u64],
) -> Report {
    let mut report = Report::new(command, verdict_label);
    report.seed = Some(cfg.seed);
    report.mode = Some(opts.mode.label().to_string());
    report.primes = Some(distinct_primes(primes));
    report
}

fn fill_witness_fields(report: &mut Report, w: &WitnessResult, a: &MultitapeAutomaton) {
    report.level = Some(w.tuple.total_len());
    report.witness = Some(w.tuple.words().to_vec());
    report.witness_display = Some(display_tuple(&w.tuple, &a.alphabets));
    report.multiplicity_a = Some(w.a_count.to_string());
    report.multiplicity_b = Some(w.b_count.to_string());
    report.attempts = Some(w.attempts);
}

fn emit(mut report: Report, started: Instant, code: u8) -> Result<ExitCode, String> {
    report.timing_ms = Some(started.elapsed().as_millis());
    print!("{}", report.to_json());
    Ok(ExitCode::from(code))
}

fn cmd_check(a_path: &Path, b_path: &Path, opts: &CheckOpts) -> Result<ExitCode, String> {
    let started = Instant::now();
    let a = load_automaton(a_path)?;
    let b = load_automaton(b_path)?;
    let cfg = config_from(opts, 20)?;
    let primes = planned_primes(&a, &b, &cfg).map_err(|e| e.to_string())?;
    let verdict = check_equivalence(&a, &b, &cfg).map_err(|e| e.to_string())?;
    match verdict {
        Verdict::Equivalent {
            rounds,
            per_round_bound,
        } => {
            let mut report = base_report("check", "equivalent", &cfg, opts, &primes);
            report.rounds = Some(rounds);
            report.per_round_false_equivalence_bound = Some(per_round_bound);
            emit(report, started, 0)
        }
        Verdict::Inequivalent { level, .. } => {
            let mut report = base_report("check", "inequivalent", &cfg, opts, &primes);
            report.rounds = Some(primes.len());
            report.level = Some(level);
            emit(report, started, 1)
        }
    }
}

fn cmd_witness(
    a_path: &Path,
    b_path: &Path,
    opts: &CheckOpts,
    attempts: usize,
) -> Result<ExitCode, String> {
    let started = Instant::now();
    let a = load_automaton(a_path)?;
    let b = load_automaton(b_path)?;
    let cfg = config_from(opts, attempts)?;
    let primes = planned_primes(&a, &b, &cfg).map_err(|e| e.to_string())?;
    let verdict = check_equivalence(&a, &b, &cfg).map_err(|e| e.to_string())?;
    match verdict {
        Verdict::Equivalent {
            rounds,
            per_round_bound,
        } => {
            let mut report = base_report("witness", "equivalent", &cfg, opts, &primes);
            report.rounds = Some(rounds);
            report.per_round_false_equivalence_bound = Some(per_round_bound);
            emit(report, started, 0)
        }
        Verdict::Inequivalent { level, .. } => {
            let mut report = base_report("witness", "inequivalent", &cfg, opts, &primes);
            report.rounds = Some(primes.len());
            report.level = Some(level);
            match extract_counterexample(&a, &b, &cfg) {
                Ok(w) => {
                    fill_witness_fields(&mut report, &w, &a);
                    emit(report, started, 1)
                }
                Err(
                    err @ (multitape::Error::WitnessAttemptsExhausted { .. }
                    | multitape::Error::NoDistinguishingLevel),
                ) => {
                    // inequivalence stands; only the witness is missing
                    report.witness_error = Some(err.to_string());
                    emit(report, started, 1)
                }
                Err(err) => Err(err.to_string()),
            }
        }
    }
}

fn cmd_eval(automaton_path: &Path, tuple_text: &str) -> Result<ExitCode, String> {
    let a = load_automaton(automaton_path)?;
    let tuple = parse_tuple(tuple_text, &a.alphabets).map_err(|e| e.to_string())?;
    let count = a.count_runs(&tuple).map_err(|e| e.to_string())?;
    println!("{count}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_brute(a_path: &Path, b_path: &Path, budget: u64) -> Result<ExitCode, String> {
    let started = Instant::now();
    let a = load_automaton(a_path)?;
    let b = load_automaton(b_path)?;
    match brute_force_equivalence(&a, &b, budget).map_err(|e| e.to_string())? {
        BruteForceVerdict::Equivalent => {
            emit(Report::new("brute", "equivalent"), started, 0)
        }
        BruteForceVerdict::Inequivalent {
            witness,
            a_count,
            b_count,
        } => {
            let mut report = Report::new("brute", "inequivalent");
            report.level = Some(witness.total_len());
            report.witness = Some(witness.words().to_vec());
            report.witness_display = Some(display_tuple(&witness, &a.alphabets));
            report.multiplicity_a = Some(a_count.to_string());
            report.multiplicity_b = Some(b_count.to_string());
            emit(report, started, 1)
        }
    }
}

fn cmd_gen(
    tapes: usize,
    states: usize,
    sizes_text: &str,
    density: f64,
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<ExitCode, String> {
    if tapes == 0 {
        return Err("--tapes must be at least 1".to_string());
    }
    if !(0.0..=1.0).contains(&density) {
        return Err("--density must be in [0, 1]".to_string());
    }
    let parsed: Result<Vec<usize>, _> = sizes_text.split(',').map(str::parse).collect();
    let mut sizes = parsed.map_err(|_| format!("bad --sizes {sizes_text:?}"))?;
    if sizes.len() == 1 {
        sizes = vec![sizes[0]; tapes];
    }
    if sizes.len() != tapes {
        return Err(format!(
            "--sizes needs 1 or {tapes} entries, got {}",
            sizes.len()
        ));
    }
    let seed = resolve_seed(seed)?;
    let automaton = random_automaton(tapes, states, &sizes, density, seed);
    let text = serialize_automaton(&automaton);
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sat_demo(cnf_path: &Path) -> Result<ExitCode, String> {
    let text = std::fs::read_to_string(cnf_path)
        .map_err(|e| format!("cannot read {}: {e}", cnf_path.display()))?;
    let formula = CnfFormula::parse_dimacs(&text).map_err(|e| e.to_string())?;
    let (automaton, tuple) = encode_sharp_sat(&formula, None).map_err(|e| e.to_string())?;
    let runs = automaton.count_runs(&tuple).map_err(|e| e.to_string())?;
    let enumerated = formula.count_satisfying().map_err(|e| e.to_string())?;
    let agree = runs == enumerated;
    let summary = serde_json::json!({
        "variables": formula.variables,
        "clauses": formula.clauses.len(),
        "automaton_states": automaton.state_count,
        "automaton_edges": automaton.edges.len(),
        "input_word_length": tuple.words()[0].len(),
        "runs": runs.to_string(),
        "satisfying_assignments": enumerated.to_string(),
        "agree": agree,
    });
    println!("{}", serde_json::to_string_pretty(&summary).expect("serializes"));
    Ok(ExitCode::from(if agree { 0 } else { 1 }))
}
