//! Acceptance suite: one test per shipping criterion, each printing a
//! PASS/FAIL line (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! The criteria pin the library's advertised guarantees at desk scale:
//! agreement with the exact oracle, the n-1 witness length bound, verified
//! witness extraction with bounded attempts, exactness of the grid
//! iteration on single-run instances, first-row/full-matrix agreement, the
//! #SAT encoding fixture, the superdiagonal algebra laws, byte-level report
//! reproducibility, and a wall-clock smoke test.

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use multitape::document::Report;
use multitape::{
    brute_force_equivalence, build_difference_system, check_equivalence, encode_sharp_sat,
    extract_counterexample, random_automaton, sample_valuation, Alphabets, BruteForceVerdict,
    CheckConfig, CnfFormula, Edge, GridDims, GridVector, Mode, MultitapeAutomaton, PrimeField,
    Valuation, Verdict, DEFAULT_ENUMERATION_BUDGET,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn conclude(number: u32, name: &str, failures: Vec<String>, detail: String) {
    if failures.is_empty() {
        println!("acceptance criterion {number} ({name}): PASS {detail}");
    } else {
        println!(
            "acceptance criterion {number} ({name}): FAIL ({} problems)",
            failures.len()
        );
        for f in failures.iter().take(10) {
            println!("  - {f}");
        }
        panic!("criterion {number} failed");
    }
}

fn permuted_copy(a: &MultitapeAutomaton, seed: u64) -> MultitapeAutomaton {
    use rand::seq::SliceRandom;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..a.state_count).collect();
    perm.shuffle(&mut rng);
    MultitapeAutomaton::new(
        a.alphabets.clone(),
        a.state_count,
        a.edges
            .iter()
            .map(|e| Edge::new(perm[e.src], e.tape, e.letter.clone(), perm[e.dst]))
            .collect(),
        a.initial.iter().map(|&q| perm[q]).collect(),
        a.final_states.iter().map(|&q| perm[q]).collect(),
    )
}

/// Fixed schedule of desk-scale pairs: sides up to 4 states, 1 to 3 tapes,
/// alphabets up to 2 letters, mixed densities; every fifth pair is an
/// equivalent permuted copy so both verdicts occur.
fn schedule_pair(i: u64) -> (MultitapeAutomaton, MultitapeAutomaton) {
    const DENSITIES: [f64; 5] = [0.2, 0.35, 0.5, 0.65, 0.8];
    let tapes = 1 + (i % 3) as usize;
    let sizes: Vec<usize> = (0..tapes as u64)
        .map(|t| 1 + ((i / 3 + t) % 2) as usize)
        .collect();
    let states_a = 1 + (i % 4) as usize;
    let states_b = 1 + ((i / 4) % 4) as usize;
    let a = random_automaton(
        tapes,
        states_a,
        &sizes,
        DENSITIES[(i % 5) as usize],
        100_000 + i,
    );
    let b = if i % 5 == 4 {
        permuted_copy(&a, 300_000 + i)
    } else {
        random_automaton(
            tapes,
            states_b,
            &sizes,
            DENSITIES[((i / 7) % 5) as usize],
            200_000 + i,
        )
    };
    (a, b)
}

/// Criterion 1: over 300 scheduled pairs the randomized check (2 rounds,
/// default prime) agrees with exhaustive enumeration on every pair, with
/// one-sided soundness on the equivalent ones, in under 60 seconds.
#[test]
fn acceptance_1_oracle_agreement() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let mut equivalent = 0u32;
    let mut inequivalent = 0u32;
    for i in 0..300u64 {
        let (a, b) = schedule_pair(i);
        let brute = brute_force_equivalence(&a, &b, DEFAULT_ENUMERATION_BUDGET).unwrap();
        let verdict = check_equivalence(&a, &b, &CheckConfig::with_seed(i)).unwrap();
        match (&brute, &verdict) {
            (BruteForceVerdict::Equivalent, v) if v.is_equivalent() => equivalent += 1,
            (BruteForceVerdict::Inequivalent { .. }, Verdict::Inequivalent { .. }) => {
                inequivalent += 1
            }
            (BruteForceVerdict::Equivalent, _) => {
                failures.push(format!("pair {i}: false inequivalent (soundness broken)"))
            }
            (BruteForceVerdict::Inequivalent { .. }, _) => {
                failures.push(format!("pair {i}: inequivalence missed"))
            }
        }
    }
    let elapsed = started.elapsed();
    if elapsed >= Duration::from_secs(60) {
        failures.push(format!("runtime {elapsed:.2?} over the 60 s target"));
    }
    conclude(
        1,
        "oracle agreement",
        failures,
        format!("({equivalent} equivalent, {inequivalent} inequivalent, {elapsed:.2?})"),
    );
}

/// Criterion 2: for every inequivalent pair of the schedule, the minimal
/// brute-force witness and the extracted witness both have total length at
/// most n_A + n_B - 1. Exact check.
#[test]
fn acceptance_2_witness_length_bound() {
    let mut failures = Vec::new();
    let mut covered = 0u32;
    for i in 0..300u64 {
        let (a, b) = schedule_pair(i);
        let bound = a.state_count + b.state_count - 1;
        let brute = brute_force_equivalence(&a, &b, DEFAULT_ENUMERATION_BUDGET).unwrap();
        let BruteForceVerdict::Inequivalent { witness, .. } = brute else {
            continue;
        };
        covered += 1;
        if witness.total_len() > bound {
            failures.push(format!(
                "pair {i}: brute witness length {} over bound {bound}",
                witness.total_len()
            ));
        }
        match extract_counterexample(&a, &b, &CheckConfig::with_seed(i)) {
            Ok(w) if w.tuple.total_len() > bound => failures.push(format!(
                "pair {i}: extracted witness length {} over bound {bound}",
                w.tuple.total_len()
            )),
            Ok(_) => {}
            Err(e) => failures.push(format!("pair {i}: extraction failed: {e}")),
        }
    }
    conclude(
        2,
        "witness length bound",
        failures,
        format!("({covered} inequivalent pairs checked)"),
    );
}

/// Criterion 3: on at least 100 random inequivalent pairs, extraction
/// returns a tuple whose exact multiplicities differ, with mean attempts
/// at most 3 and no unverified output.
#[test]
fn acceptance_3_witness_validity() {
    let mut failures = Vec::new();
    let mut extracted = 0u32;
    let mut total_attempts = 0u64;
    let mut i = 0u64;
    while extracted < 100 && i < 2_000 {
        let (a, b) = schedule_pair(i);
        i += 1;
        let brute = brute_force_equivalence(&a, &b, DEFAULT_ENUMERATION_BUDGET).unwrap();
        if brute.is_equivalent() {
            continue;
        }
        match extract_counterexample(&a, &b, &CheckConfig::with_seed(5_000 + i)) {
            Ok(w) => {
                let a_count = a.count_runs(&w.tuple).unwrap();
                let b_count = b.count_runs(&w.tuple).unwrap();
                if a_count == b_count || a_count != w.a_count || b_count != w.b_count {
                    failures.push(format!("pair {}: witness does not verify", i - 1));
                }
                total_attempts += w.attempts as u64;
                extracted += 1;
            }
            Err(e) => failures.push(format!("pair {}: extraction failed: {e}", i - 1)),
        }
    }
    if extracted < 100 {
        failures.push(format!("only {extracted} inequivalent pairs found"));
    }
    let mean = total_attempts as f64 / extracted.max(1) as f64;
    if mean > 3.0 {
        failures.push(format!("mean attempts {mean:.2} over 3"));
    }
    conclude(
        3,
        "witness validity",
        failures,
        format!("({extracted} witnesses, mean attempts {mean:.2})"),
    );
}

/// Criterion 4: on 100 single-run straight-line automata reading a fixed
/// tuple, the iteration places exactly the product of the valuation entries
/// at the column given by the per-tape lengths plus one. Field-exact.
#[test]
fn acceptance_4_single_run_faithfulness() {
    let mut failures = Vec::new();
    let field = PrimeField::with_default_prime();
    for case in 0..100u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(40_000 + case);
        let tapes = rng.gen_range(1..=3);
        let sizes: Vec<usize> = (0..tapes).map(|_| rng.gen_range(1..=2)).collect();
        let alphabets = Alphabets::new(
            sizes
                .iter()
                .map(|&n| (0..n).map(multitape::letter_name).collect())
                .collect(),
        )
        .unwrap();
        // random read sequence (tape, letter id) of total length <= 6
        let total = rng.gen_range(0..=6usize);
        let reads: Vec<(usize, usize)> = (0..total)
            .map(|_| {
                let tape = rng.gen_range(0..tapes);
                (tape, rng.gen_range(0..sizes[tape]))
            })
            .collect();
        let automaton = MultitapeAutomaton::new(
            alphabets.clone(),
            total + 1,
            reads
                .iter()
                .enumerate()
                .map(|(i, &(tape, letter))| {
                    Edge::new(i, tape, multitape::letter_name(letter), i + 1)
                })
                .collect(),
            BTreeSet::from([0]),
            BTreeSet::from([total]),
        );
        let empty = MultitapeAutomaton::new(
            alphabets,
            0,
            vec![],
            BTreeSet::new(),
            BTreeSet::new(),
        );
        let sys = build_difference_system(&automaton, &empty).unwrap();
        let valuation = sample_valuation(&sys, &field, &mut rng);

        // direct product over the reads, tracking per-tape positions
        let mut expected = multitape::Fp::ONE;
        let mut positions = vec![0usize; tapes];
        for &(tape, letter) in &reads {
            positions[tape] += 1;
            expected = field.mul(expected, *valuation.get(tape, letter, positions[tape]));
        }
        let column: Vec<usize> = positions.iter().map(|&l| l + 1).collect();

        let projected = sys
            .project_at_level(&field, &valuation, Mode::FirstRow, total)
            .unwrap();
        // a zero product is a legitimately pruned entry
        let got = projected
            .get_col(&column)
            .copied()
            .unwrap_or(multitape::Fp::ZERO);
        if got != expected || projected.entry_count() > 1 {
            failures.push(format!(
                "case {case}: column {column:?} holds {got:?}, expected {expected:?}"
            ));
        }
    }
    conclude(4, "single-run faithfulness", failures, "(100 cases)".into());
}

/// Criterion 5: on 50 small systems (n <= 5, k <= 2) the first-row and
/// full-matrix modes give identical verdicts and identical first non-zero
/// levels.
#[test]
fn acceptance_5_first_row_matches_full_matrix() {
    let mut failures = Vec::new();
    let mut inequivalent = 0u32;
    for case in 0..50u64 {
        let tapes = 1 + (case % 2) as usize;
        let sizes = vec![2usize; tapes];
        let a = random_automaton(tapes, 1 + (case % 3) as usize, &sizes, 0.5, 50_000 + case);
        let b = random_automaton(tapes, 1 + (case % 2) as usize, &sizes, 0.5, 60_000 + case);
        let fast = check_equivalence(&a, &b, &CheckConfig::with_seed(case)).unwrap();
        let full = check_equivalence(
            &a,
            &b,
            &CheckConfig {
                mode: Mode::FullMatrix,
                seed: case,
                ..CheckConfig::default()
            },
        )
        .unwrap();
        match (&fast, &full) {
            (
                Verdict::Inequivalent { level: l1, .. },
                Verdict::Inequivalent { level: l2, .. },
            ) => {
                inequivalent += 1;
                if l1 != l2 {
                    failures.push(format!("case {case}: levels differ, {l1} vs {l2}"));
                }
            }
            (x, y) if x.is_equivalent() == y.is_equivalent() => {}
            _ => failures.push(format!("case {case}: verdicts differ")),
        }
    }
    conclude(
        5,
        "first-row vs full-matrix",
        failures,
        format!("(50 systems, {inequivalent} inequivalent)"),
    );
}

/// Criterion 6: on 50 random CNFs over at most 4 variables, the run count
/// of the encoded automaton equals direct enumeration over all assignments.
#[test]
fn acceptance_6_sharp_sat_fixture() {
    let mut failures = Vec::new();
    let mut rng = ChaCha12Rng::seed_from_u64(60_606);
    for case in 0..50u64 {
        let variables = rng.gen_range(1..=4usize);
        let clause_count = rng.gen_range(0..=5usize);
        let clauses = (0..clause_count)
            .map(|_| {
                (0..rng.gen_range(1..=3usize))
                    .map(|_| {
                        let v = rng.gen_range(1..=variables as i32);
                        if rng.gen::<bool>() {
                            v
                        } else {
                            -v
                        }
                    })
                    .collect()
            })
            .collect();
        let formula = CnfFormula::new(variables, clauses).unwrap();
        let (automaton, tuple) = encode_sharp_sat(&formula, None).unwrap();
        let runs = automaton.count_runs(&tuple).unwrap();
        let enumerated = formula.count_satisfying().unwrap();
        if runs != enumerated {
            failures.push(format!(
                "case {case}: {formula:?} counts {runs} runs vs {enumerated} assignments"
            ));
        }
    }
    conclude(6, "#SAT fixture", failures, "(50 formulas)".into());
}

/// Criterion 7: superdiagonal algebra laws, all exact: n-fold application
/// of one letter annihilates, letters on distinct tapes commute, letters on
/// one tape do not.
#[test]
fn acceptance_7_nilpotency_and_commutation() {
    let mut failures = Vec::new();
    let field = PrimeField::with_default_prime();
    let dim = 4;
    let dims = GridDims::new(dim, 2, 2, Mode::FirstRow).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(70_707);
    let values: Vec<Vec<Vec<multitape::Fp>>> = (0..2)
        .map(|_| {
            (0..2)
                .map(|_| (1..dim).map(|_| field.random(&mut rng)).collect())
                .collect()
        })
        .collect();
    let valuation = Valuation::new(dim, values);

    // a vector spread over several states and grid points
    let mut v: GridVector<multitape::Fp> = GridVector::zero(dims);
    for (state, digits) in [(0usize, [1, 1]), (1, [2, 1]), (0, [1, 3]), (1, [3, 2])] {
        v.set(state, 0, &digits, field.random(&mut rng));
    }

    let mut walked = v.clone();
    for step in 0..dim {
        if walked.is_zero() {
            failures.push(format!("annihilated too early at step {step}"));
        }
        walked = walked.apply_letter(&field, &valuation, 0, 1).unwrap();
    }
    if !walked.is_zero() {
        failures.push("applying one letter dim times did not annihilate".into());
    }

    let ab = v
        .apply_letter(&field, &valuation, 0, 0)
        .unwrap()
        .apply_letter(&field, &valuation, 1, 1)
        .unwrap();
    let ba = v
        .apply_letter(&field, &valuation, 1, 1)
        .unwrap()
        .apply_letter(&field, &valuation, 0, 0)
        .unwrap();
    if ab.iter().collect::<Vec<_>>() != ba.iter().collect::<Vec<_>>() || ab.is_zero() {
        failures.push("letters on different tapes must commute".into());
    }

    // same-tape witness: distinct valuation entries separate the orders
    let wdims = GridDims::new(3, 1, 1, Mode::FirstRow).unwrap();
    let wvals = Valuation::new(
        3,
        vec![vec![
            vec![field.elem(2), field.elem(3)],
            vec![field.elem(5), field.elem(7)],
        ]],
    );
    let mut unit: GridVector<multitape::Fp> = GridVector::zero(wdims);
    unit.set(0, 0, &[1], multitape::Fp::ONE);
    let xy = unit
        .apply_letter(&field, &wvals, 0, 0)
        .unwrap()
        .apply_letter(&field, &wvals, 0, 1)
        .unwrap();
    let yx = unit
        .apply_letter(&field, &wvals, 0, 1)
        .unwrap()
        .apply_letter(&field, &wvals, 0, 0)
        .unwrap();
    let top = |w: &GridVector<multitape::Fp>| w.get(0, 0, &[3]).copied();
    if top(&xy) == top(&yx) {
        failures.push("letters on one tape commuted unexpectedly".into());
    }
    if top(&xy) != Some(field.elem(2 * 7)) || top(&yx) != Some(field.elem(5 * 3)) {
        failures.push("same-tape products do not match position bookkeeping".into());
    }
    conclude(7, "nilpotency and commutation", failures, String::new());
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_mteq"))
        .args(args)
        .env_remove("MTEQ_SEED")
        .output()
        .expect("run mteq");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).expect("utf8"),
    )
}

fn strip_timing(report_json: &str) -> String {
    let mut value: serde_json::Value = serde_json::from_str(report_json).expect("report json");
    value.as_object_mut().expect("object").remove("timing_ms");
    serde_json::to_string_pretty(&value).expect("serializes")
}

/// Criterion 8: rerunning any command with the same seed reproduces the
/// report byte for byte once the timing field is removed.
#[test]
fn acceptance_8_reproducible_reports() {
    let mut failures = Vec::new();
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, a: &MultitapeAutomaton| {
        let path = dir.path().join(name);
        std::fs::write(&path, multitape::document::serialize_automaton(a)).unwrap();
        path.to_str().unwrap().to_string()
    };
    let a = write("a.json", &random_automaton(2, 4, &[2, 2], 0.5, 808));
    let b = write("b.json", &random_automaton(2, 4, &[2, 2], 0.5, 809));
    let c = write("c.json", &random_automaton(2, 3, &[2, 2], 0.4, 810));

    let commands: Vec<Vec<&str>> = vec![
        vec!["check", &a, &b, "--seed", "5"],
        vec!["check", &a, &a, "--seed", "5", "--prime", "random:40"],
        vec!["witness", &a, &b, "--seed", "5"],
        vec!["witness", &a, &c, "--seed", "6", "--mode", "full"],
        vec!["brute", &a, &b],
    ];
    for args in &commands {
        let (code1, out1) = run_cli(args);
        let (code2, out2) = run_cli(args);
        if code1 != code2 {
            failures.push(format!("{args:?}: exit codes differ ({code1} vs {code2})"));
        }
        if strip_timing(&out1) != strip_timing(&out2) {
            failures.push(format!("{args:?}: reports differ beyond timing"));
        }
        if Report::from_json(&out1).is_err() {
            failures.push(format!("{args:?}: output is not a well-formed report"));
        }
    }
    // gen output carries no timing and must be byte-identical outright
    let gen_args = vec![
        "gen", "--tapes", "2", "--states", "4", "--sizes", "2,2", "--density", "0.6", "--seed",
        "77",
    ];
    let (_, gen1) = run_cli(&gen_args);
    let (_, gen2) = run_cli(&gen_args);
    if gen1 != gen2 {
        failures.push("gen output differs across reruns".into());
    }
    conclude(
        8,
        "reproducible reports",
        failures,
        format!("({} commands)", commands.len() + 1),
    );
}

/// Criterion 9: a 16-state, 3-tape pair (8 states a side, binary alphabets)
/// completes the fast-mode check in under 10 seconds. The pair is an
/// equivalent permuted copy, so every level of every round is exercised.
#[test]
fn acceptance_9_scale_smoke_test() {
    let mut failures = Vec::new();
    let a = random_automaton(3, 8, &[2, 2, 2], 0.3, 90_001);
    let b = permuted_copy(&a, 90_002);
    let started = Instant::now();
    let verdict = check_equivalence(&a, &b, &CheckConfig::with_seed(9)).unwrap();
    let elapsed = started.elapsed();
    if !verdict.is_equivalent() {
        failures.push("permuted copy reported inequivalent".into());
    }
    if elapsed >= Duration::from_secs(10) {
        failures.push(format!("runtime {elapsed:.2?} over the 10 s target"));
    }
    conclude(9, "scale smoke test", failures, format!("({elapsed:.2?})"));
}
