//! On-disk automaton documents, tuple text syntax, and machine-readable
//! reports.
//!
//! An automaton document is a JSON object with a fixed field set:
//!
//! ```json
//! {
//!   "version": 1,
//!   "tapes": 2,
//!   "alphabets": [["a", "b"], ["x"]],
//!   "states": 4,
//!   "initial": [0],
//!   "final": [3],
//!   "edges": [[0, 0, "a", 1], [1, 1, "x", 3]]
//! }
//! ```
//!
//! Unknown fields, duplicate edges, and anything failing structural
//! validation are rejected with a located error. Serialization preserves
//! edge order, so parse and serialize invert each other on the model.
//!
//! Tuple text is a parenthesized list with one word per tape, words
//! separated by commas and optionally double-quoted: letters are written
//! back to back when the tape alphabet is all single characters, and
//! whitespace-separated otherwise. `("ab", "x")` and `(ab, x)` both denote
//! the pair (ab, x); `()` components are empty words.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

use crate::automaton::{Alphabets, Edge, MultitapeAutomaton, TapeTuple};

pub const DOCUMENT_VERSION: u32 = 1;
pub const REPORT_VERSION: u32 = 1;

/// Parse or validation failure with a location.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DocumentError {
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    Semantic {
        path: String,
        message: String,
    },
}

impl fmt::Display for DocumentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DocumentError::Syntax {
                line,
                column,
                message,
            } => write!(f, "syntax error at line {line}, column {column}: {message}"),
            DocumentError::Semantic { path, message } => write!(f, "{path}: {message}"),
        }
    }
}

impl std::error::Error for DocumentError {}

fn semantic(path: impl Into<String>, message: impl Into<String>) -> DocumentError {
    DocumentError::Semantic {
        path: path.into(),
        message: message.into(),
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AutomatonDocument {
    version: u32,
    tapes: usize,
    alphabets: Vec<Vec<String>>,
    states: usize,
    initial: Vec<usize>,
    #[serde(rename = "final")]
    final_states: Vec<usize>,
    edges: Vec<(usize, usize, String, usize)>,
}

/// Parses a document into a validated automaton.
pub fn parse_automaton(text: &str) -> Result<MultitapeAutomaton, DocumentError> {
    let doc: AutomatonDocument =
        serde_json::from_str(text).map_err(|e| DocumentError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
    if doc.version != DOCUMENT_VERSION {
        return Err(semantic(
            "version",
            format!("unsupported version {} (expected {DOCUMENT_VERSION})", doc.version),
        ));
    }
    if doc.tapes != doc.alphabets.len() {
        return Err(semantic(
            "tapes",
            format!("{} tapes declared but {} alphabets given", doc.tapes, doc.alphabets.len()),
        ));
    }
    let alphabets = Alphabets::new(doc.alphabets)
        .map_err(|e| semantic("alphabets", e.to_string()))?;
    for (name, list) in [("initial", &doc.initial), ("final", &doc.final_states)] {
        let unique: BTreeSet<usize> = list.iter().copied().collect();
        if unique.len() != list.len() {
            return Err(semantic(name, "duplicate state index"));
        }
    }
    let automaton = MultitapeAutomaton::new(
        alphabets,
        doc.states,
        doc.edges
            .into_iter()
            .map(|(src, tape, letter, dst)| Edge::new(src, tape, letter, dst))
            .collect(),
        doc.initial.into_iter().collect(),
        doc.final_states.into_iter().collect(),
    );
    let violations = automaton.validate();
    if let Some(v) = violations.first() {
        return Err(semantic(v.location.clone(), v.message.clone()));
    }
    Ok(automaton)
}

/// Canonical pretty-printed document for an automaton. Edge order is the
/// model's; initial and final sets serialize sorted.
pub fn serialize_automaton(a: &MultitapeAutomaton) -> String {
    let doc = AutomatonDocument {
        version: DOCUMENT_VERSION,
        tapes: a.alphabets.tapes(),
        alphabets: (0..a.alphabets.tapes())
            .map(|t| a.alphabets.letters(t).to_vec())
            .collect(),
        states: a.state_count,
        initial: a.initial.iter().copied().collect(),
        final_states: a.final_states.iter().copied().collect(),
        edges: a
            .edges
            .iter()
            .map(|e| (e.src, e.tape, e.letter.clone(), e.dst))
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("document serializes");
    text.push('\n');
    text
}

/// Parses tuple text against an alphabet family.
pub fn parse_tuple(text: &str, alphabets: &Alphabets) -> Result<TapeTuple, DocumentError> {
    let trimmed = text.trim();
    let inner = trimmed
        .strip_prefix('(')
        .and_then(|rest| rest.strip_suffix(')'))
        .ok_or_else(|| semantic("tuple", "expected a parenthesized tuple like (\"ab\", \"x\")"))?;
    let components: Vec<&str> = if inner.trim().is_empty() {
        Vec::new()
    } else {
        inner.split(',').collect()
    };
    if components.len() != alphabets.tapes() {
        return Err(semantic(
            "tuple",
            format!(
                "expected {} comma-separated components, got {}",
                alphabets.tapes(),
                components.len()
            ),
        ));
    }
    let mut words = Vec::with_capacity(components.len());
    for (tape, raw) in components.iter().enumerate() {
        let path = format!("tuple[{tape}]");
        let mut body = raw.trim();
        if body.len() >= 2 && body.starts_with('"') && body.ends_with('"') {
            body = &body[1..body.len() - 1];
        }
        let tokens: Vec<&str> = body.split_whitespace().collect();
        let mut word = Vec::new();
        match tokens.as_slice() {
            [] => {}
            [single] => {
                if alphabets.letter_index(tape, single).is_some() {
                    word.push(single.to_string());
                } else if alphabets
                    .letters(tape)
                    .iter()
                    .all(|l| l.chars().count() == 1)
                {
                    for ch in single.chars() {
                        let letter = ch.to_string();
                        if alphabets.letter_index(tape, &letter).is_none() {
                            return Err(semantic(
                                path,
                                format!("unknown letter {letter:?} on tape {tape}"),
                            ));
                        }
                        word.push(letter);
                    }
                } else {
                    return Err(semantic(
                        path,
                        format!(
                            "{single:?} is not a letter of tape {tape}; separate multi-character \
                             letters with spaces"
                        ),
                    ));
                }
            }
            many => {
                for token in many {
                    if alphabets.letter_index(tape, token).is_none() {
                        return Err(semantic(
                            path,
                            format!("unknown letter {token:?} on tape {tape}"),
                        ));
                    }
                    word.push(token.to_string());
                }
            }
        }
        words.push(word);
    }
    Ok(TapeTuple::new(words))
}

/// Renders a tuple in the text syntax accepted by [`parse_tuple`].
pub fn display_tuple(tuple: &TapeTuple, alphabets: &Alphabets) -> String {
    let words: Vec<String> = tuple
        .words()
        .iter()
        .map(|word| {
            let joined = if alphabets.single_char_only() {
                word.concat()
            } else {
                word.join(" ")
            };
            format!("\"{joined}\"")
        })
        .collect();
    format!("({})", words.join(", "))
}

/// Machine-readable outcome of a CLI command. Optional fields appear only
/// when they apply; in particular the witness fields are present exactly
/// when a verified witness was extracted.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct Report {
    pub report_version: u32,
    pub command: String,
    /// "equivalent" or "inequivalent"
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounds: Option<usize>,
    /// Decimal strings; one entry per distinct modulus used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub primes: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_round_false_equivalence_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_display: Option<String>,
    /// Exact multiplicities as decimal strings.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multiplicity_a: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multiplicity_b: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attempts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u128>,
}

impl Report {
    pub fn new(command: &str, verdict: &str) -> Report {
        Report {
            report_version: REPORT_VERSION,
            command: command.to_string(),
            verdict: verdict.to_string(),
            rounds: None,
            primes: None,
            seed: None,
            mode: None,
            per_round_false_equivalence_bound: None,
            level: None,
            witness: None,
            witness_display: None,
            multiplicity_a: None,
            multiplicity_b: None,
            attempts: None,
            witness_error: None,
            timing_ms: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Report, DocumentError> {
        serde_json::from_str(text).map_err(|e| DocumentError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }
}
