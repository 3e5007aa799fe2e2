//! Signature matching with a DFA-with-counters construction.
//!
//! Rules of the form `.*R.*w1.*w2 ... .*` (optionally with a bounded gap
//! `[^c]{k,m}` before `w1`) are compiled into three parts: a detector DFA
//! whose states carry output bits, a bank of counters and triggers, and a
//! layer of latched conjunctions. The detector automaton stays linear in the
//! rule sizes, where a classical DFA for the same union of rules grows
//! exponentially with the number of rules.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod analyzer;
pub mod annotated;
pub mod ast;
pub mod blowup;
pub mod bytes;
pub mod decompose;
pub mod dfa;
pub mod machine;
pub mod nfa;
pub mod oracle;
pub mod parse;
pub mod ruleset;

pub use analyzer::{
    blowup_curve, ceil_log2, classical_dfa, export_dot, pair_family, size_report, BlowupCurve,
    CurveRow, DotSource, SizeReport,
};
pub use annotated::{aho_corasick, build_block1, AnnotatedDfa, BuildError, Channel, ChannelKind};
pub use ast::{Ast, AstKind, Span};
pub use blowup::{detect_blowup_signs, BlowupKind, BlowupSign};
pub use bytes::{BitVec, ByteSet};
pub use decompose::{decompose_rule, CountedPrefix, DecomposedRule, GapSpec, Mode, ShapeError};
pub use dfa::{minimize, subset_construct, Dfa, DfaError, DEFAULT_STATE_CAP};
pub use machine::{
    CompileConfig, CounterMachine, CounterUnit, EventKind, MachineError, MatchEvent, OutputVector,
    ScanState, UnitMode, UnitState, WindowMode,
};
pub use nfa::{thompson_nfa, Nfa};
pub use oracle::{
    enumerate_words, enumerate_words_with_budget, oracle_match, oracle_match_gap, word_count,
    Oracle, OracleError, OracleVerdict, Words,
};
pub use parse::{parse_pattern, ParseError, ParseErrorKind};
pub use ruleset::{parse_ruleset, parse_ruleset_with_mode, Ruleset, RulesetError};
