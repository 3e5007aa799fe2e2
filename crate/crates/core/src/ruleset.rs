//! Line-oriented ruleset files.
//!
//! One pattern per non-empty line, `#` starts a comment line, and an
//! optional `mode=plain|double_counting` directive may precede the first
//! pattern.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::decompose::{decompose_rule, DecomposedRule, Mode, ShapeError};
use crate::parse::{parse_pattern, ParseError};

/// Alphabet size of every automaton in this crate.
pub const ALPHABET_SIZE: usize = 256;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ruleset {
    pub rules: Vec<DecomposedRule>,
    pub mode: Mode,
}

impl Ruleset {
    /// Builds a ruleset from already decomposed rules, renumbering ids.
    pub fn new(mut rules: Vec<DecomposedRule>, mode: Mode) -> Ruleset {
        for (i, rule) in rules.iter_mut().enumerate() {
            rule.rule_id = i;
        }
        Ruleset { rules, mode }
    }

    pub fn n(&self) -> usize {
        self.rules.len()
    }

    /// Largest prefix pattern length or chain word length over all rules.
    pub fn m(&self) -> usize {
        self.rules
            .iter()
            .map(|r| {
                let words = r.chain.iter().map(Vec::len).max().unwrap_or(0);
                words.max(r.prefix_len())
            })
            .max()
            .unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LineErrorKind {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error("unknown directive {0:?}")]
    Directive(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct LineError {
    /// 1-based.
    pub line: usize,
    pub kind: LineErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RulesetError {
    #[error("empty ruleset")]
    Empty,
    #[error("{}", DisplayLines(.0))]
    Lines(Vec<LineError>),
}

struct DisplayLines<'a>(&'a [LineError]);

impl fmt::Display for DisplayLines<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl RulesetError {
    pub fn lines(&self) -> &[LineError] {
        match self {
            RulesetError::Empty => &[],
            RulesetError::Lines(lines) => lines,
        }
    }
}

/// Parses a ruleset file using the mode from its directive (plain if absent).
pub fn parse_ruleset(text: &[u8]) -> Result<Ruleset, RulesetError> {
    parse_ruleset_with_mode(text, None)
}

/// Like [`parse_ruleset`], with `mode_override` taking precedence over the directive.
pub fn parse_ruleset_with_mode(
    text: &[u8],
    mode_override: Option<Mode>,
) -> Result<Ruleset, RulesetError> {
    let mut mode = Mode::Plain;
    let mut rules = Vec::new();
    let mut errors = Vec::new();
    let mut seen_pattern = false;
    for (idx, raw) in text.split(|b| *b == b'\n').enumerate() {
        let line = idx + 1;
        let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
        let trimmed = trim(raw);
        if trimmed.is_empty() || trimmed[0] == b'#' {
            continue;
        }
        if let Some(value) = trimmed.strip_prefix(b"mode=") {
            match core::str::from_utf8(value).ok().and_then(Mode::from_name) {
                Some(m) if !seen_pattern => mode = m,
                _ => errors.push(LineError {
                    line,
                    kind: LineErrorKind::Directive(String::from_utf8_lossy(trimmed).into_owned()),
                }),
            }
            continue;
        }
        seen_pattern = true;
        let effective = mode_override.unwrap_or(mode);
        let result = parse_pattern(trimmed)
            .map_err(LineErrorKind::from)
            .and_then(|ast| decompose_rule(&ast, effective).map_err(LineErrorKind::from));
        match result {
            Ok(rule) => rules.push(rule),
            Err(kind) => errors.push(LineError { line, kind }),
        }
    }
    if !errors.is_empty() {
        return Err(RulesetError::Lines(errors));
    }
    if rules.is_empty() {
        return Err(RulesetError::Empty);
    }
    Ok(Ruleset::new(rules, mode_override.unwrap_or(mode)))
}

fn trim(bytes: &[u8]) -> &[u8] {
    let start = bytes
        .iter()
        .position(|b| !b.is_ascii_whitespace())
        .unwrap_or(bytes.len());
    let end = bytes
        .iter()
        .rposition(|b| !b.is_ascii_whitespace())
        .map_or(start, |e| e + 1);
    &bytes[start..end]
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn two_rule_file() {
        let rs = parse_ruleset(b".*ab.*cd.*\n.*ef.*gh.*").unwrap();
        assert_eq!(rs.n(), 2);
        assert_eq!(rs.m(), 2);
        assert_eq!(rs.rules[1].rule_id, 1);
        assert_eq!(rs.mode, Mode::Plain);
    }

    #[test]
    fn comments_only_is_empty() {
        assert_eq!(parse_ruleset(b"# only comments"), Err(RulesetError::Empty));
        assert_eq!(
            parse_ruleset(b"mode=plain\n\n").unwrap_err().to_string(),
            "empty ruleset"
        );
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_ruleset(b".*ab.*cd.*\n.*a{2,1}.*b.*\n.*x.*\n").unwrap_err();
        let lines = err.lines();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].line, 2);
        assert!(matches!(lines[0].kind, LineErrorKind::Parse(_)));
        assert_eq!(lines[1].line, 3);
        assert!(err
            .to_string()
            .starts_with("line 2: bad repeat bounds at offset 3"));
    }

    #[test]
    fn mode_directive_and_override() {
        let text = b"# header\nmode=double_counting\r\n.*a[0-9]{2}.*cd.*\r\n";
        let rs = parse_ruleset(text).unwrap();
        assert_eq!(rs.mode, Mode::DoubleCounting);
        assert!(rs.rules[0].counted.is_some());
        assert!(parse_ruleset_with_mode(text, Some(Mode::Plain)).is_err());
        let err = parse_ruleset(b".*ab.*cd.*\nmode=plain\n").unwrap_err();
        assert!(matches!(err.lines()[0].kind, LineErrorKind::Directive(_)));
    }
}
