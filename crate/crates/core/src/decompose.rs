//! Splitting a rule into prefix, optional gap and chain of literal words.
//!
//! Accepted top-level shapes (every rule is unanchored):
//!
//! ```text
//! .*R.*w1.*w2 ... .*wk.*          chain
//! .*R[^c]{k,m}w1.*w2 ... .*wk.*   gap before the first chain word
//! ```
//!
//! `R` must be free of blow-up signs. In double-counting mode `R` may end in
//! one counted single-byte repetition followed by a literal tail, e.g.
//! `ab[0-9]{2,4}x`.

use alloc::vec::Vec;

use thiserror::Error;

use crate::ast::{Ast, AstKind};
use crate::blowup::{detect_blowup_signs, BlowupKind};
use crate::bytes::ByteSet;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Mode {
    #[default]
    Plain,
    DoubleCounting,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Plain => "plain",
            Mode::DoubleCounting => "double_counting",
        }
    }

    pub fn from_name(name: &str) -> Option<Mode> {
        match name {
            "plain" => Some(Mode::Plain),
            "double_counting" => Some(Mode::DoubleCounting),
            _ => None,
        }
    }
}

/// `[^forbidden]{k,m}` between the prefix and the first chain word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapSpec {
    /// Bytes that may not occur inside the gap. Empty for `.{k,m}`.
    pub forbidden: ByteSet,
    pub k: u32,
    pub m: u32,
    /// Counter expiry: `m + |first chain word| + 1`.
    pub m_prime: u32,
}

/// A prefix of the form `head class{k,m} tail`, matched with an auxiliary
/// counter instead of an expanded automaton.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountedPrefix {
    pub head: Ast,
    pub class: ByteSet,
    pub k: u32,
    pub m: u32,
    pub tail: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecomposedRule {
    pub rule_id: usize,
    pub prefix: Ast,
    pub counted: Option<CountedPrefix>,
    pub gap: Option<GapSpec>,
    pub chain: Vec<Vec<u8>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ShapeError {
    #[error("rule must start with .*")]
    MissingLeadingDotStar,
    #[error("rule must end with .*")]
    MissingTrailingDotStar,
    #[error("empty prefix before the first chain word")]
    EmptyPrefix,
    #[error("prefix matches the empty word")]
    NullablePrefix,
    #[error("no chain word after the prefix")]
    MissingChain,
    #[error("blow-up sign {kind:?} at offset {offset} inside the prefix")]
    BlowupInPrefix { kind: BlowupKind, offset: usize },
    #[error("chain word at offset {offset} is not a literal word")]
    NonLiteralChainWord { offset: usize },
    #[error("counted repetition at offset {offset} needs double_counting mode")]
    CountedNeedsDoubleCounting { offset: usize },
    #[error("unsupported counted repetition at offset {offset}: {reason}")]
    UnsupportedCounter { offset: usize, reason: &'static str },
}

impl DecomposedRule {
    pub fn first_word(&self) -> &[u8] {
        &self.chain[0]
    }

    /// Reassembles `.*R[gap]w1.*w2 ... .*`.
    pub fn recompose(&self) -> Ast {
        let dot_star = || Ast::star(Ast::dot());
        let mut parts = alloc::vec![dot_star(), self.prefix.clone()];
        for (i, word) in self.chain.iter().enumerate() {
            if i == 0 {
                if let Some(gap) = &self.gap {
                    let unit = if gap.forbidden.is_empty() {
                        Ast::dot()
                    } else {
                        Ast::class(gap.forbidden, true)
                    };
                    parts.push(Ast::repeat_range(unit, gap.k, gap.m));
                } else {
                    parts.push(dot_star());
                }
            } else {
                parts.push(dot_star());
            }
            parts.push(Ast::word(word));
        }
        parts.push(dot_star());
        Ast::concat(parts)
    }

    /// Length of the printed prefix pattern.
    pub fn prefix_len(&self) -> usize {
        self.prefix.unparse().len()
    }
}

/// Splits `ast` into its canonical parts. The returned rule has id 0.
pub fn decompose_rule(ast: &Ast, mode: Mode) -> Result<DecomposedRule, ShapeError> {
    let children: Vec<Ast> = match &ast.kind {
        AstKind::Concat(cs) => cs.clone(),
        _ => alloc::vec![ast.clone()],
    };

    // Segments between `.*` separators; runs of separators collapse.
    let mut segments: Vec<Vec<Ast>> = alloc::vec![Vec::new()];
    for child in children {
        if child.is_dot_star() {
            if !segments.last().unwrap().is_empty() || segments.len() == 1 {
                segments.push(Vec::new());
            }
        } else {
            segments.last_mut().unwrap().push(child);
        }
    }
    if segments.len() < 2 || !segments[0].is_empty() {
        return Err(ShapeError::MissingLeadingDotStar);
    }
    if !segments.last().unwrap().is_empty() {
        return Err(ShapeError::MissingTrailingDotStar);
    }
    segments.pop();
    let mut middle = segments.into_iter().skip(1);
    let Some(first) = middle.next() else {
        return Err(ShapeError::EmptyPrefix);
    };

    let mut chain = Vec::new();
    let (prefix_parts, gap_node) = match gap_position(&first) {
        Some(pos) => {
            let mut parts = first;
            let rest = parts.split_off(pos);
            let mut rest = rest.into_iter();
            let gap_node = rest.next().unwrap();
            chain.push(rest.map(|a| literal_byte(&a).unwrap()).collect::<Vec<u8>>());
            (parts, Some(gap_node))
        }
        None => (first, None),
    };
    for segment in middle {
        chain.push(literal_word(&segment)?);
    }
    if chain.is_empty() {
        return Err(ShapeError::MissingChain);
    }
    if prefix_parts.is_empty() {
        return Err(ShapeError::EmptyPrefix);
    }

    let gap = gap_node.map(|node| {
        let (unit, k, m) = match &node.kind {
            AstKind::Repeat(c, k) => (c, *k, *k),
            AstKind::RepeatRange(c, k, m) => (c, *k, *m),
            _ => unreachable!("gap_position returns counted nodes"),
        };
        let forbidden = match &unit.kind {
            AstKind::Dot => ByteSet::empty(),
            AstKind::Class { set, negated: true } => *set,
            AstKind::Class {
                set,
                negated: false,
            } => set.complement(),
            AstKind::Literal(b) => ByteSet::singleton(*b).complement(),
            _ => unreachable!("gap_position checks the repeated unit"),
        };
        let beta = chain[0].len() as u32;
        GapSpec {
            forbidden,
            k,
            m,
            m_prime: m + beta + 1,
        }
    });

    let counted = validate_prefix(&prefix_parts, mode)?;
    let prefix = Ast::concat(prefix_parts);
    if prefix.nullable() {
        return Err(ShapeError::NullablePrefix);
    }
    Ok(DecomposedRule {
        rule_id: 0,
        prefix,
        counted,
        gap,
        chain,
    })
}

fn literal_byte(ast: &Ast) -> Option<u8> {
    match &ast.kind {
        AstKind::Literal(b) => Some(*b),
        AstKind::Class {
            set,
            negated: false,
        } => set.single(),
        AstKind::Class { set, negated: true } => set.complement().single(),
        _ => None,
    }
}

fn literal_word(segment: &[Ast]) -> Result<Vec<u8>, ShapeError> {
    segment
        .iter()
        .map(|a| {
            literal_byte(a).ok_or(ShapeError::NonLiteralChainWord {
                offset: a.span.start,
            })
        })
        .collect()
}

fn single_byte_unit(ast: &Ast) -> bool {
    matches!(
        ast.kind,
        AstKind::Dot | AstKind::Class { .. } | AstKind::Literal(_)
    )
}

/// Index of a trailing `unit{k,m}` that is followed by a non-empty literal word.
fn gap_position(segment: &[Ast]) -> Option<usize> {
    let pos = segment.iter().rposition(|a| {
        matches!(&a.kind, AstKind::Repeat(c, _) | AstKind::RepeatRange(c, _, _) if single_byte_unit(c))
    })?;
    let tail = &segment[pos + 1..];
    (!tail.is_empty() && tail.iter().all(|a| literal_byte(a).is_some())).then_some(pos)
}

fn is_counted(ast: &Ast) -> bool {
    matches!(ast.kind, AstKind::Repeat(..) | AstKind::RepeatRange(..))
}

fn first_counted(ast: &Ast) -> Option<&Ast> {
    if is_counted(ast) {
        return Some(ast);
    }
    match &ast.kind {
        AstKind::Concat(cs) | AstKind::Union(cs) => cs.iter().find_map(first_counted),
        AstKind::Star(c) | AstKind::Plus(c) => first_counted(c),
        _ => None,
    }
}

fn check_no_blowup(parts: &[Ast]) -> Result<(), ShapeError> {
    for part in parts {
        if let Some(sign) = detect_blowup_signs(part).first() {
            return Err(ShapeError::BlowupInPrefix {
                kind: sign.kind,
                offset: sign.span.start,
            });
        }
    }
    Ok(())
}

fn validate_prefix(parts: &[Ast], mode: Mode) -> Result<Option<CountedPrefix>, ShapeError> {
    let counted_at = parts.iter().position(is_counted);
    if mode == Mode::Plain || counted_at.is_none() {
        check_no_blowup(parts)?;
        if let Some(node) = parts.iter().find_map(first_counted) {
            return Err(match mode {
                Mode::Plain => ShapeError::CountedNeedsDoubleCounting {
                    offset: node.span.start,
                },
                Mode::DoubleCounting => ShapeError::UnsupportedCounter {
                    offset: node.span.start,
                    reason: "counters must sit at the top level of the prefix",
                },
            });
        }
        return Ok(None);
    }

    let pos = counted_at.unwrap();
    let node = &parts[pos];
    let head = &parts[..pos];
    let tail = &parts[pos + 1..];
    check_no_blowup(head)?;
    if let Some(inner) = head.iter().find_map(first_counted) {
        return Err(ShapeError::UnsupportedCounter {
            offset: inner.span.start,
            reason: "only one counted repetition per prefix",
        });
    }
    let tail_bytes: Option<Vec<u8>> = tail.iter().map(literal_byte).collect();
    let Some(tail_bytes) = tail_bytes else {
        return Err(ShapeError::UnsupportedCounter {
            offset: node.span.start,
            reason: "only a literal word may follow the counter",
        });
    };
    let (unit, k, m) = match &node.kind {
        AstKind::Repeat(c, k) => (c, *k, *k),
        AstKind::RepeatRange(c, k, m) => (c, *k, *m),
        _ => unreachable!(),
    };
    let class = match &unit.kind {
        AstKind::Dot => ByteSet::full(),
        AstKind::Literal(b) => ByteSet::singleton(*b),
        AstKind::Class { set, negated } => {
            if *negated {
                set.complement()
            } else {
                *set
            }
        }
        _ => {
            return Err(ShapeError::UnsupportedCounter {
                offset: node.span.start,
                reason: "counter operand must be a single byte or class",
            })
        }
    };
    Ok(Some(CountedPrefix {
        head: Ast::concat(head.to_vec()),
        class,
        k,
        m,
        tail: tail_bytes,
    }))
}
