//! Syntax tree for the supported PCRE subset and its canonical printer.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::bytes::ByteSet;

/// Byte offsets `[start, end)` into the pattern text.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Span {
        Span { start, end }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AstKind {
    Empty,
    Literal(u8),
    /// Any byte.
    Dot,
    /// `set` as written; with `negated` the class matches its complement.
    Class {
        set: ByteSet,
        negated: bool,
    },
    Concat(Vec<Ast>),
    Union(Vec<Ast>),
    Star(Box<Ast>),
    Plus(Box<Ast>),
    Repeat(Box<Ast>, u32),
    RepeatRange(Box<Ast>, u32, u32),
}

/// A parsed pattern. Equality compares structure only and ignores spans.
#[derive(Clone, Debug, Eq)]
pub struct Ast {
    pub kind: AstKind,
    pub span: Span,
}

impl PartialEq for Ast {
    fn eq(&self, other: &Ast) -> bool {
        self.kind == other.kind
    }
}

impl Ast {
    pub fn new(kind: AstKind, span: Span) -> Ast {
        Ast { kind, span }
    }

    fn bare(kind: AstKind) -> Ast {
        Ast {
            kind,
            span: Span::default(),
        }
    }

    pub fn empty() -> Ast {
        Ast::bare(AstKind::Empty)
    }

    pub fn literal(b: u8) -> Ast {
        Ast::bare(AstKind::Literal(b))
    }

    pub fn dot() -> Ast {
        Ast::bare(AstKind::Dot)
    }

    pub fn class(set: ByteSet, negated: bool) -> Ast {
        Ast::bare(AstKind::Class { set, negated })
    }

    pub fn word(bytes: &[u8]) -> Ast {
        Ast::concat(bytes.iter().map(|b| Ast::literal(*b)).collect())
    }

    pub fn star(child: Ast) -> Ast {
        Ast::bare(AstKind::Star(Box::new(child)))
    }

    pub fn plus(child: Ast) -> Ast {
        Ast::bare(AstKind::Plus(Box::new(child)))
    }

    pub fn repeat(child: Ast, k: u32) -> Ast {
        Ast::bare(AstKind::Repeat(Box::new(child), k))
    }

    pub fn repeat_range(child: Ast, k: u32, m: u32) -> Ast {
        Ast::bare(AstKind::RepeatRange(Box::new(child), k, m))
    }

    /// Concatenation with nested concatenations flattened and empties dropped.
    pub fn concat(children: Vec<Ast>) -> Ast {
        Ast::concat_spanned(children, Span::default())
    }

    pub fn concat_spanned(children: Vec<Ast>, span: Span) -> Ast {
        let mut flat = Vec::with_capacity(children.len());
        for child in children {
            match child.kind {
                AstKind::Empty => {}
                AstKind::Concat(inner) => flat.extend(inner),
                _ => flat.push(child),
            }
        }
        match flat.len() {
            0 => Ast::new(AstKind::Empty, span),
            1 => flat.pop().unwrap(),
            _ => Ast::new(AstKind::Concat(flat), span),
        }
    }

    /// Union with nested unions flattened.
    pub fn union(children: Vec<Ast>) -> Ast {
        Ast::union_spanned(children, Span::default())
    }

    pub fn union_spanned(children: Vec<Ast>, span: Span) -> Ast {
        let mut flat = Vec::with_capacity(children.len());
        for child in children {
            match child.kind {
                AstKind::Union(inner) => flat.extend(inner),
                _ => flat.push(child),
            }
        }
        match flat.len() {
            0 => Ast::new(AstKind::Empty, span),
            1 => flat.pop().unwrap(),
            _ => Ast::new(AstKind::Union(flat), span),
        }
    }

    /// `.*`
    pub fn is_dot_star(&self) -> bool {
        matches!(&self.kind, AstKind::Star(c) if c.kind == AstKind::Dot)
    }

    /// True if the empty word is in the language.
    pub fn nullable(&self) -> bool {
        match &self.kind {
            AstKind::Empty | AstKind::Star(_) => true,
            AstKind::Literal(_) | AstKind::Dot | AstKind::Class { .. } => false,
            AstKind::Concat(cs) => cs.iter().all(Ast::nullable),
            AstKind::Union(cs) => cs.iter().any(Ast::nullable),
            AstKind::Plus(c) => c.nullable(),
            AstKind::Repeat(c, k) => *k == 0 || c.nullable(),
            AstKind::RepeatRange(c, k, _) => *k == 0 || c.nullable(),
        }
    }

    /// Node count after expanding counted repetitions by duplication.
    pub fn expanded_size(&self) -> usize {
        match &self.kind {
            AstKind::Empty | AstKind::Literal(_) | AstKind::Dot | AstKind::Class { .. } => 1,
            AstKind::Concat(cs) | AstKind::Union(cs) => {
                1 + cs.iter().map(Ast::expanded_size).sum::<usize>()
            }
            AstKind::Star(c) | AstKind::Plus(c) => 1 + c.expanded_size(),
            AstKind::Repeat(c, k) => 1 + (*k as usize).max(1) * c.expanded_size(),
            AstKind::RepeatRange(c, _, m) => 1 + (*m as usize).max(1) * c.expanded_size(),
        }
    }

    /// Prints the pattern in the syntax accepted by [`crate::parse_pattern`].
    pub fn unparse(&self) -> String {
        let mut out = String::new();
        self.write_alt(&mut out);
        out
    }

    fn write_alt(&self, out: &mut String) {
        match &self.kind {
            AstKind::Union(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        out.push('|');
                    }
                    c.write_concat(out);
                }
            }
            _ => self.write_concat(out),
        }
    }

    fn write_concat(&self, out: &mut String) {
        match &self.kind {
            AstKind::Union(_) => {
                out.push('(');
                self.write_alt(out);
                out.push(')');
            }
            AstKind::Concat(cs) => cs.iter().for_each(|c| c.write_concat(out)),
            _ => self.write_postfix(out),
        }
    }

    fn write_postfix(&self, out: &mut String) {
        let (child, suffix) = match &self.kind {
            AstKind::Star(c) => (c, String::from("*")),
            AstKind::Plus(c) => (c, String::from("+")),
            AstKind::Repeat(c, k) => {
                let mut s = String::new();
                let _ = write!(s, "{{{k}}}");
                (c, s)
            }
            AstKind::RepeatRange(c, k, m) => {
                let mut s = String::new();
                let _ = write!(s, "{{{k},{m}}}");
                (c, s)
            }
            _ => {
                self.write_atom(out);
                return;
            }
        };
        match child.kind {
            AstKind::Literal(_) | AstKind::Dot | AstKind::Class { .. } => child.write_atom(out),
            _ => {
                out.push('(');
                child.write_alt(out);
                out.push(')');
            }
        }
        out.push_str(&suffix);
    }

    fn write_atom(&self, out: &mut String) {
        match &self.kind {
            AstKind::Empty => {}
            AstKind::Literal(b) => push_literal(out, *b),
            AstKind::Dot => out.push('.'),
            AstKind::Class { set, negated } => {
                out.push('[');
                if *negated {
                    out.push('^');
                }
                for (lo, hi) in set.ranges() {
                    push_class_byte(out, lo);
                    if hi > lo {
                        if hi > lo + 1 {
                            out.push('-');
                        }
                        push_class_byte(out, hi);
                    }
                }
                out.push(']');
            }
            _ => {
                out.push('(');
                self.write_alt(out);
                out.push(')');
            }
        }
    }
}

const METACHARS: &[u8] = b"\\.[]()|*+{}?^$";

/// Appends `b` as a pattern literal, escaping metacharacters and non-printables.
pub fn push_literal(out: &mut String, b: u8) {
    if METACHARS.contains(&b) {
        out.push('\\');
        out.push(b as char);
    } else if b.is_ascii_graphic() || b == b' ' {
        out.push(b as char);
    } else {
        let _ = write!(out, "\\x{b:02x}");
    }
}

fn push_class_byte(out: &mut String, b: u8) {
    if matches!(b, b']' | b'\\' | b'^' | b'-' | b'[') {
        out.push('\\');
        out.push(b as char);
    } else if b.is_ascii_graphic() || b == b' ' {
        out.push(b as char);
    } else {
        let _ = write!(out, "\\x{b:02x}");
    }
}

/// Escapes a byte string so it parses back as a literal word.
pub fn escape_word(bytes: &[u8]) -> String {
    let mut out = String::new();
    for &b in bytes {
        push_literal(&mut out, b);
    }
    out
}
