//! Recursive-descent parser for the PCRE subset.
//!
//! Supported: literals, `.`, `[...]` and `[^...]` classes with ranges, escapes
//! and POSIX `[:name:]` items, `|`, `*`, `+`, `{n}`, `{n,m}`, `(...)` and
//! `(?:...)` groups, `\d \w \s` (and negations), `\xHH`, and escaped
//! metacharacters. Everything else that PCRE would interpret is rejected.

use alloc::boxed::Box;
use alloc::vec::Vec;

use thiserror::Error;

use crate::ast::{Ast, AstKind, Span};
use crate::bytes::ByteSet;

/// Largest accepted repetition bound.
pub const MAX_REPEAT: u32 = 1000;

const MAX_DEPTH: usize = 200;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unbalanced parenthesis")]
    UnbalancedParen,
    #[error("unclosed character class")]
    UnclosedClass,
    #[error("bad repeat bounds")]
    BadRepeatBounds,
    #[error("repeat bound exceeds {MAX_REPEAT}")]
    RepeatTooLarge,
    #[error("empty character class")]
    EmptyClass,
    #[error("bad class range")]
    BadClassRange,
    #[error("quantifier without operand")]
    MissingOperand,
    #[error("invalid escape")]
    InvalidEscape,
    #[error("unsupported feature: {0}")]
    Unsupported(&'static str),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{kind} at offset {offset}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

impl ParseError {
    fn new(kind: ParseErrorKind, offset: usize) -> ParseError {
        ParseError { kind, offset }
    }
}

/// Parses `text` into an [`Ast`].
pub fn parse_pattern(text: &[u8]) -> Result<Ast, ParseError> {
    let mut parser = Parser {
        text,
        pos: 0,
        depth: 0,
    };
    let ast = parser.parse_alt()?;
    match parser.peek() {
        None => Ok(ast),
        Some(b')') => Err(ParseError::new(ParseErrorKind::UnbalancedParen, parser.pos)),
        Some(_) => unreachable!("alternation stops only at ')' or end"),
    }
}

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
    depth: usize,
}

enum ClassItem {
    Byte(u8),
    Set(ByteSet),
}

impl Parser<'_> {
    fn peek(&self) -> Option<u8> {
        self.text.get(self.pos).copied()
    }

    fn peek_at(&self, ahead: usize) -> Option<u8> {
        self.text.get(self.pos + ahead).copied()
    }

    fn err<T>(&self, kind: ParseErrorKind, offset: usize) -> Result<T, ParseError> {
        Err(ParseError::new(kind, offset))
    }

    fn parse_alt(&mut self) -> Result<Ast, ParseError> {
        let start = self.pos;
        let mut branches = Vec::new();
        branches.push(self.parse_concat()?);
        while self.peek() == Some(b'|') {
            self.pos += 1;
            branches.push(self.parse_concat()?);
        }
        if branches.len() == 1 {
            return Ok(branches.pop().unwrap());
        }
        Ok(Ast::union_spanned(branches, Span::new(start, self.pos)))
    }

    fn parse_concat(&mut self) -> Result<Ast, ParseError> {
        let start = self.pos;
        let mut items = Vec::new();
        while let Some(b) = self.peek() {
            if b == b'|' || b == b')' {
                break;
            }
            items.push(self.parse_repeat()?);
        }
        Ok(Ast::concat_spanned(items, Span::new(start, self.pos)))
    }

    fn parse_repeat(&mut self) -> Result<Ast, ParseError> {
        let start = self.pos;
        let mut ast = self.parse_atom()?;
        loop {
            let kind = match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    AstKind::Star(Box::new(ast))
                }
                Some(b'+') => {
                    self.pos += 1;
                    AstKind::Plus(Box::new(ast))
                }
                Some(b'{') => {
                    let brace = self.pos;
                    let (k, m) = self.parse_bounds()?;
                    match m {
                        None => AstKind::Repeat(Box::new(ast), k),
                        Some(m) if k <= m => AstKind::RepeatRange(Box::new(ast), k, m),
                        Some(_) => return self.err(ParseErrorKind::BadRepeatBounds, brace),
                    }
                }
                Some(b'?') => {
                    return self.err(ParseErrorKind::Unsupported("'?' quantifier"), self.pos)
                }
                _ => return Ok(ast),
            };
            ast = Ast::new(kind, Span::new(start, self.pos));
            match self.peek() {
                Some(b'?') => {
                    return self.err(ParseErrorKind::Unsupported("lazy quantifier"), self.pos)
                }
                Some(b'+') => {
                    return self.err(
                        ParseErrorKind::Unsupported("possessive quantifier"),
                        self.pos,
                    )
                }
                _ => {}
            }
        }
    }

    /// Parses `{n}` or `{n,m}` starting at the opening brace.
    fn parse_bounds(&mut self) -> Result<(u32, Option<u32>), ParseError> {
        let brace = self.pos;
        self.pos += 1;
        let k = self.parse_number(brace)?;
        match self.peek() {
            Some(b'}') => {
                self.pos += 1;
                Ok((k, None))
            }
            Some(b',') => {
                self.pos += 1;
                if self.peek() == Some(b'}') {
                    return self.err(ParseErrorKind::Unsupported("open-ended repeat"), brace);
                }
                let m = self.parse_number(brace)?;
                if self.peek() != Some(b'}') {
                    return self.err(ParseErrorKind::BadRepeatBounds, brace);
                }
                self.pos += 1;
                Ok((k, Some(m)))
            }
            _ => self.err(ParseErrorKind::BadRepeatBounds, brace),
        }
    }

    fn parse_number(&mut self, brace: usize) -> Result<u32, ParseError> {
        let start = self.pos;
        let mut value: u32 = 0;
        while let Some(d @ b'0'..=b'9') = self.peek() {
            value = value.saturating_mul(10).saturating_add(u32::from(d - b'0'));
            self.pos += 1;
        }
        if self.pos == start {
            return self.err(ParseErrorKind::BadRepeatBounds, brace);
        }
        if value > MAX_REPEAT {
            return self.err(ParseErrorKind::RepeatTooLarge, brace);
        }
        Ok(value)
    }

    fn parse_atom(&mut self) -> Result<Ast, ParseError> {
        let start = self.pos;
        let b = self.peek().expect("caller checked for end of input");
        match b {
            b'(' => {
                self.pos += 1;
                if self.peek() == Some(b'?') {
                    if self.peek_at(1) == Some(b':') {
                        self.pos += 2;
                    } else {
                        return self.err(
                            ParseErrorKind::Unsupported("group modifier or lookaround"),
                            start,
                        );
                    }
                }
                if self.depth >= MAX_DEPTH {
                    return self.err(
                        ParseErrorKind::Unsupported("nesting deeper than 200 groups"),
                        start,
                    );
                }
                self.depth += 1;
                let inner = self.parse_alt()?;
                self.depth -= 1;
                if self.peek() != Some(b')') {
                    return self.err(ParseErrorKind::UnbalancedParen, start);
                }
                self.pos += 1;
                let mut inner = inner;
                if inner.kind == AstKind::Empty {
                    inner.span = Span::new(start, self.pos);
                }
                Ok(inner)
            }
            b'.' => {
                self.pos += 1;
                Ok(Ast::new(AstKind::Dot, Span::new(start, self.pos)))
            }
            b'[' => self.parse_class(),
            b'\\' => {
                let item = self.parse_escape()?;
                let kind = match item {
                    ClassItem::Byte(b) => AstKind::Literal(b),
                    ClassItem::Set(set) => AstKind::Class {
                        set,
                        negated: false,
                    },
                };
                Ok(Ast::new(kind, Span::new(start, self.pos)))
            }
            b'*' | b'+' | b'{' => self.err(ParseErrorKind::MissingOperand, start),
            b'?' => self.err(ParseErrorKind::Unsupported("'?' quantifier"), start),
            b'^' | b'$' => self.err(ParseErrorKind::Unsupported("anchor"), start),
            _ => {
                self.pos += 1;
                Ok(Ast::new(AstKind::Literal(b), Span::new(start, self.pos)))
            }
        }
    }

    /// Parses an escape sequence starting at the backslash.
    fn parse_escape(&mut self) -> Result<ClassItem, ParseError> {
        let start = self.pos;
        self.pos += 1;
        let Some(c) = self.peek() else {
            return self.err(ParseErrorKind::InvalidEscape, start);
        };
        self.pos += 1;
        let digits = ByteSet::range(b'0', b'9');
        let word = digits
            .union(&ByteSet::range(b'a', b'z'))
            .union(&ByteSet::range(b'A', b'Z'))
            .union(&ByteSet::singleton(b'_'));
        let space = ByteSet::from_bytes(b" \t\n\r\x0b\x0c");
        let item = match c {
            b'd' => ClassItem::Set(digits),
            b'D' => ClassItem::Set(digits.complement()),
            b'w' => ClassItem::Set(word),
            b'W' => ClassItem::Set(word.complement()),
            b's' => ClassItem::Set(space),
            b'S' => ClassItem::Set(space.complement()),
            b'n' => ClassItem::Byte(b'\n'),
            b'r' => ClassItem::Byte(b'\r'),
            b't' => ClassItem::Byte(b'\t'),
            b'f' => ClassItem::Byte(0x0c),
            b'v' => ClassItem::Byte(0x0b),
            b'0' => ClassItem::Byte(0),
            b'x' => {
                let hex = |b: Option<u8>| b.and_then(|b| (b as char).to_digit(16));
                match (hex(self.peek()), hex(self.peek_at(1))) {
                    (Some(hi), Some(lo)) => {
                        self.pos += 2;
                        ClassItem::Byte((hi * 16 + lo) as u8)
                    }
                    _ => return self.err(ParseErrorKind::InvalidEscape, start),
                }
            }
            b'1'..=b'9' => return self.err(ParseErrorKind::Unsupported("backreference"), start),
            b'b' | b'B' | b'A' | b'z' | b'Z' | b'G' => {
                return self.err(ParseErrorKind::Unsupported("assertion"), start)
            }
            c if c.is_ascii_alphanumeric() => {
                return self.err(ParseErrorKind::InvalidEscape, start)
            }
            c => ClassItem::Byte(c),
        };
        Ok(item)
    }

    fn parse_class(&mut self) -> Result<Ast, ParseError> {
        let start = self.pos;
        self.pos += 1;
        let negated = if self.peek() == Some(b'^') {
            self.pos += 1;
            true
        } else {
            false
        };
        let mut set = ByteSet::empty();
        let mut first = true;
        loop {
            let Some(b) = self.peek() else {
                return self.err(ParseErrorKind::UnclosedClass, start);
            };
            if b == b']' && !first {
                self.pos += 1;
                break;
            }
            first = false;
            let item_start = self.pos;
            let item = self.parse_class_item()?;
            let lo = match item {
                ClassItem::Set(s) => {
                    set = set.union(&s);
                    continue;
                }
                ClassItem::Byte(lo) => lo,
            };
            if self.peek() == Some(b'-') && self.peek_at(1).is_some_and(|b| b != b']') {
                self.pos += 1;
                match self.parse_class_item()? {
                    ClassItem::Byte(hi) if hi >= lo => set = set.union(&ByteSet::range(lo, hi)),
                    _ => return self.err(ParseErrorKind::BadClassRange, item_start),
                }
            } else {
                set.insert(lo);
            }
        }
        let effective = if negated { set.complement() } else { set };
        if effective.is_empty() {
            return self.err(ParseErrorKind::EmptyClass, start);
        }
        Ok(Ast::new(
            AstKind::Class { set, negated },
            Span::new(start, self.pos),
        ))
    }

    fn parse_class_item(&mut self) -> Result<ClassItem, ParseError> {
        let start = self.pos;
        match self.peek() {
            None => self.err(ParseErrorKind::UnclosedClass, start),
            Some(b'\\') => self.parse_escape(),
            Some(b'[') if self.peek_at(1) == Some(b':') => {
                let rest = &self.text[self.pos + 2..];
                let Some(end) = rest.windows(2).position(|w| w == b":]") else {
                    return self.err(ParseErrorKind::UnclosedClass, start);
                };
                let set = match posix_class(&rest[..end]) {
                    Some(set) => set,
                    None => {
                        return self.err(ParseErrorKind::Unsupported("POSIX class name"), start)
                    }
                };
                self.pos += 2 + end + 2;
                Ok(ClassItem::Set(set))
            }
            Some(b) => {
                self.pos += 1;
                Ok(ClassItem::Byte(b))
            }
        }
    }
}

fn posix_class(name: &[u8]) -> Option<ByteSet> {
    let digit = ByteSet::range(b'0', b'9');
    let upper = ByteSet::range(b'A', b'Z');
    let lower = ByteSet::range(b'a', b'z');
    let alpha = upper.union(&lower);
    Some(match name {
        b"digit" => digit,
        b"upper" => upper,
        b"lower" => lower,
        b"alpha" => alpha,
        b"alnum" => alpha.union(&digit),
        b"xdigit" => digit
            .union(&ByteSet::range(b'a', b'f'))
            .union(&ByteSet::range(b'A', b'F')),
        b"space" => ByteSet::from_bytes(b" \t\n\r\x0b\x0c"),
        b"punct" => ByteSet::range(0x21, 0x7e)
            .iter()
            .filter(|b| !b.is_ascii_alphanumeric())
            .fold(ByteSet::empty(), |mut s, b| {
                s.insert(b);
                s
            }),
        b"print" => ByteSet::range(0x20, 0x7e),
        b"graph" => ByteSet::range(0x21, 0x7e),
        b"cntrl" => ByteSet::range(0, 0x1f).union(&ByteSet::singleton(0x7f)),
        _ => return None,
    })
}
