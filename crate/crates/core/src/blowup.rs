//! Detection of the constructs that make a DFA grow exponentially.

use alloc::vec::Vec;

use crate::ast::{Ast, AstKind, Span};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlowupKind {
    /// `.*`
    DotStar,
    /// `.+`
    DotPlus,
    /// `.{n}`
    DotRepeat,
    /// `[^a]{n}`
    NegClassRepeat,
    /// `.{n,m}`
    DotRepeatRange,
    /// `[^a]{n,m}`
    NegClassRepeatRange,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BlowupSign {
    pub kind: BlowupKind,
    pub span: Span,
}

/// Classifies a single node, ignoring its children.
pub fn sign_of(ast: &Ast) -> Option<BlowupKind> {
    let is_dot = |c: &Ast| c.kind == AstKind::Dot;
    let is_neg = |c: &Ast| matches!(c.kind, AstKind::Class { negated: true, .. });
    match &ast.kind {
        AstKind::Star(c) if is_dot(c) => Some(BlowupKind::DotStar),
        AstKind::Plus(c) if is_dot(c) => Some(BlowupKind::DotPlus),
        AstKind::Repeat(c, _) if is_dot(c) => Some(BlowupKind::DotRepeat),
        AstKind::Repeat(c, _) if is_neg(c) => Some(BlowupKind::NegClassRepeat),
        AstKind::RepeatRange(c, _, _) if is_dot(c) => Some(BlowupKind::DotRepeatRange),
        AstKind::RepeatRange(c, _, _) if is_neg(c) => Some(BlowupKind::NegClassRepeatRange),
        _ => None,
    }
}

/// Every blow-up sign in `ast`, in source order.
pub fn detect_blowup_signs(ast: &Ast) -> Vec<BlowupSign> {
    let mut out = Vec::new();
    walk(ast, &mut out);
    out.sort_by_key(|s| (s.span.start, s.span.end));
    out
}

fn walk(ast: &Ast, out: &mut Vec<BlowupSign>) {
    if let Some(kind) = sign_of(ast) {
        out.push(BlowupSign {
            kind,
            span: ast.span,
        });
    }
    match &ast.kind {
        AstKind::Concat(cs) | AstKind::Union(cs) => cs.iter().for_each(|c| walk(c, out)),
        AstKind::Star(c)
        | AstKind::Plus(c)
        | AstKind::Repeat(c, _)
        | AstKind::RepeatRange(c, _, _) => walk(c, out),
        _ => {}
    }
}
