//! Thompson construction.

use alloc::vec::Vec;

use crate::ast::{Ast, AstKind};
use crate::bytes::ByteSet;

pub type StateId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Label {
    Epsilon,
    Bytes(ByteSet),
}

/// A nondeterministic automaton with ε-moves. Accepting states carry a tag
/// naming the detector they belong to.
#[derive(Clone, Debug, Default)]
pub struct Nfa {
    edges: Vec<Vec<(Label, StateId)>>,
    accept: Vec<Option<u32>>,
    start: StateId,
}

impl Nfa {
    pub fn state_count(&self) -> usize {
        self.edges.len()
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn edges(&self, state: StateId) -> &[(Label, StateId)] {
        &self.edges[state as usize]
    }

    pub fn accept_tag(&self, state: StateId) -> Option<u32> {
        self.accept[state as usize]
    }

    pub fn is_accepting(&self, state: StateId) -> bool {
        self.accept[state as usize].is_some()
    }

    /// Every transition as `(from, label, to)`.
    pub fn transitions(&self) -> impl Iterator<Item = (StateId, Label, StateId)> + '_ {
        self.edges
            .iter()
            .enumerate()
            .flat_map(|(from, es)| es.iter().map(move |(l, to)| (from as StateId, *l, *to)))
    }

    /// Sorts `set` in place and extends it to its ε-closure.
    pub fn epsilon_closure(&self, set: &mut Vec<StateId>, seen: &mut Vec<bool>) {
        let mut stack: Vec<StateId> = set.clone();
        for &s in set.iter() {
            seen[s as usize] = true;
        }
        while let Some(s) = stack.pop() {
            for (label, to) in &self.edges[s as usize] {
                if *label == Label::Epsilon && !seen[*to as usize] {
                    seen[*to as usize] = true;
                    set.push(*to);
                    stack.push(*to);
                }
            }
        }
        for &s in set.iter() {
            seen[s as usize] = false;
        }
        set.sort_unstable();
    }

    /// Direct simulation, used for cross-checks.
    pub fn accepts(&self, word: &[u8]) -> bool {
        let mut seen = alloc::vec![false; self.state_count()];
        let mut current = alloc::vec![self.start];
        self.epsilon_closure(&mut current, &mut seen);
        for &b in word {
            let mut next: Vec<StateId> = Vec::new();
            for &s in &current {
                for (label, to) in &self.edges[s as usize] {
                    if let Label::Bytes(set) = label {
                        if set.contains(b) && !next.contains(to) {
                            next.push(*to);
                        }
                    }
                }
            }
            self.epsilon_closure(&mut next, &mut seen);
            current = next;
        }
        current.iter().any(|s| self.is_accepting(*s))
    }
}

/// Incremental Thompson builder. Fragments are `(start, end)` state pairs.
#[derive(Debug, Default)]
pub struct NfaBuilder {
    nfa: Nfa,
}

impl NfaBuilder {
    pub fn new() -> NfaBuilder {
        NfaBuilder::default()
    }

    pub fn add_state(&mut self) -> StateId {
        self.nfa.edges.push(Vec::new());
        self.nfa.accept.push(None);
        (self.nfa.edges.len() - 1) as StateId
    }

    pub fn add_edge(&mut self, from: StateId, label: Label, to: StateId) {
        self.nfa.edges[from as usize].push((label, to));
    }

    pub fn set_accept(&mut self, state: StateId, tag: u32) {
        self.nfa.accept[state as usize] = Some(tag);
    }

    pub fn finish(mut self, start: StateId) -> Nfa {
        self.nfa.start = start;
        self.nfa
    }

    /// Adds a fragment for `ast`, expanding counted repetitions by duplication.
    pub fn fragment(&mut self, ast: &Ast) -> (StateId, StateId) {
        match &ast.kind {
            AstKind::Empty => self.epsilon(),
            AstKind::Literal(b) => self.bytes(ByteSet::singleton(*b)),
            AstKind::Dot => self.bytes(ByteSet::full()),
            AstKind::Class { set, negated } => {
                self.bytes(if *negated { set.complement() } else { *set })
            }
            AstKind::Concat(children) => {
                let frags: Vec<_> = children.iter().map(|c| self.fragment(c)).collect();
                self.chain(&frags)
            }
            AstKind::Union(children) => {
                let s = self.add_state();
                let e = self.add_state();
                for child in children {
                    let (cs, ce) = self.fragment(child);
                    self.add_edge(s, Label::Epsilon, cs);
                    self.add_edge(ce, Label::Epsilon, e);
                }
                (s, e)
            }
            AstKind::Star(child) => {
                let (cs, ce) = self.fragment(child);
                let s = self.add_state();
                let e = self.add_state();
                self.add_edge(s, Label::Epsilon, cs);
                self.add_edge(s, Label::Epsilon, e);
                self.add_edge(ce, Label::Epsilon, cs);
                self.add_edge(ce, Label::Epsilon, e);
                (s, e)
            }
            AstKind::Plus(child) => {
                let (cs, ce) = self.fragment(child);
                let s = self.add_state();
                let e = self.add_state();
                self.add_edge(s, Label::Epsilon, cs);
                self.add_edge(ce, Label::Epsilon, cs);
                self.add_edge(ce, Label::Epsilon, e);
                (s, e)
            }
            AstKind::Repeat(child, k) => self.repeat(child, *k, *k),
            AstKind::RepeatRange(child, k, m) => self.repeat(child, *k, *m),
        }
    }

    fn epsilon(&mut self) -> (StateId, StateId) {
        let s = self.add_state();
        let e = self.add_state();
        self.add_edge(s, Label::Epsilon, e);
        (s, e)
    }

    fn bytes(&mut self, set: ByteSet) -> (StateId, StateId) {
        let s = self.add_state();
        let e = self.add_state();
        self.add_edge(s, Label::Bytes(set), e);
        (s, e)
    }

    fn chain(&mut self, frags: &[(StateId, StateId)]) -> (StateId, StateId) {
        if frags.is_empty() {
            return self.epsilon();
        }
        for pair in frags.windows(2) {
            self.add_edge(pair[0].1, Label::Epsilon, pair[1].0);
        }
        (frags[0].0, frags[frags.len() - 1].1)
    }

    fn repeat(&mut self, child: &Ast, k: u32, m: u32) -> (StateId, StateId) {
        let mut frags = Vec::new();
        for _ in 0..k {
            frags.push(self.fragment(child));
        }
        for _ in k..m {
            let (cs, ce) = self.fragment(child);
            let s = self.add_state();
            let e = self.add_state();
            self.add_edge(s, Label::Epsilon, cs);
            self.add_edge(s, Label::Epsilon, e);
            self.add_edge(ce, Label::Epsilon, e);
            frags.push((s, e));
        }
        self.chain(&frags)
    }
}

/// Thompson NFA for `ast` with a single accepting state tagged 0.
pub fn thompson_nfa(ast: &Ast) -> Nfa {
    let mut b = NfaBuilder::new();
    let (s, e) = b.fragment(ast);
    b.set_accept(e, 0);
    b.finish(s)
}
