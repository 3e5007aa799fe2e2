//! Dense deterministic automata: subset construction, Moore minimization,
//! and product-based equivalence.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::bytes::{BitVec, ByteSet};
use crate::nfa::{Label, Nfa, StateId};
use crate::ruleset::ALPHABET_SIZE;

/// Default limit on constructed states.
pub const DEFAULT_STATE_CAP: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DfaError {
    #[error("state cap of {cap} exceeded during determinization")]
    StateCap { cap: usize },
}

/// Complete DFA over bytes with a dense `|Q| x 256` table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    table: Vec<StateId>,
    start: StateId,
    accept: Vec<bool>,
}

impl Dfa {
    /// Builds a DFA from a state-major table. Returns `None` when the table
    /// is not `|accept| * 256` long or references a missing state.
    pub fn from_parts(table: Vec<StateId>, start: StateId, accept: Vec<bool>) -> Option<Dfa> {
        let n = accept.len();
        if n == 0 || table.len() != n * ALPHABET_SIZE || start as usize >= n {
            return None;
        }
        if table.iter().any(|t| *t as usize >= n) {
            return None;
        }
        Some(Dfa {
            table,
            start,
            accept,
        })
    }

    pub fn state_count(&self) -> usize {
        self.accept.len()
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn table(&self) -> &[StateId] {
        &self.table
    }

    #[inline]
    pub fn next(&self, state: StateId, byte: u8) -> StateId {
        self.table[state as usize * ALPHABET_SIZE + byte as usize]
    }

    pub fn is_accepting(&self, state: StateId) -> bool {
        self.accept[state as usize]
    }

    pub fn accept_set(&self) -> &[bool] {
        &self.accept
    }

    pub fn run(&self, word: &[u8]) -> StateId {
        word.iter().fold(self.start, |s, b| self.next(s, *b))
    }

    pub fn accepts(&self, word: &[u8]) -> bool {
        self.is_accepting(self.run(word))
    }

    /// Partition of the byte alphabet into columns with identical transitions.
    pub fn byte_classes(&self) -> Vec<ByteSet> {
        let n = self.state_count();
        let mut by_column: BTreeMap<Vec<StateId>, ByteSet> = BTreeMap::new();
        for b in 0..=255u8 {
            let column: Vec<StateId> = (0..n)
                .map(|s| self.table[s * ALPHABET_SIZE + b as usize])
                .collect();
            by_column.entry(column).or_default().insert(b);
        }
        let mut classes: Vec<ByteSet> = by_column.into_values().collect();
        classes.sort_by_key(|c| c.iter().next());
        classes
    }
}

/// Byte partition induced by the labels of `nfa`.
fn nfa_byte_classes(nfa: &Nfa) -> Vec<ByteSet> {
    let mut class_of = [0u32; 256];
    let mut count = 1u32;
    let mut labels: Vec<ByteSet> = nfa
        .transitions()
        .filter_map(|(_, l, _)| match l {
            Label::Bytes(set) => Some(set),
            Label::Epsilon => None,
        })
        .collect();
    labels.sort();
    labels.dedup();
    for set in labels {
        let mut remap: BTreeMap<(u32, bool), u32> = BTreeMap::new();
        for b in 0..256usize {
            let key = (class_of[b], set.contains(b as u8));
            let next = remap.len() as u32;
            class_of[b] = *remap.entry(key).or_insert(next);
        }
        count = remap.len() as u32;
    }
    let mut classes = vec![ByteSet::empty(); count as usize];
    for b in 0..256usize {
        classes[class_of[b] as usize].insert(b as u8);
    }
    classes.retain(|c| !c.is_empty());
    classes
}

/// Determinizes `nfa`; each DFA state's output vector holds the tags of the
/// accepting NFA states in its subset.
pub fn subset_construct_tagged(
    nfa: &Nfa,
    tag_count: usize,
    cap: usize,
) -> Result<(Dfa, Vec<BitVec>), DfaError> {
    let classes = nfa_byte_classes(nfa);
    let mut seen = vec![false; nfa.state_count()];
    let mut start_set = vec![nfa.start()];
    nfa.epsilon_closure(&mut start_set, &mut seen);

    let mut ids: BTreeMap<Vec<StateId>, StateId> = BTreeMap::new();
    let mut sets: Vec<Vec<StateId>> = Vec::new();
    let mut table: Vec<StateId> = Vec::new();
    ids.insert(start_set.clone(), 0);
    sets.push(start_set);
    table.resize(ALPHABET_SIZE, 0);

    let mut todo = 0usize;
    while todo < sets.len() {
        for class in &classes {
            let rep = class.iter().next().unwrap();
            let mut next: Vec<StateId> = Vec::new();
            for &s in &sets[todo] {
                for (label, to) in nfa.edges(s) {
                    if let Label::Bytes(set) = label {
                        if set.contains(rep) && !seen[*to as usize] {
                            seen[*to as usize] = true;
                            next.push(*to);
                        }
                    }
                }
            }
            for &s in &next {
                seen[s as usize] = false;
            }
            nfa.epsilon_closure(&mut next, &mut seen);
            let target = match ids.get(&next) {
                Some(id) => *id,
                None => {
                    if sets.len() >= cap {
                        return Err(DfaError::StateCap { cap });
                    }
                    let id = sets.len() as StateId;
                    ids.insert(next.clone(), id);
                    sets.push(next);
                    table.resize(table.len() + ALPHABET_SIZE, 0);
                    id
                }
            };
            for b in class.iter() {
                table[todo * ALPHABET_SIZE + b as usize] = target;
            }
        }
        todo += 1;
    }

    let outputs: Vec<BitVec> = sets
        .iter()
        .map(|set| {
            let mut bits = BitVec::zeros(tag_count);
            for &s in set {
                if let Some(tag) = nfa.accept_tag(s) {
                    bits.set(tag as usize, true);
                }
            }
            bits
        })
        .collect();
    let accept = outputs.iter().map(BitVec::any).collect();
    Ok((
        Dfa {
            table,
            start: 0,
            accept,
        },
        outputs,
    ))
}

/// Subset construction with an explicit dead state for the empty subset.
pub fn subset_construct(nfa: &Nfa, cap: usize) -> Result<Dfa, DfaError> {
    let max_tag = (0..nfa.state_count() as StateId)
        .filter_map(|s| nfa.accept_tag(s))
        .max()
        .map_or(1, |t| t as usize + 1);
    subset_construct_tagged(nfa, max_tag, cap).map(|(dfa, _)| dfa)
}

/// Minimal DFA for the language of `dfa`.
pub fn minimize(dfa: &Dfa) -> Dfa {
    let outputs: Vec<BitVec> = dfa
        .accept
        .iter()
        .map(|a| {
            let mut bits = BitVec::zeros(1);
            bits.set(0, *a);
            bits
        })
        .collect();
    minimize_moore(dfa, &outputs).0
}

/// Moore-machine minimization: states are merged only when they agree on
/// their output vector and on the classes of all successors. Unreachable
/// states are dropped and the result is numbered in breadth-first order from
/// the start state, so isomorphic inputs give identical outputs.
pub fn minimize_moore(dfa: &Dfa, outputs: &[BitVec]) -> (Dfa, Vec<BitVec>) {
    let n = dfa.state_count();
    let reachable = reachable_states(dfa);
    let classes = dfa.byte_classes();
    let reps: Vec<u8> = classes.iter().map(|c| c.iter().next().unwrap()).collect();

    let mut block = vec![u32::MAX; n];
    let mut block_count = {
        let mut by_output: BTreeMap<&BitVec, u32> = BTreeMap::new();
        for &s in &reachable {
            let next = by_output.len() as u32;
            block[s as usize] = *by_output.entry(&outputs[s as usize]).or_insert(next);
        }
        by_output.len()
    };
    loop {
        let mut by_signature: BTreeMap<Vec<u32>, u32> = BTreeMap::new();
        let mut refined = vec![u32::MAX; n];
        for &s in &reachable {
            let mut sig = Vec::with_capacity(reps.len() + 1);
            sig.push(block[s as usize]);
            sig.extend(reps.iter().map(|b| block[dfa.next(s, *b) as usize]));
            let next = by_signature.len() as u32;
            refined[s as usize] = *by_signature.entry(sig).or_insert(next);
        }
        let count = by_signature.len();
        block = refined;
        if count == block_count {
            break;
        }
        block_count = count;
    }

    // Renumber blocks in BFS order from the start state.
    let mut new_id = vec![u32::MAX; block_count];
    let mut order: Vec<StateId> = Vec::with_capacity(block_count);
    let mut queue = VecDeque::new();
    new_id[block[dfa.start as usize] as usize] = 0;
    order.push(dfa.start);
    queue.push_back(dfa.start);
    while let Some(s) = queue.pop_front() {
        for b in 0..=255u8 {
            let t = dfa.next(s, b);
            let bt = block[t as usize] as usize;
            if new_id[bt] == u32::MAX {
                new_id[bt] = order.len() as u32;
                order.push(t);
                queue.push_back(t);
            }
        }
    }
    let mut table = Vec::with_capacity(order.len() * ALPHABET_SIZE);
    for &s in &order {
        for b in 0..=255u8 {
            table.push(new_id[block[dfa.next(s, b) as usize] as usize]);
        }
    }
    let new_outputs: Vec<BitVec> = order.iter().map(|s| outputs[*s as usize].clone()).collect();
    let accept = order.iter().map(|s| dfa.accept[*s as usize]).collect();
    (
        Dfa {
            table,
            start: 0,
            accept,
        },
        new_outputs,
    )
}

fn reachable_states(dfa: &Dfa) -> Vec<StateId> {
    let mut seen = vec![false; dfa.state_count()];
    let mut out = vec![dfa.start];
    seen[dfa.start as usize] = true;
    let mut i = 0;
    while i < out.len() {
        let s = out[i];
        for b in 0..=255u8 {
            let t = dfa.next(s, b);
            if !seen[t as usize] {
                seen[t as usize] = true;
                out.push(t);
            }
        }
        i += 1;
    }
    out
}

/// A shortest word accepted by exactly one of `a`, `b`, found by breadth-first
/// search of the product automaton. `None` means the languages are equal.
pub fn distinguishing_word(a: &Dfa, b: &Dfa) -> Option<Vec<u8>> {
    let mut parent: BTreeMap<(StateId, StateId), Option<((StateId, StateId), u8)>> =
        BTreeMap::new();
    let mut queue = VecDeque::new();
    let start = (a.start, b.start);
    parent.insert(start, None);
    queue.push_back(start);
    while let Some(pair) = queue.pop_front() {
        if a.is_accepting(pair.0) != b.is_accepting(pair.1) {
            let mut word = Vec::new();
            let mut cur = pair;
            while let Some(Some((prev, byte))) = parent.get(&cur) {
                word.push(*byte);
                cur = *prev;
            }
            word.reverse();
            return Some(word);
        }
        for byte in 0..=255u8 {
            let next = (a.next(pair.0, byte), b.next(pair.1, byte));
            if !parent.contains_key(&next) {
                parent.insert(next, Some((pair, byte)));
                queue.push_back(next);
            }
        }
    }
    None
}

pub fn equivalent(a: &Dfa, b: &Dfa) -> bool {
    distinguishing_word(a, b).is_none()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nfa::{thompson_nfa, NfaBuilder};
    use crate::parse_pattern;

    fn dfa(text: &str) -> Dfa {
        subset_construct(
            &thompson_nfa(&parse_pattern(text.as_bytes()).unwrap()),
            DEFAULT_STATE_CAP,
        )
        .unwrap()
    }

    #[test]
    fn literal_pair_has_four_states() {
        let d = dfa("ab");
        assert_eq!(d.state_count(), 4);
        assert!(d.accepts(b"ab"));
        assert!(!d.accepts(b"a") && !d.accepts(b"abb") && !d.accepts(b""));
        assert!(d.table().iter().all(|t| (*t as usize) < d.state_count()));
    }

    #[test]
    fn epsilon_only_nfa_accepts_empty_word() {
        let mut b = NfaBuilder::new();
        let s = b.add_state();
        let m = b.add_state();
        let e = b.add_state();
        b.add_edge(s, Label::Epsilon, m);
        b.add_edge(m, Label::Epsilon, e);
        b.set_accept(e, 0);
        let d = subset_construct(&b.finish(s), 10).unwrap();
        assert_eq!(d.state_count(), 2);
        assert_eq!(d.accept_set().iter().filter(|a| **a).count(), 1);
        assert!(d.accepts(b""));
        assert!(!d.accepts(b"x"));
    }

    #[test]
    fn cap_is_enforced() {
        let nfa = thompson_nfa(&parse_pattern(b".*a.{6}").unwrap());
        assert_eq!(
            subset_construct(&nfa, 50),
            Err(DfaError::StateCap { cap: 50 })
        );
        assert_eq!(
            minimize(&subset_construct(&nfa, 1000).unwrap()).state_count(),
            128
        );
    }

    #[test]
    fn minimize_is_idempotent_on_a_star() {
        let m = minimize(&dfa("a*"));
        assert_eq!(m.state_count(), 2);
        assert_eq!(minimize(&m), m);
    }

    #[test]
    fn bisimilar_accepting_states_merge() {
        let d = dfa("ab|ac");
        let m = minimize(&d);
        assert!(m.state_count() < d.state_count());
        assert_eq!(m.state_count(), 4);
        assert!(equivalent(&d, &m));
    }

    #[test]
    fn chain_language_split_decisions() {
        let m = minimize(&dfa(".*ab.*cd.*"));
        assert_eq!(m.state_count(), 5);
        assert!(m.accepts(b"abcd"));
        assert!(!m.accepts(b"abdc"));
        assert!(!m.accepts(b""));
    }

    #[test]
    fn distinguishing_word_is_shortest() {
        assert_eq!(
            distinguishing_word(&dfa("a|b"), &dfa("a")),
            Some(b"b".to_vec())
        );
        assert_eq!(distinguishing_word(&dfa("(a|b)*"), &dfa("(a*b*)*")), None);
    }
}
