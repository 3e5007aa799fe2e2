//! Moore-style DFAs whose states carry detector output bits, the
//! Aho-Corasick keyword automaton, and the combined detector automaton that
//! feeds the counter bank.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::ast::Ast;
use crate::bytes::{BitVec, ByteSet};
use crate::dfa::{minimize_moore, subset_construct_tagged, Dfa, DfaError};
use crate::nfa::{Label, NfaBuilder, StateId};
use crate::ruleset::{Ruleset, ALPHABET_SIZE};

/// What a detector output reports about the input read so far.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChannelKind {
    /// The input ends with a word of the rule's prefix language.
    PrefixEnd,
    /// The input ends with chain word `stage`.
    ChainWordEnd(u32),
    /// The last byte is excluded from the rule's gap.
    GapForbidden,
    /// The input ends with the head of a counted prefix.
    CountArm,
    /// The last byte is outside a counted prefix's class.
    CountBreak,
    /// The input ends with the literal tail of a counted prefix.
    CountTailEnd,
}

impl ChannelKind {
    pub fn code(self) -> (u8, u32) {
        match self {
            ChannelKind::PrefixEnd => (0, 0),
            ChannelKind::ChainWordEnd(stage) => (1, stage),
            ChannelKind::GapForbidden => (2, 0),
            ChannelKind::CountArm => (3, 0),
            ChannelKind::CountBreak => (4, 0),
            ChannelKind::CountTailEnd => (5, 0),
        }
    }

    pub fn from_code(kind: u8, stage: u32) -> Option<ChannelKind> {
        Some(match kind {
            0 => ChannelKind::PrefixEnd,
            1 => ChannelKind::ChainWordEnd(stage),
            2 => ChannelKind::GapForbidden,
            3 => ChannelKind::CountArm,
            4 => ChannelKind::CountBreak,
            5 => ChannelKind::CountTailEnd,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::PrefixEnd => "prefix_end",
            ChannelKind::ChainWordEnd(_) => "chain_word_end",
            ChannelKind::GapForbidden => "gap_forbidden",
            ChannelKind::CountArm => "count_arm",
            ChannelKind::CountBreak => "count_break",
            ChannelKind::CountTailEnd => "count_tail_end",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Channel {
    pub rule_id: u32,
    pub kind: ChannelKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("keyword {index} is empty")]
    EmptyWord { index: usize },
    #[error(transparent)]
    Dfa(#[from] DfaError),
}

/// DFA plus a per-state output vector over a named channel directory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnotatedDfa {
    dfa: Dfa,
    outputs: Vec<BitVec>,
    channels: Vec<Channel>,
}

impl AnnotatedDfa {
    /// Returns `None` if the output table or channel directory is malformed.
    pub fn from_parts(
        dfa: Dfa,
        outputs: Vec<BitVec>,
        channels: Vec<Channel>,
    ) -> Option<AnnotatedDfa> {
        if outputs.len() != dfa.state_count() || outputs.iter().any(|o| o.len() != channels.len()) {
            return None;
        }
        let mut sorted = channels.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != channels.len() {
            return None;
        }
        Some(AnnotatedDfa {
            dfa,
            outputs,
            channels,
        })
    }

    /// Like [`from_parts`](Self::from_parts) for trusted parts, making a
    /// state accepting iff some channel is set in it.
    pub fn with_output_acceptance(
        dfa: Dfa,
        outputs: Vec<BitVec>,
        channels: Vec<Channel>,
    ) -> AnnotatedDfa {
        let accept = outputs.iter().map(BitVec::any).collect();
        let dfa =
            Dfa::from_parts(dfa.table().to_vec(), dfa.start(), accept).expect("table unchanged");
        AnnotatedDfa::from_parts(dfa, outputs, channels).expect("consistent detector parts")
    }

    pub fn dfa(&self) -> &Dfa {
        &self.dfa
    }

    pub fn state_count(&self) -> usize {
        self.dfa.state_count()
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn channel_index(&self, rule_id: u32, kind: ChannelKind) -> Option<usize> {
        self.channels
            .iter()
            .position(|c| c.rule_id == rule_id && c.kind == kind)
    }

    #[inline]
    pub fn output(&self, state: StateId) -> &BitVec {
        &self.outputs[state as usize]
    }

    pub fn outputs(&self) -> &[BitVec] {
        &self.outputs
    }

    /// Runs `word`; returns acceptance of the final state and one output
    /// vector per consumed byte.
    pub fn run(&self, word: &[u8]) -> (bool, Vec<BitVec>) {
        let mut state = self.dfa.start();
        let mut trace = Vec::with_capacity(word.len());
        for &b in word {
            state = self.dfa.next(state, b);
            trace.push(self.outputs[state as usize].clone());
        }
        (self.dfa.is_accepting(state), trace)
    }
}

/// Keyword automaton over `(word, channel)` entries: a trie completed with
/// failure transitions into a dense DFA. Returns the DFA and its outputs.
fn keyword_automaton(
    entries: &[(Vec<u8>, usize)],
    width: usize,
) -> Result<(Dfa, Vec<BitVec>), BuildError> {
    // Trie with dense goto rows; u32::MAX marks a missing edge.
    const NONE: StateId = StateId::MAX;
    let mut goto: Vec<[StateId; 256]> = vec![[NONE; 256]];
    let mut outputs = vec![BitVec::zeros(width)];
    for (index, (word, channel)) in entries.iter().enumerate() {
        if word.is_empty() {
            return Err(BuildError::EmptyWord { index });
        }
        let mut node = 0usize;
        for &b in word {
            let next = goto[node][b as usize];
            node = if next == NONE {
                goto.push([NONE; 256]);
                outputs.push(BitVec::zeros(width));
                let id = goto.len() - 1;
                goto[node][b as usize] = id as StateId;
                id
            } else {
                next as usize
            };
        }
        outputs[node].set(*channel, true);
    }

    // Breadth-first failure links; every missing goto edge is resolved
    // through the failure state, giving a complete transition table.
    let n = goto.len();
    let mut fail = vec![0 as StateId; n];
    let mut table = vec![0 as StateId; n * ALPHABET_SIZE];
    let mut queue = VecDeque::new();
    for b in 0..ALPHABET_SIZE {
        let child = goto[0][b];
        if child == NONE {
            table[b] = 0;
        } else {
            table[b] = child;
            fail[child as usize] = 0;
            queue.push_back(child);
        }
    }
    while let Some(s) = queue.pop_front() {
        let s = s as usize;
        let inherited = outputs[fail[s] as usize].clone();
        outputs[s].or_assign(&inherited);
        for b in 0..ALPHABET_SIZE {
            let child = goto[s][b];
            if child == NONE {
                table[s * ALPHABET_SIZE + b] = table[fail[s] as usize * ALPHABET_SIZE + b];
            } else {
                fail[child as usize] = table[fail[s] as usize * ALPHABET_SIZE + b];
                table[s * ALPHABET_SIZE + b] = child;
                queue.push_back(child);
            }
        }
    }
    let accept = outputs.iter().map(BitVec::any).collect();
    let dfa = Dfa::from_parts(table, 0, accept).expect("trie table is complete");
    Ok((dfa, outputs))
}

/// Aho-Corasick automaton for `words`. Channel `i` belongs to `words[i]`
/// (reported as rule `i`, stage 0) and is set in every state reached right
/// after an occurrence of that word ends. Duplicate words get separate
/// channels that fire together.
pub fn aho_corasick(words: &[Vec<u8>]) -> Result<AnnotatedDfa, BuildError> {
    let entries: Vec<(Vec<u8>, usize)> = words
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, w)| (w, i))
        .collect();
    let (dfa, outputs) = keyword_automaton(&entries, words.len())?;
    let channels = (0..words.len())
        .map(|i| Channel {
            rule_id: i as u32,
            kind: ChannelKind::ChainWordEnd(0),
        })
        .collect();
    Ok(AnnotatedDfa {
        dfa,
        outputs,
        channels,
    })
}

/// Reachable product of two Moore machines over the same channel width;
/// outputs are OR-ed.
fn product(
    a: &Dfa,
    a_out: &[BitVec],
    b: &Dfa,
    b_out: &[BitVec],
    cap: usize,
) -> Result<(Dfa, Vec<BitVec>), DfaError> {
    let mut ids: BTreeMap<(StateId, StateId), StateId> = BTreeMap::new();
    let mut pairs = vec![(a.start(), b.start())];
    ids.insert(pairs[0], 0);
    let mut table: Vec<StateId> = Vec::new();
    let mut i = 0;
    while i < pairs.len() {
        let (sa, sb) = pairs[i];
        for byte in 0..=255u8 {
            let next = (a.next(sa, byte), b.next(sb, byte));
            let id = match ids.get(&next) {
                Some(id) => *id,
                None => {
                    if pairs.len() >= cap {
                        return Err(DfaError::StateCap { cap });
                    }
                    let id = pairs.len() as StateId;
                    ids.insert(next, id);
                    pairs.push(next);
                    id
                }
            };
            table.push(id);
        }
        i += 1;
    }
    let outputs: Vec<BitVec> = pairs
        .iter()
        .map(|(sa, sb)| {
            let mut o = a_out[*sa as usize].clone();
            o.or_assign(&b_out[*sb as usize]);
            o
        })
        .collect();
    let accept = outputs.iter().map(BitVec::any).collect();
    Ok((
        Dfa::from_parts(table, 0, accept).expect("product table is complete"),
        outputs,
    ))
}

/// Channel directory for `ruleset`, in rule order.
pub fn block1_channels(ruleset: &Ruleset) -> Vec<Channel> {
    let mut channels = Vec::new();
    for rule in &ruleset.rules {
        let id = rule.rule_id as u32;
        let mut push = |kind| channels.push(Channel { rule_id: id, kind });
        match &rule.counted {
            Some(counted) => {
                push(ChannelKind::CountArm);
                if !counted.class.is_full() {
                    push(ChannelKind::CountBreak);
                }
                if !counted.tail.is_empty() {
                    push(ChannelKind::CountTailEnd);
                }
            }
            None => push(ChannelKind::PrefixEnd),
        }
        for stage in 0..rule.chain.len() {
            push(ChannelKind::ChainWordEnd(stage as u32));
        }
        if rule.gap.as_ref().is_some_and(|g| !g.forbidden.is_empty()) {
            push(ChannelKind::GapForbidden);
        }
    }
    channels
}

/// Builds the detector automaton for a ruleset.
///
/// Regex detectors (`.*R`, `.*head`, single-byte class detectors) are
/// determinized together from one Thompson NFA; all literal words go through
/// the keyword automaton. The two are combined by product construction and
/// minimized with output-respecting state equivalence.
pub fn build_block1(ruleset: &Ruleset, cap: usize) -> Result<AnnotatedDfa, BuildError> {
    let channels = block1_channels(ruleset);
    let width = channels.len();
    let index = |rule: usize, kind| {
        channels
            .iter()
            .position(|c| c.rule_id == rule as u32 && c.kind == kind)
            .expect("channel directory covers every detector")
    };

    let mut regex_detectors: Vec<(Ast, usize)> = Vec::new();
    let mut keywords: Vec<(Vec<u8>, usize)> = Vec::new();
    for rule in &ruleset.rules {
        let id = rule.rule_id;
        match &rule.counted {
            Some(counted) => {
                regex_detectors.push((counted.head.clone(), index(id, ChannelKind::CountArm)));
                if !counted.class.is_full() {
                    let outside = Ast::class(counted.class.complement(), false);
                    regex_detectors.push((outside, index(id, ChannelKind::CountBreak)));
                }
                if !counted.tail.is_empty() {
                    keywords.push((counted.tail.clone(), index(id, ChannelKind::CountTailEnd)));
                }
            }
            None => regex_detectors.push((rule.prefix.clone(), index(id, ChannelKind::PrefixEnd))),
        }
        for (stage, word) in rule.chain.iter().enumerate() {
            keywords.push((
                word.clone(),
                index(id, ChannelKind::ChainWordEnd(stage as u32)),
            ));
        }
        if let Some(gap) = rule.gap.as_ref().filter(|g| !g.forbidden.is_empty()) {
            regex_detectors.push((
                Ast::class(gap.forbidden, false),
                index(id, ChannelKind::GapForbidden),
            ));
        }
    }

    let mut builder = NfaBuilder::new();
    let start = builder.add_state();
    builder.add_edge(start, Label::Bytes(ByteSet::full()), start);
    for (ast, channel) in &regex_detectors {
        let (s, e) = builder.fragment(ast);
        builder.add_edge(start, Label::Epsilon, s);
        builder.set_accept(e, *channel as u32);
    }
    let nfa = builder.finish(start);
    let (detectors, detector_out) = subset_construct_tagged(&nfa, width, cap)?;
    let (keyword_dfa, keyword_out) = keyword_automaton(&keywords, width)?;
    let (joined, joined_out) = product(&detectors, &detector_out, &keyword_dfa, &keyword_out, cap)?;
    let (dfa, outputs) = minimize_moore(&joined, &joined_out);
    Ok(AnnotatedDfa::with_output_acceptance(dfa, outputs, channels))
}
