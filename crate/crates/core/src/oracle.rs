//! Brute-force membership for the rule language, used as ground truth.
//!
//! The oracle shares nothing with the counter machine except the parsed
//! rule. The prefix condition `word[0..p) ∈ L(.*R)` is decided by a DFA
//! built for that rule alone; everything after it is position enumeration.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::ast::Ast;
use crate::decompose::DecomposedRule;
use crate::dfa::{subset_construct, Dfa, DfaError, DEFAULT_STATE_CAP};
use crate::nfa::thompson_nfa;
use crate::ruleset::Ruleset;

/// Default cap on the number of enumerated words.
pub const DEFAULT_WORD_BUDGET: u64 = 50_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("rule {0} has a gap; use the gap oracle")]
    GapRule(usize),
    #[error("rule {0} has no gap")]
    NotGapRule(usize),
    #[error(transparent)]
    Dfa(#[from] DfaError),
    #[error("enumeration of {words} words exceeds the budget of {budget}")]
    Budget { words: u128, budget: u64 },
    #[error("empty alphabet")]
    EmptyAlphabet,
}

/// Per rule, the length of the earliest accepting prefix, if any.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OracleVerdict {
    pub earliest: Vec<Option<usize>>,
}

impl OracleVerdict {
    pub fn matched(&self, rule: usize) -> bool {
        self.earliest[rule].is_some()
    }

    pub fn any(&self) -> bool {
        self.earliest.iter().any(Option::is_some)
    }

    /// Per-rule bits followed by their disjunction, the shape of a machine output.
    pub fn to_bits(&self) -> Vec<bool> {
        let mut bits: Vec<bool> = self.earliest.iter().map(Option::is_some).collect();
        bits.push(self.any());
        bits
    }
}

/// Precompiled oracle for a set of rules.
#[derive(Clone, Debug)]
pub struct Oracle {
    rules: Vec<(DecomposedRule, Dfa)>,
}

impl Oracle {
    pub fn new(rules: &[DecomposedRule]) -> Result<Oracle, OracleError> {
        let rules = rules
            .iter()
            .map(|r| Ok((r.clone(), prefix_dfa(&r.prefix)?)))
            .collect::<Result<_, OracleError>>()?;
        Ok(Oracle { rules })
    }

    pub fn for_ruleset(ruleset: &Ruleset) -> Result<Oracle, OracleError> {
        Oracle::new(&ruleset.rules)
    }

    pub fn verdict(&self, word: &[u8]) -> OracleVerdict {
        OracleVerdict {
            earliest: self
                .rules
                .iter()
                .map(|(r, d)| earliest(r, d, word))
                .collect(),
        }
    }

    /// Positions `p` with `word[0..p) ∈ L(.*R)` for rule `rule`.
    pub fn prefix_ends(&self, rule: usize, word: &[u8]) -> Vec<usize> {
        prefix_positions(&self.rules[rule].1, word)
            .iter()
            .enumerate()
            .filter_map(|(p, hit)| hit.then_some(p))
            .collect()
    }
}

fn prefix_dfa(prefix: &Ast) -> Result<Dfa, DfaError> {
    let pattern = Ast::concat(vec![Ast::star(Ast::dot()), prefix.clone()]);
    subset_construct(&thompson_nfa(&pattern), DEFAULT_STATE_CAP)
}

fn prefix_positions(dfa: &Dfa, word: &[u8]) -> Vec<bool> {
    let mut hits = vec![false; word.len() + 1];
    let mut s = dfa.start();
    hits[0] = dfa.is_accepting(s);
    for (i, &b) in word.iter().enumerate() {
        s = dfa.next(s, b);
        hits[i + 1] = dfa.is_accepting(s);
    }
    hits
}

fn earliest(rule: &DecomposedRule, dfa: &Dfa, word: &[u8]) -> Option<usize> {
    let starts = prefix_positions(dfa, word);
    let n = word.len();
    let mut reach = vec![false; n + 1];
    let mut chain = rule.chain.as_slice();
    match &rule.gap {
        Some(gap) => {
            let beta = &chain[0];
            for p in (0..=n).filter(|p| starts[*p]) {
                for g in gap.k as usize..=gap.m as usize {
                    let e = p + g;
                    if e + beta.len() > n {
                        break;
                    }
                    let clean = word[p..e].iter().all(|b| !gap.forbidden.contains(*b));
                    if clean && word[e..e + beta.len()] == beta[..] {
                        reach[e + beta.len()] = true;
                    }
                }
            }
            chain = &chain[1..];
        }
        None => reach = starts,
    }
    for w in chain {
        let mut next = vec![false; n + 1];
        for q in 0..=n.saturating_sub(w.len()) {
            if q + w.len() <= n && word[q..q + w.len()] == w[..] && reach[..=q].iter().any(|r| *r) {
                next[q + w.len()] = true;
            }
        }
        reach = next;
    }
    reach.iter().position(|r| *r)
}

/// Verdict for a single chain rule without a gap.
pub fn oracle_match(rule: &DecomposedRule, word: &[u8]) -> Result<OracleVerdict, OracleError> {
    if rule.gap.is_some() {
        return Err(OracleError::GapRule(rule.rule_id));
    }
    Ok(OracleVerdict {
        earliest: vec![earliest(rule, &prefix_dfa(&rule.prefix)?, word)],
    })
}

/// Verdict for a single rule with a gap before its first chain word.
pub fn oracle_match_gap(rule: &DecomposedRule, word: &[u8]) -> Result<OracleVerdict, OracleError> {
    if rule.gap.is_none() {
        return Err(OracleError::NotGapRule(rule.rule_id));
    }
    Ok(OracleVerdict {
        earliest: vec![earliest(rule, &prefix_dfa(&rule.prefix)?, word)],
    })
}

/// Number of words of length `0..=max_len` over `alphabet_len` symbols.
pub fn word_count(alphabet_len: usize, max_len: usize) -> u128 {
    let mut total: u128 = 0;
    let mut layer: u128 = 1;
    for _ in 0..=max_len {
        total = total.saturating_add(layer);
        layer = layer.saturating_mul(alphabet_len as u128);
    }
    total
}

/// All words of length `0..=max_len` in length-lex order.
pub fn enumerate_words(alphabet: &[u8], max_len: usize) -> Result<Words, OracleError> {
    enumerate_words_with_budget(alphabet, max_len, DEFAULT_WORD_BUDGET)
}

pub fn enumerate_words_with_budget(
    alphabet: &[u8],
    max_len: usize,
    budget: u64,
) -> Result<Words, OracleError> {
    if alphabet.is_empty() {
        return Err(OracleError::EmptyAlphabet);
    }
    let words = word_count(alphabet.len(), max_len);
    if words > budget as u128 {
        return Err(OracleError::Budget { words, budget });
    }
    Ok(Words {
        alphabet: alphabet.to_vec(),
        max_len,
        digits: Vec::new(),
        word: Vec::new(),
        started: false,
    })
}

/// Length-lex word iterator. [`Words::advance`] avoids allocating per word.
#[derive(Clone, Debug)]
pub struct Words {
    alphabet: Vec<u8>,
    max_len: usize,
    digits: Vec<usize>,
    word: Vec<u8>,
    started: bool,
}

impl Words {
    pub fn advance(&mut self) -> Option<&[u8]> {
        if !self.started {
            self.started = true;
            return Some(&self.word);
        }
        let top = self.alphabet.len() - 1;
        let mut i = self.digits.len();
        while i > 0 && self.digits[i - 1] == top {
            i -= 1;
        }
        if i == 0 {
            if self.digits.len() == self.max_len {
                return None;
            }
            self.digits = vec![0; self.digits.len() + 1];
        } else {
            self.digits[i - 1] += 1;
            for d in &mut self.digits[i..] {
                *d = 0;
            }
        }
        self.word.clear();
        self.word
            .extend(self.digits.iter().map(|d| self.alphabet[*d]));
        Some(&self.word)
    }
}

impl Iterator for Words {
    type Item = Vec<u8>;

    fn next(&mut self) -> Option<Vec<u8>> {
        self.advance().map(<[u8]>::to_vec)
    }
}
