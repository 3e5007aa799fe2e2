//! Differential testing: counter machine against the oracle and the
//! classical pipeline, over every short word and a batch of random ones.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use recounter_core::{
    classical_dfa, enumerate_words_with_budget, CompileConfig, CounterMachine, DecomposedRule, Dfa,
    EventKind, MachineError, MatchEvent, Oracle, OracleError, Ruleset, ScanState, UnitMode,
    WindowMode,
};
use thiserror::Error;

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub alphabet: Vec<u8>,
    pub max_len: usize,
    pub random: usize,
    pub random_max_len: usize,
    pub seed: u64,
    pub window: WindowMode,
    pub state_cap: usize,
    pub word_budget: u64,
    /// Findings kept per category; counts are always complete.
    pub keep: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            alphabet: b"abcd".to_vec(),
            max_len: 10,
            random: 100_000,
            random_max_len: 64,
            seed: 0,
            window: WindowMode::Paper,
            state_cap: recounter_core::DEFAULT_STATE_CAP,
            word_budget: recounter_core::oracle::DEFAULT_WORD_BUDGET,
            keep: 1000,
        }
    }
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FindingKind {
    /// Machine and oracle disagree on membership.
    MachineVsOracle,
    /// Both accept but the first latch is not at the earliest accepting prefix.
    Offset,
    /// Oracle and classical pipeline disagree.
    OracleVsClassical,
    /// A paper-mode window missed a match the oracle accepts.
    PaperDivergence,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Finding {
    pub kind: FindingKind,
    pub rule: usize,
    pub word: Vec<u8>,
    pub machine: bool,
    pub oracle: bool,
}

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub exhaustive_words: u64,
    pub random_words: u64,
    pub disagreement_count: u64,
    pub disagreements: Vec<Finding>,
    pub divergence_count: u64,
    pub divergences: Vec<Finding>,
    /// False when the classical pipeline hit the state cap and was skipped.
    pub classical_checked: bool,
}

impl VerifyReport {
    pub fn words_checked(&self) -> u64 {
        self.exhaustive_words + self.random_words
    }

    pub fn passed(&self) -> bool {
        self.disagreement_count == 0
    }
}

/// Reusable checker for one ruleset.
pub struct Differential {
    machine: CounterMachine,
    oracle: Oracle,
    classical: Vec<Option<Dfa>>,
    paper_window: Vec<bool>,
    state: ScanState,
    events: Vec<MatchEvent>,
    keep: usize,
}

impl Differential {
    pub fn new(
        ruleset: &Ruleset,
        window: WindowMode,
        state_cap: usize,
        keep: usize,
    ) -> Result<Differential, VerifyError> {
        let machine = CounterMachine::compile(
            ruleset,
            CompileConfig {
                window_mode: window,
                state_cap,
            },
        )?;
        let oracle = Oracle::for_ruleset(ruleset)?;
        let classical = ruleset
            .rules
            .iter()
            .map(|r| classical_dfa(&Ruleset::new(vec![r.clone()], ruleset.mode), state_cap).ok())
            .collect();
        let paper_window = (0..ruleset.n())
            .map(|r| {
                let stage0 = machine.rule_units(r)[0].mode == UnitMode::GapWindowPaper;
                let counted = machine
                    .counted_units()
                    .iter()
                    .any(|c| c.rule_id as usize == r && c.mode == UnitMode::GapWindowPaper);
                stage0 || counted
            })
            .collect();
        let state = machine.new_scan_state();
        Ok(Differential {
            machine,
            oracle,
            classical,
            paper_window,
            state,
            events: Vec::new(),
            keep,
        })
    }

    pub fn machine(&self) -> &CounterMachine {
        &self.machine
    }

    pub fn oracle(&self) -> &Oracle {
        &self.oracle
    }

    pub fn check(&mut self, word: &[u8], report: &mut VerifyReport) {
        self.machine.reset(&mut self.state);
        self.events.clear();
        let events = &mut self.events;
        for &b in word {
            self.machine
                .step_with(&mut self.state, b, &mut |e| events.push(e));
        }
        let verdict = self.oracle.verdict(word);
        let out = self.state.output();
        let record = |kind, rule, machine, oracle, report: &mut VerifyReport| {
            let finding = Finding {
                kind,
                rule,
                word: word.to_vec(),
                machine,
                oracle,
            };
            let (count, list) = if kind == FindingKind::PaperDivergence {
                (&mut report.divergence_count, &mut report.divergences)
            } else {
                (&mut report.disagreement_count, &mut report.disagreements)
            };
            *count += 1;
            if list.len() < self.keep {
                list.push(finding);
            }
        };
        for rule in 0..verdict.earliest.len() {
            let m = out.rule(rule);
            let o = verdict.matched(rule);
            if m != o {
                let kind = if !m && self.paper_window[rule] {
                    FindingKind::PaperDivergence
                } else {
                    FindingKind::MachineVsOracle
                };
                record(kind, rule, m, o, report);
            } else if m {
                let latch = self
                    .events
                    .iter()
                    .find(|e| e.kind == EventKind::RuleMatch && e.rule_id as usize == rule)
                    .map(|e| e.offset as usize);
                if latch != verdict.earliest[rule] && !self.paper_window[rule] {
                    record(FindingKind::Offset, rule, m, o, report);
                }
            }
            if let Some(dfa) = &self.classical[rule] {
                if dfa.accepts(word) != o {
                    record(FindingKind::OracleVsClassical, rule, m, o, report);
                }
            }
        }
        if out.any() != verdict.any() && !self.paper_window.iter().any(|w| *w) {
            record(
                FindingKind::MachineVsOracle,
                verdict.earliest.len(),
                out.any(),
                verdict.any(),
                report,
            );
        }
    }

    fn classical_checked(&self) -> bool {
        self.classical.iter().all(Option::is_some)
    }
}

/// Runs the full differential suite for `ruleset`.
pub fn run_verify(ruleset: &Ruleset, config: &VerifyConfig) -> Result<VerifyReport, VerifyError> {
    let mut diff = Differential::new(ruleset, config.window, config.state_cap, config.keep)?;
    let mut report = VerifyReport {
        classical_checked: diff.classical_checked(),
        ..VerifyReport::default()
    };
    let mut words =
        enumerate_words_with_budget(&config.alphabet, config.max_len, config.word_budget)?;
    while let Some(word) = words.advance() {
        diff.check(word, &mut report);
        report.exhaustive_words += 1;
    }
    let mut rng = StdRng::seed_from_u64(config.seed);
    let mut word = Vec::with_capacity(config.random_max_len);
    for _ in 0..config.random {
        let len = rng.gen_range(0..=config.random_max_len);
        word.clear();
        word.extend((0..len).map(|_| config.alphabet[rng.gen_range(0..config.alphabet.len())]));
        diff.check(&word, &mut report);
        report.random_words += 1;
    }
    Ok(report)
}

/// True if two prefix ends of `rule` in `word` lie closer than the rule's
/// window expiry, so a single paper-mode counter cannot track both.
pub fn windows_overlap(oracle: &Oracle, rule: &DecomposedRule, word: &[u8]) -> bool {
    let Some(gap) = &rule.gap else { return false };
    let ends = oracle.prefix_ends(rule.rule_id, word);
    ends.windows(2).any(|p| p[1] - p[0] < gap.m_prime as usize)
}

/// Printable form of a word for reports.
pub fn show_word(word: &[u8]) -> String {
    word.escape_ascii().to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use recounter_core::parse_ruleset;

    fn config(alphabet: &[u8], max_len: usize, window: WindowMode) -> VerifyConfig {
        VerifyConfig {
            alphabet: alphabet.to_vec(),
            max_len,
            random: 200,
            random_max_len: 20,
            window,
            ..Default::default()
        }
    }

    #[test]
    fn chain_rule_has_no_disagreements() {
        let rs = parse_ruleset(b".*ab.*cd.*").unwrap();
        let report = run_verify(&rs, &config(b"abcd", 6, WindowMode::Paper)).unwrap();
        assert!(report.passed(), "{:?}", report.disagreements);
        assert!(report.classical_checked);
        assert_eq!(report.words_checked(), 5461 + 200);
    }

    #[test]
    fn paper_mode_divergences_are_flagged_not_failed() {
        let rs = parse_ruleset(b".*ab[^z]{1,3}cd.*").unwrap();
        let paper = run_verify(&rs, &config(b"abcdz", 8, WindowMode::Paper)).unwrap();
        assert!(paper.passed(), "{:?}", paper.disagreements);
        assert!(paper.divergence_count > 0);
        let oracle = Oracle::for_ruleset(&rs).unwrap();
        for f in &paper.divergences {
            assert!(
                windows_overlap(&oracle, &rs.rules[0], &f.word),
                "{}",
                show_word(&f.word)
            );
        }
        let exact = run_verify(&rs, &config(b"abcdz", 8, WindowMode::Exact)).unwrap();
        assert!(exact.passed());
        assert_eq!(exact.divergence_count, 0);
    }
}
