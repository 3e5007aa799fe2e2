//! The counter machine: detector DFA, counter/trigger bank and latched
//! output gates, compiled from a [`Ruleset`] and stepped one byte at a time.
//!
//! Per rule the machine keeps one unit per chain word. A unit is armed by
//! the previous stage (the prefix detector for stage 0), counts the bytes
//! read since it was armed, and fires when its word ends at least `|word|`
//! bytes after arming, so the word cannot overlap whatever armed it. The
//! last stage's fire latches the rule output; the extra output bit is the
//! disjunction of all rule outputs.
//!
//! Plain units only arm on the first trigger. The gate `counter >= |word|`
//! is monotone in the age of the arm, so the earliest arm decides the
//! existential condition exactly and one saturating counter suffices.
//!
//! Gap units (`[^c]{k,m}w`) come in two flavours. The paper-style unit has
//! a single counter with presets `k+|w|`, `m+|w|` and expiry `m+|w|+1`; it
//! ignores new prefixes while a window is open, which makes it sound but
//! incomplete when windows overlap. The exact unit keeps one bit per
//! possible gap length and a `|w|+1` bit delay line, and is complete.
//! Counted prefixes in double-counting mode reuse the same window logic.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::annotated::{build_block1, AnnotatedDfa, BuildError, ChannelKind};
use crate::bytes::BitVec;
use crate::dfa::DEFAULT_STATE_CAP;
use crate::nfa::StateId;
use crate::ruleset::Ruleset;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum WindowMode {
    /// Single counter per window.
    #[default]
    Paper,
    /// One bit per open window.
    Exact,
}

impl WindowMode {
    pub fn name(self) -> &'static str {
        match self {
            WindowMode::Paper => "paper",
            WindowMode::Exact => "exact",
        }
    }

    pub fn from_name(name: &str) -> Option<WindowMode> {
        match name {
            "paper" => Some(WindowMode::Paper),
            "exact" => Some(WindowMode::Exact),
            _ => None,
        }
    }

    fn unit_mode(self) -> UnitMode {
        match self {
            WindowMode::Paper => UnitMode::GapWindowPaper,
            WindowMode::Exact => UnitMode::GapWindowExact,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnitMode {
    PlainThreshold,
    GapWindowPaper,
    GapWindowExact,
}

impl UnitMode {
    pub fn code(self) -> u8 {
        match self {
            UnitMode::PlainThreshold => 0,
            UnitMode::GapWindowPaper => 1,
            UnitMode::GapWindowExact => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<UnitMode> {
        match code {
            0 => Some(UnitMode::PlainThreshold),
            1 => Some(UnitMode::GapWindowPaper),
            2 => Some(UnitMode::GapWindowExact),
            _ => None,
        }
    }

    pub fn is_window(self) -> bool {
        self != UnitMode::PlainThreshold
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CompileConfig {
    pub window_mode: WindowMode,
    pub state_cap: usize,
}

impl CompileConfig {
    pub fn new(window_mode: WindowMode) -> CompileConfig {
        CompileConfig {
            window_mode,
            state_cap: DEFAULT_STATE_CAP,
        }
    }
}

/// One counter of the bank.
///
/// Presets are `[threshold, 0, 0]` for plain units and
/// `[k + |w|, m + |w|, m + |w| + 1]` (lower, upper, expiry) for windows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CounterUnit {
    pub rule_id: u32,
    pub stage: u32,
    pub mode: UnitMode,
    pub presets: [u32; 3],
    /// Length of the word whose end this unit gates on.
    pub word_len: u32,
}

impl CounterUnit {
    pub fn plain(rule_id: u32, stage: u32, word_len: u32) -> CounterUnit {
        CounterUnit {
            rule_id,
            stage,
            mode: UnitMode::PlainThreshold,
            presets: [word_len, 0, 0],
            word_len,
        }
    }

    pub fn window(
        rule_id: u32,
        stage: u32,
        mode: UnitMode,
        k: u32,
        m: u32,
        word_len: u32,
    ) -> CounterUnit {
        CounterUnit {
            rule_id,
            stage,
            mode,
            presets: [k + word_len, m + word_len, m + word_len + 1],
            word_len,
        }
    }

    pub fn threshold(&self) -> u32 {
        self.presets[0]
    }

    pub fn lower(&self) -> u32 {
        self.presets[0]
    }

    pub fn upper(&self) -> u32 {
        self.presets[1]
    }

    pub fn expiry(&self) -> u32 {
        self.presets[2]
    }

    /// Gap bounds `(k, m)` of a window unit.
    pub fn gap_bounds(&self) -> (u32, u32) {
        (
            self.presets[0] - self.word_len,
            self.presets[1] - self.word_len,
        )
    }

    pub fn largest_preset(&self) -> u32 {
        self.presets.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PrefixSource {
    Channel(usize),
    Counted(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Wiring {
    word: usize,
    forbidden: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct CountedWiring {
    arm: usize,
    brk: Option<usize>,
    tail: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct RulePlan {
    prefix: PrefixSource,
    units: core::ops::Range<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("inconsistent machine: {0}")]
    Inconsistent(&'static str),
}

/// Immutable compiled machine; share it freely between scanners.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterMachine {
    block1: AnnotatedDfa,
    n_rules: usize,
    units: Vec<CounterUnit>,
    wiring: Vec<Wiring>,
    counted: Vec<CounterUnit>,
    counted_wiring: Vec<CountedWiring>,
    plans: Vec<RulePlan>,
}

/// Output bits of a scan: bit `i < n` is rule `i`'s latch, bit `n` is their OR.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct OutputVector(BitVec);

impl OutputVector {
    fn new(n_rules: usize) -> OutputVector {
        OutputVector(BitVec::zeros(n_rules + 1))
    }

    pub fn n_rules(&self) -> usize {
        self.0.len() - 1
    }

    pub fn rule(&self, i: usize) -> bool {
        self.0.get(i)
    }

    /// The disjunction bit.
    pub fn any(&self) -> bool {
        self.0.get(self.n_rules())
    }

    pub fn bits(&self) -> &BitVec {
        &self.0
    }

    pub fn to_vec(&self) -> Vec<bool> {
        (0..self.0.len()).map(|i| self.0.get(i)).collect()
    }
}

impl fmt::Debug for OutputVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EventKind {
    StageAdvance,
    RuleMatch,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::StageAdvance => "stage_advance",
            EventKind::RuleMatch => "rule_match",
        }
    }
}

/// First fire of a stage (or first latch of a rule). `offset` is the number
/// of bytes consumed when it happened.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MatchEvent {
    pub rule_id: u32,
    pub stage: u32,
    pub offset: u64,
    pub kind: EventKind,
}

/// Per-unit mutable state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UnitState {
    Threshold {
        armed: bool,
        counter: u32,
    },
    /// `first_bad` is the counter value at which the first excluded byte
    /// arrived, 0 if none.
    Paper {
        armed: bool,
        counter: u32,
        first_bad: u32,
    },
    /// `open[g]`: a window opened `g` bytes ago and is still clean.
    /// `ready` is a ring of "some window closed in range" bits, one per
    /// position, read back `|w|` positions later.
    Exact {
        open: BitVec,
        ready: BitVec,
        cursor: u32,
    },
}

impl UnitState {
    fn fresh(unit: &CounterUnit) -> UnitState {
        match unit.mode {
            UnitMode::PlainThreshold => UnitState::Threshold {
                armed: false,
                counter: 0,
            },
            UnitMode::GapWindowPaper => UnitState::Paper {
                armed: false,
                counter: 0,
                first_bad: 0,
            },
            UnitMode::GapWindowExact => {
                let (_, m) = unit.gap_bounds();
                UnitState::Exact {
                    open: BitVec::zeros(m as usize + 1),
                    ready: BitVec::zeros(unit.word_len as usize + 1),
                    cursor: 0,
                }
            }
        }
    }

    pub fn is_armed(&self) -> bool {
        match self {
            UnitState::Threshold { armed, .. } | UnitState::Paper { armed, .. } => *armed,
            UnitState::Exact { open, .. } => open.any(),
        }
    }

    /// Current counter value; exact units report 0.
    pub fn counter(&self) -> u32 {
        match self {
            UnitState::Threshold { counter, .. } | UnitState::Paper { counter, .. } => *counter,
            UnitState::Exact { .. } => 0,
        }
    }

    fn heap_bytes(&self) -> usize {
        match self {
            UnitState::Exact { open, ready, .. } => open.heap_bytes() + ready.heap_bytes(),
            _ => 0,
        }
    }

    /// One clock tick: count, arm, then evaluate the gate.
    #[inline]
    fn tick(&mut self, unit: &CounterUnit, arm: bool, word_end: bool, bad: bool) -> bool {
        match self {
            UnitState::Threshold { armed, counter } => {
                if *armed {
                    *counter = (*counter + 1).min(unit.threshold());
                } else if arm {
                    *armed = true;
                    *counter = 0;
                }
                *armed && word_end && *counter >= unit.threshold()
            }
            UnitState::Paper {
                armed,
                counter,
                first_bad,
            } => {
                if *armed {
                    *counter += 1;
                    if bad && *first_bad == 0 {
                        *first_bad = *counter;
                    }
                    if *counter >= unit.expiry() {
                        *armed = false;
                    }
                }
                if arm && !*armed {
                    *armed = true;
                    *counter = 0;
                    *first_bad = 0;
                }
                *armed
                    && word_end
                    && (unit.lower()..=unit.upper()).contains(counter)
                    && (*first_bad == 0 || *first_bad > *counter - unit.word_len)
            }
            UnitState::Exact {
                open,
                ready,
                cursor,
            } => {
                if bad {
                    open.clear();
                } else {
                    open.shift_up();
                }
                Self::record_exact(unit, open, ready, cursor, arm, true);
                let len = ready.len() as u32;
                let delayed = (*cursor + 1) % len;
                word_end && ready.get(delayed as usize)
            }
        }
    }

    fn record_exact(
        unit: &CounterUnit,
        open: &mut BitVec,
        ready: &mut BitVec,
        cursor: &mut u32,
        arm: bool,
        advance: bool,
    ) {
        if arm {
            open.set(0, true);
        }
        let (k, m) = unit.gap_bounds();
        let len = ready.len() as u32;
        if advance {
            *cursor = (*cursor + 1) % len;
        }
        ready.set(*cursor as usize, open.any_in(k as usize, m as usize));
    }

    /// Arms a window at position 0, before any byte.
    fn arm_at_start(&mut self, unit: &CounterUnit) {
        match self {
            UnitState::Threshold { armed, counter } | UnitState::Paper { armed, counter, .. } => {
                *armed = true;
                *counter = 0;
            }
            UnitState::Exact {
                open,
                ready,
                cursor,
            } => {
                Self::record_exact(unit, open, ready, cursor, true, false);
            }
        }
    }
}

/// Mutable per-stream state. Its size is fixed when it is created.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanState {
    dfa_state: StateId,
    position: u64,
    units: Vec<UnitState>,
    counted: Vec<UnitState>,
    fired: BitVec,
    output: OutputVector,
}

impl ScanState {
    pub fn position(&self) -> u64 {
        self.position
    }

    pub fn dfa_state(&self) -> StateId {
        self.dfa_state
    }

    pub fn output(&self) -> &OutputVector {
        &self.output
    }

    pub fn units(&self) -> &[UnitState] {
        &self.units
    }

    pub fn latched(&self, rule: usize) -> bool {
        self.output.rule(rule)
    }

    /// Bytes owned by this state, inline and on the heap.
    pub fn footprint_bytes(&self) -> usize {
        core::mem::size_of::<ScanState>()
            + self.units.capacity() * core::mem::size_of::<UnitState>()
            + self.counted.capacity() * core::mem::size_of::<UnitState>()
            + self
                .units
                .iter()
                .chain(&self.counted)
                .map(UnitState::heap_bytes)
                .sum::<usize>()
            + self.fired.heap_bytes()
            + self.output.0.heap_bytes()
    }
}

impl CounterMachine {
    /// Builds the detector automaton and one unit per (rule, chain word).
    pub fn compile(
        ruleset: &Ruleset,
        config: CompileConfig,
    ) -> Result<CounterMachine, MachineError> {
        let cap = if config.state_cap == 0 {
            DEFAULT_STATE_CAP
        } else {
            config.state_cap
        };
        let block1 = build_block1(ruleset, cap)?;
        let mut units = Vec::new();
        let mut counted = Vec::new();
        for rule in &ruleset.rules {
            let id = rule.rule_id as u32;
            if let Some(c) = &rule.counted {
                counted.push(CounterUnit::window(
                    id,
                    0,
                    config.window_mode.unit_mode(),
                    c.k,
                    c.m,
                    c.tail.len() as u32,
                ));
            }
            for (stage, word) in rule.chain.iter().enumerate() {
                let len = word.len() as u32;
                let unit = match (&rule.gap, stage) {
                    (Some(gap), 0) => CounterUnit::window(
                        id,
                        0,
                        config.window_mode.unit_mode(),
                        gap.k,
                        gap.m,
                        len,
                    ),
                    _ => CounterUnit::plain(id, stage as u32, len),
                };
                units.push(unit);
            }
        }
        CounterMachine::from_parts(block1, ruleset.n(), units, counted)
    }

    /// Assembles a machine from its stored parts, checking that the units
    /// and the channel directory agree.
    pub fn from_parts(
        block1: AnnotatedDfa,
        n_rules: usize,
        units: Vec<CounterUnit>,
        counted: Vec<CounterUnit>,
    ) -> Result<CounterMachine, MachineError> {
        use MachineError::Inconsistent;
        if n_rules == 0 {
            return Err(Inconsistent("no rules"));
        }
        let channel = |rule: u32, kind| block1.channel_index(rule, kind);

        let mut counted_wiring = Vec::with_capacity(counted.len());
        let mut counted_of = vec![None; n_rules];
        for (i, c) in counted.iter().enumerate() {
            let rule = c.rule_id as usize;
            if rule >= n_rules || counted_of[rule].is_some() || !c.mode.is_window() || c.stage != 0
            {
                return Err(Inconsistent("bad counted-prefix table"));
            }
            check_window_presets(c)?;
            counted_of[rule] = Some(i);
            let arm = channel(c.rule_id, ChannelKind::CountArm)
                .ok_or(Inconsistent("missing count_arm channel"))?;
            let tail = channel(c.rule_id, ChannelKind::CountTailEnd);
            if tail.is_some() != (c.word_len > 0) {
                return Err(Inconsistent(
                    "count_tail_end channel does not match tail length",
                ));
            }
            counted_wiring.push(CountedWiring {
                arm,
                brk: channel(c.rule_id, ChannelKind::CountBreak),
                tail,
            });
        }

        let mut wiring = Vec::with_capacity(units.len());
        let mut plans = Vec::with_capacity(n_rules);
        let mut i = 0;
        for rule in 0..n_rules {
            let start = i;
            while i < units.len() && units[i].rule_id as usize == rule {
                let unit = &units[i];
                if unit.stage as usize != i - start || unit.word_len == 0 {
                    return Err(Inconsistent("units out of chain order"));
                }
                match unit.mode {
                    UnitMode::PlainThreshold => {
                        if unit.threshold() != unit.word_len {
                            return Err(Inconsistent("plain threshold differs from word length"));
                        }
                    }
                    _ => {
                        if unit.stage != 0 {
                            return Err(Inconsistent("window unit after stage 0"));
                        }
                        check_window_presets(unit)?;
                    }
                }
                let word = channel(unit.rule_id, ChannelKind::ChainWordEnd(unit.stage))
                    .ok_or(Inconsistent("missing chain_word_end channel"))?;
                let forbidden = if unit.mode.is_window() {
                    channel(unit.rule_id, ChannelKind::GapForbidden)
                } else {
                    None
                };
                wiring.push(Wiring { word, forbidden });
                i += 1;
            }
            if i == start {
                return Err(Inconsistent("rule without units"));
            }
            let prefix = match counted_of[rule] {
                Some(c) => PrefixSource::Counted(c),
                None => PrefixSource::Channel(
                    channel(rule as u32, ChannelKind::PrefixEnd)
                        .ok_or(Inconsistent("missing prefix_end channel"))?,
                ),
            };
            plans.push(RulePlan {
                prefix,
                units: start..i,
            });
        }
        if i != units.len() {
            return Err(Inconsistent("unit refers to an unknown rule"));
        }
        Ok(CounterMachine {
            block1,
            n_rules,
            units,
            wiring,
            counted,
            counted_wiring,
            plans,
        })
    }

    pub fn block1(&self) -> &AnnotatedDfa {
        &self.block1
    }

    pub fn n_rules(&self) -> usize {
        self.n_rules
    }

    /// Output width: one bit per rule plus the disjunction.
    pub fn output_width(&self) -> usize {
        self.n_rules + 1
    }

    pub fn units(&self) -> &[CounterUnit] {
        &self.units
    }

    /// Auxiliary counters of double-counting prefixes.
    pub fn counted_units(&self) -> &[CounterUnit] {
        &self.counted
    }

    pub fn rule_units(&self, rule: usize) -> &[CounterUnit] {
        &self.units[self.plans[rule].units.clone()]
    }

    pub fn new_scan_state(&self) -> ScanState {
        let mut state = ScanState {
            dfa_state: self.block1.dfa().start(),
            position: 0,
            units: self.units.iter().map(UnitState::fresh).collect(),
            counted: self.counted.iter().map(UnitState::fresh).collect(),
            fired: BitVec::zeros(self.units.len()),
            output: OutputVector::new(self.n_rules),
        };
        self.arm_initial(&mut state);
        state
    }

    /// Counted prefixes whose head matches the empty word open a window
    /// before the first byte.
    fn arm_initial(&self, state: &mut ScanState) {
        let out = self.block1.output(state.dfa_state);
        for (i, unit) in self.counted.iter().enumerate() {
            if out.get(self.counted_wiring[i].arm) {
                state.counted[i].arm_at_start(unit);
            }
        }
    }

    /// Restores `state` to the freshly created condition.
    pub fn reset(&self, state: &mut ScanState) {
        state.dfa_state = self.block1.dfa().start();
        state.position = 0;
        for (s, unit) in state.units.iter_mut().zip(&self.units) {
            *s = UnitState::fresh(unit);
        }
        for (s, unit) in state.counted.iter_mut().zip(&self.counted) {
            *s = UnitState::fresh(unit);
        }
        state.fired.clear();
        state.output.0.clear();
        self.arm_initial(state);
    }

    /// Consumes one byte and returns the outputs after it.
    pub fn step<'s>(&self, state: &'s mut ScanState, byte: u8) -> &'s OutputVector {
        self.step_with(state, byte, &mut |_| {});
        &state.output
    }

    /// Like [`step`](Self::step), reporting first stage fires and latches to `sink`.
    pub fn step_with(&self, state: &mut ScanState, byte: u8, sink: &mut impl FnMut(MatchEvent)) {
        state.position += 1;
        state.dfa_state = self.block1.dfa().next(state.dfa_state, byte);
        let out = self.block1.output(state.dfa_state);
        for (rule, plan) in self.plans.iter().enumerate() {
            if state.output.0.get(rule) {
                continue;
            }
            let mut trigger = match plan.prefix {
                PrefixSource::Channel(ch) => out.get(ch),
                PrefixSource::Counted(c) => {
                    let w = &self.counted_wiring[c];
                    state.counted[c].tick(
                        &self.counted[c],
                        out.get(w.arm),
                        w.tail.is_none_or(|t| out.get(t)),
                        w.brk.is_some_and(|b| out.get(b)),
                    )
                }
            };
            let last = plan.units.end - 1;
            for u in plan.units.clone() {
                let w = self.wiring[u];
                let fired = state.units[u].tick(
                    &self.units[u],
                    trigger,
                    out.get(w.word),
                    w.forbidden.is_some_and(|f| out.get(f)),
                );
                if fired && !state.fired.get(u) {
                    state.fired.set(u, true);
                    let kind = if u == last {
                        EventKind::RuleMatch
                    } else {
                        EventKind::StageAdvance
                    };
                    sink(MatchEvent {
                        rule_id: rule as u32,
                        stage: self.units[u].stage,
                        offset: state.position,
                        kind,
                    });
                }
                trigger = fired;
            }
            if trigger {
                state.output.0.set(rule, true);
                state.output.0.set(self.n_rules, true);
            }
        }
    }

    /// Feeds a chunk, appending events to `events`.
    pub fn feed(&self, state: &mut ScanState, chunk: &[u8], events: &mut Vec<MatchEvent>) {
        for &b in chunk {
            self.step_with(state, b, &mut |e| events.push(e));
        }
    }

    /// Scans a complete input from a fresh state.
    pub fn scan(&self, input: &[u8]) -> (Vec<MatchEvent>, OutputVector) {
        let mut state = self.new_scan_state();
        let mut events = Vec::new();
        self.feed(&mut state, input, &mut events);
        (events, state.output)
    }
}

fn check_window_presets(unit: &CounterUnit) -> Result<(), MachineError> {
    let [lower, upper, expiry] = unit.presets;
    if lower < unit.word_len || lower > upper || expiry != upper + 1 {
        return Err(MachineError::Inconsistent("window presets out of order"));
    }
    Ok(())
}
