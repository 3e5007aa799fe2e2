//! Storage accounting, the classical blow-up baseline, and DOT export.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::annotated::AnnotatedDfa;
use crate::ast::{escape_word, Ast};
use crate::bytes::ByteSet;
use crate::dfa::{minimize, subset_construct, Dfa, DfaError};
use crate::machine::{CounterMachine, CounterUnit, UnitMode};
use crate::nfa::thompson_nfa;
use crate::ruleset::{parse_ruleset, Ruleset, ALPHABET_SIZE};

/// `⌈log₂ x⌉`, with `ceil_log2(0) = ceil_log2(1) = 0`.
pub fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// Storage of a compiled machine, in bits and elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SizeReport {
    pub n_rules: usize,
    pub block1_states: usize,
    pub n_channels: usize,
    /// `|Q| · 256 · ⌈log₂|Q|⌉`.
    pub transition_bits: u64,
    /// `|Q| · channels`.
    pub output_bits: u64,
    /// Counters, including the auxiliary counters of counted prefixes.
    pub counters: usize,
    /// `Σ ⌈log₂(largest preset + 1)⌉` over all counters.
    pub counter_bits: u64,
    /// Extra storage beside the counters: the first-excluded-byte register
    /// of paper windows, the shift and delay registers of exact windows.
    pub register_bits: u64,
    /// Arm flags, one per counter, plus one latch per rule.
    pub triggers: usize,
    /// One conjunction per rule plus the final disjunction.
    pub gates: usize,
}

impl SizeReport {
    pub fn block1_bits(&self) -> u64 {
        self.transition_bits + self.output_bits
    }

    /// Counter bits, triggers and gates together.
    pub fn element_count(&self) -> u64 {
        self.counter_bits + self.triggers as u64 + self.gates as u64
    }
}

fn unit_bits(unit: &CounterUnit) -> u64 {
    ceil_log2(unit.largest_preset() as u64 + 1) as u64
}

fn unit_register_bits(unit: &CounterUnit) -> u64 {
    match unit.mode {
        UnitMode::PlainThreshold => 0,
        UnitMode::GapWindowPaper => unit_bits(unit),
        UnitMode::GapWindowExact => {
            let (_, m) = unit.gap_bounds();
            (m + 1 + unit.word_len + 1) as u64 + ceil_log2(unit.word_len as u64 + 1) as u64
        }
    }
}

pub fn size_report(machine: &CounterMachine) -> SizeReport {
    let block1 = machine.block1();
    let q = block1.state_count() as u64;
    let units = machine.units().iter().chain(machine.counted_units());
    let counters = machine.units().len() + machine.counted_units().len();
    SizeReport {
        n_rules: machine.n_rules(),
        block1_states: block1.state_count(),
        n_channels: block1.channel_count(),
        transition_bits: q * ALPHABET_SIZE as u64 * ceil_log2(q) as u64,
        output_bits: q * block1.channel_count() as u64,
        counters,
        counter_bits: units.clone().map(unit_bits).sum(),
        register_bits: units.map(unit_register_bits).sum(),
        triggers: counters + machine.n_rules(),
        gates: machine.n_rules() + 1,
    }
}

/// Minimal classical DFA for the union of all rules.
pub fn classical_dfa(ruleset: &Ruleset, cap: usize) -> Result<Dfa, DfaError> {
    let union = Ast::union(ruleset.rules.iter().map(|r| r.recompose()).collect());
    Ok(minimize(&subset_construct(&thompson_nfa(&union), cap)?))
}

/// Bytes usable as pairwise distinct letters in generated families.
fn letter(i: usize) -> u8 {
    const PRINTABLE: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
    match PRINTABLE.get(i) {
        Some(b) => *b,
        None => (0x80 + i - PRINTABLE.len()) as u8,
    }
}

/// `n` rules `.*αᵢ.*βᵢ.*` with words of length `m`, all letters distinct.
/// `pair_family(2, 2)` is `.*ab.*cd.*` and `.*ef.*gh.*`.
pub fn pair_family(n: usize, m: usize) -> Ruleset {
    assert!(
        2 * n * m <= 62 + 128,
        "family too large for distinct letters"
    );
    let mut text = String::new();
    let mut next = 0;
    for _ in 0..n {
        let mut word = || {
            let w: Vec<u8> = (next..next + m).map(letter).collect();
            next += m;
            escape_word(&w)
        };
        let (alpha, beta) = (word(), word());
        let _ = writeln!(text, ".*{alpha}.*{beta}.*");
    }
    parse_ruleset(text.as_bytes()).expect("generated family parses")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CurveRow {
    pub n: usize,
    /// `None` when the classical construction hit the state cap.
    pub classical_states: Option<usize>,
    pub block1_states: usize,
    pub counter_bits: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BlowupCurve {
    pub rows: Vec<CurveRow>,
}

impl BlowupCurve {
    pub const CSV_HEADER: &'static str = "n,classical_states,block1_states,counter_bits";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let classical = match r.classical_states {
                Some(s) => format!("{s}"),
                None => String::from("cap exceeded"),
            };
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.n, classical, r.block1_states, r.counter_bits
            );
        }
        out
    }
}

/// Builds both pipelines for `family(n)` for each `n` in `ns`. Errors
/// other than the classical state cap are propagated.
pub fn blowup_curve<F, E>(
    mut family: F,
    ns: impl IntoIterator<Item = usize>,
    cap: usize,
) -> Result<BlowupCurve, E>
where
    F: FnMut(usize) -> Result<(Ruleset, CounterMachine), E>,
{
    let mut curve = BlowupCurve::default();
    for n in ns {
        let (ruleset, machine) = family(n)?;
        let classical_states = classical_dfa(&ruleset, cap).ok().map(|d| d.state_count());
        let report = size_report(&machine);
        curve.rows.push(CurveRow {
            n,
            classical_states,
            block1_states: report.block1_states,
            counter_bits: report.counter_bits,
        });
    }
    Ok(curve)
}

pub enum DotSource<'a> {
    Dfa(&'a Dfa),
    Annotated(&'a AnnotatedDfa),
    Machine(&'a CounterMachine),
}

impl<'a> From<&'a Dfa> for DotSource<'a> {
    fn from(d: &'a Dfa) -> Self {
        DotSource::Dfa(d)
    }
}

impl<'a> From<&'a AnnotatedDfa> for DotSource<'a> {
    fn from(d: &'a AnnotatedDfa) -> Self {
        DotSource::Annotated(d)
    }
}

impl<'a> From<&'a CounterMachine> for DotSource<'a> {
    fn from(m: &'a CounterMachine) -> Self {
        DotSource::Machine(m)
    }
}

fn byte_label(out: &mut String, b: u8) {
    match b {
        b'"' => out.push_str("\\\""),
        b'\\' => out.push_str("\\\\"),
        0x21..=0x7e => out.push(b as char),
        _ => {
            let _ = write!(out, "\\\\x{b:02x}");
        }
    }
}

fn set_label(set: &ByteSet) -> String {
    if set.is_full() {
        return String::from("any");
    }
    let mut out = String::new();
    for (i, (lo, hi)) in set.ranges().into_iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        byte_label(&mut out, lo);
        if hi > lo {
            out.push('-');
            byte_label(&mut out, hi);
        }
    }
    out
}

fn write_dfa(out: &mut String, dfa: &Dfa, state_label: impl Fn(usize) -> String) {
    out.push_str("  rankdir=LR;\n  start [shape=point];\n");
    let _ = writeln!(out, "  start -> s{};", dfa.start());
    for s in 0..dfa.state_count() {
        let shape = if dfa.is_accepting(s as u32) {
            "doublecircle"
        } else {
            "circle"
        };
        let _ = writeln!(out, "  s{s} [shape={shape},label=\"{}\"];", state_label(s));
    }
    for s in 0..dfa.state_count() {
        let mut targets: Vec<(u32, ByteSet)> = Vec::new();
        for b in 0..=255u8 {
            let t = dfa.next(s as u32, b);
            match targets.iter_mut().find(|(x, _)| *x == t) {
                Some((_, set)) => set.insert(b),
                None => targets.push((t, ByteSet::singleton(b))),
            }
        }
        targets.sort_by_key(|(t, _)| *t);
        for (t, set) in targets {
            let _ = writeln!(out, "  s{s} -> s{t} [label=\"{}\"];", set_label(&set));
        }
    }
}

fn channel_name(a: &AnnotatedDfa, i: usize) -> String {
    let ch = a.channels()[i];
    match ch.kind {
        crate::annotated::ChannelKind::ChainWordEnd(stage) => {
            format!("r{} {}({})", ch.rule_id, ch.kind.name(), stage)
        }
        kind => format!("r{} {}", ch.rule_id, kind.name()),
    }
}

fn write_annotated(out: &mut String, a: &AnnotatedDfa) {
    write_dfa(out, a.dfa(), |s| {
        let mut label = format!("{s}");
        for i in a.output(s as u32).ones() {
            label.push_str("\\n");
            label.push_str(&channel_name(a, i));
        }
        label
    });
}

fn unit_label(name: &str, unit: &CounterUnit) -> String {
    match unit.mode {
        UnitMode::PlainThreshold => format!("{name}: ≥{}", unit.threshold()),
        UnitMode::GapWindowPaper => format!(
            "{name}: [{},{}] ⊥{}",
            unit.lower(),
            unit.upper(),
            unit.expiry()
        ),
        UnitMode::GapWindowExact => format!("{name}: [{},{}] exact", unit.lower(), unit.upper()),
    }
}

fn write_machine(out: &mut String, m: &CounterMachine) {
    let a = m.block1();
    write_annotated(out, a);
    for i in 0..a.channel_count() {
        let _ = writeln!(
            out,
            "  ch{i} [shape=note,label=\"{}\"];",
            channel_name(a, i)
        );
    }
    let link = |out: &mut String, rule: u32, kind, node: &str| {
        if let Some(i) = a.channel_index(rule, kind) {
            let _ = writeln!(out, "  ch{i} -> {node} [style=dashed];");
        }
    };
    use crate::annotated::ChannelKind as K;
    for (i, unit) in m.counted_units().iter().enumerate() {
        let node = format!("a{i}");
        let _ = writeln!(
            out,
            "  {node} [shape=box,label=\"{}\"];",
            unit_label(&node, unit)
        );
        for kind in [K::CountArm, K::CountBreak, K::CountTailEnd] {
            link(out, unit.rule_id, kind, &node);
        }
    }
    let mut counted = 0;
    for (i, unit) in m.units().iter().enumerate() {
        let node = format!("c{i}");
        let _ = writeln!(
            out,
            "  {node} [shape=box,label=\"{}\"];",
            unit_label(&node, unit)
        );
        link(out, unit.rule_id, K::ChainWordEnd(unit.stage), &node);
        if unit.mode.is_window() {
            link(out, unit.rule_id, K::GapForbidden, &node);
        }
        if unit.stage == 0 {
            let is_counted = m
                .counted_units()
                .get(counted)
                .is_some_and(|c| c.rule_id == unit.rule_id);
            if is_counted {
                let _ = writeln!(out, "  a{counted} -> {node};");
                counted += 1;
            } else {
                link(out, unit.rule_id, K::PrefixEnd, &node);
            }
        } else {
            let _ = writeln!(out, "  c{} -> {node};", i - 1);
        }
        let last = m
            .units()
            .get(i + 1)
            .is_none_or(|u| u.rule_id != unit.rule_id);
        if last {
            let _ = writeln!(
                out,
                "  l{r} [shape=square,label=\"latch {r}\"];",
                r = unit.rule_id
            );
            let _ = writeln!(out, "  {node} -> l{};", unit.rule_id);
            let _ = writeln!(out, "  l{} -> or;", unit.rule_id);
        }
    }
    out.push_str("  or [shape=invtriangle,label=\"OR\"];\n");
}

/// Graphviz text. Output is a pure function of the automaton.
pub fn export_dot<'a>(source: impl Into<DotSource<'a>>) -> String {
    let mut out = String::from("digraph automaton {\n");
    match source.into() {
        DotSource::Dfa(d) => write_dfa(&mut out, d, |s| format!("{s}")),
        DotSource::Annotated(a) => write_annotated(&mut out, a),
        DotSource::Machine(m) => write_machine(&mut out, m),
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{CompileConfig, WindowMode};
    use crate::{parse_pattern, DEFAULT_STATE_CAP};

    fn machine(text: &str) -> CounterMachine {
        CounterMachine::compile(
            &parse_ruleset(text.as_bytes()).unwrap(),
            CompileConfig::new(WindowMode::Paper),
        )
        .unwrap()
    }

    #[test]
    fn log2_ceiling() {
        let got: Vec<u32> = [0, 1, 2, 3, 4, 5, 7, 8, 9]
            .iter()
            .map(|x| ceil_log2(*x))
            .collect();
        assert_eq!(got, [0, 0, 1, 2, 2, 3, 3, 3, 4]);
    }

    #[test]
    fn report_formulas() {
        let r = size_report(&machine(".*ab.*cd.*"));
        assert_eq!(r.counter_bits, 2);
        assert_eq!(r.gates, 2);
        assert_eq!(r.triggers, 2);
        let q = r.block1_states as u64;
        assert_eq!(r.transition_bits, q * 256 * ceil_log2(q) as u64);
        assert_eq!(r.output_bits, q * 2);

        let r = size_report(&machine(".*ab[^z]{1,3}cd.*"));
        assert_eq!(r.counter_bits, 3);
    }

    #[test]
    fn family_text() {
        let rs = pair_family(2, 2);
        let texts: Vec<String> = rs.rules.iter().map(|r| r.recompose().unparse()).collect();
        assert_eq!(texts, [".*ab.*cd.*", ".*ef.*gh.*"]);
        assert_eq!(pair_family(6, 6).n(), 6);
    }

    #[test]
    fn curve_csv() {
        let curve = blowup_curve::<_, ()>(
            |n| {
                let rs = pair_family(n, 2);
                let m =
                    CounterMachine::compile(&rs, CompileConfig::new(WindowMode::Paper)).unwrap();
                Ok((rs, m))
            },
            1..=2,
            DEFAULT_STATE_CAP,
        )
        .unwrap();
        let csv = curve.to_csv();
        assert!(csv.starts_with("n,classical_states,block1_states,counter_bits\n1,"));
        assert_eq!(csv.lines().count(), 3);
        assert!(curve.rows[1].classical_states > curve.rows[0].classical_states);
    }

    #[test]
    fn dot_for_plain_dfa() {
        let d = minimize(
            &subset_construct(&thompson_nfa(&parse_pattern(b"a*").unwrap()), 100).unwrap(),
        );
        let dot = export_dot(&d);
        assert_eq!(d.state_count(), 2);
        assert_eq!(dot.matches("[shape=").count(), 3);
        assert!(dot.contains("s0 -> s0 [label=\"a\"]") || dot.contains("s1 -> s1 [label=\"a\"]"));
        assert_eq!(dot, export_dot(&d));
    }

    #[test]
    fn dot_for_machine() {
        let m = machine(".*ab.*cd.*");
        let dot = export_dot(&m);
        assert!(dot.contains("label=\"c0: ≥2\""));
        assert!(dot.contains("ch0 -> c0") || dot.contains("ch1 -> c0"));
        assert_eq!(dot, export_dot(&m.clone()));
    }
}
