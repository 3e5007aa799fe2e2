//! Scanning readers in fixed-size chunks, and the JSON record format.

use std::io::{self, Read};

use recounter_core::{CounterMachine, MatchEvent, OutputVector, ScanState};
use serde::Serialize;
use thiserror::Error;

pub const CHUNK_SIZE: usize = 64 * 1024;

#[derive(Debug, Error)]
#[error("read error after {offset} bytes: {source}")]
pub struct StreamError {
    pub offset: u64,
    #[source]
    pub source: io::Error,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanSummary {
    pub bytes: u64,
    pub output: OutputVector,
}

/// Scans `reader` to the end with a fresh state, `chunk_size` bytes at a time.
pub fn scan_reader<R: Read>(
    machine: &CounterMachine,
    mut reader: R,
    chunk_size: usize,
    mut on_event: impl FnMut(MatchEvent),
) -> Result<ScanSummary, StreamError> {
    let mut state = machine.new_scan_state();
    let mut buf = vec![0u8; chunk_size.max(1)];
    loop {
        let n = match reader.read(&mut buf) {
            Ok(0) => break,
            Ok(n) => n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
            Err(source) => {
                return Err(StreamError {
                    offset: state.position(),
                    source,
                })
            }
        };
        feed(machine, &mut state, &buf[..n], &mut on_event);
    }
    Ok(ScanSummary {
        bytes: state.position(),
        output: state.output().clone(),
    })
}

fn feed(
    machine: &CounterMachine,
    state: &mut ScanState,
    chunk: &[u8],
    on_event: &mut impl FnMut(MatchEvent),
) {
    for &b in chunk {
        machine.step_with(state, b, on_event);
    }
}

#[derive(Serialize)]
pub struct EventRecord<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<&'a str>,
    pub rule: u32,
    pub stage: u32,
    pub offset: u64,
    pub kind: &'static str,
}

impl<'a> EventRecord<'a> {
    pub fn new(event: &MatchEvent, input: Option<&'a str>) -> EventRecord<'a> {
        EventRecord {
            input,
            rule: event.rule_id,
            stage: event.stage,
            offset: event.offset,
            kind: event.kind.name(),
        }
    }
}

#[derive(Serialize)]
pub struct SummaryRecord<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<&'a str>,
    pub kind: &'static str,
    pub bytes: u64,
    /// Per-rule latches followed by their disjunction.
    pub output: Vec<u8>,
}

impl<'a> SummaryRecord<'a> {
    pub fn new(summary: &ScanSummary, input: Option<&'a str>) -> SummaryRecord<'a> {
        SummaryRecord {
            input,
            kind: "summary",
            bytes: summary.bytes,
            output: summary.output.to_vec().into_iter().map(u8::from).collect(),
        }
    }
}

pub fn to_json_line(record: &impl Serialize) -> String {
    let mut line = serde_json::to_string(record).expect("records serialize");
    line.push('\n');
    line
}
