//! Throughput measurement and the blow-up curve experiment.

use std::time::{Duration, Instant};

use recounter_core::{
    blowup_curve, pair_family, BlowupCurve, CompileConfig, CounterMachine, MachineError, WindowMode,
};

#[derive(Clone, Copy, Debug)]
pub struct BenchReport {
    pub bytes: u64,
    pub elapsed: Duration,
    /// `ScanState` footprint before and after the scan.
    pub footprint_before: usize,
    pub footprint_after: usize,
    pub matched: bool,
}

impl BenchReport {
    pub fn bytes_per_second(&self) -> f64 {
        self.bytes as f64 / self.elapsed.as_secs_f64().max(1e-9)
    }
}

pub fn measure_throughput(machine: &CounterMachine, input: &[u8]) -> BenchReport {
    let mut state = machine.new_scan_state();
    let footprint_before = state.footprint_bytes();
    let start = Instant::now();
    for &b in input {
        machine.step(&mut state, b);
    }
    let elapsed = start.elapsed();
    BenchReport {
        bytes: input.len() as u64,
        elapsed,
        footprint_before,
        footprint_after: state.footprint_bytes(),
        matched: state.output().any(),
    }
}

/// Blow-up curve over the pair family with words of length `word_len`.
pub fn pair_curve(n_max: usize, word_len: usize, cap: usize) -> Result<BlowupCurve, MachineError> {
    blowup_curve(
        |n| {
            let rs = pair_family(n, word_len);
            let machine = CounterMachine::compile(
                &rs,
                CompileConfig {
                    window_mode: WindowMode::Paper,
                    state_cap: cap,
                },
            )?;
            Ok((rs, machine))
        },
        1..=n_max,
        cap,
    )
}
