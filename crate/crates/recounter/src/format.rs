//! Compiled-machine files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "RCTR"  version:u32  alphabet:u32 (256)  states:u32  start:u32  channels:u32
//! transition table     states × 256 × u32, state-major
//! output vectors       states × ⌈channels/8⌉ bytes, channel i at bit i%8 of byte i/8
//! units:u32            then per unit: rule:u32 stage:u32 mode:u8 presets:3×u32
//! rules:u32
//! channel directory    per channel: rule:u32 kind:u8 stage:u32
//! word lengths         per unit: u32
//! counted:u32          then per counted prefix: rule:u32 mode:u8 presets:3×u32 tail_len:u32
//! ```
//!
//! Readers reject unknown versions, trailing bytes and nonzero padding, so
//! `write(read(bytes)) == bytes` for every accepted file.

use std::fs;
use std::path::Path;

use recounter_core::{
    AnnotatedDfa, BitVec, Channel, ChannelKind, CounterMachine, CounterUnit, Dfa, MachineError,
    UnitMode,
};
use thiserror::Error;

pub const MAGIC: &[u8; 4] = b"RCTR";
pub const VERSION: u32 = 1;
const ALPHABET: u32 = 256;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("not a compiled machine (bad magic)")]
    BadMagic,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),
    #[error("file is truncated")]
    Truncated,
    #[error("corrupt machine file: {0}")]
    Invalid(&'static str),
    #[error("corrupt machine file: {0}")]
    Machine(#[from] MachineError),
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Format(#[from] FormatError),
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_unit(out: &mut Vec<u8>, unit: &CounterUnit, with_stage: bool) {
    put_u32(out, unit.rule_id);
    if with_stage {
        put_u32(out, unit.stage);
    }
    out.push(unit.mode.code());
    for p in unit.presets {
        put_u32(out, p);
    }
}

pub fn write_machine(machine: &CounterMachine) -> Vec<u8> {
    let block1 = machine.block1();
    let dfa = block1.dfa();
    let channels = block1.channel_count();
    let row_bytes = channels.div_ceil(8);
    let mut out = Vec::with_capacity(24 + dfa.table().len() * 4 + dfa.state_count() * row_bytes);
    out.extend_from_slice(MAGIC);
    put_u32(&mut out, VERSION);
    put_u32(&mut out, ALPHABET);
    put_u32(&mut out, dfa.state_count() as u32);
    put_u32(&mut out, dfa.start());
    put_u32(&mut out, channels as u32);
    for &t in dfa.table() {
        put_u32(&mut out, t);
    }
    for bits in block1.outputs() {
        let mut row = vec![0u8; row_bytes];
        for i in bits.ones() {
            row[i / 8] |= 1 << (i % 8);
        }
        out.extend_from_slice(&row);
    }
    put_u32(&mut out, machine.units().len() as u32);
    for unit in machine.units() {
        put_unit(&mut out, unit, true);
    }
    put_u32(&mut out, machine.n_rules() as u32);
    for ch in block1.channels() {
        let (kind, stage) = ch.kind.code();
        put_u32(&mut out, ch.rule_id);
        out.push(kind);
        put_u32(&mut out, stage);
    }
    for unit in machine.units() {
        put_u32(&mut out, unit.word_len);
    }
    put_u32(&mut out, machine.counted_units().len() as u32);
    for unit in machine.counted_units() {
        put_unit(&mut out, unit, false);
        put_u32(&mut out, unit.word_len);
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        if self.bytes.len() < n {
            return Err(FormatError::Truncated);
        }
        let (head, rest) = self.bytes.split_at(n);
        self.bytes = rest;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    /// A count of records of `record_size` bytes that must fit in the rest of the file.
    fn count(&mut self, record_size: usize) -> Result<usize, FormatError> {
        let n = self.u32()? as usize;
        if n.saturating_mul(record_size) > self.bytes.len() {
            return Err(FormatError::Truncated);
        }
        Ok(n)
    }

    fn mode(&mut self) -> Result<UnitMode, FormatError> {
        UnitMode::from_code(self.u8()?).ok_or(FormatError::Invalid("unknown unit mode"))
    }

    fn presets(&mut self) -> Result<[u32; 3], FormatError> {
        Ok([self.u32()?, self.u32()?, self.u32()?])
    }
}

pub fn read_machine(bytes: &[u8]) -> Result<CounterMachine, FormatError> {
    let mut c = Cursor { bytes };
    if c.take(4).map_err(|_| FormatError::BadMagic)? != MAGIC {
        return Err(FormatError::BadMagic);
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    if c.u32()? != ALPHABET {
        return Err(FormatError::Invalid("alphabet size is not 256"));
    }
    let states = c.count(ALPHABET as usize * 4)?;
    let start = c.u32()?;
    let channels = c.u32()? as usize;
    let row_bytes = channels.div_ceil(8);

    let table_bytes = c.take(states * ALPHABET as usize * 4)?;
    let table: Vec<u32> = table_bytes
        .chunks_exact(4)
        .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    if states.saturating_mul(row_bytes) > c.bytes.len() {
        return Err(FormatError::Truncated);
    }
    let mut outputs = Vec::with_capacity(states);
    for _ in 0..states {
        let row = c.take(row_bytes)?;
        let mut bits = BitVec::zeros(channels);
        for (i, byte) in row.iter().enumerate() {
            for bit in 0..8 {
                if byte & (1 << bit) != 0 {
                    let ch = i * 8 + bit;
                    if ch >= channels {
                        return Err(FormatError::Invalid("nonzero output padding"));
                    }
                    bits.set(ch, true);
                }
            }
        }
        outputs.push(bits);
    }

    let n_units = c.count(21)?;
    let mut units = Vec::with_capacity(n_units);
    for _ in 0..n_units {
        let rule_id = c.u32()?;
        let stage = c.u32()?;
        let mode = c.mode()?;
        let presets = c.presets()?;
        units.push(CounterUnit {
            rule_id,
            stage,
            mode,
            presets,
            word_len: 0,
        });
    }
    let n_rules = c.u32()? as usize;
    if channels.saturating_mul(9) > c.bytes.len() {
        return Err(FormatError::Truncated);
    }
    let mut directory = Vec::with_capacity(channels);
    for _ in 0..channels {
        let rule_id = c.u32()?;
        let kind = c.u8()?;
        let stage = c.u32()?;
        let kind = ChannelKind::from_code(kind, stage)
            .ok_or(FormatError::Invalid("unknown channel kind"))?;
        if kind.code() != (kind.code().0, stage) {
            return Err(FormatError::Invalid("stage on a stageless channel"));
        }
        directory.push(Channel { rule_id, kind });
    }
    for unit in &mut units {
        unit.word_len = c.u32()?;
    }
    let n_counted = c.count(21)?;
    let mut counted = Vec::with_capacity(n_counted);
    for _ in 0..n_counted {
        let rule_id = c.u32()?;
        let mode = c.mode()?;
        let presets = c.presets()?;
        let word_len = c.u32()?;
        counted.push(CounterUnit {
            rule_id,
            stage: 0,
            mode,
            presets,
            word_len,
        });
    }
    if !c.bytes.is_empty() {
        return Err(FormatError::Invalid("trailing bytes"));
    }

    let accept = outputs.iter().map(BitVec::any).collect();
    let dfa = Dfa::from_parts(table, start, accept)
        .ok_or(FormatError::Invalid("transition table out of range"))?;
    let block1 = AnnotatedDfa::from_parts(dfa, outputs, directory)
        .ok_or(FormatError::Invalid("duplicate channel"))?;
    Ok(CounterMachine::from_parts(block1, n_rules, units, counted)?)
}

pub fn save_machine(machine: &CounterMachine, path: &Path) -> std::io::Result<()> {
    fs::write(path, write_machine(machine))
}

pub fn load_machine(path: &Path) -> Result<CounterMachine, LoadError> {
    let bytes = fs::read(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(read_machine(&bytes)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use recounter_core::{parse_ruleset, CompileConfig, WindowMode};

    fn machine(text: &str, mode: WindowMode) -> CounterMachine {
        CounterMachine::compile(
            &parse_ruleset(text.as_bytes()).unwrap(),
            CompileConfig::new(mode),
        )
        .unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        for (text, mode) in [
            (".*ab.*cd.*", WindowMode::Paper),
            (".*ab[^z]{1,3}cd.*ef.*\n.*x.*y.*", WindowMode::Exact),
            (
                "mode=double_counting\n.*a[0-9]{2,3}b.*cd.*",
                WindowMode::Paper,
            ),
        ] {
            let m = machine(text, mode);
            let bytes = write_machine(&m);
            let back = read_machine(&bytes).unwrap();
            assert_eq!(back, m);
            assert_eq!(write_machine(&back), bytes);
        }
    }

    #[test]
    fn header_layout() {
        let bytes = write_machine(&machine(".*ab.*cd.*", WindowMode::Paper));
        assert_eq!(&bytes[..4], b"RCTR");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 256);
    }

    #[test]
    fn corruption_is_detected() {
        let bytes = write_machine(&machine(".*ab.*cd.*", WindowMode::Paper));
        assert!(matches!(read_machine(b"XXXX"), Err(FormatError::BadMagic)));
        assert!(matches!(read_machine(b"RC"), Err(FormatError::BadMagic)));
        let mut v = bytes.clone();
        v[4] = 9;
        assert!(matches!(
            read_machine(&v),
            Err(FormatError::UnsupportedVersion(9))
        ));
        for cut in [10, 30, bytes.len() - 1] {
            assert!(read_machine(&bytes[..cut]).is_err(), "cut at {cut}");
        }
        let mut v = bytes.clone();
        v.push(0);
        assert!(matches!(
            read_machine(&v),
            Err(FormatError::Invalid("trailing bytes"))
        ));
        let mut v = bytes;
        v[24..28].copy_from_slice(&u32::MAX.to_le_bytes());
        assert!(read_machine(&v).is_err());
    }
}
