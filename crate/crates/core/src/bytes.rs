//! Fixed-width byte sets and growable bit vectors.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// A subset of the 256-byte alphabet.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ByteSet([u64; 4]);

impl ByteSet {
    pub const fn empty() -> ByteSet {
        ByteSet([0; 4])
    }

    pub const fn full() -> ByteSet {
        ByteSet([u64::MAX; 4])
    }

    pub fn singleton(b: u8) -> ByteSet {
        let mut set = ByteSet::empty();
        set.insert(b);
        set
    }

    pub fn range(lo: u8, hi: u8) -> ByteSet {
        let mut set = ByteSet::empty();
        for b in lo..=hi {
            set.insert(b);
        }
        set
    }

    pub fn from_bytes(bytes: &[u8]) -> ByteSet {
        let mut set = ByteSet::empty();
        for &b in bytes {
            set.insert(b);
        }
        set
    }

    #[inline]
    pub fn insert(&mut self, b: u8) {
        self.0[usize::from(b >> 6)] |= 1 << (b & 63);
    }

    #[inline]
    pub fn contains(&self, b: u8) -> bool {
        self.0[usize::from(b >> 6)] & (1 << (b & 63)) != 0
    }

    pub fn union(&self, other: &ByteSet) -> ByteSet {
        let mut out = *self;
        for (o, x) in out.0.iter_mut().zip(other.0.iter()) {
            *o |= x;
        }
        out
    }

    pub fn complement(&self) -> ByteSet {
        ByteSet([!self.0[0], !self.0[1], !self.0[2], !self.0[3]])
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|w| *w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.0.iter().all(|w| *w == u64::MAX)
    }

    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// The single member, if the set has exactly one.
    pub fn single(&self) -> Option<u8> {
        if self.len() == 1 {
            self.iter().next()
        } else {
            None
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        (0..=255u8).filter(move |b| self.contains(*b))
    }

    /// Maximal runs of consecutive members as inclusive `(lo, hi)` pairs.
    pub fn ranges(&self) -> Vec<(u8, u8)> {
        let mut out = Vec::new();
        let mut start: Option<u8> = None;
        for b in 0..=255u8 {
            match (self.contains(b), start) {
                (true, None) => start = Some(b),
                (false, Some(lo)) => {
                    out.push((lo, b - 1));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(lo) = start {
            out.push((lo, 255));
        }
        out
    }
}

impl fmt::Debug for ByteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (lo, hi)) in self.ranges().into_iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            if lo == hi {
                write!(f, "{:?}", lo as char)?;
            } else {
                write!(f, "{:?}-{:?}", lo as char, hi as char)?;
            }
        }
        f.write_str("}")
    }
}

/// A fixed-length vector of bits.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> BitVec {
        BitVec {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] & (1 << (i % 64)) != 0
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        if value {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
    }

    pub fn any(&self) -> bool {
        self.words.iter().any(|w| *w != 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |i| self.get(*i))
    }

    /// True if any bit in `lo..=hi` is set.
    pub fn any_in(&self, lo: usize, hi: usize) -> bool {
        (lo..=hi.min(self.len.saturating_sub(1))).any(|i| self.get(i))
    }

    /// Moves every bit one position up; the top bit falls off and bit 0 becomes 0.
    pub fn shift_up(&mut self) {
        let mut carry = 0u64;
        for w in self.words.iter_mut() {
            let next = *w >> 63;
            *w = (*w << 1) | carry;
            carry = next;
        }
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    /// Bitwise `self <= other` under the product order.
    pub fn le(&self, other: &BitVec) -> bool {
        self.len == other.len
            && self
                .words
                .iter()
                .zip(&other.words)
                .all(|(a, b)| a & !b == 0)
    }

    pub fn or_assign(&mut self, other: &BitVec) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Heap bytes held by this vector.
    pub fn heap_bytes(&self) -> usize {
        self.words.capacity() * core::mem::size_of::<u64>()
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn byteset_ranges_and_complement() {
        let set = ByteSet::range(b'0', b'9').union(&ByteSet::singleton(b'x'));
        assert_eq!(set.len(), 11);
        assert_eq!(set.ranges(), alloc::vec![(b'0', b'9'), (b'x', b'x')]);
        let neg = set.complement();
        assert_eq!(neg.len(), 245);
        assert!(!neg.contains(b'5'));
        assert!(ByteSet::full().is_full());
        assert_eq!(ByteSet::full().ranges(), alloc::vec![(0, 255)]);
        assert_eq!(ByteSet::singleton(7).single(), Some(7));
    }

    #[test]
    fn bitvec_shift_drops_top_bit() {
        let mut bits = BitVec::zeros(70);
        bits.set(0, true);
        bits.set(63, true);
        bits.set(69, true);
        bits.shift_up();
        assert_eq!(bits.ones().collect::<Vec<_>>(), alloc::vec![1, 64]);
        assert!(bits.any_in(60, 69));
        assert!(!bits.any_in(2, 63));
    }
}
