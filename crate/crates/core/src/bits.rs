//! Binary program texts.

use std::fmt;

/// A finite bit string, used for programs on the machines' input tapes.
///
/// Ordering is length-first, then lexicographic: the order in which the
/// enumeration engine visits programs and the tie-break order used when a
/// single shortest program must be selected.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    bits: Vec<u8>,
}

impl BitString {
    pub fn empty() -> Self {
        BitString { bits: Vec::new() }
    }

    /// Panics if any element is not 0 or 1.
    pub fn from_bits(bits: &[u8]) -> Self {
        assert!(bits.iter().all(|b| *b <= 1), "bit values must be 0 or 1");
        BitString { bits: bits.to_vec() }
    }

    /// Parses a `0`/`1` literal, e.g. `parse("1010")`. Empty input is ε.
    pub fn parse(s: &str) -> Option<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for ch in s.chars() {
            match ch {
                '0' => bits.push(0),
                '1' => bits.push(1),
                _ => return None,
            }
        }
        Some(BitString { bits })
    }

    /// Big-endian encoding of `value` in exactly `width` bits.
    pub fn from_uint(value: u64, width: u32) -> Self {
        let mut bits = Vec::with_capacity(width as usize);
        for i in (0..width).rev() {
            bits.push(((value >> i) & 1) as u8);
        }
        BitString { bits }
    }

    /// Big-endian integer value of the whole string.
    pub fn to_uint(&self) -> u64 {
        self.bits.iter().fold(0, |acc, b| (acc << 1) | *b as u64)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, i: usize) -> u8 {
        self.bits[i]
    }

    pub fn get(&self, i: usize) -> Option<u8> {
        self.bits.get(i).copied()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn push(&mut self, b: u8) {
        debug_assert!(b <= 1);
        self.bits.push(b);
    }

    pub fn pop(&mut self) -> Option<u8> {
        self.bits.pop()
    }

    pub fn child(&self, b: u8) -> BitString {
        let mut out = self.clone();
        out.push(b);
        out
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&other.bits);
        BitString { bits }
    }

    /// The suffix starting at bit `n`.
    pub fn suffix(&self, n: usize) -> BitString {
        BitString { bits: self.bits[n.min(self.bits.len())..].to_vec() }
    }

    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        other.bits.starts_with(&self.bits)
    }

    pub fn is_proper_prefix_of(&self, other: &BitString) -> bool {
        self.bits.len() < other.bits.len() && self.is_prefix_of(other)
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BitString {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.bits.len().cmp(&other.bits.len()).then_with(|| self.bits.cmp(&other.bits))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bits.is_empty() {
            return write!(f, "eps");
        }
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let p = BitString::parse("1010").unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(p.to_string(), "1010");
        assert_eq!(BitString::empty().to_string(), "eps");
        assert!(BitString::parse("102").is_none());
    }

    #[test]
    fn uint_roundtrip() {
        let q = BitString::from_uint(4, 4);
        assert_eq!(q.to_string(), "0100");
        assert_eq!(q.to_uint(), 4);
        assert_eq!(BitString::from_uint(0, 3).to_string(), "000");
    }

    #[test]
    fn length_lex_order() {
        let mut v = [BitString::parse("1").unwrap(),
            BitString::parse("00").unwrap(),
            BitString::empty(),
            BitString::parse("0").unwrap(),
            BitString::parse("11").unwrap()];
        v.sort();
        let shown: Vec<String> = v.iter().map(|b| b.to_string()).collect();
        assert_eq!(shown, vec!["eps", "0", "1", "00", "11"]);
    }

    #[test]
    fn prefix_relations() {
        let p = BitString::parse("10").unwrap();
        let q = BitString::parse("101").unwrap();
        assert!(p.is_prefix_of(&q));
        assert!(p.is_proper_prefix_of(&q));
        assert!(!q.is_prefix_of(&p));
        assert!(BitString::empty().is_prefix_of(&p));
        assert!(p.is_prefix_of(&p));
        assert!(!p.is_proper_prefix_of(&p));
    }
}
