//! Finite alphabets and symbol strings.

use std::fmt;

use thiserror::Error;

/// Index of a symbol within an [`Alphabet`].
pub type Symbol = u8;

const SYMBOL_DIGITS: &[u8] = b"0123456789abcdefghijklmnopqrstuvwxyz";

/// Base-36 digit for a symbol index, the rendering used everywhere symbols
/// appear in text.
pub fn symbol_char(s: Symbol) -> char {
    SYMBOL_DIGITS[s as usize] as char
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlphabetError {
    #[error("alphabet size must be at least 2, got {0}")]
    TooSmall(usize),
    #[error("alphabet size must be at most 36, got {0}")]
    TooLarge(usize),
    #[error("symbol {symbol} out of range for alphabet of size {size}")]
    SymbolOutOfRange { symbol: Symbol, size: usize },
    #[error("invalid symbol character {0:?}")]
    BadChar(char),
}

/// A finite alphabet; symbols are the contiguous indices `0..size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Alphabet {
    size: usize,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self, AlphabetError> {
        if size < 2 {
            return Err(AlphabetError::TooSmall(size));
        }
        if size > SYMBOL_DIGITS.len() {
            return Err(AlphabetError::TooLarge(size));
        }
        Ok(Alphabet { size })
    }

    pub fn binary() -> Self {
        Alphabet { size: 2 }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> {
        0..self.size as Symbol
    }

    pub fn contains(&self, s: Symbol) -> bool {
        (s as usize) < self.size
    }
}

/// A finite string of symbols over a fixed alphabet. The empty string is allowed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolString {
    alphabet: Alphabet,
    syms: Vec<Symbol>,
}

impl SymbolString {
    pub fn empty(alphabet: Alphabet) -> Self {
        SymbolString { alphabet, syms: Vec::new() }
    }

    pub fn new(alphabet: Alphabet, syms: Vec<Symbol>) -> Result<Self, AlphabetError> {
        if let Some(&bad) = syms.iter().find(|s| !alphabet.contains(**s)) {
            return Err(AlphabetError::SymbolOutOfRange { symbol: bad, size: alphabet.size() });
        }
        Ok(SymbolString { alphabet, syms })
    }

    /// Binary string from a `0`/`1` digit literal, e.g. `bits("0101")`.
    pub fn bits(s: &str) -> Self {
        Self::parse(Alphabet::binary(), s).expect("invalid bit literal")
    }

    /// Parses a digit literal (`0`..`9`, `a`..`z` for larger alphabets).
    pub fn parse(alphabet: Alphabet, s: &str) -> Result<Self, AlphabetError> {
        let mut syms = Vec::with_capacity(s.len());
        for ch in s.chars() {
            let idx = SYMBOL_DIGITS
                .iter()
                .position(|d| *d as char == ch.to_ascii_lowercase())
                .ok_or(AlphabetError::BadChar(ch))?;
            syms.push(idx as Symbol);
        }
        Self::new(alphabet, syms)
    }

    pub fn repeated(alphabet: Alphabet, sym: Symbol, n: usize) -> Result<Self, AlphabetError> {
        Self::new(alphabet, vec![sym; n])
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.syms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.syms.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.syms
    }

    pub fn symbol(&self, i: usize) -> Symbol {
        self.syms[i]
    }

    pub fn push(&mut self, s: Symbol) {
        debug_assert!(self.alphabet.contains(s));
        self.syms.push(s);
    }

    pub fn pop(&mut self) -> Option<Symbol> {
        self.syms.pop()
    }

    /// The string extended by one symbol.
    pub fn child(&self, s: Symbol) -> SymbolString {
        let mut out = self.clone();
        out.push(s);
        out
    }

    /// Prefix of the first `n` symbols.
    pub fn prefix(&self, n: usize) -> SymbolString {
        SymbolString { alphabet: self.alphabet, syms: self.syms[..n.min(self.syms.len())].to_vec() }
    }

    pub fn starts_with(&self, other: &SymbolString) -> bool {
        self.syms.starts_with(&other.syms)
    }

    pub fn concat(&self, other: &SymbolString) -> SymbolString {
        let mut syms = self.syms.clone();
        syms.extend_from_slice(&other.syms);
        SymbolString { alphabet: self.alphabet, syms }
    }

    /// All strings over `alphabet` of exactly length `n`, lexicographic.
    pub fn all_of_length(alphabet: Alphabet, n: usize) -> Vec<SymbolString> {
        let mut out = vec![SymbolString::empty(alphabet)];
        for _ in 0..n {
            let mut next = Vec::with_capacity(out.len() * alphabet.size());
            for s in &out {
                for a in alphabet.symbols() {
                    next.push(s.child(a));
                }
            }
            out = next;
        }
        out
    }
}

impl fmt::Display for SymbolString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.syms {
            write!(f, "{}", SYMBOL_DIGITS[*s as usize] as char)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alphabet_bounds() {
        assert_eq!(Alphabet::new(1), Err(AlphabetError::TooSmall(1)));
        assert_eq!(Alphabet::new(0), Err(AlphabetError::TooSmall(0)));
        assert!(Alphabet::new(2).is_ok());
        assert!(Alphabet::new(36).is_ok());
        assert!(Alphabet::new(37).is_err());
    }

    #[test]
    fn string_basics() {
        let x = SymbolString::bits("0101");
        assert_eq!(x.len(), 4);
        assert_eq!(x.to_string(), "0101");
        assert!(x.starts_with(&SymbolString::bits("010")));
        assert!(x.starts_with(&SymbolString::empty(Alphabet::binary())));
        assert!(!x.starts_with(&SymbolString::bits("00")));
        assert_eq!(x.prefix(2), SymbolString::bits("01"));

        let bad = SymbolString::new(Alphabet::binary(), vec![0, 2]);
        assert!(bad.is_err());
    }

    #[test]
    fn enumerate_strings() {
        let all = SymbolString::all_of_length(Alphabet::binary(), 3);
        assert_eq!(all.len(), 8);
        assert_eq!(all[0].to_string(), "000");
        assert_eq!(all[7].to_string(), "111");
    }
}
