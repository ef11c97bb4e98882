//! Fixed-length bit strings shared by the occupation, BK and codeword layers.

use std::fmt;
use std::ops::{BitXor, BitXorAssign};

use crate::error::{Error, Result};

/// A fixed-length sequence of bits packed into 64-bit words, bit `i` living
/// in word `i / 64` at position `i % 64`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut out = Self::zeros(len);
        for i in indices {
            if i >= len {
                return Err(Error::OutOfRange { index: i, limit: len });
            }
            out.set(i, true);
        }
        Ok(out)
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut out = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            out.set(i, b);
        }
        out
    }

    /// Parses a string of `0`/`1` characters; whitespace is ignored so the
    /// block-separated codeword format parses directly.
    pub fn parse01(text: &str) -> Result<Self> {
        let mut bits = Vec::new();
        for c in text.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                c if c.is_whitespace() => {}
                c => return Err(Error::invalid(format!("unexpected character {c:?} in bit string"))),
            }
        }
        Ok(Self::from_bools(&bits))
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
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i & 63);
        if value {
            self.words[i >> 6] |= mask;
        } else {
            self.words[i >> 6] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i >> 6] ^= 1u64 << (i & 63);
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Number of positions set in both strings.
    pub fn dot(&self, other: &Self) -> usize {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let tz = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * 64 + tz)
            })
        })
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// `0`/`1` characters with a space inserted after every `block` bits.
    pub fn to_blocked_string(&self, block: usize) -> String {
        let mut s = String::with_capacity(self.len + self.len / block.max(1));
        for i in 0..self.len {
            if block > 0 && i > 0 && i % block == 0 {
                s.push(' ');
            }
            s.push(if self.get(i) { '1' } else { '0' });
        }
        s
    }

    /// Packed hexadecimal: bit `i` is bit `i % 4` (LSB first) of nibble `i / 4`,
    /// nibbles written in order of increasing bit position.
    pub fn to_hex(&self) -> String {
        let nibbles = self.len.div_ceil(4);
        (0..nibbles)
            .map(|n| {
                let mut v = 0u32;
                for k in 0..4 {
                    let i = 4 * n + k;
                    if i < self.len && self.get(i) {
                        v |= 1 << k;
                    }
                }
                char::from_digit(v, 16).unwrap()
            })
            .collect()
    }

    pub fn from_hex(len: usize, hex: &str) -> Result<Self> {
        let hex = hex.trim();
        if hex.len() != len.div_ceil(4) {
            return Err(Error::invalid(format!(
                "hex string has {} nibbles, expected {}",
                hex.len(),
                len.div_ceil(4)
            )));
        }
        let mut out = Self::zeros(len);
        for (n, c) in hex.chars().enumerate() {
            let v = c
                .to_digit(16)
                .ok_or_else(|| Error::invalid(format!("bad hex digit {c:?}")))?;
            for k in 0..4 {
                if v >> k & 1 == 1 {
                    let i = 4 * n + k;
                    if i >= len {
                        return Err(Error::invalid("hex string sets bits past the length"));
                    }
                    out.set(i, true);
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_blocked_string(0))
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({})", self.to_blocked_string(0))
    }
}

impl BitXorAssign<&BitString> for BitString {
    fn bitxor_assign(&mut self, rhs: &BitString) {
        assert_eq!(self.len, rhs.len, "length mismatch in xor");
        for (a, b) in self.words.iter_mut().zip(&rhs.words) {
            *a ^= b;
        }
    }
}

impl BitXor for &BitString {
    type Output = BitString;

    fn bitxor(self, rhs: &BitString) -> BitString {
        let mut out = self.clone();
        out ^= rhs;
        out
    }
}
