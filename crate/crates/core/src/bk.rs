//! Bravyi–Kitaev layer built on the partial-sum (Fenwick) tree.
//!
//! BK bit `j` is the parity of occupations `j + 1 - lowbit(j + 1) ..= j`, which
//! is well defined for every `M`, not only powers of two.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::bits::BitString;
use crate::error::{Error, Result};

#[inline]
fn lowbit(i: usize) -> usize {
    i & i.wrapping_neg()
}

/// Nodes whose parity ranges contain mode `j`, including `j` itself.
pub fn update_set(modes: usize, j: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut i = j + 1;
    while i <= modes {
        out.push(i - 1);
        i += lowbit(i);
    }
    out
}

/// Nodes whose XOR is the occupation parity of modes `0..len`.
pub fn prefix_set(len: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut i = len;
    while i > 0 {
        out.push(i - 1);
        i -= lowbit(i);
    }
    out.reverse();
    out
}

/// Nodes whose XOR is the occupation of mode `j`.
pub fn occupation_set(j: usize) -> Vec<usize> {
    symmetric_difference(&prefix_set(j), &prefix_set(j + 1))
}

fn symmetric_difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = a.iter().filter(|x| !b.contains(x)).copied().collect();
    out.extend(b.iter().filter(|x| !a.contains(x)));
    out.sort_unstable();
    out
}

/// Row `j` of the transform matrix: the modes summed into BK bit `j`.
pub fn parity_range(j: usize) -> std::ops::RangeInclusive<usize> {
    (j + 1 - lowbit(j + 1))..=j
}

pub fn bk_encode(occ: &BitString) -> BitString {
    let m = occ.len();
    let mut out = BitString::zeros(m);
    for j in occ.ones() {
        for k in update_set(m, j) {
            out.flip(k);
        }
    }
    out
}

pub fn bk_decode(b: &BitString) -> BitString {
    let m = b.len();
    let mut out = BitString::zeros(m);
    for j in 0..m {
        let parity = occupation_set(j).into_iter().filter(|&k| b.get(k)).count() % 2;
        out.set(j, parity == 1);
    }
    out
}

/// `M x M` transform over GF(2); row `j` lists the modes feeding BK bit `j`.
pub fn transform_matrix(modes: usize) -> Vec<BitString> {
    (0..modes)
        .map(|j| BitString::from_indices(modes, parity_range(j)).expect("range within modes"))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MajoranaKind {
    /// `a + a†`
    Even,
    /// `i(a† - a)`
    Odd,
}

/// `i^phase · X^x · Z^z`; the Z string acts first.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliSupport {
    pub x: Vec<usize>,
    pub z: Vec<usize>,
    /// Power of `i`, taken mod 4.
    pub phase: u8,
}

impl PauliSupport {
    pub fn identity() -> Self {
        Self {
            x: Vec::new(),
            z: Vec::new(),
            phase: 0,
        }
    }

    pub fn new(mut x: Vec<usize>, mut z: Vec<usize>, phase: u8) -> Self {
        x.sort_unstable();
        x.dedup();
        z.sort_unstable();
        z.dedup();
        Self { x, z, phase: phase % 4 }
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x.is_empty() && self.z.is_empty()
    }

    /// `|x ∩ z|`: the number of qubits carrying a `Y` up to phase.
    pub fn xz_overlap(&self) -> usize {
        self.x.iter().filter(|q| self.z.binary_search(q).is_ok()).count()
    }

    /// True when the operator is Hermitian, i.e. `i^phase` equals
    /// `±i^{|x ∩ z|}`.
    pub fn is_hermitian(&self) -> bool {
        (self.phase as usize + 4 - self.xz_overlap() % 4) % 2 == 0
    }

    pub fn max_index(&self) -> Option<usize> {
        self.x.last().copied().max(self.z.last().copied())
    }

    /// `self · rhs`, moving the Z string of `self` past the X string of `rhs`.
    pub fn mul(&self, rhs: &Self) -> Self {
        let swaps = self.z.iter().filter(|q| rhs.x.binary_search(q).is_ok()).count();
        let phase = (self.phase as usize + rhs.phase as usize + 2 * (swaps % 2)) % 4;
        Self {
            x: symmetric_difference(&self.x, &rhs.x),
            z: symmetric_difference(&self.z, &rhs.z),
            phase: phase as u8,
        }
    }

    pub fn phase_value(&self) -> Complex64 {
        match self.phase % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    /// Image of a basis state: `(flipped state, amplitude)`.
    pub fn apply_basis(&self, state: &BitString) -> (BitString, Complex64) {
        let parity = self.z.iter().filter(|&&q| state.get(q)).count() % 2;
        let mut out = state.clone();
        for &q in &self.x {
            out.flip(q);
        }
        let sign = if parity == 1 { -1.0 } else { 1.0 };
        (out, self.phase_value() * sign)
    }

    /// Dense matrix on `qubits` qubits; qubit `q` is bit `q` of the basis index.
    pub fn dense(&self, qubits: usize) -> DMatrix<Complex64> {
        let dim = 1usize << qubits;
        let xmask: usize = self.x.iter().map(|&q| 1 << q).sum();
        let zmask: usize = self.z.iter().map(|&q| 1 << q).sum();
        let mut m = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let sign = if (col & zmask).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            m[(col ^ xmask, col)] = self.phase_value() * sign;
        }
        m
    }
}

pub fn pauli_product<'a>(factors: impl IntoIterator<Item = &'a PauliSupport>) -> PauliSupport {
    factors.into_iter().fold(PauliSupport::identity(), |acc, f| acc.mul(f))
}

fn write_set(f: &mut fmt::Formatter<'_>, name: char, set: &[usize]) -> fmt::Result {
    write!(f, "{name}{{")?;
    for (k, q) in set.iter().enumerate() {
        if k > 0 {
            f.write_str(",")?;
        }
        write!(f, "{q}")?;
    }
    f.write_str("}")
}

impl fmt::Display for PauliSupport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(["+1", "+i", "-1", "-i"][self.phase as usize % 4])?;
        f.write_str(" ")?;
        write_set(f, 'X', &self.x)?;
        f.write_str(" ")?;
        write_set(f, 'Z', &self.z)
    }
}

impl fmt::Debug for PauliSupport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliSupport({self})")
    }
}

impl FromStr for PauliSupport {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::parse(1, format!("bad Pauli support {s:?}"));
        let mut parts = s.split_whitespace();
        let phase = match parts.next().ok_or_else(bad)? {
            "+1" | "+" => 0,
            "+i" => 1,
            "-1" | "-" => 2,
            "-i" => 3,
            _ => return Err(bad()),
        };
        let mut x = None;
        let mut z = None;
        for part in parts {
            let (name, rest) = part.split_at(1);
            let inner = rest
                .strip_prefix('{')
                .and_then(|r| r.strip_suffix('}'))
                .ok_or_else(bad)?;
            let set = inner
                .split(',')
                .filter(|t| !t.is_empty())
                .map(|t| t.trim().parse::<usize>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?;
            match name {
                "X" if x.is_none() => x = Some(set),
                "Z" if z.is_none() => z = Some(set),
                _ => return Err(bad()),
            }
        }
        Ok(Self::new(x.unwrap_or_default(), z.unwrap_or_default(), phase))
    }
}

/// BK image of the Majorana operator of `kind` on mode `j`.
pub fn majorana_support(modes: usize, j: usize, kind: MajoranaKind) -> Result<PauliSupport> {
    if j >= modes {
        return Err(Error::invalid(format!("mode {j} out of range for {modes} modes")));
    }
    let x = update_set(modes, j);
    Ok(match kind {
        MajoranaKind::Even => PauliSupport::new(x, prefix_set(j), 0),
        MajoranaKind::Odd => PauliSupport::new(x, prefix_set(j + 1), 1),
    })
}

/// BK image of the encoded `Z^(f)_j`, the occupation parity of mode `j`.
pub fn number_parity_support(modes: usize, j: usize) -> Result<PauliSupport> {
    if j >= modes {
        return Err(Error::invalid(format!("mode {j} out of range for {modes} modes")));
    }
    Ok(PauliSupport::new(Vec::new(), occupation_set(j), 0))
}

/// BK image of the occupation flip `X^(f)_j` without Jordan–Wigner sign.
pub fn occupation_flip_support(modes: usize, j: usize) -> Result<PauliSupport> {
    if j >= modes {
        return Err(Error::invalid(format!("mode {j} out of range for {modes} modes")));
    }
    Ok(PauliSupport::new(update_set(modes, j), Vec::new(), 0))
}
