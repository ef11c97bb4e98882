//! Degree-D code parameters, elementary codewords, and the encode/decode pair.
//!
//! Each mode is assigned the polynomial whose coefficients are the base-`L'`
//! digits of its index. Its elementary codeword has `L` blocks of `L'` bits;
//! block `x` carries a single 1 at offset `y(x)`. Blocks are laid out in order
//! and offset 0 is the leftmost bit of a block, so bit `x * L' + y(x)` is set.

use std::collections::HashSet;
use std::fmt;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::ffpoly::{ceil_integer_root, is_prime, next_prime, PolyFn};

/// `ceil(log2(M + 1))`, the bit length of `M`.
pub fn bk_weight_per_fermion(modes: u64) -> u64 {
    (64 - modes.leading_zeros()) as u64
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DeriveOptions {
    /// Interpret the count argument as `G` directly.
    pub use_raw_g: bool,
    /// Replace `F` by `F + 4` (Hamiltonian compilation).
    pub add_four_margin: bool,
    /// Reject parameter sets with more qubits than this.
    pub max_qubits: Option<u64>,
}

impl DeriveOptions {
    pub fn raw_g() -> Self {
        Self {
            use_raw_g: true,
            ..Self::default()
        }
    }

    pub fn hamiltonian() -> Self {
        Self {
            add_four_margin: true,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeParams {
    pub modes: u64,
    /// Fermion count the parameters were derived from; `None` for raw `G`.
    pub fermions: Option<u64>,
    pub degree: usize,
    pub g: u64,
    pub l: u64,
    pub lprime: u64,
    pub qubits: u64,
}

impl CodeParams {
    pub fn derive(modes: u64, f_or_g: u64, degree: usize, opts: DeriveOptions) -> Result<Self> {
        if modes == 0 {
            return Err(Error::invalid("need at least one mode"));
        }
        if f_or_g == 0 {
            return Err(Error::invalid("fermion count (or G) must be positive"));
        }
        let (fermions, g) = if opts.use_raw_g {
            (None, f_or_g)
        } else {
            let f = if opts.add_four_margin { f_or_g + 4 } else { f_or_g };
            (Some(f), f * bk_weight_per_fermion(modes))
        };
        let l = 2 * degree as u64 * g + 1;
        let root = ceil_integer_root(modes, degree as u32 + 1);
        let lprime = next_prime(root.max(l).max(2))?;
        if degree as u64 >= lprime {
            return Err(Error::DegreeTooLarge { degree, lprime });
        }
        let qubits = lprime
            .checked_mul(l)
            .ok_or_else(|| Error::Capacity("qubit count overflows u64".into()))?;
        if let Some(cap) = opts.max_qubits {
            if qubits > cap {
                return Err(Error::Capacity(format!("{qubits} qubits exceeds the limit {cap}")));
            }
        }
        Ok(Self {
            modes,
            fermions,
            degree,
            g,
            l,
            lprime,
            qubits,
        })
    }

    /// Parameters with an explicitly chosen block prime, as used for
    /// desk-scale codes. `L = 2DG + 1` is still forced.
    pub fn with_lprime(modes: u64, g: u64, degree: usize, lprime: u64) -> Result<Self> {
        if g == 0 {
            return Err(Error::invalid("G must be positive"));
        }
        let l = 2 * degree as u64 * g + 1;
        let p = Self {
            modes,
            fermions: None,
            degree,
            g,
            l,
            lprime,
            qubits: lprime * l,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !is_prime(self.lprime) {
            return Err(Error::InvalidParams(format!("L' = {} is not prime", self.lprime)));
        }
        if self.l % 2 == 0 {
            return Err(Error::InvalidParams(format!("L = {} is even", self.l)));
        }
        if self.l <= 2 * self.degree as u64 * self.g {
            return Err(Error::InvalidParams(format!(
                "L = {} must exceed 2DG = {}",
                self.l,
                2 * self.degree as u64 * self.g
            )));
        }
        if self.lprime < self.l {
            return Err(Error::InvalidParams(format!(
                "L' = {} is smaller than L = {}",
                self.lprime, self.l
            )));
        }
        if self.degree as u64 >= self.lprime {
            return Err(Error::DegreeTooLarge {
                degree: self.degree,
                lprime: self.lprime,
            });
        }
        if self.g == 0 {
            return Err(Error::InvalidParams("G must be positive".into()));
        }
        if self.modes == 0 || (self.lprime as u128).pow(self.degree as u32 + 1) < self.modes as u128 {
            return Err(Error::InvalidParams(format!(
                "{} modes do not fit in L'^(D+1)",
                self.modes
            )));
        }
        if self.qubits != self.lprime * self.l {
            return Err(Error::InvalidParams("Q must equal L' * L".into()));
        }
        Ok(())
    }

    /// Flat `key = value` record.
    pub fn to_record(&self) -> String {
        let fermions = self.fermions.map_or_else(|| "-".to_string(), |f| f.to_string());
        format!(
            "modes = {}\nfermions = {}\ndegree = {}\ng = {}\nl = {}\nlprime = {}\nqubits = {}\nmode_map = base-lprime-digits\n",
            self.modes, fermions, self.degree, self.g, self.l, self.lprime, self.qubits
        )
    }

    pub fn from_record(text: &str) -> Result<Self> {
        let mut get = std::collections::HashMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(n + 1, "expected key = value"))?;
            get.insert(k.trim().to_string(), (n + 1, v.trim().to_string()));
        }
        let num = |key: &str| -> Result<u64> {
            let (line, v) = get
                .get(key)
                .ok_or_else(|| Error::parse(0, format!("missing key {key}")))?;
            v.parse()
                .map_err(|_| Error::parse(*line, format!("bad integer for {key}: {v}")))
        };
        let fermions = match get.get("fermions") {
            Some((_, v)) if v == "-" => None,
            Some((line, v)) => Some(
                v.parse()
                    .map_err(|_| Error::parse(*line, format!("bad fermion count {v}")))?,
            ),
            None => None,
        };
        let p = Self {
            modes: num("modes")?,
            fermions,
            degree: num("degree")? as usize,
            g: num("g")?,
            l: num("l")?,
            lprime: num("lprime")?,
            qubits: num("qubits")?,
        };
        p.validate()?;
        Ok(p)
    }
}

impl fmt::Display for CodeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "M={} D={} G={} L={} L'={} Q={}",
            self.modes, self.degree, self.g, self.l, self.lprime, self.qubits
        )
    }
}

/// Codebook for one parameter set with the block offsets `y_i(x)` of every
/// elementary codeword precomputed.
#[derive(Clone, Debug)]
pub struct Codebook {
    params: CodeParams,
    offsets: Vec<u32>,
}

/// Above this many table entries the codebook evaluates offsets on demand.
const TABLE_LIMIT: u64 = 1 << 26;

impl Codebook {
    pub fn new(params: CodeParams) -> Result<Self> {
        params.validate()?;
        let entries = params.modes.saturating_mul(params.l);
        let offsets = if entries <= TABLE_LIMIT && params.lprime <= u32::MAX as u64 {
            let mut t = Vec::with_capacity(entries as usize);
            for m in 0..params.modes {
                let poly = PolyFn::from_index(m, params.degree, params.lprime)?;
                t.extend((0..params.l).map(|x| poly.eval(x) as u32));
            }
            t
        } else {
            Vec::new()
        };
        Ok(Self { params, offsets })
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn modes(&self) -> usize {
        self.params.modes as usize
    }

    pub fn qubits(&self) -> usize {
        self.params.qubits as usize
    }

    pub fn polynomial(&self, mode: usize) -> Result<PolyFn> {
        self.check_mode(mode)?;
        PolyFn::from_index(mode as u64, self.params.degree, self.params.lprime)
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode as u64 >= self.params.modes {
            return Err(Error::OutOfRange {
                index: mode,
                limit: self.params.modes as usize,
            });
        }
        Ok(())
    }

    /// Bit positions of the `L` ones in the elementary codeword of `mode`,
    /// i.e. the support set `S_mode`.
    pub fn support(&self, mode: usize) -> Result<Vec<usize>> {
        self.check_mode(mode)?;
        Ok(self.support_unchecked(mode))
    }

    fn support_unchecked(&self, mode: usize) -> Vec<usize> {
        let l = self.params.l as usize;
        let lp = self.params.lprime as usize;
        if self.offsets.is_empty() {
            let poly = PolyFn::from_index(mode as u64, self.params.degree, self.params.lprime).expect("mode checked");
            (0..l).map(|x| x * lp + poly.eval(x as u64) as usize).collect()
        } else {
            self.offsets[mode * l..(mode + 1) * l]
                .iter()
                .enumerate()
                .map(|(x, &y)| x * lp + y as usize)
                .collect()
        }
    }

    pub fn elementary_codeword(&self, mode: usize) -> Result<BitString> {
        self.check_mode(mode)?;
        BitString::from_indices(self.qubits(), self.support_unchecked(mode))
    }

    /// XOR of the elementary codewords of the set bits of `b`.
    pub fn encode(&self, b: &BitString) -> Result<BitString> {
        if b.len() != self.modes() {
            return Err(Error::invalid(format!(
                "BK string has length {}, code has {} modes",
                b.len(),
                self.modes()
            )));
        }
        let weight = b.weight();
        if weight as u64 > self.params.g {
            return Err(Error::WeightExceeded {
                weight,
                limit: self.params.g as usize,
            });
        }
        let mut w = BitString::zeros(self.qubits());
        for i in b.ones() {
            for q in self.support_unchecked(i) {
                w.flip(q);
            }
        }
        Ok(w)
    }

    /// `|S_mode ∩ w|`, the overlap of an elementary codeword with `w`.
    pub fn overlap(&self, mode: usize, w: &BitString) -> usize {
        let l = self.params.l as usize;
        let lp = self.params.lprime as usize;
        if self.offsets.is_empty() {
            self.support_unchecked(mode).into_iter().filter(|&q| w.get(q)).count()
        } else {
            self.offsets[mode * l..(mode + 1) * l]
                .iter()
                .enumerate()
                .filter(|(x, &y)| w.get(x * lp + y as usize))
                .count()
        }
    }

    /// Modes whose codeword has a one at `qubit`: the polynomials with
    /// `f(x) = y` for block `x`, offset `y`.
    pub fn holders(&self, qubit: usize) -> impl Iterator<Item = usize> + '_ {
        let lp = self.params.lprime;
        let (x, y) = (qubit as u64 / lp, qubit as u64 % lp);
        let higher = self.params.modes.div_ceil(lp);
        (0..higher).filter_map(move |h| {
            // c0 = y - Σ_{k≥1} c_k x^k with c_k the base-L' digits of h
            let (mut rest, mut pow, mut acc) = (h, x, 0u64);
            for _ in 0..self.params.degree {
                acc = (acc + rest % lp * pow) % lp;
                rest /= lp;
                pow = pow * x % lp;
            }
            let mode = (y + lp - acc) % lp + lp * h;
            (mode < self.params.modes).then_some(mode as usize)
        })
    }

    /// Overlaps of every elementary codeword with `w`.
    pub fn overlaps(&self, w: &BitString) -> Vec<usize> {
        let mut counts = vec![0usize; self.modes()];
        for q in w.ones() {
            for m in self.holders(q) {
                counts[m] += 1;
            }
        }
        counts
    }

    /// Majority-vote decoding: bit `i` is set iff more than half of `S_i` is 1.
    pub fn decode(&self, w: &BitString) -> Result<BitString> {
        if w.len() != self.qubits() {
            return Err(Error::invalid(format!(
                "codeword has length {}, code has {} qubits",
                w.len(),
                self.qubits()
            )));
        }
        let l = self.params.l as usize;
        let b = BitString::from_indices(
            self.modes(),
            self.overlaps(w)
                .iter()
                .enumerate()
                .filter(|&(_, &o)| 2 * o > l)
                .map(|(m, _)| m),
        )?;
        let reencoded = if b.weight() as u64 > self.params.g {
            None
        } else {
            Some(self.encode(&b)?)
        };
        match reencoded {
            Some(e) if &e == w => Ok(b),
            Some(e) => Err(Error::NotACodeword {
                mismatch: (&e ^ w).ones().collect(),
            }),
            None => Err(Error::NotACodeword {
                mismatch: w.ones().collect(),
            }),
        }
    }

    pub fn format_codeword(&self, w: &BitString) -> String {
        w.to_blocked_string(self.params.lprime as usize)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyMode {
    Exhaustive,
    Sampled { trials: usize, seed: u64 },
}

/// Budget of elementary codewords for exhaustive pair checks.
pub const EXHAUSTIVE_CODEWORD_LIMIT: u64 = 4096;
/// Largest number of BK strings enumerated in an exhaustive round trip.
pub const EXHAUSTIVE_SUM_LIMIT: u128 = 100_000;
/// Random sums tested in exhaustive mode once all sums exceed the limit.
pub const FALLBACK_SUM_SAMPLES: usize = 1_000;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerificationReport {
    pub codewords_checked: usize,
    pub pairs_checked: usize,
    pub sums_checked: usize,
    pub max_overlap: usize,
    /// Least overlap of a member codeword with a tested sum.
    pub min_member_overlap: Option<usize>,
    /// Greatest overlap of a non-member codeword with a tested sum.
    pub max_nonmember_overlap: Option<usize>,
    pub weight_violation: Option<(usize, usize)>,
    pub overlap_violation: Option<(usize, usize, usize)>,
    pub membership_violation: Option<String>,
    pub roundtrip_violation: Option<Vec<usize>>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.weight_violation.is_none()
            && self.overlap_violation.is_none()
            && self.membership_violation.is_none()
            && self.roundtrip_violation.is_none()
    }
}

fn binomial_sum(n: u64, k_max: u64) -> u128 {
    let mut total: u128 = 0;
    let mut term: u128 = 1;
    for k in 0..=k_max.min(n) {
        if k > 0 {
            term = term * (n - k + 1) as u128 / k as u128;
        }
        total += term;
        if total > u64::MAX as u128 {
            break;
        }
    }
    total
}

/// Checks weight, pairwise overlap, and decoding of sums of up to `g`
/// codewords for an arbitrary set of length-`Q` strings.
pub fn verify_codewords(
    codewords: &[BitString],
    l: usize,
    d: usize,
    g: usize,
    mode: VerifyMode,
) -> Result<VerificationReport> {
    if l <= 2 * d * g {
        return Err(Error::InvalidParams(format!("L = {l} must exceed 2DG = {}", 2 * d * g)));
    }
    let n = codewords.len();
    let mut report = VerificationReport::default();
    let mut rng = match mode {
        VerifyMode::Exhaustive => ChaCha8Rng::seed_from_u64(0),
        VerifyMode::Sampled { seed, .. } => ChaCha8Rng::seed_from_u64(seed),
    };

    let weight_modes: Vec<usize> = match mode {
        VerifyMode::Exhaustive => (0..n).collect(),
        VerifyMode::Sampled { trials, .. } if trials >= n => (0..n).collect(),
        VerifyMode::Sampled { trials, .. } => sample(&mut rng, n, trials).into_vec(),
    };
    for &i in &weight_modes {
        let w = codewords[i].weight();
        if w != l && report.weight_violation.is_none() {
            report.weight_violation = Some((i, w));
        }
    }
    report.codewords_checked = weight_modes.len();

    // holders[q]: codewords with a one at qubit q
    let width = codewords.first().map_or(0, BitString::len);
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); width];
    for (a, w) in codewords.iter().enumerate() {
        for q in w.ones() {
            holders[q].push(a);
        }
    }
    let mut counts = vec![0usize; n];
    let mut touched: Vec<usize> = Vec::new();
    // overlaps of every codeword with `gamma`; untouched entries are zero
    let tally = |gamma: &BitString, counts: &mut [usize], touched: &mut Vec<usize>| {
        for &a in touched.iter() {
            counts[a] = 0;
        }
        touched.clear();
        for q in gamma.ones() {
            for &a in &holders[q] {
                if counts[a] == 0 {
                    touched.push(a);
                }
                counts[a] += 1;
            }
        }
    };

    let note_pair = |report: &mut VerificationReport, i: usize, j: usize, o: usize| {
        report.max_overlap = report.max_overlap.max(o);
        if o > d && report.overlap_violation.is_none() {
            report.overlap_violation = Some((i.min(j), i.max(j), o));
        }
    };
    match mode {
        VerifyMode::Exhaustive => {
            for i in 0..n {
                tally(&codewords[i], &mut counts, &mut touched);
                for &j in touched.iter().filter(|&&j| j > i) {
                    note_pair(&mut report, i, j, counts[j]);
                }
            }
            report.pairs_checked = n * n.saturating_sub(1) / 2;
        }
        VerifyMode::Sampled { trials, .. } => {
            if n >= 2 {
                for _ in 0..trials {
                    let i = rng.gen_range(0..n);
                    let mut j = rng.gen_range(0..n - 1);
                    if j >= i {
                        j += 1;
                    }
                    note_pair(&mut report, i, j, codewords[i].dot(&codewords[j]));
                    report.pairs_checked += 1;
                }
            }
        }
    }

    // sums of up to g codewords
    let total = binomial_sum(n as u64, g as u64);
    let exhaustive_sums = matches!(mode, VerifyMode::Exhaustive) && total <= EXHAUSTIVE_SUM_LIMIT;
    let mut sets: Vec<Vec<usize>> = Vec::new();
    if exhaustive_sums {
        let mut stack: Vec<usize> = Vec::new();
        enumerate_subsets(n, g, 0, &mut stack, &mut sets);
    } else {
        let trials = match mode {
            VerifyMode::Sampled { trials, .. } => trials,
            VerifyMode::Exhaustive => FALLBACK_SUM_SAMPLES,
        };
        for _ in 0..trials {
            let k = rng.gen_range(0..=g.min(n));
            sets.push(sample(&mut rng, n, k).into_vec());
        }
    }
    for set in &sets {
        let mut gamma = BitString::zeros(width);
        for &i in set {
            gamma ^= &codewords[i];
        }
        tally(&gamma, &mut counts, &mut touched);
        let members: HashSet<usize> = set.iter().copied().collect();
        for &a in set {
            let o = counts[a];
            report.min_member_overlap = Some(report.min_member_overlap.map_or(o, |m| m.min(o)));
            if o + (g - 1) * d < l && report.membership_violation.is_none() {
                report.membership_violation = Some(format!("member {a} of {set:?} has overlap {o} < L-(G-1)D"));
            }
        }
        // non-members outside `touched` have overlap zero
        let mut outside = 0;
        for &a in touched.iter().filter(|a| !members.contains(a)) {
            let o = counts[a];
            outside = outside.max(o);
            if o > d * g && report.membership_violation.is_none() {
                report.membership_violation = Some(format!("non-member {a} of {set:?} has overlap {o} > DG"));
            }
        }
        if members.len() < n {
            report.max_nonmember_overlap = Some(report.max_nonmember_overlap.map_or(outside, |m| m.max(outside)));
        }
        let mut decoded: Vec<usize> = touched.iter().copied().filter(|&a| 2 * counts[a] > l).collect();
        decoded.sort_unstable();
        let mut expected = set.clone();
        expected.sort_unstable();
        if decoded != expected && report.roundtrip_violation.is_none() {
            report.roundtrip_violation = Some(expected);
        }
        report.sums_checked += 1;
    }
    Ok(report)
}

fn enumerate_subsets(n: usize, k: usize, start: usize, stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    out.push(stack.clone());
    if stack.len() == k {
        return;
    }
    for i in start..n {
        stack.push(i);
        enumerate_subsets(n, k, i + 1, stack, out);
        stack.pop();
    }
}

/// Verifies the code defined by `params`. Exhaustive mode requires at most
/// [`EXHAUSTIVE_CODEWORD_LIMIT`] elementary codewords.
pub fn verify_code(params: &CodeParams, mode: VerifyMode) -> Result<VerificationReport> {
    params.validate()?;
    if matches!(mode, VerifyMode::Exhaustive) && params.modes > EXHAUSTIVE_CODEWORD_LIMIT {
        return Err(Error::Resource(format!(
            "{} codewords exceed the exhaustive budget of {EXHAUSTIVE_CODEWORD_LIMIT}",
            params.modes
        )));
    }
    let book = Codebook::new(params.clone())?;
    match mode {
        VerifyMode::Exhaustive => {
            let words: Vec<BitString> = (0..book.modes())
                .map(|m| book.elementary_codeword(m))
                .collect::<Result<_>>()?;
            verify_codewords(&words, params.l as usize, params.degree, params.g as usize, mode)
        }
        VerifyMode::Sampled { trials, seed } => verify_sampled(&book, trials, seed),
    }
}

/// Sampled verification that never materialises the whole codebook.
fn verify_sampled(book: &Codebook, trials: usize, seed: u64) -> Result<VerificationReport> {
    let p = book.params();
    let (l, d, g) = (p.l as usize, p.degree, p.g as usize);
    let n = book.modes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = VerificationReport::default();
    for _ in 0..trials {
        let i = rng.gen_range(0..n);
        let w = book.elementary_codeword(i)?;
        report.codewords_checked += 1;
        if w.weight() != l && report.weight_violation.is_none() {
            report.weight_violation = Some((i, w.weight()));
        }
        if n >= 2 {
            let mut j = rng.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let o = book.overlap(j, &w);
            report.pairs_checked += 1;
            report.max_overlap = report.max_overlap.max(o);
            if o > d && report.overlap_violation.is_none() {
                report.overlap_violation = Some((i, j, o));
            }
        }
    }
    for _ in 0..trials {
        let k = rng.gen_range(0..=g.min(n));
        let set = sample(&mut rng, n, k).into_vec();
        let b = BitString::from_indices(n, set.iter().copied())?;
        let gamma = book.encode(&b)?;
        let overlaps = book.overlaps(&gamma);
        for (a, &o) in overlaps.iter().enumerate() {
            if b.get(a) {
                report.min_member_overlap = Some(report.min_member_overlap.map_or(o, |m| m.min(o)));
                if o + (g - 1) * d < l && report.membership_violation.is_none() {
                    report.membership_violation = Some(format!("member {a} has overlap {o}"));
                }
            } else {
                report.max_nonmember_overlap = Some(report.max_nonmember_overlap.map_or(o, |m| m.max(o)));
                if o > d * g && report.membership_violation.is_none() {
                    report.membership_violation = Some(format!("non-member {a} has overlap {o}"));
                }
            }
        }
        match book.decode(&gamma) {
            Ok(back) if back == b => {}
            _ if report.roundtrip_violation.is_none() => {
                report.roundtrip_violation = Some(set.clone());
            }
            _ => {}
        }
        report.sums_checked += 1;
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SegmentParams {
    pub modes: u64,
    pub fermions: u64,
    pub l: u64,
    pub segment_count: u64,
    pub remainder: u64,
    pub qubits: u64,
}

impl SegmentParams {
    pub fn new(modes: u64, fermions: u64) -> Result<Self> {
        let l = 2 * fermions + 1;
        if modes < l + 1 {
            return Err(Error::NoSegmentAdvantage {
                modes: modes as usize,
                fermions: fermions as usize,
            });
        }
        let segment_count = modes / (l + 1);
        let remainder = modes - segment_count * (l + 1);
        Ok(Self {
            modes,
            fermions,
            l,
            segment_count,
            remainder,
            qubits: segment_count * l + remainder,
        })
    }

    pub fn is_advantageous(&self) -> bool {
        self.qubits < self.modes
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn five_by_five_book() -> Codebook {
        // G is irrelevant to codeword layout; D=2 with G=1 gives L = 5.
        Codebook::new(CodeParams::with_lprime(125, 1, 2, 5).unwrap()).unwrap()
    }

    fn mode_of(coeffs: &[u64], p: u64) -> usize {
        coeffs.iter().rev().fold(0u64, |acc, &c| acc * p + c) as usize
    }

    #[test]
    fn derive_small_raw_code() {
        let p = CodeParams::derive(9, 1, 1, DeriveOptions::raw_g()).unwrap();
        assert_eq!((p.l, p.lprime, p.qubits), (3, 3, 9));
    }

    #[test]
    fn derive_water_threshold() {
        let p = CodeParams::derive(118_328, 10, 1, DeriveOptions::default()).unwrap();
        assert_eq!((p.g, p.l, p.lprime, p.qubits), (170, 341, 347, 118_327));
        assert!(p.qubits < p.modes);
        let p = CodeParams::derive(1_000_000, 10, 1, DeriveOptions::default()).unwrap();
        assert_eq!(p.qubits, 1009 * 401);
        assert_eq!(p.qubits, 404_609);
    }

    #[test]
    fn derive_margin_and_capacity() {
        let p = CodeParams::derive(1000, 2, 1, DeriveOptions::hamiltonian()).unwrap();
        assert_eq!(p.fermions, Some(6));
        assert_eq!(p.g, 6 * 10);
        let capped = DeriveOptions {
            max_qubits: Some(100),
            ..DeriveOptions::default()
        };
        assert!(matches!(
            CodeParams::derive(1000, 2, 1, capped),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn degree_zero_is_positional() {
        let p = CodeParams::derive(10, 1, 0, DeriveOptions::raw_g()).unwrap();
        assert_eq!((p.l, p.lprime), (1, 11));
        let book = Codebook::new(p).unwrap();
        for m in 0..10 {
            assert_eq!(book.support(m).unwrap(), vec![m]);
        }
    }

    #[test]
    fn five_by_five_rows() {
        let book = five_by_five_book();
        let rows = [
            (vec![0u64, 0, 0], "10000 10000 10000 10000 10000"),
            (vec![0, 1, 0], "10000 01000 00100 00010 00001"),
            (vec![2, 1, 0], "00100 00010 00001 10000 01000"),
            (vec![0, 0, 1], "10000 01000 00001 00001 01000"),
        ];
        for (coeffs, expected) in rows {
            let w = book.elementary_codeword(mode_of(&coeffs, 5)).unwrap();
            assert_eq!(book.format_codeword(&w), expected);
        }
    }

    #[test]
    fn encode_decode_examples() {
        let book = five_by_five_book();
        let g2 = Codebook::new(CodeParams {
            g: 2,
            ..book.params().clone()
        })
        .unwrap_err();
        assert!(matches!(g2, Error::InvalidParams(_)));

        let zero = BitString::zeros(125);
        assert!(book.encode(&zero).unwrap().is_zero());
        assert_eq!(book.decode(&BitString::zeros(25)).unwrap(), zero);

        let x = mode_of(&[0, 1, 0], 5);
        let b = BitString::from_indices(125, [x]).unwrap();
        assert_eq!(book.encode(&b).unwrap(), book.elementary_codeword(x).unwrap());
        assert_eq!(
            book.decode(&book.elementary_codeword(7).unwrap()).unwrap(),
            BitString::from_indices(125, [7]).unwrap()
        );
    }

    #[test]
    fn xor_of_two_rows() {
        // L = L' = 5 with G = 2 needs D = 1 (L = 2DG + 1 = 5)
        let book = Codebook::new(CodeParams::with_lprime(25, 2, 1, 5).unwrap()).unwrap();
        let (x, x2) = (mode_of(&[0, 1], 5), mode_of(&[2, 1], 5));
        let b = BitString::from_indices(25, [x, x2]).unwrap();
        let w = book.encode(&b).unwrap();
        assert_eq!(book.format_codeword(&w), "10100 01010 00101 10010 01001");
        let overlaps = book.overlaps(&w);
        assert_eq!(overlaps[x], 5);
        assert_eq!(overlaps[x2], 5);
        assert!(overlaps
            .iter()
            .enumerate()
            .filter(|(m, _)| *m != x && *m != x2)
            .all(|(_, &o)| o <= 2));
        assert_eq!(book.decode(&w).unwrap(), b);
    }

    #[test]
    fn weight_limit_and_non_codewords() {
        let book = Codebook::new(CodeParams::with_lprime(9, 1, 1, 3).unwrap()).unwrap();
        let b = BitString::from_indices(9, [0, 1]).unwrap();
        assert!(matches!(
            book.encode(&b),
            Err(Error::WeightExceeded { weight: 2, limit: 1 })
        ));
        let mut w = book.elementary_codeword(4).unwrap();
        w.flip(0);
        assert!(matches!(book.decode(&w), Err(Error::NotACodeword { .. })));
    }

    #[test]
    fn verify_small_code_exhaustively() {
        let p = CodeParams::with_lprime(9, 1, 1, 3).unwrap();
        let r = verify_code(&p, VerifyMode::Exhaustive).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.pairs_checked, 36);
        assert!(r.max_overlap <= 1);
    }

    #[test]
    fn verify_flags_doctored_overlap() {
        let p = CodeParams::with_lprime(9, 1, 1, 3).unwrap();
        let book = Codebook::new(p).unwrap();
        let mut words: Vec<_> = (0..9).map(|m| book.elementary_codeword(m).unwrap()).collect();
        // make codeword 5 share two blocks with codeword 0
        words[5] = BitString::from_indices(9, [0, 3, 8]).unwrap();
        let overlap = words[0].dot(&words[5]);
        assert_eq!(overlap, 2);
        let r = verify_codewords(&words, 3, 1, 1, VerifyMode::Exhaustive).unwrap();
        assert!(!r.passed());
        assert_eq!(r.overlap_violation.map(|(i, j, _)| (i, j)), Some((0, 5)));
    }

    #[test]
    fn verify_rejects_short_l() {
        let words = vec![BitString::zeros(9)];
        assert!(matches!(
            verify_codewords(&words, 4, 1, 2, VerifyMode::Exhaustive),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn segment_examples() {
        let s = SegmentParams::new(100, 2).unwrap();
        assert_eq!((s.l, s.qubits), (5, 84));
        let s = SegmentParams::new(12, 1).unwrap();
        assert_eq!((s.l, s.qubits), (3, 9));
        assert!(matches!(
            SegmentParams::new(5, 2),
            Err(Error::NoSegmentAdvantage { .. })
        ));
        // ratio approaches 1 - 1/(2F) for large M and F
        let f = 50;
        let s = SegmentParams::new(100_000_000, f).unwrap();
        let ratio = s.qubits as f64 / s.modes as f64;
        let limit = 1.0 - 1.0 / (2.0 * f as f64);
        assert!((ratio - limit).abs() < 0.01 / f as f64, "{ratio} vs {limit}");
    }

    #[test]
    fn record_round_trip() {
        let p = CodeParams::derive(1_000_000, 10, 1, DeriveOptions::default()).unwrap();
        assert_eq!(CodeParams::from_record(&p.to_record()).unwrap(), p);
        let raw = CodeParams::with_lprime(9, 1, 1, 3).unwrap();
        assert_eq!(CodeParams::from_record(&raw.to_record()).unwrap(), raw);
    }
}
