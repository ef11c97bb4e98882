//! Hamiltonian ingestion and operator synthesis on a degree-D code.
//!
//! Register layout for every program here: code qubits `0..Q`, the signal
//! processing ancilla `a` at `Q`, and the rotation ancilla `b` at `Q + 1`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bits::BitString;
use crate::bk::{
    majorana_support, number_parity_support, occupation_flip_support, pauli_product, MajoranaKind, PauliSupport,
};
use crate::circuit::{controlled, count_gates, Angle, CostRecord, GateProgram};
use crate::codebook::{bk_weight_per_fermion, CodeParams, Codebook};
use crate::error::{Error, Result};
use crate::qsp::{parity_angles, synth_parity, AngleSequence, SupportSet, QSP_ANCILLA};

pub const ROTATION_ANCILLA: &str = "b";

/// Majorana coefficients below this magnitude are dropped after collection.
pub const COLLECT_TOL: f64 = 1e-12;

/// `coefficient · ∏ ops`, ops in written order; `true` marks a creator.
#[derive(Clone, Debug, PartialEq)]
pub struct FermionTerm {
    pub coefficient: f64,
    pub ops: Vec<(usize, bool)>,
}

impl FermionTerm {
    pub fn new(coefficient: f64, ops: Vec<(usize, bool)>) -> Self {
        Self { coefficient, ops }
    }

    pub fn creators(&self) -> Vec<usize> {
        self.ops.iter().filter(|o| o.1).map(|o| o.0).collect()
    }

    pub fn annihilators(&self) -> Vec<usize> {
        self.ops.iter().filter(|o| !o.1).map(|o| o.0).collect()
    }

    pub fn max_mode(&self) -> Option<usize> {
        self.ops.iter().map(|o| o.0).max()
    }

    /// Hermitian conjugate: reversed order, creators and annihilators swapped.
    pub fn adjoint(&self) -> Self {
        Self {
            coefficient: self.coefficient,
            ops: self.ops.iter().rev().map(|&(m, c)| (m, !c)).collect(),
        }
    }

    fn is_normal_ordered(&self) -> bool {
        let first_annihilator = self.ops.iter().position(|o| !o.1).unwrap_or(self.ops.len());
        self.ops[first_annihilator..].iter().all(|o| !o.1)
    }

    /// Normal-ordered terms with sorted creator and annihilator lists, plus
    /// the sign of the sorting permutation. `None` when an index repeats
    /// within a group (the operator is zero) or the term is not normal-ordered.
    fn canonical(&self) -> Option<(Vec<usize>, Vec<usize>, f64)> {
        if !self.is_normal_ordered() {
            return None;
        }
        let (mut c, mut a) = (self.creators(), self.annihilators());
        let sign = sort_sign(&mut c)? * sort_sign(&mut a)?;
        Some((c, a, sign))
    }
}

/// Sorts and returns the permutation sign; `None` on a repeated entry.
fn sort_sign(v: &mut [usize]) -> Option<f64> {
    let mut sign = 1.0;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some(sign)
}

impl fmt::Display for FermionTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} :", self.coefficient)?;
        for &(m, c) in &self.ops {
            write!(f, " {m}{}", if c { "^" } else { "" })?;
        }
        Ok(())
    }
}

/// Parses `coeff : i^ j^ k l` lines; `#` starts a comment.
pub fn parse_hamiltonian(text: &str) -> Result<Vec<FermionTerm>> {
    let mut terms = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (coeff, ops) = line
            .split_once(':')
            .ok_or_else(|| Error::parse(line_no, "expected `coefficient : operators`"))?;
        let coefficient: f64 = coeff
            .trim()
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad coefficient {:?}", coeff.trim())))?;
        if !coefficient.is_finite() {
            return Err(Error::parse(line_no, "coefficient is not finite"));
        }
        let ops = ops
            .split_whitespace()
            .map(|tok| {
                let (idx, creator) = match tok.strip_suffix('^') {
                    Some(i) => (i, true),
                    None => (tok, false),
                };
                idx.parse::<usize>()
                    .map(|m| (m, creator))
                    .map_err(|_| Error::parse(line_no, format!("bad operator {tok:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        terms.push(FermionTerm { coefficient, ops });
    }
    Ok(terms)
}

/// Checks that every term's conjugate is present with the same (real)
/// coefficient, after summing duplicates. Returns the offending terms.
pub fn hermiticity_offenders(terms: &[FermionTerm]) -> Vec<String> {
    type Key = (Vec<usize>, Vec<usize>);
    let mut canonical: BTreeMap<Key, f64> = BTreeMap::new();
    let mut literal: Vec<&FermionTerm> = Vec::new();
    for t in terms {
        match t.canonical() {
            Some((c, a, sign)) => *canonical.entry((c, a)).or_default() += sign * t.coefficient,
            None if t.is_normal_ordered() => {}
            None => literal.push(t),
        }
    }
    let mut offenders = Vec::new();
    let scale = terms.iter().map(|t| t.coefficient.abs()).fold(1.0, f64::max);
    for ((c, a), v) in &canonical {
        let partner = canonical.get(&(a.clone(), c.clone())).copied().unwrap_or(0.0);
        // reversing both groups of the conjugate back into sorted order
        let flips = c.len() * c.len().saturating_sub(1) / 2 + a.len() * a.len().saturating_sub(1) / 2;
        let partner = if flips % 2 == 0 { partner } else { -partner };
        if (v - partner).abs() > COLLECT_TOL * scale {
            let ops: Vec<(usize, bool)> = c
                .iter()
                .map(|&m| (m, true))
                .chain(a.iter().map(|&m| (m, false)))
                .collect();
            offenders.push(FermionTerm::new(*v, ops).to_string());
        }
    }
    for t in &literal {
        let adj = t.adjoint();
        let partner: f64 = literal.iter().filter(|u| u.ops == adj.ops).map(|u| u.coefficient).sum();
        let own: f64 = literal.iter().filter(|u| u.ops == t.ops).map(|u| u.coefficient).sum();
        if (own - partner).abs() > COLLECT_TOL * scale {
            offenders.push(t.to_string());
        }
    }
    offenders
}

/// Parses and, when `audit` is set, rejects non-Hermitian input.
pub fn parse_hamiltonian_audited(text: &str, audit: bool) -> Result<Vec<FermionTerm>> {
    let terms = parse_hamiltonian(text)?;
    if audit {
        let offenders = hermiticity_offenders(&terms);
        if !offenders.is_empty() {
            return Err(Error::AuditFailed { offenders });
        }
    }
    Ok(terms)
}

/// `coefficient · γ_1 γ_2 ···` with factors in ascending `(mode, kind)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MajoranaMonomial {
    pub coefficient: Complex64,
    pub factors: Vec<(usize, MajoranaKind)>,
}

impl MajoranaMonomial {
    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    /// Power `s` of `i` making `i^s · word` Hermitian.
    pub fn hermitian_phase(&self) -> u8 {
        let k = self.factors.len();
        if (k * k.saturating_sub(1) / 2) % 2 == 0 {
            0
        } else {
            1
        }
    }

    /// Real coefficient `h` with `coefficient · word = h · (i^s word)`.
    pub fn real_coefficient(&self) -> Complex64 {
        if self.hermitian_phase() == 1 {
            self.coefficient / Complex64::new(0.0, 1.0)
        } else {
            self.coefficient
        }
    }

    /// BK image of the Hermitian operator `i^s · word`.
    pub fn pauli(&self, modes: usize) -> Result<PauliSupport> {
        let parts = self
            .factors
            .iter()
            .map(|&(m, k)| majorana_support(modes, m, k))
            .collect::<Result<Vec<_>>>()?;
        let mut p = pauli_product(&parts);
        p.phase = (p.phase + self.hermitian_phase()) % 4;
        Ok(p)
    }
}

impl fmt::Display for MajoranaMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}{:+}i)", self.coefficient.re, self.coefficient.im)?;
        if self.factors.is_empty() {
            return f.write_str(" I");
        }
        for (m, k) in &self.factors {
            let tag = match k {
                MajoranaKind::Even => 'c',
                MajoranaKind::Odd => 'd',
            };
            write!(f, " {tag}{m}")?;
        }
        Ok(())
    }
}

fn majorana_index(m: usize, k: MajoranaKind) -> usize {
    2 * m + usize::from(k == MajoranaKind::Odd)
}

fn index_kind(i: usize) -> (usize, MajoranaKind) {
    (
        i / 2,
        if i % 2 == 0 {
            MajoranaKind::Even
        } else {
            MajoranaKind::Odd
        },
    )
}

/// Sorts a Majorana word, cancelling squares; returns the sign.
fn normalize_word(word: &mut Vec<usize>) -> f64 {
    let mut sign = 1.0;
    for i in 1..word.len() {
        let mut j = i;
        while j > 0 && word[j - 1] > word[j] {
            word.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    let mut out: Vec<usize> = Vec::with_capacity(word.len());
    for &w in word.iter() {
        if out.last() == Some(&w) {
            out.pop();
        } else {
            out.push(w);
        }
    }
    *word = out;
    sign
}

/// Expands `a = (c + i d)/2`, `a† = (c - i d)/2` and collects like words.
pub fn majorana_decompose(terms: &[FermionTerm]) -> Vec<MajoranaMonomial> {
    let mut acc: BTreeMap<Vec<usize>, Complex64> = BTreeMap::new();
    let half = Complex64::new(0.5, 0.0);
    let i = Complex64::new(0.0, 1.0);
    for t in terms {
        let mut partial: Vec<(Vec<usize>, Complex64)> = vec![(Vec::new(), Complex64::new(t.coefficient, 0.0))];
        for &(m, creator) in &t.ops {
            let odd_weight = if creator { -i } else { i };
            let mut next = Vec::with_capacity(partial.len() * 2);
            for (w, c) in partial {
                let mut we = w.clone();
                we.push(majorana_index(m, MajoranaKind::Even));
                next.push((we, c * half));
                let mut wo = w;
                wo.push(majorana_index(m, MajoranaKind::Odd));
                next.push((wo, c * half * odd_weight));
            }
            partial = next;
        }
        for (mut w, c) in partial {
            let s = normalize_word(&mut w);
            *acc.entry(w).or_default() += c * s;
        }
    }
    let scale = acc.values().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
    acc.into_iter()
        .filter(|(_, c)| c.norm() > COLLECT_TOL * scale)
        .map(|(w, mut c)| {
            if c.re.abs() <= COLLECT_TOL * scale {
                c.re = 0.0;
            }
            if c.im.abs() <= COLLECT_TOL * scale {
                c.im = 0.0;
            }
            MajoranaMonomial {
                coefficient: c,
                factors: w.into_iter().map(index_kind).collect(),
            }
        })
        .collect()
}

/// Hermitian Pauli term with its real weight.
#[derive(Clone, Debug)]
pub struct EncodedTerm {
    pub pauli: PauliSupport,
    pub coefficient: f64,
    pub program: GateProgram,
}

/// A code together with the parity phases for its support size.
#[derive(Clone, Debug)]
pub struct Synthesizer {
    codebook: Codebook,
    angles: AngleSequence,
}

impl Synthesizer {
    pub fn new(params: CodeParams) -> Result<Self> {
        let angles = parity_angles(params.l as usize)?;
        Self::with_angles(params, angles)
    }

    pub fn with_angles(params: CodeParams, angles: AngleSequence) -> Result<Self> {
        let l = params.l as usize;
        if angles.len() != 2 * l - 1 {
            return Err(Error::invalid(format!(
                "phases for {} queries do not fit support size {l}",
                angles.len()
            )));
        }
        Ok(Self {
            codebook: Codebook::new(params)?,
            angles,
        })
    }

    pub fn params(&self) -> &CodeParams {
        self.codebook.params()
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn angles(&self) -> &AngleSequence {
        &self.angles
    }

    pub fn code_qubits(&self) -> usize {
        self.codebook.qubits()
    }

    pub fn qsp_ancilla(&self) -> usize {
        self.code_qubits()
    }

    pub fn rotation_ancilla(&self) -> usize {
        self.code_qubits() + 1
    }

    fn empty_program(&self, qubits: usize) -> GateProgram {
        let mut p = GateProgram::new(qubits).with_ancilla(QSP_ANCILLA, self.qsp_ancilla());
        if qubits > self.rotation_ancilla() {
            p.add_ancilla(ROTATION_ANCILLA, self.rotation_ancilla());
        }
        p
    }

    fn check_support(&self, p: &PauliSupport) -> Result<()> {
        match p.max_index() {
            Some(i) if i >= self.codebook.modes() => Err(Error::invalid(format!(
                "Pauli acts on BK bit {i}, code has {} modes",
                self.codebook.modes()
            ))),
            _ => Ok(()),
        }
    }

    /// XOR of the elementary codewords of the X bits.
    pub fn x_mask(&self, p: &PauliSupport) -> Result<BitString> {
        self.check_support(p)?;
        let mut mask = BitString::zeros(self.code_qubits());
        for &b in &p.x {
            mask ^= &self.codebook.elementary_codeword(b)?;
        }
        Ok(mask)
    }

    /// Encoded Pauli on `Q + 1` qubits: a parity program per Z bit, then bit
    /// flips on the XOR of the X bits' codewords; `i^phase` becomes a global
    /// phase.
    pub fn encode_pauli(&self, p: &PauliSupport) -> Result<GateProgram> {
        self.check_support(p)?;
        let q = self.code_qubits();
        let mut prog = self.empty_program(q + 1);
        for &b in &p.z {
            let s = SupportSet::new(self.codebook.support(b)?, self.qsp_ancilla(), q + 1)?;
            prog.append(&synth_parity(&s, &self.angles)?)?;
        }
        for bit in self.x_mask(p)?.ones() {
            prog.x(bit);
        }
        prog.add_global_phase(Angle::pi_frac(p.phase as i64, 2));
        Ok(prog)
    }

    pub fn encode_term(&self, pauli: PauliSupport, coefficient: f64) -> Result<EncodedTerm> {
        let program = self.encode_pauli(&pauli)?;
        Ok(EncodedTerm {
            pauli,
            coefficient,
            program,
        })
    }

    /// `e^{iθT}` on `Q + 2` qubits for a Hermitian encoded Pauli `T`.
    pub fn synth_rotation(&self, term: &EncodedTerm, theta: Angle) -> Result<GateProgram> {
        if !term.pauli.is_hermitian() {
            return Err(Error::invalid(format!("{} is not Hermitian", term.pauli)));
        }
        self.rotation_of(&term.program, theta)
    }

    fn rotation_of(&self, t: &GateProgram, theta: Angle) -> Result<GateProgram> {
        let q = self.code_qubits();
        let b = self.rotation_ancilla();
        let mut widened = t.clone();
        widened.qubit_count = q + 2;
        let ct = controlled(&widened, b)?;
        let mut prog = self.empty_program(q + 2);
        prog.h(b);
        prog.append(&ct)?;
        prog.h(b);
        prog.phase(b, theta.scale(-2));
        prog.h(b);
        prog.append(&ct)?;
        prog.h(b);
        // the routine yields e^{-iθ} e^{iθT}
        prog.add_global_phase(theta);
        Ok(prog)
    }

    /// Hop gate on modes `i`, `j`: the `(-1)^{n_i n_j}` phase followed by the
    /// occupation rotation, on `Q + 2` qubits.
    pub fn synth_hop(&self, i: usize, j: usize, phi: Angle) -> Result<GateProgram> {
        let m = self.codebook.modes();
        if i == j {
            return Err(Error::invalid("hop needs two distinct modes"));
        }
        if i >= m || j >= m {
            return Err(Error::OutOfRange {
                index: i.max(j),
                limit: m,
            });
        }
        let q = self.code_qubits();
        let b = self.rotation_ancilla();
        let widen = |p: GateProgram| {
            let mut p = p;
            p.qubit_count = q + 2;
            p
        };
        let zi = widen(self.encode_pauli(&number_parity_support(m, i)?)?);
        let zj = widen(self.encode_pauli(&number_parity_support(m, j)?)?);
        let xi = occupation_flip_support(m, i)?;
        let xj = occupation_flip_support(m, j)?;
        let xx = widen(self.encode_pauli(&xi.mul(&xj))?);

        let mut prog = self.empty_program(q + 2);
        let czi = controlled(&zi, b)?;
        let czj = controlled(&zj, b)?;
        prog.h(b);
        prog.append(&czi)?;
        prog.h(b);
        prog.append(&czj)?;
        prog.h(b);
        prog.append(&czi)?;
        prog.h(b);

        let quarter = Angle::pi_frac(1, 4);
        let half_phi = match phi {
            Angle::PiFrac { num, den } => Angle::pi_frac(num, 2 * den),
            Angle::Radians(r) => Angle::Radians(r / 2.0),
        };
        // time order of e^{-iπ IZ/4} e^{iφXX/2} e^{iπ IZ/4} e^{iπ ZI/4} e^{iφXX/2} e^{-iπ ZI/4}
        for (t, theta) in [
            (&zi, quarter.neg()),
            (&xx, half_phi),
            (&zi, quarter),
            (&zj, quarter),
            (&xx, half_phi),
            (&zj, quarter.neg()),
        ] {
            prog.append(&self.rotation_of(t, theta)?)?;
        }
        Ok(prog)
    }
}

/// Exact gate counts for a term, without synthesizing it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TermCost {
    /// The encoded Pauli on its own.
    pub encoded: CostRecord,
    /// The rotation `e^{iθT}` built from two controlled copies.
    pub rotation: CostRecord,
}

/// Closed-form counts matching `count_gates` on the synthesized programs.
///
/// `x_weight` is the number of code qubits flipped. The encoded program has a
/// nonzero global phase unless its accumulated `-π/2` per iterate, sign flips
/// and Pauli phase cancel; that adds one phase gate to the controlled copy.
pub fn term_cost(params: &CodeParams, z_bits: u64, x_weight: u64, pauli_phase: u8, negated: bool) -> TermCost {
    let l = params.l;
    let n = 2 * l - 1;
    let encoded = CostRecord {
        single_qubit: z_bits * (l + 5) * n + x_weight,
        controlled: z_bits * l * n,
        doubly_controlled: 0,
        swaps: 0,
    };
    let gp = encoded_global_phase(z_bits, n, pauli_phase, negated);
    // controlled copy: h stays, rz/phase gain a control, x becomes h·cphase·h
    let ctrl = CostRecord {
        single_qubit: z_bits * 2 * n + 2 * x_weight + u64::from(!gp.is_zero()),
        controlled: z_bits * (l + 3) * n + x_weight,
        doubly_controlled: z_bits * l * n,
        swaps: 0,
    };
    let rotation = ctrl.scale(2).add(&CostRecord {
        single_qubit: 5,
        ..CostRecord::default()
    });
    TermCost { encoded, rotation }
}

fn encoded_global_phase(z_bits: u64, n: u64, pauli_phase: u8, negated: bool) -> Angle {
    let iterates = (z_bits * n) as i64;
    let mut gp = Angle::pi_frac(-iterates, 2).add(Angle::pi_frac(pauli_phase as i64, 2));
    if negated {
        gp = gp.add(Angle::pi_frac(z_bits as i64, 1));
    }
    gp
}

impl Synthesizer {
    pub fn pauli_cost(&self, p: &PauliSupport) -> Result<TermCost> {
        let mask = self.x_mask(p)?;
        Ok(term_cost(
            self.params(),
            p.z.len() as u64,
            mask.weight() as u64,
            p.phase,
            self.angles.negated,
        ))
    }
}

/// Asymptotic cost `D²F²·log₂³M`, for cross-checking growth.
pub fn asymptotic_term_cost(params: &CodeParams) -> f64 {
    let d = params.degree.max(1) as f64;
    let f = params
        .fermions
        .map(|f| f as f64)
        .unwrap_or(params.g as f64 / bk_weight_per_fermion(params.modes) as f64);
    let log_m = bk_weight_per_fermion(params.modes) as f64;
    d * d * f * f * log_m.powi(3)
}

/// One row of a compiled Hamiltonian.
#[derive(Clone, Debug)]
pub struct ManifestEntry {
    pub index: usize,
    pub monomial: String,
    pub pauli: PauliSupport,
    pub coefficient: f64,
    pub cost: CostRecord,
    pub lambda_contribution: f64,
}

#[derive(Clone, Debug)]
pub struct CompiledHamiltonian {
    pub entries: Vec<ManifestEntry>,
    /// Rotation-free encoded programs, present when synthesis was requested.
    pub programs: Vec<GateProgram>,
    /// Coefficient of the identity, excluded from `lambda`.
    pub constant: f64,
    pub lambda: f64,
}

pub const MANIFEST_HEADER: &str =
    "index,coefficient,lambda_contribution,single_qubit,controlled,doubly_controlled,swaps,pauli,monomial";

impl CompiledHamiltonian {
    pub fn manifest_csv(&self) -> String {
        let mut s = String::from(MANIFEST_HEADER);
        s.push('\n');
        for e in &self.entries {
            s.push_str(&format!(
                "{},{:?},{:?},{},{},{},{},{},{}\n",
                e.index,
                e.coefficient,
                e.lambda_contribution,
                e.cost.single_qubit,
                e.cost.controlled,
                e.cost.doubly_controlled,
                e.cost.swaps,
                e.pauli,
                e.monomial
            ));
        }
        s.push_str(&format!("# constant {:?}\n# lambda {:?}\n", self.constant, self.lambda));
        s
    }
}

/// One-norm of the non-identity Majorana coefficients.
pub fn lambda(monomials: &[MajoranaMonomial]) -> f64 {
    monomials
        .iter()
        .filter(|m| !m.is_identity())
        .map(|m| m.coefficient.norm())
        .sum()
}

/// Compiles every non-identity monomial into an encoded term. Costs are the
/// rotation costs; programs are synthesized only when `synthesize` is set.
pub fn compile_hamiltonian(
    terms: &[FermionTerm],
    synth: &Synthesizer,
    synthesize: bool,
) -> Result<CompiledHamiltonian> {
    let modes = synth.codebook.modes();
    if let Some(m) = terms.iter().filter_map(FermionTerm::max_mode).max() {
        if m >= modes {
            return Err(Error::OutOfRange { index: m, limit: modes });
        }
    }
    let monomials = majorana_decompose(terms);
    let constant = monomials
        .iter()
        .filter(|m| m.is_identity())
        .map(|m| m.coefficient.re)
        .sum();
    let body: Vec<&MajoranaMonomial> = monomials.iter().filter(|m| !m.is_identity()).collect();
    let scale = body.iter().map(|m| m.coefficient.norm()).fold(1.0, f64::max);
    let rows: Vec<(ManifestEntry, Option<GateProgram>)> = body
        .par_iter()
        .enumerate()
        .map(|(index, m)| {
            let h = m.real_coefficient();
            if h.im.abs() > 1e-9 * scale {
                return Err(Error::AuditFailed {
                    offenders: vec![m.to_string()],
                });
            }
            let pauli = m.pauli(modes)?;
            let cost = synth.pauli_cost(&pauli)?.rotation;
            let program = if synthesize {
                Some(synth.encode_pauli(&pauli)?)
            } else {
                None
            };
            Ok((
                ManifestEntry {
                    index,
                    monomial: m.to_string(),
                    pauli,
                    coefficient: h.re,
                    cost,
                    lambda_contribution: h.re.abs(),
                },
                program,
            ))
        })
        .collect::<Result<_>>()?;
    let lambda = rows.iter().map(|r| r.0.lambda_contribution).sum();
    let mut entries = Vec::with_capacity(rows.len());
    let mut programs = Vec::new();
    for (e, p) in rows {
        entries.push(e);
        programs.extend(p);
    }
    Ok(CompiledHamiltonian {
        entries,
        programs,
        constant,
        lambda,
    })
}

/// Classical action of an encoded Pauli on a register basis state: the
/// flipped state and the phase, with the sign of each Z bit taken from the
/// majority of its support set.
pub fn classical_propagator(
    codebook: &Codebook,
    p: &PauliSupport,
    state: &BitString,
) -> Result<(BitString, Complex64)> {
    let l = codebook.params().l as usize;
    let mut sign = 1.0;
    for &b in &p.z {
        if 2 * codebook.overlap(b, state) > l {
            sign = -sign;
        }
    }
    let mut out = state.clone();
    for &b in &p.x {
        out ^= &codebook.elementary_codeword(b)?;
    }
    Ok((out, p.phase_value() * sign))
}

/// Distinct Pauli supports touched by a monomial list, for quick audits.
pub fn distinct_paulis(monomials: &[MajoranaMonomial], modes: usize) -> Result<usize> {
    let mut seen = HashSet::new();
    for m in monomials {
        seen.insert(m.pauli(modes)?);
    }
    Ok(seen.len())
}

/// Number of controlled phases in a synthesized program.
pub fn controlled_count(prog: &GateProgram) -> u64 {
    count_gates(prog).controlled
}
