//! Gate IR, exact gate accounting, statevector simulation, controlled
//! lowering, linear-nearest-neighbour routing, and the line-based text format.
//!
//! Conventions: qubit `q` is bit `q` of a basis index; `rz(α) = e^{-iαZ}`;
//! `phase(φ) = diag(1, e^{iφ})`. A program denotes `e^{i·global_phase}` times
//! the ordered gate product.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::bits::BitString;
use crate::error::{Error, Result};

pub const DEFAULT_SIM_CAP: usize = 24;
pub const MATRIX_CAP: usize = 12;

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// A rotation angle: an exact rational multiple of π, or radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Angle {
    PiFrac { num: i64, den: u64 },
    Radians(f64),
}

impl Angle {
    pub const ZERO: Angle = Angle::PiFrac { num: 0, den: 1 };

    /// `num/den · π`, reduced, with the numerator taken mod `2·den`.
    pub fn pi_frac(num: i64, den: u64) -> Self {
        assert!(den > 0, "zero denominator");
        let period = 2 * den as i64;
        let num = num.rem_euclid(period);
        let g = gcd(num.unsigned_abs(), den).max(1);
        Angle::PiFrac {
            num: num / g as i64,
            den: den / g,
        }
    }

    pub fn radians(self) -> f64 {
        match self {
            Angle::PiFrac { num, den } => std::f64::consts::PI * num as f64 / den as f64,
            Angle::Radians(r) => r,
        }
    }

    pub fn neg(self) -> Self {
        match self {
            Angle::PiFrac { num, den } => Angle::pi_frac(-num, den),
            Angle::Radians(r) => Angle::Radians(-r),
        }
    }

    pub fn add(self, other: Self) -> Self {
        match (self, other) {
            (Angle::PiFrac { num: a, den: b }, Angle::PiFrac { num: c, den: d }) => {
                let l = b / gcd(b, d) * d;
                Angle::pi_frac(a * (l / b) as i64 + c * (l / d) as i64, l)
            }
            _ => Angle::Radians(self.radians() + other.radians()),
        }
    }

    pub fn scale(self, k: i64) -> Self {
        match self {
            Angle::PiFrac { num, den } => Angle::pi_frac(num * k, den),
            Angle::Radians(r) => Angle::Radians(r * k as f64),
        }
    }

    pub fn is_zero(self) -> bool {
        match self {
            Angle::PiFrac { num, .. } => num == 0,
            Angle::Radians(r) => r == 0.0,
        }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Angle::PiFrac { num, den } => write!(f, "{num}/{den} pi"),
            // shortest representation that round-trips
            Angle::Radians(r) => write!(f, "{r:?}"),
        }
    }
}

impl FromStr for Angle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::invalid(format!("bad angle {s:?}"));
        if let Some(frac) = s.strip_suffix("pi") {
            let (n, d) = frac.trim().split_once('/').ok_or_else(bad)?;
            let num: i64 = n.trim().parse().map_err(|_| bad())?;
            let den: u64 = d.trim().parse().map_err(|_| bad())?;
            if den == 0 {
                return Err(bad());
            }
            Ok(Angle::pi_frac(num, den))
        } else {
            s.parse::<f64>().map(Angle::Radians).map_err(|_| bad())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    H,
    X,
    Rz,
    Phase,
    CtrlRz,
    CtrlPhase,
    CctrlRz,
    CctrlPhase,
    Swap,
}

impl GateKind {
    pub const ALL: [GateKind; 9] = [
        GateKind::H,
        GateKind::X,
        GateKind::Rz,
        GateKind::Phase,
        GateKind::CtrlRz,
        GateKind::CtrlPhase,
        GateKind::CctrlRz,
        GateKind::CctrlPhase,
        GateKind::Swap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Rz => "rz",
            GateKind::Phase => "phase",
            GateKind::CtrlRz => "ctrl_rz",
            GateKind::CtrlPhase => "ctrl_phase",
            GateKind::CctrlRz => "cctrl_rz",
            GateKind::CctrlPhase => "cctrl_phase",
            GateKind::Swap => "swap",
        }
    }

    pub fn control_count(self) -> usize {
        match self {
            GateKind::CtrlRz | GateKind::CtrlPhase => 1,
            GateKind::CctrlRz | GateKind::CctrlPhase => 2,
            _ => 0,
        }
    }

    pub fn target_count(self) -> usize {
        if self == GateKind::Swap {
            2
        } else {
            1
        }
    }

    pub fn has_angle(self) -> bool {
        !matches!(self, GateKind::H | GateKind::X | GateKind::Swap)
    }

    pub fn is_diagonal(self) -> bool {
        !matches!(self, GateKind::H | GateKind::X | GateKind::Swap)
    }
}

impl FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GateKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown gate kind {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub controls: Vec<usize>,
    pub targets: Vec<usize>,
    pub angle: Option<Angle>,
}

impl Gate {
    pub fn new(kind: GateKind, controls: Vec<usize>, targets: Vec<usize>, angle: Option<Angle>) -> Result<Self> {
        if controls.len() != kind.control_count() || targets.len() != kind.target_count() {
            return Err(Error::invalid(format!(
                "{} takes {} control(s) and {} target(s)",
                kind.name(),
                kind.control_count(),
                kind.target_count()
            )));
        }
        if kind.has_angle() != angle.is_some() {
            return Err(Error::invalid(format!("angle mismatch for {}", kind.name())));
        }
        let mut all: Vec<usize> = controls.iter().chain(&targets).copied().collect();
        all.sort_unstable();
        all.dedup();
        if all.len() != controls.len() + targets.len() {
            return Err(Error::invalid(format!("{} acts on repeated qubits", kind.name())));
        }
        Ok(Self {
            kind,
            controls,
            targets,
            angle,
        })
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.controls.iter().chain(&self.targets).copied()
    }

    pub fn adjoint(&self) -> Gate {
        Gate {
            angle: self.angle.map(Angle::neg),
            ..self.clone()
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct CostRecord {
    pub single_qubit: u64,
    pub controlled: u64,
    pub doubly_controlled: u64,
    pub swaps: u64,
}

impl CostRecord {
    pub fn add(&self, other: &CostRecord) -> CostRecord {
        CostRecord {
            single_qubit: self.single_qubit + other.single_qubit,
            controlled: self.controlled + other.controlled,
            doubly_controlled: self.doubly_controlled + other.doubly_controlled,
            swaps: self.swaps + other.swaps,
        }
    }

    pub fn scale(&self, k: u64) -> CostRecord {
        CostRecord {
            single_qubit: self.single_qubit * k,
            controlled: self.controlled * k,
            doubly_controlled: self.doubly_controlled * k,
            swaps: self.swaps * k,
        }
    }
}

impl fmt::Display for CostRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "single_qubit={} controlled={} doubly_controlled={} swaps={}",
            self.single_qubit, self.controlled, self.doubly_controlled, self.swaps
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateProgram {
    pub qubit_count: usize,
    /// Named ancilla qubits, `(label, index)`.
    pub ancillas: Vec<(String, usize)>,
    pub global_phase: Angle,
    pub gates: Vec<Gate>,
}

impl GateProgram {
    pub fn new(qubit_count: usize) -> Self {
        Self {
            qubit_count,
            ancillas: Vec::new(),
            global_phase: Angle::ZERO,
            gates: Vec::new(),
        }
    }

    pub fn with_ancilla(mut self, label: &str, index: usize) -> Self {
        self.add_ancilla(label, index);
        self
    }

    pub fn add_ancilla(&mut self, label: &str, index: usize) {
        if !self.ancillas.iter().any(|(l, i)| l == label && *i == index) {
            self.ancillas.push((label.to_string(), index));
        }
    }

    pub fn ancilla(&self, label: &str) -> Option<usize> {
        self.ancillas.iter().find(|(l, _)| l == label).map(|(_, i)| *i)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        if let Some(q) = gate.qubits().find(|&q| q >= self.qubit_count) {
            return Err(Error::OutOfRange {
                index: q,
                limit: self.qubit_count,
            });
        }
        self.gates.push(gate);
        Ok(())
    }

    fn push_unchecked(&mut self, kind: GateKind, controls: &[usize], targets: &[usize], angle: Option<Angle>) {
        debug_assert!(controls.iter().chain(targets).all(|&q| q < self.qubit_count));
        self.gates.push(Gate {
            kind,
            controls: controls.to_vec(),
            targets: targets.to_vec(),
            angle,
        });
    }

    pub fn h(&mut self, q: usize) -> &mut Self {
        self.push_unchecked(GateKind::H, &[], &[q], None);
        self
    }

    pub fn x(&mut self, q: usize) -> &mut Self {
        self.push_unchecked(GateKind::X, &[], &[q], None);
        self
    }

    pub fn rz(&mut self, q: usize, a: Angle) -> &mut Self {
        self.push_unchecked(GateKind::Rz, &[], &[q], Some(a));
        self
    }

    pub fn phase(&mut self, q: usize, a: Angle) -> &mut Self {
        self.push_unchecked(GateKind::Phase, &[], &[q], Some(a));
        self
    }

    pub fn ctrl_rz(&mut self, c: usize, t: usize, a: Angle) -> &mut Self {
        self.push_unchecked(GateKind::CtrlRz, &[c], &[t], Some(a));
        self
    }

    pub fn ctrl_phase(&mut self, c: usize, t: usize, a: Angle) -> &mut Self {
        self.push_unchecked(GateKind::CtrlPhase, &[c], &[t], Some(a));
        self
    }

    pub fn swap(&mut self, a: usize, b: usize) -> &mut Self {
        self.push_unchecked(GateKind::Swap, &[], &[a, b], None);
        self
    }

    pub fn add_global_phase(&mut self, a: Angle) {
        self.global_phase = self.global_phase.add(a);
    }

    /// Appends `other`, which must not use more qubits than `self`.
    pub fn append(&mut self, other: &GateProgram) -> Result<()> {
        if other.qubit_count > self.qubit_count {
            return Err(Error::invalid(format!(
                "cannot append a {}-qubit program to a {}-qubit program",
                other.qubit_count, self.qubit_count
            )));
        }
        for (l, i) in &other.ancillas {
            self.add_ancilla(l, *i);
        }
        self.global_phase = self.global_phase.add(other.global_phase);
        self.gates.extend(other.gates.iter().cloned());
        Ok(())
    }

    pub fn adjoint(&self) -> GateProgram {
        GateProgram {
            qubit_count: self.qubit_count,
            ancillas: self.ancillas.clone(),
            global_phase: self.global_phase.neg(),
            gates: self.gates.iter().rev().map(Gate::adjoint).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for g in &self.gates {
            Gate::new(g.kind, g.controls.clone(), g.targets.clone(), g.angle)?;
            if let Some(q) = g.qubits().find(|&q| q >= self.qubit_count) {
                return Err(Error::OutOfRange {
                    index: q,
                    limit: self.qubit_count,
                });
            }
        }
        Ok(())
    }
}

pub fn count_gates(prog: &GateProgram) -> CostRecord {
    let mut c = CostRecord::default();
    for g in &prog.gates {
        match g.kind {
            GateKind::H | GateKind::X | GateKind::Rz | GateKind::Phase => c.single_qubit += 1,
            GateKind::CtrlRz | GateKind::CtrlPhase => c.controlled += 1,
            GateKind::CctrlRz | GateKind::CctrlPhase => c.doubly_controlled += 1,
            GateKind::Swap => c.swaps += 1,
        }
    }
    c
}

/// Controlled version of `prog` with control qubit `control`.
///
/// Diagonal gates gain a control, `x` becomes `h · ctrl_phase(π) · h`, and `h`
/// stays uncontrolled: with the control off every other gate vanishes, so an
/// even number of `h` per qubit cancels. The global phase becomes a phase gate
/// on the control.
pub fn controlled(prog: &GateProgram, control: usize) -> Result<GateProgram> {
    if control >= prog.qubit_count {
        return Err(Error::OutOfRange {
            index: control,
            limit: prog.qubit_count,
        });
    }
    let mut h_count = vec![0usize; prog.qubit_count];
    let mut out = GateProgram {
        qubit_count: prog.qubit_count,
        ancillas: prog.ancillas.clone(),
        global_phase: Angle::ZERO,
        gates: Vec::with_capacity(prog.gates.len() + 2),
    };
    for g in &prog.gates {
        if g.qubits().any(|q| q == control) {
            return Err(Error::invalid(format!(
                "control qubit {control} is used by a {} gate",
                g.kind.name()
            )));
        }
        let t = g.targets[0];
        match g.kind {
            GateKind::H => {
                h_count[t] += 1;
                out.h(t);
            }
            GateKind::X => {
                out.h(t).ctrl_phase(control, t, Angle::pi_frac(1, 1)).h(t);
            }
            GateKind::Rz => {
                out.ctrl_rz(control, t, g.angle.unwrap());
            }
            GateKind::Phase => {
                out.ctrl_phase(control, t, g.angle.unwrap());
            }
            GateKind::CtrlRz | GateKind::CtrlPhase => {
                let kind = if g.kind == GateKind::CtrlRz {
                    GateKind::CctrlRz
                } else {
                    GateKind::CctrlPhase
                };
                out.push_unchecked(kind, &[control, g.controls[0]], &[t], g.angle);
            }
            GateKind::CctrlRz | GateKind::CctrlPhase | GateKind::Swap => {
                return Err(Error::invalid(format!(
                    "{} has no controlled counterpart in the gate set",
                    g.kind.name()
                )));
            }
        }
    }
    if let Some(q) = h_count.iter().position(|c| c % 2 == 1) {
        return Err(Error::invalid(format!(
            "qubit {q} carries an odd number of Hadamards; cannot control"
        )));
    }
    if !prog.global_phase.is_zero() {
        out.phase(control, prog.global_phase);
    }
    Ok(out)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cis(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, t)
}

/// 2x2 action of a single-target gate as `[[a, b], [c, d]]` (row-major).
fn target_matrix(g: &Gate) -> [Complex64; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match g.kind {
        GateKind::H => [c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)],
        GateKind::X => [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        GateKind::Rz | GateKind::CtrlRz | GateKind::CctrlRz => {
            let a = g.angle.unwrap().radians();
            [cis(-a), c(0.0, 0.0), c(0.0, 0.0), cis(a)]
        }
        GateKind::Phase | GateKind::CtrlPhase | GateKind::CctrlPhase => {
            let a = g.angle.unwrap().radians();
            [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), cis(a)]
        }
        GateKind::Swap => unreachable!("swap has two targets"),
    }
}

fn apply_dense(state: &mut [Complex64], g: &Gate) {
    if g.kind == GateKind::Swap {
        let (a, b) = (1usize << g.targets[0], 1usize << g.targets[1]);
        for i in 0..state.len() {
            if i & a != 0 && i & b == 0 {
                state.swap(i, i ^ a ^ b);
            }
        }
        return;
    }
    let cmask: usize = g.controls.iter().map(|&q| 1usize << q).sum();
    let tbit = 1usize << g.targets[0];
    let m = target_matrix(g);
    if g.kind.is_diagonal() {
        for (i, amp) in state.iter_mut().enumerate() {
            if i & cmask == cmask {
                *amp *= if i & tbit == 0 { m[0] } else { m[3] };
            }
        }
        return;
    }
    for i in 0..state.len() {
        if i & tbit == 0 && i & cmask == cmask {
            let j = i | tbit;
            let (a0, a1) = (state[i], state[j]);
            state[i] = m[0] * a0 + m[1] * a1;
            state[j] = m[2] * a0 + m[3] * a1;
        }
    }
}

/// Dense statevector simulation of `prog` applied to `initial`.
pub fn simulate(prog: &GateProgram, initial: &[Complex64]) -> Result<Vec<Complex64>> {
    simulate_with_cap(prog, initial, DEFAULT_SIM_CAP)
}

pub fn simulate_with_cap(prog: &GateProgram, initial: &[Complex64], cap: usize) -> Result<Vec<Complex64>> {
    if prog.qubit_count > cap {
        return Err(Error::Resource(format!(
            "{} qubits exceed the simulation cap of {cap}",
            prog.qubit_count
        )));
    }
    if initial.len() != 1usize << prog.qubit_count {
        return Err(Error::invalid(format!(
            "state has {} amplitudes, program needs {}",
            initial.len(),
            1usize << prog.qubit_count
        )));
    }
    let mut state = initial.to_vec();
    for g in &prog.gates {
        apply_dense(&mut state, g);
    }
    let gp = cis(prog.global_phase.radians());
    for a in &mut state {
        *a *= gp;
    }
    Ok(state)
}

pub fn basis_state(qubits: usize, index: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); 1 << qubits];
    v[index] = Complex64::new(1.0, 0.0);
    v
}

pub fn simulate_basis(prog: &GateProgram, index: usize) -> Result<Vec<Complex64>> {
    if prog.qubit_count > DEFAULT_SIM_CAP {
        return Err(Error::Resource(format!(
            "{} qubits exceed the simulation cap of {DEFAULT_SIM_CAP}",
            prog.qubit_count
        )));
    }
    simulate(prog, &basis_state(prog.qubit_count, index))
}

pub fn matrix_of(prog: &GateProgram) -> Result<DMatrix<Complex64>> {
    if prog.qubit_count > MATRIX_CAP {
        return Err(Error::Resource(format!(
            "{} qubits exceed the dense-matrix cap of {MATRIX_CAP}",
            prog.qubit_count
        )));
    }
    let dim = 1usize << prog.qubit_count;
    let mut m = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let out = simulate_basis(prog, col)?;
        m.set_column(col, &nalgebra::DVector::from_vec(out));
    }
    Ok(m)
}

/// Sparse state over arbitrarily many qubits, keyed by basis string.
pub type SparseState = HashMap<BitString, Complex64>;

/// Amplitudes below this magnitude are dropped by the sparse simulator.
pub const SPARSE_PRUNE: f64 = 1e-15;

pub fn simulate_sparse(prog: &GateProgram, initial: &SparseState) -> Result<SparseState> {
    if let Some(k) = initial.keys().find(|k| k.len() != prog.qubit_count) {
        return Err(Error::invalid(format!(
            "basis string of length {} for a {}-qubit program",
            k.len(),
            prog.qubit_count
        )));
    }
    let mut state = initial.clone();
    for g in &prog.gates {
        if g.kind == GateKind::Swap {
            let (a, b) = (g.targets[0], g.targets[1]);
            state = state
                .into_iter()
                .map(|(mut k, v)| {
                    let (x, y) = (k.get(a), k.get(b));
                    k.set(a, y);
                    k.set(b, x);
                    (k, v)
                })
                .collect();
            continue;
        }
        let m = target_matrix(g);
        let t = g.targets[0];
        if g.kind.is_diagonal() {
            for (k, v) in state.iter_mut() {
                if g.controls.iter().all(|&q| k.get(q)) {
                    *v *= if k.get(t) { m[3] } else { m[0] };
                }
            }
            continue;
        }
        let mut next: SparseState = HashMap::with_capacity(state.len() * 2);
        for (k, v) in state {
            if !g.controls.iter().all(|&q| k.get(q)) {
                *next.entry(k).or_default() += v;
                continue;
            }
            let bit = k.get(t) as usize;
            let mut k0 = k.clone();
            k0.set(t, false);
            let mut k1 = k;
            k1.set(t, true);
            // column `bit` of the 2x2 matrix
            *next.entry(k0).or_default() += m[bit] * v;
            *next.entry(k1).or_default() += m[2 + bit] * v;
        }
        next.retain(|_, v| v.norm() > SPARSE_PRUNE);
        state = next;
    }
    let gp = cis(prog.global_phase.radians());
    for v in state.values_mut() {
        *v *= gp;
    }
    Ok(state)
}

/// A program rewritten over line positions with adjacent-only two-qubit gates.
#[derive(Clone, Debug, PartialEq)]
pub struct RoutedProgram {
    pub program: GateProgram,
    /// `initial_position[q]` is the line position of logical qubit `q`.
    pub initial_position: Vec<usize>,
    pub final_position: Vec<usize>,
    /// Swaps inserted for each block of gates sharing one control.
    pub block_swaps: Vec<usize>,
}

impl RoutedProgram {
    pub fn total_swaps(&self) -> usize {
        self.block_swaps.iter().sum()
    }
}

/// Routes a program onto a line. `line_order[p]` is the logical qubit
/// initially at position `p`.
///
/// Each maximal run of controlled diagonal gates sharing one control is
/// routed by walking the control toward the nearer group of targets first,
/// then sweeping to the other side, applying each gate when its target is
/// adjacent. The walk direction with fewer swaps is taken.
pub fn route_linear(prog: &GateProgram, line_order: &[usize]) -> Result<RoutedProgram> {
    let n = prog.qubit_count;
    let mut seen = vec![false; n];
    if line_order.len() != n
        || line_order
            .iter()
            .any(|&q| q >= n || std::mem::replace(&mut seen[q], true))
    {
        return Err(Error::invalid("line order must be a permutation of the qubits"));
    }
    let mut pos = vec![0usize; n];
    for (p, &q) in line_order.iter().enumerate() {
        pos[q] = p;
    }
    let initial_position = pos.clone();
    let mut at: Vec<usize> = line_order.to_vec();
    let mut out = GateProgram {
        qubit_count: n,
        ancillas: Vec::new(),
        global_phase: prog.global_phase,
        gates: Vec::with_capacity(prog.gates.len()),
    };
    let mut block_swaps = Vec::new();
    let mut i = 0;
    while i < prog.gates.len() {
        let g = &prog.gates[i];
        match g.kind.control_count() {
            0 if g.kind == GateKind::Swap => {
                return Err(Error::UnsupportedTopology("input already contains swaps".into()));
            }
            0 => {
                out.push_unchecked(g.kind, &[], &[pos[g.targets[0]]], g.angle);
                i += 1;
            }
            1 => {
                let control = g.controls[0];
                let mut j = i;
                while j < prog.gates.len()
                    && prog.gates[j].kind.control_count() == 1
                    && prog.gates[j].controls[0] == control
                {
                    j += 1;
                }
                let block = &prog.gates[i..j];
                let swaps = route_block(block, control, &mut pos, &mut at, &mut out);
                block_swaps.push(swaps);
                i = j;
            }
            _ => {
                return Err(Error::UnsupportedTopology(format!(
                    "{} needs three-qubit interaction",
                    g.kind.name()
                )));
            }
        }
    }
    for (label, q) in &prog.ancillas {
        out.add_ancilla(label, initial_position[*q]);
    }
    Ok(RoutedProgram {
        program: out,
        initial_position,
        final_position: pos,
        block_swaps,
    })
}

fn walk_cost(start: usize, targets: &[usize], left_first: bool) -> usize {
    // targets are positions of other qubits; the control passes each one
    let left: Vec<usize> = targets.iter().copied().filter(|&t| t < start).collect();
    let right: Vec<usize> = targets.iter().copied().filter(|&t| t > start).collect();
    // reaching target t from the left side needs start - t - 1 swaps
    let dl = left.iter().map(|&t| start - t - 1).max();
    let dr = right.iter().map(|&t| t - start - 1).max();
    match (dl, dr) {
        (None, None) => 0,
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (Some(a), Some(b)) => {
            // after walking a steps left and returning, the right targets
            // are unchanged relative to the original control slot
            if left_first {
                a + a + b
            } else {
                b + b + a
            }
        }
    }
}

fn route_block(block: &[Gate], control: usize, pos: &mut [usize], at: &mut [usize], out: &mut GateProgram) -> usize {
    let targets: Vec<usize> = block.iter().map(|g| pos[g.targets[0]]).collect();
    let start = pos[control];
    let left_first = walk_cost(start, &targets, true) <= walk_cost(start, &targets, false);
    let mut pending: Vec<&Gate> = block.iter().collect();
    let mut swaps = 0;
    let emit_adjacent = |pending: &mut Vec<&Gate>, pos: &[usize], out: &mut GateProgram| {
        let cp = pos[control];
        pending.retain(|g| {
            let tp = pos[g.targets[0]];
            if tp + 1 == cp || cp + 1 == tp {
                out.push_unchecked(g.kind, &[cp], &[tp], g.angle);
                false
            } else {
                true
            }
        });
    };
    let step = |dir_left: bool, pos: &mut [usize], at: &mut [usize], out: &mut GateProgram| {
        let cp = pos[control];
        let np = if dir_left { cp - 1 } else { cp + 1 };
        let other = at[np];
        out.push_unchecked(GateKind::Swap, &[], &[cp, np], None);
        at[cp] = other;
        at[np] = control;
        pos[other] = cp;
        pos[control] = np;
    };
    emit_adjacent(&mut pending, pos, out);
    for dir_left in [left_first, !left_first] {
        loop {
            let cp = pos[control];
            let remaining = pending.iter().any(|g| {
                let tp = pos[g.targets[0]];
                if dir_left {
                    tp < cp
                } else {
                    tp > cp
                }
            });
            if !remaining {
                break;
            }
            step(dir_left, pos, at, out);
            swaps += 1;
            emit_adjacent(&mut pending, pos, out);
        }
    }
    debug_assert!(pending.is_empty());
    swaps
}

/// Reorders a state over logical qubits into line positions.
pub fn permute_state(state: &[Complex64], position: &[usize]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); state.len()];
    for (i, &a) in state.iter().enumerate() {
        let mut j = 0usize;
        for (q, &p) in position.iter().enumerate() {
            if i >> q & 1 == 1 {
                j |= 1 << p;
            }
        }
        out[j] = a;
    }
    out
}

fn write_list(s: &mut String, items: &[usize]) {
    if items.is_empty() {
        s.push('-');
    } else {
        for (k, q) in items.iter().enumerate() {
            if k > 0 {
                s.push(',');
            }
            let _ = write!(s, "{q}");
        }
    }
}

impl GateProgram {
    /// Line-delimited text: a header (`qubits`, `ancilla`, `global_phase`)
    /// followed by one `kind controls targets [angle]` record per gate, with
    /// `-` for an empty list.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "qubits {}", self.qubit_count);
        for (label, q) in &self.ancillas {
            let _ = writeln!(s, "ancilla {label} {q}");
        }
        let _ = writeln!(s, "global_phase {}", self.global_phase);
        for g in &self.gates {
            s.push_str(g.kind.name());
            s.push(' ');
            write_list(&mut s, &g.controls);
            s.push(' ');
            write_list(&mut s, &g.targets);
            if let Some(a) = g.angle {
                let _ = write!(s, " {a}");
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut prog: Option<GateProgram> = None;
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut tokens = line.splitn(2, char::is_whitespace);
            let head = tokens.next().unwrap();
            let rest = tokens.next().unwrap_or("").trim();
            match head {
                "qubits" => {
                    let q = rest
                        .parse()
                        .map_err(|_| Error::parse(line_no, format!("bad qubit count {rest:?}")))?;
                    if prog.is_some() {
                        return Err(Error::parse(line_no, "duplicate qubits header"));
                    }
                    prog = Some(GateProgram::new(q));
                }
                "ancilla" | "global_phase" => {
                    let p = prog
                        .as_mut()
                        .ok_or_else(|| Error::parse(line_no, "header must start with qubits"))?;
                    if head == "ancilla" {
                        let (label, idx) = rest
                            .split_once(char::is_whitespace)
                            .ok_or_else(|| Error::parse(line_no, "ancilla needs a label and index"))?;
                        let idx = idx
                            .trim()
                            .parse()
                            .map_err(|_| Error::parse(line_no, "bad ancilla index"))?;
                        p.add_ancilla(label, idx);
                    } else {
                        p.global_phase = rest.parse().map_err(|e: Error| Error::parse(line_no, e.to_string()))?;
                    }
                }
                kind => {
                    let p = prog
                        .as_mut()
                        .ok_or_else(|| Error::parse(line_no, "header must start with qubits"))?;
                    let kind: GateKind = kind.parse().map_err(|e: Error| Error::parse(line_no, e.to_string()))?;
                    let mut parts = rest.splitn(3, char::is_whitespace);
                    let list = |t: Option<&str>| -> Result<Vec<usize>> {
                        match t.map(str::trim) {
                            Some("-") => Ok(Vec::new()),
                            Some(t) if !t.is_empty() => t
                                .split(',')
                                .map(|x| x.parse().map_err(|_| Error::parse(line_no, format!("bad qubit {x:?}"))))
                                .collect(),
                            _ => Err(Error::parse(line_no, "missing qubit list")),
                        }
                    };
                    let controls = list(parts.next())?;
                    let targets = list(parts.next())?;
                    let angle = match parts.next().map(str::trim) {
                        Some(a) if !a.is_empty() => {
                            Some(a.parse().map_err(|e: Error| Error::parse(line_no, e.to_string()))?)
                        }
                        _ => None,
                    };
                    let gate =
                        Gate::new(kind, controls, targets, angle).map_err(|e| Error::parse(line_no, e.to_string()))?;
                    p.push(gate).map_err(|e| Error::parse(line_no, e.to_string()))?;
                }
            }
        }
        let p = prog.ok_or_else(|| Error::parse(0, "missing qubits header"))?;
        if let Some((l, i)) = p.ancillas.iter().find(|(_, i)| *i >= p.qubit_count) {
            return Err(Error::parse(0, format!("ancilla {l} index {i} out of range")));
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hadamard_on_zero() {
        let mut p = GateProgram::new(1);
        p.h(0);
        let out = simulate_basis(&p, 0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(out[0].re, s, epsilon = 1e-15);
        assert_abs_diff_eq!(out[1].re, s, epsilon = 1e-15);
    }

    #[test]
    fn simulation_cap() {
        let p = GateProgram::new(25);
        assert!(matches!(simulate_basis(&p, 0), Err(Error::Resource(_))));
        assert!(matches!(matrix_of(&GateProgram::new(13)), Err(Error::Resource(_))));
    }

    #[test]
    fn empty_program_is_identity() {
        let m = matrix_of(&GateProgram::new(3)).unwrap();
        assert_eq!(m, DMatrix::identity(8, 8));
        assert_eq!(count_gates(&GateProgram::new(3)), CostRecord::default());
    }

    #[test]
    fn program_then_adjoint_is_identity() {
        let mut p = GateProgram::new(3);
        p.h(0)
            .ctrl_rz(0, 1, Angle::pi_frac(1, 3))
            .rz(2, Angle::Radians(0.3))
            .x(1);
        p.phase(1, Angle::pi_frac(-1, 5)).swap(0, 2);
        p.add_global_phase(Angle::Radians(0.7));
        let mut both = p.clone();
        both.append(&p.adjoint()).unwrap();
        let m = matrix_of(&both).unwrap();
        assert!((m - DMatrix::<Complex64>::identity(8, 8)).norm() < 1e-12);
    }

    #[test]
    fn angle_arithmetic_and_text() {
        let a = Angle::pi_frac(1, 6).add(Angle::pi_frac(1, 3));
        assert_eq!(a, Angle::pi_frac(1, 2));
        assert_eq!(Angle::pi_frac(-1, 2), Angle::pi_frac(3, 2));
        assert_eq!(a.to_string(), "1/2 pi");
        assert_eq!("1/2 pi".parse::<Angle>().unwrap(), a);
        let r = Angle::Radians(0.1 + 0.2);
        assert_eq!(r.to_string().parse::<Angle>().unwrap(), r);
    }

    #[test]
    fn text_round_trip() {
        let mut p = GateProgram::new(4).with_ancilla("a", 3);
        p.h(3).ctrl_rz(3, 0, Angle::pi_frac(1, 3)).rz(1, Angle::pi_frac(1, 6));
        p.phase(3, Angle::Radians(-0.123456789012345678)).swap(1, 2);
        p.push(Gate::new(GateKind::CctrlPhase, vec![3, 0], vec![2], Some(Angle::pi_frac(1, 1))).unwrap())
            .unwrap();
        p.add_global_phase(Angle::pi_frac(5, 2));
        let text = p.to_text();
        assert_eq!(GateProgram::from_text(&text).unwrap(), p);
        assert!(text.contains("ctrl_rz 3 0 1/3 pi"));
        assert!(matches!(
            GateProgram::from_text("qubits 2\nfoo - 1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn controlled_program_matches_block_structure() {
        let mut p = GateProgram::new(3);
        p.h(1)
            .rz(1, Angle::Radians(0.4))
            .ctrl_phase(1, 2, Angle::Radians(1.1))
            .h(1)
            .x(2);
        p.add_global_phase(Angle::Radians(0.25));
        let cp = controlled(&p, 0).unwrap();
        let m = matrix_of(&p).unwrap();
        let cm = matrix_of(&cp).unwrap();
        for col in 0..8 {
            for row in 0..8 {
                let expect = if col & 1 == 0 {
                    if row == col {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                } else if row & 1 == 1 {
                    m[(row, col)]
                } else {
                    Complex64::new(0.0, 0.0)
                };
                assert!((cm[(row, col)] - expect).norm() < 1e-12, "({row},{col})");
            }
        }
        // the control-free program must live on qubits 1 and 2 only
        let mut odd = GateProgram::new(2);
        odd.h(1);
        assert!(controlled(&odd, 0).is_err());
    }

    #[test]
    fn sparse_and_dense_agree() {
        let mut p = GateProgram::new(3);
        p.h(0)
            .ctrl_rz(0, 1, Angle::Radians(0.3))
            .x(2)
            .h(2)
            .swap(1, 2)
            .ctrl_phase(2, 0, Angle::pi_frac(1, 4));
        let dense = simulate_basis(&p, 0b010).unwrap();
        let init: SparseState = [(BitString::from_indices(3, [1]).unwrap(), Complex64::new(1.0, 0.0))].into();
        let sparse = simulate_sparse(&p, &init).unwrap();
        for (i, a) in dense.iter().enumerate() {
            let key = BitString::from_indices(3, (0..3).filter(|q| i >> q & 1 == 1)).unwrap();
            let s = sparse.get(&key).copied().unwrap_or_default();
            assert!((s - a).norm() < 1e-14);
        }
    }

    #[test]
    fn routing_adjacent_needs_no_swaps() {
        let mut p = GateProgram::new(2);
        p.ctrl_rz(0, 1, Angle::pi_frac(1, 3));
        let r = route_linear(&p, &[0, 1]).unwrap();
        assert_eq!(r.total_swaps(), 0);
    }

    #[test]
    fn routing_from_the_centre_to_both_ends() {
        let mut p = GateProgram::new(9);
        p.ctrl_rz(4, 0, Angle::pi_frac(1, 3))
            .ctrl_rz(4, 8, Angle::pi_frac(1, 3));
        let r = route_linear(&p, &(0..9).collect::<Vec<_>>()).unwrap();
        assert!(r.total_swaps() <= 13, "{}", r.total_swaps());
        for g in r.program.gates.iter().filter(|g| g.kind != GateKind::Swap) {
            let qs: Vec<usize> = g.qubits().collect();
            if qs.len() == 2 {
                assert_eq!(qs[0].abs_diff(qs[1]), 1);
            }
        }
    }
}
