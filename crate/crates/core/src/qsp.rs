//! Signal processing over the phased iterate
//! `W_φ = [[H, -i e^{-iφ} √(1-H²)], [-i e^{iφ} √(1-H²), H]]`, where
//! `H = cos(π/2 · (1 - ΣZ_j / L))` on a support set of odd size `L`.
//!
//! A phase sequence `φ_1..φ_N` denotes `W_{φ_N} ··· W_{φ_1}`, with `φ_1`
//! applied first; its ancilla-`|0⟩` block is the target polynomial up to the
//! recorded sign.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use rug::ops::CompleteRound;
use rug::Float;

use crate::circuit::{Angle, GateProgram};
use crate::error::{Error, Result};
use crate::hermite::{default_precision, majority_poly, HermitePoly};

/// Ancilla label used by every signal-processing program.
pub const QSP_ANCILLA: &str = "a";

/// Chebyshev nodes used to verify a phase sequence.
pub const CHECK_NODES: usize = 64;

/// Accepted block residual.
pub const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct SupportSet {
    /// Code qubits whose `Z` sum defines `H`.
    pub qubits: Vec<usize>,
    pub ancilla: usize,
    pub qubit_count: usize,
}

impl SupportSet {
    pub fn new(qubits: Vec<usize>, ancilla: usize, qubit_count: usize) -> Result<Self> {
        if qubits.len() % 2 == 0 {
            return Err(Error::InvalidSupport(qubits.len()));
        }
        let mut sorted = qubits.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != qubits.len() {
            return Err(Error::invalid("support set repeats a qubit"));
        }
        if let Some(&q) = qubits.iter().chain([&ancilla]).find(|&&q| q >= qubit_count) {
            return Err(Error::OutOfRange {
                index: q,
                limit: qubit_count,
            });
        }
        if qubits.contains(&ancilla) {
            return Err(Error::invalid("ancilla lies inside the support set"));
        }
        Ok(Self {
            qubits,
            ancilla,
            qubit_count,
        })
    }

    /// Support `0..l` with the ancilla at index `l`.
    pub fn contiguous(l: usize) -> Result<Self> {
        Self::new((0..l).collect(), l, l + 1)
    }

    pub fn len(&self) -> usize {
        self.qubits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.qubits.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convention {
    /// Product of `W_φ` as defined above, first phase applied first.
    PhasedIterate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AngleSequence {
    pub phases: Vec<f64>,
    pub convention: Convention,
    /// True when the block equals `-A`; folded into the global phase.
    pub negated: bool,
    /// Largest block error seen at the verification nodes.
    pub residual: f64,
}

impl AngleSequence {
    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// Ancilla-`|0⟩` block of the iterate product at eigenvalue `x`,
    /// including the sign.
    pub fn block(&self, x: f64) -> Complex64 {
        let u = product(&self.phases, x);
        if self.negated {
            -u[0]
        } else {
            u[0]
        }
    }

    /// Phases with `digits` significant digits, one per line.
    pub fn to_text(&self, digits: Option<usize>) -> String {
        let mut s = format!("convention phased_iterate\nnegated {}\n", self.negated);
        for p in &self.phases {
            match digits {
                Some(d) => s.push_str(&format!("{:.*e}\n", d.saturating_sub(1), p)),
                None => s.push_str(&format!("{p:?}\n")),
            }
        }
        s
    }
}

impl fmt::Display for AngleSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text(None))
    }
}

type M2 = [Complex64; 4];

fn iterate_matrix(phi: f64, x: f64) -> M2 {
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mi = Complex64::new(0.0, -1.0);
    [
        Complex64::new(x, 0.0),
        mi * Complex64::from_polar(s, -phi),
        mi * Complex64::from_polar(s, phi),
        Complex64::new(x, 0.0),
    ]
}

fn mul2(a: &M2, b: &M2) -> M2 {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

const ID2: M2 = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 0.0),
    Complex64::new(0.0, 0.0),
    Complex64::new(1.0, 0.0),
];

/// `W_{φ_N} ··· W_{φ_1}` at eigenvalue `x`.
pub fn product(phases: &[f64], x: f64) -> M2 {
    phases.iter().fold(ID2, |acc, &phi| mul2(&iterate_matrix(phi, x), &acc))
}

pub fn chebyshev_nodes(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| ((2 * j + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos())
        .collect()
}

/// Tuning for phase finding.
#[derive(Clone, Copy, Debug)]
pub struct QspOptions {
    /// Gauss–Newton steps allowed after layer stripping.
    pub max_iterations: usize,
    pub tolerance: f64,
    /// Working precision; the polynomial's own precision when `None`.
    pub precision_bits: Option<u32>,
}

impl Default for QspOptions {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            tolerance: RESIDUAL_TOL,
            precision_bits: None,
        }
    }
}

#[derive(Clone, Debug)]
struct Cx {
    re: Float,
    im: Float,
}

impl Cx {
    fn zero(prec: u32) -> Self {
        Cx {
            re: Float::new(prec),
            im: Float::new(prec),
        }
    }

    fn real(v: Float) -> Self {
        let prec = v.prec();
        Cx {
            re: v,
            im: Float::new(prec),
        }
    }

    fn from_f64(prec: u32, re: f64, im: f64) -> Self {
        Cx {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        }
    }

    fn prec(&self) -> u32 {
        self.re.prec()
    }

    fn add(&self, o: &Cx) -> Cx {
        let p = self.prec();
        Cx {
            re: Float::with_val(p, &self.re + &o.re),
            im: Float::with_val(p, &self.im + &o.im),
        }
    }

    fn sub(&self, o: &Cx) -> Cx {
        let p = self.prec();
        Cx {
            re: Float::with_val(p, &self.re - &o.re),
            im: Float::with_val(p, &self.im - &o.im),
        }
    }

    fn mul(&self, o: &Cx) -> Cx {
        let p = self.prec();
        let rr = (&self.re * &o.re).complete(p);
        let ii = (&self.im * &o.im).complete(p);
        let ri = (&self.re * &o.im).complete(p);
        let ir = (&self.im * &o.re).complete(p);
        Cx {
            re: rr - ii,
            im: ri + ir,
        }
    }

    fn norm_sqr(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.square_ref()) + Float::with_val(p, self.im.square_ref())
    }

    fn abs(&self) -> Float {
        self.norm_sqr().sqrt()
    }

    fn div(&self, o: &Cx) -> Cx {
        let d = o.norm_sqr();
        let c = o.conj();
        let n = self.mul(&c);
        Cx {
            re: n.re / &d,
            im: n.im / &d,
        }
    }

    fn conj(&self) -> Cx {
        Cx {
            re: self.re.clone(),
            im: Float::with_val(self.prec(), -&self.im),
        }
    }

    /// Multiplication by `i`.
    fn times_i(&self) -> Cx {
        Cx {
            re: Float::with_val(self.prec(), -&self.im),
            im: self.re.clone(),
        }
    }

    fn scale(&self, k: &Float) -> Cx {
        let p = self.prec();
        Cx {
            re: (&self.re * k).complete(p),
            im: (&self.im * k).complete(p),
        }
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

fn horner(coeffs: &[Float], z: &Cx) -> (Cx, Cx) {
    let prec = z.prec();
    let mut p = Cx::zero(prec);
    let mut dp = Cx::zero(prec);
    for c in coeffs.iter().rev() {
        dp = dp.mul(z).add(&p);
        p = p.mul(z);
        p.re += c;
    }
    (p, dp)
}

/// All complex roots of a real polynomial by simultaneous Aberth iteration.
fn aberth_roots(coeffs: &[Float], prec: u32) -> Result<Vec<Cx>> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[n].to_f64().abs();
    // Fujiwara-style radius bound for the starting circle
    let radius = (0..n)
        .map(|k| {
            let r = coeffs[k].to_f64().abs() / lead;
            2.0 * r.powf(1.0 / (n - k) as f64)
        })
        .fold(0.0f64, f64::max)
        .max(1e-3);
    let mut roots: Vec<Cx> = (0..n)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4;
            Cx::from_f64(prec, radius * t.cos(), radius * t.sin())
        })
        .collect();
    let target = Float::with_val(prec, Float::i_exp(1, -((prec as i32) * 3 / 4)));
    let loose = Float::with_val(prec, Float::i_exp(1, -((prec as i32) / 4)));
    let mut converged_rounds = 0;
    let mut last = Float::with_val(prec, 1);
    for _ in 0..2000 {
        let mut worst = Float::new(prec);
        for k in 0..n {
            let (p, dp) = horner(coeffs, &roots[k]);
            if p.norm_sqr().is_zero() {
                continue;
            }
            let ratio = p.div(&dp);
            let mut sum = Cx::zero(prec);
            for j in 0..n {
                if j != k {
                    let d = roots[k].sub(&roots[j]);
                    sum = sum.add(&Cx::real(Float::with_val(prec, 1)).div(&d));
                }
            }
            let one = Cx::real(Float::with_val(prec, 1));
            let w = ratio.div(&one.sub(&ratio.mul(&sum)));
            let mut rel = w.abs();
            let scale = Float::with_val(prec, roots[k].abs().max(&Float::with_val(prec, 1)));
            rel /= &scale;
            if rel > worst {
                worst = rel;
            }
            roots[k] = roots[k].sub(&w);
        }
        if worst < target {
            converged_rounds += 1;
            if converged_rounds >= 2 {
                return Ok(roots);
            }
        } else if worst < loose && worst >= last {
            // stagnation at a clustered root
            return Ok(roots);
        }
        last = worst;
    }
    Err(Error::InfeasiblePolynomial(
        "root finding for the complementary polynomial did not converge".into(),
    ))
}

fn poly_mul(a: &[Cx], b: &[Cx]) -> Vec<Cx> {
    let prec = a[0].prec();
    let mut out = vec![Cx::zero(prec); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    out
}

/// Divides in place by `(y - r)`; returns the remainder.
fn deflate_real(coeffs: &mut Vec<Float>, r: &Float) -> Float {
    let n = coeffs.len() - 1;
    let prec = r.prec();
    let mut carry = Float::new(prec);
    let mut out = vec![Float::new(prec); n];
    for k in (0..=n).rev() {
        let v = Float::with_val(prec, &coeffs[k] + &carry);
        if k == 0 {
            *coeffs = out;
            return v;
        }
        carry = (&v * r).complete(prec);
        out[k - 1] = v;
    }
    unreachable!()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Parity {
    Even,
    Odd,
}

fn detect_parity(coeffs: &[Float], prec: u32) -> Option<Parity> {
    let max = coeffs
        .iter()
        .map(|c| c.clone().abs())
        .fold(Float::new(prec), |a, b| a.max(&b));
    let thresh = Float::with_val(
        prec,
        &max * Float::with_val(prec, Float::i_exp(1, -((prec / 2) as i32))),
    );
    let even_zero = coeffs.iter().step_by(2).all(|c| c.clone().abs() <= thresh);
    let odd_zero = coeffs.iter().skip(1).step_by(2).all(|c| c.clone().abs() <= thresh);
    match (even_zero, odd_zero) {
        (_, true) => Some(Parity::Even),
        (true, false) => Some(Parity::Odd),
        _ => None,
    }
}

fn eval_real(coeffs: &[Float], x: &Float) -> Float {
    let prec = x.prec();
    let mut p = Float::new(prec);
    for c in coeffs.iter().rev() {
        p *= x;
        p += c;
    }
    p
}

/// Phase sequence whose block equals the interpolant `p`.
pub fn find_qsp_angles(p: &HermitePoly) -> Result<AngleSequence> {
    let opts = QspOptions {
        precision_bits: Some(p.precision_bits()),
        ..QspOptions::default()
    };
    let spec = p.spec();
    let prec = p.precision_bits();
    // interior nodes are double roots of 1 - A²; deflate them exactly
    let mut known: Vec<Float> = Vec::new();
    for m in 1..spec.size {
        let y = Float::with_val(prec, spec.node(m, prec).square_ref());
        let close = Float::with_val(prec, Float::i_exp(1, -((prec / 2) as i32)));
        if !known.iter().any(|k| Float::with_val(prec, k - &y).abs() < close) {
            known.push(y);
        }
    }
    solve(&p.monomial_coeffs(), &opts, &known)
}

/// Phase sequence for a real polynomial given by monomial coefficients.
///
/// Requires definite parity, `|A| ≤ 1` on `[-1, 1]`, `|A(±1)| = 1` and
/// `|A| ≥ 1` outside; the last condition shows up as a complementary
/// polynomial whose roots fail to pair up.
pub fn find_qsp_angles_with(coeffs: &[Float], opts: &QspOptions) -> Result<AngleSequence> {
    solve(coeffs, opts, &[])
}

/// `double_roots` lists known double roots of `(1 - A²)/(1 - x²)` in `y = x²`.
fn solve(coeffs: &[Float], opts: &QspOptions, double_roots: &[Float]) -> Result<AngleSequence> {
    let mut coeffs: Vec<Float> = coeffs.to_vec();
    let prec = opts
        .precision_bits
        .unwrap_or_else(|| coeffs.iter().map(|c| c.prec()).max().unwrap_or(256))
        .max(128);
    for c in &mut coeffs {
        c.set_prec(prec);
    }
    while coeffs.len() > 1 && coeffs.last().unwrap().is_zero() {
        coeffs.pop();
    }
    if coeffs.is_empty() {
        return Err(Error::InfeasiblePolynomial("empty polynomial".into()));
    }
    let parity = detect_parity(&coeffs, prec)
        .ok_or_else(|| Error::InfeasiblePolynomial("polynomial has no definite parity".into()))?;
    let n = coeffs.len() - 1;
    let want = if n % 2 == 0 { Parity::Even } else { Parity::Odd };
    if parity != want {
        return Err(Error::InfeasiblePolynomial("parity does not match degree".into()));
    }
    // snap the vanishing half exactly to zero
    let start = match parity {
        Parity::Even => 1,
        Parity::Odd => 0,
    };
    for c in coeffs.iter_mut().skip(start).step_by(2) {
        *c = Float::new(prec);
    }
    check_bounds(&coeffs, prec)?;

    let mut a: Vec<Cx> = coeffs.iter().cloned().map(Cx::real).collect();
    let mut c = complementary(&coeffs, prec, double_roots)?;
    let mut phases = Vec::with_capacity(n);
    for k in (1..=n).rev() {
        // e^{iφ} = i·c_{k-1} / a_k
        let e = c[k - 1].times_i().div(&a[k]);
        let phi = Float::with_val(prec, e.im.atan2_ref(&e.re)).to_f64();
        let unit = e.scale(&Float::with_val(prec, e.abs().recip_ref()));
        let unit_conj = unit.conj();
        // a' = x·a + i e^{-iφ} (1 - x²) c
        let mut na = vec![Cx::zero(prec); k + 2];
        for (i, v) in a.iter().enumerate() {
            na[i + 1] = na[i + 1].add(v);
        }
        for (i, v) in c.iter().enumerate() {
            let t = unit_conj.mul(v).times_i();
            na[i] = na[i].add(&t);
            na[i + 2] = na[i + 2].sub(&t);
        }
        // c' = i e^{iφ} a + x·c
        let mut nc = vec![Cx::zero(prec); k + 1];
        for (i, v) in a.iter().enumerate() {
            nc[i] = nc[i].add(&unit.mul(v).times_i());
        }
        for (i, v) in c.iter().enumerate() {
            nc[i + 1] = nc[i + 1].add(v);
        }
        na.truncate(k);
        nc.truncate(k.saturating_sub(1));
        a = na;
        c = nc;
        phases.push(phi);
    }
    phases.reverse();
    let a0 = a[0].to_c64();
    if (a0.norm() - 1.0).abs() > 1e-6 || a0.im.abs() > 1e-6 {
        return Err(Error::InfeasiblePolynomial(format!(
            "layer stripping left a non-unit remainder {a0}"
        )));
    }
    let negated = a0.re < 0.0;
    let target: Vec<(f64, f64)> = chebyshev_nodes(CHECK_NODES)
        .into_iter()
        .map(|x| (x, eval_real(&coeffs, &Float::with_val(prec, x)).to_f64()))
        .collect();
    let mut seq = AngleSequence {
        phases,
        convention: Convention::PhasedIterate,
        negated,
        residual: 0.0,
    };
    seq.residual = residual(&seq, &target);
    if seq.residual > 1e-12 {
        refine(&mut seq, &target, opts.max_iterations);
    }
    if !(seq.residual <= opts.tolerance) {
        return Err(Error::AngleFindingFailed { residual: seq.residual });
    }
    Ok(seq)
}

fn check_bounds(coeffs: &[Float], prec: u32) -> Result<()> {
    let one = Float::with_val(prec, 1);
    for end in [1i32, -1] {
        let v = eval_real(coeffs, &Float::with_val(prec, end)).abs();
        let gap = Float::with_val(prec, &v - &one).abs().to_f64();
        if gap > 1e-20 {
            return Err(Error::InfeasiblePolynomial(format!(
                "|A({end})| = {} is not 1",
                v.to_f64()
            )));
        }
    }
    let n = coeffs.len() - 1;
    let grid = 16 * n.max(4);
    for k in 1..grid {
        let x = Float::with_val(prec, -1.0 + 2.0 * k as f64 / grid as f64);
        let v = eval_real(coeffs, &x).abs().to_f64();
        if v > 1.0 + 1e-12 {
            return Err(Error::InfeasiblePolynomial(format!(
                "|A({})| = {v} exceeds 1",
                x.to_f64()
            )));
        }
    }
    Ok(())
}

/// Complementary polynomial `c` with `A² + (1 - x²)|c|² = 1`, of degree
/// `N - 1` and parity `N - 1`.
fn complementary(coeffs: &[Float], prec: u32, double_roots: &[Float]) -> Result<Vec<Cx>> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    // 1 - A²
    let mut s = vec![Float::new(prec); 2 * n + 1];
    for (i, x) in coeffs.iter().enumerate() {
        for (j, y) in coeffs.iter().enumerate() {
            let prod = (x * y).complete(prec);
            s[i + j] -= &prod;
        }
    }
    s[0] += 1;
    // divide by (1 - x²) = -(x² - 1): synthetic division from the top
    let mut q = vec![Float::new(prec); 2 * n - 1];
    let mut rem = s.clone();
    for k in (2..=2 * n).rev() {
        // rem[k] x^k = -rem[k] x^{k-2} (1 - x²) + rem[k] x^{k-2}
        let t = Float::with_val(prec, -&rem[k]);
        q[k - 2] = t.clone();
        rem[k - 2] -= &t;
        rem[k] = Float::new(prec);
    }
    // q is even; in terms of y = x²
    let mut sy: Vec<Float> = q.iter().step_by(2).cloned().collect();
    let odd_factor = n % 2 == 0;
    if odd_factor {
        // c = x·r(x²): |c|² = y |r|²
        if sy[0].clone().abs().to_f64() > 1e-20 {
            return Err(Error::InfeasiblePolynomial(
                "even polynomial with A(0)² ≠ 1 has no odd complement".into(),
            ));
        }
        sy.remove(0);
    }
    let lead = sy.last().unwrap().clone();
    if lead <= 0 {
        return Err(Error::InfeasiblePolynomial(
            "complement has non-positive leading coefficient".into(),
        ));
    }
    let scale = sy
        .iter()
        .map(|c| c.clone().abs())
        .fold(Float::new(prec), |a, b| a.max(&b));
    let tol = Float::with_val(
        prec,
        &scale * Float::with_val(prec, Float::i_exp(1, -((prec / 2) as i32))),
    );
    for y in double_roots {
        for _ in 0..2 {
            let rem = deflate_real(&mut sy, y);
            if rem.abs() > tol {
                return Err(Error::InfeasiblePolynomial(format!(
                    "node y = {} is not a double root of the complement",
                    y.to_f64()
                )));
            }
        }
    }
    let roots = aberth_roots(&sy, prec)?;
    let mut chosen = select_half(roots, prec)?;
    chosen.extend(double_roots.iter().cloned().map(Cx::real));
    let mut r = vec![Cx::real(Float::with_val(prec, lead.sqrt_ref()))];
    for w in &chosen {
        let neg = Cx {
            re: Float::with_val(prec, -&w.re),
            im: Float::with_val(prec, -&w.im),
        };
        r = poly_mul(&r, &[neg, Cx::real(Float::with_val(prec, 1))]);
    }
    let mut c = vec![Cx::zero(prec); n];
    let shift = usize::from(odd_factor);
    for (k, v) in r.into_iter().enumerate() {
        c[2 * k + shift] = v;
    }
    Ok(c)
}

/// Picks one root from each conjugate pair; real roots must come in pairs.
fn select_half(mut roots: Vec<Cx>, prec: u32) -> Result<Vec<Cx>> {
    let tol = Float::with_val(prec, Float::i_exp(1, -((prec / 4) as i32)));
    let is_real = |z: &Cx| {
        let scale = Float::with_val(prec, z.abs().max(&Float::with_val(prec, 1)));
        Float::with_val(prec, z.im.abs_ref()) <= Float::with_val(prec, &tol * &scale)
    };
    let (mut real, complex): (Vec<Cx>, Vec<Cx>) = roots.drain(..).partition(|z| is_real(z));
    let mut out: Vec<Cx> = complex.into_iter().filter(|z| z.im > 0).collect();
    real.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
    if real.len() % 2 == 1 {
        return Err(Error::InfeasiblePolynomial(
            "complement has a real root of odd multiplicity".into(),
        ));
    }
    for pair in real.chunks(2) {
        let gap = Float::with_val(prec, &pair[0].re - &pair[1].re).abs();
        let scale = Float::with_val(prec, pair[0].abs().max(&Float::with_val(prec, 1)));
        let loose = Float::with_val(prec, Float::i_exp(1, -((prec / 8) as i32)));
        if gap > Float::with_val(prec, &loose * &scale) {
            return Err(Error::InfeasiblePolynomial(
                "complement has an unpaired real root".into(),
            ));
        }
        let mid = Float::with_val(prec, &pair[0].re + &pair[1].re) / 2u32;
        out.push(Cx::real(mid));
    }
    Ok(out)
}

fn residual(seq: &AngleSequence, target: &[(f64, f64)]) -> f64 {
    target
        .iter()
        .map(|&(x, a)| (seq.block(x) - a).norm())
        .fold(0.0, f64::max)
}

/// Gauss–Newton on the block residual with an analytic Jacobian.
fn refine(seq: &mut AngleSequence, target: &[(f64, f64)], max_iterations: usize) {
    let n = seq.phases.len();
    let sign = if seq.negated { -1.0 } else { 1.0 };
    for _ in 0..max_iterations {
        let rows = 2 * target.len();
        let mut jac = DMatrix::<f64>::zeros(rows, n);
        let mut res = DVector::<f64>::zeros(rows);
        for (t, &(x, a)) in target.iter().enumerate() {
            let mats: Vec<M2> = seq.phases.iter().map(|&p| iterate_matrix(p, x)).collect();
            let mut prefix = vec![ID2; n + 1];
            for k in 0..n {
                prefix[k + 1] = mul2(&mats[k], &prefix[k]);
            }
            let mut suffix = vec![ID2; n + 1];
            for k in (0..n).rev() {
                suffix[k] = mul2(&suffix[k + 1], &mats[k]);
            }
            let r = prefix[n][0] * sign - a;
            res[2 * t] = r.re;
            res[2 * t + 1] = r.im;
            let s = (1.0 - x * x).max(0.0).sqrt();
            for k in 0..n {
                let phi = seq.phases[k];
                let d: M2 = [
                    Complex64::new(0.0, 0.0),
                    -Complex64::from_polar(s, -phi),
                    Complex64::from_polar(s, phi),
                    Complex64::new(0.0, 0.0),
                ];
                let g = mul2(&mul2(&suffix[k + 1], &d), &prefix[k])[0] * sign;
                jac[(2 * t, k)] = g.re;
                jac[(2 * t + 1, k)] = g.im;
            }
        }
        let Ok(step) = jac.svd(true, true).solve(&res, 1e-14) else {
            return;
        };
        let mut trial = seq.clone();
        for (p, d) in trial.phases.iter_mut().zip(step.iter()) {
            *p -= d;
        }
        trial.residual = residual(&trial, target);
        if trial.residual >= seq.residual {
            return;
        }
        *seq = trial;
        if seq.residual < 1e-14 {
            return;
        }
    }
}

/// Phases for the majority-vote parity operator on `l` support qubits.
pub fn parity_angles(l: usize) -> Result<AngleSequence> {
    let p = majority_poly(l, default_precision(2 * l - 1))?;
    find_qsp_angles(&p)
}

/// Parity phases for several sizes, computed in parallel, in input order.
pub fn parity_angles_many(sizes: &[usize]) -> Result<Vec<AngleSequence>> {
    sizes.par_iter().map(|&l| parity_angles(l)).collect()
}

/// The phased iterate `W_φ` as gates, in time order: `R_φ†`, `H`, the `L`
/// single-qubit `e^{iπZ_j/2L}`, the `L` controlled `e^{-iπZ_j/L}`, `R_π`,
/// `H`, `R_φ`. The single-qubit layer is `i·e^{-iG}`; the `-π/2` global
/// phase makes the program equal `W_φ` exactly.
pub fn build_phased_iterate(s: &SupportSet, phi: Angle) -> Result<GateProgram> {
    let mut prog = GateProgram::new(s.qubit_count).with_ancilla(QSP_ANCILLA, s.ancilla);
    append_iterate(&mut prog, s, phi)?;
    Ok(prog)
}

fn append_iterate(prog: &mut GateProgram, s: &SupportSet, phi: Angle) -> Result<()> {
    let l = s.len();
    if l % 2 == 0 {
        return Err(Error::InvalidSupport(l));
    }
    let a = s.ancilla;
    prog.phase(a, phi.neg());
    prog.h(a);
    let single = Angle::pi_frac(-1, 2 * l as u64);
    let full = Angle::pi_frac(1, l as u64);
    for &j in &s.qubits {
        prog.rz(j, single);
    }
    for &j in &s.qubits {
        prog.ctrl_rz(a, j, full);
    }
    prog.phase(a, Angle::pi_frac(1, 1));
    prog.h(a);
    prog.phase(a, phi);
    prog.add_global_phase(Angle::pi_frac(-1, 2));
    Ok(())
}

/// Encoded parity operator: `2L - 1` phased iterates realizing the majority
/// sign on the support set, ancilla returned to `|0⟩`.
pub fn synth_parity(s: &SupportSet, angles: &AngleSequence) -> Result<GateProgram> {
    let l = s.len();
    if l % 2 == 0 {
        return Err(Error::InvalidSupport(l));
    }
    if angles.len() != 2 * l - 1 {
        return Err(Error::invalid(format!(
            "support of size {l} needs {} phases, got {}",
            2 * l - 1,
            angles.len()
        )));
    }
    let mut prog = GateProgram::new(s.qubit_count).with_ancilla(QSP_ANCILLA, s.ancilla);
    for &phi in &angles.phases {
        append_iterate(&mut prog, s, Angle::Radians(phi))?;
    }
    if angles.negated {
        prog.add_global_phase(Angle::pi_frac(1, 1));
    }
    Ok(prog)
}

/// Encoded X string: a bit flip on every qubit of the support.
pub fn synth_encoded_x(support: &[usize], qubit_count: usize) -> Result<GateProgram> {
    let mut prog = GateProgram::new(qubit_count);
    for &q in support {
        if q >= qubit_count {
            return Err(Error::OutOfRange {
                index: q,
                limit: qubit_count,
            });
        }
        prog.x(q);
    }
    Ok(prog)
}

/// Phase `-1` exactly when all `n` qubits `0..n` are `1`; ancilla at `n`.
///
/// Runs the majority program for `2n - 1` support qubits, of which `n - 1`
/// are fixed at `|0⟩`: their rotations become a global phase and their
/// controlled rotations become a phase on the ancilla.
pub fn synth_multi_ctrl_phase(n: usize) -> Result<GateProgram> {
    if n == 0 {
        return Err(Error::invalid("multi-controlled phase needs n >= 1"));
    }
    let l = 2 * n - 1;
    let angles = parity_angles(l)?;
    let a = n;
    let mut prog = GateProgram::new(n + 1).with_ancilla(QSP_ANCILLA, a);
    let single = Angle::pi_frac(-1, 2 * l as u64);
    let full = Angle::pi_frac(1, l as u64);
    let virtual_count = (n - 1) as i64;
    for &phi in &angles.phases {
        prog.phase(a, Angle::Radians(-phi));
        prog.h(a);
        for j in 0..n {
            prog.rz(j, single);
        }
        // e^{iπZ/2L} on |0⟩ contributes e^{iπ/2L}
        prog.add_global_phase(single.neg().scale(virtual_count));
        for j in 0..n {
            prog.ctrl_rz(a, j, full);
        }
        if virtual_count > 0 {
            // ctrl-e^{-iπZ/L} on a |0⟩ target is diag(1, e^{-iπ/L}) on the ancilla
            prog.phase(a, full.neg().scale(virtual_count));
        }
        prog.phase(a, Angle::pi_frac(1, 1));
        prog.h(a);
        prog.phase(a, Angle::Radians(phi));
        prog.add_global_phase(Angle::pi_frac(-1, 2));
    }
    if angles.negated {
        prog.add_global_phase(Angle::pi_frac(1, 1));
    }
    Ok(prog)
}

/// Multiply-controlled NOT on target `n - 1` with controls `0..n-1`.
pub fn synth_multi_ctrl_not(n: usize) -> Result<GateProgram> {
    let inner = synth_multi_ctrl_phase(n)?;
    let mut prog = GateProgram::new(inner.qubit_count);
    prog.ancillas = inner.ancillas.clone();
    prog.h(n - 1);
    prog.append(&inner)?;
    prog.h(n - 1);
    Ok(prog)
}
