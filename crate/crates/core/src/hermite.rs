//! Newton-form Hermite interpolants for the majority-vote phase and the
//! all-ones controlled phase, evaluated in multiprecision.
//!
//! Nodes are `cos(mπ/n)` for `m = 0..=n`, listed in that order. Every node
//! except the two edges is duplicated in the z-list and carries a zero first
//! derivative.

use std::cmp::Ordering;
use std::fmt::Write as _;

use rayon::prelude::*;
use rug::float::Constant;
use rug::ops::{CompleteRound, SubFrom};
use rug::{Assign, Float};

use crate::error::{Error, Result};

/// Largest working precision accepted, in bits.
pub const MAX_PRECISION_BITS: u32 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InterpKind {
    /// Value `+1` for `m <= floor(L/2)`, `-1` beyond; size `L` odd.
    Majority,
    /// Value `-1` only at the all-ones node `x = -1`; size `n >= 1`.
    CtrlPhase,
}

impl InterpKind {
    pub fn name(self) -> &'static str {
        match self {
            InterpKind::Majority => "majority",
            InterpKind::CtrlPhase => "ctrl_phase",
        }
    }
}

impl std::str::FromStr for InterpKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "majority" => Ok(InterpKind::Majority),
            "ctrl_phase" | "ctrl-phase" | "ctrlphase" => Ok(InterpKind::CtrlPhase),
            _ => Err(Error::invalid(format!("unknown interpolation kind {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InterpolationSpec {
    pub kind: InterpKind,
    pub size: usize,
}

impl InterpolationSpec {
    pub fn majority(l: usize) -> Result<Self> {
        if l % 2 == 0 {
            return Err(Error::invalid(format!("majority interpolation needs odd L, got {l}")));
        }
        Ok(Self {
            kind: InterpKind::Majority,
            size: l,
        })
    }

    pub fn ctrl_phase(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("controlled phase needs n >= 1"));
        }
        Ok(Self {
            kind: InterpKind::CtrlPhase,
            size: n,
        })
    }

    pub fn new(kind: InterpKind, size: usize) -> Result<Self> {
        match kind {
            InterpKind::Majority => Self::majority(size),
            InterpKind::CtrlPhase => Self::ctrl_phase(size),
        }
    }

    pub fn node_count(&self) -> usize {
        self.size + 1
    }

    pub fn value(&self, m: usize) -> i8 {
        match self.kind {
            InterpKind::Majority => {
                if m <= self.size / 2 {
                    1
                } else {
                    -1
                }
            }
            InterpKind::CtrlPhase => {
                if m == self.size {
                    -1
                } else {
                    1
                }
            }
        }
    }

    pub fn has_zero_derivative(&self, m: usize) -> bool {
        m != 0 && m != self.size
    }

    /// `cos(mπ/size)` at `prec` bits.
    pub fn node(&self, m: usize, prec: u32) -> Float {
        let mut angle = Float::with_val(prec + 32, Constant::Pi);
        angle *= m as u64;
        angle /= self.size as u64;
        Float::with_val(prec, angle.cos_ref())
    }

    pub fn degree(&self) -> usize {
        2 * self.size - 1
    }
}

pub fn default_precision(degree: usize) -> u32 {
    (8 * degree).max(256) as u32
}

fn check_precision(bits: u32) -> Result<()> {
    if bits < 64 {
        return Err(Error::invalid(format!("precision {bits} is below 64 bits")));
    }
    if bits > MAX_PRECISION_BITS {
        return Err(Error::Resource(format!(
            "precision {bits} exceeds the limit of {MAX_PRECISION_BITS} bits"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct HermitePoly {
    spec: InterpolationSpec,
    z: Vec<Float>,
    coeffs: Vec<Float>,
    prec: u32,
}

pub fn hermite_interpolate(spec: InterpolationSpec, precision_bits: u32) -> Result<HermitePoly> {
    check_precision(precision_bits)?;
    let prec = precision_bits;
    let n = spec.size;
    let nodes: Vec<Float> = (0..=n).map(|m| spec.node(m, prec)).collect();

    let mut z = Vec::with_capacity(2 * n);
    let mut f = Vec::with_capacity(2 * n);
    for (m, x) in nodes.iter().enumerate() {
        let copies = if spec.has_zero_derivative(m) { 2 } else { 1 };
        for _ in 0..copies {
            z.push(x.clone());
            f.push(spec.value(m));
        }
    }
    let len = z.len();

    // Two-argument differences: zero on repeated nodes and between equal
    // values; only the sign-changing neighbour pair is nonzero.
    let mut table: Vec<Float> = (0..len - 1)
        .map(|i| {
            if f[i] == f[i + 1] {
                Float::new(prec)
            } else {
                let gap = Float::with_val(prec, &z[i + 1] - &z[i]);
                Float::with_val(prec, (f[i + 1] - f[i]) as i32) / gap
            }
        })
        .collect();

    let mut coeffs = Vec::with_capacity(len);
    coeffs.push(Float::with_val(prec, f[0]));
    if len > 1 {
        coeffs.push(table[0].clone());
    }
    let mut gap = Float::new(prec);
    for k in 2..len {
        for i in 0..len - k {
            gap.assign(&z[i + k] - &z[i]);
            let (lo, hi) = table.split_at_mut(i + 1);
            lo[i].sub_from(&hi[0]);
            lo[i] /= &gap;
        }
        table.pop();
        coeffs.push(table[0].clone());
    }
    Ok(HermitePoly { spec, z, coeffs, prec })
}

pub fn majority_poly(l: usize, precision_bits: u32) -> Result<HermitePoly> {
    hermite_interpolate(InterpolationSpec::majority(l)?, precision_bits)
}

pub fn ctrl_phase_poly(n: usize, precision_bits: u32) -> Result<HermitePoly> {
    hermite_interpolate(InterpolationSpec::ctrl_phase(n)?, precision_bits)
}

impl HermitePoly {
    pub fn spec(&self) -> InterpolationSpec {
        self.spec
    }

    pub fn precision_bits(&self) -> u32 {
        self.prec
    }

    pub fn z_list(&self) -> &[Float] {
        &self.z
    }

    pub fn newton_coeffs(&self) -> &[Float] {
        &self.coeffs
    }

    pub fn newton_coeffs_mut(&mut self) -> &mut [Float] {
        &mut self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: &Float) -> Float {
        let mut p = self.coeffs[self.coeffs.len() - 1].clone();
        let mut t = Float::new(self.prec);
        for k in (0..self.coeffs.len() - 1).rev() {
            t.assign(x - &self.z[k]);
            p *= &t;
            p += &self.coeffs[k];
        }
        p
    }

    /// `(A(x), A'(x))`.
    pub fn eval_with_derivative(&self, x: &Float) -> (Float, Float) {
        let mut p = self.coeffs[self.coeffs.len() - 1].clone();
        let mut dp = Float::new(self.prec);
        let mut t = Float::new(self.prec);
        for k in (0..self.coeffs.len() - 1).rev() {
            t.assign(x - &self.z[k]);
            dp *= &t;
            dp += &p;
            p *= &t;
            p += &self.coeffs[k];
        }
        (p, dp)
    }

    pub fn derivative(&self, x: &Float) -> Float {
        self.eval_with_derivative(x).1
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.eval(&Float::with_val(self.prec, x)).to_f64()
    }

    /// Monomial coefficients, `out[k]` multiplying `x^k`.
    pub fn monomial_coeffs(&self) -> Vec<Float> {
        let n = self.coeffs.len();
        let mut poly = vec![self.coeffs[n - 1].clone()];
        for k in (0..n - 1).rev() {
            // poly <- poly * (x - z_k) + c_k
            let mut next = vec![Float::new(self.prec); poly.len() + 1];
            for (i, c) in poly.iter().enumerate() {
                next[i + 1] += c;
                let prod = (c * &self.z[k]).complete(self.prec);
                next[i] -= &prod;
            }
            next[0] += &self.coeffs[k];
            poly = next;
        }
        poly
    }

    /// Largest `|A(x_m) - f_m|` over the interpolation nodes.
    pub fn max_node_error(&self) -> Float {
        let mut worst = Float::new(self.prec);
        for m in 0..self.spec.node_count() {
            let x = self.spec.node(m, self.prec);
            let mut err = self.eval(&x);
            err -= self.spec.value(m) as i32;
            err.abs_mut();
            if err > worst {
                worst = err;
            }
        }
        worst
    }

    /// Largest `|A'(x_m)|` over the nodes with a zero-derivative constraint.
    pub fn max_node_derivative(&self) -> Float {
        let mut worst = Float::new(self.prec);
        for m in (0..self.spec.node_count()).filter(|&m| self.spec.has_zero_derivative(m)) {
            let mut d = self.derivative(&self.spec.node(m, self.prec));
            d.abs_mut();
            if d > worst {
                worst = d;
            }
        }
        worst
    }
}

#[derive(Clone, Debug)]
pub struct Extremum {
    pub x: f64,
    pub value: Float,
}

impl Extremum {
    pub fn value_f64(&self) -> f64 {
        self.value.to_f64()
    }
}

/// Angle-offset grid points tried inside each node interval before refining.
const BRACKET_GRID: usize = 4;
const BRACKET_GRID_MAX: usize = 1 << 12;

/// Every local minimum strictly between adjacent nodes that both carry `+1`.
///
/// Between two such nodes `A` has maxima at both ends and exactly one
/// critical point inside, so a sign change of `A'` on an interior grid
/// brackets it.
pub fn local_minima(p: &HermitePoly) -> Result<Vec<Extremum>> {
    let spec = p.spec;
    let prec = p.prec;
    let n = spec.size as f64;
    let deriv_at = |x: f64| -> f64 { p.derivative(&Float::with_val(prec, x)).to_f64() };
    let mut out = Vec::new();
    for m in 0..spec.size {
        if spec.value(m) != 1 || spec.value(m + 1) != 1 {
            continue;
        }
        // x decreases with the angle; A' < 0 near the left end x_{m+1}
        // and A' > 0 near the right end x_m.
        let (t0, t1) = (m as f64 / n, (m + 1) as f64 / n);
        let mut grid = BRACKET_GRID;
        let bracket = loop {
            let xs: Vec<f64> = (0..grid)
                .map(|j| (std::f64::consts::PI * (t0 + (t1 - t0) * (j as f64 + 0.5) / grid as f64)).cos())
                .collect();
            let ds: Vec<f64> = xs.iter().map(|&x| deriv_at(x)).collect();
            if let Some(j) = ds.iter().position(|&d| d == 0.0) {
                break Some(((xs[j], 0.0), (xs[j], 0.0)));
            }
            if let Some(j) = (0..grid - 1).find(|&j| ds[j] > 0.0 && ds[j + 1] < 0.0) {
                break Some(((xs[j + 1], ds[j + 1]), (xs[j], ds[j])));
            }
            if grid >= BRACKET_GRID_MAX {
                break None;
            }
            grid *= 2;
        };
        let Some(((lo, dlo), (hi, dhi))) = bracket else {
            return Err(Error::Resource(format!(
                "no critical point bracketed between nodes {m} and {}",
                m + 1
            )));
        };
        let x = refine_root(lo, dlo, hi, dhi, &deriv_at);
        out.push(Extremum {
            x,
            value: p.eval(&Float::with_val(prec, x)),
        });
    }
    Ok(out)
}

/// Root of `f` in `[lo, hi]` with `f(lo) <= 0 <= f(hi)`, by regula falsi with
/// the Illinois step halving, to a relative width of `1e-13`.
fn refine_root(mut lo: f64, mut flo: f64, mut hi: f64, mut fhi: f64, f: &impl Fn(f64) -> f64) -> f64 {
    let mut side = 0i8;
    for _ in 0..200 {
        if flo == 0.0 {
            return lo;
        }
        if fhi == 0.0 {
            return hi;
        }
        if hi - lo <= 1e-13 * hi.abs().max(1e-3) {
            break;
        }
        let mut c = hi - fhi * (hi - lo) / (fhi - flo);
        if !(c > lo && c < hi) {
            c = 0.5 * (lo + hi);
        }
        let fc = f(c);
        if fc < 0.0 {
            lo = c;
            flo = fc;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = c;
            fhi = fc;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    if flo.abs() < fhi.abs() {
        lo
    } else {
        hi
    }
}

/// Least interior local minimum; `None` when there are none.
pub fn least_local_min(kind: InterpKind, size: usize, precision_bits: u32) -> Result<Option<Extremum>> {
    let p = hermite_interpolate(InterpolationSpec::new(kind, size)?, precision_bits)?;
    least_of(local_minima(&p)?)
}

fn least_of(minima: Vec<Extremum>) -> Result<Option<Extremum>> {
    Ok(minima
        .into_iter()
        .min_by(|a, b| a.value.partial_cmp(&b.value).unwrap_or(Ordering::Equal)))
}

#[derive(Clone, Debug)]
pub struct ScanRow {
    pub size: usize,
    pub degree: usize,
    pub least: Option<Extremum>,
    pub precision_bits: u32,
    /// Largest node-reproduction error, as a base-2 exponent bound.
    pub node_error_log2: Option<i32>,
}

/// Scans `sizes` in parallel; rows come back in input order.
pub fn scan(kind: InterpKind, sizes: &[usize], precision_bits: Option<u32>) -> Result<Vec<ScanRow>> {
    sizes
        .par_iter()
        .map(|&size| {
            let spec = InterpolationSpec::new(kind, size)?;
            let prec = precision_bits.unwrap_or_else(|| default_precision(spec.degree()));
            let p = hermite_interpolate(spec, prec)?;
            let err = p.max_node_error();
            Ok(ScanRow {
                size,
                degree: p.degree(),
                least: least_of(local_minima(&p)?)?,
                precision_bits: prec,
                node_error_log2: if err.is_zero() { None } else { err.get_exp() },
            })
        })
        .collect()
}

pub const SCAN_CSV_HEADER: &str = "L,degree,least_local_min,x_at_min,precision_bits";

/// `v` in positional notation with `digits` significant digits.
fn fixed_decimal(v: &Float, digits: usize) -> String {
    let sci = v.to_string_radix(10, Some(digits));
    let (mantissa, exp) = match sci.split_once('e') {
        Some((m, e)) => (m, e.parse::<i64>().unwrap_or(0)),
        None => (sci.as_str(), 0),
    };
    let (sign, mantissa) = mantissa.strip_prefix('-').map_or(("", mantissa), |m| ("-", m));
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let all = format!("{int}{frac}");
    // decimal point sits after `point` digits of `all`
    let point = int.len() as i64 + exp;
    let body = if point <= 0 {
        format!("0.{}{all}", "0".repeat((-point) as usize))
    } else if point as usize >= all.len() {
        format!("{all}{}", "0".repeat(point as usize - all.len()))
    } else {
        format!("{}.{}", &all[..point as usize], &all[point as usize..])
    };
    format!("{sign}{body}")
}

pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from(SCAN_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let (v, x) = match &r.least {
            Some(e) => (fixed_decimal(&e.value, 20), format!("{:.15}", e.x)),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(out, "{},{},{},{},{}", r.size, r.degree, v, x, r.precision_bits);
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundViolation {
    pub condition: &'static str,
    pub x: f64,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoundReport {
    pub points_checked: usize,
    pub violations: Vec<BoundViolation>,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the bound pattern a QSP-realizable parity polynomial must obey:
/// `A <= 1` on `[0,1]`, `A >= -1` on `[-1,0]`, `|A| >= 1` on `[1,2]` and
/// `[-2,-1]`, and vanishing derivative at non-edge nodes.
pub fn check_parity_bounds(p: &HermitePoly, grid_size: usize) -> Result<BoundReport> {
    if p.spec.kind != InterpKind::Majority {
        return Err(Error::invalid("the bound check applies to majority polynomials"));
    }
    let prec = p.prec;
    let tol = Float::with_val(prec, Float::i_exp(1, -(prec as i32) / 4));
    let one_hi = Float::with_val(prec, 1 + &tol);
    let one_lo = Float::with_val(prec, 1 - &tol);
    let mut report = BoundReport::default();
    let grid = grid_size.max(2);
    let record = |report: &mut BoundReport, cond: &'static str, x: f64, v: &Float| {
        if report.violations.len() < 16 {
            report.violations.push(BoundViolation {
                condition: cond,
                x,
                value: v.to_f64(),
            });
        }
    };
    for j in 0..=grid {
        // angle grid over [-1, 1], uniform grid over the outer intervals
        let x = (std::f64::consts::PI * j as f64 / grid as f64).cos();
        let v = p.eval(&Float::with_val(prec, x));
        report.points_checked += 1;
        if x >= 0.0 && v > one_hi {
            record(&mut report, "A <= 1 on [0,1]", x, &v);
        }
        if x <= 0.0 && v < -one_hi.clone() {
            record(&mut report, "A >= -1 on [-1,0]", x, &v);
        }
        let t = 1.0 + j as f64 / grid as f64;
        for x in [t, -t] {
            let v = p.eval(&Float::with_val(prec, x));
            report.points_checked += 1;
            if Float::with_val(prec, v.abs_ref()) < one_lo {
                record(&mut report, "|A| >= 1 outside (-1,1)", x, &v);
            }
        }
    }
    for m in (0..p.spec.node_count()).filter(|&m| p.spec.has_zero_derivative(m)) {
        let x = p.spec.node(m, prec);
        let d = p.derivative(&x);
        report.points_checked += 1;
        if Float::with_val(prec, d.abs_ref()) > tol {
            record(&mut report, "A' = 0 at interior nodes", x.to_f64(), &d);
        }
    }
    Ok(report)
}
