//! Resource estimates: the information-theoretic floor, degree optimization,
//! encoding comparison, the Bravyi–Kitaev fallback threshold scan and
//! simulation-cost projections.

use std::fmt::Write as _;

use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::circuit::CostRecord;
use crate::codebook::{bk_weight_per_fermion, CodeParams, DeriveOptions, SegmentParams};
use crate::error::{Error, Result};
use crate::ffpoly::kth_next_prime;
use crate::synth::term_cost;

/// `log2 binomial(M, F)`.
pub fn min_qubits(modes: u64, fermions: u64) -> Result<f64> {
    if fermions > modes {
        return Err(Error::invalid(format!("F = {fermions} exceeds M = {modes}")));
    }
    let f = fermions.min(modes - fermions);
    if f == 0 {
        return Ok(0.0);
    }
    // the log-gamma difference cancels badly when F is small against M
    if f <= 1 << 16 {
        let s: f64 = (0..f).map(|i| ((modes - i) as f64 / (f - i) as f64).log2()).sum();
        return Ok(s);
    }
    let (m, f) = (modes as f64, f as f64);
    Ok((ln_gamma(m + 1.0) - ln_gamma(f + 1.0) - ln_gamma(m - f + 1.0)) / std::f64::consts::LN_2)
}

/// Largest degree scanned, `⌈log2 M⌉ + 2`.
pub fn max_scan_degree(modes: u64) -> usize {
    let ceil_log2 = if modes <= 1 {
        0
    } else {
        64 - (modes - 1).leading_zeros() as usize
    };
    ceil_log2 + 2
}

/// Qubit count at one degree. `D = 0` is the Bravyi–Kitaev fallback with
/// `Q = M` and no polynomial code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreePoint {
    pub degree: usize,
    pub qubits: u64,
    pub params: Option<CodeParams>,
}

pub fn degree_point(modes: u64, fermions: u64, degree: usize, opts: DeriveOptions) -> Result<DegreePoint> {
    if degree == 0 {
        return Ok(DegreePoint {
            degree,
            qubits: modes,
            params: None,
        });
    }
    let p = CodeParams::derive(modes, fermions, degree, opts)?;
    Ok(DegreePoint {
        degree,
        qubits: p.qubits,
        params: Some(p),
    })
}

/// Every degree in `[0, ⌈log2 M⌉ + 2]` that yields a valid code.
pub fn degree_scan(modes: u64, fermions: u64, opts: DeriveOptions) -> Result<Vec<DegreePoint>> {
    if modes < 2 || fermions == 0 {
        return Err(Error::invalid("degree scan needs M >= 2 and F >= 1"));
    }
    let mut out = Vec::new();
    for d in 0..=max_scan_degree(modes) {
        match degree_point(modes, fermions, d, opts) {
            Ok(p) => out.push(p),
            Err(Error::DegreeTooLarge { .. }) | Err(Error::Capacity(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Degree minimizing `Q`, ties to the smaller degree.
pub fn optimal_degree(modes: u64, fermions: u64) -> Result<DegreePoint> {
    optimal_degree_with(modes, fermions, DeriveOptions::default())
}

pub fn optimal_degree_with(modes: u64, fermions: u64, opts: DeriveOptions) -> Result<DegreePoint> {
    let scan = degree_scan(modes, fermions, opts)?;
    Ok(scan
        .into_iter()
        .min_by_key(|p| (p.qubits, p.degree))
        .expect("degree 0 is always present"))
}

/// Worst-case conjugate pair: `⌈log2(M+1)⌉` Z bits, and as many X bits each
/// flipping `L` qubits.
pub fn conjugate_pair_cost(params: &CodeParams) -> CostRecord {
    let w = bk_weight_per_fermion(params.modes).min(params.modes);
    term_cost(params, w, w * params.l, 0, false).encoded
}

/// Worst-case Hamiltonian term: four conjugate pairs.
pub fn worst_term_rotation_cost(params: &CodeParams) -> CostRecord {
    let w = (4 * bk_weight_per_fermion(params.modes)).min(params.modes);
    term_cost(params, w, w * params.l, 0, false).rotation
}

#[derive(Clone, Debug, PartialEq)]
pub enum GateColumn {
    /// One- plus two-qubit gates for a worst-case conjugate pair.
    Count(u64),
    Asymptotic(&'static str),
}

impl std::fmt::Display for GateColumn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GateColumn::Count(n) => write!(f, "{n}"),
            GateColumn::Asymptotic(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateRow {
    pub encoding: String,
    /// Exact qubit count for these parameters.
    pub qubits: u64,
    /// The comparison table's closed form, where it differs from `qubits`.
    pub qubit_formula: f64,
    pub gates: GateColumn,
    pub parameters: String,
    pub minimum: bool,
}

/// Rows for Jordan–Wigner, Bravyi–Kitaev, the segment code, each scanned
/// degree and the optimal degree. The minimum-qubit rows are flagged.
pub fn compare_encodings(modes: u64, fermions: u64) -> Result<Vec<EstimateRow>> {
    let m = modes as f64;
    let mut rows = vec![
        EstimateRow {
            encoding: "jordan-wigner".into(),
            qubits: modes,
            qubit_formula: m,
            gates: GateColumn::Asymptotic("O(M)"),
            parameters: format!("M={modes}"),
            minimum: false,
        },
        EstimateRow {
            encoding: "bravyi-kitaev".into(),
            qubits: modes,
            qubit_formula: m,
            gates: GateColumn::Asymptotic("O(log M)"),
            parameters: format!("M={modes}"),
            minimum: false,
        },
    ];
    if let Ok(seg) = SegmentParams::new(modes, fermions) {
        // one majority-vote switch: L(2L-1) controlled and (L+5)(2L-1) single-qubit
        let pair = (2 * seg.l + 5) * (2 * seg.l - 1);
        rows.push(EstimateRow {
            encoding: "segment".into(),
            qubits: seg.qubits,
            qubit_formula: m - m / (2.0 * fermions as f64),
            gates: GateColumn::Count(pair),
            parameters: format!("L={} segments={} remainder={}", seg.l, seg.segment_count, seg.remainder),
            minimum: false,
        });
    }
    let scan = degree_scan(modes, fermions, DeriveOptions::default())?;
    for p in scan.iter().filter(|p| p.degree > 0) {
        let params = p.params.as_ref().expect("positive degree has parameters");
        let c = conjugate_pair_cost(params);
        rows.push(EstimateRow {
            encoding: format!("degree-{}", p.degree),
            qubits: p.qubits,
            qubit_formula: p.qubits as f64,
            gates: GateColumn::Count(c.single_qubit + c.controlled),
            parameters: format!("D={} G={} L={} Lp={}", params.degree, params.g, params.l, params.lprime),
            minimum: false,
        });
    }
    let best = scan
        .iter()
        .min_by_key(|p| (p.qubits, p.degree))
        .expect("degree 0 is always present");
    rows.push(EstimateRow {
        encoding: "optimal-degree".into(),
        qubits: best.qubits,
        qubit_formula: best.qubits as f64,
        gates: match &best.params {
            Some(p) => {
                let c = conjugate_pair_cost(p);
                GateColumn::Count(c.single_qubit + c.controlled)
            }
            None => GateColumn::Asymptotic("O(log M)"),
        },
        parameters: format!("D*={}", best.degree),
        minimum: false,
    });
    let least = rows.iter().map(|r| r.qubits).min().expect("rows are never empty");
    for r in &mut rows {
        r.minimum = r.qubits == least;
    }
    Ok(rows)
}

pub const ESTIMATE_CSV_HEADER: &str = "encoding,qubits,qubit_formula,gates,parameters,minimum";

pub fn rows_csv(rows: &[EstimateRow]) -> String {
    let mut s = String::from(ESTIMATE_CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},\"{}\",{}",
            r.encoding, r.qubits, r.qubit_formula, r.gates, r.parameters, r.minimum
        );
    }
    s
}

pub fn rows_text(rows: &[EstimateRow]) -> String {
    let header = ["encoding", "qubits", "formula", "gates", "parameters", ""];
    let cells: Vec<[String; 6]> = rows
        .iter()
        .map(|r| {
            [
                r.encoding.clone(),
                r.qubits.to_string(),
                format!("{:.0}", r.qubit_formula),
                r.gates.to_string(),
                r.parameters.clone(),
                if r.minimum { "*".into() } else { String::new() },
            ]
        })
        .collect();
    let mut width = header.map(str::len);
    for row in &cells {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut s = String::new();
    let mut line = |cols: [&str; 6]| {
        let parts: Vec<String> = cols
            .iter()
            .zip(width)
            .enumerate()
            .map(|(i, (c, w))| {
                if i == 1 || i == 2 {
                    format!("{c:>w$}")
                } else {
                    format!("{c:<w$}")
                }
            })
            .collect();
        let _ = writeln!(s, "{}", parts.join("  ").trim_end());
    };
    line(header);
    for row in &cells {
        line([&row[0], &row[1], &row[2], &row[3], &row[4], &row[5]].map(String::as_str));
    }
    s
}

/// `(M, Q)` series per encoding, one CSV line per point.
pub fn plot_data(modes: &[u64], fermions: u64) -> Result<String> {
    let rows: Vec<Vec<EstimateRow>> = modes
        .par_iter()
        .map(|&m| compare_encodings(m, fermions))
        .collect::<Result<_>>()?;
    let mut s = String::from("encoding,M,Q\n");
    for (m, rs) in modes.iter().zip(&rows) {
        for r in rs {
            let _ = writeln!(s, "{},{m},{}", r.encoding, r.qubits);
        }
    }
    Ok(s)
}

/// Largest `k >= 1` with `p_k² < L·p_{k+1}`, `p_k` the k-th prime above
/// `L = 2G + 1`, or 0 when there is none. Once `p_k >= 2L` the condition
/// fails for every larger `k`, so the search stops there.
pub fn threshold_k(g: u64) -> Result<usize> {
    let l = 2 * g + 1;
    let mut best = 0;
    let mut k = 1;
    let mut p = kth_next_prime(l, 1)?;
    while p < 2 * l {
        let next = kth_next_prime(p, 1)?;
        if (p as u128) * (p as u128) < (l as u128) * (next as u128) {
            best = k;
        }
        p = next;
        k += 1;
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ThresholdRow {
    pub g: u64,
    pub l: u64,
    pub max_k: usize,
}

pub fn threshold_scan(l_max: u64) -> Result<Vec<ThresholdRow>> {
    if l_max % 2 == 0 {
        return Err(Error::invalid(format!("L_max = {l_max} must be odd")));
    }
    (1..=(l_max.saturating_sub(1)) / 2)
        .into_par_iter()
        .map(|g| {
            Ok(ThresholdRow {
                g,
                l: 2 * g + 1,
                max_k: threshold_k(g)?,
            })
        })
        .collect()
}

pub fn threshold_csv(rows: &[ThresholdRow]) -> String {
    let mut s = String::from("G,L,max_k\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{}", r.g, r.l, r.max_k);
    }
    s
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SimKind {
    /// Randomized product formula: `t` is time, `eps` the error.
    Qdrift { t: f64, eps: f64 },
    /// Randomized phase estimation: `delta` the precision, `eta` the failure rate.
    Rpe { delta: f64, eta: f64 },
}

/// Prefactors for the rotation and circuit counts; configuration only.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostConstants {
    pub rotations: f64,
    pub circuits: f64,
}

impl Default for CostConstants {
    fn default() -> Self {
        Self {
            rotations: 2.0,
            circuits: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimCost {
    pub rotations: u64,
    pub circuits: u64,
    pub per_rotation: CostRecord,
    /// Doubly-controlled gates over every rotation of every circuit.
    pub total_doubly_controlled: u128,
}

pub fn sim_cost(kind: SimKind, lambda: f64, params: &CodeParams, k: CostConstants) -> Result<SimCost> {
    let positive = |v: f64| v.is_finite() && v > 0.0;
    let inputs = match kind {
        SimKind::Qdrift { t, eps } => [lambda, t, eps],
        SimKind::Rpe { delta, eta } => [lambda, delta, eta],
    };
    if !inputs.into_iter().chain([k.rotations, k.circuits]).all(positive) {
        return Err(Error::invalid("cost inputs must be positive and finite"));
    }
    let (rotations, circuits) = match kind {
        SimKind::Qdrift { t, eps } => ((k.rotations * (lambda * t).powi(2) / eps).ceil(), 1.0),
        SimKind::Rpe { delta, eta } => (
            (k.rotations * lambda * lambda / (delta * delta)).ceil(),
            (k.circuits / (eta * eta)).ceil(),
        ),
    };
    if rotations > u64::MAX as f64 || circuits > u64::MAX as f64 {
        return Err(Error::Capacity("rotation count overflows u64".into()));
    }
    let (rotations, circuits) = (rotations as u64, circuits as u64);
    let per_rotation = worst_term_rotation_cost(params);
    Ok(SimCost {
        rotations,
        circuits,
        per_rotation,
        total_doubly_controlled: rotations as u128 * circuits as u128 * per_rotation.doubly_controlled as u128,
    })
}
