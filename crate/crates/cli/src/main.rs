mod config;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use polycode::bk::PauliSupport;
use polycode::circuit::{
    count_gates, route_linear, simulate_sparse, simulate_with_cap, Angle, GateProgram, SparseState, DEFAULT_SIM_CAP,
};
use polycode::codebook::{bk_weight_per_fermion, verify_code, CodeParams, Codebook, DeriveOptions, VerifyMode};
use polycode::estimate::{
    compare_encodings, degree_scan, min_qubits, optimal_degree_with, plot_data, rows_csv, rows_text, sim_cost,
    threshold_csv, threshold_scan, SimKind,
};
use polycode::hermite::{scan, scan_csv, InterpKind};
use polycode::qsp::{parity_angles, synth_multi_ctrl_not, synth_multi_ctrl_phase, synth_parity, SupportSet};
use polycode::synth::{compile_hamiltonian, lambda, majorana_decompose, parse_hamiltonian_audited, Synthesizer};
use polycode::BitString;

use config::Config;

type Res<T> = Result<T, Box<dyn std::error::Error>>;

#[derive(Parser, Debug)]
#[command(
    name = "polycode",
    version,
    about = "Polynomial-code fermion encodings: codebooks, circuit synthesis and resource estimates"
)]
struct Cli {
    /// Flat `key = value` file with numeric settings; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for parallel scans and compilation.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write the artifact here instead of standard output.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct CodeArgs {
    /// Parameter record written by `params`.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    modes: Option<u64>,
    #[arg(long, conflicts_with = "raw_g")]
    fermions: Option<u64>,
    /// Use this `G` directly instead of deriving it from the fermion count.
    #[arg(long)]
    raw_g: Option<u64>,
    /// Polynomial degree, or `auto` for the qubit-minimizing degree.
    #[arg(long, default_value = "auto")]
    degree: String,
    /// Fix the block prime instead of deriving it.
    #[arg(long)]
    lprime: Option<u64>,
    /// Derive from `F + 4` fermions.
    #[arg(long)]
    margin: bool,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Check {
    Exhaustive,
    Sampled,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Kind {
    Majority,
    CtrlPhase,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Sim {
    Qdrift,
    Rpe,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Derive code parameters.
    Params {
        #[command(flatten)]
        code: CodeArgs,
    },
    /// Print every elementary codeword, one per line, blocks separated by spaces.
    Codebook {
        #[command(flatten)]
        code: CodeArgs,
    },
    /// Encode BK strings (one per line) into codewords.
    Encode {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        input: PathBuf,
    },
    /// Decode codewords (one per line) back into BK strings.
    Decode {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        input: PathBuf,
    },
    /// Check codeword weights, overlaps and decoding of sums.
    Verify {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, value_enum, default_value = "exhaustive")]
        mode: Check,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Encoded parity program, for a contiguous support or one BK bit of a code.
    SynthParity {
        #[command(flatten)]
        code: CodeArgs,
        /// Contiguous support `0..L` with the ancilla at `L`.
        #[arg(long)]
        support_size: Option<usize>,
        /// BK bit whose support set is used.
        #[arg(long)]
        bit: Option<usize>,
        /// Print the signal-processing phases instead of the program.
        #[arg(long)]
        angles: bool,
    },
    /// Compile a fermionic Hamiltonian into a cost manifest.
    SynthTerm {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        hamiltonian: PathBuf,
        /// Write each encoded term program into this directory.
        #[arg(long)]
        programs: Option<PathBuf>,
        #[arg(long)]
        no_audit: bool,
        /// Derive from `F` rather than `F + 4`.
        #[arg(long)]
        no_margin: bool,
    },
    /// Encoded hop gate between two modes.
    SynthHop {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        i: usize,
        #[arg(long)]
        j: usize,
        /// Radians, or `num/den pi`.
        #[arg(long, allow_hyphen_values = true)]
        phi: String,
    },
    /// Multi-controlled phase on `n` qubits.
    SynthMcphase {
        #[arg(long)]
        n: usize,
        /// Hadamard-conjugate the last qubit to get a multi-controlled NOT.
        #[arg(long)]
        not: bool,
    },
    /// Insert swaps for a linear nearest-neighbour layout.
    Route {
        #[arg(long)]
        program: PathBuf,
        /// Comma-separated logical qubits from one end of the line.
        #[arg(long)]
        line_order: Option<String>,
    },
    /// Run a program on a basis state.
    Simulate {
        #[arg(long)]
        program: PathBuf,
        /// `0`/`1` per qubit, qubit 0 first; all zeros by default.
        #[arg(long)]
        state: Option<String>,
        /// Dense statevector, bounded by the simulation cap.
        #[arg(long)]
        dense: bool,
        #[arg(long)]
        sim_cap: Option<usize>,
    },
    /// Least local minima of interpolating polynomials.
    ScanHermite {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
        /// Defaults to 2 for majority, 1 for ctrl-phase.
        #[arg(long)]
        step: Option<usize>,
        #[arg(long)]
        precision_bits: Option<u32>,
    },
    /// Largest prime-gap index violating the Jordan–Wigner comparison, per G.
    ScanThreshold {
        #[arg(long, default_value_t = 501)]
        l_max: u64,
    },
    /// Degree scan, information floor and optional simulation cost.
    Estimate {
        #[arg(long)]
        modes: u64,
        #[arg(long)]
        fermions: u64,
        #[arg(long)]
        margin: bool,
        #[arg(long, value_enum)]
        sim: Option<Sim>,
        /// One-norm of the Hamiltonian coefficients.
        #[arg(long, conflicts_with = "hamiltonian")]
        lambda: Option<f64>,
        /// Take the one-norm from this Hamiltonian.
        #[arg(long)]
        hamiltonian: Option<PathBuf>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        cost_rotations: Option<f64>,
        #[arg(long)]
        cost_circuits: Option<f64>,
    },
    /// Compare encodings by qubit and gate count.
    Compare {
        #[arg(long)]
        modes: Option<u64>,
        #[arg(long)]
        fermions: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Comma-separated mode counts; emits `encoding,M,Q` series.
        #[arg(long, conflicts_with = "modes")]
        plot: Option<String>,
    },
}

fn read(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn bits(b: &BitString) -> String {
    (0..b.len()).map(|i| if b.get(i) { '1' } else { '0' }).collect()
}

/// Non-blank, non-comment lines.
fn records(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

enum Derived {
    Code(CodeParams),
    /// The optimal degree is zero: plain Bravyi–Kitaev on `modes` qubits.
    Fallback {
        modes: u64,
        fermions: u64,
    },
}

impl CodeArgs {
    fn derive(&self, default_modes: Option<u64>, hamiltonian: bool) -> Res<Derived> {
        if let Some(p) = &self.params {
            return Ok(Derived::Code(CodeParams::from_record(&read(p)?)?));
        }
        let degree: Option<usize> = match self.degree.as_str() {
            "auto" => None,
            d => Some(
                d.parse()
                    .map_err(|_| format!("--degree must be a number or auto, got {d:?}"))?,
            ),
        };
        let opts = DeriveOptions {
            use_raw_g: self.raw_g.is_some(),
            add_four_margin: self.margin || (hamiltonian && self.raw_g.is_none()),
            max_qubits: None,
        };
        let count = self.raw_g.or(self.fermions).ok_or("need --fermions or --raw-g")?;
        if let Some(lp) = self.lprime {
            let d = degree.ok_or("--lprime needs an explicit --degree")?;
            let modes = match self.modes.or(default_modes) {
                Some(m) => m,
                None => lp.checked_pow(d as u32 + 1).ok_or("L'^(D+1) overflows")?,
            };
            let g = if opts.use_raw_g {
                count
            } else {
                (count + if opts.add_four_margin { 4 } else { 0 }) * bk_weight_per_fermion(modes)
            };
            let mut p = CodeParams::with_lprime(modes, g, d, lp)?;
            if !opts.use_raw_g {
                p.fermions = Some(count + if opts.add_four_margin { 4 } else { 0 });
            }
            return Ok(Derived::Code(p));
        }
        let modes = self.modes.or(default_modes).ok_or("need --modes (or --params)")?;
        match degree {
            Some(d) => Ok(Derived::Code(CodeParams::derive(modes, count, d, opts)?)),
            None => {
                let best = optimal_degree_with(modes, count, opts)?;
                Ok(match best.params {
                    Some(p) => Derived::Code(p),
                    None => Derived::Fallback { modes, fermions: count },
                })
            }
        }
    }

    fn code(&self, default_modes: Option<u64>, hamiltonian: bool) -> Res<CodeParams> {
        match self.derive(default_modes, hamiltonian)? {
            Derived::Code(p) => Ok(p),
            Derived::Fallback { modes, .. } => {
                Err(format!("no polynomial code beats Bravyi-Kitaev at M = {modes}; pass an explicit --degree").into())
            }
        }
    }
}

/// Program text behind a comment line with its gate counts.
fn program_text(prog: &GateProgram) -> String {
    let c = count_gates(prog);
    format!(
        "# single_qubit {} controlled {} doubly_controlled {}\n{}",
        c.single_qubit,
        c.controlled,
        c.doubly_controlled,
        prog.to_text()
    )
}

fn report_line(out: &mut String, key: &str, v: impl std::fmt::Display) {
    let _ = writeln!(out, "{key} = {v}");
}

fn opt<T: std::fmt::Debug>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "-".to_string(), |x| format!("{x:?}"))
}

fn parse_list(text: &str) -> Res<Vec<u64>> {
    text.split(',')
        .map(|t| t.trim().parse().map_err(|_| format!("bad list entry {t:?}").into()))
        .collect()
}

/// Returns the artifact and whether the command succeeded.
fn run(cli: &Cli, cfg: &Config) -> Res<(String, bool)> {
    let mut out = String::new();
    match &cli.command {
        Command::Params { code } => match code.derive(None, false)? {
            Derived::Code(p) => out = p.to_record(),
            Derived::Fallback { modes, fermions } => {
                for (k, v) in [
                    ("modes", modes),
                    ("fermions", fermions),
                    ("degree", 0),
                    ("qubits", modes),
                ] {
                    report_line(&mut out, k, v);
                }
                report_line(&mut out, "encoding", "bravyi-kitaev");
            }
        },
        Command::Codebook { code } => {
            let book = Codebook::new(code.code(None, false)?)?;
            for m in 0..book.modes() {
                out.push_str(&book.format_codeword(&book.elementary_codeword(m)?));
                out.push('\n');
            }
        }
        Command::Encode { code, input } => {
            let book = Codebook::new(code.code(None, false)?)?;
            for (n, line) in records(&read(input)?) {
                let b = BitString::parse01(line).map_err(|e| format!("{}:{n}: {e}", input.display()))?;
                let w = book.encode(&b).map_err(|e| format!("{}:{n}: {e}", input.display()))?;
                out.push_str(&book.format_codeword(&w));
                out.push('\n');
            }
        }
        Command::Decode { code, input } => {
            let book = Codebook::new(code.code(None, false)?)?;
            for (n, line) in records(&read(input)?) {
                let w = BitString::parse01(line).map_err(|e| format!("{}:{n}: {e}", input.display()))?;
                let b = book.decode(&w).map_err(|e| format!("{}:{n}: {e}", input.display()))?;
                out.push_str(&bits(&b));
                out.push('\n');
            }
        }
        Command::Verify {
            code,
            mode,
            trials,
            seed,
        } => {
            let p = code.code(None, false)?;
            let mode = match mode {
                Check::Exhaustive => VerifyMode::Exhaustive,
                Check::Sampled => VerifyMode::Sampled {
                    trials: trials.or(cfg.trials).unwrap_or(10_000),
                    seed: seed.or(cfg.seed).unwrap_or(0),
                },
            };
            let r = verify_code(&p, mode)?;
            report_line(&mut out, "codewords_checked", r.codewords_checked);
            report_line(&mut out, "pairs_checked", r.pairs_checked);
            report_line(&mut out, "sums_checked", r.sums_checked);
            report_line(&mut out, "max_overlap", r.max_overlap);
            report_line(&mut out, "min_member_overlap", opt(&r.min_member_overlap));
            report_line(&mut out, "max_nonmember_overlap", opt(&r.max_nonmember_overlap));
            report_line(&mut out, "weight_violation", opt(&r.weight_violation));
            report_line(&mut out, "overlap_violation", opt(&r.overlap_violation));
            report_line(&mut out, "membership_violation", opt(&r.membership_violation));
            report_line(&mut out, "roundtrip_violation", opt(&r.roundtrip_violation));
            report_line(&mut out, "result", if r.passed() { "pass" } else { "fail" });
            return Ok((out, r.passed()));
        }
        Command::SynthParity {
            code,
            support_size,
            bit,
            angles,
        } => {
            let (prog, seq) = match (support_size, bit) {
                (Some(l), None) => {
                    let seq = parity_angles(*l)?;
                    (synth_parity(&SupportSet::contiguous(*l)?, &seq)?, seq)
                }
                (None, Some(b)) => {
                    let s = Synthesizer::new(code.code(None, false)?)?;
                    let prog = s.encode_pauli(&PauliSupport::new(vec![], vec![*b], 0))?;
                    (prog, s.angles().clone())
                }
                _ => return Err("give exactly one of --support-size and --bit".into()),
            };
            out = if *angles {
                seq.to_text(None)
            } else {
                program_text(&prog)
            };
        }
        Command::SynthTerm {
            code,
            hamiltonian,
            programs,
            no_audit,
            no_margin,
        } => {
            let terms = parse_hamiltonian_audited(&read(hamiltonian)?, !no_audit)?;
            let modes = terms.iter().filter_map(|t| t.max_mode()).max().map(|m| m as u64 + 1);
            let s = Synthesizer::new(code.code(modes, !no_margin)?)?;
            let compiled = compile_hamiltonian(&terms, &s, programs.is_some())?;
            if let Some(dir) = programs {
                std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
                for (entry, prog) in compiled.entries.iter().zip(&compiled.programs) {
                    let path = dir.join(format!("term_{:04}.prog", entry.index));
                    std::fs::write(&path, prog.to_text()).map_err(|e| format!("{}: {e}", path.display()))?;
                }
            }
            out = compiled.manifest_csv();
        }
        Command::SynthHop { code, i, j, phi } => {
            let s = Synthesizer::new(code.code(None, false)?)?;
            let phi: Angle = phi.parse()?;
            out = program_text(&s.synth_hop(*i, *j, phi)?);
        }
        Command::SynthMcphase { n, not } => {
            let prog = if *not {
                synth_multi_ctrl_not(*n)?
            } else {
                synth_multi_ctrl_phase(*n)?
            };
            out = program_text(&prog);
        }
        Command::Route { program, line_order } => {
            let prog = GateProgram::from_text(&read(program)?)?;
            let order: Vec<usize> = match line_order {
                Some(t) => parse_list(t)?.into_iter().map(|q| q as usize).collect(),
                None => (0..prog.qubit_count).collect(),
            };
            let r = route_linear(&prog, &order)?;
            let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
            let _ = writeln!(out, "# block_swaps {}", join(&r.block_swaps));
            let _ = writeln!(out, "# total_swaps {}", r.total_swaps());
            let _ = writeln!(out, "# initial_position {}", join(&r.initial_position));
            let _ = writeln!(out, "# final_position {}", join(&r.final_position));
            out.push_str(&r.program.to_text());
        }
        Command::Simulate {
            program,
            state,
            dense,
            sim_cap,
        } => {
            let prog = GateProgram::from_text(&read(program)?)?;
            let n = prog.qubit_count;
            let start = match state {
                Some(s) => BitString::parse01(s)?,
                None => BitString::zeros(n),
            };
            if start.len() != n {
                return Err(format!("state has {} bits, program has {n} qubits", start.len()).into());
            }
            let amps: BTreeMap<String, Complex64> = if *dense {
                let cap = sim_cap.or(cfg.sim_cap).unwrap_or(DEFAULT_SIM_CAP);
                if n > cap {
                    return Err(format!("{n} qubits exceed the simulation cap of {cap}").into());
                }
                let index: usize = start.ones().map(|q| 1usize << q).sum();
                let mut psi = vec![Complex64::new(0.0, 0.0); 1 << n];
                psi[index] = Complex64::new(1.0, 0.0);
                simulate_with_cap(&prog, &psi, cap)?
                    .into_iter()
                    .enumerate()
                    .map(|(i, a)| ((0..n).map(|q| if i >> q & 1 == 1 { '1' } else { '0' }).collect(), a))
                    .collect()
            } else {
                let init: SparseState = [(start, Complex64::new(1.0, 0.0))].into();
                simulate_sparse(&prog, &init)?
                    .into_iter()
                    .map(|(k, a)| (bits(&k), a))
                    .collect()
            };
            out.push_str("state,re,im\n");
            for (k, a) in amps.iter().filter(|(_, a)| a.norm() > 1e-12) {
                let _ = writeln!(out, "{k},{:?},{:?}", a.re, a.im);
            }
        }
        Command::ScanHermite {
            kind,
            from,
            to,
            step,
            precision_bits,
        } => {
            let (kind, default_step) = match kind {
                Kind::Majority => (InterpKind::Majority, 2),
                Kind::CtrlPhase => (InterpKind::CtrlPhase, 1),
            };
            let step = step.unwrap_or(default_step);
            if step == 0 || from > to {
                return Err("need --from <= --to and a positive --step".into());
            }
            let sizes: Vec<usize> = (*from..=*to).step_by(step).collect();
            out = scan_csv(&scan(kind, &sizes, precision_bits.or(cfg.precision_bits))?);
        }
        Command::ScanThreshold { l_max } => out = threshold_csv(&threshold_scan(*l_max)?),
        Command::Estimate {
            modes,
            fermions,
            margin,
            sim,
            lambda: lam,
            hamiltonian,
            t,
            eps,
            delta,
            eta,
            cost_rotations,
            cost_circuits,
        } => {
            let opts = DeriveOptions {
                add_four_margin: *margin,
                ..DeriveOptions::default()
            };
            report_line(&mut out, "modes", modes);
            report_line(&mut out, "fermions", fermions);
            report_line(
                &mut out,
                "min_qubits",
                format!("{:.6}", min_qubits(*modes, (*fermions).min(*modes))?),
            );
            out.push_str("degree,qubits\n");
            for p in degree_scan(*modes, *fermions, opts)? {
                let _ = writeln!(out, "{},{}", p.degree, p.qubits);
            }
            let best = optimal_degree_with(*modes, *fermions, opts)?;
            report_line(&mut out, "optimal_degree", best.degree);
            report_line(&mut out, "optimal_qubits", best.qubits);
            if let Some(sim) = sim {
                let params = match &best.params {
                    Some(p) => p.clone(),
                    None => CodeParams::derive(*modes, *fermions, 1, opts)?,
                };
                let lam = match (lam, hamiltonian) {
                    (Some(l), _) => *l,
                    (None, Some(h)) => lambda(&majorana_decompose(&parse_hamiltonian_audited(&read(h)?, true)?)),
                    (None, None) => return Err("--sim needs --lambda or --hamiltonian".into()),
                };
                let kind = match sim {
                    Sim::Qdrift => SimKind::Qdrift {
                        t: t.ok_or("qdrift needs --t")?,
                        eps: eps.ok_or("qdrift needs --eps")?,
                    },
                    Sim::Rpe => SimKind::Rpe {
                        delta: delta.ok_or("rpe needs --delta")?,
                        eta: eta.ok_or("rpe needs --eta")?,
                    },
                };
                let k = cfg.costs(*cost_rotations, *cost_circuits);
                let c = sim_cost(kind, lam, &params, k)?;
                report_line(&mut out, "cost_degree", params.degree);
                report_line(&mut out, "lambda", format!("{lam:?}"));
                report_line(&mut out, "cost_rotations_constant", format!("{:?}", k.rotations));
                report_line(&mut out, "cost_circuits_constant", format!("{:?}", k.circuits));
                report_line(&mut out, "rotations", c.rotations);
                report_line(&mut out, "circuits", c.circuits);
                report_line(&mut out, "per_rotation_single_qubit", c.per_rotation.single_qubit);
                report_line(&mut out, "per_rotation_controlled", c.per_rotation.controlled);
                report_line(
                    &mut out,
                    "per_rotation_doubly_controlled",
                    c.per_rotation.doubly_controlled,
                );
                report_line(&mut out, "total_doubly_controlled", c.total_doubly_controlled);
            }
        }
        Command::Compare {
            modes,
            fermions,
            format,
            plot,
        } => match (modes, plot) {
            (_, Some(list)) => out = plot_data(&parse_list(list)?, *fermions)?,
            (Some(m), None) => {
                let rows = compare_encodings(*m, *fermions)?;
                out = match format {
                    Format::Text => rows_text(&rows),
                    Format::Csv => rows_csv(&rows),
                };
            }
            (None, None) => return Err("need --modes or --plot".into()),
        },
    }
    Ok((out, true))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = Config::load(cli.config.as_deref()).map_err(Into::into).and_then(|cfg| {
        if let Some(j) = cli.jobs.or(cfg.jobs) {
            rayon::ThreadPoolBuilder::new().num_threads(j).build_global()?;
        }
        let (artifact, ok) = run(&cli, &cfg)?;
        match &cli.output {
            Some(p) => std::fs::write(p, &artifact).map_err(|e| format!("{}: {e}", p.display()))?,
            None => print!("{artifact}"),
        }
        Ok::<bool, Box<dyn std::error::Error>>(ok)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
