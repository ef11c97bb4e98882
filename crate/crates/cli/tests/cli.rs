use std::path::Path;
use std::process::{Command, Output};

fn polycode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polycode"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = polycode(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

const L3_CODE: [&str; 6] = ["--degree", "1", "--raw-g", "1", "--lprime", "3"];

fn l3<'a>(args: &[&'a str]) -> Vec<&'a str> {
    args.iter().copied().chain(L3_CODE).collect()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn water_parameters_pick_degree_one() {
    let rec = stdout(&["params", "--modes", "1000000", "--fermions", "10", "--degree", "auto"]);
    assert!(rec.contains("degree = 1\n"));
    assert!(rec.contains("qubits = 404609\n"));
    let small = stdout(&["params", "--modes", "1000", "--fermions", "10"]);
    assert!(small.contains("degree = 0\n") && small.contains("encoding = bravyi-kitaev"));
}

#[test]
fn codebook_lists_nine_codewords() {
    let text = stdout(&l3(&["codebook"]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 9);
    assert_eq!(lines[0], "100 100 100");
    assert_eq!(lines[4], "010 001 100");
    assert!(lines.iter().all(|l| l.chars().filter(|&c| c == '1').count() == 3));
}

#[test]
fn params_record_feeds_other_commands() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("code.rec");
    stdout(&l3(&["params", "-o", path(&rec)]));
    let a = stdout(&["codebook", "--params", path(&rec)]);
    let b = stdout(&l3(&["codebook"]));
    assert_eq!(a, b);
}

#[test]
fn encode_then_decode_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let bk = dir.path().join("bk.txt");
    let words = dir.path().join("words.txt");
    let input =
        "# weight at most G = 2\n000000000000000000000000\n100000000000000000000001\n000000100000010000000000\n";
    std::fs::write(&bk, input).unwrap();
    let code = ["--modes", "24", "--degree", "1", "--raw-g", "2", "--lprime", "5"];
    let mut enc = vec!["encode", "--input", path(&bk), "-o", path(&words)];
    enc.extend(code);
    stdout(&enc);
    assert!(std::fs::read_to_string(&words)
        .unwrap()
        .lines()
        .all(|l| l.split(' ').count() == 5));
    let mut dec = vec!["decode", "--input", path(&words)];
    dec.extend(code);
    let back = stdout(&dec);
    let expected: Vec<&str> = input.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(back.lines().collect::<Vec<_>>(), expected);
}

#[test]
fn decode_reports_non_codewords() {
    let dir = tempfile::tempdir().unwrap();
    let words = dir.path().join("bad.txt");
    std::fs::write(&words, "110 000 000\n").unwrap();
    let out = polycode(&l3(&["decode", "--input", path(&words)]));
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.txt:1"));
}

#[test]
fn verify_reports_pass() {
    let r = stdout(&l3(&["verify"]));
    assert!(r.contains("pairs_checked = 36\n"));
    assert!(r.contains("max_overlap = 1\n"));
    assert!(r.ends_with("result = pass\n"));
    let s = stdout(&[
        "verify", "--degree", "2", "--raw-g", "1", "--lprime", "7", "--mode", "sampled", "--trials", "200",
    ]);
    assert!(s.contains("sums_checked = 200\n"));
}

fn write_program(dir: &Path, name: &str, args: &[&str]) -> std::path::PathBuf {
    let p = dir.join(name);
    let mut full = args.to_vec();
    full.extend(["-o", path(&p)]);
    stdout(&full);
    p
}

#[test]
fn parity_program_has_exact_counts_and_majority_sign() {
    let text = stdout(&["synth-parity", "--support-size", "3"]);
    assert!(text.starts_with("# single_qubit 40 controlled 15 doubly_controlled 0\n"));
    let dir = tempfile::tempdir().unwrap();
    let prog = write_program(dir.path(), "p.prog", &["synth-parity", "--support-size", "3"]);
    // majority of the support is 1: amplitude -1, ancilla back in |0⟩
    let sim = stdout(&["simulate", "--program", path(&prog), "--state", "1100"]);
    let rows: Vec<&str> = sim.lines().skip(1).collect();
    assert_eq!(rows.len(), 1, "{sim}");
    let f: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(f[0], "1100");
    assert!((f[1].parse::<f64>().unwrap() + 1.0).abs() < 1e-8 && f[2].parse::<f64>().unwrap().abs() < 1e-8);
    let dense = stdout(&["simulate", "--program", path(&prog), "--state", "1100", "--dense"]);
    let dense_rows: Vec<&str> = dense.lines().skip(1).collect();
    assert_eq!(dense_rows.len(), 1);
    assert!(dense_rows[0].starts_with("1100,"));
}

#[test]
fn parity_for_a_code_bit_and_its_angles() {
    let code = L3_CODE;
    let mut args = vec!["synth-parity", "--bit", "4"];
    args.extend(code);
    let text = stdout(&args);
    assert!(text.contains("qubits 10\n") && text.contains("ancilla a 9\n"));
    args.push("--angles");
    let angles = stdout(&args);
    assert_eq!(angles.lines().count(), 2 + 5);
    let both = polycode(&["synth-parity", "--bit", "1", "--support-size", "3"]);
    assert!(!both.status.success());
}

#[test]
fn simulation_cap_comes_from_config_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let prog = write_program(dir.path(), "p.prog", &["synth-parity", "--support-size", "3"]);
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "sim_cap = 2\n").unwrap();
    let capped = polycode(&["simulate", "--program", path(&prog), "--dense", "--config", path(&cfg)]);
    assert!(!capped.status.success());
    assert!(String::from_utf8_lossy(&capped.stderr).contains("cap of 2"));
    stdout(&[
        "simulate",
        "--program",
        path(&prog),
        "--dense",
        "--config",
        path(&cfg),
        "--sim-cap",
        "8",
    ]);
    std::fs::write(&cfg, "colour = blue\n").unwrap();
    let bad = polycode(&["scan-threshold", "--config", path(&cfg)]);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("unknown key"));
}

#[test]
fn route_respects_the_swap_bound() {
    let dir = tempfile::tempdir().unwrap();
    let code = L3_CODE;
    let mut args = vec!["synth-parity", "--bit", "0"];
    args.extend(code);
    let prog = write_program(dir.path(), "p.prog", &args);
    let routed = stdout(&["route", "--program", path(&prog)]);
    let blocks: Vec<usize> = routed
        .lines()
        .find_map(|l| l.strip_prefix("# block_swaps "))
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    assert_eq!(blocks.len(), 5);
    assert!(blocks.iter().all(|&b| b <= 13));
    // routed output is itself a valid program
    let again = dir.path().join("r.prog");
    std::fs::write(&again, &routed).unwrap();
    stdout(&["simulate", "--program", path(&again)]);
}

#[test]
fn hop_and_multi_controlled_programs() {
    let hop = stdout(&l3(&["synth-hop", "--i", "0", "--j", "1", "--phi", "1/4 pi"]));
    assert!(hop.contains("ancilla b 10\n"));
    let neg = stdout(&l3(&["synth-hop", "--i", "0", "--j", "1", "--phi", "-0.5"]));
    assert!(neg.starts_with("# single_qubit"));
    let bad = polycode(&l3(&["synth-hop", "--i", "2", "--j", "2", "--phi", "0"]));
    assert!(!bad.status.success());
    let mc = stdout(&["synth-mcphase", "--n", "3"]);
    assert!(mc.starts_with("# single_qubit") && mc.contains(" controlled 27 "));
    let not = stdout(&["synth-mcphase", "--n", "3", "--not"]);
    assert_ne!(mc, not);
}

#[test]
fn hamiltonian_compiles_to_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.txt");
    std::fs::write(&h, "# hopping plus a number term\n0.5 : 0^ 1\n0.5 : 1^ 0\n1.0 : 2^ 2\n").unwrap();
    let progs = dir.path().join("progs");
    let code = ["--fermions", "1", "--degree", "1", "--no-margin"];
    let mut args = vec!["synth-term", "--hamiltonian", path(&h), "--programs", path(&progs)];
    args.extend(code);
    let manifest = stdout(&args);
    assert!(manifest.starts_with("index,coefficient,"));
    assert!(manifest.contains("# constant 0.5\n"));
    assert!(manifest.contains("# lambda 1.0\n"));
    let entries = manifest.lines().filter(|l| !l.starts_with('#')).count() - 1;
    assert_eq!(std::fs::read_dir(&progs).unwrap().count(), entries);
    std::fs::write(&h, "0.5 : 0^ 1\n").unwrap();
    let unaudited = polycode(&[
        "synth-term",
        "--hamiltonian",
        path(&h),
        "--fermions",
        "1",
        "--degree",
        "1",
    ]);
    assert!(!unaudited.status.success());
}

#[test]
fn hermite_scan_matches_the_closed_form_at_three() {
    let csv = stdout(&["scan-hermite", "--kind", "majority", "--from", "3", "--to", "7"]);
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[1].starts_with("3,5,0.768214540507"));
    let cp = stdout(&[
        "scan-hermite",
        "--kind",
        "ctrl-phase",
        "--from",
        "2",
        "--to",
        "2",
        "--precision-bits",
        "128",
    ]);
    assert!(cp.lines().nth(1).unwrap().starts_with("2,3,0.85185185185"));
}

#[test]
fn majority_scan_keeps_its_leading_digits() {
    let csv = stdout(&[
        "scan-hermite",
        "--kind",
        "majority",
        "--from",
        "251",
        "--to",
        "257",
        "--precision-bits",
        "1024",
    ]);
    for row in csv.lines().skip(1) {
        assert_eq!(row.split(',').nth(2).unwrap().get(..7), Some("0.80662"), "{row}");
    }
}

#[test]
fn threshold_scan_is_bounded() {
    let csv = stdout(&["scan-threshold"]);
    assert_eq!(csv.lines().count(), 251);
    let max = csv
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap())
        .max();
    assert_eq!(max, Some(4));
}

#[test]
fn estimate_and_compare() {
    let e = stdout(&[
        "estimate",
        "--modes",
        "1000000",
        "--fermions",
        "10",
        "--sim",
        "qdrift",
        "--lambda",
        "10",
        "--t",
        "1",
        "--eps",
        "0.001",
    ]);
    assert!(e.contains("optimal_degree = 1\n") && e.contains("optimal_qubits = 404609\n"));
    assert!(e.contains("rotations = 200000\n"));
    let missing = polycode(&[
        "estimate",
        "--modes",
        "1000",
        "--fermions",
        "2",
        "--sim",
        "rpe",
        "--lambda",
        "1",
    ]);
    assert!(!missing.status.success());
    let csv = stdout(&["compare", "--modes", "100", "--fermions", "2", "--format", "csv"]);
    assert!(csv.lines().any(|l| l.starts_with("segment,84,")));
    let plot = stdout(&["compare", "--fermions", "4", "--plot", "1000,10000"]);
    assert!(plot.lines().any(|l| l == "jordan-wigner,10000,10000"));
}

#[test]
fn outputs_are_deterministic_across_job_counts() {
    let a = stdout(&[
        "--jobs",
        "1",
        "scan-hermite",
        "--kind",
        "majority",
        "--from",
        "3",
        "--to",
        "21",
    ]);
    let b = stdout(&[
        "--jobs",
        "3",
        "scan-hermite",
        "--kind",
        "majority",
        "--from",
        "3",
        "--to",
        "21",
    ]);
    assert_eq!(a, b);
    let m1 = stdout(&["--jobs", "1", "compare", "--modes", "118328", "--fermions", "10"]);
    let m2 = stdout(&["--jobs", "2", "compare", "--modes", "118328", "--fermions", "10"]);
    assert_eq!(m1, m2);
}

#[test]
fn bad_invocations_fail_with_a_message() {
    let unknown = polycode(&["transmogrify"]);
    assert!(!unknown.status.success());
    let bad_flag = polycode(&["params", "--modes", "ten", "--fermions", "1"]);
    assert!(!bad_flag.status.success());
    let missing_file = polycode(&["route", "--program", "/nonexistent/p.prog"]);
    assert!(!missing_file.status.success());
    assert!(String::from_utf8_lossy(&missing_file.stderr).starts_with("error: /nonexistent/p.prog"));
    let no_code = polycode(&["codebook", "--modes", "1000", "--fermions", "10"]);
    assert!(String::from_utf8_lossy(&no_code.stderr).contains("Bravyi-Kitaev"));
}
