use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pac_core::bounds::q_function;
use pac_core::channel::sigma_for_ebn0;
use tempfile::TempDir;

fn pac(args: &[&str]) -> Output {
    pac_env(args, &[])
}

fn pac_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pac"));
    cmd.args(args).env_remove("PAC_SEED");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("running pac")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "pac failed: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines().find_map(|l| l.strip_prefix(&format!("{key}="))).unwrap_or_else(|| panic!("no {key} in {text}"))
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

/// CSV rows as maps from header name to value.
fn rows(csv: &str) -> Vec<Vec<(String, String)>> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    lines
        .map(|l| header.iter().map(|h| h.to_string()).zip(l.split(',').map(str::to_string)).collect())
        .collect()
}

fn get(row: &[(String, String)], key: &str) -> f64 {
    row.iter().find(|(k, _)| k == key).unwrap().1.parse().unwrap()
}

fn small_spec(dir: &TempDir) -> String {
    let path = dir.path().join("c.spec");
    let p = path.to_str().unwrap();
    stdout(&pac(&["construct", "--method", "gade", "-N", "32", "-K", "16", "--systematic", "-o", p]));
    p.to_string()
}

#[test]
fn construct_rm_and_beta() {
    let rm = stdout(&pac(&["construct", "--method", "rm", "-N", "8", "-K", "4"]));
    assert_eq!(field(&rm, "frozen"), "0,1,2,4");
    assert_eq!(field(&rm, "conv_forward"), "131");
    let beta = stdout(&pac(&["construct", "--method", "beta", "-N", "4", "-K", "2"]));
    assert_eq!(field(&beta, "frozen"), "0,1");
    let sys = stdout(&pac(&["construct", "-N", "16", "-K", "8", "--systematic"]));
    assert_eq!((field(&sys, "conv_forward"), field(&sys, "conv_feedback")), ("115", "147"));
}

#[test]
fn genetic_writes_spec_and_progress_log() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("g.spec");
    let o = pac(&[
        "construct", "--method", "genetic", "-N", "16", "-K", "8", "--iters", "4", "--spectrum-list", "256",
        "-o", out.to_str().unwrap(),
    ]);
    stdout(&o);
    let spec = fs::read_to_string(&out).unwrap();
    assert_eq!(field(&spec, "frozen").split(',').count(), 8);
    let log = fs::read_to_string(dir.path().join("g.ga.csv")).unwrap();
    let r = rows(&log);
    assert_eq!(r.len(), 5);
    assert!(log.starts_with("iter,best_dmin,best_Admin,population_size\n"));
    let dmins: Vec<f64> = r.iter().map(|row| get(row, "best_dmin")).collect();
    assert!(dmins.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn infeasible_systematic_construction_exits_2() {
    let o = pac(&["construct", "--method", "genetic", "-N", "2", "-K", "1", "--systematic", "--iters", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("systematic"));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(pac(&["nonsense"]).status.code(), Some(1));
    assert_eq!(pac(&["construct", "-N", "6", "-K", "3"]).status.code(), Some(1));
    assert_eq!(pac(&["simulate", "--spec", "/nonexistent/file"]).status.code(), Some(1));
    assert_eq!(pac(&["--help"]).status.code(), Some(0));
}

#[test]
fn simulate_is_reproducible_and_honours_stop_rule() {
    let dir = TempDir::new().unwrap();
    let spec = small_spec(&dir);
    let args = [
        "simulate", "--spec", &spec, "--snr-start", "1", "--snr-stop", "3", "--snr-step", "1", "--min-errors", "15",
        "--max-frames", "400", "--seed", "5",
    ];
    let a = stdout(&pac(&args));
    assert_eq!(a, stdout(&pac(&args)));
    assert!(a.starts_with("ebn0_db,frames,frame_errors,fer,bit_errors,ber,avg_steps"));
    let r = rows(&a);
    assert_eq!(r.len(), 3);
    for row in &r {
        let stop = &row.iter().find(|(k, _)| k == "stop").unwrap().1;
        let (frames, errors) = (get(row, "frames"), get(row, "frame_errors"));
        match stop.as_str() {
            "frame_errors" => assert_eq!(errors, 15.0),
            "max_frames" => assert!(frames == 400.0 && errors < 15.0),
            other => panic!("stop reason {other}"),
        }
    }
    let other = stdout(&pac(&args.map(|s| if s == "5" { "6" } else { s })));
    assert_ne!(a, other);
}

#[test]
fn seed_falls_back_to_environment() {
    let dir = TempDir::new().unwrap();
    let spec = small_spec(&dir);
    let base = ["simulate", "--spec", &spec, "--snr-start", "2", "--snr-stop", "2", "--max-frames", "200"];
    let flagged = stdout(&pac(&[&base[..], &["--seed", "9"]].concat()));
    let env = stdout(&pac_env(&base, &[("PAC_SEED", "9")]));
    assert_eq!(flagged, env);
    let overridden = stdout(&pac_env(&[&base[..], &["--seed", "9"]].concat(), &[("PAC_SEED", "1")]));
    assert_eq!(flagged, overridden);
}

#[test]
fn config_file_sits_between_flags_and_defaults() {
    let dir = TempDir::new().unwrap();
    let spec = small_spec(&dir);
    let cfg = write(&dir, "run.cfg", "# campaign\nsnr-start=1\nsnr-stop=1\nmin-errors=7\nmax-frames=100000\n");
    let from_file = rows(&stdout(&pac(&["--config", &cfg, "simulate", "--spec", &spec])));
    assert_eq!(from_file.len(), 1);
    assert_eq!(get(&from_file[0], "frame_errors"), 7.0);
    let flag = rows(&stdout(&pac(&["--config", &cfg, "simulate", "--spec", &spec, "--min-errors", "3"])));
    assert_eq!(get(&flag[0], "frame_errors"), 3.0);
    let bad = write(&dir, "bad.cfg", "min_errors=3\n");
    assert_eq!(pac(&["--config", &bad, "simulate", "--spec", &spec]).status.code(), Some(1));
}

#[test]
fn uncoded_run_matches_gaussian_tail() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        &dir,
        "uncoded.spec",
        "N=64\nK=64\nsystematic=1\nsimplified=0\nconv_forward=1\nconv_feedback=1\nfrozen=\n",
    );
    let out = stdout(&pac(&[
        "simulate", "--spec", &spec, "--snr-start", "0", "--snr-stop", "4", "--snr-step", "2", "--min-errors",
        "1000000000", "--max-frames", "3000",
    ]));
    for row in rows(&out) {
        let ebn0 = get(&row, "ebn0_db");
        let p = q_function(1.0 / sigma_for_ebn0(ebn0, 1.0));
        let bits = 64.0 * get(&row, "frames");
        let se = (p * (1.0 - p) / bits).sqrt();
        assert!((get(&row, "ber") - p).abs() < 3.0 * se, "{ebn0} dB: {} vs {p}", get(&row, "ber"));
    }
}

#[test]
fn steps_report_savings() {
    let dir = TempDir::new().unwrap();
    let spec = small_spec(&dir);
    let out = stdout(&pac(&["steps", "--spec", &spec, "--snr-start", "1", "--snr-stop", "3", "--snr-step", "1", "--frames", "300"]));
    assert!(out.starts_with("ebn0_db,avg_steps_base,avg_steps_simplified,saving_pct"));
    for row in rows(&out) {
        assert!(get(&row, "saving_pct") >= 0.0);
        assert!(get(&row, "avg_steps_simplified") <= get(&row, "avg_steps_base"));
    }
    let ns = stdout(&pac(&["construct", "-N", "32", "-K", "16"]));
    let ns_path = write(&dir, "ns.spec", &ns);
    assert_eq!(pac(&["steps", "--spec", &ns_path, "--frames", "10", "--no-shortcuts"]).status.code(), Some(1));
}

#[test]
fn bound_curve_decreases() {
    let out = stdout(&pac(&["bound", "-N", "128", "-K", "64", "--snr-start", "0", "--snr-stop", "4", "--snr-step", "0.5"]));
    assert!(out.starts_with("ebn0_db,fer\n"));
    let fers: Vec<f64> = rows(&out).iter().map(|r| get(r, "fer")).collect();
    assert_eq!(fers.len(), 9);
    assert!(fers.windows(2).all(|w| w[1] < w[0]));
    assert!(fers.iter().all(|&f| f > 0.0 && f < 1.0));
}

#[test]
fn spectrum_of_extended_hamming_code() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "h.spec", "N=8\nK=4\nsystematic=0\nconv_forward=1\nfrozen=0,1,2,4\n");
    let report = stdout(&pac(&["spectrum", "--spec", &spec, "--list-size", "16"]));
    assert_eq!(report, "# list_size=16\nd=4 A=14\nd=8 A=1\n");
}

#[test]
fn plot_script_references_columns() {
    let dir = TempDir::new().unwrap();
    let sim = write(&dir, "sim.csv", "ebn0_db,frames,frame_errors,fer,bit_errors,ber,avg_steps\n1,10,1,0.1,1,0.01,5\n");
    let na = write(&dir, "na.csv", "ebn0_db,fer\n1,0.05\n");
    let script = stdout(&pac(&["plot", &sim, &na, "--kind", "fer"]));
    assert!(script.contains("using 1:4"));
    assert!(script.contains("using 1:2"));
    assert!(script.contains("set logscale y"));
    let o = pac(&["plot", &na, "--kind", "ber"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(Path::new(&sim).exists());
}
