use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use moyal_cli::config::RunConfig;
use moyal_cli::output::has_header;

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

/// Runs the binary inside `dir` with a clean `MOYAL_*` environment.
fn moyal(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_moyal"));
    cmd.current_dir(dir).args(args);
    for (k, _) in std::env::vars().filter(|(k, _)| k.starts_with("MOYAL_")) {
        cmd.env_remove(k);
    }
    cmd.envs(env.iter().copied());
    cmd.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn exit_codes() {
    let dir = scratch("exit_codes");
    assert_eq!(code(&moyal(&dir, &["--help"], &[])), 0);
    assert_eq!(code(&moyal(&dir, &["--version"], &[])), 0);
    assert_eq!(code(&moyal(&dir, &["frobnicate"], &[])), 64);
    assert_eq!(code(&moyal(&dir, &["distance", "eigen:0"], &[])), 64);
    assert_eq!(code(&moyal(&dir, &["distance", "eigen:0", "nonsense:1"], &[])), 64);
    assert_eq!(code(&moyal(&dir, &["--trunc-dim", "4", "spectrum"], &[])), 64);
    assert_eq!(code(&moyal(&dir, &["--trunc-dim", "16", "counterexample", "--indices", "0,1,2"], &[])), 64);
    // leaks out of the truncation
    let far = moyal(&dir, &["--trunc-dim", "16", "distance", "translated:eigen:0:40+0i", "eigen:0"], &[]);
    assert_eq!(code(&far), 65);
    // LP route needs number-diagonal states
    let lp = moyal(&dir, &["--trunc-dim", "16", "distance", "super:0,1:1,1", "eigen:0", "--method", "lp"], &[]);
    assert_eq!(code(&lp), 65);
    let ok = moyal(&dir, &["--trunc-dim", "16", "distance", "eigen:0", "eigen:2", "--method", "closed"], &[]);
    assert_eq!(code(&ok), 0);
    assert!(stdout(&ok).contains("closed  = 1.20710678119"), "{}", stdout(&ok));
}

#[test]
fn outputs_are_deterministic_and_headed() {
    let dir = scratch("determinism");
    let args = [
        "--trunc-dim",
        "16",
        "--iterations",
        "200",
        "--restarts",
        "2",
        "--seed",
        "7",
        "distance",
        "super:0,1:1,1+1i",
        "eigen:2",
        "--with-certificate",
    ];
    let read = |name: &str| fs::read(dir.join("out").join(name)).unwrap();
    assert_eq!(code(&moyal(&dir, &args, &[])), 0);
    let first = read("distance.json");
    assert_eq!(code(&moyal(&dir, &args, &[])), 0);
    assert_eq!(first, read("distance.json"));

    let spectrum = ["--trunc-dim", "16", "spectrum", "--count", "6"];
    assert_eq!(code(&moyal(&dir, &spectrum, &[])), 0);
    let a = read("spectrum.csv");
    assert_eq!(code(&moyal(&dir, &spectrum, &[])), 0);
    assert_eq!(a, read("spectrum.csv"));

    let cfg = RunConfig { trunc_dim: 16, iterations: 200, restarts: 2, seed: 7, ..RunConfig::default() };
    assert!(has_header(&dir.join("out/distance.json"), &cfg));
    let cfg = RunConfig { trunc_dim: 16, ..RunConfig::default() };
    assert!(has_header(&dir.join("out/spectrum.csv"), &cfg));
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("# moyal spectrum\n# trunc_dim = 16\n"));
    assert!(text.contains("\nindex,l2,l\n0,2,1.41421356237\n"));
}

#[test]
fn flags_beat_env_beat_file() {
    let dir = scratch("precedence");
    fs::write(dir.join("run.toml"), "trunc_dim = 20\nseed = 3\n").unwrap();
    let header = |args: &[&str], env: &[(&str, &str)]| {
        let mut all = vec!["--config", "run.toml"];
        all.extend_from_slice(args);
        all.extend_from_slice(&["spectrum", "--count", "1"]);
        assert_eq!(code(&moyal(&dir, &all, env)), 0);
        fs::read_to_string(dir.join("out/spectrum.csv")).unwrap()
    };
    let file = header(&[], &[]);
    assert!(file.contains("# trunc_dim = 20\n") && file.contains("# seed = 3\n"));
    let env = header(&[], &[("MOYAL_TRUNC_DIM", "24")]);
    assert!(env.contains("# trunc_dim = 24\n") && env.contains("# seed = 3\n"));
    let flag = header(&["--trunc-dim", "28"], &[("MOYAL_TRUNC_DIM", "24")]);
    assert!(flag.contains("# trunc_dim = 28\n"));

    fs::write(dir.join("bad.toml"), "trunc_dimm = 20\n").unwrap();
    assert_eq!(code(&moyal(&dir, &["--config", "bad.toml", "spectrum"], &[])), 64);
}

#[test]
fn sweeps_write_tables() {
    let dir = scratch("sweeps");
    let n = ["--trunc-dim", "24"];
    let run = |extra: &[&str]| {
        let args: Vec<&str> = n.iter().chain(extra).copied().collect();
        moyal(&dir, &args, &[])
    };
    assert_eq!(code(&run(&["riemann", "--n-max", "4", "--plot"])), 0);
    let riemann = fs::read_to_string(dir.join("out/riemann.csv")).unwrap();
    assert!(riemann.contains("\nm,n,d_D,d_L_mod,rel_gap,radial_gap\n0,1,0.707106781187,"));
    assert!(fs::read_to_string(dir.join("out/riemann.svg")).unwrap().starts_with("<svg"));

    let asym = run(&["asymptotics", "--kappa", "0..2"]);
    assert_eq!(code(&asym), 0);
    assert!(stdout(&asym).contains("C0: rel_gap non-increasing along kappa: true"));
    let table = fs::read_to_string(dir.join("out/asymptotics.csv")).unwrap();
    assert_eq!(table.lines().filter(|l| l.starts_with("C0,")).count(), 3);

    let ce = run(&["counterexample"]);
    assert_eq!(code(&ce), 0);
    assert!(stdout(&ce).contains("residual 2.044"), "{}", stdout(&ce));

    let opt = run(&["optimal-element", "--kind", "eigen", "--upto", "3"]);
    assert_eq!(code(&opt), 0);
    assert!(stdout(&opt).contains("seminorm 1\n"));
}

#[test]
fn quick_suite_subset() {
    let dir = scratch("suite");
    let o = moyal(&dir, &["suite", "--quick", "--only", "1,8"], &[]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("2/2 criteria passed"));
    let csv = fs::read_to_string(dir.join("out/suite.csv")).unwrap();
    assert!(csv.contains("\nid,name,pass,failed_checks,detail\n1,"));
    assert_eq!(code(&moyal(&dir, &["suite", "--only", "11"], &[])), 64);
}
