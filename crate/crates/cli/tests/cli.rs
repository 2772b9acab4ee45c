use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_archdeconv"));
    c.env_remove("DECONV_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn kv(out: &str, key: &str) -> String {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("{key} missing in {out}"))
        .to_string()
}

#[test]
fn rates_ordinary_sobolev() {
    let o = run(&["rates", "--s", "2", "--r", "0", "--noise", "laplace:1", "--n", "10000"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let pm: f64 = kv(&out, "pi_m_breve").parse().unwrap();
    assert!((pm - 2.783).abs() < 1e-3);
    assert!(kv(&out, "rate_form").starts_with("n^(-0.444"));
}

#[test]
fn degenerate_arch1_returns_innovations() {
    let o = run(&["simulate", "--model", "arch1:1,0", "--n", "50", "--seed", "11"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("t,y,sigma,x"));
    let mut count = 0;
    for l in lines {
        let c: Vec<f64> = l.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(c[2], 1.0);
        assert_eq!(c[3], 0.0);
        count += 1;
    }
    assert_eq!(count, 50);
}

#[test]
fn zero_observation_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("y.txt");
    fs::write(&input, "0.5\n0\n-1.2\n").unwrap();
    let o = run(&["select", "--input", input.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.lines().any(|l| l.starts_with("error: DEGENERATE_OBSERVATION")), "{err}");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["rates", "--bogus", "1"]).status.code(), Some(2));
    assert_eq!(run(&["nosuch"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--model", "garch:0.1,0.3,0.6"]).status.code(), Some(2));
}

#[test]
fn simulate_then_select_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    let o = run(&["simulate", "--model", "garch:0.1,0.3,0.6", "--n", "1500", "--seed", "5", "--out-dir", sim.to_str().unwrap()]);
    assert!(o.status.success());
    let out = dir.path().join("nested/out");
    let o = run(&["select", "--input", sim.join("simulate.csv").to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m_hat: f64 = kv(&stdout(&o), "m_hat").parse().unwrap();
    assert!(m_hat > 0.0);
    let table = fs::read_to_string(out.join("criterion.csv")).unwrap();
    assert!(table.starts_with("m,contrast,penalty,criterion\n"));
    let density = fs::read_to_string(out.join("density.csv")).unwrap();
    assert_eq!(density.lines().count(), 2002);
}

#[test]
fn estimate_pre_logged_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("z.csv");
    let z: String = (0..400).map(|i| format!("{}\n", ((i * 37) % 101) as f64 / 25.0 - 2.0)).collect();
    fs::write(&input, format!("z\n{z}")).unwrap();
    let o = run(&[
        "estimate", "--input", input.to_str().unwrap(), "--pre-logged", "--noise", "laplace:1", "--m", "0.75", "--kn", "20",
        "--x-min", "-5", "--x-max", "5", "--x-step", "0.05", "--out-dir", dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let coeffs = fs::read_to_string(dir.path().join("coefficients.csv")).unwrap();
    assert_eq!(coeffs.lines().count(), 42);
    let density = fs::read_to_string(dir.path().join("density.csv")).unwrap();
    assert_eq!(density.lines().count(), 202);
    let contrast: f64 = kv(&stdout(&o), "contrast").parse().unwrap();
    assert!(contrast < 0.0);
}

fn write_config(dir: &Path) -> std::path::PathBuf {
    let p = dir.join("exp.cfg");
    fs::write(
        &p,
        "# small experiment\nscenario = gaussian:0,1\nnoise = laplace:1\nn = 200, 400\nreplications = 3\nseed = 17\ngrid_max = 2\n",
    )
    .unwrap();
    p
}

#[test]
fn mise_is_reproducible_and_seed_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let outs: Vec<_> = ["a", "b"].iter().map(|d| dir.path().join(d)).collect();
    for o in &outs {
        let r = run(&["mise", "--config", cfg.to_str().unwrap(), "--out-dir", o.to_str().unwrap()]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    }
    for name in ["report.csv", "selection.csv", "summary.csv"] {
        assert_eq!(fs::read(outs[0].join(name)).unwrap(), fs::read(outs[1].join(name)).unwrap());
    }
    let report = fs::read_to_string(outs[0].join("report.csv")).unwrap();
    assert!(report.starts_with("scenario,n,m,mean_ise,se\n"));

    let c = dir.path().join("c");
    let r = bin()
        .env("DECONV_SEED", "18")
        .args(["mise", "--config", cfg.to_str().unwrap(), "--out-dir", c.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(r.status.success());
    assert_ne!(fs::read(outs[0].join("report.csv")).unwrap(), fs::read(c.join("report.csv")).unwrap());
}

#[test]
fn simulate_seed_from_environment() {
    let a = bin().env("DECONV_SEED", "3").args(["simulate", "--model", "garch:0.1,0.3,0.6", "--n", "20"]).output().unwrap();
    let b = run(&["simulate", "--model", "garch:0.1,0.3,0.6", "--n", "20", "--seed", "3"]);
    let c = bin().env("DECONV_SEED", "3").args(["simulate", "--model", "garch:0.1,0.3,0.6", "--n", "20", "--seed", "4"]).output().unwrap();
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn dependence_prints_table() {
    let o = run(&["dependence", "--model", "archinf-geom:0.1,0.5,0.6", "--max-power", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("class="));
    assert!(out.lines().any(|l| l.starts_with("1000,")));
}

#[test]
fn bad_noise_label_is_a_domain_error() {
    let o = run(&["rates", "--s", "1", "--noise", "nosuch:1", "--n", "100"]);
    assert_eq!(o.status.code(), Some(1));
}
