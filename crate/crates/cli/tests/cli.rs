use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_landau-kam"))
}

fn run(cmd: &str, config: &str, out: &Path, extra: &[&str]) -> (i32, String) {
    let cfg = out.join("config.toml");
    std::fs::create_dir_all(out).unwrap();
    std::fs::write(&cfg, config).unwrap();
    let o = bin()
        .arg(cmd)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap();
    (
        o.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&o.stderr).into_owned(),
    )
}

fn read(out: &Path, name: &str) -> String {
    std::fs::read_to_string(out.join(name)).unwrap()
}

fn field<'a>(header: &str, row: &'a str, name: &str) -> &'a str {
    let i = header.split(',').position(|h| h == name).unwrap();
    row.split(',').nth(i).unwrap()
}

#[test]
fn constants_table_flags_resonance() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = run("constants", "[frequency]\nvalues = [1.0, 2.4, 3.0, 2.0]", dir.path(), &[]);
    assert_eq!(code, 0);
    let csv = read(dir.path(), "constants.csv");
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "omega,b0,c_omega,d_omega,a_omega,slow_coeff,status");
    let c: f64 = field(rows[0], rows[2], "c_omega").parse().unwrap();
    assert!((c + 2.4f64.powi(2) / (4.0 * (2.4f64.powi(2) - 4.0))).abs() < 1e-12);
    assert_eq!(rows[4], "2,1,,,,,resonant");
}

#[test]
fn zero_forcing_gives_zero_constants() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = run(
        "constants",
        "[forcing]\ncoeffs = [{ k = [1] }]\n[frequency]\nvalues = [1.0, 3.0]",
        dir.path(),
        &[],
    );
    assert_eq!(code, 0);
    for row in read(dir.path(), "constants.csv").lines().skip(1) {
        assert!(row.ends_with(",1,0,0,0,0,ok"), "{row}");
    }
}

#[test]
fn reduce_landau_and_trivial() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = run("reduce", "[amplitude]\nvalues = [0.0, 1e-2]", dir.path(), &[]);
    assert_eq!(code, 0, "{err}");
    let csv = read(dir.path(), "reduce.csv");
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(field(rows[0], rows[1], "status"), "converged");
    assert_eq!(field(rows[0], rows[1], "c"), "0");
    let rel: f64 = field(rows[0], rows[2], "rel_error").parse().unwrap();
    assert!(rel.abs() <= 5e-4);
    let json: serde_json::Value = serde_json::from_str(&read(dir.path(), "reduce.json")).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 2);
    assert!(json[1]["conjugation_residual"].as_f64().unwrap() < 1e-8);
    assert!(read(dir.path(), "convergence.csv").starts_with("omega,eps,m,q_norm\n"));
}

#[test]
fn reduce_resonant_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = run("reduce", "[frequency]\nvalues = [2.0]", dir.path(), &[]);
    assert_eq!(code, 3);
    let csv = read(dir.path(), "reduce.csv");
    assert!(csv.lines().nth(1).unwrap().contains(",resonant,"));
}

#[test]
fn invalid_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for text in ["b0 = 0.0", "nonsense = true", "[amplitude]\nvalues = [2.0]", "[measure]\nsamples = 0"] {
        let cmd = if text.contains("measure") { "measure" } else { "reduce" };
        let (code, err) = run(cmd, text, dir.path(), &[]);
        assert_eq!(code, 2, "{text}: {err}");
    }
    let o = bin().arg("reduce").arg("--config").arg("/nonexistent.toml").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn measure_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = "[amplitude]\nvalues = [1e-2]\n[measure]\nsamples = 60";
    assert_eq!(run("measure", cfg, a.path(), &["--seed", "11"]).0, 0);
    assert_eq!(run("measure", cfg, b.path(), &["--seed", "11", "--jobs", "1"]).0, 0);
    let (x, y) = (read(a.path(), "measure.csv"), read(b.path(), "measure.csv"));
    assert_eq!(x, y);
    assert!(x.starts_with("eps,samples,excluded,diverged,fraction,ci_low,ci_high,bound\n"));
}

#[test]
fn growth_without_momentum_has_no_drift() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[amplitude]\nvalues = [0.05]\n[oracle]\nduration = 2000.0\nsamples = 2000\nx = [0.5, 0.0]\np = [0.0, 0.3]";
    let (code, err) = run("landau-growth", cfg, dir.path(), &[]);
    assert_eq!(code, 0, "{err}");
    let csv = read(dir.path(), "growth.csv");
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 3);
    for row in &rows[1..] {
        assert_eq!(field(rows[0], row, "drift_detected"), "false", "{row}");
    }
    assert!(dir.path().join("trajectory_landau_0.csv").exists());
}

#[test]
fn growth_window_too_short_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[amplitude]\nvalues = [0.05]\n[oracle]\nduration = 100.0";
    assert_eq!(run("landau-growth", cfg, dir.path(), &[]).0, 2);
}

#[test]
fn symmetric_bounded_short_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[frequency]\nvalues = [3.0]\n[amplitude]\nvalues = [1e-2]\n[oracle]\nduration = 2000.0\nsamples = 1000\nwrite_trajectories = false";
    let (code, err) = run("symmetric-bounded", cfg, dir.path(), &[]);
    assert_eq!(code, 0, "{err}");
    let b = read(dir.path(), "bounded.csv");
    let rows: Vec<&str> = b.lines().collect();
    assert_eq!(field(rows[0], rows[1], "bounded"), "true");
    let r = read(dir.path(), "rotation.csv");
    let rows: Vec<&str> = r.lines().collect();
    let diff: f64 = field(rows[0], rows[1], "max_diff").parse().unwrap();
    assert!(diff < 1e-5);
    assert!(!dir.path().join("trajectory_symmetric_0.csv").exists());
}

#[test]
fn presets_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets");
    let mut n = 0;
    for entry in std::fs::read_dir(root).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "toml") {
            let text = std::fs::read_to_string(&p).unwrap();
            toml::from_str::<toml::Value>(&text).unwrap();
            n += 1;
        }
    }
    assert!(n >= 6);
}
