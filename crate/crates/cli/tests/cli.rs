use std::path::Path;
use std::process::{Command, Output};

fn cylas(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cylas"))
        .args(args)
        .env("CYLAS_OUT", out)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn kv(path: &Path, key: &str) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key},")).map(str::to_string))
        .unwrap_or_else(|| panic!("{key} missing in {}", path.display()))
}

#[test]
fn classify_regime_one() {
    let d = tempfile::tempdir().unwrap();
    let o = cylas(d.path(), &["classify", "--a", "-0.2", "--b", "0", "--p", "3", "--n", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("regime: I\n"));
    // p = 3 is above the n = 5 bound: the report is still written, exit 2
    let o = cylas(d.path(), &["classify", "--a", "-1", "--b", "0", "--p", "3", "--n", "5"]);
    assert_eq!(o.status.code(), Some(2));
    let s = stdout(&o);
    assert!(s.contains("regime: I\n"), "{s}");
    assert!(s.contains("I-decay: rate 1 "), "{s}");
    assert!(d.path().join("classify/manifest.txt").exists());
}

#[test]
fn classify_from_ball_chart() {
    let d = tempfile::tempdir().unwrap();
    let o = cylas(d.path(), &["classify", "--c", "0", "--sigma", "0", "--p", "5", "--n", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("a = -0.25") && s.contains("b = 0"), "{s}");
}

#[test]
fn usage_errors_exit_two() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(cylas(d.path(), &["classify", "--a", "-1", "--n", "3"]).status.code(), Some(2));
    assert_eq!(cylas(d.path(), &["classify", "--a", "-1", "--c", "0", "--p", "3", "--n", "3"]).status.code(), Some(2));
    assert_eq!(cylas(d.path(), &["classify", "--a", "-1", "--b", "1", "--p", "3", "--n", "3"]).status.code(), Some(2));
    assert_eq!(cylas(d.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(cylas(d.path(), &["verify", "--only", "42"]).status.code(), Some(2));
}

#[test]
fn config_file_with_flag_override() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.cfg");
    std::fs::write(&cfg, "# regime I\na = -1\np = 3\nn = 3\nh0 = -0.1\n").unwrap();
    let o = cylas(d.path(), &["period", "--config", cfg.to_str().unwrap(), "--h0", "-0.4"]);
    assert_eq!(o.status.code(), Some(0));
    let manifest = std::fs::read_to_string(d.path().join("period/manifest.txt")).unwrap();
    assert!(manifest.contains("h0 = -0.4\n"), "{manifest}");
    std::fs::write(&cfg, "colour = red\n").unwrap();
    let o = cylas(d.path(), &["period", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn period_methods_agree() {
    let d = tempfile::tempdir().unwrap();
    let o = cylas(d.path(), &["period", "--a", "-1", "--p", "3", "--h0", "-0.4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = std::fs::read_to_string(d.path().join("period/period.csv")).unwrap();
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert!(row[5] <= 1e-6, "gap {}", row[5]);
}

#[test]
fn fit_recovers_rate() {
    let d = tempfile::tempdir().unwrap();
    let mut csv = String::from("t,v\n");
    for k in 0..100 {
        let t = 0.05 * k as f64;
        csv.push_str(&format!("{t},{}\n", 3.0 * (-2.0 * t).exp()));
    }
    let input = d.path().join("decay.csv");
    std::fs::write(&input, csv).unwrap();
    let o = cylas(d.path(), &["fit", "--input", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let gamma: f64 = kv(&d.path().join("fit/fit.csv"), "gamma").parse().unwrap();
    assert!((gamma - 2.0).abs() < 1e-9, "{gamma}");
    assert!(d.path().join("fit/fit.svg").exists());
}

#[test]
fn portrait_outputs() {
    let d = tempfile::tempdir().unwrap();
    let o = cylas(d.path(), &["portrait", "--a", "-1", "--p", "3", "--levels", "-0.5,-0.25,0,0.25"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = d.path().join("portrait");
    for f in ["levels.csv", "orbits.csv", "portrait.svg", "manifest.txt"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let svg = std::fs::read_to_string(dir.join("portrait.svg")).unwrap();
    assert!(svg.contains("<metadata>") && svg.contains("levels = -0.5,-0.25,0,0.25"));
    // the zero level is the homoclinic loop through (0, 0) and (0, √2)
    let orbits = std::fs::read_to_string(dir.join("orbits.csv")).unwrap();
    let top = orbits
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .filter(|r| r[0] == 0.0)
        .map(|r| r[2])
        .fold(0.0, f64::max);
    assert!((top - 2f64.sqrt()).abs() < 1e-9, "{top}");
    let o = cylas(d.path(), &["portrait", "--a", "-1", "--p", "3", "--levels", "-2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn integrate_writes_trajectory() {
    let d = tempfile::tempdir().unwrap();
    let o = cylas(d.path(), &["integrate", "--a", "-1", "--b", "1", "--p", "3", "--psi0", "1.2", "--t-max", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let head = std::fs::read_to_string(d.path().join("integrate/trajectory.csv")).unwrap();
    assert!(head.starts_with("t,psi,dpsi,H\n"));
    assert!(d.path().join("integrate/events.csv").exists());
    let o = cylas(d.path(), &["integrate", "--a", "-1", "--p", "3", "--tol", "1e-14"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn pde_small_grid() {
    let d = tempfile::tempdir().unwrap();
    let o = cylas(
        d.path(),
        &["pde", "--a", "-1", "--b", "2", "--p", "3", "--n", "3", "--n-theta", "24", "--n-t", "100", "--t-max", "8"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let dir = d.path().join("pde");
    for f in ["field.csv", "defect.csv", "averaged.csv", "newton.csv", "defect.svg", "report.txt"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let report = std::fs::read_to_string(dir.join("report.txt")).unwrap();
    assert!(report.contains("converged: true") && report.contains("symmetry rate"));
}

#[test]
fn singularity_verdict() {
    let d = tempfile::tempdir().unwrap();
    let o = cylas(d.path(), &["singularity", "--a", "-1", "--b", "0", "--p", "1.5", "--n", "5", "--samples", "1000"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let dir = d.path().join("singularity");
    assert_eq!(kv(&dir.join("verdict.csv"), "class"), "H1-unbounded");
    assert_eq!(kv(&dir.join("condition.csv"), "pass"), "true");
    assert!(std::fs::read_to_string(dir.join("manifest.txt")).unwrap().contains("seed = 1\n"));
}

#[test]
fn out_flag_beats_environment() {
    let (env, flag) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let o = cylas(env.path(), &["classify", "--a", "-0.2", "--p", "3", "--n", "3", "--out", flag.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(flag.path().join("classify/report.txt").exists());
    assert!(!env.path().join("classify").exists());
}

#[test]
fn verify_subset_and_forced_failure() {
    let d = tempfile::tempdir().unwrap();
    let o = cylas(d.path(), &["verify", "--only", "params"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert_eq!(s.lines().filter(|l| l.starts_with("criterion")).count(), 1, "{s}");
    let o = cylas(d.path(), &["verify", "--only", "4", "--tol", "1e-14"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}
