use std::fs;
use std::path::Path;
use std::process::Command;

const QUICK_CLT: &str = r#"
seed = 17
[clt-check]
samples = 100000
eps0 = [0.2, 0.1]
t-over-eps0-sq = [1.0]
t-absolute = []
"#;

fn levysim(args: &[&str], config: &str, dir: &Path) -> (i32, String) {
    let cfg = dir.join("config.toml");
    fs::write(&cfg, config).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_levysim"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .arg("--threads")
        .arg("2")
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr);
    (out.status.code().unwrap(), text)
}

#[test]
fn passing_run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = levysim(&["clt-check"], QUICK_CLT, dir.path());
    assert_eq!(code, 0, "{text}");
    for f in ["report.csv", "slopes.txt", "plot.gp"] {
        assert!(dir.path().join("out").join(f).exists(), "{f}");
    }
    let csv = fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
    assert!(csv.starts_with("param,error,ci,cost,t,bound,ratio,fit\n"));
    assert!(text.contains("overall: PASS"));
}

#[test]
fn failed_check_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{QUICK_CLT}upper-cap = 1e-6\n");
    let (code, text) = levysim(&["clt-check"], &cfg, dir.path());
    assert_eq!(code, 2, "{text}");
    assert!(text.contains("FAIL upper bound"));
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = levysim(&["clt-check"], "[clt-check]\nsampels = 5\n", dir.path());
    assert_eq!(code, 1, "{text}");
    let (code, _) = levysim(&["clt-check"], "[clt-check]\nsamples = 10\n", dir.path());
    assert_eq!(code, 1);
    let (code, _) = levysim(&["clt-check"], "[clt-check]\nslope-eps0 = [0.1, 0.05]\n", dir.path());
    assert_eq!(code, 1, "a bounded slope on two points is refused");
}

#[test]
fn infinite_activity_path_driver_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[scheme-rate.driver]\nnu = { family = \"stable-like\", alpha = 1.5 }\n";
    let (code, text) = levysim(&["scheme-rate"], cfg, dir.path());
    assert_eq!(code, 1);
    assert!(text.contains("infinite activity"), "{text}");
}

#[test]
fn same_seed_same_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    levysim(&["clt-check"], QUICK_CLT, a.path());
    levysim(&["clt-check", "--seed", "17"], QUICK_CLT, b.path());
    let read = |d: &Path| fs::read(d.join("out/report.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    let c = tempfile::tempdir().unwrap();
    levysim(&["clt-check", "--seed", "18"], QUICK_CLT, c.path());
    assert_ne!(read(a.path()), read(c.path()));
}

#[test]
fn unknown_experiment_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_levysim")).arg("nope").output().unwrap();
    assert!(!out.status.success());
}
