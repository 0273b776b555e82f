use std::path::Path;
use std::process::{Command, Output};

fn porotopo(args: &[&str], out_root: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_porotopo"))
        .args(args)
        .env("POROTOPO_OUTPUT", out_root)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| {
            l.strip_prefix(&format!("{key} = "))
                .or_else(|| l.strip_prefix(&format!("{key}: ")))
        })
        .unwrap_or_else(|| panic!("no {key} in\n{text}"))
        .trim()
        .parse()
        .unwrap()
}

#[test]
fn analytic_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let o = porotopo(
        &[
            "analytic",
            "annulus-optimum",
            "--gamma",
            "0.3",
            "--ri",
            "0.1",
            "--ro",
            "1",
        ],
        tmp.path(),
    );
    assert!(o.status.success());
    let s = stdout(&o);
    assert!((value(&s, "xi_hat") - 0.307f64.sqrt()).abs() < 1e-6);
    assert!(s.contains("verdict: high-k inner"));

    let o = porotopo(
        &["analytic", "sphere-optimum", "--gamma", "0", "--ri", "0.1"],
        tmp.path(),
    );
    assert!((value(&stdout(&o), "xi_hat") - 0.1).abs() < 1e-12);

    let profile = tmp.path().join("p.csv");
    let o = porotopo(
        &[
            "analytic",
            "solve-1d",
            "--model",
            "df",
            "--betaF",
            "1",
            "--k1",
            "1",
            "--k2",
            "1",
            "--xi",
            "0.5",
            "--profile",
            profile.to_str().unwrap(),
            "--points",
            "11",
        ],
        tmp.path(),
    );
    assert!(o.status.success());
    // Positive root of C + C^2 = 1.
    assert!((value(&stdout(&o), "C") - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-6);
    let csv = std::fs::read_to_string(profile).unwrap();
    assert_eq!(csv.lines().next(), Some("r,pressure,velocity"));
    assert_eq!(csv.lines().count(), 12);

    let o = porotopo(
        &[
            "analytic",
            "annulus-optimum",
            "--gamma",
            "1.5",
            "--ri",
            "0.1",
            "--ro",
            "1",
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gamma"));
}

#[test]
fn solve_reports_mass_balance() {
    let tmp = tempfile::tempdir().unwrap();
    for name in ["rect-pressure-q0", "pipe-bend-square"] {
        let o = porotopo(&["solve", "--builtin", name], tmp.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let s = stdout(&o);
        assert!(value(&s, "relative_imbalance") <= 1e-10);
        let dir = tmp.path().join(format!("solve-{name}"));
        for f in ["fields.csv", "fields.vtk", "summary.txt", "config.toml"] {
            assert!(dir.join(f).exists(), "{f}");
        }
        let csv = std::fs::read_to_string(dir.join("fields.csv")).unwrap();
        assert!(csv.starts_with("cell,x,y,pressure,speed,permeability\n"));
    }
    // Equal pressures and no source: zero flow.
    let cfg = tmp.path().join("still.toml");
    std::fs::write(
        &cfg,
        r#"
[problem]
geometry = { kind = "interval-1d", x0 = 0.0, x1 = 1.0, n = 20 }
[problem.boundary]
left = { kind = "prescribed-pressure", value = 3.0 }
right = { kind = "prescribed-pressure", value = 3.0 }
"#,
    )
    .unwrap();
    let o = porotopo(&["solve", "--config", cfg.to_str().unwrap()], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    // Round-off only.
    assert!(value(&stdout(&o), "phi").abs() <= 1e-20);
    assert!(value(&stdout(&o), "max_speed") <= 1e-12);
}

#[test]
fn optimize_writes_run_directory_and_comparison() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = porotopo(
        &[
            "optimize",
            "--builtin",
            "annulus-radial",
            "--out",
            out.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(value(&stdout(&o), "error_cells") <= 1.0);
    for f in [
        "config.toml",
        "history.csv",
        "design.csv",
        "fields.vtk",
        "comparison.csv",
        "summary.txt",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let history = std::fs::read_to_string(out.join("history.csv")).unwrap();
    assert!(history.starts_with("iteration,phi,volume_fraction,change\n"));
    let cmp = std::fs::read_to_string(out.join("comparison.csv")).unwrap();
    assert!(cmp.lines().nth(1).unwrap().ends_with(",true"));

    // The snapshot is a valid config that reproduces the run.
    let again = tmp.path().join("again");
    let o = porotopo(
        &[
            "optimize",
            "--config",
            out.join("config.toml").to_str().unwrap(),
            "--out",
            again.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert!(o.status.success());
    assert_eq!(
        std::fs::read(out.join("design.csv")).unwrap(),
        std::fs::read(again.join("design.csv")).unwrap()
    );
}

#[test]
fn optimize_full_fraction_is_uniform_high() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("full");
    let o = porotopo(
        &[
            "optimize",
            "--builtin",
            "channel-1d-pressure",
            "--resolution",
            "50",
            "--gamma",
            "1",
            "--out",
            out.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let design = std::fs::read_to_string(out.join("design.csv")).unwrap();
    let header: Vec<&str> = design.lines().next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "rho_physical").unwrap();
    for line in design.lines().skip(1) {
        let v: f64 = line.split(',').nth(col).unwrap().parse().unwrap();
        assert!(v > 0.999, "{line}");
    }
}

#[test]
fn verify_suites_and_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let o = porotopo(
            &[
                "verify",
                "--suite",
                "all",
                "--seed",
                "42",
                "--out",
                dir.to_str().unwrap(),
            ],
            tmp.path(),
        );
        assert!(o.status.success(), "{}", stdout(&o));
    }
    assert_eq!(
        std::fs::read(a.join("verify.csv")).unwrap(),
        std::fs::read(b.join("verify.csv")).unwrap()
    );
    let o = porotopo(
        &[
            "verify",
            "--suite",
            "lemma",
            "--out",
            tmp.path().join("l").to_str().unwrap(),
        ],
        tmp.path(),
    );
    let s = stdout(&o);
    assert!(o.status.success());
    assert!(s.contains("property lemma") && !s.contains("proposition") && !s.contains(" case "));
    let o = porotopo(
        &[
            "verify",
            "--suite",
            "mpt",
            "--out",
            tmp.path().join("m").to_str().unwrap(),
        ],
        tmp.path(),
    );
    let s = stdout(&o);
    assert!(s.contains("mpt darcy/") && s.contains("mpt darcy-forchheimer/"));
    let o = porotopo(&["verify", "--suite", "nope"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn mpt_check_and_config() {
    let tmp = tempfile::tempdir().unwrap();
    let o = porotopo(
        &["mpt-check", "--builtin", "channel-1d-pressure"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS (stationary)"));
    let csv =
        std::fs::read_to_string(tmp.path().join("mpt-check-channel-1d-pressure/mpt.csv")).unwrap();
    assert!(csv.starts_with("perturbation_id,a1,predicted_a1,a2\n"));

    let o = porotopo(&["config"], tmp.path());
    assert!(o.status.success());
    let reference = stdout(&o);
    assert!(reference.contains("builtin = \"annulus-radial\""));
    let o = porotopo(&["config", "--builtin", "sphere-radial"], tmp.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("sphere-radial"));
    let o = porotopo(&["config", "--builtin", "nope"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}
