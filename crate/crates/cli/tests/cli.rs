use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entdomain"))
        .args(args)
        .env_remove("ENTDOMAIN_Z1")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn poles_stable_and_unstable_verdicts() {
    let o = run(&["poles", "z1=1.8", "z2=1.8806", "rho=0.05", "gamma=0.05"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("re_omega,im_omega,residual\n"), "{out}");
    assert!(String::from_utf8_lossy(&o.stderr).contains("STABLE margin="));
    for line in out.lines().skip(1) {
        let im: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(im < 0.0);
    }

    let o = run(&["run", "task=poles", "z1=1.8", "z2=1.8", "rho=0.05"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("UNSTABLE"));
}

#[test]
fn covariance_refuses_unstable_config() {
    let o = run(&["covariance", "--z1", "1.8", "--z2", "1.8", "--rho", "0.05"]);
    assert_eq!(o.status.code(), Some(4));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("runaway pole"), "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn covariance_report_in_decoupled_limit() {
    let o = run(&["covariance", "--format", "json", "z1=60", "z2=60", "rho=60", "gamma=1e-4"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let sigma = v["sigma"].as_array().unwrap();
    for (i, row) in sigma.iter().enumerate() {
        let d = row[i].as_f64().unwrap();
        assert!((d - 0.5).abs() < 1e-3, "{d}");
    }
    let pt = v["spectrum"]["pt_lambda_minus_sq"].as_f64().unwrap();
    assert!((pt - 0.25).abs() < 1e-3);
    assert_eq!(v["atoms"].as_array().unwrap().len(), 2);
}

#[test]
fn invalid_config_exits_3() {
    assert_eq!(run(&["poles", "bogus=1"]).status.code(), Some(3));
    assert_eq!(run(&["poles", "z1=-1"]).status.code(), Some(3));
    assert_eq!(run(&["covariance", "cutoff=5"]).status.code(), Some(3));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[physical]\nz1 = 1.0\nspin = 2\n").unwrap();
    assert_eq!(run(&["poles", "--config", cfg.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn config_file_env_and_flags_layer() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[physical]\nz1 = 1.8\nz2 = 1.8\nrho = 0.05\n[task]\nkind = \"stability\"\n").unwrap();
    let o = run(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(stdout(&o).contains("\n0,"), "file config is unstable");
    let o = Command::new(env!("CARGO_BIN_EXE_entdomain"))
        .args(["run", "--config", cfg.to_str().unwrap()])
        .env("ENTDOMAIN_Z2", "1.8806")
        .output()
        .unwrap();
    assert!(stdout(&o).contains("\n1,"), "env override makes it stable");
    let o = Command::new(env!("CARGO_BIN_EXE_entdomain"))
        .args(["run", "--config", cfg.to_str().unwrap(), "--set", "physical.z2=1.8"])
        .env("ENTDOMAIN_Z2", "1.8806")
        .output()
        .unwrap();
    assert!(stdout(&o).contains("\n0,"), "--set beats env");
}

#[test]
fn map_smoke_writes_all_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("maps").join("b.csv");
    let o = run(&["map", "--out", out.to_str().unwrap(), "rho_count=2", "z2_count=2", "--workers", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&out);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "rho,z2,lambda_minus_sq,stable,correlation,purity2");
    assert_eq!(lines.len(), 5);
    for l in &lines[1..] {
        assert_eq!(l.split(',').count(), 6);
    }
    let metrics: serde_json::Value = serde_json::from_str(&read(&dir.path().join("maps/b.metrics.json"))).unwrap();
    for k in ["entangled_cell_count", "area", "effective_radius"] {
        assert!(metrics.get(k).is_some(), "{k}");
    }
    let contours: serde_json::Value = serde_json::from_str(&read(&dir.path().join("maps/b.contours.json"))).unwrap();
    assert!(contours.is_array());
    let manifest: serde_json::Value = serde_json::from_str(&read(&dir.path().join("maps/b.manifest.json"))).unwrap();
    assert_eq!(manifest["task"], "map");
    assert_eq!(manifest["exit_code"], 0);
    assert_eq!(manifest["config"]["numerics"]["cutoff"].as_f64(), Some(100.0));
    assert_eq!(manifest["config"]["physical"]["gamma"].as_f64(), Some(0.05));
    assert!(!dir.path().join("maps/b.failures.log").exists());
}

#[test]
fn map_marks_unstable_cells() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.csv");
    let o = run(&[
        "map", "--out", out.to_str().unwrap(), "z1=1.8", "rho_min=0.02", "rho_max=0.06", "rho_count=3",
        "z2_min=1.78", "z2_max=1.82", "z2_count=3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = read(&out);
    let unstable: Vec<&str> = csv.lines().filter(|l| l.split(',').nth(3) == Some("0")).collect();
    assert!(!unstable.is_empty());
    for l in unstable {
        let f: Vec<&str> = l.split(',').collect();
        assert_eq!((f[2], f[4], f[5]), ("", "", ""));
    }
}

#[test]
fn map_requires_file_output() {
    assert_eq!(run(&["map", "rho_count=2", "z2_count=2"]).status.code(), Some(3));
}

#[test]
fn map_output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for (p, w) in [(&a, "1"), (&b, "3")] {
        run(&["map", "--out", p.to_str().unwrap(), "rho_count=3", "z2_count=4", "--workers", w]);
    }
    assert_eq!(read(&a), read(&b));
    assert_eq!(read(&dir.path().join("a.contours.json")), read(&dir.path().join("b.contours.json")));
    assert_eq!(read(&dir.path().join("a.metrics.json")), read(&dir.path().join("b.metrics.json")));
}

#[test]
fn line_single_sample_matches_covariance() {
    let o = run(&["line", "z1=1", "rho=0.2", "axis=z2", "from=0.9", "to=0.9", "count=1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("param,chi2_sq,correlation,lambda_minus_sq,purity2,entropy2"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();

    let o = run(&["covariance", "z1=1", "z2=0.9", "rho=0.2"]);
    let report = stdout(&o);
    let get = |k: &str| report.lines().find_map(|l| l.strip_prefix(&format!("{k},"))).unwrap().to_string();
    assert_eq!(row[1], get("sigma_22"));
    assert_eq!(row[2], get("sigma_02"));
    assert_eq!(row[3], get("lambda_minus_sq_pt"));
    assert_eq!(row[4], get("purity2"));
    assert_eq!(row[5], get("entropy2"));
}

#[test]
fn line_chi2_peaks_near_atom_1() {
    let o = run(&["line", "z1=1", "rho=0.1", "axis=z2", "from=0.2", "to=1.8", "count=17"]);
    let out = stdout(&o);
    let rows: Vec<(f64, f64)> = out
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<f64> = l.split(',').take(2).map(|x| x.parse().unwrap()).collect();
            (f[0], f[1])
        })
        .collect();
    let peak = rows.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    assert!((peak.0 - 1.0).abs() < 0.11, "{peak:?}");
}

#[test]
fn purity_table_and_numbers_round_trip() {
    let o = run(&["purity", "z1=1", "z2=1", "rho=0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("atom,nu,purity,entropy"));
    for (k, l) in lines.enumerate() {
        let f: Vec<&str> = l.split(',').collect();
        assert_eq!(f[0], (k + 1).to_string());
        let nu: f64 = f[1].parse().unwrap();
        // 17 significant digits reproduce the value exactly
        assert_eq!(format!("{nu:.16e}"), f[1]);
        let mu: f64 = f[2].parse().unwrap();
        assert!((mu - 0.5 / nu).abs() < 1e-15);
    }
}

#[test]
fn numerical_failures_have_their_own_exit_codes() {
    // a tolerance below double precision cannot be met
    assert_eq!(run(&["covariance", "quad_rel_tol=1e-16"]).status.code(), Some(5));

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.csv");
    let o = run(&["map", "--out", out.to_str().unwrap(), "rho_count=2", "z2_count=2", "quad_rel_tol=1e-16"]);
    assert_eq!(o.status.code(), Some(2));
    let log = read(&dir.path().join("p.failures.log"));
    assert_eq!(log.lines().count(), 4);
    assert!(log.contains("quadrature"));
    let manifest: serde_json::Value = serde_json::from_str(&read(&dir.path().join("p.manifest.json"))).unwrap();
    assert_eq!(manifest["status"], "partial");
    assert_eq!(manifest["exit_code"], 2);
}
