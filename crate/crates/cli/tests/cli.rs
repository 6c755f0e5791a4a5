use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn dce(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dce"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) {
    let out = dce(args);
    assert!(
        out.status.success(),
        "dce {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn column_header(path: &Path) -> String {
    let text = fs::read_to_string(path).unwrap();
    text.lines()
        .find(|l| !l.starts_with('#'))
        .unwrap()
        .to_string()
}

fn rows(path: &Path) -> Vec<Vec<f64>> {
    let text = fs::read_to_string(path).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| {
            l.split(',')
                .map(|c| c.parse::<f64>().unwrap_or(f64::NAN))
                .collect()
        })
        .collect()
}

fn write_config(dir: &TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const BREATHING: &str = r#"
schema = 1
[scenario]
name = "breathing"
analysis = "twowall-modes"
[cavity2]
mode = "breathing"
L = 1.0
dL = 0.01
N = 2
[seed]
kind = "gaussian"
[numeric]
horizon = 6.0
samples = 121
"#;

#[test]
fn column_headers_are_stable() {
    let dir = TempDir::new().unwrap();
    let out = |s: &str| dir.path().join(s);
    let o = |s: &str| out(s).to_str().unwrap().to_string();
    run_ok(&["--out", &o("table"), "billiard-table", "--samples", "11"]);
    run_ok(&["--out", &o("trace"), "trace", "--n", "5"]);
    run_ok(&[
        "--out",
        &o("res"),
        "resonance",
        "--scan-domega",
        "--scan-step",
        "0.01",
    ]);
    run_ok(&["--out", &o("energy"), "energy", "--n-max", "4"]);
    run_ok(&[
        "--out",
        &o("quantum"),
        "quantum",
        "--n-max",
        "3",
        "--nt",
        "5",
        "--samples",
        "11",
    ]);
    run_ok(&[
        "--out",
        &o("map"),
        "density-map",
        "--nx",
        "5",
        "--nt",
        "5",
        "--t-max",
        "2",
    ]);

    let cases = [
        ("table/billiard_table.csv", "tau,f,f_inv,f_dot,t_star"),
        ("trace/trace.csv", "k,T_k,T_star_k,log_D_k"),
        ("res/resonance.csv", "tau0,T,sign,lambda,M"),
        (
            "res/scan.csv",
            "domega_over_omega,unstable,return_points,max_lambda,predicted_lambda,window_bound",
        ),
        ("energy/energy.csv", "n,t[L],E[1/L],error_bound[1/L]"),
        ("quantum/quantum_profile.csv", "tau,R,R_dot,S_R,rho_quantum"),
        ("quantum/quantum_energy.csv", "t,E_quantum"),
        (
            "quantum/quantum_terms.csv",
            "n,T_n,log_D_n,A_n,doppler_term,anomaly_term",
        ),
        ("map/density_map.csv", "t,x,T00"),
    ];
    for (file, header) in cases {
        assert_eq!(column_header(&out(file)), header, "{file}");
    }
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out("res/metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["analysis"], "resonance");
    assert_eq!(meta["partial"], false);
    assert_eq!(
        meta["outputs"],
        serde_json::json!(["resonance.csv", "scan.csv"])
    );
}

#[test]
fn csv_files_carry_metadata_lines() {
    let dir = TempDir::new().unwrap();
    let o = dir.path().join("t");
    run_ok(&["--out", o.to_str().unwrap(), "trace", "--n", "3"]);
    let text = fs::read_to_string(o.join("trace.csv")).unwrap();
    for key in [
        "schema",
        "scenario",
        "analysis",
        "static_past_t0",
        "moore_normalization",
    ] {
        assert!(
            text.lines().any(|l| l.starts_with(&format!("# {key} = "))),
            "missing {key}"
        );
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        run_ok(&[
            "--out",
            d.to_str().unwrap(),
            "resonance",
            "--scan-domega",
            "--scan-step",
            "0.005",
        ]);
    }
    for f in ["resonance.csv", "scan.csv", "metadata.json"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let both = write_config(
        &dir,
        "both.toml",
        "schema = 1\n[scenario]\nname = \"x\"\n[wall]\nL = 1.0\ndL = 0.01\ndL_over_L = 0.01\n[seed]\nkind = \"gaussian\"\n",
    );
    let unknown = write_config(
        &dir,
        "unknown.toml",
        "schema = 1\n[scenario]\nname = \"x\"\nbogus = 1\n[seed]\nkind = \"gaussian\"\n",
    );
    let missing = dir.path().join("missing.toml");

    assert_eq!(dce(&["--config", &both, "trace"]).status.code(), Some(2));
    let out = dce(&["--config", &unknown, "trace"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));
    assert_eq!(
        dce(&["--config", missing.to_str().unwrap(), "trace"])
            .status
            .code(),
        Some(4)
    );
    assert_eq!(dce(&["no-such-command"]).status.code(), Some(2));

    // A single-wall analysis on a two-wall cavity is a configuration error.
    let tw = write_config(&dir, "tw.toml", BREATHING);
    let o = dir.path().join("o");
    assert_eq!(
        dce(&[
            "--config",
            &tw,
            "--out",
            o.to_str().unwrap(),
            "billiard-table"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn static_cavity_has_casimir_energy() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "static.toml",
        "schema = 1\n[scenario]\nname = \"static\"\n[wall]\nkind = \"static\"\nL = 1.0\n[seed]\nkind = \"gaussian\"\n",
    );
    let o = dir.path().join("q");
    run_ok(&[
        "--config",
        &cfg,
        "--out",
        o.to_str().unwrap(),
        "quantum",
        "--n-max",
        "3",
        "--nt",
        "7",
        "--t-max",
        "6",
    ]);
    for row in rows(&o.join("quantum_energy.csv")) {
        assert!(
            (row[1] + std::f64::consts::PI / 24.0).abs() < 1e-9,
            "E(t = {}) = {}",
            row[0],
            row[1]
        );
    }
}

#[test]
fn scan_stops_at_window_edge() {
    let dir = TempDir::new().unwrap();
    let o = dir.path().join("s");
    run_ok(&[
        "--out",
        o.to_str().unwrap(),
        "resonance",
        "--scan-domega",
        "--scan-min",
        "-0.02",
        "--scan-max",
        "0.02",
        "--scan-step",
        "0.0025",
    ]);
    for row in rows(&o.join("scan.csv")) {
        let (ratio, unstable, bound) = (row[0], row[1], row[5]);
        if ratio.abs() < 0.95 * bound {
            assert_eq!(unstable, 1.0, "inside window at {ratio}");
        } else if ratio.abs() > 1.05 * bound {
            assert_eq!(unstable, 0.0, "outside window at {ratio}");
        }
    }
}

#[test]
fn twowall_run_writes_both_families() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "breathing.toml", BREATHING);
    let o = dir.path().join("tw");
    run_ok(&["run", &cfg, "--out", o.to_str().unwrap()]);
    assert_eq!(
        column_header(&o.join("twowall_exponents.csv")),
        "side,t1,tau0,sign,lambda_exact,lambda_product"
    );
    assert_eq!(
        column_header(&o.join("effective_trajectory.csv")),
        "t,L,L_dot"
    );
    let text = fs::read_to_string(o.join("twowall_exponents.csv")).unwrap();
    let left = text.lines().filter(|l| l.starts_with("L,")).count();
    let right = text.lines().filter(|l| l.starts_with("R,")).count();
    assert_eq!((left, right), (4, 4));
}

#[test]
fn committed_scenarios_run() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let dir = TempDir::new().unwrap();
    let mut seen = 0;
    for entry in fs::read_dir(&root).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("toml") {
            continue;
        }
        let out = dir.path().join(path.file_stem().unwrap());
        run_ok(&[
            "run",
            path.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(out.join("metadata.json").exists());
        seen += 1;
    }
    assert!(seen >= 3);
    let scan = dir.path().join("window_scan/scan.csv");
    assert!(rows(&scan).iter().any(|r| r[1] == 1.0) && rows(&scan).iter().any(|r| r[1] == 0.0));
}
