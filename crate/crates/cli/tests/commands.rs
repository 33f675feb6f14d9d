use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn casmi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_casmi"))
        .args(args)
        .env("RUST_LOG", "off")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn simulated(dir: &Path, n: usize) -> PathBuf {
    let p = dir.join("sim.csv");
    let o = casmi(&[
        "simulate-data",
        "--n",
        &n.to_string(),
        "--seed",
        "17",
        "--out",
        p.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    p
}

#[test]
fn select_on_simulated_data_skips_irrelevant_features() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulated(dir.path(), 2000);
    let o = casmi(&[
        "select",
        "--input",
        input.to_str().unwrap(),
        "--outcome",
        "Y",
        "--all-categorical",
        "--format",
        "json",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let selected: Vec<&str> = v["selected"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s.as_str().unwrap())
        .collect();
    assert!(!selected.is_empty());
    for bad in ["X7", "X8", "X9", "X10"] {
        assert!(!selected.contains(&bad), "{selected:?}");
    }
    for key in [
        "screened_out",
        "retained",
        "score_trace",
        "stop_reason",
        "final_score",
        "config",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }

    let text = stdout(&casmi(&[
        "select",
        "--input",
        input.to_str().unwrap(),
        "--outcome",
        "Y",
        "--all-categorical",
    ]));
    assert!(text.contains("selected: "));
    assert!(text.contains("stop reason: score_drop"));
}

#[test]
fn select_with_k_one_returns_one_feature() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulated(dir.path(), 500);
    let o = casmi(&[
        "select",
        "--input",
        input.to_str().unwrap(),
        "--outcome",
        "Y",
        "--all-categorical",
        "--k",
        "1",
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["selected"].as_array().unwrap().len(), 1);
    assert_eq!(v["stop_reason"], "reached_desired_k");
}

#[test]
fn extend_with_baseline_fills_to_k() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulated(dir.path(), 300);
    let o = casmi(&[
        "select",
        "--input",
        input.to_str().unwrap(),
        "--outcome",
        "Y",
        "--all-categorical",
        "--k",
        "8",
        "--extend-with",
        "jmi",
        "--format",
        "json",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let casmi_part = v["casmi_selected"].as_array().unwrap().len();
    assert_eq!(v["selected"].as_array().unwrap().len(), 8);
    assert_eq!(v["extended"].as_array().unwrap().len(), 8 - casmi_part);
    assert_eq!(v["config"]["extend_with"], "JMI");
}

#[test]
fn constant_outcome_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "c.csv", "a,y\nx,1\nz,1\nx,1\n");
    let o = casmi(&[
        "select",
        "--input",
        input.to_str().unwrap(),
        "--outcome",
        "y",
        "--all-categorical",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("constant"));
}

#[test]
fn missing_outcome_and_bad_flags() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "c.csv", "a,y\nx,1\nz,2\n");
    let o = casmi(&[
        "select",
        "--input",
        input.to_str().unwrap(),
        "--outcome",
        "nope",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let o = casmi(&[
        "select",
        "--input",
        input.to_str().unwrap(),
        "--outcome",
        "y",
        "--alpha",
        "1.5",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = casmi(&["select", "--input", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn coverage_report_flags() {
    let dir = tempfile::tempdir().unwrap();
    let body = "id,letters,const,y\n\
                1,a,k,p\n2,a,k,q\n3,a,k,p\n4,b,k,q\n5,b,k,p\n6,c,k,q\n7,d,k,p\n8,e,k,q\n9,f,k,p\n10,c,k,q\n";
    let input = write(dir.path(), "cov.csv", body);
    let o = casmi(&[
        "coverage",
        "--input",
        input.to_str().unwrap(),
        "--outcome",
        "y",
        "--as-categorical",
        "id",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let line = |name: &str| {
        text.lines()
            .find(|l| l.starts_with(name))
            .unwrap()
            .to_string()
    };
    assert!(line("id").contains("0.000") && line("id").contains("id_like"));
    assert!(line("letters").contains("0.700"));
    assert!(line("const").contains("1.000"));
    assert!(!text.lines().any(|l| l.starts_with("y ")));
}

#[test]
fn entropy_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "e.csv", "a,b\nx,1\nx,2\ny,3\n");
    let o = casmi(&[
        "entropy",
        "--input",
        input.to_str().unwrap(),
        "--all-categorical",
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    // Counts {2, 1}: bias-corrected entropy 5/6.
    assert!((v[0]["zhang"].as_f64().unwrap() - 5.0 / 6.0).abs() < 1e-12);
    assert!((v[0]["missing_mass"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn simulate_entropy_is_deterministic_and_ordered() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = casmi(&[
            "simulate-entropy",
            "--sizes",
            "100,300",
            "--reps",
            "20",
            "--seed",
            "5",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    let ta = std::fs::read_to_string(&a).unwrap();
    assert_eq!(ta, std::fs::read_to_string(&b).unwrap());
    for line in ta.lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(f[2] < f[3] && f[3] < f[4], "{line}");
    }
    let o = casmi(&["simulate-entropy", "--sizes", ""]);
    assert_eq!(o.status.code(), Some(2));
    let o = casmi(&["simulate-entropy", "--sizes", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_irr_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("irr");
    let o = casmi(&[
        "simulate-irr",
        "--sizes",
        "150,300",
        "--reps",
        "4",
        "--methods",
        "mim,DISR",
        "--workers",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let agg = std::fs::read_to_string(out.join("irr_aggregate.csv")).unwrap();
    // Header plus one row per (n, method); CASMI is always included.
    assert_eq!(agg.lines().count(), 1 + 2 * 3);
    assert!(agg.contains(",CASMI,"));
    let runs = std::fs::read_to_string(out.join("irr_runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 1 + 2 * 4 * 3);

    let all = casmi(&["simulate-irr", "--sizes", "150", "--reps", "3"]);
    assert!(all.status.success());
    assert_eq!(stdout(&all).lines().count(), 1 + 7);

    let o = casmi(&["simulate-irr", "--methods", "FOO"]);
    assert_eq!(o.status.code(), Some(2));
}
