//! End-to-end runs of the `qosc` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn qosc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qosc")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Reports without their timing field.
fn reports(o: &Output) -> Vec<Value> {
    let mut v: Vec<Value> = serde_json::from_slice(&o.stdout).expect("json report");
    for r in &mut v {
        r.as_object_mut().unwrap().remove("wall_time_ms");
    }
    v
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn fock_suite_passes_at_default_nome() {
    let o = qosc(&["verify", "--filter", "fock.*", "--q", "0.4", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = reports(&o);
    assert!(v.len() > 100);
    for r in &v {
        assert!(r["identity_id"].as_str().unwrap().starts_with("fock."));
        let verdict = r["verdict"].as_str().unwrap();
        assert!(matches!(verdict, "PASS" | "EXPECTED_FAIL"), "{r}");
    }
    for key in ["identity_id", "params", "residual", "tolerance", "verdict"] {
        assert!(v[0].get(key).is_some(), "missing {key}");
    }
}

#[test]
fn generic_gamma_star_triangle_is_an_expected_failure() {
    let o = qosc(&["verify", "--filter", "vgamma.star_triangle.*", "--gamma", "generic:0.8+0.3i", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = reports(&o);
    assert!(!v.is_empty());
    assert!(v.iter().all(|r| r["verdict"] == "EXPECTED_FAIL"), "{v:?}");
}

#[test]
fn selected_gamma_star_triangle_passes() {
    let o = qosc(&["verify", "--filter", "vgamma.star_triangle.*", "--gamma", "selected:1/2", "--format", "json"]);
    assert_eq!(code(&o), 0);
    assert!(reports(&o).iter().all(|r| r["verdict"] == "PASS"));
}

#[test]
fn empty_match_is_a_usage_error() {
    let o = qosc(&["verify", "--filter", "nothing.here.*"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("matches no identity"));
}

#[test]
fn bad_arguments_exit_with_two() {
    assert_eq!(code(&qosc(&["verify", "--q", "1.5"])), 2);
    assert_eq!(code(&qosc(&["verify", "--gamma", "selected:3"])), 2);
    assert_eq!(code(&qosc(&["verify", "--bogus"])), 2);
    assert_eq!(code(&qosc(&["verify", "--config", "/nonexistent/qosc.toml"])), 2);
    assert_eq!(code(&qosc(&["table", "fock.W"])), 2);
    assert_eq!(code(&qosc(&["spectrum", "--reg", "IV"])), 2);
    assert_eq!(code(&qosc(&["spectrum", "--q", "1.2"])), 2);
}

#[test]
fn failing_identity_exits_with_one() {
    // a tolerance below double precision cannot be met
    let o = qosc(&["verify", "--filter", "qseries.theta.*", "--tol", "1e-20", "--format", "json"]);
    assert_eq!(code(&o), 1);
    assert!(reports(&o).iter().any(|r| r["verdict"] == "FAIL"));
}

#[test]
fn reports_are_deterministic_and_sorted() {
    let args = ["verify", "--filter", "fock.symmetry.*", "--filter", "qseries.*", "--seed", "7", "--format", "json"];
    let a = qosc(&[&args[..], &["--jobs", "1"]].concat());
    let b = qosc(&[&args[..], &["--jobs", "4"]].concat());
    let (ra, rb) = (reports(&a), reports(&b));
    assert_eq!(ra, rb);
    let ids: Vec<&str> = ra.iter().map(|r| r["identity_id"].as_str().unwrap()).collect();
    assert!(ids.windows(2).all(|w| w[0] <= w[1]));
    let other = reports(&qosc(&["verify", "--filter", "fock.symmetry.*", "--seed", "8", "--format", "json"]));
    let same_seed: Vec<&Value> = ra.iter().filter(|r| r["identity_id"] == "fock.symmetry.4_44").collect();
    assert_ne!(same_seed.iter().map(|r| &r["params"]).collect::<Vec<_>>(), other.iter().map(|r| &r["params"]).collect::<Vec<_>>());
}

#[test]
fn flags_override_the_config_file() {
    let path = scratch("override.toml");
    std::fs::write(&path, "[params]\nq = \"0.35\"\n\n[run]\nfilter = \"qseries.mf.*\"\nformat = \"json\"\n").unwrap();
    let p = path.to_str().unwrap();
    let o = qosc(&["verify", "--config", p]);
    assert_eq!(code(&o), 0);
    let v = reports(&o);
    assert_eq!(v[0]["params"]["q"], "0.35");
    let o = qosc(&["verify", "--config", p, "--q", "0.25", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.starts_with("identity_id,params,residual,tolerance,verdict,wall_time_ms"));
    assert!(text.contains("q=0.25"));
    std::fs::write(&path, "[params]\nnome = 0.3\n").unwrap();
    assert_eq!(code(&qosc(&["verify", "--config", p])), 2);
}

#[test]
fn fock_table_has_36_rows() {
    let o = qosc(&["table", "fock.V", "--x", "0.7", "--spins", "0:5"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "m,mp,re,im");
    assert_eq!(lines.len(), 37);
}

#[test]
fn bold_weight_at_x_equal_q_is_one() {
    let o = qosc(&["table", "vgamma.Vbold", "--x", "q", "--spins", "-3:3", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let rows: Vec<Value> = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rows.len(), 49);
    for r in rows {
        assert!((r["re"].as_f64().unwrap() - 1.0).abs() < 1e-12 && r["im"].as_f64().unwrap().abs() < 1e-12, "{r}");
    }
}

#[test]
fn modular_table_is_symmetric() {
    let o = qosc(&["table", "modular.V", "--grid", "-1:1:4", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let rows: Vec<Value> = serde_json::from_slice(&o.stdout).unwrap();
    let n = 4;
    let at = |i: usize, j: usize| (rows[i * n + j]["re"].as_f64().unwrap(), rows[i * n + j]["im"].as_f64().unwrap());
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (at(i, j), at(j, i));
            assert!((a.0 - b.0).hypot(a.1 - b.1) <= 1e-9 * a.0.hypot(a.1), "{a:?} {b:?}");
        }
    }
}

#[test]
fn spectrum_deviations_shrink() {
    let o = qosc(&["spectrum", "--N-list", "8,16,32", "--reg", "I", "--q", "0.4"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let dev = |n: &str, k: &str| -> f64 {
        text.lines()
            .find_map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                (f[0] == n && f[1] == k).then(|| f[4].parse().unwrap())
            })
            .unwrap()
    };
    for k in ["1", "2", "3"] {
        assert!(dev("32", k) < dev("16", k) && dev("16", k) < dev("8", k));
    }
    assert!(dev("32", "3") < 1e-6);
}

#[test]
fn list_prints_every_id_once() {
    let o = qosc(&["list"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let ids: Vec<&str> = text.lines().collect();
    assert!(ids.len() >= 60);
    for id in ["fock.star_triangle.4_49", "vgamma.star_triangle.5_27", "modular.summation.6_27", "qseries.theta.A_4"] {
        assert_eq!(ids.iter().filter(|&&i| i == id).count(), 1, "{id}");
    }
}
