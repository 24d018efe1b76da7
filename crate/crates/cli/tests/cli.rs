use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_pwlorenz"));
    c.env_remove("PWLORENZ_OUT");
    c
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .arg("--out")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("summary is JSON")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn cascade_table_holds_known_values() {
    let d = tempfile::tempdir().unwrap();
    let v = ok_json(&run_in(
        d.path(),
        &["bif", "cascade", "--nu", "1.25", "--levels", "4"],
    ));
    let g: Vec<f64> = v["result"]["gammas"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    for want in [0.8, 1.0, 1.277, 1.3247] {
        assert!(g.iter().any(|x| (x - want).abs() < 1e-3), "{want} in {g:?}");
    }
    let csv = fs::read_to_string(d.path().join("cascade.csv")).unwrap();
    assert!(csv.starts_with("kind,level,gamma,b,residual"));
    assert!(csv.contains("\nF2,1,1.2771"));
}

#[test]
fn b_values_match_closed_forms() {
    let d = tempfile::tempdir().unwrap();
    let out = run_in(
        d.path(),
        &[
            "bif", "b-values", "--lambda", "0.294", "--omega", "2", "--nu", "0.65",
        ],
    );
    ok_json(&out);
    let v = read_json(&d.path().join("b_values.json"));
    let f = |k: &str| v[k].as_f64().unwrap();
    assert!((f("b_h1") - 2.0).abs() < 1e-3);
    assert!((f("b_cr") - 3.95548).abs() < 1e-4);
    assert!((f("b_het") - 2.556).abs() < 2e-3);
    // b_AH = H1 / nu with the exact H1 = 1.99915.
    assert!((f("b_ah") - 1.999148180563819 / 0.65).abs() < 1e-12);
}

#[test]
fn verify_map_preset_passes() {
    let d = tempfile::tempdir().unwrap();
    let v = ok_json(&run_in(
        d.path(),
        &["flow", "verify-map", "--preset", "fig2f", "--grid", "20"],
    ));
    assert!(v["result"]["max_residual"].as_f64().unwrap() < 1e-6);
    let rows = fs::read_to_string(d.path().join("verify_map.csv"))
        .unwrap()
        .lines()
        .count();
    assert_eq!(rows, 401);
}

#[test]
fn failed_check_exits_nonzero() {
    let d = tempfile::tempdir().unwrap();
    let out = run_in(
        d.path(),
        &[
            "flow",
            "verify-map",
            "--preset",
            "fig2f",
            "--grid",
            "4",
            "--tol",
            "0",
        ],
    );
    assert!(!out.status.success());
    let e: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(e["error"]["kind"], "check_failed");
}

#[test]
fn module_errors_are_json() {
    let d = tempfile::tempdir().unwrap();
    let out = run_in(
        d.path(),
        &["factor", "iterate", "--nu", "1.25", "--gamma", "2.5"],
    );
    assert!(!out.status.success());
    let e: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(e["error"]["kind"], "domain");
    assert!(e["error"]["message"].as_str().unwrap().contains("gamma"));

    let out = run_in(d.path(), &["bif", "b-values", "--preset", "nope"]);
    let e: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(e["error"]["kind"], "cli");
}

#[test]
fn flags_beat_config_beat_preset() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.cfg");
    fs::write(&cfg, "# overrides\nnu = 0.7\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let out_dir = d.path().join("a");
    ok_json(&run_in(&out_dir, &["bif", "b-values", "--preset", "fig2"]));
    assert_eq!(read_json(&out_dir.join("b_values.json"))["nu"], 0.65);

    let out_dir = d.path().join("b");
    ok_json(&run_in(
        &out_dir,
        &["bif", "b-values", "--preset", "fig2", "--config", cfg],
    ));
    assert_eq!(read_json(&out_dir.join("b_values.json"))["nu"], 0.7);

    let out_dir = d.path().join("c");
    ok_json(&run_in(
        &out_dir,
        &[
            "bif", "b-values", "--preset", "fig2", "--config", cfg, "--nu", "0.8",
        ],
    ));
    assert_eq!(read_json(&out_dir.join("b_values.json"))["nu"], 0.8);
    let m = read_json(&out_dir.join("manifest.json"));
    assert_eq!(m["config"]["parameters"]["nu"], 0.8);
    assert_eq!(m["config"]["preset"], "fig2");
}

#[test]
fn json_config_file() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.json");
    fs::write(&cfg, r#"{"nu": 1.25, "gamma": [0.8, 1.3], "n": 3}"#).unwrap();
    ok_json(&run_in(
        d.path(),
        &["factor", "iterate", "--config", cfg.to_str().unwrap()],
    ));
    let csv = fs::read_to_string(d.path().join("iterates.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 3);
}

#[test]
fn output_directory_from_environment() {
    let d = tempfile::tempdir().unwrap();
    let env_dir = d.path().join("env");
    let out = bin()
        .env("PWLORENZ_OUT", &env_dir)
        .args(["bif", "b-values", "--nu", "0.65"])
        .output()
        .unwrap();
    ok_json(&out);
    assert!(env_dir.join("b_values.json").exists());

    let flag_dir = d.path().join("flag");
    let out = bin()
        .env("PWLORENZ_OUT", &env_dir)
        .arg("--out")
        .arg(&flag_dir)
        .args(["bif", "b-values", "--nu", "0.7"])
        .output()
        .unwrap();
    ok_json(&out);
    assert!(flag_dir.join("b_values.json").exists());
    assert_eq!(read_json(&env_dir.join("b_values.json"))["nu"], 0.65);
}

fn strip_volatile(mut m: Value) -> Value {
    let o = m.as_object_mut().unwrap();
    o.remove("timestamp");
    o.remove("threads");
    o["config"].as_object_mut().unwrap().remove("out");
    o["config"]["parameters"]
        .as_object_mut()
        .unwrap()
        .remove("threads");
    m
}

#[test]
fn sweep_output_is_thread_independent() {
    let d = tempfile::tempdir().unwrap();
    let args = |t: &'static str| {
        vec![
            "--threads",
            t,
            "sweep",
            "2d",
            "--nu-count",
            "12",
            "--b-count",
            "15",
        ]
    };
    let (a, b) = (d.path().join("t1"), d.path().join("t4"));
    ok_json(&run_in(&a, &args("1")));
    ok_json(&run_in(&b, &args("4")));
    assert_eq!(
        fs::read(a.join("sweep2d.csv")).unwrap(),
        fs::read(b.join("sweep2d.csv")).unwrap()
    );
    assert_eq!(
        fs::read(a.join("sweep2d.json")).unwrap(),
        fs::read(b.join("sweep2d.json")).unwrap()
    );
    assert_eq!(
        strip_volatile(read_json(&a.join("manifest.json"))),
        strip_volatile(read_json(&b.join("manifest.json")))
    );
}

#[test]
fn labelled_route_files() {
    let d = tempfile::tempdir().unwrap();
    let v = ok_json(&run_in(
        d.path(),
        &[
            "sweep",
            "route",
            "--system",
            "factor",
            "--nu",
            "1.25",
            "--values",
            "1.4,1.8,3.8",
            "--labels",
            "a,b,g",
        ],
    ));
    for l in ["a", "b", "g"] {
        assert!(d.path().join(format!("route_{l}.csv")).exists());
    }
    let pts = v["result"]["points"].as_array().unwrap();
    assert_eq!(pts[0]["red"], "fixed_point");
    assert_eq!(pts[1]["red"], "cycle_pair_1");
    assert_eq!(pts[2]["red"], "chaotic");
}

#[test]
fn portrait_from_flags() {
    let d = tempfile::tempdir().unwrap();
    ok_json(&run_in(
        d.path(),
        &[
            "portrait", "export", "--system", "pwl", "--nu", "0.65", "--b", "3.4", "--label", "f",
            "--t", "5",
        ],
    ));
    let meta = read_json(&d.path().join("portrait_f.json"));
    assert_eq!(meta["tracks"].as_array().unwrap().len(), 2);
    let csv = fs::read_to_string(d.path().join("portrait_f_0.csv")).unwrap();
    assert!(csv.starts_with("t,x,y,z,region\n"));
}

#[test]
fn smooth_equilibria_and_curves() {
    let d = tempfile::tempdir().unwrap();
    ok_json(&run_in(
        d.path(),
        &["smooth", "equilibria", "--system", "lorenz", "--r", "28"],
    ));
    let eq = read_json(&d.path().join("equilibria.json"));
    assert_eq!(eq.as_array().unwrap().len(), 3);
    assert_eq!(eq[2]["classification"], "saddle_focus");

    let v = ok_json(&run_in(d.path(), &["smooth", "curves", "--count", "5"]));
    assert!((v["result"]["ah_at_zero"].as_f64().unwrap() - 24.7368).abs() < 1e-4);
}

#[test]
fn pwl_shoot_bisects_to_primary_homoclinic() {
    let d = tempfile::tempdir().unwrap();
    let v = ok_json(&run_in(
        d.path(),
        &[
            "flow", "shoot", "--nu", "0.65", "--lo", "1.8", "--hi", "2.2",
        ],
    ));
    let b = v["result"]["b_homoclinic"].as_f64().unwrap();
    assert!((b - 1.999148180563819).abs() < 1e-6, "{b}");
}

#[test]
fn every_preset_is_accepted() {
    let d = tempfile::tempdir().unwrap();
    for p in [
        "fig2",
        "fig2f",
        "fig3",
        "fig4",
        "fig5a",
        "fig5b-route",
        "fig6a",
        "fig6b",
        "fig7",
        "fig8",
    ] {
        // b-values only needs nu; presets without nu must fail on that alone.
        let out = run_in(d.path(), &["bif", "b-values", "--preset", p]);
        if !out.status.success() {
            let e: Value = serde_json::from_slice(&out.stderr).unwrap();
            assert!(
                e["error"]["message"]
                    .as_str()
                    .unwrap()
                    .contains("missing parameter nu"),
                "{p}: {e}"
            );
        }
    }
}
