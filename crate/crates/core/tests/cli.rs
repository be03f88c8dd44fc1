use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const NOISE: &str = r#"{"kind":"gadc","param":"noise","gamma":0.5,"N":0.2}"#;
const IDENTITY: &str = r#"{"kind":"kraus","dim_in":2,"dim_out":2,"kraus":[[[[1,0],[0,0]],[[0,0],[1,0]]]]}"#;
const RESET: &str =
    r#"{"kind":"kraus","dim_in":2,"dim_out":2,"kraus":[[[[1,0],[0,0]],[[0,0],[0,0]]],[[[0,0],[1,0]],[[0,0],[0,0]]]]}"#;

fn geofish(args: &[&str]) -> Output {
    geofish_env(args, &[])
}

fn geofish_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_geofish"));
    cmd.args(args);
    for var in ["QDB_TOL_RANK", "QDB_TOL_SDP", "QDB_TOL_CONSISTENCY"] {
        cmd.env_remove(var);
    }
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn rld_channel_noise_closed_form() {
    let v = json(&geofish(&["fisher", "--quantity", "rld-channel", "--channel", NOISE, "--theta", "0.2"]));
    assert_eq!(v["quantity"], "rld-channel");
    assert_eq!(v["method"], "closed");
    assert!((v["value"].as_f64().unwrap() - 6.25).abs() < 1e-10);
    assert!(v["runtime_ms"].is_number());
    assert!(v["finiteness_residual"].as_f64().unwrap() < 1e-9);
}

#[test]
fn two_methods_are_cross_checked() {
    let v = json(&geofish(&[
        "fisher", "--quantity", "rld-channel", "--channel", NOISE, "--method", "sdp,closed",
    ]));
    assert_eq!(v["consistent"], true);
    assert!(v["abs_difference"].as_f64().unwrap() <= 1e-6);
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 2);
    assert_eq!(results[0]["method"], "sdp");
    assert_eq!(results[1]["method"], "closed");
}

#[test]
fn sld_channel_seesaw_below_rld() {
    let v = json(&geofish(&["fisher", "--quantity", "sld-channel", "--channel", NOISE, "--iters", "100"]));
    let sld = v["value"].as_f64().unwrap();
    assert!(sld > 0.0 && sld <= 6.25 + 1e-9);
}

#[test]
fn heisenberg_verdict_for_gadc() {
    let v = json(&geofish(&["fisher", "--quantity", "heisenberg", "--channel", NOISE]));
    assert_eq!(v["blocked"], true);
}

#[test]
fn wrong_method_is_an_input_error() {
    let out = geofish(&["fisher", "--quantity", "rld-channel", "--channel", NOISE, "--method", "seesaw"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("not available"));
}

#[test]
fn malformed_descriptor_names_the_field() {
    let bad = r#"{"kind":"gadc","param":"noise","gama":0.5,"N":0.2}"#;
    let out = geofish(&["fisher", "--quantity", "rld-channel", "--channel", bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("gama"), "{}", stderr(&out));

    let out = geofish(&["fisher", "--quantity", "rld-channel", "--channel", r#"{"kind":"gadc""#]);
    assert_eq!(out.status.code(), Some(2));

    let short = r#"{"kind":"kraus","dim_in":2,"dim_out":2,"kraus":[[[[1,0]]]]}"#;
    let out = geofish(&["fisher", "--quantity", "rld-channel", "--channel", short]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("kraus[0]"), "{}", stderr(&out));
}

#[test]
fn descriptor_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("noise.json");
    std::fs::write(&path, NOISE).unwrap();
    let arg = format!("@{}", path.display());
    let v = json(&geofish(&["fisher", "--quantity", "rld-channel", "--channel", &arg]));
    assert!((v["value"].as_f64().unwrap() - 6.25).abs() < 1e-10);
}

#[test]
fn divergence_of_identical_channels_is_zero() {
    let v = json(&geofish(&[
        "divergence", "--quantity", "geometric-renyi", "--alpha", "2", "--channel", NOISE, "--channel2", NOISE,
    ]));
    assert!(v["value"].as_f64().unwrap().abs() < 1e-10);
}

#[test]
fn alpha_one_routes_to_bs() {
    let other = r#"{"kind":"gadc","param":"noise","gamma":0.5,"N":0.3}"#;
    let v = json(&geofish(&[
        "divergence", "--quantity", "geometric-renyi", "--alpha", "1", "--channel", NOISE, "--channel2", other,
    ]));
    assert_eq!(v["quantity"], "bs");
    assert!(v["note"].as_str().unwrap().contains("Belavkin"));
    let bs = json(&geofish(&["divergence", "--quantity", "bs", "--channel", NOISE, "--channel2", other]));
    assert_eq!(v["value"], bs["value"]);
}

#[test]
fn alpha_outside_interval_is_rejected() {
    let out = geofish(&[
        "divergence", "--quantity", "geometric-renyi", "--alpha", "2.5", "--channel", NOISE, "--channel2", NOISE,
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("alpha outside data-processing interval"));

    let out = geofish(&["divergence", "--quantity", "geometric-renyi", "--channel", NOISE, "--channel2", NOISE]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--alpha"));
}

#[test]
fn unsupported_channel_divergence_is_inf() {
    let v = json(&geofish(&[
        "divergence", "--quantity", "geometric-renyi", "--alpha", "1.5", "--channel", IDENTITY, "--channel2", RESET,
    ]));
    assert_eq!(v["value"], "inf");
    assert_eq!(v["support_case"], "infinite");
}

#[test]
fn fidelities_between_channels() {
    let other = r#"{"kind":"gadc","param":"noise","gamma":0.5,"N":0.3}"#;
    let f = json(&geofish(&["divergence", "--quantity", "fidelity", "--channel", NOISE, "--channel2", other]));
    let g = json(&geofish(&[
        "divergence", "--quantity", "geometric-fidelity", "--channel", NOISE, "--channel2", other,
    ]));
    let (f, g) = (f["value"].as_f64().unwrap(), g["value"].as_f64().unwrap());
    assert!(g <= f + 1e-7 && f <= 1.0 + 1e-9 && g > 0.0, "F = {f}, geometric F = {g}");
}

#[test]
fn discriminate_reports_sandwich() {
    let a = r#"{"kind":"gadc","param":"loss","gamma":0.8,"N":0.2}"#;
    let b = r#"{"kind":"gadc","param":"loss","gamma":0.7,"N":0.2}"#;
    let v = json(&geofish(&["discriminate", "--channel", a, "--channel2", b, "--n", "10", "--r", "0.01"]));
    let lower = v["chernoff_lower"].as_f64().unwrap();
    let upper = v["geometric_chernoff_upper"].as_f64().unwrap();
    assert!(lower <= upper + 1e-9);
    assert!(upper <= v["geometric_renyi_half"].as_f64().unwrap() + 1e-9);
    assert!(v["exponent_upper"].as_f64().unwrap() > upper);
    assert!(v["hoeffding"]["value"].as_f64().unwrap() >= 0.0);
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn estimate_noise_figure_has_nineteen_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("noise.csv");
    let o = geofish(&[
        "figures", "--name", "estimate-noise", "--gamma", "0.5", "--grid", "0.05:0.95:0.05", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&out);
    assert_eq!(rows[0], ["x", "rld_bound_log", "sld_bound_log"]);
    assert_eq!(rows.len(), 20);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn estimate_loss_at_half_flags_coincidence() {
    let o = geofish(&["figures", "--name", "estimate-loss", "--N", "0.5", "--grid", "0.1:0.9:0.1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,rld_bound_log,sld_bound_log,coincide"));
    let flags: Vec<&str> = lines.map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(flags.len(), 9);
    assert!(flags.iter().all(|f| *f == "1"));
}

#[test]
fn ch_disc_gap_is_nonnegative() {
    let o = geofish(&["figures", "--name", "ch-disc", "--grid", "0.2:0.8:0.3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<Vec<f64>> =
        text.lines().skip(1).map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r[4] >= -1e-9));
}

#[test]
fn failed_figure_leaves_no_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bad.csv");
    let o = geofish(&["figures", "--name", "estimate-noise", "--grid", "0:1:0.5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);

    let o = geofish(&["figures", "--name", "estimate-noise", "--grid", "0.1:0.9", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn figures_are_deterministic() {
    let a = geofish(&["figures", "--name", "estimate-phase", "--grid", "0.2:0.8:0.2"]);
    let b = geofish(&["figures", "--name", "estimate-phase", "--grid", "0.2:0.8:0.2"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn selftest_passes_and_is_reproducible() {
    let a = geofish(&["selftest", "--seed", "7", "--trials", "20"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stdout));
    let b = geofish(&["selftest", "--seed", "7", "--trials", "20"]);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("PASS rld-chain-rule")));
}

#[test]
fn broken_tolerance_names_failing_invariant() {
    let out = geofish_env(&["selftest", "--trials", "5"], &[("QDB_TOL_CONSISTENCY", "1e-30")]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(text.lines().any(|l| l.starts_with("FAIL fisher-additivity")), "{text}");
    assert!(stderr(&out).contains("fisher-additivity"));

    let out = geofish_env(
        &["selftest", "--trials", "5", "--tol-consistency", "1e-7"],
        &[("QDB_TOL_CONSISTENCY", "1e-30")],
    );
    assert!(out.status.success(), "flags win over environment");
}

#[test]
fn invalid_environment_tolerance_is_input_error() {
    let out = geofish_env(&["selftest", "--trials", "1"], &[("QDB_TOL_SDP", "abc")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("QDB_TOL_SDP"));
}
