use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdslim")).args(args).env("QDSLIM_THREADS", "1").output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

/// Rows of a CSV output as header-keyed lookups.
fn csv(args: &[&str]) -> (Vec<String>, Vec<Vec<String>>) {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    (header, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<Option<f64>> {
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[i].parse().ok()).collect()
}

#[test]
fn closed_bound() {
    let v = json(&["bounds", "closed", "--alpha", "0.5", "--E", "1", "--dt", "0.04"]);
    assert!((v["bound"].as_f64().unwrap() - 0.8).abs() < 1e-12);
    assert_eq!(v["params"]["dt"], 0.04);
}

#[test]
fn speed_limit_at_right_angle() {
    let v = json(&["bounds", "speedlimit", "--case", "schrodinger", "--alpha", "0.5", "--theta", "1.5707963", "--E", "1"]);
    assert!((v["bound"].as_f64().unwrap() - 0.5).abs() < 1e-7);
}

#[test]
fn open_bound_at_alpha_one() {
    let v = json(&["bounds", "open", "--alpha", "1", "--a", "0", "--b", "0", "--c", "0", "--E", "2"]);
    assert_eq!(v["bound"], 8.0);
    assert_eq!(v["omega"], 8.0);
}

#[test]
fn purity_time_is_positive() {
    let v = json(&["bounds", "purity", "--alpha", "0.5", "--a", "1", "--b", "1", "--E", "2", "--p-start", "1", "--p-fin", "0.5"]);
    assert!(v["bound"].as_f64().unwrap() > 0.0);
}

#[test]
fn pure_bound_outside_window_fails() {
    let out = run(&["bounds", "closed", "--alpha", "0.5", "--E", "1", "--dt", "1", "--kind", "pure"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("window"));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["bounds", "closed", "--alpha", "2", "--E", "1", "--dt", "1"]).status.code(), Some(1));
    assert_eq!(run(&["bounds", "closed", "--alpha"]).status.code(), Some(2));
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "attenuator"]).status.code(), Some(2), "seed is mandatory");
}

#[test]
fn gibbs_beta_oscillator() {
    let (h, rows) = csv(&["gibbs", "beta", "--spectrum", "ho", "--E", "1,10"]);
    let beta = column(&h, &rows, "beta");
    assert!((beta[0].unwrap() - 3f64.ln()).abs() < 1e-10);
    assert!((beta[1].unwrap() - (21f64 / 19.0).ln()).abs() < 1e-10);
}

#[test]
fn gibbs_eta_box() {
    let (h, rows) = csv(&["gibbs", "eta", "--spectrum", "box", "--cutoff", "1e6"]);
    let eta = column(&h, &rows, "eta")[0].unwrap();
    assert!((eta - 0.5).abs() < 0.025, "eta = {eta}");
}

#[test]
fn gibbs_asymptotics_beta_e_tends_to_one() {
    let (h, rows) = csv(&["gibbs", "asymptotics", "--spectrum", "ho", "--E-grid", "10,100,1000", "--eta", "1"]);
    let be: Vec<f64> = column(&h, &rows, "beta_energy").into_iter().map(Option::unwrap).collect();
    assert!(be.windows(2).all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs()));
    assert!((be[2] - 1.0).abs() < 1e-6);
    assert!(column(&h, &rows, "beta_e_over_eta").iter().all(Option::is_some));
}

#[test]
fn unknown_spectrum_is_a_failure() {
    let out = run(&["gibbs", "beta", "--spectrum", "drum", "--E", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("known"));
}

#[test]
fn verify_attenuator_is_reproducible() {
    let dir = std::env::temp_dir();
    let paths: Vec<_> = (0..2).map(|k| dir.join(format!("qdslim-cli-att-{}-{k}.json", std::process::id()))).collect();
    for p in &paths {
        let out = run(&["verify", "attenuator", "--dim", "20", "--samples", "30", "--seed", "42", "-o", p.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(&paths[0]).unwrap();
    assert_eq!(a, std::fs::read(&paths[1]).unwrap());
    let v: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["seed"], 42);
    assert_eq!(v["pairs"].as_array().unwrap().len(), 21);
    assert!(v["tolerances"]["margin"].is_number());
    assert!(v["truncation"]["max_top_level_population"].is_number());
    for p in &paths {
        let _ = std::fs::remove_file(p);
    }
}

#[test]
fn verify_degenerate_grid() {
    let v = json(&["verify", "attenuator", "--dim", "10", "--samples", "6", "--seed", "1", "--t-grid", "0"]);
    let pairs = v["pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 1);
    assert_eq!(pairs[0]["observed"], 0.0);
    assert_eq!(pairs[0]["bound"], 0.0);
    assert_eq!(v["pass"], true);
}

#[test]
fn verify_closed_and_preset() {
    let v = json(&["verify", "closed", "--dim", "12", "--E", "1", "--samples", "20", "--seed", "5"]);
    assert_eq!(v["pass"], true);
    assert!(!v["pure_state"].as_array().unwrap().is_empty());
    let v = json(&["verify", "preset:damped_pumped(1,0.5,1)", "--dim", "8", "--samples", "12", "--seed", "5", "--t-grid", "0,0.5"]);
    assert_eq!(v["pass"], true);
}

#[test]
fn verify_infeasible_energy() {
    let out = run(&["verify", "attenuator", "--dim", "10", "--E", "0", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("infeasible"));
}

#[test]
fn figure_g_alpha() {
    let (h, rows) = csv(&["figures", "g-alpha", "--points", "400"]);
    let g: Vec<f64> = column(&h, &rows, "g").into_iter().map(Option::unwrap).collect();
    assert_eq!(g.len(), 400);
    assert!((g[0] - 2.0).abs() < 1e-12 && (g[399] - 1.0).abs() < 1e-12);
    assert!(g.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn figure_bound_compare() {
    let (h, rows) = csv(&["figures", "bound-compare", "--E", "1"]);
    let mixed = column(&h, &rows, "mixed");
    let pure = column(&h, &rows, "pure");
    assert!(pure.iter().zip(&mixed).all(|(p, m)| p.is_none_or(|p| p <= m.unwrap())));
    assert!(pure.iter().filter(|p| p.is_some()).count() > 1);
}

#[test]
fn figure_beta_asymptotics() {
    let (h, rows) = csv(&["figures", "beta-asymptotics", "--spectrum", "ho", "--eta", "1", "--points", "12"]);
    let ratio: Vec<f64> = column(&h, &rows, "ratio").into_iter().map(Option::unwrap).collect();
    assert!((ratio[11] - 1.0).abs() < 1e-6);
    assert!(ratio.windows(2).all(|w| w[1] <= w[0]));
}
