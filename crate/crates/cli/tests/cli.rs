use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name].iter().collect();
    p.display().to_string()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dynprice-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynprice"))
        .args(args)
        .env_remove("DYNPRICE_CONFIG")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

#[test]
fn price_running_example() {
    let o = run(&["price", &fixture("running.json")]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["epsilon"], "1/6");
    for (item, want) in [("a", "1/6"), ("b", "1/6"), ("c", "1/3"), ("d", "1/3"), ("e", "1/6")] {
        assert_eq!(v["prices"][item], want, "{item}");
    }
}

#[test]
fn prices_written_by_price_verify() {
    let out = run(&["price", &fixture("running.json")]);
    let path = scratch("running.prices.json");
    std::fs::write(&path, &out.stdout).unwrap();
    let o = run(&["verify-prices", &fixture("running.json"), path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn simulate_table_shows_verdict() {
    let o = run(&["--format", "table", "simulate", &fixture("running.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verdict: true"), "{}", stdout(&o));
}

#[test]
fn naive_pricer_fails() {
    let o = run(&["simulate", &fixture("running.json"), "--pricer", "naive"]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["verdict"], false);
    assert_eq!(v["min_welfare"], "4");
}

#[test]
fn random_run_is_reproducible() {
    let a = run(&["simulate", &fixture("running.json"), "--mode", "random", "--seed", "7"]);
    let b = run(&["simulate", &fixture("running.json"), "--mode", "random", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn legality_dump() {
    let o = run(&["legality", &fixture("running.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["opt"], "5");
}

#[test]
fn gs_check_and_witness() {
    let o = run(&["gs", "check", &fixture("rgp_example.json")]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["is_gs"], false);
    let o = run(&["gs", "witness", &fixture("complement_pair.json")]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["prices"]["x"], "1/4");
    assert_eq!(v["b"], "{x,y}");
    assert_eq!(v["verified"], true);
}

#[test]
fn forge_then_no_equilibrium() {
    let out = scratch("forged.json");
    let o = run(&["forge", &fixture("complement_pair.json"), "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let cert = scratch("forged.certificate.json");
    assert!(cert.exists());
    let o = run(&["we-check", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["exists"], false);
}

#[test]
fn appendix_d_has_no_equilibrium_but_scenario_succeeds() {
    let o = run(&["we-check", &fixture("appendix_d.json")]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["--format", "table", "scenario", "appendix-d"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verdict: true"));
}

#[test]
fn config_file_sets_format() {
    let cfg = scratch("config.json");
    std::fs::write(&cfg, r#"{"output_format": "table"}"#).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_dynprice"))
        .args(["simulate", &fixture("running.json")])
        .env("DYNPRICE_CONFIG", &cfg)
        .output()
        .unwrap();
    assert!(stdout(&o).contains("verdict: true"));
    std::fs::write(&cfg, r#"{"branch_cap": 0}"#).unwrap();
    let o = run(&["--config", cfg.to_str().unwrap(), "price", &fixture("running.json")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_input_exits_2() {
    let bad = scratch("zero_den.json");
    std::fs::write(&bad, r#"{"items":["a"],"buyers":[{"kind":"unit_demand","values":{"a":"3/0"}}]}"#).unwrap();
    let o = run(&["price", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let bad = scratch("nonzero_empty.json");
    std::fs::write(&bad, r#"{"items":["a"],"buyers":[{"kind":"table","values":{"":"1","a":"2"}}]}"#).unwrap();
    let o = run(&["price", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    let o = run(&["price"]);
    assert_eq!(o.status.code(), Some(2));
}
