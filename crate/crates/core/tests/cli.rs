use std::process::{Command, Output};

use serde_json::Value;

fn canyon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_canyon"))
        .args(args)
        .env_remove("CANYON_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let o = canyon(&all);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn simulate_matches_golden_files() {
    let csv = canyon(&["simulate", "--seed", "1", "--steps", "3"]);
    assert_eq!(stdout(&csv), include_str!("fixtures/simulate_seed1_steps3.csv"));
    let js = canyon(&["simulate", "--seed", "1", "--steps", "3", "--format", "json"]);
    assert_eq!(stdout(&js), include_str!("fixtures/simulate_seed1_steps3.json"));
}

#[test]
fn simulate_zero_steps_is_header_only() {
    let o = canyon(&["simulate", "--steps", "0"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "k,outcome,removed,minimum,size\n");
}

#[test]
fn simulate_restricted_and_thresholds() {
    let o = canyon(&["simulate", "--steps", "50", "--mode", "restricted", "--q", "0.5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 51);
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(4).unwrap().parse::<u64>().is_ok()));

    let o = canyon(&["simulate", "--steps", "20", "--thresholds", "0.3,0.6", "--stride", "5"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "k,outcome,removed,minimum,size,count_le_0.3,count_le_0.6");
    assert_eq!(lines.count(), 4);
}

#[test]
fn oracle_emits_exact_rationals() {
    let o = canyon(&["oracle", "--kmax", "4"]);
    assert_eq!(stdout(&o), include_str!("fixtures/oracle_kmax4.csv"));
    let v = json(&["oracle", "--kmax", "4"]);
    let k4 = &v["result"]["pmf"][3];
    assert_eq!(k4["k"], 4);
    let want = [["0", "1"], ["0", "1"], ["1", "2"], ["-5", "6"], ["1", "3"]];
    assert_eq!(k4["coeffs"], serde_json::json!(want));

    let v = json(&["oracle", "--kmax", "10", "--q", "0.1"]);
    let tm = &v["result"]["truncated_mean"];
    let (lower, closed) = (tm["lower"].as_f64().unwrap(), tm["closed_form"].as_f64().unwrap());
    assert!(lower <= closed && closed - lower < 1e-3);
}

#[test]
fn return_times_example() {
    let v = json(&["return-times", "--q", "0.5", "--n", "1000000", "--seed", "42"]);
    let r = &v["result"];
    assert!((r["closed_form"].as_f64().unwrap() - 3.258891).abs() < 1e-6);
    assert!(r["z_score"].as_f64().unwrap().abs() < 3.0, "{r}");
    assert_eq!(v["seed"], 42);
    assert_eq!(v["schema"], "canyon.return-times");
    assert_eq!(v["version"], 1);
    assert_eq!(v["inputs"]["q"], 0.5);
}

#[test]
fn output_is_independent_of_thread_count() {
    let cases: [&[&str]; 4] = [
        &["return-times", "--q", "0.55", "--n", "50000"],
        &["min-law", "--q", "0.4", "--samples", "100000"],
        &["tail", "--q", "0.6", "--k-min-exp", "3", "--k-max-exp", "9", "--replicas", "5000"],
        &["couple-test", "--trials", "300", "--steps", "100"],
    ];
    for args in cases {
        let run = |threads: &str| {
            let mut a = args.to_vec();
            a.extend(["--threads", threads, "--format", "json"]);
            stdout(&canyon(&a))
        };
        let one = run("1");
        assert!(!one.is_empty());
        assert_eq!(one, run("8"), "{args:?}");
    }
    let env = Command::new(env!("CARGO_BIN_EXE_canyon"))
        .args(["return-times", "--q", "0.55", "--n", "50000"])
        .env("CANYON_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(stdout(&env), stdout(&canyon(&["return-times", "--q", "0.55", "--n", "50000"])));
}

#[test]
fn output_file_and_random_seed() {
    let dir = std::env::temp_dir().join(format!("canyon-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("growth.csv");
    let o = canyon(&["growth", "--steps", "10000", "--output", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("t,q,steps,count,rate,bound,margin\n"));
    std::fs::remove_dir_all(&dir).unwrap();

    let v = json(&["survival", "--q", "0.3", "--horizon", "100", "--replicas", "100", "--seed", "random"]);
    assert!(v["seed"].is_u64());
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| canyon(args).status.code().unwrap();
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
    assert_eq!(code(&["simulate", "--bogus"]), 2);
    assert_eq!(code(&["return-times", "--q", "abc"]), 2);
    assert_eq!(code(&["return-times", "--q", "1.5", "--n", "10"]), 2);
    assert_eq!(code(&["oracle", "--kmax", "12"]), 2);
    assert_eq!(code(&["stationary", "--q", "0.7", "--cycles", "10"]), 2);
    assert_eq!(code(&["growth", "--t", "0.5"]), 2);
    assert_eq!(code(&["simulate", "--mode", "restricted"]), 2);
    assert_eq!(code(&["simulate", "--threads", "0"]), 2);
    // A tiny horizon censors cycles near the critical point.
    assert_eq!(code(&["stationary", "--q", "0.6", "--cycles", "1000", "--horizon", "5"]), 3);
    assert_eq!(
        code(&["critical", "--lo", "0.2", "--hi", "0.4", "--horizon", "1000", "--replicas", "500"]),
        3
    );
    let o = canyon(&["simulate", "--bogus"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn every_subcommand_runs() {
    let cases: [&[&str]; 12] = [
        &["simulate", "--steps", "10"],
        &["return-times", "--q", "0.3", "--n", "1000"],
        &["delta-density", "--t", "0.5", "--steps", "10000", "--burnin", "1000"],
        &["stationary", "--q", "0.3", "--cycles", "1000"],
        &["min-law", "--q", "0.3", "--samples", "10000"],
        &["oracle", "--kmax", "5", "--q", "0.3"],
        &["critical", "--horizon", "2000", "--replicas", "500", "--tolerance", "0.03"],
        &["tail", "--q", "0.8", "--k-min-exp", "2", "--k-max-exp", "8", "--replicas", "500"],
        &["growth", "--steps", "10000"],
        &["couple-test", "--trials", "20", "--steps", "50"],
        &["survival", "--q", "0.8", "--horizon", "1000", "--replicas", "200"],
        &["running-max", "--steps", "10000", "--window-start", "1000"],
    ];
    for args in cases {
        for format in ["csv", "json"] {
            let mut a = args.to_vec();
            a.extend(["--format", format]);
            let o = canyon(&a);
            assert!(o.status.success(), "{a:?}: {}", String::from_utf8_lossy(&o.stderr));
            if format == "json" {
                let v: Value = serde_json::from_slice(&o.stdout).unwrap();
                assert_eq!(v["version"], 1, "{a:?}");
            } else {
                assert!(stdout(&o).lines().count() >= 2, "{a:?}");
            }
        }
    }
}
