use std::path::PathBuf;
use std::process::{Command, Output};

use proptest::prelude::*;
use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .display()
        .to_string()
}

fn arsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arsim"))
        .args(args)
        .env_remove("AR_SIM_SEED")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("arsim-{}-{name}", std::process::id()))
}

#[test]
fn run_is_byte_for_byte_reproducible() {
    let (a, b) = (tmp("a.json"), tmp("b.json"));
    let scenario = fixture("line3_two_phase.json");
    for path in [&a, &b] {
        let out = arsim(&["run", "--scenario", &scenario, "--trace-out", path.to_str().unwrap()]);
        assert_eq!(code(&out), 0);
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(!ta.is_empty());
    assert_eq!(ta, tb);
    let trace: Value = serde_json::from_slice(&ta).unwrap();
    assert_eq!(trace["seed"], 11);
    let _ = std::fs::remove_file(a);
    let _ = std::fs::remove_file(b);
}

#[test]
fn single_process_two_phase_cites_both_steps() {
    let out = arsim(&["check", "--scenario", &fixture("single_ae.json"), "--property", "two-phase", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    assert_eq!(r["verdict"], "pass");
    assert_eq!(r["witness"]["type"], "phases");
    assert!(r["witness"]["m"].as_u64().unwrap() < r["witness"]["n"].as_u64().unwrap());

    let text = arsim(&["check", "--scenario", &fixture("single_ae.json"), "--property", "two-phase"]);
    let text = String::from_utf8(text.stdout).unwrap();
    let m = r["witness"]["m"].as_u64().unwrap();
    let n = r["witness"]["n"].as_u64().unwrap();
    assert!(text.contains(&format!("entered S2 at step {m}, entered S1 at step {n}")), "{text}");
}

#[test]
fn run_text_and_json_agree_on_markers() {
    let scenario = fixture("single_ae.json");
    let j = json(&arsim(&["run", "--scenario", &scenario, "--format", "json"]));
    let text = String::from_utf8(arsim(&["run", "--scenario", &scenario]).stdout).unwrap();
    let s2: Vec<String> = j["entered_s2"].as_array().unwrap().iter().map(|v| v.to_string()).collect();
    assert!(text.contains(&format!("entered S2 at step {}", s2.join(", "))), "{text}");
    assert_eq!(j["final"]["S1"], true);
    assert!(text.contains("final: S1 yes"));
}

#[test]
fn closure_of_t_on_two_nodes_passes() {
    let out = arsim(&["check", "--scenario", &fixture("line2_legit.json"), "--property", "closure-T"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn explore_reports_the_sequence_bit_deadlock() {
    let out = arsim(&["explore", "--scenario", &fixture("line2_sn_collision.json"), "--target", "S2", "--format", "json"]);
    assert_eq!(code(&out), 1);
    let r = json(&out);
    assert_eq!(r["verdict"], "fail");
    assert_eq!(r["witness"]["type"], "path");
    assert!(r["witness"]["cycle_from"].is_u64());
}

#[test]
fn explore_refuses_oversized_instances() {
    let out = arsim(&["explore", "--scenario", &fixture("star5_notify.json"), "--target", "S1", "--max-states", "1000"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("refused"));
}

#[test]
fn invalid_scenarios_exit_with_two() {
    for f in ["bad_corrupt_otsn.json", "bad_unknown_key.json", "does_not_exist.json"] {
        let out = arsim(&["run", "--scenario", &fixture(f)]);
        assert_eq!(code(&out), 2, "{f}");
        assert!(!out.stderr.is_empty());
    }
    let out = arsim(&["check", "--scenario", &fixture("bad_unknown_key.json"), "--property", "unison"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}

#[test]
fn mode_specific_properties_refuse_the_other_mode() {
    let out = arsim(&["check", "--scenario", &fixture("line4_unison.json"), "--property", "notify-lemma"]);
    assert_eq!(code(&out), 2);
    let out = arsim(&["check", "--scenario", &fixture("single_ae.json"), "--property", "unison"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn seed_variable_overrides_the_scenario() {
    let scenario = fixture("line3_two_phase.json");
    let out = Command::new(env!("CARGO_BIN_EXE_arsim"))
        .args(["run", "--scenario", &scenario, "--format", "json"])
        .env("AR_SIM_SEED", "4242")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["seed"], 4242);
    let bad = Command::new(env!("CARGO_BIN_EXE_arsim"))
        .args(["run", "--scenario", &scenario])
        .env("AR_SIM_SEED", "soon")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2);
}

/// (arguments, expected exit status)
fn contract() -> Vec<(Vec<String>, i32)> {
    let f = fixture;
    let cases: Vec<(Vec<&str>, i32)> = vec![
        (vec!["run", "--scenario", "SINGLE"], 0),
        (vec!["check", "--scenario", "SINGLE", "--property", "two-phase"], 0),
        (vec!["check", "--scenario", "SINGLE", "--property", "s1-convergence"], 0),
        (vec!["check", "--scenario", "WINDOW", "--property", "as-window"], 0),
        (vec!["check", "--scenario", "UNISON", "--property", "unison"], 0),
        (vec!["check", "--scenario", "NOTIFY", "--property", "notify-lemma"], 0),
        (vec!["explore", "--scenario", "TWO_PHASE", "--target", "S2"], 0),
        (vec!["explore", "--scenario", "COLLISION", "--target", "S2"], 1),
        (vec!["check", "--scenario", "COLLISION", "--property", "s1-convergence"], 1),
        (vec!["check", "--scenario", "COLLISION", "--property", "two-phase"], 1),
        (vec!["check", "--scenario", "BAD", "--property", "two-phase"], 2),
        (vec!["check", "--scenario", "SINGLE"], 2),
        (vec!["check", "--scenario", "SINGLE", "--property", "liveness"], 2),
        (vec!["explore", "--scenario", "SINGLE", "--target", "S3"], 2),
        (vec!["run"], 2),
    ];
    cases
        .into_iter()
        .map(|(args, c)| {
            let args = args
                .into_iter()
                .map(|a| match a {
                    "SINGLE" => f("single_ae.json"),
                    "WINDOW" => f("line5_bounded_window.json"),
                    "UNISON" => f("line4_unison.json"),
                    "NOTIFY" => f("star5_notify.json"),
                    "TWO_PHASE" => f("line3_two_phase.json"),
                    "COLLISION" => f("line2_sn_collision.json"),
                    "BAD" => f("bad_corrupt_otsn.json"),
                    other => other.to_string(),
                })
                .collect();
            (args, c)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exit_codes_follow_the_contract(i in 0usize..15, json_out in any::<bool>()) {
        let (mut args, want) = contract()[i].clone();
        if json_out && want != 2 {
            args.extend(["--format".to_string(), "json".to_string()]);
        }
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = arsim(&refs);
        prop_assert_eq!(code(&out), want, "{:?}: {}", args, String::from_utf8_lossy(&out.stderr));
        if json_out && want != 2 {
            prop_assert!(serde_json::from_slice::<Value>(&out.stdout).is_ok());
        }
    }

    #[test]
    fn unknown_subcommands_are_usage_errors(word in "x[a-z]{0,8}") {
        prop_assert_eq!(code(&arsim(&[&word])), 2);
    }
}
