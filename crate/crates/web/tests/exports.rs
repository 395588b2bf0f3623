use arsim_web::{evaluate_json, explore_json, simulate_json};
use serde_json::Value;

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn simulate_frames_match_the_trace() {
    let out = parse(&simulate_json(&fixture("single_ae.json")).unwrap());
    let frames = out["frames"].as_array().unwrap();
    assert_eq!(frames.len() as u64, out["records"].as_u64().unwrap());
    assert_eq!(frames[0]["event"], "init");
    let last = frames.last().unwrap();
    assert_eq!(last["predicates"]["S1"], true);
    // Bounded-only predicates are null in unbounded mode.
    assert!(last["predicates"]["ASprime"].is_null());
    assert!(frames.iter().any(|f| f["markers"]["entered_s2"] == true));
}

#[test]
fn evaluate_reports_the_collision_deadlock() {
    let state = r#"{
        "topology": {"n": 2, "edges": [[0, 1]]},
        "mode": "bounded",
        "procs": [
            {"id": 0, "parent": 0, "leader": 0, "status": "bottom", "sn": 0, "otsn": 1, "ctsn": 0, "res": 1},
            {"id": 1, "parent": 0, "leader": 0, "dist": 1, "status": "stable", "sn": 0, "otsn": 1, "ctsn": 0, "res": 1}
        ]
    }"#;
    let out = parse(&evaluate_json(state).unwrap());
    assert_eq!(out["enabled"].as_array().unwrap().len(), 0);
    assert_eq!(out["predicates"]["S1"], false);
}

#[test]
fn evaluate_rejects_out_of_domain_states() {
    let state = r#"{"topology": {"n": 1, "edges": []}, "mode": "bounded",
        "procs": [{"id": 0, "parent": 0, "leader": 0, "status": "stable", "sn": 0, "otsn": 99, "ctsn": 0, "res": 1}]}"#;
    assert!(evaluate_json(state).unwrap_err().contains("otsn"));
}

#[test]
fn explore_agrees_with_the_cli_fixtures() {
    let pass = parse(&explore_json(&fixture("line3_two_phase.json"), "S2", 100_000).unwrap());
    assert_eq!(pass["verdict"], "pass");
    let fail = parse(&explore_json(&fixture("line2_sn_collision.json"), "s2", 100_000).unwrap());
    assert_eq!(fail["verdict"], "fail");
    assert!(explore_json(&fixture("single_ae.json"), "S3", 10).is_err());
    assert!(explore_json(&fixture("star5_notify.json"), "S1", 1000).is_err());
}
