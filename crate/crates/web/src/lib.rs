//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export takes and returns JSON text so the page needs no glue beyond
//! `JSON.parse`. The plain `*_json` functions carry the logic and are what the
//! native tests call; the `#[wasm_bindgen]` wrappers only convert errors.

use std::sync::Arc;

use serde::Deserialize;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use arsim_core::checker::{self, Goal};
use arsim_core::scenario_file::parse_scenario;
use arsim_core::sim::{candidates, Actor, StepLabel};
use arsim_core::{eval_predicate, Configuration, ModeKind, PredicateId, ProcState, Topology};

/// Frames beyond this are dropped from the simulate result; the page would
/// not render them usefully anyway.
pub const MAX_FRAMES: usize = 4000;

/// Upper bound on explored states, whatever the page asks for.
pub const MAX_EXPLORE: usize = 200_000;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn predicates(cfg: &Configuration) -> Value {
    let mut out = serde_json::Map::new();
    for p in PredicateId::ALL {
        // Bounded-only predicates read as null in unbounded mode.
        let v = eval_predicate(cfg, p).map_or(Value::Null, Value::Bool);
        out.insert(p.name().to_string(), v);
    }
    Value::Object(out)
}

fn enabled(cfg: &Configuration) -> Value {
    candidates(cfg)
        .into_iter()
        .map(|(pid, a)| json!({"pid": pid, "action": a.label()}))
        .collect()
}

fn event(label: &StepLabel) -> String {
    match label {
        StepLabel::Init => "init".into(),
        StepLabel::Action { action } => action.label(),
        StepLabel::Injection { injection, .. } => injection.to_string(),
        StepLabel::Dropped { injection, reason } => format!("dropped {injection} ({reason})"),
        StepLabel::Stutter => "stutter".into(),
    }
}

/// Run a scenario and return one frame per trace record, each with the full
/// configuration and the predicates that hold in it.
pub fn simulate_json(scenario: &str) -> Result<String, String> {
    let scenario = parse_scenario(scenario).map_err(err)?;
    let trace = arsim_core::sim::run(&scenario).map_err(err)?;
    let cfgs = trace.configurations().map_err(err)?;
    let frames: Vec<Value> = trace
        .records
        .iter()
        .zip(&cfgs)
        .take(MAX_FRAMES)
        .map(|(r, cfg)| {
            let actor = match r.actor {
                Actor::Environment => "env".to_string(),
                Actor::Process(p) => format!("p{p}"),
            };
            json!({
                "index": r.index,
                "tick": r.tick,
                "actor": actor,
                "event": event(&r.label),
                "markers": r.markers,
                "procs": cfg.procs,
                "predicates": predicates(cfg),
            })
        })
        .collect();
    let out = json!({
        "topology": trace.topology,
        "mode": trace.mode,
        "seed": trace.seed,
        "end": trace.end,
        "records": trace.records.len(),
        "truncated": trace.records.len() > MAX_FRAMES,
        "frames": frames,
    });
    Ok(out.to_string())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StateInput {
    topology: Topology,
    mode: ModeKind,
    procs: Vec<ProcState>,
}

/// Evaluate every predicate on a hand-edited configuration and list the
/// actions the scheduler could pick from it.
pub fn evaluate_json(state: &str) -> Result<String, String> {
    let input: StateInput = serde_json::from_str(state).map_err(err)?;
    let cfg = Configuration::new(Arc::new(input.topology), input.mode, input.procs).map_err(err)?;
    Ok(json!({"predicates": predicates(&cfg), "enabled": enabled(&cfg)}).to_string())
}

/// Exhaustively explore a small scenario. `target` is `S1` (every fair path
/// reaches S1) or `S2` (every fair path passes S2 before S1).
pub fn explore_json(scenario: &str, target: &str, max_states: usize) -> Result<String, String> {
    let goal = match target.to_ascii_uppercase().as_str() {
        "S1" => Goal::Reach(PredicateId::S1),
        "S2" => Goal::TwoPhase,
        other => return Err(format!("unknown target {other:?}, expected S1 or S2")),
    };
    let max_states = max_states.min(MAX_EXPLORE);
    let scenario = parse_scenario(scenario).map_err(err)?;
    let (init, alphabet) = checker::scenario_setup(&scenario, max_states).map_err(err)?;
    let report = checker::explore(&init, &alphabet, goal, max_states).map_err(err)?;
    serde_json::to_string(&report).map_err(err)
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn simulate(scenario: &str) -> Result<String, JsError> {
    js(simulate_json(scenario))
}

#[wasm_bindgen]
pub fn evaluate(state: &str) -> Result<String, JsError> {
    js(evaluate_json(state))
}

#[wasm_bindgen]
pub fn explore(scenario: &str, target: &str, max_states: usize) -> Result<String, JsError> {
    js(explore_json(scenario, target, max_states))
}
