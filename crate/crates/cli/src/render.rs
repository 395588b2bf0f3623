//! Human-readable rendering of the JSON value a command produced. The text
//! format never looks at anything the JSON does not contain.

use std::fmt::Write;

use serde_json::Value;

fn s(v: &Value) -> String {
    match v {
        Value::String(x) => x.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn yes_no(v: &Value) -> &'static str {
    if v.as_bool().unwrap_or(false) {
        "yes"
    } else {
        "no"
    }
}

fn indices(v: &Value) -> String {
    let list: Vec<String> = v.as_array().into_iter().flatten().map(s).collect();
    if list.is_empty() {
        "never".into()
    } else {
        list.join(", ")
    }
}

/// One process as `id:status sn/otsn/ctsn res P l`.
fn proc_line(p: &Value) -> String {
    let mut out = format!(
        "{}:{} sn={} otsn={} ctsn={} res={} P={} l={}",
        s(&p["id"]),
        s(&p["status"]),
        s(&p["sn"]),
        s(&p["otsn"]),
        s(&p["ctsn"]),
        s(&p["res"]),
        s(&p["parent"]),
        s(&p["leader"])
    );
    if p["alive"] == Value::Bool(false) {
        out.push_str(" dead");
    }
    if p["pending_ae"] == Value::Bool(true) {
        out.push_str(" pending");
    }
    if p["authorized"] == Value::Bool(true) {
        out.push_str(" authorized");
    }
    out
}

fn procs(out: &mut String, indent: &str, state: &Value) {
    for p in state.as_array().into_iter().flatten() {
        let _ = writeln!(out, "{indent}{}", proc_line(p));
    }
}

fn run_text(v: &Value) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "run: {} processes, {} mode, seed {}, {} steps, {}",
        s(&v["n"]),
        s(&v["mode"]),
        s(&v["seed"]),
        s(&v["steps"]),
        s(&v["end"]).replace('_', " ")
    );
    for e in v["log"].as_array().into_iter().flatten() {
        let marks: Vec<String> = e["markers"].as_array().into_iter().flatten().map(s).collect();
        let marks = if marks.is_empty() { String::new() } else { format!("  [{}]", marks.join(", ")) };
        let _ = writeln!(
            out,
            "{:>6}  t{:<6} {:<4} {}{}",
            s(&e["index"]),
            s(&e["tick"]),
            s(&e["actor"]),
            s(&e["event"]),
            marks
        );
    }
    let _ = writeln!(out, "entered S2 at step {}", indices(&v["entered_s2"]));
    let _ = writeln!(out, "entered S1 at step {}", indices(&v["entered_s1"]));
    let _ = writeln!(out, "restore complete at step {}", indices(&v["restore_complete"]));
    let f = &v["final"];
    let _ = write!(out, "final: S1 {}, S2 {}, T {}", yes_no(&f["S1"]), yes_no(&f["S2"]), yes_no(&f["T"]));
    if let Some(p) = v.get("trace_out") {
        let _ = write!(out, "\ntrace written to {}", s(p));
    }
    out
}

fn witness_text(out: &mut String, w: &Value) {
    match w["type"].as_str().unwrap_or("") {
        "step" => {
            let _ = writeln!(out, "witness: step {}", s(&w["index"]));
        }
        "phases" => {
            let _ = writeln!(
                out,
                "witness: entered S2 at step {}, entered S1 at step {} (phase start {})",
                s(&w["m"]),
                s(&w["n"]),
                s(&w["w"])
            );
        }
        "violation" => {
            let _ = writeln!(out, "witness: step {}: {}", s(&w["index"]), s(&w["detail"]));
        }
        "transition" => {
            let _ = writeln!(out, "witness: {}", s(&w["step"]));
            let _ = writeln!(out, "  from");
            procs(out, "    ", &w["from"]);
            let _ = writeln!(out, "  to");
            procs(out, "    ", &w["to"]);
        }
        "path" => {
            let cycle = w["cycle_from"].as_u64();
            let _ = writeln!(out, "witness path:");
            for (i, step) in w["steps"].as_array().into_iter().flatten().enumerate() {
                let loop_mark = if cycle == Some(i as u64) { "  <- closed component starts here" } else { "" };
                if let Some(via) = step["via"].as_str() {
                    let _ = writeln!(out, "    --{via}-->");
                }
                let _ = writeln!(out, "  [{i}]{loop_mark}");
                procs(out, "    ", &step["state"]);
            }
        }
        "runs" => {
            let _ = writeln!(out, "failing seeds: {}", indices(&w["failing_seeds"]));
        }
        _ => {
            let _ = writeln!(out, "witness: {w}");
        }
    }
}

fn report_text(v: &Value) -> String {
    let mut out = String::new();
    let verdict = s(&v["verdict"]).to_uppercase().replace('_', " ");
    let vacuous = if v["vacuous"] == Value::Bool(true) { " (vacuous)" } else { "" };
    let _ = writeln!(out, "{}: {verdict}{vacuous}", s(&v["property"]));
    let _ = writeln!(out, "{}", s(&v["message"]));
    if !v["witness"].is_null() {
        witness_text(&mut out, &v["witness"]);
    }
    if let Some(stats) = v["stats"].as_object() {
        let parts: Vec<String> = stats
            .iter()
            .filter(|(_, x)| !x.is_null() && x.as_u64() != Some(0))
            .map(|(k, x)| format!("{} {}", k.replace('_', " "), s(x)))
            .collect();
        if !parts.is_empty() {
            let _ = write!(out, "stats: {}", parts.join(", "));
        }
    }
    out.trim_end().to_string()
}

fn generic(out: &mut String, indent: usize, v: &Value) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                if x.is_object() || x.is_array() {
                    let _ = writeln!(out, "{:indent$}{k}:", "");
                    generic(out, indent + 2, x);
                } else {
                    let _ = writeln!(out, "{:indent$}{k}: {}", "", s(x));
                }
            }
        }
        Value::Array(items) => {
            for x in items {
                generic(out, indent, x);
            }
        }
        other => {
            let _ = writeln!(out, "{:indent$}{}", "", s(other));
        }
    }
}

pub fn text(v: &Value) -> String {
    if v["command"] == "run" {
        run_text(v)
    } else if v.get("verdict").is_some() {
        report_text(v)
    } else {
        let mut out = String::new();
        generic(&mut out, 0, v);
        out.trim_end().to_string()
    }
}
