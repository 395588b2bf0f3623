// Built by `wasm-bindgen --target web --out-dir www/pkg`, see the README.
import init, { simulate, evaluate, explore } from "./pkg/arsim_web.js";

const presets = {
  "one process, one event": {
    topology: { n: 1, edges: [] }, mode: "unbounded", init: "legitimate",
    injections: [{ step: 0, kind: "ae", pid: 0 }],
    seed: 1, max_steps: 200, stop: "s1_quiescent", auto_authorize: true,
  },
  "line of 3, two events": {
    topology: { n: 3, edges: [[0, 1], [1, 2]] }, mode: "unbounded", init: "legitimate",
    injections: [{ step: 2, kind: "ae", pid: 2 }, { step: 9, kind: "ae", pid: 1 }],
    seed: 11, max_steps: 400, stop: "s1_quiescent", auto_authorize: true,
  },
  "line of 2, equal sequence bits (deadlocks)": {
    topology: { n: 2, edges: [[0, 1]] }, mode: "unbounded",
    init: { explicit: [
      { id: 0, parent: 0, leader: 0, dist: 0, status: "restore", sn: 0, otsn: 0, ctsn: 0, res: 1 },
      { id: 1, parent: 0, leader: 0, dist: 1, status: "stable", sn: 1, otsn: 0, ctsn: 0, res: 1 },
    ] },
    injections: [{ step: 0, kind: "ae", pid: 0 }],
    seed: 2, max_steps: 200, auto_authorize: true,
  },
};

const $ = (id) => document.getElementById(id);
let result = null;

function fail(id, e) {
  $(id).textContent = String(e && e.message ? e.message : e);
}

function mark(v) {
  if (v === null) return '<span class="na">n/a</span>';
  return v ? '<span class="yes">yes</span>' : '<span class="no">no</span>';
}

function predRow(preds) {
  return Object.entries(preds).map(([k, v]) => `${k} ${mark(v)}`).join(" &nbsp; ");
}

function procTable(procs) {
  const cols = ["id", "status", "sn", "otsn", "ctsn", "res", "parent", "leader", "alive", "pending_ae", "authorized"];
  const head = "<tr>" + cols.map((c) => `<th>${c}</th>`).join("") + "</tr>";
  const rows = procs.map((p) => "<tr>" + cols.map((c) => `<td>${p[c] ?? ""}</td>`).join("") + "</tr>");
  return head + rows.join("");
}

function show(i) {
  const f = result.frames[i];
  const marks = Object.entries(f.markers).filter(([, on]) => on).map(([k]) => k.replace(/_/g, " "));
  $("frame-head").textContent =
    `record ${f.index}, step ${f.tick}, ${f.actor}: ${f.event}` + (marks.length ? `  [${marks.join(", ")}]` : "");
  $("frame-preds").innerHTML = predRow(f.predicates);
  $("frame-procs").innerHTML = procTable(f.procs);
}

function scenarioText() {
  return $("scenario").value;
}

$("run").onclick = () => {
  $("run-err").textContent = "";
  try {
    result = JSON.parse(simulate(scenarioText()));
  } catch (e) {
    $("player").hidden = true;
    return fail("run-err", e);
  }
  const last = result.frames.length - 1;
  $("run-info").textContent =
    `${result.records} records, ${result.end.replace(/_/g, " ")}` + (result.truncated ? `, first ${last + 1} shown` : "");
  $("frame").max = last;
  $("frame").value = last;
  $("player").hidden = false;
  show(last);
};

$("frame").oninput = (e) => show(Number(e.target.value));

$("to-evaluate").onclick = () => {
  const f = result.frames[Number($("frame").value)];
  const state = { topology: result.topology, mode: result.mode, procs: f.procs };
  $("state").value = JSON.stringify(state, null, 1);
};

$("evaluate").onclick = () => {
  $("eval-err").textContent = "";
  $("eval-out").innerHTML = "";
  try {
    const r = JSON.parse(evaluate($("state").value));
    const acts = r.enabled.map((a) => `p${a.pid}: ${a.action}`).join(", ") || "none (deadlock)";
    $("eval-out").innerHTML = `<p>${predRow(r.predicates)}</p><p>enabled: ${acts}</p>`;
  } catch (e) {
    fail("eval-err", e);
  }
};

$("explore").onclick = () => {
  $("explore-err").textContent = "";
  $("explore-out").textContent = "exploring...";
  // Let the browser paint the message before the synchronous search.
  setTimeout(() => {
    try {
      const r = JSON.parse(explore(scenarioText(), $("target").value, Number($("max-states").value)));
      $("explore-out").textContent = `${r.verdict.toUpperCase()}: ${r.message}\n\n` + JSON.stringify(r, null, 1);
    } catch (e) {
      $("explore-out").textContent = "";
      fail("explore-err", e);
    }
  }, 0);
};

for (const name of Object.keys(presets)) {
  $("preset").add(new Option(name, name));
}
$("preset").onchange = () => {
  $("scenario").value = JSON.stringify(presets[$("preset").value], null, 1);
};

await init();
$("preset").onchange();
$("run").onclick();
