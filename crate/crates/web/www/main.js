import init, { table, analyze, verify } from "./pkg/dynmcx_web.js";

const $ = (id) => document.getElementById(id);

function fail(target, err) {
  target.innerHTML = "";
  const p = document.createElement("p");
  p.className = "error";
  p.textContent = String(err);
  target.appendChild(p);
}

function renderCsv(csv) {
  const rows = csv.trim().split("\n").map((line) => line.split(","));
  const t = document.createElement("table");
  rows.forEach((cells, i) => {
    const tr = t.insertRow();
    for (const c of cells) {
      const cell = document.createElement(i === 0 ? "th" : "td");
      cell.textContent = c;
      tr.appendChild(cell);
    }
  });
  return t;
}

function triple(label, v) {
  return v ? `<li>${label}: CX ${v[0]}, T ${v[1]}, T-depth ${v[2]}</li>` : "";
}

await init();

$("show-table").onclick = () => {
  const out = $("table-out");
  try {
    out.replaceChildren(renderCsv(table(Number($("nmax").value), true)));
  } catch (e) {
    fail(out, e);
  }
};

$("analyze").onclick = () => {
  const out = $("analysis-out");
  try {
    const r = JSON.parse(analyze(Number($("n").value), $("strategy").value));
    out.innerHTML = `<ul><li>${r.qubits} qubits</li>${triple("static", r.static_cost)}` +
      `${triple("worst case (all outcomes 1)", r.worst)}${triple("best case (all outcomes 0)", r.best)}` +
      `<li>gate-level T-depth: ${r.gate_level_t_depth}</li></ul>`;
    $("qasm-out").textContent = r.qasm;
  } catch (e) {
    fail(out, e);
    $("qasm-out").textContent = "";
  }
};

$("verify").onclick = () => {
  const out = $("analysis-out");
  try {
    const r = JSON.parse(verify(Number($("n").value), $("strategy").value));
    out.innerHTML = `<p>${r.passed ? "PASS" : "FAIL"}: ${r.inputs} basis inputs, ${r.branches} branches, ` +
      `worst deviation ${r.worst_deviation.toExponential(2)}</p>`;
  } catch (e) {
    fail(out, e);
  }
};

$("show-table").click();
