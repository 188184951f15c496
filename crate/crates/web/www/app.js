// Build with: wasm-pack build --target web --out-dir www/pkg (from crates/web)
import init, { disk_eigenvalues, boundary_defects, grid_eigenvalues } from "./pkg/infmass_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

function show(id, f) {
  const out = $(id);
  out.classList.remove("err");
  try {
    out.textContent = f();
  } catch (e) {
    out.classList.add("err");
    out.textContent = String(e.message ?? e);
  }
}

function diskTable() {
  const flat = disk_eigenvalues(num("d-r"), num("d-a"), num("d-b"), $("d-plus").checked);
  const rows = ["channel   energy"];
  for (let i = 0; i < flat.length; i += 2) {
    rows.push(`${String(flat[i + 1]).padStart(7)}   ${flat[i].toFixed(12)}`);
  }
  return rows.length > 1 ? rows.join("\n") : "no eigenvalues in the window";
}

const DEFECT_NAMES = ["Pauli anticommutator", "‖B² − 1‖", "‖B − B*‖", "‖P₊² − P₊‖", "‖P₊P₋‖", "‖P₊ + P₋ − 1‖", "tr P₊"];

function boundaryTable() {
  const theta = num("b-theta");
  $("b-val").textContent = theta.toFixed(3);
  const d = boundary_defects(theta);
  return DEFECT_NAMES.map((name, i) => `${name.padEnd(22)} ${d[i].toExponential(3)}`).join("\n");
}

function gridTable() {
  const [a, b] = [num("g-a"), num("g-b")];
  const t0 = performance.now();
  const computed = grid_eigenvalues(parseInt($("g-n").value, 10), num("g-l"), 1.0, num("g-m"), a, b);
  const ms = (performance.now() - t0).toFixed(0);
  const oracle = disk_eigenvalues(1.0, a, b, false).filter((_, i) => i % 2 === 0);
  const rows = [`grid eigenvalues (${ms} ms)     nearest disk value`];
  for (const l of computed) {
    const near = oracle.reduce((best, e) => (Math.abs(e - l) < Math.abs(best - l) ? e : best), NaN);
    rows.push(`${l.toFixed(8).padStart(14)}   ${Number.isNaN(near) ? "—" : near.toFixed(8)}`);
  }
  return rows.length > 1 ? rows.join("\n") : "no eigenvalues in the window";
}

await init();
$("d-go").onclick = () => show("d-out", diskTable);
$("b-theta").oninput = () => show("b-out", boundaryTable);
$("g-go").onclick = () => show("g-out", gridTable);
show("d-out", diskTable);
show("b-out", boundaryTable);
