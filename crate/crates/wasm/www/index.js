import init, { correlateSeries, significanceOf, profileHistogram, profileNames } from "./pkg/wellness_wasm.js";

const $ = (id) => document.getElementById(id);

function fmt(v, digits = 4) {
  if (typeof v !== "number") return String(v);
  if (v !== 0 && Math.abs(v) < 1e-3) return v.toExponential(3);
  return v.toFixed(digits);
}

function showError(el, msg) {
  el.innerHTML = "";
  const p = document.createElement("p");
  p.className = "err";
  p.textContent = msg;
  el.appendChild(p);
}

function table(headers, rows, highlight = () => false) {
  const t = document.createElement("table");
  const head = t.insertRow();
  for (const h of headers) {
    const th = document.createElement("th");
    th.textContent = h;
    head.appendChild(th);
  }
  for (const r of rows) {
    const tr = t.insertRow();
    if (highlight(r)) tr.className = "hi";
    for (const cell of r.cells) tr.insertCell().textContent = cell;
  }
  return t;
}

function runCorrelate() {
  const out = $("corr-out");
  const res = JSON.parse(correlateSeries($("xs").value, $("ys").value));
  if (res.error) return showError(out, res.error);
  const rows = res.results.map((c) => ({
    hi: c.highlighted,
    cells: c.error
      ? [c.method, "-", "-", res.n, c.error, ""]
      : [c.method, fmt(c.r), fmt(c.p_value), c.n, c.strength, c.significant ? "yes" : "no"],
  }));
  out.innerHTML = "";
  out.appendChild(table(["method", "r", "p", "n", "strength", "p < 0.05"], rows, (r) => r.hi));
}

function runSignificance() {
  const out = $("sig-out");
  const res = JSON.parse(significanceOf($("sig-method").value, Number($("sig-r").value), Number($("sig-n").value)));
  if (res.error) return showError(out, res.error);
  out.innerHTML = "";
  out.appendChild(
    table(["method", "r", "n", "p", "strength", "p < 0.05"], [
      { cells: [res.method, fmt(res.r), res.n, fmt(res.p_value), res.strength, res.significant ? "yes" : "no"] },
    ]),
  );
}

function drawBars(canvas, counts) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const max = Math.max(1, ...counts);
  const w = canvas.width / counts.length;
  ctx.fillStyle = "#4a7bb7";
  counts.forEach((c, i) => {
    const h = (c / max) * (canvas.height - 10);
    ctx.fillRect(i * w + 1, canvas.height - h, w - 2, h);
  });
}

function runHistogram() {
  const out = $("hist-out");
  const res = JSON.parse(
    profileHistogram(
      $("hist-profile").value,
      $("hist-var").value,
      Number($("hist-n").value),
      Number($("hist-bins").value),
      BigInt($("hist-seed").value || 0),
    ),
  );
  if (res.error) return showError(out, res.error);
  out.textContent = `${res.label}: n = ${res.n}, mean ${fmt(res.mean, 2)}, range [${fmt(res.min, 2)}, ${fmt(res.max, 2)}]`;
  drawBars($("hist-canvas"), res.counts);
}

async function main() {
  await init();
  for (const name of JSON.parse(profileNames())) {
    const opt = document.createElement("option");
    opt.textContent = name;
    $("hist-profile").appendChild(opt);
  }
  $("run-corr").onclick = runCorrelate;
  $("run-sig").onclick = runSignificance;
  $("run-hist").onclick = runHistogram;
  $("status").textContent = "Ready.";
  runCorrelate();
  runSignificance();
  runHistogram();
}

main().catch((e) => {
  $("status").textContent = `Failed to load: ${e}`;
  $("status").className = "err";
});
