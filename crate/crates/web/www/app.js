import init, { Playground } from "./pkg/snn_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const status = (msg) => { $("status").textContent = msg; };

let pg = null;
let costs = [];

function reset() {
  pg = new Playground($("kind").value, num("n"), BigInt(num("seed")), num("hidden"));
  costs = [];
  drawBoundary();
  drawCurve();
  clear($("sweepplot"));
  status(`new 2-${num("hidden")}-2 network, accuracy ${pg.accuracy().toFixed(3)}`);
}

function clear(canvas) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  return ctx;
}

function drawBoundary() {
  const canvas = $("boundary");
  const ctx = clear(canvas);
  const res = 64;
  const grid = pg.boundary(res);
  const cell = canvas.width / res;
  for (let i = 0; i < res; i++) {
    for (let j = 0; j < res; j++) {
      const p = grid[i * res + j];
      const r = Math.round(255 - 90 * p), b = Math.round(165 + 90 * p);
      ctx.fillStyle = `rgb(${r},${Math.round(200 + 20 * Math.abs(p - 0.5))},${b})`;
      ctx.fillRect(j * cell, canvas.height - (i + 1) * cell, cell + 1, cell + 1);
    }
  }
  const pts = pg.points();
  for (let k = 0; k < pts.length; k += 3) {
    ctx.beginPath();
    ctx.arc(pts[k] * canvas.width, canvas.height - pts[k + 1] * canvas.height, 3, 0, 2 * Math.PI);
    ctx.fillStyle = pts[k + 2] === 1 ? "#1f4fbf" : "#c0392b";
    ctx.fill();
  }
}

function plot(canvas, series, yMax) {
  const ctx = clear(canvas);
  const pad = 24, w = canvas.width - 2 * pad, h = canvas.height - 2 * pad;
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w, h);
  for (const { xs, ys, color } of series) {
    if (xs.length === 0) continue;
    const x0 = xs[0], x1 = xs[xs.length - 1] === x0 ? x0 + 1 : xs[xs.length - 1];
    ctx.beginPath();
    ctx.strokeStyle = color;
    xs.forEach((x, i) => {
      const px = pad + ((x - x0) / (x1 - x0)) * w;
      const py = pad + h - (Math.min(ys[i], yMax) / yMax) * h;
      i === 0 ? ctx.moveTo(px, py) : ctx.lineTo(px, py);
    });
    ctx.stroke();
  }
  ctx.fillStyle = "#444";
  ctx.fillText(yMax.toPrecision(3), 2, pad - 6);
}

function drawCurve() {
  const ys = costs.map((c) => c[1]);
  plot($("curve"), [{ xs: costs.map((c) => c[0]), ys, color: "#333" }], Math.max(1e-9, ...ys));
}

function trainParams() {
  return [num("epochs"), num("lr"), num("batch"), num("momentum"), $("adaptive").checked];
}

function train() {
  const curve = JSON.parse(pg.train(...trainParams()));
  curve.epochs.forEach((e, i) => costs.push([e, curve.costs[i]]));
  drawBoundary();
  drawCurve();
  const acc = curve.accuracies[curve.accuracies.length - 1];
  status(`epoch ${costs.length ? costs[costs.length - 1][0] : 0}: accuracy ${acc.toFixed(3)}`);
}

function prune() {
  const out = JSON.parse(pg.prune(num("target"), num("epochs"), num("lr"), num("batch")));
  out.curve.epochs.forEach((e, i) => costs.push([e, out.curve.costs[i]]));
  drawBoundary();
  drawCurve();
  status(
    `pruned |w| <= ${out.theta.toFixed(4)}: weight sparsity ${out.weight_sparsity.toFixed(3)}\n` +
    `accuracy dense ${out.accuracy_dense.toFixed(3)}, pruned ${out.accuracy_pruned.toFixed(3)}, ` +
    `retrained ${out.accuracy_retrained.toFixed(3)}`
  );
}

function sweep() {
  const out = JSON.parse(pg.sweep(num("epsmax"), 21));
  plot($("sweepplot"), [
    { xs: out.epsilon, ys: out.activation_sparsity, color: "#8e44ad" },
    { xs: out.epsilon, ys: out.accuracy, color: "#27ae60" },
  ], 1);
  const last = out.epsilon.length - 1;
  status(
    `epsilon 0: sparsity ${out.activation_sparsity[0].toFixed(3)}, accuracy ${out.accuracy[0].toFixed(3)}\n` +
    `epsilon ${out.epsilon[last]}: sparsity ${out.activation_sparsity[last].toFixed(3)}, ` +
    `accuracy ${out.accuracy[last].toFixed(3)}  (purple: sparsity, green: accuracy)`
  );
}

function guarded(fn) {
  return () => {
    try { fn(); } catch (e) { status(`error: ${e.message ?? e}`); }
  };
}

await init();
$("reset").onclick = guarded(reset);
$("train").onclick = guarded(train);
$("prune").onclick = guarded(prune);
$("sweep").onclick = guarded(sweep);
guarded(reset)();
