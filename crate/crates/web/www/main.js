import init, { ids_curves, bracket, wegner_scan } from "./pkg/ids_lab_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];

// series: [{ label, points: [[x, y]], dashed }]
function plot(title, xlabel, ylabel, series) {
  const cv = $("plot");
  const g = cv.getContext("2d");
  const [W, H] = [cv.width, cv.height];
  const m = { l: 60, r: 150, t: 30, b: 45 };
  g.clearRect(0, 0, W, H);
  const pts = series.flatMap((s) => s.points).filter(([x, y]) => isFinite(x) && isFinite(y));
  let [x0, x1] = [Math.min(...pts.map((p) => p[0])), Math.max(...pts.map((p) => p[0]))];
  let [y0, y1] = [Math.min(...pts.map((p) => p[1])), Math.max(...pts.map((p) => p[1]))];
  if (x1 === x0) x1 = x0 + 1;
  if (y1 === y0) y1 = y0 + 1;
  const pad = 0.04 * (y1 - y0);
  y0 -= pad; y1 += pad;
  const X = (x) => m.l + ((x - x0) / (x1 - x0)) * (W - m.l - m.r);
  const Y = (y) => H - m.b - ((y - y0) / (y1 - y0)) * (H - m.t - m.b);

  g.strokeStyle = "#999"; g.fillStyle = "#222"; g.lineWidth = 1; g.setLineDash([]);
  g.strokeRect(m.l, m.t, W - m.l - m.r, H - m.t - m.b);
  g.font = "12px sans-serif"; g.textAlign = "center";
  for (let k = 0; k <= 5; k++) {
    const x = x0 + (k / 5) * (x1 - x0), y = y0 + (k / 5) * (y1 - y0);
    g.fillText(x.toPrecision(3), X(x), H - m.b + 16);
    g.textAlign = "right"; g.fillText(y.toPrecision(3), m.l - 6, Y(y) + 4); g.textAlign = "center";
  }
  g.fillText(xlabel, (m.l + W - m.r) / 2, H - 8);
  g.font = "bold 13px sans-serif"; g.fillText(title, (m.l + W - m.r) / 2, 18);
  g.save(); g.translate(14, (m.t + H - m.b) / 2); g.rotate(-Math.PI / 2); g.font = "12px sans-serif"; g.fillText(ylabel, 0, 0); g.restore();

  series.forEach((s, i) => {
    const c = COLORS[i % COLORS.length];
    g.strokeStyle = c; g.lineWidth = 1.5; g.setLineDash(s.dashed ? [6, 4] : []);
    g.beginPath();
    s.points.forEach(([x, y], k) => (k ? g.lineTo(X(x), Y(y)) : g.moveTo(X(x), Y(y))));
    g.stroke();
    g.fillStyle = c; g.textAlign = "left"; g.font = "12px sans-serif";
    g.fillRect(W - m.r + 10, m.t + 8 + 16 * i, 14, 3);
    g.fillText(s.label, W - m.r + 30, m.t + 13 + 16 * i);
  });
}

const zip = (xs, ys) => xs.map((x, k) => [x, ys[k]]);

function run(f) {
  $("info").className = "";
  try {
    const t = performance.now();
    f();
    $("info").textContent += `\n(${((performance.now() - t) / 1000).toFixed(2)} s)`;
  } catch (e) {
    $("info").className = "err";
    $("info").textContent = String(e);
  }
}

function curves() {
  const v = JSON.parse(ids_curves($("c-lattice").value, num("c-w"), num("c-r"), num("c-seed")));
  const series = v.exhaustion.map((s) => ({ label: `j = ${s.radius}`, points: zip(v.lambdas, s.values) }));
  series.push({ label: "Bloch (w = 0)", points: zip(v.lambdas, v.bloch), dashed: true });
  plot("exhaustion on centered boxes", "λ", "N(λ)", series);
  const last = v.exhaustion[v.exhaustion.length - 1];
  const sup = Math.max(...last.values.map((x, k) => Math.abs(x - v.bloch[k])));
  $("info").textContent = `largest box: ${last.vertices} vertices, sup distance to the periodic curve ${sup.toFixed(4)}`;
}

function bounds() {
  const v = JSON.parse(bracket($("b-lattice").value, num("b-w"), num("b-n"), num("b-seed")));
  plot("single-cell bracket", "λ", "N(λ)", [
    { label: "doubled Dirichlet (lower)", points: zip(v.lambdas, v.lower) },
    { label: "Neumann (upper)", points: zip(v.lambdas, v.upper) },
  ]);
  const se = Math.max(...v.lower_se, ...v.upper_se);
  $("info").textContent = `${v.samples} samples, largest standard error ${se.toFixed(4)}`;
}

function wegner() {
  const v = JSON.parse(wegner_scan(num("w-w"), num("w-e"), num("w-n"), num("w-seed")));
  const f = v.fit;
  const groups = new Map();
  for (const r of v.rows) {
    if (!groups.has(r.cells)) groups.set(r.cells, []);
    groups.get(r.cells).push(r);
  }
  const series = [];
  for (const [cells, rows] of groups) {
    const ok = rows.filter((r) => r.mean_trace > 0);
    series.push({ label: `|J| = ${cells}`, points: ok.map((r) => [Math.log(r.epsilon), Math.log(r.mean_trace)]) });
    series.push({
      label: `fit ${cells}`,
      points: rows.map((r) => [Math.log(r.epsilon), f.log_c + f.alpha * Math.log(r.epsilon) + f.beta * Math.log(cells)]),
      dashed: true,
    });
  }
  plot(`E[tr P] near E = ${v.energy}`, "ln ε", "ln E[tr P]", series);
  $("info").textContent =
    `α = ${f.alpha.toFixed(3)} (95% CI ${f.alpha_ci.map((x) => x.toFixed(3)).join("..")})\n` +
    `β = ${f.beta.toFixed(3)} (95% CI ${f.beta_ci.map((x) => x.toFixed(3)).join("..")})\n` +
    `R² = ${f.r_squared.toFixed(4)}, ${f.rows_used} rows`;
}

await init();
$("c-go").onclick = () => run(curves);
$("b-go").onclick = () => run(bounds);
$("w-go").onclick = () => run(wegner);
run(curves);
