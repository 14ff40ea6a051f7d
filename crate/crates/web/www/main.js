import init, { ratio_curves, run_demo_experiment, closed_form } from "./pkg/predsched_web.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function parse(json, errorTarget) {
  const v = JSON.parse(json);
  if (v.error) {
    errorTarget.innerHTML = `<span class="error">${v.error}</span>`;
    return null;
  }
  return v;
}

// series: [{label, xs, ys}]
function plot(canvas, legend, series, { logX = false } = {}) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 40;
  ctx.clearRect(0, 0, w, h);
  const fx = logX ? Math.log10 : (x) => x;
  const xs = series.flatMap((s) => s.xs.map(fx));
  const ys = series.flatMap((s) => s.ys).filter(Number.isFinite);
  const x0 = Math.min(...xs), x1 = Math.max(...xs);
  const y0 = Math.min(1, ...ys), y1 = Math.max(...ys) * 1.05;
  const px = (x) => pad + ((fx(x) - x0) / (x1 - x0 || 1)) * (w - 2 * pad);
  const py = (y) => h - pad - ((y - y0) / (y1 - y0 || 1)) * (h - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#333";
  ctx.font = "11px sans-serif";
  ctx.beginPath();
  ctx.moveTo(pad, pad);
  ctx.lineTo(pad, h - pad);
  ctx.lineTo(w - pad, h - pad);
  ctx.stroke();
  for (let i = 0; i <= 4; i++) {
    const y = y0 + ((y1 - y0) * i) / 4;
    ctx.fillText(y.toFixed(2), 2, py(y) + 4);
    const xv = x0 + ((x1 - x0) * i) / 4;
    const label = logX ? (10 ** xv).toPrecision(2) : xv.toPrecision(3);
    ctx.fillText(label, pad + ((xv - x0) / (x1 - x0 || 1)) * (w - 2 * pad) - 10, h - pad + 14);
  }

  legend.innerHTML = "";
  series.forEach((s, k) => {
    const color = COLORS[k % COLORS.length];
    ctx.strokeStyle = color;
    ctx.lineWidth = 1.2;
    ctx.beginPath();
    s.xs.forEach((x, i) => (i ? ctx.lineTo(px(x), py(s.ys[i])) : ctx.moveTo(px(x), py(s.ys[i]))));
    ctx.stroke();
    legend.innerHTML += `<span style="color:${color}">&#9632; ${s.label}</span>`;
  });
}

function drawCurves() {
  const legend = $("c-legend");
  const v = parse(ratio_curves(num("c-r"), num("c-tau"), num("c-p"), num("c-tmax"), 600), legend);
  if (!v) return;
  plot($("c-plot"), legend, [
    { label: "doubling", xs: v.t, ys: v.baseline },
    { label: "buffered", xs: v.t, ys: v.buffered },
    { label: "bound", xs: v.t, ys: v.bound },
  ], { logX: true });
}

function runExperiment() {
  const query = document.querySelector("input[name=setting]:checked").value === "query";
  const buffers = new Float64Array($("e-buffers").value.split(",").map(Number));
  const legend = $("e-legend"), summary = $("e-summary");
  summary.textContent = "running...";
  // let the message paint before the synchronous run
  setTimeout(() => {
    const v = parse(
      run_demo_experiment(query, num("e-h"), buffers, num("e-points"), num("e-trials"),
        BigInt(num("e-seed")), 1e4),
      summary,
    );
    if (!v) return;
    plot($("e-plot"), legend, [
      { label: "doubling", xs: v.t, ys: v.baseline },
      ...v.series.map((s) => ({ label: `p=${s.p}`, xs: v.t, ys: s.values })),
    ]);
    summary.textContent = "p      mean    improvement%  strong%\n" + v.series
      .map((s) => `${s.p.toFixed(2).padEnd(6)} ${s.overall_mean.toFixed(3).padEnd(7)} ` +
        `${s.improvement_pct.toFixed(1).padEnd(13)} ${s.strong_improvement_pct.toFixed(1)}`)
      .join("\n");
  }, 10);
}

function showBounds() {
  const out = $("b-out");
  const v = parse(closed_form(num("b-r"), num("b-p"), num("b-n")), out);
  if (!v) return;
  out.textContent = Object.entries(v).map(([k, x]) => `${k.padEnd(18)} ${x}`).join("\n");
}

await init();
$("c-go").onclick = drawCurves;
$("e-go").onclick = runExperiment;
$("b-go").onclick = showBounds;
drawCurves();
showBounds();
