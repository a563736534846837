import init, { ensemble_histogram, t_curve, lz_curve } from "./pkg/anneal_web.js";

const PAD = 40;

const num = (id) => Number(document.getElementById(id).value);

function axes(ctx, w, h, yLabel) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#888";
  ctx.beginPath();
  ctx.moveTo(PAD, 10);
  ctx.lineTo(PAD, h - PAD);
  ctx.lineTo(w - 10, h - PAD);
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  ctx.fillText(yLabel, 4, 20);
}

function drawBars(canvas, counts) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  axes(ctx, w, h, "count");
  const max = Math.max(1, ...counts);
  const bw = (w - PAD - 10) / counts.length;
  ctx.fillStyle = "#3a6ea5";
  counts.forEach((c, i) => {
    const bh = (c / max) * (h - PAD - 20);
    ctx.fillRect(PAD + i * bw + 1, h - PAD - bh, bw - 2, bh);
  });
  ctx.fillStyle = "#444";
  ctx.fillText("0", PAD, h - PAD + 14);
  ctx.fillText("P = 1", w - 40, h - PAD + 14);
  ctx.fillText(String(max), 4, 34);
}

function drawCurve(canvas, flat, yLabel) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  axes(ctx, w, h, yLabel);
  const xs = [], ys = [];
  for (let i = 0; i < flat.length; i += 2) { xs.push(flat[i]); ys.push(flat[i + 1]); }
  const finite = ys.filter(Number.isFinite);
  if (finite.length === 0) return;
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(...finite), Math.max(...finite)];
  if (y1 - y0 < 1e-12) { y0 -= 1e-6; y1 += 1e-6; }
  const px = (x) => PAD + ((x - x0) / (x1 - x0 || 1)) * (w - PAD - 10);
  const py = (y) => h - PAD - ((y - y0) / (y1 - y0)) * (h - PAD - 20);
  ctx.strokeStyle = "#c0392b";
  ctx.beginPath();
  let pen = false;
  xs.forEach((x, i) => {
    if (!Number.isFinite(ys[i])) { pen = false; return; }
    pen ? ctx.lineTo(px(x), py(ys[i])) : ctx.moveTo(px(x), py(ys[i]));
    pen = true;
  });
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.fillText(y1.toPrecision(6), 4, 34);
  ctx.fillText(y0.toPrecision(6), 4, h - PAD);
  ctx.fillText(`T = ${x0}`, PAD, h - PAD + 14);
  ctx.fillText(`T = ${x1}`, w - 60, h - PAD + 14);
}

function wire(button, status, job) {
  const el = document.getElementById(status);
  document.getElementById(button).addEventListener("click", () => {
    el.className = "status";
    el.textContent = "running…";
    setTimeout(() => {
      const t0 = performance.now();
      try {
        const note = job();
        el.textContent = `${note} (${((performance.now() - t0) / 1000).toFixed(2)} s)`;
      } catch (e) {
        el.className = "status error";
        el.textContent = String(e);
      }
    }, 20);
  });
}

await init();

wire("h-run", "h-status", () => {
  const out = ensemble_histogram(num("h-qubits"), num("h-time"), num("h-runs"), num("h-seed"), num("h-bins"));
  const counts = Array.from(out.slice(0, -1));
  drawBars(document.getElementById("h-canvas"), counts);
  return `${counts.reduce((a, b) => a + b, 0)} converged, ${out[out.length - 1]} failed`;
});

wire("t-run", "t-status", () => {
  const flat = t_curve(num("t-qubits"), num("t-seed"), num("t-min"), num("t-max"), num("t-points"), num("t-lscale"));
  drawCurve(document.getElementById("t-canvas"), flat, "P");
  return `${flat.length / 2} points`;
});

wire("lz-run", "lz-status", () => {
  const flat = lz_curve(num("lz-delta"), num("lz-min"), num("lz-max"), num("lz-points"));
  drawCurve(document.getElementById("lz-canvas"), flat, "P");
  return `${flat.length / 2} points`;
});
