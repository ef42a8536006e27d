import init, { ldlr_curve, pseudocal_eigenvalues, moment_spectrum } from "./pkg/plantlab_web.js";

const $ = (id) => document.getElementById(id);

// Points joined by a line; y on a log axis when asked.
function plot(canvas, xs, ys, { logY = false, bars = false } = {}) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, pad = 40;
  ctx.clearRect(0, 0, W, H);
  const ty = (v) => (logY ? Math.log10(Math.max(v, 1e-300)) : v);
  const yv = ys.map(ty);
  let lo = Math.min(...yv), hi = Math.max(...yv);
  if (!bars && hi === lo) { lo -= 1; hi += 1; }
  if (bars) { lo = Math.min(lo, 0); }
  const x0 = Math.min(...xs), x1 = Math.max(...xs);
  const px = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (W - 2 * pad);
  const py = (y) => H - pad - ((y - lo) / (hi - lo || 1)) * (H - 2 * pad);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, W - 2 * pad, H - 2 * pad);
  ctx.fillStyle = "#333";
  ctx.font = "12px sans-serif";
  ctx.fillText((logY ? "1e" : "") + hi.toPrecision(3), 2, pad + 4);
  ctx.fillText((logY ? "1e" : "") + lo.toPrecision(3), 2, H - pad + 4);
  ctx.strokeStyle = "#1f5fa8";
  ctx.fillStyle = "#1f5fa8";
  if (bars) {
    const w = Math.max(1, (W - 2 * pad) / yv.length - 1);
    yv.forEach((y, i) => {
      const x = pad + (i * (W - 2 * pad)) / yv.length;
      const top = py(Math.max(y, 0)), base = py(Math.min(y, 0));
      ctx.fillRect(x, top, w, Math.max(1, base - top));
    });
    return;
  }
  ctx.beginPath();
  xs.forEach((x, i) => (i ? ctx.lineTo(px(x), py(yv[i])) : ctx.moveTo(px(x), py(yv[i]))));
  ctx.stroke();
  xs.forEach((x, i) => {
    ctx.beginPath();
    ctx.arc(px(x), py(yv[i]), 3, 0, 2 * Math.PI);
    ctx.fill();
    ctx.fillText(String(x), px(x) - 8, H - pad + 16);
  });
}

function guarded(out, f) {
  out.classList.remove("err");
  try {
    f();
  } catch (e) {
    out.textContent = String(e.message || e);
    out.classList.add("err");
  }
}

function runLdlr() {
  guarded($("ld-out"), () => {
    const ns = new Uint32Array($("ld-ns").value.split(",").map((s) => parseInt(s.trim(), 10)).filter((n) => n > 0));
    const pts = JSON.parse(ldlr_curve(3, parseFloat($("ld-exp").value), parseInt($("ld-d").value, 10), ns));
    plot($("ld-plot"), pts.map((p) => p.n), pts.map((p) => p.norm_sq), { logY: true });
    $("ld-out").textContent = pts.map((p) => `n=${p.n}  λ=${p.lambda.toFixed(3)}  norm²=${p.norm_sq.toExponential(4)}`).join("\n");
  });
}

function runPseudocal() {
  $("pc-out").textContent = "computing…";
  // let the status paint before the synchronous wasm call
  setTimeout(() => guarded($("pc-out"), () => {
    const r = JSON.parse(pseudocal_eigenvalues(
      parseInt($("pc-n").value, 10), parseFloat($("pc-l").value),
      parseInt($("pc-D").value, 10), BigInt($("pc-seed").value)));
    plot($("pc-plot"), r.eigenvalues.map((_, i) => i), r.eigenvalues, { bars: true });
    const cert = r.certified_value === null ? "not PSD" : r.certified_value.toFixed(4);
    $("pc-out").textContent =
      `min eig / ‖Λ‖_F = ${r.min_eig_rel.toExponential(3)}\nΛ_∅∅ = ${r.lambda_00.toFixed(5)}\ncertified value = ${cert}`;
  }), 10);
}

function runMoments() {
  guarded($("ms-out"), () => {
    const r = JSON.parse(moment_spectrum($("ms-kind").value, parseInt($("ms-n").value, 10), parseInt($("ms-d").value, 10)));
    plot($("ms-plot"), r.eigenvalues.map((_, i) => i), r.eigenvalues, { bars: true });
    const exp = r.expected_kernel_dim === null ? "n/a" : r.expected_kernel_dim;
    $("ms-out").textContent =
      `smallest nonzero eigenvalue = ${r.min_nonzero.toPrecision(6)}\nkernel dimension = ${r.kernel_dim} (expected ${exp})`;
  });
}

await init();
$("status").textContent = "ready";
$("ld-run").onclick = runLdlr;
$("pc-run").onclick = runPseudocal;
$("ms-run").onclick = runMoments;
runLdlr();
runMoments();
