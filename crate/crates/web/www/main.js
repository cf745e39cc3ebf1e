import init, { sample, barcode, coordinates } from "./pkg/sphcoords_web.js";

const $ = (id) => document.getElementById(id);
let truth = "null";

function status(text, error = false) {
  $("status").textContent = text;
  $("status").className = error ? "error" : "";
}

function clear(canvas) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.font = "11px system-ui";
  return ctx;
}

function drawBars(result) {
  const canvas = $("bars");
  const ctx = clear(canvas);
  const top = result.max_value || 1;
  const bars = result.bars.slice(0, 40);
  const h = Math.min(14, (canvas.height - 30) / Math.max(bars.length, 1));
  const x = (v) => 10 + (canvas.width - 20) * Math.min(v, top) / top;
  bars.forEach((b, i) => {
    ctx.fillStyle = b.death === null ? "#c33" : "#36c";
    ctx.fillRect(x(b.birth), 10 + i * h, Math.max(1, x(b.death ?? top) - x(b.birth)), h * 0.7);
  });
  ctx.fillStyle = "#444";
  ctx.fillText(`0`, 10, canvas.height - 6);
  ctx.fillText(top.toPrecision(3), canvas.width - 40, canvas.height - 6);
  ctx.fillText(`${result.bars.length} bars`, canvas.width / 2 - 20, canvas.height - 6);
}

function hue(i, n) {
  return `hsl(${(360 * i) / Math.max(n, 1)}, 70%, 45%)`;
}

function drawCoordinates(result, dim) {
  const canvas = $("plot");
  const ctx = clear(canvas);
  const rows = result.coordinates;
  if (dim === 2) {
    // equirectangular azimuth against elevation
    rows.forEach(([id, az, el]) => {
      const px = canvas.width / 2 + (az / Math.PI) * (canvas.width / 2 - 10);
      const py = canvas.height / 2 - (el / (Math.PI / 2)) * (canvas.height / 2 - 10);
      ctx.fillStyle = hue(id, rows.length);
      ctx.fillRect(px - 2, py - 2, 4, 4);
    });
  } else {
    const cx = canvas.width / 2, cy = canvas.height / 2, r = canvas.height / 2 - 20;
    ctx.strokeStyle = "#ccc";
    ctx.beginPath();
    ctx.arc(cx, cy, r, 0, 2 * Math.PI);
    ctx.stroke();
    rows.forEach(([id, t]) => {
      ctx.fillStyle = hue(id, rows.length);
      ctx.beginPath();
      ctx.arc(cx + r * Math.cos(t), cy - r * Math.sin(t), 3, 0, 2 * Math.PI);
      ctx.fill();
    });
  }
}

function drawEnergy(trace) {
  const canvas = $("energy");
  const ctx = clear(canvas);
  if (trace.length < 2) return;
  const hi = Math.max(...trace), lo = Math.min(...trace);
  const span = hi - lo || 1;
  ctx.strokeStyle = "#393";
  ctx.beginPath();
  trace.forEach((e, i) => {
    const px = 10 + ((canvas.width - 20) * i) / (trace.length - 1);
    const py = canvas.height - 15 - ((canvas.height - 30) * (e - lo)) / span;
    i ? ctx.lineTo(px, py) : ctx.moveTo(px, py);
  });
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.fillText(`energy ${hi.toPrecision(4)} to ${trace[trace.length - 1].toPrecision(4)}`, 10, 12);
}

function run(label, f) {
  status(`${label}...`);
  // let the status line paint before the blocking call
  setTimeout(() => {
    try {
      const t0 = performance.now();
      const text = f();
      status(`${text} (${((performance.now() - t0) / 1000).toFixed(2)} s)`);
    } catch (e) {
      status(String(e.message ?? e), true);
    }
  }, 20);
}

function generate() {
  const kind = $("kind").value;
  const s = JSON.parse(sample(kind, Number($("n").value), BigInt($("seed").value)));
  $("points").value = s.points;
  truth = JSON.stringify(s.truth);
  const circular = ["circle", "ellipse", "two-circles"].includes(kind);
  $("dim").value = circular ? "1" : "2";
  $("scale").value = circular ? "0" : "0.7";
}

$("points").addEventListener("input", () => (truth = "null"));
$("generate").addEventListener("click", () => run("generating", () => (generate(), "points ready")));
$("barcode").addEventListener("click", () =>
  run("computing barcode", () => {
    const r = JSON.parse(barcode($("points").value, Number($("dim").value), Number($("scale").value)));
    drawBars(r);
    return `${r.bars.length} bars`;
  })
);
$("coords").addEventListener("click", () =>
  run("minimizing", () => {
    const dim = Number($("dim").value);
    const r = JSON.parse(
      coordinates($("points").value, dim, Number($("scale").value), $("spring").checked, Number($("k").value), truth)
    );
    drawCoordinates(r, dim);
    drawEnergy(r.energy);
    const err = r.rms === null ? "" : `, RMS error against truth ${r.rms.toFixed(4)} rad`;
    return `${r.coordinates.length} vertices, ${r.converged ? "converged" : "not converged"} after ${r.iterations} iterations${err}`;
  })
);

await init();
generate();
status("ready");
