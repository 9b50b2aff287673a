import init, { deblur, recover, checks } from "./pkg/bdeconv_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function paint(canvas, data, size, scale) {
  canvas.width = size;
  canvas.height = size;
  canvas.style.width = `${size * scale}px`;
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(size, size);
  // data is column-major
  for (let c = 0; c < size; c++) {
    for (let r = 0; r < size; r++) {
      const v = Math.max(0, Math.min(255, Math.round(data[r + c * size] * 255)));
      const o = 4 * (r * size + c);
      img.data[o] = img.data[o + 1] = img.data[o + 2] = v;
      img.data[o + 3] = 255;
    }
  }
  ctx.putImageData(img, 0, 0);
}

function plotResiduals(canvas, res) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  const logs = res.map((r) => Math.log10(Math.max(r, 1e-16)));
  const lo = Math.min(...logs, -9), hi = Math.max(...logs, 0);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(0, 0, w, h);
  ctx.beginPath();
  ctx.strokeStyle = "#06c";
  logs.forEach((v, i) => {
    const x = (i / Math.max(1, logs.length - 1)) * (w - 10) + 5;
    const y = h - 5 - ((v - lo) / (hi - lo)) * (h - 10);
    i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y);
  });
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.fillText(`relative residual (log10), ${logs.length - 1} iterations`, 8, 14);
}

function busy(button, work) {
  button.disabled = true;
  $("status").textContent = "running...";
  setTimeout(() => {
    try {
      work();
      $("status").textContent = "done";
    } catch (e) {
      $("status").textContent = `error: ${e.message ?? e}`;
    } finally {
      button.disabled = false;
    }
  }, 20);
}

$("db-run").onclick = () =>
  busy($("db-run"), () => {
    const size = num("db-size");
    const t = performance.now();
    const d = deblur(size, num("db-len"), num("db-n"), num("db-iters"), num("db-dilate"));
    const scale = size <= 64 ? 3 : size <= 128 ? 2 : 1;
    paint($("db-orig"), d.original(), size, scale);
    paint($("db-blur"), d.blurred(), size, scale);
    paint($("db-rest"), d.restored(), size, scale);
    $("db-out").textContent =
      `K = ${d.k}  relres = ${d.relres.toExponential(3)}  relerr = ${d.relerr.toFixed(4)}  ` +
      `nFFT = ${d.nFft}  (${((performance.now() - t) / 1000).toFixed(1)} s)`;
    d.free();
  });

$("sy-run").onclick = () =>
  busy($("sy-run"), () => {
    const r = JSON.parse(recover(num("sy-l"), num("sy-k"), num("sy-n"), BigInt(num("sy-seed")), $("sy-algo").value));
    plotResiduals($("sy-plot"), r.residuals);
    $("sy-out").textContent =
      `${r.algorithm}: ${r.iterations} iterations, nBh = ${r.nBh}, nCm = ${r.nCm}, nFFT = ${r.nFFT}, RMSE = ${r.rmse.toExponential(2)}`;
  });

$("ck-run").onclick = () =>
  busy($("ck-run"), () => {
    const rows = checks(BigInt(num("ck-seed"))).trim().split("\n").map((l) => l.split(","));
    $("ck-out").innerHTML = rows
      .map((r, i) => {
        const cells = r.map((c) => (i === 0 ? `<th>${c}</th>` : `<td>${c}</td>`)).join("");
        return `<tr class="${r[3] === "false" ? "fail" : ""}">${cells}</tr>`;
      })
      .join("");
  });

init().then(() => {
  for (const id of ["db-run", "sy-run", "ck-run"]) $(id).disabled = false;
  $("status").textContent = "ready";
});
