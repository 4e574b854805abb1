// Glue for the sav demo page. Expects the wasm-bindgen output of the
// sav-demo crate in ./pkg (see the repository README).

import init, {
  render_panorama,
  render_view,
  source_onscreen,
  stereo_balance,
  align_playground,
} from "./pkg/sav_demo.js";

const $ = (id) => document.getElementById(id);

function putRgba(canvas, bytes, width, height) {
  const ctx = canvas.getContext("2d");
  const image = new ImageData(new Uint8ClampedArray(bytes), width, height);
  ctx.putImageData(image, 0, 0);
}

function drawProjection() {
  const yaw = Number($("yaw").value);
  const az = Number($("az").value);
  const el = Number($("el").value);
  $("yawVal").textContent = `${yaw}°`;
  $("azVal").textContent = `${az}°`;
  $("elVal").textContent = `${el}°`;
  putRgba($("pano"), render_panorama(yaw, az, el), 512, 256);
  putRgba($("view"), render_view(yaw, az, el), 256, 256);
  $("onscreenNote").textContent = source_onscreen(yaw, az, el)
    ? "source is onscreen for this yaw"
    : "source is offscreen for this yaw";
}

function drawBalance() {
  const az = Number($("balAz").value);
  const yaw = Number($("yaw").value);
  $("balAzVal").textContent = `${az}°`;
  const curve = stereo_balance(az);
  const canvas = $("balance");
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.fillStyle = "#000";
  ctx.fillRect(0, 0, w, h);
  let peak = 0;
  for (const v of curve) peak = Math.max(peak, v);
  const xOf = (deg) => (deg / 360) * (w - 20) + 10;
  const yOf = (v) => h - 15 - (v / peak) * (h - 30);
  for (const [offset, color] of [
    [0, "#7ec87e"],
    [1, "#e0a050"],
  ]) {
    ctx.strokeStyle = color;
    ctx.beginPath();
    for (let deg = 0; deg <= 360; deg++) {
      const v = curve[2 * deg + offset];
      if (deg === 0) ctx.moveTo(xOf(deg), yOf(v));
      else ctx.lineTo(xOf(deg), yOf(v));
    }
    ctx.stroke();
  }
  ctx.strokeStyle = "#888";
  ctx.setLineDash([4, 3]);
  ctx.beginPath();
  ctx.moveTo(xOf(yaw), 5);
  ctx.lineTo(xOf(yaw), h - 5);
  ctx.stroke();
  ctx.setLineDash([]);
  ctx.fillStyle = "#aaa";
  ctx.font = "11px sans-serif";
  ctx.fillText("view yaw 0°", 10, h - 2);
  ctx.fillText("360°", w - 35, h - 2);
}

function drawAlign() {
  const margin = Number($("margin").value);
  const seed = Number($("seed").value);
  $("marginVal").textContent = margin.toFixed(2);
  $("seedVal").textContent = `${seed}`;
  const scene = JSON.parse(align_playground(margin, seed));
  const canvas = $("align");
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.fillStyle = "#000";
  ctx.fillRect(0, 0, w, h);

  const xOf = (frac) => 10 + frac * (w - 20);
  const rowHeight = (h - 20) / scene.audio_frames;
  // Video-frame bands with their boxes.
  for (const box of scene.boxes) {
    const k0 = (box.frame / scene.video_frames) * scene.audio_frames;
    const y = 10 + k0 * rowHeight;
    ctx.fillStyle = "rgba(160,160,180,0.25)";
    ctx.fillRect(
      xOf(box.x1 / 256),
      y,
      xOf(box.x2 / 256) - xOf(box.x1 / 256),
      rowHeight * (scene.audio_frames / scene.video_frames)
    );
  }
  // Sound events with their margin intervals.
  for (const ev of scene.events) {
    const y = 10 + ev.frame * rowHeight + rowHeight / 2;
    const lo = Math.max(0, ev.x - scene.margin);
    const hi = Math.min(1, ev.x + scene.margin);
    ctx.strokeStyle = ev.hit ? "#7ec87e" : "#d06060";
    ctx.beginPath();
    ctx.moveTo(xOf(lo), y);
    ctx.lineTo(xOf(hi), y);
    ctx.stroke();
    ctx.fillStyle = ev.hit ? "#7ec87e" : "#d06060";
    ctx.beginPath();
    ctx.arc(xOf(ev.x), y, 3, 0, Math.PI * 2);
    ctx.fill();
  }
  const score = scene.score === null ? "undefined" : scene.score.toFixed(3);
  $("alignScore").textContent =
    `score ${score}  (TP ${scene.true_positives}, FN ${scene.false_negatives})`;
}

async function main() {
  await init();
  for (const id of ["yaw", "az", "el"]) $(id).addEventListener("input", () => {
    drawProjection();
    drawBalance();
  });
  $("balAz").addEventListener("input", drawBalance);
  for (const id of ["margin", "seed"]) $(id).addEventListener("input", drawAlign);
  drawProjection();
  drawBalance();
  drawAlign();
}

main();
