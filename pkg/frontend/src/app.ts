/**
 * DOM wiring: canvas, control panel, and the live session. Everything
 * stateful lives in ViewerState/Connection so this file stays a thin
 * event-to-delta adapter.
 */
import { ApiClient } from "./api.js";
import { rotate, zoom } from "./camera.js";
import { Connection } from "./connection.js";
import type { FrameMeta } from "./protocol.js";
import { ViewerState } from "./state.js";

const SERVICE_URL =
  (globalThis as { HEXLENS_SERVICE_URL?: string }).HEXLENS_SERVICE_URL ??
  "http://127.0.0.1:8642";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export async function start(): Promise<void> {
  const api = new ApiClient(SERVICE_URL);
  const canvas = el<HTMLCanvasElement>("frame");
  const overlay = el<HTMLCanvasElement>("overlay");
  const banner = el<HTMLDivElement>("banner");
  const status = el<HTMLSpanElement>("status");
  const meshInput = el<HTMLInputElement>("mesh-source");

  let state: ViewerState | null = null;
  let connection: Connection | null = null;
  let frameUrl: string | null = null;

  function showError(message: string): void {
    banner.textContent = message;
    banner.style.display = "block";
  }

  function drawLensRing(): void {
    const ctx = overlay.getContext("2d");
    if (!ctx || !state) return;
    ctx.clearRect(0, 0, overlay.width, overlay.height);
    if (state.lens.enabled && state.lens.mode === "screen") {
      ctx.strokeStyle = "rgba(255, 255, 255, 0.8)";
      ctx.lineWidth = 1.5;
      ctx.beginPath();
      ctx.arc(state.lens.center[0], state.lens.center[1], state.lens.radius,
              0, 2 * Math.PI);
      ctx.stroke();
    }
  }

  function onFrame(meta: FrameMeta, png: Uint8Array, latencyMs: number): void {
    if (!state) return;
    if (!state.applyFrame(meta, latencyMs)) return;
    const blob = new Blob([png.slice().buffer], { type: "image/png" });
    const url = URL.createObjectURL(blob);
    const img = new Image();
    img.onload = () => {
      canvas.width = meta.width;
      canvas.height = meta.height;
      overlay.width = meta.width;
      overlay.height = meta.height;
      canvas.getContext("2d")?.drawImage(img, 0, 0);
      if (frameUrl) URL.revokeObjectURL(frameUrl);
      frameUrl = url;
      drawLensRing();
      el<HTMLSpanElement>("frame-id").textContent = String(meta.frame_id);
      el<HTMLSpanElement>("latency").textContent = `${latencyMs.toFixed(0)} ms`;
    };
    img.src = url;
  }

  async function load(source: string): Promise<void> {
    banner.style.display = "none";
    try {
      const info = await api.createSession(source.startsWith("grid:")
        || source.startsWith("twist:")
        ? { source }
        : { mesh_text: source });
      state = new ViewerState(info);
      const summary = el<HTMLDivElement>("summary");
      summary.textContent =
        `${info.mesh.cells} cells, ${info.mesh.edges} edges, ` +
        `${info.mesh.sheets} sheets, ${info.lod.level_count} LoD levels`;
      const lodSlider = el<HTMLInputElement>("lod");
      lodSlider.max = String(state.ranges.lodMax);
      lodSlider.value = String(state.params.lod);
      connection?.disconnect();
      connection = new Connection(api.streamUrl(info.session_id),
        (url) => new WebSocket(url) as never,
        {
          onFrame,
          onError: (err) => showError(err.error),
          onStatus: (s) => { status.textContent = s; },
        });
      connection.connect();
    } catch (exc) {
      showError(String(exc));
    }
  }

  el<HTMLButtonElement>("load").onclick = () => void load(meshInput.value);
  el<HTMLButtonElement>("retry").onclick = () => connection?.connect();

  // ---- canvas gestures ----------------------------------------------------
  let dragging: "lens" | "orbit" | "resize" | null = null;
  let lastX = 0;
  let lastY = 0;

  overlay.onpointerdown = (ev) => {
    if (!state) return;
    overlay.setPointerCapture(ev.pointerId);
    lastX = ev.offsetX;
    lastY = ev.offsetY;
    if (ev.button === 2 || ev.ctrlKey) {
      dragging = "orbit";
    } else if (ev.shiftKey) {
      dragging = "resize";
    } else if (state.lens.mode === "object") {
      dragging = null;
      void api.pick(state.sessionId, {
        px: ev.offsetX, py: ev.offsetY,
        width: state.params.width, height: state.params.height,
        world_radius: state.lens.world_radius,
      }).then((res) => {
        if (!state) return;
        if (!res.hit) { showError("pick missed the mesh"); return; }
        state.lens = res.lens;
        connection?.send({ lens: {} }); // state already server-side; request a frame
      });
    } else {
      dragging = "lens";
    }
  };
  overlay.onpointermove = (ev) => {
    if (!state || !connection || dragging === null) return;
    const dx = ev.offsetX - lastX;
    const dy = ev.offsetY - lastY;
    lastX = ev.offsetX;
    lastY = ev.offsetY;
    if (dragging === "lens") {
      connection.send(state.dragLens(dx, dy));
    } else if (dragging === "resize") {
      connection.send(state.resizeLens(dx));
    } else {
      state.orbit = rotate(state.orbit, dx, dy);
      connection.send(state.commitCamera());
    }
    drawLensRing();
  };
  overlay.onpointerup = () => { dragging = null; };
  overlay.oncontextmenu = (ev) => ev.preventDefault();
  overlay.onwheel = (ev) => {
    if (!state || !connection) return;
    ev.preventDefault();
    const ticks = Math.sign(ev.deltaY);
    if (state.lens.enabled && state.lens.mode === "object") {
      connection.send(state.scrollDepth(ticks));
    } else {
      state.orbit = zoom(state.orbit, ticks);
      connection.send(state.commitCamera());
    }
  };

  // ---- parameter panel ----------------------------------------------------
  const bind = (id: string, commit: (value: number) => void) => {
    const input = el<HTMLInputElement>(id);
    input.onchange = () => commit(Number(input.value));
  };
  bind("lod", (v) => connection?.send(state!.setLod(v)));
  bind("delta", (v) => connection?.send(state!.setDelta(v)));
  bind("accent", (v) => connection?.send(state!.setAccent(v)));
  bind("face-alpha", (v) => connection?.send(state!.setFaceAlpha(v)));
  bind("wbase", (v) => connection?.send(state!.setWBase(v > 0 ? v : null)));
  el<HTMLInputElement>("background").onchange = (ev) => {
    const checked = (ev.target as HTMLInputElement).checked;
    connection?.send(state!.setBackground(checked ? "white" : "black"));
  };
  el<HTMLInputElement>("lens-mode").onchange = (ev) => {
    if (!state || !connection) return;
    const object = (ev.target as HTMLInputElement).checked;
    state.lens = { ...state.lens, mode: object ? "object" : "screen" };
    connection.send({ lens: { mode: state.lens.mode } });
  };
}

if (typeof document !== "undefined" && document.getElementById("frame")) {
  void start();
}
