/**
 * ViewerState: the client-side mirror of one inspector session.
 *
 * Holds the orbit camera, lens geometry, slider values, and the
 * transfer-function points; every commit produces a Delta for the
 * stream. The displayed frame id never decreases.
 */
import { cameraFromOrbit, clamp, orbitFromCamera, type OrbitState } from "./camera.js";
import type {
  CameraJson,
  Delta,
  FrameMeta,
  LensJson,
  RenderParamsJson,
  SessionInfo,
  TransferPoint,
} from "./protocol.js";
import { validate } from "./tf.js";

export interface SliderRanges {
  lodMax: number;
}

export class ViewerState {
  readonly sessionId: string;
  readonly meshSummary: SessionInfo["mesh"];
  readonly ranges: SliderRanges;

  orbit: OrbitState;
  lens: LensJson;
  params: RenderParamsJson;
  tfPoints: TransferPoint[];

  lastFrameId = 0;
  lastLatencyMs: number | null = null;
  private nextRequestId = 1;

  constructor(info: SessionInfo) {
    this.sessionId = info.session_id;
    this.meshSummary = info.mesh;
    this.ranges = { lodMax: Math.max(info.lod.level_count - 1, 0) };
    this.orbit = orbitFromCamera(info.camera);
    this.lens = { ...info.lens };
    this.params = { ...info.params };
    this.tfPoints = info.params.transfer_function.map((p) => ({ ...p }));
  }

  cameraJson(): CameraJson {
    return cameraFromOrbit(this.orbit);
  }

  allocRequestId(): number {
    return this.nextRequestId++;
  }

  /** Record a served frame; stale (non-increasing) ids are rejected. */
  applyFrame(meta: FrameMeta, latencyMs?: number): boolean {
    if (meta.frame_id <= this.lastFrameId) return false;
    this.lastFrameId = meta.frame_id;
    if (latencyMs !== undefined) this.lastLatencyMs = latencyMs;
    return true;
  }

  // ----- commit helpers; each returns the delta to send -------------------

  commitCamera(): Delta {
    return { camera: this.cameraJson() };
  }

  dragLens(dxPx: number, dyPx: number): Delta {
    this.lens = {
      ...this.lens,
      enabled: true,
      center: [this.lens.center[0] + dxPx, this.lens.center[1] + dyPx],
    };
    return { lens: { enabled: true, center: this.lens.center } };
  }

  resizeLens(dRadiusPx: number): Delta {
    this.lens = {
      ...this.lens,
      radius: Math.max(this.lens.radius + dRadiusPx, 1),
    };
    return { lens: { radius: this.lens.radius } };
  }

  /** Object-lens depth scroll along the stored pick ray. */
  scrollDepth(ticks: number, step = 0.1): Delta {
    this.lens = { ...this.lens, depth: this.lens.depth + ticks * step };
    return { lens: { depth: this.lens.depth } };
  }

  setLod(lod: number): Delta {
    const v = Math.round(clamp(lod, 0, this.ranges.lodMax));
    this.params = { ...this.params, lod: v };
    return { params: { lod: v } };
  }

  setDelta(delta: number): Delta {
    const v = clamp(delta, 0, 1.1);
    this.params = { ...this.params, delta: v };
    return { params: { delta: v } };
  }

  setAccent(accent: number): Delta {
    const v = Math.max(accent, 1);
    this.params = { ...this.params, accent: v };
    return { params: { accent: v } };
  }

  setFaceAlpha(alpha: number): Delta {
    const v = clamp(alpha, 0, 1);
    this.params = { ...this.params, face_alpha: v };
    return { params: { face_alpha: v } };
  }

  setWBase(wBase: number | null): Delta {
    const v = wBase === null ? null : Math.max(wBase, 1e-6);
    this.params = { ...this.params, w_base: v };
    return { params: { w_base: v } };
  }

  setBackground(background: "black" | "white"): Delta {
    this.params = { ...this.params, background };
    return { params: { background } };
  }

  /** Returns null and leaves state untouched when the edit is invalid. */
  commitTransferFunction(points: TransferPoint[]): Delta | null {
    if (validate(points) !== null) return null;
    this.tfPoints = points.map((p) => ({ ...p }));
    return { params: { transfer_function: this.tfPoints } };
  }
}
