/**
 * Wire types shared with the inspector service.
 *
 * Binary frames are a 16-byte little-endian header (frame id u64,
 * payload length u64) followed by PNG bytes; each binary frame is
 * preceded by a JSON text message with the frame metadata.
 */

export interface TransferPoint {
  x: number;
  rgb: [number, number, number];
  alpha: number;
}

export interface RenderParamsJson {
  width: number;
  height: number;
  w_base: number | null;
  delta: number;
  lod: number;
  accent: number;
  face_alpha: number;
  transfer_function: TransferPoint[];
  background: "black" | "white";
  [key: string]: unknown;
}

export interface LensJson {
  enabled: boolean;
  mode: "screen" | "object";
  center: [number, number];
  radius: number;
  anchor: [number, number, number];
  ray: [number, number, number];
  depth: number;
  world_radius: number;
}

export interface CameraJson {
  eye: [number, number, number];
  target: [number, number, number];
  up: [number, number, number];
  fov_y_deg: number;
  near: number;
  far: number;
}

export interface SessionInfo {
  session_id: string;
  mesh: {
    cells: number;
    vertices: number;
    edges: number;
    sheets: number;
    [key: string]: unknown;
  };
  lod: { level_count: number; [key: string]: unknown };
  params: RenderParamsJson;
  lens: LensJson;
  camera: CameraJson;
}

export interface FrameMeta {
  type: "frame";
  frame_id: number;
  request_id: number | null;
  width: number;
  height: number;
  params: RenderParamsJson;
  lens: LensJson;
  camera: CameraJson;
  timings_s: Record<string, number>;
}

export interface StreamError {
  type: "error";
  error: string;
  required_capacity?: number;
}

export type StreamMessage = FrameMeta | StreamError;

/** Partial state update sent over the stream. */
export interface Delta {
  request_id?: number;
  params?: Partial<RenderParamsJson>;
  lens?: Partial<LensJson>;
  camera?: Partial<CameraJson>;
}

export const FRAME_HEADER_BYTES = 16;

export interface FrameHeader {
  frameId: number;
  payloadLength: number;
}

/** Decode the 16-byte frame header. Throws on truncated input. */
export function decodeFrameHeader(buffer: ArrayBuffer): FrameHeader {
  if (buffer.byteLength < FRAME_HEADER_BYTES) {
    throw new Error(
      `frame header needs ${FRAME_HEADER_BYTES} bytes, got ${buffer.byteLength}`,
    );
  }
  const view = new DataView(buffer);
  const frameId = view.getBigUint64(0, true);
  const payloadLength = view.getBigUint64(8, true);
  if (frameId > Number.MAX_SAFE_INTEGER || payloadLength > Number.MAX_SAFE_INTEGER) {
    throw new Error("frame header value exceeds safe integer range");
  }
  return { frameId: Number(frameId), payloadLength: Number(payloadLength) };
}

/** Split a binary stream message into header + PNG payload. */
export function decodeFrame(buffer: ArrayBuffer): {
  header: FrameHeader;
  payload: Uint8Array;
} {
  const header = decodeFrameHeader(buffer);
  const payload = new Uint8Array(buffer, FRAME_HEADER_BYTES);
  if (payload.byteLength !== header.payloadLength) {
    throw new Error(
      `payload length mismatch: header says ${header.payloadLength}, ` +
        `got ${payload.byteLength}`,
    );
  }
  return { header, payload };
}

export function parseStreamMessage(text: string): StreamMessage {
  const obj = JSON.parse(text);
  if (obj.type !== "frame" && obj.type !== "error") {
    throw new Error(`unknown stream message type ${String(obj.type)}`);
  }
  return obj as StreamMessage;
}
