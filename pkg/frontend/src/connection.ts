/**
 * Stream connection: sends parameter deltas, receives metadata + PNG
 * frames, and survives reconnects without losing the session.
 *
 * Client-side mirror of the server's latest-request-wins scheduling:
 * at most one request is in flight; edits made meanwhile are coalesced
 * into a single pending delta. While disconnected, deltas are queued
 * for up to one second and then dropped (the next connect renders the
 * authoritative server state anyway).
 */
import {
  decodeFrame,
  parseStreamMessage,
  type Delta,
  type FrameMeta,
  type StreamError,
} from "./protocol.js";

/** The subset of the WebSocket API the connection needs (injectable). */
export interface SocketLike {
  binaryType: string;
  onopen: (() => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  send(data: string): void;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ConnectionEvents {
  onFrame?: (meta: FrameMeta, png: Uint8Array, latencyMs: number) => void;
  onError?: (err: StreamError) => void;
  onStatus?: (status: "connecting" | "open" | "closed") => void;
}

export interface ConnectionOptions {
  /** How long a queued delta survives a disconnect, in ms. */
  queueTtlMs?: number;
  now?: () => number;
}

function mergeDeltas(base: Delta, next: Delta): Delta {
  return {
    ...base,
    ...next,
    params: { ...base.params, ...next.params },
    lens: { ...base.lens, ...next.lens },
    camera: { ...base.camera, ...next.camera },
  };
}

export class Connection {
  private socket: SocketLike | null = null;
  private pending: Delta | null = null;
  private pendingSince = 0;
  private inflightId: number | null = null;
  private sentAt = new Map<number, number>();
  private lastMeta: FrameMeta | null = null;
  private lastAppliedFrameId = 0;
  private requestCounter = 0;
  private readonly queueTtlMs: number;
  private readonly now: () => number;

  constructor(
    private readonly url: string,
    private readonly makeSocket: SocketFactory,
    private readonly events: ConnectionEvents = {},
    options: ConnectionOptions = {},
  ) {
    this.queueTtlMs = options.queueTtlMs ?? 1000;
    this.now = options.now ?? (() => Date.now());
  }

  get isOpen(): boolean {
    return this.socket !== null;
  }

  connect(): void {
    this.events.onStatus?.("connecting");
    const socket = this.makeSocket(this.url);
    socket.binaryType = "arraybuffer";
    socket.onopen = () => {
      this.socket = socket;
      this.events.onStatus?.("open");
      this.flush();
    };
    socket.onclose = () => {
      if (this.socket === socket) this.socket = null;
      this.inflightId = null;
      this.events.onStatus?.("closed");
    };
    socket.onerror = () => socket.onclose?.();
    socket.onmessage = (ev) => this.handleMessage(ev.data);
  }

  disconnect(): void {
    const socket = this.socket;
    this.socket = null;
    this.inflightId = null;
    socket?.close();
  }

  /**
   * Queue a delta for sending. Returns the request id it will travel
   * under (deltas coalesced into one send share an id).
   */
  send(delta: Delta): number {
    if (this.pending === null) {
      this.pending = { ...delta };
      this.pendingSince = this.now();
      this.pending.request_id = ++this.requestCounter;
    } else {
      const id = this.pending.request_id!;
      this.pending = mergeDeltas(this.pending, delta);
      this.pending.request_id = id;
    }
    const requestId = this.pending.request_id!;
    this.flush();
    return requestId;
  }

  private flush(): void {
    if (this.pending === null) return;
    if (this.now() - this.pendingSince > this.queueTtlMs) {
      // stale queued edit; the next frame shows authoritative state anyway
      this.pending = null;
      return;
    }
    if (this.socket === null) return;
    if (this.inflightId !== null) return; // server renders latest state anyway
    const delta = this.pending;
    this.pending = null;
    this.inflightId = delta.request_id!;
    this.sentAt.set(this.inflightId, this.now());
    this.socket.send(JSON.stringify(delta));
  }

  private handleMessage(data: unknown): void {
    if (typeof data === "string") {
      const msg = parseStreamMessage(data);
      if (msg.type === "error") {
        this.inflightId = null;
        this.events.onError?.(msg);
        this.flush();
        return;
      }
      this.lastMeta = msg;
      return;
    }
    if (!(data instanceof ArrayBuffer)) return;
    const { header, payload } = decodeFrame(data);
    const meta = this.lastMeta;
    if (meta === null || meta.frame_id !== header.frameId) return;
    this.lastMeta = null;
    if (header.frameId <= this.lastAppliedFrameId) return; // stale frame
    this.lastAppliedFrameId = header.frameId;
    let latency = 0;
    if (meta.request_id !== null && this.sentAt.has(meta.request_id)) {
      latency = this.now() - this.sentAt.get(meta.request_id)!;
      this.sentAt.delete(meta.request_id);
    }
    if (meta.request_id !== null && this.inflightId !== null
        && meta.request_id >= this.inflightId) {
      this.inflightId = null;
    }
    this.events.onFrame?.(meta, payload, latency);
    this.flush();
  }
}
