/** Thin HTTP client for the inspector service's JSON endpoints. */
import type { LensJson, SessionInfo } from "./protocol.js";

export interface LodLevel {
  level: number;
  edges: number[];
  segments: number[][];
}

export interface LodLines {
  level_count: number;
  levels: LodLevel[];
}

export interface PickResult {
  hit: boolean;
  lens: LensJson;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const err = await resp.json();
        detail = typeof err.detail === "string" ? err.detail : JSON.stringify(err.detail);
      } catch {
        /* non-JSON error body */
      }
      throw new Error(`${resp.status}: ${detail}`);
    }
    return (await resp.json()) as T;
  }

  /** Create a session from a synthetic source spec or inline mesh text. */
  createSession(body: { source?: string; mesh_text?: string; metric?: string }):
    Promise<SessionInfo> {
    return this.post("/sessions", body);
  }

  async getLod(sessionId: string): Promise<LodLines> {
    const resp = await this.fetchImpl(`${this.baseUrl}/sessions/${sessionId}/lod`);
    if (!resp.ok) throw new Error(`${resp.status}: ${resp.statusText}`);
    return (await resp.json()) as LodLines;
  }

  /** Server-side surface pick for the object-space lens. */
  pick(
    sessionId: string,
    body: { px: number; py: number; width: number; height: number;
            world_radius?: number; depth?: number },
  ): Promise<PickResult> {
    return this.post(`/sessions/${sessionId}/pick`, body);
  }

  streamUrl(sessionId: string): string {
    const ws = this.baseUrl.replace(/^http/, "ws");
    return `${ws}/sessions/${sessionId}/stream`;
  }
}
