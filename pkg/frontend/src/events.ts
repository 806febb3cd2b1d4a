import type { ApiEvent } from "./types";

export type StreamStatus = "connected" | "reconnecting" | "gap" | "closed";

export interface StreamHandlers {
  onEvent: (event: ApiEvent) => void;
  onStatus?: (status: StreamStatus) => void;
}

const RETRY_DELAY_MS = 500;

/**
 * Session event subscription over a streamed fetch. Keeps the last seen
 * sequence number and resumes with ?after= on every reconnect, so a dropped
 * connection never loses events. A sequence jump on a live connection is
 * reported as a "gap" (the UI shows a stale-view banner) before adopting
 * the newer state.
 */
export class EventStream {
  private lastSeq = 0;
  private stopped = false;
  private controller: AbortController | null = null;

  constructor(
    private readonly baseUrl: string,
    private readonly sessionId: string,
    private readonly handlers: StreamHandlers,
    private readonly fetchFn: typeof fetch = fetch.bind(globalThis),
  ) {}

  start(): void {
    this.stopped = false;
    void this.loop();
  }

  stop(): void {
    this.stopped = true;
    this.controller?.abort();
    this.handlers.onStatus?.("closed");
  }

  get lastSequence(): number {
    return this.lastSeq;
  }

  private async loop(): Promise<void> {
    while (!this.stopped) {
      try {
        await this.consumeOnce();
      } catch {
        // fall through to retry
      }
      if (this.stopped) return;
      this.handlers.onStatus?.("reconnecting");
      await sleep(RETRY_DELAY_MS);
    }
  }

  private async consumeOnce(): Promise<void> {
    this.controller = new AbortController();
    const url = `${this.baseUrl}/sessions/${this.sessionId}/events?after=${this.lastSeq}`;
    const response = await this.fetchFn(url, { signal: this.controller.signal });
    if (!response.ok || !response.body) {
      throw new Error(`event stream answered ${response.status}`);
    }
    this.handlers.onStatus?.("connected");
    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    while (!this.stopped) {
      const { done, value } = await reader.read();
      if (done) return;
      buffer += decoder.decode(value, { stream: true });
      let cut;
      while ((cut = buffer.indexOf("\n\n")) >= 0) {
        const frame = buffer.slice(0, cut);
        buffer = buffer.slice(cut + 2);
        this.handleFrame(frame);
      }
    }
  }

  private handleFrame(frame: string): void {
    let data = "";
    for (const line of frame.split("\n")) {
      if (line.startsWith("data:")) data += line.slice(5).trimStart();
    }
    if (!data) return; // comment / keepalive frame
    const event = JSON.parse(data) as ApiEvent;
    if (event.seq <= this.lastSeq) return; // replayed backlog overlap
    if (event.seq > this.lastSeq + 1) this.handlers.onStatus?.("gap");
    this.lastSeq = event.seq;
    this.handlers.onEvent(event);
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
