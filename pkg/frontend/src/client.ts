import type {
  ApiErrorBody,
  BookDocument,
  BookSummary,
  CastReport,
  Directive,
  Reader,
  SessionView,
  VoiceProfile,
} from "./types";

/** A non-2xx answer. code/message come from the server's error body. */
export class ApiCallError extends Error {
  constructor(
    readonly status: number,
    readonly body: ApiErrorBody,
  ) {
    super(`${body.code}: ${body.message}`);
    this.name = "ApiCallError";
  }
}

export interface StepResult {
  view: SessionView;
  directive: Directive;
  audio_url: string | null;
}

/**
 * Thin typed wrapper over the server's REST surface. fetchFn is injectable
 * so tests can run against a scripted transport.
 */
export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch.bind(globalThis),
  ) {}

  url(path: string): string {
    return this.baseUrl + path;
  }

  private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(this.url(path), {
      method,
      headers: body === undefined ? {} : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json();
    if (!response.ok) {
      throw new ApiCallError(response.status, payload as ApiErrorBody);
    }
    return payload as T;
  }

  listBooks(): Promise<BookSummary[]> {
    return this.call("GET", "/books");
  }

  getBook(bookId: string): Promise<BookDocument> {
    return this.call("GET", `/books/${bookId}`);
  }

  listVoices(): Promise<VoiceProfile[]> {
    return this.call("GET", "/voices");
  }

  createSession(bookId: string): Promise<{ session_id: string; view: SessionView }> {
    return this.call("POST", "/sessions", { book_id: bookId });
  }

  getView(sessionId: string): Promise<SessionView> {
    return this.call("GET", `/sessions/${sessionId}`);
  }

  putCast(
    sessionId: string,
    entries: Record<string, Reader>,
  ): Promise<{ cast_report: CastReport; view: SessionView }> {
    return this.call("PUT", `/sessions/${sessionId}/cast`, { entries });
  }

  advance(sessionId: string): Promise<StepResult> {
    return this.call("POST", `/sessions/${sessionId}/advance`);
  }

  replay(sessionId: string): Promise<StepResult> {
    return this.call("POST", `/sessions/${sessionId}/replay`);
  }

  back(sessionId: string): Promise<{ view: SessionView }> {
    return this.call("POST", `/sessions/${sessionId}/back`);
  }

  playbackFinished(sessionId: string, requestId: string): Promise<{ view: SessionView }> {
    return this.call("POST", `/sessions/${sessionId}/playback-finished`, {
      request_id: requestId,
    });
  }
}
