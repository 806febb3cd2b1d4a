import { ApiClient } from "./client";
import type { AudioPort } from "./audio";
import { CastingScreen } from "./casting";
import { EventStream } from "./events";
import { ReadingScreen } from "./reading";
import type { BookDocument, SessionView, VoiceProfile } from "./types";

export type ScreenState =
  | { kind: "home" }
  | { kind: "casting"; book: BookDocument; sessionId: string }
  | { kind: "reading"; sessionId: string };

/**
 * Screen router. A session is created on entering the casting screen; the
 * reading screen then renders that same session, fed by its event stream.
 */
export class App {
  state: ScreenState = { kind: "home" };
  reading: ReadingScreen | null = null;
  private stream: EventStream | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly client: ApiClient,
    private readonly audio: AudioPort,
    private readonly fetchFn: typeof fetch = fetch.bind(globalThis),
  ) {}

  async start(): Promise<void> {
    await this.showHome();
  }

  async showHome(): Promise<void> {
    this.teardownStream();
    this.state = { kind: "home" };
    let books;
    try {
      books = await this.client.listBooks();
    } catch {
      this.root.innerHTML = `<p class="banner error">The library is not reachable.</p>`;
      return;
    }
    this.root.innerHTML = `
      <div class="home">
        <h1>Pick a story</h1>
        <ul class="books"></ul>
      </div>`;
    const list = this.root.querySelector<HTMLUListElement>("ul.books")!;
    for (const book of books) {
      const card = document.createElement("li");
      card.className = "book-card";
      card.dataset.book = book.id;
      card.innerHTML = `
        <button type="button">
          <span class="title">${escapeHtml(book.title)}</span>
          <span class="meta">ages ${book.age_min}–${book.age_max} · ${book.line_count} lines</span>
        </button>`;
      card.querySelector("button")!.onclick = () => void this.enterCasting(book.id);
      list.appendChild(card);
    }
  }

  async enterCasting(bookId: string): Promise<void> {
    const [book, voices, created] = await Promise.all([
      this.client.getBook(bookId),
      this.client.listVoices(),
      this.client.createSession(bookId),
    ]);
    this.state = { kind: "casting", book, sessionId: created.session_id };
    this.mountCasting(book, voices, created.session_id);
  }

  private mountCasting(book: BookDocument, voices: VoiceProfile[], sessionId: string): void {
    const screen = new CastingScreen(this.root, this.client, this.audio, book, voices, sessionId, {
      onProceed: () => void this.enterReading(sessionId),
      onHome: () => void this.showHome(),
    });
    screen.mount();
  }

  async enterReading(sessionId: string): Promise<void> {
    const view: SessionView = await this.client.getView(sessionId);
    this.state = { kind: "reading", sessionId };
    const screen = new ReadingScreen(this.root, this.client, this.audio, sessionId, {
      onHome: () => void this.showHome(),
    });
    screen.mount(view);
    this.reading = screen;
    this.stream = new EventStream(
      this.client.baseUrl,
      sessionId,
      {
        onEvent: (event) => screen.handleEvent(event),
        onStatus: (status) => screen.setStreamStatus(status),
      },
      this.fetchFn,
    );
    this.stream.start();
  }

  private teardownStream(): void {
    this.stream?.stop();
    this.stream = null;
    this.reading = null;
  }
}

function escapeHtml(text: string): string {
  return text.replace(/[&<>"']/g, (ch) => `&#${ch.charCodeAt(0)};`);
}
