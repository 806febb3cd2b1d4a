import type { ApiClient } from "./client";
import { ApiCallError } from "./client";
import type { AudioPort } from "./audio";
import type { ApiEvent, Control, Reader, SessionView } from "./types";
import type { StreamStatus } from "./events";
import { humanAvatar, mateSprite } from "./avatars";

export interface ReadingHandlers {
  onHome: () => void;
}

const CONTROL_LABELS: Record<Control, string> = {
  start: "Start",
  next: "Next",
  back: "Back",
  replay: "Replay",
  finish: "Finish",
};

/**
 * Reading screen. Deliberately dumb: every render comes from a view the
 * server sent (the initial snapshot or an event), and the control bar shows
 * exactly the server's advertised controls, nothing inferred. Agent clips
 * auto-play off directive events and confirm with playback-finished.
 */
export class ReadingScreen {
  private view: SessionView | null = null;
  private busy = false;
  private playToken = 0;

  constructor(
    private readonly root: HTMLElement,
    private readonly client: ApiClient,
    private readonly audio: AudioPort,
    private readonly sessionId: string,
    private readonly handlers: ReadingHandlers,
  ) {}

  mount(view: SessionView): void {
    this.root.innerHTML = `
      <div class="reading">
        <header>
          <button class="home" type="button">Home</button>
          <h1 class="title"></h1>
        </header>
        <p class="banner stream" hidden></p>
        <p class="banner error" hidden></p>
        <ol class="script"></ol>
        <footer class="controls"></footer>
      </div>`;
    this.root.querySelector<HTMLButtonElement>("button.home")!.onclick = () => this.leave();
    this.render(view);
  }

  /** Adopt one stream event; the view inside is rendered verbatim. */
  handleEvent(event: ApiEvent): void {
    if (event.kind === "error") {
      this.showError(event.data.message ?? "the server reported a storage problem");
      return;
    }
    if (event.data.view) this.render(event.data.view);
    if (
      event.kind === "directive_issued" &&
      event.data.directive?.kind === "play_agent" &&
      event.data.audio_url
    ) {
      void this.playClip(event.data.audio_url, event.data.directive.request_id);
    }
  }

  setStreamStatus(status: StreamStatus): void {
    const banner = this.root.querySelector<HTMLElement>(".banner.stream");
    if (!banner) return;
    if (status === "connected" || status === "closed") {
      banner.hidden = true;
    } else if (status === "reconnecting") {
      banner.hidden = false;
      banner.textContent = "Connection lost; reconnecting…";
    } else {
      banner.hidden = false;
      banner.textContent = "Some updates were missed; the view has caught up.";
    }
  }

  private leave(): void {
    this.playToken++; // drop any pending finished-confirmation
    this.audio.stop();
    this.handlers.onHome();
  }

  private async playClip(audioUrl: string, requestId: string): Promise<void> {
    const token = ++this.playToken;
    await this.audio.play(this.client.url(audioUrl));
    if (token !== this.playToken) return; // superseded by replay/back/home
    try {
      await this.client.playbackFinished(this.sessionId, requestId);
    } catch (e) {
      // A stale confirmation is expected after races; anything else surfaces.
      if (!(e instanceof ApiCallError && e.body.code === "StaleRequest")) {
        this.showError("the server could not be reached");
      }
    }
  }

  /**
   * One in-flight mutation per session: extra clicks are ignored, not
   * queued. Buttons stay enabled so the control bar always mirrors the
   * server's ControlSet exactly; a racing click just answers 409.
   */
  private async mutate(action: () => Promise<unknown>): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    try {
      await action();
      this.showError(null);
    } catch (e) {
      this.showError(e instanceof ApiCallError ? e.body.message : "the server could not be reached");
    } finally {
      this.busy = false;
    }
  }

  private act(control: Control): void {
    const id = this.sessionId;
    if (control === "finish") {
      this.leave();
    } else if (control === "back") {
      this.playToken++;
      this.audio.stop();
      void this.mutate(() => this.client.back(id));
    } else if (control === "replay") {
      void this.mutate(() => this.client.replay(id));
    } else {
      void this.mutate(() => this.client.advance(id)); // start and next
    }
  }

  private showError(message: string | null): void {
    const banner = this.root.querySelector<HTMLElement>(".banner.error");
    if (!banner) return;
    banner.hidden = message === null;
    banner.textContent = message ?? "";
  }

  private render(view: SessionView): void {
    this.view = view;
    this.root.querySelector<HTMLElement>("h1.title")!.textContent = view.title;
    this.renderScript(view);
    this.renderControls(view);
  }

  private renderScript(view: SessionView): void {
    const list = this.root.querySelector<HTMLOListElement>("ol.script")!;
    list.innerHTML = "";
    const highlighted = view.highlight?.line ?? null;
    const waiting = view.phase.kind === "awaiting_human";
    for (const line of view.lines) {
      const row = document.createElement("li");
      row.className = "line";
      row.dataset.index = String(line.index);
      const badge = view.badges[line.index];
      if (highlighted === line.index) {
        row.classList.add(`highlight-${view.highlight!.color}`);
        if (waiting) row.classList.add("your-turn");
      }
      row.innerHTML = `
        <span class="portrait">${badge ? readerArt(badge) : ""}</span>
        <span class="badge">${badge ? readerTag(badge) : "uncast"}</span>
        <span class="speaker">${escapeHtml(line.character_name)}</span>
        <span class="text">${escapeHtml(line.text)}</span>
        ${highlighted === line.index && waiting ? '<span class="turn-note">Your turn!</span>' : ""}`;
      list.appendChild(row);
    }
    if (view.phase.kind === "completed") {
      const done = document.createElement("li");
      done.className = "the-end";
      done.textContent = "The end. Lovely reading!";
      list.appendChild(done);
    }
    const current = list.querySelector<HTMLElement>(`[data-index="${highlighted}"]`);
    current?.scrollIntoView?.({ block: "nearest" });
  }

  private renderControls(view: SessionView): void {
    const bar = this.root.querySelector<HTMLElement>("footer.controls")!;
    bar.innerHTML = "";
    for (const control of view.controls) {
      const button = document.createElement("button");
      button.type = "button";
      button.dataset.control = control;
      button.textContent = CONTROL_LABELS[control] ?? control;
      button.onclick = () => this.act(control);
      bar.appendChild(button);
    }
  }

  get currentView(): SessionView | null {
    return this.view;
  }

  /** Controls whose buttons are present and enabled, in render order. */
  enabledControls(): string[] {
    return [...this.root.querySelectorAll<HTMLButtonElement>(".controls button")]
      .filter((b) => !b.disabled)
      .map((b) => b.dataset.control!);
  }
}

function readerArt(reader: Reader): string {
  return reader.kind === "agent" ? mateSprite(reader.voice) : humanAvatar(reader.kind);
}

function readerTag(reader: Reader): string {
  return reader.kind === "agent" ? `Mate ${reader.voice}` : reader.kind;
}

function escapeHtml(text: string): string {
  return text.replace(/[&<>"']/g, (ch) => `&#${ch.charCodeAt(0)};`);
}
