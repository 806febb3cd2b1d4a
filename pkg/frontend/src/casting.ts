import type { ApiClient } from "./client";
import { ApiCallError } from "./client";
import type { AudioPort } from "./audio";
import type { BookDocument, CastReport, Reader, VoiceProfile } from "./types";
import { humanAvatar, mateSprite } from "./avatars";

export interface CastingHandlers {
  onProceed: () => void;
  onHome: () => void;
}

/**
 * Character-assignment screen. Left panel: the six mates plus the two human
 * readers. Right panel: one drop box per character. Every assignment sends
 * the full draft to the server; the returned cast report is the only
 * authority on completeness (the proceed button never guesses).
 */
export class CastingScreen {
  private draft = new Map<string, Reader>();
  private report: CastReport | null = null;
  private dragging: Reader | null = null;
  private selected: Reader | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly client: ApiClient,
    private readonly audio: AudioPort,
    private readonly book: BookDocument,
    private readonly voices: VoiceProfile[],
    private readonly sessionId: string,
    private readonly handlers: CastingHandlers,
  ) {}

  mount(): void {
    this.root.innerHTML = `
      <div class="casting">
        <header>
          <button class="home" type="button">Home</button>
          <h1>${escapeHtml(this.book.title)}</h1>
          <button class="proceed" type="button" disabled>Start reading</button>
        </header>
        <p class="banner instructions">
          Drag a reader onto each character, or pick a reader and then a
          character. Press play to hear a mate's voice first.
        </p>
        <p class="banner error" hidden></p>
        <div class="panels">
          <ul class="readers"></ul>
          <ul class="characters"></ul>
        </div>
      </div>`;
    this.root.querySelector<HTMLButtonElement>("button.home")!.onclick = () =>
      this.handlers.onHome();
    this.root.querySelector<HTMLButtonElement>("button.proceed")!.onclick = () =>
      this.handlers.onProceed();
    this.renderReaders();
    this.renderCharacters();
    this.refresh();
  }

  private renderReaders(): void {
    const list = this.root.querySelector<HTMLUListElement>("ul.readers")!;
    const choices: { reader: Reader; label: string; art: string; voice?: number }[] = [
      ...this.voices.map((v) => ({
        reader: { kind: "agent", voice: v.id } as Reader,
        label: v.display_name,
        art: mateSprite(v.id),
        voice: v.id,
      })),
      { reader: { kind: "adult" }, label: "Adult", art: humanAvatar("adult") },
      { reader: { kind: "child" }, label: "Child", art: humanAvatar("child") },
    ];
    for (const choice of choices) {
      const chip = document.createElement("li");
      chip.className = "chip";
      chip.draggable = true;
      chip.tabIndex = 0;
      chip.setAttribute("role", "button");
      chip.dataset.reader = JSON.stringify(choice.reader);
      chip.innerHTML = `<span class="art">${choice.art}</span><span class="label">${escapeHtml(choice.label)}</span>`;
      if (choice.voice !== undefined) {
        const play = document.createElement("button");
        play.type = "button";
        play.className = "preview";
        play.dataset.voice = String(choice.voice);
        play.textContent = "▶";
        play.title = `Hear ${choice.label}`;
        play.onclick = (e) => {
          e.stopPropagation();
          void this.audio.play(this.client.url(`/voices/${choice.voice}/preview`));
        };
        chip.appendChild(play);
      }
      chip.addEventListener("dragstart", (e) => {
        this.dragging = choice.reader;
        e.dataTransfer?.setData("application/json", JSON.stringify(choice.reader));
      });
      chip.addEventListener("dragend", () => {
        this.dragging = null;
      });
      const select = () => this.toggleSelect(choice.reader, chip);
      chip.addEventListener("click", select);
      chip.addEventListener("keydown", (e) => {
        if (e.key === "Enter" || e.key === " ") {
          e.preventDefault();
          select();
        }
      });
      list.appendChild(chip);
    }
  }

  private renderCharacters(): void {
    const list = this.root.querySelector<HTMLUListElement>("ul.characters")!;
    for (const character of this.book.characters) {
      const box = document.createElement("li");
      box.className = "box";
      box.tabIndex = 0;
      box.dataset.character = character.id;
      box.innerHTML = `
        <span class="slot"></span>
        <span class="name">${escapeHtml(character.name)}</span>
        <button class="clear" type="button" title="Remove reader" hidden>✕</button>`;
      box.addEventListener("dragover", (e) => e.preventDefault());
      box.addEventListener("drop", (e) => {
        e.preventDefault();
        const raw = e.dataTransfer?.getData("application/json");
        const reader = raw ? (JSON.parse(raw) as Reader) : this.dragging;
        if (reader) void this.assign(character.id, reader);
        this.dragging = null;
      });
      box.addEventListener("click", () => {
        if (this.selected) void this.assign(character.id, this.selected);
      });
      box.addEventListener("keydown", (e) => {
        if (e.key === "Enter" && this.selected) {
          e.preventDefault();
          void this.assign(character.id, this.selected);
        }
        if (e.key === "Delete" || e.key === "Backspace") {
          e.preventDefault();
          void this.unassign(character.id);
        }
      });
      box.querySelector<HTMLButtonElement>("button.clear")!.onclick = (e) => {
        e.stopPropagation();
        void this.unassign(character.id);
      };
      list.appendChild(box);
    }
  }

  private toggleSelect(reader: Reader, chip: HTMLElement): void {
    const already = this.selected && JSON.stringify(this.selected) === JSON.stringify(reader);
    this.selected = already ? null : reader;
    for (const el of this.root.querySelectorAll(".chip")) {
      el.setAttribute("aria-pressed", "false");
    }
    if (!already) chip.setAttribute("aria-pressed", "true");
  }

  private async assign(characterId: string, reader: Reader): Promise<void> {
    const candidate = new Map(this.draft);
    candidate.set(characterId, reader);
    await this.push(candidate);
  }

  private async unassign(characterId: string): Promise<void> {
    if (!this.draft.has(characterId)) return;
    const candidate = new Map(this.draft);
    candidate.delete(characterId);
    await this.push(candidate);
  }

  /** Send a candidate draft; commit it only if the server accepts. */
  private async push(candidate: Map<string, Reader>): Promise<void> {
    try {
      const result = await this.client.putCast(
        this.sessionId,
        Object.fromEntries(candidate),
      );
      this.draft = candidate;
      this.report = result.cast_report;
      this.showError(null);
    } catch (e) {
      if (e instanceof ApiCallError) {
        this.showError(e.body.message);
      } else {
        this.showError("the server could not be reached");
      }
    }
    this.refresh();
  }

  private showError(message: string | null): void {
    const banner = this.root.querySelector<HTMLElement>(".banner.error")!;
    banner.hidden = message === null;
    banner.textContent = message ?? "";
  }

  /** Speaking characters, derived from the page script. */
  private speakers(): Set<string> {
    const out = new Set<string>();
    for (const page of this.book.pages) {
      for (const line of page.lines) out.add(line.character);
    }
    return out;
  }

  private refresh(): void {
    const uncast = this.report
      ? new Set(this.report.uncast)
      : new Set([...this.speakers()].filter((id) => !this.draft.has(id)));
    for (const box of this.root.querySelectorAll<HTMLElement>(".box")) {
      const id = box.dataset.character!;
      const reader = this.draft.get(id);
      const slot = box.querySelector<HTMLElement>(".slot")!;
      const clear = box.querySelector<HTMLButtonElement>("button.clear")!;
      box.classList.toggle("uncast", uncast.has(id));
      box.classList.toggle("filled", reader !== undefined);
      clear.hidden = reader === undefined;
      if (reader === undefined) {
        slot.innerHTML = "";
      } else if (reader.kind === "agent") {
        slot.innerHTML = mateSprite(reader.voice);
      } else {
        slot.innerHTML = humanAvatar(reader.kind);
      }
    }
    this.root.querySelector<HTMLButtonElement>("button.proceed")!.disabled =
      this.report?.complete !== true;
  }
}

function escapeHtml(text: string): string {
  return text.replace(/[&<>"']/g, (ch) => `&#${ch.charCodeAt(0)};`);
}
