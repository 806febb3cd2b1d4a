/**
 * Playback is behind a port so tests can substitute a silent sink and so
 * the reading screen can serialize clips without knowing the media stack.
 */
export interface AudioPort {
  /** Resolves when the clip finishes (or is cut off by stop/a newer play). */
  play(url: string): Promise<void>;
  stop(): void;
}

export class HtmlAudioPlayer implements AudioPort {
  private element: HTMLAudioElement | null = null;

  play(url: string): Promise<void> {
    this.stop();
    const element = new Audio(url);
    this.element = element;
    return new Promise((resolve) => {
      element.onended = () => resolve();
      element.onerror = () => resolve(); // a broken clip must not wedge the turn
      element.play().catch(() => resolve());
    });
  }

  stop(): void {
    if (this.element) {
      this.element.pause();
      this.element.onended = null;
      this.element = null;
    }
  }
}
