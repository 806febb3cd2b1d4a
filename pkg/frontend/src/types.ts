/** Wire types, mirroring the server's JSON payloads field for field. */

export type Reader =
  | { kind: "agent"; voice: number }
  | { kind: "adult" }
  | { kind: "child" };

export interface BookSummary {
  id: string;
  title: string;
  age_min: number;
  age_max: number;
  line_count: number;
}

export interface CharacterDoc {
  id: string;
  name: string;
  portrait?: string;
}

export interface BookDocument {
  format_version: number;
  id: string;
  title: string;
  age_min: number;
  age_max: number;
  characters: CharacterDoc[];
  pages: { page: number; lines: { character: string; text: string }[] }[];
}

export interface VoiceProfile {
  id: number;
  display_name: string;
  preview_url: string;
}

export interface ViewLine {
  index: number;
  page: number;
  character_id: string;
  character_name: string;
  text: string;
}

export interface Phase {
  kind: "not_started" | "idle" | "agent_speaking" | "awaiting_human" | "completed";
  cursor?: number;
  request_id?: string;
}

/** Control names are the server's vocabulary; buttons render these verbatim. */
export type Control = "start" | "next" | "back" | "replay" | "finish";

export interface SessionView {
  session_id: string;
  book_id: string;
  title: string;
  lines: ViewLine[];
  badges: (Reader | null)[];
  highlight: { line: number; color: string } | null;
  controls: Control[];
  phase: Phase;
  cast_complete: boolean;
}

export type Directive =
  | { kind: "play_agent"; line: number; voice: number; text: string; request_id: string }
  | { kind: "await_human"; line: number; reader: Reader }
  | { kind: "session_complete" };

export interface CastReport {
  complete: boolean;
  uncast: string[];
}

/** One frame of the session event stream; seq is gap-free from 1. */
export interface ApiEvent {
  seq: number;
  kind: "phase_changed" | "controls_changed" | "directive_issued" | "error";
  data: {
    view?: SessionView;
    directive?: Directive;
    audio_url?: string | null;
    cast_report?: CastReport;
    code?: string;
    message?: string;
  };
}

export interface ApiErrorBody {
  code: string;
  message: string;
  [extra: string]: unknown;
}
