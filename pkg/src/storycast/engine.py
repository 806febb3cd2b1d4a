"""Parent-paced turn engine for a cast book.

A session walks a cursor over the book's global line order. The cursor always
names the next line to perform; performing it hands the turn to a synthetic
voice (AgentSpeaking, pending a playback-finished signal carrying a matching
request id) or to a human reader (AwaitingHuman, resolved by the next
advance). All pacing comes from outside; the engine never advances on its own.

Phases and the controls they advertise:

    not_started              start
    idle (cursor 0)          next, replay
    idle (cursor > 0)        next, back, replay
    awaiting_human           next, back, replay
    agent_speaking           (none; input is deferred until playback resolves)
    completed                back, finish

An operation succeeds exactly when its control is advertised; everything else
raises ControlNotAvailable. playback_finished is a system signal rather than a
control: it succeeds only against the in-flight request id, and a superseded
id raises StaleRequest, which callers drop. "finish" never reaches the engine;
it is navigation for the caller.

Sessions are immutable values. Operations return new sessions (plus a
directive where one is issued) and append to an event log whose timestamps
strictly increase; replaying a log through replay_session rebuilds the exact
session, request ids included, because ids are minted from a per-session
counter rather than from randomness.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Mapping, Optional, Union

from .casting import AgentVoice, CastSheet, Reader, reader_to_payload, validate_cast
from .errors import (
    ControlNotAvailable,
    IncompleteCast,
    InvalidBook,
    StaleRequest,
    StorageError,
)
from .model import BookScript, validate_book
from .voices import VoiceId

START = "start"
NEXT = "next"
BACK = "back"
REPLAY = "replay"
FINISH = "finish"


# -- phases ------------------------------------------------------------------


@dataclass(frozen=True)
class NotStarted:
    pass


@dataclass(frozen=True)
class Idle:
    cursor: int


@dataclass(frozen=True)
class AgentSpeaking:
    cursor: int
    request_id: str


@dataclass(frozen=True)
class AwaitingHuman:
    cursor: int


@dataclass(frozen=True)
class Completed:
    pass


SessionPhase = Union[NotStarted, Idle, AgentSpeaking, AwaitingHuman, Completed]


# -- directives ----------------------------------------------------------------


@dataclass(frozen=True)
class PlayAgent:
    line_index: int
    voice: VoiceId
    text: str
    request_id: str


@dataclass(frozen=True)
class AwaitHuman:
    line_index: int
    reader: Reader


@dataclass(frozen=True)
class SessionComplete:
    pass


TurnDirective = Union[PlayAgent, AwaitHuman, SessionComplete]


@dataclass(frozen=True)
class EventRecord:
    ts: int  # microseconds; strictly increasing within a session
    name: str
    payload: Mapping


@dataclass(frozen=True)
class ReadingSession:
    id: str
    book: BookScript
    cast: CastSheet
    phase: SessionPhase
    events: tuple[EventRecord, ...]
    play_requests: int  # how many agent playback requests were ever issued

    @property
    def highlight(self) -> Optional[int]:
        if isinstance(self.phase, (AgentSpeaking, AwaitingHuman)):
            return self.phase.cursor
        return None


def _now_us() -> int:
    return time.time_ns() // 1000


def _logged(
    session: ReadingSession, name: str, payload: Mapping, now: Optional[int]
) -> tuple[EventRecord, ...]:
    ts = _now_us() if now is None else now
    if session.events:
        ts = max(ts, session.events[-1].ts + 1)
    return session.events + (EventRecord(ts, name, payload),)


# -- lifecycle -----------------------------------------------------------------


def start_session(
    book: BookScript,
    cast: CastSheet,
    *,
    session_id: str,
    now: Optional[int] = None,
) -> ReadingSession:
    """Create a session at not_started. The cast must already be complete."""
    report = validate_book(book)
    if report:
        raise InvalidBook(report)
    cast_report = validate_cast(book, cast)  # raises BookMismatch on foreign casts
    if not cast_report.complete:
        raise IncompleteCast(cast_report.uncast)
    session = ReadingSession(
        id=session_id,
        book=book,
        cast=cast,
        phase=NotStarted(),
        events=(),
        play_requests=0,
    )
    events = _logged(
        session, "session_created", {"book_id": book.id, "line_count": len(book.lines)}, now
    )
    return replace(session, events=events)


# -- controls ------------------------------------------------------------------


def available_controls(session: ReadingSession) -> frozenset[str]:
    phase = session.phase
    if isinstance(phase, NotStarted):
        return frozenset({START})
    if isinstance(phase, Idle):
        if phase.cursor == 0:
            return frozenset({NEXT, REPLAY})
        return frozenset({NEXT, BACK, REPLAY})
    if isinstance(phase, AwaitingHuman):
        return frozenset({NEXT, BACK, REPLAY})
    if isinstance(phase, AgentSpeaking):
        return frozenset()
    return frozenset({BACK, FINISH})


def _perform(
    session: ReadingSession, index: int, event_name: str, now: Optional[int]
) -> tuple[ReadingSession, TurnDirective]:
    line = session.book.lines[index]
    reader = session.cast.entries[line.character_id]
    directive: TurnDirective
    if isinstance(reader, AgentVoice):
        request_id = f"rq-{session.play_requests + 1:06d}"
        directive = PlayAgent(index, reader.voice_id, line.text, request_id)
        session = replace(
            session,
            phase=AgentSpeaking(index, request_id),
            play_requests=session.play_requests + 1,
        )
    else:
        directive = AwaitHuman(index, reader)
        session = replace(session, phase=AwaitingHuman(index))
    events = _logged(session, event_name, {"directive": directive_to_payload(directive)}, now)
    return replace(session, events=events), directive


def advance(
    session: ReadingSession, *, now: Optional[int] = None
) -> tuple[ReadingSession, TurnDirective]:
    """Start the book, or move forward one turn. The parent's main button."""
    phase = session.phase
    if isinstance(phase, NotStarted):
        return _perform(session, 0, "advanced", now)
    if isinstance(phase, Idle):
        return _perform(session, phase.cursor, "advanced", now)
    if isinstance(phase, AwaitingHuman):
        # The human turn is done; the next line plays immediately.
        if phase.cursor + 1 < len(session.book.lines):
            return _perform(session, phase.cursor + 1, "advanced", now)
        directive = SessionComplete()
        session = replace(session, phase=Completed())
        events = _logged(
            session, "advanced", {"directive": directive_to_payload(directive)}, now
        )
        return replace(session, events=events), directive
    raise ControlNotAvailable(NEXT, phase_name(phase))


def playback_finished(
    session: ReadingSession, request_id: str, *, now: Optional[int] = None
) -> ReadingSession:
    """Resolve the in-flight agent playback; stale ids raise StaleRequest."""
    phase = session.phase
    if not isinstance(phase, AgentSpeaking) or phase.request_id != request_id:
        raise StaleRequest(request_id)
    if phase.cursor + 1 < len(session.book.lines):
        next_phase: SessionPhase = Idle(phase.cursor + 1)
    else:
        next_phase = Completed()
    session = replace(session, phase=next_phase)
    events = _logged(session, "playback_finished", {"request_id": request_id}, now)
    return replace(session, events=events)


def step_back(session: ReadingSession, *, now: Optional[int] = None) -> ReadingSession:
    """Move the cursor one line back and sit idle there."""
    phase = session.phase
    if BACK not in available_controls(session):
        raise ControlNotAvailable(BACK, phase_name(phase))
    if isinstance(phase, Completed):
        cursor = len(session.book.lines) - 1
    else:
        assert isinstance(phase, (Idle, AwaitingHuman))
        cursor = max(0, phase.cursor - 1)
    session = replace(session, phase=Idle(cursor))
    events = _logged(session, "stepped_back", {"cursor": cursor}, now)
    return replace(session, events=events)


def replay_current(
    session: ReadingSession, *, now: Optional[int] = None
) -> tuple[ReadingSession, TurnDirective]:
    """Re-issue the cursor line's directive without moving the cursor."""
    phase = session.phase
    if REPLAY not in available_controls(session):
        raise ControlNotAvailable(REPLAY, phase_name(phase))
    assert isinstance(phase, (Idle, AwaitingHuman))
    return _perform(session, phase.cursor, "replayed", now)


# -- views -----------------------------------------------------------------


@dataclass(frozen=True)
class SessionView:
    """Everything a dumb client renders; no turn logic needed on top."""

    session_id: str
    book_id: str
    title: str
    lines: tuple[dict, ...]
    badges: tuple[Optional[Reader], ...]
    highlight: Optional[int]
    controls: frozenset[str]
    phase: SessionPhase
    cast_complete: bool

    def to_payload(self) -> dict:
        return {
            "session_id": self.session_id,
            "book_id": self.book_id,
            "title": self.title,
            "lines": list(self.lines),
            "badges": [
                reader_to_payload(reader) if reader is not None else None
                for reader in self.badges
            ],
            "highlight": (
                {"line": self.highlight, "color": "green"} if self.highlight is not None else None
            ),
            "controls": sorted(self.controls),
            "phase": phase_to_payload(self.phase),
            "cast_complete": self.cast_complete,
        }


def build_view(
    session_id: str, book: BookScript, cast: CastSheet, phase: SessionPhase
) -> SessionView:
    names = {ch.id: ch.display_name for ch in book.characters}
    lines = tuple(
        {
            "index": line.index,
            "page": line.page,
            "character_id": line.character_id,
            "character_name": names[line.character_id],
            "text": line.text,
        }
        for line in book.lines
    )
    badges = tuple(cast.entries.get(line.character_id) for line in book.lines)
    highlight = phase.cursor if isinstance(phase, (AgentSpeaking, AwaitingHuman)) else None
    controls = available_controls(
        ReadingSession(session_id, book, cast, phase, events=(), play_requests=0)
    )
    return SessionView(
        session_id=session_id,
        book_id=book.id,
        title=book.title,
        lines=lines,
        badges=badges,
        highlight=highlight,
        controls=controls,
        phase=phase,
        cast_complete=validate_cast(book, cast).complete,
    )


def current_view(session: ReadingSession) -> SessionView:
    return build_view(session.id, session.book, session.cast, session.phase)


# -- payload forms ------------------------------------------------------------


def phase_name(phase: SessionPhase) -> str:
    return {
        NotStarted: "not_started",
        Idle: "idle",
        AgentSpeaking: "agent_speaking",
        AwaitingHuman: "awaiting_human",
        Completed: "completed",
    }[type(phase)]


def phase_to_payload(phase: SessionPhase) -> dict:
    payload: dict = {"kind": phase_name(phase)}
    if isinstance(phase, (Idle, AgentSpeaking, AwaitingHuman)):
        payload["cursor"] = phase.cursor
    if isinstance(phase, AgentSpeaking):
        payload["request_id"] = phase.request_id
    return payload


def phase_from_payload(value: dict) -> SessionPhase:
    kind = value.get("kind")
    if kind == "not_started":
        return NotStarted()
    if kind == "idle":
        return Idle(value["cursor"])
    if kind == "agent_speaking":
        return AgentSpeaking(value["cursor"], value["request_id"])
    if kind == "awaiting_human":
        return AwaitingHuman(value["cursor"])
    if kind == "completed":
        return Completed()
    raise ValueError(f"unknown phase kind: {kind!r}")


def directive_to_payload(directive: TurnDirective) -> dict:
    if isinstance(directive, PlayAgent):
        return {
            "kind": "play_agent",
            "line": directive.line_index,
            "voice": directive.voice,
            "text": directive.text,
            "request_id": directive.request_id,
        }
    if isinstance(directive, AwaitHuman):
        return {
            "kind": "await_human",
            "line": directive.line_index,
            "reader": reader_to_payload(directive.reader),
        }
    return {"kind": "session_complete"}


# -- replay --------------------------------------------------------------------


def replay_session(
    book: BookScript, cast: CastSheet, events: tuple[EventRecord, ...], *, session_id: str
) -> ReadingSession:
    """Rebuild a session by re-running its event log from the top.

    Deterministic by construction: request ids come from the session's own
    counter and timestamps are taken from the recorded events, so the result
    matches the original session field for field.
    """
    if not events or events[0].name != "session_created":
        raise StorageError("event log must begin with session_created")
    session = start_session(book, cast, session_id=session_id, now=events[0].ts)
    for record in events[1:]:
        if record.name == "advanced":
            session, _ = advance(session, now=record.ts)
        elif record.name == "replayed":
            session, _ = replay_current(session, now=record.ts)
        elif record.name == "stepped_back":
            session = step_back(session, now=record.ts)
        elif record.name == "playback_finished":
            session = playback_finished(session, record.payload["request_id"], now=record.ts)
        else:
            raise StorageError(f"unknown event {record.name!r} in log")
    return session
