"""HTTP service: books, voices, sessions, events, audio.

Surface (all JSON unless noted):

    GET  /books                           catalog summaries
    POST /books                           import a raw book document
    GET  /books/{id}                      full canonical document
    GET  /voices                          the six voice profiles
    GET  /voices/{id}/preview             greeting WAV (audio/wav)
    POST /sessions {book_id}              create a session (casting state)
    PUT  /sessions/{id}/cast              replace the draft cast
    POST /sessions/{id}/advance           start, or move forward one turn
    POST /sessions/{id}/back              step the cursor back
    POST /sessions/{id}/replay            re-issue the cursor line
    POST /sessions/{id}/playback-finished {request_id}
    GET  /sessions/{id}                   current view
    GET  /sessions/{id}/events            SSE event stream (?after= or
                                          Last-Event-ID resumes past a seq)
    GET  /audio/{hash}                    cached WAV by content hash

Error bodies are {"code", "message", ...detail}: 400 for documents that do
not parse or validate, 404 for unknown things, 409 for ControlNotAvailable /
IncompleteCast / StaleRequest / SessionAlreadyStarted, 422 for semantically
bad request bodies (BookMismatch, UnknownCharacter, UnknownVoice, VoiceInUse),
503 when the synthesis backend is down. Malformed JSON bodies get FastAPI's
stock 422 shape instead; both are 4xx and carry enough to debug.

Every 2xx session mutation appends exactly one event to that session's
stream, seq numbered 1, 2, 3, ... with no gaps, and each event carries the
post-transition view so a subscriber needs no turn logic of its own:

    phase_changed     {view}                      create / back / finished
    controls_changed  {view, cast_report}         cast replaced
    directive_issued  {view, directive, audio_url} advance / replay
    error             {code, message}             post-commit persist failure

Commands on one session are serialized by a per-session lock; synthesis for
an agent turn happens before the transition commits, so a dead backend leaves
the session exactly where it was. Session records (cast, phase, engine event
log, api event history) are persisted after every mutation and lazily
restored after a restart, replaying the engine log to rebuild live state.
"""

from __future__ import annotations

import json
import logging
import queue
import threading
import uuid
from pathlib import Path
from typing import Iterator, Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response, StreamingResponse
from pydantic import BaseModel

from . import engine
from .bookfile import book_to_document
from .casting import (
    CastSheet,
    assign,
    cast_from_payload,
    cast_to_payload,
    preview_greeting,
    reader_from_payload,
    validate_cast,
)
from .engine import PlayAgent, ReadingSession, SessionPhase, TurnDirective
from .errors import (
    BackendUnavailable,
    BookSyntaxError,
    ControlNotAvailable,
    IncompleteCast,
    NotFound,
    SchemaError,
    StaleRequest,
    StorycastError,
    UnknownCharacter,
    UnknownVoice,
    ValidationError,
    VoiceInUse,
)
from .library import LibraryRoot, SessionRecord
from .model import BookScript
from .tts import SynthesisRequest, TtsGateway
from .voices import VOICE_IDS, VOICES

log = logging.getLogger(__name__)

SSE_KEEPALIVE_SECONDS = 15.0
_HASH_CHARS = set("0123456789abcdef")


class SessionHandle:
    """Runtime state for one session: lock, draft cast, engine value, stream."""

    def __init__(self, session_id: str, book: BookScript, cast: CastSheet):
        self.lock = threading.RLock()
        self.session_id = session_id
        self.book = book
        self.cast = cast
        self.session: Optional[ReadingSession] = None
        self.api_events: list[dict] = []
        self.subscribers: list[queue.SimpleQueue] = []

    @property
    def phase(self) -> SessionPhase:
        return self.session.phase if self.session else engine.NotStarted()

    def view_payload(self) -> dict:
        cast = self.session.cast if self.session else self.cast
        return engine.build_view(self.session_id, self.book, cast, self.phase).to_payload()


class Service:
    def __init__(
        self,
        library: LibraryRoot,
        gateway: TtsGateway,
        *,
        allow_voice_reuse: bool = False,
    ):
        self.library = library
        self.gateway = gateway
        self.allow_voice_reuse = allow_voice_reuse
        self._sessions: dict[str, SessionHandle] = {}
        self._sessions_lock = threading.Lock()

    # -- session registry ---------------------------------------------------

    def create_session(self, book_id: str) -> SessionHandle:
        book = self.library.get_book(book_id)
        session_id = uuid.uuid4().hex
        handle = SessionHandle(
            session_id, book, CastSheet.for_book(book, allow_voice_reuse=self.allow_voice_reuse)
        )
        with self._sessions_lock:
            self._sessions[session_id] = handle
        return handle

    def get_handle(self, session_id: str) -> SessionHandle:
        with self._sessions_lock:
            handle = self._sessions.get(session_id)
        if handle is not None:
            return handle
        return self._restore(session_id)

    def _restore(self, session_id: str) -> SessionHandle:
        record = self.library.load_session(session_id)  # NotFound propagates
        book = self.library.get_book(record.book_id)
        cast = cast_from_payload(book, record.cast)
        handle = SessionHandle(session_id, book, cast)
        if record.events:
            handle.session = engine.replay_session(
                book, cast, record.events, session_id=session_id
            )
        handle.api_events = [dict(e) for e in record.api_events]
        with self._sessions_lock:
            existing = self._sessions.get(session_id)
            if existing is not None:
                return existing
            self._sessions[session_id] = handle
        return handle

    # -- persistence and events ----------------------------------------------

    def record_for(self, handle: SessionHandle) -> SessionRecord:
        if handle.session is not None:
            cast_payload = cast_to_payload(handle.session.cast)
            phase_payload = engine.phase_to_payload(handle.session.phase)
            events = handle.session.events
            play_requests = handle.session.play_requests
        else:
            cast_payload = cast_to_payload(handle.cast)
            phase_payload = engine.phase_to_payload(engine.NotStarted())
            events = ()
            play_requests = 0
        return SessionRecord(
            session_id=handle.session_id,
            book_id=handle.book.id,
            cast=cast_payload,
            phase=phase_payload,
            play_requests=play_requests,
            events=events,
            api_events=tuple(handle.api_events),
        )

    def emit(self, handle: SessionHandle, kind: str, data: dict) -> None:
        """Append one event and persist; call with the handle lock held."""
        event = {"seq": len(handle.api_events) + 1, "kind": kind, "data": data}
        handle.api_events.append(event)
        try:
            self.library.save_session(self.record_for(handle))
        except StorycastError as e:
            log.error("session %s persisted state is stuck: %s", handle.session_id, e)
            failure = {
                "seq": len(handle.api_events) + 1,
                "kind": "error",
                "data": {"code": "StorageError", "message": str(e)},
            }
            handle.api_events.append(failure)
            for q in list(handle.subscribers):
                q.put(event)
                q.put(failure)
            return
        for q in list(handle.subscribers):
            q.put(event)


def _error(status: int, code: str, message: str, **extra) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message, **extra})


def _sse(event: dict) -> str:
    return f"id: {event['seq']}\nevent: {event['kind']}\ndata: {json.dumps(event)}\n\n"


class CreateSessionBody(BaseModel):
    book_id: str


class CastBody(BaseModel):
    entries: dict[str, dict]
    book_id: Optional[str] = None


class PlaybackBody(BaseModel):
    request_id: str


def create_app(
    library: LibraryRoot,
    gateway: TtsGateway,
    *,
    allow_voice_reuse: bool = False,
    ui_dir: Optional[Path] = None,
) -> FastAPI:
    service = Service(library, gateway, allow_voice_reuse=allow_voice_reuse)
    app = FastAPI(title="storycast", docs_url=None, redoc_url=None)
    app.state.service = service

    # -- books ------------------------------------------------------------

    @app.get("/books")
    def list_books() -> list[dict]:
        return [
            {
                "id": book.id,
                "title": book.title,
                "age_min": book.age_range.min_years,
                "age_max": book.age_range.max_years,
                "line_count": len(book.lines),
            }
            for book in service.library.list_books()
        ]

    @app.post("/books")
    async def import_book(request: Request):
        doc = await request.body()
        try:
            book_id = service.library.import_book(doc)
        except BookSyntaxError as e:
            return _error(400, "SyntaxError", e.message, offset=e.offset)
        except SchemaError as e:
            return _error(400, "SchemaError", e.message, path=e.path)
        except ValidationError as e:
            return _error(
                400,
                "ValidationError",
                "book failed validation",
                violations=[
                    {"code": v.code, "locus": v.locus, "message": v.message} for v in e.report
                ],
            )
        return JSONResponse(status_code=201, content={"id": book_id})

    @app.get("/books/{book_id}")
    def get_book(book_id: str):
        try:
            return book_to_document(service.library.get_book(book_id))
        except NotFound as e:
            return _error(404, "NotFound", str(e))

    # -- voices -------------------------------------------------------------

    @app.get("/voices")
    def list_voices() -> list[dict]:
        return [
            {"id": v.id, "display_name": v.display_name, "preview_url": f"/voices/{v.id}/preview"}
            for v in VOICES
        ]

    @app.get("/voices/{voice_id}/preview")
    def voice_preview(voice_id: int):
        if voice_id not in VOICE_IDS:
            return _error(404, "NotFound", f"no voice {voice_id}; valid ids are 1..6")
        try:
            asset = service.gateway.synthesize(preview_greeting(voice_id))
        except BackendUnavailable as e:
            return _error(503, "BackendUnavailable", str(e))
        return Response(content=asset.data, media_type="audio/wav")

    # -- sessions ------------------------------------------------------------

    @app.post("/sessions")
    def create_session(body: CreateSessionBody):
        try:
            handle = service.create_session(body.book_id)
        except NotFound as e:
            return _error(404, "NotFound", str(e))
        with handle.lock:
            view = handle.view_payload()
            service.emit(handle, "phase_changed", {"view": view})
        return JSONResponse(status_code=201, content={"session_id": handle.session_id, "view": view})

    def _with_handle(session_id: str):
        try:
            return service.get_handle(session_id)
        except NotFound:
            return None

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        handle = _with_handle(session_id)
        if handle is None:
            return _error(404, "NotFound", f"session {session_id!r} not found")
        with handle.lock:
            return handle.view_payload()

    @app.put("/sessions/{session_id}/cast")
    def put_cast(session_id: str, body: CastBody):
        handle = _with_handle(session_id)
        if handle is None:
            return _error(404, "NotFound", f"session {session_id!r} not found")
        with handle.lock:
            if handle.session is not None:
                return _error(
                    409, "SessionAlreadyStarted", "the cast is fixed once reading starts"
                )
            if body.book_id is not None and body.book_id != handle.book.id:
                return _error(
                    422,
                    "BookMismatch",
                    f"cast names book {body.book_id!r} but the session reads "
                    f"{handle.book.id!r}",
                )
            cast = CastSheet.for_book(handle.book, allow_voice_reuse=service.allow_voice_reuse)
            try:
                for character_id, raw_reader in body.entries.items():
                    try:
                        reader = reader_from_payload(raw_reader)
                    except ValueError as e:
                        return _error(422, "MalformedReader", str(e))
                    cast = assign(cast, character_id, reader)
            except UnknownCharacter as e:
                return _error(422, "UnknownCharacter", str(e))
            except UnknownVoice as e:
                return _error(422, "UnknownVoice", str(e))
            except VoiceInUse as e:
                return _error(422, "VoiceInUse", str(e))
            handle.cast = cast
            report = validate_cast(handle.book, cast)
            view = handle.view_payload()
            cast_report = {"complete": report.complete, "uncast": list(report.uncast)}
            service.emit(handle, "controls_changed", {"view": view, "cast_report": cast_report})
            return {"cast_report": cast_report, "view": view}

    def _commit_directive(
        handle: SessionHandle, session: ReadingSession, directive: TurnDirective
    ):
        """Synthesize if needed, then commit and emit. Lock must be held."""
        audio_url = None
        if isinstance(directive, PlayAgent):
            asset = service.gateway.synthesize(
                SynthesisRequest(voice=directive.voice, text=directive.text)
            )
            audio_url = f"/audio/{asset.content_hash}"
        handle.session = session
        view = handle.view_payload()
        data = {
            "view": view,
            "directive": engine.directive_to_payload(directive),
            "audio_url": audio_url,
        }
        service.emit(handle, "directive_issued", data)
        return {"view": view, "directive": data["directive"], "audio_url": audio_url}

    @app.post("/sessions/{session_id}/advance")
    def advance(session_id: str):
        handle = _with_handle(session_id)
        if handle is None:
            return _error(404, "NotFound", f"session {session_id!r} not found")
        with handle.lock:
            try:
                base = handle.session
                if base is None:
                    base = engine.start_session(
                        handle.book, handle.cast, session_id=handle.session_id
                    )
                session, directive = engine.advance(base)
            except IncompleteCast as e:
                return _error(409, "IncompleteCast", str(e), uncast=list(e.uncast))
            except ControlNotAvailable as e:
                return _error(409, "ControlNotAvailable", str(e), control=e.control, phase=e.phase)
            try:
                return _commit_directive(handle, session, directive)
            except BackendUnavailable as e:
                return _error(503, "BackendUnavailable", str(e))

    @app.post("/sessions/{session_id}/replay")
    def replay(session_id: str):
        handle = _with_handle(session_id)
        if handle is None:
            return _error(404, "NotFound", f"session {session_id!r} not found")
        with handle.lock:
            if handle.session is None:
                return _error(
                    409, "ControlNotAvailable", "nothing to replay yet",
                    control="replay", phase="not_started",
                )
            try:
                session, directive = engine.replay_current(handle.session)
            except ControlNotAvailable as e:
                return _error(409, "ControlNotAvailable", str(e), control=e.control, phase=e.phase)
            try:
                return _commit_directive(handle, session, directive)
            except BackendUnavailable as e:
                return _error(503, "BackendUnavailable", str(e))

    @app.post("/sessions/{session_id}/back")
    def back(session_id: str):
        handle = _with_handle(session_id)
        if handle is None:
            return _error(404, "NotFound", f"session {session_id!r} not found")
        with handle.lock:
            if handle.session is None:
                return _error(
                    409, "ControlNotAvailable", "the session has not started",
                    control="back", phase="not_started",
                )
            try:
                handle.session = engine.step_back(handle.session)
            except ControlNotAvailable as e:
                return _error(409, "ControlNotAvailable", str(e), control=e.control, phase=e.phase)
            view = handle.view_payload()
            service.emit(handle, "phase_changed", {"view": view})
            return {"view": view}

    @app.post("/sessions/{session_id}/playback-finished")
    def finished(session_id: str, body: PlaybackBody):
        handle = _with_handle(session_id)
        if handle is None:
            return _error(404, "NotFound", f"session {session_id!r} not found")
        with handle.lock:
            if handle.session is None:
                return _error(409, "StaleRequest", "no playback is in flight")
            try:
                handle.session = engine.playback_finished(handle.session, body.request_id)
            except StaleRequest as e:
                return _error(409, "StaleRequest", str(e))
            view = handle.view_payload()
            service.emit(handle, "phase_changed", {"view": view})
            return {"view": view}

    # -- event stream ---------------------------------------------------------

    @app.get("/sessions/{session_id}/events")
    def events(session_id: str, request: Request, after: Optional[int] = None):
        handle = _with_handle(session_id)
        if handle is None:
            return _error(404, "NotFound", f"session {session_id!r} not found")
        if after is None:
            last_id = request.headers.get("last-event-id", "")
            after = int(last_id) if last_id.isdigit() else 0
        subscription: queue.SimpleQueue = queue.SimpleQueue()
        with handle.lock:
            backlog = [e for e in handle.api_events if e["seq"] > after]
            handle.subscribers.append(subscription)

        def stream() -> Iterator[str]:
            try:
                yield ": stream open\n\n"
                for event in backlog:
                    yield _sse(event)
                while True:
                    try:
                        event = subscription.get(timeout=SSE_KEEPALIVE_SECONDS)
                    except queue.Empty:
                        yield ": keepalive\n\n"
                        continue
                    yield _sse(event)
            finally:
                with handle.lock:
                    if subscription in handle.subscribers:
                        handle.subscribers.remove(subscription)

        return StreamingResponse(
            stream(),
            media_type="text/event-stream",
            headers={"cache-control": "no-cache", "x-accel-buffering": "no"},
        )

    # -- audio ----------------------------------------------------------------

    @app.get("/audio/{content_hash}")
    def audio(content_hash: str):
        if len(content_hash) != 64 or not set(content_hash) <= _HASH_CHARS:
            return _error(404, "NotFound", "no such audio asset")
        asset = service.gateway.load_asset(content_hash)
        if asset is None:
            return _error(404, "NotFound", "no such audio asset")
        return Response(content=asset.data, media_type="audio/wav")

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
