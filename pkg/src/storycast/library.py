"""Plain-file storage for books, sessions, and the audio cache.

Layout under one root directory:

    books/<book-id>.book.json        canonical book documents
    sessions/<session-id>.session.json
    cache/                           audio assets (owned by the tts gateway)

No database. Every write lands in a temp file first and is renamed into
place, so readers never observe a half-written file. Session event logs are
append-only: overwriting a stored session with a log that does not extend the
previous one is refused, which turns lost-update races into loud errors.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path

from .bookfile import parse_book, serialize_book
from .engine import EventRecord, ReadingSession, phase_to_payload
from .errors import NotFound, StorageError, StorycastError
from .casting import cast_to_payload
from .model import ID_PATTERN, BookScript

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SessionRecord:
    """A session in storage form: primitives plus the event log.

    api_events is the service-level event stream history (seq-numbered
    envelopes); it rides along so stream resumption survives a restart.
    """

    session_id: str
    book_id: str
    cast: dict
    phase: dict
    play_requests: int
    events: tuple[EventRecord, ...]
    api_events: tuple[dict, ...] = ()

    @classmethod
    def from_session(cls, session: ReadingSession) -> "SessionRecord":
        return cls(
            session_id=session.id,
            book_id=session.book.id,
            cast=cast_to_payload(session.cast),
            phase=phase_to_payload(session.phase),
            play_requests=session.play_requests,
            events=session.events,
        )


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = Path(f"{path}.tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


class LibraryRoot:
    def __init__(self, base: Path | str):
        self.base = Path(base)
        self.books_dir = self.base / "books"
        self.sessions_dir = self.base / "sessions"
        self.cache_dir = self.base / "cache"
        for d in (self.books_dir, self.sessions_dir, self.cache_dir):
            d.mkdir(parents=True, exist_ok=True)

    # -- books ---------------------------------------------------------------

    def import_book(self, doc: bytes) -> str:
        """Validate a document and store it canonically. Returns the book id."""
        book = parse_book(doc)
        _atomic_write(self.books_dir / f"{book.id}.book.json", serialize_book(book))
        return book.id

    def get_book(self, book_id: str) -> BookScript:
        path = self.books_dir / f"{book_id}.book.json"
        if not ID_PATTERN.fullmatch(book_id) or not path.exists():
            raise NotFound("book", book_id)
        return parse_book(path.read_bytes())

    def list_books(self) -> tuple[BookScript, ...]:
        """All readable books, sorted by id. Corrupt files are skipped loudly."""
        books = []
        for path in sorted(self.books_dir.glob("*.book.json")):
            try:
                books.append(parse_book(path.read_bytes()))
            except StorycastError as e:
                log.warning("skipping unreadable book file %s: %s", path.name, e)
        return tuple(books)

    # -- sessions ------------------------------------------------------------

    def save_session(self, record: SessionRecord) -> None:
        if not ID_PATTERN.fullmatch(record.session_id):
            raise StorageError(f"session id {record.session_id!r} is not storable")
        path = self.sessions_dir / f"{record.session_id}.session.json"
        if path.exists():
            previous = self.load_session(record.session_id)
            if previous.book_id != record.book_id:
                raise StorageError(
                    f"session {record.session_id!r} already belongs to book "
                    f"{previous.book_id!r}"
                )
            if record.events[: len(previous.events)] != previous.events:
                raise StorageError(
                    f"refusing to truncate or rewrite the event log of session "
                    f"{record.session_id!r}"
                )
        payload = {
            "session_id": record.session_id,
            "book_id": record.book_id,
            "cast": record.cast,
            "phase": record.phase,
            "play_requests": record.play_requests,
            "events": [
                {"ts": e.ts, "name": e.name, "payload": dict(e.payload)} for e in record.events
            ],
            "api_events": list(record.api_events),
        }
        _atomic_write(path, (json.dumps(payload, ensure_ascii=False, indent=2) + "\n").encode())

    def load_session(self, session_id: str) -> SessionRecord:
        path = self.sessions_dir / f"{session_id}.session.json"
        if not ID_PATTERN.fullmatch(session_id) or not path.exists():
            raise NotFound("session", session_id)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
            return SessionRecord(
                session_id=raw["session_id"],
                book_id=raw["book_id"],
                cast=raw["cast"],
                phase=raw["phase"],
                play_requests=raw["play_requests"],
                events=tuple(
                    EventRecord(e["ts"], e["name"], e["payload"]) for e in raw["events"]
                ),
                api_events=tuple(raw.get("api_events", [])),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise StorageError(f"session file {path.name} is corrupt: {e}") from e

    def list_sessions(self) -> tuple[str, ...]:
        return tuple(
            sorted(path.name[: -len(".session.json")] for path in
                   self.sessions_dir.glob("*.session.json"))
        )


def record_session(library: LibraryRoot, session: ReadingSession) -> None:
    library.save_session(SessionRecord.from_session(session))
