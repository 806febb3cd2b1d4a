"""Exception taxonomy shared across the package.

Everything raised on purpose derives from StorycastError so callers can fence
off domain failures from genuine bugs with one except clause. Errors that
carry structured payloads (validation reports, uncast character lists) expose
them as attributes; messages are for humans only.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .model import ValidationReport


class StorycastError(Exception):
    """Base class for every deliberate failure in this package."""


class BookSyntaxError(StorycastError):
    """Document is not well-formed (bad bytes or bad JSON).

    offset is a byte offset into the original document.
    """

    def __init__(self, offset: int, message: str):
        super().__init__(f"syntax error at byte {offset}: {message}")
        self.offset = offset
        self.message = message


class SchemaError(StorycastError):
    """Document is well-formed JSON but violates the format's shape.

    path points at the offending node, e.g. "characters[1].id".
    """

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


class InvalidBook(StorycastError):
    """A structurally complete book failed content validation."""

    def __init__(self, report: "ValidationReport"):
        lines = "; ".join(f"{v.code} at {v.locus}" for v in report)
        super().__init__(f"book failed validation: {lines or 'no detail'}")
        self.report = report


class ValidationError(InvalidBook):
    """Raised by the parser when a parsed document fails content validation."""


class UnknownCharacter(StorycastError):
    def __init__(self, character_id: str):
        super().__init__(f"character {character_id!r} is not declared in this book")
        self.character_id = character_id


class UnknownVoice(StorycastError):
    def __init__(self, voice_id: object):
        super().__init__(f"no voice with id {voice_id!r}; valid ids are 1..6")
        self.voice_id = voice_id


class VoiceInUse(StorycastError):
    def __init__(self, voice_id: int, held_by: str):
        super().__init__(
            f"voice {voice_id} is already assigned to {held_by!r} and reuse is disabled"
        )
        self.voice_id = voice_id
        self.held_by = held_by


class BookMismatch(StorycastError):
    def __init__(self, expected: str, got: str):
        super().__init__(f"cast sheet belongs to book {got!r}, expected {expected!r}")
        self.expected = expected
        self.got = got


class IncompleteCast(StorycastError):
    """Session cannot start until every speaking character has a reader."""

    def __init__(self, uncast: tuple[str, ...]):
        super().__init__(f"uncast speaking characters: {', '.join(uncast)}")
        self.uncast = uncast


class ControlNotAvailable(StorycastError):
    def __init__(self, control: str, phase: str):
        super().__init__(f"control {control!r} is not available in phase {phase}")
        self.control = control
        self.phase = phase


class StaleRequest(StorycastError):
    """Playback-finished signal for a playback that is no longer in flight.

    Harmless by contract: callers observe it and drop the signal.
    """

    def __init__(self, request_id: str):
        super().__init__(f"playback request {request_id!r} is not in flight")
        self.request_id = request_id


class TextTooLong(StorycastError):
    def __init__(self, length: int):
        super().__init__(f"text length must be 1..2000 characters, got {length}")
        self.length = length


class BackendUnavailable(StorycastError):
    def __init__(self, detail: str):
        super().__init__(f"synthesis backend unavailable: {detail}")
        self.detail = detail


class NotFound(StorycastError):
    def __init__(self, kind: str, key: str):
        super().__init__(f"{kind} {key!r} not found")
        self.kind = kind
        self.key = key


class StorageError(StorycastError):
    pass
