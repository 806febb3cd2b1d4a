"""Casting: who reads which character.

A CastSheet maps declared characters to readers. A reader is either one of
the six synthetic voices or a human (adult or child). By default a synthetic
voice can be held by at most one character per cast; an explicit
allow_voice_reuse flag lifts that for books with more characters than voices.

Sheets are immutable; assign/unassign return updated copies. Only characters
that actually speak count toward completeness, so a book may declare silent
extras without blocking the session.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Union

from .errors import BookMismatch, UnknownCharacter, UnknownVoice, VoiceInUse
from .model import BookScript, CharacterId, speaking_character_ids
from .tts import SynthesisRequest
from .voices import VOICE_IDS, VoiceId, greeting_text


@dataclass(frozen=True)
class AgentVoice:
    voice_id: VoiceId


@dataclass(frozen=True)
class HumanAdult:
    pass


@dataclass(frozen=True)
class HumanChild:
    pass


Reader = Union[AgentVoice, HumanAdult, HumanChild]


@dataclass(frozen=True)
class CastReport:
    complete: bool
    uncast: tuple[CharacterId, ...]


@dataclass(frozen=True)
class CastSheet:
    """Assignment state for one book.

    character_ids snapshots the book's declared ids at creation so membership
    checks never need the book itself. entries is treated as read-only; use
    assign/unassign.
    """

    book_id: str
    character_ids: frozenset[CharacterId]
    entries: Mapping[CharacterId, Reader] = field(default_factory=dict)
    allow_voice_reuse: bool = False

    @classmethod
    def for_book(cls, book: BookScript, *, allow_voice_reuse: bool = False) -> "CastSheet":
        return cls(
            book_id=book.id,
            character_ids=frozenset(ch.id for ch in book.characters),
            entries={},
            allow_voice_reuse=allow_voice_reuse,
        )


def assign(cast: CastSheet, character_id: CharacterId, reader: Reader) -> CastSheet:
    """Give a character a reader, replacing any existing entry for it."""
    if character_id not in cast.character_ids:
        raise UnknownCharacter(character_id)
    if isinstance(reader, AgentVoice):
        if reader.voice_id not in VOICE_IDS:
            raise UnknownVoice(reader.voice_id)
        if not cast.allow_voice_reuse:
            for other, existing in cast.entries.items():
                if (
                    other != character_id
                    and isinstance(existing, AgentVoice)
                    and existing.voice_id == reader.voice_id
                ):
                    raise VoiceInUse(reader.voice_id, other)
    return replace(cast, entries={**cast.entries, character_id: reader})


def unassign(cast: CastSheet, character_id: CharacterId) -> CastSheet:
    """Remove a character's entry; removing a missing entry is a no-op."""
    if character_id not in cast.character_ids:
        raise UnknownCharacter(character_id)
    entries = {k: v for k, v in cast.entries.items() if k != character_id}
    return replace(cast, entries=entries)


def validate_cast(book: BookScript, cast: CastSheet) -> CastReport:
    """Completeness check: every speaking character must have a reader."""
    if cast.book_id != book.id:
        raise BookMismatch(expected=book.id, got=cast.book_id)
    speaking = speaking_character_ids(book)
    uncast = tuple(
        ch.id for ch in book.characters if ch.id in speaking and ch.id not in cast.entries
    )
    return CastReport(complete=not uncast, uncast=uncast)


def preview_greeting(voice_id: VoiceId) -> SynthesisRequest:
    """The synthesis request behind a voice's self-introduction button."""
    return SynthesisRequest(voice=voice_id, text=greeting_text(voice_id))


# -- wire/persistence form -------------------------------------------------
# {"kind": "agent", "voice": 3} | {"kind": "adult"} | {"kind": "child"}


def reader_to_payload(reader: Reader) -> dict:
    if isinstance(reader, AgentVoice):
        return {"kind": "agent", "voice": reader.voice_id}
    if isinstance(reader, HumanAdult):
        return {"kind": "adult"}
    if isinstance(reader, HumanChild):
        return {"kind": "child"}
    raise ValueError(f"not a reader: {reader!r}")


def reader_from_payload(value: object) -> Reader:
    if not isinstance(value, dict) or "kind" not in value:
        raise ValueError(f"malformed reader payload: {value!r}")
    kind = value["kind"]
    if kind == "agent":
        voice = value.get("voice")
        if set(value) != {"kind", "voice"} or not isinstance(voice, int) or isinstance(voice, bool):
            raise ValueError(f"malformed agent reader payload: {value!r}")
        return AgentVoice(voice)
    if kind in ("adult", "child"):
        if set(value) != {"kind"}:
            raise ValueError(f"malformed reader payload: {value!r}")
        return HumanAdult() if kind == "adult" else HumanChild()
    raise ValueError(f"unknown reader kind: {kind!r}")


def cast_to_payload(cast: CastSheet) -> dict:
    return {
        "book_id": cast.book_id,
        "allow_voice_reuse": cast.allow_voice_reuse,
        "entries": [
            {"character": character, "reader": reader_to_payload(reader)}
            for character, reader in sorted(cast.entries.items())
        ],
    }


def cast_from_payload(book: BookScript, value: dict) -> CastSheet:
    cast = CastSheet.for_book(book, allow_voice_reuse=bool(value.get("allow_voice_reuse")))
    if value.get("book_id") != book.id:
        raise BookMismatch(expected=book.id, got=str(value.get("book_id")))
    entries = value.get("entries", [])
    if not isinstance(entries, list):
        raise ValueError(f"malformed cast payload entries: {entries!r}")
    for entry in entries:
        if not isinstance(entry, dict) or set(entry) != {"character", "reader"}:
            raise ValueError(f"malformed cast entry: {entry!r}")
        cast = assign(cast, entry["character"], reader_from_payload(entry["reader"]))
    return cast
