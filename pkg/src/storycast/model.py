"""Story script model: characters, lines, and content validation.

A BookScript is a flat, ordered list of spoken lines grouped into pages by a
page number carried on each line. Values are immutable; nothing in this module
does IO. Construction is deliberately permissive so that bad data can be
represented and then described by validate_book, which reports violations as
data instead of raising.

Validation rules enforced here:

- at least one character and at least one line
- book id and character ids match ``[a-z0-9_-]{1,64}`` (ids end up in file
  names and URLs, so the charset is conservative on purpose)
- character ids are unique; display names are 1..128 characters
- line indices are exactly 0..N-1 in order (the global reading order)
- page numbers start at 1 or above and never decrease
- every line's speaker is a declared character
- line text is 1..2000 characters
- age range is sane (0 <= min <= max)
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .errors import UnknownCharacter

CharacterId = str

ID_PATTERN = re.compile(r"[a-z0-9_-]{1,64}")
MAX_DISPLAY_NAME = 128
MAX_LINE_TEXT = 2000


@dataclass(frozen=True)
class Character:
    """A declared speaker. portrait_ref names an art asset, if any."""

    id: CharacterId
    display_name: str
    portrait_ref: Optional[str] = None


@dataclass(frozen=True)
class AgeRange:
    min_years: int
    max_years: int


@dataclass(frozen=True)
class Line:
    """One spoken line. index is the global 0-based reading position."""

    index: int
    page: int
    character_id: CharacterId
    text: str


@dataclass(frozen=True)
class BookScript:
    id: str
    title: str
    age_range: AgeRange
    characters: tuple[Character, ...]
    lines: tuple[Line, ...]


@dataclass(frozen=True)
class Violation:
    """One validation finding. locus is a path-ish hint like "lines[3]"."""

    code: str
    locus: str
    message: str


ValidationReport = tuple[Violation, ...]


def validate_book(book: BookScript) -> ValidationReport:
    """Check every content rule and return all violations found.

    Returns an empty tuple for a valid book. Never raises; a report is data.
    """
    found: list[Violation] = []

    def bad(code: str, locus: str, message: str) -> None:
        found.append(Violation(code, locus, message))

    if not ID_PATTERN.fullmatch(book.id):
        bad("InvalidBookId", "id", "book id must match [a-z0-9_-]{1,64}")
    if not book.title:
        bad("EmptyTitle", "title", "title must be non-empty")

    age = book.age_range
    if age.min_years < 0 or age.max_years < age.min_years:
        bad(
            "InvalidAgeRange",
            "age_range",
            f"need 0 <= min <= max, got {age.min_years}..{age.max_years}",
        )

    if not book.characters:
        bad("NoCharacters", "characters", "a book needs at least one character")
    seen_ids: set[str] = set()
    for i, ch in enumerate(book.characters):
        if not ID_PATTERN.fullmatch(ch.id):
            bad(
                "InvalidCharacterId",
                f"characters[{i}].id",
                f"character id {ch.id!r} must match [a-z0-9_-]{{1,64}}",
            )
        if ch.id in seen_ids:
            bad(
                "DuplicateCharacterId",
                f"characters[{i}].id",
                f"character id {ch.id!r} declared more than once",
            )
        seen_ids.add(ch.id)
        if not 1 <= len(ch.display_name) <= MAX_DISPLAY_NAME:
            bad(
                "InvalidDisplayName",
                f"characters[{i}].name",
                f"display name must be 1..{MAX_DISPLAY_NAME} characters",
            )
        if ch.portrait_ref is not None and not ch.portrait_ref:
            bad(
                "InvalidPortraitRef",
                f"characters[{i}].portrait",
                "portrait reference, when present, must be non-empty",
            )

    if not book.lines:
        bad("NoLines", "pages", "a book needs at least one line")
    declared = {ch.id for ch in book.characters}
    prev_page = None
    for i, line in enumerate(book.lines):
        if line.index != i:
            bad(
                "NonContiguousIndex",
                f"lines[{i}]",
                f"expected index {i}, got {line.index}",
            )
        if line.page < 1:
            bad("InvalidPage", f"lines[{i}]", f"page must be >= 1, got {line.page}")
        elif prev_page is not None and line.page < prev_page:
            bad(
                "NonMonotonicPage",
                f"lines[{i}]",
                f"page {line.page} after page {prev_page}",
            )
        prev_page = line.page
        if line.character_id not in declared:
            bad(
                "UndeclaredSpeaker",
                f"lines[{i}]",
                f"speaker {line.character_id!r} is not a declared character",
            )
        if not line.text:
            bad("EmptyLineText", f"lines[{i}]", "line text must be non-empty")
        elif len(line.text) > MAX_LINE_TEXT:
            bad(
                "LineTextTooLong",
                f"lines[{i}]",
                f"line text must be <= {MAX_LINE_TEXT} characters, got {len(line.text)}",
            )

    return tuple(found)


def lines_for(book: BookScript, character_id: CharacterId) -> tuple[Line, ...]:
    """All lines spoken by one declared character, in reading order."""
    if character_id not in {ch.id for ch in book.characters}:
        raise UnknownCharacter(character_id)
    return tuple(line for line in book.lines if line.character_id == character_id)


def speaking_character_ids(book: BookScript) -> frozenset[CharacterId]:
    """Characters that actually have lines; silent ones never block a cast."""
    return frozenset(line.character_id for line in book.lines)


def character_by_id(book: BookScript, character_id: CharacterId) -> Character:
    for ch in book.characters:
        if ch.id == character_id:
            return ch
    raise UnknownCharacter(character_id)
