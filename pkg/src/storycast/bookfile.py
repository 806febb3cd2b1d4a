"""Canonical ``.book.json`` reading and writing.

Format, version 1. A document is a UTF-8 JSON object with exactly these
fields, in this order:

    format_version   int, always 1
    id               string, [a-z0-9_-]{1,64}
    title            string
    age_min          int
    age_max          int
    characters       [{"id": str, "name": str, "portrait"?: str}, ...]
    pages            [{"page": int, "lines": [{"character": str, "text": str}, ...]}, ...]

Unknown fields anywhere are rejected; this format fails loudly instead of
guessing. ``portrait`` is the only optional key and is omitted (not null) when
absent. Global line indices are not stored: they are derived from document
order, page by page, top to bottom.

Canonical serialization is byte-deterministic: the key order above, 2-space
indent, LF line endings, UTF-8 without BOM, no trailing whitespace, one
trailing newline. Two structurally equal books always serialize to identical
bytes, so book files diff cleanly and content hashes are stable.

Error ladder, in evaluation order:

    BookSyntaxError   not UTF-8, or not JSON (carries a byte offset)
    SchemaError       wrong shape: missing/unknown/wrongly-typed fields,
                      unsupported format_version, duplicate character ids
    ValidationError   shape is fine, content is not (wraps the model report)
"""

from __future__ import annotations

import json
from itertools import groupby
from typing import Any

from .errors import BookSyntaxError, InvalidBook, SchemaError, ValidationError
from .model import AgeRange, BookScript, Character, Line, validate_book

FORMAT_VERSION = 1

_ROOT_KEYS = ("format_version", "id", "title", "age_min", "age_max", "characters", "pages")
_CHARACTER_KEYS = ("id", "name", "portrait")
_PAGE_KEYS = ("page", "lines")
_LINE_KEYS = ("character", "text")


def _as_object(value: Any, path: str) -> dict:
    if not isinstance(value, dict):
        raise SchemaError(path, f"expected an object, got {type(value).__name__}")
    return value


def _as_array(value: Any, path: str) -> list:
    if not isinstance(value, list):
        raise SchemaError(path, f"expected an array, got {type(value).__name__}")
    return value


def _as_str(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise SchemaError(path, f"expected a string, got {type(value).__name__}")
    return value


def _as_int(value: Any, path: str) -> int:
    # bool is an int subclass in Python; true/false are not acceptable counts.
    if not isinstance(value, int) or isinstance(value, bool):
        raise SchemaError(path, f"expected an integer, got {type(value).__name__}")
    return value


def _take(obj: dict, key: str, path: str) -> Any:
    if key not in obj:
        raise SchemaError(path, f"missing required field {key!r}")
    return obj[key]

def _reject_unknown(obj: dict, allowed: tuple[str, ...], path: str) -> None:
    for key in obj:
        if key not in allowed:
            where = f"{path}.{key}" if path != "$" else key
            raise SchemaError(where, "unknown field")


def document_to_book(value: Any) -> BookScript:
    """Build a BookScript from a parsed JSON value, checking shape then content."""
    root = _as_object(value, "$")
    _reject_unknown(root, _ROOT_KEYS, "$")

    version = _as_int(_take(root, "format_version", "format_version"), "format_version")
    if version != FORMAT_VERSION:
        raise SchemaError(
            "format_version", f"unsupported version {version}; this reader handles {FORMAT_VERSION}"
        )

    book_id = _as_str(_take(root, "id", "id"), "id")
    title = _as_str(_take(root, "title", "title"), "title")
    age_min = _as_int(_take(root, "age_min", "age_min"), "age_min")
    age_max = _as_int(_take(root, "age_max", "age_max"), "age_max")

    characters: list[Character] = []
    seen_ids: set[str] = set()
    for i, raw in enumerate(_as_array(_take(root, "characters", "characters"), "characters")):
        path = f"characters[{i}]"
        obj = _as_object(raw, path)
        _reject_unknown(obj, _CHARACTER_KEYS, path)
        char_id = _as_str(_take(obj, "id", f"{path}.id"), f"{path}.id")
        if char_id in seen_ids:
            raise SchemaError(f"{path}.id", f"duplicate character id {char_id!r}")
        seen_ids.add(char_id)
        name = _as_str(_take(obj, "name", f"{path}.name"), f"{path}.name")
        portrait = None
        if "portrait" in obj:
            portrait = _as_str(obj["portrait"], f"{path}.portrait")
        characters.append(Character(char_id, name, portrait))

    lines: list[Line] = []
    for p, raw_page in enumerate(_as_array(_take(root, "pages", "pages"), "pages")):
        page_path = f"pages[{p}]"
        page_obj = _as_object(raw_page, page_path)
        _reject_unknown(page_obj, _PAGE_KEYS, page_path)
        page_no = _as_int(_take(page_obj, "page", f"{page_path}.page"), f"{page_path}.page")
        for l, raw_line in enumerate(
            _as_array(_take(page_obj, "lines", f"{page_path}.lines"), f"{page_path}.lines")
        ):
            line_path = f"{page_path}.lines[{l}]"
            line_obj = _as_object(raw_line, line_path)
            _reject_unknown(line_obj, _LINE_KEYS, line_path)
            speaker = _as_str(
                _take(line_obj, "character", f"{line_path}.character"), f"{line_path}.character"
            )
            text = _as_str(_take(line_obj, "text", f"{line_path}.text"), f"{line_path}.text")
            lines.append(Line(index=len(lines), page=page_no, character_id=speaker, text=text))

    book = BookScript(
        id=book_id,
        title=title,
        age_range=AgeRange(age_min, age_max),
        characters=tuple(characters),
        lines=tuple(lines),
    )
    report = validate_book(book)
    if report:
        raise ValidationError(report)
    return book


def parse_book(doc: bytes) -> BookScript:
    """Parse document bytes. See the module docstring for the error ladder."""
    try:
        text = doc.decode("utf-8")
    except UnicodeDecodeError as e:
        raise BookSyntaxError(e.start, "document is not valid UTF-8") from e
    try:
        value = json.loads(text)
    except json.JSONDecodeError as e:
        byte_offset = len(text[: e.pos].encode("utf-8"))
        raise BookSyntaxError(byte_offset, e.msg) from e
    return document_to_book(value)


def book_to_document(book: BookScript) -> dict:
    """The canonical JSON object for a valid book (fixed key order)."""
    report = validate_book(book)
    if report:
        raise InvalidBook(report)
    characters = []
    for ch in book.characters:
        entry: dict[str, Any] = {"id": ch.id, "name": ch.display_name}
        if ch.portrait_ref is not None:
            entry["portrait"] = ch.portrait_ref
        characters.append(entry)
    pages = [
        {
            "page": page_no,
            "lines": [{"character": ln.character_id, "text": ln.text} for ln in group],
        }
        for page_no, group in groupby(book.lines, key=lambda ln: ln.page)
    ]
    return {
        "format_version": FORMAT_VERSION,
        "id": book.id,
        "title": book.title,
        "age_min": book.age_range.min_years,
        "age_max": book.age_range.max_years,
        "characters": characters,
        "pages": pages,
    }


def serialize_book(book: BookScript) -> bytes:
    """Canonical bytes for a valid book. Raises InvalidBook otherwise."""
    doc = book_to_document(book)
    return (json.dumps(doc, ensure_ascii=False, indent=2) + "\n").encode("utf-8")
