"""Shared builders and independent oracles for the test suite.

The oracles here are deliberately dumb re-derivations of expected results
(set scans, filters, cursor arithmetic) so tests never trust the code under
test to predict its own output.
"""

from __future__ import annotations

from random import Random

from storycast.casting import AgentVoice, CastSheet, HumanAdult, HumanChild, Reader, assign
from storycast.model import AgeRange, BookScript, Character, Line

WORDS = (
    "the", "tiny", "boat", "drum", "moon", "hops", "sings", "blue", "red",
    "star", "wave", "marches", "home", "über", "árbol", "口琴", "naïve", "🎈",
)


def make_book(
    speakers: list[str],
    *,
    book_id: str = "testbook",
    title: str = "Test Book",
    characters: list[str] | None = None,
    pages: list[int] | None = None,
    texts: list[str] | None = None,
    ages: tuple[int, int] = (3, 6),
) -> BookScript:
    """Build a book from a per-line speaker list; defaults keep it valid."""
    declared = characters if characters is not None else sorted(set(speakers))
    chars = tuple(Character(cid, cid.replace("_", " ").title()) for cid in declared)
    lines = tuple(
        Line(
            index=i,
            page=pages[i] if pages else 1 + i // 2,
            character_id=speaker,
            text=texts[i] if texts else f"Line {i} spoken by {speaker}.",
        )
        for i, speaker in enumerate(speakers)
    )
    return BookScript(book_id, title, AgeRange(*ages), chars, lines)


def random_book(rng: Random, *, max_characters: int = 6, max_lines: int = 50) -> BookScript:
    n_chars = rng.randint(1, max_characters)
    chars = tuple(Character(f"ch{i}", f"Speaker {i + 1}") for i in range(n_chars))
    n_lines = rng.randint(1, max_lines)
    lines = []
    page = 1
    for i in range(n_lines):
        if i and rng.random() < 0.3:
            page += rng.randint(1, 2)
        text = " ".join(rng.choice(WORDS) for _ in range(rng.randint(1, 8)))
        lines.append(Line(i, page, rng.choice(chars).id, text))
    return BookScript(
        id=f"book-{rng.randrange(10 ** 9)}",
        title=f"Random Book {rng.randrange(1000)}",
        age_range=AgeRange(rng.randint(0, 4), rng.randint(4, 9)),
        characters=chars,
        lines=tuple(lines),
    )


def random_cast(rng: Random, book: BookScript, *, all_agents: bool = False) -> CastSheet:
    """A complete cast: distinct voices while they last, humans otherwise."""
    cast = CastSheet.for_book(book)
    voices = list(range(1, 7))
    rng.shuffle(voices)
    speaking = sorted({line.character_id for line in book.lines})
    for character_id in speaking:
        reader: Reader
        if voices and (all_agents or rng.random() < 0.6):
            reader = AgentVoice(voices.pop())
        else:
            reader = HumanAdult() if rng.random() < 0.5 else HumanChild()
        cast = assign(cast, character_id, reader)
    return cast


# -- oracles ------------------------------------------------------------------


def oracle_undeclared_speakers(book: BookScript) -> list[int]:
    declared = {ch.id for ch in book.characters}
    return [i for i, line in enumerate(book.lines) if line.character_id not in declared]


def oracle_uncast(book: BookScript, entries) -> list[str]:
    """Uncast speaking characters, from a plain {character_id: reader} mapping."""
    if isinstance(entries, CastSheet):
        entries = entries.entries
    speaking = {line.character_id for line in book.lines}
    return [ch.id for ch in book.characters if ch.id in speaking and ch.id not in entries]


def oracle_controls(phase_kind: str, cursor: int | None) -> frozenset[str]:
    """The control table, restated from scratch."""
    if phase_kind == "not_started":
        return frozenset({"start"})
    if phase_kind == "idle":
        base = {"next", "replay"}
        if cursor is not None and cursor > 0:
            base.add("back")
        return frozenset(base)
    if phase_kind == "awaiting_human":
        return frozenset({"next", "back", "replay"})
    if phase_kind == "agent_speaking":
        return frozenset()
    if phase_kind == "completed":
        return frozenset({"back", "finish"})
    raise AssertionError(phase_kind)


def drive_to_completion(session, advance, playback_finished, phase_of):
    """Drive a session with only forward signals; returns issued directives."""
    from storycast.engine import AgentSpeaking, Completed

    directives = []
    guard = 0
    while not isinstance(phase_of(session), Completed):
        guard += 1
        assert guard < 10_000, "session is not terminating"
        phase = phase_of(session)
        if isinstance(phase, AgentSpeaking):
            session = playback_finished(session, phase.request_id)
        else:
            session, directive = advance(session)
            directives.append(directive)
    return session, directives
