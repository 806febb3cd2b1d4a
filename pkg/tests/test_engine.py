import dataclasses

import pytest
from hypothesis import given, settings

from storycast.casting import AgentVoice, CastSheet, HumanAdult, HumanChild, assign, unassign
from storycast.engine import (
    AgentSpeaking,
    AwaitHuman,
    AwaitingHuman,
    Completed,
    Idle,
    NotStarted,
    PlayAgent,
    SessionComplete,
    advance,
    available_controls,
    current_view,
    directive_to_payload,
    phase_from_payload,
    phase_name,
    phase_to_payload,
    playback_finished,
    replay_current,
    replay_session,
    start_session,
    step_back,
)
from storycast.errors import (
    BookMismatch,
    ControlNotAvailable,
    IncompleteCast,
    InvalidBook,
    StaleRequest,
    StorageError,
)
from tests.helpers import drive_to_completion, make_book, oracle_controls
from tests.model_check import run_model_check
from tests.strategies import cast_books


def fresh(book, cast, session_id="s1"):
    return start_session(book, cast, session_id=session_id)


def complete_line(session):
    """Resolve whatever the last directive left pending."""
    if isinstance(session.phase, AgentSpeaking):
        return playback_finished(session, session.phase.request_id)
    return session


class TestStartSession:
    def test_fresh_session_shape(self, sample_book, sample_cast):
        session = fresh(sample_book, sample_cast)
        assert session.phase == NotStarted()
        assert available_controls(session) == {"start"}
        assert [e.name for e in session.events] == ["session_created"]
        assert session.events[0].payload == {
            "book_id": "sample_patterns",
            "line_count": 7,
        }

    def test_incomplete_cast(self, sample_book, sample_cast):
        with pytest.raises(IncompleteCast) as exc:
            fresh(sample_book, unassign(sample_cast, "narrator"))
        assert exc.value.uncast == ("narrator",)

    def test_invalid_book_rejected(self, sample_book, sample_cast):
        broken = dataclasses.replace(sample_book, title="")
        with pytest.raises(InvalidBook):
            fresh(broken, sample_cast)

    def test_foreign_cast_rejected(self, sample_book):
        other = make_book(["a"], book_id="otherbook", characters=["a"])
        cast = assign(CastSheet.for_book(other), "a", AgentVoice(1))
        with pytest.raises(BookMismatch):
            fresh(sample_book, cast)


class TestWalkthrough:
    """The reference path: narrator is voice 1, clara voice 2, pip a child."""

    def test_first_two_agent_turns(self, sample_book, sample_cast):
        session = fresh(sample_book, sample_cast)
        session, d0 = advance(session)
        assert d0 == PlayAgent(0, 1, sample_book.lines[0].text, "rq-000001")
        assert session.phase == AgentSpeaking(0, "rq-000001")
        assert available_controls(session) == frozenset()
        session = playback_finished(session, "rq-000001")
        assert session.phase == Idle(1)
        session, d1 = advance(session)
        assert d1 == PlayAgent(1, 2, sample_book.lines[1].text, "rq-000002")

    def test_human_turn_waits_for_next(self, sample_book, sample_cast):
        # pip speaks line 2 of the sample book.
        session = fresh(sample_book, sample_cast)
        for _ in range(2):
            session, _ = advance(session)
            session = complete_line(session)
        session, directive = advance(session)
        assert directive == AwaitHuman(2, HumanChild())
        assert session.phase == AwaitingHuman(2)
        # The next press both closes the human turn and performs line 3.
        session, nxt = advance(session)
        assert isinstance(nxt, PlayAgent)
        assert nxt.line_index == 3

    def test_completion_on_agent_final_line(self, sample_book, sample_cast):
        # The sample ends on a narrator line, so the last playback lands the
        # session in Completed directly; no closing directive is issued.
        session = fresh(sample_book, sample_cast)
        session, directives = drive_to_completion(
            session, advance, playback_finished, lambda s: s.phase
        )
        assert session.phase == Completed()
        assert available_controls(session) == {"back", "finish"}
        assert [d.line_index for d in directives] == list(range(7))

    def test_completion_on_human_final_line(self):
        book = make_book(["nar", "kid"], characters=["nar", "kid"])
        cast = assign(CastSheet.for_book(book), "nar", AgentVoice(1))
        cast = assign(cast, "kid", HumanChild())
        session = fresh(book, cast)
        session, directives = drive_to_completion(
            session, advance, playback_finished, lambda s: s.phase
        )
        assert session.phase == Completed()
        assert directives[-1] == SessionComplete()
        assert [d.line_index for d in directives[:-1]] == [0, 1]

    def test_last_line_agent_completes_on_finish(self, sample_cast):
        book = make_book(["narrator"], characters=["narrator", "clara", "pip"],
                         book_id="sample_patterns")
        session = fresh(book, sample_cast)
        session, _ = advance(session)
        session = playback_finished(session, session.phase.request_id)
        assert session.phase == Completed()


class TestScriptedOrder:
    @settings(max_examples=80, deadline=None)
    @given(cast_books())
    def test_directives_cover_lines_in_order(self, book_and_cast):
        book, cast = book_and_cast
        session = fresh(book, cast)
        session, directives = drive_to_completion(
            session, advance, playback_finished, lambda s: s.phase
        )
        # A closing directive appears exactly when the last line is human-read
        # (agent-read finales complete through the playback signal instead).
        last_is_human = not isinstance(
            cast.entries[book.lines[-1].character_id], AgentVoice
        )
        assert isinstance(directives[-1], SessionComplete) == last_is_human
        body = directives[:-1] if last_is_human else directives
        assert [d.line_index for d in body] == list(range(len(book.lines)))
        for d in body:
            reader = cast.entries[book.lines[d.line_index].character_id]
            if isinstance(d, PlayAgent):
                assert reader == AgentVoice(d.voice)
                assert d.text == book.lines[d.line_index].text
            else:
                assert isinstance(d, AwaitHuman)
                assert d.reader == reader
                assert isinstance(reader, (HumanAdult, HumanChild))

    @settings(max_examples=40, deadline=None)
    @given(cast_books())
    def test_request_ids_count_up_from_one(self, book_and_cast):
        book, cast = book_and_cast
        session = fresh(book, cast)
        session, directives = drive_to_completion(
            session, advance, playback_finished, lambda s: s.phase
        )
        plays = [d for d in directives if isinstance(d, PlayAgent)]
        assert [d.request_id for d in plays] == [f"rq-{i + 1:06d}" for i in range(len(plays))]
        assert session.play_requests == len(plays)


class TestBackAdvanceAlgebra:
    @settings(max_examples=40, deadline=None)
    @given(cast_books())
    def test_back_then_advance_replays_previous_line(self, book_and_cast):
        # Walk back from Completed through every Idle(c), 1 <= c <= N-1:
        # at each, back + advance must re-perform line c-1 and land on c again.
        book, cast = book_and_cast
        session, _ = drive_to_completion(
            fresh(book, cast), advance, playback_finished, lambda s: s.phase
        )
        n = len(book.lines)
        session = step_back(session)  # Completed -> Idle(n-1)
        assert session.phase == Idle(n - 1)
        for c in range(n - 1, 0, -1):
            assert session.phase == Idle(c)
            stepped = step_back(session)
            assert stepped.phase == Idle(c - 1)
            redone, directive = advance(stepped)
            assert directive.line_index == c - 1
            redone = complete_line(redone)
            if isinstance(redone.phase, AwaitingHuman):
                # Human turns resolve on the next press, which performs line c.
                _, nxt = advance(redone)
                assert nxt.line_index == c
            else:
                assert redone.phase == Idle(c)
            session = stepped

    def test_back_at_line_zero_not_offered(self, sample_book, sample_cast):
        session = fresh(sample_book, sample_cast)
        session, _ = advance(session)
        session = complete_line(session)  # Idle(1)
        session = step_back(session)  # Idle(0)
        assert session.phase == Idle(0)
        assert "back" not in available_controls(session)
        with pytest.raises(ControlNotAvailable):
            step_back(session)


class TestReplayCurrent:
    def test_replay_does_not_move_cursor(self, sample_book, sample_cast):
        session = fresh(sample_book, sample_cast)
        session, _ = advance(session)
        session = complete_line(session)  # Idle(1)
        session, directive = replay_current(session)
        assert directive == PlayAgent(1, 2, sample_book.lines[1].text, "rq-000002")
        session = complete_line(session)
        assert session.phase == Idle(2)

    def test_redo_mints_a_fresh_request_id(self, sample_book, sample_cast):
        session = fresh(sample_book, sample_cast)
        session, first = advance(session)
        session = playback_finished(session, first.request_id)
        session = step_back(session)  # Idle(0)
        session, again = advance(session)
        assert again.line_index == 0
        assert again.request_id != first.request_id

    def test_echo_reading_a_human_line(self, sample_book, sample_cast):
        session = fresh(sample_book, sample_cast)
        for _ in range(2):
            session, _ = advance(session)
            session = complete_line(session)
        session, _ = advance(session)  # AwaitingHuman(2)
        session, echo = replay_current(session)
        assert echo == AwaitHuman(2, HumanChild())
        assert session.phase == AwaitingHuman(2)

    def test_replay_before_start_rejected(self, sample_book, sample_cast):
        session = fresh(sample_book, sample_cast)
        with pytest.raises(ControlNotAvailable):
            replay_current(session)


class TestStaleRequests:
    def test_duplicate_finish_after_back_is_stale(self, sample_book, sample_cast):
        session = fresh(sample_book, sample_cast)
        session, first = advance(session)
        session = playback_finished(session, first.request_id)  # Idle(1)
        session = step_back(session)  # Idle(0)
        session, second = advance(session)  # AgentSpeaking(0, rq-000002)
        before = session
        with pytest.raises(StaleRequest):
            playback_finished(session, first.request_id)
        assert before == session  # rejection leaves the value untouched
        session = playback_finished(session, second.request_id)
        assert session.phase == Idle(1)

    def test_finish_outside_agent_speaking_is_stale(self, sample_book, sample_cast):
        session = fresh(sample_book, sample_cast)
        with pytest.raises(StaleRequest):
            playback_finished(session, "rq-000001")

    def test_advance_during_playback_rejected(self, sample_book, sample_cast):
        session = fresh(sample_book, sample_cast)
        session, _ = advance(session)
        with pytest.raises(ControlNotAvailable):
            advance(session)
        with pytest.raises(ControlNotAvailable):
            step_back(session)
        with pytest.raises(ControlNotAvailable):
            replay_current(session)


class TestModelCheck:
    def test_exhaustive_soundness_up_to_four_lines(self):
        machines, problems = run_model_check(max_lines=4)
        assert machines == 30  # 2 + 4 + 8 + 16 agent/human patterns
        assert problems == []

    def test_controls_match_oracle_along_a_drive(self, sample_book, sample_cast):
        session = fresh(sample_book, sample_cast)
        seen = 0
        while not isinstance(session.phase, Completed):
            phase = session.phase
            cursor = getattr(phase, "cursor", None)
            assert available_controls(session) == oracle_controls(phase_name(phase), cursor)
            if isinstance(phase, AgentSpeaking):
                session = playback_finished(session, phase.request_id)
            else:
                session, _ = advance(session)
            seen += 1
        assert seen > 7


class TestEventLog:
    def test_event_names_and_payloads(self, sample_book, sample_cast):
        session = fresh(sample_book, sample_cast)
        session, d = advance(session)
        session = playback_finished(session, d.request_id)
        session, _ = replay_current(session)
        session = playback_finished(session, session.phase.request_id)
        session = step_back(session)
        names = [e.name for e in session.events]
        assert names == [
            "session_created",
            "advanced",
            "playback_finished",
            "replayed",
            "playback_finished",
            "stepped_back",
        ]
        assert session.events[1].payload["directive"]["kind"] == "play_agent"
        assert session.events[2].payload == {"request_id": "rq-000001"}
        assert session.events[3].payload["directive"]["request_id"] == "rq-000002"
        assert session.events[5].payload == {"cursor": 1}

    def test_timestamps_strictly_increase_under_a_stuck_clock(self, sample_book, sample_cast):
        session = start_session(sample_book, sample_cast, session_id="s1", now=5)
        session, d = advance(session, now=5)
        session = playback_finished(session, d.request_id, now=5)
        session = step_back(session, now=5)
        stamps = [e.ts for e in session.events]
        assert stamps == [5, 6, 7, 8]

    def test_wall_clock_timestamps_increase(self, sample_book, sample_cast):
        session = fresh(sample_book, sample_cast)
        for _ in range(4):
            session, _ = advance(session)
            session = complete_line(session)
        stamps = [e.ts for e in session.events]
        assert stamps == sorted(stamps)
        assert len(set(stamps)) == len(stamps)


class TestReplaySession:
    @settings(max_examples=40, deadline=None)
    @given(cast_books())
    def test_replay_rebuilds_the_exact_session(self, book_and_cast):
        book, cast = book_and_cast
        session, _ = drive_to_completion(
            fresh(book, cast), advance, playback_finished, lambda s: s.phase
        )
        if len(book.lines) > 1:
            session = step_back(session)
            session, d = advance(session)
            if isinstance(d, PlayAgent):
                session = playback_finished(session, d.request_id)
        rebuilt = replay_session(book, cast, session.events, session_id=session.id)
        assert rebuilt == session

    def test_replay_rejects_headless_logs(self, sample_book, sample_cast):
        session = fresh(sample_book, sample_cast)
        session, _ = advance(session)
        with pytest.raises(StorageError):
            replay_session(sample_book, sample_cast, session.events[1:], session_id="s1")
        with pytest.raises(StorageError):
            replay_session(sample_book, sample_cast, (), session_id="s1")


class TestViewsAndPayloads:
    def test_view_projection(self, sample_book, sample_cast):
        session = fresh(sample_book, sample_cast)
        session, _ = advance(session)
        view = current_view(session)
        payload = view.to_payload()
        assert payload["highlight"] == {"line": 0, "color": "green"}
        assert payload["controls"] == []
        assert payload["phase"] == {
            "kind": "agent_speaking",
            "cursor": 0,
            "request_id": "rq-000001",
        }
        assert payload["cast_complete"] is True
        assert [row["index"] for row in payload["lines"]] == list(range(7))
        assert payload["lines"][1]["character_name"] == "Clara"
        assert payload["badges"][0] == {"kind": "agent", "voice": 1}
        assert payload["badges"][2] == {"kind": "child"}
        assert payload["badges"][3] == {"kind": "agent", "voice": 1}

    def test_idle_view_has_no_highlight(self, sample_book, sample_cast):
        session = fresh(sample_book, sample_cast)
        assert current_view(session).to_payload()["highlight"] is None

    def test_badges_join_oracle(self, sample_book, sample_cast):
        session = fresh(sample_book, sample_cast)
        view = current_view(session)
        for i, line in enumerate(sample_book.lines):
            assert view.badges[i] == sample_cast.entries.get(line.character_id)

    @pytest.mark.parametrize(
        "payload",
        [
            {"kind": "not_started"},
            {"kind": "idle", "cursor": 3},
            {"kind": "agent_speaking", "cursor": 1, "request_id": "rq-000009"},
            {"kind": "awaiting_human", "cursor": 0},
            {"kind": "completed"},
        ],
    )
    def test_phase_payload_round_trip(self, payload):
        assert phase_to_payload(phase_from_payload(payload)) == payload

    def test_phase_payload_rejects_unknown_kind(self):
        with pytest.raises(ValueError):
            phase_from_payload({"kind": "paused"})

    def test_directive_payloads(self):
        assert directive_to_payload(PlayAgent(2, 5, "hi", "rq-000007")) == {
            "kind": "play_agent",
            "line": 2,
            "voice": 5,
            "text": "hi",
            "request_id": "rq-000007",
        }
        assert directive_to_payload(AwaitHuman(1, HumanAdult())) == {
            "kind": "await_human",
            "line": 1,
            "reader": {"kind": "adult"},
        }
        assert directive_to_payload(SessionComplete()) == {"kind": "session_complete"}
