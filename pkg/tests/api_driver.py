"""Lockstep drivers for API-vs-engine equivalence checks.

DirectDriver applies operations straight to the engine, mirroring the
service's lazy-start behaviour (a session value exists only after the first
advance). HttpDriver applies the same operations over HTTP. After every
operation both report (accepted, view_payload); the two transcripts must be
identical once session ids are masked.
"""

from storycast import engine
from storycast.casting import reader_to_payload
from storycast.errors import ControlNotAvailable, IncompleteCast, StaleRequest

OP_WEIGHTS = (
    ("advance", 5),
    ("finish_ok", 4),
    ("replay", 2),
    ("back", 2),
    ("finish_stale", 1),
)


def random_script(rng, length):
    names = [name for name, weight in OP_WEIGHTS for _ in range(weight)]
    return [rng.choice(names) for _ in range(length)]


def mask_session_id(view: dict) -> dict:
    return {**view, "session_id": "*"}


class DirectDriver:
    def __init__(self, book, cast):
        self.book = book
        self.cast = cast
        self.session = None

    def view(self) -> dict:
        if self.session is not None:
            return engine.current_view(self.session).to_payload()
        return engine.build_view("direct", self.book, self.cast, engine.NotStarted()).to_payload()

    def _request_id(self):
        phase = self.session.phase if self.session else None
        return phase.request_id if isinstance(phase, engine.AgentSpeaking) else "rq-000000"

    def apply(self, op: str) -> bool:
        try:
            if op == "advance":
                base = self.session
                if base is None:
                    base = engine.start_session(
                        self.book, self.cast, session_id="direct"
                    )
                self.session, _ = engine.advance(base)
            elif op == "back":
                if self.session is None:
                    raise ControlNotAvailable("back", "not_started")
                self.session = engine.step_back(self.session)
            elif op == "replay":
                if self.session is None:
                    raise ControlNotAvailable("replay", "not_started")
                self.session, _ = engine.replay_current(self.session)
            elif op == "finish_ok":
                if self.session is None:
                    raise StaleRequest("rq-000000")
                self.session = engine.playback_finished(self.session, self._request_id())
            elif op == "finish_stale":
                if self.session is None:
                    raise StaleRequest("rq-stale")
                self.session = engine.playback_finished(self.session, "rq-stale")
            else:
                raise AssertionError(op)
            return True
        except (ControlNotAvailable, StaleRequest, IncompleteCast):
            return False


class HttpDriver:
    def __init__(self, client, book, cast):
        self.client = client
        created = client.post("/sessions", json={"book_id": book.id})
        assert created.status_code == 201, created.text
        self.session_id = created.json()["session_id"]
        entries = {
            character: reader_to_payload(reader) for character, reader in cast.entries.items()
        }
        response = client.put(
            f"/sessions/{self.session_id}/cast", json={"entries": entries}
        )
        assert response.status_code == 200, response.text

    def view(self) -> dict:
        response = self.client.get(f"/sessions/{self.session_id}")
        assert response.status_code == 200, response.text
        return response.json()

    def _request_id(self):
        phase = self.view()["phase"]
        return phase.get("request_id", "rq-000000")

    def apply(self, op: str) -> bool:
        base = f"/sessions/{self.session_id}"
        if op == "advance":
            response = self.client.post(f"{base}/advance")
        elif op == "back":
            response = self.client.post(f"{base}/back")
        elif op == "replay":
            response = self.client.post(f"{base}/replay")
        elif op == "finish_ok":
            response = self.client.post(
                f"{base}/playback-finished", json={"request_id": self._request_id()}
            )
        elif op == "finish_stale":
            response = self.client.post(
                f"{base}/playback-finished", json={"request_id": "rq-stale"}
            )
        else:
            raise AssertionError(op)
        if response.status_code == 200:
            return True
        assert response.status_code == 409, response.text
        return False


def run_lockstep(http_driver, direct_driver, script):
    """Apply a script to both drivers, asserting identical outcomes."""
    for step, op in enumerate(script):
        http_ok = http_driver.apply(op)
        direct_ok = direct_driver.apply(op)
        assert http_ok == direct_ok, f"step {step} {op}: http={http_ok} direct={direct_ok}"
        http_view = mask_session_id(http_driver.view())
        direct_view = mask_session_id(direct_driver.view())
        assert http_view == direct_view, f"step {step} {op}: views diverge"
