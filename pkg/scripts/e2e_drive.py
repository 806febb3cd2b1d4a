"""End-to-end drive of a real server process, as a client would use it.

Boots `python3 -m storycast` on a free port with a fresh library, then walks
the whole user journey over plain HTTP: browse books, preview a voice, cast
the sample book, read it to the end (fetching and checking every audio clip),
step back, replay, and confirm the event stream saw one event per mutation.
Exits nonzero on the first broken expectation.
"""

import contextlib
import io
import json
import math
import socket
import subprocess
import sys
import tempfile
import time
import urllib.request
import wave
from pathlib import Path

BASE = None


def get(path, expect=200):
    return call("GET", path, None, expect)


def post(path, body=None, expect=200):
    return call("POST", path, body, expect)


def call(method, path, body, expect):
    data = None if body is None else json.dumps(body).encode()
    req = urllib.request.Request(BASE + path, data=data, method=method)
    if data is not None:
        req.add_header("Content-Type", "application/json")
    try:
        with urllib.request.urlopen(req) as response:
            status, raw = response.status, response.read()
    except urllib.error.HTTPError as e:
        status, raw = e.code, e.read()
    assert status == expect, f"{method} {path}: {status} != {expect}: {raw[:200]}"
    if raw[:1] in (b"{", b"["):
        return json.loads(raw)
    return raw


def sse_history(path, count):
    """Collect `count` events from the SSE backlog, then hang up."""
    events = []
    with urllib.request.urlopen(BASE + path, timeout=10) as response:
        while len(events) < count:
            line = response.readline().decode().rstrip("\n")
            if line.startswith("data:"):
                events.append(json.loads(line[5:]))
    return events


def wav_pitch_hz(data):
    with wave.open(io.BytesIO(data)) as w:
        frames = w.readframes(w.getnframes())
        rate = w.getframerate()
    samples = [
        int.from_bytes(frames[i : i + 2], "little", signed=True)
        for i in range(0, len(frames), 2)
    ]
    crossings = sum(
        1 for a, b in zip(samples, samples[1:]) if (a < 0) != (b < 0)
    )
    return crossings / 2 / (len(samples) / rate)


def main():
    global BASE
    port = None
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
    library = tempfile.mkdtemp(prefix="storycast-e2e-")
    server = subprocess.Popen(
        [sys.executable, "-m", "storycast", "--port", str(port), "--library", library],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
    )
    BASE = f"http://127.0.0.1:{port}"
    try:
        deadline = time.monotonic() + 15
        books = None
        while time.monotonic() < deadline:
            with contextlib.suppress(OSError):
                books = get("/books")
                break
            time.sleep(0.2)
        assert books, "server never served the book catalog"
        ids = [b["id"] for b in books]
        assert "sample_patterns" in ids, ids
        print(f"ok: catalog lists {len(ids)} sample books")

        voices = get("/voices")
        assert [v["id"] for v in voices] == [1, 2, 3, 4, 5, 6]
        preview = get("/voices/3/preview")
        pitch = wav_pitch_hz(preview)
        assert math.isclose(pitch, 320.0, abs_tol=2.0), pitch
        print(f"ok: voice 3 preview plays at {pitch:.1f} Hz")

        created = post("/sessions", {"book_id": "sample_patterns"}, expect=201)
        sid = created["session_id"]
        put = urllib.request.Request(
            f"{BASE}/sessions/{sid}/cast",
            data=json.dumps(
                {
                    "entries": {
                        "narrator": {"kind": "agent", "voice": 1},
                        "clara": {"kind": "agent", "voice": 2},
                        "pip": {"kind": "child"},
                    }
                }
            ).encode(),
            method="PUT",
        )
        put.add_header("Content-Type", "application/json")
        with urllib.request.urlopen(put) as response:
            assert response.status == 200

        # Read the whole book; confirm each agent clip is fetchable audio.
        lines_seen = 0
        while True:
            view = get(f"/sessions/{sid}")
            if view["phase"]["kind"] == "completed":
                break
            if view["phase"]["kind"] == "agent_speaking":
                post(
                    f"/sessions/{sid}/playback-finished",
                    {"request_id": view["phase"]["request_id"]},
                )
                continue
            step = post(f"/sessions/{sid}/advance")
            lines_seen += 1
            if step.get("audio_url"):
                clip = get(step["audio_url"])
                assert clip[:4] == b"RIFF", "audio url did not serve a WAV"
        assert lines_seen == 7, lines_seen
        print("ok: read all 7 lines to completion, every agent clip fetchable")

        # Off the happy path: back out of completion, replay the last line.
        post(f"/sessions/{sid}/back")
        assert get(f"/sessions/{sid}")["phase"]["kind"] == "idle"
        post(f"/sessions/{sid}/replay")
        view = get(f"/sessions/{sid}")
        post(f"/sessions/{sid}/playback-finished", {"request_id": view["phase"]["request_id"]})
        assert get(f"/sessions/{sid}")["phase"]["kind"] == "completed"
        print("ok: back, replay and re-finish all behave")

        # Stale confirmations are refused and mutate nothing.
        post(f"/sessions/{sid}/playback-finished", {"request_id": "rq-000001"}, expect=409)
        print("ok: stale playback confirmation answers 409")

        # The event history is gap-free: one event per accepted mutation.
        # create + cast + 5 agent lines x2 + 2 human lines + back/replay/finish.
        events = sse_history(f"/sessions/{sid}/events?after=0", 17)
        seqs = [e["seq"] for e in events]
        assert seqs == list(range(1, 18)), seqs
        print(f"ok: event history is gap-free ({len(seqs)} events)")

        # Sessions survive on disk alongside the imported books.
        stored = list(Path(library).glob("sessions/*.json"))
        assert stored, "no session record written"
        print(f"ok: session persisted at {stored[0].name}")
        print("E2E DRIVE PASSED")
    finally:
        # Graceful stop can take one SSE keepalive cycle; don't wait it out.
        server.terminate()
        try:
            server.wait(timeout=2)
        except subprocess.TimeoutExpired:
            server.kill()
            server.wait(timeout=5)


if __name__ == "__main__":
    main()
