"""Speech synthesis behind a content-addressed audio cache.

One audio format in v1: mono PCM16 WAV at 22050 Hz. Assets are keyed by a
sha256 over (voice, text, format, backend id), so equal requests are rendered
at most once per backend, ever. The cache is plain files:

    cache/<first two hex chars>/<hash>.wav
    cache/index.tsv      one "hash<TAB>voice<TAB>bytes<TAB>duration_ms" per line

Writes are atomic (temp file + rename) and concurrent identical requests are
collapsed to a single backend call (per-hash single flight).

Backends implement one method, render(request) -> WAV bytes. The bundled mock
is fully deterministic so tests and offline demos never need a vendor: it
renders a sine tone at (200 + 40 * voice_id) Hz, amplitude 0.5, lasting 80 ms
per character of text with a 300 ms floor. The remote backend wraps any
send-one-request callable with exponential backoff (3 tries, 200 ms base).
"""

from __future__ import annotations

import hashlib
import io
import json
import logging
import math
import os
import threading
import time
import wave
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Protocol

import numpy as np

from .errors import BackendUnavailable, TextTooLong, UnknownVoice
from .voices import VOICE_IDS, VOICES, VoiceId, VoiceProfile

log = logging.getLogger(__name__)

SAMPLE_RATE = 22050
AUDIO_FORMAT = "wav:pcm16:22050:mono"
MS_PER_CHAR = 80
MIN_DURATION_MS = 300
MAX_TEXT_CHARS = 2000


@dataclass(frozen=True)
class SynthesisRequest:
    voice: VoiceId
    text: str
    format: str = AUDIO_FORMAT


@dataclass(frozen=True)
class AudioAsset:
    content_hash: str
    data: bytes
    duration_ms: int


class SynthesisBackend(Protocol):
    backend_id: str

    def render(self, request: SynthesisRequest) -> bytes: ...


def content_hash(request: SynthesisRequest, backend_id: str) -> str:
    key = json.dumps(
        [request.voice, request.text, request.format, backend_id], ensure_ascii=False
    )
    return hashlib.sha256(key.encode("utf-8")).hexdigest()


def wav_duration_ms(data: bytes) -> int:
    with wave.open(io.BytesIO(data), "rb") as w:
        return round(w.getnframes() * 1000 / w.getframerate())


class MockSynthesizer:
    """Deterministic offline backend; see the module docstring for the tone law."""

    backend_id = "mock"

    def render(self, request: SynthesisRequest) -> bytes:
        duration_ms = max(MIN_DURATION_MS, MS_PER_CHAR * len(request.text))
        # 80 ms steps are exact at 22050 Hz: 1764 samples per character.
        n_samples = duration_ms * SAMPLE_RATE // 1000
        freq = 200 + 40 * request.voice
        t = np.arange(n_samples, dtype=np.float64) / SAMPLE_RATE
        samples = np.rint(0.5 * 32767.0 * np.sin(2.0 * math.pi * freq * t))
        pcm = samples.astype("<i2")
        buf = io.BytesIO()
        with wave.open(buf, "wb") as w:
            w.setnchannels(1)
            w.setsampwidth(2)
            w.setframerate(SAMPLE_RATE)
            w.writeframes(pcm.tobytes())
        return buf.getvalue()


class RemoteSynthesizer:
    """Vendor-agnostic remote backend: one send callable plus retry policy.

    send(request) must return WAV bytes or raise. Any exception counts as a
    failed try; after the last try the failure surfaces as BackendUnavailable.
    """

    def __init__(
        self,
        send: Callable[[SynthesisRequest], bytes],
        *,
        backend_id: str = "remote",
        tries: int = 3,
        base_delay: float = 0.2,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.backend_id = backend_id
        self._send = send
        self._tries = tries
        self._base_delay = base_delay
        self._sleep = sleep

    def render(self, request: SynthesisRequest) -> bytes:
        last: Exception | None = None
        for attempt in range(self._tries):
            if attempt:
                self._sleep(self._base_delay * 2 ** (attempt - 1))
            try:
                return self._send(request)
            except Exception as e:  # noqa: BLE001 - vendor adapters raise anything
                last = e
                log.warning("synthesis attempt %d/%d failed: %s", attempt + 1, self._tries, e)
        raise BackendUnavailable(str(last))


def http_sender(endpoint: str, api_key: Optional[str]) -> Callable[[SynthesisRequest], bytes]:
    """POST {voice, text, format} to a vendor endpoint, expect WAV bytes back."""
    import httpx

    headers = {"authorization": f"Bearer {api_key}"} if api_key else {}

    def send(request: SynthesisRequest) -> bytes:
        response = httpx.post(
            endpoint,
            json={"voice": request.voice, "text": request.text, "format": request.format},
            headers=headers,
            timeout=30.0,
        )
        response.raise_for_status()
        return response.content

    return send


class TtsGateway:
    """Synthesis front door: validate, consult the cache, render on miss."""

    def __init__(self, backend: SynthesisBackend, cache_dir: Path | str):
        self._backend = backend
        self._dir = Path(cache_dir)
        self._index: dict[str, tuple[int, int, int]] = {}  # hash -> (voice, bytes, ms)
        self._index_lock = threading.Lock()
        self._flights: dict[str, threading.Lock] = {}
        self._flights_lock = threading.Lock()
        self._load_index()

    # -- public surface ----------------------------------------------------

    def list_voices(self) -> tuple[VoiceProfile, ...]:
        return VOICES

    def synthesize(self, request: SynthesisRequest) -> AudioAsset:
        if request.voice not in VOICE_IDS:
            raise UnknownVoice(request.voice)
        if not 1 <= len(request.text) <= MAX_TEXT_CHARS:
            raise TextTooLong(len(request.text))
        if request.format != AUDIO_FORMAT:
            raise ValueError(f"unsupported audio format {request.format!r}")

        h = content_hash(request, self._backend.backend_id)
        cached = self.load_asset(h)
        if cached is not None:
            return cached
        with self._flight_lock(h):
            cached = self.load_asset(h)  # a concurrent flight may have landed it
            if cached is not None:
                return cached
            data = self._backend.render(request)
            duration = wav_duration_ms(data)
            self._store(h, request.voice, data, duration)
            return AudioAsset(h, data, duration)

    def load_asset(self, h: str) -> Optional[AudioAsset]:
        """Fetch a cached asset by hash; None when it was never rendered."""
        path = self._asset_path(h)
        try:
            data = path.read_bytes()
        except FileNotFoundError:
            return None
        return AudioAsset(h, data, wav_duration_ms(data))

    # -- plumbing ----------------------------------------------------------

    def _asset_path(self, h: str) -> Path:
        return self._dir / h[:2] / f"{h}.wav"

    def _flight_lock(self, h: str) -> threading.Lock:
        with self._flights_lock:
            lock = self._flights.get(h)
            if lock is None:
                lock = self._flights[h] = threading.Lock()
            return lock

    def _store(self, h: str, voice: VoiceId, data: bytes, duration_ms: int) -> None:
        path = self._asset_path(h)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_bytes(data)
        os.replace(tmp, path)
        with self._index_lock:
            self._index[h] = (voice, len(data), duration_ms)
            with open(self._dir / "index.tsv", "a", encoding="utf-8") as f:
                f.write(f"{h}\t{voice}\t{len(data)}\t{duration_ms}\n")

    def _load_index(self) -> None:
        try:
            text = (self._dir / "index.tsv").read_text(encoding="utf-8")
        except FileNotFoundError:
            return
        for lineno, row in enumerate(text.splitlines(), start=1):
            parts = row.split("\t")
            try:
                h, voice, nbytes, ms = parts
                self._index[h] = (int(voice), int(nbytes), int(ms))
            except ValueError:
                log.warning("skipping malformed cache index row %d: %r", lineno, row)
