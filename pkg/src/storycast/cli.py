"""Server entry point: `storycast [serve] --port 8080 --library ./library`."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import uvicorn

from .api import create_app
from .library import LibraryRoot
from .samples import install_samples
from .tts import MockSynthesizer, RemoteSynthesizer, TtsGateway, http_sender

log = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="storycast",
        description="Serve read-together storybook sessions over HTTP.",
    )
    parser.add_argument("--port", type=int, default=8080, help="listen port (default 8080)")
    parser.add_argument("--host", default="127.0.0.1", help="bind address (default 127.0.0.1)")
    parser.add_argument(
        "--library",
        type=Path,
        default=Path("library"),
        help="library directory for books, sessions and the audio cache",
    )
    parser.add_argument(
        "--tts",
        choices=("mock", "remote"),
        default="mock",
        help="synthesis backend; remote reads TTS_ENDPOINT and TTS_API_KEY",
    )
    parser.add_argument(
        "--allow-voice-reuse",
        action="store_true",
        help="let one synthetic voice read several characters",
    )
    parser.add_argument(
        "--ui",
        type=Path,
        default=None,
        help="serve a built frontend from this directory at /ui",
    )
    parser.add_argument(
        "--no-samples",
        action="store_true",
        help="do not seed an empty library with the bundled sample books",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)

    library = LibraryRoot(args.library)
    if not args.no_samples and not library.list_books():
        ids = install_samples(library)
        log.info("seeded empty library with samples: %s", ", ".join(ids))

    if args.tts == "remote":
        endpoint = os.environ.get("TTS_ENDPOINT")
        if not endpoint:
            print("--tts remote needs TTS_ENDPOINT set", file=sys.stderr)
            return 2
        backend = RemoteSynthesizer(http_sender(endpoint, os.environ.get("TTS_API_KEY")))
    else:
        backend = MockSynthesizer()

    app = create_app(
        library,
        TtsGateway(backend, library.cache_dir),
        allow_voice_reuse=args.allow_voice_reuse,
        ui_dir=args.ui,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


if __name__ == "__main__":
    sys.exit(main())
