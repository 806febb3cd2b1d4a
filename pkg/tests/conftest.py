from __future__ import annotations

import pytest

from storycast.bookfile import parse_book
from storycast.casting import AgentVoice, CastSheet, HumanChild, assign
from storycast.library import LibraryRoot
from storycast.samples import sample_documents
from storycast.tts import MockSynthesizer, TtsGateway


@pytest.fixture()
def sample_book():
    return parse_book(sample_documents()["sample_patterns.book.json"])


@pytest.fixture()
def sample_cast(sample_book):
    """The canonical demo cast: two synthetic voices plus a child reader."""
    cast = CastSheet.for_book(sample_book)
    cast = assign(cast, "narrator", AgentVoice(1))
    cast = assign(cast, "clara", AgentVoice(2))
    cast = assign(cast, "pip", HumanChild())
    return cast


@pytest.fixture()
def library(tmp_path):
    return LibraryRoot(tmp_path / "library")


@pytest.fixture()
def gateway(tmp_path):
    return TtsGateway(MockSynthesizer(), tmp_path / "cache")
