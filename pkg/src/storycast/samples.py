"""Access to the sample books shipped inside the package."""

from __future__ import annotations

from importlib import resources

from .library import LibraryRoot


def sample_documents() -> dict[str, bytes]:
    """Map of file name -> document bytes for every bundled sample."""
    root = resources.files("storycast") / "samples"
    return {
        entry.name: entry.read_bytes()
        for entry in sorted(root.iterdir(), key=lambda e: e.name)
        if entry.name.endswith(".book.json")
    }


def install_samples(library: LibraryRoot) -> tuple[str, ...]:
    """Import every bundled sample into a library; returns the book ids."""
    return tuple(library.import_book(doc) for doc in sample_documents().values())
