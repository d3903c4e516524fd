"""Plain-text lexicons shipped with the package (UTF-8, one entry per line)."""

from __future__ import annotations

from functools import lru_cache
from importlib import resources


def read_lines(name: str) -> list[str]:
    text = resources.files(__name__).joinpath(name).read_text(encoding="utf-8")
    return [
        line.strip()
        for line in text.splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    ]


@lru_cache(maxsize=None)
def lexicon(name: str) -> frozenset[str]:
    """Lowercased word set from ``<name>.txt``."""
    return frozenset(line.lower() for line in read_lines(f"{name}.txt"))
