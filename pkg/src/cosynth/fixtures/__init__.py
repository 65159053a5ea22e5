"""Bundled three-robot case-study fixtures (data files; nothing hard-coded)."""

from importlib import resources
from pathlib import Path


def fixture_path(name: str) -> Path:
    """Filesystem path of a bundled fixture file, e.g. ``casestudy.cfg``."""
    root = resources.files(__package__)
    path = Path(str(root / name))
    if not path.exists():
        raise FileNotFoundError(f"no bundled fixture named {name!r}")
    return path


def expected_path(name: str) -> Path:
    """Path of a golden automaton for the case-study scenario."""
    return fixture_path(f"expected/{name}")
