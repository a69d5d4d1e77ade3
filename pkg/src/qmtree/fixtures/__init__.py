"""Shipped example models: a coordinate chain, a diagnostic star, and a
model that fails the qualitative Markov check."""

from importlib.resources import files
from pathlib import Path

NAMES = ("chain3", "star_diagnostic", "bad_markov")


def fixture_path(name: str) -> Path:
    """Filesystem path of a shipped fixture (without the .json suffix)."""
    if name not in NAMES:
        raise KeyError(f"unknown fixture {name!r}; choose from {NAMES}")
    return Path(str(files(__package__).joinpath(f"{name}.json")))
