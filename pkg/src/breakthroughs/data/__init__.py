"""Bundled example inputs; see README.md in this directory."""

from importlib.resources import files


def path(name: str):
    """Filesystem path of a bundled data file."""
    return files(__name__) / name
