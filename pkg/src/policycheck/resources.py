"""Access to the packaged default config files."""

from __future__ import annotations

from importlib import resources


def default_text(name: str) -> str:
    """Read a packaged data file (e.g. ``taxonomy.txt``) as UTF-8 text."""
    return resources.files("policycheck.data").joinpath(name).read_text(encoding="utf-8")


def default_path(name: str):
    """Filesystem path of a packaged data file (valid for installed packages)."""
    return resources.files("policycheck.data").joinpath(name)
