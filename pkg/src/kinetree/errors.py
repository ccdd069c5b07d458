"""Data-level error type shared by all kinetree modules."""

from __future__ import annotations


class AssetError(Exception):
    """Raised for recoverable data-level failures.

    Carries a stable machine-readable ``code`` (e.g. ``"SYNTAX"``,
    ``"OUT_OF_CANON"``, ``"MALFORMED"``) so callers and the CLI can react
    without parsing messages.
    """

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message
