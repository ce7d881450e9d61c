"""Shared exception types, mapped onto CLI exit codes."""

from __future__ import annotations


class ConfigError(Exception):
    """Bad configuration or usage (exit code 1)."""


class DataError(Exception):
    """Malformed or inconsistent input data (exit code 2)."""

    def __init__(self, message: str, doc_id: str | None = None, line: int | None = None) -> None:
        where = []
        if doc_id is not None:
            where.append(f"doc={doc_id}")
        if line is not None:
            where.append(f"line={line}")
        super().__init__(f"{message}" + (f" [{', '.join(where)}]" if where else ""))
        self.doc_id = doc_id
        self.line = line
