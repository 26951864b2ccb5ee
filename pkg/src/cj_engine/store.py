"""Single-file session persistence: sessions, an append-only judgement
log, and periodic posterior snapshots in SQLite.

All writes commit before the caller acknowledges anything to a client,
and a process lock serializes them, so a session can always be rebuilt
by folding its log over the latest snapshot.
"""

from __future__ import annotations

import json
import sqlite3
import threading
from pathlib import Path
from typing import Any

from .errors import ConflictError, NotFoundError

#: A posterior snapshot is written every this many judgements.
SNAPSHOT_EVERY = 25

_SCHEMA = """
CREATE TABLE IF NOT EXISTS sessions (
    id TEXT PRIMARY KEY,
    selector_kind TEXT NOT NULL,
    k_multiplier INTEGER NOT NULL,
    items_json TEXT NOT NULL,
    pending_json TEXT,
    created_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS judgements (
    session_id TEXT NOT NULL REFERENCES sessions(id),
    seq INTEGER NOT NULL,
    left_id INTEGER NOT NULL,
    right_id INTEGER NOT NULL,
    winner_id INTEGER NOT NULL,
    assessor TEXT,
    selector_kind TEXT NOT NULL,
    created_at TEXT NOT NULL,
    PRIMARY KEY (session_id, seq)
);
CREATE TABLE IF NOT EXISTS snapshots (
    session_id TEXT NOT NULL REFERENCES sessions(id),
    seq INTEGER NOT NULL,
    matrix_json TEXT NOT NULL,
    PRIMARY KEY (session_id, seq)
);
"""


class Store:
    """SQLite-backed storage shared by the service layer and the CLI."""

    def __init__(self, path: str | Path):
        self.path = str(path)
        self._lock = threading.Lock()
        self._conn = sqlite3.connect(self.path, check_same_thread=False)
        self._conn.row_factory = sqlite3.Row
        with self._lock:
            self._conn.executescript(_SCHEMA)
            self._conn.commit()

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    # -- sessions ---------------------------------------------------------

    def insert_session(
        self,
        session_id: str,
        selector_kind: str,
        k_multiplier: int,
        items: list[dict[str, Any]],
        created_at: str,
    ) -> None:
        with self._lock:
            try:
                self._conn.execute(
                    "INSERT INTO sessions (id, selector_kind, k_multiplier, items_json, created_at)"
                    " VALUES (?, ?, ?, ?, ?)",
                    (session_id, selector_kind, k_multiplier, json.dumps(items), created_at),
                )
            except sqlite3.IntegrityError as exc:
                raise ConflictError(f"session {session_id} already exists") from exc
            self._conn.commit()

    def session_row(self, session_id: str) -> sqlite3.Row:
        with self._lock:
            row = self._conn.execute(
                "SELECT * FROM sessions WHERE id = ?", (session_id,)
            ).fetchone()
        if row is None:
            raise NotFoundError(f"no session {session_id}")
        return row

    def set_pending(self, session_id: str, pending: dict[str, int] | None) -> None:
        payload = None if pending is None else json.dumps(pending)
        with self._lock:
            self._conn.execute(
                "UPDATE sessions SET pending_json = ? WHERE id = ?", (payload, session_id)
            )
            self._conn.commit()

    # -- judgement log ----------------------------------------------------

    def append_judgement(
        self,
        session_id: str,
        seq: int,
        left_id: int,
        right_id: int,
        winner_id: int,
        assessor: str | None,
        selector_kind: str,
        created_at: str,
        snapshot_json: str | None = None,
    ) -> None:
        """Append one record, clear the pending pair and optionally store a
        snapshot, all in a single durable transaction."""
        with self._lock:
            try:
                self._conn.execute(
                    "INSERT INTO judgements (session_id, seq, left_id, right_id, winner_id,"
                    " assessor, selector_kind, created_at) VALUES (?, ?, ?, ?, ?, ?, ?, ?)",
                    (session_id, seq, left_id, right_id, winner_id, assessor, selector_kind, created_at),
                )
                if snapshot_json is not None:
                    self._conn.execute(
                        "INSERT OR REPLACE INTO snapshots (session_id, seq, matrix_json)"
                        " VALUES (?, ?, ?)",
                        (session_id, seq, snapshot_json),
                    )
                self._conn.execute(
                    "UPDATE sessions SET pending_json = NULL WHERE id = ?", (session_id,)
                )
            except sqlite3.IntegrityError as exc:
                self._conn.rollback()
                raise ConflictError(f"judgement {seq} already recorded") from exc
            self._conn.commit()

    def judgement_rows(self, session_id: str, after_seq: int = 0) -> list[sqlite3.Row]:
        with self._lock:
            return self._conn.execute(
                "SELECT * FROM judgements WHERE session_id = ? AND seq > ? ORDER BY seq",
                (session_id, after_seq),
            ).fetchall()

    def judgement_count(self, session_id: str) -> int:
        with self._lock:
            row = self._conn.execute(
                "SELECT COUNT(*) AS c FROM judgements WHERE session_id = ?", (session_id,)
            ).fetchone()
        return int(row["c"])

    def latest_snapshot(self, session_id: str) -> tuple[int, str] | None:
        with self._lock:
            row = self._conn.execute(
                "SELECT seq, matrix_json FROM snapshots WHERE session_id = ?"
                " ORDER BY seq DESC LIMIT 1",
                (session_id,),
            ).fetchone()
        if row is None:
            return None
        return int(row["seq"]), row["matrix_json"]
