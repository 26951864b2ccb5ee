"""Live judgement sessions over a durable store, plus the versioned
HTTP/JSON API the assessor frontend consumes.

State is event-sourced: the posterior is a pure fold of the judgement
log, so any session rebuilds exactly after a crash or restart. Pair
selection is a deterministic function of (session id, step), which keeps
the pending pair stable across processes.

No `from __future__ import annotations` here: the HTTP layer's request
models live inside the app factory, and the framework must see them as
real classes rather than strings when building the routes.
"""

import json
import math
import os
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Any, Sequence

import numpy as np

from .btm import btm_fit, btm_ranks, btm_scores_scaled
from .core import (
    EXACT_THRESHOLD,
    MC_SAMPLES_DEFAULT,
    GradingScheme,
    PreferenceMatrix,
    RankDistribution,
    assign_grade,
    expected_ranks,
    grade_probabilities,
    rank_distributions,
    ranks_from_expected,
    update_posterior,
)
from .errors import CjError, ConflictError, NotFoundError, ValidationError
from .selectors import (
    SELECTOR_KINDS,
    SelectorState,
    beta_entropy,
    entropy_grid,
    max_entropy,
    select_entropy,
    select_random,
)
from .special import log_beta
from .store import SNAPSHOT_EVERY, Store

K_DEFAULT = 10

#: Grid resolution of the Beta density polyline served with reports, so
#: the frontend can draw the pending pair's posterior without doing any
#: distribution math of its own.
DENSITY_POINTS = 101


def _beta_density_curve(alpha: float, beta: float, points: int = DENSITY_POINTS) -> dict[str, list[float]]:
    """Beta pdf sampled on a uniform grid over [0, 1].

    Endpoint values are the analytic limits for shapes >= 1, which is the
    only regime sessions can reach from the uniform prior.
    """
    log_norm = log_beta(alpha, beta)
    xs = [i / (points - 1) for i in range(points)]
    pdf = []
    for x in xs:
        if x == 0.0:
            pdf.append(float(beta) if alpha == 1.0 else 0.0)
        elif x == 1.0:
            pdf.append(float(alpha) if beta == 1.0 else 0.0)
        else:
            pdf.append(
                math.exp((alpha - 1.0) * math.log(x) + (beta - 1.0) * math.log1p(-x) - log_norm)
            )
    return {"x": xs, "pdf": pdf}

#: Stream tags keeping the per-step selection, round shuffling and
#: presentation-order draws independent of each other.
_TAG_SELECT, _TAG_ROUND, _TAG_SIDES = 0, 1, 2


@dataclass(frozen=True)
class Item:
    """One artefact under assessment; content is held by reference only."""

    id: int
    label: str
    content_ref: str | None = None


@dataclass
class Session:
    """In-memory view of one session, rebuilt from the store on demand."""

    id: str
    items: list[Item]
    selector_kind: str
    k_multiplier: int
    judgement_count: int
    pending: tuple[int, int] | None
    matrix: PreferenceMatrix
    created_at: str

    @property
    def n_items(self) -> int:
        return len(self.items)

    @property
    def budget(self) -> int:
        return self.n_items * self.k_multiplier

    @property
    def budget_exceeded(self) -> bool:
        return self.judgement_count >= self.budget

    @property
    def status(self) -> str:
        return "budget-reached" if self.budget_exceeded else "active"

    def position(self, item_id: int) -> int:
        for pos, item in enumerate(self.items, start=1):
            if item.id == item_id:
                return pos
        raise ValidationError(f"item {item_id} is not part of this session")

    def item(self, item_id: int) -> Item:
        return self.items[self.position(item_id) - 1]

    def to_public_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "items": [
                {"id": it.id, "label": it.label, "content_ref": it.content_ref}
                for it in self.items
            ],
            "selector": self.selector_kind,
            "k": self.k_multiplier,
            "budget": self.budget,
            "judgements": self.judgement_count,
            "status": self.status,
            "budget_exceeded": self.budget_exceeded,
            "created_at": self.created_at,
        }


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _session_entropy_int(session_id: str) -> int:
    return int.from_bytes(session_id.encode("utf-8"), "big")


class SessionService:
    """All session operations against one store; the HTTP layer is a
    thin shell over this class."""

    def __init__(self, store: Store):
        self.store = store

    def close(self) -> None:
        self.store.close()

    # -- lifecycle --------------------------------------------------------

    def create_session(
        self,
        items: Sequence[dict[str, Any] | Item],
        selector_kind: str = "entropy",
        k_multiplier: int = K_DEFAULT,
    ) -> Session:
        parsed = [
            it if isinstance(it, Item) else Item(
                id=int(it["id"]), label=str(it["label"]), content_ref=it.get("content_ref")
            )
            for it in items
        ]
        if len(parsed) < 2:
            raise ValidationError("a session needs at least two items")
        ids = [it.id for it in parsed]
        if len(set(ids)) != len(ids):
            raise ValidationError("item ids must be unique")
        if selector_kind not in SELECTOR_KINDS:
            raise ValidationError(
                f"unknown selector kind {selector_kind!r}; expected one of {SELECTOR_KINDS}"
            )
        if k_multiplier < 1:
            raise ValidationError("the budget multiplier must be positive")
        session_id = uuid.uuid4().hex
        self.store.insert_session(
            session_id,
            selector_kind,
            k_multiplier,
            [{"id": it.id, "label": it.label, "content_ref": it.content_ref} for it in parsed],
            created_at=_now(),
        )
        return self.get_session(session_id)

    def get_session(self, session_id: str) -> Session:
        row = self.store.session_row(session_id)
        items = [Item(**entry) for entry in json.loads(row["items_json"])]
        count = self.store.judgement_count(session_id)
        snapshot = self.store.latest_snapshot(session_id)
        if snapshot is not None:
            start, matrix_json = snapshot
            matrix = PreferenceMatrix.from_json_dict(json.loads(matrix_json))
        else:
            start = 0
            matrix = PreferenceMatrix.uniform(len(items))
        session = Session(
            id=session_id,
            items=items,
            selector_kind=row["selector_kind"],
            k_multiplier=int(row["k_multiplier"]),
            judgement_count=count,
            pending=None,
            matrix=matrix,
            created_at=row["created_at"],
        )
        for record in self.store.judgement_rows(session_id, after_seq=start):
            winner_pos = session.position(int(record["winner_id"]))
            loser_id = (
                int(record["right_id"])
                if int(record["winner_id"]) == int(record["left_id"])
                else int(record["left_id"])
            )
            session.matrix = update_posterior(session.matrix, winner_pos, session.position(loser_id))
        if row["pending_json"] is not None:
            pending = json.loads(row["pending_json"])
            session.pending = (int(pending["left"]), int(pending["right"]))
        return session

    # -- judging loop -----------------------------------------------------

    def _select_positions(self, session: Session) -> tuple[int, int]:
        """Deterministic pair choice for the session's next step."""
        sid = _session_entropy_int(session.id)
        step0 = session.judgement_count
        n = session.n_items
        if session.selector_kind == "nrp":
            pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
            round_index, offset = divmod(step0, len(pairs))
            rng = np.random.default_rng(np.random.SeedSequence([sid, _TAG_ROUND, round_index]))
            order = rng.permutation(len(pairs))
            return pairs[order[offset]]
        rng = np.random.default_rng(np.random.SeedSequence([sid, _TAG_SELECT, step0]))
        state = SelectorState(kind=session.selector_kind, rng=rng)
        if session.selector_kind == "random":
            return select_random(n, state)
        return select_entropy(session.matrix, state)

    def next_pair(self, session_id: str) -> dict[str, Any]:
        session = self.get_session(session_id)
        if session.pending is None:
            i_pos, j_pos = self._select_positions(session)
            sid = _session_entropy_int(session.id)
            sides_rng = np.random.default_rng(
                np.random.SeedSequence([sid, _TAG_SIDES, session.judgement_count])
            )
            left_pos, right_pos = (j_pos, i_pos) if sides_rng.random() < 0.5 else (i_pos, j_pos)
            left_id = session.items[left_pos - 1].id
            right_id = session.items[right_pos - 1].id
            self.store.set_pending(session_id, {"left": left_id, "right": right_id})
            session.pending = (left_id, right_id)
        left_id, right_id = session.pending
        left_pos, right_pos = session.position(left_id), session.position(right_id)
        lo, hi = sorted((left_pos, right_pos))
        left, right = session.item(left_id), session.item(right_id)
        return {
            "left": {"id": left.id, "label": left.label, "content_ref": left.content_ref},
            "right": {"id": right.id, "label": right.label, "content_ref": right.content_ref},
            "step": session.judgement_count + 1,
            "entropy": float(beta_entropy(session.matrix.cell(lo, hi))),
            "prob_left": float(session.matrix.win_prob(left_pos, right_pos)),
            "status": session.status,
            "budget_exceeded": session.budget_exceeded,
        }

    def submit_judgement(
        self,
        session_id: str,
        left: int,
        right: int,
        winner: int,
        assessor: str | None = None,
    ) -> dict[str, Any]:
        session = self.get_session(session_id)
        if session.pending is None:
            raise ConflictError("no pair is pending; fetch the next pair first")
        if {left, right} != set(session.pending):
            raise ConflictError(
                "judgement targets a stale pair",
                detail={"pending": {"left": session.pending[0], "right": session.pending[1]}},
            )
        if winner not in (left, right):
            raise ValidationError(f"winner {winner} is not part of the judged pair")
        loser = right if winner == left else left
        matrix = update_posterior(session.matrix, session.position(winner), session.position(loser))
        seq = session.judgement_count + 1
        snapshot_json = None
        if seq % SNAPSHOT_EVERY == 0:
            snapshot_json = json.dumps(matrix.to_json_dict())
        self.store.append_judgement(
            session_id,
            seq,
            left_id=left,
            right_id=right,
            winner_id=winner,
            assessor=assessor,
            selector_kind=session.selector_kind,
            created_at=_now(),
            snapshot_json=snapshot_json,
        )
        session.matrix = matrix
        session.judgement_count = seq
        session.pending = None
        expected = expected_ranks(matrix)
        return {
            "step": seq,
            "expected_ranks": [
                {"item": item.id, "expected_rank": float(expected[pos])}
                for pos, item in enumerate(session.items)
            ],
            "max_entropy": float(max_entropy(matrix)),
            "status": session.status,
            "budget_exceeded": session.budget_exceeded,
        }

    # -- reporting --------------------------------------------------------

    def _distributions(
        self, session: Session, samples: int
    ) -> list[RankDistribution]:
        seed_root = np.random.SeedSequence(
            [_session_entropy_int(session.id), session.judgement_count]
        )
        base_seed = int(seed_root.generate_state(1)[0] >> 1)
        return rank_distributions(
            session.matrix, max_exact_n=EXACT_THRESHOLD, samples=samples, seed=base_seed
        )

    def _max_entropy_series(self, session: Session) -> list[float]:
        matrix = PreferenceMatrix.uniform(session.n_items)
        series = [float(max_entropy(matrix))]
        for record in self.store.judgement_rows(session.id):
            winner = int(record["winner_id"])
            loser = (
                int(record["right_id"])
                if winner == int(record["left_id"])
                else int(record["left_id"])
            )
            matrix = update_posterior(matrix, session.position(winner), session.position(loser))
            series.append(float(max_entropy(matrix)))
        return series

    def _omega_matrix(self, session: Session) -> np.ndarray:
        """Dense win-count matrix by item position, folded from the log."""
        omega = np.zeros((session.n_items, session.n_items), dtype=int)
        for record in self.store.judgement_rows(session.id):
            winner = int(record["winner_id"])
            loser = (
                int(record["right_id"])
                if winner == int(record["left_id"])
                else int(record["left_id"])
            )
            omega[session.position(winner) - 1, session.position(loser) - 1] += 1
        return omega

    def _pending_section(self, session: Session) -> dict[str, Any] | None:
        """Pending pair metadata plus its posterior density, left-oriented."""
        if session.pending is None:
            return None
        left_id, right_id = session.pending
        left_pos, right_pos = session.position(left_id), session.position(right_id)
        lo, hi = sorted((left_pos, right_pos))
        cell = session.matrix.cell(lo, hi)
        alpha, beta = (cell.alpha, cell.beta) if left_pos == lo else (cell.beta, cell.alpha)
        return {
            "left": left_id,
            "right": right_id,
            "entropy": float(beta_entropy(cell)),
            "prob_left": float(session.matrix.win_prob(left_pos, right_pos)),
            "density": _beta_density_curve(alpha, beta),
        }

    def _btm_section(self, session: Session) -> dict[str, Any]:
        state = btm_fit(self._omega_matrix(session).astype(float))
        ranks = btm_ranks(state)
        scores = btm_scores_scaled(state)
        return {
            "scores": [
                {"item": item.id, "score": float(scores[pos])}
                for pos, item in enumerate(session.items)
            ],
            "ranks": [
                {"item": item.id, "rank": int(ranks[pos])}
                for pos, item in enumerate(session.items)
            ],
            "converged": state.converged,
            "smoothed": state.smoothed,
        }

    def report(
        self,
        session_id: str,
        include_btm: bool = False,
        samples: int = MC_SAMPLES_DEFAULT,
    ) -> dict[str, Any]:
        session = self.get_session(session_id)
        expected = expected_ranks(session.matrix)
        ranks = ranks_from_expected(expected)
        dists = self._distributions(session, samples)
        grid = entropy_grid(session.matrix)
        grid_json = [
            [None if i == j else float(grid[i, j]) for j in range(session.n_items)]
            for i in range(session.n_items)
        ]
        report: dict[str, Any] = {
            "session": session.to_public_dict(),
            "ranks": [
                {
                    "item": item.id,
                    "label": item.label,
                    "rank": int(ranks[pos]),
                    "expected_rank": float(expected[pos]),
                }
                for pos, item in enumerate(session.items)
            ],
            "distributions": [
                {
                    "item": session.items[pos].id,
                    "probs": [float(p) for p in dist.probs],
                    "expected_rank": float(dist.expected_rank),
                    "method": dist.method,
                    "mc_std_error": None
                    if dist.mc_std_error is None
                    else float(dist.mc_std_error),
                }
                for pos, dist in enumerate(dists)
            ],
            "entropy": {
                "grid": grid_json,
                "max": float(max_entropy(session.matrix)),
                "series": self._max_entropy_series(session),
            },
            "pending": self._pending_section(session),
        }
        if include_btm:
            report["btm"] = self._btm_section(session)
        return report

    def grade_report(
        self,
        session_id: str,
        labels: Sequence[str],
        counts: Sequence[int],
        threshold: float = 0.9,
        samples: int = MC_SAMPLES_DEFAULT,
    ) -> dict[str, Any]:
        session = self.get_session(session_id)
        scheme = GradingScheme(
            labels=tuple(str(label) for label in labels),
            counts=tuple(int(c) for c in counts),
            threshold=float(threshold),
        )
        dists = self._distributions(session, samples)
        grades = []
        for pos, dist in enumerate(dists):
            probs = grade_probabilities(dist, scheme)
            grades.append(
                {
                    "item": session.items[pos].id,
                    "label": session.items[pos].label,
                    "probs": {label: float(p) for label, p in zip(scheme.labels, probs)},
                    "assigned": assign_grade(probs, scheme),
                }
            )
        return {
            "labels": list(scheme.labels),
            "counts": list(scheme.counts),
            "threshold": scheme.threshold,
            "grades": grades,
        }

    # -- portability ------------------------------------------------------

    def export_session(self, session_id: str) -> dict[str, Any]:
        session = self.get_session(session_id)
        records = [
            {
                "seq": int(r["seq"]),
                "left": int(r["left_id"]),
                "right": int(r["right_id"]),
                "winner": int(r["winner_id"]),
                "assessor": r["assessor"],
                "selector": r["selector_kind"],
                "created_at": r["created_at"],
            }
            for r in self.store.judgement_rows(session_id)
        ]
        return {
            "version": 1,
            "session": session.to_public_dict(),
            "judgements": records,
            "matrix": session.matrix.to_json_dict(),
            "omega": self._omega_matrix(session).tolist(),
        }

    def import_session(self, payload: dict[str, Any]) -> Session:
        """Recreate an exported session, log included, under its old id."""
        info = payload["session"]
        self.store.insert_session(
            info["id"],
            info["selector"],
            int(info["k"]),
            info["items"],
            created_at=info.get("created_at", _now()),
        )
        for record in payload.get("judgements", []):
            self.store.append_judgement(
                info["id"],
                int(record["seq"]),
                left_id=int(record["left"]),
                right_id=int(record["right"]),
                winner_id=int(record["winner"]),
                assessor=record.get("assessor"),
                selector_kind=record.get("selector", info["selector"]),
                created_at=record.get("created_at", _now()),
            )
        return self.get_session(info["id"])


# -- HTTP layer -----------------------------------------------------------


def create_app(store_path: str | None = None, token: str | None = None):
    """FastAPI application exposing the /v1 API over one store file.

    The store path falls back to the CJ_ENGINE_STORE environment variable;
    a non-empty token (or CJ_ENGINE_TOKEN) switches on bearer-token auth.
    """
    from contextlib import asynccontextmanager

    from fastapi import FastAPI, Request
    from fastapi.exceptions import RequestValidationError
    from fastapi.responses import JSONResponse
    from pydantic import BaseModel

    path = store_path or os.environ.get("CJ_ENGINE_STORE") or "cj-engine.db"
    auth_token = token if token is not None else os.environ.get("CJ_ENGINE_TOKEN")
    service = SessionService(Store(path))

    class ItemBody(BaseModel):
        id: int
        label: str
        content_ref: str | None = None

    class CreateSessionBody(BaseModel):
        items: list[ItemBody]
        selector: str = "entropy"
        k: int = K_DEFAULT

    class JudgementBody(BaseModel):
        left: int
        right: int
        winner: int
        assessor: str | None = None

    class GradesBody(BaseModel):
        labels: list[str]
        counts: list[int]
        threshold: float = 0.9

    @asynccontextmanager
    async def lifespan(app):
        yield
        service.close()

    app = FastAPI(title="cj-engine", docs_url=None, redoc_url=None, lifespan=lifespan)
    app.state.service = service

    @app.middleware("http")
    async def check_token(request: Request, call_next):
        if (
            auth_token
            and request.url.path != "/v1/health"
            and request.headers.get("authorization") != f"Bearer {auth_token}"
        ):
            return JSONResponse(
                status_code=401,
                content={"code": "unauthorized", "message": "missing or bad token", "detail": None},
            )
        return await call_next(request)

    @app.exception_handler(CjError)
    async def handle_engine_error(request: Request, exc: CjError):
        status = 400
        if isinstance(exc, NotFoundError):
            status = 404
        elif isinstance(exc, ConflictError):
            status = 409
        return JSONResponse(
            status_code=status,
            content={"code": exc.code, "message": str(exc), "detail": exc.detail},
        )

    @app.exception_handler(RequestValidationError)
    async def handle_body_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422,
            content={"code": "validation", "message": "invalid request", "detail": exc.errors()},
        )

    @app.get("/v1/health")
    def health():
        from importlib.metadata import PackageNotFoundError, version

        try:
            pkg_version = version("cj-engine")
        except PackageNotFoundError:
            pkg_version = "unknown"
        return {"status": "ok", "version": pkg_version}

    @app.post("/v1/sessions", status_code=201)
    def post_session(body: CreateSessionBody):
        session = service.create_session(
            [item.model_dump() for item in body.items], body.selector, body.k
        )
        return session.to_public_dict()

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str):
        return service.get_session(session_id).to_public_dict()

    @app.get("/v1/sessions/{session_id}/next-pair")
    def get_next_pair(session_id: str):
        return service.next_pair(session_id)

    @app.post("/v1/sessions/{session_id}/judgements")
    def post_judgement(session_id: str, body: JudgementBody):
        return service.submit_judgement(
            session_id, body.left, body.right, body.winner, body.assessor
        )

    @app.get("/v1/sessions/{session_id}/report")
    def get_report(
        session_id: str, include_btm: bool = False, samples: int = MC_SAMPLES_DEFAULT
    ):
        return service.report(session_id, include_btm=include_btm, samples=samples)

    @app.post("/v1/sessions/{session_id}/grades")
    def post_grades(session_id: str, body: GradesBody):
        return service.grade_report(session_id, body.labels, body.counts, body.threshold)

    @app.get("/v1/sessions/{session_id}/export")
    def get_export(session_id: str):
        return service.export_session(session_id)

    return app
