"""HTTP API: upload a table once, learn its graph, then answer why-queries.

Sessions are immutable after learning; re-learning replaces the graph
atomically.  The query path touches neither the statistical engine nor the
learner, so responses stay interactive.
"""

from __future__ import annotations

import io
import json
import threading
import uuid
from pathlib import Path

import pandas as pd
from fastapi import FastAPI, File, HTTPException, UploadFile
from fastapi.responses import JSONResponse

from .explain import DEFAULT_EPSILON_FRAC, eval_delta as eval_query_delta, explain as run_explain, make_query
from . import tabular
from .discovery import AugmentedPag, LearnerConfig, learn
from .explain import DegenerateQueryError, QueryError
from .semantics import translation_to_json, translate


class Session:
    def __init__(self, dataset_id, dataset):
        self.dataset_id = dataset_id
        self.dataset = dataset
        self.fd_graph = None
        self.pag = None
        self.config = None


class SessionStore:
    """In-memory sessions with optional directory persistence."""

    def __init__(self, persist_dir=None):
        self._sessions = {}
        self._lock = threading.Lock()
        self.persist_dir = Path(persist_dir) if persist_dir else None
        if self.persist_dir:
            self.persist_dir.mkdir(parents=True, exist_ok=True)
            self._restore()

    def _restore(self):
        index = self.persist_dir / "sessions.json"
        if not index.exists():
            return
        for entry in json.loads(index.read_text()):
            sid = entry["id"]
            data_path = self.persist_dir / f"{sid}.csv"
            if not data_path.exists():
                continue
            session = Session(sid, tabular.load_csv(data_path))
            graph_path = self.persist_dir / f"{sid}.graph.json"
            if graph_path.exists():
                session.pag = AugmentedPag.from_json(graph_path.read_text())
            self._sessions[sid] = session

    def _persist(self):
        if not self.persist_dir:
            return
        index = [{"id": sid} for sid in sorted(self._sessions)]
        (self.persist_dir / "sessions.json").write_text(json.dumps(index, indent=2))

    def create(self, dataset, raw_csv=None):
        sid = uuid.uuid4().hex[:12]
        with self._lock:
            self._sessions[sid] = Session(sid, dataset)
            if self.persist_dir and raw_csv is not None:
                (self.persist_dir / f"{sid}.csv").write_bytes(raw_csv)
            self._persist()
        return self._sessions[sid]

    def get(self, sid):
        session = self._sessions.get(sid)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session id: {sid}")
        return session

    def set_graph(self, sid, fd_graph, pag, config):
        with self._lock:
            session = self.get(sid)
            session.fd_graph = fd_graph
            session.pag = pag
            session.config = config
            if self.persist_dir:
                (self.persist_dir / f"{sid}.graph.json").write_text(pag.to_json_str())


def create_app(persist_dir=None):
    app = FastAPI(title="causalwhy")
    store = SessionStore(persist_dir)
    app.state.store = store

    @app.get("/v1/health")
    def health():
        return {"status": "ok"}

    @app.post("/v1/datasets")
    async def upload(file: UploadFile = File(...)):
        raw = await file.read()
        try:
            import csv as csv_mod

            header_line = raw.split(b"\n", 1)[0].decode("utf-8")
            header = next(csv_mod.reader([header_line]), [])
            if len(header) != len(set(header)):
                raise ValueError("duplicate header names")
            df = pd.read_csv(io.BytesIO(raw), dtype=object, na_values=[""])
            dataset = tabular.from_dataframe(_infer_types(df))
        except Exception as exc:
            raise HTTPException(status_code=400, detail=f"malformed CSV: {exc}") from exc
        session = store.create(dataset, raw_csv=raw)
        return {"id": session.dataset_id, "schema": dataset.schema()}

    @app.post("/v1/datasets/{sid}/learn")
    def learn_graph(sid: str, config: dict | None = None):
        session = store.get(sid)
        config = config or {}
        try:
            cfg = LearnerConfig(
                alpha=float(config.get("alpha", 0.05)),
                max_cond_size=int(config.get("max_cond_size", 3)),
                bins=int(config.get("bins", 5)),
            )
        except (ValueError, TypeError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        pag = learn(session.dataset, cfg=cfg)
        store.set_graph(sid, None, pag, cfg)
        return pag.to_json()

    @app.get("/v1/datasets/{sid}/graph")
    def get_graph(sid: str):
        session = store.get(sid)
        if session.pag is None:
            raise HTTPException(status_code=409, detail="no graph learned for this session yet")
        return session.pag.to_json()

    @app.post("/v1/datasets/{sid}/why")
    def why(sid: str, body: dict):
        session = store.get(sid)
        if session.pag is None:
            raise HTTPException(status_code=409, detail="learn a graph before issuing why-queries")
        try:
            fg = body["foreground"]
            background = [
                tabular.Filter(b["dim"], b["value"]) for b in body.get("background", [])
            ]
            top = body.get("top")
            query = make_query(
                session.dataset,
                measure=body["measure"],
                agg=body["agg"],
                foreground=fg["dim"],
                value_1=fg["v1"],
                value_2=fg["v2"],
                background=background,
                epsilon_frac=float(body.get("epsilon_frac", DEFAULT_EPSILON_FRAC)),
                sigma=body.get("sigma"),
            )
        except KeyError as exc:
            raise HTTPException(status_code=400, detail=f"missing field: {exc}") from exc
        except (DegenerateQueryError, QueryError, tabular.TabularError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        delta = eval_query_delta(session.dataset, query)
        if delta <= query.epsilon:
            raise HTTPException(status_code=422, detail="query gap does not exceed epsilon")
        try:
            results = run_explain(session.dataset, session.pag, query)
        except (DegenerateQueryError, QueryError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        translation = translate(
            session.pag, query.measure, query.foreground, query.background_dimensions()
        )
        if top is not None:
            results = results[: int(top)]
        return JSONResponse(
            {
                "delta": delta,
                "swapped": query.swapped,
                "epsilon": query.epsilon,
                "explanations": [e.to_json() for e in results],
                "semantics": translation_to_json(translation),
            }
        )

    _mount_frontend(app)
    return app


def _mount_frontend(app):
    """Serve the browser client at /ui when a built frontend sits next to the
    package checkout."""
    root = Path(__file__).resolve().parents[2] / "frontend"
    if (root / "index.html").exists() and (root / "dist").exists():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=root, html=True), name="ui")


def _infer_types(df):
    df = df.dropna(axis=0, how="any")
    out = {}
    for name in df.columns:
        numeric = pd.to_numeric(df[name], errors="coerce")
        out[name] = numeric if not numeric.isna().any() else df[name]
    return pd.DataFrame(out)
