"""HTTP front end for an annotation store.

The app is a thin JSON layer over AnnotationStore plus a chunk-context
lookup; all sequencing, leasing, and idempotency live in the store. A
static directory can be mounted at the root so the browser client and the
API share one origin.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Iterable

from fastapi import FastAPI, HTTPException, Response
from fastapi.staticfiles import StaticFiles

from .annotate import AnnotationStore, Label, StoreError
from .corpus import Chunk
from .sampling import DEEPEN_THRESHOLD, decide_deepening

logger = logging.getLogger(__name__)

MAX_CONTEXT_RADIUS = 10


class ChunkContext:
    """Document-order neighborhoods around a chunk, for the context panel."""

    def __init__(self, chunks: Iterable[Chunk]):
        self._by_doc: dict[str, list[Chunk]] = {}
        for chunk in chunks:
            self._by_doc.setdefault(chunk.doc_id, []).append(chunk)
        self._position: dict[str, tuple[str, int]] = {}
        for doc_id, doc_chunks in self._by_doc.items():
            doc_chunks.sort(key=lambda c: c.token_start)
            for i, chunk in enumerate(doc_chunks):
                self._position[chunk.chunk_id] = (doc_id, i)

    def window(self, chunk_id: str, radius: int = 2) -> list[dict] | None:
        """The chunk and up to `radius` neighbors on each side, in document
        order, or None for an unknown chunk."""
        if chunk_id not in self._position:
            return None
        doc_id, pos = self._position[chunk_id]
        doc_chunks = self._by_doc[doc_id]
        lo = max(0, pos - radius)
        window = doc_chunks[lo : pos + radius + 1]
        return [
            {**chunk.as_dict(), "focus": chunk.chunk_id == chunk_id}
            for chunk in window
        ]


def create_app(
    store: AnnotationStore,
    context: ChunkContext | None = None,
    threshold: float = DEEPEN_THRESHOLD,
    static_dir: Path | str | None = None,
) -> FastAPI:
    app = FastAPI(title="annotation server", docs_url=None, redoc_url=None)

    def progress_payload(query_id: str) -> dict:
        counts = store.counts(query_id)
        decision = decide_deepening(store.labels_for_query(query_id), threshold)
        return {
            "query_id": query_id,
            **counts,
            "density": decision.density,
            "decision": "deepen" if decision.deepen else "stop",
        }

    @app.get("/api/queries")
    def queries() -> list[dict]:
        out = []
        for query_id in store.query_ids():
            pool = store.candidates(query_id)
            counts = store.counts(query_id)
            out.append(
                {
                    "query_id": query_id,
                    "quote_text": pool[0].quote_text if pool else "",
                    "total": counts["total"],
                    "labeled": counts["labeled"],
                }
            )
        return out

    @app.get("/api/next")
    def next_candidate(annotator: str = "anon"):
        candidate = store.next_candidate(annotator)
        if candidate is None:
            return Response(status_code=204)
        return candidate.as_dict()

    @app.post("/api/label")
    def submit_label(payload: dict) -> dict:
        for key in ("candidate_id", "label", "annotator"):
            if not payload.get(key):
                raise HTTPException(400, detail=f"missing field {key!r}")
        try:
            label = Label(payload["label"])
        except ValueError:
            raise HTTPException(
                400,
                detail=f"unknown label {payload['label']!r}; "
                f"expected one of {sorted(l.value for l in Label)}",
            ) from None
        try:
            store.candidate(payload["candidate_id"])
        except StoreError as err:
            raise HTTPException(404, detail=str(err)) from None
        duration = payload.get("duration_seconds")
        try:
            event = store.submit_label(
                payload["candidate_id"],
                label,
                annotator=payload["annotator"],
                duration_seconds=float(duration) if duration is not None else None,
                client_token=payload.get("client_token"),
            )
        except StoreError as err:
            raise HTTPException(400, detail=str(err)) from None
        return event.as_dict()

    @app.get("/api/progress")
    def progress(query: str | None = None) -> dict:
        known = store.query_ids()
        if query is not None:
            if query not in known:
                raise HTTPException(404, detail=f"unknown query {query!r}")
            return progress_payload(query)
        return {
            "threshold": threshold,
            "queries": [progress_payload(q) for q in known],
        }

    @app.get("/api/context")
    def chunk_context(chunk: str, radius: int = 2) -> dict:
        if not 0 <= radius <= MAX_CONTEXT_RADIUS:
            raise HTTPException(
                400, detail=f"radius must be in 0..{MAX_CONTEXT_RADIUS}"
            )
        if context is None:
            raise HTTPException(404, detail="no corpus context loaded")
        window = context.window(chunk, radius)
        if window is None:
            raise HTTPException(404, detail=f"unknown chunk {chunk!r}")
        return {"chunk_id": chunk, "radius": radius, "chunks": window}

    @app.get("/api/export")
    def export() -> list[dict]:
        return store.export_annotations()

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")
    return app
