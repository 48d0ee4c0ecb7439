"""HTTP service exposing the catalog, prediction, trace, and provenance.

Stateless across requests except a bounded LRU cache of recent traces
(capacity 64); evicted trace ids answer 404 with the stable error name
``TraceEvicted``. Every error payload is ``{"error": <engine error name>,
"detail": <message>}`` with client-input failures on 4xx and engine
failures on 5xx.
"""

from __future__ import annotations

import json
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import paths
from .datasets import (
    DATASET_IDS,
    graph_from_document,
    load_dataset,
    select_inference_target,
)
from .errors import (
    DuplicateEdge,
    EmptyGraph,
    EngineError,
    IndexOutOfRange,
    InputStepHasNoProvenance,
    InvalidSelector,
    InvalidTarget,
    ParseError,
    RaggedFeatures,
    SchemaError,
    ShapeMismatch,
    TooLargeToTrace,
    TraceEvicted,
    UnknownDataset,
    UnknownLayer,
    UnknownModel,
    UnknownNode,
    UnknownStep,
    UnknownTrace,
)
from .model import Model, list_models, load_model, resolve_bundle
from .trace import Trace, cell_provenance, serialize_trace

TRACE_CACHE_CAPACITY = 64

_CLIENT_ERRORS = (
    ParseError, SchemaError, InvalidTarget, InvalidSelector, UnknownDataset,
    UnknownModel, ShapeMismatch, EmptyGraph, IndexOutOfRange, RaggedFeatures,
    DuplicateEdge, TooLargeToTrace, InputStepHasNoProvenance,
)
_NOT_FOUND_ERRORS = (UnknownTrace, TraceEvicted, UnknownStep, UnknownLayer,
                     UnknownNode)

_TASK_ALIASES = {
    "node": "node_classification",
    "graph": "graph_classification",
    "link": "link_prediction",
    "node_classification": "node_classification",
    "graph_classification": "graph_classification",
    "link_prediction": "link_prediction",
}


@dataclass
class ServiceConfig:
    port: int = 8000
    bundle_dir: Path = field(default_factory=paths.bundle_dir)
    dataset_dir: Path = field(default_factory=paths.dataset_dir)
    max_trace_nodes: int = 2000
    cors_allowed: bool = True

    def validate(self) -> None:
        if not (1 <= self.port <= 65535):
            raise ValueError(f"port {self.port} outside [1, 65535]")
        for label, d in (("bundle_dir", self.bundle_dir),
                         ("dataset_dir", self.dataset_dir)):
            if not Path(d).is_dir():
                raise ValueError(f"{label} {d} does not exist")


class PredictRequest(BaseModel):
    model: str
    task: str
    dataset: str | None = None
    graph_json: dict | None = None
    target: int | list[int] | str | None = None
    seed: int = 0


class _TraceCache:
    """LRU of trace_id -> (serialized bytes, Trace)."""

    def __init__(self, capacity: int = TRACE_CACHE_CAPACITY) -> None:
        self.capacity = capacity
        self._entries: OrderedDict[str, tuple[bytes, Trace]] = OrderedDict()
        self._evicted: set[str] = set()

    def put(self, trace: Trace, raw: bytes) -> None:
        self._entries[trace.trace_id] = (raw, trace)
        self._entries.move_to_end(trace.trace_id)
        self._evicted.discard(trace.trace_id)
        while len(self._entries) > self.capacity:
            evicted_id, _ = self._entries.popitem(last=False)
            self._evicted.add(evicted_id)

    def get(self, trace_id: str) -> tuple[bytes, Trace]:
        if trace_id in self._entries:
            self._entries.move_to_end(trace_id)
            return self._entries[trace_id]
        if trace_id in self._evicted:
            raise TraceEvicted(f"trace {trace_id} was evicted from the cache")
        raise UnknownTrace(f"no trace {trace_id}")


def _error_response(exc: EngineError) -> JSONResponse:
    if isinstance(exc, _NOT_FOUND_ERRORS):
        status = 404
    elif isinstance(exc, _CLIENT_ERRORS):
        status = 400
    else:
        status = 500
    return JSONResponse(status_code=status,
                        content={"error": exc.name, "detail": str(exc)})


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    config.validate()
    app = FastAPI(title="gnnscope", version="0.1.0")
    if config.cors_allowed:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(CORSMiddleware, allow_origins=["*"],
                           allow_methods=["*"], allow_headers=["*"])

    cache = _TraceCache()
    models: dict[str, Model] = {}

    def _model_for(variant: str, task: str, dataset: str | None) -> Model:
        entry = resolve_bundle(variant, task, dataset,
                               bundle_dir=config.bundle_dir)
        key = str(entry.path)
        if key not in models:
            models[key] = load_model(entry)
        return models[key]

    @app.exception_handler(EngineError)
    async def _engine_error(_req: Request, exc: EngineError):
        return _error_response(exc)

    @app.exception_handler(RequestValidationError)
    async def _bad_request(_req: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content={"error": "SchemaError",
                                     "detail": str(exc.errors())})

    @app.get("/v1/models")
    def get_models():
        return [e.to_dict() for e in list_models(config.bundle_dir)]

    @app.get("/v1/datasets")
    def get_datasets():
        out = []
        for dataset_id in DATASET_IDS:
            descriptor, _ = load_dataset(dataset_id, config.dataset_dir)
            out.append({
                "id": descriptor.id,
                "kind": descriptor.kind,
                "graph_count": descriptor.graph_count,
                "feature_dim": descriptor.feature_dim,
                "class_names": list(descriptor.class_names),
            })
        return out

    @app.post("/v1/predict")
    def post_predict(body: PredictRequest):
        task = _TASK_ALIASES.get(body.task)
        if task is None:
            raise InvalidSelector(f"unknown task {body.task!r}")
        if (body.dataset is None) == (body.graph_json is None):
            raise InvalidSelector(
                "provide exactly one of 'dataset' or 'graph_json'"
            )
        if body.graph_json is not None:
            graph = graph_from_document(body.graph_json)
            target = body.target
            if isinstance(target, list):
                target = tuple(target)
        else:
            dataset = load_dataset(body.dataset, config.dataset_dir)
            selector = body.target
            if isinstance(selector, list):
                selector = tuple(selector)
            graph, target = select_inference_target(dataset, task, selector)
        model = _model_for(body.model, task,
                           body.dataset if body.dataset else None)
        prediction, trace = model.predict(
            graph, target, rng_seed=body.seed,
            max_trace_nodes=config.max_trace_nodes,
        )
        cache.put(trace, serialize_trace(trace))
        return {"prediction": prediction.to_dict(),
                "trace_id": prediction.trace_id}

    @app.get("/v1/trace/{trace_id}")
    def get_trace(trace_id: str):
        raw, _ = cache.get(trace_id)
        return Response(content=raw, media_type="application/json")

    @app.get("/v1/trace/{trace_id}/provenance")
    def get_provenance(trace_id: str, step: str, cell: int):
        _, trace = cache.get(trace_id)
        prov = cell_provenance(trace, step, cell)
        return {
            "target": {"step_id": prov.target[0], "cell": prov.target[1]},
            "op_kind": prov.op_kind,
            "terms": [
                {"step_id": s, "cell": c, "coefficient": coeff}
                for s, c, coeff in prov.terms
            ],
        }

    return app


def serve(config: ServiceConfig) -> None:
    """Validate the config and run the service until interrupted."""
    import uvicorn

    config.validate()
    uvicorn.run(create_app(config), host="127.0.0.1", port=config.port)
