"""HTTP interface over a loaded engine bundle.

Errors come back as ``{"code": ..., "message": ...}`` with a 4xx status for
caller mistakes (bad ids, unsupported method/constraint combinations,
infeasible constraints) and 5xx for engine faults.  Every recommendation
response echoes the seed that produced it, so identical replays are one
request away.
"""
from __future__ import annotations

import math
import random
import time

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .bundle import EngineBundle
from .constraints_io import parse_constraints
from .errors import (
    AltTripError,
    ConstraintUnsupported,
    ExhaustedCandidates,
    InfeasibleConstraints,
    InvalidId,
    MissingTableEntry,
    NoEligiblePOI,
    ParseError,
    UnknownPOI,
)
from .planner import Query, recommend_topk
from .sampler import SamplerConfig, check_constraints

_BAD_REQUEST = (ParseError, UnknownPOI, InvalidId, ConstraintUnsupported, ValueError)
_UNPROCESSABLE = (
    InfeasibleConstraints,
    ExhaustedCandidates,
    NoEligiblePOI,
    MissingTableEntry,
)

_CODES = {
    ParseError: "parse_error",
    UnknownPOI: "unknown_poi",
    InvalidId: "unknown_poi",
    ConstraintUnsupported: "constraint_unsupported",
    InfeasibleConstraints: "infeasible_constraints",
    ExhaustedCandidates: "exhausted_candidates",
    NoEligiblePOI: "no_eligible_poi",
    MissingTableEntry: "missing_table_entry",
    ValueError: "invalid_query",
}


def _error_response(exc: Exception, status: int) -> JSONResponse:
    code = "internal_error"
    for klass, name in _CODES.items():
        if isinstance(exc, klass):
            code = name
            break
    return JSONResponse({"code": code, "message": str(exc)}, status_code=status)


class RecommendRequest(BaseModel):
    s: int
    d: int
    k: int = Field(default=3, ge=1)
    L: int | None = None
    method: str = "lstm"
    constraints: dict | None = None
    seed: int | None = None
    iterations: int | None = Field(default=None, ge=1)


class ValidateRequest(BaseModel):
    constraints: dict
    itinerary: list[int] | None = None


def create_app(bundle: EngineBundle) -> FastAPI:
    app = FastAPI(title="alttrip", version="0.1.0")
    # Browser clients (the bundled web UI) are served from a different origin.
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    model = bundle.model
    catalog = bundle.catalog

    @app.exception_handler(AltTripError)
    async def _handle_engine_error(_req: Request, exc: AltTripError):
        if isinstance(exc, _UNPROCESSABLE):
            return _error_response(exc, 422)
        if isinstance(exc, _BAD_REQUEST):
            return _error_response(exc, 400)
        return _error_response(exc, 500)

    @app.get("/health")
    def health():
        return {
            "status": "ok",
            "dataset": bundle.dataset_name,
            "n_pois": len(catalog),
            "l_max": model.l_max,
        }

    @app.get("/pois")
    def pois():
        return {
            "dataset": bundle.dataset_name,
            "pois": [
                {"poi_id": p.poi_id, "lat": p.lat, "lon": p.lon, "category": p.category}
                for p in catalog
            ],
        }

    @app.post("/recommend")
    def recommend(req: RecommendRequest):
        try:
            query = Query(s=req.s, d=req.d, k=req.k, L=req.L)
        except ValueError as exc:
            return _error_response(exc, 400)
        if req.method not in ("lstm", "sampler"):
            return _error_response(ValueError(f"unknown method {req.method!r}"), 400)
        constraints = None
        if req.constraints is not None:
            constraints = parse_constraints(req.constraints, catalog)
        seed = req.seed if req.seed is not None else random.getrandbits(32)
        sampler_config = SamplerConfig(iterations=req.iterations)
        t0 = time.perf_counter()
        recset = recommend_topk(
            model, query, method=req.method, constraints=constraints,
            seed=seed, sampler_config=sampler_config,
        )
        elapsed = time.perf_counter() - t0
        return {
            "itineraries": [
                {
                    "pois": list(it.poi_ids),
                    "perplexity": it.perplexity if math.isfinite(it.perplexity) else None,
                    "prominent": it.prominent,
                }
                for it in recset.itineraries
            ],
            "seed": seed,
            "method": req.method,
            "elapsed_seconds": elapsed,
        }

    @app.post("/constraints/validate")
    def validate(req: ValidateRequest):
        constraints = parse_constraints(req.constraints, catalog)
        summary = {
            "must_see": sorted(constraints.must_see),
            "has_budget": constraints.budget_limit is not None,
            "has_time": constraints.time is not None,
        }
        if req.itinerary is None:
            return {"ok": True, "violations": [], "summary": summary}
        for poi in req.itinerary:
            if poi not in catalog:
                raise UnknownPOI(f"itinerary references poi_id {poi} not in catalog")
        ok, violations = check_constraints(req.itinerary, constraints)
        return {"ok": ok, "violations": violations, "summary": summary}

    return app
