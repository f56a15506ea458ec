from __future__ import annotations

import os
from typing import Dict, List, Literal, Optional

from fastapi import Depends, FastAPI, Header, HTTPException, status
from pydantic import BaseModel, Field

from src.confidence import TWO_SIGMA, ExperimentData, ci_bootstrap, ci_original
from src.errors import NumericError
from src.estimate import (
    MODELS,
    ErrorModelSpec,
    get_model,
    max_eps,
    passing_threshold,
    scalable_success,
)
from src.sampling import RngHandle

app = FastAPI(title="QVT Laboratory API")


class EstimateRequest(BaseModel):
    model: str
    n: int = Field(ge=2)
    eps: float = Field(ge=0.0)
    opt: Literal["low", "medium", "high"] = "high"
    method: Literal["avg", "proc"] = "avg"


class EstimateResponse(BaseModel):
    model: str
    n: int
    eps: float
    success: float
    passed: bool
    blocks: float
    gates_per_block: float


class ThresholdRequest(BaseModel):
    model: str
    n: List[int] = Field(min_length=1)
    opt: Literal["low", "medium", "high"] = "high"
    method: Literal["avg", "proc"] = "avg"


class ThresholdResponse(BaseModel):
    model: str
    thresholds: Dict[int, Optional[float]]


class CiRequest(BaseModel):
    heavy_counts: List[int] = Field(min_length=1)
    shots: List[int] = Field(min_length=1)
    method: Literal["original", "bootstrap"] = "bootstrap"
    n_b: int = Field(default=1000, ge=100)
    confidence: float = TWO_SIGMA
    seed: int = 0


class CiResponse(BaseModel):
    method: str
    h_hat: float
    lower: float
    passed: bool


def require_api_key(x_api_key: str | None = Header(default=None, alias="X-API-Key")) -> None:
    expected = os.getenv("API_KEY", "devkey")
    if x_api_key is None or x_api_key != expected:
        raise HTTPException(
            status_code=status.HTTP_401_UNAUTHORIZED,
            detail="Invalid or missing API key",
        )


def _bad_request(e: Exception) -> HTTPException:
    return HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(e))


@app.get("/healthz")
def healthz() -> dict[str, str]:
    return {"status": "ok"}


@app.get("/models", response_model=List[ErrorModelSpec])
def models() -> List[ErrorModelSpec]:
    return [MODELS[name] for name in sorted(MODELS)]


@app.get("/models/{name}/max-eps")
def model_max_eps(name: str) -> dict[str, float]:
    try:
        return {"max_eps": max_eps(get_model(name))}
    except ValueError as e:
        raise HTTPException(status_code=status.HTTP_404_NOT_FOUND, detail=str(e))


@app.post("/estimate", response_model=EstimateResponse, dependencies=[Depends(require_api_key)])
def estimate(req: EstimateRequest) -> EstimateResponse:
    try:
        res = scalable_success(req.model, req.eps, req.n, req.opt, req.method)
    except ValueError as e:
        raise _bad_request(e)
    return EstimateResponse(
        model=res.model,
        n=res.n,
        eps=res.eps,
        success=res.success,
        passed=res.passed,
        blocks=res.blocks,
        gates_per_block=res.gates_per_block,
    )


@app.post(
    "/threshold", response_model=ThresholdResponse, dependencies=[Depends(require_api_key)]
)
def threshold(req: ThresholdRequest) -> ThresholdResponse:
    try:
        spec = get_model(req.model)
    except ValueError as e:
        raise _bad_request(e)
    out: Dict[int, Optional[float]] = {}
    for n in req.n:
        try:
            out[n] = passing_threshold(spec, n, req.opt, req.method)
        except NumericError:
            out[n] = None
        except ValueError as e:
            raise _bad_request(e)
    return ThresholdResponse(model=spec.name, thresholds=out)


@app.post("/ci", response_model=CiResponse, dependencies=[Depends(require_api_key)])
def ci(req: CiRequest) -> CiResponse:
    if len(req.heavy_counts) != len(req.shots):
        raise _bad_request(ValueError("heavy_counts and shots must have the same length"))
    try:
        data = ExperimentData.from_counts(req.heavy_counts, req.shots)
        if req.method == "original":
            res = ci_original(data)
        else:
            res = ci_bootstrap(data, n_b=req.n_b, confidence=req.confidence, rng=RngHandle(req.seed))
    except ValueError as e:
        raise _bad_request(e)
    return CiResponse(method=res.method, h_hat=res.h_hat, lower=res.lower, passed=res.passed)
