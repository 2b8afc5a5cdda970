"""
Main FastAPI Application
HTTP access to the closed-form Bellman function, the sharp constants, the
vertex extremizers and the supersolution verification suite.
"""
import os
from typing import Any, Optional

from dotenv import load_dotenv
from fastapi import FastAPI, Query
from fastapi.responses import Response
from pydantic import ValidationError

from api_helpers import APIHelpers
from api_models import ErrorResponse, EvalRequest, ExtremizerRequest, SampleSpec, VerifyRequest
from errors import DomainError, ResourceError
from logger import logger
from serialization import dumps

# Load environment variables
load_dotenv()

app = FastAPI(
    title="Sparse Bellman API",
    description="Exact Bellman function and sharp weak-type constants of localized dyadic sparse operators",
    version="0.1.0"
)

api_helpers = APIHelpers(threads=int(os.getenv("SPARSE_BELLMAN_THREADS", "0") or 0))
filename = os.path.basename(__file__)

ERROR_RESPONSES = {
    400: {"model": ErrorResponse, "description": "Domain Error"},
    413: {"model": ErrorResponse, "description": "Resource Limit"},
    500: {"model": ErrorResponse, "description": "Internal Server Error"},
}


def json_response(payload: Any) -> Response:
    """Render with the shared encoder so floats match the CLI output exactly."""
    return Response(content=dumps(payload), media_type="application/json")


def run_helper(call, *args, **kwargs) -> Response:
    try:
        return json_response(call(*args, **kwargs))
    except (DomainError, ValidationError) as e:
        raise api_helpers.handle_domain_error(DomainError(str(e)))
    except ResourceError as e:
        raise api_helpers.handle_resource_error(e)
    except Exception as e:
        raise api_helpers.handle_unexpected_error(e)


@app.get("/")
async def root():
    """Health check endpoint."""
    return {"message": "Sparse Bellman API is running"}


@app.post("/eval", responses=ERROR_RESPONSES)
async def evaluate(request: EvalRequest):
    """M_r, region, B_r, Phi_r and C(r) at (omega, A) or at (x, A, lambda)."""
    logger.info(f"[{filename}] Received eval request: {request.model_dump(by_alias=True)}")
    return run_helper(api_helpers.eval_helper, request.r, request.A, request.omega, request.x, request.lam)


@app.get("/constants", responses=ERROR_RESPONSES)
async def constants(r: Optional[float] = Query(None, gt=0), p: Optional[float] = Query(None, ge=1),
                    omega_n: Optional[int] = Query(None, ge=0, le=64)):
    """C(r), the power-mean constant and the omega_n(r) table."""
    logger.info(f"[{filename}] Received constants request: r={r}, p={p}, omega_n={omega_n}")
    return run_helper(api_helpers.constants_helper, r, p, omega_n)


@app.post("/extremizer", responses=ERROR_RESPONSES)
async def extremizer(request: ExtremizerRequest):
    """Replay of the vertex extremizer attaining M_r(omega_n, 2) = 2^{-n}."""
    logger.info(f"[{filename}] Received extremizer request: r={request.r}, n={request.n}")
    return run_helper(api_helpers.extremizer_helper, request.r, request.n)


@app.post("/verify", responses=ERROR_RESPONSES)
async def verify(request: VerifyRequest):
    """Full verification suite for a named candidate surface."""
    logger.info(f"[{filename}] Received verify request: {request.model_dump()}")
    spec = SampleSpec(sample_count=request.samples, rng_seed=request.seed, tolerance=request.tolerance)
    return run_helper(api_helpers.verify_helper, request.r, spec, request.candidate)


if __name__ == "__main__":
    import uvicorn

    host = os.getenv("BACKEND_HOST", "0.0.0.0")
    port = int(os.getenv("BACKEND_PORT", "8000"))

    uvicorn.run(app, host=host, port=port)
