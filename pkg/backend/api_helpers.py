"""
API Helpers
Business logic shared by the FastAPI endpoints and the command-line front end,
plus the mapping of package errors onto HTTP responses.
"""
import json
import os
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from fastapi import HTTPException

from api_models import DPCompareReport, EnumerationReport, ExtremizerReport, GridSpec, PropertyReport, SampleSpec
from closed_form import (
    bellman_B_values,
    bellman_M,
    check_r,
    classify_region,
    envelope_phi,
    homogeneous_omega,
    norm_ratio,
    omega_seq,
    power_mean_constant,
    weak_norm_constant,
)
from dyadic import CarlesonSequence, StepFunction
from errors import DomainError, ResourceError
from extremizers import replay_maximal_extremizer, replay_vertex_extremizer, run_enumeration
from logger import logger
from operators import OperatorOutput, apply_maximal, apply_power_mean, apply_sparse_power
from serialization import csv_text
from supersolution import run_full_verification
from surface_export import surface_csv
from value_iteration import ValueTable, default_checkpoints, dp_compare, dp_value_iteration, reference_grid, small_grid

filename = os.path.basename(__file__)

DEFAULT_ENUM_DEPTH = 3
DEFAULT_MAXIMAL_DEPTH = 10


def _error_detail(error_code: str, message: str) -> Dict[str, str]:
    return {"status": "error", "error_code": error_code, "message": message}


def load_json_file(path: str, what: str) -> Dict[str, Any]:
    """Read a dyadic JSON payload; unreadable or malformed files are domain errors."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except (OSError, json.JSONDecodeError) as e:
        raise DomainError(f"Cannot read {what} from {path}: {e}")


class APIHelpers:
    """Contains helper functions for all API endpoints and CLI subcommands."""

    def __init__(self, threads: int = 0):
        self.threads = threads
        logger.info(f"[{filename}] APIHelpers initialized.")

    @staticmethod
    def handle_domain_error(e: DomainError) -> HTTPException:
        """
        Convert DomainError to a 400 HTTPException.

        Args:
            e: DomainError raised by a backend module

        Returns:
            HTTPException with the error details
        """
        logger.error(f"[{filename}] DomainError handled: {e}")
        return HTTPException(status_code=400, detail=_error_detail("DOMAIN_ERROR", str(e)))

    @staticmethod
    def handle_resource_error(e: ResourceError) -> HTTPException:
        logger.error(f"[{filename}] ResourceError handled: {e}")
        return HTTPException(status_code=413, detail=_error_detail("RESOURCE_LIMIT", str(e)))

    @staticmethod
    def handle_unexpected_error(e: Exception) -> HTTPException:
        """
        Convert unexpected Exception to HTTPException.
        Reusable error handler for all endpoints.

        Args:
            e: Any unexpected exception

        Returns:
            HTTPException with 500 status code
        """
        logger.error(f"[{filename}] Unexpected error handled: {str(e)}")
        return HTTPException(
            status_code=500,
            detail=_error_detail("INTERNAL_ERROR", f"Unexpected error: {str(e)}"),
        )

    def eval_helper(self, r: float, A: float, omega: Optional[float] = None, x: Optional[float] = None,
                    lam: Optional[float] = None) -> Dict[str, Any]:
        """
        Closed-form values at (omega, A), or at the Bellman point (x, A, lambda).

        Returns:
            M, region and B at the point, Phi when omega <= A, and C(r)
        """
        r = check_r(r)
        if omega is not None and (x is not None or lam is not None):
            raise DomainError("give omega, or x and lambda, not both")
        if omega is None:
            if x is None or lam is None:
                raise DomainError("give omega, or both x and lambda")
            B = float(bellman_B_values(r, x, A, lam))
            omega = float(homogeneous_omega(r, np.float64(x), np.float64(lam))) if lam > 0 else None
        else:
            B = float(bellman_M(r, omega, A))

        payload: Dict[str, Any] = {"r": r, "A": A}
        if x is not None:
            payload.update({"x": x, "lambda": lam})
        payload["omega"] = omega
        if omega is not None:
            payload["M"] = float(bellman_M(r, omega, A))
            payload["region"] = classify_region(r, omega, A)
            if omega <= A:
                payload["Phi"] = float(envelope_phi(r, omega, A))
        payload["B"] = B
        payload["C"] = weak_norm_constant(r)
        logger.info(f"[{filename}] eval r={r}, A={A}, omega={omega}: B={B}")
        return payload

    def constants_helper(self, r: Optional[float] = None, p: Optional[float] = None,
                         omega_n: Optional[int] = None) -> Dict[str, Any]:
        """C(r), the power-mean constant for p and the omega_n(r) table for n <= omega_n."""
        if r is None and p is None:
            raise DomainError("give r, p or both")
        payload: Dict[str, Any] = {}
        if r is not None:
            r = check_r(r)
            payload.update({"r": r, "C": weak_norm_constant(r)})
            if omega_n is not None:
                if omega_n < 0:
                    raise DomainError(f"omega_n must be >= 0, got {omega_n}")
                n = np.arange(omega_n + 1)
                payload["omega_n"] = np.atleast_1d(omega_seq(r, n)).tolist()
                payload["ratios"] = np.atleast_1d(norm_ratio(r, n)).tolist()
        elif omega_n is not None:
            raise DomainError("omega_n needs r")
        if p is not None:
            payload.update({"p": p, "power_mean_constant": power_mean_constant(p)})
        return payload

    def surface_helper(self, r: float, what: str, nx: int, ny: int, omega_max: float = 2.0,
                       lam: float = 1.0) -> str:
        return surface_csv(r, what, nx, ny, omega_max, lam)

    def verify_helper(self, r: float, spec: SampleSpec, candidate: str = "closed-form") -> Dict[str, Any]:
        """Run the full verification on the helper's threads; `passed` is true iff every report passed."""
        reports: List[PropertyReport] = run_full_verification(r, spec, candidate, threads=self.threads)
        return {
            "r": r,
            "candidate": candidate,
            "passed": all(report.passed for report in reports),
            "reports": reports,
        }

    def dp_helper(self, r: float, grid: str = "reference", depth: Optional[int] = None,
                  stride: Optional[int] = None, interp_tol: float = 0.01,
                  gap_tol: float = 0.02) -> Tuple[DPCompareReport, ValueTable]:
        r = check_r(r)
        if grid not in ("reference", "small"):
            raise DomainError(f"Unknown grid {grid!r}; choose reference or small")
        spec: GridSpec = reference_grid(r) if grid == "reference" else small_grid(r)
        updates = {key: value for key, value in (("depth", depth), ("split_stride", stride)) if value is not None}
        if updates:
            spec = GridSpec.model_validate({**spec.model_dump(), **updates})
        table = dp_value_iteration(r, spec, self.threads)
        return dp_compare(table, r, default_checkpoints(r), interp_tol, gap_tol), table

    def enum_helper(self, r: float, omega: float, A: float, depth: Optional[int] = None, restarts: int = 8,
                    iterations: int = 200, seed: int = 0, tolerance: float = 1e-9) -> EnumerationReport:
        depth = DEFAULT_ENUM_DEPTH if depth is None else depth
        return run_enumeration(r, depth, omega, A, restarts, iterations, seed, self.threads, tolerance)

    def extremizer_helper(self, r: float, n: int) -> ExtremizerReport:
        return replay_vertex_extremizer(r, n)

    def maximal_extremizer_helper(self, omega: float, A: float, depth: Optional[int] = None) -> ExtremizerReport:
        return replay_maximal_extremizer(omega, A, DEFAULT_MAXIMAL_DEPTH if depth is None else depth)

    def op_helper(self, kind: str, sequence: Dict[str, Any], function: Dict[str, Any],
                  r: Optional[float] = None, p: Optional[float] = None) -> OperatorOutput:
        """Apply one operator to dyadic payloads in the JSON interchange format."""
        seq = CarlesonSequence.from_dict(sequence)
        f = StepFunction.from_dict(function)
        if kind == "sparse":
            if r is None:
                raise DomainError("op sparse needs r")
            return apply_sparse_power(seq, f, r)
        if kind == "powermean":
            if p is None:
                raise DomainError("op powermean needs p")
            return apply_power_mean(seq, f, p)
        if kind == "maximal":
            return apply_maximal(seq, f)
        raise DomainError(f"Unknown operator {kind!r}; choose sparse, powermean or maximal")

    @staticmethod
    def operator_csv(output: OperatorOutput) -> str:
        """Rows leaf,value with the operator itself (the root of a power form)."""
        return csv_text(["leaf", "value"], ((i, float(v)) for i, v in enumerate(output.root())))
