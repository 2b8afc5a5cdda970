"""
Grid exports of the closed-form surfaces as CSV (omega-major rows).
"""
import os
from typing import List, Sequence, Tuple

import numpy as np

from closed_form import (
    bellman_B_values,
    bellman_M,
    classify_region,
    envelope_phi,
    limit_surface_inf,
    limit_surface_zero,
)
from errors import DomainError
from logger import logger
from serialization import csv_text

filename = os.path.basename(__file__)

SURFACE_COLUMNS = {
    "M": "M",
    "envelope": "Phi",
    "limit0": "M0",
    "limitinf": "Minf",
    "region": "region",
    "B": "B",
}


def surface_grid(omega_max: float, nx: int, ny: int) -> Tuple[np.ndarray, np.ndarray]:
    if omega_max <= 0 or nx < 2 or ny < 2:
        raise DomainError(f"Invalid surface grid: omega_max={omega_max}, nx={nx}, ny={ny}")
    return np.linspace(0.0, omega_max, nx), np.linspace(0.0, 2.0, ny)


def surface_rows(r: float, what: str, nx: int, ny: int, omega_max: float = 2.0,
                 lam: float = 1.0) -> Tuple[List[str], List[Sequence]]:
    """
    Header and rows `omega,A,<column>` for one surface.

    `envelope` only has rows where omega <= A; for `B` the omega column holds
    the mean x and the level is `lam`.
    """
    if what not in SURFACE_COLUMNS:
        raise DomainError(f"Unknown surface {what!r}; choose from {sorted(SURFACE_COLUMNS)}")
    omegas, a_values = surface_grid(omega_max, nx, ny)
    w, a = (grid.ravel() for grid in np.meshgrid(omegas, a_values, indexing="ij"))

    if what == "envelope":
        keep = w <= a
        w, a = w[keep], a[keep]
        values = envelope_phi(r, w, a)
    elif what == "M":
        values = bellman_M(r, w, a)
    elif what == "limit0":
        values = limit_surface_zero(w, a)
    elif what == "limitinf":
        values = limit_surface_inf(w, a)
    elif what == "region":
        values = classify_region(r, w, a)
    else:
        values = bellman_B_values(r, w, a, lam)

    header = ["x" if what == "B" else "omega", "A", SURFACE_COLUMNS[what]]
    rows = [(float(wi), float(ai), vi if what == "region" else float(vi)) for wi, ai, vi in zip(w, a, values)]
    logger.info(f"[{filename}] Surface {what} at r={r}: {len(rows)} rows")
    return header, rows


def surface_csv(r: float, what: str, nx: int, ny: int, omega_max: float = 2.0, lam: float = 1.0) -> str:
    header, rows = surface_rows(r, what, nx, ny, omega_max, lam)
    return csv_text(header, rows)
