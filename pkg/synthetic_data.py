# synthetic_data.py - Synthetic transaction generator shaped by the steady Credits field
import logging
from typing import Optional

import numpy as np

from fields.errors import BadResolution, DegenerateDensity, OutOfDomain
from fields.guards import require_valid_params
from fields.micro_aggregation import EventTable
from fields.model_core import ModelParams, steady_A

logger = logging.getLogger(__name__)

VELOCITY_SCALE = 0.1


def total_mass(params: ModelParams) -> float:
    """∫∫ steady_A over [0, X]², i.e. A0·X²·[1 − (h_x + h_y)·X/(2d)]"""
    X = params.X
    return params.A0 * X * X * (1.0 - (params.h_x + params.h_y) * X / (2.0 * params.d))


class TransactionSampler:
    """Rejection sampler of transaction coordinates with density ∝ steady_A"""

    def __init__(self, params: ModelParams, rng_seed: Optional[int] = None):
        self.params = params
        self.rng = np.random.default_rng(rng_seed)
        corners = np.array([0.0, params.X])
        cx, cy = np.meshgrid(corners, corners)
        corner_values = steady_A(params, cx, cy)
        # affine profile: extremes sit on the corners
        if np.min(corner_values) <= 0.0:
            raise DegenerateDensity(f"steady_A reaches {np.min(corner_values):.6g} on the square; cannot sample")
        self.density_max = float(np.max(corner_values))

    def coordinates(self, M: int):
        X = self.params.X
        xs, ys = [], []
        accepted = 0
        while accepted < M:
            batch = max(2 * (M - accepted), 64)
            x = self.rng.uniform(0.0, X, batch)
            y = self.rng.uniform(0.0, X, batch)
            keep = self.rng.uniform(0.0, self.density_max, batch) < steady_A(self.params, x, y)
            xs.append(x[keep])
            ys.append(y[keep])
            accepted += int(keep.sum())
        return np.concatenate(xs)[:M], np.concatenate(ys)[:M]


@require_valid_params()
def synth_events(params: ModelParams, M: int, rng_seed: Optional[int] = None) -> EventTable:
    """
    M events with (x, y) ∝ steady_A, equal amounts total_mass/M and
    velocities drawn N(0, 1)·0.1. Deterministic for a fixed rng_seed.
    """
    if M < 1:
        raise BadResolution(f"M must be >= 1, got {M}")
    if rng_seed is not None and rng_seed < 0:
        raise OutOfDomain(f"rng_seed must be non-negative, got {rng_seed}")
    sampler = TransactionSampler(params, rng_seed)
    x, y = sampler.coordinates(M)
    amount = np.full(M, total_mass(params) / M)
    v_creditor = sampler.rng.standard_normal(M) * VELOCITY_SCALE
    v_borrower = sampler.rng.standard_normal(M) * VELOCITY_SCALE
    logger.debug(f"Sampled {M} synthetic events (seed={rng_seed})")
    return EventTable(x, y, amount, v_creditor, v_borrower)
