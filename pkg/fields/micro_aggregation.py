# fields/micro_aggregation.py - Micro-to-macro aggregation of agents and transactions
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .errors import ArtifactError, BadResolution, OutOfDomain

logger = logging.getLogger(__name__)

EVENT_COLUMNS = ["x", "y", "amount", "v_creditor", "v_borrower"]
GRID_COLUMNS = ["xi", "yi", "value", "vel_x", "vel_y"]
DENSITY_EPS_FACTOR = 1e-12
# events per partial grid, independent of the worker count
CHUNK_EVENTS = 1 << 16


@dataclass(frozen=True)
class EParticle:
    """An agent at risk coordinate x moving with risk velocity v"""
    x: float
    v: float
    vars: Tuple[float, ...]


@dataclass(frozen=True)
class TransactionEvent:
    """A transaction of `amount` from a creditor at x to a borrower at y"""
    x: float
    y: float
    amount: float
    v_creditor: float = 0.0
    v_borrower: float = 0.0


class EventTable:
    """Column storage for transaction events"""

    def __init__(self, x, y, amount, v_creditor=None, v_borrower=None):
        self.x = np.asarray(x, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self.amount = np.asarray(amount, dtype=float)
        n = self.x.shape[0]
        self.v_creditor = np.zeros(n) if v_creditor is None else np.asarray(v_creditor, dtype=float)
        self.v_borrower = np.zeros(n) if v_borrower is None else np.asarray(v_borrower, dtype=float)
        if not all(col.shape == (n,) for col in (self.y, self.amount, self.v_creditor, self.v_borrower)):
            raise OutOfDomain("event columns must be one-dimensional and of equal length")

    @classmethod
    def from_events(cls, events: Iterable[TransactionEvent]) -> "EventTable":
        events = list(events)
        if not events:
            return cls.empty()
        rows = np.array([[e.x, e.y, e.amount, e.v_creditor, e.v_borrower] for e in events], dtype=float)
        return cls(*rows.T)

    @classmethod
    def empty(cls) -> "EventTable":
        return cls(*(np.zeros(0) for _ in EVENT_COLUMNS))

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "EventTable":
        return cls(*(frame[column].to_numpy(dtype=float) for column in EVENT_COLUMNS))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({column: getattr(self, column) for column in EVENT_COLUMNS})

    def take(self, index) -> "EventTable":
        return EventTable(*(getattr(self, column)[index] for column in EVENT_COLUMNS))

    def chunks(self, size: int) -> List["EventTable"]:
        """Contiguous slices of at most `size` events"""
        return [self.take(slice(start, start + size)) for start in range(0, len(self), max(size, 1))]

    def __len__(self) -> int:
        return int(self.x.shape[0])


EventsLike = Union[EventTable, Iterable[TransactionEvent]]


@dataclass
class FieldGrid:
    """
    A transaction field binned on the n_x × n_y cells of [0, X]².

    Per-cell sums are kept in the *_totals arrays; values and impulses are
    densities (sums divided by the cell area).
    """
    n_x: int
    n_y: int
    X: float
    amount_totals: np.ndarray
    impulse_x_totals: np.ndarray
    impulse_y_totals: np.ndarray

    @classmethod
    def zeros(cls, n_x: int, n_y: int, X: float) -> "FieldGrid":
        return cls(n_x, n_y, X, np.zeros((n_x, n_y)), np.zeros((n_x, n_y)), np.zeros((n_x, n_y)))

    @property
    def cell_size(self) -> Tuple[float, float]:
        return (self.X / self.n_x, self.X / self.n_y)

    @property
    def cell_area(self) -> float:
        hx, hy = self.cell_size
        return hx * hy

    @property
    def values(self) -> np.ndarray:
        return self.amount_totals / self.cell_area

    @property
    def totals(self) -> np.ndarray:
        return self.amount_totals

    @property
    def impulse_x(self) -> np.ndarray:
        return self.impulse_x_totals / self.cell_area

    @property
    def impulse_y(self) -> np.ndarray:
        return self.impulse_y_totals / self.cell_area

    @property
    def density_eps(self) -> float:
        return DENSITY_EPS_FACTOR * abs(float(self.amount_totals.sum())) / (self.n_x * self.n_y)

    @property
    def vel_x(self) -> np.ndarray:
        return field_velocity(self.amount_totals, self.impulse_x_totals, eps=self.density_eps)

    @property
    def vel_y(self) -> np.ndarray:
        return field_velocity(self.amount_totals, self.impulse_y_totals, eps=self.density_eps)

    @property
    def grand_total(self) -> float:
        return math.fsum(self.amount_totals.ravel())

    def cell_centers(self) -> Tuple[np.ndarray, np.ndarray]:
        hx, hy = self.cell_size
        return (np.arange(self.n_x) + 0.5) * hx, (np.arange(self.n_y) + 0.5) * hy

    def to_frame(self) -> pd.DataFrame:
        xi, yi = np.meshgrid(np.arange(self.n_x), np.arange(self.n_y), indexing="ij")
        return pd.DataFrame({
            "xi": xi.ravel(),
            "yi": yi.ravel(),
            "value": self.values.ravel(),
            "vel_x": self.vel_x.ravel(),
            "vel_y": self.vel_y.ravel(),
        })


def _bin_index(coords: np.ndarray, n_cells: int, X: float) -> np.ndarray:
    """Interior edges go to the higher cell; x = X goes to the last cell"""
    edges = X * np.arange(n_cells + 1) / n_cells
    index = np.searchsorted(edges, coords, side="right") - 1
    return np.clip(index, 0, n_cells - 1).astype(np.int64)


def _check_coordinates(X: float, *columns: np.ndarray):
    for column in columns:
        if column.size and (not np.all(np.isfinite(column)) or column.min() < 0.0 or column.max() > X):
            raise OutOfDomain(f"coordinate outside the macro domain [0, {X}]")


def aggregate_variables(particles: Sequence[EParticle], var_index: int, n_cells: int,
                        X: float) -> Tuple[np.ndarray, np.ndarray]:
    """Per-cell sums U = Σu and impulses P = Σu·v of one extensive variable"""
    if n_cells < 1:
        raise BadResolution(f"n_cells must be >= 1, got {n_cells}")
    if not particles:
        return np.zeros(n_cells), np.zeros(n_cells)
    xs = np.array([p.x for p in particles], dtype=float)
    vs = np.array([p.v for p in particles], dtype=float)
    us = np.array([p.vars[var_index] for p in particles], dtype=float)
    _check_coordinates(X, xs)
    if not np.all(np.isfinite(us)):
        raise OutOfDomain("extensive variables must be finite")
    index = _bin_index(xs, n_cells, X)
    U = np.bincount(index, weights=us, minlength=n_cells)
    P = np.bincount(index, weights=us * vs, minlength=n_cells)
    return U, P


def field_velocity(U, P, eps: Optional[float] = None):
    """
    Impulse over density, NaN where the density is at or below eps.
    The default eps is 1e-12 times the mean |U| per cell.
    """
    U = np.asarray(U, dtype=float)
    P = np.asarray(P, dtype=float)
    if eps is None:
        eps = DENSITY_EPS_FACTOR * abs(float(U.sum())) / max(U.size, 1)
    defined = np.abs(U) > eps
    velocity = np.full(np.broadcast(U, P).shape, np.nan)
    np.divide(P, U, out=velocity, where=defined)
    return float(velocity) if velocity.ndim == 0 else velocity


def _as_table(events: EventsLike) -> EventTable:
    return events if isinstance(events, EventTable) else EventTable.from_events(events)


def _partial_grid(table: EventTable, n_cells: int, X: float) -> FieldGrid:
    ix = _bin_index(table.x, n_cells, X)
    iy = _bin_index(table.y, n_cells, X)
    flat = ix * n_cells + iy
    size = n_cells * n_cells

    def binned(weights):
        return np.bincount(flat, weights=weights, minlength=size).reshape(n_cells, n_cells)

    return FieldGrid(
        n_cells, n_cells, X,
        binned(table.amount),
        binned(table.amount * table.v_creditor),
        binned(table.amount * table.v_borrower),
    )


def aggregate_transactions(events: EventsLike, n_cells: int, X: float, workers: int = 1,
                           chunk_events: int = CHUNK_EVENTS) -> FieldGrid:
    """
    Bin transactions by (creditor cell, borrower cell).

    Events are cut into contiguous chunks of chunk_events, each binned into a
    partial grid, and the partials merged in chunk order. workers > 1 only
    spreads the chunks over a thread pool, so the result is identical for
    every worker count.
    """
    if n_cells < 1:
        raise BadResolution(f"n_cells must be >= 1, got {n_cells}")
    if chunk_events < 1:
        raise BadResolution(f"chunk_events must be >= 1, got {chunk_events}")
    table = _as_table(events)
    _check_coordinates(X, table.x, table.y)
    if len(table) and (not np.all(np.isfinite(table.amount)) or table.amount.min() < 0.0):
        raise OutOfDomain("transaction amounts must be finite and non-negative")

    if len(table) == 0:
        return FieldGrid.zeros(n_cells, n_cells, X)
    chunks = table.chunks(chunk_events)
    if workers <= 1 or len(chunks) == 1:
        partials = [_partial_grid(chunk, n_cells, X) for chunk in chunks]
    else:
        with ThreadPoolExecutor(max_workers=min(workers, len(chunks))) as pool:
            partials = list(pool.map(lambda chunk: _partial_grid(chunk, n_cells, X), chunks))
    logger.debug(f"Merged {len(partials)} partial grids from {len(table)} events")
    return merge_grids(partials)


def merge_grids(grids: Sequence[FieldGrid]) -> FieldGrid:
    """Sum partial grids of identical shape and extent, in the order given"""
    if not grids:
        raise BadResolution("nothing to merge")
    first = grids[0]
    for grid in grids[1:]:
        if (grid.n_x, grid.n_y, grid.X) != (first.n_x, first.n_y, first.X):
            raise BadResolution("cannot merge grids with different shapes or domains")
    return FieldGrid(
        first.n_x, first.n_y, first.X,
        sum(g.amount_totals for g in grids),
        sum(g.impulse_x_totals for g in grids),
        sum(g.impulse_y_totals for g in grids),
    )


def coarsen_grid(grid: FieldGrid) -> FieldGrid:
    """Merge 2×2 blocks of cells"""
    if grid.n_x % 2 or grid.n_y % 2:
        raise BadResolution(f"cannot coarsen a {grid.n_x}x{grid.n_y} grid")

    def blocks(a):
        return a.reshape(grid.n_x // 2, 2, grid.n_y // 2, 2).sum(axis=(1, 3))

    return FieldGrid(grid.n_x // 2, grid.n_y // 2, grid.X,
                     blocks(grid.amount_totals), blocks(grid.impulse_x_totals), blocks(grid.impulse_y_totals))


def marginal_out(grid: FieldGrid) -> np.ndarray:
    """Credits provided from each x-cell (integral over borrowers)"""
    return grid.values.sum(axis=1) * grid.cell_area


def marginal_in(grid: FieldGrid) -> np.ndarray:
    """Loans received by each y-cell (integral over creditors)"""
    return grid.values.sum(axis=0) * grid.cell_area


def read_events_csv(path: str) -> EventTable:
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ArtifactError(f"cannot read events from {path}: {e}") from e
    if list(frame.columns) != EVENT_COLUMNS:
        raise ArtifactError(f"{path}: expected header {','.join(EVENT_COLUMNS)}, got {','.join(map(str, frame.columns))}")
    try:
        table = EventTable.from_frame(frame)
    except (TypeError, ValueError) as e:
        raise ArtifactError(f"{path}: event columns must be numeric ({e})") from e
    logger.info(f"Loaded {len(table)} transaction events from {path}")
    return table


def write_grid_csv(grid: FieldGrid, path: str):
    grid.to_frame().to_csv(path, index=False, float_format="%.17g")
