# fields/field_solver.py - Time integration of the linearized potential equations
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np
from scipy import integrate

from .errors import (
    BadResolution,
    InsufficientHistory,
    NonFinite,
    PeriodMismatch,
    StabilityViolation,
    SurfaceResonance,
    ZeroAcceleration,
)
from .guards import require_valid_params
from .model_core import ModelParams, steady_A, steady_B
from .wave_analysis import WaveMode

logger = logging.getLogger(__name__)

MIN_CELLS = 8
CFL_SAFETY = 0.5
PERIOD_TOL = 1e-9
HISTORY_DEPTH = 2

# Stacked state layout: PHI, PSI, PHI_T, PSI_T along axis 0
PHI, PSI, PHI_T, PSI_T = range(4)


def symbol_matrix(params: ModelParams) -> np.ndarray:
    """N such that (φ_tt, ψ_tt) = N·(Δφ, Δψ)"""
    return np.array([
        [params.a2 * params.b / params.A0, -params.b * params.B0 / params.A0],
        [-params.d * params.A0 / params.B0, params.a1 * params.d / params.B0],
    ])


@dataclass(frozen=True)
class BulkSpectrum:
    eigenvalues: Tuple[complex, complex]
    growth_per_wavenumber: Tuple[float, float]
    c_max: float

    @property
    def is_hyperbolic(self) -> bool:
        return max(self.growth_per_wavenumber) == 0.0


@require_valid_params()
def bulk_growth_rates(params: ModelParams) -> BulkSpectrum:
    """
    Eigenvalues μ of the symbol matrix. A Fourier mode of wavenumber K
    behaves like exp(±K·sqrt(−μ)·t); the real parts of sqrt(−μ) are the
    growth rates per unit wavenumber.
    """
    mu = np.linalg.eigvals(symbol_matrix(params))
    growth = tuple(float(abs(np.sqrt(-complex(m)).real)) for m in mu)
    c_max = math.sqrt(float(np.max(np.abs(mu))))
    return BulkSpectrum(tuple(complex(m) for m in mu), growth, c_max)


class ClassicalRK4:
    """Classical four-stage Runge-Kutta on a stacked state array"""

    def __call__(self, y, t, dt, rhs):
        k1 = rhs(t, y)
        k2 = rhs(t + dt / 2, y + dt / 2 * k1)
        k3 = rhs(t + dt / 2, y + dt / 2 * k2)
        k4 = rhs(t + dt, y + dt * k3)
        return y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


@dataclass(frozen=True, eq=False)
class Snapshot:
    t: float
    stacked: np.ndarray


@dataclass(frozen=True, eq=False)
class SolverState:
    """
    Potentials and their rates on (n_x+1)×(n_y+1) nodes of [0, L_x]×[0, X].

    x is periodic (row n_x duplicates row 0); y = X carries the surface
    condition and y = 0 is held fixed.
    """
    params: ModelParams
    n_x: int
    n_y: int
    L_x: float
    stacked: np.ndarray
    top_operator: np.ndarray = field(repr=False)
    t: float = 0.0
    steps: int = 0
    sponge_cells: int = 0
    sponge_strength: float = 0.0
    history: Tuple[Snapshot, ...] = field(default=(), repr=False)

    @property
    def h_x(self) -> float:
        return self.L_x / self.n_x

    @property
    def h_y(self) -> float:
        return self.params.X / self.n_y

    @property
    def h(self) -> Tuple[float, float]:
        return (self.h_x, self.h_y)

    @property
    def phi(self) -> np.ndarray:
        return self.stacked[PHI]

    @property
    def psi(self) -> np.ndarray:
        return self.stacked[PSI]

    @property
    def phi_t(self) -> np.ndarray:
        return self.stacked[PHI_T]

    @property
    def psi_t(self) -> np.ndarray:
        return self.stacked[PSI_T]

    def nodes(self) -> Tuple[np.ndarray, np.ndarray]:
        x = np.linspace(0.0, self.L_x, self.n_x + 1)
        y = np.linspace(0.0, self.params.X, self.n_y + 1)
        return np.meshgrid(x, y, indexing="ij")

    def with_arrays(self, phi, psi, phi_t, psi_t) -> "SolverState":
        stacked = np.stack([np.asarray(a, dtype=float) for a in (phi, psi, phi_t, psi_t)])
        if stacked.shape != self.stacked.shape:
            raise BadResolution(f"arrays of shape {stacked.shape[1:]} do not fit a {self.stacked.shape[1:]} grid")
        return replace(self, stacked=stacked, history=())


@dataclass(frozen=True)
class Diagnostics:
    t: float
    residual_A: float
    residual_B: float
    quad_energy: float
    max_amplitude: float


def _surface_operator(params: ModelParams, h_y: float) -> np.ndarray:
    """
    (I + βN)⁻¹N with β = 2κ/h_y and κ = A0/(B0·g_y); maps the ghost-free top-row
    Laplacians to the surface accelerations.
    """
    kappa = params.A0 / (params.B0 * params.g_y)
    n = symbol_matrix(params)
    system = np.eye(2) + 2.0 * kappa / h_y * n
    if abs(np.linalg.det(system)) <= 1e-12 * np.linalg.norm(system) ** 2:
        raise SurfaceResonance(f"surface condition is singular at h_y={h_y:g}")
    return np.linalg.solve(system, n)


@require_valid_params()
def init_grid(params: ModelParams, n_x: int, n_y: int, L_x: float,
              sponge_cells: int = 0, sponge_strength: float = 1.0) -> SolverState:
    if n_x < MIN_CELLS or n_y < MIN_CELLS:
        raise BadResolution(f"need at least {MIN_CELLS} cells per axis, got {n_x}x{n_y}")
    if not (L_x > 0 and math.isfinite(L_x)):
        raise BadResolution(f"L_x must be positive, got {L_x!r}")
    if params.g_y == 0.0:
        raise ZeroAcceleration("g_y = 0: the surface condition at y = X is undefined")
    if not 0 <= sponge_cells < n_y:
        raise BadResolution(f"sponge_cells must lie in [0, {n_y}), got {sponge_cells}")
    h_y = params.X / n_y
    state = SolverState(
        params=params, n_x=n_x, n_y=n_y, L_x=float(L_x),
        stacked=np.zeros((4, n_x + 1, n_y + 1)),
        top_operator=_surface_operator(params, h_y),
        sponge_cells=sponge_cells, sponge_strength=float(sponge_strength),
    )
    logger.debug(f"Initialized {n_x}x{n_y} grid on [0, {L_x:g}]x[0, {params.X:g}]")
    return state


def seed_analytic_mode(state: SolverState, mode: WaveMode, amplitude: float) -> SolverState:
    """Load φ = a·cos(kx − ωt)·f and ψ = a·cos(kx − ωt)·g with their time derivatives"""
    periods = mode.k * state.L_x / (2.0 * math.pi)
    if abs(periods - round(periods)) > PERIOD_TOL or round(periods) < 1:
        raise PeriodMismatch(f"k·L_x/(2π) = {periods:.12g} is not a positive integer")
    x, y = state.nodes()
    z = y - state.params.X
    phase = mode.k * x - mode.omega * state.t
    f, g = mode.profile(z), mode.companion_profile(z)
    cos, sin = np.cos(phase), np.sin(phase)
    return state.with_arrays(
        amplitude * cos * f,
        amplitude * cos * g,
        amplitude * mode.omega * sin * f,
        amplitude * mode.omega * sin * g,
    )


def seed_pulse(state: SolverState, center: Tuple[float, float], width: float, amplitude: float) -> SolverState:
    """Gaussian bump in both potentials, at rest"""
    if width <= 0:
        raise BadResolution(f"pulse width must be positive, got {width!r}")
    x, y = state.nodes()
    dx = np.abs(x - center[0])
    dx = np.minimum(dx, state.L_x - dx)  # periodic distance
    bump = amplitude * np.exp(-(dx ** 2 + (y - center[1]) ** 2) / (2.0 * width ** 2))
    bump[:, 0] = 0.0
    zero = np.zeros_like(bump)
    return state.with_arrays(bump, bump, zero, zero)


def cfl_max_dt(state: SolverState) -> float:
    return CFL_SAFETY * min(state.h_x, state.h_y) / bulk_growth_rates(state.params).c_max


def _laplacians(state: SolverState, phi: np.ndarray, psi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """5-point Laplacians on rows 0..n_x-1; the top column omits the ghost term"""
    hx2, hy2 = state.h_x ** 2, state.h_y ** 2
    out = []
    for u in (phi, psi):
        core = u[:-1]
        lap = (np.roll(core, -1, axis=0) - 2.0 * core + np.roll(core, 1, axis=0)) / hx2
        lap[:, 1:-1] += (core[:, 2:] - 2.0 * core[:, 1:-1] + core[:, :-2]) / hy2
        lap[:, -1] += 2.0 * (core[:, -2] - core[:, -1]) / hy2
        out.append(lap)
    return out[0], out[1]


def _sponge_profile(state: SolverState) -> Optional[np.ndarray]:
    if state.sponge_cells == 0:
        return None
    j = np.arange(state.n_y + 1)
    ramp = np.clip(1.0 - j / state.sponge_cells, 0.0, None)
    return state.sponge_strength * ramp


def _rates(state: SolverState, stacked: np.ndarray) -> np.ndarray:
    n = symbol_matrix(state.params)
    lap_phi, lap_psi = _laplacians(state, stacked[PHI], stacked[PSI])
    acc_phi = n[0, 0] * lap_phi + n[0, 1] * lap_psi
    acc_psi = n[1, 0] * lap_phi + n[1, 1] * lap_psi

    top = state.top_operator
    acc_phi[:, -1] = top[0, 0] * lap_phi[:, -1] + top[0, 1] * lap_psi[:, -1]
    acc_psi[:, -1] = top[1, 0] * lap_phi[:, -1] + top[1, 1] * lap_psi[:, -1]

    rates = np.empty_like(stacked)
    rates[PHI] = stacked[PHI_T]
    rates[PSI] = stacked[PSI_T]
    rates[PHI_T, :-1] = acc_phi
    rates[PSI_T, :-1] = acc_psi
    rates[PHI_T, -1] = acc_phi[0]
    rates[PSI_T, -1] = acc_psi[0]

    sponge = _sponge_profile(state)
    if sponge is not None:
        rates[PHI_T] -= sponge * stacked[PHI_T]
        rates[PSI_T] -= sponge * stacked[PSI_T]

    rates[:, :, 0] = 0.0
    return rates


def step(state: SolverState, dt: float) -> SolverState:
    """One classical RK4 step; a negative dt integrates backwards"""
    limit = cfl_max_dt(state)
    if abs(dt) > limit * (1.0 + 1e-12):
        raise StabilityViolation(f"|dt|={abs(dt):.6g} exceeds the stable limit {limit:.6g}")

    stacked = ClassicalRK4()(state.stacked, state.t, dt, lambda t, y: _rates(state, y))
    stacked[:, -1] = stacked[:, 0]
    if not np.all(np.isfinite(stacked)):
        raise NonFinite(f"non-finite potentials after step {state.steps + 1} (t={state.t + dt:.6g})")

    history = (state.history + (Snapshot(state.t, state.stacked),))[-HISTORY_DEPTH:]
    return replace(state, stacked=stacked, t=state.t + dt, steps=state.steps + 1, history=history)


def reconstruct_fields(state: SolverState) -> Tuple[np.ndarray, np.ndarray]:
    """A = steady_A + (B0/d)·ψ_t and B = steady_B + (A0/b)·φ_t on every node"""
    p = state.params
    x, y = state.nodes()
    a = steady_A(p, x, y, check_domain=False) + p.B0 / p.d * state.psi_t
    b = steady_B(p, x, y, check_domain=False) + p.A0 / p.b * state.phi_t
    return a, b


def surface_trace(state: SolverState) -> np.ndarray:
    """ξ(x) = X − B0/(A0·h_y)·ψ_t on the top row"""
    p = state.params
    if p.h_y == 0.0:
        raise ZeroAcceleration("h_y = 0: surface elevation is undefined")
    return p.X - p.B0 / (p.A0 * p.h_y) * state.psi_t[:, -1]


def _gradient(state: SolverState, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    ux, uy = np.gradient(u, state.h_x, state.h_y)
    return ux, uy


def quad_energy(state: SolverState, stacked: Optional[np.ndarray] = None) -> float:
    """
    ½∫[A0φ_t²/(−a2b) + B0ψ_t²/(−a1d) + |∇φ|² + |∇ψ|² + 2c∇φ·∇ψ] with
    c = (bB0/(−a2b) + dA0/(−a1d))/2. A monitoring functional only.
    """
    p = state.params
    stacked = state.stacked if stacked is None else stacked
    phi, psi, phi_t, psi_t = stacked
    cross = (p.b * p.B0 / (-p.a2 * p.b) + p.d * p.A0 / (-p.a1 * p.d)) / 2.0
    phx, phy = _gradient(state, phi)
    psx, psy = _gradient(state, psi)
    density = 0.5 * (
        p.A0 * phi_t ** 2 / (-p.a2 * p.b)
        + p.B0 * psi_t ** 2 / (-p.a1 * p.d)
        + phx ** 2 + phy ** 2 + psx ** 2 + psy ** 2
        + 2.0 * cross * (phx * psx + phy * psy)
    )
    # periodic in x: sum the distinct rows, trapezoid across y
    return float(integrate.trapezoid(density[:-1].sum(axis=0) * state.h_x, dx=state.h_y))


def diagnostics(state: SolverState) -> Diagnostics:
    """
    L2 residuals of both potential equations at the previous time level,
    using a centred difference of the stored rates for φ_tt and ψ_tt.
    """
    if len(state.history) < HISTORY_DEPTH:
        raise InsufficientHistory(f"diagnostics need {HISTORY_DEPTH} completed steps, have {len(state.history)}")
    p = state.params
    older, middle = state.history
    span = state.t - older.t
    phi_tt = (state.phi_t - older.stacked[PHI_T]) / span
    psi_tt = (state.psi_t - older.stacked[PSI_T]) / span
    lap_phi, lap_psi = _laplacians(state, middle.stacked[PHI], middle.stacked[PSI])

    inner = slice(1, -1)
    res_a = p.A0 * phi_tt[:-1, inner] - p.a2 * p.b * lap_phi[:, inner] + p.b * p.B0 * lap_psi[:, inner]
    res_b = p.B0 * psi_tt[:-1, inner] - p.a1 * p.d * lap_psi[:, inner] + p.d * p.A0 * lap_phi[:, inner]
    cell = state.h_x * state.h_y

    return Diagnostics(
        t=middle.t,
        residual_A=float(np.sqrt(np.sum(res_a ** 2) * cell)),
        residual_B=float(np.sqrt(np.sum(res_b ** 2) * cell)),
        quad_energy=quad_energy(state),
        max_amplitude=float(max(np.max(np.abs(state.phi)), np.max(np.abs(state.psi)))),
    )
