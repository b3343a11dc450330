# fields/wave_analysis.py - Closed-form surface-like wave layer
import cmath
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, optimize

from .errors import (
    ComplexRoots,
    ConstraintInfeasible,
    DegenerateQuartic,
    InvalidParams,
    NoSolution,
    OutOfDomain,
    UnsupportedMode,
    ZeroAcceleration,
)
from .guards import require_valid_params
from .model_core import ModelParams, steady_A, steady_B

logger = logging.getLogger(__name__)

DISCRIMINANT_RTOL = 1e-12
ROOT_MATCH_RTOL = 1e-9
DISPERSION_RESIDUAL_RTOL = 1e-10
DEFAULT_SCAN_POINTS = 64


@dataclass(frozen=True)
class QuarticCoeffs:
    """Coefficients of q4·s⁴ + q2·s² + q0 (odd coefficients vanish)"""
    q4: float
    q2: float
    q0: float

    def evaluate(self, s):
        s2 = np.asarray(s, dtype=float) ** 2
        return self.q4 * s2 * s2 + self.q2 * s2 + self.q0

    def relative_residual(self, s) -> float:
        s2 = float(s) ** 2
        scale = abs(self.q4) * s2 * s2 + abs(self.q2) * s2 + abs(self.q0)
        if scale == 0.0:
            return 0.0
        return abs(self.q4 * s2 * s2 + self.q2 * s2 + self.q0) / scale

    @property
    def discriminant(self) -> float:
        return self.q2 * self.q2 - 4.0 * self.q4 * self.q0


class RootRegion(Enum):
    REAL = "real"
    COMPLEX = "complex"
    MIXED = "mixed"  # real s² values, not both positive


@dataclass(frozen=True)
class RootSet:
    region: RootRegion
    discriminant: float
    s_squared: Tuple[complex, complex]
    s1: float = math.nan
    s2: float = math.nan

    @property
    def is_real(self) -> bool:
        return self.region is RootRegion.REAL

    @property
    def complex_flag(self) -> bool:
        return self.region is RootRegion.COMPLEX

    @property
    def roots(self) -> Tuple[float, float, float, float]:
        """Roots ordered as (s1, s2, -s1, -s2)"""
        if not self.is_real:
            raise ComplexRoots(f"characteristic roots are not real ({self.region.value})")
        return (self.s1, self.s2, -self.s1, -self.s2)


class WaveModeKind(Enum):
    SINGLE_DECAY = "single_decay"
    GROWTH_PAIR = "growth_pair"
    GENERAL = "general"


@dataclass(frozen=True)
class WaveMode:
    """
    One analytic surface-like solution.

    φ = cos(kx − ωt)·f(y − X) with f(z) = Σ λ_i exp(s_i z), and the companion
    ψ = cos(kx − ωt)·g(y − X) with g(z) = Σ λ_i r_i exp(s_i z). On the
    matched-coupling family r_i = 1 for the active roots and φ = ψ.
    """
    k: float
    omega: float
    roots: Tuple[float, float, float, float]
    lambdas: Tuple[float, float, float, float]
    ratios: Tuple[float, float, float, float]
    kind: WaveModeKind
    target_slope: float
    coeffs: QuarticCoeffs = field(repr=False)

    def profile(self, z, derivative: int = 0):
        """f^(n)(z) for z = y − X"""
        return self._combine(z, self.lambdas, derivative)

    def companion_profile(self, z, derivative: int = 0):
        """g^(n)(z), the ψ-profile"""
        weights = tuple(lam * r for lam, r in zip(self.lambdas, self.ratios))
        return self._combine(z, weights, derivative)

    def _combine(self, z, weights, derivative: int):
        z = np.asarray(z, dtype=float)
        total = np.zeros_like(z)
        for weight, s in zip(weights, self.roots):
            if weight != 0.0:
                total = total + weight * s ** derivative * np.exp(s * z)
        return float(total) if total.ndim == 0 else total

    @property
    def border_value(self) -> float:
        return float(sum(self.lambdas))

    @property
    def companion_border_value(self) -> float:
        return float(sum(lam * r for lam, r in zip(self.lambdas, self.ratios)))

    @property
    def active_root(self) -> float:
        """The decaying root carrying the whole weight of a single_decay mode"""
        if self.kind is not WaveModeKind.SINGLE_DECAY:
            raise UnsupportedMode(f"{self.kind.value} modes have no single active root")
        index = int(np.argmax(np.abs(self.lambdas)))
        return self.roots[index]

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega

    def to_dict(self) -> Dict[str, object]:
        return {
            "k": self.k,
            "omega": self.omega,
            "kind": self.kind.value,
            "roots": list(self.roots),
            "lambdas": list(self.lambdas),
            "ratios": list(self.ratios),
            "target_slope": self.target_slope,
            "q4": self.coeffs.q4,
            "q2": self.coeffs.q2,
            "q0": self.coeffs.q0,
        }


@dataclass(frozen=True)
class SurfaceProfile:
    amplitude: float
    k: float
    omega: float


@dataclass(frozen=True)
class BorderTotal:
    quadrature: float
    closed_form: float
    steady_part: float
    oscillatory_part: float
    quadrature_error: float

    @property
    def relative_gap(self) -> float:
        scale = max(abs(self.quadrature), abs(self.closed_form), 1e-300)
        return abs(self.quadrature - self.closed_form) / scale


@dataclass(frozen=True)
class DispersionRow:
    k: float
    omega: float
    s1: float
    s2: float
    discriminant: float
    region: str


# Coefficients and roots ---------------------------------------------------

@require_valid_params()
def quartic_coefficients(params: ModelParams, k: float, omega: float) -> QuarticCoeffs:
    A0, B0, a1, a2, b, d = params.A0, params.B0, params.a1, params.a2, params.b, params.d
    k2 = k * k
    w2 = omega * omega
    q4 = a1 * a2 * b * d - b * d * B0 * A0
    q2 = (A0 * w2 - a2 * b * k2) * a1 * d + (B0 * w2 - a1 * d * k2) * a2 * b + 2.0 * b * d * A0 * B0 * k2
    q0 = (a2 * b * k2 - A0 * w2) * (a1 * d * k2 - B0 * w2) - b * d * A0 * B0 * k2 * k2
    return QuarticCoeffs(q4, q2, q0)


def characteristic_roots(c: QuarticCoeffs) -> RootSet:
    """
    Solve q4·s⁴ + q2·s² + q0 = 0 as a quadratic in s².

    The larger-magnitude s² is computed first and the other follows from the
    product q0/q4. A negative discriminant is reported, not raised.
    """
    if c.q4 == 0.0:
        raise DegenerateQuartic("q4 = 0: characteristic polynomial is not quartic")

    disc = c.discriminant
    if abs(disc) <= DISCRIMINANT_RTOL * c.q2 * c.q2:
        disc = 0.0

    if disc < 0.0:
        root = cmath.sqrt(disc)
        z1 = (-c.q2 + root) / (2.0 * c.q4)
        z2 = (-c.q2 - root) / (2.0 * c.q4)
        return RootSet(RootRegion.COMPLEX, disc, (z1, z2))

    sq = math.sqrt(disc)
    z_big = (-c.q2 + math.copysign(sq, -c.q2)) / (2.0 * c.q4)
    z_small = c.q0 / (c.q4 * z_big) if z_big != 0.0 else 0.0
    z_hi, z_lo = max(z_big, z_small), min(z_big, z_small)
    if z_lo <= 0.0:
        return RootSet(RootRegion.MIXED, disc, (complex(z_hi), complex(z_lo)))
    return RootSet(RootRegion.REAL, disc, (complex(z_hi), complex(z_lo)), math.sqrt(z_hi), math.sqrt(z_lo))


def companion_ratio(params: ModelParams, k: float, omega: float, s: float) -> float:
    """ψ/φ amplitude ratio of the coupled potential pair for the root s"""
    L = s * s - k * k
    w2 = omega * omega
    num_a, den_a = params.A0 * w2 + params.a2 * params.b * L, params.b * params.B0 * L
    num_b, den_b = params.d * params.A0 * L, params.B0 * w2 + params.a1 * params.d * L
    if den_a == 0.0 and den_b == 0.0:
        raise ConstraintInfeasible(f"companion ratio undefined at s={s}, k={k}, omega={omega}")
    if abs(den_a) >= abs(den_b):
        return num_a / den_a
    return num_b / den_b


def matched_coupling_gap(params: ModelParams) -> float:
    """Zero when the branch s² = k² + A0ω²/(b(B0 − a2)) has unit companion ratio"""
    return params.b * params.B0 * (params.B0 - params.a2) - params.d * params.A0 * (params.A0 - params.a1)


def boundary_slope(params: ModelParams, omega: float) -> float:
    """f'(0) = A0ω²/(B0·g_y) demanded by the surface condition"""
    if params.g_y <= 0.0:
        raise InvalidParams(message=f"surface condition needs g_y > 0, got {params.g_y!r}")
    return params.A0 * omega * omega / (params.B0 * params.g_y)


# Dispersion ---------------------------------------------------------------

def _dispersion_residual(params: ModelParams, k: float, omega: float) -> Tuple[float, float]:
    coeffs = quartic_coefficients(params, k, omega)
    s = params.A0 * omega * omega / (params.B0 * params.g_y)
    return float(coeffs.evaluate(s)), coeffs.relative_residual(s)


def default_omega_max(params: ModelParams) -> float:
    return 1e3 * math.sqrt(params.B0 * abs(params.g_y) / params.A0)


@require_valid_params(require_coupling=True)
def dispersion_branches(params: ModelParams, k: float, omega_max: Optional[float] = None,
                        n_scan: int = DEFAULT_SCAN_POINTS) -> List[float]:
    """
    Every positive ω bracketed on a log-spaced scan of (0, omega_max] for which
    s(ω) = A0ω²/(B0g_y) is a root of the characteristic quartic at (k, ω).
    """
    if k <= 0.0:
        raise OutOfDomain(f"wave number must be positive, got {k!r}")
    boundary_slope(params, 1.0)
    omega_max = default_omega_max(params) if omega_max is None else float(omega_max)

    grid = np.geomspace(omega_max * 1e-6, omega_max, n_scan)
    values = [_dispersion_residual(params, k, w)[0] for w in grid]

    branches: List[float] = []
    for i in range(len(grid) - 1):
        lo, hi = grid[i], grid[i + 1]
        f_lo, f_hi = values[i], values[i + 1]
        if f_lo == 0.0:
            candidate = lo
        elif f_lo * f_hi < 0.0:
            candidate = optimize.brentq(
                lambda w: _dispersion_residual(params, k, w)[0], lo, hi,
                xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200,
            )
        else:
            continue
        _, rel = _dispersion_residual(params, k, candidate)
        if rel < DISPERSION_RESIDUAL_RTOL:
            branches.append(float(candidate))
        else:
            logger.debug(f"Discarded dispersion candidate omega={candidate} (relative residual {rel:.3e})")
    if values[-1] == 0.0:
        branches.append(float(grid[-1]))
    return branches


def dispersion_solve(params: ModelParams, k: float, omega_max: Optional[float] = None,
                     n_scan: int = DEFAULT_SCAN_POINTS, branch: int = 0) -> float:
    """
    Positive ω on the single-root branch of the dispersion relation.

    branch=0 is the smallest bracketed root; branch=n picks the (n+1)-th in
    increasing order.
    """
    if branch < 0:
        raise OutOfDomain(f"branch index must be non-negative, got {branch!r}")
    omega_max = default_omega_max(params) if omega_max is None else float(omega_max)
    branches = dispersion_branches(params, k, omega_max=omega_max, n_scan=n_scan)
    if not branches:
        raise NoSolution(omega_max)
    if branch >= len(branches):
        raise NoSolution(omega_max, f"only {len(branches)} dispersion branch(es) on (0, {omega_max:g}] at k={k:g}, "
                                    f"branch {branch} requested")
    return branches[branch]


def dispersion_table(params: ModelParams, ks: Sequence[float], omega_max: Optional[float] = None,
                     branch: int = 0) -> List[DispersionRow]:
    rows: List[DispersionRow] = []
    for k in ks:
        try:
            omega = dispersion_solve(params, float(k), omega_max=omega_max, branch=branch)
        except NoSolution:
            logger.info(f"No dispersion branch for k={k:g}")
            rows.append(DispersionRow(float(k), math.nan, math.nan, math.nan, math.nan, "no_solution"))
            continue
        roots = characteristic_roots(quartic_coefficients(params, float(k), omega))
        rows.append(DispersionRow(float(k), omega, roots.s1, roots.s2, roots.discriminant, roots.region.value))
    return rows


def group_velocity(rows: Sequence[DispersionRow]) -> List[Tuple[float, float]]:
    """Finite-difference dω/dk over the rows with a dispersion branch"""
    solved = [(row.k, row.omega) for row in rows if math.isfinite(row.omega)]
    if len(solved) < 2:
        return [(k, math.nan) for k, _ in solved]
    ks = np.array([k for k, _ in solved])
    omegas = np.array([w for _, w in solved])
    return list(zip(ks.tolist(), np.gradient(omegas, ks).tolist()))


# Modes --------------------------------------------------------------------

@require_valid_params(require_coupling=True)
def build_mode(params: ModelParams, k: float, omega: float, kind: WaveModeKind = WaveModeKind.SINGLE_DECAY,
               lambda_spec: Optional[Sequence[float]] = None) -> WaveMode:
    """
    Build f(y − X) = Σ λ_i exp(s_i(y − X)) with Σλ_i = 1 and Σλ_i s_i = A0ω²/(B0g_y).

    kind=general takes lambda_spec = (λ2, λ4), the weights on s2 and −s2.
    """
    kind = WaveModeKind(kind)
    target = boundary_slope(params, omega)
    coeffs = quartic_coefficients(params, k, omega)
    root_set = characteristic_roots(coeffs)
    if not root_set.is_real:
        raise ComplexRoots(f"roots at k={k}, omega={omega} are {root_set.region.value}")
    s1, s2 = root_set.s1, root_set.s2
    roots = root_set.roots

    if kind is WaveModeKind.SINGLE_DECAY:
        matches = [i for i, s in enumerate((s1, s2)) if abs(s - target) <= ROOT_MATCH_RTOL * max(abs(s), abs(target))]
        if not matches:
            raise ConstraintInfeasible(
                f"single_decay needs a root equal to A0ω²/(B0g_y)={target:.12g}; roots are s1={s1:.12g}, s2={s2:.12g}"
            )
        lambdas = [0.0, 0.0, 0.0, 0.0]
        lambdas[matches[0]] = 1.0
    elif kind is WaveModeKind.GROWTH_PAIR:
        ratio = target / s1
        lambdas = [(1.0 + ratio) / 2.0, 0.0, (1.0 - ratio) / 2.0, 0.0]
    else:
        if lambda_spec is None or len(lambda_spec) != 2:
            raise ConstraintInfeasible("general modes need lambda_spec = (lambda2, lambda4)")
        lam2, lam4 = float(lambda_spec[0]), float(lambda_spec[1])
        system = np.array([[1.0, 1.0], [s1, -s1]])
        rhs = np.array([1.0 - lam2 - lam4, target - s2 * (lam2 - lam4)])
        lam1, lam3 = np.linalg.solve(system, rhs)
        lambdas = [float(lam1), lam2, float(lam3), lam4]

    ratios = tuple(companion_ratio(params, k, omega, s) for s in roots)
    mode = WaveMode(k, omega, roots, tuple(lambdas), ratios, kind, target, coeffs)
    logger.debug(f"Built {kind.value} mode k={k:g} omega={omega:g} lambdas={mode.lambdas}")
    return mode


def ode_residual(mode: WaveMode, z) -> np.ndarray:
    """Relative residual of q4·f'''' + q2·f'' + q0·f at z = y − X"""
    c = mode.coeffs
    f0, f2, f4 = mode.profile(z), mode.profile(z, 2), mode.profile(z, 4)
    residual = c.q4 * np.asarray(f4) + c.q2 * np.asarray(f2) + c.q0 * np.asarray(f0)
    scale = abs(c.q4) * np.abs(f4) + abs(c.q2) * np.abs(f2) + abs(c.q0) * np.abs(f0)
    return np.abs(residual) / np.where(scale > 0, scale, 1.0)


def potential_residuals(mode: WaveMode, params: ModelParams, t, x, y) -> Tuple[np.ndarray, np.ndarray]:
    """
    Relative residuals of the coupled potential equations
        A0·φ_tt − a2b·Δφ + bB0·Δψ = 0,   B0·ψ_tt − a1d·Δψ + dA0·Δφ = 0
    for φ = cos(kx − ωt)·f, ψ = cos(kx − ωt)·g. The harmonic factor is common
    to every term, so the ratio depends on y only.
    """
    z = np.asarray(y, dtype=float) - params.X
    k2, w2 = mode.k ** 2, mode.omega ** 2
    f, g = np.asarray(mode.profile(z)), np.asarray(mode.companion_profile(z))
    lap_f = np.asarray(mode.profile(z, 2)) - k2 * f
    lap_g = np.asarray(mode.companion_profile(z, 2)) - k2 * g
    ab, bB, a1d, dA = params.a2 * params.b, params.b * params.B0, params.a1 * params.d, params.d * params.A0

    res_a = -params.A0 * w2 * f - ab * lap_f + bB * lap_g
    scale_a = params.A0 * w2 * np.abs(f) + abs(ab) * np.abs(lap_f) + abs(bB) * np.abs(lap_g)
    res_b = -params.B0 * w2 * g - a1d * lap_g + dA * lap_f
    scale_b = params.B0 * w2 * np.abs(g) + abs(a1d) * np.abs(lap_g) + abs(dA) * np.abs(lap_f)
    shape = np.broadcast(np.asarray(t, dtype=float), np.asarray(x, dtype=float), z).shape
    rel_a = np.broadcast_to(np.abs(res_a) / np.where(scale_a > 0, scale_a, 1.0), shape)
    rel_b = np.broadcast_to(np.abs(res_b) / np.where(scale_b > 0, scale_b, 1.0), shape)
    return rel_a, rel_b


# Field evaluation ---------------------------------------------------------

def evaluate_fields(mode: WaveMode, params: ModelParams, t, x, y, check_domain: bool = True):
    """(A, B) = steady fields + (B0/d)·ψ_t and (A0/b)·φ_t of the mode"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    steady_a = steady_A(params, x, y, check_domain=check_domain)
    steady_b = steady_B(params, x, y, check_domain=check_domain)
    z = y - params.X
    wave = np.sin(mode.k * x - mode.omega * np.asarray(t, dtype=float))
    a = steady_a + params.B0 * mode.omega / params.d * wave * mode.companion_profile(z)
    b = steady_b + params.A0 * mode.omega / params.b * wave * mode.profile(z)
    if np.ndim(a) == 0:
        return float(a), float(b)
    return a, b


def _require_single_decay(mode: WaveMode):
    if mode.kind is not WaveModeKind.SINGLE_DECAY:
        raise UnsupportedMode(f"operation defined for single_decay modes only, got {mode.kind.value}")


def surface_profile(mode: WaveMode, params: ModelParams) -> SurfaceProfile:
    _require_single_decay(mode)
    return SurfaceProfile(params.A0 * mode.omega / (params.B0 * params.g_y), mode.k, mode.omega)


def surface_elevation(mode: WaveMode, params: ModelParams, t, x):
    """ξ(t, x) = X − A0ω/(B0g_y)·sin(kx − ωt)"""
    amplitude = surface_profile(mode, params).amplitude
    xi = params.X - amplitude * np.sin(mode.k * np.asarray(x, dtype=float) - mode.omega * np.asarray(t, dtype=float))
    return float(xi) if np.ndim(xi) == 0 else xi


def surface_elevation_psi(mode: WaveMode, params: ModelParams, t, x):
    """ξ from the ψ side: X − B0/(A0h_y)·∂ψ/∂t at y = X"""
    _require_single_decay(mode)
    if params.h_y == 0.0:
        raise ZeroAcceleration("h_y = 0: surface relation on the psi side is undefined")
    psi_t = mode.omega * np.sin(mode.k * np.asarray(x, dtype=float) - mode.omega * np.asarray(t, dtype=float)) \
        * mode.companion_border_value
    xi = params.X - params.B0 / (params.A0 * params.h_y) * psi_t
    return float(xi) if np.ndim(xi) == 0 else xi


def border_potential_slope(mode: WaveMode, t, x):
    """∂φ/∂y at y = X"""
    value = np.cos(mode.k * np.asarray(x, dtype=float) - mode.omega * np.asarray(t, dtype=float)) * mode.profile(0.0, 1)
    return float(value) if np.ndim(value) == 0 else value


def border_credit_total(mode: WaveMode, params: ModelParams, t: float) -> BorderTotal:
    """
    Total Credits received on the border y = X: ∫₀^X A(t, x, X) dx.
    The quadrature is the reference; the closed form is
        A0[X − h_xX²/(2d)] − (2B0ω·g(0)/(dk))·sin(kX/2)·sin(ωt − kX/2).
    """
    _require_single_decay(mode)
    X, k, w = params.X, mode.k, mode.omega
    amp = params.B0 * w / params.d * mode.companion_border_value

    def integrand(x):
        steady = params.A0 * (1.0 + params.h_x * (x - X) / params.d)
        return steady + amp * math.sin(k * x - w * t)

    quad_value, quad_err = integrate.quad(integrand, 0.0, X, epsabs=1e-13, epsrel=1e-13, limit=200)
    steady_part = params.A0 * (X - params.h_x * X * X / (2.0 * params.d))
    oscillatory = -2.0 * amp / k * math.sin(k * X / 2.0) * math.sin(w * t - k * X / 2.0)
    return BorderTotal(quad_value, steady_part + oscillatory, steady_part, oscillatory, quad_err)


def border_payment_total(mode: WaveMode, params: ModelParams, t: float) -> BorderTotal:
    """Payment-on-Credits counterpart of border_credit_total, ∫₀^X B(t, x, X) dx"""
    _require_single_decay(mode)
    X, k, w = params.X, mode.k, mode.omega
    amp = params.A0 * w / params.b * mode.border_value

    def integrand(x):
        steady = params.B0 * (1.0 + params.g_x * (x - X) / params.b)
        return steady + amp * math.sin(k * x - w * t)

    quad_value, quad_err = integrate.quad(integrand, 0.0, X, epsabs=1e-13, epsrel=1e-13, limit=200)
    steady_part = params.B0 * (X - params.g_x * X * X / (2.0 * params.b))
    oscillatory = -2.0 * amp / k * math.sin(k * X / 2.0) * math.sin(w * t - k * X / 2.0)
    return BorderTotal(quad_value, steady_part + oscillatory, steady_part, oscillatory, quad_err)


def growth_profile(mode: WaveMode, depth_list: Sequence[float]) -> np.ndarray:
    """|f(−Δ)| / |f(0)| for depths Δ = X − y ≥ 0 below the border"""
    if mode.kind is not WaveModeKind.GROWTH_PAIR:
        raise UnsupportedMode(f"growth_profile needs a growth_pair mode, got {mode.kind.value}")
    depths = np.asarray(depth_list, dtype=float)
    if np.any(depths < 0):
        raise OutOfDomain("depths must be non-negative")
    return np.abs(mode.profile(-depths)) / abs(mode.border_value)


def growth_rate_fit(mode: WaveMode, depth_list: Sequence[float]) -> float:
    """Least-squares slope of log|f(−Δ)| against Δ"""
    depths = np.asarray(depth_list, dtype=float)
    slope, _ = np.polyfit(depths, np.log(growth_profile(mode, depths)), 1)
    return float(slope)
