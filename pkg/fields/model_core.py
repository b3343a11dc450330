# fields/model_core.py - Model parameters, linear potentials and steady-state fields
import logging
import math
from dataclasses import asdict, dataclass, fields, replace
from enum import Enum
from typing import Any, Dict, List, Union

import numpy as np

from .errors import OutOfDomain, UnknownKey

logger = logging.getLogger(__name__)

COUPLING_RTOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """Scalar constants of the Credits-Loans / Payment-on-Credits model.

    A0, B0 are the field values at the most risky corner (X, X); a1, a2 the
    continuity couplings; b, d the motion couplings; (h_x, h_y) and (g_x, g_y)
    the macro accelerations of the linear potentials H and G.
    """

    A0: float = 1.0
    B0: float = 1.0
    a1: float = 10.0
    a2: float = -0.1
    b: float = 1.0
    d: float = -1.0
    h_x: float = 0.0
    h_y: float = 0.0
    g_x: float = 0.0
    g_y: float = 0.0
    X: float = 10.0
    T_window: float = 1.0  # units of the rates only

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ModelParams":
        known = {f.name for f in fields(cls)}
        for key in data:
            if key not in known:
                raise UnknownKey(f"params.{key}")
        return cls(**{key: float(value) for key, value in data.items()})

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)

    def with_updates(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    @property
    def potential_h(self) -> "LinearPotential":
        return LinearPotential(self.h_x, self.h_y)

    @property
    def potential_g(self) -> "LinearPotential":
        return LinearPotential(self.g_x, self.g_y)


class ViolationKind(Enum):
    """Kinds of parameter invariant violations"""
    SIGN_VIOLATION = "SignViolation"
    COUPLING_MISMATCH = "CouplingMismatch"
    NON_POSITIVE_SCALE = "NonPositiveScale"


@dataclass(frozen=True)
class ParamViolation:
    kind: ViolationKind
    name: str
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.kind.value}({self.name}){': ' + self.detail if self.detail else ''}"


# name -> (predicate, kind, description)
_SIGN_RULES = {
    "a1": (lambda v: v > 0, "a1 > 0"),
    "a2": (lambda v: v < 0, "a2 < 0"),
    "b": (lambda v: v > 0, "b > 0"),
    "d": (lambda v: v < 0, "d < 0"),
}
_SCALE_RULES = ("A0", "B0", "X")


def coupling_satisfied(params: ModelParams, rtol: float = COUPLING_RTOL) -> bool:
    """Check A0²·h_y = B0²·g_y up to relative floating-point slack"""
    lhs = params.A0 ** 2 * params.h_y
    rhs = params.B0 ** 2 * params.g_y
    scale = max(abs(lhs), abs(rhs))
    return abs(lhs - rhs) <= rtol * scale


def collect_violations(params: ModelParams, require_coupling: bool = False) -> List[ParamViolation]:
    violations: List[ParamViolation] = []
    for name, (predicate, description) in _SIGN_RULES.items():
        value = getattr(params, name)
        if not (math.isfinite(value) and predicate(value)):
            violations.append(ParamViolation(ViolationKind.SIGN_VIOLATION, name, f"requires {description}, got {value!r}"))
    for name in _SCALE_RULES:
        value = getattr(params, name)
        if not (math.isfinite(value) and value > 0):
            violations.append(ParamViolation(ViolationKind.NON_POSITIVE_SCALE, name, f"requires {name} > 0, got {value!r}"))
    if require_coupling and not coupling_satisfied(params):
        violations.append(ParamViolation(
            ViolationKind.COUPLING_MISMATCH, "h_y,g_y",
            f"A0²h_y = {params.A0 ** 2 * params.h_y!r} != B0²g_y = {params.B0 ** 2 * params.g_y!r}",
        ))
    return violations


def validate_params(raw: ModelParams, require_coupling: bool = False) -> Union[ModelParams, List[ParamViolation]]:
    """
    Validate the sign conventions of the model.

    Returns the params unchanged when every invariant holds, otherwise the
    full list of violations. The coupling A0²h_y = B0²g_y is only checked when
    wave modes are in play (require_coupling=True).
    """
    violations = collect_violations(raw, require_coupling)
    if violations:
        logger.debug(f"Parameter validation failed: {[str(v) for v in violations]}")
        return violations
    return raw


@dataclass(frozen=True)
class LinearPotential:
    """Affine potential c_x·x + c_y·y, zero at the origin"""
    c_x: float
    c_y: float

    def __call__(self, x, y):
        return potential_eval(self, x, y)

    @property
    def gradient(self):
        return (self.c_x, self.c_y)


def potential_eval(p: LinearPotential, x, y):
    return p.c_x * x + p.c_y * y


def _check_domain(params: ModelParams, x, y):
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    if np.any(~np.isfinite(xs)) or np.any(~np.isfinite(ys)):
        raise OutOfDomain("non-finite risk coordinate")
    if np.any(xs < 0) or np.any(xs > params.X) or np.any(ys < 0) or np.any(ys > params.X):
        raise OutOfDomain(f"point outside the macro domain [0, {params.X}]²")


def steady_A(params: ModelParams, x, y, check_domain: bool = True):
    """Credits-Loans steady field A0·(1 + [h_x(x − X) + h_y(y − X)]/d)"""
    if check_domain:
        _check_domain(params, x, y)
    offset = params.h_x * (np.asarray(x, dtype=float) - params.X) + params.h_y * (np.asarray(y, dtype=float) - params.X)
    value = params.A0 * (1.0 + offset / params.d)
    return float(value) if np.ndim(value) == 0 else value


def steady_B(params: ModelParams, x, y, check_domain: bool = True):
    """Payment-on-Credits steady field B0·(1 + [g_x(x − X) + g_y(y − X)]/b)"""
    if check_domain:
        _check_domain(params, x, y)
    offset = params.g_x * (np.asarray(x, dtype=float) - params.X) + params.g_y * (np.asarray(y, dtype=float) - params.X)
    value = params.B0 * (1.0 + offset / params.b)
    return float(value) if np.ndim(value) == 0 else value


def steady_gradients(params: ModelParams):
    """Constant gradients ((∂A/∂x, ∂A/∂y), (∂B/∂x, ∂B/∂y)) of the steady fields"""
    grad_a = (params.h_x * params.A0 / params.d, params.h_y * params.A0 / params.d)
    grad_b = (params.g_x * params.B0 / params.b, params.g_y * params.B0 / params.b)
    return grad_a, grad_b
