"""Phase-plane analytics for rotational prescribed mean curvature surfaces.

A rotational surface in H^2 x R is generated by a unit-speed profile curve
``(x(s), z(s))`` where ``x`` is the hyperbolic distance to the rotation axis.
With ``y = x'`` (the angle function) and ``eps = sign(z')`` the profile obeys
the autonomous system

    x' = y
    y' = (1 - y^2) / tanh(x) - 2 eps h(y) sqrt(1 - y^2)

on the half-strip ``(0, inf) x (-1, 1)``.  Everything in this module is a pure
function of its arguments; nothing here integrates.
"""

from __future__ import annotations

import cmath
import enum
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

SQRT2_2 = math.sqrt(2.0) / 2.0
SQRT5_2 = math.sqrt(5.0) / 2.0

# relative size below which a quadratic discriminant is treated as zero
_DISCRIMINANT_SNAP = 64.0 * np.finfo(float).eps
# two eigenvalues are "equal" below this relative gap
EIGEN_EQUAL_TOL = 1e-9


class DomainError(ValueError):
    """Raised when an argument lies outside the closed phase strip."""


def _check_angle(y: float) -> None:
    if not abs(y) <= 1.0:
        raise DomainError(f"angle function must satisfy |y| <= 1, got {y!r}")


def _check_sign(epsilon: int) -> int:
    if epsilon not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {epsilon!r}")
    return int(epsilon)


@dataclass(frozen=True)
class PrescribedFunction:
    """The prescribed law ``h(y)`` on ``[-1, 1]``.

    Stored internally as ascending polynomial coefficients; ``kind`` only
    remembers how it was built so that JSON round-trips are faithful.
    """

    kind: str
    coeffs: tuple[float, ...]

    @classmethod
    def constant(cls, h0: float) -> "PrescribedFunction":
        return cls("constant", (float(h0),))

    @classmethod
    def linear(cls, a: float, lam: float) -> "PrescribedFunction":
        return cls("linear", (float(lam), float(a)))

    @classmethod
    def polynomial(cls, coeffs: Sequence[float]) -> "PrescribedFunction":
        c = tuple(float(v) for v in coeffs)
        if not c:
            raise ValueError("polynomial needs at least one coefficient")
        return cls("polynomial", c)

    @classmethod
    def from_dict(cls, d: dict) -> "PrescribedFunction":
        if not isinstance(d, dict):
            raise ValueError("prescribed function must be a JSON object")
        kind = d.get("kind")
        try:
            if kind == "linear":
                return cls.linear(d["a"], d["lambda"])
            if kind == "constant":
                return cls.constant(d["h0"])
            if kind == "polynomial":
                return cls.polynomial(d["coeffs"])
        except KeyError as exc:
            raise ValueError(f"{kind} function needs field {exc.args[0]!r}") from None
        raise ValueError(f"unknown prescribed function kind {kind!r}")

    @classmethod
    def from_json(cls, text: str) -> "PrescribedFunction":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        if self.kind == "linear":
            return {"kind": "linear", "a": self.coeffs[1], "lambda": self.coeffs[0]}
        if self.kind == "constant":
            return {"kind": "constant", "h0": self.coeffs[0]}
        return {"kind": "polynomial", "coeffs": list(self.coeffs)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @property
    def slope_sign(self) -> int:
        """Sign of ``h'`` if it is constant and nonzero on (-1, 1), else 0."""
        ys = np.linspace(-1.0, 1.0, 2001)[1:-1]
        d = np.array([self.derivative(v) for v in ys])
        if np.all(d > 0):
            return 1
        if np.all(d < 0):
            return -1
        return 0

    def __call__(self, y):
        return self.evaluate(y)

    def evaluate(self, y: float) -> float:
        _check_angle(y)
        return self._horner(y)

    def derivative(self, y: float) -> float:
        _check_angle(y)
        acc = 0.0
        n = len(self.coeffs)
        for k in range(n - 1, 0, -1):
            acc = acc * y + k * self.coeffs[k]
        return acc

    def increment(self, t):
        """``h(t) - h(0)`` without cancellation for tiny ``t``."""
        acc = 0.0
        for c in reversed(self.coeffs[1:]):
            acc = acc * t + c
        return acc * t

    def _horner(self, y):
        # no domain check; also accepts complex arguments
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * y + c
        return acc


def linear_law(lam: float, a: float = 1.0) -> PrescribedFunction:
    return PrescribedFunction.linear(a, lam)


@dataclass(frozen=True)
class PhaseState:
    x: float
    y: float
    epsilon: int = 1

    def __post_init__(self):
        _check_sign(self.epsilon)

    @property
    def interior(self) -> bool:
        return self.x > 0.0 and abs(self.y) < 1.0


class Stability(str, enum.Enum):
    SPIRAL = "Spiral"
    IMPROPER_NODE = "ImproperNode"
    NODE = "Node"


@dataclass(frozen=True)
class Equilibrium:
    x0: float
    epsilon: int
    jacobian: np.ndarray
    eigenvalues: tuple[complex, complex]
    stability: Stability

    @property
    def asymptotically_stable(self) -> bool:
        return all(ev.real < 0 for ev in self.eigenvalues)


@dataclass(frozen=True)
class CurvatureSample:
    kappa1: float
    kappa2: float
    mean_curvature: float
    angle: float


def field(f: PrescribedFunction, s: PhaseState) -> tuple[float, float]:
    """Right-hand side ``(x', y')`` of the profile system at an interior state."""
    if not s.interior:
        raise DomainError(f"field is only defined in the open strip, got {s}")
    x, y = s.x, s.y
    w = math.sqrt(1.0 - y * y)
    dy = (1.0 - y * y) / math.tanh(x) - 2.0 * s.epsilon * f._horner(y) * w
    return y, dy


def gamma_curve(f: PrescribedFunction, epsilon: int, y: float) -> float | None:
    """Nullcline ``x = Gamma_eps(y)`` where ``y' = 0``, or None where it is absent."""
    _check_angle(y)
    eps = _check_sign(epsilon)
    h = eps * f._horner(y)
    if h <= 0.0:
        return None
    arg = math.sqrt(1.0 - y * y) / (2.0 * h)
    if not 0.0 < arg < 1.0:
        return None
    return math.atanh(arg)


def equilibrium_position(f: PrescribedFunction, epsilon: int) -> float | None:
    eps = _check_sign(epsilon)
    two_h0 = 2.0 * eps * f._horner(0.0)
    if two_h0 <= 1.0:
        return None
    return math.atanh(1.0 / two_h0)


def jacobian_at(f: PrescribedFunction, epsilon: int, x: float, y: float) -> np.ndarray:
    """Analytic Jacobian of the field at an interior point."""
    eps = _check_sign(epsilon)
    w = math.sqrt(1.0 - y * y)
    h = f._horner(y)
    dh = f.derivative(y)
    d_dx = -(1.0 - y * y) / math.sinh(x) ** 2
    d_dy = -2.0 * y / math.tanh(x) - 2.0 * eps * (dh * w - h * y / w)
    return np.array([[0.0, 1.0], [d_dx, d_dy]])


def _quadratic_eigenvalues(trace: float, det: float) -> tuple[complex, complex]:
    disc = trace * trace - 4.0 * det
    if abs(disc) <= _DISCRIMINANT_SNAP * (trace * trace + 4.0 * abs(det)):
        disc = 0.0
    root = cmath.sqrt(disc) if disc < 0 else math.sqrt(disc)
    return complex(0.5 * (trace + root)), complex(0.5 * (trace - root))


def stability_class(eig: tuple[complex, complex]) -> Stability:
    m1, m2 = (complex(v) for v in eig)
    if abs(m1 - m2) < EIGEN_EQUAL_TOL * max(1.0, abs(m1)):
        return Stability.IMPROPER_NODE
    if m1.imag != 0.0 or m2.imag != 0.0:
        return Stability.SPIRAL
    return Stability.NODE


def equilibrium(f: PrescribedFunction, epsilon: int) -> Equilibrium | None:
    """Equilibrium ``(x0, 0)`` of the system in the half-strip of sign ``epsilon``.

    Exists iff ``2 eps h(0) > 1``.  At the equilibrium ``coth(x0) = 2 eps h(0)``,
    so ``-1/sinh^2(x0) = 1 - 4 h(0)^2`` is used for the lower-left entry; this
    keeps the double-eigenvalue case exact in floating point.
    """
    eps = _check_sign(epsilon)
    x0 = equilibrium_position(f, eps)
    if x0 is None:
        return None
    h0 = f._horner(0.0)
    jac = np.array([[0.0, 1.0], [1.0 - 4.0 * h0 * h0, -2.0 * eps * f.derivative(0.0)]])
    eig = _quadratic_eigenvalues(jac[0, 0] + jac[1, 1], jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0])
    return Equilibrium(x0, eps, jac, eig, stability_class(eig))


def eigenvalues_linear_case(lam: float) -> tuple[complex, complex]:
    """Eigenvalues ``-1 +/- sqrt(2 - 4 lam^2)`` of the linearisation for ``h = y + lam``."""
    if not lam > 0.5:
        raise ValueError(f"equilibrium exists only for lambda > 1/2, got {lam!r}")
    rad = 2.0 - 4.0 * lam * lam
    if abs(rad) <= _DISCRIMINANT_SNAP * (2.0 + 4.0 * lam * lam):
        rad = 0.0
    root = cmath.sqrt(rad) if rad < 0 else math.sqrt(rad)
    return complex(-1.0 + root), complex(-1.0 - root)


def escape_residual(f: PrescribedFunction, epsilon: int, y: float) -> float:
    """``2 eps h(y) - sqrt(1 - y^2)``; its roots are the only admissible escape lines."""
    _check_angle(y)
    eps = _check_sign(epsilon)
    return 2.0 * eps * f._horner(y) - math.sqrt(max(0.0, 1.0 - y * y))


def asymptote_candidates(lam: float) -> tuple[float, float]:
    """Closed-form roots ``(y0+, y0-)`` of the escape residual for ``h = y + lam``."""
    if not 0.0 < lam <= SQRT5_2 * (1.0 + 1e-15):
        raise ValueError(f"asymptote candidates need 0 < lambda <= sqrt(5)/2, got {lam!r}")
    rad = max(0.0, 5.0 - 4.0 * lam * lam)
    r = math.sqrt(rad)
    return (-4.0 * lam + r) / 5.0, (-4.0 * lam - r) / 5.0


def asymptote_sign(f: PrescribedFunction, y0: float) -> int:
    """Half-strip a candidate asymptote belongs to: +1 if ``h(y0) > 0``, -1 if ``h(y0) < 0``, 0 otherwise."""
    h = f._horner(y0)
    return 1 if h > 0 else (-1 if h < 0 else 0)


def bendixson_divergence(f: PrescribedFunction, epsilon: int, x: float, y: float) -> float:
    """Divergence of the field scaled by ``sinh(x) / sqrt(1 - y^2)``."""
    eps = _check_sign(epsilon)
    return -2.0 * eps * f.derivative(y) * math.sinh(x)


def curvatures(x: float, xp: float, xpp: float, zp: float, zpp: float) -> CurvatureSample:
    if not x > 0.0:
        raise DomainError(f"curvatures need x > 0, got {x!r}")
    k1 = xp * zpp - xpp * zp
    k2 = zp / math.tanh(x)
    return CurvatureSample(k1, k2, 0.5 * (k1 + k2), xp)


def state_curvatures(f: PrescribedFunction, s: PhaseState) -> CurvatureSample:
    """Principal curvatures at an interior state, second derivatives from the field."""
    _, dy = field(f, s)
    zp = s.epsilon * math.sqrt(1.0 - s.y * s.y)
    zpp = -s.y * dy / zp
    return curvatures(s.x, s.y, dy, zp, zpp)
