"""Qualitative fate of orbits and the surface class they generate.

The class tables follow the classification of rotational surfaces with
linear prescribed function ``h(y) = y + lam`` (``lam > 0``).  Every table
entry is confirmed against an actually integrated orbit; a disagreement
raises :class:`ClassificationMismatch`, which in practice signals a budget
or tolerance problem.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import core
from .core import PhaseState, PrescribedFunction
from .integrator import (EventKind, HorizontalPlane, IntegratorConfig, Orbit, OrbitState, integrate,
                         integrate_axis, start_from_axis, winding_count)

_LAMBDA_EQ_TOL = 1e-12
_GRID = 2001  # 1e-3 resolution on [-1, 1]
_TOUCH_TOL = 1e-12  # |residual| accepted at a tangential (even-order) root


class InconsistentFate(RuntimeError):
    pass


class ClassificationMismatch(RuntimeError):
    pass


class Fate(str, enum.Enum):
    TO_EQUILIBRIUM = "ToEquilibrium"
    TO_LINE = "ToLine"
    AXIS_TOUCH = "AxisTouch"
    UNBOUNDED_ALTERNATING = "UnboundedAlternating"
    TRUNCATED = "Truncated"


@dataclass(frozen=True)
class FateLabel:
    kind: Fate
    spiraling: bool | None = None
    y0: float | None = None
    delta: int | None = None
    evidence: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {"fate": self.kind.value}
        if self.spiraling is not None:
            d["spiraling"] = self.spiraling
        if self.y0 is not None:
            d["y0"] = self.y0
        if self.delta is not None:
            d["delta"] = self.delta
        d["evidence"] = self.evidence
        return d


@dataclass(frozen=True)
class SurfaceClass:
    name: str
    theorem_item: str
    intersections: str | None = None  # "infinite" | "finite" for converging cylinders
    variant: str | None = None  # "a" | "b" for mixed annuli
    necksize: float | None = None
    fates: tuple[FateLabel, ...] = ()
    evidence: dict = field(default_factory=dict)

    @property
    def label(self) -> str:
        if self.intersections:
            return f"{self.name}({self.intersections})"
        if self.variant:
            return f"{self.name}({self.variant})"
        if self.necksize is not None:
            return f"{self.name}({self.necksize:g})"
        return self.name

    def to_dict(self, **context) -> dict:
        d = dict(context)
        d.update({"class": self.label, "theoremItem": self.theorem_item, "evidence": self.evidence})
        if self.fates:
            d["fates"] = [fl.to_dict() for fl in self.fates]
        return d


# ---------------------------------------------------------------- escape roots

def escape_roots(f: PrescribedFunction, epsilon: int, lo: float = -1.0, hi: float = 1.0) -> list[float]:
    """Roots of ``2 eps h(y) - sqrt(1 - y^2)`` in ``[lo, hi]`` from a 1e-3 sign-change grid."""
    ys = np.linspace(-1.0, 1.0, _GRID)
    ys = ys[(ys >= lo - 1e-15) & (ys <= hi + 1e-15)]
    g = lambda y: core.escape_residual(f, epsilon, float(min(1.0, max(-1.0, y))))
    vals = [g(y) for y in ys]
    roots = []
    for i, (ya, va) in enumerate(zip(ys, vals)):
        if va == 0.0:
            roots.append(float(ya))
        if i + 1 < len(ys):
            vb = vals[i + 1]
            if va != 0.0 and vb != 0.0 and (va > 0) != (vb > 0):
                roots.append(float(brentq(g, ya, ys[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)))
    # tangential roots leave no sign change: refine local minima of |g|
    a = np.abs(vals)
    for i in range(1, len(ys) - 1):
        if a[i] <= a[i - 1] and a[i] <= a[i + 1] and a[i] > 0.0 and (vals[i - 1] > 0) == (vals[i + 1] > 0):
            sgn = 1.0 if vals[i] > 0 else -1.0
            r = minimize_scalar(lambda y: sgn * g(y), bounds=(ys[i - 1], ys[i + 1]), method="bounded",
                                options={"xatol": 1e-12})
            if abs(r.fun) < _TOUCH_TOL:
                roots.append(float(r.x))
    out = []
    for r in sorted(roots):
        if not out or r - out[-1] > 1e-9:
            out.append(r)
    return out


def nearest_escape_root(f: PrescribedFunction, epsilon: int, y: float) -> float | None:
    roots = escape_roots(f, epsilon)
    if not roots:
        return None
    return min(roots, key=lambda r: abs(r - y))


def check_bowl_hypotheses(f: PrescribedFunction) -> float | None:
    """A root ``y*`` certifying an entire rotational graph, or None.

    Upward bowls come from roots in ``[0, 1]`` (largest first), downward ones
    from ``[-1, 0]``.
    """
    for eps, lo, hi, pick in ((1, 0.0, 1.0, max), (-1, -1.0, 0.0, min),
                              (-1, 0.0, 1.0, max), (1, -1.0, 0.0, min)):
        r = escape_roots(f, eps, lo, hi)
        if r:
            return pick(r)
    return None


def check_catenoid_hypotheses(f: PrescribedFunction) -> bool:
    ys = np.linspace(-1.0, 1.0, _GRID)
    if any(f.evaluate(float(y)) > 0.0 for y in ys):
        return False
    return abs(f.evaluate(1.0)) < 1e-12 and abs(f.evaluate(-1.0)) < 1e-12


# ---------------------------------------------------------------- fates

def _evidence(orbit: Orbit, eq: core.Equilibrium | None) -> dict:
    poles = [e for e in orbit.events_of(EventKind.POLE) if e.eps_switch]
    ev = {
        "crossings": orbit.count(EventKind.EQUATOR),
        "gammaCrossings": orbit.count(EventKind.GAMMA),
        "poleContacts": len(poles),
        "poleRadii": [e.state.x for e in poles],
        "terminalY": orbit.terminal.state.y,
        "terminalX": orbit.terminal.state.x,
        "terminalEvent": orbit.terminal.kind.value,
    }
    if eq is not None:
        ev["winding"] = winding_count(orbit, eq)
    return ev


def _monotone_tail_root(orbit: Orbit) -> float | None:
    """Escape root approached monotonically by the tail of a truncated orbit, if any."""
    marks = [e.s for e in orbit.events if e.kind in (EventKind.EQUATOR, EventKind.GAMMA, EventKind.POLE)]
    start = orbit.n_prefix
    if marks:
        last = marks[-1]
        start = max(start, int(np.searchsorted(orbit.direction * orbit.s, orbit.direction * last, side="right")))
    y = orbit.y[start:]
    x = orbit.x[start:]
    if len(y) < 5:
        return None
    eps = orbit.eps[start:]
    if not (np.all(eps == eps[-1]) and (np.all(y > 0) or np.all(y < 0))):
        return None
    dx, dy = np.diff(x), np.diff(y)
    if not np.all(dx > 0):
        return None
    if not (np.all(dy < 0) or np.all(dy > 0)):
        return None
    yf = float(y[-1])
    going_up = dy[-1] > 0
    ahead = [r for r in escape_roots(orbit.f, int(eps[-1])) if (r >= yf if going_up else r <= yf)]
    if not ahead:
        return None
    root = min(ahead, key=lambda r: abs(r - yf))
    # no root skipped between the tail start and the current value
    passed = [r for r in escape_roots(orbit.f, int(eps[-1])) if min(y[0], yf) < r < max(y[0], yf)]
    if passed:
        return None
    return root


def classify_orbit_fate(orbit: Orbit, eq: core.Equilibrium | None = None,
                        cfg: IntegratorConfig | None = None) -> FateLabel:
    cfg = cfg or orbit.config
    term = orbit.terminal
    if eq is None and orbit.equilibrium is not None:
        eq = orbit.equilibrium
    ev = _evidence(orbit, eq)
    if orbit.count(EventKind.EQUILIBRIUM):
        if eq is None:
            raise InconsistentFate("equilibrium convergence without an equilibrium")
        return FateLabel(Fate.TO_EQUILIBRIUM, spiraling=eq.stability is core.Stability.SPIRAL, evidence=ev)
    if term.kind is EventKind.LINE:
        eps = term.state.epsilon
        root = nearest_escape_root(orbit.f, eps, term.state.y)
        y0 = root if root is not None and abs(root - term.state.y) < 1e-2 else term.state.y
        if abs(core.escape_residual(orbit.f, eps, max(-1.0, min(1.0, y0)))) >= cfg.line_tol:
            raise InconsistentFate(f"line limit y0={y0} is not an escape root")
        ev["certifiedBy"] = "LineConvergence"
        return FateLabel(Fate.TO_LINE, y0=y0, evidence=ev)
    if term.kind is EventKind.AXIS:
        return FateLabel(Fate.AXIS_TOUCH, delta=1 if term.state.y > 0 else -1, evidence=ev)
    radii = ev["poleRadii"]
    if len(radii) >= 3 and all(b > a for a, b in zip(radii, radii[1:])):
        return FateLabel(Fate.UNBOUNDED_ALTERNATING, evidence=ev)
    root = _monotone_tail_root(orbit)
    if root is not None:
        ev["certifiedBy"] = "monotone tail"
        return FateLabel(Fate.TO_LINE, y0=root, evidence=ev)
    return FateLabel(Fate.TRUNCATED, evidence=ev)


def crossing_trend(f: PrescribedFunction, start, cfg: IntegratorConfig, direction=None) -> tuple[int, int]:
    """Equator-crossing counts at ``s_max`` and ``2 s_max``, following the equilibrium."""
    counts = []
    for smax in (cfg.s_max, 2 * cfg.s_max):
        c = cfg.with_(s_max=smax, follow_equilibrium=True)
        st = start_from_axis(f, start, c) if isinstance(start, int) else start
        counts.append(integrate(f, st, direction, c).count(EventKind.EQUATOR))
    return counts[0], counts[1]


# ---------------------------------------------------------------- surfaces

def _expected_axis_class(lam: float, delta: int) -> SurfaceClass:
    if delta == 1:
        if abs(lam - core.SQRT2_2) <= _LAMBDA_EQ_TOL:
            return SurfaceClass("EmbeddedCylinderConverging", "1.2", intersections="finite")
        if lam > core.SQRT2_2:
            return SurfaceClass("EmbeddedCylinderConverging", "1.1", intersections="infinite")
        if lam > 0.5:
            return SurfaceClass("ConvexGraphInCylinder", "1.3")
        return SurfaceClass("BowlEntireGraph", "2")
    if lam > core.SQRT5_2 + _LAMBDA_EQ_TOL:
        return SurfaceClass("ImmersedUnboundedAnnulusEnd", "3")
    if abs(lam - 1.0) <= _LAMBDA_EQ_TOL:
        return SurfaceClass("HorizontalPlane", "4")
    return SurfaceClass("EntireGraph", "4")


def classify_axis_surface(lam: float, delta: int, cfg: IntegratorConfig | None = None,
                          confirm: bool = True) -> SurfaceClass:
    """Class of the surface meeting the axis with normal ``delta * dz`` for ``h = y + lam``."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    cfg = cfg or IntegratorConfig()
    expected = _expected_axis_class(lam, delta)
    if not confirm:
        return expected
    f = core.linear_law(lam)
    name = expected.name
    if name == "HorizontalPlane":
        try:
            start_from_axis(f, delta, cfg)
        except HorizontalPlane:
            return SurfaceClass(name, expected.theorem_item,
                                evidence={"crossings": 0, "poleContacts": 0, "terminalY": float(delta),
                                          "hDelta": f.evaluate(float(delta))})
        raise ClassificationMismatch(f"lambda={lam}: expected a horizontal plane")
    eq = core.equilibrium(f, 1)
    orbit = integrate_axis(f, delta, cfg)
    fate = classify_orbit_fate(orbit, eq, cfg)
    ev = dict(fate.evidence)
    ok = False
    if name == "EmbeddedCylinderConverging":
        ok = fate.kind is Fate.TO_EQUILIBRIUM
        if ok and expected.intersections == "infinite":
            n1, n2 = crossing_trend(f, delta, cfg)
            ev["crossingTrend"] = [n1, n2]
            ok = fate.spiraling and n2 > n1
        elif ok:
            ev["stability"] = eq.stability.value
            ok = eq.stability is core.Stability.IMPROPER_NODE
    elif name == "ConvexGraphInCylinder":
        ok = (fate.kind is Fate.TO_EQUILIBRIUM and not fate.spiraling and ev["crossings"] == 0)
    elif name == "BowlEntireGraph":
        ok = fate.kind is Fate.TO_LINE and fate.y0 >= -1e-12 and ev["crossings"] == 0
    elif name == "ImmersedUnboundedAnnulusEnd":
        ok = fate.kind is Fate.UNBOUNDED_ALTERNATING
    elif name == "EntireGraph":
        ok = fate.kind is Fate.TO_LINE and ev["poleContacts"] == 0
    if not ok:
        raise ClassificationMismatch(f"lambda={lam}, delta={delta}: expected {expected.label}, "
                                     f"integrated fate {fate.kind.value} {ev}")
    return SurfaceClass(expected.name, expected.theorem_item, expected.intersections,
                        fates=(fate,), evidence=ev)


def classify_off_axis_surface(lam: float, start: PhaseState, cfg: IntegratorConfig | None = None) -> SurfaceClass:
    """Class of the complete surface through an interior phase state (no axis contact)."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if not start.interior:
        raise core.DomainError("off-axis start must be interior")
    cfg = cfg or IntegratorConfig()
    f = core.linear_law(lam)
    eq = core.equilibrium(f, 1)
    if (eq is not None and start.epsilon == eq.epsilon and abs(start.y) < 1e-12
            and abs(start.x - eq.x0) <= 1e-12 * max(1.0, eq.x0)):
        return SurfaceClass("CmcCylinder", "1.1", evidence={"crossings": 0, "poleContacts": 0,
                                                            "winding": 0.0, "terminalY": 0.0})
    st = OrbitState.from_phase(start.x, start.y, start.epsilon)
    fates = []
    for direction in (1, -1):
        fates.append(classify_orbit_fate(integrate(f, st, direction, cfg), eq, cfg))
    kinds = {fl.kind for fl in fates}
    ev = {
        "forward": fates[0].evidence,
        "backward": fates[1].evidence,
        "crossings": sum(fl.evidence["crossings"] for fl in fates),
        "poleContacts": sum(fl.evidence["poleContacts"] for fl in fates),
    }
    if lam > 0.5:
        conv = [fl for fl in fates if fl.kind is Fate.TO_EQUILIBRIUM]
        other = [fl for fl in fates if fl.kind is not Fate.TO_EQUILIBRIUM]
        if len(conv) == 1:
            if other[0].kind is Fate.UNBOUNDED_ALTERNATING:
                got = SurfaceClass("AnnulusMixed", "1.2(a)", variant="a", fates=tuple(fates), evidence=ev)
            elif other[0].kind is Fate.TO_LINE:
                got = SurfaceClass("AnnulusMixed", "1.2(b)", variant="b", fates=tuple(fates), evidence=ev)
            else:
                got = None
            want = "a" if lam > core.SQRT5_2 + _LAMBDA_EQ_TOL else "b"
            if got is not None and got.variant == want:
                return got
        raise ClassificationMismatch(f"lambda={lam}, start={start}: fates {[k.value for k in kinds]} "
                                     f"do not match item 1.2, evidence {ev}")
    if kinds == {Fate.TO_LINE}:
        return SurfaceClass("AnnulusBothEndsGraphs", "2", fates=tuple(fates), evidence=ev)
    raise ClassificationMismatch(f"lambda={lam}, start={start}: expected both ends graphs, got "
                                 f"{[fl.kind.value for fl in fates]}")


def classify_catenoid(f: PrescribedFunction, necksize: float, cfg: IntegratorConfig | None = None) -> SurfaceClass:
    """Confirm the catenoid through ``(necksize, 0)`` for a law satisfying the catenoid hypotheses."""
    if not check_catenoid_hypotheses(f):
        raise ClassificationMismatch("catenoid hypotheses fail (need h <= 0 and h(+-1) = 0)")
    cfg = cfg or IntegratorConfig()
    st = OrbitState.from_phase(necksize, 0.0, 1)
    fates = [classify_orbit_fate(integrate(f, st, d, cfg), None, cfg) for d in (1, -1)]
    if not all(fl.kind is Fate.TO_LINE and abs(abs(fl.y0) - 1.0) < 1e-6 and fl.evidence["poleContacts"] == 0
               for fl in fates):
        raise ClassificationMismatch(f"catenoid ends did not escape to |y| = 1: {[fl.to_dict() for fl in fates]}")
    ev = {"crossings": 0, "poleContacts": 0, "terminalY": [fl.y0 for fl in fates]}
    return SurfaceClass("Catenoid", "catenoid", necksize=necksize, fates=tuple(fates), evidence=ev)


@dataclass(frozen=True)
class CrossoverBracket:
    """Numeric brackets for the radii separating the three backward behaviours.

    For ``xi`` in ``(0, x0)`` the backward orbit from ``(xi, 0)`` is of one of
    three types: it leaves through the nullcline or a pole without coming
    back (``"escapes"``, small ``xi``), reaches a graph end touching neither
    (``"clean"``), or returns to the equator (``"returns"``, near ``x0``).
    ``r_inf`` and ``x_inf`` bracket the two transitions; they may coincide at
    the resolution used, in which case ``xi_clean`` is None.
    """

    r_inf: tuple[float, float]
    x_inf: tuple[float, float]
    xi_clean: float | None
    samples: tuple[tuple[float, str], ...]

    def to_dict(self) -> dict:
        return {"r_inf": list(self.r_inf), "x_inf": list(self.x_inf), "xi_clean": self.xi_clean,
                "samples": [list(t) for t in self.samples]}


def backward_kind(f: PrescribedFunction, xi: float, cfg: IntegratorConfig) -> str:
    """Type of the backward orbit from ``(xi, 0)``: ``"returns"``, ``"escapes"`` or ``"clean"``."""
    o = integrate(f, OrbitState.from_phase(float(xi), 0.0, 1), -1, cfg)
    if o.count(EventKind.EQUATOR):
        return "returns"
    if o.count(EventKind.GAMMA) or any(e.eps_switch for e in o.events_of(EventKind.POLE)):
        return "escapes"
    return "clean"


def estimate_crossover_bracket(lam: float, cfg: IntegratorConfig | None = None, n: int = 16,
                               tol: float = 1e-6) -> CrossoverBracket:
    """Bracket the transition radii by a grid sweep followed by bisection."""
    cfg = cfg or IntegratorConfig()
    f = core.linear_law(lam)
    eq = core.equilibrium(f, 1)
    if eq is None:
        raise ValueError("needs lambda > 1/2")
    seen: dict[float, str] = {}

    def kind(xi):
        if xi not in seen:
            seen[xi] = backward_kind(f, xi, cfg)
        return seen[xi]

    grid = [eq.x0 * k / (n + 1) for k in range(1, n + 1)]
    for xi in grid:
        kind(xi)
    ret = [xi for xi in grid if seen[xi] == "returns"]
    hi = min(ret) if ret else eq.x0
    esc = [xi for xi in grid if seen[xi] == "escapes" and xi < hi]
    lo = max(esc) if esc else 0.0
    clean = [xi for xi in grid if seen[xi] == "clean" and lo < xi < hi]

    if not clean:
        a, b = lo, hi
        while b - a > tol:
            m = 0.5 * (a + b)
            k = kind(m)
            if k == "clean":
                clean.append(m)
                break
            if k == "escapes":
                a = m
            else:
                b = m
        if not clean:
            return CrossoverBracket((a, b), (a, b), None, tuple(sorted(seen.items())))

    def edge(a, b, left):
        # kind(a) == left != kind(b); shrink to width tol
        while b - a > tol:
            m = 0.5 * (a + b)
            if kind(m) == left:
                a = m
            else:
                b = m
        return a, b

    c_lo, c_hi = min(clean), max(clean)
    r_inf = edge(lo, c_lo, "escapes") if lo > 0.0 else (0.0, c_lo)
    x_inf = edge(c_hi, hi, "clean") if ret else (c_hi, hi)
    xi3 = 0.5 * (r_inf[1] + x_inf[0])
    if kind(xi3) != "clean":
        xi3 = min((v for v, k in seen.items() if k == "clean"), key=lambda v: abs(v - xi3))
    return CrossoverBracket(r_inf, x_inf, xi3, tuple(sorted(seen.items())))
