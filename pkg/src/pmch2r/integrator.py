"""Arc-length integration of profile curves with event detection.

Orbits are integrated in the tangent-angle chart ``(x, phi, z)`` with
``x' = cos(phi)``, ``phi' = 2 h(cos phi) - sin(phi) / tanh(x)``,
``z' = sin(phi)``.  Here ``y = cos(phi)``, ``eps = sign(sin phi)``, and
``phi'`` is the geodesic curvature of the profile.  The chart is regular
through ``|y| = 1`` at ``x > 0``, so a pole contact is just a sign change of
``sin(phi)`` and the switch between the two half-strips is exact.

Starts on the rotation axis are bootstrapped in the graph chart ``z = u(x)``,
which is regular at ``x = 0``.  Close to a stable equilibrium the orbit can
optionally be followed in an equilibrium-centred chart whose amplitude is
renormalised every step, so oscillations stay resolved far below machine
precision of the absolute coordinates.
"""

from __future__ import annotations

import bisect
import enum
import json
import logging
import math
from collections import deque
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import core
from ._rk import DenseStep, Stepper, StepSizeUnderflow
from .core import PrescribedFunction

logger = logging.getLogger(__name__)

# below this amplitude the equilibrium chart uses the exact linearisation
_LINEAR_AMPLITUDE = 1e-150
_START_EVENT_S = 1e-10
_V_FLOOR = 1e-24  # Lyapunov value of a state within rounding of the equilibrium
_NOISE_RADIUS = 1e-10  # below this chart-free offsets carry no angle information
_BISECT_S_TOL = 1e-12


class EventKind(str, enum.Enum):
    EQUATOR = "EquatorCrossing"
    GAMMA = "GammaCrossing"
    POLE = "PoleContact"
    AXIS = "AxisContact"
    EQUILIBRIUM = "EquilibriumConvergence"
    LINE = "LineConvergence"
    TRUNCATED = "Truncated"


ABSORBING = {EventKind.AXIS, EventKind.EQUILIBRIUM, EventKind.LINE, EventKind.TRUNCATED}


class IntegrationError(RuntimeError):
    """Integration could not continue; ``orbit`` holds everything up to the last valid sample."""

    def __init__(self, message: str, orbit: "Orbit | None" = None):
        super().__init__(message)
        self.orbit = orbit


class HorizontalPlane(Exception):
    """The requested axis orbit degenerates to a horizontal plane (``h(delta) = 0``)."""

    def __init__(self, delta: int):
        super().__init__(f"h({delta:+d}) = 0: the axis solution is a horizontal plane")
        self.delta = delta


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = 0.5
    s_max: float = 500.0
    x_max: float = 20.0
    equilibrium_radius: float = 1e-4
    line_tol: float = 1e-4
    pole_tol: float = 1e-8
    axis_tol: float = 1e-6
    x_boot: float = 1e-3
    lyapunov_window: int = 20
    follow_equilibrium: bool = False

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "max_step", "equilibrium_radius", "line_tol",
                     "pole_tol", "axis_tol", "x_boot"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not (math.isfinite(self.s_max) and math.isfinite(self.x_max)):
            raise ValueError("s_max and x_max must be finite")

    def with_(self, **kw) -> "IntegratorConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class OrbitState:
    s: float
    x: float
    y: float
    z: float
    epsilon: int
    phi: float | None = None  # tangent angle; keeps precision near |y| = 1

    @classmethod
    def from_phase(cls, x: float, y: float, epsilon: int, s: float = 0.0, z: float = 0.0) -> "OrbitState":
        if not (x > 0 and abs(y) < 1):
            raise core.DomainError(f"start must be interior, got x={x}, y={y}")
        phi = math.atan2(epsilon * math.sqrt(1.0 - y * y), y)
        return cls(s, x, y, z, int(epsilon), phi)

    @property
    def angle(self) -> float:
        if self.phi is not None:
            return self.phi
        return math.atan2(self.epsilon * math.sqrt(max(0.0, 1.0 - self.y * self.y)), self.y)

    @property
    def zp(self) -> float:
        return math.sin(self.angle)

    def to_dict(self) -> dict:
        return {"s": self.s, "x": self.x, "y": self.y, "z": self.z, "epsilon": self.epsilon}


@dataclass(frozen=True)
class OrbitEvent:
    kind: EventKind
    s: float
    state: OrbitState
    eps_switch: bool = False
    limit_y: float | None = None
    note: str = ""

    def to_dict(self) -> dict:
        d = {"kind": self.kind.value, "s": self.s, "state": self.state.to_dict()}
        if self.kind is EventKind.POLE:
            d["eps_switch"] = self.eps_switch
        if self.limit_y is not None:
            d["limit_y"] = self.limit_y
        if self.note:
            d["note"] = self.note
        return d


@dataclass(frozen=True)
class AxisBootstrap:
    """Result of leaving the rotation axis through the graph chart."""

    delta: int
    state: OrbitState
    prefix: tuple[OrbitState, ...]  # axis point up to (excluding) ``state``


@dataclass
class Orbit:
    f: PrescribedFunction
    config: IntegratorConfig
    direction: int
    s: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    eps: np.ndarray
    phi: np.ndarray
    events: list[OrbitEvent]
    steps: list[DenseStep] = field(default_factory=list, repr=False)
    # equilibrium-chart samples: offset = exp(log_scale) * (xi, eta); NaN elsewhere
    log_scale: np.ndarray | None = None
    xi: np.ndarray | None = None
    eta: np.ndarray | None = None
    equilibrium: core.Equilibrium | None = None
    axis_delta: int | None = None
    n_prefix: int = 0

    def __len__(self) -> int:
        return len(self.s)

    @property
    def terminal(self) -> OrbitEvent:
        return self.events[-1]

    def state(self, i: int) -> OrbitState:
        return OrbitState(float(self.s[i]), float(self.x[i]), float(self.y[i]), float(self.z[i]),
                          int(self.eps[i]), float(self.phi[i]))

    def events_of(self, kind: EventKind) -> list[OrbitEvent]:
        return [e for e in self.events if e.kind is kind]

    def count(self, kind: EventKind) -> int:
        return sum(1 for e in self.events if e.kind is kind)

    def sample_at(self, s: float) -> OrbitState:
        """Dense-output evaluation inside the tangent-angle chart part of the orbit."""
        if not self.steps:
            raise ValueError("orbit carries no dense output")
        sign = self.direction
        keys = [sign * st.t0 for st in self.steps]
        i = bisect.bisect_right(keys, sign * s) - 1
        i = min(max(i, 0), len(self.steps) - 1)
        st = self.steps[i]
        lo, hi = sorted((st.t0, st.t1))
        if not (lo - 1e-12 <= s <= hi + 1e-12):
            raise ValueError(f"s={s} outside the dense-output range")
        x, ph, z = st.eval(s)
        return _angle_state(s, x, ph, z)

    def to_csv(self) -> str:
        tags = {}
        for e in self.events:
            # attach each event to the closest sample
            i = int(np.argmin(np.abs(self.s - e.s)))
            tags.setdefault(i, []).append(e.kind.value)
        lines = ["s,x,y,z,epsilon,event"]
        for i in range(len(self.s)):
            lines.append(f"{float(self.s[i])!r},{float(self.x[i])!r},{float(self.y[i])!r},{float(self.z[i])!r},"
                         f"{int(self.eps[i])},{'|'.join(tags.get(i, []))}")
        return "\n".join(lines) + "\n"

    def events_json(self) -> str:
        return json.dumps([e.to_dict() for e in self.events], indent=2)


def _angle_state(s, x, ph, z, eps_hint=1) -> OrbitState:
    sp = math.sin(ph)
    eps = 1 if sp > 0 else (-1 if sp < 0 else eps_hint)
    return OrbitState(s, x, math.cos(ph), z, eps, ph)


# ---------------------------------------------------------------- axis start

def start_from_axis(f: PrescribedFunction, delta: int, cfg: IntegratorConfig | None = None) -> AxisBootstrap:
    """Leave the axis point ``(0, delta)`` along the unique orbit ending there.

    Near the axis the surface is a graph ``z = u(x)`` with ``u'(0) = 0``;
    with ``p = u'`` and ``W = sqrt(1 + p^2)`` the prescribed curvature reads
    ``p' = 2 delta h(delta / W) W^3 - p W^2 / tanh(x)``, forcing
    ``p'(0) = delta h(delta)``.  Raises :class:`HorizontalPlane` when
    ``h(delta) = 0``.
    """
    cfg = cfg or IntegratorConfig()
    if delta not in (1, -1):
        raise ValueError("delta must be +1 or -1")
    c = delta * f._horner(float(delta))
    if c == 0.0:
        raise HorizontalPlane(delta)

    def rhs(x, st):
        p = st[0]
        w2 = 1.0 + p * p
        w = math.sqrt(w2)
        return [2.0 * delta * f._horner(delta / w) * w2 * w - p * w2 / math.tanh(x), p, w]

    x_a = min(1e-7, cfg.x_boot * 1e-3)
    st0 = [c * x_a, 0.5 * c * x_a * x_a, x_a]  # p, u, arc length
    stepper = Stepper(rhs, x_a, st0, 1, 1e-12, 1e-16, cfg.x_boot / 4, first_step=x_a)
    h_sign = 1 if c * delta > 0 else -1
    prefix = [OrbitState(0.0, 0.0, float(delta), 0.0, h_sign,
                         0.0 if delta > 0 else -h_sign * math.pi)]
    while stepper.t < cfg.x_boot:
        stepper.step(max_abs_step=cfg.x_boot - stepper.t)
        if stepper.t < cfg.x_boot:
            pp, uu, ss = stepper.y
            ph = math.atan2(delta * pp, delta)
            prefix.append(OrbitState(delta * ss, stepper.t, math.cos(ph), uu, h_sign, ph))
    p, u, sigma = stepper.y
    x = stepper.t
    # tangent (x', z') = (delta, delta p) / W
    phi = math.atan2(delta * p, delta)
    y = math.cos(phi)
    eps = 1 if math.sin(phi) > 0 else -1
    state = OrbitState(delta * sigma, x, y, u, eps, phi)
    # flip check on the curvature sign law sign(kappa2) = eps
    k2 = math.sin(phi) / math.tanh(x)
    if (k2 > 0) != (eps > 0):  # pragma: no cover - guarded by construction
        raise IntegrationError("axis bootstrap violates sign(kappa2) = eps")
    return AxisBootstrap(delta, state, tuple(prefix))


# ---------------------------------------------------------------- charts

def _angle_rhs(f: PrescribedFunction):
    h = f._horner

    def rhs(_s, st):
        x, ph, _z = st
        cp, sp = math.cos(ph), math.sin(ph)
        return [cp, 2.0 * h(cp) - sp / math.tanh(x), sp]

    return rhs


def _angle_events(f: PrescribedFunction, axis_tol: float):
    h = f._horner

    def kappa1(st):
        x, ph, _ = st
        return 2.0 * h(math.cos(ph)) - math.sin(ph) / math.tanh(x)

    return [
        (EventKind.EQUATOR, lambda st: math.cos(st[1])),
        (EventKind.POLE, lambda st: math.sin(st[1])),
        (EventKind.GAMMA, kappa1),
        (EventKind.AXIS, lambda st: st[0] - axis_tol),
    ]


class _LocalChart:
    """Equilibrium-centred chart: ``x = x0 + c u``, ``phi = phi_ref + c v``."""

    def __init__(self, f: PrescribedFunction, eq: core.Equilibrium, phi_ref: float):
        self.f = f
        self.eq = eq
        self.eps = eq.epsilon
        self.x0 = eq.x0
        self.phi_ref = phi_ref
        self.sh0 = math.sinh(eq.x0)
        self.coth0 = 2.0 * eq.epsilon * f._horner(0.0)
        self.inv_sh2 = self.coth0 * self.coth0 - 1.0
        self.dh0 = f.derivative(0.0)
        self.c = 1.0

    def rhs(self, _s, st):
        u, v, _z = st
        c, e = self.c, self.eps
        if c < _LINEAR_AMPLITUDE:
            return [-e * v, -2.0 * e * self.dh0 * v + e * self.inv_sh2 * u, e]
        psi = c * v
        xi = c * u
        sps = math.sin(psi)
        dv = (2.0 * self.f.increment(-e * sps)
              + e * math.cos(psi) * math.sinh(xi) / (self.sh0 * math.sinh(self.x0 + xi))
              + e * self.coth0 * 2.0 * math.sin(0.5 * psi) ** 2)
        return [-e * sps / c, dv / c, e * math.cos(psi)]

    def events(self):
        return [
            (EventKind.EQUATOR, lambda st: -self.eps * st[1]),
            (EventKind.GAMMA, lambda st: self.rhs(0.0, st)[1]),
        ]

    def to_state(self, s, st) -> OrbitState:
        u, v, z = st
        psi = self.c * v
        return OrbitState(s, self.x0 + self.c * u, -self.eps * math.sin(psi), z, self.eps,
                          self.phi_ref + psi)


# ---------------------------------------------------------------- main loop

def _lyapunov_matrix(eq: core.Equilibrium) -> np.ndarray | None:
    if not eq.asymptotically_stable:
        return None
    from scipy.linalg import solve_continuous_lyapunov

    a = eq.jacobian
    return solve_continuous_lyapunov(a.T, -np.eye(2))


def _locate(g, dense: DenseStep, a: float, b: float, ga: float) -> float:
    # bisection on the dense output between s=a and s=b where g changes sign
    while abs(b - a) > _BISECT_S_TOL:
        m = 0.5 * (a + b)
        gm = g(dense.eval(m))
        if gm == 0.0:
            return m
        if (gm > 0) == (ga > 0):
            a, ga = m, gm
        else:
            b = m
    return 0.5 * (a + b)


def _step_events(events, dense: DenseStep, state_of) -> list[tuple[float, EventKind, object]]:
    """Sign changes of the event functions across one accepted step."""
    s0, s1 = dense.t0, dense.t1
    sm = 0.5 * (s0 + s1)
    pts = [(s0, dense.y0), (sm, dense.eval(sm)), (s1, dense.y1)]
    found = []
    for kind, g in events:
        vals = [g(p) for _, p in pts]
        for (sa, _), (sb, _), ga, gb in zip(pts, pts[1:], vals, vals[1:]):
            if ga == 0.0 or (ga > 0) == (gb > 0):
                continue
            sr = _locate(g, dense, sa, sb, ga)
            found.append((sr, kind, state_of(sr, dense.eval(sr))))
    found.sort(key=lambda t: dense.h * (t[0] - s0))
    return found


def integrate(f: PrescribedFunction, start: OrbitState | AxisBootstrap, direction: int | None = None,
              cfg: IntegratorConfig | None = None) -> Orbit:
    """Integrate an orbit until an absorbing event or the budget is exhausted."""
    cfg = cfg or IntegratorConfig()
    prefix: tuple[OrbitState, ...] = ()
    axis_delta = None
    if isinstance(start, AxisBootstrap):
        prefix, axis_delta = start.prefix, start.delta
        if direction is None:
            direction = start.delta
        start = start.state
    direction = 1 if direction is None else int(direction)
    if direction not in (1, -1):
        raise ValueError("direction must be +1 (forward) or -1 (backward)")
    if not start.x > 0:
        raise core.DomainError("integration start needs x > 0")

    rec = _Recorder(f, cfg, direction, axis_delta, prefix)
    rec.add(start)
    s0 = start.s
    ph0 = start.angle
    rhs = _angle_rhs(f)
    events = _angle_events(f, cfg.axis_tol)
    stepper = Stepper(rhs, s0, [start.x, ph0, start.z], direction, cfg.rel_tol, cfg.abs_tol, cfg.max_step,
                      mag_cap=[1.0, math.pi, math.inf])

    eqs = {e: core.equilibrium(f, e) for e in (1, -1)}
    lyap = {e: (_lyapunov_matrix(q) if q is not None else None) for e, q in eqs.items()}
    vhist: deque = deque(maxlen=cfg.lyapunov_window + 1)
    cur_eps = start.epsilon

    def fail(msg):
        rec.events.append(OrbitEvent(EventKind.TRUNCATED, rec.last.s, rec.last, note=msg))
        raise IntegrationError(msg, rec.build())

    while True:
        remaining = cfg.s_max - direction * (stepper.t - s0)
        if remaining <= 1e-12:
            rec.finish(EventKind.TRUNCATED, rec.last, note="s budget")
            break
        try:
            dense = stepper.step(max_abs_step=remaining)
        except StepSizeUnderflow as exc:
            fail(str(exc))
        if not all(math.isfinite(v) for v in dense.y1):
            fail("non-finite state")
        stop = None
        for sr, kind, st in _step_events(events, dense, lambda s, y: _angle_state(s, *y, eps_hint=cur_eps)):
            if abs(sr - s0) <= _START_EVENT_S:
                continue  # the start itself lies on the event surface: a touch, not a crossing
            if kind is EventKind.POLE:
                rec.events.append(OrbitEvent(kind, sr, st, eps_switch=st.x > cfg.axis_tol))
            elif kind is EventKind.AXIS:
                stop = (sr, st)
                break
            else:
                rec.events.append(OrbitEvent(kind, sr, st))
        if stop is not None:
            sr, st = stop
            rec.steps.append(dense)
            st = replace(st, epsilon=cur_eps)
            rec.add(st)
            rec.finish(EventKind.AXIS, st, note=f"delta={1 if st.y > 0 else -1:+d}")
            break
        rec.steps.append(dense)
        st = _angle_state(dense.t1, *dense.y1, eps_hint=cur_eps)
        cur_eps = st.epsilon
        rec.add(st)

        eq = eqs[cur_eps]
        if eq is not None and lyap[cur_eps] is not None:
            d = np.array([st.x - eq.x0, st.y])
            vhist.append(float(d @ lyap[cur_eps] @ d))
            # strict decrease, or a window sitting at the rounding floor (start at e0)
            if (math.hypot(d[0], d[1]) < cfg.equilibrium_radius and len(vhist) == vhist.maxlen
                    and (all(b < a for a, b in zip(vhist, list(vhist)[1:])) or max(vhist) < _V_FLOOR)):
                rec.events.append(OrbitEvent(EventKind.EQUILIBRIUM, st.s, st))
                rec.equilibrium = eq
                if cfg.follow_equilibrium:
                    _follow_equilibrium(f, eq, st, s0, cfg, direction, stepper.h_abs, rec)
                break
        else:
            vhist.clear()
        resid = st.epsilon * (2.0 * f._horner(st.y) - math.sin(dense.y1[1]))
        if st.x > 0.9 * cfg.x_max and abs(resid) < cfg.line_tol:
            rec.finish(EventKind.LINE, st, limit_y=st.y)
            break
        if st.x > cfg.x_max:
            rec.finish(EventKind.TRUNCATED, st, note="x budget")
            break
    return rec.build()


def _follow_equilibrium(f, eq, st: OrbitState, s0, cfg, direction, h_abs, rec: "_Recorder"):
    k = round((st.angle - eq.epsilon * math.pi / 2) / (2 * math.pi))
    chart = _LocalChart(f, eq, eq.epsilon * math.pi / 2 + 2 * math.pi * k)
    u, v = st.x - eq.x0, st.angle - chart.phi_ref
    c = math.hypot(u, v)
    if c == 0.0:
        rec.finish(EventKind.TRUNCATED, st, note="at equilibrium")
        return
    chart.c = c
    stepper = Stepper(chart.rhs, st.s, [u / c, v / c, st.z], direction, cfg.rel_tol, cfg.abs_tol,
                      cfg.max_step, first_step=min(h_abs, cfg.max_step))
    events = chart.events()
    last = st
    while True:
        remaining = cfg.s_max - direction * (stepper.t - s0)
        if remaining <= 1e-12:
            break
        dense = stepper.step(max_abs_step=remaining)
        for sr, kind, est in _step_events(events, dense, chart.to_state):
            rec.events.append(OrbitEvent(kind, sr, est))
        uu, vv, zz = dense.y1
        last = chart.to_state(dense.t1, dense.y1)
        rec.add(last, local=(math.log(chart.c), uu, -eq.epsilon * vv))
        nrm = math.hypot(uu, vv)
        if nrm == 0.0 or not math.isfinite(nrm):
            break
        chart.c *= nrm
        if chart.c == 0.0:
            break
        stepper.restart(dense.t1, [uu / nrm, vv / nrm, zz])
    rec.finish(EventKind.TRUNCATED, last, note="s budget (following equilibrium)")


class _Recorder:
    def __init__(self, f, cfg, direction, axis_delta, prefix):
        self.f, self.cfg, self.direction = f, cfg, direction
        self.axis_delta = axis_delta
        self.rows: list[tuple] = []
        self.local: list[tuple] = []
        self.events: list[OrbitEvent] = []
        self.steps: list[DenseStep] = []
        self.equilibrium = None
        self.n_prefix = len(prefix)
        for p in prefix:
            self.add(p)

    def add(self, st: OrbitState, local=None):
        self.rows.append((st.s, st.x, st.y, st.z, st.epsilon, st.angle))
        self.local.append(local if local is not None else (math.nan, math.nan, math.nan))
        self.last = st

    def finish(self, kind, st, **kw):
        self.events.append(OrbitEvent(kind, st.s, st, **kw))

    def build(self) -> Orbit:
        a = np.array(self.rows, dtype=float).reshape(-1, 6)
        loc = np.array(self.local, dtype=float).reshape(-1, 3)
        has_local = bool(np.isfinite(loc[:, 0]).any())
        return Orbit(self.f, self.cfg, self.direction, a[:, 0], a[:, 1], a[:, 2], a[:, 3],
                     a[:, 4].astype(int), a[:, 5], self.events, self.steps,
                     loc[:, 0] if has_local else None, loc[:, 1] if has_local else None,
                     loc[:, 2] if has_local else None, self.equilibrium, self.axis_delta, self.n_prefix)


# ---------------------------------------------------------------- post-processing

@dataclass(frozen=True)
class Profile:
    """Profile curve samples plus mid-step probes taken from the dense output."""

    s: np.ndarray
    x: np.ndarray
    z: np.ndarray
    xp: np.ndarray
    zp: np.ndarray
    eps: np.ndarray
    # per-sample profile curvature from the system (NaN where not available)
    kappa1: np.ndarray | None = None
    # probes: interpolated distance and tangent angle, and the interpolant's angle derivative
    probe_x: np.ndarray | None = None
    probe_phi: np.ndarray | None = None
    probe_dphi: np.ndarray | None = None
    rel_tol: float = 1e-10

    def rows(self) -> list[tuple[float, float, float, float, float]]:
        return list(zip(self.s.tolist(), self.x.tolist(), self.z.tolist(), self.xp.tolist(), self.zp.tolist()))

    def __len__(self) -> int:
        return len(self.s)


def reconstruct_profile(orbit: Orbit) -> Profile:
    """Profile ``(s, x, z, x', z')`` of an orbit, ``x' = y`` and ``z' = sin(phi) = eps sqrt(1 - y^2)``."""
    if len(orbit) == 0:
        raise ValueError("empty orbit")
    xp = np.cos(orbit.phi)
    zp = np.sin(orbit.phi)
    k1 = np.full(len(orbit), np.nan)
    h = orbit.f._horner
    for i in range(orbit.n_prefix, len(orbit)):
        if orbit.x[i] > 0:
            k1[i] = 2.0 * h(xp[i]) - zp[i] / math.tanh(orbit.x[i])
    px, pph, pdph = [], [], []
    for st in orbit.steps:
        m = 0.5 * (st.t0 + st.t1)
        x, ph, _z = st.eval(m)
        px.append(x)
        pph.append(ph)
        pdph.append(st.deriv(m)[1])
    arr = lambda v: np.array(v, dtype=float) if v else None
    return Profile(orbit.s.copy(), orbit.x.copy(), orbit.z.copy(), xp, zp, orbit.eps.copy(), k1,
                   arr(px), arr(pph), arr(pdph), orbit.config.rel_tol)


def equilibrium_offsets(orbit: Orbit, center: core.Equilibrium):
    """Per-sample ``(log_distance, angle)`` relative to ``(x0, 0)``."""
    dx = orbit.x - center.x0
    dy = orbit.y.copy()
    with np.errstate(divide="ignore"):
        logd = np.log(np.hypot(dx, dy))
    ang = np.arctan2(dy, dx)
    if orbit.log_scale is not None:
        m = np.isfinite(orbit.log_scale)
        with np.errstate(divide="ignore"):
            logd[m] = orbit.log_scale[m] + np.log(np.hypot(orbit.xi[m], orbit.eta[m]))
        ang[m] = np.arctan2(orbit.eta[m], orbit.xi[m])
    return logd, ang


def winding_count(orbit: Orbit, center: core.Equilibrium) -> float:
    """Turns around ``(x0, 0)`` accumulated while within ten equilibrium radii."""
    logd, ang = equilibrium_offsets(orbit, center)
    inside = logd < math.log(10 * orbit.config.equilibrium_radius)
    chart = np.isfinite(orbit.log_scale) if orbit.log_scale is not None else np.zeros(len(logd), bool)
    inside &= chart | (logd > math.log(_NOISE_RADIUS))
    inside &= orbit.eps == center.epsilon
    total = 0.0
    prev = None
    for i in np.flatnonzero(inside):
        if prev is not None and i == prev + 1:
            d = (ang[i] - ang[prev] + math.pi) % (2 * math.pi) - math.pi
            total += d
        prev = i
    return abs(total) / (2 * math.pi)


def integrate_axis(f: PrescribedFunction, delta: int, cfg: IntegratorConfig | None = None) -> Orbit:
    """Shortcut: bootstrap from ``(0, delta)`` and integrate away from the axis."""
    return integrate(f, start_from_axis(f, delta, cfg), None, cfg)


def integrate_both(f: PrescribedFunction, start: OrbitState, cfg: IntegratorConfig | None = None):
    return integrate(f, start, 1, cfg), integrate(f, start, -1, cfg)
