"""Dormand-Prince 5(4) stepper with PI step control and dense output.

Works on small lists of floats; the step size ``h`` may be negative to run
the independent variable backwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List

State = List[float]

_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
# fifth-order minus embedded fourth-order weights
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
# continuous extension, y(t + th) = y + h * sum_j Q_j th^(j+1)
_P = (
    (1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432),
    (0.0, 0.0, 0.0, 0.0),
    (0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799),
    (0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072),
    (0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632),
    (0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844),
    (0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423),
)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
BETA = 0.04
ALPHA = 0.2 - 0.75 * BETA


class StepSizeUnderflow(RuntimeError):
    pass


@dataclass
class DenseStep:
    t0: float
    h: float
    y0: State
    y1: State
    q: List[List[float]]  # per component, four polynomial coefficients

    @property
    def t1(self) -> float:
        return self.t0 + self.h

    def theta(self, t: float) -> float:
        return (t - self.t0) / self.h

    def eval(self, t: float) -> State:
        th = self.theta(t)
        h = self.h
        out = []
        for yi, (a, b, c, d) in zip(self.y0, self.q):
            out.append(yi + h * th * (a + th * (b + th * (c + th * d))))
        return out

    def deriv(self, t: float) -> State:
        th = self.theta(t)
        return [a + th * (2 * b + th * (3 * c + th * 4 * d)) for (a, b, c, d) in self.q]


def _combine(y: State, h: float, ks: List[State], w) -> State:
    n = len(y)
    out = list(y)
    for j, wj in enumerate(w):
        if wj:
            kj = ks[j]
            hw = h * wj
            for i in range(n):
                out[i] += hw * kj[i]
    return out


def dopri_attempt(fun: Callable[[float, State], State], t: float, y: State, h: float, k1: State):
    """One trial step; returns ``(y_new, k_stages, error_vector)``."""
    ks = [k1]
    for i in range(1, 7):
        yi = _combine(y, h, ks, _A[i])
        ks.append(fun(t + _C[i] * h, yi))
    y_new = _combine(y, h, ks, _B[:6])
    # FSAL: stage 7 was evaluated at y_new
    n = len(y)
    err = [0.0] * n
    for j, ej in enumerate(_E):
        if ej:
            kj = ks[j]
            for i in range(n):
                err[i] += h * ej * kj[i]
    return y_new, ks, err


def _dense_q(ks: List[State]) -> List[List[float]]:
    n = len(ks[0])
    q = []
    for i in range(n):
        row = []
        for p in range(4):
            acc = 0.0
            for j in range(7):
                pj = _P[j][p]
                if pj:
                    acc += ks[j][i] * pj
            row.append(acc)
        q.append(row)
    return q


class Stepper:
    """Adaptive integrator holding the current state; call ``step`` repeatedly."""

    def __init__(self, fun, t0: float, y0: State, direction: int, rtol: float, atol: float,
                 max_step: float, first_step: float | None = None, mag_cap: State | None = None):
        self.fun = fun
        self.t = float(t0)
        self.y = list(y0)
        self.direction = 1 if direction >= 0 else -1
        self.rtol = rtol
        self.atol = atol
        self.max_step = max_step
        # per-component cap on the magnitude entering the relative scale, so an
        # unwrapped angle does not loosen its own tolerance as it winds
        self.mag_cap = list(mag_cap) if mag_cap is not None else [math.inf] * len(self.y)
        self.k1 = fun(self.t, self.y)
        self.err_old = 1e-4
        self.h_abs = first_step if first_step is not None else self._initial_step()
        self.n_accepted = 0
        self.n_rejected = 0

    def _norm(self, err: State, y: State, y_new: State) -> float:
        acc = 0.0
        for e, a, b, c in zip(err, y, y_new, self.mag_cap):
            sc = self.atol + self.rtol * min(c, max(abs(a), abs(b)))
            acc += (e / sc) ** 2
        return math.sqrt(acc / len(err))

    def _initial_step(self) -> float:
        # Hairer's starting-step heuristic
        y, f0 = self.y, self.k1
        sc = [self.atol + self.rtol * min(c, abs(v)) for v, c in zip(y, self.mag_cap)]
        d0 = math.sqrt(sum((a / s) ** 2 for a, s in zip(y, sc)) / len(y))
        d1 = math.sqrt(sum((a / s) ** 2 for a, s in zip(f0, sc)) / len(y))
        h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        h0 = min(h0, self.max_step)
        y1 = [a + self.direction * h0 * b for a, b in zip(y, f0)]
        f1 = self.fun(self.t + self.direction * h0, y1)
        d2 = math.sqrt(sum(((a - b) / s) ** 2 for a, b, s in zip(f1, f0, sc)) / len(y)) / h0
        if d1 <= 1e-15 and d2 <= 1e-15:
            h1 = max(1e-6, h0 * 1e-3)
        else:
            h1 = (0.01 / max(d1, d2)) ** (1 / 5)
        return min(100 * h0, h1, self.max_step)

    def step(self, max_abs_step: float | None = None) -> DenseStep:
        cap = self.max_step if max_abs_step is None else min(self.max_step, max_abs_step)
        h_abs = min(self.h_abs, cap)
        min_step = 10 * abs(math.nextafter(self.t, self.direction * math.inf) - self.t)
        while True:
            if h_abs < min_step:
                raise StepSizeUnderflow(f"step size underflow at t={self.t!r}")
            h = self.direction * h_abs
            y_new, ks, err = dopri_attempt(self.fun, self.t, self.y, h, self.k1)
            en = self._norm(err, self.y, y_new)
            if en <= 1.0 and all(math.isfinite(v) for v in y_new):
                if en == 0.0:
                    fac = MAX_FACTOR
                else:
                    fac = SAFETY * en ** (-ALPHA) * self.err_old ** BETA
                    fac = min(MAX_FACTOR, max(MIN_FACTOR, fac))
                self.err_old = max(en, 1e-4)
                dense = DenseStep(self.t, h, self.y, y_new, _dense_q(ks))
                self.t = self.t + h
                self.y = y_new
                self.k1 = ks[6]
                self.h_abs = h_abs * fac
                self.n_accepted += 1
                return dense
            self.n_rejected += 1
            if not math.isfinite(en):
                h_abs *= MIN_FACTOR
            else:
                h_abs *= max(MIN_FACTOR, SAFETY * en ** (-1 / 5))

    def restart(self, t: float, y: State) -> None:
        """Reset the state (e.g. after a chart change) keeping the step size."""
        self.t = float(t)
        self.y = list(y)
        self.k1 = self.fun(self.t, self.y)
