"""Invariant suites behind ``pmch2r verify``.

``quick`` runs closed-form and counting checks only; ``default`` adds the
lambda coverage grid, the off-axis grid and residual checks on integrated
orbits; ``deep`` doubles the arc-length budget used for trend certificates.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass

import numpy as np

from . import classifier as C
from . import core
from .config import RunConfig
from .core import PhaseState, PrescribedFunction
from .integrator import EventKind, HorizontalPlane, IntegratorConfig, integrate_axis, reconstruct_profile
from .surface import (cylinder_profile, export_mesh, from_poincare_disk, mean_curvature_residual, plane_profile,
                      revolve, to_poincare_disk)

log = logging.getLogger(__name__)
LEVELS = ("quick", "default", "deep")

AXIS_GRID = (0.3, 0.5, 0.6, core.SQRT2_2, 0.8, 1.0, 1.1, core.SQRT5_2, 1.3, 2.0)
OFF_AXIS_GRID = (
    (1.0 / 3.0, (1.0, 0.0, 1), "AnnulusBothEndsGraphs"),
    (0.8, (1.5, 0.0, 1), "AnnulusMixed(b)"),
    (1.0, None, "CmcCylinder"),
    (1.5, (2.0, 0.0, 1), "AnnulusMixed(a)"),
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float

    def row(self) -> tuple:
        return (self.name, "pass" if self.passed else "FAIL", self.detail, f"{self.seconds:.3f}")


# ---------------------------------------------------------------- quick

def _equilibria():
    worst = 0.0
    for lam in (0.6, 1.0, 2.0):
        eq = core.equilibrium(core.linear_law(lam), 1)
        worst = max(worst, abs(eq.x0 - math.atanh(1 / (2 * lam))),
                    max(map(abs, core.field(core.linear_law(lam), PhaseState(eq.x0, 0.0, 1)))))
    return worst < 1e-12, f"max defect {worst:.2e}"


def _degenerate_eigenvalue():
    ev = core.eigenvalues_linear_case(core.SQRT2_2)
    err = max(abs(e + 1) for e in ev)
    return err < 1e-9, f"|lambda_i + 1| <= {err:.2e}"


def _nullcline():
    f = core.linear_law(0.8)
    worst = 0.0
    for eps in (1, -1):
        for y in np.linspace(-0.99, 0.99, 199):
            x = core.gamma_curve(f, eps, float(y))
            if x is not None:
                worst = max(worst, abs(core.field(f, PhaseState(x, float(y), eps))[1]))
    return worst < 1e-10, f"max |y'| on nullcline {worst:.2e}"


def _disk():
    worst = 0.0
    for x in (0.0, 0.5, 1.0, 2.0):
        u, v, _ = to_poincare_disk((math.sinh(x), 0.0, math.cosh(x), 0.0))
        worst = max(worst, abs(math.hypot(u, v) - math.tanh(x / 2)))
        back = to_poincare_disk(from_poincare_disk(0.3 * u, 0.2, 0.7))
        worst = max(worst, abs(back[0] - 0.3 * u), abs(back[1] - 0.2), abs(back[2] - 0.7))
    return worst < 1e-12, f"max error {worst:.2e}"


def _exact_residuals():
    r1 = mean_curvature_residual(cylinder_profile(math.atanh(1 / 1.8)), PrescribedFunction.constant(0.9))
    r2 = mean_curvature_residual(plane_profile(delta=-1), PrescribedFunction.linear(1.0, 1.0))
    return max(r1, r2) < 1e-12, f"cylinder {r1:.1e}, plane {r2:.1e}"


def _mesh_counts():
    mesh = revolve([(0.0, 0.5, 0.0), (1.0, 0.5, 1.0)], 3)
    obj = export_mesh(mesh, "obj").decode().splitlines()
    nv = sum(1 for s in obj if s.startswith("v "))
    nf = sum(1 for s in obj if s.startswith("f "))
    rows = len(export_mesh(mesh, "csv").decode().splitlines()) - 1
    ok = nv == 6 and nf == 6 and rows == 6
    return ok, f"{nv} vertices, {nf} triangles, {rows} csv rows"


def _config_roundtrip():
    rc = RunConfig({"kind": "linear", "a": 1, "lambda": 0.9}, {"s_max": 100}, {"axis": 1}, 1)
    again = RunConfig.from_json(rc.to_json())
    return again.to_json() == rc.to_json(), "canonical JSON stable"


# ---------------------------------------------------------------- default

def _jacobian_eigenvalues():
    # eigen-decomposition of the Jacobian evaluated at the computed equilibrium
    worst = 0.0
    for lam in (0.6, core.SQRT2_2, 0.9, 1.2):
        f = core.linear_law(lam)
        x0 = core.equilibrium(f, 1).x0
        ref = sorted(np.linalg.eigvals(core.jacobian_at(f, 1, x0, 0.0)), key=lambda c: (c.real, c.imag))
        got = sorted(core.eigenvalues_linear_case(lam), key=lambda c: (c.real, c.imag))
        worst = max(worst, max(abs(a - b) for a, b in zip(ref, got)))
    return worst < 1e-6, f"max eigenvalue error {worst:.2e}"


def _axis_grid(cfg):
    labels = []
    for lam in AXIS_GRID:
        for delta in (1, -1):
            labels.append(C.classify_axis_surface(lam, delta, cfg).label)  # raises on mismatch
    return True, f"{len(labels)} axis classes confirmed"


def _off_axis_grid(cfg):
    got = []
    for lam, start, want in OFF_AXIS_GRID:
        st = PhaseState(core.equilibrium(core.linear_law(lam), 1).x0, 0.0, 1) if start is None else PhaseState(*start)
        got.append(C.classify_off_axis_surface(lam, st, cfg).label)
    want = [w for *_, w in OFF_AXIS_GRID]
    return got == want, ", ".join(got)


def _catenoids(cfg):
    labels = [C.classify_catenoid(PrescribedFunction.polynomial([-1, 0, 1]), x0, cfg).label for x0 in (0.3, 0.5, 1.0)]
    return True, ", ".join(labels)


def _integrated_residuals(cfg):
    worst = 0.0
    for lam in (0.4, 0.9, 1.3):
        o = integrate_axis(core.linear_law(lam), 1, cfg)
        worst = max(worst, mean_curvature_residual(reconstruct_profile(o), o.f))
    return worst < 1e-6, f"max residual {worst:.2e}"


def _residual_ratio(cfg):
    f = core.linear_law(0.9)
    r = []
    for rt in (1e-9, 1e-10):
        c = cfg.with_(rel_tol=rt, abs_tol=rt * 1e-2)
        r.append(mean_curvature_residual(reconstruct_profile(integrate_axis(f, 1, c)), f))
    return r[0] / r[1] > 5, f"ratio {r[0] / r[1]:.2f}"


def _plane():
    try:
        integrate_axis(core.linear_law(1.0), -1)
    except HorizontalPlane:
        return True, "HorizontalPlane reported"
    return False, "no HorizontalPlane"


def _trend(cfg):
    a, b = C.crossing_trend(core.linear_law(0.9), 1, cfg)
    return b > a, f"crossings {a} -> {b} at s_max {cfg.s_max:g} -> {2 * cfg.s_max:g}"


def _bowl_line(cfg):
    o = integrate_axis(PrescribedFunction.linear(1.0, 0.0), 1, cfg)
    err = abs(o.terminal.state.y - 1 / math.sqrt(5))
    return o.terminal.kind is EventKind.LINE and err < 1e-3, f"|y - 1/sqrt5| = {err:.1e}"


QUICK = [
    ("core.equilibrium_formula", _equilibria),
    ("core.degenerate_eigenvalue", _degenerate_eigenvalue),
    ("core.nullcline_property", _nullcline),
    ("surface.poincare_radius", _disk),
    ("surface.exact_residuals", _exact_residuals),
    ("surface.mesh_counts", _mesh_counts),
    ("cli.config_roundtrip", _config_roundtrip),
]
DEFAULT = [
    ("core.jacobian_eigenvalues", _jacobian_eigenvalues),
    ("integrator.horizontal_plane", _plane),
    ("integrator.translator_bowl", _bowl_line),
    ("classifier.spiral_trend", _trend),
    ("classifier.axis_grid", _axis_grid),
    ("classifier.off_axis_grid", _off_axis_grid),
    ("classifier.catenoids", _catenoids),
    ("surface.integrated_residuals", _integrated_residuals),
    ("surface.residual_ratio", _residual_ratio),
]


def run_suite(level: str = "default", cfg: IntegratorConfig | None = None) -> list[CheckResult]:
    """Run the checks of ``level``; a crashing check is recorded as failed."""
    if level not in LEVELS:
        raise ValueError(f"unknown verify level {level!r}")
    cfg = cfg or IntegratorConfig()
    if level == "deep":
        cfg = cfg.with_(s_max=2 * cfg.s_max)
    checks = list(QUICK) + ([] if level == "quick" else list(DEFAULT))
    out = []
    for name, fn in checks:
        t = time.perf_counter()
        try:
            ok, detail = fn(cfg) if fn.__code__.co_argcount else fn()
        except Exception as exc:  # noqa: BLE001 - report, do not abort the suite
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        dt = time.perf_counter() - t
        log.info("%s %s (%.2fs)", name, "pass" if ok else "FAIL", dt)
        out.append(CheckResult(name, bool(ok), detail, dt))
    return out
