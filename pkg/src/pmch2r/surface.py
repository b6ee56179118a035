"""Surfaces of revolution in H^2 x R from profile curves.

H^2 is realised as the upper sheet of ``x1^2 + x2^2 - x3^2 = -1``; a profile
point at distance ``x`` from the axis and height ``z`` sweeps the circle
``(sinh x cos t, sinh x sin t, cosh x, z)``.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from . import core
from .core import PrescribedFunction
from .integrator import Profile

HYPERBOLOID_TOL = 1e-9
_DISK_CHECK_TOL = 1e-6


class ConstraintError(ValueError):
    pass


@dataclass(frozen=True)
class SurfaceMesh:
    """``grid[i, j] = (x1, x2, x3, z)`` at profile sample ``i`` and angle ``2 pi j / n_theta``."""

    grid: np.ndarray
    profile: Profile | None = None
    closed_in_theta: bool = True

    @property
    def ns(self) -> int:
        return self.grid.shape[0]

    @property
    def n_theta(self) -> int:
        return self.grid.shape[1]

    def axis_rows(self) -> np.ndarray:
        """Rows that collapse to a single point on the rotation axis."""
        g = self.grid
        return np.all((g[:, :, 0] == 0.0) & (g[:, :, 1] == 0.0), axis=1)

    def hyperboloid_defect(self) -> float:
        """Largest ``|x1^2 + x2^2 - x3^2 + 1|`` relative to the coordinate scale ``x3^2``."""
        return hyperboloid_defect(self.grid)


def hyperboloid_defect(points: np.ndarray) -> float:
    p = np.asarray(points, dtype=float).reshape(-1, 4)
    q = p[:, 0] ** 2 + p[:, 1] ** 2 - p[:, 2] ** 2 + 1.0
    return float(np.max(np.abs(q) / np.maximum(1.0, p[:, 2] ** 2))) if len(p) else 0.0


def _profile_arrays(profile) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(profile, Profile):
        return profile.x, profile.z
    rows = np.asarray(list(profile), dtype=float)
    if rows.ndim != 2 or rows.shape[1] < 3:
        raise ValueError("profile rows need at least (s, x, z)")
    return rows[:, 1], rows[:, 2]


def revolve(profile: Profile | Iterable, n_theta: int) -> SurfaceMesh:
    """Rotate a profile about the axis ``x = 0``."""
    if n_theta < 3:
        raise ValueError("n_theta must be at least 3")
    x, z = _profile_arrays(profile)
    if np.any(x < 0):
        raise core.DomainError("profile needs x >= 0")
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    sh = np.sinh(x)[:, None]
    grid = np.empty((len(x), n_theta, 4))
    grid[:, :, 0] = sh * np.cos(theta)[None, :]
    grid[:, :, 1] = sh * np.sin(theta)[None, :]
    grid[:, :, 2] = np.cosh(x)[:, None]
    grid[:, :, 3] = z[:, None]
    return SurfaceMesh(grid, profile if isinstance(profile, Profile) else None)


def to_poincare_disk(p) -> tuple[float, float, float]:
    """Map ``(x1, x2, x3, z)`` to Poincare-disk coordinates ``(u, v, z)``."""
    x1, x2, x3, z = (float(v) for v in p)
    q = x1 * x1 + x2 * x2 - x3 * x3 + 1.0
    if x3 < 1.0 - _DISK_CHECK_TOL or abs(q) > _DISK_CHECK_TOL * max(1.0, x3 * x3):
        raise ConstraintError(f"point {p!r} is off the hyperboloid (defect {q:.3g})")
    d = 1.0 + x3
    return x1 / d, x2 / d, z


def from_poincare_disk(u: float, v: float, z: float) -> tuple[float, float, float, float]:
    r2 = u * u + v * v
    if not r2 < 1.0:
        raise core.DomainError("disk point must satisfy u^2 + v^2 < 1")
    d = 1.0 - r2
    return 2.0 * u / d, 2.0 * v / d, (1.0 + r2) / d, z


def disk_grid(mesh: SurfaceMesh) -> np.ndarray:
    g = mesh.grid
    out = np.empty(g.shape[:2] + (3,))
    d = 1.0 + g[:, :, 2]
    out[:, :, 0] = g[:, :, 0] / d
    out[:, :, 1] = g[:, :, 1] / d
    out[:, :, 2] = g[:, :, 3]
    return out


# ---------------------------------------------------------------- curvature residual

def _field_mean_curvature(f: PrescribedFunction, x, xp, zp, w=None):
    """Mean curvature with second derivatives taken from the profile system."""
    eps = np.where(zp >= 0, 1.0, -1.0)
    if w is None:
        w = np.sqrt(np.maximum(0.0, 1.0 - xp * xp))
    hy = np.array([f._horner(float(v)) for v in xp])
    xpp = w * w / np.tanh(x) - 2.0 * eps * hy * w
    zpp = -xp * xpp / zp
    k1 = xp * zpp - xpp * zp
    k2 = zp / np.tanh(x)
    return 0.5 * (k1 + k2), hy


def mean_curvature_residual(profile: Profile, f: PrescribedFunction, tol: float | None = None) -> float:
    """Largest ``|(k1 + k2)/2 - h(nu)|`` over the samples and the mid-step probes.

    At samples the second derivatives come from the system's right-hand side
    (``x'' = y'``, ``z'' = -y y' / z'``); within ``5 sqrt(tol)`` of ``z' = 0``
    the profile curvature is the integrator's own value where the orbit
    carries one and a finite difference of the tangent angle otherwise.  At
    the midpoint of every accepted step the curvature is read off the
    interpolant: ``k1`` is the derivative of its tangent angle and ``nu``,
    ``k2`` come from its state, so the probes measure how well the computed
    curve itself has the prescribed mean curvature.
    """
    tol = profile.rel_tol if tol is None else tol
    near = 5.0 * math.sqrt(tol)
    worst = 0.0

    x, xp, zp, s = profile.x, profile.xp, profile.zp, profile.s
    ok = x > 0
    far = ok & (np.abs(zp) >= near)
    if far.any():
        # on samples x'^2 + z'^2 = 1, so |z'| is the exact sqrt(1 - y^2)
        H, hy = _field_mean_curvature(f, x[far], xp[far], zp[far], w=np.abs(zp[far]))
        worst = max(worst, float(np.max(np.abs(H - hy))))
    close = ok & ~far
    if close.any():
        k1 = np.full(len(s), np.nan) if profile.kappa1 is None else profile.kappa1.copy()
        missing = close & ~np.isfinite(k1)
        if missing.any():
            ang = np.unwrap(np.arctan2(zp, xp))
            k1[missing] = np.gradient(ang - ang[0], s, edge_order=2)[missing] if len(s) >= 3 else 0.0
        hy = np.array([f._horner(float(v)) for v in xp[close]])
        H = 0.5 * (k1[close] + zp[close] / np.tanh(x[close]))
        worst = max(worst, float(np.max(np.abs(H - hy))))

    if profile.probe_x is not None and len(profile.probe_x):
        px, ph, dph = profile.probe_x, profile.probe_phi, profile.probe_dphi
        m = px > 0
        if m.any():
            nu = np.cos(ph[m])
            hy = np.array([f._horner(float(v)) for v in nu])
            H = 0.5 * (dph[m] + np.sin(ph[m]) / np.tanh(px[m]))
            worst = max(worst, float(np.max(np.abs(H - hy))))
    return worst


# ---------------------------------------------------------------- export

def _obj_text(mesh: SurfaceMesh) -> str:
    disk = disk_grid(mesh).tolist()  # python floats: repr gives plain round-trip digits
    axis = mesh.axis_rows()
    ns, nt = mesh.ns, mesh.n_theta
    buf = io.StringIO()
    index = np.zeros((ns, nt), dtype=int)
    k = 0
    for i in range(ns):
        if axis[i]:
            k += 1
            u, v, z = disk[i][0]
            buf.write(f"v {u!r} {v!r} {z!r}\n")
            index[i, :] = k
        else:
            for j in range(nt):
                k += 1
                u, v, z = disk[i][j]
                buf.write(f"v {u!r} {v!r} {z!r}\n")
                index[i, j] = k
    for i in range(ns - 1):
        a, b = axis[i], axis[i + 1]
        if a and b:
            continue
        for j in range(nt):
            jn = (j + 1) % nt
            p00, p01 = index[i, j], index[i, jn]
            p10, p11 = index[i + 1, j], index[i + 1, jn]
            if a:
                buf.write(f"f {p00} {p10} {p11}\n")
            elif b:
                buf.write(f"f {p00} {p10} {p01}\n")
            else:
                buf.write(f"f {p00} {p10} {p11}\n")
                buf.write(f"f {p00} {p11} {p01}\n")
    return buf.getvalue()


def _csv_text(mesh: SurfaceMesh) -> str:
    lines = ["i,j,x1,x2,x3,z"]
    g = (mesh.grid + 0.0).tolist()  # + 0.0 folds -0.0
    for i in range(mesh.ns):
        for j in range(mesh.n_theta):
            x1, x2, x3, z = g[i][j]
            lines.append(f"{i},{j},{x1!r},{x2!r},{x3!r},{z!r}")
    return "\n".join(lines) + "\n"


def export_mesh(mesh: SurfaceMesh, fmt: str = "obj") -> bytes:
    """Serialise a mesh as OBJ (Poincare disk x height, triangles) or CSV (hyperboloid grid)."""
    if fmt == "obj":
        return _obj_text(mesh).encode("ascii")
    if fmt == "csv":
        return _csv_text(mesh).encode("ascii")
    raise ValueError(f"unknown mesh format {fmt!r}")


def write_mesh(mesh: SurfaceMesh, path: str | Path, fmt: str | None = None) -> Path:
    path = Path(path)
    fmt = fmt or path.suffix.lstrip(".").lower()
    data = export_mesh(mesh, fmt)
    try:
        path.write_bytes(data)
    except OSError as exc:
        raise OSError(f"cannot write mesh to {path}: {exc.strerror or exc}") from exc
    return path


def cylinder_profile(x0: float, length: float = 2.0, n: int = 21) -> Profile:
    """Vertical line ``x = x0`` parametrised by height."""
    s = np.linspace(-0.5 * length, 0.5 * length, n)
    one = np.ones(n)
    return Profile(s, x0 * one, s.copy(), 0.0 * one, one.copy(), one.astype(int))


def plane_profile(x_max: float = 3.0, n: int = 31, delta: int = 1) -> Profile:
    """Horizontal plane ``z = 0`` with angle function ``delta``, traversed with ``x' = delta``."""
    x = np.linspace(0.0, x_max, n)
    zero = np.zeros(n)
    return Profile(delta * x, x, zero, float(delta) * np.ones(n), zero.copy(), np.ones(n, dtype=int))


def _cut(a, m):
    return None if a is None else a[m]


def truncate_profile(profile: Profile, x_cap: float) -> Profile:
    """Keep the leading run of samples with ``x <= x_cap`` (and probes inside that range)."""
    inside = profile.x <= x_cap
    n = len(inside) if inside.all() else int(np.argmin(inside))
    m = np.zeros(len(inside), dtype=bool)
    m[:n] = True
    pm = None
    if profile.probe_x is not None:
        pm = profile.probe_x <= x_cap
    return Profile(profile.s[m], profile.x[m], profile.z[m], profile.xp[m], profile.zp[m], profile.eps[m],
                   _cut(profile.kappa1, m), _cut(profile.probe_x, pm), _cut(profile.probe_phi, pm),
                   _cut(profile.probe_dphi, pm), profile.rel_tol)


def join_profiles(backward: Profile, forward: Profile) -> Profile:
    """One profile from a backward and a forward half sharing their first sample."""
    r = slice(None, None, -1)

    def cat(a, b, skip=True):
        if a is None or b is None:
            return None
        return np.concatenate([a[r][:-1] if skip else a[r], b])

    return Profile(cat(backward.s, forward.s), cat(backward.x, forward.x), cat(backward.z, forward.z),
                   cat(backward.xp, forward.xp), cat(backward.zp, forward.zp), cat(backward.eps, forward.eps),
                   cat(backward.kappa1, forward.kappa1), cat(backward.probe_x, forward.probe_x, False),
                   cat(backward.probe_phi, forward.probe_phi, False),
                   cat(backward.probe_dphi, forward.probe_dphi, False), max(backward.rel_tol, forward.rel_tol))


def two_sided_profile(backward: Profile, forward: Profile, x_cap: float | None = None) -> Profile:
    """Join the halves of an off-axis orbit, cutting each at ``x_cap`` first."""
    if x_cap is not None:
        backward, forward = truncate_profile(backward, x_cap), truncate_profile(forward, x_cap)
    return join_profiles(backward, forward)
