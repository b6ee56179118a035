"""Matplotlib renderings of phase planes and surfaces, written as deterministic SVG."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from . import core  # noqa: E402
from .core import PrescribedFunction  # noqa: E402
from .integrator import Orbit  # noqa: E402
from .surface import SurfaceMesh, disk_grid  # noqa: E402

plt.rcParams.update({
    "svg.hashsalt": "pmch2r",
    "svg.fonttype": "path",
    "font.size": 9,
    "axes.linewidth": 0.8,
})

GAMMA_COLOR = "tab:green"
REGION_COLORS = ("#fde0dd", "#e0ecf4", "#fff7bc", "#e5f5e0")


def gamma_components(f: PrescribedFunction, epsilon: int, n: int = 4001, x_cap: float = np.inf):
    """Connected pieces of the nullcline as ``(x, y)`` arrays, ordered by ``y``.

    Pieces are also split at escape roots, where the nullcline runs off to
    ``x = inf`` (at a double root the two arcs share only that asymptote).
    """
    from .classifier import escape_roots

    roots = escape_roots(f, epsilon)
    ys = np.linspace(-1.0, 1.0, n)
    pieces, cur = [], []
    prev = None
    for y in ys:
        if prev is not None and cur and any(prev < r <= y for r in roots):
            pieces.append(np.array(cur))
            cur = []
        prev = y
        x = core.gamma_curve(f, epsilon, float(y))
        if x is not None and x <= x_cap:
            cur.append((x, y))
        elif cur:
            pieces.append(np.array(cur))
            cur = []
    if cur:
        pieces.append(np.array(cur))
    return pieces


def gamma_component_count(f: PrescribedFunction, epsilon: int) -> int:
    """Components of the nullcline; pieces split only by a cap are not counted apart."""
    return len(gamma_components(f, epsilon))


def _orbit_segments(orbit: Orbit, epsilon: int, x_cap: float):
    """Pieces of an orbit lying in the half-strip of sign ``epsilon`` and left of ``x_cap``."""
    keep = (orbit.eps == epsilon) & (orbit.x <= x_cap)
    segs, start = [], None
    for i, k in enumerate(keep):
        if k and start is None:
            start = i
        if not k and start is not None:
            segs.append((orbit.x[start:i], orbit.y[start:i]))
            start = None
    if start is not None:
        segs.append((orbit.x[start:], orbit.y[start:]))
    return [s for s in segs if len(s[0]) > 1]


def draw_phase_plane(ax, f: PrescribedFunction, epsilon: int, x_cap: float = 3.0, orbits=(),
                     regions: bool = False, arrows: bool = False, title: str | None = None):
    """Half-strip of sign ``epsilon`` with the nullcline, the equilibrium and the orbits.

    ``orbits`` holds ``(orbit, color, label)`` triples.
    """
    if regions:
        xs = np.linspace(1e-3, x_cap, 240)
        ys = np.linspace(-0.999, 0.999, 200)
        X, Y = np.meshgrid(xs, ys)
        W = np.sqrt(1.0 - Y * Y)
        H = np.vectorize(f._horner)(Y)
        DY = W * W / np.tanh(X) - 2.0 * epsilon * H * W
        cls = (Y > 0).astype(int) * 2 + (DY > 0).astype(int)
        ax.contourf(X, Y, cls, levels=[-0.5, 0.5, 1.5, 2.5, 3.5], colors=REGION_COLORS)
    if arrows:
        xs = np.linspace(0.15, x_cap * 0.95, 14)
        ys = np.linspace(-0.9, 0.9, 11)
        X, Y = np.meshgrid(xs, ys)
        W = np.sqrt(1.0 - Y * Y)
        H = np.vectorize(f._horner)(Y)
        U, V = Y, W * W / np.tanh(X) - 2.0 * epsilon * H * W
        N = np.hypot(U, V)
        N[N == 0] = 1.0
        ax.quiver(X, Y, U / N, V / N, color="0.35", width=0.003, scale=30, pivot="mid")
    for piece in gamma_components(f, epsilon, x_cap=x_cap):
        ax.plot(piece[:, 0], piece[:, 1], color=GAMMA_COLOR, lw=1.4)
    ax.axhline(0.0, color="0.5", lw=0.6)
    eq = core.equilibrium(f, epsilon)
    if eq is not None and eq.x0 <= x_cap:
        ax.plot([eq.x0], [0.0], "ko", ms=3.5)
    for orbit, color, label in orbits:
        first = True
        for xs, ys in _orbit_segments(orbit, epsilon, x_cap):
            ax.plot(xs, ys, color=color, lw=1.1, label=label if first else None)
            first = False
    ax.set_xlim(0.0, x_cap)
    ax.set_ylim(-1.0, 1.0)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(title or f"Theta_{epsilon:+d}")
    if any(lbl for _, _, lbl in orbits):
        handles, labels = ax.get_legend_handles_labels()
        if handles:
            ax.legend(loc="lower right", fontsize=7, frameon=False)


def draw_surface(ax, mesh: SurfaceMesh, color: str = "tab:blue", max_lines: int = 40):
    """Wireframe of a mesh in Poincare disk x height coordinates."""
    d = disk_grid(mesh)
    rs = max(1, mesh.ns // max_lines)
    ax.plot_wireframe(d[:, :, 0], d[:, :, 1], d[:, :, 2], rstride=rs, cstride=1, color=color, lw=0.3)
    ax.set_xlim(-1, 1)
    ax.set_ylim(-1, 1)
    ax.set_xlabel("u")
    ax.set_ylabel("v")
    ax.set_zlabel("z")


def new_figure(n_plane: int, n_surface: int = 0, width: float = 4.0):
    total = n_plane + n_surface
    fig = plt.figure(figsize=(width * total, 3.6))
    axes = [fig.add_subplot(1, total, i + 1) for i in range(n_plane)]
    axes += [fig.add_subplot(1, total, n_plane + i + 1, projection="3d") for i in range(n_surface)]
    return fig, axes


def save_svg(fig, path: str | Path, description: str) -> Path:
    """Write SVG without a timestamp; ``description`` (the run config) is embedded verbatim."""
    path = Path(path)
    fig.savefig(path, format="svg", metadata={"Date": None, "Description": description})
    plt.close(fig)
    return path
