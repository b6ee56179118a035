"""Desk-scale reproductions of the phase portraits and surfaces.

Each recipe integrates its orbits, renders an SVG (phase planes on the left,
surfaces on the right), exports OBJ meshes and writes a JSON sidecar holding
the exact parameters and an event signature.  Where the source leaves the
parameter open, a representative value from the relevant interval is pinned
here and recorded in the sidecar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from . import classifier as C
from . import core, plotting
from .config import RunConfig, canonical_json
from .core import PrescribedFunction
from .integrator import EventKind, IntegratorConfig, Orbit, OrbitState, integrate, integrate_axis, reconstruct_profile
from .surface import revolve, truncate_profile, two_sided_profile, write_mesh

N_THETA = 32
SURFACE_X_CAP = 3.0
BOWL_LAW = PrescribedFunction.linear(math.sqrt(3.0), -math.sqrt(3.0) / 4.0)
CATENOID_LAW = PrescribedFunction.polynomial([-1.0, 0.0, 1.0])
CATENOID_NECK = 0.5
LAMBDA_LARGE = 1.3  # representative of lambda > sqrt(5)/2
LAMBDA_MID = 1.05  # representative of 1 < lambda < sqrt(5)/2
LAMBDA_SPIRAL = 0.8  # representative of sqrt(2)/2 < lambda < 1
LAMBDA_GRAPH = 0.4  # representative of lambda <= 1/2
LAMBDA_BOTH_GRAPHS = 1.0 / 3.0

TITLES = {
    1: "bowl: phase plane and entire graph",
    2: "catenoid: phase plane and bi-graph",
    3: "monotonicity regions for lambda > sqrt(5)/2",
    4: "axis orbits and surfaces for lambda > sqrt(5)/2",
    5: "axis orbits for lambda = sqrt(5)/2 and the lower surface",
    6: "phase planes for 1 < lambda < sqrt(5)/2, lambda > 1/2, lambda <= 1/2",
    7: "three orbit types for lambda = sqrt(5)/2",
    8: "off-axis orbit and annulus for lambda > sqrt(5)/2",
    9: "two annuli for lambda = 1/3",
}


class UnknownFigure(ValueError):
    pass


@dataclass
class FigureResult:
    figure: int
    title: str
    parameters: dict
    signature: dict
    files: list[Path] = field(default_factory=list)
    runs: list[dict] = field(default_factory=list)

    def metadata(self) -> dict:
        return {"figure": self.figure, "title": self.title, "parameters": self.parameters,
                "runs": self.runs, "signature": self.signature,
                "files": sorted(p.name for p in self.files)}

    def rows(self) -> list[tuple[str, str]]:
        """Flattened ``(key, value)`` pairs of the signature for delimited output."""
        out = []

        def walk(prefix, v):
            if isinstance(v, dict):
                for k in sorted(v):
                    walk(f"{prefix}.{k}" if prefix else k, v[k])
            else:
                out.append((prefix, v if isinstance(v, str) else canonical_json(v)))

        walk("", self.signature)
        return out


class _Builder:
    def __init__(self, fig: int, out: Path, cfg: IntegratorConfig):
        self.fig = fig
        self.out = out
        self.cfg = cfg
        self.runs: list[dict] = []
        self.files: list[Path] = []

    def run(self, f: PrescribedFunction, start: dict, direction: int | None = None) -> dict:
        rc = RunConfig(f.to_dict(), _overrides(self.cfg), start, direction)
        self.runs.append(rc.to_dict())
        return rc.to_dict()

    def axis(self, f, delta) -> Orbit:
        self.run(f, {"axis": delta})
        return integrate_axis(f, delta, self.cfg)

    def point(self, f, x, y, eps, direction) -> Orbit:
        self.run(f, {"point": [x, y, eps]}, direction)
        return integrate(f, OrbitState.from_phase(x, y, eps), direction, self.cfg)

    def mesh(self, profile, name: str):
        mesh = revolve(truncate_profile(profile, SURFACE_X_CAP), N_THETA)
        self.files.append(write_mesh(mesh, self.out / f"fig{self.fig}_{name}.obj", "obj"))
        return mesh


def _overrides(cfg: IntegratorConfig) -> dict:
    base = IntegratorConfig().to_dict()
    return {k: v for k, v in cfg.to_dict().items() if base[k] != v}


def _events(o: Orbit) -> dict:
    poles = [e for e in o.events_of(EventKind.POLE) if e.eps_switch]
    return {"equatorCrossings": o.count(EventKind.EQUATOR), "gammaCrossings": o.count(EventKind.GAMMA),
            "poleContacts": len(poles), "terminal": o.terminal.kind.value,
            "terminalY": round(float(o.terminal.state.y), 6)}


def _fate(o: Orbit, eq=None) -> dict:
    fl = C.classify_orbit_fate(o, eq)
    d = {"fate": fl.kind.value}
    if fl.y0 is not None:
        d["y0"] = round(fl.y0, 6)
    if fl.spiraling is not None:
        d["spiraling"] = fl.spiraling
    d.update(_events(o))
    return d


def _two_sided(b: _Builder, f, x, y, eps):
    fw = b.point(f, x, y, eps, 1)
    bw = b.point(f, x, y, eps, -1)
    return fw, bw, two_sided_profile(reconstruct_profile(bw), reconstruct_profile(fw), SURFACE_X_CAP)


# ---------------------------------------------------------------- recipes

def _fig1(b: _Builder):
    f = BOWL_LAW
    o = b.axis(f, 1)
    fig, (ax, ax3) = plotting.new_figure(1, 1)
    plotting.draw_phase_plane(ax, f, 1, 3.0, [(o, "tab:red", "gamma_+")])
    plotting.draw_surface(ax3, b.mesh(reconstruct_profile(o), "bowl"), "tab:red")
    sig = {"bowlRoot": round(C.check_bowl_hypotheses(f), 9), "gammaPlus": _fate(o)}
    return fig, {"h": "sqrt(3)(y - 0.25)", "function": f.to_dict()}, sig


def _fig2(b: _Builder):
    f = CATENOID_LAW
    fw, bw, prof = _two_sided(b, f, CATENOID_NECK, 0.0, 1)
    fig, (ax, ax3) = plotting.new_figure(1, 1)
    plotting.draw_phase_plane(ax, f, 1, 3.0, [(fw, "tab:blue", "gamma"), (bw, "tab:blue", None)])
    plotting.draw_surface(ax3, b.mesh(prof, "catenoid"), "tab:blue")
    sig = {"hypotheses": C.check_catenoid_hypotheses(f), "forward": _events(fw), "backward": _events(bw)}
    return fig, {"h": "y^2 - 1", "necksize": CATENOID_NECK}, sig


def _fig3(b: _Builder):
    lam = LAMBDA_LARGE
    f = core.linear_law(lam)
    gp, gm = b.axis(f, 1), b.axis(f, -1)
    fig, axes = plotting.new_figure(2, 0)
    for ax, eps in zip(axes, (1, -1)):
        plotting.draw_phase_plane(ax, f, eps, 3.0, [(gp, "tab:red", "gamma_+"), (gm, "tab:orange", "gamma_-")]
                                  if eps == 1 else [], regions=True, arrows=True)
    xp = gp.events_of(EventKind.EQUATOR)[0].state.x
    xm = gm.events_of(EventKind.EQUATOR)[0].state.x
    sig = {"gammaComponents": {"plus": plotting.gamma_component_count(f, 1),
                               "minus": plotting.gamma_component_count(f, -1)},
           "xPlus": round(xp, 6), "xMinus": round(xm, 6), "xPlusBelowXMinus": xp < xm}
    return fig, {"lambda": lam, "choice": "representative of lambda > sqrt(5)/2"}, sig


def _fig4(b: _Builder):
    lam = LAMBDA_LARGE
    f = core.linear_law(lam)
    eq = core.equilibrium(f, 1)
    gp, gm = b.axis(f, 1), b.axis(f, -1)
    fig, axes = plotting.new_figure(2, 2)
    for ax, eps in zip(axes[:2], (1, -1)):
        plotting.draw_phase_plane(ax, f, eps, 3.0, [(gp, "tab:red", "gamma_+"), (gm, "tab:orange", "gamma_-")])
    plotting.draw_surface(axes[2], b.mesh(reconstruct_profile(gp), "sigma_plus"), "tab:red")
    plotting.draw_surface(axes[3], b.mesh(reconstruct_profile(gm), "sigma_minus"), "tab:orange")
    sig = {"gammaPlus": _fate(gp, eq), "gammaMinus": _fate(gm, eq),
           "classPlus": C.classify_axis_surface(lam, 1, b.cfg, confirm=False).label,
           "classMinus": C.classify_axis_surface(lam, -1, b.cfg).label}
    return fig, {"lambda": lam, "choice": "representative of lambda > sqrt(5)/2"}, sig


def _fig5(b: _Builder):
    lam = core.SQRT5_2
    f = core.linear_law(lam)
    eq = core.equilibrium(f, 1)
    gp, gm = b.axis(f, 1), b.axis(f, -1)
    fig, (ax, ax3) = plotting.new_figure(1, 1)
    plotting.draw_phase_plane(ax, f, 1, 4.0, [(gp, "tab:red", "gamma_+"), (gm, "tab:orange", "gamma_-")])
    plotting.draw_surface(ax3, b.mesh(reconstruct_profile(gm), "sigma_minus"), "tab:orange")
    sig = {"gammaComponents": {"plus": plotting.gamma_component_count(f, 1)},
           "gammaPlus": _fate(gp, eq), "gammaMinus": _fate(gm, eq),
           "classMinus": C.classify_axis_surface(lam, -1, b.cfg).label}
    return fig, {"lambda": "sqrt(5)/2"}, sig


def _fig6(b: _Builder):
    panels = [(LAMBDA_MID, 1), (LAMBDA_SPIRAL, 1), (LAMBDA_GRAPH, 1), (LAMBDA_SPIRAL, -1)]
    fig, axes = plotting.new_figure(len(panels), 0)
    sig = {}
    for ax, (lam, eps) in zip(axes, panels):
        f = core.linear_law(lam)
        orbits = [(b.axis(f, 1), "tab:red", "gamma_+"), (b.axis(f, -1), "tab:orange", "gamma_-")]
        plotting.draw_phase_plane(ax, f, eps, 3.0, orbits, title=f"Theta_{eps:+d}, lambda={lam:g}")
        key = f"lambda={lam:g},eps={eps:+d}"
        roots = [r for r in C.escape_roots(f, eps) if abs(r) < 1.0]
        sig[key] = {"gammaComponents": plotting.gamma_component_count(f, eps),
                    "asymptotes": [round(r, 6) for r in roots]}
    return fig, {"panels": [[lam, eps] for lam, eps in panels],
                 "choice": "1.05 for 1 < lambda < sqrt(5)/2, 0.8 for lambda in (sqrt(2)/2, 1), 0.4 for lambda <= 1/2"}, sig


def _fig7(b: _Builder):
    lam = core.SQRT5_2
    f = core.linear_law(lam)
    eq = core.equilibrium(f, 1)
    br = C.estimate_crossover_bracket(lam, b.cfg)
    xi3 = br.xi_clean if br.xi_clean is not None else 0.5 * (br.r_inf[0] + br.x_inf[1])
    starts = {"gamma1": (eq.x0 + 0.5, 0.0), "gamma2": (1.0, -0.95), "gamma3": (xi3, 0.0)}
    colors = {"gamma1": "tab:red", "gamma2": "tab:blue", "gamma3": "tab:purple"}
    fig, axes = plotting.new_figure(2, 3, width=3.4)
    orbits, sig = [], {}
    for i, (name, (x, y)) in enumerate(starts.items()):
        fw, bw, prof = _two_sided(b, f, x, y, 1)
        orbits += [(fw, colors[name], name), (bw, colors[name], None)]
        sig[name] = {"forward": _fate(fw, eq), "backward": _fate(bw, eq)}
        plotting.draw_surface(axes[2 + i], b.mesh(prof, name), colors[name])
    for ax, eps in zip(axes[:2], (1, -1)):
        plotting.draw_phase_plane(ax, f, eps, 3.0, orbits)
    sig["bracket"] = {"r_inf": [round(v, 6) for v in br.r_inf], "x_inf": [round(v, 6) for v in br.x_inf],
                      "resolved": br.xi_clean is not None}
    return fig, {"lambda": "sqrt(5)/2", "starts": {k: list(v) for k, v in starts.items()}}, sig


def _fig8(b: _Builder):
    lam = LAMBDA_LARGE
    f = core.linear_law(lam)
    start = (2.0, 0.0, 1)
    fw, bw, prof = _two_sided(b, f, *start)
    fig, axes = plotting.new_figure(2, 1)
    for ax, eps in zip(axes[:2], (1, -1)):
        plotting.draw_phase_plane(ax, f, eps, 3.0, [(fw, "tab:blue", "gamma"), (bw, "tab:blue", None)])
    plotting.draw_surface(axes[2], b.mesh(prof, "annulus"), "tab:blue")
    eq = core.equilibrium(f, 1)
    cls = C.classify_off_axis_surface(lam, core.PhaseState(*start), b.cfg)
    sig = {"forward": _fate(fw, eq), "backward": _fate(bw, eq), "class": cls.label}
    return fig, {"lambda": lam, "start": list(start), "choice": "representative of lambda > sqrt(5)/2"}, sig


def _fig9(b: _Builder):
    lam = LAMBDA_BOTH_GRAPHS
    f = core.linear_law(lam)
    starts = {"gamma1": (1.0, 0.0, 1), "gamma2": (1.0, 0.0, -1)}
    colors = {"gamma1": "tab:red", "gamma2": "tab:blue"}
    fig, axes = plotting.new_figure(2, 2)
    orbits, sig = [], {}
    for i, (name, st) in enumerate(starts.items()):
        fw, bw, prof = _two_sided(b, f, *st)
        orbits += [(fw, colors[name], name), (bw, colors[name], None)]
        cls = C.classify_off_axis_surface(lam, core.PhaseState(*st), b.cfg)
        sig[name] = {"forward": _fate(fw), "backward": _fate(bw), "class": cls.label}
        plotting.draw_surface(axes[2 + i], b.mesh(prof, name), colors[name])
    for ax, eps in zip(axes[:2], (1, -1)):
        plotting.draw_phase_plane(ax, f, eps, 3.0, orbits)
    return fig, {"lambda": "1/3", "starts": {k: list(v) for k, v in starts.items()}}, sig


RECIPES = {1: _fig1, 2: _fig2, 3: _fig3, 4: _fig4, 5: _fig5, 6: _fig6, 7: _fig7, 8: _fig8, 9: _fig9}


def reproduce(figure: int, out_dir: str | Path, cfg: IntegratorConfig | None = None) -> FigureResult:
    """Regenerate one figure into ``out_dir``; returns its signature and the files written."""
    if figure not in RECIPES:
        raise UnknownFigure(f"unknown figure id {figure!r}; expected 1..{max(RECIPES)}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    b = _Builder(figure, out, cfg or IntegratorConfig())
    fig, params, sig = RECIPES[figure](b)
    params = dict(params, nTheta=N_THETA, surfaceXCap=SURFACE_X_CAP)
    res = FigureResult(figure, TITLES[figure], params, sig, list(b.files), b.runs)
    desc = canonical_json({"figure": figure, "parameters": params, "runs": b.runs})
    res.files.append(plotting.save_svg(fig, out / f"fig{figure}.svg", desc))
    side = out / f"fig{figure}.json"
    res.files.append(side)
    side.write_text(canonical_json(res.metadata()) + "\n")
    return res
