import json
import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import min_cross_distance, min_return_distance, segment_distances
from pmch2r import core
from pmch2r.core import PrescribedFunction
from pmch2r.integrator import (EventKind, HorizontalPlane, IntegratorConfig, OrbitState, _angle_rhs, integrate,
                               integrate_axis, integrate_both, reconstruct_profile, start_from_axis, winding_count)

CAT = PrescribedFunction.polynomial([-1, 0, 1])
BOWL = PrescribedFunction.linear(math.sqrt(3), -math.sqrt(3) / 4)


def test_segment_distance_helper():
    p0, p1 = np.array([[0.0, 0.0]]), np.array([[1.0, 0.0]])
    assert segment_distances(p0, p1, np.array([[0.5, 1.0]]), np.array([[0.5, 2.0]]))[0] == pytest.approx(1.0)
    assert segment_distances(p0, p1, np.array([[0.5, -1.0]]), np.array([[0.5, 1.0]]))[0] == 0.0
    assert segment_distances(p0, p1, np.array([[2.0, 1.0]]), np.array([[3.0, 1.0]]))[0] == pytest.approx(math.sqrt(2))


# ---------------------------------------------------------------- basic invariants

@pytest.fixture(scope="module")
def sample_orbits():
    out = [integrate_axis(core.linear_law(lam), d) for lam, d in ((0.9, 1), (0.4, 1), (2.0, -1), (1.3, -1))]
    out += list(integrate_both(CAT, OrbitState.from_phase(0.5, 0.0, 1)))
    out.append(integrate_axis(BOWL, 1))
    return out


def test_unit_speed(sample_orbits):
    for o in sample_orbits:
        p = reconstruct_profile(o)
        assert np.max(np.abs(p.xp ** 2 + p.zp ** 2 - 1)) < 1e-9
        i = o.n_prefix
        assert np.max(np.abs(o.y[i:] ** 2 + np.sin(o.phi[i:]) ** 2 - 1)) < 1e-9


def test_midpoint_defect_bounded(sample_orbits):
    # the dense output at each step midpoint against the local flow of the field
    # re-integrated from the step start at much tighter tolerance
    for o in sample_orbits:
        rhs = _angle_rhs(o.f)
        for d in o.steps[:: max(1, len(o.steps) // 300)]:
            m = 0.5 * (d.t0 + d.t1)
            ym = np.array(d.eval(m))
            ref = solve_ivp(rhs, (d.t0, m), d.eval(d.t0), method="DOP853", rtol=1e-13, atol=1e-15).y[:, -1]
            scale = o.config.abs_tol + o.config.rel_tol * np.abs(ym)
            assert np.all(np.abs(ym - ref) <= 10 * scale)


def test_escape_limit(sample_orbits):
    for o in sample_orbits:
        if o.terminal.kind is EventKind.LINE:
            s = o.terminal.state
            assert abs(core.escape_residual(o.f, s.epsilon, s.y)) < o.config.line_tol


def test_to_csv_and_events_json(sample_orbits):
    o = sample_orbits[0]
    lines = o.to_csv().splitlines()
    assert lines[0] == "s,x,y,z,epsilon,event" and len(lines) == len(o) + 1
    assert "EquilibriumConvergence" in lines[-1]
    assert all("np." not in ln for ln in lines)
    assert json.loads(o.events_json())[-1]["kind"] == "EquilibriumConvergence"


# ---------------------------------------------------------------- axis bootstrap

def test_axis_bootstrap_leaves_axis():
    b = start_from_axis(core.linear_law(0.9), 1)
    assert b.state.x > 0 and abs(b.state.y) < 1
    assert b.prefix[0].x == 0.0 and b.prefix[0].y == 1.0
    c = core.state_curvatures(core.linear_law(0.9), core.PhaseState(b.state.x, b.state.y, b.state.epsilon))
    assert np.sign(c.kappa2) == b.state.epsilon


@pytest.mark.parametrize("f,delta", [(PrescribedFunction.constant(0.0), 1), (core.linear_law(1.0), -1),
                                     (PrescribedFunction.constant(0.0), -1)])
def test_plane_cases(f, delta):
    with pytest.raises(HorizontalPlane):
        integrate_axis(f, delta)


def test_bowl_law_bootstrap_and_profile():
    o = integrate_axis(BOWL, 1)
    assert o.terminal.kind is EventKind.LINE
    assert o.terminal.state.y == pytest.approx(0.5, abs=1e-3)
    p = reconstruct_profile(o)
    assert np.all(np.diff(p.z) > 0) and np.all(np.diff(p.x) > 0)
    # graph y = f(x): f(0) = 1 and strictly decreasing
    assert o.y[0] == 1.0 and np.all(np.diff(o.y) < 1e-15)
    away = o.y[:-1] - 0.5 > 1e-12
    assert np.all(np.diff(o.y)[away] < 0)


# ---------------------------------------------------------------- long-run behaviour

def test_spiral_converges_with_growing_winding():
    f = core.linear_law(0.9)
    eq = core.equilibrium(f, 1)
    o = integrate_axis(f, 1)
    assert o.terminal.kind is EventKind.EQUILIBRIUM
    w = [winding_count(integrate_axis(f, 1, IntegratorConfig(s_max=sm, follow_equilibrium=True)), eq)
         for sm in (200.0, 400.0)]
    assert w[0] >= 2 and w[1] > w[0]


def test_node_does_not_wind():
    f = core.linear_law(0.6)
    o = integrate_axis(f, 1, IntegratorConfig(follow_equilibrium=True))
    assert winding_count(o, core.equilibrium(f, 1)) < 1


def test_constant_orbit_at_equilibrium():
    f = core.linear_law(1.0)
    eq = core.equilibrium(f, 1)
    o = integrate(f, OrbitState.from_phase(eq.x0, 0.0, 1), 1)
    assert o.terminal.kind is EventKind.EQUILIBRIUM
    assert np.max(np.abs(o.x - eq.x0)) < 1e-14
    assert np.max(np.abs(o.z - o.s)) < 1e-12
    assert winding_count(o, eq) == 0.0


def test_catenoid_half_orbits():
    fw, bw = integrate_both(CAT, OrbitState.from_phase(0.5, 0.0, 1))
    assert fw.terminal.kind is EventKind.LINE and bw.terminal.kind is EventKind.LINE
    assert fw.terminal.state.y > 0.999 and bw.terminal.state.y < -0.999
    assert fw.count(EventKind.POLE) == 0 and bw.count(EventKind.POLE) == 0
    ss = np.linspace(0, min(fw.s[-1], -bw.s[-1]), 60)
    for s in ss:
        a, b = fw.sample_at(s), bw.sample_at(-s)
        assert a.x == pytest.approx(b.x, abs=1e-8) and a.z == pytest.approx(-b.z, abs=1e-8)


def test_pole_contacts_alternate_and_match():
    o = integrate_axis(core.linear_law(2.0), -1)
    poles = [e for e in o.events_of(EventKind.POLE) if e.eps_switch]
    assert len(poles) >= 10
    assert np.all(np.diff([e.state.x for e in poles]) > 0) or max(e.state.x for e in poles) > 10
    for e in poles:
        assert abs(abs(e.state.y) - 1) < 1e-9
        i = int(np.searchsorted(o.direction * o.s, o.direction * e.s))
        assert o.eps[i - 1] == -o.eps[i]  # z' changes sign
        # continuity of x and z across the contact: the dense output of the step holding it
        d = next(d for d in o.steps if min(d.t0, d.t1) <= e.s <= max(d.t0, d.t1))
        xa, _, za = d.eval(e.s)
        assert abs(xa - e.state.x) < 1e-9 and abs(za - e.state.z) < 1e-9
    assert max(o.x) > 15


@settings(max_examples=15, deadline=None)
@given(st.floats(0.05, 3.0), st.floats(-0.95, 0.95), st.sampled_from([1, -1]), st.sampled_from([1, -1]),
       st.floats(0.3, 2.0))
def test_endpoint_exclusion(x, y, eps, direction, lam):
    o = integrate(core.linear_law(lam), OrbitState.from_phase(x, y, eps), direction, IntegratorConfig(s_max=60))
    if o.terminal.kind is EventKind.AXIS:
        assert abs(o.terminal.state.y) > 1 - 1e-6
    assert np.all(o.x > 0)


# ---------------------------------------------------------------- no crossings, no closed orbits

@pytest.fixture(scope="module")
def spiral_pair():
    f = core.linear_law(0.9)
    eq = core.equilibrium(f, 1)
    return f, eq, [integrate_both(f, OrbitState.from_phase(eq.x0 + d, 0.0, 1)) for d in (0.3, 0.6)]


def test_forward_orbits_do_not_meet(spiral_pair):
    f, eq, ((a, _), (b, _)) = spiral_pair
    ex = 10 * a.config.equilibrium_radius
    assert min_cross_distance(a, b, (eq.x0, 0.0), ex) > 1e-6
    for o in (a, b):
        assert min_return_distance(o, 1.0, (eq.x0, 0.0), ex) > 1e-6


def test_backward_orbits_keep_their_order(spiral_pair):
    # both tend to the same asymptote as x grows, so distance alone cannot certify
    # the absence of crossings; the sign of y1(x) - y2(x) on the common graph part can
    _, _, ((_, a), (_, b)) = spiral_pair
    tails = []
    for o in (a, b):
        last = max(i for i, e in enumerate(o.events) if e.kind in (EventKind.POLE, EventKind.EQUATOR))
        s_cut = o.events[last].s
        m = o.direction * o.s > o.direction * s_cut
        tails.append((o.x[m], o.y[m]))
    lo = max(t[0].min() for t in tails)
    hi = min(t[0].max() for t in tails)
    xs = np.linspace(lo, hi, 400)
    diff = np.interp(xs, *tails[0]) - np.interp(xs, *tails[1])
    assert np.all(diff > 0) or np.all(diff < 0)


def test_bad_inputs():
    with pytest.raises(core.DomainError):
        OrbitState.from_phase(0.0, 0.1, 1)
    with pytest.raises(ValueError):
        integrate(core.linear_law(1), OrbitState.from_phase(1, 0, 1), 2)
    with pytest.raises(ValueError):
        IntegratorConfig(rel_tol=0)
