import math

import numpy as np
import pytest

from gslocc import symplectic as sp
from gslocc.protocols import (
    NoisePlan,
    NotTransformable,
    QndPlan,
    Reason,
    TargetRatios,
    apply_noise,
    apply_protocol_full,
    apply_qnd,
    noise_window,
    plan_from_dict,
    plan_noise,
    plan_qnd,
    plan_to_dict,
    qnd_candidates,
    qnd_cubic,
    transform_state,
)
from gslocc.states import EffectiveScheme, SymmetricState, build_cm, from_effective, to_effective

from randgen import random_state

S0 = SymmetricState(3, 4.0, 4.0, 1.0, 1.0)
R3 = math.sqrt(3.0)


def ratios(s):
    return s.n / s.m, s.d / s.c


def assert_ratios(s, t, rel=1e-9):
    k1, k2 = ratios(s)
    assert abs(k1 - t.k1) < rel * t.k1
    assert abs(k2 - t.k2) < rel * t.k2


def printed_system_residuals(s, t, plan):
    """Residuals of the two published polynomial conditions at ``(g^2, a^2)``."""
    e = to_effective(s)
    n = e.n_parties
    dx, dp = e.vx - e.wx, e.vp - e.wp
    nux, nup = (n - 1) * e.vx + e.wx, (n - 1) * e.vp + e.wp
    pix, sigx = e.vx * e.wx, e.vx + e.wx
    u, a2 = plan.g_sq, plan.a_sq
    r1 = pix * dp * u * u + sigx * dp * u + t.k2 * dx * a2 + dp
    r2 = (n * pix * u ** 3 + (n * sigx + pix * nup) * u * u + (n + sigx * nup) * u
          - n * t.k1 * pix * u * a2 - t.k1 * nux * a2 + nup)
    return r1, r2


# ---------------------------------------------------------------- noise


def test_noise_worked_example():
    plan = plan_noise(S0, TargetRatios(2, 1))
    assert isinstance(plan, NoisePlan)
    assert abs(plan.a_sq - 3.0) < 1e-12
    assert abs(plan.v_noise - 2.0) < 1e-12
    assert_ratios(transform_state(S0, plan), TargetRatios(2, 1))


def test_noise_negative_noise_example():
    out = plan_noise(S0, TargetRatios(1, 2))
    assert isinstance(out, NotTransformable)
    assert out.reason is Reason.NEGATIVE_NOISE
    assert not out
    # the window for these targets needs d > 2
    assert noise_window(S0, TargetRatios(1, 2)) == pytest.approx((2.0, 8.0))


def test_noise_other_reasons():
    assert plan_noise(SymmetricState(3, 4, 4, 0, 1), TargetRatios(1, 1)).reason is Reason.DEGENERATE_INPUT
    assert plan_noise(S0, TargetRatios(4, 1)).reason is Reason.DEGENERATE_INPUT
    # d above the upper window edge flips the sign of the denominator
    assert plan_noise(SymmetricState(3, 4, 4, 1, 1.5), TargetRatios(3, 1)).reason is Reason.NONPOSITIVE_SQUEEZING
    with pytest.raises(ValueError):
        plan_noise(SymmetricState(3, 1, 1, 1, 0), TargetRatios(1, 1))
    with pytest.raises(ValueError):
        plan_noise(S0, TargetRatios(1, 1), quadrature="z")


def test_apply_noise_examples():
    e = to_effective(S0)
    assert apply_noise(e, NoisePlan(1.0, 0.0)) == e
    out = apply_noise(e, NoisePlan(3.0, 2.0))
    assert out.variances == pytest.approx((R3, 5 * R3, 4 * R3, 2 * R3), rel=1e-14)


def test_noise_full_route_example():
    g = apply_protocol_full(build_cm(S0), NoisePlan(3.0, 2.0))
    ref = build_cm(SymmetricState(3, 2 * R3, 4 * R3, R3, R3))
    assert np.max(np.abs(g - ref)) < 1e-12
    assert np.allclose(apply_protocol_full(build_cm(S0), NoisePlan(1.0, 0.0)), build_cm(S0))


def test_noise_conforming_state_sits_on_window_edge():
    # V_N = 0 exactly: the open window excludes it
    for params in [(4, 4, 1, 1), (4, 2, 1, 0.5), (3, 3, -0.5, -0.25), (6, 1.5, 0.75, 0.375)]:
        s = SymmetricState(3, *params)
        out = plan_noise(s, TargetRatios(s.n / s.m, s.d / s.c))
        assert isinstance(out, NotTransformable)
        assert out.reason is Reason.NEGATIVE_NOISE


def test_noise_plan_tends_to_identity_at_the_edge():
    rng = np.random.default_rng(30)
    done = 0
    while done < 200:
        s = random_state(rng)
        if abs(s.c) < 1e-3 or s.d / s.c <= 0:
            continue
        # which side of the edge is inside follows sign(d)
        t = TargetRatios(s.n / s.m * (1 + np.sign(s.d) * 1e-7), s.d / s.c)
        near = plan_noise(s, t)
        assert isinstance(near, NoisePlan)
        assert near.a_sq == pytest.approx(1.0, rel=1e-5)
        assert near.v_noise == pytest.approx(0.0, abs=1e-5 * s.m)
        done += 1


def test_noise_window_equivalence():
    t = TargetRatios(2, 1)
    m = n = 4.0
    lo, hi = noise_window(SymmetricState(3, m, n, 1.0, 0.0), t)
    checked = 0
    for c in np.linspace(-2, 4, 200):
        if abs(c) < 1e-9:
            continue
        for d in np.linspace(-4, 2, 200):
            s = SymmetricState(3, m, n, float(c), float(d))
            if not s.is_physical():
                continue
            denom = t.k2 * n - t.k1 * d
            if abs(denom) < 1e-9:
                continue
            a_sq = t.k1 * t.k2 * (m - c) / denom
            v_noise = (t.k1 * m * d - t.k2 * n * c) / denom
            lo, hi = noise_window(s, t)
            assert (lo < d < hi) == (a_sq > 0 and v_noise > 0)
            checked += 1
    assert checked > 10000


def test_noise_p_variant():
    rng = np.random.default_rng(31)
    hits = 0
    for _ in range(400):
        s = random_state(rng)
        t = TargetRatios(*np.exp(rng.uniform(-1, 1, 2)))
        if abs(s.d) < 1e-3:
            continue
        plan = plan_noise(s, t, quadrature="p")
        if not plan:
            continue
        hits += 1
        assert plan.quadrature == "p"
        out = transform_state(s, plan)
        assert_ratios(out, t)
        assert out.is_physical()
        full = apply_protocol_full(build_cm(s), plan)
        assert np.max(np.abs(full - build_cm(out))) < 1e-10 * max(1.0, np.abs(full).max())
    assert hits > 30


def test_noise_p_variant_covers_upper_window_edge():
    # d above the x-window (d < n k2'/k1' = 4/3) but fine once the noise goes on p
    s = SymmetricState(3, 4.0, 4.0, 1.0, 1.5)
    t = TargetRatios(3.0, 1.0)
    assert plan_noise(s, t, "x").reason is Reason.NONPOSITIVE_SQUEEZING
    plan = plan_noise(s, t, "p")
    assert isinstance(plan, NoisePlan)
    assert_ratios(transform_state(s, plan), t)


# ---------------------------------------------------------------- QND


def test_apply_qnd_examples():
    e = EffectiveScheme(3, 2.0, 2.0, 2.0, 2.0)
    assert apply_qnd(e, QndPlan(0.0, 1.0)) == e
    out = apply_qnd(e, QndPlan(1.0, 1.0))
    assert out.variances == pytest.approx((2 / 3, 3.0, 2 / 3, 3.0))


def test_qnd_fixed_point():
    plan = plan_qnd(S0, TargetRatios(1, 1))
    assert isinstance(plan, QndPlan)
    assert plan.g_sq == pytest.approx(0.0, abs=1e-12)
    assert plan.a_sq == pytest.approx(1.0, rel=1e-12)


def test_qnd_fixed_point_on_conforming_states():
    rng = np.random.default_rng(32)
    done = 0
    while done < 300:
        s = random_state(rng)
        if abs(s.c) < 1e-3 or s.d / s.c <= 0:
            continue
        plan = plan_qnd(s, TargetRatios(s.n / s.m, s.d / s.c))
        assert isinstance(plan, QndPlan)
        assert plan.g_sq == pytest.approx(0.0, abs=1e-9)
        assert plan.a_sq == pytest.approx(1.0, rel=1e-9)
        done += 1


def test_qnd_example_targets_1_2():
    t = TargetRatios(1, 2)
    plan = plan_qnd(S0, t)
    assert isinstance(plan, QndPlan)
    assert plan.g_sq == pytest.approx(0.25, rel=1e-12)
    assert plan.a_sq == pytest.approx(2.1875, rel=1e-12)
    assert_ratios(transform_state(S0, plan), t)
    r1, r2 = printed_system_residuals(S0, t, plan)
    assert abs(r1) < 1e-10 and abs(r2) < 1e-10


def test_qnd_cannot_raise_k1_over_k2():
    # applying QND with any u >= 0 lowers (n'/m') / (d'/c'); squeezing leaves it alone
    e = to_effective(S0)
    us = np.concatenate([[0.0], np.geomspace(1e-6, 1e6, 2000)])
    vals = []
    for u in us:
        out = from_effective(apply_qnd(e, QndPlan(float(u), 1.0)))
        k1, k2 = ratios(out)
        vals.append(k1 / k2)
    vals = np.array(vals)
    assert vals[0] == pytest.approx(1.0)
    assert np.all(vals <= 1.0 + 1e-12)
    assert np.all(np.diff(vals) <= 1e-12)
    # so targets with k1'/k2' = 2 or 3 are out of reach
    assert plan_qnd(S0, TargetRatios(2, 1)).reason is Reason.NO_REAL_ROOT
    assert plan_qnd(S0, TargetRatios(3, 1)).reason is Reason.NO_REAL_ROOT


def test_qnd_cubic_against_linear_root():
    # the cubic factors as (1 + u Vx)(1 + u Wx) times a linear polynomial
    rng = np.random.default_rng(33)
    n_checked = 0
    for _ in range(500):
        s = random_state(rng)
        if abs(s.c) < 1e-2:
            continue
        t = TargetRatios(*np.exp(rng.uniform(-1.5, 1.5, 2)))
        e = to_effective(s)
        n = e.n_parties
        dx, dp = e.vx - e.wx, e.vp - e.wp
        nux, nup = (n - 1) * e.vx + e.wx, (n - 1) * e.vp + e.wp
        pix = e.vx * e.wx
        rho = t.k1 / t.k2 * dp / dx
        u_lin = -(rho * nux + nup) / (n * (1 + rho * pix))
        coeffs, _ = qnd_cubic(s, t)
        ref = sorted([-1 / e.vx, -1 / e.wx, u_lin])
        got = np.sort(np.roots(coeffs).real)
        assert np.allclose(got, ref, rtol=1e-6, atol=1e-8)
        cands = qnd_candidates(s, t)
        if u_lin >= 0:
            assert any(abs(u - u_lin) < 1e-9 * max(1, u_lin) for u, _ in cands)
        n_checked += 1
    assert n_checked > 300


def test_qnd_ratio_contract_and_printed_system():
    rng = np.random.default_rng(34)
    hits = 0
    for _ in range(1000):
        s = random_state(rng)
        if abs(s.c) < 1e-3:
            continue
        t = TargetRatios(*np.exp(rng.uniform(-1.5, 1.5, 2)))
        plan = plan_qnd(s, t)
        if not plan:
            assert plan.reason in (Reason.NO_REAL_ROOT, Reason.NONPOSITIVE_SQUEEZING)
            continue
        hits += 1
        out = transform_state(s, plan)
        assert_ratios(out, t)
        assert out.is_physical()
        r1, r2 = printed_system_residuals(s, t, plan)
        scale = max(1.0, s.m, s.n) ** 4
        assert abs(r1) < 1e-9 * scale and abs(r2) < 1e-9 * scale
    assert hits > 100


def test_noise_ratio_contract():
    rng = np.random.default_rng(35)
    hits = 0
    for _ in range(1000):
        s = random_state(rng)
        t = TargetRatios(*np.exp(rng.uniform(-1.5, 1.5, 2)))
        plan = plan_noise(s, t)
        if not plan:
            continue
        hits += 1
        assert plan.a_sq > 0 and plan.v_noise >= 0
        out = transform_state(s, plan)
        assert_ratios(out, t)
        assert out.is_physical()
    assert hits > 100


def test_qnd_degenerate_and_unphysical():
    assert plan_qnd(SymmetricState(3, 4, 4, 0, 1), TargetRatios(1, 1)).reason is Reason.DEGENERATE_INPUT
    with pytest.raises(ValueError):
        plan_qnd(SymmetricState(3, 1, 1, 1, 0), TargetRatios(1, 1))
    with pytest.raises(ValueError):
        qnd_candidates(SymmetricState(3, 4, 4, 0, 1), TargetRatios(1, 1))


def test_qnd_full_route_example():
    # signal (2, 2) on every mode, g = 1: each effective mode goes to (2/3, 3)
    s = from_effective(EffectiveScheme(3, 2.0, 2.0, 2.0, 2.0))
    g = apply_protocol_full(build_cm(s), QndPlan(1.0, 1.0))
    assert np.allclose(g, np.kron(np.eye(3), np.diag([2 / 3, 3.0])), atol=1e-14)
    assert np.allclose(apply_protocol_full(build_cm(S0), QndPlan(0.0, 1.0)), build_cm(S0))


# ---------------------------------------------------------------- both


def random_plan(rng):
    a_sq = float(np.exp(rng.uniform(-1.5, 1.5)))
    if rng.random() < 0.5:
        return NoisePlan(a_sq, float(rng.uniform(0, 3)), str(rng.choice(["x", "p"])))
    return QndPlan(float(rng.uniform(0, 4)), a_sq)


def test_scalar_and_full_routes_agree():
    rng = np.random.default_rng(36)
    for _ in range(500):
        s = random_state(rng)
        plan = random_plan(rng)
        full = apply_protocol_full(build_cm(s), plan)
        ref = build_cm(transform_state(s, plan))
        assert np.max(np.abs(full - ref)) < 1e-10 * max(1.0, np.abs(ref).max())


def test_full_route_output_permutation_invariant():
    rng = np.random.default_rng(37)
    for _ in range(50):
        s = random_state(rng)
        n = s.n_parties
        full = apply_protocol_full(build_cm(s), random_plan(rng))
        i, j = rng.choice(n, 2, replace=False)
        perm = np.arange(n)
        perm[[i, j]] = perm[[j, i]]
        idx = np.ravel([[2 * k, 2 * k + 1] for k in perm])
        assert np.allclose(full[np.ix_(idx, idx)], full, atol=1e-12)


def test_transformed_states_stay_physical():
    rng = np.random.default_rng(38)
    for _ in range(500):
        s = random_state(rng)
        out = apply_protocol_full(build_cm(s), random_plan(rng))
        assert sp.is_physical(out)


def test_plan_validation():
    with pytest.raises(ValueError):
        TargetRatios(0.0, 1.0)
    with pytest.raises(ValueError):
        TargetRatios(1.0, math.inf)
    with pytest.raises(ValueError):
        NoisePlan(0.0, 1.0)
    with pytest.raises(ValueError):
        NoisePlan(1.0, -1.0)
    with pytest.raises(ValueError):
        QndPlan(-1.0, 1.0)
    with pytest.raises(TypeError):
        apply_protocol_full(np.eye(6), "plan")


def test_plan_json_round_trip():
    for plan in (NoisePlan(3.0, 2.0), NoisePlan(1.5, 0.0, "p"), QndPlan(0.25, 2.1875)):
        assert plan_from_dict(plan_to_dict(plan)) == plan
    d = plan_to_dict(NotTransformable(Reason.NO_REAL_ROOT, "x"))
    assert d["not_transformable"] == "no-real-root"
    with pytest.raises(ValueError):
        plan_from_dict({"protocol": "teleport"})
