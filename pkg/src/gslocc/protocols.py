"""Gaussian LOCC protocols that keep a symmetric state symmetric while steering its ratios.

Both protocols end with identical local squeezing on every mode, and every
step is identical on all modes, so everything commutes with the N-port
distributor.  On the effective two-mode picture each protocol is a handful of
scalar maps.  :func:`apply_protocol_full` runs the same protocol on the full
covariance matrix as an independent check.

Squeezing factors are stored squared (``a_sq = a**2``) to match the planners'
closed forms.  The noise protocol squeezes x (x-variance divided by ``a``);
the QND protocol multiplies x-variances by ``a`` after the measurement.
"""

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from . import symplectic as sp
from .numerics import solve_cubic
from .states import EffectiveScheme, SymmetricState, from_effective, to_effective

__all__ = [
    "Reason",
    "TargetRatios",
    "NoisePlan",
    "QndPlan",
    "NotTransformable",
    "plan_noise",
    "apply_noise",
    "noise_window",
    "plan_qnd",
    "qnd_cubic",
    "qnd_candidates",
    "apply_qnd",
    "apply_plan",
    "transform_state",
    "apply_protocol_full",
    "plan_to_dict",
    "plan_from_dict",
]

_DEGENERATE_TOL = 1e-12
_ROOT_TOL = 1e-12


class Reason(str, enum.Enum):
    NEGATIVE_NOISE = "negative-noise"
    NONPOSITIVE_SQUEEZING = "nonpositive-squeezing"
    NO_REAL_ROOT = "no-real-root"
    DEGENERATE_INPUT = "degenerate-input"


@dataclass(frozen=True)
class TargetRatios:
    """Requested output ratios ``k1' = n'/m'`` and ``k2' = d'/c'``."""

    k1: float
    k2: float

    def __post_init__(self):
        for k in (self.k1, self.k2):
            if not (math.isfinite(k) and k > 0):
                raise ValueError(f"target ratios must be finite and positive, got ({self.k1}, {self.k2})")

    def inverted(self):
        return TargetRatios(1.0 / self.k1, 1.0 / self.k2)


@dataclass(frozen=True)
class NoisePlan:
    """Correlated noise of variance ``v_noise`` on one quadrature, then squeezing ``a = sqrt(a_sq)``."""

    a_sq: float
    v_noise: float
    quadrature: str = "x"

    def __post_init__(self):
        if not self.a_sq > 0:
            raise ValueError(f"a_sq must be positive, got {self.a_sq}")
        if not self.v_noise >= 0:
            raise ValueError(f"v_noise must be non-negative, got {self.v_noise}")
        if self.quadrature not in ("x", "p"):
            raise ValueError(f"quadrature must be 'x' or 'p', got {self.quadrature!r}")

    @property
    def a(self):
        return math.sqrt(self.a_sq)


@dataclass(frozen=True)
class QndPlan:
    """QND coupling of strength ``g = sqrt(g_sq)`` to vacuum ancillas, x-homodyne on them, squeezing ``a``."""

    g_sq: float
    a_sq: float

    def __post_init__(self):
        if not self.g_sq >= 0:
            raise ValueError(f"g_sq must be non-negative, got {self.g_sq}")
        if not self.a_sq > 0:
            raise ValueError(f"a_sq must be positive, got {self.a_sq}")

    @property
    def g(self):
        return math.sqrt(self.g_sq)

    @property
    def a(self):
        return math.sqrt(self.a_sq)


@dataclass(frozen=True)
class NotTransformable:
    reason: Reason
    detail: str = ""

    def __bool__(self):
        return False


def _require_physical(s):
    if not s.is_physical():
        raise ValueError(f"input state is unphysical: {s}")


# ---------------------------------------------------------------- noise


def noise_window(s, t):
    """Open interval of ``d`` for which the noise protocol has ``a_sq > 0`` and ``v_noise > 0``."""
    r = t.k2 / t.k1
    return (s.n * s.c / s.m * r, s.n * r)


def plan_noise(s, t, quadrature="x"):
    """Solve the correlated-noise protocol for target ratios ``t``.

    ``a_sq = k1 k2 (m - c) / (k2 n - k1 d)`` and
    ``v_noise = (k1 m d - k2 n c) / (k2 n - k1 d)``.  A plan is returned iff
    ``d`` lies strictly inside :func:`noise_window`, which for physical input
    is the same as ``a_sq > 0`` and ``v_noise > 0``.  Edge points, where
    ``v_noise = 0`` (this includes states that already have the target
    ratios), are not transformable.  The p-quadrature variant solves the
    mirrored problem under ``x <-> p``.

    Returns:
        NoisePlan | NotTransformable

    Raises:
        ValueError: if ``s`` is unphysical
    """
    if quadrature == "p":
        out = plan_noise(s.swap_quadratures(), t.inverted(), "x")
        return replace(out, quadrature="p") if isinstance(out, NoisePlan) else out
    if quadrature != "x":
        raise ValueError(f"quadrature must be 'x' or 'p', got {quadrature!r}")
    _require_physical(s)

    m, n, c, d = s.params
    if abs(c) <= _DEGENERATE_TOL * max(1.0, m):
        return NotTransformable(Reason.DEGENERATE_INPUT, "no x-correlations (c = 0)")
    denom = t.k2 * n - t.k1 * d
    if abs(denom) <= _DEGENERATE_TOL * max(t.k2 * n, t.k1 * abs(d)):
        return NotTransformable(Reason.DEGENERATE_INPUT, "k2' n - k1' d vanishes")

    a_sq = t.k1 * t.k2 * (m - c) / denom
    v_noise = (t.k1 * m * d - t.k2 * n * c) / denom
    lo, hi = noise_window(s, t)
    # the window decides; a_sq and v_noise only explain the verdict
    if not d < hi or not a_sq > 0:
        return NotTransformable(Reason.NONPOSITIVE_SQUEEZING, f"a^2 = {a_sq:.6g}")
    if not lo < d:
        return NotTransformable(Reason.NEGATIVE_NOISE, f"V_N = {v_noise:.6g}")
    # strictly inside the window V_N > 0; rounding can only nudge it to about zero
    return NoisePlan(a_sq, max(v_noise, 0.0), "x")


def apply_noise(e, plan):
    """Effective-picture map of the noise protocol (``V_N`` enters mode N as ``N * V_N``)."""
    if plan.quadrature == "p":
        return apply_noise(e.swap_quadratures(), replace(plan, quadrature="x")).swap_quadratures()
    a = plan.a
    return EffectiveScheme(
        e.n_parties,
        e.vx / a,
        a * e.vp,
        (e.wx + e.n_parties * plan.v_noise) / a,
        a * e.wp,
    )


# ---------------------------------------------------------------- QND


def _qnd_symbols(e):
    n = e.n_parties
    return {
        "N": n,
        "dx": e.vx - e.wx,
        "dp": e.vp - e.wp,
        "nux": (n - 1) * e.vx + e.wx,
        "nup": (n - 1) * e.vp + e.wp,
        "pix": e.vx * e.wx,
        "sigx": e.vx + e.wx,
    }


def _qnd_degenerate(e):
    return abs(e.vx - e.wx) <= _DEGENERATE_TOL * max(1.0, e.vx, e.wx)


def qnd_cubic(s, t):
    """Coefficients ``(c3, c2, c1, c0)`` of the cubic in ``u = g^2`` and the factor ``kappa``.

    The ratio conditions read

        pi_x dp u^2 + sig_x dp u + k2' dx a^2 = -dp
        N pi_x u^3 + (N sig_x + pi_x nu_p) u^2 + (N + sig_x nu_p) u
            - N k1' pi_x u a^2 - k1' nu_x a^2 = -nu_p

    The first gives ``a^2 = kappa (1 + sig_x u + pi_x u^2)`` with
    ``kappa = -dp / (k2' dx)``; substituting into the second leaves the cubic.
    """
    q = _qnd_symbols(to_effective(s))
    n, dx, dp, nux, nup, pix, sigx = (q[k] for k in ("N", "dx", "dp", "nux", "nup", "pix", "sigx"))
    kappa = -dp / (t.k2 * dx)
    h = t.k1 * kappa
    c3 = n * pix - h * n * pix * pix
    c2 = n * sigx + pix * nup - h * (n * pix * sigx + nux * pix)
    c1 = n + sigx * nup - h * (n * pix + nux * sigx)
    c0 = nup - h * nux
    return (c3, c2, c1, c0), kappa


def qnd_candidates(s, t):
    """All admissible ``(g_sq, a_sq)`` pairs, ascending in ``g_sq``.

    Raises:
        ValueError: if ``s`` is unphysical or degenerate (``c = 0``)
    """
    _require_physical(s)
    e = to_effective(s)
    if _qnd_degenerate(e):
        raise ValueError("degenerate input: c = 0")
    coeffs, kappa = qnd_cubic(s, t)
    q = _qnd_symbols(e)
    out = []
    for u in solve_cubic(*coeffs):
        if u < -_ROOT_TOL * max(1.0, 1.0 / min(e.vx, e.wx)):
            continue
        u = max(u, 0.0)
        a_sq = kappa * (1.0 + q["sigx"] * u + q["pix"] * u * u)
        out.append((u, a_sq))
    return out


def plan_qnd(s, t):
    """Solve the partial-QND protocol for target ratios ``t``; picks the smallest admissible ``g^2``.

    Returns:
        QndPlan | NotTransformable

    Raises:
        ValueError: if ``s`` is unphysical
    """
    _require_physical(s)
    if _qnd_degenerate(to_effective(s)):
        return NotTransformable(Reason.DEGENERATE_INPUT, "no x-correlations (c = 0)")
    cands = qnd_candidates(s, t)
    if not cands:
        return NotTransformable(Reason.NO_REAL_ROOT, "no root with g^2 >= 0")
    good = [(u, a_sq) for u, a_sq in cands if a_sq > 0 and math.isfinite(a_sq)]
    if not good:
        return NotTransformable(Reason.NONPOSITIVE_SQUEEZING, f"a^2 <= 0 at g^2 = {cands[0][0]:.6g}")
    u, a_sq = good[0]
    return QndPlan(u, a_sq)


def apply_qnd(e, plan):
    """Effective-picture map: ``V_x -> a V_x / (1 + g^2 V_x)``, ``V_p -> (V_p + g^2) / a``, same for W."""
    a, u = plan.a, plan.g_sq
    return EffectiveScheme(
        e.n_parties,
        a * e.vx / (1.0 + u * e.vx),
        (e.vp + u) / a,
        a * e.wx / (1.0 + u * e.wx),
        (e.wp + u) / a,
    )


# ---------------------------------------------------------------- common


def apply_plan(e, plan):
    if isinstance(plan, NoisePlan):
        return apply_noise(e, plan)
    if isinstance(plan, QndPlan):
        return apply_qnd(e, plan)
    raise TypeError(f"not a protocol plan: {plan!r}")


def transform_state(s, plan):
    return from_effective(apply_plan(to_effective(s), plan))


def apply_protocol_full(gamma, plan):
    """Run ``plan`` on the full ``2N x 2N`` covariance matrix, mode by mode."""
    gamma = np.asarray(gamma, dtype=float)
    n = sp.n_modes_of(gamma)
    if isinstance(plan, NoisePlan):
        alpha = np.diag([plan.v_noise, 0.0] if plan.quadrature == "x" else [0.0, plan.v_noise])
        gamma = sp.add_noise(gamma, np.kron(np.ones((n, n)), alpha))
        # x-variant squeezes x, p-variant squeezes p
        a = plan.a if plan.quadrature == "x" else 1.0 / plan.a
        for j in range(n):
            gamma = sp.apply_symplectic(sp.local_squeezer(a, j, n), gamma)
        return gamma
    if isinstance(plan, QndPlan):
        big = sp.direct_sum(gamma, sp.vacuum(n))
        for j in range(n):
            big = sp.apply_symplectic(sp.qnd_gate(plan.g, j, n + j, 2 * n), big)
        for j in reversed(range(n)):
            big = sp.homodyne_condition(big, n + j, "x")
        for j in range(n):
            big = sp.apply_symplectic(sp.local_squeezer(1.0 / plan.a, j, n), big)
        return big
    raise TypeError(f"not a protocol plan: {plan!r}")


def plan_to_dict(plan):
    if isinstance(plan, NoisePlan):
        return {"protocol": "noise", "a_sq": plan.a_sq, "v_noise": plan.v_noise, "quadrature": plan.quadrature}
    if isinstance(plan, QndPlan):
        return {"protocol": "qnd", "a_sq": plan.a_sq, "g_sq": plan.g_sq, "quadrature": "x"}
    if isinstance(plan, NotTransformable):
        return {"not_transformable": plan.reason.value, "detail": plan.detail}
    raise TypeError(f"not a protocol plan: {plan!r}")


def plan_from_dict(obj):
    kind = obj.get("protocol")
    if kind == "noise":
        return NoisePlan(float(obj["a_sq"]), float(obj["v_noise"]), obj.get("quadrature", "x"))
    if kind == "qnd":
        return QndPlan(float(obj["g_sq"]), float(obj["a_sq"]))
    raise ValueError(f"unknown protocol {kind!r}")
