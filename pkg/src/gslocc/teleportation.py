"""Assisted teleportation of coherent states with a symmetric three-party resource.

Alice teleports to Bob; Charlie splits his mode on a beam splitter with
intensity transmittance ``T = t^2`` and homodynes x on one output and p on the
other.  Fidelity is ``F = 2 / sqrt(det E)`` with
``E = 2I + R A R^T + R C + C^T R^T + B``, ``R = diag(-1, 1)``, which fixes the
sign convention ``c > 0, d > 0``.  States outside it are rejected.

Squeezing factors ``a`` here scale variances: the x-variances of the resource
are divided by ``a`` and the p-variances multiplied by it.  Decibels are
``10 log10(a)``.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import symplectic as sp
from .protocols import NoisePlan, QndPlan, apply_noise, apply_qnd
from .states import build_cm, from_effective, to_effective

__all__ = [
    "CharlieSetup",
    "FidelityReport",
    "Curve",
    "conditioned_ab",
    "conditioned_ab_generic",
    "fidelity",
    "fidelity_closed",
    "fidelity_product",
    "bipartite_fidelity",
    "optimal_squeezing",
    "squeezed",
    "db",
    "fidelity_vs_squeezing",
    "optimal_squeezing_at_g",
    "fidelity_at_g",
    "fidelity_vs_g",
]


@dataclass(frozen=True)
class CharlieSetup:
    transmittance_sq: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.transmittance_sq <= 1.0:
            raise ValueError(f"T must lie in [0, 1], got {self.transmittance_sq}")

    @property
    def t(self):
        return math.sqrt(self.transmittance_sq)

    @property
    def r(self):
        return math.sqrt(1.0 - self.transmittance_sq)


@dataclass(frozen=True)
class FidelityReport:
    F: float
    det_E: float
    A: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    C: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class Curve:
    """Sampled fidelity curve; ``valid`` flags points where the output left the ``c, d > 0`` convention."""

    variable: str
    x: np.ndarray
    F: np.ndarray
    baseline: float
    valid: np.ndarray
    mode: str = ""

    def to_csv(self, state):
        head = [
            f"# state m,n,c,d={state.m!r},{state.n!r},{state.c!r},{state.d!r}",
            f"# mode={self.mode}",
            f"# baseline F0={self.baseline!r}",
            f"{self.variable},F",
        ]
        rows = [
            f"{float(x)!r},{float(f)!r}" if ok else f"{float(x)!r},nan"
            for x, f, ok in zip(self.x, self.F, self.valid)
        ]
        return "\n".join(head + rows) + "\n"


def _setup(setup):
    if setup is None:
        return CharlieSetup()
    if isinstance(setup, CharlieSetup):
        return setup
    return CharlieSetup(float(setup))


def _require_tripartite(s):
    if s.n_parties != 3:
        raise ValueError(f"assisted teleportation needs a three-party state, got N={s.n_parties}")


def _require_convention(s):
    if not (s.c > 0 and s.d > 0):
        raise ValueError(f"teleportation gain convention needs c > 0 and d > 0, got c={s.c}, d={s.d}")


def conditioned_ab(s, setup=None):
    """Blocks ``(A, B, C)`` of Alice and Bob after Charlie's measurement, closed form."""
    _require_tripartite(s)
    if not s.is_physical():
        raise ValueError(f"state is unphysical: {s}")
    st = _setup(setup)
    t2, r2 = st.transmittance_sq, 1.0 - st.transmittance_sq
    m, n, c, d = s.params
    dx = c * c * r2 / (m * r2 + t2)
    dp = d * d * t2 / (n * t2 + r2)
    a = np.diag([m - dx, n - dp])
    cc = np.diag([c - dx, -d - dp])
    return a, a.copy(), cc


def conditioned_ab_generic(s, setup=None):
    """Same blocks from the full state: add vacuum D, mix C and D, homodyne x on C and p on D."""
    _require_tripartite(s)
    if not s.is_physical():
        raise ValueError(f"state is unphysical: {s}")
    st = _setup(setup)
    gamma = sp.direct_sum(build_cm(s), sp.vacuum(1))
    # output C' = r C + t D (x measured), D' = -t C + r D (p measured)
    bs = sp.beam_splitter(np.array([[st.r, st.t], [-st.t, st.r]]), 2, 3, 4)
    gamma = sp.apply_symplectic(bs, gamma)
    gamma = sp.homodyne_condition(gamma, 3, "p")
    gamma = sp.homodyne_condition(gamma, 2, "x")
    return gamma[:2, :2], gamma[2:, 2:], gamma[:2, 2:]


def fidelity(s, setup=None):
    """Fidelity of coherent-state teleportation with Charlie's measurement at transmittance ``setup``.

    Raises:
        ValueError: unless ``N = 3``, the state is physical, and ``c, d > 0``
    """
    _require_convention(s)
    a, b, c = conditioned_ab(s, setup)
    r = np.diag([-1.0, 1.0])
    e = 2.0 * np.eye(2) + r @ a @ r.T + r @ c + c.T @ r.T + b
    det_e = float(np.linalg.det(e))
    return FidelityReport(2.0 / math.sqrt(det_e), det_e, a, b, c)


def fidelity_product(s):
    """``(m - c + 1)(n - d + 1 - 2 d^2 / n)``, i.e. ``det E / 4`` at ``T = 1``; ``F = product^-1/2``."""
    m, n, c, d = s.params
    return (m - c + 1.0) * (n - d + 1.0 - 2.0 * d * d / n)


def fidelity_closed(s):
    """Fidelity at the optimal Charlie measurement (``T = 1``, p-homodyne)."""
    _require_tripartite(s)
    _require_convention(s)
    return 1.0 / math.sqrt(fidelity_product(s))


def bipartite_fidelity(s):
    """Two-party teleportation fidelity ``1 / sqrt((m - c + 1)(n - d + 1))``."""
    if s.n_parties != 2:
        raise ValueError(f"bipartite fidelity needs N=2, got N={s.n_parties}")
    _require_convention(s)
    m, n, c, d = s.params
    return 1.0 / math.sqrt((m - c + 1.0) * (n - d + 1.0))


def optimal_squeezing(e):
    """Squeezing ``a`` maximising the three-party fidelity: ``a^2 = Vx (2 Vp + Wp) / (3 Vp Wp)``."""
    if e.n_parties != 3:
        raise ValueError(f"optimal squeezing is derived for N=3, got N={e.n_parties}")
    if not e.is_valid():
        raise ValueError(f"effective variances must be positive, got {e.variances}")
    return math.sqrt(e.vx * (2.0 * e.vp + e.wp) / (3.0 * e.vp * e.wp))


def squeezed(s, a, v_noise=0.0):
    """Resource after the noise protocol with squeezing ``a`` (and optional correlated noise)."""
    return from_effective(apply_noise(to_effective(s), NoisePlan(a * a, v_noise)))


def db(a):
    return 10.0 * math.log10(a)


def fidelity_vs_squeezing(s, a_grid):
    _require_tripartite(s)
    _require_convention(s)
    xs = np.asarray(a_grid, dtype=float)
    fs = np.full(xs.shape, np.nan)
    ok = np.zeros(xs.shape, dtype=bool)
    for i, a in enumerate(xs):
        out = squeezed(s, float(a))
        if out.c > 0 and out.d > 0:
            fs[i] = fidelity_closed(out)
            ok[i] = True
    return Curve("a", xs, fs, fidelity_closed(s), ok, "squeezing")


def _after_qnd(s, g_sq, a):
    # QND plans multiply x-variances by their a; ours divides, hence a_sq = 1/a^2
    return from_effective(apply_qnd(to_effective(s), QndPlan(g_sq, 1.0 / (a * a))))


def optimal_squeezing_at_g(s, g, rtol=1e-10):
    """Squeezing minimising the fidelity product after QND coupling ``g``, by golden-section search in ``log a``.

    The bracket starts at ``[1e-4, 1e4]`` and is widened while the minimum
    sits on its edge.
    """
    _require_tripartite(s)
    _require_convention(s)
    g_sq = float(g) ** 2

    def objective(log_a):
        return fidelity_product(_after_qnd(s, g_sq, math.exp(log_a)))

    lo, hi = math.log(1e-4), math.log(1e4)
    for _ in range(20):
        grid = np.linspace(lo, hi, 41)
        vals = [objective(x) for x in grid]
        i = int(np.argmin(vals))
        if 0 < i < grid.size - 1:
            break
        width = hi - lo
        lo, hi = (lo - width, hi) if i == 0 else (lo, hi + width)
    else:
        raise RuntimeError("could not bracket the optimal squeezing")
    res = minimize_scalar(
        objective, bracket=(grid[i - 1], grid[i], grid[i + 1]), method="golden", tol=rtol,
    )
    return math.exp(res.x)


def fidelity_at_g(s, g, squeezing="optimal"):
    """Fidelity after QND coupling ``g`` and squeezing; ``squeezing`` is ``"optimal"`` or a fixed ``a``."""
    a = optimal_squeezing_at_g(s, g) if squeezing == "optimal" else float(squeezing)
    out = _after_qnd(s, float(g) ** 2, a)
    return fidelity_closed(out), out, a


def fidelity_vs_g(s, g_grid, squeezing="optimal"):
    _require_tripartite(s)
    _require_convention(s)
    xs = np.asarray(g_grid, dtype=float)
    fs = np.full(xs.shape, np.nan)
    ok = np.zeros(xs.shape, dtype=bool)
    for i, g in enumerate(xs):
        f, out, _ = fidelity_at_g(s, float(g), squeezing)
        if out.c > 0 and out.d > 0:
            fs[i] = f
            ok[i] = True
    mode = "per-g-optimal" if squeezing == "optimal" else f"fixed:{float(squeezing)!r}"
    return Curve("g", xs, fs, fidelity_closed(s), ok, mode)
