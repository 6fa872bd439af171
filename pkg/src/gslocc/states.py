"""Permutation-invariant Gaussian states and their two-mode preparation picture.

A symmetric N-party state has identical single-mode blocks ``diag(m, n)`` and
identical inter-mode blocks ``diag(c, -d)``.  It is produced exactly by sending
N-1 copies of a mode with variances ``(Vx, Vp)`` and one mode with variances
``(Wx, Wp)`` through an N-port distributor, see
:func:`gslocc.symplectic.nport_distributor`.  Both parameter sets are
interchangeable; :class:`SymmetricState` is the canonical form.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import symplectic as sp

__all__ = [
    "PHYS_TOL",
    "SymmetricState",
    "EffectiveScheme",
    "to_effective",
    "from_effective",
    "build_cm",
    "prepare_cm",
    "sample_physical",
    "state_from_dict",
    "state_to_dict",
]

PHYS_TOL = 1e-9


@dataclass(frozen=True)
class EffectiveScheme:
    """Variances of the N-1 identical input modes (``vx, vp``) and of input mode N (``wx, wp``)."""

    n_parties: int
    vx: float
    vp: float
    wx: float
    wp: float

    def __post_init__(self):
        _check_parties(self.n_parties)

    @classmethod
    def from_thermal_squeezed(cls, n_parties, n1, r1, n_last, r_last):
        """Inputs given as thermal noise and squeezing, ``V = n1 exp(+-2 r1)``, ``W = nN exp(+-2 rN)``."""
        return cls(
            n_parties,
            n1 * math.exp(2 * r1),
            n1 * math.exp(-2 * r1),
            n_last * math.exp(2 * r_last),
            n_last * math.exp(-2 * r_last),
        )

    @property
    def variances(self):
        return (self.vx, self.vp, self.wx, self.wp)

    def is_valid(self):
        return all(v > 0 for v in self.variances)

    def is_physical(self, tol=PHYS_TOL):
        return (
            self.is_valid()
            and self.vx * self.vp >= 1.0 - tol
            and self.wx * self.wp >= 1.0 - tol
        )

    def swap_quadratures(self):
        return EffectiveScheme(self.n_parties, self.vp, self.vx, self.wp, self.wx)


@dataclass(frozen=True)
class SymmetricState:
    """Canonical symmetric state: ``nu = diag(m, n)``, ``sigma = diag(c, -d)`` on ``n_parties`` modes."""

    n_parties: int
    m: float
    n: float
    c: float
    d: float

    def __post_init__(self):
        _check_parties(self.n_parties)

    @property
    def k1(self):
        return self.n / self.m

    @property
    def k2(self):
        """``d / c``, or ``None`` when ``c == 0``."""
        if self.c == 0:
            return None
        return self.d / self.c

    @property
    def params(self):
        return (self.m, self.n, self.c, self.d)

    def effective(self):
        return to_effective(self)

    def is_physical(self, tol=PHYS_TOL):
        return to_effective(self).is_physical(tol)

    def physicality_margins(self):
        """``(Vx Vp - 1, Wx Wp - 1)``; both non-negative for a physical state."""
        e = to_effective(self)
        return (e.vx * e.vp - 1.0, e.wx * e.wp - 1.0)

    def swap_quadratures(self):
        """Relabel ``x <-> p``. ``sigma = diag(c, -d)`` becomes ``diag(-d, c)``, so ``(c, d) -> (-d, -c)``."""
        return SymmetricState(self.n_parties, self.n, self.m, -self.d, -self.c)

    def cm(self):
        return build_cm(self)


def _check_parties(n):
    if int(n) != n or n < 2:
        raise ValueError(f"a symmetric state needs at least two parties, got {n!r}")


def to_effective(s):
    n = s.n_parties
    return EffectiveScheme(n, s.m - s.c, s.n + s.d, s.m + (n - 1) * s.c, s.n - (n - 1) * s.d)


def from_effective(e):
    """Symmetric state produced by the distributor from effective inputs.

    Raises:
        ValueError: if any input variance is not positive
    """
    if not e.is_valid():
        raise ValueError(f"effective variances must be positive, got {e.variances}")
    n = e.n_parties
    return SymmetricState(
        n,
        ((n - 1) * e.vx + e.wx) / n,
        ((n - 1) * e.vp + e.wp) / n,
        (e.wx - e.vx) / n,
        (e.vp - e.wp) / n,
    )


def build_cm(s):
    """The ``2N x 2N`` covariance matrix laid out block by block."""
    n = s.n_parties
    nu = np.diag([s.m, s.n])
    sigma = np.diag([s.c, -s.d])
    return np.kron(np.eye(n), nu - sigma) + np.kron(np.ones((n, n)), sigma)


def prepare_cm(e):
    """Covariance matrix from the preparation route: distributor applied to the product input."""
    n = e.n_parties
    gamma_in = sp.direct_sum(*([np.diag([e.vx, e.vp])] * (n - 1) + [np.diag([e.wx, e.wp])]))
    return sp.apply_symplectic(sp.nport_distributor(n), gamma_in)


def sample_physical(m, n, n_parties, count, seed, max_tries=None):
    """Seeded uniform draws of ``(c, d)`` inside the physical region for fixed ``(m, n)``.

    Candidates are drawn from the bounding rectangle
    ``c in [-m/(N-1), m]``, ``d in [-n, n/(N-1)]`` and rejection-filtered.
    When ``m n == 1`` the region shrinks to the product state and every draw
    is ``c = d = 0``.

    Raises:
        ValueError: if no physical ``(c, d)`` exists (``m n < 1``)
    """
    _check_parties(n_parties)
    k = n_parties - 1
    if m <= 0 or n <= 0 or m * n < 1.0 - PHYS_TOL:
        raise ValueError(f"no physical symmetric state has m={m}, n={n}")
    if m * n <= 1.0 + PHYS_TOL:
        return [SymmetricState(n_parties, m, n, 0.0, 0.0) for _ in range(count)]

    rng = np.random.default_rng(seed)
    out = []
    max_tries = max_tries if max_tries is not None else 1000 * max(count, 1)
    tries = 0
    while len(out) < count:
        if tries >= max_tries:
            raise ValueError("physical region too thin for rejection sampling")
        batch = max(16, 2 * (count - len(out)))
        cs = rng.uniform(-m / k, m, batch)
        ds = rng.uniform(-n, n / k, batch)
        tries += batch
        for c, d in zip(cs, ds):
            s = SymmetricState(n_parties, m, n, float(c), float(d))
            if s.is_physical(tol=0.0):
                out.append(s)
                if len(out) == count:
                    break
    return out


def state_to_dict(s):
    e = to_effective(s)
    return {
        "N": s.n_parties,
        "m": s.m,
        "n": s.n,
        "c": s.c,
        "d": s.d,
        "effective": {"Vx": e.vx, "Vp": e.vp, "Wx": e.wx, "Wp": e.wp},
    }


def state_from_dict(obj):
    """Read a JSON state descriptor. ``m, n, c, d`` take precedence over an ``effective`` block."""
    n_parties = int(obj.get("N", 3))
    keys = ("m", "n", "c", "d")
    if all(k in obj for k in keys):
        return SymmetricState(n_parties, *(float(obj[k]) for k in keys))
    if "effective" in obj:
        e = obj["effective"]
        return from_effective(
            EffectiveScheme(n_parties, float(e["Vx"]), float(e["Vp"]), float(e["Wx"]), float(e["Wp"]))
        )
    raise ValueError("state descriptor needs m, n, c, d or an 'effective' block")
