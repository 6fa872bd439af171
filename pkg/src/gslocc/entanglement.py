"""Entanglement classes of symmetric states and (c, d) classification maps.

Symmetric states fall into three of the five tripartite Gaussian classes:

* class I: every 1|(N-1) bipartition is NPT (fully entangled);
* class IV: PPT across every bipartition but not fully separable (bound entangled);
* class V: fully separable.

Full separability uses a closed form: ``gamma >= (+) sigma_0`` for a single
physical diagonal ``sigma_0`` exists iff
``min(Vx, Wx) * min(Vp, Wp) >= 1``.  Averaging over mode permutations and
over the ``p -> -p`` reflection shows an identical diagonal ``sigma_0``
loses no generality.  :func:`separability_oracle` checks the closed form
independently by direct search.
"""

import enum
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from . import symplectic as sp
from .protocols import TargetRatios, plan_noise, plan_qnd, transform_state
from .states import PHYS_TOL, SymmetricState, build_cm, to_effective

__all__ = [
    "PPT_TOL",
    "EntanglementClass",
    "Grid",
    "ClassMap",
    "ppt_min_symplectic",
    "ppt_min_symplectic_generic",
    "separability_product",
    "is_fully_separable",
    "separability_oracle",
    "classify",
    "classify_cell",
    "class_map",
    "default_grids",
]

PPT_TOL = 1e-9
SEP_TOL = 1e-9


class EntanglementClass(enum.IntEnum):
    UNPHYSICAL = -1
    NOT_TRANSFORMABLE = 0
    CLASS_I = 1
    CLASS_IV = 4
    CLASS_V = 5

    @property
    def label(self):
        return _LABELS[self]


_LABELS = {
    EntanglementClass.UNPHYSICAL: "unphysical",
    EntanglementClass.NOT_TRANSFORMABLE: "not-transformable",
    EntanglementClass.CLASS_I: "I",
    EntanglementClass.CLASS_IV: "IV",
    EntanglementClass.CLASS_V: "V",
}

# grey levels: separable dark grey, fully entangled black, PPT-entangled grey, not transformable light grey
PALETTE = {
    EntanglementClass.CLASS_V: (96, 96, 96),
    EntanglementClass.CLASS_I: (0, 0, 0),
    EntanglementClass.CLASS_IV: (160, 160, 160),
    EntanglementClass.NOT_TRANSFORMABLE: (224, 224, 224),
    EntanglementClass.UNPHYSICAL: (255, 255, 255),
}


def _require_physical(s):
    if not s.is_physical():
        raise ValueError(f"state is unphysical: {s}")


def ppt_min_symplectic(s):
    """Smallest symplectic eigenvalue of the state with mode 1 partially transposed.

    The other N-1 modes are rotated into one collective mode plus N-2 modes
    that decouple with variances ``(Vx, Vp)``.  That leaves a two-mode problem
    with x- and p-blocks

        X = [[m, sqrt(N-1) c], [sqrt(N-1) c, m + (N-2) c]]
        P = [[n, sqrt(N-1) d], [sqrt(N-1) d, n - (N-2) d]]

    (the sign of the p-correlation is flipped by the transpose); its
    symplectic eigenvalues are the square roots of the eigenvalues of ``X P``.
    All 1|(N-1) cuts are equivalent by symmetry.
    """
    _require_physical(s)
    n_par = s.n_parties
    m, n, c, d = s.params
    r = math.sqrt(n_par - 1)
    x11, x12, x22 = m, r * c, m + (n_par - 2) * c
    p11, p12, p22 = n, r * d, n - (n_par - 2) * d
    # X P = [[x11 p11 + x12 p12, x11 p12 + x12 p22], [x12 p11 + x22 p12, x12 p12 + x22 p22]]
    tr = x11 * p11 + 2.0 * x12 * p12 + x22 * p22
    det = (x11 * x22 - x12 * x12) * (p11 * p22 - p12 * p12)
    disc = math.sqrt(max(tr * tr - 4.0 * det, 0.0))
    big = 0.5 * (tr + disc)
    small = det / big if big > 0 else 0.0
    vals = [math.sqrt(max(small, 0.0))]
    if n_par > 2:
        e = to_effective(s)
        vals.append(math.sqrt(e.vx * e.vp))
    return min(vals)


def ppt_min_symplectic_generic(s):
    """Same quantity via the full partial transpose and :func:`~gslocc.symplectic.symplectic_spectrum`."""
    _require_physical(s)
    pt = sp.partial_transpose(build_cm(s), [0])
    return float(sp.symplectic_spectrum(pt)[0])


def separability_product(s):
    e = to_effective(s)
    return min(e.vx, e.wx) * min(e.vp, e.wp)


def is_fully_separable(s):
    """Closed-form full-separability test ``min(Vx, Wx) min(Vp, Wp) >= 1``."""
    _require_physical(s)
    return separability_product(s) >= 1.0 - SEP_TOL


def _oracle_margin(gamma, log_sx):
    n = sp.n_modes_of(gamma)
    t = np.atleast_1d(np.asarray(log_sx, dtype=float))
    diag = np.zeros((t.size, 2 * n))
    diag[:, 0::2] = np.exp(t)[:, None]
    diag[:, 1::2] = np.exp(-t)[:, None]
    mats = gamma[None, :, :] - diag[:, :, None] * np.eye(2 * n)[None, :, :]
    return np.linalg.eigvalsh(mats)[:, 0]


def separability_oracle(state, grid_resolution=64, return_witness=False):
    """Search for ``sigma_0 = diag(s_x, s_p)``, ``s_x s_p >= 1``, with ``gamma - (+) sigma_0 >= 0``.

    Shrinking ``sigma_0`` only helps, so the search runs along ``s_p = 1/s_x``:
    a log-spaced grid over ``s_x`` followed by bounded refinement of the best
    grid point.  The smallest eigenvalue is concave in ``log s_x``, so the
    grid-plus-refinement maximum is the global one.

    Args:
        state (SymmetricState or array_like): state or covariance matrix; for a
            general matrix a witness proves separability but its absence does not
            prove the opposite
        grid_resolution (int): number of grid points in ``log s_x``
        return_witness (bool): also return ``(s_x, s_p, margin)``

    Returns:
        bool or tuple: whether a witness was found (and the witness)
    """
    gamma = build_cm(state) if isinstance(state, SymmetricState) else np.asarray(state, dtype=float)
    span = math.log(max(2.0, float(np.max(np.diag(gamma))))) + 1.0
    grid = np.linspace(-span, span, grid_resolution)
    margins = _oracle_margin(gamma, grid)
    i = int(np.argmax(margins))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid.size - 1)]
    best_t, best = grid[i], float(margins[i])
    if hi > lo:
        res = minimize_scalar(
            lambda t: -_oracle_margin(gamma, t)[0], bounds=(lo, hi), method="bounded",
            options={"xatol": 1e-12},
        )
        if -res.fun > best:
            best_t, best = float(res.x), float(-res.fun)
    found = best >= -SEP_TOL * max(1.0, float(np.max(np.diag(gamma))))
    if return_witness:
        return found, (math.exp(best_t), math.exp(-best_t), best)
    return found


def classify(s):
    """Entanglement class of a symmetric state (``UNPHYSICAL`` for invalid input)."""
    if not s.is_physical():
        return EntanglementClass.UNPHYSICAL
    if ppt_min_symplectic(s) < 1.0 - PPT_TOL:
        return EntanglementClass.CLASS_I
    if is_fully_separable(s):
        return EntanglementClass.CLASS_V
    return EntanglementClass.CLASS_IV


@dataclass(frozen=True)
class Grid:
    lo: float
    hi: float
    count: int

    def __post_init__(self):
        if int(self.count) != self.count or self.count < 1:
            raise ValueError(f"grid count must be a positive integer, got {self.count!r}")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or self.hi < self.lo:
            raise ValueError(f"bad grid range [{self.lo}, {self.hi}]")
        if self.count > 1 and self.hi == self.lo:
            raise ValueError("grid with several points needs a non-empty range")

    def values(self):
        if self.count == 1:
            return np.array([self.lo])
        return np.linspace(self.lo, self.hi, int(self.count))

    def spec(self):
        return f"{self.lo!r},{self.hi!r},{self.count}"


def default_grids(m, n, n_parties, count):
    """Axes covering the physical region: ``c in [-m/(N-1), m]``, ``d in [-n, n/(N-1)]``."""
    k = n_parties - 1
    return Grid(-m / k, m, count), Grid(-n, n / k, count)


def classify_cell(m, n, n_parties, c, d, protocol=None, targets=None, quadrature="x"):
    """Class code of one map cell, after the protocol when one is given."""
    s = SymmetricState(n_parties, m, n, float(c), float(d))
    if not s.is_physical():
        return EntanglementClass.UNPHYSICAL
    if protocol is None or protocol == "none":
        return classify(s)
    if protocol == "noise":
        plan = plan_noise(s, targets, quadrature)
    elif protocol == "qnd":
        plan = plan_qnd(s, targets)
    else:
        raise ValueError(f"unknown protocol {protocol!r}")
    if not plan:
        return EntanglementClass.NOT_TRANSFORMABLE
    return classify(transform_state(s, plan))


@dataclass(frozen=True)
class ClassMap:
    """Class codes on a (c, d) grid; ``codes[i_d, i_c]``, rows ordered by ascending ``d``."""

    m: float
    n: float
    n_parties: int
    protocol: str
    targets: TargetRatios | None
    quadrature: str
    c_axis: Grid
    d_axis: Grid
    codes: np.ndarray

    def counts(self):
        vals, cnt = np.unique(self.codes, return_counts=True)
        out = {cls: 0 for cls in EntanglementClass}
        out.update({EntanglementClass(int(v)): int(k) for v, k in zip(vals, cnt)})
        return out

    def header_lines(self):
        k1 = repr(self.targets.k1) if self.targets else ""
        k2 = repr(self.targets.k2) if self.targets else ""
        return [
            "# gslocc class map",
            f"# m={self.m!r}",
            f"# n={self.n!r}",
            f"# N={self.n_parties}",
            f"# protocol={self.protocol}",
            f"# k1'={k1}",
            f"# k2'={k2}",
            f"# quadrature={self.quadrature}",
            f"# c_grid={self.c_axis.spec()}",
            f"# d_grid={self.d_axis.spec()}",
            "# codes: -1 unphysical, 0 not-transformable, 1 class I, 4 class IV, 5 class V",
        ]

    def to_csv(self):
        cs, ds = self.c_axis.values(), self.d_axis.values()
        lines = self.header_lines() + ["c,d,code"]
        for i, d in enumerate(ds):
            for j, c in enumerate(cs):
                lines.append(f"{float(c)!r},{float(d)!r},{int(self.codes[i, j])}")
        return "\n".join(lines) + "\n"

    def to_ppm(self):
        """Binary P6 raster, one pixel per cell, largest ``d`` on top."""
        h, w = self.codes.shape
        rgb = np.zeros((h, w, 3), dtype=np.uint8)
        for cls, colour in PALETTE.items():
            rgb[self.codes == int(cls)] = colour
        return f"P6\n{w} {h}\n255\n".encode("ascii") + rgb[::-1].tobytes()


def _rows(args):
    m, n, n_parties, cs, ds, protocol, targets, quadrature = args
    return [[int(classify_cell(m, n, n_parties, c, d, protocol, targets, quadrature)) for c in cs] for d in ds]


def class_map(m, n, n_parties, c_grid, d_grid, protocol=None, targets=None, quadrature="x", jobs=1):
    """Classify every cell of a (c, d) grid at fixed ``(m, n)``.

    With a protocol, each physical cell is planned first: cells without a
    plan are ``NOT_TRANSFORMABLE``, the others get the class of the output
    state.  ``jobs > 1`` spreads rows over worker processes; the result does
    not depend on ``jobs``.

    Raises:
        ValueError: if a protocol is requested without targets
    """
    protocol = protocol or "none"
    if protocol not in ("none", "noise", "qnd"):
        raise ValueError(f"unknown protocol {protocol!r}")
    if protocol != "none" and targets is None:
        raise ValueError(f"protocol {protocol!r} needs target ratios")
    cs = [float(c) for c in c_grid.values()]
    ds = [float(d) for d in d_grid.values()]
    proto = None if protocol == "none" else protocol

    jobs = max(1, int(jobs))
    if jobs == 1 or len(ds) < 2 * jobs:
        rows = _rows((m, n, n_parties, cs, ds, proto, targets, quadrature))
    else:
        step = math.ceil(len(ds) / (4 * jobs))
        chunks = [(m, n, n_parties, cs, ds[i:i + step], proto, targets, quadrature) for i in range(0, len(ds), step)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = [row for part in pool.map(_rows, chunks) for row in part]
    codes = np.array(rows, dtype=np.int8).reshape(len(ds), len(cs))
    return ClassMap(m, n, n_parties, protocol, targets, quadrature, c_grid, d_grid, codes)


def default_jobs():
    """Worker count: ``GSLOCC_THREADS`` if set, else the CPU count."""
    env = os.environ.get("GSLOCC_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1
