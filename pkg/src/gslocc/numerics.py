"""Small dense numerical kernels: a cyclic Jacobi eigensolver and a real cubic root finder."""

import math

import numpy as np

__all__ = ["jacobi_eigh", "solve_cubic", "solve_quadratic"]


def jacobi_eigh(a, tol=1e-13, max_sweeps=60):
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Args:
        a (array_like): symmetric ``(n, n)`` matrix
        tol (float): stop once the off-diagonal Frobenius norm drops below
            ``tol * ||a||_F``
        max_sweeps (int): upper bound on full sweeps over the upper triangle

    Returns:
        tuple[np.ndarray, np.ndarray]: ascending eigenvalues and the matching
        orthonormal eigenvectors as columns

    Raises:
        ValueError: if ``a`` is not square
        RuntimeError: if the iteration does not converge
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    scale = np.linalg.norm(a)
    if n < 2 or scale == 0.0:
        return _sorted(np.diag(a).copy(), v)

    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off < tol * scale:
            return _sorted(np.diag(a).copy(), v)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-18 * (abs(a[p, p]) + abs(a[q, q])) or abs(apq) < 1e-300:
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                elif theta >= 0.0:
                    t = 1.0 / (theta + math.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J with J[p,p] = J[q,q] = c, J[p,q] = s, J[q,p] = -s
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    raise RuntimeError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")


def _sorted(w, v):
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def solve_quadratic(a, b, c):
    """Real roots of ``a x^2 + b x + c``, ascending. Degrades to the linear case when ``a == 0``."""
    if a == 0.0:
        if b == 0.0:
            return []
        return [-c / b]
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return []
    # cancellation-free form
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    if q == 0.0:
        return [0.0, 0.0]
    return sorted([q / a, c / q])


def solve_cubic(c3, c2, c1, c0, polish=True):
    """Real roots of ``c3 u^3 + c2 u^2 + c1 u + c0 = 0``.

    Closed form: trigonometric when the cubic has three real roots, Cardano
    otherwise. Each root gets one Newton step on the original polynomial.
    A leading coefficient that is negligible next to the others
    (``|c3| <= 1e-14 * max|c_k|``) drops the problem to a quadratic.

    Returns:
        list[float]: real roots in ascending order, repeated roots included
    """
    coeffs = (float(c3), float(c2), float(c1), float(c0))
    big = max(abs(x) for x in coeffs)
    if big == 0.0:
        raise ValueError("all coefficients vanish")
    if abs(coeffs[0]) <= 1e-14 * big:
        return solve_quadratic(coeffs[1], coeffs[2], coeffs[3])

    b, c, d = coeffs[1] / coeffs[0], coeffs[2] / coeffs[0], coeffs[3] / coeffs[0]
    # depressed cubic t^3 + p t + q with u = t - b/3
    shift = b / 3.0
    p = c - b * b / 3.0
    q = 2.0 * b ** 3 / 27.0 - b * c / 3.0 + d
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3

    if p == 0.0 and q == 0.0:
        ts = [0.0, 0.0, 0.0]
    elif disc > 0.0:
        sq = math.sqrt(disc)
        # pick the larger-magnitude branch to avoid cancellation
        w = -q / 2.0 - sq if q > 0.0 else -q / 2.0 + sq
        s = _cbrt(w)
        ts = [s - p / (3.0 * s)]
    elif p < 0.0:
        r = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * r)
        arg = min(1.0, max(-1.0, arg))
        phi = math.acos(arg) / 3.0
        ts = [r * math.cos(phi - 2.0 * math.pi * k / 3.0) for k in range(3)]
    else:
        # disc <= 0 with p >= 0 only happens at p = q = 0 up to rounding
        ts = [_cbrt(-q)] * 3

    roots = [t - shift for t in ts]
    if polish:
        roots = [_newton_step(coeffs, x) for x in roots]
    return sorted(roots)


def _cbrt(x):
    return math.copysign(abs(x) ** (1.0 / 3.0), x)


def _newton_step(coeffs, x):
    c3, c2, c1, c0 = coeffs
    f = ((c3 * x + c2) * x + c1) * x + c0
    df = (3.0 * c3 * x + 2.0 * c2) * x + c1
    if df == 0.0 or not math.isfinite(df):
        return x
    step = f / df
    # a polish step, not a search: refuse anything that jumps far
    if abs(step) > 1e-3 * max(1.0, abs(x)):
        return x
    return x - step
