"""Covariance-matrix and symplectic-operator algebra.

Conventions used throughout the package:

* modes are ordered ``(x1, p1, x2, p2, ..., xN, pN)``;
* quadratures are ``x = a + a^dagger`` and ``p = i(a^dagger - a)``, so the
  vacuum covariance matrix is the identity (NOT ``I/2``) and the uncertainty
  relation reads ``gamma + i Omega >= 0``.

Covariance matrices and symplectic operators are plain ``numpy`` arrays.
Every function here is pure and returns a new array.
"""

import numpy as np

from .numerics import jacobi_eigh

__all__ = [
    "PSD_TOL",
    "make_omega",
    "vacuum",
    "n_modes_of",
    "is_symplectic",
    "apply_symplectic",
    "direct_sum",
    "local_op",
    "local_squeezer",
    "beam_splitter",
    "nport_distributor",
    "distributor_orthogonal",
    "qnd_gate",
    "add_noise",
    "homodyne_condition",
    "is_physical",
    "min_uncertainty_eigenvalue",
    "partial_transpose",
    "symplectic_spectrum",
]

PSD_TOL = 1e-9
PINV_RCOND = 1e-12
_OMEGA1 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def make_omega(n_modes):
    """Symplectic form ``Omega = omega (+) ... (+) omega`` with ``omega = [[0, 1], [-1, 0]]``."""
    n_modes = _check_modes(n_modes)
    return np.kron(np.eye(n_modes), _OMEGA1)


def vacuum(n_modes):
    return np.eye(2 * _check_modes(n_modes))


def n_modes_of(m):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
        raise ValueError(f"expected a 2N x 2N matrix, got shape {m.shape}")
    return m.shape[0] // 2


def _check_modes(n_modes):
    if int(n_modes) != n_modes or n_modes < 1:
        raise ValueError(f"n_modes must be a positive integer, got {n_modes!r}")
    return int(n_modes)


def _check_mode(mode, n_modes):
    if int(mode) != mode or not 0 <= mode < n_modes:
        raise IndexError(f"mode index {mode!r} out of range for {n_modes} modes")
    return int(mode)


def is_symplectic(s, tol=1e-10):
    s = np.asarray(s, dtype=float)
    omega = make_omega(n_modes_of(s))
    return bool(np.max(np.abs(s @ omega @ s.T - omega)) < tol)


def apply_symplectic(s, gamma):
    """Return ``S gamma S^T``.

    Raises:
        ValueError: if the dimensions of ``s`` and ``gamma`` differ
    """
    s = np.asarray(s, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    if s.shape != gamma.shape:
        raise ValueError(f"dimension mismatch: operator {s.shape} vs covariance matrix {gamma.shape}")
    out = s @ gamma @ s.T
    return 0.5 * (out + out.T)


def direct_sum(*blocks):
    blocks = [np.atleast_2d(np.asarray(b, dtype=float)) for b in blocks]
    size = sum(b.shape[0] for b in blocks)
    out = np.zeros((size, size))
    i = 0
    for b in blocks:
        k = b.shape[0]
        out[i:i + k, i:i + k] = b
        i += k
    return out


def local_op(s1, n_modes, modes=None):
    """Embed the single-mode 2x2 operator ``s1`` on ``modes`` (all modes by default)."""
    n_modes = _check_modes(n_modes)
    modes = range(n_modes) if modes is None else [_check_mode(j, n_modes) for j in modes]
    s = np.eye(2 * n_modes)
    for j in modes:
        s[2 * j:2 * j + 2, 2 * j:2 * j + 2] = s1
    return s


def local_squeezer(a, mode, n_modes):
    """Squeezer ``diag(a^-1/2, a^1/2)`` on one mode: x-variance scales by ``1/a``, p-variance by ``a``.

    ``a = exp(2r)`` for squeezing parameter ``r``.
    """
    if not a > 0:
        raise ValueError(f"squeezing factor must be positive, got {a!r}")
    s1 = np.diag([a ** -0.5, a ** 0.5])
    return local_op(s1, n_modes, [mode])


def beam_splitter(o2, i, j, n_modes):
    """Passive two-mode operation acting by the 2x2 orthogonal ``o2`` on modes ``i, j``, identically on x and p."""
    n_modes = _check_modes(n_modes)
    i, j = _check_mode(i, n_modes), _check_mode(j, n_modes)
    if i == j:
        raise ValueError("beam splitter needs two distinct modes")
    o = np.eye(n_modes)
    o[np.ix_([i, j], [i, j])] = o2
    return np.kron(o, np.eye(2))


def distributor_orthogonal(n_modes):
    """Real orthogonal ``N x N`` matrix whose last column is ``(1, ..., 1) / sqrt(N)``.

    Built as a cascade of Givens rotations: the rotation in plane ``(k-1, k)``
    leaves amplitude ``1/sqrt(N)`` in mode ``k`` and passes the rest on, i.e. a
    chain of beam splitters with reflectance-transmittance ratios
    ``(N-1):1, ..., 1:1``.
    """
    n = _check_modes(n_modes)
    o = np.eye(n)
    for k in range(n - 1, 0, -1):
        # amplitude arriving at mode k is sqrt((k+1)/N); keep 1/sqrt(N) of it
        c = 1.0 / np.sqrt(k + 1.0)
        s = np.sqrt(k / (k + 1.0))
        g = np.eye(n)
        g[k - 1, k - 1] = c
        g[k, k] = c
        g[k - 1, k] = s
        g[k, k - 1] = -s
        o = g @ o
    return o


def nport_distributor(n_modes):
    """N-port beam splitter ``B = O (x) I_2`` distributing the last input mode evenly over all outputs.

    With input ``(+)_{j<N} diag(Vx, Vp) (+) diag(Wx, Wp)`` the output is the
    symmetric state with ``m = ((N-1)Vx + Wx)/N``, ``c = (Wx - Vx)/N`` and
    likewise ``n``, ``d = (Vp - Wp)/N``.
    """
    if n_modes < 2:
        raise ValueError("the distributor needs at least two modes")
    return np.kron(distributor_orthogonal(n_modes), np.eye(2))


def qnd_gate(g, signal, ancilla, n_modes):
    """QND coupling ``x_anc -> x_anc + g x_sig``, ``p_sig -> p_sig - g p_anc``."""
    n_modes = _check_modes(n_modes)
    signal, ancilla = _check_mode(signal, n_modes), _check_mode(ancilla, n_modes)
    if signal == ancilla:
        raise ValueError("signal and ancilla must be different modes")
    s = np.eye(2 * n_modes)
    s[2 * ancilla, 2 * signal] = g
    s[2 * signal + 1, 2 * ancilla + 1] = -g
    return s


def add_noise(gamma, noise):
    """Classical Gaussian noise: ``gamma + noise``. ``noise`` must be symmetric PSD."""
    gamma = np.asarray(gamma, dtype=float)
    noise = np.asarray(noise, dtype=float)
    if noise.shape != gamma.shape:
        raise ValueError(f"dimension mismatch: noise {noise.shape} vs covariance matrix {gamma.shape}")
    if not np.allclose(noise, noise.T, rtol=1e-12, atol=1e-12):
        raise ValueError("noise matrix is not symmetric")
    w = np.linalg.eigvalsh(noise)
    if w[0] < -PSD_TOL * max(1.0, float(np.max(np.abs(np.diag(noise))))):
        raise ValueError(f"noise matrix is not positive semidefinite (min eigenvalue {w[0]:.3e})")
    return gamma + noise


def homodyne_condition(gamma, mode, quadrature="x"):
    """Covariance matrix of the remaining modes after homodyning ``quadrature`` of ``mode``.

    Gaussian conditioning ``A - C (Pi B Pi)^+ C^T``; the outcome itself only
    shifts first moments and does not enter.

    Raises:
        ValueError: if the measured variance is not positive
    """
    gamma = np.asarray(gamma, dtype=float)
    n = n_modes_of(gamma)
    mode = _check_mode(mode, n)
    if quadrature not in ("x", "p"):
        raise ValueError(f"quadrature must be 'x' or 'p', got {quadrature!r}")
    q = 0 if quadrature == "x" else 1
    if not gamma[2 * mode + q, 2 * mode + q] > 0:
        raise ValueError("measured quadrature has non-positive variance")

    meas = [2 * mode, 2 * mode + 1]
    keep = [i for i in range(2 * n) if i not in meas]
    a = gamma[np.ix_(keep, keep)]
    b = gamma[np.ix_(meas, meas)]
    c = gamma[np.ix_(keep, meas)]
    proj = np.zeros((2, 2))
    proj[q, q] = 1.0
    out = a - c @ np.linalg.pinv(proj @ b @ proj, rcond=PINV_RCOND) @ c.T
    return 0.5 * (out + out.T)


def min_uncertainty_eigenvalue(gamma):
    """Smallest eigenvalue of the real embedding ``[[gamma, -Omega], [Omega, gamma]]`` of ``gamma + i Omega``."""
    gamma = np.asarray(gamma, dtype=float)
    omega = make_omega(n_modes_of(gamma))
    emb = np.block([[gamma, -omega], [omega, gamma]])
    return float(np.linalg.eigvalsh(emb)[0])


def is_physical(gamma, tol=PSD_TOL):
    """True iff ``gamma + i Omega >= 0`` up to ``tol`` relative to the largest diagonal entry."""
    try:
        gamma = np.asarray(gamma, dtype=float)
        n_modes_of(gamma)
        if not np.all(np.isfinite(gamma)):
            return False
        if not np.allclose(gamma, gamma.T, rtol=1e-12, atol=1e-12 * max(1.0, np.max(np.abs(gamma)))):
            return False
        lam = min_uncertainty_eigenvalue(gamma)
    except (ValueError, np.linalg.LinAlgError):
        return False
    return lam >= -tol * max(1.0, float(np.max(np.diag(gamma))))


def partial_transpose(gamma, modes):
    """Flip the sign of the momenta of ``modes``: ``Lambda gamma Lambda`` with ``Lambda = diag(1, -1)`` there.

    Transposing every mode is allowed; it is a global time reversal and
    keeps physical states physical.
    """
    gamma = np.asarray(gamma, dtype=float)
    n = n_modes_of(gamma)
    modes = sorted({_check_mode(j, n) for j in modes})
    if not modes:
        raise ValueError("partial transpose needs at least one mode")
    lam = np.ones(2 * n)
    for j in modes:
        lam[2 * j + 1] = -1.0
    return gamma * np.outer(lam, lam)


def symplectic_spectrum(gamma):
    """Symplectic eigenvalues of a positive-definite ``gamma``, ascending.

    Computed from the symmetric matrix ``K K^T`` with ``K = gamma^1/2 Omega gamma^1/2``,
    whose eigenvalues are the squared symplectic eigenvalues, each twice.
    Both decompositions use :func:`jacobi_eigh`.

    Raises:
        ValueError: if ``gamma`` is not positive definite
    """
    gamma = np.asarray(gamma, dtype=float)
    n = n_modes_of(gamma)
    w, v = jacobi_eigh(gamma)
    if w[0] <= 0.0:
        raise ValueError(f"covariance matrix is not positive definite (min eigenvalue {w[0]:.3e})")
    root = (v * np.sqrt(w)) @ v.T
    k = root @ make_omega(n) @ root
    w2, _ = jacobi_eigh(k @ k.T)
    nu = np.sqrt(np.clip(w2, 0.0, None))
    return 0.5 * (nu[0::2] + nu[1::2])
