"""Small dense matrix routines used by every flow computation.

All functions take and return plain ``numpy`` arrays. Matrices are
expected to be square, real and finite.
"""

from math import factorial

import numpy as np

__all__ = [
    "ExpmRangeError",
    "as_square",
    "expm",
    "operator_norm",
    "lognorm2",
    "lie_bracket",
    "span_rank",
]

# ||tM|| above this would overflow double precision after exponentiation.
EXPM_NORM_LIMIT = 700.0

_PADE_ORDER = 8
_PADE_COEFFS = np.array(
    [
        factorial(2 * _PADE_ORDER - k)
        * factorial(_PADE_ORDER)
        / (factorial(2 * _PADE_ORDER) * factorial(k) * factorial(_PADE_ORDER - k))
        for k in range(_PADE_ORDER + 1)
    ]
)


class ExpmRangeError(OverflowError, ValueError):
    """Raised when a matrix exponential would leave floating point range."""


def as_square(M, name="matrix"):
    """Validate ``M`` as a finite square float matrix and return it as an array."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise ValueError(f"{name} must be a non-empty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def _pade_kernel(X):
    d = X.shape[0]
    eye = np.eye(d)
    num = _PADE_COEFFS[-1] * eye
    den = _PADE_COEFFS[-1] * eye
    # Horner evaluation of N(X) and D(X) = N(-X)
    for k in range(_PADE_ORDER - 1, -1, -1):
        num = num @ X + _PADE_COEFFS[k] * eye
        den = -(den @ X) + _PADE_COEFFS[k] * eye
    return np.linalg.solve(den, num)


def expm(M, t=1.0):
    """Return ``exp(t*M)`` by scaling and squaring with a [8/8] Pade kernel.

    The squaring count is chosen so that the scaled matrix has 1-norm
    below 0.5, where the Pade truncation error is far below machine
    precision.

    Raises
    ------
    ExpmRangeError
        If the spectral norm of ``t*M`` exceeds 700.
    """
    M = as_square(M)
    t = float(t)
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    X = t * M
    if operator_norm(X) > EXPM_NORM_LIMIT:
        raise ExpmRangeError(f"||tM|| = {operator_norm(X):.3g} exceeds {EXPM_NORM_LIMIT}")
    norm1 = np.linalg.norm(X, 1)
    squarings = 0
    if norm1 > 0.5:
        squarings = int(np.ceil(np.log2(norm1 / 0.5)))
    E = _pade_kernel(X / 2.0**squarings)
    for _ in range(squarings):
        E = E @ E
    return E


def operator_norm(M):
    """Spectral norm (largest singular value)."""
    M = as_square(M)
    if M.shape[0] == 1:
        return abs(float(M[0, 0]))
    return float(np.linalg.norm(M, 2))


def lognorm2(M):
    """Logarithmic 2-norm: largest eigenvalue of the symmetric part of ``M``.

    This bounds ``d/dt ln|x(t)|`` along ``x' = Mx`` and never exceeds
    :func:`operator_norm`.
    """
    M = as_square(M)
    return float(np.linalg.eigvalsh(0.5 * (M + M.T))[-1])


def lie_bracket(M, N):
    """Commutator ``MN - NM``."""
    M = as_square(M, "M")
    N = as_square(N, "N")
    if M.shape != N.shape:
        raise ValueError(f"dimension mismatch: {M.shape} vs {N.shape}")
    return M @ N - N @ M


def span_rank(vectors, tol=1e-9):
    """Numerical rank of a list of vectors.

    Singular values below ``tol`` times the largest one are treated as zero.
    A list of zero vectors has rank 0.
    """
    if len(vectors) == 0:
        raise ValueError("span_rank needs at least one vector")
    V = np.atleast_2d(np.asarray(vectors, dtype=float))
    s = np.linalg.svd(V, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))
