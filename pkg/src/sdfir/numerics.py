"""Dense real matrix kernels shared by every other module.

All functions take and return plain ``numpy.ndarray`` values (float64,
2-D) and are pure: no global state, safe to call concurrently.
"""

import numpy as np
import scipy.linalg


class NumericsError(RuntimeError):
    """An iterative kernel failed to converge or produced non-finite values."""


class NotPositiveDefiniteError(ValueError):
    """Raised by :func:`cholesky_pd` when the input is not positive definite.

    ``pivot`` is the 1-based index of the first leading minor that fails.
    """

    def __init__(self, pivot):
        self.pivot = int(pivot)
        super().__init__(f"matrix is not positive definite (pivot {self.pivot})")


def as_square(M, name="matrix"):
    """Validate a square 2-D float array and return it as float64."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got shape {M.shape}")
    if M.size and not np.all(np.isfinite(M)):
        raise ValueError(f"{name} contains non-finite entries")
    return M


def expm(M):
    """Matrix exponential e^M (scaling-and-squaring with Pade approximation)."""
    M = as_square(M)
    if M.size == 0:
        return M.copy()
    out = scipy.linalg.expm(M)
    if not np.all(np.isfinite(out)):
        raise NumericsError("expm produced non-finite entries")
    return out


def spectral_radius(M):
    """Largest eigenvalue magnitude of a square matrix."""
    M = as_square(M)
    if M.size == 0:
        return 0.0
    try:
        ev = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:  # QR iteration failed to converge
        raise NumericsError(f"eigenvalue iteration did not converge: {exc}") from exc
    return float(np.max(np.abs(ev)))


def symmetrize(M, rtol=1e-8, name="matrix"):
    """Return (M + M^T)/2, rejecting asymmetry beyond ``rtol`` (relative)."""
    M = as_square(M, name)
    if M.size == 0:
        return M.copy()
    scale = max(float(np.max(np.abs(M))), 1e-300)
    asym = float(np.max(np.abs(M - M.T)))
    if asym > rtol * scale:
        raise ValueError(
            f"{name} is asymmetric beyond tolerance "
            f"(relative asymmetry {asym / scale:.3e} > {rtol:.1e})"
        )
    return 0.5 * (M + M.T)


def cholesky_pd(M, rtol=1e-8):
    """Lower Cholesky factor L with L @ L.T == (M + M.T)/2.

    Raises :class:`NotPositiveDefiniteError` (with the failing pivot index,
    1-based) when the symmetrized input is not positive definite.
    """
    M = symmetrize(M, rtol=rtol)
    if M.size == 0:
        return M.copy()
    c, info = scipy.linalg.lapack.dpotrf(M, lower=1, overwrite_a=0)
    if info > 0:
        raise NotPositiveDefiniteError(info)
    if info < 0:
        raise NumericsError(f"dpotrf: illegal argument {-info}")
    return np.tril(c)


def try_cholesky_pd(M, rtol=1e-8):
    """Like :func:`cholesky_pd` but returns None instead of raising on non-PD."""
    try:
        return cholesky_pd(M, rtol=rtol)
    except NotPositiveDefiniteError:
        return None


def is_positive_definite(M, rtol=1e-8):
    return try_cholesky_pd(M, rtol=rtol) is not None
