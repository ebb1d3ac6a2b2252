"""FIR filter value type, its shift-register realization, and coefficient I/O."""

from dataclasses import dataclass

import numpy as np

from .statespace import StateSpace


@dataclass(frozen=True)
class FirFilter:
    """Tap vector (a_0, ..., a_{M-1}) applied at a fixed tap period in seconds."""

    coeffs: np.ndarray
    tap_period: float

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.coeffs, dtype=float)).ravel().copy()
        if a.size < 1:
            raise ValueError("an FIR filter needs at least one coefficient")
        if not np.all(np.isfinite(a)):
            raise ValueError("coefficients must be finite")
        if not self.tap_period > 0:
            raise ValueError(f"tap period must be positive, got {self.tap_period}")
        a.setflags(write=False)
        object.__setattr__(self, "coeffs", a)

    def __len__(self):
        return self.coeffs.size


def realize_ss(k):
    """Minimal shift-register realization of K(z) = sum a_k z^-k.

    A is the (M-1)x(M-1) upper shift matrix, B the last unit vector,
    C = [a_{M-1}, ..., a_1] and D = a_0, so the state realization is
    shared by every filter of the same length and C, D are entrywise
    linear in the coefficients.
    """
    a = k.coeffs
    m = a.size - 1
    A = np.zeros((m, m))
    if m > 1:
        A[:-1, 1:] = np.eye(m - 1)
    B = np.zeros((m, 1))
    if m > 0:
        B[-1, 0] = 1.0
    C = a[:0:-1].reshape(1, m)
    D = np.array([[a[0]]])
    return StateSpace(A, B, C, D, dt=k.tap_period)


def impulse_response(k, length):
    """Taps padded or truncated to ``length`` samples."""
    length = int(length)
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    out = np.zeros(length)
    m = min(length, k.coeffs.size)
    out[:m] = k.coeffs[:m]
    return out


def save_coefficients(path, k):
    """Write one coefficient per line with 17 significant digits.

    The tap period is recorded in a '#' comment header so the file round-trips.
    """
    lines = [f"# fir filter, {len(k)} taps", f"# tap_period = {k.tap_period!r}"]
    lines += [f"{c:.17e}" for c in k.coeffs]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_coefficients(path, tap_period=None):
    """Read a coefficient file written by :func:`save_coefficients`.

    ``tap_period`` overrides the value parsed from the header; one of the
    two must be available.
    """
    coeffs = []
    header_period = None
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("tap_period"):
                    header_period = float(body.split("=", 1)[1])
                continue
            coeffs.append(float(line))
    period = tap_period if tap_period is not None else header_period
    if period is None:
        raise ValueError(f"{path}: no tap period in header and none supplied")
    return FirFilter(np.asarray(coeffs), period)
