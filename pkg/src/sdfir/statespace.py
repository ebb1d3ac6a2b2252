"""Continuous- and discrete-time LTI state-space systems.

A system is the quadruple (A, B, C, D) with transfer function
C (pI - A)^-1 B + D, where p is the Laplace variable s for continuous
time and the Z-transform variable z for discrete time.  ``dt is None``
marks continuous time; a positive ``dt`` is the sample period in
seconds.  Zero-state systems (n = 0) represent static gains.

Interconnections keep the standard block-matrix realizations:

    parallel:  A = diag(A1, A2), B = [B1; +/-B2], C = [C1, C2], D = D1 +/- D2
    series  :  G1*G2 has A = [[A2, 0], [B1 C2, A1]], B = [B2; B1 D2],
               C = [D1 C2, C1], D = D1 D2

No minimal-realization pass is applied afterwards: realizations grow
block-wise, which keeps the block structure of assembled error systems
transparent and testable.

StateSpace values are immutable (arrays are copied and marked
read-only), so all operations here are pure and thread-safe.
"""

from dataclasses import dataclass

import numpy as np

from . import numerics

# Margin used by stability queries, guarding against roundoff exactly at
# the stability boundary.
STABILITY_MARGIN = 1e-9


class InterconnectionError(ValueError):
    """Domain, rate, or dimension mismatch when combining systems."""


class PoleEvaluationError(ValueError):
    """Frequency response requested at (close to) a pole."""


def _frozen_2d(a, rows=None, cols=None, name="matrix"):
    a = np.array(a, dtype=float, ndmin=2, copy=True)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got {a.ndim}-D")
    if rows is not None and a.shape[0] != rows:
        raise ValueError(f"{name} must have {rows} rows, got {a.shape[0]}")
    if cols is not None and a.shape[1] != cols:
        raise ValueError(f"{name} must have {cols} columns, got {a.shape[1]}")
    if a.size and not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class StateSpace:
    """LTI system (A, B, C, D); continuous when dt is None, discrete otherwise."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    dt: float | None = None

    def __post_init__(self):
        D = _frozen_2d(self.D, name="D")
        p, q = D.shape
        A = _frozen_2d(self.A, name="A")
        if A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got shape {A.shape}")
        n = A.shape[0]
        B = _frozen_2d(self.B, rows=n, cols=q, name="B")
        C = _frozen_2d(self.C, rows=p, cols=n, name="C")
        if self.dt is not None and not self.dt > 0:
            raise ValueError(f"sample period must be positive, got {self.dt}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)

    # --- shape queries -------------------------------------------------
    @property
    def n_states(self):
        return self.A.shape[0]

    @property
    def n_inputs(self):
        return self.B.shape[1]

    @property
    def n_outputs(self):
        return self.C.shape[0]

    @property
    def is_discrete(self):
        return self.dt is not None

    @property
    def is_continuous(self):
        return self.dt is None

    def is_stable(self):
        """Asymptotic stability with a small margin off the boundary."""
        if self.n_states == 0:
            return True
        ev = np.linalg.eigvals(self.A)
        if self.is_discrete:
            return bool(np.max(np.abs(ev)) < 1.0 - STABILITY_MARGIN)
        return bool(np.max(ev.real) < -STABILITY_MARGIN)

    @staticmethod
    def static(gain, dt=None):
        """Zero-state system realizing a constant gain matrix."""
        D = np.atleast_2d(np.asarray(gain, dtype=float))
        p, q = D.shape
        return StateSpace(np.zeros((0, 0)), np.zeros((0, q)), np.zeros((p, 0)), D, dt=dt)


def _same_rate(g1, g2):
    if g1.is_discrete != g2.is_discrete:
        raise InterconnectionError("cannot combine continuous and discrete systems")
    if g1.is_discrete and not np.isclose(g1.dt, g2.dt, rtol=1e-12, atol=0.0):
        raise InterconnectionError(
            f"sample periods differ: {g1.dt} vs {g2.dt}"
        )


def add(g1, g2, sign=+1):
    """Parallel interconnection G1 +/- G2 (same inputs, summed outputs)."""
    _same_rate(g1, g2)
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    if g1.n_inputs != g2.n_inputs or g1.n_outputs != g2.n_outputs:
        raise InterconnectionError(
            f"I/O mismatch: {g1.n_outputs}x{g1.n_inputs} vs {g2.n_outputs}x{g2.n_inputs}"
        )
    n1, n2 = g1.n_states, g2.n_states
    p, q = g1.n_outputs, g1.n_inputs
    A = np.zeros((n1 + n2, n1 + n2))
    A[:n1, :n1] = g1.A
    A[n1:, n1:] = g2.A
    B = np.vstack([g1.B, sign * g2.B])
    C = np.hstack([g1.C, g2.C])
    D = g1.D + sign * g2.D
    return StateSpace(A, B, C, D, dt=g1.dt)


def series(g1, g2):
    """Series interconnection G1*G2 (the output of G2 feeds G1)."""
    _same_rate(g1, g2)
    if g1.n_inputs != g2.n_outputs:
        raise InterconnectionError(
            f"inner dimensions differ: G1 has {g1.n_inputs} inputs, "
            f"G2 has {g2.n_outputs} outputs"
        )
    n1, n2 = g1.n_states, g2.n_states
    A = np.zeros((n1 + n2, n1 + n2))
    A[:n2, :n2] = g2.A
    A[n2:, :n2] = g1.B @ g2.C
    A[n2:, n2:] = g1.A
    B = np.vstack([g2.B, g1.B @ g2.D])
    C = np.hstack([g1.D @ g2.C, g1.C])
    D = g1.D @ g2.D
    return StateSpace(A, B, C, D, dt=g1.dt)


def zoh_discretize(g, period):
    """Zero-order-hold (step-invariant) discretization of a continuous system.

    A_d = e^{A h} and B_d = (int_0^h e^{A tau} dtau) B come from one matrix
    exponential of the augmented block [[A, B], [0, 0]] * h, which avoids
    quadrature and an inverse of a possibly singular A.
    """
    if g.is_discrete:
        raise InterconnectionError("zoh_discretize expects a continuous-time system")
    if not period > 0:
        raise ValueError(f"period must be positive, got {period}")
    n, q = g.n_states, g.n_inputs
    if n == 0:
        return StateSpace(g.A, g.B, g.C, g.D, dt=period)
    M = np.zeros((n + q, n + q))
    M[:n, :n] = g.A
    M[:n, n:] = g.B
    phi = numerics.expm(M * period)
    return StateSpace(phi[:n, :n], phi[:n, n:], g.C, g.D, dt=period)


def freq_response(g, point):
    """Transfer matrix C (pI - A)^-1 B + D at a complex point."""
    return freq_response_batch(g, np.asarray([point], dtype=complex))[0]


def freq_response_batch(g, points):
    """Frequency response at an array of complex points; shape (k, p, q)."""
    points = np.asarray(points, dtype=complex).ravel()
    n = g.n_states
    out = np.empty((points.size, g.n_outputs, g.n_inputs), dtype=complex)
    out[:] = g.D
    if n == 0 or points.size == 0:
        return out
    # Batched resolvent solves; chunked to bound the (k, n, n) scratch.
    chunk = max(1, int(4e6) // (n * n))
    for lo in range(0, points.size, chunk):
        pts = points[lo : lo + chunk]
        lhs = -np.broadcast_to(g.A, (pts.size, n, n)).astype(complex).copy()
        idx = np.arange(n)
        lhs[:, idx, idx] += pts[:, None]
        try:
            sol = np.linalg.solve(lhs, np.broadcast_to(g.B, (pts.size, n, g.n_inputs)))
        except np.linalg.LinAlgError as exc:
            raise PoleEvaluationError(
                "response requested at an eigenvalue of A"
            ) from exc
        out[lo : lo + chunk] += g.C @ sol
    if not np.all(np.isfinite(out.view(float))):
        raise PoleEvaluationError("response overflow near a pole")
    return out


def delay_augment(g, d):
    """Realize z^-d * G by appending d output-wide shift registers.

    d = 0 returns ``g`` unchanged.  The transfer function of the result is
    point^-d * G(point) at every non-pole point.
    """
    if g.is_continuous:
        raise InterconnectionError("delay_augment expects a discrete-time system")
    d = int(d)
    if d < 0:
        raise ValueError(f"delay must be nonnegative, got {d}")
    if d == 0:
        return g
    n, p, q = g.n_states, g.n_outputs, g.n_inputs
    nz = n + d * p
    A = np.zeros((nz, nz))
    A[:n, :n] = g.A
    A[n : n + p, :n] = g.C          # first register latches the output
    for k in range(1, d):
        A[n + k * p : n + (k + 1) * p, n + (k - 1) * p : n + k * p] = np.eye(p)
    B = np.zeros((nz, q))
    B[:n] = g.B
    B[n : n + p] = g.D
    C = np.zeros((p, nz))
    C[:, nz - p :] = np.eye(p)
    return StateSpace(A, B, C, np.zeros((p, q)), dt=g.dt)


def simulate(g, u):
    """Zero-initial-state response of a discrete system to input rows u.

    u has shape (T, q); the returned output has shape (T, p).
    """
    if g.is_continuous:
        raise InterconnectionError("simulate expects a discrete-time system")
    u = np.atleast_2d(np.asarray(u, dtype=float))
    if u.shape[1] != g.n_inputs:
        raise ValueError(f"input rows must have {g.n_inputs} columns")
    x = np.zeros(g.n_states)
    y = np.empty((u.shape[0], g.n_outputs))
    for t in range(u.shape[0]):
        y[t] = g.C @ x + g.D @ u[t]
        x = g.A @ x + g.B @ u[t]
    return y


def from_transfer_function(num, den, dt=None):
    """Controllable-canonical realization of num(s)/den(s) (descending powers).

    The denominator degree must be at least the numerator degree; the
    leading denominator coefficient must be nonzero.
    """
    num = np.atleast_1d(np.asarray(num, dtype=float)).ravel()
    den = np.atleast_1d(np.asarray(den, dtype=float)).ravel()
    num = np.trim_zeros(num, "f")
    den = np.trim_zeros(den, "f")
    if den.size == 0:
        raise ValueError("denominator is zero")
    if num.size == 0:
        num = np.zeros(1)
    if num.size > den.size:
        raise ValueError(
            f"improper transfer function: numerator degree {num.size - 1} "
            f"exceeds denominator degree {den.size - 1}"
        )
    den = den / den[0]
    n = den.size - 1
    b = np.concatenate([np.zeros(den.size - num.size), num])
    d = b[0]
    b_sp = b[1:] - d * den[1:]      # strictly proper remainder
    if n == 0:
        return StateSpace.static([[d]], dt=dt)
    A = np.zeros((n, n))
    A[:-1, 1:] = np.eye(n - 1)
    A[-1, :] = -den[1:][::-1]
    B = np.zeros((n, 1))
    B[-1, 0] = 1.0
    C = b_sp[::-1].reshape(1, n)
    return StateSpace(A, B, C, [[d]], dt=dt)


def impulse_response(g, length):
    """First ``length`` Markov parameters D, CB, CAB, ... of a discrete SISO system."""
    if g.is_continuous:
        raise InterconnectionError("impulse_response expects a discrete-time system")
    if g.n_inputs != 1 or g.n_outputs != 1:
        raise ValueError("impulse_response expects a SISO system")
    out = np.zeros(length)
    out[0] = g.D[0, 0]
    x = g.B[:, 0]
    for k in range(1, length):
        out[k] = g.C[0] @ x
        x = g.A @ x
    return out
