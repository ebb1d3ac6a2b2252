"""Discrete-time lifting and multirate building blocks.

Lifting by a factor N regroups a fast-rate signal into slow-rate
N-vectors.  A fast system (A, B, C, D) becomes the slow-rate system

    A_lift = A^N
    B_lift = [A^{N-1} B, A^{N-2} B, ..., B]
    C_lift = [C; C A; ...; C A^{N-1}]
    D_lift = block lower-triangular Toeplitz with D on the diagonal and
             C A^{i-j-1} B in block (i, j) below it,

which preserves the H-infinity norm and the state dimension while
multiplying the I/O dimensions by N.  Lifted systems are wrapped in
:class:`LiftedSystem` so they cannot silently be mixed with unlifted
ones when p = q = 1.
"""

from dataclasses import dataclass

import numpy as np

from .fir import FirFilter, realize_ss
from .statespace import StateSpace


@dataclass(frozen=True)
class LiftedSystem:
    """A lifted realization together with its factor and fast base period."""

    inner: StateSpace
    factor: int
    base_period: float

    @property
    def slow_period(self):
        return self.factor * self.base_period


def lift(g, N):
    """Lift a discrete-time system by an integer factor N >= 1."""
    if g.is_continuous:
        raise ValueError("lift expects a discrete-time system")
    N = int(N)
    if N < 1:
        raise ValueError(f"lifting factor must be >= 1, got {N}")
    if N == 1:
        return LiftedSystem(g, 1, g.dt)
    n, p, q = g.n_states, g.n_outputs, g.n_inputs
    # Powers A^0 .. A^N
    pw = [np.eye(n)]
    for _ in range(N):
        pw.append(g.A @ pw[-1])
    B_l = np.hstack([pw[N - 1 - j] @ g.B for j in range(N)])
    C_l = np.vstack([g.C @ pw[i] for i in range(N)])
    D_l = np.zeros((N * p, N * q))
    for i in range(N):
        D_l[i * p : (i + 1) * p, i * q : (i + 1) * q] = g.D
        for j in range(i):
            D_l[i * p : (i + 1) * p, j * q : (j + 1) * q] = g.C @ pw[i - j - 1] @ g.B
    inner = StateSpace(pw[N], B_l, C_l, D_l, dt=N * g.dt)
    return LiftedSystem(inner, N, g.dt)


def make_hold_vector(N):
    """Column of N ones: holds one slow sample over N fast slots."""
    N = int(N)
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    return np.ones((N, 1))


def make_sample_row(N):
    """Row [1, 0, ..., 0]: selects the first fast sample of a lifted block."""
    N = int(N)
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    out = np.zeros((1, N))
    out[0, 0] = 1.0
    return out


def make_multirate_hold(N, L):
    """N x L block-diagonal hold: column j is a run of N/L ones.

    Models a zero-order hold at period h/L expressed on the h/N fast grid;
    L must divide N.
    """
    N, L = int(N), int(L)
    if N < 1 or L < 1:
        raise ValueError(f"N and L must be >= 1, got N={N}, L={L}")
    if N % L != 0:
        raise ValueError(f"upsampling ratio L={L} must divide lifting factor N={N}")
    p = N // L
    out = np.zeros((N, L))
    for j in range(L):
        out[j * p : (j + 1) * p, j] = 1.0
    return out


def lift_fir_polyphase(k, L):
    """Polyphase-lifted FIR: lift(K, L) composed with the first-input selector.

    Returns the L-output, 1-input realization whose rows are the L
    polyphase components of K:

        A = A_K^L,  B = A_K^{L-1} B_K,
        C = [C_K; C_K A_K; ...; C_K A_K^{L-1}],
        D = [D_K; C_K B_K; ...; C_K A_K^{L-2} B_K].
    """
    if not isinstance(k, FirFilter):
        raise TypeError("lift_fir_polyphase expects a FirFilter")
    L = int(L)
    if L < 1:
        raise ValueError(f"L must be >= 1, got {L}")
    base = realize_ss(k)
    A, B, C, D = base.A, base.B, base.C, base.D
    m = A.shape[0]
    pw = [np.eye(m)]
    for _ in range(max(L - 1, 0)):
        pw.append(A @ pw[-1])
    A_l = A @ pw[L - 1]
    B_l = pw[L - 1] @ B
    C_l = np.vstack([C @ pw[i] for i in range(L)])
    D_l = np.zeros((L, 1))
    D_l[0, 0] = D[0, 0]
    for i in range(1, L):
        D_l[i, 0] = (C @ pw[i - 1] @ B)[0, 0]
    return StateSpace(A_l, B_l, C_l, D_l, dt=L * base.dt)
