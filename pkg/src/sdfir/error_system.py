"""Fast-rate discrete approximations of the sampled-data mismatch system.

The mismatch between a delayed analog target and its hold-filter-sample
implementation, shaped by the input characteristic F(s), is approximated
by discretizing the continuous parts on the fast grid h/N and lifting by
N.  With T1 the (delayed) lifted target path, T2 the sampled
characteristic path, and the FIR taps entering through the hold matrix,
the result has the realization

    A = [[A1, 0,       0  ],        B = [B1; B2; 0],
         [0,  A2,      0  ],
         [0,  Bk C2,   Ak ]]
    C(a) = [C1, -H Dk(a) C2, -H Ck(a)],   D(a) = D1,

where (Ak, Bk, Ck, Dk) realize the (polyphase-lifted) FIR filter and H
holds one filter output over the fast slots.  Only the output rows
depend on the taps, and they do so affinely; that structure is what the
LMI synthesis consumes, so it is exposed explicitly here instead of a
plain state-space value.

States are ordered [T1 (incl. delay registers) | T2 | FIR], and the
sign convention keeps C(a) the true difference "target minus filter
path".
"""

from dataclasses import dataclass

import numpy as np

from .lifting import lift, make_multirate_hold
from .statespace import StateSpace, add, delay_augment, series, zoh_discretize


class ValidationError(ValueError):
    """An input system violates the stability/properness assumptions."""

    def __init__(self, which, message):
        self.which = which
        super().__init__(f"{which}: {message}")


@dataclass(frozen=True)
class AffineErrorSystem:
    """Error-system realization with tap-affine output rows.

    C(a) = C0 + sum_k a_k C_lin[k]; the feedthrough never depends on the
    taps (D_lin = 0) because the filter path is composed with the
    strictly proper characteristic.
    """

    A: np.ndarray
    B: np.ndarray
    C0: np.ndarray
    C_lin: np.ndarray  # (M, N, n)
    D0: np.ndarray
    M: int
    N: int
    h: float
    m: int
    L: int
    n_t1: int
    n_t2: int

    @property
    def n_states(self):
        return self.A.shape[0]

    def C_of(self, a):
        a = np.asarray(a, dtype=float).ravel()
        if a.size != self.M:
            raise ValueError(f"expected {self.M} coefficients, got {a.size}")
        return self.C0 + np.tensordot(a, self.C_lin, axes=(0, 0))

    def D_of(self, a):
        return self.D0.copy()

    def realization(self, a):
        """Slow-rate (period h) state-space realization at fixed taps."""
        return StateSpace(self.A, self.B, self.C_of(a), self.D0, dt=self.h)


def _check_target(g, which):
    if not isinstance(g, StateSpace):
        raise ValidationError(which, "expected a StateSpace")
    if g.is_discrete:
        raise ValidationError(which, "must be a continuous-time system")
    if g.n_inputs != 1 or g.n_outputs != 1:
        raise ValidationError(which, "must be SISO")
    if not g.is_stable():
        raise ValidationError(which, "must be stable (all poles in Re s < 0)")


def _check_characteristic(f):
    _check_target(f, "characteristic")
    if np.any(f.D != 0.0):
        raise ValidationError("characteristic", "must be strictly proper (D = 0)")


def _fir_tap_structure(M, L):
    """Shared state matrices and per-tap output bases of the lifted FIR.

    Returns (Ak, Bk, dC, dD) where the filter's lifted output blocks are
    Ck(a) = sum_k a_k dC[k] (L x (M-1)) and Dk(a) = sum_k a_k dD[k] (L x 1).
    """
    ms = M - 1
    A = np.zeros((ms, ms))
    if ms > 1:
        A[:-1, 1:] = np.eye(ms - 1)
    Bcol = np.zeros((ms, 1))
    if ms > 0:
        Bcol[-1, 0] = 1.0
    pw = [np.eye(ms)]
    for _ in range(L):
        pw.append(A @ pw[-1])
    Ak = pw[L]
    Bk = pw[L - 1] @ Bcol
    dC = np.zeros((M, L, ms))
    dD = np.zeros((M, L, 1))
    dD[0, 0, 0] = 1.0  # a_0 is the filter feedthrough
    for k in range(1, M):
        row = np.zeros(ms)
        row[ms - k] = 1.0  # position of a_k inside [a_{M-1} ... a_1]
        for i in range(L):
            dC[k, i] = row @ pw[i]
        for i in range(1, L):
            dD[k, i, 0] = float(row @ pw[i - 1] @ Bcol)
    return Ak, Bk, dC, dD


def build_multi_delay(terms, characteristic, h, M, L, N):
    """Error system for a sum of delayed targets sharing one tap grid.

    ``terms`` is a list of (delay_steps, target) pairs; each target is a
    stable continuous-time SISO system delayed by an integer number of
    slow sample periods.
    """
    if not h > 0:
        raise ValidationError("h", "sampling period must be positive")
    M, L, N = int(M), int(L), int(N)
    if M < 1:
        raise ValidationError("M", "filter length must be >= 1")
    if N < 1 or L < 1:
        raise ValidationError("N", "lifting factor and upsampling ratio must be >= 1")
    if N % L != 0:
        raise ValidationError("L", f"upsampling ratio L={L} must divide N={N}")
    if not terms:
        raise ValidationError("target", "at least one target term is required")
    _check_characteristic(characteristic)
    for i, (mi, gi) in enumerate(terms):
        if int(mi) != mi or mi < 0:
            raise ValidationError("m", f"delay step of term {i} must be a nonnegative integer")
        _check_target(gi, "target" if len(terms) == 1 else f"target[{i}]")

    fast = h / N
    f_lift = lift(zoh_discretize(characteristic, fast), N).inner
    # T2 = (first fast sample of) the lifted characteristic
    n_f = f_lift.n_states
    A2 = f_lift.A
    B2 = f_lift.B
    C2 = f_lift.C[:1, :]
    # the lifted feedthrough of a strictly proper system has a zero first row
    t1 = None
    for mi, gi in terms:
        g_lift = lift(zoh_discretize(gi, fast), N).inner
        term = delay_augment(series(g_lift, f_lift), int(mi))
        t1 = term if t1 is None else add(t1, term, +1)
    A1, B1, C1, D1 = t1.A, t1.B, t1.C, t1.D

    hold = make_multirate_hold(N, L)
    Ak, Bk, dC, dD = _fir_tap_structure(M, L)

    n1, n2, ms = A1.shape[0], n_f, M - 1
    n = n1 + n2 + ms
    A = np.zeros((n, n))
    A[:n1, :n1] = A1
    A[n1 : n1 + n2, n1 : n1 + n2] = A2
    A[n1 + n2 :, n1 : n1 + n2] = Bk @ C2
    A[n1 + n2 :, n1 + n2 :] = Ak
    B = np.vstack([B1, B2, np.zeros((ms, N))])
    C0 = np.zeros((N, n))
    C0[:, :n1] = C1
    C_lin = np.zeros((M, N, n))
    for k in range(M):
        C_lin[k, :, n1 : n1 + n2] = -hold @ dD[k] @ C2
        C_lin[k, :, n1 + n2 :] = -hold @ dC[k]
    m0 = int(terms[0][0]) if len(terms) == 1 else 0
    return AffineErrorSystem(
        A=A, B=B, C0=C0, C_lin=C_lin, D0=D1, M=M, N=N, h=float(h),
        m=m0, L=L, n_t1=n1, n_t2=n2,
    )


def build_single_rate(target, characteristic, h, m, M, N):
    """Single-rate error system: sampler and hold both run at period h."""
    return build_multi_delay([(int(m), target)], characteristic, h, M, 1, N)


def build_multi_rate(target, characteristic, h, m, M, L, N):
    """Multi-rate error system: the filter runs at h/L after upsampling by L.

    With L = 1 this reproduces :func:`build_single_rate` matrix for matrix.
    """
    return build_multi_delay([(int(m), target)], characteristic, h, M, L, N)
