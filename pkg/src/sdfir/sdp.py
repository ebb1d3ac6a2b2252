"""Dense LMI solver: minimize c^T x subject to affine symmetric blocks < 0.

The solver is a log-det barrier interior-point method: for barrier weight
tau it centers  tau * c^T x - sum_b log det(-F_b(x))  with damped Newton
steps and exact gradients/Hessians, then multiplies tau on a geometric
schedule until the duality-gap surrogate (total constraint rows / tau)
is below the requested tolerance.

Strict inequalities F(x) < 0 are made numerically checkable by shifting
every block by a small margin eps = epsilon_margin * dim at ingest, so
any returned point satisfies F(x) <= -eps*I with slack to spare; the
returned point is certified a posteriori with an independent Cholesky
factorization per block.

Two block representations are supported:

* :class:`AffineBlock` stores one dense symmetric coefficient matrix per
  decision variable (the standard trace-form gradient/Hessian).
* :class:`CongruenceBlock` additionally treats a packed symmetric matrix
  variable X entering as  W^T X W + sign * embed(X)  in closed form,
  which is what the bounded-real (KYP) inequality looks like.  Its
  barrier derivatives cost O(nvech^2) instead of O(nvech^2 * dim^2).

Callers are responsible for posing problems whose feasible sets are
bounded (for bounded-real problems this means adding an X <= rho*I box
block); an unbounded barrier subproblem ends in MAX_ITER.

A solve is single-threaded and deterministic for fixed options; there is
no shared state, so independent solves may run concurrently.
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
import scipy.linalg

from . import numerics

__all__ = [
    "SolverOptions",
    "SolveStatus",
    "SdpResult",
    "FeasStatus",
    "FeasibilityResult",
    "AffineBlock",
    "CongruenceBlock",
    "LmiProblem",
    "solve_min",
    "feasibility",
    "bounded_real_block",
    "kyp_feasibility_problem",
    "kyp_min_gamma_problem",
    "kyp_initial_point",
    "vech_dim",
    "vech_indices",
    "vech_pack",
    "vech_unpack",
]

_SYM_TOL = 1e-10  # ingest symmetrization tolerance for block data


# --------------------------------------------------------------------------
# vech packing of symmetric matrix variables
#
# A symmetric n x n variable X is packed row-major over the upper triangle
# (p <= q).  The basis matrix of an off-diagonal entry is
# e_p e_q^T + e_q e_p^T, of a diagonal entry e_p e_p^T.
# --------------------------------------------------------------------------

def vech_dim(n):
    return n * (n + 1) // 2


def vech_indices(n):
    """Row/column index arrays of the packed upper triangle."""
    return np.triu_indices(n)


def vech_pack(X):
    X = np.asarray(X, dtype=float)
    r, c = vech_indices(X.shape[0])
    return X[r, c].copy()


def vech_unpack(v, n):
    X = np.zeros((n, n))
    r, c = vech_indices(n)
    X[r, c] = v
    X[c, r] = v
    return X


# --------------------------------------------------------------------------
# constraint blocks
# --------------------------------------------------------------------------

def _sym_ingest(M, name):
    M = numerics.as_square(np.atleast_2d(np.asarray(M, dtype=float)), name)
    if M.size:
        scale = max(float(np.max(np.abs(M))), 1.0)
        if float(np.max(np.abs(M - M.T))) > _SYM_TOL * scale:
            raise ValueError(f"{name} must be symmetric")
    return 0.5 * (M + M.T)


class AffineBlock:
    """F(x) = F0 + sum_i x[support[i]] * coeffs[i], required negative definite."""

    def __init__(self, F0, coeffs, support):
        self.F0 = _sym_ingest(F0, "F0")
        d = self.F0.shape[0]
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.size == 0:
            coeffs = np.zeros((0, d, d))
        if coeffs.ndim != 3 or coeffs.shape[1:] != (d, d):
            raise ValueError(f"coefficients must have shape (k, {d}, {d})")
        self.coeffs = 0.5 * (coeffs + coeffs.transpose(0, 2, 1))
        for i in range(coeffs.shape[0]):
            if np.max(np.abs(coeffs[i] - coeffs[i].T)) > _SYM_TOL * max(
                1.0, float(np.max(np.abs(coeffs[i])))
            ):
                raise ValueError(f"coefficient {i} must be symmetric")
        self.support = np.asarray(support, dtype=int).ravel()
        if self.support.size != self.coeffs.shape[0]:
            raise ValueError("support and coefficients disagree in length")

    @classmethod
    def from_full(cls, F0, Fi):
        """Build from one coefficient matrix per decision variable."""
        Fi = np.asarray(Fi, dtype=float)
        return cls(F0, Fi, np.arange(Fi.shape[0]))

    @property
    def dim(self):
        return self.F0.shape[0]

    def shifted(self, eps):
        blk = AffineBlock(self.F0 + eps * np.eye(self.dim), self.coeffs, self.support)
        return blk

    def with_extra_dense(self, var_index, coeff):
        coeffs = np.concatenate([self.coeffs, np.asarray(coeff, dtype=float)[None]])
        support = np.concatenate([self.support, [var_index]])
        return AffineBlock(self.F0, coeffs, support)

    def eval(self, x):
        F = self.F0.copy()
        if self.support.size:
            F += np.tensordot(x[self.support], self.coeffs, axes=(0, 0))
        return F

    def add_grad(self, S, g):
        if self.support.size:
            g[self.support] += np.einsum("iab,ab->i", self.coeffs, S)

    def add_hess(self, S, H):
        k = self.support.size
        if k == 0:
            return
        G = np.matmul(S, self.coeffs)  # G_i = S F_i
        Gv = G.reshape(k, -1)
        GvT = np.ascontiguousarray(G.transpose(0, 2, 1)).reshape(k, -1)
        Hb = Gv @ GvT.T
        Hb = 0.5 * (Hb + Hb.T)
        H[np.ix_(self.support, self.support)] += Hb


class CongruenceBlock:
    """Affine block with a packed symmetric matrix variable in congruence form.

    F(x) = F0 + sum_i x[dense_support[i]] * dense_coeffs[i]
              + W^T X W  (if W is given)
              + sign * embed(X at [offset:offset+n] on the diagonal),

    where X = unpack(x[sym_support]) is n x n symmetric.
    """

    def __init__(self, F0, dense_coeffs, dense_support, sym_support, n_sym,
                 W=None, sign=-1, offset=0):
        self.F0 = _sym_ingest(F0, "F0")
        d = self.F0.shape[0]
        dense_coeffs = np.asarray(dense_coeffs, dtype=float)
        if dense_coeffs.size == 0:
            dense_coeffs = np.zeros((0, d, d))
        self.dense_coeffs = 0.5 * (dense_coeffs + dense_coeffs.transpose(0, 2, 1))
        self.dense_support = np.asarray(dense_support, dtype=int).ravel()
        if self.dense_support.size != self.dense_coeffs.shape[0]:
            raise ValueError("dense support and coefficients disagree in length")
        self.sym_support = np.asarray(sym_support, dtype=int).ravel()
        self.n_sym = int(n_sym)
        if self.sym_support.size != vech_dim(self.n_sym):
            raise ValueError("sym_support must index a full packed triangle")
        if sign not in (-1, +1):
            raise ValueError("sign must be +1 or -1")
        self.sign = float(sign)
        self.offset = int(offset)
        if self.offset < 0 or self.offset + self.n_sym > d:
            raise ValueError("embedded block exceeds the block dimension")
        if W is not None:
            W = np.asarray(W, dtype=float)
            if W.shape != (self.n_sym, d):
                raise ValueError(f"W must be {self.n_sym} x {d}, got {W.shape}")
        self.W = W
        r, c = vech_indices(self.n_sym)
        self._r, self._c = r, c
        self._wgrad = np.where(r == c, 1.0, 2.0)
        self._alpha = np.where(r == c, 0.5, 1.0)
        # flat gather indices for the packed-variable Hessian
        n = self.n_sym
        self._idx_cr = (c[:, None] * n + r[None, :]).ravel()
        self._idx_rc = (r[:, None] * n + c[None, :]).ravel()
        self._idx_cc = (c[:, None] * n + c[None, :]).ravel()
        self._idx_rr = (r[:, None] * n + r[None, :]).ravel()
        sup = self.sym_support
        self._sym_slice = None
        if sup.size and np.all(np.diff(sup) == 1):
            self._sym_slice = slice(int(sup[0]), int(sup[-1]) + 1)

    @property
    def dim(self):
        return self.F0.shape[0]

    def shifted(self, eps):
        return CongruenceBlock(
            self.F0 + eps * np.eye(self.dim), self.dense_coeffs, self.dense_support,
            self.sym_support, self.n_sym, W=self.W, sign=int(self.sign),
            offset=self.offset,
        )

    def with_extra_dense(self, var_index, coeff):
        coeffs = np.concatenate(
            [self.dense_coeffs, np.asarray(coeff, dtype=float)[None]]
        )
        support = np.concatenate([self.dense_support, [var_index]])
        return CongruenceBlock(
            self.F0, coeffs, support, self.sym_support, self.n_sym,
            W=self.W, sign=int(self.sign), offset=self.offset,
        )

    def _unpack(self, x):
        return vech_unpack(x[self.sym_support], self.n_sym)

    def eval(self, x):
        F = self.F0.copy()
        if self.dense_support.size:
            F += np.tensordot(x[self.dense_support], self.dense_coeffs, axes=(0, 0))
        X = self._unpack(x)
        o, n = self.offset, self.n_sym
        F[o : o + n, o : o + n] += self.sign * X
        if self.W is not None:
            F += self.W.T @ X @ self.W
        return F

    # With slack inverse S = (-F)^-1 the barrier derivatives in the packed
    # variable only involve the three n x n matrices
    #   T = W S W^T,  K = W S E^T,  J = E S E^T,
    # where E selects the embedded diagonal block.
    def _tkj(self, S):
        o, n = self.offset, self.n_sym
        J = S[o : o + n, o : o + n]
        if self.W is None:
            return None, None, J
        WS = self.W @ S
        return WS @ self.W.T, WS[:, o : o + n], J

    def add_grad(self, S, g):
        if self.dense_support.size:
            g[self.dense_support] += np.einsum("iab,ab->i", self.dense_coeffs, S)
        T, _, J = self._tkj(S)
        G = self.sign * J if T is None else T + self.sign * J
        g[self.sym_support] += self._wgrad * G[self._r, self._c]

    def _quad_term(self, M, acc=None):
        # tr(basis_pq M basis_rs M^T) summed over both orientations of each
        # basis element: 2 * (M[q,r] M[p,s]-type products) as full gathers.
        nv = self._r.size
        flat = M.ravel()
        t1 = flat[self._idx_cr].reshape(nv, nv)
        t1 *= flat[self._idx_rc].reshape(nv, nv)
        t2 = flat[self._idx_cc].reshape(nv, nv)
        t2 *= flat[self._idx_rr].reshape(nv, nv)
        t1 += t2
        t1 *= 2.0
        if acc is None:
            return t1
        acc += t1
        return acc

    def add_hess(self, S, H):
        r, c = self._r, self._c
        T, K, J = self._tkj(S)
        # An all-but-inactive constraint (e.g. a wide box) contributes
        # entries of order max^2, negligible against the running Hessian
        # diagonal; skip the expensive packed-variable part then.
        mx = max(float(np.max(np.abs(M))) for M in (T, K, J) if M is not None)
        href = float(np.max(np.abs(np.diagonal(H)), initial=0.0))
        if 8.0 * mx * mx >= 1e-14 * href:
            # symmetric-variable part
            Hs = self._quad_term(J)
            if T is not None:
                self._quad_term(T, acc=Hs)
                Z = self._quad_term(K)
                if self.sign < 0:
                    Hs -= Z
                    Hs -= Z.T
                else:
                    Hs += Z
                    Hs += Z.T
            aa = self._alpha
            Hs *= aa[:, None]
            Hs *= aa[None, :]
            if self._sym_slice is not None:
                H[self._sym_slice, self._sym_slice] += Hs
            else:
                H[np.ix_(self.sym_support, self.sym_support)] += Hs
        # dense part and the dense/symmetric coupling
        k = self.dense_support.size
        if k == 0:
            return
        Ys = np.matmul(np.matmul(S, self.dense_coeffs), S)  # Y_i = S F_i S
        Hdd = np.einsum("iab,jab->ij", self.dense_coeffs, Ys)
        H[np.ix_(self.dense_support, self.dense_support)] += 0.5 * (Hdd + Hdd.T)
        o, n = self.offset, self.n_sym
        cross = np.empty((k, self.sym_support.size))
        for i in range(k):
            Mi = self.sign * Ys[i][o : o + n, o : o + n]
            if self.W is not None:
                Mi = Mi + self.W @ Ys[i] @ self.W.T
            cross[i] = self._wgrad * Mi[r, c]
        H[np.ix_(self.dense_support, self.sym_support)] += cross
        H[np.ix_(self.sym_support, self.dense_support)] += cross.T


@dataclass
class LmiProblem:
    """Linear objective over scalar decision variables under blocks < 0."""

    num_vars: int
    objective: np.ndarray
    blocks: list

    def __post_init__(self):
        c = np.zeros(self.num_vars) if self.objective is None else np.asarray(
            self.objective, dtype=float
        ).ravel()
        if c.size != self.num_vars:
            raise ValueError("objective length must equal num_vars")
        self.objective = c
        for b in self.blocks:
            for sup in (getattr(b, "support", None), getattr(b, "dense_support", None),
                        getattr(b, "sym_support", None)):
                if sup is not None and sup.size and (
                    sup.min() < 0 or sup.max() >= self.num_vars
                ):
                    raise ValueError("block refers to variables outside the problem")


# --------------------------------------------------------------------------
# solver options and results
# --------------------------------------------------------------------------

@dataclass
class SolverOptions:
    """Knobs of the barrier solver (all exposed through the CLI config)."""

    gap_tol: float = 1e-7
    max_newton: int = 200
    barrier_mult: float = 10.0
    epsilon_margin: float | None = None  # None: 1e-8 per constraint row
    x_bound: float = 1e7  # box X <= x_bound*I used by the problem builders
    center_tol: float = 1e-6
    tau0: float | None = None  # None: match the barrier gradient at the start

    def margin(self, dim):
        if self.epsilon_margin is not None:
            return float(self.epsilon_margin)
        return 1e-8 * dim


class SolveStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    MAX_ITER = "max_iter"


class FeasStatus(Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    INDETERMINATE = "indeterminate"


@dataclass
class SdpResult:
    x_opt: np.ndarray
    objective_value: float
    status: SolveStatus
    max_block_eig: float
    iterations: int
    objective_history: list = field(default_factory=list)
    phase1_used: bool = False

    def gamma(self):
        return float(self.x_opt[0])


@dataclass
class FeasibilityResult:
    status: FeasStatus
    x: np.ndarray | None
    iterations: int = 0
    # best certified localization of min_x max-eig shift t when undecided:
    # the optimum lies in [t_value - gap_bound, t_value]
    t_value: float = math.nan
    gap_bound: float = math.inf


# --------------------------------------------------------------------------
# barrier machinery
# --------------------------------------------------------------------------

def _slack_chols(blocks, x):
    """Cholesky factors of -F_b(x) for all blocks, or None if infeasible."""
    Ls = []
    for b in blocks:
        P = -b.eval(x)
        if P.size == 0:
            Ls.append(P)
            continue
        P = 0.5 * (P + P.T)
        try:
            Ls.append(np.linalg.cholesky(P))
        except np.linalg.LinAlgError:
            return None
    return Ls


def _barrier_value(Ls):
    return -2.0 * sum(float(np.sum(np.log(np.diag(L)))) for L in Ls if L.size)


def _slack_inverses(Ls):
    out = []
    for L in Ls:
        if L.size == 0:
            out.append(np.zeros((0, 0)))
            continue
        S = scipy.linalg.cho_solve((L, True), np.eye(L.shape[0]), check_finite=False)
        out.append(0.5 * (S + S.T))
    return out


def _solve_newton_system(H, g):
    n = H.shape[0]
    jitter = 0.0
    base = max(float(np.trace(H)) / max(n, 1), 1.0)
    for attempt in range(4):
        try:
            cf = scipy.linalg.cho_factor(
                H + jitter * np.eye(n), lower=True, check_finite=False
            )
            dx = -scipy.linalg.cho_solve(cf, g, check_finite=False)
            if np.all(np.isfinite(dx)):
                return dx
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
            pass
        jitter = base * (1e-14 if attempt == 0 else jitter / base * 100.0)
    return None


# A line search that cannot make float64 progress while the Newton
# decrement is below this level counts as centered: the duality-gap
# surrogate carries a 2x safety factor for such approximate centers.
_STALL_LAMBDA = 5e-2


def _center(blocks, c_vec, tau, x, Ls, budget, opts, stop_when=None):
    """Newton centering of tau*c^T x + barrier with backtracking line search.

    Returns (x, Ls, steps_used, converged, early_stop).  A line search
    that can no longer make float64 progress counts as converged when
    the Newton decrement is already small.
    """
    nv = x.size
    for it in range(budget):
        if stop_when is not None and stop_when(x):
            return x, Ls, it, False, True
        Ss = _slack_inverses(Ls)
        g = tau * c_vec.copy()
        H = np.zeros((nv, nv))
        for b, S in zip(blocks, Ss):
            b.add_grad(S, g)
            b.add_hess(S, H)
        dx = _solve_newton_system(H, g)
        if dx is None:
            return x, Ls, it, False, False
        slope = float(g @ dx)
        lam2 = -slope
        if not math.isfinite(lam2):
            return x, Ls, it, False, False
        if lam2 <= opts.center_tol**2:
            return x, Ls, it, True, False
        lam = math.sqrt(abs(lam2))
        if slope >= 0:  # not a descent direction: Hessian solve broke down
            return x, Ls, it, lam <= _STALL_LAMBDA, False
        f0 = tau * float(c_vec @ x) + _barrier_value(Ls)
        t = 1.0
        accepted = False
        for _ in range(60):
            x_new = x + t * dx
            Ls_new = _slack_chols(blocks, x_new)
            if Ls_new is not None:
                f_new = tau * float(c_vec @ x_new) + _barrier_value(Ls_new)
                if f_new <= f0 + 0.25 * t * slope:
                    x, Ls = x_new, Ls_new
                    accepted = True
                    break
            t *= 0.5
        if not accepted or t <= 2.0**-20:
            # float64 progress floor; small decrement = centered enough
            return x, Ls, it + 1, lam <= _STALL_LAMBDA, False
    return x, Ls, budget, False, False


def _path_follow(blocks, c_vec, x, opts, budget, stop_when=None):
    """Follow the central path until the gap surrogate is small.

    Intermediate stages only center loosely (enough to stay in the
    Newton convergence region); the final stage centers to center_tol.
    Returns (x, converged, history, steps, early, lower_bound) where
    lower_bound is a certified bound c^T x - nu/tau at the last center.
    """
    Ls = _slack_chols(blocks, x)
    if Ls is None:
        raise ValueError("path following started at an infeasible point")
    nu = sum(b.dim for b in blocks)
    if opts.tau0 is not None:
        tau = opts.tau0
    else:
        # weight at which the start is closest to the central path:
        # least-squares match of tau*c + grad(barrier) = 0
        gphi = np.zeros(x.size)
        for b, S in zip(blocks, _slack_inverses(Ls)):
            b.add_grad(S, gphi)
        cc = float(c_vec @ c_vec)
        tau = -float(c_vec @ gphi) / cc if cc > 0 else 1.0
        tau = min(max(tau, 1e-8), 1e8) if math.isfinite(tau) and tau > 0 else 1.0
    history = []
    steps = 0
    target = 0.2 * opts.gap_tol
    lower = -np.inf
    loose = replace(opts, center_tol=_STALL_LAMBDA)
    while True:
        final = nu / tau <= target
        x, Ls, used, ok, early = _center(
            blocks, c_vec, tau, x, Ls, budget - steps,
            opts if final else loose, stop_when,
        )
        steps += used
        history.append(float(c_vec @ x))
        if early:
            return x, True, history, steps, True, lower
        if ok:
            lower = float(c_vec @ x) - 2.0 * nu / tau
        if final and ok:
            return x, True, history, steps, False, lower
        if steps >= budget or not ok:
            # a stalled centering still counts when the surrogate already
            # meets the full (uncut) tolerance
            converged = nu / tau <= opts.gap_tol
            return x, converged, history, steps, False, lower
        tau *= opts.barrier_mult


def _phase1(blocks, x0, opts, budget, feas_margin):
    """Minimize t over F_b(x) - t*I < 0 to find a strictly feasible x.

    Returns (x or None, FeasStatus, steps, t_value, gap_bound) where the
    last two localize the optimal shift when the search stays undecided.
    """
    nv = x0.size
    ext = [b.with_extra_dense(nv, -np.eye(b.dim)) for b in blocks]
    worst = -np.inf
    for b in blocks:
        F = b.eval(x0)
        if F.size:
            worst = max(worst, float(np.linalg.eigvalsh(F)[-1]))
    if worst == -np.inf:
        return x0, FeasStatus.FEASIBLE, 0, -math.inf, 0.0
    t0 = worst + max(1.0, 0.1 * abs(worst))
    y = np.concatenate([x0, [t0]])
    c_ext = np.zeros(nv + 1)
    c_ext[nv] = 1.0
    nu = sum(b.dim for b in ext)
    # start where the barrier does not dominate the auxiliary objective
    tau = nu / max(1.0, t0) if opts.tau0 is None else max(opts.tau0, nu / max(1.0, t0))
    Ls = _slack_chols(ext, y)
    if Ls is None:
        return None, FeasStatus.INDETERMINATE, 0, math.nan, math.inf
    steps = 0
    exit_level = -feas_margin
    t_best, gap_best = math.nan, math.inf

    def stop_when(yv):
        return yv[nv] <= exit_level

    while True:
        y, Ls, used, ok, early = _center(
            ext, c_ext, tau, y, Ls, budget - steps, opts, stop_when
        )
        steps += used
        t = float(y[nv])
        if early or t <= exit_level:
            return y[:nv].copy(), FeasStatus.FEASIBLE, steps, t, 0.0
        if ok:
            # 2x on the gap bound absorbs the slack of approximate centering
            gap = 2.0 * nu / tau
            if gap < gap_best:
                t_best, gap_best = t, gap
            if t - gap > exit_level:
                return None, FeasStatus.INFEASIBLE, steps, t, gap
        if steps >= budget or not ok:
            return None, FeasStatus.INDETERMINATE, steps, t_best, gap_best
        tau *= opts.barrier_mult


def _shift_blocks(blocks, opts):
    return [b.shifted(opts.margin(b.dim)) for b in blocks]


def _certify(problem, x, opts):
    """Independent check that every user block satisfies F(x) <= -eps*I."""
    worst = -np.inf
    ok = True
    for b in problem.blocks:
        F = b.eval(x)
        if F.size == 0:
            continue
        worst = max(worst, float(np.linalg.eigvalsh(F)[-1]))
        eps = opts.margin(b.dim)
        if numerics.try_cholesky_pd(-F - eps * np.eye(b.dim), rtol=1e-6) is None:
            ok = False
    return ok, worst


def solve_min(problem, opts=None, x0=None):
    """Minimize the linear objective of ``problem`` over its blocks.

    ``x0`` may supply a strictly feasible start; otherwise a Phase-I
    search runs first and an unreachable interior yields INFEASIBLE.
    """
    opts = opts or SolverOptions()
    if problem.num_vars < 1:
        raise ValueError("solve_min needs at least one decision variable")
    blocks = _shift_blocks(problem.blocks, opts)
    x = np.zeros(problem.num_vars) if x0 is None else np.asarray(x0, dtype=float).copy()
    steps0 = 0
    phase1_used = False
    if _slack_chols(blocks, x) is None:
        phase1_used = True
        feas_margin = 0.25 * min(opts.margin(b.dim) for b in blocks)
        x, st, steps0, _, _ = _phase1(blocks, x, opts, opts.max_newton, feas_margin)
        if st is not FeasStatus.FEASIBLE:
            return SdpResult(
                x_opt=np.full(problem.num_vars, np.nan),
                objective_value=np.nan,
                status=SolveStatus.INFEASIBLE if st is FeasStatus.INFEASIBLE
                else SolveStatus.MAX_ITER,
                max_block_eig=np.nan,
                iterations=steps0,
                phase1_used=True,
            )
    x, converged, history, steps, _, _ = _path_follow(
        blocks, problem.objective, x, opts, opts.max_newton - steps0
    )
    cert_ok, worst = _certify(problem, x, opts)
    status = SolveStatus.OPTIMAL if (converged and cert_ok) else SolveStatus.MAX_ITER
    return SdpResult(
        x_opt=x,
        objective_value=float(problem.objective @ x),
        status=status,
        max_block_eig=worst,
        iterations=steps0 + steps,
        objective_history=history,
        phase1_used=phase1_used,
    )


def feasibility(problem, opts=None, x0=None):
    """Decide strict feasibility of the blocks (the objective is ignored).

    FEASIBLE comes with an interior point satisfying every block
    F(x) <= -eps*I; INDETERMINATE (budget exhausted) is distinct from
    INFEASIBLE and asks the caller to widen tolerances.
    """
    opts = opts or SolverOptions()
    blocks = _shift_blocks(problem.blocks, opts)
    if problem.num_vars == 0:
        ok = _slack_chols(blocks, np.zeros(0)) is not None
        return FeasibilityResult(
            FeasStatus.FEASIBLE if ok else FeasStatus.INFEASIBLE,
            np.zeros(0) if ok else None,
        )
    x = np.zeros(problem.num_vars) if x0 is None else np.asarray(x0, dtype=float).copy()
    if _slack_chols(blocks, x) is not None:
        return FeasibilityResult(FeasStatus.FEASIBLE, x)
    feas_margin = 0.25 * min(opts.margin(b.dim) for b in blocks)
    x, st, steps, t_val, gap = _phase1(blocks, x, opts, opts.max_newton, feas_margin)
    return FeasibilityResult(
        st, x if st is FeasStatus.FEASIBLE else None, steps, t_val, gap
    )


# --------------------------------------------------------------------------
# bounded-real (KYP) problem builders
# --------------------------------------------------------------------------

def bounded_real_block(A, B, C0, D0, sym_support, *, gamma_value=None,
                       gamma_index=None, dense=()):
    """The bounded-real inequality as one CongruenceBlock.

    [[A'XA - X, A'XB, C'], [B'XA, B'XB - g I, D'], [C, D, -g I]] < 0 with
    X packed on ``sym_support``.  The level g is fixed (``gamma_value``)
    or the decision variable at ``gamma_index``.  ``dense`` lists extra
    (var_index, coefficient matrix) pairs, e.g. filter-tap terms entering
    the C rows affinely.
    """
    n, q = B.shape
    p = C0.shape[0]
    d = n + q + p
    F0 = np.zeros((d, d))
    F0[n + q :, :n] = C0
    F0[:n, n + q :] = C0.T
    F0[n + q :, n : n + q] = D0
    F0[n : n + q, n + q :] = D0.T
    coeffs = []
    support = []
    if gamma_index is not None:
        Fg = np.zeros((d, d))
        Fg[n:, n:] = -np.eye(q + p)
        coeffs.append(Fg)
        support.append(int(gamma_index))
    elif gamma_value is not None:
        F0[n:, n:] -= float(gamma_value) * np.eye(q + p)
    else:
        raise ValueError("one of gamma_value or gamma_index is required")
    for idx, mat in dense:
        coeffs.append(np.asarray(mat, dtype=float))
        support.append(int(idx))
    W = np.hstack([A, B, np.zeros((n, p))])
    return CongruenceBlock(
        F0, np.asarray(coeffs), np.asarray(support, dtype=int),
        sym_support, n, W=W, sign=-1, offset=0,
    )


def _sym_box_blocks(sym_support, n, x_bound):
    """-X < 0 and X - rho*I < 0; the box keeps barrier subproblems bounded."""
    neg = CongruenceBlock(
        np.zeros((n, n)), (), (), sym_support, n, W=None, sign=-1, offset=0
    )
    box = CongruenceBlock(
        -float(x_bound) * np.eye(n), (), (), sym_support, n, W=None, sign=+1, offset=0
    )
    return [neg, box]


def kyp_feasibility_problem(A, B, C, D, gamma, opts=None):
    """LmiProblem testing whether the bounded-real inequality holds at gamma.

    Variables are the packed Lyapunov matrix X alone.  For a zero-state
    system the problem has no variables and reduces to a constant block.
    """
    opts = opts or SolverOptions()
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    C = np.atleast_2d(np.asarray(C, dtype=float))
    D = np.atleast_2d(np.asarray(D, dtype=float))
    n, q = B.shape
    p = C.shape[0]
    if n == 0:
        F0 = np.zeros((q + p, q + p))
        F0[q:, :q] = D
        F0[:q, q:] = D.T
        F0 -= float(gamma) * np.eye(q + p)
        return LmiProblem(0, None, [AffineBlock(F0, (), ())])
    nv = vech_dim(n)
    sym_support = np.arange(nv)
    blocks = [bounded_real_block(A, B, C, D, sym_support, gamma_value=float(gamma))]
    blocks += _sym_box_blocks(sym_support, n, opts.x_bound)
    return LmiProblem(nv, None, blocks)


def kyp_min_gamma_problem(A, B, C, D, opts=None):
    """(problem, x0): minimize gamma over the bounded-real inequality.

    Decision vector is (gamma, vech X); x0 is a strictly feasible start
    built from a discrete Lyapunov solve.
    """
    opts = opts or SolverOptions()
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    C = np.atleast_2d(np.asarray(C, dtype=float))
    D = np.atleast_2d(np.asarray(D, dtype=float))
    n = A.shape[0]
    nv = 1 + vech_dim(n)
    c = np.zeros(nv)
    c[0] = 1.0
    sym_support = np.arange(1, nv)
    eps = opts.margin(n + B.shape[1] + C.shape[0])
    X0, gamma0 = kyp_initial_point(A, B, C, D, eps)
    if n == 0:
        F0 = np.zeros((B.shape[1] + C.shape[0],) * 2)
        q = B.shape[1]
        F0[q:, :q] = D
        F0[:q, q:] = D.T
        Fg = -np.eye(F0.shape[0])
        problem = LmiProblem(1, np.ones(1), [AffineBlock(F0, Fg[None], [0])])
        return problem, np.array([gamma0])
    blocks = [bounded_real_block(A, B, C, D, sym_support, gamma_index=0)]
    blocks += _sym_box_blocks(sym_support, n, opts.x_bound)
    problem = LmiProblem(nv, c, blocks)
    x0 = np.concatenate([[gamma0], vech_pack(X0)])
    return problem, x0


def _schur_gamma_at(A, B, C0, D0, X, eps):
    """Exact least gamma making the bounded-real block of X negative definite.

    Requires the (1,1) block A'XA - X + eps*I to be negative definite;
    returns +inf otherwise.
    """
    n, q = B.shape
    p = C0.shape[0]
    M11 = A.T @ X @ A - X + eps * np.eye(n)
    L = numerics.try_cholesky_pd(-M11, rtol=np.inf)
    if L is None:
        return math.inf
    stack = np.vstack([B.T @ X @ A, C0])  # rows coupling to the state block
    const = np.zeros((q + p, q + p))
    const[:q, :q] = B.T @ X @ B
    const[q:, :q] = D0
    const[:q, q:] = D0.T
    const += eps * np.eye(q + p)
    sol = scipy.linalg.cho_solve((L, True), stack.T, check_finite=False)
    const += stack @ sol
    return float(np.linalg.eigvalsh(const)[-1])


def kyp_initial_point(A, B, C0, D0, eps, level_hint=None):
    """Strictly feasible (X0, gamma0) for the bounded-real inequality.

    Starts from a scaled solution of A^T X A - X = -I (scale picked on a
    log grid to minimize the exact Schur-complement gamma threshold),
    then tightens with bounded-real Riccati solves (gamma^2 convention;
    rescaled for this LMI's gamma form) blended with the Lyapunov term.
    ``level_hint``, when given, is tried as a Riccati level first; a hint
    slightly above the a-priori norm makes the start nearly tight.
    """
    n, q = B.shape
    if n == 0:
        d_gain = scipy.linalg.svdvals(D0)[0] if D0.size else 0.0
        return np.zeros((0, 0)), 1.05 * float(d_gain) + 1e-6 + 2 * eps
    X_l = scipy.linalg.solve_discrete_lyapunov(A.T, np.eye(n), method="bilinear")
    X_l = 0.5 * (X_l + X_l.T)
    scales = 10.0 ** np.linspace(-6, 6, 49)
    scales = scales[scales > 4 * eps]
    best_s = min(scales, key=lambda s: _schur_gamma_at(A, B, C0, D0, s * X_l, eps))
    X_best = best_s * X_l
    g_best = _schur_gamma_at(A, B, C0, D0, X_best, eps)
    rhos = 10.0 ** np.linspace(-8, 0, 17)

    def riccati_blend(level):
        """Best (X, gamma) from the Riccati solution at one level."""
        try:
            X_r = scipy.linalg.solve_discrete_are(
                A, B, C0.T @ C0, D0.T @ D0 - level**2 * np.eye(q), s=C0.T @ D0
            )
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, ValueError):
            return None
        X_r = 0.5 * (X_r + X_r.T) / level
        out = None
        for rho in rhos:
            g_c = _schur_gamma_at(A, B, C0, D0, X_r + rho * X_l, eps)
            if math.isfinite(g_c) and (out is None or g_c < out[1]):
                out = (X_r + rho * X_l, g_c)
        return out

    if level_hint is not None and level_hint > 0:
        hit = riccati_blend(float(level_hint))
        if hit is not None and hit[1] < g_best:
            X_best, g_best = hit
    for _ in range(30):
        hit = riccati_blend(g_best)
        if hit is None or hit[1] >= 0.98 * g_best:
            break
        X_best, g_best = hit
    gamma0 = 1.02 * g_best + 1e-6
    return X_best, gamma0
