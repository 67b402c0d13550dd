"""Small dense LP and transportation solvers.

The two solvers are deliberately independent: :func:`solve_lp` is a two-phase
tableau simplex with Bland's smallest-index rule, :func:`solve_transportation`
is a successive-shortest-augmenting-path method on the bipartite residual
graph. Each serves as the other's oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._config import resolve
from .exceptions import DomainError, SolverError

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
STALLED = "stalled"

_PIVOT_EPS = 1e-11


@dataclass
class LinearProgram:
    """``maximize c @ x`` subject to ``A_ub @ x <= b_ub``, ``A_eq @ x == b_eq``, bounds.

    ``bounds`` is a list of ``(lo, hi)`` pairs, ``None`` meaning unbounded on
    that side. The default is ``(0, None)`` for every variable.
    """

    c: np.ndarray
    A_ub: Optional[np.ndarray] = None
    b_ub: Optional[np.ndarray] = None
    A_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None
    bounds: Optional[list] = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        self.A_ub, self.b_ub = _rows(self.A_ub, self.b_ub, n, "ub")
        self.A_eq, self.b_eq = _rows(self.A_eq, self.b_eq, n, "eq")
        if self.bounds is None:
            self.bounds = [(0.0, None)] * n
        if len(self.bounds) != n:
            raise DomainError("bounds length must equal the number of variables")

    @property
    def n_vars(self):
        return self.c.size


def _rows(A, b, n, label):
    if A is None:
        return np.zeros((0, n)), np.zeros(0)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    if A.shape[1] != n:
        raise DomainError(f"A_{label} rows must have {n} entries, got {A.shape[1]}")
    if A.shape[0] != b.size:
        raise DomainError(f"A_{label} and b_{label} disagree on the number of rows")
    if not np.all(np.isfinite(b)):
        raise DomainError(f"b_{label} must be finite")
    return A, b


@dataclass
class LPResult:
    status: str
    value: Optional[float]
    x: Optional[np.ndarray]
    duals_ub: Optional[np.ndarray] = None
    duals_eq: Optional[np.ndarray] = None
    iterations: int = 0
    tableau: Optional[str] = field(default=None, repr=False)

    @property
    def optimal(self):
        return self.status == OPTIMAL


def _standard_form(lp):
    """Rewrite bounds so every variable is nonnegative: ``x = T @ x' + t0``."""
    n = lp.n_vars
    cols = []
    t0 = np.zeros(n)
    extra_rows = []  # (column index in x', upper bound)
    for j, (lo, hi) in enumerate(lp.bounds):
        lo = -math.inf if lo is None else float(lo)
        hi = math.inf if hi is None else float(hi)
        if lo > hi:
            return None
        if math.isfinite(lo):
            t0[j] = lo
            cols.append((j, 1.0))
            if math.isfinite(hi):
                extra_rows.append((len(cols) - 1, hi - lo))
        elif math.isfinite(hi):
            t0[j] = hi
            cols.append((j, -1.0))
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))
    T = np.zeros((n, len(cols)))
    for k, (j, s) in enumerate(cols):
        T[j, k] = s
    A_ub = lp.A_ub @ T
    b_ub = lp.b_ub - lp.A_ub @ t0
    if extra_rows:
        E = np.zeros((len(extra_rows), T.shape[1]))
        for r, (k, ub) in enumerate(extra_rows):
            E[r, k] = 1.0
        A_ub = np.vstack([A_ub, E])
        b_ub = np.concatenate([b_ub, [ub for _, ub in extra_rows]])
    A_eq = lp.A_eq @ T
    b_eq = lp.b_eq - lp.A_eq @ t0
    return T, t0, A_ub, b_ub, A_eq, b_eq


class _Tableau:
    """Dense simplex tableau (``maximize``) with Bland's rule."""

    def __init__(self, A, b, basis, max_iter):
        self.T = np.hstack([A, b[:, None]])
        self.basis = list(basis)
        self.iterations = 0
        self.max_iter = max_iter

    def reduced_costs(self, w):
        wb = w[self.basis]
        return w - wb @ self.T[:, :-1]

    def pivot(self, r, j):
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        self.basis[r] = j

    def run(self, w, allowed, eps):
        """Optimize ``w``; returns a status string."""
        while True:
            if self.iterations >= self.max_iter:
                return STALLED
            rc = self.reduced_costs(w)
            cand = np.flatnonzero((rc > eps) & allowed)
            if cand.size == 0:
                return OPTIMAL
            j = int(cand[0])  # smallest index entering
            colj = self.T[:, j]
            pos = np.flatnonzero(colj > _PIVOT_EPS)
            if pos.size == 0:
                return UNBOUNDED
            ratios = self.T[pos, -1] / colj[pos]
            best = ratios.min()
            ties = pos[ratios <= best + 1e-12 * max(1.0, abs(best))]
            r = int(min(ties, key=lambda i: self.basis[i]))  # smallest basic index leaves
            self.pivot(r, j)
            self.iterations += 1

    def dump(self, names):
        lines = ["basis | " + " ".join(f"{s:>10}" for s in names) + " |        rhs"]
        for i, row in enumerate(self.T):
            lines.append(f"{names[self.basis[i]]:>5} | " + " ".join(f"{v:10.4g}" for v in row[:-1])
                         + f" | {row[-1]:10.4g}")
        return "\n".join(lines)


def solve_lp(lp, tol=None, max_iter=None, keep_tableau=False):
    """Solve a :class:`LinearProgram` by two-phase simplex.

    Returns an :class:`LPResult` whose status is one of ``optimal``,
    ``infeasible``, ``unbounded`` or ``stalled`` (iteration cap reached; no
    value is returned in that case).
    """
    tol = resolve(tol)
    sf = _standard_form(lp)
    if sf is None:
        return LPResult(INFEASIBLE, None, None)
    T, t0, A_ub, b_ub, A_eq, b_eq = sf
    n_s = T.shape[1]
    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq

    # rows: [A_ub | I_slack] and [A_eq | 0]; rows with negative rhs are negated
    A = np.zeros((m, n_s + m_ub))
    A[:m_ub, :n_s] = A_ub
    A[:m_ub, n_s:] = np.eye(m_ub)
    A[m_ub:, :n_s] = A_eq
    b = np.concatenate([b_ub, b_eq])
    sign = np.where(b < 0, -1.0, 1.0)
    A *= sign[:, None]
    b = b * sign
    needs_art = [i for i in range(m) if i >= m_ub or sign[i] < 0]
    n_core = n_s + m_ub
    n_art = len(needs_art)
    A_full = np.zeros((m, n_core + n_art))
    A_full[:, :n_core] = A
    basis = []
    art_of_row = {}
    for k, i in enumerate(needs_art):
        A_full[i, n_core + k] = 1.0
        art_of_row[i] = n_core + k
    for i in range(m):
        basis.append(art_of_row.get(i, n_s + i))
    if max_iter is None:
        max_iter = 50 * (m + n_core + n_art) + 1000
    tab = _Tableau(A_full, b, basis, max_iter)
    scale = max(1.0, float(np.abs(b).max()) if b.size else 1.0)
    eps = 1e-10

    if n_art:
        w1 = np.zeros(n_core + n_art)
        w1[n_core:] = -1.0
        st = tab.run(w1, np.ones(n_core + n_art, dtype=bool), eps)
        if st == STALLED:
            return LPResult(STALLED, None, None, iterations=tab.iterations)
        infeas = -float(w1[tab.basis] @ tab.T[:, -1])
        if infeas > tol.feas * scale:
            return LPResult(INFEASIBLE, None, None, iterations=tab.iterations)
        # drive artificials out of the basis, dropping redundant rows
        keep = []
        for r in range(m):
            if tab.basis[r] >= n_core:
                row = tab.T[r, :n_core]
                nz = np.flatnonzero(np.abs(row) > 1e-9)
                if nz.size:
                    tab.pivot(r, int(nz[0]))
                    keep.append(r)
            else:
                keep.append(r)
        tab.T = np.hstack([tab.T[keep, :n_core], tab.T[keep, -1:]])
        tab.basis = [tab.basis[r] for r in keep]
        rows_kept = keep
    else:
        rows_kept = list(range(m))

    w2 = np.zeros(n_core)
    w2[:n_s] = T.T @ lp.c
    st = tab.run(w2, np.ones(n_core, dtype=bool), eps)
    dump = None
    if keep_tableau:
        names = [f"x{j}" for j in range(n_s)] + [f"s{j}" for j in range(m_ub)]
        dump = tab.dump(names)
    if st != OPTIMAL:
        return LPResult(st, None, None, iterations=tab.iterations, tableau=dump)

    xs = np.zeros(n_core)
    xs[tab.basis] = tab.T[:, -1]
    xs = np.maximum(xs, 0.0)
    x = T @ xs[:n_s] + t0
    value = float(lp.c @ x)

    # duals from B^T y = w_B on the kept rows of the (sign-adjusted) system
    B = A[np.ix_(rows_kept, tab.basis)]
    y_kept = np.linalg.lstsq(B.T, w2[tab.basis], rcond=None)[0]
    y = np.zeros(m)
    y[rows_kept] = y_kept
    y *= sign
    return LPResult(OPTIMAL, value, x, y[:lp.A_ub.shape[0]], y[m_ub:], tab.iterations, dump)


@dataclass
class TransportationInstance:
    supply: np.ndarray
    demand: np.ndarray
    cost: np.ndarray

    def __post_init__(self):
        self.supply = np.asarray(self.supply, dtype=float).ravel()
        self.demand = np.asarray(self.demand, dtype=float).ravel()
        self.cost = np.atleast_2d(np.asarray(self.cost, dtype=float))
        if self.cost.shape != (self.supply.size, self.demand.size):
            raise DomainError(f"cost shape {self.cost.shape} does not match "
                              f"{self.supply.size} sources x {self.demand.size} sinks")

    def as_lp(self):
        """The same instance as a :class:`LinearProgram` (maximize minus cost)."""
        m, n = self.cost.shape
        A_eq = np.zeros((m + n, m * n))
        for i in range(m):
            A_eq[i, i * n:(i + 1) * n] = 1.0
        for j in range(n):
            A_eq[m + j, j::n] = 1.0
        return LinearProgram(-self.cost.ravel(), A_eq=A_eq,
                             b_eq=np.concatenate([self.supply, self.demand]))


@dataclass
class TransportationResult:
    cost: float
    flow: np.ndarray
    u: np.ndarray  # source potentials
    v: np.ndarray  # sink potentials; u_i - v_j <= cost_ij, tight on used arcs
    augmentations: int


def _bellman_ford(C, flow, d_src, d_snk, eps):
    """Relax shortest distances on the bipartite residual graph in place.

    Forward arcs source->sink cost ``C``; backward arcs sink->source cost
    ``-C`` where flow is positive. Returns predecessor arrays.
    """
    m, n = C.shape
    pred_snk = np.full(n, -1)
    pred_src = np.full(m, -1)
    back = flow > eps
    for _ in range(2 * (m + n) + 2):
        changed = False
        cand = d_src[:, None] + C
        i_best = np.argmin(cand, axis=0)
        best = cand[i_best, np.arange(n)]
        upd = best < d_snk - 1e-13
        if upd.any():
            d_snk[upd] = best[upd]
            pred_snk[upd] = i_best[upd]
            changed = True
        candb = np.where(back, d_snk[None, :] - C, np.inf)
        j_best = np.argmin(candb, axis=1)
        bestb = candb[np.arange(m), j_best]
        updb = bestb < d_src - 1e-13
        if updb.any():
            d_src[updb] = bestb[updb]
            pred_src[updb] = j_best[updb]
            changed = True
        if not changed:
            return pred_src, pred_snk
    raise RuntimeError("negative cycle in transportation residual graph")


def solve_transportation(inst, tol=None):
    """Minimum-cost transportation plan by successive shortest augmenting paths."""
    tol = resolve(tol)
    a = inst.supply.copy()
    b = inst.demand.copy()
    C = inst.cost
    if np.any(a < -tol.tau) or np.any(b < -tol.tau):
        raise DomainError("masses must be nonnegative")
    total = max(1.0, float(a.sum()), float(b.sum()))
    if abs(a.sum() - b.sum()) > tol.tau * total:
        raise DomainError(f"unbalanced instance: supply {a.sum()!r} != demand {b.sum()!r}")
    a = np.maximum(a, 0.0)
    b = np.maximum(b, 0.0)
    m, n = C.shape
    flow = np.zeros((m, n))
    ra, rb = a.copy(), b.copy()
    eps = 1e-15 * total
    aug = 0
    while ra.sum() > tol.tau * total * 1e-3 and rb.sum() > tol.tau * total * 1e-3:
        d_src = np.where(ra > eps, 0.0, np.inf)
        d_snk = np.full(n, np.inf)
        pred_src, pred_snk = _bellman_ford(C, flow, d_src, d_snk, eps)
        open_snk = np.flatnonzero((rb > eps) & np.isfinite(d_snk))
        if open_snk.size == 0:
            break
        j = int(open_snk[np.argmin(d_snk[open_snk])])
        # walk back: sink j <- source i <- sink j' <- ... <- source with supply
        path = []
        jj = j
        for _ in range(2 * (m + n) + 2):
            i = int(pred_snk[jj])
            path.append((i, jj, +1))
            if pred_src[i] < 0:
                break
            jp = int(pred_src[i])
            path.append((i, jp, -1))
            jj = jp
        else:
            raise SolverError("augmenting path reconstruction did not terminate", STALLED)
        src = path[-1][0]
        delta = min(ra[src], rb[j])
        for i, jj, s in path:
            if s < 0:
                delta = min(delta, flow[i, jj])
        for i, jj, s in path:
            flow[i, jj] += s * delta
        flow[flow < eps] = 0.0
        ra[src] -= delta
        rb[j] -= delta
        aug += 1
    cost = float((flow * C).sum())
    pi_src = np.zeros(m)
    pi_snk = np.zeros(n)
    _bellman_ford(C, flow, pi_src, pi_snk, eps)
    return TransportationResult(cost, flow, -pi_src, -pi_snk, aug)


def format_flow(flow, row_names, col_names):
    width = max([8] + [len(s) for s in col_names])
    lines = [" " * width + " " + " ".join(f"{c:>{width}}" for c in col_names)]
    for name, row in zip(row_names, flow):
        lines.append(f"{name:>{width}} " + " ".join(f"{v:>{width}.4g}" for v in row))
    return "\n".join(lines)
