"""The Lipschitz-free norm over a finite space and the molecule/slice machinery.

``||mu|| = max { f(mu) : f 1-Lipschitz, f(base) = 0 }`` is solved as a dense LP
over ``supp(mu) + base`` (any 1-Lipschitz function there extends to the whole
space, so nothing is lost), and independently as the optimal transport cost
between the positive and negative parts of ``mu``, the base point absorbing
the mass imbalance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._config import resolve
from .elements import FreeElement, LipschitzFunction, Molecule, molecule
from .exceptions import BoundViolation, DomainError, SolverError
from .lipschitz import lipschitz_constant, mcshane_extend
from .lp import (LinearProgram, TransportationInstance, format_flow, solve_lp,
                 solve_transportation)
from .metric import metric_segment, trivial_segment_pairs


@dataclass
class NormResult:
    """Free norm of an element together with its certificates.

    ``certificate`` is a 1-Lipschitz function on the whole space with
    ``certificate(mu) == value`` up to solver tolerance. When both routes ran,
    ``dual`` (LP) and ``primal`` (transport) are filled and ``residual`` is
    their gap; ``slackness`` is ``sum flow_ij |d_ij - f_i + f_j|``.
    """

    value: float
    certificate: LipschitzFunction
    method: str
    dual: Optional[float] = None
    primal: Optional[float] = None
    residual: Optional[float] = None
    slackness: Optional[float] = None
    flow: Optional[np.ndarray] = field(default=None, repr=False)
    sources: tuple = ()
    sinks: tuple = ()
    debug: Optional[str] = field(default=None, repr=False)


def _nodes(space, mu):
    return sorted(set(mu.support) | {space.base})


def _dual_lp(space, mu, tol, keep_tableau=False):
    supp = list(mu.support)
    D = space.dist
    b = space.base
    nodes = supp + [b]
    k = len(supp)
    rows, rhs = [], []
    for a in range(len(nodes)):
        for c in range(len(nodes)):
            if a == c:
                continue
            row = np.zeros(k)
            if a < k:
                row[a] += 1.0
            if c < k:
                row[c] -= 1.0
            rows.append(row)
            rhs.append(D[nodes[a], nodes[c]])
    lp = LinearProgram(
        np.array([mu.coeffs[p] for p in supp]),
        A_ub=np.array(rows), b_ub=np.array(rhs),
        bounds=[(-D[p, b], None) for p in supp],
    )
    res = solve_lp(lp, tol=tol, keep_tableau=keep_tableau)
    if not res.optimal:
        raise SolverError(f"free-norm LP ended with status {res.status}", res.status)
    return res, supp


def _certificate_from_values(space, nodes, vals, tol):
    vals = np.asarray(vals, dtype=float)
    part = dict(zip(nodes, vals))
    sub = space.dist[np.ix_(nodes, nodes)]
    if len(nodes) > 1:
        off = sub[~np.eye(len(nodes), dtype=bool)]
        diff = np.abs(vals[:, None] - vals[None, :])[~np.eye(len(nodes), dtype=bool)]
        L = float((diff / off).max())
        if L > 1.0:  # solver round-off; shrink to an exactly admissible function
            part = {p: v / L for p, v in part.items()}
    return mcshane_extend(space, part, L=1.0, tol=tol)


def _transport(space, mu, tol):
    nodes = _nodes(space, mu)
    coef = {p: mu.coeffs.get(p, 0.0) for p in nodes}
    coef[space.base] = -mu.total_mass()
    src = [p for p in nodes if coef[p] > 0]
    snk = [p for p in nodes if coef[p] < 0]
    inst = TransportationInstance([coef[p] for p in src], [-coef[p] for p in snk],
                                  space.dist[np.ix_(src, snk)])
    return solve_transportation(inst, tol=tol), src, snk


def free_norm(space, mu, method="lp", cross_check=False, tol=None, debug=False):
    """Free norm of ``mu``.

    Parameters
    ----------
    method : {"lp", "transport"}
        Which route supplies the value and certificate.
    cross_check : bool
        Also run the other route and fill ``primal``/``dual``/``residual``/
        ``slackness``.
    debug : bool
        Attach a text dump of the final tableau and the flow matrix.
    """
    tol = resolve(tol)
    if method not in ("lp", "transport"):
        raise DomainError("method must be 'lp' or 'transport'")
    if mu.base != space.base:
        raise DomainError("element and space disagree on the base point")
    if mu.is_zero():
        zero = LipschitzFunction(np.zeros(space.n), space.base)
        return NormResult(0.0, zero, method, 0.0, 0.0, 0.0, 0.0)

    run_lp = method == "lp" or cross_check
    run_tr = method == "transport" or cross_check
    out = {}
    dumps = []
    if run_lp:
        res, supp = _dual_lp(space, mu, tol, keep_tableau=debug)
        nodes = supp + [space.base]
        cert = _certificate_from_values(space, nodes, list(res.x) + [0.0], tol)
        out["dual"] = res.value
        out["lp_cert"] = cert
        if debug and res.tableau:
            dumps.append("final tableau:\n" + res.tableau)
    if run_tr:
        tr, src, snk = _transport(space, mu, tol)
        # c-transform of the sink potentials: 1-Lipschitz everywhere and optimal
        F = (tr.v[None, :] + space.dist[:, snk]).min(axis=1)
        out["primal"] = tr.cost
        out["tr_cert"] = LipschitzFunction(F, space.base)
        out["flow"] = (tr.flow, tuple(src), tuple(snk))
        if debug:
            dumps.append("flow:\n" + format_flow(tr.flow, [space.points[i] for i in src],
                                                 [space.points[j] for j in snk]))
    if method == "lp":
        value, cert = out["dual"], out["lp_cert"]
    else:
        value, cert = out["primal"], out["tr_cert"]
    result = NormResult(float(value), cert, method, debug="\n".join(dumps) or None)
    result.dual = out.get("dual")
    result.primal = out.get("primal")
    if "flow" in out:
        result.flow, result.sources, result.sinks = out["flow"]
    if cross_check:
        result.residual = abs(result.dual - result.primal)
        f = out["lp_cert"].values
        D = space.dist
        flow = result.flow
        gap = D[np.ix_(result.sources, result.sinks)] - (
            f[list(result.sources)][:, None] - f[list(result.sinks)][None, :])
        result.slackness = float(np.abs(flow * gap).sum())
    return result


def distance(space, a, b, tol=None):
    """``||a - b||`` in the free space."""
    return free_norm(space, a - b, tol=tol).value


@dataclass(frozen=True)
class DistanceTwoTest:
    """Metric test for ``||m_{x,y} +- m_{u,v}|| = 2``: ``lhs <= rhs``."""

    passed: bool
    lhs: float
    rhs: float
    rhs_terms: tuple

    def __bool__(self):
        return self.passed


def is_distance_two_pair(space, xy, uv, tol=None):
    """``d(x,y) + d(u,v) <= min(d(x,u) + d(y,v), d(x,v) + d(y,u))`` within tau."""
    tol = resolve(tol)
    x, y = (space.index(p) for p in xy)
    u, v = (space.index(p) for p in uv)
    if x == y or u == v:
        raise DomainError("both pairs must consist of distinct points")
    D = space.dist
    lhs = float(D[x, y] + D[u, v])
    t1 = float(D[x, u] + D[y, v])
    t2 = float(D[x, v] + D[y, u])
    rhs = min(t1, t2)
    return DistanceTwoTest(lhs <= rhs + tol.tau * max(1.0, lhs), lhs, rhs, (t1, t2))


def distance_two_by_lp(space, xy, uv, tol=None):
    """``(||m_xy - m_uv||, ||m_xy + m_uv||)`` computed by LP."""
    m1 = molecule(space, *xy)
    m2 = molecule(space, *uv)
    return distance(space, m1, m2, tol), distance(space, m1, -m2, tol)


def is_extreme_molecule(space, u, v, eta=0.0, h=0.0, tol=None):
    """Whether ``(u, v)`` is a trivial-segment pair at slack ``eta`` and cutoff ``h``."""
    tol = resolve(tol)
    u, v = space.index(u), space.index(v)
    if u == v:
        raise DomainError("u and v must be distinct")
    if space.dist[u, v] <= h + tol.tau:
        return False
    return metric_segment(space, u, v, eta, tol) == frozenset((u, v))


@dataclass(frozen=True)
class SliceSpec:
    """Slice ``S(f, alpha)`` of the free-space unit ball; ``f`` has constant exactly 1.

    Build with :func:`make_slice`, which divides by the measured constant.
    """

    f: LipschitzFunction
    alpha: float
    name: str = ""
    original_constant: float = 1.0

    def contains(self, space, mu, tol=None):
        tol = resolve(tol)
        if self.f(mu) <= 1.0 - self.alpha:
            return False
        return free_norm(space, mu, tol=tol).value <= 1.0 + tol.opt

    def contains_molecule(self, space, x, y):
        x, y = space.index(x), space.index(y)
        return self.f.slope(space, x, y) > 1.0 - self.alpha


def make_slice(space, f, alpha, name=""):
    if not 0 < alpha <= 1:
        raise DomainError("slice alpha must lie in (0, 1]")
    L = lipschitz_constant(space, f)
    if L == 0.0:
        raise DomainError("a constant function does not define a slice")
    return SliceSpec(f.scaled(1.0 / L), float(alpha), name, L)


def _slice_mask(space, sl):
    vals = sl.f.values
    D = space.dist
    with np.errstate(divide="ignore", invalid="ignore"):
        S = np.where(D > 0, (vals[:, None] - vals[None, :]) / np.where(D > 0, D, 1.0), -np.inf)
    return S > 1.0 - sl.alpha


def molecules_in_slice(space, sl):
    """All molecules ``m_{u,v}`` in the slice, ordered by ``(u, v)``."""
    return [Molecule(int(u), int(v)) for u, v in np.argwhere(_slice_mask(space, sl))]


@dataclass(frozen=True)
class SliceSeparation:
    min_separation: Optional[float]  # None: the slice holds no molecule
    closest: Optional[Molecule]
    count: int


def slice_separation(space, sl):
    mask = _slice_mask(space, sl)
    if not mask.any():
        return SliceSeparation(None, None, 0)
    D = np.where(mask, space.dist, np.inf)
    k = int(np.argmin(D))
    u, v = divmod(k, space.n)
    return SliceSeparation(float(D[u, v]), Molecule(u, v), int(mask.sum()))


def slice_min_separation(space, sl):
    return slice_separation(space, sl).min_separation


def support_separation(space, mu):
    """Minimum pairwise distance of ``supp(mu) + base``."""
    nodes = _nodes(space, mu)
    if len(nodes) < 2:
        raise DomainError("element has empty support")
    sub = space.dist[np.ix_(nodes, nodes)]
    return float(sub[~np.eye(len(nodes), dtype=bool)].min())


def sum_norm_lower_bound_check(space, mu, u, v, n, tol=None):
    """Check ``||mu + m_{u,v}|| >= 2 (1 - 1/n)`` for a close pair ``(u, v)``.

    Requires ``||mu|| = 1``, ``u, v`` outside ``supp(mu) + base`` and
    ``d(u, v) <= theta / (2n)``, ``theta`` being the minimum pairwise distance
    of ``supp(mu) + base``. Returns ``(bound, actual)``.
    """
    tol = resolve(tol)
    if int(n) != n or n < 2:
        raise DomainError("n must be an integer >= 2")
    u, v = space.index(u), space.index(v)
    if u == v:
        raise DomainError("u and v must be distinct")
    nodes = set(_nodes(space, mu))
    if u in nodes or v in nodes:
        raise DomainError("u and v must lie outside supp(mu) and the base point")
    theta = support_separation(space, mu)
    if space.dist[u, v] > theta / (2 * n) + tol.tau:
        raise DomainError(
            f"d(u,v) = {space.dist[u, v]!r} exceeds theta/(2n) = {theta / (2 * n)!r} "
            f"(theta = {theta!r})")
    norm = free_norm(space, mu, tol=tol).value
    if abs(norm - 1.0) > tol.opt:
        raise DomainError(f"mu must have norm 1, got {norm!r}")
    bound = 2.0 * (1.0 - 1.0 / n)
    actual = free_norm(space, mu + molecule(space, u, v), tol=tol).value
    if actual < bound - tol.opt:
        raise BoundViolation(f"||mu + m_uv|| = {actual!r} < 2(1 - 1/n) = {bound!r}")
    return bound, actual


def denting_pairs(space, eta=0.0, h=0.0, tol=None):
    """Trivial-segment pairs; on a finite space their molecules are the denting points."""
    return trivial_segment_pairs(space, eta, h, tol)


def normalize(space, mu, tol=None):
    nrm = free_norm(space, mu, tol=tol).value
    if nrm == 0.0:
        raise DomainError("cannot normalize the zero element")
    return mu / nrm
