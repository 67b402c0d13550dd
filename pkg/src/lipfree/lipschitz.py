"""Lipschitz functions on finite spaces: constants, extensions and special witnesses."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from ._config import resolve
from .elements import LipschitzFunction
from .exceptions import BoundViolation, DomainError


def _slopes(space, values, idx=None):
    """Matrix of ``|f(p) - f(q)| / d(p, q)`` with a zero diagonal."""
    vals = np.asarray(values, dtype=float)
    D = space.dist
    if idx is not None:
        D = D[np.ix_(idx, idx)]
    diff = np.abs(vals[:, None] - vals[None, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        S = np.where(D > 0, diff / np.where(D > 0, D, 1.0), 0.0)
    return S


def lipschitz_constant(space, f):
    """Exact maximum slope over all pairs of points."""
    vals = f.values if isinstance(f, LipschitzFunction) else np.asarray(f, dtype=float)
    if space.n < 2:
        return 0.0
    return float(_slopes(space, vals).max())


def steepest_pair(space, f):
    """Ordered pair ``(u, v)`` maximizing ``f(m_{u,v})`` and that slope."""
    vals = f.values if isinstance(f, LipschitzFunction) else np.asarray(f, dtype=float)
    D = space.dist
    with np.errstate(divide="ignore", invalid="ignore"):
        S = np.where(D > 0, (vals[:, None] - vals[None, :]) / np.where(D > 0, D, 1.0), -np.inf)
    k = int(np.argmax(S))
    u, v = divmod(k, space.n)
    return (u, v), float(S[u, v])


def _partial(space, partial):
    """Normalize a partial function to ``(indices, values)`` sorted by index."""
    items = sorted((space.index(k), float(v)) for k, v in dict(partial).items())
    if not items:
        raise DomainError("partial function has an empty domain")
    idx = [k for k, _ in items]
    if len(set(idx)) != len(idx):
        raise DomainError("partial function lists a point twice")
    return idx, np.array([v for _, v in items])


def check_lipschitz(space, partial, L, tol=None):
    """Raise :class:`DomainError` naming a witness pair if ``partial`` is not ``L``-Lipschitz."""
    tol = resolve(tol)
    idx, vals = _partial(space, partial)
    if len(idx) < 2:
        return 0.0
    S = _slopes(space, vals, idx)
    k = int(np.argmax(S))
    a, b = divmod(k, len(idx))
    if S[a, b] > L + tol.tau:
        pa, pb = space.points[idx[a]], space.points[idx[b]]
        raise DomainError(
            f"partial function is not {L:g}-Lipschitz: slope {S[a, b]:.12g} between {pa} and {pb}")
    return float(S[a, b])


def mcshane_extend(space, partial: Mapping, L=1.0, envelope="inf", tol=None):
    """Extend ``partial`` from its domain to the whole space keeping constant ``L``.

    ``envelope="inf"`` gives ``F(p) = min_n f(n) + L d(p, n)`` (the largest
    ``L``-Lipschitz extension); ``envelope="sup"`` gives
    ``max_n f(n) - L d(p, n)`` (the smallest). Values on the domain are copied
    verbatim before the result is rebased to vanish at the base point.
    """
    if not L > 0:
        raise DomainError("L must be positive")
    if envelope not in ("inf", "sup"):
        raise DomainError("envelope must be 'inf' or 'sup'")
    idx, vals = _partial(space, partial)
    check_lipschitz(space, dict(zip(idx, vals)), L, tol)
    D = space.dist[:, idx]
    if envelope == "inf":
        F = (vals[None, :] + L * D).min(axis=1)
    else:
        F = (vals[None, :] - L * D).max(axis=1)
    F[idx] = vals
    return LipschitzFunction(F, space.base)


def extend_with_slack(space, partial: Mapping, u, v, c=1.0, tol=None):
    """Slack-inflated extension to two extra points, then McShane completion at ``c``.

    ``g(u) = min_{x in N} partial(x) + c d(x, u)`` and
    ``g(v) = max_{x in N + u} g(x) - c d(x, v)``. The result satisfies
    ``g(u) - g(v) >= d(u, v)``; this is checked and a :class:`BoundViolation`
    raised otherwise. The base point joins ``N`` with value 0 if absent.
    """
    tol = resolve(tol)
    if c < 1:
        raise DomainError("slack factor c must be >= 1")
    u, v = space.index(u), space.index(v)
    if u == v:
        raise DomainError("u and v must be distinct")
    dom = {space.index(k): float(val) for k, val in dict(partial).items()}
    if u in dom or v in dom:
        raise DomainError("u and v must lie outside the domain of the partial function")
    dom.setdefault(space.base, 0.0)
    check_lipschitz(space, dom, 1.0, tol)
    idx = np.array(sorted(dom))
    vals = np.array([dom[i] for i in idx])
    D = space.dist
    gu = float((vals + c * D[idx, u]).min())
    vals_u = np.append(vals, gu)
    idx_u = np.append(idx, u)
    gv = float((vals_u - c * D[idx_u, v]).max())
    if gu - gv < D[u, v] - tol.tau * max(1.0, D[u, v]):
        raise BoundViolation(f"g(u) - g(v) = {gu - gv!r} < d(u,v) = {D[u, v]!r}")
    dom[u] = gu
    dom[v] = gv
    return mcshane_extend(space, dom, L=c, tol=tol)


def f_xy_raw(space, x, y):
    """``t -> (d(x,y)/2) (d(t,y) - d(t,x)) / (d(t,y) + d(t,x))`` before rebasing."""
    x, y = space.index(x), space.index(y)
    if x == y:
        raise DomainError("f_xy needs x != y")
    D = space.dist
    return 0.5 * D[x, y] * (D[:, y] - D[:, x]) / (D[:, y] + D[:, x])


def f_xy(space, x, y):
    """The norming witness of ``m_{x,y}``, shifted to vanish at the base point."""
    return LipschitzFunction(f_xy_raw(space, x, y), space.base)


def plateau(space, x, y, alpha, tol=None):
    """Plateau function: 0 near ``y``, ``(1 - alpha) d(x,y)`` near ``x``, McShane in between.

    "Near" means at distance strictly less than ``alpha * d(x, y)``. The
    extension constant is ``max(1, constant of the plateau data)``.
    """
    if not 0 < alpha < 0.5:
        raise DomainError("plateau alpha must lie in (0, 1/2)")
    x, y = space.index(x), space.index(y)
    if x == y:
        raise DomainError("plateau needs x != y")
    D = space.dist
    dxy = D[x, y]
    near_y = np.flatnonzero(D[:, y] < alpha * dxy)
    near_x = np.flatnonzero(D[:, x] < alpha * dxy)
    partial = {int(i): 0.0 for i in near_y}
    partial.update({int(i): (1.0 - alpha) * dxy for i in near_x})
    idx, vals = _partial(space, partial)
    L = max(1.0, float(_slopes(space, vals, idx).max()) if len(idx) > 1 else 1.0)
    return mcshane_extend(space, partial, L=L, tol=tol)


@dataclass(frozen=True)
class LocalityProfile:
    """Slopes of ``f`` restricted to pairs within each scale.

    ``best_slope[i]`` is ``None`` when no pair lies within ``scales[i]``.
    """

    scales: tuple
    best_slope: tuple
    best_pair: tuple
    epsilon_points: tuple
    lipschitz_constant: float

    def local_at(self, i):
        s = self.best_slope[i]
        return s is not None and s > self.lipschitz_constant - self.scales[i]

    def rows(self):
        for i, s in enumerate(self.scales):
            yield {
                "scale": s,
                "best_slope": self.best_slope[i],
                "best_pair": self.best_pair[i],
                "epsilon_point_count": len(self.epsilon_points[i]),
                "local": self.local_at(i),
            }


def locality_profile(space, f, scales, tol=None):
    """Best slope of ``f`` over pairs with ``0 < d(u, v) <= s`` for each scale ``s``.

    ``epsilon_points`` at scale ``s`` lists the points ``t`` whose ``s``-ball
    contains a pair at distance ``<= s`` with slope above ``L - s``.
    """
    tol = resolve(tol)
    scales = [float(s) for s in scales]
    if any(s <= 0 for s in scales):
        raise DomainError("scales must be positive")
    if any(b >= a for a, b in zip(scales, scales[1:])):
        raise DomainError("scales must be strictly decreasing")
    vals = f.values
    D = space.dist
    L = lipschitz_constant(space, f)
    with np.errstate(divide="ignore", invalid="ignore"):
        S = np.where(D > 0, (vals[:, None] - vals[None, :]) / np.where(D > 0, D, 1.0), -np.inf)
    best, pairs, eps_pts = [], [], []
    for s in scales:
        close = (D > 0) & (D <= s + tol.tau)
        if not close.any():
            best.append(None)
            pairs.append(None)
            eps_pts.append(())
            continue
        Sc = np.where(close, S, -np.inf)
        k = int(np.argmax(Sc))
        u, v = divmod(k, space.n)
        best.append(float(Sc[u, v]))
        pairs.append((u, v))
        qual = Sc > L - s
        ball = D <= s  # ball[t, p]: p within s of t
        mask = np.zeros(space.n, dtype=bool)
        for a in np.flatnonzero(qual.any(axis=1)):
            vs = np.flatnonzero(qual[a])
            mask |= ball[:, a] & ball[:, vs].any(axis=1)
        eps_pts.append(tuple(int(t) for t in np.flatnonzero(mask)))
    return LocalityProfile(tuple(scales), tuple(best), tuple(pairs), tuple(eps_pts), L)


@dataclass(frozen=True)
class FarFunction:
    function: LipschitzFunction
    case: str  # "I": u outside supp(mu); "II": u in supp(mu)
    domain_constant: float
    value_on_mu: float
    value_on_molecule: float
    threshold: float


def construct_far_function(space, g, mu, alpha, u, v, eps, tol=None):
    """Build ``h`` in the weak-star slice ``S(mu, alpha)`` with ``h(m_{u,v}) = -1/(1+eps)``.

    ``h`` copies ``g`` on ``supp(mu)``, the base point and ``u``, sets
    ``h(v) = g(u) + d(u, v)``, is McShane-extended at constant ``1 + eps``
    and finally divided by ``1 + eps``. Any ``f`` with ``f(m_{u,v})`` close to
    1 is then at Lipschitz distance close to 2 from it.

    The geometric preconditions are checked numerically: the data on the
    finite domain must be ``(1 + eps)``-Lipschitz and the rescaled value on
    ``mu`` must stay above the slice threshold ``(1 - alpha) ||mu||``.
    """
    from .freespace import free_norm

    tol = resolve(tol)
    if not 0 < alpha <= 1:
        raise DomainError("alpha must lie in (0, 1]")
    if eps < 0:
        raise DomainError("eps must be nonnegative")
    u, v = space.index(u), space.index(v)
    if u == v:
        raise DomainError("u and v must be distinct")
    if space.base in (u, v):
        raise DomainError("u and v must differ from the base point")
    supp = set(mu.support)
    if v in supp:
        raise DomainError("v must lie outside supp(mu)")
    Lg = lipschitz_constant(space, g)
    if Lg > 1 + tol.tau:
        raise DomainError(f"g must have Lipschitz constant <= 1, got {Lg!r}")
    norm_mu = free_norm(space, mu, tol=tol).value
    threshold = (1.0 - alpha) * norm_mu
    g_mu = g(mu)
    if not g_mu > threshold:
        raise DomainError(f"g is not in the slice: g(mu) = {g_mu!r} <= {threshold!r}")
    case = "II" if u in supp else "I"

    dom = {k: g[k] for k in supp}
    dom[space.base] = 0.0
    dom[u] = g[u]
    dom[v] = g[u] + space.dist[u, v]
    idx, vals = _partial(space, dom)
    S = _slopes(space, vals, idx)
    k = int(np.argmax(S))
    a, b = divmod(k, len(idx))
    c = 1.0 + eps
    if S[a, b] > c + tol.tau:
        raise DomainError(
            f"Lipschitz bound 1+eps={c!r} exceeded: slope {S[a, b]!r} between "
            f"{space.points[idx[a]]} and {space.points[idx[b]]}")
    h = mcshane_extend(space, dom, L=c, tol=tol).scaled(1.0 / c)
    h_mu = h(mu)
    if not h_mu > threshold:
        raise DomainError(
            f"(1+eps)^-1 g(mu) = {h_mu!r} falls below the slice threshold {threshold!r}")
    audit = lipschitz_constant(space, h)
    if audit > 1 + tol.tau:
        raise BoundViolation(f"constructed function has constant {audit!r} > 1")
    return FarFunction(h, case, float(S[a, b]), h_mu, h.slope(space, u, v), threshold)

