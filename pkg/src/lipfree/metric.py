"""Finite pointed metric spaces and the segment / ball geometry built on them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.sparse.csgraph import csgraph_from_dense, dijkstra
from scipy.spatial import ConvexHull, QhullError

from ._config import resolve
from .exceptions import DomainError, MetricStructureError


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class EmbeddedPointSet:
    """Points of a finite-dimensional ``p``-normed space.

    ``p`` may be ``math.inf``. The induced metric is obtained with
    :meth:`to_metric`.
    """

    coords: np.ndarray
    p: float = 2.0
    base: int = 0
    names: Optional[tuple] = None

    def __post_init__(self):
        coords = np.atleast_2d(np.asarray(self.coords, dtype=float))
        if coords.ndim != 2 or coords.shape[0] == 0:
            raise MetricStructureError("coords must be a non-empty (n, m) array")
        if not np.all(np.isfinite(coords)):
            raise MetricStructureError("coords must be finite")
        p = float(self.p)
        if not p >= 1:
            raise MetricStructureError(f"norm parameter p must lie in [1, inf], got {self.p}")
        if not 0 <= self.base < coords.shape[0]:
            raise MetricStructureError(f"base index {self.base} out of range")
        names = self.names
        if names is None:
            names = tuple(f"p{i}" for i in range(coords.shape[0]))
        elif len(names) != coords.shape[0]:
            raise MetricStructureError("names do not match the number of points")
        object.__setattr__(self, "coords", _frozen(coords))
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "names", tuple(str(s) for s in names))

    @property
    def n(self):
        return self.coords.shape[0]

    @property
    def strictly_convex(self):
        """True for ``1 < p < inf``; the ``p = 1`` and ``p = inf`` norms have flat faces."""
        return 1.0 < self.p < math.inf

    def norm(self, v):
        return np.linalg.norm(np.asarray(v, dtype=float), ord=self.p, axis=-1)

    def to_metric(self, resolution=0.0, name=""):
        diff = self.coords[:, None, :] - self.coords[None, :, :]
        dist = np.linalg.norm(diff, ord=self.p, axis=-1)
        return FiniteMetricSpace(self.names, dist, self.base, resolution=resolution,
                                 embedding=self, name=name)


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """A finite pointed metric space.

    Parameters
    ----------
    points : sequence of str
        Point names, in index order.
    dist : array_like of shape (n, n)
        Distance matrix.
    base : int
        Index of the distinguished point.
    resolution : float
        Grid resolution of a discretized space (0 if unknown). Used as the
        default segment slack and separation cutoff.
    embedding : EmbeddedPointSet, optional
        Coordinates the distances were computed from, if any.

    Only the structure (shape, finiteness, base range) is checked here; the
    metric axioms are checked by :func:`validate_metric`.
    """

    points: tuple
    dist: np.ndarray
    base: int = 0
    resolution: float = 0.0
    embedding: Optional[EmbeddedPointSet] = None
    name: str = ""
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        dist = np.asarray(self.dist, dtype=float)
        points = tuple(str(p) for p in self.points)
        if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
            raise MetricStructureError(f"distance matrix must be square, got shape {dist.shape}")
        if dist.shape[0] != len(points):
            raise MetricStructureError(
                f"{len(points)} points but distance matrix has {dist.shape[0]} rows")
        if len(points) == 0:
            raise MetricStructureError("a metric space needs at least one point")
        if not np.all(np.isfinite(dist)):
            raise MetricStructureError("distances must be finite")
        if len(set(points)) != len(points):
            raise MetricStructureError("point names must be unique")
        if not 0 <= int(self.base) < len(points):
            raise MetricStructureError(f"base index {self.base} out of range")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "dist", _frozen(dist))
        object.__setattr__(self, "base", int(self.base))
        object.__setattr__(self, "resolution", float(self.resolution))
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(points)})

    @property
    def n(self):
        return len(self.points)

    def __len__(self):
        return self.n

    def index(self, point):
        """Index of ``point``, given as a name or an integer index."""
        if isinstance(point, (int, np.integer)) and not isinstance(point, bool):
            if not 0 <= point < self.n:
                raise DomainError(f"point index {point} out of range")
            return int(point)
        try:
            return self._index[str(point)]
        except KeyError:
            raise DomainError(f"unknown point {point!r}") from None

    def name_of(self, i):
        return self.points[i]

    def d(self, i, j):
        return float(self.dist[i, j])

    def min_pairwise_distance(self):
        if self.n < 2:
            return math.inf
        off = self.dist[~np.eye(self.n, dtype=bool)]
        return float(off.min())

    def subspace(self, indices, base=None):
        idx = list(indices)
        b = idx.index(self.base) if base is None else base
        emb = None
        if self.embedding is not None:
            e = self.embedding
            emb = EmbeddedPointSet(e.coords[idx], e.p, b, tuple(self.points[i] for i in idx))
        return FiniteMetricSpace([self.points[i] for i in idx], self.dist[np.ix_(idx, idx)], b,
                                 resolution=self.resolution, embedding=emb)


def as_metric(space):
    if isinstance(space, EmbeddedPointSet):
        return space.to_metric()
    return space


def from_embedded(embedded, resolution=0.0):
    return embedded.to_metric(resolution=resolution)


@dataclass(frozen=True)
class Violation:
    kind: str  # "zero-diagonal", "positivity", "symmetry", "triangle"
    points: tuple
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple = ()

    @property
    def ok(self):
        return not self.violations

    def __bool__(self):
        return self.ok


def validate_metric(space, tol=None):
    """Check the metric axioms and list every violation.

    Triangle violations are reported as ``(p, q, r)`` with ``p < q`` the
    endpoints and ``r`` the intermediate point.
    """
    tol = resolve(tol)
    D = np.asarray(space.dist)
    n = D.shape[0]
    names = space.points
    out = []
    for i in np.flatnonzero(np.abs(np.diag(D)) > tol.tau):
        out.append(Violation("zero-diagonal", (names[i],),
                             f"d({names[i]},{names[i]})={float(D[i, i])!r}"))
    iu, ju = np.triu_indices(n, 1)
    for i, j in zip(iu, ju):
        if D[i, j] <= tol.tau or D[j, i] <= tol.tau:
            out.append(Violation("positivity", (names[i], names[j]),
                                 f"d({names[i]},{names[j]})={float(min(D[i, j], D[j, i]))!r}"))
        if abs(D[i, j] - D[j, i]) > tol.tau:
            out.append(Violation("symmetry", (names[i], names[j]),
                                 f"{float(D[i, j])!r} != {float(D[j, i])!r}"))
    scale = max(1.0, float(np.abs(D).max()) if D.size else 1.0)
    for r in range(n):
        excess = D - (D[:, r][:, None] + D[r, :][None, :])
        bad = np.argwhere(np.triu(excess > tol.tau * scale, 1))
        for i, j in bad:
            if r in (i, j):
                continue
            out.append(Violation(
                "triangle", (names[i], names[j], names[r]),
                f"d({names[i]},{names[j]})={float(D[i, j])!r} > "
                f"d({names[i]},{names[r]})+d({names[r]},{names[j]})="
                f"{float(D[i, r] + D[r, j])!r}"))
    order = {"zero-diagonal": 0, "positivity": 1, "symmetry": 2, "triangle": 3}
    out.sort(key=lambda v: (order[v.kind], [space.index(p) for p in v.points]))
    return ValidationReport(tuple(out))


def _pair(space, x, y):
    x, y = space.index(x), space.index(y)
    if x == y:
        raise DomainError("x and y must be distinct points")
    return x, y


def metric_segment(space, x, y, eta=0.0, tol=None):
    """Points ``z`` with ``d(x,z) + d(z,y) <= d(x,y) + eta``."""
    tol = resolve(tol)
    if eta < 0:
        raise DomainError("eta must be nonnegative")
    x, y = _pair(space, x, y)
    D = space.dist
    excess = D[x] + D[y] - D[x, y]
    mask = excess <= eta + tol.tau
    mask[[x, y]] = True
    return frozenset(int(i) for i in np.flatnonzero(mask))


def trivial_segment_pairs(space, eta=0.0, h=0.0, tol=None):
    """Unordered pairs ``(u, v)``, ``u < v``, with ``d(u,v) > h`` and ``[u,v]_eta = {u,v}``.

    On a finite space these are the pairs whose molecules are denting points
    of the free-space unit ball (taken at slack ``eta``).
    """
    tol = resolve(tol)
    if eta < 0 or h < 0:
        raise DomainError("eta and h must be nonnegative")
    D = space.dist
    n = space.n
    out = []
    for u in range(n):
        # excess[v, z] = d(u,z) + d(z,v) - d(u,v)
        excess = D[u][None, :] + D - D[u][:, None]
        inside = excess <= eta + tol.tau
        inside[:, u] = False
        inside[np.arange(n), np.arange(n)] = False
        has_mid = inside.any(axis=1)
        for v in range(u + 1, n):
            if D[u, v] > h + tol.tau and not has_mid[v]:
                out.append((u, v))
    return out


def mid_set(space, x, y, delta, tol=None):
    """``B(x, r) ∩ B(y, r)`` with ``r = (1 + delta) d(x,y) / 2``."""
    tol = resolve(tol)
    if delta < 0:
        raise DomainError("delta must be nonnegative")
    x, y = _pair(space, x, y)
    D = space.dist
    rad = 0.5 * (1.0 + delta) * D[x, y] + tol.tau
    mask = (D[x] <= rad) & (D[y] <= rad)
    return frozenset(int(i) for i in np.flatnonzero(mask))


@dataclass(frozen=True)
class ConstrainedPath:
    """Shortest path from ``y`` to ``x`` using edges no longer than ``step``.

    ``connected`` is False (and ``length`` is infinite) when no such path
    exists.
    """

    path: tuple
    length: float
    step: float

    @property
    def connected(self):
        return bool(self.path)


def shortest_constrained_path(space, x, y, step, tol=None):
    tol = resolve(tol)
    if not step > 0:
        raise DomainError("step must be positive")
    x, y = space.index(x), space.index(y)
    if x == y:
        return ConstrainedPath((x,), 0.0, step)
    D = np.array(space.dist)
    W = np.where(D <= step + tol.tau, D, np.inf)
    np.fill_diagonal(W, np.inf)
    graph = csgraph_from_dense(W, null_value=np.inf)
    dist, pred = dijkstra(graph, directed=False, indices=y, return_predecessors=True)
    if not np.isfinite(dist[x]):
        return ConstrainedPath((), math.inf, step)
    path = [x]
    while path[-1] != y:
        path.append(int(pred[path[-1]]))
    path.reverse()
    # re-sum along the path so the length is reproducible from the witness itself
    length = float(sum(D[a, b] for a, b in zip(path, path[1:])))
    return ConstrainedPath(tuple(path), length, step)


def is_connectable(space, x, y, eps, step, tol=None):
    """Discrete connectability: a ``step``-bounded path of length ``<= d(x,y) + eps``.

    Returns ``(connected, ConstrainedPath)``.
    """
    tol = resolve(tol)
    if eps < 0:
        raise DomainError("eps must be nonnegative")
    x, y = _pair(space, x, y)
    path = shortest_constrained_path(space, x, y, step, tol)
    ok = path.connected and path.length <= space.dist[x, y] + eps + tol.tau * max(1.0, path.length)
    return bool(ok), path


@dataclass(frozen=True)
class SegmentCoverage:
    covered: bool
    max_gap: float
    n_samples: int
    warning: Optional[str] = None

    def __bool__(self):
        return self.covered


def segment_in_set(embedded, x, y, tol, n_samples):
    """Whether equispaced points of the straight segment ``[x, y]`` lie within ``tol`` of the set."""
    if not tol > 0:
        raise DomainError("tol must be positive")
    if n_samples < 2:
        raise DomainError("n_samples must be at least 2")
    C = embedded.coords
    xi = C[_index_of(embedded, x)]
    yi = C[_index_of(embedded, y)]
    t = np.linspace(0.0, 1.0, n_samples)[:, None]
    samples = (1.0 - t) * xi + t * yi
    gaps = np.linalg.norm(samples[:, None, :] - C[None, :, :], ord=embedded.p, axis=-1).min(axis=1)
    warning = None
    if not embedded.strictly_convex:
        warning = (f"p={embedded.p:g} norm is not strictly convex; segment containment "
                   "does not characterize delta-points here")
    max_gap = float(gaps.max())
    return SegmentCoverage(bool(max_gap <= tol), max_gap, n_samples, warning)


def _index_of(embedded, point):
    if isinstance(point, (int, np.integer)):
        if not 0 <= point < embedded.n:
            raise DomainError(f"point index {point} out of range")
        return int(point)
    try:
        return embedded.names.index(str(point))
    except ValueError:
        raise DomainError(f"unknown point {point!r}") from None


def lens(space, x, y, r, eps=0.0, tol=None):
    """``B(x, r + eps) ∩ B(y, d(x,y) - r + eps)``."""
    tol = resolve(tol)
    space = as_metric(space)
    x, y = _pair(space, x, y)
    D = space.dist
    dxy = D[x, y]
    if not 0 < r < dxy:
        raise DomainError(f"radius r={r!r} must lie strictly between 0 and d(x,y)={float(dxy)!r}")
    if eps < 0:
        raise DomainError("eps must be nonnegative")
    mask = (D[x] <= r + eps + tol.tau) & (D[y] <= dxy - r + eps + tol.tau)
    return frozenset(int(i) for i in np.flatnonzero(mask))


def set_diameter(space, members):
    """Max pairwise distance within ``members``; ``None`` for the empty set."""
    idx = sorted(members)
    if not idx:
        return None
    return float(space.dist[np.ix_(idx, idx)].max())


def lens_diameter(space, x, y, r, eps=0.0, tol=None):
    space = as_metric(space)
    return set_diameter(space, lens(space, x, y, r, eps, tol))


def point_cloud_diameter(coords, p):
    """Diameter of a point cloud in the ``p``-norm, via its convex hull.

    Any norm is convex, so the diameter is attained between hull vertices.
    """
    coords = np.asarray(coords, dtype=float)
    if len(coords) == 0:
        return None
    if len(coords) == 1:
        return 0.0
    pts = coords
    if coords.shape[1] >= 2 and len(coords) > 64:
        try:
            pts = coords[ConvexHull(coords).vertices]
        except QhullError:  # degenerate (collinear) cloud
            pts = coords
    if len(pts) > 4000:
        # collinear fallback: extreme points along the principal direction suffice
        centred = pts - pts.mean(axis=0)
        direction = np.linalg.svd(centred, full_matrices=False)[2][0]
        proj = centred @ direction
        pts = pts[[int(np.argmin(proj)), int(np.argmax(proj))]]
    diff = pts[:, None, :] - pts[None, :, :]
    return float(np.linalg.norm(diff, ord=p, axis=-1).max())


def pair_indices(space, pairs: Sequence):
    return [_pair(space, a, b) for a, b in pairs]
