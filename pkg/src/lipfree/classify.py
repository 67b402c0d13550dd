"""Verdict engines: Daugavet and delta-point tests for molecules and elements.

On a finite space a molecule can only be *refuted* as a delta-point, or left
unrefuted at a given scale; reports say which, and always carry the
parameters (slack, cutoff, step, scale) they were computed with.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._config import resolve
from .elements import FreeElement, LipschitzFunction, Molecule, molecule
from .exceptions import DomainError
from .freespace import (distance, free_norm, is_distance_two_pair, make_slice,
                        slice_separation)
from .lipschitz import f_xy, plateau
from .metric import (EmbeddedPointSet, is_connectable, lens, point_cloud_diameter,
                     segment_in_set, trivial_segment_pairs)

POSITIVE = "positive"
NEGATIVE = "negative"
INCONCLUSIVE = "inconclusive"

DENTING_JUSTIFICATION = (
    "finite spaces are compact, so a molecule is a denting point of the unit ball "
    "exactly when its segment is trivial; trivial segments are taken at slack eta "
    "among pairs farther apart than h")
FINITE_DELTA_CAVEAT = (
    "unrefuted at this scale only: delta-pointness needs molecules in every slice "
    "at all scales, which a finite space cannot exhibit")


@dataclass(frozen=True)
class CrossCheck:
    name: str
    passed: bool
    residual: float
    tolerance: float

    def to_dict(self):
        return {"name": self.name, "passed": self.passed, "residual": self.residual,
                "tolerance": self.tolerance}


@dataclass
class ClassificationReport:
    kind: str
    query: dict
    verdict: str
    label: str
    witnesses: list = field(default_factory=list)
    cross_checks: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def __post_init__(self):
        if self.verdict not in (POSITIVE, NEGATIVE, INCONCLUSIVE):
            raise ValueError(f"bad verdict {self.verdict!r}")
        if self.verdict == NEGATIVE and not self.witnesses:
            raise ValueError("negative verdicts must carry a witness")
        for c in self.cross_checks:
            if c.passed and not c.residual < c.tolerance:
                raise ValueError(f"cross-check {c.name} passed with residual {c.residual!r}")

    @property
    def positive(self):
        return self.verdict == POSITIVE

    @property
    def negative(self):
        return self.verdict == NEGATIVE

    def to_dict(self):
        return {
            "kind": self.kind,
            "query": self.query,
            "verdict": self.verdict,
            "label": self.label,
            "witnesses": self.witnesses,
            "cross_checks": [c.to_dict() for c in self.cross_checks],
            "notes": self.notes,
        }

    def to_json(self):
        return json.dumps(_jsonable(self.to_dict()), indent=2, sort_keys=True)

    def to_table(self, max_rows=40):
        lines = [f"{self.kind}: {self.verdict.upper()} ({self.label})"]
        for k, v in sorted(self.query.items()):
            lines.append(f"  {k:<14} {_fmt(v)}")
        if self.witnesses:
            lines.append(f"witnesses ({len(self.witnesses)}):")
            keys = sorted({k for w in self.witnesses for k in w})
            lines.append("  " + " | ".join(keys))
            for w in self.witnesses[:max_rows]:
                lines.append("  " + " | ".join(_fmt(w.get(k, "")) for k in keys))
            if len(self.witnesses) > max_rows:
                lines.append(f"  ... {len(self.witnesses) - max_rows} more")
        if self.cross_checks:
            failed = [c for c in self.cross_checks if not c.passed]
            worst = max(self.cross_checks, key=lambda c: c.residual)
            lines.append(f"cross-checks: {len(self.cross_checks) - len(failed)}/"
                         f"{len(self.cross_checks)} passed, worst residual "
                         f"{worst.residual:.3g} ({worst.name})")
            for c in failed[:max_rows]:
                lines.append(f"  FAILED {c.name}: residual {c.residual:.3g} "
                             f"(tolerance {c.tolerance:g})")
        for n in self.notes:
            lines.append(f"note: {n}")
        return "\n".join(lines)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.10g}"
    if isinstance(v, (list, tuple)):
        return "(" + ", ".join(_fmt(x) for x in v) + ")"
    return str(v)


def _defaults(space, eta, h):
    r = space.resolution
    return (r if eta is None else float(eta)), (r if h is None else float(h))


def _names(space, idx):
    return [space.points[i] for i in idx]


def as_molecule(space, mu, tol=None):
    """The molecule equal to ``mu``, if ``mu`` is one (up to tau), else ``None``."""
    tol = resolve(tol)
    supp = mu.support
    c = mu.coeffs
    cand = []
    if len(supp) == 2:
        a, b = supp
        cand = [(a, b), (b, a)]
    elif len(supp) == 1:
        a = supp[0]
        cand = [(a, space.base), (space.base, a)]
    for x, y in cand:
        m = molecule(space, x, y)
        if all(abs(m.coeffs.get(p, 0.0) - c.get(p, 0.0)) <= tol.tau * max(1.0, abs(c.get(p, 0.0)))
               for p in set(supp) | set(m.support)):
            return Molecule(x, y)
    return None


def classify_daugavet_molecule(space, x, y, eta=None, h=None, tol=None):
    """Daugavet test for ``m_{x,y}`` against every discrete denting witness.

    The metric inequality and an LP evaluation of ``||m_{x,y} -+ m_{u,v}||``
    are run for each trivial-segment pair ``(u, v)``; if they disagree anywhere
    the verdict is inconclusive.
    """
    tol = resolve(tol)
    x, y = space.index(x), space.index(y)
    if x == y:
        raise DomainError("x and y must be distinct")
    eta, h = _defaults(space, eta, h)
    pairs = trivial_segment_pairs(space, eta, h, tol)
    m_xy = molecule(space, x, y)
    witnesses, checks = [], []
    metric_ok = lp_ok = True
    disagree = False
    for u, v in pairs:
        test = is_distance_two_pair(space, (x, y), (u, v), tol)
        m_uv = molecule(space, u, v)
        d_minus = distance(space, m_xy, m_uv, tol)
        d_plus = distance(space, m_xy, -m_uv, tol)
        lp_two = abs(d_minus - 2) < tol.dist_two and abs(d_plus - 2) < tol.dist_two
        agree = lp_two == test.passed
        # residual: how far the LP distances sit from 2 when the metric test says 2
        resid = max(abs(d_minus - 2), abs(d_plus - 2)) if test.passed else 0.0
        if not agree and not test.passed:
            resid = tol.dist_two
        checks.append(CrossCheck(f"lp-distance-two[{space.points[u]},{space.points[v]}]",
                                 agree, resid, tol.dist_two))
        disagree |= not agree
        metric_ok &= test.passed
        lp_ok &= lp_two
        witnesses.append({
            "pair": _names(space, (u, v)),
            "lhs": test.lhs,
            "rhs": test.rhs,
            "rhs_terms": list(test.rhs_terms),
            "holds": test.passed,
            "lp_distance_minus": d_minus,
            "lp_distance_plus": d_plus,
        })
    if disagree:
        verdict, label = INCONCLUSIVE, "metric criterion and LP disagree"
    elif metric_ok:
        verdict, label = POSITIVE, "Daugavet point"
    else:
        verdict, label = NEGATIVE, "not a Daugavet point"
        witnesses.sort(key=lambda w: (w["holds"], w["rhs"] - w["lhs"]))
    query = {"x": space.points[x], "y": space.points[y], "eta": eta, "h": h,
             "space": space.name, "n_points": space.n}
    notes = [DENTING_JUSTIFICATION]
    if not pairs:
        notes.append("no denting witnesses at this (eta, h): the criterion holds vacuously")
    return ClassificationReport("daugavet-molecule", query, verdict, label, witnesses, checks,
                                notes)


def classify_daugavet_element(space, mu, eta=None, h=None, tol=None):
    """Daugavet test for a norm-one element: distance 2 from every ``+-m_{u,v}``, ``(u,v)`` denting."""
    tol = resolve(tol)
    eta, h = _defaults(space, eta, h)
    norm = free_norm(space, mu, tol=tol).value
    if abs(norm - 1.0) > tol.opt:
        raise DomainError(f"element must have norm 1, got {norm!r}")
    pairs = trivial_segment_pairs(space, eta, h, tol)
    rows = []
    for u, v in pairs:
        m_uv = molecule(space, u, v)
        d_minus = distance(space, mu, m_uv, tol)
        d_plus = distance(space, mu, -m_uv, tol)
        ok = abs(d_minus - 2) < tol.dist_two and abs(d_plus - 2) < tol.dist_two
        rows.append({"pair": _names(space, (u, v)), "distance_to_m": d_minus,
                     "distance_to_minus_m": d_plus, "closest": min(d_minus, d_plus),
                     "holds": ok})
    failing = sorted((r for r in rows if not r["holds"]), key=lambda r: r["closest"])
    checks = []
    notes = [DENTING_JUSTIFICATION]
    mol = as_molecule(space, mu, tol)
    verdict = NEGATIVE if failing else POSITIVE
    if mol is not None:
        metric = classify_daugavet_molecule(space, mol.x, mol.y, eta, h, tol)
        agree = metric.verdict == verdict
        checks.append(CrossCheck("molecule-criterion", agree, 0.0 if agree else 1.0, 0.5))
        notes.append(f"element is the molecule m_({space.points[mol.x]},{space.points[mol.y]})")
        if not agree:
            verdict = INCONCLUSIVE
    if verdict == NEGATIVE:
        witnesses = failing
        label = "not a Daugavet point"
    else:
        witnesses = sorted(rows, key=lambda r: r["closest"])
        label = "Daugavet point" if verdict == POSITIVE else "criteria disagree"
    query = {"element": mu.format(space), "eta": eta, "h": h, "space": space.name,
             "n_points": space.n}
    return ClassificationReport("daugavet-element", query, verdict, label, witnesses, checks,
                                notes)


def default_radii(space, x, y, tol=None):
    """Realizable radii ``{d(x, z)} ∩ (0, d(x, y))``."""
    tol = resolve(tol)
    dxy = space.dist[x, y]
    r = np.unique(space.dist[x])
    return [float(v) for v in r if tol.tau < v < dxy - tol.tau]


def delta_ball_test(space, x, y, r_list=None, eps=0.0, tol=None):
    """Necessary condition for ``m_{x,y}`` to be a delta-point: every lens is nonempty."""
    tol = resolve(tol)
    x, y = space.index(x), space.index(y)
    if x == y:
        raise DomainError("x and y must be distinct")
    radii = default_radii(space, x, y, tol) if r_list is None else [float(r) for r in r_list]
    rows, failing = [], []
    for r in radii:
        members = sorted(lens(space, x, y, r, eps, tol))
        row = {"r": r, "lens": _names(space, members), "size": len(members)}
        rows.append(row)
        if not members:
            failing.append(row)
    query = {"x": space.points[x], "y": space.points[y], "eps": eps, "n_radii": len(radii),
             "space": space.name}
    if failing:
        return ClassificationReport(
            "delta-ball", query, NEGATIVE,
            f"not a delta-point: empty lens at r={failing[0]['r']:.10g}", failing)
    notes = [] if radii else ["no realizable radius strictly between 0 and d(x,y)"]
    return ClassificationReport("delta-ball", query, POSITIVE,
                                "ball condition holds (necessary only)", rows, [], notes)


def builtin_slices(space, x, y, alpha=0.1, n_random=2, seed=0, tol=None):
    """Named slices containing ``m_{x,y}``.

    Certificate slice of ``||m_{x,y}||``, ``f_xy`` slice, the plateau slice
    ``S(plateau, 2 alpha)`` and ``n_random`` slices from dual vertices of
    randomly perturbed norm problems. Slices that miss ``m_{x,y}`` are dropped
    and listed in the returned notes.
    """
    tol = resolve(tol)
    x, y = space.index(x), space.index(y)
    m_xy = molecule(space, x, y)
    out, notes = [], []
    cands = [
        (lambda: make_slice(space, free_norm(space, m_xy, tol=tol).certificate, alpha,
                            "certificate")),
        (lambda: make_slice(space, f_xy(space, x, y), alpha, "f_xy")),
        (lambda: make_slice(space, plateau(space, x, y, alpha, tol), min(1.0, 2 * alpha),
                            f"plateau({alpha:g})")),
    ]
    others = [p for p in range(space.n) if p not in (x, y, space.base)]
    for i in range(n_random):
        def make(i=i):
            rng = np.random.default_rng([seed, i])
            size = min(3, len(others))
            pick = sorted(rng.choice(others, size=size, replace=False)) if size else []
            pert = FreeElement({int(p): float(rng.uniform(-1, 1)) for p in pick}, space.base)
            cert = free_norm(space, m_xy + 1e-4 * pert, tol=tol).certificate
            return make_slice(space, cert, alpha, f"random-dual-{i}")
        cands.append(make)
    for build in cands:
        sl = build()
        if sl.contains_molecule(space, x, y):
            out.append(sl)
        else:
            notes.append(f"built-in slice {sl.name} does not contain m_xy "
                         f"(f(m_xy)={sl.f.slope(space, x, y):.6g}); skipped")
    return out, notes


def _scale_default(space):
    return space.resolution if space.resolution > 0 else space.min_pairwise_distance()


def delta_slice_test(space, x, y, slices=None, scale=None, alpha=0.1, n_random=2, seed=0,
                     tol=None):
    """Look for a slice around ``m_{x,y}`` whose molecules are all farther apart than ``scale``.

    Such a slice refutes delta-pointness. ``slices=None`` uses
    :func:`builtin_slices`.
    """
    tol = resolve(tol)
    x, y = space.index(x), space.index(y)
    if x == y:
        raise DomainError("x and y must be distinct")
    scale = _scale_default(space) if scale is None else float(scale)
    if not scale > 0:
        raise DomainError("scale must be positive")
    notes = []
    if slices is None:
        slices, notes = builtin_slices(space, x, y, alpha, n_random, seed, tol)
    else:
        for sl in slices:
            if not sl.contains_molecule(space, x, y):
                raise DomainError(f"slice {sl.name or '?'} does not contain m_xy")
    rows, refuting = [], []
    for sl in slices:
        sep = slice_separation(space, sl)
        refuted = sep.min_separation is None or sep.min_separation > scale + tol.tau
        row = {
            "slice": sl.name,
            "alpha": sl.alpha,
            "f_m_xy": sl.f.slope(space, x, y),
            "min_separation": sep.min_separation,
            "closest": _names(space, (sep.closest.x, sep.closest.y)) if sep.closest else None,
            "molecules": sep.count,
            "refutes": refuted,
        }
        rows.append(row)
        if refuted:
            refuting.append(row)
    query = {"x": space.points[x], "y": space.points[y], "scale": scale, "alpha": alpha,
             "slices": [sl.name for sl in slices], "space": space.name}
    if refuting:
        return ClassificationReport("delta-slice", query, NEGATIVE,
                                    f"not a delta-point: refuted at scale {scale:.6g}",
                                    refuting + [r for r in rows if not r["refutes"]], [], notes)
    return ClassificationReport("delta-slice", query, POSITIVE,
                                f"unrefuted at scale {scale:.6g}", rows, [],
                                notes + [FINITE_DELTA_CAVEAT])


def _embedding(space):
    if isinstance(space, EmbeddedPointSet):
        return space, space.to_metric()
    return space.embedding, space


def classify_connectable(space, x, y, eps=0.0, step=None, slices=None, alpha=0.1, seed=0,
                         tol=None):
    """Discrete connectability of ``x`` and ``y`` with step witnesses for slices.

    When positive, every slice ``S(f, alpha)`` containing ``m_{x,y}`` gets a
    consecutive path step ``(p, q)`` with
    ``f(m_{q,p}) >= (1 - alpha) d(x,y) / (d(x,y) + eps)``. For a strictly convex
    embedding the segment-containment criterion is run alongside.
    """
    tol = resolve(tol)
    emb, space = _embedding(space)
    x, y = space.index(x), space.index(y)
    step = _scale_default(space) if step is None else float(step)
    ok, path = is_connectable(space, x, y, eps, step, tol)
    dxy = space.dist[x, y]
    query = {"x": space.points[x], "y": space.points[y], "eps": eps, "step": step,
             "space": space.name}
    checks, notes, witnesses = [], [], []
    if emb is not None:
        n_samples = int(math.ceil(dxy / step)) + 1
        cov = segment_in_set(emb, x, y, step + tol.tau, max(2, n_samples))
        # a zero-slack path in a strictly convex norm runs along the straight segment
        if ok and eps == 0 and emb.strictly_convex:
            checks.append(CrossCheck("segment-containment", cov.covered, cov.max_gap,
                                     step + tol.tau))
        notes.append(f"segment [x,y] {'is' if cov.covered else 'is not'} covered at "
                     f"tolerance {step:.6g} (max gap {cov.max_gap:.6g})")
        if cov.warning:
            notes.append(cov.warning)
    if not ok:
        witnesses.append({
            "shortest_length": path.length if path.connected else None,
            "bound": dxy + eps,
            "path": _names(space, path.path),
        })
        label = "disconnected at this step" if not path.connected else "not connectable"
        return ClassificationReport("connectable", query, NEGATIVE, label, witnesses, checks,
                                    notes)
    witnesses.append({"path": _names(space, path.path), "length": path.length, "bound": dxy + eps})
    if slices is None:
        slices, extra = builtin_slices(space, x, y, alpha, 2, seed, tol)
        notes += extra
    p = list(path.path)
    for sl in slices:
        vals = sl.f.values
        inc = np.array([(vals[b] - vals[a]) / space.dist[a, b] for a, b in zip(p, p[1:])])
        k = int(np.argmax(inc))
        bound = (1.0 - sl.alpha) * dxy / (dxy + eps)
        fxy = sl.f.slope(space, x, y)
        checks.append(CrossCheck(f"step-witness[{sl.name}]", bool(inc[k] >= bound - tol.tau),
                                 max(0.0, bound - inc[k]), tol.tau))
        witnesses.append({"slice": sl.name, "step": _names(space, (p[k + 1], p[k])),
                          "slope": float(inc[k]), "bound": bound, "f_m_xy": fxy})
    return ClassificationReport("connectable", query, POSITIVE, "connectable", witnesses,
                                checks, notes)


def length_space_test(space, delta=None, step=None, tol=None):
    """Whether every ``Mid(u, v, delta)`` is nonempty.

    Give either a constant ``delta`` or a grid ``step``; the latter uses the
    per-pair budget ``delta = 2 step / d(u, v)``.
    """
    tol = resolve(tol)
    if (delta is None) == (step is None):
        raise DomainError("give exactly one of delta or step")
    if delta is not None and not delta > 0:
        raise DomainError("delta must be positive")
    if step is not None and not step > 0:
        raise DomainError("step must be positive")
    D = space.dist
    n = space.n
    failing = []
    worst = None
    for u in range(n):
        # needed[v] = min_z max(d(u,z), d(v,z)) / (d(u,v)/2) - 1
        reach = np.maximum(D[u][None, :], D)
        best_z = np.argmin(reach, axis=1)
        best = reach[np.arange(n), best_z]
        for v in range(u + 1, n):
            duv = D[u, v]
            budget = delta if delta is not None else 2.0 * step / duv
            needed = 2.0 * best[v] / duv - 1.0
            row = {"pair": _names(space, (u, v)), "delta": budget, "needed_delta": needed,
                   "best_midpoint": space.points[best_z[v]]}
            if best[v] > 0.5 * (1.0 + budget) * duv + tol.tau:
                failing.append(row)
            if worst is None or needed - budget > worst["needed_delta"] - worst["delta"]:
                worst = row
    query = {"delta": delta, "step": step, "space": space.name, "n_points": n}
    if failing:
        return ClassificationReport("length-space", query, NEGATIVE,
                                    f"not length at this resolution ({len(failing)} pairs fail)",
                                    failing)
    return ClassificationReport("length-space", query, POSITIVE, "length at this resolution",
                                [worst] if worst else [])


@dataclass(frozen=True)
class LensScan:
    p: float
    rows: tuple  # (n, diameter or None)
    decreasing: bool
    plateau: bool
    spacing: float

    def diameters(self):
        return [d for _, d in self.rows]


def dense_grid(x, y, radius_x, radius_y, spacing):
    """Grid with the given spacing centred on the midpoint of ``x`` and ``y``.

    Covers the intersection of the coordinate boxes of the two balls, which
    contains the lens for every ``p``-norm.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    c = 0.5 * (x + y)
    lo = np.maximum(x - radius_x, y - radius_y)
    hi = np.minimum(x + radius_x, y + radius_y)
    axes = []
    for ci, a, b in zip(c, lo, hi):
        j0 = math.ceil((a - ci) / spacing - 1e-9)
        j1 = math.floor((b - ci) / spacing + 1e-9)
        axes.append(ci + spacing * np.arange(j0, j1 + 1))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def lens_diameter_scan(x, y, r, n_list, p=2.0, spacing=0.005, sample=None):
    """Diameters of ``B(x, r + 1/n) ∩ B(y, |x-y| - r + 1/n)`` in a dense sample of the ambient plane.

    ``plateau`` flags scans whose diameter does not shrink (at least halve) and
    stays well above the sampling spacing, the behaviour of the flat
    ``p = 1`` / ``p = inf`` balls.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n_list = sorted(int(n) for n in n_list)
    dxy = float(np.linalg.norm(x - y, ord=p))
    if not 0 < r < dxy:
        raise DomainError("r must lie strictly between 0 and |x - y|")
    if sample is None:
        e = 1.0 / n_list[0]
        sample = dense_grid(x, y, r + e, dxy - r + e, spacing)
    sample = np.asarray(sample, dtype=float)
    dx = np.linalg.norm(sample - x, ord=p, axis=1)
    dy = np.linalg.norm(sample - y, ord=p, axis=1)
    rows = []
    for n in n_list:
        mask = (dx <= r + 1.0 / n) & (dy <= dxy - r + 1.0 / n)
        rows.append((n, point_cloud_diameter(sample[mask], p)))
    diams = [d for _, d in rows]
    decreasing = all(a is not None and b is not None and b < a for a, b in zip(diams, diams[1:]))
    plateau_ = (diams[-1] is not None and diams[0] is not None
                and diams[-1] > 0.5 * diams[0] and diams[-1] > 10 * spacing)
    return LensScan(float(p), tuple(rows), decreasing, plateau_, spacing)
