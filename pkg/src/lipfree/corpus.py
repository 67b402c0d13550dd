"""Generators for the worked-example spaces and a few reference spaces."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError
from .metric import EmbeddedPointSet, FiniteMetricSpace

EXAMPLE_NAMES = ("halfline-interval", "bridge", "quotient-metric", "interval", "circle", "random")


def _num(t):
    return f"{t:g}"


def halfline_interval(k):
    """``{-1} ∪ [0, 1]`` on the real line, ``[0, 1]`` sampled at step ``1/k``; base 0."""
    ts = [-1.0] + [i / k for i in range(k + 1)]
    names = [_num(t) for t in ts]
    emb = EmbeddedPointSet(np.array(ts)[:, None], 2.0, 1, tuple(names))
    return emb.to_metric(resolution=1.0 / k, name=f"halfline-interval(k={k})")


def bridge(k, r=0.4):
    """``[0,1] x {0}`` sampled at step ``1/k`` plus the two points ``(0, r)``, ``(1, r)``.

    Euclidean plane; base ``(0,0)``.
    """
    if not 0 < r < 1:
        raise DomainError("bridge height r must lie in (0, 1)")
    coords = [(i / k, 0.0) for i in range(k + 1)] + [(0.0, r), (1.0, r)]
    names = [f"({_num(a)},{_num(b)})" for a, b in coords]
    emb = EmbeddedPointSet(np.array(coords), 2.0, 0, tuple(names))
    return emb.to_metric(resolution=1.0 / k, name=f"bridge(k={k},r={r:g})")


def quotient_metric(k):
    """Points ``x_t``, ``t = i/k``, with ``d(x_t, x_s) = min(t + s, 2 - t - s)`` for ``t != s``.

    Each ``x_t`` sits on its own arc of length 1 from ``x_0`` to ``x_1``.
    """
    t = np.arange(k + 1) / k
    S = t[:, None] + t[None, :]
    D = np.minimum(S, 2.0 - S)
    np.fill_diagonal(D, 0.0)
    names = [f"x{_num(v)}" for v in t]
    return FiniteMetricSpace(names, D, 0, resolution=1.0 / k, name=f"quotient-metric(k={k})")


def interval(k):
    ts = [i / k for i in range(k + 1)]
    names = [_num(t) for t in ts]
    emb = EmbeddedPointSet(np.array(ts)[:, None], 2.0, 0, tuple(names))
    return emb.to_metric(resolution=1.0 / k, name=f"interval(k={k})")


def circle(k, radius=1.0):
    """``k`` equispaced points on a circle with the geodesic (arc-length) metric."""
    i = np.arange(k)
    gap = np.abs(i[:, None] - i[None, :])
    step = 2.0 * math.pi * radius / k
    D = np.minimum(gap, k - gap) * step
    return FiniteMetricSpace([f"c{j}" for j in i], D, 0, resolution=step,
                             name=f"circle(k={k})")


def random_space(n, seed=0, dim=2, p=2.0):
    """``n`` uniform points of the unit cube in the ``p``-norm."""
    rng = np.random.default_rng(seed)
    emb = EmbeddedPointSet(rng.random((n, dim)), p, 0)
    return emb.to_metric(name=f"random(n={n},seed={seed})")


def two_point(d=1.0):
    return FiniteMetricSpace(["a", "b"], [[0.0, d], [d, 0.0]], 0, name="two-point")


@dataclass(frozen=True)
class ExampleSpec:
    name: str
    k: int = 20
    params: dict = field(default_factory=dict)
    seed: int = 0

    def build(self):
        if self.k < 1:
            raise DomainError("resolution k must be a positive integer")
        if self.name == "halfline-interval":
            return halfline_interval(self.k)
        if self.name == "bridge":
            return bridge(self.k, float(self.params.get("r", 0.4)))
        if self.name == "quotient-metric":
            return quotient_metric(self.k)
        if self.name == "interval":
            return interval(self.k)
        if self.name == "circle":
            return circle(self.k, float(self.params.get("radius", 1.0)))
        if self.name == "random":
            return random_space(self.k, self.seed, int(self.params.get("dim", 2)),
                                float(self.params.get("p", 2.0)))
        raise DomainError(f"unknown example {self.name!r}; known: {', '.join(EXAMPLE_NAMES)}")


def example_space(name, k=20, seed=0, **params):
    return ExampleSpec(name, k, params, seed).build()
