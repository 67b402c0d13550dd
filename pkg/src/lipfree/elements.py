"""Value types: elements of the free space and Lipschitz functions on a finite space."""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType

import numpy as np

from .exceptions import DomainError


class FreeElement:
    """A finitely supported combination ``sum_i coeff_i * delta_{p_i}``.

    The base point's coefficient is dropped on construction, since
    ``delta_base = 0``. Exact zero coefficients are dropped as well.
    """

    __slots__ = ("_coeffs", "base")

    def __init__(self, coeffs, base):
        self.base = int(base)
        clean = {}
        for k, v in dict(coeffs).items():
            k = int(k)
            v = float(v)
            if k == self.base or v == 0.0:
                continue
            clean[k] = clean.get(k, 0.0) + v
        self._coeffs = MappingProxyType(dict(sorted(clean.items())))

    @classmethod
    def delta(cls, space, p):
        return cls({space.index(p): 1.0}, space.base)

    @classmethod
    def zero(cls, space):
        return cls({}, space.base)

    @classmethod
    def from_vector(cls, vec, base):
        return cls({i: v for i, v in enumerate(np.asarray(vec, dtype=float))}, base)

    @property
    def coeffs(self):
        return self._coeffs

    @property
    def support(self):
        return tuple(self._coeffs)

    def is_zero(self):
        return not self._coeffs

    def to_vector(self, n):
        out = np.zeros(n)
        for k, v in self._coeffs.items():
            out[k] = v
        return out

    def total_mass(self):
        return sum(self._coeffs.values())

    def _combine(self, other, s):
        if not isinstance(other, FreeElement):
            return NotImplemented
        if other.base != self.base:
            raise DomainError("cannot combine elements over different base points")
        out = dict(self._coeffs)
        for k, v in other._coeffs.items():
            out[k] = out.get(k, 0.0) + s * v
        return FreeElement(out, self.base)

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __neg__(self):
        return FreeElement({k: -v for k, v in self._coeffs.items()}, self.base)

    def __mul__(self, t):
        if not np.isscalar(t):
            return NotImplemented
        return FreeElement({k: float(t) * v for k, v in self._coeffs.items()}, self.base)

    __rmul__ = __mul__

    def __truediv__(self, t):
        return self * (1.0 / float(t))

    def __eq__(self, other):
        return (isinstance(other, FreeElement) and other.base == self.base
                and dict(other._coeffs) == dict(self._coeffs))

    def __hash__(self):
        return hash((self.base, tuple(self._coeffs.items())))

    def __repr__(self):
        terms = " + ".join(f"{v:g}*d{k}" for k, v in self._coeffs.items()) or "0"
        return f"FreeElement({terms})"

    def format(self, space):
        parts = []
        for k, v in self._coeffs.items():
            sign = "-" if v < 0 else "+"
            parts.append(f"{sign} {abs(v):.12g}*{space.points[k]}")
        if not parts:
            return "0"
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]


@dataclass(frozen=True)
class Molecule:
    """The ordered pair ``(x, y)`` standing for ``(delta_x - delta_y) / d(x, y)``."""

    x: int
    y: int

    def __post_init__(self):
        if self.x == self.y:
            raise DomainError("a molecule needs two distinct points")

    def reversed(self):
        return Molecule(self.y, self.x)

    def as_element(self, space):
        d = space.dist[self.x, self.y]
        return FreeElement({self.x: 1.0 / d, self.y: -1.0 / d}, space.base)


def molecule(space, x, y):
    """``m_{x,y}`` as a :class:`FreeElement`."""
    return Molecule(space.index(x), space.index(y)).as_element(space)


class LipschitzFunction:
    """Real values on the points of a finite space, vanishing at the base point.

    The value at ``base`` is subtracted on construction; slopes are unchanged.
    """

    __slots__ = ("values", "base")

    def __init__(self, values, base):
        vals = np.array(values, dtype=float).ravel()
        base = int(base)
        if vals[base] != 0.0:
            vals = vals - vals[base]
        vals.setflags(write=False)
        self.values = vals
        self.base = base

    @classmethod
    def from_space(cls, space, values):
        if len(values) != space.n:
            raise DomainError(f"expected {space.n} values, got {len(values)}")
        return cls(values, space.base)

    def __len__(self):
        return self.values.size

    def __getitem__(self, i):
        return float(self.values[i])

    def __call__(self, mu):
        """Pairing ``f(mu) = sum_i coeff_i f(p_i)``."""
        return float(sum(c * self.values[k] for k, c in mu.coeffs.items()))

    def slope(self, space, u, v):
        """``f(m_{u,v}) = (f(u) - f(v)) / d(u, v)``."""
        return float((self.values[u] - self.values[v]) / space.dist[u, v])

    def scaled(self, t):
        return LipschitzFunction(self.values * float(t), self.base)

    def __add__(self, other):
        return LipschitzFunction(self.values + other.values, self.base)

    def __sub__(self, other):
        return LipschitzFunction(self.values - other.values, self.base)

    def __neg__(self):
        return LipschitzFunction(-self.values, self.base)

    def __repr__(self):
        return f"LipschitzFunction({np.array2string(self.values, precision=4)})"
