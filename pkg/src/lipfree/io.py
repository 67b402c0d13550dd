"""Space files and the element / function literal syntax used on the command line.

A space file is JSON, either ``{"points": [...], "matrix": [[...]], "base": i}``
or ``{"coords": [[...]], "p": number | "inf", "base": i}``; the optional keys
``"names"`` (coordinate form), ``"resolution"`` and ``"name"`` are kept.
"""

from __future__ import annotations

import json
import math
import re

import numpy as np

from ._config import resolve
from .elements import FreeElement, LipschitzFunction
from .exceptions import DomainError, MetricStructureError
from .lipschitz import check_lipschitz, f_xy, mcshane_extend, plateau
from .metric import EmbeddedPointSet, FiniteMetricSpace, validate_metric


class SpaceFileError(ValueError):
    """Malformed space file; ``location`` says where."""

    def __init__(self, message, location=""):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location


def _p_value(p, where):
    if isinstance(p, str):
        if p.lower() in ("inf", "infinity"):
            return math.inf
        raise SpaceFileError(f"p must be a number or \"inf\", got {p!r}", where)
    if not isinstance(p, (int, float)) or isinstance(p, bool):
        raise SpaceFileError(f"p must be a number or \"inf\", got {p!r}", where)
    return float(p)


def space_from_dict(data, source="<dict>"):
    if not isinstance(data, dict):
        raise SpaceFileError("top level must be an object", source)
    base = data.get("base", 0)
    if not isinstance(base, int) or isinstance(base, bool):
        raise SpaceFileError(f"base must be an integer index, got {base!r}", f"{source}: base")
    resolution = data.get("resolution", 0.0)
    name = str(data.get("name", ""))
    try:
        if "matrix" in data:
            points = data.get("points")
            if points is None:
                points = [f"p{i}" for i in range(len(data["matrix"]))]
            matrix = data["matrix"]
            for i, row in enumerate(matrix):
                if not isinstance(row, list):
                    raise SpaceFileError("each matrix row must be a list", f"{source}: matrix[{i}]")
                for j, v in enumerate(row):
                    if not isinstance(v, (int, float)) or isinstance(v, bool):
                        raise SpaceFileError(f"not a number: {v!r}",
                                             f"{source}: matrix[{i}][{j}]")
            return FiniteMetricSpace(points, np.array(matrix, dtype=float), base,
                                     resolution=float(resolution), name=name)
        if "coords" in data:
            p = _p_value(data.get("p", 2.0), f"{source}: p")
            names = data.get("names", data.get("points"))
            emb = EmbeddedPointSet(np.array(data["coords"], dtype=float), p, base,
                                   tuple(names) if names is not None else None)
            return emb.to_metric(resolution=float(resolution), name=name)
    except MetricStructureError as exc:
        raise SpaceFileError(str(exc), source) from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SpaceFileError):
            raise
        raise SpaceFileError(f"bad array data ({exc})", source) from None
    raise SpaceFileError("expected a \"matrix\" or a \"coords\" key", source)


def space_to_dict(space):
    if space.embedding is not None:
        e = space.embedding
        out = {
            "coords": e.coords.tolist(),
            "p": "inf" if math.isinf(e.p) else e.p,
            "names": list(space.points),
            "base": space.base,
        }
    else:
        out = {"points": list(space.points), "matrix": space.dist.tolist(), "base": space.base}
    if space.resolution:
        out["resolution"] = space.resolution
    if space.name:
        out["name"] = space.name
    return out


def dumps_space(space):
    return json.dumps(space_to_dict(space), indent=1, sort_keys=True) + "\n"


def load_space(path, validate=True, tol=None):
    """Read a space file; with ``validate`` the metric axioms must hold."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise SpaceFileError(f"cannot read file ({exc.strerror})", str(path)) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpaceFileError(exc.msg, f"{path}:{exc.lineno}:{exc.colno}") from None
    space = space_from_dict(data, str(path))
    if validate:
        rep = validate_metric(space, tol)
        if not rep.ok:
            v = rep.violations[0]
            raise MetricStructureError(f"{path}: not a metric ({len(rep.violations)} violations; "
                                       f"first: {v.kind} {v.detail})")
    return space


def save_space(space, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_space(space))


_SPLIT = re.compile(r"\s+([+-])\s+")


def parse_element(space, text):
    """Parse ``"1.0*x - 0.5*y + z"`` against the point names of ``space``.

    Terms are separated by ``+`` or ``-`` surrounded by whitespace; a term is
    ``coef*name`` or a bare ``name``. A leading ``-`` followed by a space
    negates the first term.
    """
    s = text.strip()
    if not s:
        raise DomainError("empty element literal")
    sign = 1.0
    if s[:2] in ("- ", "+ "):
        sign = -1.0 if s[0] == "-" else 1.0
        s = s[2:].strip()
    parts = _SPLIT.split(s)
    terms = [(sign, parts[0])]
    for op, term in zip(parts[1::2], parts[2::2]):
        terms.append((1.0 if op == "+" else -1.0, term))
    coeffs = {}
    for sg, term in terms:
        coef, name = 1.0, term.strip()
        if "*" in name:
            head, rest = name.split("*", 1)
            try:
                coef = float(head)
                name = rest.strip()
            except ValueError:
                pass
        if name not in space.points:
            raise DomainError(f"unknown point {name!r} in element literal")
        i = space.index(name)
        coeffs[i] = coeffs.get(i, 0.0) + sg * coef
    return FreeElement(coeffs, space.base)


def split_point_pair(space, text):
    """Split ``"x,y"`` into two point names, allowing commas inside names."""
    hits = []
    for k, ch in enumerate(text):
        if ch == ",":
            a, b = text[:k].strip(), text[k + 1:].strip()
            if a in space.points and b in space.points:
                hits.append((a, b))
    if not hits:
        raise DomainError(f"cannot read {text!r} as two point names")
    if len(hits) > 1:
        raise DomainError(f"ambiguous point pair {text!r}")
    return hits[0]


def _far_point(space):
    return int(np.argmax(space.dist[space.base]))


def parse_function(space, text, tol=None):
    """Parse a function literal.

    Accepted forms: a JSON list of ``[name, value]`` pairs or a JSON object
    ``{name: value}`` (McShane-extended at its own constant when partial),
    ``fxy:x,y``, ``dist-to:p`` and ``plateau:alpha[:x,y]`` (default pair: the
    base point and the point farthest from it).
    """
    s = text.strip()
    if s.startswith("[") or s.startswith("{"):
        try:
            data = json.loads(s)
        except json.JSONDecodeError as exc:
            raise DomainError(f"bad function literal: {exc.msg}") from None
        items = list(data.items()) if isinstance(data, dict) else data
        partial = {}
        for it in items:
            if not (isinstance(it, (list, tuple)) and len(it) == 2):
                raise DomainError(f"expected [name, value] pairs, got {it!r}")
            partial[space.index(str(it[0]))] = float(it[1])
        if len(partial) == space.n:
            return LipschitzFunction([partial[i] for i in range(space.n)], space.base)
        L = max(check_lipschitz(space, partial, math.inf, tol), resolve(tol).tau)
        return mcshane_extend(space, partial, L=L, tol=tol)
    kind, _, arg = s.partition(":")
    if kind == "fxy":
        x, y = split_point_pair(space, arg)
        return f_xy(space, x, y)
    if kind == "dist-to":
        p = space.index(arg.strip())
        return LipschitzFunction(space.dist[p], space.base)
    if kind == "plateau":
        a, _, pair = arg.partition(":")
        try:
            alpha = float(a)
        except ValueError:
            raise DomainError(f"plateau needs a numeric alpha, got {a!r}") from None
        if pair:
            x, y = split_point_pair(space, pair)
        else:
            x, y = space.base, _far_point(space)
        return plateau(space, x, y, alpha, tol)
    raise DomainError(f"unknown function literal {text!r}; use [[name, value], ...], "
                      "fxy:x,y, dist-to:p or plateau:alpha[:x,y]")

