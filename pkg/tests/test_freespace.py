import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lipfree import (EmbeddedPointSet, FreeElement, LipschitzFunction, example_space, free_norm,
                     molecule)
from lipfree.exceptions import BoundViolation, DomainError
from lipfree.freespace import (distance, distance_two_by_lp, is_distance_two_pair,
                               is_extreme_molecule, make_slice, molecules_in_slice, normalize,
                               slice_min_separation, slice_separation,
                               sum_norm_lower_bound_check, support_separation)
from lipfree.lipschitz import lipschitz_constant, plateau

from conftest import metric_spaces
from oracles import free_norm_highs


def random_element(space, rng, k=None):
    others = [i for i in range(space.n) if i != space.base]
    k = k or int(rng.integers(1, len(others) + 1))
    pick = rng.choice(others, size=min(k, len(others)), replace=False)
    return FreeElement({int(p): float(rng.normal()) for p in pick}, space.base)


class TestNorm:
    def test_delta_is_distance_to_base(self):
        s = example_space("random", 9, seed=7)
        for p in range(1, s.n):
            assert free_norm(s, FreeElement.delta(s, p)).value == pytest.approx(s.dist[p, 0])

    def test_molecules_have_norm_one(self):
        s = example_space("random", 7, seed=8)
        for x, y in itertools.permutations(range(s.n), 2):
            r = free_norm(s, molecule(s, x, y), cross_check=True)
            assert r.value == pytest.approx(1.0, abs=1e-9)
            assert r.residual < 1e-9

    def test_zero(self, line3):
        assert free_norm(line3, FreeElement.zero(line3)).value == 0.0

    def test_transport_route(self):
        s = example_space("random", 8, seed=9)
        mu = random_element(s, np.random.default_rng(0))
        a = free_norm(s, mu, method="lp")
        b = free_norm(s, mu, method="transport")
        assert a.value == pytest.approx(b.value, abs=1e-9)
        assert lipschitz_constant(s, b.certificate) <= 1 + 1e-9
        assert b.certificate(mu) == pytest.approx(b.value, abs=1e-9)

    def test_debug_dump(self, line3):
        r = free_norm(line3, FreeElement.delta(line3, 2), cross_check=True, debug=True)
        assert "tableau" in r.debug and "flow" in r.debug

    @given(metric_spaces(min_n=2, max_n=8), st.integers(0, 10**6))
    def test_matches_highs_and_transport(self, space, seed):
        mu = random_element(space, np.random.default_rng(seed))
        r = free_norm(space, mu, cross_check=True)
        ref = free_norm_highs(space.dist, dict(mu.coeffs), space.base)
        assert r.value == pytest.approx(ref, abs=1e-7)
        assert r.residual < 1e-7
        assert r.slackness < 1e-6
        assert lipschitz_constant(space, r.certificate) <= 1 + 1e-9
        assert r.certificate(mu) == pytest.approx(r.value, abs=1e-7)

    @given(metric_spaces(min_n=2, max_n=7), st.integers(0, 10**6), st.floats(-3, 3))
    def test_norm_axioms(self, space, seed, t):
        rng = np.random.default_rng(seed)
        a, b = random_element(space, rng), random_element(space, rng)
        na, nb = free_norm(space, a).value, free_norm(space, b).value
        assert free_norm(space, a + b).value <= na + nb + 1e-9
        assert free_norm(space, t * a).value == pytest.approx(abs(t) * na, abs=1e-9)


class TestDistanceTwo:
    def test_distance_basics(self):
        s = example_space("random", 6, seed=1)
        m = molecule(s, 2, 3)
        assert distance(s, m, m) == 0.0
        assert distance(s, m, molecule(s, 3, 2)) == pytest.approx(2.0)

    def test_halfline(self):
        s = example_space("halfline-interval", 20)
        m = molecule(s, "1", "0")
        w = molecule(s, "0", "-1")
        assert distance(s, m, w) == pytest.approx(2.0, abs=1e-9)
        assert distance(s, m, -w) == pytest.approx(2.0, abs=1e-9)
        t = is_distance_two_pair(s, ("1", "0"), ("0", "-1"))
        assert t.passed and t.lhs == pytest.approx(2.0) and t.rhs == pytest.approx(2.0)

    def test_bridge(self):
        b = example_space("bridge", 50, r=0.4)
        t = is_distance_two_pair(b, ("(1,0)", "(0,0)"), ("(1,0.4)", "(0,0.4)"))
        assert not t.passed and t.rhs == pytest.approx(0.8, abs=1e-9)

    def test_same_pair(self, line3):
        t = is_distance_two_pair(line3, (0, 2), (0, 2))
        assert not t.passed and t.rhs == 0.0

    @given(metric_spaces(min_n=2, max_n=6), st.data())
    def test_equivalence_with_lp(self, space, data):
        pairs = list(itertools.permutations(range(space.n), 2))
        xy = data.draw(st.sampled_from(pairs))
        uv = data.draw(st.sampled_from(pairs))
        lp = distance_two_by_lp(space, xy, uv)
        lp_two = all(abs(v - 2) < 1e-6 for v in lp)
        assert is_distance_two_pair(space, xy, uv).passed == lp_two


class TestExtreme:
    def test_two_points(self, two_points):
        assert is_extreme_molecule(two_points, 0, 1)

    def test_line_non_adjacent(self, line3):
        assert not is_extreme_molecule(line3, 0, 2)

    def test_halfline_gap(self):
        k = 20
        s = example_space("halfline-interval", k)
        assert is_extreme_molecule(s, "0", "-1", 1 / k, 1 / k)
        assert not is_extreme_molecule(s, "1", "0", 1 / k, 1 / k)


class TestSlices:
    def test_certificate_slice_contains_molecule(self):
        s = example_space("random", 8, seed=3)
        cert = free_norm(s, molecule(s, 2, 5)).certificate
        for alpha in (1e-3, 0.1, 0.9):
            sl = make_slice(s, cert, alpha)
            assert sl.contains_molecule(s, 2, 5)
            assert sl.contains(s, molecule(s, 2, 5))

    def test_line_identity_slice(self):
        k = 10
        s = example_space("interval", k)
        sl = make_slice(s, LipschitzFunction(np.arange(k + 1) / k, 0), 0.5)
        mols = {(m.x, m.y) for m in molecules_in_slice(s, sl)}
        assert {(i + 1, i) for i in range(k)} <= mols
        assert slice_min_separation(s, sl) == pytest.approx(1 / k)

    def test_plateau_separation(self):
        q = example_space("quotient-metric", 100)
        sl = make_slice(q, plateau(q, "x0", "x1", 0.1), 0.2)
        sep = slice_separation(q, sl)
        assert sep.min_separation == pytest.approx(0.1)

    def test_empty_slice(self, line3):
        sl = make_slice(line3, LipschitzFunction([0, 0.1, 0.0], 0), 0.05)
        sl2 = type(sl)(sl.f.scaled(0.5), 0.05)
        assert slice_separation(line3, sl2).min_separation is None

    def test_constant_function_rejected(self, line3):
        with pytest.raises(DomainError):
            make_slice(line3, LipschitzFunction([1, 1, 1], 0), 0.1)


def _augmented(n, seed):
    rng = np.random.default_rng(seed)
    X = rng.random((6, 2))
    s0 = EmbeddedPointSet(X).to_metric()
    mu = FreeElement({1: 1.0, 3: -0.5, 4: 0.7}, 0)
    theta = support_separation(s0, mu)
    u = np.array([2.0, 2.0])
    v = u + np.array([theta / (2 * n), 0.0])
    s = EmbeddedPointSet(np.vstack([X, u, v])).to_metric()
    return s, normalize(s, mu)


class TestSumBound:
    @pytest.mark.parametrize("n", [2, 3, 5, 10])
    def test_bound_holds(self, n):
        s, mu = _augmented(n, 0)
        bound, actual = sum_norm_lower_bound_check(s, mu, 6, 7, n)
        assert bound == pytest.approx(2 * (1 - 1 / n))
        assert actual >= bound - 1e-7

    def test_close_pair_approaches_two(self):
        vals = [sum_norm_lower_bound_check(*_augmented(n, 1), 6, 7, n)[1] for n in (2, 10, 100)]
        assert vals[-1] == pytest.approx(2.0, abs=0.05)
        assert vals[-1] >= vals[0] - 1e-9

    def test_pair_too_far(self):
        s, mu = _augmented(2, 0)
        with pytest.raises(DomainError, match="theta"):
            sum_norm_lower_bound_check(s, mu, 6, 7, 10)

    def test_pair_in_support(self):
        s, mu = _augmented(2, 0)
        with pytest.raises(DomainError):
            sum_norm_lower_bound_check(s, mu, 1, 7, 2)

    def test_requires_unit_norm(self):
        s, mu = _augmented(2, 0)
        with pytest.raises(DomainError, match="norm 1"):
            sum_norm_lower_bound_check(s, 2 * mu, 6, 7, 2)


def test_bound_violation_class():
    assert issubclass(BoundViolation, AssertionError)
