import numpy as np
import pytest
from hypothesis import given, strategies as st

from lipfree import (EmbeddedPointSet, FreeElement, LipschitzFunction, example_space, free_norm,
                     molecule)
from lipfree.exceptions import BoundViolation, DomainError
from lipfree.lipschitz import (check_lipschitz, construct_far_function, extend_with_slack, f_xy,
                               f_xy_raw, lipschitz_constant, locality_profile, mcshane_extend,
                               plateau, steepest_pair)

from conftest import metric_spaces


class TestElements:
    def test_base_coefficient_dropped(self, line3):
        mu = FreeElement({0: 2.0, 1: 1.0}, 0)
        assert mu.support == (1,)

    def test_arithmetic(self, line3):
        a = FreeElement.delta(line3, 1)
        b = FreeElement.delta(line3, 2)
        assert (a + b - b) == a
        assert (2 * a / 2) == a
        assert (-a).coeffs == {1: -1.0}
        assert FreeElement.zero(line3).is_zero()

    def test_molecule(self, line3):
        m = molecule(line3, 2, 1)
        assert dict(m.coeffs) == {1: -2.0, 2: 2.0}

    def test_format(self, line3):
        mu = FreeElement({1: 1.0, 2: -0.5}, 0)
        assert mu.format(line3) == "1*1/2 - 0.5*1"

    def test_function_rebases(self, line3):
        f = LipschitzFunction([3.0, 4.0, 5.0], 0)
        assert list(f.values) == [0.0, 1.0, 2.0]
        assert f(FreeElement.delta(line3, 2)) == 2.0
        assert f.slope(line3, 2, 0) == 2.0


class TestConstants:
    def test_distance_to_base(self):
        s = example_space("random", 8, seed=2)
        f = LipschitzFunction(s.dist[s.base], s.base)
        assert lipschitz_constant(s, f) == pytest.approx(1.0)

    def test_constant_function(self, line3):
        assert lipschitz_constant(line3, LipschitzFunction(np.ones(3), 0)) == 0.0

    def test_steepest_pair(self, line3):
        (u, v), s = steepest_pair(line3, LipschitzFunction([0, 0, 1.0], 0))
        assert (u, v) == (2, 1) and s == pytest.approx(2.0)

    def test_check_lipschitz_names_pair(self, line3):
        with pytest.raises(DomainError, match="between 1/2 and 1"):
            check_lipschitz(line3, {1: 0.0, 2: 1.0}, 1.0)


class TestMcShane:
    def test_base_only(self):
        s = example_space("random", 6, seed=1)
        F = mcshane_extend(s, {s.base: 0.0})
        assert F.values == pytest.approx(s.dist[s.base])
        G = mcshane_extend(s, {s.base: 0.0}, envelope="sup")
        assert G.values == pytest.approx(-s.dist[s.base])

    def test_whole_space_identity(self, line3):
        F = mcshane_extend(line3, {0: 0.0, 1: 0.3, 2: 0.1})
        assert list(F.values) == [0.0, 0.3, 0.1]

    def test_quotient_plateau(self):
        q = example_space("quotient-metric", 100)
        f = plateau(q, "x0", "x1", 0.1)
        assert lipschitz_constant(q, f) <= 1 + 1e-9
        # 0.9 on the x0 plateau, 0 on the x1 plateau (before rebasing at x0)
        raw = f.values - f.values[q.index("x1")]
        assert raw[q.index("x0.05")] == pytest.approx(0.9)
        assert raw[q.index("x0.95")] == pytest.approx(0.0)

    @given(metric_spaces(min_n=3, max_n=8), st.integers(0, 10**6),
           st.sampled_from(["inf", "sup"]))
    def test_extension_properties(self, space, seed, envelope):
        rng = np.random.default_rng(seed)
        k = rng.integers(1, space.n)
        dom = sorted(rng.choice(space.n, size=k, replace=False))
        # 1-Lipschitz data: restrict a random 1-Lipschitz function
        pts = rng.choice(space.n, size=min(3, space.n), replace=False)
        g = space.dist[pts].min(axis=0) * rng.uniform(0.2, 1.0)
        partial = {int(i): float(g[i]) for i in dom}
        F = mcshane_extend(space, partial, envelope=envelope)
        shift = F.values[dom[0]] - partial[dom[0]]
        assert F.values[dom] - shift == pytest.approx([partial[i] for i in dom], abs=1e-12)
        assert lipschitz_constant(space, F) <= 1 + 1e-9

    def test_inf_envelope_is_largest(self):
        s = example_space("random", 9, seed=4)
        g = 0.5 * s.dist[2]
        partial = {0: g[0], 3: g[3], 5: g[5]}
        hi = mcshane_extend(s, partial, envelope="inf").values
        lo = mcshane_extend(s, partial, envelope="sup").values
        assert np.all(hi >= lo - 1e-12)


class TestSlack:
    def test_close_pair_certificate_setting(self):
        X = np.array([[0, 0], [1, 0], [0, 1], [0.5, 0.5], [0.5, 0.52]])
        s = EmbeddedPointSet(X).to_metric()
        mu = molecule(s, 1, 2)
        cert = free_norm(s, mu).certificate
        n = 3
        c = 1 / (1 - 1 / n)
        g = extend_with_slack(s, {1: cert[1], 2: cert[2]}, 3, 4, c)
        assert g(mu) == pytest.approx(cert(mu))
        assert g.slope(s, 3, 4) >= 1 - 1e-9

    def test_base_only_zero(self):
        s = example_space("random", 7, seed=5)
        for u, v in [(1, 2), (3, 6), (5, 4)]:
            g = extend_with_slack(s, {s.base: 0.0}, u, v, 1.0)
            assert g[u] - g[v] >= s.dist[u, v] - 1e-9
            assert g[u] == pytest.approx(s.dist[u, s.base])

    def test_domain_errors(self, line3):
        with pytest.raises(DomainError):
            extend_with_slack(line3, {1: 0.5}, 1, 2)
        with pytest.raises(DomainError):
            extend_with_slack(line3, {0: 0.0}, 1, 2, c=0.5)

    @given(st.integers(0, 10**6), st.integers(2, 10))
    def test_gap_in_close_pair_regime(self, seed, n):
        # N = supp(mu) + base with the certificate of mu, d(u,v) <= theta/(2n), c = 1/(1-1/n)
        rng = np.random.default_rng(seed)
        m = int(rng.integers(3, 9))
        X = rng.random((m, 2))
        supp = rng.choice(np.arange(1, m), size=int(rng.integers(1, m)), replace=False)
        D = np.linalg.norm(X[:, None] - X[None], axis=-1)
        nodes = list(supp) + [0]
        theta = D[np.ix_(nodes, nodes)][~np.eye(len(nodes), dtype=bool)].min()
        u = rng.random(2)
        ang = rng.uniform(0, 2 * np.pi)
        v = u + theta / (2 * n) * np.array([np.cos(ang), np.sin(ang)])
        s = EmbeddedPointSet(np.vstack([X, u, v])).to_metric()
        mu = FreeElement({int(i): rng.normal() for i in supp}, 0)
        cert = free_norm(s, mu).certificate
        c = 1 / (1 - 1 / n)
        g = extend_with_slack(s, {int(i): cert[int(i)] for i in nodes}, m, m + 1, c)
        assert g[m] - g[m + 1] >= s.dist[m, m + 1] - 1e-9
        assert lipschitz_constant(s, g) <= c + 1e-9
        assert g(mu) == pytest.approx(cert(mu), abs=1e-9)

    @given(metric_spaces(min_n=4, max_n=8), st.integers(0, 10**6), st.floats(1.0, 3.0))
    def test_gap_asserted_outside_regime(self, space, seed, c):
        rng = np.random.default_rng(seed)
        u, v = rng.choice(np.arange(1, space.n), size=2, replace=False)
        rest = [i for i in range(space.n) if i not in (u, v)]
        g0 = space.dist[rng.choice(space.n)]
        partial = {int(i): float(g0[i]) for i in rest}
        try:
            g = extend_with_slack(space, partial, int(u), int(v), c)
        except BoundViolation:
            return
        assert g[u] - g[v] >= space.dist[u, v] - 1e-9
        assert lipschitz_constant(space, g) <= c + 1e-9


class TestFxy:
    def test_endpoint_values(self):
        s = example_space("random", 6, seed=3)
        raw = f_xy_raw(s, 1, 2)
        d = s.dist[1, 2]
        assert raw[1] == pytest.approx(d / 2) and raw[2] == pytest.approx(-d / 2)

    def test_equidistant_zero(self, line3):
        assert f_xy_raw(line3, 0, 2)[1] == 0.0

    def test_pairs_to_one(self):
        s = example_space("random", 6, seed=3)
        f = f_xy(s, 4, 1)
        assert f(molecule(s, 4, 1)) == 1.0

    @given(metric_spaces(min_n=2, max_n=9), st.data())
    def test_constant_at_most_one(self, space, data):
        x = data.draw(st.integers(0, space.n - 1))
        y = data.draw(st.integers(0, space.n - 1).filter(lambda t: t != x))
        f = f_xy(space, x, y)
        assert f.slope(space, x, y) == pytest.approx(1.0, abs=1e-12)
        assert lipschitz_constant(space, f) <= 1 + 1e-9


class TestLocality:
    def test_identity_on_grid(self):
        k = 10
        s = example_space("interval", k)
        f = LipschitzFunction([i / k for i in range(k + 1)], 0)
        prof = locality_profile(s, f, [1.0, 0.5, 0.1])
        assert prof.best_slope == pytest.approx((1.0, 1.0, 1.0))
        assert all(prof.local_at(i) for i in range(3))

    def test_below_resolution_empty(self):
        s = example_space("interval", 10)
        f = LipschitzFunction(np.arange(11) / 10, 0)
        prof = locality_profile(s, f, [0.05])
        assert prof.best_slope == (None,) and prof.epsilon_points == ((),)

    def test_plateau_decays(self):
        q = example_space("quotient-metric", 100)
        f = plateau(q, "x0", "x1", 0.1)
        prof = locality_profile(q, f, [0.5, 0.1, 0.05, 0.02])
        assert prof.best_slope[0] == pytest.approx(1.0)
        assert prof.best_slope[-1] < prof.lipschitz_constant - 0.02

    def test_scales_must_decrease(self, line3):
        with pytest.raises(DomainError):
            locality_profile(line3, LipschitzFunction([0, 1, 2], 0), [0.1, 0.5])


class TestFarFunction:
    def test_line_grid(self):
        s = example_space("interval", 20)
        mu = FreeElement.delta(s, "1")
        g = free_norm(s, mu).certificate
        ff = construct_far_function(s, g, mu, 0.2, "0.2", "0.25", 0.01)
        assert ff.case == "I"
        assert ff.value_on_molecule == pytest.approx(-1 / 1.01, abs=1e-12)
        assert ff.value_on_mu > 0.8
        assert lipschitz_constant(s, ff.function) <= 1 + 1e-9

    def test_huge_eps_leaves_slice(self):
        s = example_space("interval", 20)
        mu = FreeElement.delta(s, "1")
        g = free_norm(s, mu).certificate
        with pytest.raises(DomainError, match="slice threshold"):
            construct_far_function(s, g, mu, 0.2, "0.2", "0.25", 5.0)

    def test_case_two(self):
        s = example_space("interval", 40)
        mu = molecule(s, "0.5", "1")
        g = free_norm(s, mu).certificate
        ff = construct_far_function(s, g, mu, 0.3, "0.5", "0.525", 0.2)
        assert ff.case == "II"
        assert ff.value_on_molecule == pytest.approx(-1 / 1.2, abs=1e-12)
        assert ff.value_on_mu > ff.threshold

    def test_rejects_v_in_support(self):
        s = example_space("interval", 10)
        mu = molecule(s, "0.5", "1")
        g = free_norm(s, mu).certificate
        with pytest.raises(DomainError):
            construct_far_function(s, g, mu, 0.3, "0.4", "0.5", 0.2)

    def test_slope_bound_violation(self):
        s = example_space("interval", 10)
        mu = FreeElement.delta(s, "1")
        g = free_norm(s, mu).certificate
        with pytest.raises(DomainError, match="Lipschitz bound"):
            construct_far_function(s, g, mu, 0.5, "0.6", "0.5", 0.01)


def test_bound_violation_is_assertion():
    assert issubclass(BoundViolation, AssertionError)
