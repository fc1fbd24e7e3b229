import itertools
import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from buckley_osthus.exceptions import BudgetError, ParameterError, UnsupportedError
from buckley_osthus.experiments import cover as cover_mod
from buckley_osthus.experiments import ensemble as ensemble_mod
from buckley_osthus.experiments.cover import build_stable_cover, check_stability, check_witness
from buckley_osthus.experiments.ensemble import (
    EnsembleSpec,
    ReplicaError,
    concentration_probe,
    fit_power_law,
    run_ensemble,
    wilson_interval,
)
from buckley_osthus.experiments.exact import (
    enumerate_outcomes,
    exact_small_n,
    sampler_graph_law,
    sequential_graph_law,
)
from buckley_osthus.experiments.perturbation import (
    lipschitz_audit,
    lipschitz_bound,
    perturb_one_coordinate,
    perturb_sequence,
)
from buckley_osthus.model import ModelParams, XiSequence, build_sequence, generate, materialize
from buckley_osthus.statistics import count_tables, second_degrees


def naive_targets(xi):
    out = []
    for x in xi:
        while x % 2 == 0:
            x = xi[x // 2 - 1]
        out.append((x + 1) // 2)
    return out


def naive_tables(n, targets):
    edges = [(i, t) for i, t in enumerate(targets, start=1)]
    deg = Counter()
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    X, N, P = Counter(), Counter(), Counter()
    for t in range(1, n + 1):
        nbrs = {w for u, v in edges if t in (u, v) for w in (u, v) if w != t}
        d2 = sum(1 for u, v in edges if t not in (u, v) and (u in nbrs or v in nbrs))
        X[d2] += 1
        (P if (t, t) in edges else N)[(deg[t], d2)] += 1
    return X, N, P


def naive_expectations(n, a):
    """Pure-Python enumeration, independent of the package's graph code."""
    a = Fraction(a)
    EX, EN, EP = Counter(), Counter(), Counter()
    for xi in itertools.product(*[range(1, 2 * i) for i in range(1, n + 1)]):
        prob = Fraction(1)
        for i, x in enumerate(xi, start=1):
            if i > 1:
                prob *= (a if x % 2 else 1) / ((a + 1) * i - 1)
        X, N, P = naive_tables(n, naive_targets(list(xi)))
        for src, dst in ((X, EX), (N, EN), (P, EP)):
            for key, c in src.items():
                dst[key] += prob * c
    return EX, EN, EP


class TestExact:
    def test_n1(self):
        t = exact_small_n(ModelParams(2.5, 1, 1))
        assert t.P == {(2, 0): 1}

    def test_n2_hand(self):
        t = exact_small_n(ModelParams(Fraction(1), 1, 2))
        assert t.P[(2, 0)] == Fraction(2, 3)
        assert t.P[(3, 0)] == Fraction(2, 3)
        assert t.N == {(1, 1): Fraction(2, 3)}

    def test_n3_golden(self):
        assert exact_small_n(ModelParams(Fraction(1), 1, 3)).Y(1) == Fraction(8, 5)

    @pytest.mark.parametrize("n,a", [(3, Fraction(1)), (4, Fraction(1)), (4, Fraction(1, 2)), (3, Fraction(2))])
    def test_matches_naive(self, n, a):
        t = exact_small_n(ModelParams(a, 1, n))
        EX, EN, EP = naive_expectations(n, a)
        assert t.X == {k: v for k, v in EX.items() if v}
        assert t.N == {k: v for k, v in EN.items() if v}
        assert t.P == {k: v for k, v in EP.items() if v}

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_mass(self, n):
        t = exact_small_n(ModelParams(Fraction(2), 1, n))
        assert sum(t.X.values()) == n
        assert sum(t.N.values()) + sum(t.P.values()) == n

    def test_probabilities_sum_to_one(self):
        assert sum(p for _, p in enumerate_outcomes(5, Fraction(1, 3))) == 1

    def test_budget(self):
        with pytest.raises(BudgetError):
            exact_small_n(ModelParams(1.0, 1, 7))

    def test_m2_unsupported(self):
        with pytest.raises(UnsupportedError):
            exact_small_n(ModelParams(1.0, 2, 2))

    @pytest.mark.parametrize("a", [Fraction(1, 2), Fraction(1), Fraction(2)])
    def test_sampler_equals_sequential_law(self, a):
        for n in range(1, 5):
            law = sampler_graph_law(n, a)
            assert law == sequential_graph_law(n, a)
            assert sum(law.values()) == 1


class TestPerturbation:
    def setup_method(self):
        self.params = ModelParams(1.0, 1, 4)
        self.seq = XiSequence.from_xi([1, 1, 3, 5], params=self.params)

    def test_hand_example(self):
        g = perturb_one_coordinate(self.seq, 3, 1)
        assert g.edges.tolist() == [[1, 1], [2, 1], [3, 1], [4, 3]]
        assert self.seq.xi.tolist() == [1, 1, 3, 5]

    def test_even_value_follows_chain(self):
        g = perturb_one_coordinate(self.seq, 4, 2)
        assert g.edges.tolist()[3] == [4, 1]

    def test_identity(self):
        assert perturb_one_coordinate(self.seq, 3, 3) == materialize(self.seq)

    @pytest.mark.parametrize("i,v", [(1, 1), (5, 1), (3, 0), (3, 6)])
    def test_out_of_range(self, i, v):
        with pytest.raises(ParameterError):
            perturb_sequence(self.seq, i, v)

    @given(st.integers(2, 60), st.integers(0, 2**32), st.data())
    @settings(max_examples=80, deadline=None)
    def test_suffix_resolution_matches_full(self, n, seed, data):
        seq = build_sequence(ModelParams(1.5, 1, n), seed)
        i = data.draw(st.integers(2, n))
        v = data.draw(st.integers(1, 2 * i - 1))
        new = perturb_sequence(seq, i, v)
        xi = seq.xi.tolist()
        xi[i - 1] = v
        assert new.target.tolist() == naive_targets(xi)

    def test_bounds(self):
        assert lipschitz_bound(1, 3) == 7 and lipschitz_bound(2, 3) == 8

    @given(st.floats(0.2, 4), st.integers(1, 3), st.integers(2, 40), st.integers(0, 6), st.integers(0, 2**32))
    @settings(max_examples=40, deadline=None)
    def test_exhaustive_values_within_bound(self, a, m, n, k, seed):
        r = lipschitz_audit(ModelParams(a, m, n), k, 3, seed, all_values=True)
        assert r.violations == 0 and r.max_delta <= r.bound

    def test_audit_deterministic(self):
        p = ModelParams(1.0, 1, 100)
        assert lipschitz_audit(p, 3, 50, 9) == lipschitz_audit(p, 3, 50, 9)

    def test_audit_needs_two_coordinates(self):
        with pytest.raises(ParameterError):
            lipschitz_audit(ModelParams(1.0, 1, 1), 3, 5, 0)


class TestCover:
    @given(st.sampled_from([0.5, 1.0, 2.0]), st.integers(1, 300), st.integers(0, 8), st.integers(0, 2**32))
    @settings(max_examples=60, deadline=None)
    def test_properties(self, a, n, k, seed):
        seq, g = generate(ModelParams(a, 1, n), seed)
        c = build_stable_cover(g, seq, k)
        kv = np.flatnonzero(second_degrees(g) >= k) + 1
        assert np.array_equal(c.vertices, kv)
        assert c.q == kv.size
        assert check_stability(c, seq)
        assert c.total_cost <= c.budget
        assert check_witness(c, seq, completions=25, seed=seed) == []

    def test_stability_against_naive(self):
        seq, g = generate(ModelParams(1.0, 1, 150), 3)
        c = build_stable_cover(g, seq, 3)
        tgt = naive_targets(seq.xi.tolist())
        for _, ks in c.groups:
            s = set(ks.tolist())
            heads = {tgt[i - 1] for i in s}
            assert s == {i for i in range(1, 151) if tgt[i - 1] in heads}

    def test_unstable_set_detected(self):
        seq, g = generate(ModelParams(1.0, 1, 100), 4)
        c = build_stable_cover(g, seq, 2)
        verts, ks = c.groups[-1]
        broken = cover_mod.StableCover(c.k, [(verts, ks[:-1])], c.multiplicity)
        assert not check_stability(broken, seq)

    def test_empty_cover(self):
        seq, g = generate(ModelParams(1.0, 1, 10), 0)
        c = build_stable_cover(g, seq, 21)
        assert c.q == 0 and c.total_cost == 0 and c.budget == 0
        assert check_stability(c, seq) and check_witness(c, seq) == []

    def test_m2_unsupported(self):
        seq, g = generate(ModelParams(1.0, 2, 10), 0)
        with pytest.raises(UnsupportedError):
            build_stable_cover(g, seq, 2)

    def test_witness_detects_weak_set(self):
        # an empty coordinate set certifies nothing: some completion breaks the vertex
        seq, g = generate(ModelParams(1.0, 1, 200), 5)
        d2 = second_degrees(g)
        v = int(np.argmax(d2)) + 1
        weak = cover_mod.StableCover(int(d2[v - 1]), [(np.array([v]), np.array([1]))], np.zeros(200, dtype=np.int64))
        assert check_witness(weak, seq, completions=50, seed=1)


class TestEnsemble:
    def test_degenerate(self):
        r = run_ensemble(EnsembleSpec(ModelParams(1.0, 1, 1), 1, 0, (0, 1, 2)))
        assert r.y_samples.tolist() == [[1, 0, 0]]
        assert r.sd_Y.tolist() == [0, 0, 0]

    def test_seeds_and_reduction(self):
        spec = EnsembleSpec(ModelParams(0.8, 2, 300), 6, 40, (1, 2, 4, 8), l_grid=(2, 3), d_grid=(2, 3, 4))
        r = run_ensemble(spec)
        for j, seed in enumerate(spec.seeds()):
            t = count_tables(generate(spec.params, seed)[1])
            assert r.y_samples[j].tolist() == [t.Y(k) for k in spec.k_grid]
            assert r.x_samples[j].tolist() == [t.X.get(k, 0) for k in spec.k_grid]
            assert r.n_samples[(2, 4)][j] == t.N.get((2, 4), 0)
        assert np.all(np.diff(r.mean_Y) <= 0)
        assert np.all(r.sd_Y >= 0) and np.all(r.sd_X >= 0)
        assert r.degree_samples.shape == (6, 3)

    def test_parallel_matches_serial(self):
        base = dict(params=ModelParams(1.0, 1, 2000), replicas=8, base_seed=3, k_grid=(2, 4, 8))
        a = run_ensemble(EnsembleSpec(**base))
        b = run_ensemble(EnsembleSpec(**base, n_jobs=4))
        assert np.array_equal(a.y_samples, b.y_samples)
        assert a.fit == b.fit

    def test_replica_error(self, monkeypatch):
        real = ensemble_mod.generate

        def flaky(params, seed):
            if seed == 12:
                raise RuntimeError("boom")
            return real(params, seed)

        monkeypatch.setattr(ensemble_mod, "generate", flaky)
        with pytest.raises(ReplicaError) as info:
            run_ensemble(EnsembleSpec(ModelParams(1.0, 1, 10), 5, 10))
        assert info.value.replica == 2 and info.value.seed == 12

    @pytest.mark.parametrize("kw", [dict(replicas=0), dict(k_grid=()), dict(k_grid=(4, 4)), dict(base_seed=-1)])
    def test_invalid_spec(self, kw):
        base = dict(params=ModelParams(1.0), replicas=2, base_seed=0, k_grid=(1, 2))
        base.update(kw)
        with pytest.raises(ParameterError):
            EnsembleSpec(**base)

    def test_fit_recovers_power_law(self):
        ks = np.array([2, 4, 8, 16, 32])
        f = fit_power_law(ks, 7.0 * ks**-1.3)
        assert f.slope == pytest.approx(-1.3) and f.slope_se < 1e-6
        assert f.predict(10) == pytest.approx(7.0 * 10**-1.3)
        two = fit_power_law([2, 4], [8, 2])
        assert two.slope == pytest.approx(-2) and math.isnan(two.slope_se)

    def test_fit_restricted_grid(self):
        spec = EnsembleSpec(ModelParams(2.0, 1, 10**4), 2, 0, (2, 4, 8, 16, 32))
        r = run_ensemble(spec)
        assert r.fit.ks == (2, 4, 8)  # 10^4 ** (1/4) = 10

    @pytest.mark.parametrize("s,n", [(0, 10), (3, 10), (10, 10), (17, 100)])
    def test_wilson_formula(self, s, n):
        z = 1.959963984540054
        p = s / n
        centre = (p + z * z / (2 * n)) / (1 + z * z / n)
        half = z / (1 + z * z / n) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
        lo, hi = wilson_interval(s, n)
        assert lo == pytest.approx(max(0.0, centre - half), abs=1e-12)
        assert hi == pytest.approx(min(1.0, centre + half), abs=1e-12)

    def test_probe_well_formed(self):
        spec = EnsembleSpec(ModelParams(1.0, 1, 3000), 30, 0, (2, 8))
        rates = concentration_probe(spec, 0.2)
        assert {(r.k, r.statistic) for r in rates} == {(2, "Y"), (8, "Y"), (2, "X"), (8, "X")}
        for r in rates:
            assert 0 <= r.low <= r.rate <= r.high <= 1

    def test_probe_epsilon_checked(self):
        with pytest.raises(ParameterError):
            concentration_probe(EnsembleSpec(ModelParams(1.0), 2), 1.0)

    def test_report_json_safe(self):
        import json

        r = run_ensemble(EnsembleSpec(ModelParams(1.0, 1, 500), 3, 0, (2, 4)))
        json.dumps(r.as_dict(), allow_nan=False)


def loop_vertex_expectations(n, a, L, K):
    """``E P_i(l, k)`` for ``i = 1..n`` by the one-step transition of loop vertices.

    A loop vertex of degree ``l`` and second degree ``k`` carries total
    neighbour weight ``k + (l - 2) a``, so the expectation evolves in closed form.
    Works with ``Fraction`` or float ``a``.
    """
    zero = a * 0
    E = [[zero] * (K + 1) for _ in range(L + 1)]
    out = []
    for i in range(1, n + 1):
        D = (a + 1) * i - 1
        new = [[zero] * (K + 1) for _ in range(L + 1)]
        for l in range(2, L + 1):
            for k in range(K + 1):
                stay = E[l][k] * (1 - (l - 1 + a + k + (l - 2) * a) / D)
                up_k = E[l][k - 1] * (k - 1 + (l - 2) * a) / D if k >= 1 else zero
                up_l = E[l - 1][k] * (l - 2 + a) / D if l >= 3 else zero
                new[l][k] = stay + up_k + up_l
        new[2][0] += a / D
        E = new
        out.append(E)
    return out


class TestLoopVertexBound:
    @pytest.mark.parametrize("a", [Fraction(1, 2), Fraction(1), Fraction(2)])
    def test_transition_matches_enumeration(self, a):
        traj = loop_vertex_expectations(5, a, 10, 10)
        for n in range(1, 6):
            ex = exact_small_n(ModelParams(a, 1, n))
            got = {(l, k): v for l, row in enumerate(traj[n - 1]) for k, v in enumerate(row) if v}
            assert got == ex.P

    @pytest.mark.parametrize("a", [1.0, 2.0, 3.5])
    def test_expectation_dominated_by_p(self, a):
        from buckley_osthus.analytic import build_p_table

        p = build_p_table(a, 14, 14).p
        for E in loop_vertex_expectations(400, a, 14, 14):
            assert np.all(np.array(E) <= p * (1 + 1e-12))

    def test_default_p0_too_small_below_one(self):
        # the base case needs k >= 1/a; at a = 1/2 the default seed is beaten at n = 3
        from buckley_osthus.analytic import build_p_table

        p = build_p_table(0.5, 6, 6).p
        ex = exact_small_n(ModelParams(Fraction(1, 2), 1, 3))
        assert ex.P[(3, 1)] == Fraction(3, 28)
        assert float(ex.P[(3, 1)]) > p[3, 1]


def test_edge_counts_approach_c_table():
    from buckley_osthus.analytic import build_c_table

    c = build_c_table(1.0, 4, 4).c
    cells = [(l, k) for l in (1, 2, 3) for k in (1, 2, 3)]
    errs = []
    for n in (10**3, 10**4, 10**5):
        r = run_ensemble(EnsembleSpec(ModelParams(1.0, 1, n), 40, k_grid=(1, 2, 3), l_grid=(1, 2, 3)))
        means = r.mean_N()
        errs.append(np.mean([abs(means[cell] / (n * c[cell]) - 1) for cell in cells]))
    assert errs[0] > errs[1] > errs[2]
