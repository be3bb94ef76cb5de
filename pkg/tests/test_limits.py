import csv
import itertools
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rewiring.graph import Graph, RewiringMap, num_pairs, permute, Permutation, restrict
from rewiring.limits import (
    LimitVector,
    azuma_budget,
    check_limit_structure,
    convergence_check,
    count_injections,
    density,
    iid_evaluator,
    injection_counts,
    limit_metric,
    limit_vector,
    limit_vector_estimates,
    motifs,
    write_density_csv,
)
from rewiring.measures import IidEdgeLimit, iid_limit_density, sample_rewiring


def oracle_count(f, x):
    """Count injections by direct sub-object comparison."""
    m, n = f.n, x.n
    fm = f.matrix() if isinstance(f, Graph) else np.stack(f.matrices())
    xm = x.matrix() if isinstance(x, Graph) else np.stack(x.matrices())
    count = 0
    for psi in itertools.permutations(range(n), m):
        idx = np.array(psi)
        sub = xm[np.ix_(idx, idx)] if xm.ndim == 2 else xm[:, idx][:, :, idx]
        count += bool(np.array_equal(sub, fm))
    return count


PATH = Graph.from_edges(3, [(1, 2), (2, 3)])
EDGE = Graph.complete(2)


def test_count_examples():
    assert count_injections(EDGE, Graph.complete(3)) == 6
    assert count_injections(EDGE, PATH) == 4
    assert count_injections(Graph.empty(2), Graph.empty(2)) == 2


def test_count_matches_oracle_graphs():
    rng = np.random.default_rng(31)
    x = Graph(6, rng.integers(0, 2, 15))
    for m in (2, 3):
        for f in motifs("graph", m):
            assert count_injections(f, x) == oracle_count(f, x)


def test_count_matches_oracle_maps():
    rng = np.random.default_rng(32)
    x = sample_rewiring(IidEdgeLimit(0.4, 0.6), 5, rng)
    for f in motifs("map", 2):
        assert count_injections(f, x) == oracle_count(f, x)
    for f in motifs("map", 3)[::7]:
        assert count_injections(f, x) == oracle_count(f, x)


def test_count_type_and_order_errors():
    with pytest.raises(TypeError):
        count_injections(RewiringMap.identity(2), PATH)
    with pytest.raises(ValueError):
        count_injections(Graph.empty(4), PATH)


def test_density_examples():
    assert density(EDGE, Graph.complete(3)).value == 1
    assert density(EDGE, PATH).value == pytest.approx(2 / 3)


def test_density_order_sums():
    rng = np.random.default_rng(33)
    x = Graph(7, rng.integers(0, 2, 21))
    for m in range(1, 5):
        assert sum(density(f, x).value for f in motifs("graph", m)) == pytest.approx(1, abs=1e-12)


def test_density_monte_carlo_within_three_se():
    rng = np.random.default_rng(34)
    x = Graph(9, rng.integers(0, 2, 36))
    f = motifs("graph", 3)[3]
    exact = density(f, x, mode="exact").value
    mc = density(f, x, mode="monte-carlo", samples=100_000, rng=rng)
    assert mc.mode == "monte-carlo" and mc.sample_count == 100_000
    assert abs(mc.value - exact) < 3 * np.sqrt(exact * (1 - exact) / 100_000)


def test_density_auto_switches_beyond_cap():
    rng = np.random.default_rng(35)
    x = Graph(20, rng.integers(0, 2, num_pairs(20)))
    assert density(motifs("graph", 2)[1], x).mode == "exact"
    assert density(motifs("graph", 3)[0], x, rng=rng, samples=1000).mode == "monte-carlo"
    with pytest.raises(ValueError):
        injection_counts(x, 3)


def test_density_permutation_invariant():
    rng = np.random.default_rng(36)
    x = Graph(7, rng.integers(0, 2, 21))
    sigma = Permutation(rng.permutation(7))
    assert (injection_counts(x, 3) == injection_counts(permute(x, sigma), 3)).all()


def test_limit_vector_complete_graph():
    vec = limit_vector(Graph.complete(6), 2)
    assert vec[Graph.complete(2)] == 1 and vec[Graph.empty(2)] == 0


def test_limit_vector_sampled_map_near_cells():
    rng = np.random.default_rng(37)
    lim = IidEdgeLimit(0.3, 0.7)
    vec = limit_vector(sample_rewiring(lim, 200, rng), 2)
    for f in motifs("map", 2):
        assert abs(vec[f] - iid_limit_density(lim, f)) < 0.1
    assert all(abs(s - 1) < 1e-9 for s in vec.order_sums().values())


def test_limit_vector_mixed_modes():
    rng = np.random.default_rng(38)
    vec = limit_vector(Graph(15, rng.integers(0, 2, num_pairs(15))), 3, monte_carlo=True, samples=5000, rng=rng)
    assert vec.modes == {1: "exact", 2: "exact", 3: "monte-carlo"}
    modes = {e.motif.n: (e.mode, e.sample_count) for e in limit_vector_estimates(vec)}
    assert modes[2] == ("exact", 0) and modes[3] == ("monte-carlo", 5000)
    with pytest.raises(ValueError):
        limit_vector(Graph.empty(15), 3)


def _random_vector(rng):
    return limit_vector(Graph(6, rng.integers(0, 2, 15)), 3)


def test_limit_metric_properties():
    rng = np.random.default_rng(39)
    u = _random_vector(rng)
    assert limit_metric(u, u) == 0
    for _ in range(100):
        a, b, c = (_random_vector(rng) for _ in range(3))
        assert limit_metric(a, b) == limit_metric(b, a)
        assert limit_metric(a, c) <= limit_metric(a, b) + limit_metric(b, c) + 1e-15


def test_limit_metric_mismatch():
    with pytest.raises(ValueError):
        limit_metric(limit_vector(Graph.empty(4), 2), limit_vector(Graph.empty(4), 3))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_structure_iid(n):
    rep = check_limit_structure(iid_evaluator(IidEdgeLimit(F(2, 5), F(3, 5))), n)
    assert rep.passed and rep.max_violation == 0


def test_structure_float_evaluator():
    rep = check_limit_structure(iid_evaluator(IidEdgeLimit(0.4, 0.6)), 2)
    assert rep.passed


def test_structure_fault_injection():
    lim = IidEdgeLimit(F(2, 5), F(3, 5))
    base = iid_evaluator(lim)
    ident = RewiringMap.identity(2)

    def scaled(v):
        return base(v) * F(99, 100) if v == ident else base(v)

    rep = check_limit_structure(scaled, 2)
    assert not rep.passed
    deficit = float(base(ident) / 100)
    assert rep.details["normalization_n"] == pytest.approx(deficit)


def test_structure_point_mass():
    rng = np.random.default_rng(40)
    fixed = sample_rewiring(IidEdgeLimit(0.5, 0.5), 4, rng)

    def point(v):
        return 1 if v == restrict(fixed, v.n) else 0

    for n in (1, 2, 3):
        assert check_limit_structure(point, n).passed


def test_azuma_budget_values():
    assert azuma_budget(0.1, 200, 2) == pytest.approx(2 * np.exp(-0.25))
    assert azuma_budget(0.1, 2000, 2) == pytest.approx(2 * np.exp(-2.5))
    assert azuma_budget(0.1, 2000, 2) == pytest.approx(0.164, abs=1e-3)


def test_convergence_check_deterministic_limit():
    rng = np.random.default_rng(41)
    rep = convergence_check(IidEdgeLimit(1, 1), RewiringMap.constant(2, 1, 1), [10, 50], 0.1, rng, repetitions=3)
    assert all(d == 0 for row in rep.rows for d in row.deviations)
    assert not rep.flagged


def test_convergence_check_identity_motif():
    rng = np.random.default_rng(42)
    rep = convergence_check(IidEdgeLimit(0.1, 0.9), RewiringMap.identity(2), [200, 2000], 0.1, rng, repetitions=100)
    assert rep.target == pytest.approx(0.81)
    for row in rep.rows:
        assert row.fraction_within >= 0.95
    assert not rep.rows[0].excess
    assert rep.rows[0].budget > 1 and rep.rows[1].budget < 1
    assert not rep.flagged


def test_density_csv(tmp_path):
    vec = limit_vector(PATH, 2)
    path = tmp_path / "d.csv"
    write_density_csv(limit_vector_estimates(vec), path)
    rows = list(csv.DictReader(open(path)))
    assert [r["order"] for r in rows] == ["1", "2", "2"]
    assert float(rows[2]["value"]) == pytest.approx(2 / 3)


@settings(max_examples=50, deadline=None)
@given(st.integers(3, 7).flatmap(lambda n: st.lists(st.integers(0, 1), min_size=num_pairs(n), max_size=num_pairs(n))))
def test_restricted_density_sums_property(bits):
    n = int((1 + (1 + 8 * len(bits)) ** 0.5) / 2)
    x = Graph(n, bits)
    counts = injection_counts(x, 3)
    assert counts.sum() == n * (n - 1) * (n - 2)
    # each order-3 count lumps onto order 2 by forgetting vertex 3, times (n-2) choices
    lumped = np.zeros(2, dtype=np.int64)
    for f in motifs("graph", 3):
        lumped[restrict(f, 2).index] += counts[f.index]
    assert (lumped == (n - 2) * injection_counts(x, 2)).all()
