import csv
import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rewiring.chain import (
    ExactKernel,
    brute_force_kernel,
    exact_kernel,
    read_trajectory,
    simulate,
    stationary_solve,
    step,
    verify_consistency,
    verify_detailed_balance,
    verify_exchangeability,
    write_kernel_csv,
    write_trajectory,
)
from rewiring.graph import Graph, RewiringMap, all_graphs, complement, num_pairs
from rewiring.measures import (
    BetaMixedKernelParams,
    IidEdgeLimit,
    beta_mixed_graph_prob,
    er_graph_prob,
    reversible_kernel,
    reversible_stationary,
)


def edge_frequency_se(q, lam, pairs, steps):
    """Standard error of the time-averaged edge frequency of an i.i.d.-edge chain.

    Each pair is a two-state chain with lag-one autocorrelation ``lam = p1 - p0``,
    so the variance of its time average is ``q(1-q)(1+lam)/((1-lam) T)``.
    """
    return math.sqrt(q * (1 - q) * (1 + lam) / ((1 - lam) * pairs * steps))


def test_step_identity_sampler():
    g = Graph.from_edges(3, [(1, 3)])
    g2, w = step(g, lambda n, rng: RewiringMap.identity(n), np.random.default_rng(0))
    assert g2 == g and w.is_identity()


def test_step_complement_sampler():
    g = Graph.from_edges(4, [(1, 3), (2, 4)])
    g2, w = step(g, IidEdgeLimit(1, 0), np.random.default_rng(0))
    assert g2 == complement(g)
    assert w == RewiringMap.constant(4, 1, 0)


def test_one_step_law_matches_kernel():
    rng = np.random.default_rng(21)
    lim = IidEdgeLimit(0.2, 0.5)
    g = Graph.from_edges(3, [(1, 2)])
    draws = 100_000
    counts = np.zeros(8)
    for _ in range(draws):
        counts[step(g, lim, rng)[0].index] += 1
    expected = np.array([lim.transition_prob(g, g2) for g2 in all_graphs(3)])
    se = np.sqrt(expected * (1 - expected) / draws)
    assert np.all(np.abs(counts / draws - expected) < 3 * se)


def test_simulate_zero_steps():
    g = Graph.from_edges(3, [(1, 2)])
    traj = simulate(g, IidEdgeLimit(0.2, 0.5), 0, 0)
    assert traj.states == [g]


def test_absorbing_empty():
    traj = simulate(Graph.complete(5), IidEdgeLimit(0, 0), 5, 1)
    assert all(s == Graph.empty(5) for s in traj.states[1:])


def test_simulate_seed_determinism():
    a = simulate(Graph.empty(4), IidEdgeLimit(0.2, 0.5), 50, 9, record_maps=True)
    b = simulate(Graph.empty(4), IidEdgeLimit(0.2, 0.5), 50, 9, record_maps=True)
    assert a.states == b.states and a.applied_maps == b.applied_maps


def test_long_run_edge_frequency():
    steps = 100_000
    traj = simulate(Graph.empty(3), IidEdgeLimit(0.2, 0.5), steps, 22)
    freq = np.mean([g.n_edges for g in traj.states[1:]]) / 3
    assert abs(freq - 2 / 7) < 3 * edge_frequency_se(2 / 7, 0.3, 3, steps)


def test_exact_kernel_single_pair():
    k = exact_kernel(IidEdgeLimit(0.3, 0.6), 2).probs
    assert np.allclose(k, [[0.7, 0.3], [0.4, 0.6]], atol=1e-15)


def test_exact_kernel_is_rational_for_fractions():
    k = exact_kernel(IidEdgeLimit(F(3, 10), F(3, 5)), 2).probs
    assert k.tolist() == [[F(7, 10), F(3, 10)], [F(2, 5), F(3, 5)]]


@pytest.mark.parametrize(
    "kernel",
    [IidEdgeLimit(F(1, 5), F(1, 2)), BetaMixedKernelParams(F(1), F(2), F(1, 2), F(3, 2))],
    ids=["iid", "mixed"],
)
def test_kernel_equals_map_sum(kernel):
    assert (exact_kernel(kernel, 3).probs == brute_force_kernel(kernel, 3).probs).all()


def test_mixed_rows_sum_to_one():
    k = exact_kernel(BetaMixedKernelParams(1.0, 2.0, 0.5, 1.5), 3).probs
    assert np.abs(k.sum(axis=1) - 1).max() < 1e-12


def test_exact_kernel_order_cap():
    with pytest.raises(ValueError):
        exact_kernel(IidEdgeLimit(0.2, 0.5), 5)


def test_stationary_er_fixed_point():
    res = stationary_solve(exact_kernel(IidEdgeLimit(0.2, 0.5), 3))
    target = np.array([er_graph_prob(2 / 7, g) for g in all_graphs(3)])
    assert res.converged and res.unique and not res.periodic
    assert np.abs(res.pi - target).max() < 1e-10


def test_stationary_reversible_fixed_point():
    res = stationary_solve(exact_kernel(reversible_kernel(1.0, 0.5, 2.0), 3))
    # edges carry alpha' + beta = 2.5, non-edges alpha + beta = 1.5
    target = np.array([beta_mixed_graph_prob(2.5, 1.5, g) for g in all_graphs(3)])
    assert np.abs(res.pi - target).max() < 1e-10


def test_stationary_identity_kernel_flags_nonunique():
    init = np.arange(1, 9, dtype=float)
    res = stationary_solve(ExactKernel(3, np.eye(8)), initial=init)
    assert not res.unique
    assert np.allclose(res.pi, init / init.sum())


def test_stationary_periodic_flag():
    res = stationary_solve(exact_kernel(IidEdgeLimit(1, 0), 2))
    assert res.periodic and res.converged
    assert np.allclose(res.pi, [0.5, 0.5])


@pytest.mark.parametrize("m,n", [(2, 3), (2, 4), (3, 4)])
def test_consistency_iid_and_mixed(m, n):
    for kernel in (IidEdgeLimit(F(1, 5), F(1, 2)), BetaMixedKernelParams(F(1), F(2), F(1, 2), F(3, 2))):
        rep = verify_consistency(kernel, m, n)
        assert rep.passed and rep.max_violation == 0


def test_consistency_fault_injection():
    base = IidEdgeLimit(0.2, 0.5)

    def corrupted(n):
        mat = exact_kernel(base, n).probs.copy()
        if n == 3:
            mat[5, 2] += 1e-3
        return mat

    rep = verify_consistency(corrupted, 2, 3)
    assert not rep.passed
    assert rep.max_violation == pytest.approx(1e-3, rel=1e-6)


def test_exchangeability_all_kernels():
    for kernel in (
        IidEdgeLimit(F(1, 5), F(1, 2)),
        BetaMixedKernelParams(F(1), F(2), F(1, 2), F(3, 2)),
        reversible_kernel(F(1), F(1, 2), F(2)),
    ):
        rep = verify_exchangeability(kernel, 3)
        assert rep.passed and rep.max_violation == 0


def test_exchangeability_fault_injection():
    base = IidEdgeLimit(0.2, 0.5)

    def biased(n):
        # pair (1,2) switches on with probability 0.9 instead of 0.2
        mat = exact_kernel(base, n).probs.copy()
        for a, g in enumerate(all_graphs(n)):
            for b, g2 in enumerate(all_graphs(n)):
                if g.bits[0] == 0:
                    mat[a, b] *= (0.9 if g2.bits[0] else 0.1) / (0.2 if g2.bits[0] else 0.8)
        return mat

    rep = verify_exchangeability(biased, 3)
    assert not rep.passed and rep.max_violation > 0.01


def test_exchangeability_order_one_vacuous():
    assert verify_exchangeability(IidEdgeLimit(0.2, 0.5), 1).passed


def test_detailed_balance_reversible():
    alpha, beta, alpha_p = F(1), F(1, 2), F(2)
    rep = verify_detailed_balance(
        reversible_kernel(alpha, beta, alpha_p), reversible_stationary(alpha, beta, alpha_p), 3
    )
    assert rep.passed and rep.max_violation == 0


def test_detailed_balance_general_mixed_reports_violation():
    k = BetaMixedKernelParams(F(1), F(2), F(1, 2), F(3, 2))
    pi = stationary_solve(exact_kernel(k, 3)).pi
    rep = verify_detailed_balance(k, pi, 3)
    assert not rep.passed and rep.max_violation > 1e-6


def test_detailed_balance_constant_rows():
    p = F(3, 10)
    rep = verify_detailed_balance(IidEdgeLimit(p, p), lambda g: er_graph_prob(p, g), 3)
    assert rep.passed


def test_trajectory_roundtrip(tmp_path):
    traj = simulate(Graph.empty(5), IidEdgeLimit(0.2, 0.5), 20, 3)
    path = tmp_path / "t.jsonl"
    write_trajectory(traj, path)
    assert read_trajectory(path) == traj.states
    assert read_trajectory(path, 5) == traj.states


def test_read_trajectory_error_names_line(tmp_path):
    path = tmp_path / "t.jsonl"
    path.write_text('{"m":0,"n":3,"edges":[]}\n{"m":1,"n":3,"edges":[[1,1]]}\n')
    with pytest.raises(ValueError, match=":2:"):
        read_trajectory(path)


def test_kernel_csv(tmp_path):
    k = exact_kernel(IidEdgeLimit(0.3, 0.6), 2)
    path = tmp_path / "k.csv"
    write_kernel_csv(k, path)
    rows = list(csv.DictReader(open(path)))
    assert len(rows) == 4
    assert float(rows[1]["prob"]) == pytest.approx(0.3)


@settings(max_examples=25, deadline=None)
@given(
    st.fractions(min_value=0, max_value=1, max_denominator=12),
    st.fractions(min_value=0, max_value=1, max_denominator=12),
)
def test_consistency_property(p0, p1):
    rep = verify_consistency(IidEdgeLimit(p0, p1), 2, 3)
    assert rep.max_violation == 0


@settings(max_examples=20, deadline=None)
@given(st.lists(st.fractions(min_value=F(1, 5), max_value=3, max_denominator=6), min_size=4, max_size=4))
def test_mixed_consistency_property(params):
    rep = verify_consistency(BetaMixedKernelParams(*params), 2, 3)
    assert rep.max_violation == 0
