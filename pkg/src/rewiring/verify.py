"""Exact and seeded verification suites over every module.

Each case returns a :class:`rewiring.report.CheckReport`; a suite collects
them into a :class:`rewiring.report.VerifyReport`.  Exact cases use rational
parameters so their violations are exactly zero when the identity holds;
the stochastic cases run from fixed seeds and are deterministic.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy import stats

from . import graph as gc
from .chain import (
    brute_force_kernel,
    exact_kernel,
    simulate,
    stationary_solve,
    verify_consistency,
    verify_detailed_balance,
    verify_exchangeability,
)
from .ctmc import couple, flip_count, generator_family, generator_matrix, restrict_trajectory, simulate_ctmc
from .graph import Graph, Permutation, RewiringMap, all_graphs, all_permutations
from .limits import check_limit_structure, density, injection_counts, iid_evaluator, motifs
from .measures import (
    BetaMixedKernelParams,
    GlobalAtom,
    IidEdgeLimit,
    RewiringMeasureSpec,
    er_graph_prob,
    reversible_kernel,
    reversible_stationary,
)
from .report import TOLERANCE, CheckReport, VerifyReport, finish

F = Fraction

# Worked example: a graph on [5], a rewiring map, and its image.
DISPLAY_G = [
    [0, 1, 1, 0, 1],
    [1, 0, 0, 0, 1],
    [1, 0, 0, 1, 0],
    [0, 0, 1, 0, 0],
    [1, 1, 0, 0, 0],
]
DISPLAY_W = [
    [(0, 0), (1, 0), (0, 1), (0, 0), (0, 1)],
    [(1, 0), (0, 0), (1, 0), (1, 1), (1, 0)],
    [(0, 1), (1, 0), (0, 0), (0, 1), (0, 0)],
    [(0, 0), (1, 1), (0, 1), (0, 0), (1, 0)],
    [(0, 1), (1, 0), (0, 0), (1, 0), (0, 0)],
]
DISPLAY_WG = [
    [0, 0, 1, 0, 1],
    [0, 0, 1, 1, 0],
    [1, 1, 0, 1, 0],
    [0, 1, 1, 0, 1],
    [1, 0, 0, 1, 0],
]


def display_objects() -> tuple[Graph, RewiringMap, Graph]:
    return Graph.from_matrix(DISPLAY_G), RewiringMap.from_entries(DISPLAY_W), Graph.from_matrix(DISPLAY_WG)


def standard_kernels() -> dict[str, object]:
    """Rational-parameter kernels used across the exact checks."""
    return {
        "er(1/5,1/2)": IidEdgeLimit(F(1, 5), F(1, 2)),
        "er(3/10,3/10)": IidEdgeLimit(F(3, 10), F(3, 10)),
        "mixed(1,2,1/2,3/2)": BetaMixedKernelParams(F(1), F(2), F(1, 2), F(3, 2)),
        "symmetric(alpha=1,beta=1/2)": reversible_kernel(F(1), F(1, 2)),
        "reversible(1,2,1/2)": reversible_kernel(F(1), F(1, 2), F(2)),
    }


def standard_specs() -> dict[str, RewiringMeasureSpec]:
    return {
        "local(1,2)": RewiringMeasureSpec.local(F(1), F(2)),
        "global(0.3,0.7)": RewiringMeasureSpec((GlobalAtom(F(1), IidEdgeLimit(F(3, 10), F(7, 10))),)),
        "mixed-spec": RewiringMeasureSpec(
            (
                GlobalAtom(F(1), IidEdgeLimit(F(3, 10), F(7, 10))),
                GlobalAtom(F(1, 2), IidEdgeLimit(F(1, 10), F(9, 10))),
            ),
            F(1, 2),
            F(3, 2),
        ),
    }


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


# graph-core


def case_display() -> CheckReport:
    g, w, expected = display_objects()
    got = gc.apply_rewiring(w, g)
    wrong = int((got.bits != expected.bits).sum())
    rep = CheckReport("rewiring_display_example", {"n": 5}, wrong, 1)
    return finish(rep)


def case_lipschitz(n: int = 4, maps: int = 16, seed: int = 1) -> CheckReport:
    rng = _rng(seed)
    graphs = all_graphs(n)
    worst = 0.0
    for _ in range(maps):
        w = IidEdgeLimit(0.5, 0.5).sample_map(n, rng)
        images = [gc.apply_rewiring(w, g) for g in graphs]
        for a, b in itertools.combinations(range(len(graphs)), 2):
            excess = gc.distance(images[a], images[b]) - gc.distance(graphs[a], graphs[b])
            worst = max(worst, float(excess))
    return finish(CheckReport("lipschitz", {"n": n, "maps": maps}, worst))


def case_restriction(n: int = 4, trials: int = 50, seed: int = 2) -> CheckReport:
    rng = _rng(seed)
    bad = 0
    for _ in range(trials):
        w = IidEdgeLimit(0.5, 0.5).sample_map(n, rng)
        g = Graph(n, rng.integers(0, 2, gc.num_pairs(n)))
        for m in range(1, n + 1):
            if gc.restrict(gc.apply_rewiring(w, g), m) != gc.apply_rewiring(gc.restrict(w, m), gc.restrict(g, m)):
                bad += 1
    return finish(CheckReport("restriction_commutes", {"n": n, "trials": trials}, bad, 1))


def case_associativity(n: int = 3, trials: int = 20, seed: int = 3) -> CheckReport:
    rng = _rng(seed)
    graphs = all_graphs(n)
    bad = 0
    for _ in range(trials):
        w1, w2, w3 = (IidEdgeLimit(0.5, 0.5).sample_map(n, rng) for _ in range(3))
        left = gc.compose(w3, gc.compose(w2, w1))
        right = gc.compose(gc.compose(w3, w2), w1)
        for g in graphs:
            direct = gc.apply_rewiring(w3, gc.apply_rewiring(w2, gc.apply_rewiring(w1, g)))
            if not (gc.apply_rewiring(left, g) == gc.apply_rewiring(right, g) == direct):
                bad += 1
    return finish(CheckReport("compose_associative", {"n": n, "trials": trials}, bad, 1))


def case_equivariance(n: int = 4, trials: int = 10, seed: int = 4) -> CheckReport:
    rng = _rng(seed)
    bad = 0
    for _ in range(trials):
        w = IidEdgeLimit(0.5, 0.5).sample_map(n, rng)
        g = Graph(n, rng.integers(0, 2, gc.num_pairs(n)))
        for sigma in all_permutations(n):
            lhs = gc.permute(gc.apply_rewiring(w, g), sigma)
            rhs = gc.apply_rewiring(gc.permute(w, sigma), gc.permute(g, sigma))
            bad += lhs != rhs
    return finish(CheckReport("permute_equivariance", {"n": n, "trials": trials}, bad, 1))


# measures / chain-discrete


def case_row_sums(n: int = 3) -> list[CheckReport]:
    out = []
    for name, k in standard_kernels().items():
        probs = exact_kernel(k, n).probs
        viol = max(abs(float(s - 1)) for s in probs.sum(axis=1))
        out.append(finish(CheckReport("row_sums", {"family": name, "n": n}, viol)))
    return out


def case_er_iid_rows(p=F(3, 10), n: int = 3) -> CheckReport:
    k = exact_kernel(IidEdgeLimit(p, p), n).probs
    target = np.array([er_graph_prob(p, g) for g in all_graphs(n)], dtype=object)
    viol = max(abs(float(x)) for x in (k - target[None, :]).ravel())
    return finish(CheckReport("iid_chain_rows_constant", {"p": p, "n": n}, viol))


def case_brute_force(n: int = 3) -> list[CheckReport]:
    out = []
    for name, k in standard_kernels().items():
        closed = exact_kernel(k, n).probs
        brute = brute_force_kernel(k, n).probs
        viol = max(abs(float(x)) for x in (closed - brute).ravel())
        out.append(finish(CheckReport("kernel_equals_map_sum", {"family": name, "n": n}, viol)))
    return out


def case_consistency(pairs=((2, 3), (2, 4), (3, 4))) -> list[CheckReport]:
    return [verify_consistency(k, m, n, name) for name, k in standard_kernels().items() for m, n in pairs]


def case_kernel_exchangeability(n: int = 3) -> list[CheckReport]:
    return [verify_exchangeability(k, n, name) for name, k in standard_kernels().items()]


def case_detailed_balance(n: int = 3) -> list[CheckReport]:
    alpha, beta, alpha_p = F(1), F(1, 2), F(2)
    out = [
        verify_detailed_balance(
            reversible_kernel(alpha, beta, alpha_p),
            reversible_stationary(alpha, beta, alpha_p),
            n,
            "reversible(1,2,1/2)",
        ),
        verify_detailed_balance(
            reversible_kernel(alpha, beta), reversible_stationary(alpha, beta), n, "symmetric(alpha=1,beta=1/2)"
        ),
    ]
    p = F(3, 10)
    out.append(verify_detailed_balance(IidEdgeLimit(p, p), lambda g: er_graph_prob(p, g), n, "er(3/10,3/10)"))
    return out


def case_er_stationary(n: int = 3) -> CheckReport:
    res = stationary_solve(exact_kernel(IidEdgeLimit(0.2, 0.5), n))
    target = np.array([er_graph_prob(2 / 7, g) for g in all_graphs(n)])
    viol = float(np.abs(res.pi - target).max())
    return finish(CheckReport("er_stationary_fixed_point", {"p0": 0.2, "p1": 0.5, "n": n}, viol, 1e-10))


def case_markov_two_step(steps: int = 100_000, seed: int = 5) -> CheckReport:
    """Empirical two-step frequencies vs products of one-step kernel entries at n=2."""
    k = IidEdgeLimit(0.2, 0.5)
    traj = simulate(Graph.empty(2), k, steps, _rng(seed))
    s = np.array([g.index for g in traj.states])
    p = np.asarray(exact_kernel(k, 2).probs, dtype=float)
    worst = 0.0
    for a in range(2):
        starts = np.flatnonzero(s[:-2] == a)
        for b, c in itertools.product(range(2), repeat=2):
            expected = p[a, b] * p[b, c]
            freq = np.mean((s[starts + 1] == b) & (s[starts + 2] == c))
            se = math.sqrt(expected * (1 - expected) / len(starts))
            worst = max(worst, abs(freq - expected) / se)
    return finish(CheckReport("markov_two_step", {"n": 2, "steps": steps, "seed": seed}, worst, 3.0))


# limits


def case_limit_structure() -> list[CheckReport]:
    out = []
    for p0, p1 in ((F(2, 5), F(3, 5)), (F(3, 10), F(7, 10)), (F(1), F(1))):
        for n in (1, 2, 3):
            rep = check_limit_structure(iid_evaluator(IidEdgeLimit(p0, p1)), n)
            rep.params["limit"] = f"iid({p0},{p1})"
            out.append(rep)
    return out


def case_density_invariance(n: int = 6, m: int = 3, seed: int = 6) -> CheckReport:
    rng = _rng(seed)
    x = IidEdgeLimit(0.4, 0.6).sample_map(n, rng)
    base = injection_counts(x, m)
    worst = 0
    for _ in range(10):
        sigma = Permutation(rng.permutation(n))
        worst = max(worst, int(np.abs(injection_counts(gc.permute(x, sigma), m) - base).max()))
    return finish(CheckReport("density_permutation_invariant", {"n": n, "m": m}, worst, 1))


def case_density_order_sums(n: int = 6) -> CheckReport:
    g = Graph.from_edges(n, [(1, 2), (2, 3), (3, 4), (1, 4), (5, 6)])
    viol = 0.0
    for m in range(1, 5):
        viol = max(viol, abs(sum(density(f, g).value for f in motifs("graph", m)) - 1))
    return finish(CheckReport("density_order_sums", {"n": n}, viol))


def case_density_monte_carlo(n: int = 8, samples: int = 100_000, seed: int = 7) -> CheckReport:
    rng = _rng(seed)
    x = Graph(n, rng.integers(0, 2, gc.num_pairs(n)))
    worst = 0.0
    for f in motifs("graph", 3):
        exact = density(f, x, mode="exact").value
        mc = density(f, x, mode="monte-carlo", samples=samples, rng=rng)
        se = math.sqrt(max(exact * (1 - exact), 1e-300) / samples)
        if exact in (0.0, 1.0):
            worst = max(worst, 0.0 if mc.value == exact else math.inf)
        else:
            worst = max(worst, abs(mc.value - exact) / se)
    return finish(CheckReport("density_exact_vs_monte_carlo", {"n": n, "samples": samples}, worst, 3.0))


# ctmc


def case_generator_rows(n: int = 3) -> list[CheckReport]:
    out = []
    for name, spec in standard_specs().items():
        q = generator_matrix(spec, n)
        viol = max(abs(float(s)) for s in q.sum(axis=1))
        out.append(finish(CheckReport("generator_rows_sum_zero", {"spec": name, "n": n}, viol)))
    return out


def case_generator_brute(n: int = 3) -> list[CheckReport]:
    out = []
    for name, spec in standard_specs().items():
        diff = generator_matrix(spec, n) - generator_matrix(spec, n, method="brute")
        viol = max(abs(float(x)) for x in diff.ravel())
        out.append(finish(CheckReport("jump_rates_equal_map_sum", {"spec": name, "n": n}, viol)))
    return out


def case_generator_consistency(pairs=((2, 3),)) -> list[CheckReport]:
    return [
        verify_consistency(generator_family(spec), m, n, f"generator {name}")
        for name, spec in standard_specs().items()
        for m, n in pairs
    ]


def case_generator_exchangeability(n: int = 3) -> list[CheckReport]:
    return [verify_exchangeability(generator_family(spec), n, f"generator {name}") for name, spec in standard_specs().items()]


def coupling_initial_states(n: int = 5) -> tuple[Graph, Graph]:
    """Two graphs on [5] that agree on [3] and differ at pair (1,4)."""
    g = Graph.from_edges(n, [(1, 2), (2, 3), (3, 5)])
    h = Graph.from_edges(n, [(1, 2), (2, 3), (1, 4), (4, 5)])
    return g, h


def case_coupling(min_events: int = 1000, seed: int = 8) -> CheckReport:
    spec = RewiringMeasureSpec((GlobalAtom(1.0, IidEdgeLimit(0.3, 0.7)),), 1.0, 1.0)
    g, h = coupling_initial_states()
    bound = gc.distance(g, h)
    rng = _rng(seed)
    horizon = 100.0
    coupled = couple(g, h, spec, horizon, rng)
    while len(coupled.distances) - 1 < min_events:
        horizon *= 2
        coupled = couple(g, h, spec, horizon, rng)
    worst = max(float(d - bound) for d in coupled.distances)
    monotone = 0.0 if coupled.nonincreasing else 1.0
    rep = CheckReport(
        "coupling_lipschitz",
        {"n": 5, "events": len(coupled.distances) - 1, "bound": str(bound)},
        max(worst, monotone),
        1e-300,
        details={"nonincreasing": coupled.nonincreasing},
    )
    rep.passed = worst <= 0 and coupled.nonincreasing
    rep.max_violation = max(worst, monotone, 0.0)
    return rep


def thinning_samples(runs: int, seed: int, horizon: float = 1.0) -> tuple[list[int], list[int]]:
    """Flip counts of pair (1,2): projected from order 3, and simulated at order 2."""
    spec = RewiringMeasureSpec((GlobalAtom(1.0, IidEdgeLimit(0.3, 0.7)),), 0.5, 1.0)
    rng = _rng(seed)
    projected, direct = [], []
    for _ in range(runs):
        traj = simulate_ctmc(Graph.empty(3), spec, horizon, rng)
        projected.append(flip_count(restrict_trajectory(traj, 2)))
        direct.append(flip_count(simulate_ctmc(Graph.empty(2), spec, horizon, rng)))
    return projected, direct


def chi2_homogeneity(a: list[int], b: list[int], min_count: int = 5) -> tuple[float, float]:
    """Chi-square test that two count samples share a distribution; returns (statistic, p-value)."""
    top = max(max(a), max(b))
    ca = np.bincount(a, minlength=top + 1)
    cb = np.bincount(b, minlength=top + 1)
    # merge sparse tail cells so expected counts stay above min_count
    cut = top + 1
    while cut > 2 and min(ca[cut - 1 :].sum(), cb[cut - 1 :].sum()) < min_count:
        cut -= 1
    table = np.array(
        [np.append(ca[: cut - 1], ca[cut - 1 :].sum()), np.append(cb[: cut - 1], cb[cut - 1 :].sum())]
    )
    res = stats.chi2_contingency(table)
    return float(res.statistic), float(res.pvalue)


def case_thinning(runs: int = 10_000, seed: int = 9) -> CheckReport:
    projected, direct = thinning_samples(runs, seed)
    stat, pval = chi2_homogeneity(projected, direct)
    rep = CheckReport(
        "thinning_consistency",
        {"m": 2, "n": 3, "runs": runs},
        0.01 - pval if pval < 0.01 else 0.0,
        1e-300,
        details={"chi2": stat, "p_value": pval},
    )
    rep.passed = pval >= 0.01
    return rep


SUITES: dict[str, list[Callable[[], object]]] = {
    "graph-core": [case_display, case_lipschitz, case_restriction, case_associativity, case_equivariance],
    "measures": [case_row_sums, case_er_iid_rows, case_kernel_exchangeability, case_detailed_balance],
    "chain-discrete": [case_brute_force, case_consistency, case_er_stationary, case_markov_two_step],
    "limits": [case_limit_structure, case_density_invariance, case_density_order_sums, case_density_monte_carlo],
    "ctmc": [
        case_generator_rows,
        case_generator_brute,
        case_generator_consistency,
        case_generator_exchangeability,
        case_coupling,
        case_thinning,
    ],
}
SUITES["default"] = [case for name in ("graph-core", "measures", "chain-discrete", "limits", "ctmc") for case in SUITES[name]]


def run_suite(name: str = "default") -> VerifyReport:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(sorted(SUITES))}")
    report = VerifyReport(name)
    for case in SUITES[name]:
        result = case()
        report.cases.extend(result if isinstance(result, list) else [result])
    return report
