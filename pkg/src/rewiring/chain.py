"""Discrete-time rewiring Markov chains.

A chain on graphs with vertex set ``[n]`` is driven by i.i.d. rewiring maps,
``G_m = W_m(G_{m-1})``.  For ``n <= 4`` the full transition matrix is built
from the closed-form kernels; rows and columns are indexed by
:attr:`rewiring.graph.Graph.index`.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .graph import Graph, RewiringMap, all_graphs, all_maps, all_permutations, apply_rewiring, num_pairs, permute
from .measures import edge_stat
from .report import TOLERANCE, CheckReport, finish

log = logging.getLogger(__name__)

MAX_EXACT_ORDER = 4


@dataclass
class DiscreteTrajectory:
    states: list[Graph]
    applied_maps: Optional[list[RewiringMap]] = None
    seed: Optional[int] = None

    def __len__(self):
        return len(self.states)


@dataclass
class ExactKernel:
    """Dense transition matrix over all ``2^(n(n-1)/2)`` graphs of order ``n``."""

    n: int
    probs: np.ndarray

    def __call__(self, g: Graph, g2: Graph):
        return self.probs[g.index, g2.index]

    def states(self) -> list[Graph]:
        return all_graphs(self.n)


def _as_rng(rng) -> tuple[np.random.Generator, Optional[int]]:
    if isinstance(rng, np.random.Generator):
        return rng, None
    return np.random.default_rng(rng), rng


def step(g: Graph, sampler, rng: np.random.Generator) -> tuple[Graph, RewiringMap]:
    """One transition: draw ``W`` from the sampler and return ``(W(g), W)``.

    ``sampler`` is any object with ``sample_map(n, rng)`` or a callable
    ``(n, rng) -> RewiringMap``.
    """
    draw = sampler.sample_map if hasattr(sampler, "sample_map") else sampler
    w = draw(g.n, rng)
    if w.n != g.n:
        raise ValueError(f"sampler produced order {w.n}, state has order {g.n}")
    return apply_rewiring(w, g), w


def simulate(g0: Graph, sampler, steps: int, rng, record_maps: bool = False) -> DiscreteTrajectory:
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    gen, seed = _as_rng(rng)
    states = [g0]
    maps = [] if record_maps else None
    g = g0
    for _ in range(steps):
        g, w = step(g, sampler, gen)
        states.append(g)
        if record_maps:
            maps.append(w)
    return DiscreteTrajectory(states, maps, seed)


def _check_order(n: int) -> None:
    if not 1 <= n <= MAX_EXACT_ORDER:
        raise ValueError(f"exact kernels are limited to 1 <= n <= {MAX_EXACT_ORDER}, got {n}")


def _fill(n: int, fn, exact: bool) -> np.ndarray:
    graphs = all_graphs(n)
    size = len(graphs)
    out = np.empty((size, size), dtype=object if exact else float)
    for a, g in enumerate(graphs):
        for b, g2 in enumerate(graphs):
            out[a, b] = fn(g, g2)
    return out


def exact_kernel(kernel, n: int) -> ExactKernel:
    """Transition matrix from a closed-form kernel (``kernel.transition_prob``).

    Exact (object array of ``Fraction``) when the kernel parameters are
    rational, float otherwise.
    """
    _check_order(n)
    g = Graph.empty(n)
    exact = isinstance(kernel.transition_prob(g, g), Fraction)
    return ExactKernel(n, _fill(n, kernel.transition_prob, exact))


def brute_force_kernel(kernel, n: int) -> ExactKernel:
    """Transition matrix summed over every rewiring map: ``sum_W P(W) 1{W(g) = g2}``."""
    _check_order(n)
    graphs = all_graphs(n)
    maps = all_maps(n)
    weights = [kernel.map_prob(w) for w in maps]
    exact = isinstance(weights[0], Fraction)
    out = np.zeros((len(graphs), len(graphs)), dtype=object if exact else float)
    if exact:
        out[:] = Fraction(0)
    for w, pw in zip(maps, weights):
        for a, g in enumerate(graphs):
            out[a, apply_rewiring(w, g).index] += pw
    return ExactKernel(n, out)


@dataclass
class StationaryResult:
    pi: np.ndarray
    residual: float
    iterations: int
    converged: bool
    unique: bool
    periodic: bool = False


def _spectral_flags(p: np.ndarray) -> tuple[bool, bool]:
    vals = np.linalg.eigvals(p.T)
    on_circle = np.abs(np.abs(vals) - 1) < 1e-9
    at_one = np.abs(vals - 1) < 1e-9
    return int(at_one.sum()) == 1, bool((on_circle & ~at_one).any())


def stationary_solve(
    k: ExactKernel,
    initial: Optional[np.ndarray] = None,
    tol: float = TOLERANCE,
    max_iter: int = 10**6,
) -> StationaryResult:
    """Left fixed point ``pi P = pi`` by power iteration.

    Iterates the lazy kernel ``(P + I)/2`` (same fixed points, aperiodic) from
    ``initial`` (uniform by default) until the L1 residual of ``pi P - pi`` is
    below ``tol``.  ``unique`` is False when eigenvalue 1 is repeated; in that
    case the result is one fixed point among several.
    """
    p = np.asarray(k.probs, dtype=float)
    size = p.shape[0]
    pi = np.full(size, 1.0 / size) if initial is None else np.asarray(initial, dtype=float).copy()
    pi /= pi.sum()
    lazy = 0.5 * (p + np.eye(size))
    residual = float(np.abs(pi @ p - pi).sum())
    it = 0
    while residual >= tol and it < max_iter:
        pi = pi @ lazy
        pi /= pi.sum()
        it += 1
        residual = float(np.abs(pi @ p - pi).sum())
    converged = residual < tol
    if not converged:
        log.warning("power iteration stopped after %d iterations, residual %.3g", it, residual)
    unique, periodic = _spectral_flags(p)
    return StationaryResult(pi, residual, it, converged, unique, periodic)


Family = Union[Callable[[int], np.ndarray], object]


def family_matrix(family, n: int) -> np.ndarray:
    """Matrix of a kernel family at order ``n``.

    ``family`` is a closed-form kernel (has ``transition_prob``) or a
    callable ``n -> matrix`` such as a generator builder or a fault-injected
    kernel.
    """
    if hasattr(family, "transition_prob"):
        return exact_kernel(family, n).probs
    return np.asarray(family(n))


def lumping_violation(big: np.ndarray, small: np.ndarray, m: int, n: int) -> tuple[float, tuple[int, int]]:
    """Largest ``|small(g, g2) - sum_{g''|[m] = g2} big(g*, g'')|`` over ``g* |[m] = g``.

    Relies on the index convention: restricting a graph of order ``n`` to
    ``[m]`` keeps the low ``m(m-1)/2`` bits of its index.
    """
    size_n = big.shape[0]
    size_m = small.shape[0]
    mask = size_m - 1
    restricted = np.arange(size_n) & mask
    lumped = np.zeros((size_n, size_m), dtype=big.dtype)
    if big.dtype == object:
        lumped[:] = Fraction(0)
    for target in range(size_m):
        lumped[:, target] = big[:, restricted == target].sum(axis=1)
    diff = np.abs((lumped - small[restricted, :]).astype(float))
    worst = np.unravel_index(int(np.argmax(diff)), diff.shape)
    return float(diff.max()), (int(worst[0]), int(worst[1]))


def verify_consistency(family, m: int, n: int, label: str = "kernel", tol: float = TOLERANCE) -> CheckReport:
    """Check that the order-``m`` kernel is the lumping of the order-``n`` kernel."""
    if not 1 <= m < n <= MAX_EXACT_ORDER:
        raise ValueError(f"need 1 <= m < n <= {MAX_EXACT_ORDER}")
    big = family_matrix(family, n)
    small = family_matrix(family, m)
    viol, (g_star, g2) = lumping_violation(big, small, m, n)
    rep = CheckReport(
        "consistency",
        {"family": label, "m": m, "n": n},
        viol,
        tol,
        worst=f"g*={Graph.from_index(n, g_star).edges()} g2={Graph.from_index(m, g2).edges()}",
    )
    return finish(rep)


def verify_exchangeability(family, n: int, label: str = "kernel", tol: float = TOLERANCE) -> CheckReport:
    """Check ``P(g, g2) = P(g^s, g2^s)`` for every permutation ``s`` of ``[n]``."""
    mat = family_matrix(family, n)
    graphs = all_graphs(n)
    worst_val, worst = 0.0, ""
    for sigma in all_permutations(n):
        perm = np.array([permute(g, sigma).index for g in graphs])
        diff = np.abs((mat - mat[np.ix_(perm, perm)]).astype(float))
        v = float(diff.max()) if diff.size else 0.0
        if v > worst_val:
            a, b = np.unravel_index(int(np.argmax(diff)), diff.shape)
            worst_val = v
            worst = f"sigma={[s + 1 for s in sigma.images]} g={graphs[a].edges()} g2={graphs[b].edges()}"
    return finish(CheckReport("exchangeability", {"family": label, "n": n}, worst_val, tol, worst=worst))


def verify_detailed_balance(kernel, measure, n: int, label: str = "kernel", tol: float = TOLERANCE) -> CheckReport:
    """Check ``pi(g) P(g, g2) = pi(g2) P(g2, g)`` for all pairs.

    ``measure`` is a function of a graph or a vector indexed by graph index.
    """
    mat = family_matrix(kernel, n)
    graphs = all_graphs(n)
    if callable(measure):
        pi = np.array([measure(g) for g in graphs], dtype=mat.dtype)
    else:
        pi = np.asarray(measure)
    flow = pi[:, None] * mat
    diff = np.abs((flow - flow.T).astype(float))
    a, b = np.unravel_index(int(np.argmax(diff)), diff.shape)
    rep = CheckReport(
        "detailed_balance",
        {"family": label, "n": n},
        float(diff.max()),
        tol,
        worst=f"g={graphs[a].edges()} g2={graphs[b].edges()}",
    )
    return finish(rep)


def trajectory_records(traj: DiscreteTrajectory) -> list[dict]:
    out = []
    for m, g in enumerate(traj.states):
        n0, n1 = edge_stat(g)
        out.append({"m": m, "n": g.n, "edges": [list(e) for e in g.edges()], "stat": {"n0": n0, "n1": n1}})
    return out


def write_trajectory(traj: DiscreteTrajectory, path) -> None:
    """JSON-lines, one record per step, 1-based edges."""
    with open(path, "w") as fh:
        for rec in trajectory_records(traj):
            fh.write(json.dumps(rec, separators=(",", ":")) + "\n")


def read_trajectory(path, n: Optional[int] = None) -> list[Graph]:
    """Read a JSON-lines trajectory; ``n`` defaults to each record's ``"n"`` field."""
    states = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                states.append(Graph.from_edges(rec["n"] if n is None else n, rec["edges"]))
            except (ValueError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    return states


def write_kernel_csv(k: ExactKernel, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "col", "prob"])
        size = k.probs.shape[0]
        for a in range(size):
            for b in range(size):
                writer.writerow([a, b, format(float(k.probs[a, b]), ".17g")])
