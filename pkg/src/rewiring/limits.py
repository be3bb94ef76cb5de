"""Motif densities of graphs and rewiring maps, and their limit vectors.

Motifs are labeled objects of order ``m``: a motif ``F`` occurs at an
injection ``psi: [m] -> [n]`` when the induced sub-object ``x^psi`` equals
``F``.  No isomorphism quotient is taken, so the densities of all motifs of
one order sum to one.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from .graph import Graph, Motif, RewiringMap, all_graphs, all_maps, extensions, num_pairs
from .measures import IidEdgeLimit, iid_limit_density, sample_rewiring
from .report import TOLERANCE, CheckReport, finish

MAX_EXACT_MOTIF_ORDER = 4
MAX_EXACT_HOST_ORDER = 12
DEFAULT_SAMPLES = 100_000


def falling(n: int, m: int) -> int:
    return math.perm(n, m)


def _kind(x: Motif) -> str:
    return "graph" if isinstance(x, Graph) else "map"


def _base(kind: str) -> int:
    return 2 if kind == "graph" else 4


def _cells(x: Motif) -> np.ndarray:
    return x.bits if isinstance(x, Graph) else x.codes


def motifs(kind: str, m: int) -> list[Motif]:
    """All labeled motifs of order ``m``, ordered by index."""
    return all_graphs(m) if kind == "graph" else all_maps(m)


@lru_cache(maxsize=None)
def _motif_pairs(m: int) -> tuple[np.ndarray, np.ndarray]:
    rows, cols = [], []
    for b in range(1, m):
        for a in range(b):
            rows.append(a)
            cols.append(b)
    return np.array(rows, dtype=np.intp), np.array(cols, dtype=np.intp)


def _induced_indices(x: Motif, injections: np.ndarray) -> np.ndarray:
    """Index of ``x^psi`` for each row ``psi`` of ``injections`` (shape K x m)."""
    m = injections.shape[1]
    a, b = _motif_pairs(m)
    if a.size == 0:
        return np.zeros(len(injections), dtype=np.int64)
    u = injections[:, a]
    v = injections[:, b]
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    pos = hi * (hi - 1) // 2 + lo
    cells = _cells(x)[pos].astype(np.int64)
    weights = _base(_kind(x)) ** np.arange(a.size, dtype=np.int64)
    return cells @ weights


def _all_injections(n: int, m: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(n), m)), dtype=np.intp).reshape(-1, m)


def _exact_allowed(m: int, n: int) -> bool:
    return m <= 2 or (m <= MAX_EXACT_MOTIF_ORDER and n <= MAX_EXACT_HOST_ORDER)


def _pair_counts(x: Motif) -> np.ndarray:
    """Order-2 injection counts: each unordered pair carries two injections."""
    return 2 * np.bincount(_cells(x).astype(np.intp), minlength=_base(_kind(x)))


def injection_counts(x: Motif, m: int) -> np.ndarray:
    """``ind(F, x)`` for every motif ``F`` of order ``m``, indexed by motif index."""
    if not 1 <= m <= x.n:
        raise ValueError(f"motif order {m} not in [1, {x.n}]")
    if m == 1:
        return np.array([x.n], dtype=np.int64)
    if m == 2:
        return _pair_counts(x).astype(np.int64)
    if not _exact_allowed(m, x.n):
        raise ValueError(f"exact counting capped at m <= {MAX_EXACT_MOTIF_ORDER}, n <= {MAX_EXACT_HOST_ORDER}")
    idx = _induced_indices(x, _all_injections(x.n, m))
    return np.bincount(idx, minlength=_base(_kind(x)) ** num_pairs(m)).astype(np.int64)


def count_injections(f: Motif, x: Motif) -> int:
    """Number of injections ``psi`` with ``x^psi = f``."""
    if type(f) is not type(x):
        raise TypeError("motif and host must both be graphs or both rewiring maps")
    if f.n > x.n:
        raise ValueError(f"motif order {f.n} exceeds host order {x.n}")
    return int(injection_counts(x, f.n)[f.index])


def _random_injections(n: int, m: int, size: int, rng: np.random.Generator) -> np.ndarray:
    out = rng.integers(0, n, size=(size, m))
    while True:
        s = np.sort(out, axis=1)
        bad = (s[:, 1:] == s[:, :-1]).any(axis=1)
        if not bad.any():
            return out
        out[bad] = rng.integers(0, n, size=(int(bad.sum()), m))


@dataclass
class DensityEstimate:
    motif: Motif
    value: float
    mode: str
    sample_count: int = 0
    stderr: float = 0.0


def density(
    f: Motif,
    x: Motif,
    mode: str = "auto",
    samples: int = DEFAULT_SAMPLES,
    rng: Optional[np.random.Generator] = None,
) -> DensityEstimate:
    """Injection density ``ind(f, x) / n^(m)`` (falling factorial).

    ``mode`` is ``"exact"``, ``"monte-carlo"`` or ``"auto"`` (exact within
    the counting caps, Monte Carlo beyond).  Monte Carlo averages the
    indicator over ``samples`` uniform injections drawn from ``rng``.
    """
    if type(f) is not type(x):
        raise TypeError("motif and host must both be graphs or both rewiring maps")
    m, n = f.n, x.n
    if m > n:
        raise ValueError(f"motif order {m} exceeds host order {n}")
    if mode == "auto":
        mode = "exact" if _exact_allowed(m, n) else "monte-carlo"
    if mode == "exact":
        value = count_injections(f, x) / falling(n, m)
        return DensityEstimate(f, value, "exact")
    if mode != "monte-carlo":
        raise ValueError(f"unknown density mode {mode!r}")
    if rng is None:
        raise ValueError("monte-carlo density needs an rng")
    hits = _induced_indices(x, _random_injections(n, m, samples, rng)) == f.index
    value = float(hits.mean())
    return DensityEstimate(f, value, "monte-carlo", samples, math.sqrt(value * (1 - value) / samples))


@dataclass
class LimitVector:
    """Densities of every labeled motif of order ``1..M``."""

    kind: str
    M: int
    entries: dict[int, np.ndarray] = field(default_factory=dict)
    modes: dict[int, str] = field(default_factory=dict)
    sample_count: int = 0

    def __getitem__(self, motif: Motif) -> float:
        return float(self.entries[motif.n][motif.index])

    def order_sums(self) -> dict[int, float]:
        return {m: float(v.sum()) for m, v in self.entries.items()}


def limit_vector(
    x: Motif,
    M: int,
    monte_carlo: bool = False,
    samples: int = DEFAULT_SAMPLES,
    rng: Optional[np.random.Generator] = None,
) -> LimitVector:
    if not 1 <= M <= x.n:
        raise ValueError(f"max order {M} not in [1, {x.n}]")
    kind = _kind(x)
    entries, modes = {}, {}
    for m in range(1, M + 1):
        if _exact_allowed(m, x.n):
            entries[m] = injection_counts(x, m) / falling(x.n, m)
            modes[m] = "exact"
            continue
        if not monte_carlo:
            raise ValueError(
                f"order {m} on a host of order {x.n} is beyond exact counting; pass monte_carlo=True"
            )
        if rng is None:
            raise ValueError("monte-carlo limit vector needs an rng")
        idx = _induced_indices(x, _random_injections(x.n, m, samples, rng))
        entries[m] = np.bincount(idx, minlength=_base(kind) ** num_pairs(m)) / samples
        modes[m] = "monte-carlo"
    return LimitVector(kind, M, entries, modes, samples)


def limit_metric(u: LimitVector, v: LimitVector) -> float:
    """``sum_m 2^-m sum_F |u_F - v_F|`` over the shared orders ``1..M``."""
    if u.M != v.M or u.kind != v.kind:
        raise ValueError("limit vectors differ in kind or maximal order")
    return float(sum(2.0**-m * np.abs(u.entries[m] - v.entries[m]).sum() for m in range(1, u.M + 1)))


def iid_evaluator(lim: IidEdgeLimit) -> Callable[[RewiringMap], float]:
    return lambda v: iid_limit_density(lim, v)


def check_limit_structure(
    evaluator: Callable[[Motif], float],
    n: int,
    kind: str = "map",
    tol: float = TOLERANCE,
) -> CheckReport:
    """Check both structural identities of a limit at order ``n``.

    Marginal consistency: ``v(V) = sum of v(V*)`` over the one-vertex
    extensions ``V*`` of ``V``.  Normalization: ``sum_V v(V) = 1`` at orders
    ``n`` and ``n + 1``.
    """
    if not 1 <= n <= 3:
        raise ValueError("structure checks run at orders 1..3")
    small = motifs(kind, n)
    big = motifs(kind, n + 1)
    values_big = {v.index: evaluator(v) for v in big}
    marginal = 0.0
    worst = ""
    for v in small:
        total = sum(values_big[e.index] for e in extensions(v, n + 1))
        d = abs(float(evaluator(v) - total))
        if d > marginal:
            marginal, worst = d, repr(v)
    norm_n = abs(float(sum(evaluator(v) for v in small) - 1))
    norm_n1 = abs(float(sum(values_big.values()) - 1))
    rep = CheckReport(
        "limit_structure",
        {"kind": kind, "n": n},
        max(marginal, norm_n, norm_n1),
        tol,
        worst=worst,
        details={"marginal": marginal, "normalization_n": norm_n, "normalization_n_plus_1": norm_n1},
    )
    return finish(rep)


def azuma_budget(epsilon: float, n: int, m: int) -> float:
    """Azuma bound ``2 exp(-eps^2 n / (2 m^2))`` on ``P(|t(V, W|[n]) - v(V)| > eps)``."""
    return 2.0 * math.exp(-(epsilon**2) * n / (2.0 * m**2))


@dataclass
class ConvergenceRow:
    n: int
    budget: float
    deviations: list[float]
    failures: int
    excess: bool

    @property
    def fraction_within(self) -> float:
        return 1.0 - self.failures / len(self.deviations)


@dataclass
class ConvergenceReport:
    motif: RewiringMap
    target: float
    epsilon: float
    rows: list[ConvergenceRow]

    @property
    def flagged(self) -> bool:
        return any(r.excess for r in self.rows)


def convergence_check(
    lim: IidEdgeLimit,
    v: RewiringMap,
    n_schedule: Sequence[int],
    epsilon: float,
    rng: np.random.Generator,
    repetitions: int = 1,
    samples: int = DEFAULT_SAMPLES,
) -> ConvergenceReport:
    """Compare ``t(v, W)`` for sampled ``W`` of each order with the analytic ``v``-density.

    Each repetition draws a fresh ``W``.  A row is flagged when the observed
    failure fraction (deviation > ``epsilon``) exceeds the Azuma budget; a
    budget of one or more is uninformative and never flags.
    """
    m = v.n
    if m > min(n_schedule):
        raise ValueError("motif order exceeds the smallest host order")
    target = float(iid_limit_density(lim, v))
    rows = []
    for n in n_schedule:
        devs = []
        for _ in range(repetitions):
            w = sample_rewiring(lim, n, rng)
            est = density(v, w, samples=samples, rng=rng)
            devs.append(abs(est.value - target))
        failures = sum(d > epsilon for d in devs)
        budget = azuma_budget(epsilon, n, m)
        rows.append(ConvergenceRow(n, budget, devs, failures, budget < 1 and failures / repetitions > budget))
    return ConvergenceReport(v, target, epsilon, rows)


def write_density_csv(estimates: Sequence[DensityEstimate], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["motif_id", "order", "mode", "value", "sample_count"])
        for e in estimates:
            writer.writerow([e.motif.index, e.motif.n, e.mode, format(e.value, ".17g"), e.sample_count])


def limit_vector_estimates(vec: LimitVector) -> list[DensityEstimate]:
    out = []
    for m in range(1, vec.M + 1):
        for f in motifs(vec.kind, m):
            mode = vec.modes.get(m, "exact")
            count = vec.sample_count if mode == "monte-carlo" else 0
            out.append(DensityEstimate(f, float(vec.entries[m][f.index]), mode, count))
    return out
