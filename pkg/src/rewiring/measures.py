"""Parametric rewiring measures and closed-form transition kernels.

All probability functions accept ``float``, ``int`` or ``Fraction``
parameters.  When every parameter is exact the result is an exact
``Fraction``; otherwise it is a float, computed in log space once the
number of pairs exceeds :data:`LOG_SPACE_PAIRS`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np

from .graph import Graph, RewiringMap, num_pairs

LOG_SPACE_PAIRS = 40
MAX_REJECTIONS = 10**6


class DegenerateChainError(ValueError):
    """Boundary parameters for which the requested quantity is not unique."""


@dataclass(frozen=True)
class PairStat:
    """Pair-transition counts between two graphs on the same vertex set."""

    n00: int
    n01: int
    n10: int
    n11: int

    @property
    def n0(self) -> int:
        """Non-edges of the first graph."""
        return self.n00 + self.n01

    @property
    def n1(self) -> int:
        """Edges of the first graph."""
        return self.n10 + self.n11

    @property
    def total(self) -> int:
        return self.n00 + self.n01 + self.n10 + self.n11

    def transpose(self) -> "PairStat":
        return PairStat(self.n00, self.n10, self.n01, self.n11)


def pair_stat(g: Graph, g2: Graph) -> PairStat:
    if g.n != g2.n:
        raise ValueError(f"order mismatch: {g.n} vs {g2.n}")
    code = 2 * g.bits.astype(np.intp) + g2.bits
    c = np.bincount(code, minlength=4)
    return PairStat(int(c[0]), int(c[1]), int(c[2]), int(c[3]))


def edge_stat(g: Graph) -> tuple[int, int]:
    """``(n0, n1)``: non-edge and edge counts of ``g``."""
    n1 = g.n_edges
    return num_pairs(g.n) - n1, n1


def _is_exact(*xs) -> bool:
    return all(isinstance(x, Rational) for x in xs)


def rising(x, k: int):
    """Rising factorial ``x (x+1) ... (x+k-1)``."""
    if k < 0:
        raise ValueError("negative rising factorial length")
    if not _is_exact(x) and k > LOG_SPACE_PAIRS:
        return math.exp(log_rising(x, k))
    out = Fraction(1) if _is_exact(x) else 1.0
    for i in range(k):
        out *= x + i
    return out


def log_rising(x, k: int) -> float:
    if k == 0:
        return 0.0
    return math.lgamma(float(x) + k) - math.lgamma(float(x))


def _rising_ratio(num: Sequence[tuple], den: Sequence[tuple], npairs: int):
    """prod rising(num) / prod rising(den), exact or float."""
    xs = [x for x, _ in num] + [x for x, _ in den]
    if not _is_exact(*xs) and npairs > LOG_SPACE_PAIRS:
        s = sum(log_rising(x, k) for x, k in num) - sum(log_rising(x, k) for x, k in den)
        return math.exp(s)
    top = math.prod((rising(x, k) for x, k in num), start=1)
    bottom = math.prod((rising(x, k) for x, k in den), start=1)
    return top / bottom


def _bernoulli_power(p, ones: int, zeros: int):
    q = 1 - p
    return (p**ones) * (q**zeros)


def _check_prob(name: str, p) -> None:
    if not 0 <= p <= 1:
        raise ValueError(f"{name}={p} is not a probability")


def _check_positive(name: str, x) -> None:
    if not x > 0:
        raise ValueError(f"{name}={x} must be strictly positive")


def er_graph_prob(p, g: Graph):
    """Erdős–Rényi probability ``p^n1 (1-p)^n0``."""
    _check_prob("p", p)
    n0, n1 = edge_stat(g)
    return _bernoulli_power(p, n1, n0)


def beta_mixed_graph_prob(a, b, g: Graph):
    """Beta(a, b) mixture of Erdős–Rényi laws.

    ``a`` weights edges and ``b`` non-edges:
    ``a^(n1) b^(n0) / (a+b)^(n0+n1)`` with rising factorials.
    """
    _check_positive("a", a)
    _check_positive("b", b)
    n0, n1 = edge_stat(g)
    return _rising_ratio([(a, n1), (b, n0)], [(a + b, n0 + n1)], n0 + n1)


def er_transition_prob(p0, p1, g: Graph, g2: Graph):
    """Independent-edge kernel: absent pairs switch on w.p. ``p0``, present pairs stay w.p. ``p1``."""
    _check_prob("p0", p0)
    _check_prob("p1", p1)
    s = pair_stat(g, g2)
    return _bernoulli_power(p0, s.n01, s.n00) * _bernoulli_power(p1, s.n11, s.n10)


def mixed_transition_prob(params: "BetaMixedKernelParams", g: Graph, g2: Graph):
    s = pair_stat(g, g2)
    a0, b0, a1, b1 = params.a0, params.b0, params.a1, params.b1
    return _rising_ratio(
        [(a0, s.n01), (b0, s.n00), (a1, s.n11), (b1, s.n10)],
        [(a0 + b0, s.n00 + s.n01), (a1 + b1, s.n10 + s.n11)],
        s.total,
    )


def stationary_q(p0, p1):
    """Edge probability of the stationary Erdős–Rényi law of the ``(p0, p1)`` chain.

    Raises :class:`DegenerateChainError` for ``(0, 1)`` (every initial law is
    stationary) and ``(1, 0)`` (the chain alternates between a graph and its
    complement).
    """
    _check_prob("p0", p0)
    _check_prob("p1", p1)
    if p0 == 0 and p1 == 1:
        raise DegenerateChainError("(p0, p1) = (0, 1): chain is frozen at its initial state")
    if p0 == 1 and p1 == 0:
        raise DegenerateChainError("(p0, p1) = (1, 0): chain is periodic, no unique stationary law")
    return p0 / (1 - p1 + p0)


@dataclass(frozen=True)
class IidEdgeLimit:
    """Rewiring law with i.i.d. pair entries: ``w0 ~ Bern(p0)``, ``w1 ~ Bern(p1)``.

    Used both as the directing measure of the ``(p0, p1)`` Erdős–Rényi chain
    and as an atom of a continuous-time rewiring measure.
    """

    p0: float
    p1: float

    def __post_init__(self):
        _check_prob("p0", self.p0)
        _check_prob("p1", self.p1)

    @property
    def identity_cell_prob(self):
        """Probability that one pair carries the identity entry (0, 1)."""
        return (1 - self.p0) * self.p1

    def identity_prob(self, n: int):
        return self.identity_cell_prob ** num_pairs(n)

    def map_prob(self, w: RewiringMap):
        return iid_limit_density(self, w)

    def transition_prob(self, g: Graph, g2: Graph):
        return er_transition_prob(self.p0, self.p1, g, g2)

    def sample_map(self, n: int, rng: np.random.Generator, condition_nonidentity: bool = False) -> RewiringMap:
        return sample_rewiring(self, n, rng, condition_nonidentity=condition_nonidentity)

    def describe(self) -> str:
        return f"er(p0={self.p0}, p1={self.p1})"


def iid_limit_density(lim: IidEdgeLimit, v: RewiringMap):
    k0 = int(v.w0.sum())
    k1 = int(v.w1.sum())
    npairs = num_pairs(v.n)
    return _bernoulli_power(lim.p0, k0, npairs - k0) * _bernoulli_power(lim.p1, k1, npairs - k1)


def _sample_iid(p0, p1, n: int, rng: np.random.Generator) -> RewiringMap:
    npairs = num_pairs(n)
    w0 = (rng.random(npairs) < float(p0)).astype(np.uint8)
    w1 = (rng.random(npairs) < float(p1)).astype(np.uint8)
    return RewiringMap(n, w0, w1)


def sample_rewiring(
    lim: IidEdgeLimit,
    n: int,
    rng: np.random.Generator,
    condition_nonidentity: bool = False,
) -> RewiringMap:
    """Draw a map of order ``n`` with i.i.d. entries.

    With ``condition_nonidentity`` the draw is conditioned on not being the
    identity of ``[n]`` (exact rejection, at most :data:`MAX_REJECTIONS`
    attempts).  RNG use per attempt: ``N`` uniforms for ``w0`` then ``N``
    for ``w1``, ``N = n(n-1)/2``.
    """
    if not condition_nonidentity:
        return _sample_iid(lim.p0, lim.p1, n, rng)
    if num_pairs(n) == 0:
        raise ValueError("order 1 has only the identity map; cannot condition")
    if lim.identity_cell_prob == 1:
        raise ValueError(f"{lim.describe()} is the identity almost surely; cannot condition")
    for _ in range(MAX_REJECTIONS):
        w = _sample_iid(lim.p0, lim.p1, n, rng)
        if not w.is_identity():
            return w
    raise RuntimeError(f"no non-identity draw in {MAX_REJECTIONS} attempts for {lim.describe()}")


@dataclass(frozen=True)
class BetaMixedKernelParams:
    """Mixed Erdős–Rényi kernel: ``p0 ~ Beta(a0, b0)``, ``p1 ~ Beta(a1, b1)``.

    ``a0`` weights absent->present, ``b0`` absent->absent,
    ``a1`` present->present and ``b1`` present->absent.
    """

    a0: float
    b0: float
    a1: float
    b1: float

    def __post_init__(self):
        for name in ("a0", "b0", "a1", "b1"):
            _check_positive(name, getattr(self, name))

    def transition_prob(self, g: Graph, g2: Graph):
        return mixed_transition_prob(self, g, g2)

    def map_prob(self, w: RewiringMap):
        """Probability of ``w`` under the Beta mixture of i.i.d. rewiring laws."""
        npairs = num_pairs(w.n)
        k0 = int(w.w0.sum())
        k1 = int(w.w1.sum())
        return _rising_ratio(
            [(self.a0, k0), (self.b0, npairs - k0), (self.a1, k1), (self.b1, npairs - k1)],
            [(self.a0 + self.b0, npairs), (self.a1 + self.b1, npairs)],
            npairs,
        )

    def sample_map(self, n: int, rng: np.random.Generator) -> RewiringMap:
        # RNG use: one Beta draw each for p0 and p1, then the i.i.d. entries.
        p0 = rng.beta(float(self.a0), float(self.b0))
        p1 = rng.beta(float(self.a1), float(self.b1))
        return _sample_iid(p0, p1, n, rng)

    def describe(self) -> str:
        return f"mixed(a0={self.a0}, b0={self.b0}, a1={self.a1}, b1={self.b1})"


def reversible_kernel(alpha, beta, alpha_prime=None) -> BetaMixedKernelParams:
    """The reversible mixed kernel with ``(a0, b0) = (beta, alpha)`` and ``(a1, b1) = (alpha', beta)``.

    ``alpha_prime`` defaults to ``alpha``, the symmetric one-parameter-pair family.
    """
    if alpha_prime is None:
        alpha_prime = alpha
    return BetaMixedKernelParams(a0=beta, b0=alpha, a1=alpha_prime, b1=beta)


def reversible_stationary(alpha, beta, alpha_prime=None):
    """Reversing measure of :func:`reversible_kernel`, as a function of a graph.

    Non-edges carry weight ``alpha + beta`` and edges ``alpha' + beta``.
    """
    if alpha_prime is None:
        alpha_prime = alpha
    a_edge = alpha_prime + beta
    b_nonedge = alpha + beta

    def measure(g: Graph):
        return beta_mixed_graph_prob(a_edge, b_nonedge, g)

    return measure


@dataclass(frozen=True)
class GlobalAtom:
    """One atom of the rewiring-limit measure: rate ``rate`` on an i.i.d. limit."""

    rate: float
    limit: IidEdgeLimit

    def event_rate(self, n: int):
        """Rate of atoms that act as a non-identity map on ``[n]``."""
        return self.rate * (1 - self.limit.identity_prob(n))


@dataclass(frozen=True)
class RewiringMeasureSpec:
    """Jump measure of a continuous-time rewiring process.

    ``global_atoms`` is a finite atomic rewiring-limit measure (global
    rewirings); ``c0`` and ``c1`` are the per-pair rates of single-edge
    set-to-0 and set-to-1 updates.
    """

    global_atoms: tuple[GlobalAtom, ...] = field(default_factory=tuple)
    c0: float = 0.0
    c1: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "global_atoms", tuple(self.global_atoms))
        if self.c0 < 0 or self.c1 < 0:
            raise ValueError("single-edge rates must be nonnegative")
        for k, atom in enumerate(self.global_atoms, start=1):
            if not atom.rate > 0:
                raise ValueError(f"global atom {k}: rate must be positive")
            if atom.limit.identity_cell_prob == 1:
                raise ValueError(
                    f"global atom {k}: {atom.limit.describe()} is the identity map almost surely"
                )

    @classmethod
    def local(cls, c0, c1) -> "RewiringMeasureSpec":
        return cls((), c0, c1)
