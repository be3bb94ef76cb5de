"""Finite graphs, rewiring maps and their algebra.

Both objects are stored as vectors over unordered pairs ``i < j`` in
colexicographic order: (1,2), (1,3), (2,3), (1,4), (2,4), (3,4), ...
With this order the restriction to ``[m]`` is the leading
``m(m-1)/2`` entries, and the integer index of a graph (bit ``k`` is the
status of the ``k``-th pair) restricts by masking the low bits.

Vertex labels are 1-based in every text format and 0-based in the array API.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

__all__ = [
    "Graph",
    "RewiringMap",
    "Permutation",
    "Motif",
    "all_permutations",
    "num_pairs",
    "pair_index",
    "pair_arrays",
    "apply_rewiring",
    "compose",
    "restrict",
    "distance",
    "permute",
    "complement",
    "all_graphs",
    "all_maps",
    "extensions",
    "parse_edge_list",
    "format_edge_list",
    "read_edge_list",
    "write_edge_list",
]


def num_pairs(n: int) -> int:
    return n * (n - 1) // 2


def pair_index(i: int, j: int) -> int:
    """Position of the unordered pair {i, j} (0-based, i != j)."""
    if i == j:
        raise ValueError("no pair index on the diagonal")
    if i > j:
        i, j = j, i
    return j * (j - 1) // 2 + i


@lru_cache(maxsize=None)
def pair_arrays(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Row and column (0-based, row < column) of every pair in storage order."""
    rows, cols = [], []
    for j in range(1, n):
        rows.extend(range(j))
        cols.extend([j] * j)
    r = np.array(rows, dtype=np.intp)
    c = np.array(cols, dtype=np.intp)
    r.flags.writeable = False
    c.flags.writeable = False
    return r, c


def _frozen_bits(values, length: int) -> np.ndarray:
    arr = np.asarray(values)
    if arr.shape != (length,):
        raise ValueError(f"expected {length} pair entries, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if not np.isin(arr, (0, 1)).all():
            raise ValueError("pair entries must be 0 or 1")
        arr = arr.astype(np.uint8)
    elif arr.size and arr.max() > 1:
        raise ValueError("pair entries must be 0 or 1")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


def _matrix_to_pairs(mat: np.ndarray, n: int) -> np.ndarray:
    if mat.shape != (n, n):
        raise ValueError(f"expected a {n}x{n} matrix, got {mat.shape}")
    if not np.array_equal(mat, mat.T):
        raise ValueError("matrix is not symmetric")
    if np.any(np.diagonal(mat) != 0):
        raise ValueError("diagonal must be zero")
    r, c = pair_arrays(n)
    return mat[r, c]


def _index_from_bits(bits: np.ndarray, base: int = 2) -> int:
    idx = 0
    for k in range(len(bits) - 1, -1, -1):
        idx = idx * base + int(bits[k])
    return idx


def _bits_from_index(index: int, length: int, base: int = 2) -> np.ndarray:
    if index < 0 or index >= base**length:
        raise ValueError(f"index {index} out of range for {length} pairs")
    out = np.zeros(length, dtype=np.uint8)
    for k in range(length):
        index, out[k] = divmod(index, base)
    return out


class Graph:
    """Undirected simple graph on ``[n]``, immutable."""

    __slots__ = ("n", "bits", "_key")

    def __init__(self, n: int, bits=None):
        if n < 1:
            raise ValueError("graph order must be positive")
        self.n = int(n)
        if bits is None:
            bits = np.zeros(num_pairs(n), dtype=np.uint8)
        self.bits = _frozen_bits(bits, num_pairs(n))
        self._key = None

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n)

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls(n, np.ones(num_pairs(n), dtype=np.uint8))

    @classmethod
    def from_matrix(cls, adj) -> "Graph":
        mat = np.asarray(adj)
        return cls(mat.shape[0], _matrix_to_pairs(mat, mat.shape[0]))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]], one_based: bool = True) -> "Graph":
        bits = np.zeros(num_pairs(n), dtype=np.uint8)
        shift = 1 if one_based else 0
        for i, j in edges:
            i, j = int(i) - shift, int(j) - shift
            if i == j:
                raise ValueError(f"self-loop at vertex {i + shift}")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i + shift}, {j + shift}) outside [{n}]")
            bits[pair_index(i, j)] = 1
        return cls(n, bits)

    @classmethod
    def from_index(cls, n: int, index: int) -> "Graph":
        return cls(n, _bits_from_index(index, num_pairs(n)))

    @property
    def index(self) -> int:
        """Integer code with bit k = status of the k-th pair."""
        return _index_from_bits(self.bits)

    @property
    def n_edges(self) -> int:
        return int(self.bits.sum())

    def matrix(self) -> np.ndarray:
        mat = np.zeros((self.n, self.n), dtype=np.uint8)
        r, c = pair_arrays(self.n)
        mat[r, c] = self.bits
        mat[c, r] = self.bits
        return mat

    def edges(self, one_based: bool = True) -> list[tuple[int, int]]:
        r, c = pair_arrays(self.n)
        on = np.flatnonzero(self.bits)
        shift = 1 if one_based else 0
        return sorted((int(r[k]) + shift, int(c[k]) + shift) for k in on)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return 0 if i == j else int(self.bits[pair_index(i, j)])

    def _hashkey(self):
        if self._key is None:
            self._key = (self.n, self.bits.tobytes())
        return self._key

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self._hashkey() == other._hashkey()

    def __hash__(self):
        return hash(("G",) + self._hashkey())

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.edges()})"


class RewiringMap:
    """Symmetric array of bit pairs ``(w0, w1)`` with ``(0, 0)`` on the diagonal.

    Applied to a graph, pair ``ij`` becomes ``w0[ij]`` if it is absent and
    ``w1[ij]`` if it is present.
    """

    __slots__ = ("n", "w0", "w1", "_key")

    def __init__(self, n: int, w0=None, w1=None):
        if n < 1:
            raise ValueError("map order must be positive")
        self.n = int(n)
        npairs = num_pairs(n)
        self.w0 = _frozen_bits(np.zeros(npairs, np.uint8) if w0 is None else w0, npairs)
        self.w1 = _frozen_bits(np.ones(npairs, np.uint8) if w1 is None else w1, npairs)
        self._key = None

    @classmethod
    def identity(cls, n: int) -> "RewiringMap":
        return cls(n)

    @classmethod
    def constant(cls, n: int, a: int, b: int) -> "RewiringMap":
        npairs = num_pairs(n)
        return cls(n, np.full(npairs, a, np.uint8), np.full(npairs, b, np.uint8))

    @classmethod
    def single_edge_update(cls, n: int, i: int, j: int, k: int) -> "RewiringMap":
        """Map that sets pair {i, j} (0-based) to ``k`` and fixes every other pair."""
        w0 = np.zeros(num_pairs(n), np.uint8)
        w1 = np.ones(num_pairs(n), np.uint8)
        p = pair_index(i, j)
        w0[p] = w1[p] = k
        return cls(n, w0, w1)

    @classmethod
    def from_matrices(cls, m0, m1) -> "RewiringMap":
        m0, m1 = np.asarray(m0), np.asarray(m1)
        n = m0.shape[0]
        return cls(n, _matrix_to_pairs(m0, n), _matrix_to_pairs(m1, n))

    @classmethod
    def from_entries(cls, entries) -> "RewiringMap":
        """Build from an ``n x n`` nested sequence of ``(w0, w1)`` tuples."""
        arr = np.asarray(entries)
        return cls.from_matrices(arr[..., 0], arr[..., 1])

    @classmethod
    def from_index(cls, n: int, index: int) -> "RewiringMap":
        codes = _bits_from_index(index, num_pairs(n), base=4)
        return cls(n, codes & 1, codes >> 1)

    @classmethod
    def from_hex(cls, n: int, text: str) -> "RewiringMap":
        return cls.from_index(n, int(text, 16))

    @property
    def codes(self) -> np.ndarray:
        """Per-pair cell code ``w0 + 2*w1`` in {0, 1, 2, 3}."""
        return self.w0 + 2 * self.w1

    @property
    def index(self) -> int:
        """Base-4 integer code, digit k = cell code of the k-th pair."""
        return _index_from_bits(self.codes, base=4)

    def to_hex(self) -> str:
        return format(self.index, "x")

    def is_identity(self) -> bool:
        return not self.w0.any() and bool(self.w1.all())

    def matrices(self) -> tuple[np.ndarray, np.ndarray]:
        r, c = pair_arrays(self.n)
        out = []
        for plane in (self.w0, self.w1):
            mat = np.zeros((self.n, self.n), dtype=np.uint8)
            mat[r, c] = plane
            mat[c, r] = plane
            out.append(mat)
        return out[0], out[1]

    def __getitem__(self, ij: tuple[int, int]) -> tuple[int, int]:
        i, j = ij
        if i == j:
            return (0, 0)
        p = pair_index(i, j)
        return int(self.w0[p]), int(self.w1[p])

    def __call__(self, g: Graph) -> Graph:
        return apply_rewiring(self, g)

    def _hashkey(self):
        if self._key is None:
            self._key = (self.n, self.w0.tobytes(), self.w1.tobytes())
        return self._key

    def __eq__(self, other):
        if not isinstance(other, RewiringMap):
            return NotImplemented
        return self._hashkey() == other._hashkey()

    def __hash__(self):
        return hash(("W",) + self._hashkey())

    def __repr__(self):
        cells = ",".join(f"{a}{b}" for a, b in zip(self.w0, self.w1))
        return f"RewiringMap(n={self.n}, pairs=[{cells}])"


Motif = Union[Graph, RewiringMap]


class Permutation:
    """Bijection of ``[n]``, stored 0-based."""

    __slots__ = ("images",)

    def __init__(self, images: Sequence[int]):
        images = tuple(int(x) for x in images)
        if sorted(images) != list(range(len(images))):
            raise ValueError(f"{images} is not a permutation of range({len(images)})")
        self.images = images

    @classmethod
    def from_one_based(cls, images: Sequence[int]) -> "Permutation":
        return cls([x - 1 for x in images])

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(range(n))

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i]

    def __eq__(self, other):
        return isinstance(other, Permutation) and self.images == other.images

    def __hash__(self):
        return hash(self.images)

    def __repr__(self):
        return f"Permutation({list(self.images)})"


def all_permutations(n: int) -> Iterator[Permutation]:
    for p in itertools.permutations(range(n)):
        yield Permutation(p)


def _check_same_order(a, b):
    if a.n != b.n:
        raise ValueError(f"order mismatch: {a.n} vs {b.n}")


def apply_rewiring(w: RewiringMap, g: Graph) -> Graph:
    _check_same_order(w, g)
    return Graph(g.n, np.where(g.bits == 1, w.w1, w.w0))


def compose(w2: RewiringMap, w1: RewiringMap) -> RewiringMap:
    """The map ``g -> w2(w1(g))``."""
    _check_same_order(w2, w1)
    new0 = np.where(w1.w0 == 1, w2.w1, w2.w0)
    new1 = np.where(w1.w1 == 1, w2.w1, w2.w0)
    return RewiringMap(w1.n, new0, new1)


def restrict(x: Motif, m: int) -> Motif:
    """Leading ``m x m`` submatrix."""
    if not 1 <= m <= x.n:
        raise ValueError(f"cannot restrict order {x.n} to {m}")
    k = num_pairs(m)
    if isinstance(x, Graph):
        return Graph(m, x.bits[:k])
    return RewiringMap(m, x.w0[:k], x.w1[:k])


def _planes(x: Motif) -> tuple[np.ndarray, ...]:
    return (x.bits,) if isinstance(x, Graph) else (x.w0, x.w1)


def distance(x: Motif, y: Motif) -> Fraction:
    """``1/max{k : x|[k] = y|[k]}``; zero when ``x == y``."""
    if type(x) is not type(y):
        raise TypeError("distance needs two graphs or two rewiring maps")
    _check_same_order(x, y)
    differ = np.zeros(num_pairs(x.n), dtype=bool)
    for a, b in zip(_planes(x), _planes(y)):
        differ |= a != b
    hits = np.flatnonzero(differ)
    if hits.size == 0:
        return Fraction(0)
    # first differing pair lives in column j (0-based): [j] still agrees
    _, cols = pair_arrays(x.n)
    return Fraction(1, int(cols[hits[0]]))


@lru_cache(maxsize=4096)
def _permuted_positions(images: tuple[int, ...]) -> np.ndarray:
    n = len(images)
    r, c = pair_arrays(n)
    s = np.asarray(images, dtype=np.intp)
    a, b = s[r], s[c]
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    return hi * (hi - 1) // 2 + lo


def permute(x: Motif, sigma: Permutation) -> Motif:
    """Relabel: ``result[i][j] = x[sigma(i)][sigma(j)]``."""
    if sigma.n != x.n:
        raise ValueError(f"order mismatch: permutation of {sigma.n}, object of {x.n}")
    pos = _permuted_positions(sigma.images)
    if isinstance(x, Graph):
        return Graph(x.n, x.bits[pos])
    return RewiringMap(x.n, x.w0[pos], x.w1[pos])


def complement(g: Graph) -> Graph:
    return Graph(g.n, 1 - g.bits)


def all_graphs(n: int) -> list[Graph]:
    """Every graph on ``[n]``, ordered by :attr:`Graph.index`."""
    return [Graph.from_index(n, k) for k in range(2 ** num_pairs(n))]


def all_maps(n: int) -> list[RewiringMap]:
    """Every rewiring map on ``[n]``, ordered by :attr:`RewiringMap.index`."""
    return [RewiringMap.from_index(n, k) for k in range(4 ** num_pairs(n))]


def extensions(x: Motif, n: int) -> list[Motif]:
    """All objects of order ``n`` whose restriction to ``[x.n]`` is ``x``."""
    if n < x.n:
        raise ValueError("extension order below the object's order")
    base = x.index
    k = num_pairs(x.n)
    extra = num_pairs(n) - k
    if isinstance(x, Graph):
        return [Graph.from_index(n, base | (t << k)) for t in range(2**extra)]
    return [RewiringMap.from_index(n, base + t * 4**k) for t in range(4**extra)]


def parse_edge_list(text: str) -> Graph:
    """Parse ``n <count>`` followed by one 1-based ``i j`` pair per line.

    Blank lines and ``#`` comments are ignored; duplicate and reversed pairs
    collapse under symmetric closure.
    """
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 2 or parts[0] != "n":
                raise ValueError(f"line {lineno}: expected header 'n <count>'")
            try:
                n = int(parts[1])
            except ValueError:
                raise ValueError(f"line {lineno}: bad vertex count {parts[1]!r}") from None
            if n < 1:
                raise ValueError(f"line {lineno}: vertex count must be positive")
            continue
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'i j'")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer vertex") from None
        if i == j:
            raise ValueError(f"line {lineno}: self-loop at vertex {i}")
        if not (1 <= i <= n and 1 <= j <= n):
            raise ValueError(f"line {lineno}: vertex outside [1, {n}]")
        edges.append((i, j))
    if n is None:
        raise ValueError("missing 'n <count>' header")
    return Graph.from_edges(n, edges)


def format_edge_list(g: Graph) -> str:
    lines = [f"n {g.n}"] + [f"{i} {j}" for i, j in g.edges()]
    return "\n".join(lines) + "\n"


def read_edge_list(path) -> Graph:
    return parse_edge_list(Path(path).read_text())


def write_edge_list(g: Graph, path) -> None:
    Path(path).write_text(format_edge_list(g))
