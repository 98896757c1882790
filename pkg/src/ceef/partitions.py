"""Set partitions of the m-cycle and the multigraphs they induce.

A partition of the cycle vertices ``0..m-1`` is stored as a restricted-growth
string (RGS): ``assignment[i]`` is the block id of vertex ``i``, block ids
appear in first-occurrence order.  Merging each block into one node turns the
cycle into a multigraph whose edge weights count the surviving cycle edges.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

DEFAULT_MAX_ORDER = 12


class InvalidOrderError(ValueError):
    """Raised when a cycle order is outside the supported range."""


class RejectedPartitionError(ValueError):
    """Raised when a partition cannot induce a loop-free multigraph."""


@dataclass(frozen=True)
class Partition:
    m: int
    assignment: tuple[int, ...]

    def __post_init__(self):
        a = self.assignment
        if len(a) != self.m or self.m < 1:
            raise ValueError(f"assignment length {len(a)} does not match m={self.m}")
        top = -1
        for x in a:
            if x < 0 or x > top + 1:
                raise ValueError(f"not a restricted-growth string: {a}")
            top = max(top, x)

    @classmethod
    def from_blocks(cls, m: int, blocks: Sequence[Sequence[int]]) -> "Partition":
        """Build from 1-based blocks, e.g. ``[[1, 3], [2, 4]]``."""
        raw = [-1] * m
        for b, block in enumerate(blocks):
            for i in block:
                if not 1 <= i <= m or raw[i - 1] != -1:
                    raise ValueError(f"invalid block structure {blocks!r} for m={m}")
                raw[i - 1] = b
        if -1 in raw:
            raise ValueError(f"blocks {blocks!r} do not cover 1..{m}")
        return cls(m, normalize_rgs(raw))

    def size(self) -> int:
        return max(self.assignment) + 1

    @property
    def blocks(self) -> list[list[int]]:
        """Blocks as lists of 1-based vertex indices."""
        out: list[list[int]] = [[] for _ in range(self.size())]
        for i, b in enumerate(self.assignment):
            out[b].append(i + 1)
        return out

    def block_sizes(self) -> list[int]:
        sizes = [0] * self.size()
        for b in self.assignment:
            sizes[b] += 1
        return sizes

    def is_finest(self) -> bool:
        return self.size() == self.m

    def __str__(self):
        return "{" + ", ".join("{" + ",".join(map(str, b)) + "}" for b in self.blocks) + "}"


@dataclass(frozen=True)
class MultiGraph:
    """Loop-free multigraph given by a symmetric integer weight matrix."""

    weights: tuple[tuple[int, ...], ...]
    block_sizes: tuple[int, ...] = field(default=())

    def __post_init__(self):
        k = len(self.weights)
        for a, row in enumerate(self.weights):
            if len(row) != k:
                raise ValueError("weight matrix must be square")
            if row[a] != 0:
                raise ValueError("multigraph has a self-loop")
            for b in range(k):
                if row[b] != self.weights[b][a] or row[b] < 0:
                    raise ValueError("weight matrix must be symmetric and non-negative")
        if not self.block_sizes:
            object.__setattr__(self, "block_sizes", tuple(d // 2 for d in self.degrees()))
        elif len(self.block_sizes) != k:
            raise ValueError("block_sizes length must equal node count")

    @property
    def k(self) -> int:
        return len(self.weights)

    @property
    def m(self) -> int:
        """Number of edges counted with multiplicity."""
        return sum(self.weights[a][b] for a in range(self.k) for b in range(a + 1, self.k))

    def degrees(self) -> list[int]:
        return [sum(row) for row in self.weights]

    def neighbors(self, a: int) -> list[int]:
        return [b for b, w in enumerate(self.weights[a]) if w]

    def permuted(self, order: Sequence[int]) -> "MultiGraph":
        """Relabel so that new node ``i`` is old node ``order[i]``."""
        w = self.weights
        return MultiGraph(
            tuple(tuple(w[a][b] for b in order) for a in order),
            tuple(self.block_sizes[a] for a in order),
        )

    def to_string(self) -> str:
        """Edge-list string ``{c [a,b]; ...}`` with 1-based endpoints."""
        parts = [
            f"{self.weights[a][b]} [{a + 1},{b + 1}]"
            for a in range(self.k)
            for b in range(a + 1, self.k)
            if self.weights[a][b]
        ]
        return "{" + "; ".join(parts) + "}"


def normalize_rgs(labels: Sequence[int]) -> tuple[int, ...]:
    """Relabel arbitrary block labels into restricted-growth form."""
    seen: dict[int, int] = {}
    return tuple(seen.setdefault(x, len(seen)) for x in labels)


def check_order(m: int, minimum: int = 1, maximum: int | None = None) -> None:
    if not isinstance(m, int) or m < minimum:
        raise InvalidOrderError(f"order must be an integer >= {minimum}, got {m!r}")
    if maximum is not None and m > maximum:
        raise InvalidOrderError(
            f"order {m} exceeds the supported maximum {maximum}; pass a larger max_order to opt in"
        )


def enumerate_partitions(m: int) -> Iterator[Partition]:
    """Yield every set partition of an m-set in lexicographic RGS order."""
    check_order(m)
    a = [0] * m
    top = [0] * m  # top[i] = max(a[0..i])
    while True:
        yield Partition(m, tuple(a))
        # rightmost position that can still be incremented
        i = m - 1
        while i > 0 and a[i] > top[i - 1]:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        top[i] = max(top[i - 1], a[i])
        for j in range(i + 1, m):
            a[j] = 0
            top[j] = top[i]


def has_self_loop(p: Partition) -> bool:
    """True iff some block holds two cyclically adjacent vertices."""
    a = p.assignment
    m = p.m
    if m == 1:
        return False
    return any(a[i] == a[(i + 1) % m] for i in range(m))


def admissible_assignments(m: int, prefix: Sequence[int] = ()) -> Iterator[tuple[int, ...]]:
    """Yield loop-free RGS tuples in lexicographic order without visiting the rest.

    Restricting to strings that start with ``prefix`` splits the stream into
    independent pieces.
    """
    check_order(m, minimum=2)
    a = list(prefix) + [0] * (m - len(prefix))
    start = len(prefix)
    if start:
        if normalize_rgs(prefix) != tuple(prefix):
            raise ValueError(f"prefix {prefix!r} is not a restricted-growth string")
        if any(prefix[i] == prefix[i + 1] for i in range(start - 1)):
            return
        if start == m:
            if prefix[-1] != prefix[0]:
                yield tuple(prefix)
            return

    top0 = max(prefix) if prefix else -1

    def rec(i: int, top: int) -> Iterator[tuple[int, ...]]:
        prev = a[i - 1] if i else -1
        last = i == m - 1
        for b in range(top + 2):
            if b == prev or (last and b == a[0]):
                continue
            a[i] = b
            if last:
                yield tuple(a)
            else:
                yield from rec(i + 1, max(top, b))

    if start == 0:
        a[0] = 0
        yield from rec(1, 0)
    else:
        yield from rec(start, top0)


def induce_multigraph(p: Partition) -> MultiGraph:
    """Merge each block of ``p`` into a node, keeping every cycle edge."""
    if has_self_loop(p) or p.size() < 2:
        raise RejectedPartitionError(f"partition {p} induces a self-loop")
    return _multigraph_from_rgs(p.assignment, p.size())


def _multigraph_from_rgs(a: Sequence[int], k: int) -> MultiGraph:
    m = len(a)
    w = [[0] * k for _ in range(k)]
    for i in range(m):
        x, y = a[i], a[(i + 1) % m]
        w[x][y] += 1
        w[y][x] += 1
    sizes = [0] * k
    for b in a:
        sizes[b] += 1
    return MultiGraph(tuple(map(tuple, w)), tuple(sizes))


def bell_number(n: int) -> int:
    """Bell numbers via the Bell triangle."""
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]
