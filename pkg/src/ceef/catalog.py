"""Isomorphism classes of induced multigraphs and their signed coefficients.

Every loop-free partition of the m-cycle induces a multigraph.  Grouping
these by isomorphism gives classes with a size ``d``, a factorial weight
``h = prod (g_i - 1)!`` over block sizes, and a coefficient
``a = (-1)^(m-k) d h``.  The cycle statistic is the sum over classes of ``a``
times the unrestricted index sum of the class's monomial.
"""

from __future__ import annotations

import json
import logging
import math
import os
from collections.abc import Iterable
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .partitions import (
    DEFAULT_MAX_ORDER,
    InvalidOrderError,
    MultiGraph,
    Partition,
    _multigraph_from_rgs,
    admissible_assignments,
    check_order,
)

log = logging.getLogger(__name__)

CACHE_ENV = "CEEF_CACHE"
CACHE_VERSION = 1


# ---------------------------------------------------------------------------
# canonical labelling
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class CanonicalForm:
    """Isomorphism-invariant key of a multigraph.

    Byte 0 is the node count; the rest is the upper triangle of the weight
    matrix in canonical node order, each weight stored as ``255 - w`` so that
    the lexicographically smallest key lists heavy edges first.
    """

    key: bytes

    @property
    def k(self) -> int:
        return self.key[0]

    def weights(self) -> tuple[tuple[int, ...], ...]:
        k = self.k
        w = [[0] * k for _ in range(k)]
        it = iter(self.key[1:])
        for a in range(k):
            for b in range(a + 1, k):
                w[a][b] = w[b][a] = 255 - next(it)
        return tuple(map(tuple, w))


def _refine(w: Sequence[Sequence[int]], nbrs: list[list[int]], colors: list[int]) -> list[int]:
    """Colour refinement on a weighted graph.  Colour ids stay ordered."""
    ncells = len(set(colors))
    while True:
        sigs = [
            (colors[v], tuple(sorted((colors[u], -w[v][u]) for u in nbrs[v])))
            for v in range(len(colors))
        ]
        rank = {s: i for i, s in enumerate(sorted(set(sigs)))}
        new = [rank[s] for s in sigs]
        if len(rank) == ncells:
            return new
        colors, ncells = new, len(rank)


def _serialize(w: Sequence[Sequence[int]], order: Sequence[int]) -> bytes:
    k = len(order)
    out = bytearray([k])
    for i in range(k):
        row = w[order[i]]
        for j in range(i + 1, k):
            out.append(255 - row[order[j]])
    return bytes(out)


def canonical_labeling(g: MultiGraph) -> tuple[CanonicalForm, tuple[int, ...]]:
    """Return the canonical key and the node order that realises it.

    Individualisation-refinement: nodes start coloured by degree, colour
    refinement splits cells, and remaining ties are broken by trying every
    member of the first non-singleton cell.  The key is the minimum over the
    leaves of that search tree.
    """
    w = g.weights
    k = g.k
    if k > 255 or any(x > 255 for row in w for x in row):
        raise ValueError("canonical keys support at most 255 nodes and weights")
    nbrs = [g.neighbors(v) for v in range(k)]
    degs = g.degrees()
    deg_rank = {d: i for i, d in enumerate(sorted(set(degs)))}
    start = _refine(w, nbrs, [deg_rank[d] for d in degs])

    best: list = [None, None]

    def search(colors: list[int]) -> None:
        if len(set(colors)) == k:
            order = sorted(range(k), key=colors.__getitem__)
            key = _serialize(w, order)
            if best[0] is None or key < best[0]:
                best[0], best[1] = key, tuple(order)
            return
        counts: dict[int, int] = {}
        for c in colors:
            counts[c] = counts.get(c, 0) + 1
        target = min(c for c, n in counts.items() if n > 1)
        for v in range(k):
            if colors[v] != target:
                continue
            child = [2 * c + (1 if c == target and u != v else 0) for u, c in enumerate(colors)]
            search(_refine(w, nbrs, child))

    search(start)
    return CanonicalForm(best[0]), best[1]


def canonical_form(g: MultiGraph) -> CanonicalForm:
    return canonical_labeling(g)[0]


def are_isomorphic(g1: MultiGraph, g2: MultiGraph) -> bool:
    if g1.k != g2.k or g1.m != g2.m:
        return False
    return canonical_form(g1) == canonical_form(g2)


# ---------------------------------------------------------------------------
# Moebius coefficients
# ---------------------------------------------------------------------------


def mobius_finest(p: Partition) -> int:
    """mu(finest, p) on the partition lattice: (-1)^(m-k) prod (|S|-1)!."""
    sign = -1 if (p.m - p.size()) % 2 else 1
    return sign * math.prod(math.factorial(s - 1) for s in p.block_sizes())


def factorial_weight(block_sizes: Iterable[int]) -> int:
    return math.prod(math.factorial(g - 1) for g in block_sizes)


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GraphClass:
    m: int
    k: int
    t: int
    representative: MultiGraph
    d: int
    h: int
    a: int
    partition: tuple[int, ...] | None = None  # lexicographically first inducing RGS

    @property
    def key(self) -> CanonicalForm:
        return canonical_form(self.representative)


@dataclass(frozen=True)
class Catalog:
    m: int
    classes: tuple[GraphClass, ...]

    def __len__(self):
        return len(self.classes)

    def __iter__(self):
        return iter(self.classes)

    def by_k(self, k: int) -> list[GraphClass]:
        return [c for c in self.classes if c.k == k]

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "version": CACHE_VERSION,
            "classes": [
                {
                    "k": c.k,
                    "t": c.t,
                    "d": c.d,
                    "h": c.h,
                    "a": c.a,
                    "weights": [list(r) for r in c.representative.weights],
                    "partition": list(c.partition) if c.partition is not None else None,
                }
                for c in self.classes
            ],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Catalog":
        m = doc["m"]
        classes = []
        for c in doc["classes"]:
            g = MultiGraph(tuple(tuple(r) for r in c["weights"]))
            part = c.get("partition")
            classes.append(
                GraphClass(
                    m=m, k=c["k"], t=c["t"], representative=g,
                    d=c["d"], h=c["h"], a=c["a"],
                    partition=tuple(part) if part is not None else None,
                )
            )
        return cls(m, tuple(classes))


def _dihedral_orbit(a: tuple[int, ...]) -> int | None:
    """Orbit size of ``a`` under cycle rotations and reflections.

    Returns None when ``a`` is not the lexicographically smallest member of its
    orbit, so that each orbit is processed exactly once.
    """
    m = len(a)
    images = {a}
    r = a[::-1]
    for seq in (a, r):
        for s in range(m):
            if seq is a and s == 0:
                continue
            d: dict[int, int] = {}
            img = tuple([d.setdefault(x, len(d)) for x in seq[s:] + seq[:s]])
            if img < a:
                return None
            images.add(img)
    return len(images)


class ClassAccumulator:
    """Map canonical key -> (d, h, first partition, canonical graph).

    Accumulators built from disjoint partition streams merge associatively.
    """

    def __init__(self, m: int):
        self.m = m
        self.data: dict[bytes, list] = {}

    def add(self, a: tuple[int, ...], weight: int = 1) -> None:
        k = max(a) + 1
        g = _multigraph_from_rgs(a, k)
        form, order = canonical_labeling(g)
        rep = g.permuted(order)
        h = factorial_weight(g.block_sizes)
        if sorted(g.block_sizes) != sorted(x // 2 for x in g.degrees()):
            raise AssertionError(f"degree/block-size mismatch for partition {a}")
        entry = self.data.get(form.key)
        if entry is None:
            self.data[form.key] = [weight, h, a, rep]
        else:
            if entry[1] != h:
                raise AssertionError(f"h disagreement within class for partition {a}")
            entry[0] += weight
            if a < entry[2]:
                entry[2] = a

    def merge(self, other: "ClassAccumulator") -> "ClassAccumulator":
        for key, (d, h, a, rep) in other.data.items():
            entry = self.data.get(key)
            if entry is None:
                self.data[key] = [d, h, a, rep]
                continue
            if entry[1] != h:
                raise AssertionError(f"h disagreement while merging class {key!r}")
            entry[0] += d
            entry[2] = min(entry[2], a)
        return self

    def catalog(self) -> Catalog:
        m = self.m
        grouped: dict[int, list[bytes]] = {}
        for key in self.data:
            grouped.setdefault(key[0], []).append(key)
        classes = []
        for k in sorted(grouped, reverse=True):
            for t, key in enumerate(sorted(grouped[k]), start=1):
                d, h, part, rep = self.data[key]
                sign = -1 if (m - k) % 2 else 1
                classes.append(GraphClass(m, k, t, rep, d, h, sign * d * h, part))
        return Catalog(m, tuple(classes))


def classify_stream(m: int, prefix: Sequence[int] = ()) -> ClassAccumulator:
    acc = ClassAccumulator(m)
    for a in admissible_assignments(m, prefix):
        size = _dihedral_orbit(a)
        if size is not None:
            acc.add(a, size)
    return acc


def _prefixes(m: int, depth: int) -> list[tuple[int, ...]]:
    out = [(0,)]
    for _ in range(depth - 1):
        out = [p + (b,) for p in out for b in range(max(p) + 2) if b != p[-1]]
    return out


def _classify_prefix(args):
    m, prefix = args
    return classify_stream(m, prefix).data


def build_catalog(
    m: int,
    max_order: int = DEFAULT_MAX_ORDER,
    threads: int = 1,
) -> Catalog:
    """Enumerate, canonicalise and count every loop-free partition of the m-cycle."""
    check_order(m, minimum=3, maximum=max_order)
    if threads <= 1 or m < 8:
        return classify_stream(m).catalog()

    from concurrent.futures import ProcessPoolExecutor

    total = ClassAccumulator(m)
    jobs = [(m, p) for p in _prefixes(m, min(4, m - 1))]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        for data in pool.map(_classify_prefix, jobs):
            part = ClassAccumulator(m)
            part.data = data
            total.merge(part)
    return total.catalog()


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME") or os.path.join(os.path.expanduser("~"), ".cache")
    return Path(base) / "ceef"


def load_or_build_catalog(
    m: int,
    cache_dir: str | os.PathLike | None = None,
    max_order: int = DEFAULT_MAX_ORDER,
    threads: int = 1,
    use_cache: bool = True,
) -> Catalog:
    check_order(m, minimum=3, maximum=max_order)
    if not use_cache:
        return build_catalog(m, max_order=max_order, threads=threads)
    path = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    path = path / f"catalog_m{m}.json"
    if path.exists():
        try:
            with open(path) as fh:
                doc = json.load(fh)
            if doc.get("m") == m and doc.get("version") == CACHE_VERSION:
                return Catalog.from_json(doc)
            log.warning("ignoring stale catalog cache %s", path)
        except (OSError, ValueError, KeyError, TypeError) as exc:
            log.warning("ignoring unreadable catalog cache %s: %s", path, exc)
    cat = build_catalog(m, max_order=max_order, threads=threads)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        with open(tmp, "w") as fh:
            json.dump(cat.to_json(), fh)
        os.replace(tmp, path)
    except OSError as exc:
        log.warning("could not write catalog cache %s: %s", path, exc)
    return cat


__all__ = [
    "CanonicalForm",
    "Catalog",
    "ClassAccumulator",
    "GraphClass",
    "InvalidOrderError",
    "are_isomorphic",
    "build_catalog",
    "canonical_form",
    "canonical_labeling",
    "classify_stream",
    "default_cache_dir",
    "factorial_weight",
    "load_or_build_catalog",
    "mobius_finest",
]
