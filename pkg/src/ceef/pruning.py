"""Layer-reducing rewrites on labelled multigraphs.

A labelled multigraph (LMG) carries a vector expression on every node and a
matrix expression on every edge.  Its full sum is the unrestricted sum over
one index per node of the product of node-label and edge-label entries.
Removing a node with one distinct neighbour (type I pendant) or two distinct
neighbours (type II pendant) and folding its labels into the neighbours
leaves the full sum unchanged.  Repeating until one node is left gives a
vector ``v`` with full sum ``1' v``; otherwise the residual graph has every
node of degree >= 3.

Edges are stored with an orientation ``(row, col, label)``: the entry used in
the full sum is ``label[j_row, j_col]``.  Type II rewrites produce labels like
``Q d(y) R`` that are not symmetric in general, so the orientation matters.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from .expr import (
    A,
    ONES,
    Diag,
    MatrixExpr,
    Ones,
    VectorExpr,
    hadamard,
    hadamard_v,
    is_symmetric,
    matmul,
    matvec,
    transpose,
)
from .partitions import MultiGraph

TYPE_I = 1
TYPE_II = 2


class PruneContractError(ValueError):
    """A prune step was applied to a node that is not a pendant of that type."""


@dataclass
class LMG:
    labels: dict[int, VectorExpr]
    edges: list[tuple[int, int, MatrixExpr]] = field(default_factory=list)

    def __post_init__(self):
        for a, b, _ in self.edges:
            if a == b:
                raise ValueError(f"self-loop at node {a}")
            if a not in self.labels or b not in self.labels:
                raise ValueError(f"edge ({a}, {b}) references a missing node")

    @property
    def nodes(self) -> list[int]:
        return sorted(self.labels)

    def __len__(self):
        return len(self.labels)

    def copy(self) -> "LMG":
        return LMG(dict(self.labels), list(self.edges))

    def neighbors(self, node: int) -> set[int]:
        out = set()
        for a, b, _ in self.edges:
            if a == node:
                out.add(b)
            elif b == node:
                out.add(a)
        return out

    def oriented_labels(self, row: int, col: int) -> list[MatrixExpr]:
        """Labels of all edges between ``row`` and ``col``, indexed ``[j_row, j_col]``."""
        out = []
        for a, b, lab in self.edges:
            if a == row and b == col:
                out.append(lab)
            elif a == col and b == row:
                out.append(transpose(lab))
        return out

    def pendants(self) -> list[tuple[int, int]]:
        """All (node, type) pairs with one or two distinct neighbours."""
        out = []
        for v in self.nodes:
            n = len(self.neighbors(v))
            if n in (TYPE_I, TYPE_II):
                out.append((v, n))
        return out


def default_lmg(g: MultiGraph) -> LMG:
    """All node labels ``1``, one ``A`` edge per unit of multiplicity."""
    edges = [
        (a, b, A)
        for a in range(g.k)
        for b in range(a + 1, g.k)
        for _ in range(g.weights[a][b])
    ]
    return LMG({a: ONES for a in range(g.k)}, edges)


def find_pendant(lmg: LMG) -> Optional[tuple[int, int]]:
    """Highest-id type I pendant, else highest-id type II pendant, else None."""
    if len(lmg) <= 1:
        return None
    best: dict[int, int] = {}
    for v, kind in lmg.pendants():
        best[kind] = v
    if TYPE_I in best:
        return best[TYPE_I], TYPE_I
    if TYPE_II in best:
        return best[TYPE_II], TYPE_II
    return None


def prune_type1(lmg: LMG, pendant: int) -> LMG:
    nbrs = lmg.neighbors(pendant)
    if len(nbrs) != 1:
        raise PruneContractError(f"node {pendant} has {len(nbrs)} neighbours, not 1")
    (hinge,) = nbrs
    bracket = matvec(hadamard(*lmg.oriented_labels(hinge, pendant)), lmg.labels[pendant])
    labels = {v: lab for v, lab in lmg.labels.items() if v != pendant}
    labels[hinge] = hadamard_v(labels[hinge], bracket)
    edges = [e for e in lmg.edges if pendant not in e[:2]]
    return LMG(labels, edges)


def prune_type2(lmg: LMG, pendant: int) -> LMG:
    nbrs = lmg.neighbors(pendant)
    if len(nbrs) != 2:
        raise PruneContractError(f"node {pendant} has {len(nbrs)} neighbours, not 2")
    h1, h2 = sorted(nbrs)
    q = hadamard(*lmg.oriented_labels(h1, pendant))
    r = hadamard(*lmg.oriented_labels(pendant, h2))
    y = lmg.labels[pendant]
    middle = () if isinstance(y, Ones) else (Diag(y),)
    new = matmul(q, *middle, r)
    labels = {v: lab for v, lab in lmg.labels.items() if v != pendant}
    edges = [e for e in lmg.edges if pendant not in e[:2]]
    edges.append((h1, h2, new))
    return LMG(labels, edges)


def prune_step(lmg: LMG, pendant: int, kind: int) -> LMG:
    if kind == TYPE_I:
        return prune_type1(lmg, pendant)
    if kind == TYPE_II:
        return prune_type2(lmg, pendant)
    raise ValueError(f"unknown pendant type {kind}")


@dataclass
class PruneResult:
    kind: str  # "sea" or "ifs"
    layers: int
    steps: int
    sea_vector: Optional[VectorExpr] = None
    ifs_graph: Optional[LMG] = None
    history: list[LMG] = field(default_factory=list)

    @property
    def is_sea(self) -> bool:
        return self.kind == "sea"


Policy = Callable[[LMG], Optional[tuple[int, int]]]


def random_policy(seed: int) -> Policy:
    """Pick uniformly among all current pendants; for robustness checks."""
    rng = random.Random(seed)

    def pick(lmg: LMG):
        if len(lmg) <= 1:
            return None
        cands = lmg.pendants()
        return rng.choice(cands) if cands else None

    return pick


def prune_lmg(lmg: LMG, policy: Policy = find_pendant, keep_history: bool = False) -> PruneResult:
    history = [lmg] if keep_history else []
    steps = 0
    while len(lmg) > 1:
        choice = policy(lmg)
        if choice is None:
            break
        lmg = prune_step(lmg, *choice)
        steps += 1
        if keep_history:
            history.append(lmg)
    if len(lmg) == 1:
        (v,) = lmg.labels.values()
        return PruneResult("sea", 1, steps, sea_vector=v, history=history)
    return PruneResult("ifs", len(lmg), steps, ifs_graph=lmg, history=history)


def prune_to_completion(
    g: MultiGraph, policy: Policy = find_pendant, keep_history: bool = False
) -> PruneResult:
    return prune_lmg(default_lmg(g), policy, keep_history)


@dataclass(frozen=True)
class IFSFactor:
    p: int
    q: int
    expr: MatrixExpr
    oriented: bool


def ifs_factors(lmg: LMG) -> tuple[int, tuple[tuple[int, VectorExpr], ...], tuple[IFSFactor, ...]]:
    """Relabel surviving nodes 1..l and merge parallel edges per node pair.

    Returns ``(layers, node_labels, factors)``; node labels equal to ``1`` are
    omitted and factors are sorted by ``(p, q)``.
    """
    order = lmg.nodes
    pos = {v: i + 1 for i, v in enumerate(order)}
    nodes = tuple((pos[v], lmg.labels[v]) for v in order if not isinstance(lmg.labels[v], Ones))
    factors = []
    for i, a in enumerate(order):
        for b in order[i + 1:]:
            labs = lmg.oriented_labels(a, b)
            if labs:
                e = hadamard(*labs)
                factors.append(IFSFactor(pos[a], pos[b], e, not is_symmetric(e)))
    return len(order), nodes, tuple(factors)


def check_terminal(result: PruneResult, m: int) -> list[str]:
    """Violations of the SEA / IFS terminal dichotomy (empty when fine)."""
    problems = []
    if result.kind == "sea":
        if result.layers != 1:
            problems.append(f"SEA result with {result.layers} layers")
        return problems
    g = result.ifs_graph
    if result.layers < 4:
        problems.append(f"IFS with only {result.layers} layers")
    if result.layers > m // 2:
        problems.append(f"IFS with {result.layers} layers > floor(m/2) = {m // 2}")
    for v in g.nodes:
        if len(g.neighbors(v)) < 3:
            problems.append(f"IFS node {v} has fewer than 3 neighbours")
    return problems


__all__ = [
    "IFSFactor",
    "LMG",
    "PruneContractError",
    "PruneResult",
    "TYPE_I",
    "TYPE_II",
    "check_terminal",
    "default_lmg",
    "find_pendant",
    "ifs_factors",
    "prune_lmg",
    "prune_step",
    "prune_to_completion",
    "prune_type1",
    "prune_type2",
    "random_policy",
]
