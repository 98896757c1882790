"""Numeric evaluation of formulas, plus the brute-force cycle-sum oracle.

Two arithmetic modes are supported.  Float mode uses float64 numpy arrays.
Exact mode stores Python integers in object arrays, so results never
overflow; it is selected for integer matrices.
"""

from __future__ import annotations

import logging
import math
import itertools
import string
import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .expr import BaseA, Diag, Expr, Hadamard, HadamardV, MatMul, MatVec, Ones
from .formula import IFS, SEA, Formula, Term

log = logging.getLogger(__name__)

BRUTE_FORCE_BUDGET = 10**9
IFS_BUDGET = 10**10


class BudgetExceeded(RuntimeError):
    """The requested computation is estimated to cost more than allowed."""

    def __init__(self, what: str, cost: float, budget: float):
        super().__init__(f"{what}: estimated cost {cost:.3g} operations exceeds budget {budget:.3g}")
        self.cost = cost
        self.budget = budget


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DenseSymMatrix:
    """Hollow symmetric matrix; ``exact`` selects integer arithmetic."""

    values: np.ndarray
    exact: bool = False

    def __post_init__(self):
        v = self.values
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"matrix must be square, got shape {v.shape}")
        if any(v[i, i] != 0 for i in range(v.shape[0])):
            raise ValueError("matrix diagonal must be zero; use as_hollow() to clear it")
        if not (v == v.T).all():
            raise ValueError("matrix must be symmetric")

    @property
    def n(self) -> int:
        return self.values.shape[0]


def as_matrix(A, exact: Optional[bool] = None, zero_diagonal: bool = True) -> DenseSymMatrix:
    """Coerce ``A`` into a hollow symmetric matrix.

    The diagonal is cleared by default because the cycle statistic never reads
    it.  ``exact=None`` picks exact mode for integer input.
    """
    if isinstance(A, DenseSymMatrix):
        if exact is None or exact == A.exact:
            return A
        A = A.values
    arr = np.asarray(A)
    if exact is None:
        exact = arr.dtype.kind in "iub" or arr.dtype == object
    if exact:
        if arr.dtype.kind == "f":
            if not np.all(arr == np.round(arr)):
                raise ValueError("exact mode needs integer entries")
            arr = arr.astype(np.int64)
        vals = np.array([[int(x) for x in row] for row in arr], dtype=object).reshape(arr.shape)
    else:
        vals = np.array(arr, dtype=float)
    if zero_diagonal and vals.ndim == 2 and vals.shape[0] == vals.shape[1]:
        for i in range(vals.shape[0]):
            vals[i, i] = 0
    return DenseSymMatrix(vals, bool(exact))


def read_matrix(path) -> DenseSymMatrix:
    """Read ``n [integer]`` on the first line, then ``n`` rows of values."""
    with open(path) as fh:
        lines = [ln.split() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ValueError(f"{path}: empty matrix file")
    head = lines[0]
    try:
        n = int(head[0])
    except (ValueError, IndexError):
        raise ValueError(f"{path}: first line must start with the dimension n") from None
    exact = len(head) > 1 and head[1].lower() == "integer"
    rows = lines[1:]
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ValueError(f"{path}: expected {n} rows of {n} values")
    if exact:
        data = np.array([[int(x) for x in r] for r in rows], dtype=object)
    else:
        data = np.array([[float(x) for x in r] for r in rows])
    return as_matrix(data, exact=exact)


def format_scalar(x, exact: bool) -> str:
    if exact:
        return str(int(x))
    return f"{float(x):.15g}"


# ---------------------------------------------------------------------------
# expression evaluation
# ---------------------------------------------------------------------------


class Evaluator:
    """Evaluates expressions against one matrix, caching every sub-expression."""

    def __init__(self, A, exact: Optional[bool] = None, ifs_method: str = "direct"):
        if ifs_method not in IFS_METHODS:
            raise ValueError(f"unknown IFS method {ifs_method!r}; expected one of {IFS_METHODS}")
        self.ifs_method = ifs_method
        mat = as_matrix(A, exact)
        self.A = mat.values
        self.n = mat.n
        self.exact = mat.exact
        self.cache: dict[Expr, np.ndarray] = {}

    def ones(self) -> np.ndarray:
        if self.exact:
            return np.array([1] * self.n, dtype=object)
        return np.ones(self.n)

    def matrix(self, e) -> np.ndarray:
        hit = self.cache.get(e)
        if hit is not None:
            return hit
        if isinstance(e, BaseA):
            out = self.A
        elif isinstance(e, Hadamard):
            out = self.matrix(e.args[0])
            for x in e.args[1:]:
                out = out * self.matrix(x)
        elif isinstance(e, MatMul):
            out = self._product(e.args)
        elif isinstance(e, Diag):
            v = self.vector(e.vec)
            out = np.zeros((self.n, self.n), dtype=v.dtype)
            out[np.arange(self.n), np.arange(self.n)] = v
        else:
            raise TypeError(f"not a matrix expression: {e!r}")
        self._check(out, (self.n, self.n))
        self.cache[e] = out
        return out

    def _product(self, args) -> np.ndarray:
        acc = None
        scale = None  # pending left diagonal
        for x in args:
            if isinstance(x, Diag):
                v = self.vector(x.vec)
                if acc is None:
                    scale = v if scale is None else scale * v
                else:
                    acc = acc * v[None, :]
                continue
            X = self.matrix(x)
            if acc is None:
                acc = X if scale is None else scale[:, None] * X
            else:
                acc = acc @ X
        if acc is None:
            out = np.zeros((self.n, self.n), dtype=scale.dtype)
            out[np.arange(self.n), np.arange(self.n)] = scale
            return out
        return acc

    def vector(self, e) -> np.ndarray:
        hit = self.cache.get(e)
        if hit is not None:
            return hit
        if isinstance(e, Ones):
            out = self.ones()
        elif isinstance(e, MatVec):
            v = self.vector(e.vec)
            if isinstance(e.mat, MatMul) and e.mat not in self.cache:
                # right-to-left matrix-vector products avoid forming the product
                out = v
                for x in reversed(e.mat.args):
                    if isinstance(x, Diag):
                        out = self.vector(x.vec) * out
                    else:
                        out = self.matrix(x) @ out
            elif isinstance(e.mat, Diag):
                out = self.vector(e.mat.vec) * v
            else:
                out = self.matrix(e.mat) @ v
        elif isinstance(e, HadamardV):
            out = self.vector(e.args[0])
            for x in e.args[1:]:
                out = out * self.vector(x)
        else:
            raise TypeError(f"not a vector expression: {e!r}")
        self._check(out, (self.n,))
        self.cache[e] = out
        return out

    @staticmethod
    def _check(arr, shape):
        if arr.shape != shape:
            raise RuntimeError(f"internal dimension mismatch: got {arr.shape}, expected {shape}")

    def total(self, values) -> float | int:
        if self.exact:
            return sum(int(x) for x in np.ravel(values))
        return math.fsum(np.ravel(values))

    def sea(self, body: SEA):
        return self.total(self.vector(body.vector))

    def ifs(self, body: IFS, budget: float = IFS_BUDGET):
        """Full sum over ``layers`` indices of the pre-evaluated factors."""
        n, ell = self.n, body.layers
        cost = float(n) ** ell
        if cost > budget:
            raise BudgetExceeded(f"IFS term with {ell} layers at n={n}", cost, budget)
        return full_sum(
            n,
            ell,
            [(p - 1, self.vector(v)) for p, v in body.nodes],
            [(f.p - 1, f.q - 1, self.matrix(f.expr)) for f in body.factors],
            exact=self.exact,
            method=self.ifs_method,
        )

    def term(self, t: Term):
        if isinstance(t.body, SEA):
            return self.sea(t.body)
        return self.ifs(t.body)


IFS_METHODS = ("direct", "contract")
_BLOCK_ELEMENTS = 1 << 22


def full_sum(n, ell, nodes, edges, exact=False, method="direct"):
    """Sum over all ``ell``-tuples of ``prod v_a[j_a] * prod M[j_p, j_q]``.

    ``nodes`` is a list of ``(index, vector)`` and ``edges`` a list of
    ``(row_index, col_index, matrix)``, all 0-based.
    """
    if method == "direct":
        return direct_sum(n, ell, nodes, edges, exact)
    if method == "contract":
        return contracted_sum(n, ell, nodes, edges, exact)
    raise ValueError(f"unknown IFS method {method!r}; expected one of {IFS_METHODS}")


def direct_sum(n, ell, nodes, edges, exact=False):
    """Accumulate every one of the n**ell products.

    The leading indices are looped in Python and the trailing ones are
    expanded as a broadcast block of at most ``_BLOCK_ELEMENTS`` entries, so
    the work is exactly proportional to n**ell.  Block sums are combined with
    ``math.fsum`` in float mode.
    """
    inner = 0
    while inner < ell and n ** (inner + 1) <= _BLOCK_ELEMENTS:
        inner += 1
    inner = max(inner, 1)
    outer = ell - inner
    dtype = object if exact else float

    def axis_shape(axis):
        shape = [1] * inner
        shape[axis - outer] = n
        return shape

    parts = []
    for head in itertools.product(range(n), repeat=outer):
        scalar = 1
        block = np.ones([n] * inner, dtype=dtype)
        for a, v in nodes:
            if a < outer:
                scalar = scalar * v[head[a]]
            else:
                block = block * v.reshape(axis_shape(a))
        for p, q, M in edges:
            if p < outer and q < outer:
                scalar = scalar * M[head[p], head[q]]
            elif p < outer:
                block = block * M[head[p]].reshape(axis_shape(q))
            elif q < outer:
                block = block * M[:, head[q]].reshape(axis_shape(p))
            else:
                shape = [1] * inner
                shape[p - outer] = n
                shape[q - outer] = n
                if p < q:
                    block = block * M.reshape(shape)
                else:
                    block = block * M.T.reshape(shape)
        if exact:
            parts.append(scalar * sum(int(x) for x in block.ravel()))
        else:
            parts.append(float(scalar) * float(block.sum()))
    if exact:
        return sum(int(x) for x in parts)
    return math.fsum(parts)


def contracted_sum(n, ell, nodes, edges, exact=False):
    """Same value as :func:`direct_sum`, but the indices after the first are
    contracted pairwise with ``einsum`` (BLAS-backed, far fewer operations)."""
    if ell == 1:
        v = np.ones(n, dtype=object if exact else float)
        for _, x in nodes:
            v = v * x
        return sum(int(x) for x in v) if exact else math.fsum(v)
    letters = string.ascii_letters
    if ell > len(letters):
        raise ValueError("too many layers")
    operands_static = []
    subs_static = []
    first_vecs = []
    first_scalars = []
    for a, v in nodes:
        if a == 0:
            first_scalars.append(v)
        else:
            operands_static.append(v)
            subs_static.append(letters[a])
    for p, q, M in edges:
        if p == 0 or q == 0:
            # slice at the first index: a vector over the other endpoint
            first_vecs.append((q if p == 0 else p, M if p == 0 else M.T))
        else:
            operands_static.append(M)
            subs_static.append(letters[p] + letters[q])
    free = {letters[i] for i in range(1, ell)}
    used = set("".join(subs_static)) | {letters[o] for o, _ in first_vecs}
    # indices that appear in no factor contribute a factor n each
    idle = len(free - used)

    subs = subs_static + [letters[o] for o, _ in first_vecs]
    spec = ",".join(subs) + "->"
    path = None
    parts = []
    for i in range(n):
        scalar = 1
        for v in first_scalars:
            scalar = scalar * v[i]
        if scalar == 0:
            continue
        ops = operands_static + [M[i] for _, M in first_vecs]
        if ops:
            if exact:
                val = np.einsum(spec, *ops)
            else:
                if path is None:
                    path = np.einsum_path(spec, *ops, optimize="greedy")[0]
                val = np.einsum(spec, *ops, optimize=path)
        else:
            val = 1
        parts.append(scalar * val * n**idle)
    if exact:
        return sum(int(x) for x in parts)
    return math.fsum(float(x) for x in parts)


def eval_vector_expr(v, A, exact=None) -> np.ndarray:
    return Evaluator(A, exact).vector(v)


def eval_matrix_expr(M, A, exact=None) -> np.ndarray:
    return Evaluator(A, exact).matrix(M)


def eval_ifs(term, A, exact=None, budget: float = IFS_BUDGET, method: str = "direct"):
    body = term.body if isinstance(term, Term) else term
    return Evaluator(A, exact, ifs_method=method).ifs(body, budget)


def eval_formula(
    f: Formula,
    A,
    exact: Optional[bool] = None,
    evaluator: Optional[Evaluator] = None,
    ifs_method: str = "direct",
):
    """Sum of coefficient times term value; one sub-expression cache per call."""
    ev = evaluator if evaluator is not None else Evaluator(A, exact, ifs_method)
    vals = [t.coef * ev.term(t) for t in f.terms]
    if ev.exact:
        return sum(int(v) for v in vals)
    return math.fsum(vals)


def eval_terms(f: Formula, A, exact: Optional[bool] = None) -> list:
    ev = Evaluator(A, exact)
    return [ev.term(t) for t in f.terms]


# ---------------------------------------------------------------------------
# brute force
# ---------------------------------------------------------------------------


def brute_force_cm(A, m: int, budget: float = BRUTE_FORCE_BUDGET, exact: Optional[bool] = None):
    """Sum over ordered m-tuples of distinct indices of the cyclic product.

    Paths are extended one vertex at a time in vectorised batches; a bitmask
    records visited vertices and zero partial products are dropped early.
    """
    if m < 3:
        raise ValueError(f"cycle order must be >= 3, got {m}")
    mat = as_matrix(A, exact)
    n = mat.n
    cost = float(n) ** m
    if cost > budget:
        raise BudgetExceeded(f"brute force C_{m} at n={n}", cost, budget)
    if n < m:
        return 0 if mat.exact else 0.0
    W = mat.values
    if mat.exact:
        bound = max((abs(int(x)) for x in W.ravel()), default=0)
        fast = bound**m * math.perm(n, m) < 2**62
        W = W.astype(np.int64) if fast else W
    # int64 bitmasks hold 62 vertices; beyond that fall back to Python ints
    bits = (1 << np.arange(n)).astype(np.int64) if n <= 62 else np.array([1 << i for i in range(n)], dtype=object)
    start = np.arange(n)
    last = start.copy()
    mask = bits.copy()
    val = np.ones(n, dtype=W.dtype)
    for _ in range(m - 1):
        cand = np.arange(n)
        nxt = np.tile(cand, len(last))
        rep = np.repeat(np.arange(len(last)), n)
        ok = (mask[rep] & bits[nxt]) == 0
        w = W[last[rep], nxt]
        ok &= w != 0
        rep, nxt = rep[ok], nxt[ok]
        val = val[rep] * w[ok]
        start, mask, last = start[rep], mask[rep] | bits[nxt], nxt
        if len(last) == 0:
            return 0 if mat.exact else 0.0
    closing = val * W[last, start]
    if mat.exact:
        return sum(int(x) for x in closing)
    return math.fsum(closing)


# ---------------------------------------------------------------------------
# benchmarking
# ---------------------------------------------------------------------------


def random_hollow(n: int, rng: np.random.Generator) -> np.ndarray:
    X = rng.standard_normal((n, n))
    X = np.triu(X, 1)
    return X + X.T


@dataclass
class BenchRow:
    n: int
    formula_seconds: float
    brute_seconds: Optional[float]
    brute_estimate: float

    @property
    def ratio(self) -> Optional[float]:
        if self.brute_seconds is None:
            return None
        return self.brute_seconds / self.formula_seconds


@dataclass
class BenchReport:
    m: int
    rows: list[BenchRow]
    exponent: Optional[float]
    per_op_seconds: Optional[float] = None

    def to_text(self) -> str:
        lines = [f"bench m={self.m}"]
        lines.append(f"{'n':>6} {'formula_s':>12} {'brute_s':>12} {'brute_ops':>12} {'speedup':>10}")
        for r in self.rows:
            bs = f"{r.brute_seconds:12.4g}" if r.brute_seconds is not None else f"{'-':>12}"
            sp = f"{r.ratio:10.3g}" if r.ratio is not None else f"{'-':>10}"
            lines.append(f"{r.n:6d} {r.formula_seconds:12.4g} {bs} {r.brute_estimate:12.3g} {sp}")
        if self.exponent is not None:
            lines.append(f"growth exponent (log-log slope): {self.exponent:.3f}")
        return "\n".join(lines)


def growth_exponent(sizes: Sequence[int], times: Sequence[float]) -> Optional[float]:
    if len(sizes) < 2:
        return None
    x = np.log(np.asarray(sizes, dtype=float))
    y = np.log(np.asarray(times, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def bench(
    f: Formula,
    sizes: Sequence[int],
    seed: int = 0,
    repeats: int = 3,
    brute_budget: float = 10**7,
    ifs_method: str = "direct",
) -> BenchReport:
    """Time formula evaluation (best of ``repeats``) and, when cheap, brute force."""
    rng = np.random.default_rng(seed)
    rows = []
    for n in sizes:
        A = random_hollow(n, rng)
        best = math.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            eval_formula(f, A, exact=False, ifs_method=ifs_method)
            best = min(best, time.perf_counter() - t0)
        est = float(n) ** f.m
        brute = None
        if est <= brute_budget:
            t0 = time.perf_counter()
            brute_force_cm(A, f.m, budget=brute_budget, exact=False)
            brute = time.perf_counter() - t0
        rows.append(BenchRow(n, best, brute, est))
    exp = growth_exponent([r.n for r in rows], [r.formula_seconds for r in rows])
    return BenchReport(f.m, rows, exp)
