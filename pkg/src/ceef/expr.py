"""Symbolic matrix and vector expressions over a single base matrix ``A``.

Expressions are immutable trees.  The constructor helpers (``hadamard``,
``matmul``, ``hadamard_v``, ``matvec``, ``diag``) always return normalised
trees: Hadamard products are flattened and sorted, matrix products are
flattened, and Hadamard/diagonal factors built from the all-ones vector are
dropped.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Union


class MatrixExpr:
    __slots__ = ()


class VectorExpr:
    __slots__ = ()


@dataclass(frozen=True)
class BaseA(MatrixExpr):
    def __repr__(self):
        return "A"


@dataclass(frozen=True)
class Hadamard(MatrixExpr):
    args: tuple[MatrixExpr, ...]

    def __post_init__(self):
        if len(self.args) < 2:
            raise ValueError("Hadamard needs at least two operands")


@dataclass(frozen=True)
class MatMul(MatrixExpr):
    args: tuple[MatrixExpr, ...]

    def __post_init__(self):
        if len(self.args) < 2:
            raise ValueError("MatMul needs at least two operands")


@dataclass(frozen=True)
class Diag(MatrixExpr):
    vec: VectorExpr


@dataclass(frozen=True)
class Ones(VectorExpr):
    def __repr__(self):
        return "Ones"


@dataclass(frozen=True)
class MatVec(VectorExpr):
    mat: MatrixExpr
    vec: VectorExpr


@dataclass(frozen=True)
class HadamardV(VectorExpr):
    args: tuple[VectorExpr, ...]

    def __post_init__(self):
        if len(self.args) < 2:
            raise ValueError("HadamardV needs at least two operands")


Expr = Union[MatrixExpr, VectorExpr]

A = BaseA()
ONES = Ones()


# ---------------------------------------------------------------------------
# canonical text (also the sort key for commutative operands)
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def to_text(e: Expr) -> str:
    """Canonical ASCII form: ``*`` Hadamard, ``@`` product, ``1`` all-ones."""
    if isinstance(e, BaseA):
        return "A"
    if isinstance(e, Ones):
        return "1"
    if isinstance(e, (Hadamard, HadamardV)):
        return "(" + " * ".join(to_text(x) for x in e.args) + ")"
    if isinstance(e, MatMul):
        return "(" + " @ ".join(to_text(x) for x in e.args) + ")"
    if isinstance(e, Diag):
        return "diag(" + to_text(e.vec) + ")"
    if isinstance(e, MatVec):
        return "(" + to_text(e.mat) + " @ " + to_text(e.vec) + ")"
    raise TypeError(f"not an expression: {e!r}")


def _sorted(args):
    return tuple(sorted(args, key=to_text))


# ---------------------------------------------------------------------------
# smart constructors
# ---------------------------------------------------------------------------


def hadamard(*args: MatrixExpr) -> MatrixExpr:
    flat: list[MatrixExpr] = []
    for x in args:
        if isinstance(x, Hadamard):
            flat.extend(x.args)
        else:
            flat.append(x)
    if not flat:
        raise ValueError("empty Hadamard product")
    if len(flat) == 1:
        return flat[0]
    return Hadamard(_sorted(flat))


def matmul(*args: MatrixExpr) -> MatrixExpr:
    flat: list[MatrixExpr] = []
    for x in args:
        if isinstance(x, MatMul):
            flat.extend(x.args)
        elif isinstance(x, Diag) and isinstance(x.vec, Ones):
            continue
        else:
            flat.append(x)
    if not flat:
        # product of identity factors only
        return Diag(ONES)
    if len(flat) == 1:
        return flat[0]
    return MatMul(tuple(flat))


def diag(v: VectorExpr) -> MatrixExpr:
    return Diag(v)


def hadamard_v(*args: VectorExpr) -> VectorExpr:
    flat: list[VectorExpr] = []
    for x in args:
        if isinstance(x, HadamardV):
            flat.extend(x.args)
        elif isinstance(x, Ones):
            continue
        else:
            flat.append(x)
    if not flat:
        return ONES
    if len(flat) == 1:
        return flat[0]
    return HadamardV(_sorted(flat))


def matvec(m: MatrixExpr, v: VectorExpr) -> VectorExpr:
    return MatVec(m, v)


def normalize(e: Expr) -> Expr:
    """Rebuild ``e`` through the smart constructors.  Idempotent."""
    if isinstance(e, (BaseA, Ones)):
        return e
    if isinstance(e, Hadamard):
        return hadamard(*(normalize(x) for x in e.args))
    if isinstance(e, MatMul):
        return matmul(*(normalize(x) for x in e.args))
    if isinstance(e, Diag):
        return Diag(normalize(e.vec))
    if isinstance(e, MatVec):
        return MatVec(normalize(e.mat), normalize(e.vec))
    if isinstance(e, HadamardV):
        return hadamard_v(*(normalize(x) for x in e.args))
    raise TypeError(f"not an expression: {e!r}")


def transpose(e: MatrixExpr) -> MatrixExpr:
    """Structural transpose; ``A`` and diagonal matrices are symmetric."""
    if isinstance(e, (BaseA, Diag)):
        return e
    if isinstance(e, Hadamard):
        return hadamard(*(transpose(x) for x in e.args))
    if isinstance(e, MatMul):
        return matmul(*(transpose(x) for x in reversed(e.args)))
    raise TypeError(f"not a matrix expression: {e!r}")


def is_symmetric(e: MatrixExpr) -> bool:
    """Sufficient test: the normalised transpose is the same tree."""
    return transpose(e) == normalize(e)


def size(e: Expr) -> int:
    """Node count of the tree."""
    if isinstance(e, (BaseA, Ones)):
        return 1
    if isinstance(e, Diag):
        return 1 + size(e.vec)
    if isinstance(e, MatVec):
        return 1 + size(e.mat) + size(e.vec)
    return 1 + sum(size(x) for x in e.args)


# ---------------------------------------------------------------------------
# JSON AST
# ---------------------------------------------------------------------------


class ExprParseError(ValueError):
    def __init__(self, msg: str, path: str = "$"):
        super().__init__(f"{path}: {msg}")
        self.path = path


def to_ast(e: Expr) -> dict:
    if isinstance(e, BaseA):
        return {"op": "A", "args": []}
    if isinstance(e, Ones):
        return {"op": "ones", "args": []}
    if isinstance(e, (Hadamard, HadamardV)):
        return {"op": "hadamard", "args": [to_ast(x) for x in e.args]}
    if isinstance(e, MatMul):
        return {"op": "matmul", "args": [to_ast(x) for x in e.args]}
    if isinstance(e, Diag):
        return {"op": "diag", "args": [to_ast(e.vec)]}
    if isinstance(e, MatVec):
        return {"op": "matvec", "args": [to_ast(e.mat), to_ast(e.vec)]}
    raise TypeError(f"not an expression: {e!r}")


_MATRIX_OPS = {"A", "hadamard", "matmul", "diag"}
_VECTOR_OPS = {"ones", "hadamard", "matvec"}


def from_ast(node, kind: str = "vector", path: str = "$") -> Expr:
    """Parse an AST dict; ``kind`` says whether a matrix or vector is expected."""
    if not isinstance(node, dict):
        raise ExprParseError("expected an object with 'op' and 'args'", path)
    op = node.get("op")
    args = node.get("args", [])
    if not isinstance(args, list):
        raise ExprParseError("'args' must be a list", path)
    allowed = _MATRIX_OPS if kind == "matrix" else _VECTOR_OPS
    if op not in allowed:
        raise ExprParseError(f"op {op!r} is not a valid {kind} operation", path)

    def sub(i, k):
        return from_ast(args[i], k, f"{path}.args[{i}]")

    def arity(n):
        if len(args) != n:
            raise ExprParseError(f"op {op!r} takes {n} argument(s), got {len(args)}", path)

    if op == "A":
        arity(0)
        return A
    if op == "ones":
        arity(0)
        return ONES
    if op == "diag":
        arity(1)
        return Diag(sub(0, "vector"))
    if op == "matvec":
        arity(2)
        return MatVec(sub(0, "matrix"), sub(1, "vector"))
    if len(args) < 2:
        raise ExprParseError(f"op {op!r} needs at least two arguments", path)
    parts = tuple(sub(i, kind) for i in range(len(args)))
    if op == "matmul":
        return MatMul(parts)
    return Hadamard(parts) if kind == "matrix" else HadamardV(parts)
