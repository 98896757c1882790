"""Compiled formulas: signed integer combinations of SEA and IFS terms."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Union

from .catalog import Catalog, load_or_build_catalog
from .expr import ExprParseError, VectorExpr, from_ast, to_ast
from .partitions import DEFAULT_MAX_ORDER, MultiGraph
from .pruning import IFSFactor, ifs_factors, prune_to_completion

INT64_MAX = 2**63 - 1


class FormulaParseError(ValueError):
    """Malformed formula document; the message starts with a JSON path."""

    def __init__(self, msg: str, path: str = "$"):
        super().__init__(f"{path}: {msg}")
        self.path = path


@dataclass(frozen=True)
class SEA:
    """Scalar ``1' v``."""

    vector: VectorExpr


@dataclass(frozen=True)
class IFS:
    """Full sum over ``layers`` free indices of node and edge factors."""

    layers: int
    factors: tuple[IFSFactor, ...]
    nodes: tuple[tuple[int, VectorExpr], ...] = ()

    def __post_init__(self):
        if self.layers < 4:
            raise ValueError(f"IFS term needs at least 4 layers, got {self.layers}")
        for f in self.factors:
            if not 1 <= f.p < f.q <= self.layers:
                raise ValueError(f"bad factor index pair ({f.p}, {f.q})")
        for p, _ in self.nodes:
            if not 1 <= p <= self.layers:
                raise ValueError(f"bad node index {p}")


@dataclass(frozen=True)
class Term:
    coef: int
    body: Union[SEA, IFS]
    m: int
    k: int
    t: int
    weights: Optional[tuple[tuple[int, ...], ...]] = None

    def __post_init__(self):
        if self.coef == 0:
            raise ValueError("term coefficient must be non-zero")
        if abs(self.coef) > INT64_MAX:
            raise OverflowError(f"coefficient {self.coef} does not fit in 64 bits")

    @property
    def kind(self) -> str:
        return "sea" if isinstance(self.body, SEA) else "ifs"

    @property
    def graph(self) -> Optional[MultiGraph]:
        return MultiGraph(self.weights) if self.weights is not None else None


@dataclass(frozen=True)
class Formula:
    m: int
    terms: tuple[Term, ...]

    def __post_init__(self):
        if not self.terms:
            raise ValueError("formula has no terms")
        if sum(1 for t in self.terms if t.k == self.m) != 1:
            raise ValueError("formula must contain exactly one simple-cycle term")

    def __len__(self):
        return len(self.terms)

    @property
    def ifs_terms(self) -> list[Term]:
        return [t for t in self.terms if t.kind == "ifs"]


def term_from_class(c) -> Term:
    res = prune_to_completion(c.representative)
    if res.is_sea:
        body = SEA(res.sea_vector)
    else:
        layers, nodes, factors = ifs_factors(res.ifs_graph)
        body = IFS(layers, factors, nodes)
    return Term(c.a, body, c.m, c.k, c.t, c.representative.weights)


def formula_from_catalog(cat: Catalog) -> Formula:
    return Formula(cat.m, tuple(term_from_class(c) for c in cat.classes))


def build_formula(
    m: int,
    cache_dir=None,
    max_order: int = DEFAULT_MAX_ORDER,
    use_cache: bool = True,
    threads: int = 1,
) -> Formula:
    """Catalog (cached) -> prune every class -> ordered formula."""
    cat = load_or_build_catalog(
        m, cache_dir=cache_dir, max_order=max_order, threads=threads, use_cache=use_cache
    )
    return formula_from_catalog(cat)


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def formula_to_dict(f: Formula) -> dict:
    terms = []
    for t in f.terms:
        d: dict = {"coef": t.coef, "kind": t.kind, "k": t.k, "t": t.t}
        if isinstance(t.body, SEA):
            d["expr"] = to_ast(t.body.vector)
        else:
            d["expr"] = None
            d["layers"] = t.body.layers
            d["factors"] = [
                {"p": x.p, "q": x.q, "expr": to_ast(x.expr), "oriented": x.oriented}
                for x in t.body.factors
            ]
            if t.body.nodes:
                d["nodes"] = [{"p": p, "expr": to_ast(v)} for p, v in t.body.nodes]
        if t.weights is not None:
            d["weights"] = [list(r) for r in t.weights]
        terms.append(d)
    return {"m": f.m, "terms": terms}


def emit_json(f: Formula, indent: Optional[int] = None) -> str:
    return json.dumps(formula_to_dict(f), indent=indent)


def _require(obj: dict, key: str, typ, path: str):
    if key not in obj:
        raise FormulaParseError(f"missing field {key!r}", path)
    val = obj[key]
    if typ is int and (isinstance(val, bool) or not isinstance(val, int)):
        raise FormulaParseError(f"field {key!r} must be an integer", f"{path}.{key}")
    if typ is not int and not isinstance(val, typ):
        raise FormulaParseError(f"field {key!r} has the wrong type", f"{path}.{key}")
    return val


def formula_from_dict(doc) -> Formula:
    if not isinstance(doc, dict):
        raise FormulaParseError("top level must be an object")
    m = _require(doc, "m", int, "$")
    raw_terms = _require(doc, "terms", list, "$")
    if not raw_terms:
        raise FormulaParseError("'terms' must be non-empty", "$.terms")
    terms = []
    try:
        for i, rt in enumerate(raw_terms):
            path = f"$.terms[{i}]"
            if not isinstance(rt, dict):
                raise FormulaParseError("term must be an object", path)
            coef = _require(rt, "coef", int, path)
            kind = _require(rt, "kind", str, path)
            k = _require(rt, "k", int, path)
            t = _require(rt, "t", int, path)
            if kind == "sea":
                body = SEA(from_ast(rt.get("expr"), "vector", f"{path}.expr"))
            elif kind == "ifs":
                layers = _require(rt, "layers", int, path)
                factors = []
                for j, rf in enumerate(_require(rt, "factors", list, path)):
                    fp = f"{path}.factors[{j}]"
                    if not isinstance(rf, dict):
                        raise FormulaParseError("factor must be an object", fp)
                    factors.append(
                        IFSFactor(
                            _require(rf, "p", int, fp),
                            _require(rf, "q", int, fp),
                            from_ast(rf.get("expr"), "matrix", f"{fp}.expr"),
                            bool(rf.get("oriented", False)),
                        )
                    )
                nodes = []
                for j, rn in enumerate(rt.get("nodes", [])):
                    np_ = f"{path}.nodes[{j}]"
                    if not isinstance(rn, dict):
                        raise FormulaParseError("node label must be an object", np_)
                    nodes.append((_require(rn, "p", int, np_), from_ast(rn.get("expr"), "vector", f"{np_}.expr")))
                try:
                    body = IFS(layers, tuple(factors), tuple(nodes))
                except ValueError as exc:
                    raise FormulaParseError(str(exc), path) from None
            else:
                raise FormulaParseError(f"unknown term kind {kind!r}", f"{path}.kind")
            weights = rt.get("weights")
            if weights is not None:
                weights = tuple(tuple(r) for r in weights)
            try:
                terms.append(Term(coef, body, m, k, t, weights))
            except (ValueError, OverflowError) as exc:
                raise FormulaParseError(str(exc), path) from None
    except ExprParseError as exc:
        raise FormulaParseError(str(exc).split(": ", 1)[-1], exc.path) from None
    try:
        return Formula(m, tuple(terms))
    except ValueError as exc:
        raise FormulaParseError(str(exc), "$") from None


def parse_json(text: str) -> Formula:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormulaParseError(f"invalid JSON: {exc.msg}", f"line {exc.lineno} column {exc.colno}") from None
    return formula_from_dict(doc)
