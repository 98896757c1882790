"""LaTeX and plain-text rendering of formulas.

Power notation (``(A \\circ A)^2``) and the trace shorthand are applied here
only; the expression trees themselves stay in canonical form.
"""

from __future__ import annotations

from .expr import BaseA, Diag, Hadamard, HadamardV, MatMul, MatVec, Ones, to_text
from .formula import IFS, SEA, Formula, Term, emit_json, parse_json  # noqa: F401

ONES_TEX = "{\\bf 1}_n"


def _power(base: str, r: int) -> str:
    if r == 1:
        return base
    return f"{base}^{r}" if r < 10 else f"{base}^{{{r}}}"


def _runs(items, key):
    """Group consecutive equal items: [(item, count), ...]."""
    out = []
    for x in items:
        if out and key(out[-1][0]) == key(x):
            out[-1][1] += 1
        else:
            out.append([x, 1])
    return out


def latex_matrix(e) -> str:
    if isinstance(e, BaseA):
        return "A"
    if isinstance(e, Hadamard):
        return "(" + " \\circ ".join(latex_matrix(x) for x in e.args) + ")"
    if isinstance(e, MatMul):
        parts = [_power(latex_matrix(x), r) for x, r in _runs(e.args, to_text)]
        if len(parts) == 1:
            return parts[0]
        return "(" + " \\cdot ".join(parts) + ")"
    if isinstance(e, Diag):
        return "\\mathrm{d}(" + latex_vector(e.vec) + ")"
    raise TypeError(f"not a matrix expression: {e!r}")


def _chain(v):
    """Split nested MatVec into ([M1, M2, ...], w) with v = M1 (M2 (... w))."""
    mats = []
    while isinstance(v, MatVec):
        mats.append(v.mat)
        v = v.vec
    return mats, v


def latex_vector(v) -> str:
    if isinstance(v, Ones):
        return ONES_TEX
    if isinstance(v, HadamardV):
        return "(" + " \\circ ".join(latex_vector(x) for x in v.args) + ")"
    if isinstance(v, MatVec):
        mats, w = _chain(v)
        parts = [_power(latex_matrix(m), r) for m, r in _runs(mats, to_text)]
        return "(" + " \\cdot ".join(parts + [latex_vector(w)]) + ")"
    raise TypeError(f"not a vector expression: {v!r}")


def trace_power(v) -> int | None:
    """r when ``v`` is ``(A o A^(r-1)) 1``, whose sum is tr(A^r)."""
    if not (isinstance(v, MatVec) and isinstance(v.vec, Ones) and isinstance(v.mat, Hadamard)):
        return None
    args = v.mat.args
    if len(args) != 2:
        return None
    x, y = args
    if isinstance(y, BaseA):
        x, y = y, x
    if not isinstance(x, BaseA):
        return None
    if isinstance(y, BaseA):
        return 2
    if isinstance(y, MatMul) and all(isinstance(z, BaseA) for z in y.args):
        return len(y.args) + 1
    return None


def latex_sea(v, inline: bool = False) -> str:
    r = trace_power(v)
    if r is not None:
        return "\\tr(" + _power("A", r) + ")"
    if inline:
        mats, w = _chain(v)
        if mats and isinstance(w, Ones):
            parts = [_power(latex_matrix(m), r) for m, r in _runs(mats, to_text)]
            return f"{ONES_TEX}' " + " ".join(parts) + f" {ONES_TEX}"
        return f"{ONES_TEX}' " + latex_vector(v)
    return f"{ONES_TEX}' \\cdot " + latex_vector(v)


def _idx(p: int) -> str:
    return f"i_{p}" if p < 10 else f"i_{{{p}}}"


def latex_ifs(body: IFS) -> str:
    out = ["\\Sigma_{" + " ".join(_idx(p) for p in range(1, body.layers + 1)) + "}"]
    for p, v in body.nodes:
        out.append(latex_vector(v) + "_{" + _idx(p) + "}")
    for f in body.factors:
        out.append(latex_matrix(f.expr) + "_{" + _idx(f.p) + " " + _idx(f.q) + "}")
    return " ".join(out)


def latex_term_body(t: Term, inline: bool = False) -> str:
    if isinstance(t.body, SEA):
        return latex_sea(t.body.vector, inline)
    return latex_ifs(t.body)


def emit_latex(f: Formula) -> str:
    """One line per term: signed coefficient, then the term."""
    return "\n".join(f"{t.coef:+d} {latex_term_body(t)}" for t in f.terms) + "\n"


def emit_latex_inline(f: Formula) -> str:
    """Single display equation ``C_m = ...`` with unit coefficients elided."""
    pieces = []
    for i, t in enumerate(f.terms):
        body = latex_term_body(t, inline=True)
        mag = abs(t.coef)
        core = body if mag == 1 else f"{mag} {body}"
        if i == 0:
            pieces.append(core if t.coef > 0 else f"-{core}")
        else:
            pieces.append(("+ " if t.coef > 0 else "- ") + core)
    return f"C_{f.m} = " + " ".join(pieces)


def text_term_body(t: Term) -> str:
    if isinstance(t.body, SEA):
        return "sum " + to_text(t.body.vector)
    body = t.body
    parts = [f"{to_text(v)}[{p}]" for p, v in body.nodes]
    parts += [f"{to_text(x.expr)}[{x.p},{x.q}]" for x in body.factors]
    return f"fullsum[{body.layers}] " + " ".join(parts)


def emit_text(f: Formula) -> str:
    """Tab-separated: coefficient, (k,t), graph string, term."""
    lines = [f"# C_{f.m}: {len(f.terms)} terms"]
    for t in f.terms:
        g = t.graph.to_string() if t.weights is not None else "-"
        lines.append(f"{t.coef:+d}\t({t.k},{t.t})\t{g}\t{text_term_body(t)}")
    return "\n".join(lines) + "\n"
