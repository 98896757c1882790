import json

import pytest

from ceef.emit import emit_latex, emit_latex_inline, emit_text, latex_sea, trace_power
from ceef.expr import A, ONES, hadamard, matmul, matvec
from ceef.formula import (
    IFS,
    SEA,
    Formula,
    FormulaParseError,
    Term,
    emit_json,
    formula_to_dict,
    parse_json,
)
from ceef.pruning import IFSFactor

AA = hadamard(A, A)


def test_m4_terms(formulas):
    f = formulas(4)
    assert [t.coef for t in f.terms] == [1, -2, 1]
    assert [t.body for t in f.terms] == [
        SEA(matvec(hadamard(A, matmul(A, A, A)), ONES)),
        SEA(matvec(AA, matvec(AA, ONES))),
        SEA(matvec(hadamard(A, A, A, A), ONES)),
    ]


def test_m4_inline_latex(formulas):
    assert emit_latex_inline(formulas(4)) == (
        "C_4 = \\tr(A^4) - 2 {\\bf 1}_n' (A \\circ A)^2 {\\bf 1}_n"
        " + {\\bf 1}_n' (A \\circ A \\circ A \\circ A) {\\bf 1}_n"
    )


def test_trace_power_detection():
    assert trace_power(matvec(AA, ONES)) == 2
    assert trace_power(matvec(hadamard(A, matmul(A, A)), ONES)) == 3
    assert trace_power(matvec(hadamard(AA, matmul(A, A)), ONES)) is None
    assert latex_sea(matvec(A, ONES)) == "{\\bf 1}_n' \\cdot (A \\cdot {\\bf 1}_n)"


def test_line_latex_has_one_line_per_term(formulas):
    f = formulas(6)
    lines = emit_latex(f).splitlines()
    assert len(lines) == len(f.terms)
    assert all(line[0] in "+-" for line in lines)


def test_text_format(formulas):
    out = emit_text(formulas(5)).splitlines()
    assert out[0] == "# C_5: 3 terms"
    assert out[1].split("\t")[:2] == ["+1", "(5,1)"]


def test_ifs_latex(formulas):
    (t,) = formulas(8).ifs_terms
    assert emit_latex(formulas(8)).count("\\Sigma_{i_1 i_2 i_3 i_4}") == 1
    assert t.coef == 22


@pytest.mark.parametrize("m", [4, 8, 10])
def test_json_round_trip(formulas, m):
    f = formulas(m)
    again = parse_json(emit_json(f))
    assert again == f
    assert emit_json(again) == emit_json(f)


def test_json_shape(formulas):
    doc = formula_to_dict(formulas(8))
    assert doc["m"] == 8 and len(doc["terms"]) == 44
    ifs = [t for t in doc["terms"] if t["kind"] == "ifs"]
    assert ifs[0]["expr"] is None and ifs[0]["layers"] == 4
    assert {"p", "q", "expr", "oriented"} <= set(ifs[0]["factors"][0])


def test_node_labels_round_trip(formulas):
    f = formulas(10)
    labelled = [t for t in f.ifs_terms if t.body.nodes]
    assert labelled
    assert parse_json(emit_json(f)).ifs_terms == f.ifs_terms


def _doc(formulas):
    return formula_to_dict(formulas(8))


def test_parse_errors_carry_paths(formulas):
    with pytest.raises(FormulaParseError, match="line 1 column"):
        parse_json("{bad")
    doc = _doc(formulas)
    doc["terms"][3]["coef"] = "x"
    with pytest.raises(FormulaParseError) as exc:
        parse_json(json.dumps(doc))
    assert exc.value.path == "$.terms[3].coef"
    doc = _doc(formulas)
    i = next(i for i, t in enumerate(doc["terms"]) if t["kind"] == "ifs")
    doc["terms"][i]["factors"][2]["expr"] = {"op": "ones", "args": []}
    with pytest.raises(FormulaParseError) as exc:
        parse_json(json.dumps(doc))
    assert exc.value.path == f"$.terms[{i}].factors[2].expr"
    doc = _doc(formulas)
    doc["terms"][0]["kind"] = "other"
    with pytest.raises(FormulaParseError, match="unknown term kind"):
        parse_json(json.dumps(doc))
    with pytest.raises(FormulaParseError):
        parse_json(json.dumps({"m": 4, "terms": []}))


def test_term_and_formula_invariants():
    body = SEA(matvec(A, ONES))
    with pytest.raises(ValueError):
        Term(0, body, 3, 3, 1)
    with pytest.raises(OverflowError):
        Term(2**63, body, 3, 3, 1)
    with pytest.raises(ValueError):
        Formula(3, (Term(1, body, 3, 2, 1),))
    with pytest.raises(ValueError):
        IFS(3, ())
    with pytest.raises(ValueError):
        IFS(4, (IFSFactor(2, 1, A, False),))
