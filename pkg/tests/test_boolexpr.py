import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rigorscreen.boolexpr import (
    BooleanRule,
    RuleParseError,
    assignments,
    evaluate_terms,
    expression_truth_table,
    minimize_truth_table,
    parse_rule,
    render_terms,
)


def brute_table(terms, k):
    # independent evaluator: direct DNF semantics, no shared code path
    out = []
    for inputs in itertools.product((False, True), repeat=k):
        value = False
        for term in terms:
            if all(inputs[i] == want for i, want in term):
                value = True
                break
        out.append(value)
    return tuple(out)


def test_all_three_variable_tables_roundtrip_exactly():
    for bits in range(256):
        table = tuple(bool((bits >> r) & 1) for r in range(8))
        terms = minimize_truth_table(table, 3)
        assert brute_table(terms, 3) == table, f"table {bits:08b} mismatched"


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=1, max_value=5), st.data())
def test_random_tables_roundtrip(k, data):
    table = tuple(data.draw(st.booleans()) for _ in range(2**k))
    terms = minimize_truth_table(table, k)
    assert brute_table(terms, k) == table


def test_constant_tables():
    assert minimize_truth_table((False, False, False, False), 2) == ()
    assert render_terms((), ("a", "b")) == "FALSE"
    terms = minimize_truth_table((True, True, True, True), 2)
    assert render_terms(terms, ("a", "b")) == "TRUE"
    assert all(evaluate_terms(terms, x) for x in assignments(2))


def test_render_single_literals_share_parens():
    # (B OR C) over variables (A, B, C)
    table = tuple(b or c for a, b, c in assignments(3))
    rule = BooleanRule.from_truth_table(table, ("A", "B", "C"))
    assert rule.expression == "(B OR C)"


def test_render_two_of_three_majority():
    names = ("CONSORT-TM", "pre-rob", "SciScore")
    table = tuple(sum(x) >= 2 for x in assignments(3))
    rule = BooleanRule.from_truth_table(table, names)
    assert rule.expression == (
        "(CONSORT-TM AND pre-rob) OR (CONSORT-TM AND SciScore) "
        "OR (pre-rob AND SciScore)"
    )
    assert expression_truth_table(rule.expression, names) == table


def test_render_single_tool():
    names = ("SciScore", "SoftCite")
    table = tuple(b for a, b in assignments(2))
    rule = BooleanRule.from_truth_table(table, names)
    assert rule.expression == "(SoftCite)"


def test_render_negated_literal():
    names = ("A", "B")
    table = tuple(not a for a, b in assignments(2))
    rule = BooleanRule.from_truth_table(table, names)
    assert rule.expression == "(NOT A)"
    assert expression_truth_table(rule.expression, names) == table


@settings(max_examples=150, deadline=None)
@given(st.integers(min_value=1, max_value=4), st.data())
def test_rendered_rule_parses_back_to_same_table(k, data):
    names = tuple(f"tool{i}" for i in range(k))
    table = tuple(data.draw(st.booleans()) for _ in range(2**k))
    rule = BooleanRule.from_truth_table(table, names)
    assert expression_truth_table(rule.expression, names) == table


def test_monotone_tables_have_no_negated_literals():
    # all monotone functions of 3 variables
    for bits in range(256):
        table = {x: bool((bits >> r) & 1) for r, x in enumerate(assignments(3))}
        monotone = all(
            table[x] <= table[y]
            for x in table
            for y in table
            if all(a <= b for a, b in zip(x, y))
        )
        if not monotone:
            continue
        rule = BooleanRule.from_truth_table(
            tuple(table[x] for x in assignments(3)), ("a", "b", "c")
        )
        assert not rule.has_negated_literal(), rule.expression


def test_parse_rejects_garbage():
    with pytest.raises(RuleParseError):
        parse_rule("(A OR", ("A",))
    with pytest.raises(RuleParseError):
        parse_rule("A B", ("A", "B"))
    with pytest.raises(RuleParseError):
        parse_rule("(A OR Z)", ("A", "B"))
    with pytest.raises(RuleParseError):
        parse_rule("", ("A",))


def test_parse_constants_and_precedence():
    names = ("x", "y")
    assert expression_truth_table("TRUE", names) == (True,) * 4
    assert expression_truth_table("FALSE", names) == (False,) * 4
    # AND binds tighter than OR
    got = expression_truth_table("x OR y AND NOT x", names)
    want = tuple(x or (y and not x) for x, y in assignments(2))
    assert got == want


def test_rule_invariant_rejects_mismatched_table():
    with pytest.raises(ValueError):
        BooleanRule(names=("a",), terms=(), truth_table=(True, False))
