"""Boolean rules over tool outputs: truth tables, minimization, rendering.

A rule is a disjunctive normal form over named boolean variables. Terms are
tuples of literals ``(var_index, required_value)``; a term with
``required_value=False`` is a negated literal. The empty disjunction is the
constant FALSE and a disjunction containing the empty term is the constant
TRUE.

Minimization uses Quine-McCluskey prime implicants with an
essential-then-greedy cover. The cover is not guaranteed minimal for many
variables, but the simplified expression is always truth-table-equivalent
to its input, which is what rule extraction requires.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field

Literal = tuple[int, bool]
Term = tuple[Literal, ...]

_RESERVED = {"AND", "OR", "NOT", "TRUE", "FALSE"}


def assignments(k: int) -> list[tuple[bool, ...]]:
    """All 2^k boolean input vectors, first variable most significant."""
    return list(itertools.product((False, True), repeat=k))


def evaluate_terms(terms: tuple[Term, ...], inputs: tuple[bool, ...]) -> bool:
    return any(all(inputs[i] == want for i, want in term) for term in terms)


# --- Quine-McCluskey ---------------------------------------------------------
#
# Cubes are tuples over {0, 1, None}; None marks an eliminated variable.


def _minterm_to_cube(r: int, k: int) -> tuple:
    return tuple((r >> (k - 1 - j)) & 1 for j in range(k))


def _try_merge(a: tuple, b: tuple) -> tuple | None:
    diff = -1
    for j, (x, y) in enumerate(zip(a, b)):
        if x != y:
            if x is None or y is None or diff >= 0:
                return None
            diff = j
    if diff < 0:
        return None
    return a[:diff] + (None,) + a[diff + 1 :]


def _covers(cube: tuple, minterm: tuple) -> bool:
    return all(c is None or c == m for c, m in zip(cube, minterm))


def _cube_key(cube: tuple) -> tuple:
    return tuple(-1 if v is None else v for v in cube)


def _prime_implicants(minterms: list[tuple]) -> list[tuple]:
    level = sorted(set(minterms), key=_cube_key)
    primes: list[tuple] = []
    while level:
        merged: set[tuple] = set()
        used: set[tuple] = set()
        for a, b in itertools.combinations(level, 2):
            m = _try_merge(a, b)
            if m is not None:
                merged.add(m)
                used.add(a)
                used.add(b)
        primes.extend(c for c in level if c not in used)
        level = sorted(merged, key=_cube_key)
    return primes


def _select_cover(primes: list[tuple], minterms: list[tuple]) -> list[tuple]:
    remaining = set(range(len(minterms)))
    coverage = {
        p: {i for i in remaining if _covers(p, minterms[i])} for p in primes
    }
    chosen: list[tuple] = []
    # essential primes: minterms covered by exactly one implicant
    for i in sorted(remaining):
        hits = [p for p in primes if i in coverage[p]]
        if len(hits) == 1 and hits[0] not in chosen:
            chosen.append(hits[0])
    for p in chosen:
        remaining -= coverage[p]
    # greedy on the rest; prefer wider cubes, tie-break on cube order
    ordered = sorted(coverage, key=_cube_key)
    while remaining:
        best = max(
            ordered,
            key=lambda p: (
                len(coverage[p] & remaining),
                sum(1 for x in p if x is None),
            ),
        )
        if not coverage[best] & remaining:
            break
        chosen.append(best)
        remaining -= coverage[best]
    return chosen


def _cube_to_term(cube: tuple) -> Term:
    return tuple((j, bool(v)) for j, v in enumerate(cube) if v is not None)


def minimize_truth_table(table: list[bool] | tuple[bool, ...], k: int) -> tuple[Term, ...]:
    """Simplified DNF terms equivalent to the given 2^k truth table."""
    if len(table) != 2**k:
        raise ValueError(f"table length {len(table)} != 2^{k}")
    minterms = [_minterm_to_cube(r, k) for r, v in enumerate(table) if v]
    if not minterms:
        return ()
    if len(minterms) == 2**k:
        return ((),)
    primes = _prime_implicants(minterms)
    cover = _select_cover(primes, minterms)
    terms = sorted(_cube_to_term(c) for c in cover)
    return tuple(sorted(terms, key=lambda t: (len(t), t)))


# --- rendering and parsing ---------------------------------------------------


def _literal_str(lit: Literal, names: tuple[str, ...]) -> str:
    idx, want = lit
    return names[idx] if want else f"NOT {names[idx]}"


def render_terms(terms: tuple[Term, ...], names: tuple[str, ...]) -> str:
    """Canonical string form: parenthesized DNF with AND/OR/NOT."""
    if not terms:
        return "FALSE"
    if any(len(t) == 0 for t in terms):
        return "TRUE"
    if all(len(t) == 1 for t in terms):
        inner = " OR ".join(_literal_str(t[0], names) for t in terms)
        return f"({inner})"
    return " OR ".join(
        "(" + " AND ".join(_literal_str(lit, names) for lit in t) + ")"
        for t in terms
    )


_TOKEN_RE = re.compile(r"\(|\)|[^\s()]+")


class RuleParseError(ValueError):
    pass


class _Parser:
    def __init__(self, tokens: list[str]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> str:
        tok = self.peek()
        if tok is None:
            raise RuleParseError("unexpected end of expression")
        self.pos += 1
        return tok

    def parse_expr(self):
        node = self.parse_term()
        while self.peek() == "OR":
            self.take()
            node = ("or", node, self.parse_term())
        return node

    def parse_term(self):
        node = self.parse_factor()
        while self.peek() == "AND":
            self.take()
            node = ("and", node, self.parse_factor())
        return node

    def parse_factor(self):
        tok = self.take()
        if tok == "NOT":
            return ("not", self.parse_factor())
        if tok == "(":
            node = self.parse_expr()
            if self.take() != ")":
                raise RuleParseError("expected closing parenthesis")
            return node
        if tok == ")":
            raise RuleParseError("unexpected ')'")
        if tok == "TRUE":
            return ("const", True)
        if tok == "FALSE":
            return ("const", False)
        if tok in _RESERVED:
            raise RuleParseError(f"unexpected operator {tok!r}")
        return ("var", tok)


def _eval_node(node, env: dict[str, bool]) -> bool:
    op = node[0]
    if op == "const":
        return node[1]
    if op == "var":
        if node[1] not in env:
            raise RuleParseError(f"unknown variable {node[1]!r}")
        return env[node[1]]
    if op == "not":
        return not _eval_node(node[1], env)
    if op == "and":
        return _eval_node(node[1], env) and _eval_node(node[2], env)
    return _eval_node(node[1], env) or _eval_node(node[2], env)


def parse_rule(expression: str, names: tuple[str, ...] | list[str]):
    """Parse a rendered rule back into an evaluable AST."""
    tokens = _TOKEN_RE.findall(expression)
    if not tokens:
        raise RuleParseError("empty expression")
    parser = _Parser(tokens)
    node = parser.parse_expr()
    if parser.peek() is not None:
        raise RuleParseError(f"trailing tokens at {parser.pos}")
    known = set(names)

    def check(n):
        if n[0] == "var" and n[1] not in known:
            raise RuleParseError(f"unknown variable {n[1]!r}")
        for child in n[1:]:
            if isinstance(child, tuple):
                check(child)

    check(node)
    return node


def expression_truth_table(expression: str, names: tuple[str, ...] | list[str]) -> tuple[bool, ...]:
    """Truth table of a rule string under the given variable order."""
    node = parse_rule(expression, names)
    table = []
    for inputs in assignments(len(names)):
        env = dict(zip(names, inputs))
        table.append(_eval_node(node, env))
    return tuple(table)


@dataclass(frozen=True)
class BooleanRule:
    """A simplified DNF rule plus the truth table it must reproduce."""

    names: tuple[str, ...]
    terms: tuple[Term, ...]
    truth_table: tuple[bool, ...]
    expression: str = field(default="")

    def __post_init__(self):
        if not self.expression:
            object.__setattr__(
                self, "expression", render_terms(self.terms, self.names)
            )
        k = len(self.names)
        if len(self.truth_table) != 2**k:
            raise ValueError("truth table size does not match variable count")
        for r, inputs in enumerate(assignments(k)):
            if evaluate_terms(self.terms, inputs) != self.truth_table[r]:
                raise ValueError(
                    f"expression disagrees with truth table at row {r}"
                )

    @classmethod
    def from_truth_table(
        cls, table: list[bool] | tuple[bool, ...], names: tuple[str, ...] | list[str]
    ) -> "BooleanRule":
        names = tuple(names)
        terms = minimize_truth_table(tuple(table), len(names))
        return cls(names=names, terms=terms, truth_table=tuple(bool(v) for v in table))

    def evaluate(self, inputs: tuple[bool, ...] | list[bool]) -> bool:
        return evaluate_terms(self.terms, tuple(inputs))

    def has_negated_literal(self) -> bool:
        return any(not want for term in self.terms for _, want in term)
