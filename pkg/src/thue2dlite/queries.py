"""Boolean conjunctive queries with inequalities and safe negation.

A query is a tuple of components (independent conjunct blocks, each with at
most one distinguished variable) plus cross literals that relate the
distinguished variables of different components.  Single-purpose builders
produce every query family the reduction needs; :func:`evaluate` decides
satisfiability over a finite structure by backtracking with forward checking
and a most-constrained-variable order, returning the first witness.

Family overview, for a fixed instance:

* ``rule_divergence_query(k)``: the two sides of rule ``k`` walk from a
  shared start to two distinct endpoints (inequality literal).
* ``marked_target_query(sym)``: some ``sym`` edge points at a marked vertex.
* ``goal_merge_query()``: from a marked vertex, the two goal words reach a
  common endpoint.
* ``rule_gap_query(k, side)``: one side of rule ``k`` walks through while
  the other side's final edge is absent (negated literal).
* ``coverage_gap_query(sym, inverse)``: a vertex whose ``T`` range is not
  closed under ``sym`` successors (or predecessors).

The union builders disjoin these families; the combined builders conjoin
them with pairwise constraints between the distinguished variables.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

from .errors import InputSyntaxError, UnknownSymbolError, UnsafeQueryError
from .rewriting import ThueInstance, Word
from .structures import A_PRED, Structure, T_ROLE


@dataclass(frozen=True)
class UnaryAtom:
    """The mark predicate applied to a variable."""

    var: str


@dataclass(frozen=True)
class BinaryAtom:
    rel: str
    source: str
    target: str


@dataclass(frozen=True)
class Inequality:
    left: str
    right: str


@dataclass(frozen=True)
class NegatedAtom:
    rel: str
    source: str
    target: str


Literal = UnaryAtom | BinaryAtom | Inequality | NegatedAtom


def literal_variables(lit: Literal) -> tuple[str, ...]:
    if isinstance(lit, UnaryAtom):
        return (lit.var,)
    if isinstance(lit, Inequality):
        return (lit.left, lit.right)
    return (lit.source, lit.target)


@dataclass(frozen=True)
class Component:
    """One conjunct block; variables are local to the block."""

    comp_id: str
    distinguished: str | None
    literals: tuple[Literal, ...]


@dataclass(frozen=True)
class ConjunctiveQuery:
    components: tuple[Component, ...]
    cross: tuple[Literal, ...] = ()

    @property
    def literals(self) -> tuple[Literal, ...]:
        flat: list[Literal] = []
        for comp in self.components:
            flat.extend(comp.literals)
        flat.extend(self.cross)
        return tuple(flat)

    @property
    def variables(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for comp in self.components:
            if comp.distinguished is not None:
                seen.setdefault(comp.distinguished)
            for lit in comp.literals:
                for v in literal_variables(lit):
                    seen.setdefault(v)
        for lit in self.cross:
            for v in literal_variables(lit):
                seen.setdefault(v)
        return tuple(seen)

    def distinguished_variables(self) -> dict[str, str]:
        """Component id to distinguished variable, in component order."""
        return {
            c.comp_id: c.distinguished
            for c in self.components
            if c.distinguished is not None
        }


@dataclass(frozen=True)
class UnionQuery:
    disjuncts: tuple[ConjunctiveQuery, ...]


Assignment = dict[str, int]


def is_safe(q: ConjunctiveQuery) -> bool:
    """Every variable of a negative literal also occurs in a positive one."""
    positive: set[str] = set()
    negative: set[str] = set()
    for lit in q.literals:
        if isinstance(lit, (UnaryAtom, BinaryAtom)):
            positive.update(literal_variables(lit))
        else:
            negative.update(literal_variables(lit))
    return negative <= positive


# ---------------------------------------------------------------------------
# Builders


def _path_atoms(start: str, word: Word, end: str, aux_prefix: str):
    """Chain of atoms spelling ``word`` from ``start`` to ``end``.

    Auxiliary variables are ``<prefix>1``, ``<prefix>2``, ... along the way;
    the empty word yields no atoms and the caller must identify the ends.
    """
    atoms: list[Literal] = []
    current = start
    for i, sym in enumerate(word):
        nxt = end if i == len(word) - 1 else f"{aux_prefix}{i + 1}"
        atoms.append(BinaryAtom(sym, current, nxt))
        current = nxt
    return atoms


def _single(comp_id: str, distinguished: str, literals: Iterable[Literal]):
    return ConjunctiveQuery((Component(comp_id, distinguished, tuple(literals)),))


def _require_symbol(inst: ThueInstance, sym: str):
    if sym not in inst.alphabet:
        raise UnknownSymbolError(f"symbol {sym!r} not in the alphabet")


def rule_divergence_query(inst: ThueInstance, k: int) -> ConjunctiveQuery:
    """Both sides of rule ``k`` walk from ``x`` to two distinct endpoints."""
    rule = inst.rule(k)
    atoms = _path_atoms("x", rule.left, "y", "u")
    atoms += _path_atoms("x", rule.right, "yp", "v")
    atoms.append(Inequality("y", "yp"))
    return _single(f"rule/{k}", "x", atoms)


def marked_target_query(inst: ThueInstance, sym: str) -> ConjunctiveQuery:
    """Some ``sym`` edge from ``x`` hits a marked vertex."""
    _require_symbol(inst, sym)
    return _single(f"sym/{sym}", "x", [BinaryAtom(sym, "x", "y"), UnaryAtom("y")])


def goal_merge_query(inst: ThueInstance) -> ConjunctiveQuery:
    """From a marked ``x``, the two goal words reach a shared endpoint."""
    atoms: list[Literal] = [UnaryAtom("x")]
    atoms += _path_atoms("x", inst.goal_left, "y", "u")
    atoms += _path_atoms("x", inst.goal_right, "y", "v")
    return _single("merge", "x", atoms)


def rule_gap_query(inst: ThueInstance, k: int, side: str) -> ConjunctiveQuery:
    """One side of rule ``k`` walks through while the other side's last edge
    is negated.

    ``side`` names the side whose final symbol is split off: for ``left``
    the query walks the left side short of its last symbol and the whole
    right side; for ``right`` the other way around.  A split-off prefix may
    be empty, in which case its endpoint is the distinguished variable
    itself.
    """
    rule = inst.rule(k)
    if side == "right":
        atoms = _path_atoms("x", rule.left, "y", "u")
        prefix = rule.right[:-1]
        endpoint = "yp" if prefix else "x"
        atoms += _path_atoms("x", prefix, endpoint, "v")
        atoms.append(NegatedAtom(rule.right[-1], endpoint, "y"))
        return _single(f"right/{k}", "x", atoms)
    if side == "left":
        prefix = rule.left[:-1]
        endpoint = "y" if prefix else "x"
        atoms = _path_atoms("x", prefix, endpoint, "u")
        atoms += _path_atoms("x", rule.right, "yp", "v")
        atoms.append(NegatedAtom(rule.left[-1], endpoint, "yp"))
        return _single(f"left/{k}", "x", atoms)
    raise ValueError(f"side must be 'left' or 'right', not {side!r}")


def coverage_gap_query(
    inst: ThueInstance, sym: str, inverse: bool = False
) -> ConjunctiveQuery:
    """The ``T`` range of ``x`` misses a ``sym`` successor (or predecessor)
    of one of its members."""
    _require_symbol(inst, sym)
    if inverse:
        comp_id = f"inv/{sym}"
        middle = BinaryAtom(sym, "z", "y")
    else:
        comp_id = f"sym/{sym}"
        middle = BinaryAtom(sym, "y", "z")
    return _single(
        comp_id,
        "x",
        [BinaryAtom(T_ROLE, "x", "y"), middle, NegatedAtom(T_ROLE, "x", "z")],
    )


def imperfection_union_neq(inst: ThueInstance) -> UnionQuery:
    """Disjunction of the divergence queries of every rule."""
    return UnionQuery(
        tuple(rule_divergence_query(inst, k) for k in range(1, inst.rule_count + 1))
    )


def imperfection_union_neg(inst: ThueInstance) -> UnionQuery:
    """Disjunction of both gap queries of every rule."""
    disjuncts = []
    for k in range(1, inst.rule_count + 1):
        disjuncts.append(rule_gap_query(inst, k, "left"))
        disjuncts.append(rule_gap_query(inst, k, "right"))
    return UnionQuery(tuple(disjuncts))


def positivity_union_neq(inst: ThueInstance) -> UnionQuery:
    """Imperfection disjuncts followed by the goal-merge disjunct."""
    return UnionQuery(
        imperfection_union_neq(inst).disjuncts + (goal_merge_query(inst),)
    )


def positivity_union_neg(inst: ThueInstance) -> UnionQuery:
    return UnionQuery(
        imperfection_union_neg(inst).disjuncts + (goal_merge_query(inst),)
    )


def _suffixed(q: ConjunctiveQuery) -> Component:
    """The single component of ``q`` with variables renamed apart by its id."""
    (comp,) = q.components
    suffix = comp.comp_id.replace("/", "_")

    def rename(v: str) -> str:
        return f"{v}_{suffix}"

    literals = []
    for lit in comp.literals:
        if isinstance(lit, UnaryAtom):
            literals.append(UnaryAtom(rename(lit.var)))
        elif isinstance(lit, BinaryAtom):
            literals.append(BinaryAtom(lit.rel, rename(lit.source), rename(lit.target)))
        elif isinstance(lit, Inequality):
            literals.append(Inequality(rename(lit.left), rename(lit.right)))
        else:
            literals.append(NegatedAtom(lit.rel, rename(lit.source), rename(lit.target)))
    distinguished = rename(comp.distinguished) if comp.distinguished else None
    return Component(comp.comp_id, distinguished, tuple(literals))


def combined_query_neq(inst: ThueInstance) -> ConjunctiveQuery:
    """One component per alphabet symbol, the goal merge, and one per rule,
    with all distinguished variables pairwise distinct."""
    components = [_suffixed(marked_target_query(inst, sym)) for sym in inst.alphabet]
    components.append(_suffixed(goal_merge_query(inst)))
    components += [
        _suffixed(rule_divergence_query(inst, k))
        for k in range(1, inst.rule_count + 1)
    ]
    pinned = [c.distinguished for c in components]
    cross = [
        Inequality(pinned[i], pinned[j])
        for i in range(len(pinned))
        for j in range(i + 1, len(pinned))
    ]
    return ConjunctiveQuery(tuple(components), tuple(cross))


def combined_query_neg(inst: ThueInstance, negate_t: bool = False) -> ConjunctiveQuery:
    """Coverage gaps both ways, the goal merge and both gap queries per rule,
    with every alphabet edge between distinguished variables negated.

    ``negate_t`` additionally negates ``T`` between distinguished variables;
    the compiled artifacts leave it off by default.
    """
    components = [_suffixed(coverage_gap_query(inst, sym)) for sym in inst.alphabet]
    components += [
        _suffixed(coverage_gap_query(inst, sym, inverse=True))
        for sym in inst.alphabet
    ]
    components.append(_suffixed(goal_merge_query(inst)))
    for k in range(1, inst.rule_count + 1):
        components.append(_suffixed(rule_gap_query(inst, k, "left")))
        components.append(_suffixed(rule_gap_query(inst, k, "right")))
    pinned = [c.distinguished for c in components]
    roles = list(inst.alphabet) + ([T_ROLE] if negate_t else [])
    cross = [
        NegatedAtom(sym, pinned[i], pinned[j])
        for i in range(len(pinned))
        for j in range(len(pinned))
        if i != j
        for sym in roles
    ]
    return ConjunctiveQuery(tuple(components), tuple(cross))


# ---------------------------------------------------------------------------
# Evaluation


def _structure_index(D: Structure):
    out: dict[str, dict[int, frozenset[int]]] = {}
    inn: dict[str, dict[int, frozenset[int]]] = {}
    pairs: dict[str, frozenset[tuple[int, int]]] = {}
    for sym, facts in D.binary.items():
        pairs[sym] = facts
        o: dict[int, set[int]] = {}
        i: dict[int, set[int]] = {}
        for s, t in facts:
            o.setdefault(s, set()).add(t)
            i.setdefault(t, set()).add(s)
        out[sym] = {k: frozenset(v) for k, v in o.items()}
        inn[sym] = {k: frozenset(v) for k, v in i.items()}
    return out, inn, pairs


_EMPTY: frozenset[int] = frozenset()


def evaluate(D: Structure, q: ConjunctiveQuery) -> Assignment | None:
    """First satisfying assignment, or None.

    Positive literals drive a backtracking search with forward checking;
    the most constrained variable (smallest remaining domain) is bound
    first, inequalities prune domains eagerly and negated atoms prune the
    moment one endpoint is bound.  Deterministic: domains are explored in
    ascending vertex order and ties in the variable order break by first
    mention.
    """
    if not is_safe(q):
        raise UnsafeQueryError("query uses a variable only under negation")
    variables = q.variables
    if not variables:
        return {}
    literals = q.literals
    out, inn, pairs = _structure_index(D)
    all_vertices = list(D.vertices)

    by_var: dict[str, list[Literal]] = {v: [] for v in variables}
    for lit in literals:
        if isinstance(lit, Inequality) and lit.left == lit.right:
            return None
        for v in set(literal_variables(lit)):
            by_var[v].append(lit)

    domains: dict[str, list[int]] = {}
    for v in variables:
        dom = all_vertices
        for lit in by_var[v]:
            if isinstance(lit, UnaryAtom):
                dom = [d for d in dom if d in D.unary_a]
            elif isinstance(lit, BinaryAtom):
                rel_pairs = pairs.get(lit.rel, _EMPTY)
                if lit.source == v and lit.target == v:
                    dom = [d for d in dom if (d, d) in rel_pairs]
                elif lit.source == v:
                    sources = out.get(lit.rel, {})
                    dom = [d for d in dom if d in sources]
                else:
                    targets = inn.get(lit.rel, {})
                    dom = [d for d in dom if d in targets]
        if not dom:
            return None
        domains[v] = list(dom)

    order_rank = {v: i for i, v in enumerate(variables)}

    def propagate(var: str, value: int, bound: Assignment, doms: dict[str, list[int]]):
        """None if inconsistent, else the updated domain map."""
        updated = doms
        for lit in by_var[var]:
            if isinstance(lit, UnaryAtom):
                if value not in D.unary_a:
                    return None
                continue
            if isinstance(lit, Inequality):
                other = lit.right if lit.left == var else lit.left
                if other in bound:
                    if bound[other] == value:
                        return None
                elif other != var:
                    if updated is doms:
                        updated = dict(doms)
                    updated[other] = [d for d in updated[other] if d != value]
                    if not updated[other]:
                        return None
                continue
            rel_pairs = pairs.get(lit.rel, _EMPTY)
            if lit.source == lit.target:
                holds = (value, value) in rel_pairs
                if isinstance(lit, BinaryAtom) != holds:
                    return None
                continue
            forward = lit.source == var
            other = lit.target if forward else lit.source
            if other in bound:
                fact = (value, bound[other]) if forward else (bound[other], value)
                if isinstance(lit, BinaryAtom) != (fact in rel_pairs):
                    return None
                continue
            reach = (out if forward else inn).get(lit.rel, {}).get(value, _EMPTY)
            if updated is doms:
                updated = dict(doms)
            if isinstance(lit, BinaryAtom):
                updated[other] = [d for d in updated[other] if d in reach]
            else:
                updated[other] = [d for d in updated[other] if d not in reach]
            if not updated[other]:
                return None
        return updated

    def search(bound: Assignment, doms: dict[str, list[int]]) -> Assignment | None:
        if len(bound) == len(variables):
            return dict(bound)
        var = min(
            (v for v in variables if v not in bound),
            key=lambda v: (len(doms[v]), order_rank[v]),
        )
        for value in doms[var]:
            bound[var] = value
            narrowed = propagate(var, value, bound, doms)
            if narrowed is not None:
                found = search(bound, narrowed)
                if found is not None:
                    return found
            del bound[var]
        return None

    return search({}, domains)


def evaluate_union(D: Structure, u: UnionQuery) -> tuple[int, Assignment] | None:
    """Index and witness of the first satisfied disjunct, or None."""
    for i, q in enumerate(u.disjuncts):
        found = evaluate(D, q)
        if found is not None:
            return i, found
    return None


def failed_literals(D: Structure, q: ConjunctiveQuery, assignment: Assignment):
    """Literals the assignment does not satisfy; empty means it checks out."""
    failures = []
    for lit in q.literals:
        if isinstance(lit, UnaryAtom):
            ok = assignment[lit.var] in D.unary_a
        elif isinstance(lit, Inequality):
            ok = assignment[lit.left] != assignment[lit.right]
        else:
            fact = (assignment[lit.source], assignment[lit.target])
            holds = fact in D.binary.get(lit.rel, _EMPTY)
            ok = holds if isinstance(lit, BinaryAtom) else not holds
        if not ok:
            failures.append(lit)
    return failures


# ---------------------------------------------------------------------------
# .cq text format


def _format_literal(lit: Literal) -> str:
    if isinstance(lit, UnaryAtom):
        return f"{A_PRED}({lit.var})"
    if isinstance(lit, BinaryAtom):
        return f"{lit.rel}({lit.source},{lit.target})"
    if isinstance(lit, Inequality):
        return f"{lit.left} != {lit.right}"
    return f"!{lit.rel}({lit.source},{lit.target})"


def write_query(q: ConjunctiveQuery) -> str:
    lines = []
    for comp in q.components:
        header = f"component {comp.comp_id}"
        if comp.distinguished is not None:
            header += f" distinguished {comp.distinguished}"
        lines.append(header)
        lines.extend(_format_literal(lit) for lit in comp.literals)
    if q.cross:
        lines.append("cross")
        lines.extend(_format_literal(lit) for lit in q.cross)
    return "\n".join(lines) + "\n"


def write_union(u: UnionQuery) -> str:
    return "--- disjunct\n".join(write_query(q) for q in u.disjuncts)


_ATOM_RE = re.compile(r"(!?)([A-Za-z0-9_]+)\(([A-Za-z0-9_]+)(?:,([A-Za-z0-9_]+))?\)\Z")
_NEQ_RE = re.compile(r"([A-Za-z0-9_]+)\s*!=\s*([A-Za-z0-9_]+)\Z")


def _parse_literal(text: str, lineno: int) -> Literal:
    m = _NEQ_RE.match(text)
    if m:
        return Inequality(m.group(1), m.group(2))
    m = _ATOM_RE.match(text)
    if not m:
        raise InputSyntaxError(f"unrecognized literal {text!r}", lineno)
    negated, rel, first, second = m.group(1) == "!", m.group(2), m.group(3), m.group(4)
    if second is None:
        if rel != A_PRED:
            raise InputSyntaxError(f"unknown unary relation {rel!r}", lineno)
        if negated:
            raise InputSyntaxError("negation applies to binary atoms only", lineno)
        return UnaryAtom(first)
    if negated:
        return NegatedAtom(rel, first, second)
    return BinaryAtom(rel, first, second)


def parse_query(text: str) -> ConjunctiveQuery:
    components: list[Component] = []
    current: tuple[str, str | None, list[Literal]] | None = None
    cross: list[Literal] | None = None

    def flush():
        nonlocal current
        if current is not None:
            components.append(Component(current[0], current[1], tuple(current[2])))
            current = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("component "):
            if cross is not None:
                raise InputSyntaxError("components must precede cross literals", lineno)
            flush()
            parts = stripped.split()
            if len(parts) == 2:
                current = (parts[1], None, [])
            elif len(parts) == 4 and parts[2] == "distinguished":
                current = (parts[1], parts[3], [])
            else:
                raise InputSyntaxError("malformed component header", lineno)
            continue
        if stripped == "cross":
            flush()
            cross = []
            continue
        lit = _parse_literal(stripped, lineno)
        if cross is not None:
            cross.append(lit)
        elif current is not None:
            current[2].append(lit)
        else:
            raise InputSyntaxError("literal outside any component", lineno)
    flush()
    if not components:
        raise InputSyntaxError("query has no components")
    return ConjunctiveQuery(tuple(components), tuple(cross or ()))


def parse_union(text: str) -> UnionQuery:
    blocks = text.split("--- disjunct")
    return UnionQuery(tuple(parse_query(block) for block in blocks))


def parse_query_file(text: str) -> ConjunctiveQuery | UnionQuery:
    """Parse .cq text as a union when disjunct separators occur."""
    if "--- disjunct" in text:
        return parse_union(text)
    return parse_query(text)
