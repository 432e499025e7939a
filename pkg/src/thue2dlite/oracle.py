"""Exhaustive-assignment oracle for query evaluation.

This is the independent second route against which the production evaluator
is compared.  Variables are bound strictly in first-mention order, every
vertex is tried for every variable, and a literal is tested at the earliest
depth at which all its variables are bound.  No variable ordering heuristic,
no domain filtering and no propagation: a branch is dropped only when a
fully bound literal is already false, which discards no satisfying total
assignment.  ``satisfiable_by_product`` does not even prune and is usable
only on tiny inputs.
"""

from __future__ import annotations

from itertools import product
from typing import Iterator

from .queries import (
    Assignment,
    BinaryAtom,
    ConjunctiveQuery,
    Inequality,
    UnaryAtom,
    UnionQuery,
    literal_variables,
)
from .structures import Structure

_EMPTY: frozenset = frozenset()


def _literal_holds(D: Structure, lit, env: Assignment) -> bool:
    if isinstance(lit, UnaryAtom):
        return env[lit.var] in D.unary_a
    if isinstance(lit, Inequality):
        return env[lit.left] != env[lit.right]
    fact = (env[lit.source], env[lit.target])
    holds = fact in D.binary.get(lit.rel, _EMPTY)
    return holds if isinstance(lit, BinaryAtom) else not holds


def assignments(D: Structure, q: ConjunctiveQuery) -> Iterator[Assignment]:
    """Every satisfying total assignment, in lexicographic vertex order."""
    variables = q.variables
    rank = {v: i for i, v in enumerate(variables)}
    check_at: list[list] = [[] for _ in variables]
    ground = []
    for lit in q.literals:
        vs = literal_variables(lit)
        if vs:
            check_at[max(rank[v] for v in vs)].append(lit)
        else:
            ground.append(lit)
    if ground:
        raise ValueError("ground literals are not supported")
    if not variables:
        yield {}
        return

    vertices = list(D.vertices)
    env: Assignment = {}

    def descend(depth: int) -> Iterator[Assignment]:
        if depth == len(variables):
            yield dict(env)
            return
        var = variables[depth]
        for vertex in vertices:
            env[var] = vertex
            if all(_literal_holds(D, lit, env) for lit in check_at[depth]):
                yield from descend(depth + 1)
        del env[var]

    yield from descend(0)


def satisfiable(D: Structure, q: ConjunctiveQuery) -> Assignment | None:
    """First satisfying assignment under the oracle's fixed order, or None."""
    return next(assignments(D, q), None)


def count_assignments(D: Structure, q: ConjunctiveQuery) -> int:
    return sum(1 for _ in assignments(D, q))


def union_satisfiable(D: Structure, u: UnionQuery) -> int | None:
    """Index of the first disjunct the oracle can satisfy, or None."""
    for i, q in enumerate(u.disjuncts):
        if satisfiable(D, q) is not None:
            return i
    return None


def satisfiable_by_product(
    D: Structure, q: ConjunctiveQuery, limit: int = 2_000_000
) -> bool:
    """Check every one of the ``|V| ** #vars`` assignments, no pruning at all."""
    variables = q.variables
    total = len(D.vertices) ** len(variables)
    if total > limit:
        raise ValueError(f"{total} assignments exceed the limit {limit}")
    literals = q.literals
    for values in product(D.vertices, repeat=len(variables)):
        env = dict(zip(variables, values))
        if all(_literal_holds(D, lit, env) for lit in literals):
            return True
    return False
