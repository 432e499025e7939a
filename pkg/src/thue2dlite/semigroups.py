"""Finite-semigroup certificates for negative word-problem instances.

A witness is a finite multiplication table plus a generator assignment under
which every rewrite pair evaluates to the same element while the two goal
words evaluate differently.  Since word equivalence is preserved by every
homomorphism into a semigroup that validates the rewrite pairs, such a table
proves the goal words inequivalent, and it doubles as a finite countermodel
seed.

The search enumerates tables exhaustively in lexicographic cell order with
associativity checked on partially filled tables.  No isomorphism pruning is
attempted: at the orders this tool targets (four and below) full enumeration
is cheap, and it keeps the "first witness found" result trivially canonical.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Mapping

from .rewriting import ThueInstance, Word


@dataclass(frozen=True)
class SemigroupWitness:
    """Multiplication table over ``range(order)`` plus a generator map."""

    order: int
    table: tuple[tuple[int, ...], ...]
    generator_map: Mapping[str, int]


def evaluate_word(word: Word, witness: SemigroupWitness) -> int:
    """Image of a nonempty word under the homomorphism extending the map."""
    if not word:
        raise ValueError("cannot evaluate the empty word in a semigroup")
    gen = witness.generator_map
    table = witness.table
    value = gen[word[0]]
    for sym in word[1:]:
        value = table[value][gen[sym]]
    return value


def table_is_associative(table: tuple[tuple[int, ...], ...]) -> bool:
    n = len(table)
    rng = range(n)
    return all(
        table[table[x][y]][z] == table[x][table[y][z]]
        for x in rng
        for y in rng
        for z in rng
    )


def witness_problems(inst: ThueInstance, witness: SemigroupWitness) -> list[str]:
    """Every way the witness fails its invariants; empty means valid."""
    problems = []
    n = witness.order
    if n < 1:
        return ["order must be positive"]
    if len(witness.table) != n or any(len(row) != n for row in witness.table):
        return [f"table is not {n}x{n}"]
    if any(not 0 <= v < n for row in witness.table for v in row):
        problems.append("table entry out of range")
    if not table_is_associative(witness.table):
        problems.append("table is not associative")
    for sym in inst.alphabet:
        if sym not in witness.generator_map:
            problems.append(f"generator map misses symbol {sym!r}")
    if problems:
        return problems
    for k in range(1, inst.rule_count + 1):
        rule = inst.rule(k)
        if evaluate_word(rule.left, witness) != evaluate_word(rule.right, witness):
            problems.append(f"rule {k} sides evaluate differently")
    if evaluate_word(inst.goal_left, witness) == evaluate_word(
        inst.goal_right, witness
    ):
        problems.append("goal words evaluate equally")
    return problems


def _partial_consistent(table: list[list[int | None]], n: int) -> bool:
    # A triple can only be judged once all four cells it touches are filled;
    # a conflict on filled cells can never be repaired later, so pruning on
    # it keeps the enumeration complete.
    for x in range(n):
        row_x = table[x]
        for y in range(n):
            p = row_x[y]
            row_y = table[y]
            for z in range(n):
                q = row_y[z]
                if p is not None:
                    left = table[p][z]
                else:
                    left = None
                if q is not None:
                    right = row_x[q]
                else:
                    right = None
                if left is not None and right is not None and left != right:
                    return False
    return True


def _witness_for_table(
    inst: ThueInstance, order: int, table: tuple[tuple[int, ...], ...]
) -> SemigroupWitness | None:
    for values in product(range(order), repeat=inst.alphabet_size):
        candidate = SemigroupWitness(
            order, table, dict(zip(inst.alphabet, values))
        )
        ok = all(
            evaluate_word(rule.left, candidate) == evaluate_word(rule.right, candidate)
            for rule in inst.rules
        )
        if ok and evaluate_word(inst.goal_left, candidate) != evaluate_word(
            inst.goal_right, candidate
        ):
            return candidate
    return None


def find_separating_semigroup(
    inst: ThueInstance, max_order: int
) -> SemigroupWitness | None:
    """Smallest-order, lexicographically least witness up to ``max_order``.

    Returns None when no table of order <= ``max_order`` admits a generator
    assignment that validates every rewrite pair yet separates the goal
    words; the enumeration is exhaustive, so None is a definite answer for
    the searched orders.
    """
    for order in range(1, max_order + 1):
        found = _search_order(inst, order)
        if found is not None:
            return found
    return None


def _search_order(inst: ThueInstance, order: int) -> SemigroupWitness | None:
    cells = [(i, j) for i in range(order) for j in range(order)]
    table: list[list[int | None]] = [[None] * order for _ in range(order)]

    def descend(idx: int) -> SemigroupWitness | None:
        if idx == len(cells):
            frozen = tuple(tuple(row) for row in table)  # type: ignore[arg-type]
            return _witness_for_table(inst, order, frozen)
        i, j = cells[idx]
        for value in range(order):
            table[i][j] = value
            if _partial_consistent(table, order):
                found = descend(idx + 1)
                if found is not None:
                    return found
        table[i][j] = None
        return None

    return descend(0)
