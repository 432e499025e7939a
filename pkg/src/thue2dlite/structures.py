"""Finite relational structures over an alphabet signature.

The signature of an instance has one binary relation per alphabet symbol,
one unary relation ``A`` and one extra binary relation ``T``.  This module
provides the structure type, the small gadget builders (slots, the saturated
single vertex), candidate and perfection checks, the two finite canonical
constructions (bounded congruence quotient and semigroup completion), an
exhaustive small-structure enumerator, and the .struct text format.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, NamedTuple, Sequence

from .errors import (
    CeilingExceededError,
    DuplicateConstantError,
    InputSyntaxError,
    MissingConstantError,
    NotClosedAtBoundError,
)
from .rewriting import RESERVED_SYMBOLS, ThueInstance, Word
from .semigroups import SemigroupWitness

A_PRED = "A"
T_ROLE = "T"

ROOT_CONSTANT = "a"

# Hard cap on the exhaustive enumeration: total free fact bits per structure.
_ENUM_BITS_LIMIT = 24
DEFAULT_ENUM_CEILING = 4

_TOKEN_RE = re.compile(r"[A-Za-z0-9_]+\Z")


@dataclass(frozen=True)
class Signature:
    """Sorted alphabet of binary symbols; ``A`` and ``T`` are implicit."""

    alphabet: tuple[str, ...]

    def __post_init__(self):
        if not self.alphabet:
            raise ValueError("signature alphabet must be nonempty")
        if list(self.alphabet) != sorted(set(self.alphabet)):
            raise ValueError("signature alphabet must be sorted and duplicate-free")
        for sym in self.alphabet:
            if sym in RESERVED_SYMBOLS:
                raise ValueError(f"symbol {sym!r} is reserved")
            if not _TOKEN_RE.match(sym):
                raise ValueError(f"invalid symbol token {sym!r}")

    @classmethod
    def from_instance(cls, inst: ThueInstance) -> "Signature":
        return cls(inst.alphabet)

    @property
    def binary_symbols(self) -> tuple[str, ...]:
        return self.alphabet + (T_ROLE,)


class Structure(NamedTuple):
    """Immutable finite structure.

    ``binary`` has one entry per binary symbol of the signature (including
    ``T``); use :func:`make_structure` to build validated instances.  A
    NamedTuple rather than a dataclass: exhaustive scans create millions of
    these and construction cost is what bounds them.
    """

    signature: Signature
    vertices: tuple[int, ...]
    unary_a: frozenset[int]
    binary: Mapping[str, frozenset[tuple[int, int]]]
    constants: Mapping[str, int]

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)


def make_structure(
    signature: Signature,
    vertices: Iterable[int],
    unary_a: Iterable[int] = (),
    binary: Mapping[str, Iterable[tuple[int, int]]] | None = None,
    constants: Mapping[str, int] | None = None,
) -> Structure:
    """Build a structure, normalizing and validating every fact."""
    verts = tuple(sorted(set(vertices)))
    vset = set(verts)
    unary = frozenset(unary_a)
    if not unary <= vset:
        raise ValueError("unary facts reference unknown vertices")
    binary = binary or {}
    table: dict[str, frozenset[tuple[int, int]]] = {}
    for sym in signature.binary_symbols:
        pairs = frozenset(binary.get(sym, ()))
        for s, t in pairs:
            if s not in vset or t not in vset:
                raise ValueError(f"{sym} fact references unknown vertex")
        table[sym] = pairs
    for sym in binary:
        if sym not in table:
            raise ValueError(f"symbol {sym!r} outside the signature")
    consts = dict(constants or {})
    for name, v in consts.items():
        if v not in vset:
            raise ValueError(f"constant {name!r} maps to unknown vertex")
    return Structure(signature, verts, unary, table, consts)


def slot(n: int, sig: Signature) -> Structure:
    """The two-vertex slot gadget with constants ``b<n>`` and ``c<n>``.

    Vertex 0 carries the mark and every symbol loops on it, points to vertex
    1 and loops on vertex 1.  ``T`` holds only as the two self-loops; the
    absence of ``T`` across the two vertices is essential and preserved.
    """
    if n < 1:
        raise ValueError("slot index must be >= 1")
    binary: dict[str, set[tuple[int, int]]] = {T_ROLE: {(0, 0), (1, 1)}}
    for sym in sig.alphabet:
        binary[sym] = {(0, 0), (0, 1), (1, 1)}
    return make_structure(
        sig,
        (0, 1),
        unary_a=(0,),
        binary=binary,
        constants={f"b{n}": 0, f"c{n}": 1},
    )


def saturated_singleton(
    sig: Signature, constant_names: Sequence[str] = (ROOT_CONSTANT,)
) -> Structure:
    """One vertex on which every atomic fact holds; all constants share it."""
    binary = {sym: {(0, 0)} for sym in sig.binary_symbols}
    return make_structure(
        sig, (0,), unary_a=(0,), binary=binary, constants={n: 0 for n in constant_names}
    )


def disjoint_union(parts: Sequence[Structure]) -> Structure:
    """Relabel the parts apart and merge facts and constants.

    All parts must share a signature and interpret pairwise distinct
    constant names.  The union of no parts is rejected only for lacking a
    signature; pass at least one part.
    """
    if not parts:
        raise ValueError("disjoint_union needs at least one part")
    sig = parts[0].signature
    if any(p.signature != sig for p in parts):
        raise ValueError("disjoint_union parts must share a signature")
    vertices: list[int] = []
    unary: set[int] = set()
    binary: dict[str, set[tuple[int, int]]] = {s: set() for s in sig.binary_symbols}
    constants: dict[str, int] = {}
    offset = 0
    for part in parts:
        relabel = {v: offset + i for i, v in enumerate(part.vertices)}
        vertices.extend(relabel.values())
        unary.update(relabel[v] for v in part.unary_a)
        for sym, pairs in part.binary.items():
            binary[sym].update((relabel[s], relabel[t]) for s, t in pairs)
        for name, v in part.constants.items():
            if name in constants:
                raise DuplicateConstantError(f"constant {name!r} used twice")
            constants[name] = relabel[v]
        offset += part.vertex_count
    return make_structure(sig, vertices, unary, binary, constants)


def _out_adjacency(D: Structure) -> dict[str, dict[int, list[int]]]:
    adj: dict[str, dict[int, list[int]]] = {}
    for sym in D.signature.alphabet:
        table: dict[int, list[int]] = {}
        for s, t in sorted(D.binary.get(sym, ())):
            table.setdefault(s, []).append(t)
        adj[sym] = table
    return adj


def walk(D: Structure, start: int, word: Word) -> frozenset[int]:
    """Endpoints of all paths from ``start`` spelling ``word``; {start} for the empty word."""
    if start not in set(D.vertices):
        raise ValueError(f"vertex {start} not in the structure")
    frontier = {start}
    for sym in word:
        pairs = D.binary.get(sym, frozenset())
        frontier = {t for s, t in pairs if s in frontier}
        if not frontier:
            break
    return frozenset(frontier)


def reachable_from(D: Structure, start: int) -> frozenset[int]:
    """Vertices reachable from ``start`` along alphabet edges, ``start`` included."""
    adj = _out_adjacency(D)
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for sym in D.signature.alphabet:
            for t in adj[sym].get(v, ()):
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
    return frozenset(seen)


class CandidateViolation(NamedTuple):
    """One failed candidate condition.

    ``kind`` is one of ``root-mark`` (the root vertex is not marked),
    ``root-loop`` (no ``T`` self-loop at the root), ``marked-successor`` (a
    marked vertex lacks an outgoing edge for ``symbol``) and
    ``target-successor`` (an edge target lacks an outgoing edge for
    ``symbol``).
    """

    kind: str
    vertex: int
    symbol: str | None = None


class CandidateReport(NamedTuple):
    violations: tuple[CandidateViolation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


_CANDIDATE_OK = CandidateReport(())


def is_candidate(D: Structure) -> CandidateReport:
    """Check the three closure conditions every slot-and-quotient model obeys.

    The root constant must be marked and ``T``-looped; every marked vertex
    and every edge target must have an outgoing edge for every alphabet
    symbol.
    """
    constants = D.constants
    root = constants.get(ROOT_CONSTANT)
    if root is None:
        raise MissingConstantError(f"constant {ROOT_CONSTANT!r} is not interpreted")
    unary = D.unary_a
    binary = D.binary
    alphabet = D.signature.alphabet
    sources: list[set[int]] = []
    targets: set[int] = set()
    for sym in alphabet:
        src: set[int] = set()
        pairs = binary.get(sym)
        if pairs:
            for s, t in pairs:
                src.add(s)
                targets.add(t)
        sources.append(src)
    tpairs = binary.get(T_ROLE)
    # Cheap all-pass test first; the corpus scans call this millions of
    # times and most calls pass or fail wholesale.
    if root in unary and tpairs is not None and (root, root) in tpairs:
        for src in sources:
            if not (unary <= src and targets <= src):
                break
        else:
            return _CANDIDATE_OK
    violations = []
    if root not in unary:
        violations.append(CandidateViolation("root-mark", root))
    if tpairs is None or (root, root) not in tpairs:
        violations.append(CandidateViolation("root-loop", root))
    for sym, src in zip(alphabet, sources):
        for v in D.vertices:
            if v in unary and v not in src:
                violations.append(CandidateViolation("marked-successor", v, sym))
        for v in D.vertices:
            if v in targets and v not in src:
                violations.append(CandidateViolation("target-successor", v, sym))
    return CandidateReport(tuple(violations))


@dataclass(frozen=True)
class Imperfection:
    """Witness that one rule's walk endpoints differ somewhere reachable.

    ``side`` names the side whose endpoint set has the extra vertex.
    """

    vertex: int
    rule: int
    side: str


@dataclass(frozen=True)
class PerfectionReport:
    reachable_count: int
    imperfection: Imperfection | None

    @property
    def perfect(self) -> bool:
        return self.imperfection is None


def is_perfect(D: Structure, inst: ThueInstance) -> PerfectionReport:
    """From every vertex reachable from the root, both sides of every rule
    must reach exactly the same endpoint set.

    The root itself counts as reachable (via the empty word).
    """
    root = D.constants.get(ROOT_CONSTANT)
    if root is None:
        raise MissingConstantError(f"constant {ROOT_CONSTANT!r} is not interpreted")
    reach = reachable_from(D, root)
    for v in sorted(reach):
        for k in range(1, inst.rule_count + 1):
            rule = inst.rule(k)
            left_ends = walk(D, v, rule.left)
            right_ends = walk(D, v, rule.right)
            if left_ends != right_ends:
                side = "left" if left_ends - right_ends else "right"
                return PerfectionReport(len(reach), Imperfection(v, k, side))
    return PerfectionReport(len(reach), None)


# ---------------------------------------------------------------------------
# Finite canonical structures


def canonical_structure(
    inst: ThueInstance,
    *,
    max_len: int | None = None,
    witness: SemigroupWitness | None = None,
    word_budget: int = 200_000,
) -> Structure:
    """A finite structure whose walks from the root track word equivalence.

    Exactly one source must be given.  With ``max_len`` the structure is the
    bounded congruence quotient, certified closed at that bound (otherwise
    :class:`NotClosedAtBoundError` is raised).  With ``witness`` the vertices
    are the semigroup elements plus a fresh identity.

    Either way the output is a candidate structure, it is perfect, the mark
    holds exactly at the root, ``T`` runs from the root to every vertex, and
    the root's walks along the two goal words coincide exactly when the
    certificate says the goal words are equivalent.
    """
    if (max_len is None) == (witness is None):
        raise ValueError("give exactly one of max_len and witness")
    if witness is not None:
        return _semigroup_structure(inst, witness)
    assert max_len is not None
    return _quotient_structure(inst, max_len, word_budget)


def _semigroup_structure(inst: ThueInstance, witness: SemigroupWitness) -> Structure:
    # Vertex 0 is a fresh identity, never a product, so no edge enters it.
    sig = Signature.from_instance(inst)
    n = witness.order
    vertices = range(n + 1)
    binary: dict[str, set[tuple[int, int]]] = {}
    for sym in sig.alphabet:
        gen = witness.generator_map[sym]
        edges = {(0, gen + 1)}
        for s in range(n):
            edges.add((s + 1, witness.table[s][gen] + 1))
        binary[sym] = edges
    binary[T_ROLE] = {(0, v) for v in vertices}
    return make_structure(
        sig, vertices, unary_a=(0,), binary=binary, constants={ROOT_CONSTANT: 0}
    )


def _quotient_structure(inst: ThueInstance, max_len: int, word_budget: int) -> Structure:
    classes, transitions = _certified_quotient(inst, max_len, word_budget)
    sig = Signature.from_instance(inst)
    vertices = range(len(classes))
    binary: dict[str, set[tuple[int, int]]] = {sym: set() for sym in sig.alphabet}
    for cls_id, row in enumerate(transitions):
        for sym, target in zip(sig.alphabet, row):
            binary[sym].add((cls_id, target))
    binary[T_ROLE] = {(0, v) for v in vertices}
    return make_structure(
        sig, vertices, unary_a=(0,), binary=binary, constants={ROOT_CONSTANT: 0}
    )


def _certified_quotient(
    inst: ThueInstance, max_len: int, word_budget: int
) -> tuple[list[Word], list[tuple[int, ...]]]:
    """Word classes at the bound plus a certified transition table.

    Words up to ``max_len`` are merged along single rewrite steps whose both
    ends fit the bound.  The result is accepted only if every class has a
    representative strictly shorter than the bound, one-symbol extensions of
    a class land in a single class, and following the transitions along the
    two sides of every rule from every class agrees.  Those checks make the
    output structure perfect, which is what every downstream use relies on;
    failing any of them raises :class:`NotClosedAtBoundError`.
    """
    if max_len < 0:
        raise ValueError("max_len must be >= 0")
    words: list[Word] = [()]
    layer: list[Word] = [()]
    for _ in range(max_len):
        layer = [w + (s,) for w in layer for s in inst.alphabet]
        words.extend(layer)
        if len(words) > word_budget:
            raise NotClosedAtBoundError(
                max_len, f"more than {word_budget} words below the bound"
            )
    index = {w: i for i, w in enumerate(words)}

    parent = list(range(len(words)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x: int, y: int):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)

    for i, w in enumerate(words):
        for rule in inst.rules:
            src, dst = rule.left, rule.right
            if len(w) - len(src) + len(dst) > max_len:
                continue
            for pos in range(len(w) - len(src) + 1):
                if w[pos : pos + len(src)] == src:
                    union(i, index[w[:pos] + dst + w[pos + len(src) :]])

    members: dict[int, list[int]] = {}
    for i in range(len(words)):
        members.setdefault(find(i), []).append(i)
    # Roots keep the minimal member index, so sorting roots orders classes by
    # shortlex-least representative; the empty word is always class 0.
    roots = sorted(members)
    class_of_root = {root: cid for cid, root in enumerate(roots)}
    reps = [words[root] for root in roots]

    transitions: list[tuple[int, ...]] = []
    for cid, root in enumerate(roots):
        rep = reps[cid]
        if len(rep) >= max_len:
            raise NotClosedAtBoundError(
                max_len,
                f"class of {''.join(rep) or 'the empty word'} has no short representative",
            )
        row = []
        for sym in inst.alphabet:
            targets = {
                class_of_root[find(index[words[i] + (sym,)])]
                for i in members[root]
                if len(words[i]) < max_len
            }
            if len(targets) != 1:
                raise NotClosedAtBoundError(
                    max_len,
                    f"extensions of a class by {sym!r} split across classes",
                )
            row.append(targets.pop())
        transitions.append(tuple(row))

    sym_index = {sym: i for i, sym in enumerate(inst.alphabet)}

    def follow(cid: int, word: Word) -> int:
        for sym in word:
            cid = transitions[cid][sym_index[sym]]
        return cid

    for cid in range(len(roots)):
        for rule in inst.rules:
            if follow(cid, rule.left) != follow(cid, rule.right):
                raise NotClosedAtBoundError(
                    max_len, "a rewrite pair disagrees on the transition table"
                )
    return reps, transitions


# ---------------------------------------------------------------------------
# Exhaustive enumeration of small structures


@lru_cache(maxsize=None)
def _vertex_sets(nv: int) -> tuple[frozenset[int], ...]:
    return tuple(
        frozenset(v for v in range(nv) if mask >> v & 1) for mask in range(1 << nv)
    )


@lru_cache(maxsize=None)
def _pair_sets(nv: int) -> tuple[frozenset[tuple[int, int]], ...]:
    pairs = [(s, t) for s in range(nv) for t in range(nv)]
    return tuple(
        frozenset(p for i, p in enumerate(pairs) if mask >> i & 1)
        for mask in range(1 << (nv * nv))
    )


def structure_space_size(sig: Signature, nv: int) -> int:
    """How many labeled structures on exactly ``nv`` vertices exist.

    Also the guard against hopeless requests: raises
    :class:`CeilingExceededError` when the space needs more free fact bits
    than the hard ceiling.
    """
    syms = sig.binary_symbols
    bits = nv + len(syms) * nv * nv
    if bits > _ENUM_BITS_LIMIT:
        raise CeilingExceededError(
            f"{nv} vertices over {len(syms)} binary symbols needs {bits} free "
            f"fact bits; the ceiling is {_ENUM_BITS_LIMIT}"
        )
    return 1 << bits


def enumerate_structures_block(sig: Signature, nv: int, start: int, stop: int):
    """Structures number ``start`` to ``stop`` (exclusive) on ``nv`` vertices.

    Structure number ``i`` decodes ``i`` in mixed radix: the mark set is the
    most significant digit, then one fact mask per binary symbol (alphabet
    order, then ``T``).  Blocks make the enumeration restartable and let
    scans fan out over index ranges without changing the overall order.
    """
    total = structure_space_size(sig, nv)
    if not 0 <= start <= stop <= total:
        raise ValueError(f"block [{start}, {stop}) outside [0, {total})")
    syms = sig.binary_symbols
    vsets = _vertex_sets(nv)
    psets = _pair_sets(nv)
    vertices = tuple(range(nv))
    constants = {ROOT_CONSTANT: 0}
    pair_bits = nv * nv
    pair_mask = (1 << pair_bits) - 1
    # The most significant digits (mark set plus all masks but the last)
    # change rarely; decode them per outer step and run the fastest digit
    # as a plain range so the hot loop is one index lookup per structure.
    outer_start, inner_start = divmod(start, pair_mask + 1)
    outer_stop, inner_stop = divmod(stop, pair_mask + 1)
    for outer in range(outer_start, outer_stop + (1 if inner_stop else 0)):
        rest = outer
        masks = []
        for _ in range(len(syms) - 1):
            masks.append(rest & pair_mask)
            rest >>= pair_bits
        masks.reverse()
        unary = vsets[rest]
        head = {sym: psets[mask] for sym, mask in zip(syms, masks)}
        last_sym = syms[-1]
        lo = inner_start if outer == outer_start else 0
        hi = inner_stop if outer == outer_stop else pair_mask + 1
        for mask in range(lo, hi):
            binary = head.copy()
            binary[last_sym] = psets[mask]
            yield Structure(sig, vertices, unary, binary, constants)


def enumerate_all_structures(sig: Signature, max_vertices: int):
    """Every labeled structure with 1..max_vertices vertices, root at vertex 0.

    Deterministic order: vertex count, then block index as documented in
    :func:`enumerate_structures_block`.
    """
    for nv in range(1, max_vertices + 1):
        yield from enumerate_structures_block(sig, nv, 0, structure_space_size(sig, nv))


def enumerate_candidate_structures(
    sig: Signature, max_vertices: int, *, ceiling: int = DEFAULT_ENUM_CEILING
):
    """The candidate structures among :func:`enumerate_all_structures`."""
    if max_vertices > ceiling:
        raise CeilingExceededError(
            f"max_vertices {max_vertices} above the configured ceiling {ceiling}"
        )
    for D in enumerate_all_structures(sig, max_vertices):
        if is_candidate(D).ok:
            yield D


# ---------------------------------------------------------------------------
# .struct text format


def write_struct(D: Structure) -> str:
    """Canonical .struct text: sorted lines, alphabet recorded in a header."""
    lines = [f"# alphabet: {' '.join(D.signature.alphabet)}"]
    for v in D.vertices:
        lines.append(f"vertex {v}")
    for name in sorted(D.constants):
        lines.append(f"const {name} = {D.constants[name]}")
    for v in sorted(D.unary_a):
        lines.append(f"{A_PRED}({v})")
    for sym in sorted(D.binary):
        for s, t in sorted(D.binary[sym]):
            lines.append(f"{sym}({s},{t})")
    return "\n".join(lines) + "\n"


_STRUCT_FACT_RE = re.compile(r"([A-Za-z0-9_]+)\((\d+)(?:,(\d+))?\)\Z")


def parse_struct(text: str) -> Structure:
    """Parse .struct text; the alphabet header is optional but recommended.

    Without the header the alphabet is inferred from the binary symbols that
    actually occur (``T`` excluded), which loses symbols with no facts.
    """
    alphabet_hint: list[str] | None = None
    vertices: set[int] = set()
    constants: dict[str, int] = {}
    unary: set[int] = set()
    binary: dict[str, set[tuple[int, int]]] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if stripped.startswith("#"):
            body = stripped.lstrip("#").strip()
            if body.startswith("alphabet:"):
                alphabet_hint = body[len("alphabet:") :].split()
            continue
        stripped = stripped.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("vertex "):
            try:
                vertices.add(int(stripped[len("vertex ") :]))
            except ValueError:
                raise InputSyntaxError("malformed vertex line", lineno) from None
            continue
        if stripped.startswith("const "):
            m = re.match(r"const\s+([A-Za-z0-9_]+)\s*=\s*(\d+)\Z", stripped)
            if not m:
                raise InputSyntaxError("malformed const line", lineno)
            constants[m.group(1)] = int(m.group(2))
            continue
        m = _STRUCT_FACT_RE.match(stripped)
        if not m:
            raise InputSyntaxError(f"unrecognized line {stripped!r}", lineno)
        name, first, second = m.group(1), int(m.group(2)), m.group(3)
        if second is None:
            if name != A_PRED:
                raise InputSyntaxError(f"unknown unary relation {name!r}", lineno)
            unary.add(first)
        else:
            binary.setdefault(name, set()).add((first, int(second)))

    if alphabet_hint is not None:
        alphabet = sorted(alphabet_hint)
    else:
        alphabet = sorted(sym for sym in binary if sym != T_ROLE)
    if not alphabet:
        raise InputSyntaxError(
            "no alphabet header and no binary facts to infer one from"
        )
    sig = Signature(tuple(alphabet))
    try:
        return make_structure(sig, vertices, unary, binary, constants)
    except ValueError as exc:
        raise InputSyntaxError(str(exc)) from None
