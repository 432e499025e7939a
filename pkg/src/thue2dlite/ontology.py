"""Lightweight description-logic ontologies and their model checker.

An ontology is a list of constants plus ground assertions, concept
inclusions between basic concepts (an atomic concept or an unqualified
existential restriction, possibly inverse) and optional disjointness
axioms.  The model checker verifies a finite structure against an ontology
under two switchable regimes: unique names (distinct constants denote
distinct vertices) and a partially closed world (no facts among
constant-denoted vertices beyond the asserted ones).

The compilers here produce the two reduction ontologies: the core ontology
whose models are exactly the candidate structures, and its extension by
slot assertions, one block per slot gadget.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple

from .errors import InputSyntaxError, MissingConstantError
from .rewriting import ThueInstance
from .structures import (
    A_PRED,
    ROOT_CONSTANT,
    Signature,
    Structure,
    T_ROLE,
    make_structure,
)


@dataclass(frozen=True)
class Atomic:
    name: str


@dataclass(frozen=True)
class Exists:
    role: str
    inverse: bool = False


BasicConcept = Atomic | Exists


@dataclass(frozen=True)
class ConceptAssertion:
    concept: str
    constant: str


@dataclass(frozen=True)
class RoleAssertion:
    role: str
    subject: str
    target: str


@dataclass(frozen=True)
class Inclusion:
    lhs: BasicConcept
    rhs: BasicConcept


@dataclass(frozen=True)
class Disjointness:
    """lhs is included in the complement of rhs.

    The reduction never emits these; the checker supports them so the
    ontology model stays a complete small description-logic core.
    """

    lhs: BasicConcept
    rhs: BasicConcept


Axiom = ConceptAssertion | RoleAssertion | Inclusion | Disjointness


def _concept_key(c: BasicConcept) -> tuple:
    if isinstance(c, Atomic):
        return (0, c.name, "")
    return (1, c.role, "inv" if c.inverse else "")


def _axiom_key(ax: Axiom) -> tuple:
    if isinstance(ax, ConceptAssertion):
        return (0, ax.concept, ax.constant, (), ())
    if isinstance(ax, RoleAssertion):
        return (1, ax.role, ax.subject, ax.target, ())
    if isinstance(ax, Inclusion):
        return (2, "", "", _concept_key(ax.lhs), _concept_key(ax.rhs))
    return (3, "", "", _concept_key(ax.lhs), _concept_key(ax.rhs))


@dataclass(frozen=True)
class Ontology:
    """Canonical form: constants and axioms sorted, duplicates dropped."""

    constants: tuple[str, ...]
    axioms: tuple[Axiom, ...]

    # cached_property writes straight into __dict__, which works on frozen
    # dataclasses; ontologies are checked against millions of structures, so
    # the per-kind views must not be rebuilt per call.
    @cached_property
    def assertion_axioms(self) -> tuple[ConceptAssertion | RoleAssertion, ...]:
        return tuple(
            a for a in self.axioms if isinstance(a, (ConceptAssertion, RoleAssertion))
        )

    @cached_property
    def inclusion_axioms(self) -> tuple[Inclusion, ...]:
        return tuple(a for a in self.axioms if isinstance(a, Inclusion))

    @cached_property
    def disjointness_axioms(self) -> tuple[Disjointness, ...]:
        return tuple(a for a in self.axioms if isinstance(a, Disjointness))

    @cached_property
    def concept_roles(self) -> tuple[str, ...]:
        """Roles whose endpoint sets the concept axioms inspect."""
        roles = []
        for ax in self.inclusion_axioms + self.disjointness_axioms:
            for concept in (ax.lhs, ax.rhs):
                if isinstance(concept, Exists) and concept.role not in roles:
                    roles.append(concept.role)
        return tuple(roles)


def make_ontology(constants: Iterable[str], axioms: Iterable[Axiom]) -> Ontology:
    consts = tuple(sorted(set(constants)))
    known = set(consts)
    unique = sorted(set(axioms), key=_axiom_key)
    for ax in unique:
        if isinstance(ax, ConceptAssertion) and ax.constant not in known:
            raise ValueError(f"assertion uses undeclared constant {ax.constant!r}")
        if isinstance(ax, RoleAssertion):
            for c in (ax.subject, ax.target):
                if c not in known:
                    raise ValueError(f"assertion uses undeclared constant {c!r}")
    return Ontology(consts, tuple(unique))


# ---------------------------------------------------------------------------
# Compilers


def candidate_ontology(inst: ThueInstance) -> Ontology:
    """Root assertions plus the successor inclusions.

    A structure models this ontology exactly when it is a candidate
    structure: marked vertices and edge targets have outgoing edges for
    every alphabet symbol, and the root is marked and ``T``-looped.
    """
    axioms: list[Axiom] = [
        ConceptAssertion(A_PRED, ROOT_CONSTANT),
        RoleAssertion(T_ROLE, ROOT_CONSTANT, ROOT_CONSTANT),
    ]
    for sym in inst.alphabet:
        axioms.append(Inclusion(Atomic(A_PRED), Exists(sym)))
    for source_sym in inst.alphabet:
        for target_sym in inst.alphabet:
            axioms.append(
                Inclusion(Exists(source_sym, inverse=True), Exists(target_sym))
            )
    return make_ontology((ROOT_CONSTANT,), axioms)


def slot_axioms(n: int, sig: Signature) -> tuple[Axiom, ...]:
    """Assertions forcing slot ``n`` into every model: the marked ``b<n>``,
    two ``T`` self-loops, and the three edges per alphabet symbol."""
    if n < 1:
        raise ValueError("slot index must be >= 1")
    b, c = f"b{n}", f"c{n}"
    axioms: list[Axiom] = [
        ConceptAssertion(A_PRED, b),
        RoleAssertion(T_ROLE, b, b),
        RoleAssertion(T_ROLE, c, c),
    ]
    for sym in sig.alphabet:
        axioms.append(RoleAssertion(sym, b, b))
        axioms.append(RoleAssertion(sym, b, c))
        axioms.append(RoleAssertion(sym, c, c))
    return tuple(axioms)


def slot_axioms_upto(count: int, sig: Signature) -> tuple[Axiom, ...]:
    out: list[Axiom] = []
    for n in range(1, count + 1):
        out.extend(slot_axioms(n, sig))
    return tuple(out)


def slot_constants(count: int) -> tuple[str, ...]:
    out = []
    for n in range(1, count + 1):
        out.extend((f"b{n}", f"c{n}"))
    return tuple(out)


def reduction_ontology(inst: ThueInstance, variant: str) -> Ontology:
    """Candidate ontology extended by as many slot blocks as the variant needs."""
    sig = Signature.from_instance(inst)
    count = inst.slot_count(variant)
    core = candidate_ontology(inst)
    return make_ontology(
        core.constants + slot_constants(count),
        core.axioms + slot_axioms_upto(count, sig),
    )


# ---------------------------------------------------------------------------
# Model checking


@dataclass(frozen=True)
class ModelCheckFlags:
    una: bool = True
    pcwa: bool = True


class ModelViolation(NamedTuple):
    """One failed axiom or regime, with the offending vertex or fact.

    The payload stays structured; the human-readable message is rendered on
    demand because exhaustive scans discard almost every report unread.
    """

    kind: str  # assertion | una | inclusion | disjointness | pcwa
    subject: object
    detail: object

    @property
    def message(self) -> str:
        if self.kind == "assertion":
            ax = self.subject
            if isinstance(ax, ConceptAssertion):
                return f"{ax.concept}({ax.constant}) fails at vertex {self.detail}"
            return f"{ax.role}({ax.subject},{ax.target}) fails at {self.detail}"
        if self.kind == "una":
            names = ", ".join(sorted(self.subject))
            return f"constants {names} share vertex {self.detail}"
        if self.kind == "inclusion":
            ax = self.subject
            return (
                f"vertex {self.detail} is in {_concept_text(ax.lhs)} "
                f"but not in {_concept_text(ax.rhs)}"
            )
        if self.kind == "disjointness":
            ax = self.subject
            return (
                f"vertex {self.detail} is in both {_concept_text(ax.lhs)} "
                f"and {_concept_text(ax.rhs)}"
            )
        return f"unasserted fact {self.subject} among constants"


class ModelCheckReport(NamedTuple):
    violations: tuple[ModelViolation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


_MODEL_OK = ModelCheckReport(())


def _extension(D: Structure, concept: BasicConcept) -> frozenset[int]:
    if isinstance(concept, Atomic):
        # The signature has a single atomic concept; anything else is empty.
        return D.unary_a if concept.name == A_PRED else frozenset()
    pairs = D.binary.get(concept.role, frozenset())
    if concept.inverse:
        return frozenset(t for _, t in pairs)
    return frozenset(s for s, _ in pairs)


def _concept_text(c: BasicConcept) -> str:
    if isinstance(c, Atomic):
        return c.name
    return f"ex {c.role}-" if c.inverse else f"ex {c.role}"


def check_model(D: Structure, O: Ontology, flags: ModelCheckFlags) -> ModelCheckReport:
    """Verify assertions, inclusions, disjointness and the two regimes.

    Under ``pcwa`` every structure fact whose vertices are all interpretations
    of constants must be asserted; facts touching an anonymous vertex are
    always allowed.
    """
    constants = D.constants
    unary = D.unary_a
    binary = D.binary
    empty: frozenset = frozenset()
    for name in O.constants:
        if name not in constants:
            raise MissingConstantError(f"constant {name!r} is not interpreted")

    violations: list[ModelViolation] = []

    for ax in O.assertion_axioms:
        if type(ax) is ConceptAssertion:
            vertex = constants[ax.constant]
            holds = vertex in unary if ax.concept == A_PRED else False
            if not holds:
                violations.append(ModelViolation("assertion", ax, vertex))
        else:
            fact = (constants[ax.subject], constants[ax.target])
            if fact not in binary.get(ax.role, empty):
                violations.append(ModelViolation("assertion", ax, fact))

    if flags.una:
        by_vertex: dict[int, list[str]] = {}
        for name in O.constants:
            by_vertex.setdefault(constants[name], []).append(name)
        for vertex, names in sorted(by_vertex.items()):
            if len(names) > 1:
                violations.append(ModelViolation("una", tuple(names), vertex))

    # One endpoint pass per role mentioned in the concept axioms; the corpus
    # scans run this loop millions of times, so no helper-call indirection.
    ext_cache: dict[str, tuple[set[int], set[int]]] = {}
    for role in O.concept_roles:
        sources: set[int] = set()
        targets: set[int] = set()
        pairs = binary.get(role)
        if pairs:
            for s, t in pairs:
                sources.add(s)
                targets.add(t)
        ext_cache[role] = (sources, targets)

    def extension(concept):
        if type(concept) is Atomic:
            return unary if concept.name == A_PRED else empty
        pair = ext_cache[concept.role]
        return pair[1] if concept.inverse else pair[0]

    for ax in O.inclusion_axioms:
        lhs = extension(ax.lhs)
        rhs = extension(ax.rhs)
        if lhs <= rhs:
            continue
        for vertex in sorted(lhs - rhs):
            violations.append(ModelViolation("inclusion", ax, vertex))

    for ax in O.disjointness_axioms:
        overlap = extension(ax.lhs) & extension(ax.rhs)
        for vertex in sorted(overlap):
            violations.append(ModelViolation("disjointness", ax, vertex))

    if flags.pcwa:
        named = {constants[name] for name in O.constants}
        asserted_unary = {
            constants[ax.constant]
            for ax in O.assertion_axioms
            if isinstance(ax, ConceptAssertion) and ax.concept == A_PRED
        }
        asserted_binary = {
            (ax.role, constants[ax.subject], constants[ax.target])
            for ax in O.assertion_axioms
            if isinstance(ax, RoleAssertion)
        }
        for vertex in sorted(D.unary_a):
            if vertex in named and vertex not in asserted_unary:
                violations.append(
                    ModelViolation("pcwa", f"{A_PRED}({vertex})", vertex)
                )
        for sym in sorted(D.binary):
            for s, t in sorted(D.binary[sym]):
                if s in named and t in named and (sym, s, t) not in asserted_binary:
                    violations.append(
                        ModelViolation("pcwa", f"{sym}({s},{t})", (s, t))
                    )

    if not violations:
        return _MODEL_OK
    return ModelCheckReport(tuple(violations))


# ---------------------------------------------------------------------------
# Bounded chase


@dataclass(frozen=True)
class ChaseResult:
    structure: Structure
    fixpoint: bool
    rounds: int


def _ontology_signature(O: Ontology) -> Signature:
    roles: set[str] = set()
    for ax in O.axioms:
        if isinstance(ax, RoleAssertion):
            roles.add(ax.role)
        elif isinstance(ax, (Inclusion, Disjointness)):
            for c in (ax.lhs, ax.rhs):
                if isinstance(c, Exists):
                    roles.add(c.role)
    roles.discard(T_ROLE)
    if not roles:
        raise ValueError("cannot infer a signature: the ontology mentions no role")
    return Signature(tuple(sorted(roles)))


def chase(O: Ontology, depth: int, sig: Signature | None = None) -> ChaseResult:
    """Saturate the assertions under the inclusions, breadth-first.

    Starts from one vertex per constant.  Each round collects every vertex
    violating an inclusion against the start-of-round structure, then adds
    one fresh witness per violated (vertex, inclusion) pair; an atomic
    right-hand side just adds the mark.  Runs at most ``depth`` rounds and
    reports whether a fixpoint was reached.  Never adds a fact between two
    constant vertices beyond the assertions.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if sig is None:
        sig = _ontology_signature(O)

    vertex_of = {name: i for i, name in enumerate(O.constants)}
    vertices = list(range(len(O.constants)))
    unary: set[int] = set()
    binary: dict[str, set[tuple[int, int]]] = {s: set() for s in sig.binary_symbols}
    for ax in O.assertion_axioms:
        if isinstance(ax, ConceptAssertion):
            if ax.concept != A_PRED:
                raise ValueError(f"cannot chase atomic concept {ax.concept!r}")
            unary.add(vertex_of[ax.constant])
        else:
            binary[ax.role].add((vertex_of[ax.subject], vertex_of[ax.target]))

    inclusions = O.inclusion_axioms

    def violations() -> list[tuple[int, Inclusion]]:
        snapshot = make_structure(sig, vertices, unary, binary, {})
        out = []
        for incl in inclusions:
            for vertex in sorted(_extension(snapshot, incl.lhs) - _extension(snapshot, incl.rhs)):
                out.append((vertex, incl))
        return out

    rounds = 0
    for _ in range(depth):
        pending = violations()
        if not pending:
            break
        rounds += 1
        for vertex, incl in pending:
            rhs = incl.rhs
            if isinstance(rhs, Atomic):
                if rhs.name != A_PRED:
                    raise ValueError(f"cannot chase atomic concept {rhs.name!r}")
                unary.add(vertex)
            else:
                fresh = len(vertices)
                vertices.append(fresh)
                if rhs.inverse:
                    binary[rhs.role].add((fresh, vertex))
                else:
                    binary[rhs.role].add((vertex, fresh))

    structure = make_structure(sig, vertices, unary, binary, dict(vertex_of))
    return ChaseResult(structure, fixpoint=not violations(), rounds=rounds)


# ---------------------------------------------------------------------------
# .onto text format


def _format_concept(c: BasicConcept) -> str:
    return _concept_text(c)


def write_ontology(O: Ontology) -> str:
    lines = ["const " + " ".join(O.constants)] if O.constants else []
    for ax in O.axioms:
        if isinstance(ax, ConceptAssertion):
            lines.append(f"assert {ax.concept}({ax.constant})")
        elif isinstance(ax, RoleAssertion):
            lines.append(f"assert {ax.role}({ax.subject},{ax.target})")
        elif isinstance(ax, Inclusion):
            lines.append(
                f"incl {_format_concept(ax.lhs)} [= {_format_concept(ax.rhs)}"
            )
        else:
            lines.append(
                f"disj {_format_concept(ax.lhs)} [= not {_format_concept(ax.rhs)}"
            )
    return "\n".join(lines) + "\n"


_ASSERT_RE = re.compile(
    r"assert\s+([A-Za-z0-9_]+)\(([A-Za-z0-9_]+)(?:,([A-Za-z0-9_]+))?\)\Z"
)


def _parse_concept(text: str, lineno: int) -> BasicConcept:
    text = text.strip()
    if text.startswith("ex "):
        role = text[3:].strip()
        if role.endswith("-"):
            return Exists(role[:-1], inverse=True)
        return Exists(role)
    if re.match(r"[A-Za-z0-9_]+\Z", text):
        return Atomic(text)
    raise InputSyntaxError(f"unrecognized concept {text!r}", lineno)


def parse_ontology(text: str) -> Ontology:
    constants: list[str] = []
    axioms: list[Axiom] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("const "):
            constants.extend(stripped[len("const ") :].split())
            continue
        if stripped.startswith("assert "):
            m = _ASSERT_RE.match(stripped)
            if not m:
                raise InputSyntaxError("malformed assertion", lineno)
            name, first, second = m.group(1), m.group(2), m.group(3)
            if second is None:
                axioms.append(ConceptAssertion(name, first))
            else:
                axioms.append(RoleAssertion(name, first, second))
            continue
        if stripped.startswith("incl "):
            parts = stripped[len("incl ") :].split("[=")
            if len(parts) != 2:
                raise InputSyntaxError("malformed inclusion", lineno)
            axioms.append(
                Inclusion(
                    _parse_concept(parts[0], lineno), _parse_concept(parts[1], lineno)
                )
            )
            continue
        if stripped.startswith("disj "):
            parts = stripped[len("disj ") :].split("[=")
            if len(parts) != 2 or not parts[1].strip().startswith("not "):
                raise InputSyntaxError("malformed disjointness axiom", lineno)
            rhs_text = parts[1].strip()[len("not ") :]
            axioms.append(
                Disjointness(
                    _parse_concept(parts[0], lineno), _parse_concept(rhs_text, lineno)
                )
            )
            continue
        raise InputSyntaxError(f"unrecognized line {stripped!r}", lineno)
    try:
        return make_ontology(constants, axioms)
    except ValueError as exc:
        raise InputSyntaxError(str(exc)) from None
