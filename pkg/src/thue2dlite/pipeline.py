"""Wiring between the core modules: compilation and countermodel search.

Nothing here decides the word problem.  A positive answer is only ever
reported with a replayable rewrite path, a negative one only with a
verified finite countermodel; anything else stays "unknown" with the
exhausted bound named.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import queries
from .config import Config
from .errors import NotClosedAtBoundError
from .ontology import Ontology, ModelCheckFlags, check_model, reduction_ontology
from .rewriting import Equivalent, ThueInstance, Verdict, decide_equivalence
from .semigroups import SemigroupWitness, find_separating_semigroup
from .structures import (
    ROOT_CONSTANT,
    Signature,
    Structure,
    canonical_structure,
    disjoint_union,
    slot,
    walk,
)

VARIANTS = ("neq", "neg")


@dataclass(frozen=True)
class CompiledReduction:
    variant: str
    ontology: Ontology
    query: queries.ConjunctiveQuery
    manifest: dict


def compile_reduction(
    inst: ThueInstance, variant: str, *, negate_t: bool = False
) -> CompiledReduction:
    """Ontology, combined query and a manifest of the derived quantities."""
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, not {variant!r}")
    ontology = reduction_ontology(inst, variant)
    if variant == "neq":
        query = queries.combined_query_neq(inst)
    else:
        query = queries.combined_query_neg(inst, negate_t=negate_t)
    manifest = {
        "variant": variant,
        "alphabet": list(inst.alphabet),
        "rule_count": inst.rule_count,
        "alphabet_size": inst.alphabet_size,
        "slot_count": inst.slot_count(variant),
        "components": [c.comp_id for c in query.components],
        "constants": list(ontology.constants),
        "negate_t": negate_t,
    }
    return CompiledReduction(variant, ontology, query, manifest)


def rewrite_goal(inst: ThueInstance, cfg: Config) -> Verdict:
    """Bounded equivalence search between the two goal words."""
    return decide_equivalence(
        inst.goal_left,
        inst.goal_right,
        inst.rules,
        cfg.word_len_for(inst),
        cfg.max_expansions,
    )


@dataclass(frozen=True)
class Certificate:
    """Evidence that the goal words are inequivalent.

    ``kind`` is ``semigroup`` or ``quotient``; ``structure`` is the finite
    canonical structure the certificate induces.
    """

    kind: str
    structure: Structure
    witness: SemigroupWitness | None = None


def certified_canonical(inst: ThueInstance, cfg: Config) -> Structure | None:
    """The bounded-quotient canonical structure, or None if not certified."""
    try:
        return canonical_structure(
            inst,
            max_len=cfg.word_len_for(inst),
            word_budget=cfg.quotient_word_budget,
        )
    except NotClosedAtBoundError:
        return None


def negativity_certificate(inst: ThueInstance, cfg: Config) -> Certificate | None:
    """Search for a semigroup witness, then fall back to a finite quotient
    whose root walks separate the goal words."""
    witness = find_separating_semigroup(inst, cfg.max_semigroup_order)
    if witness is not None:
        return Certificate("semigroup", canonical_structure(inst, witness=witness), witness)
    quotient = certified_canonical(inst, cfg)
    if quotient is not None:
        root = quotient.constants[ROOT_CONSTANT]
        if walk(quotient, root, inst.goal_left) != walk(quotient, root, inst.goal_right):
            return Certificate("quotient", quotient)
    return None


def instance_polarity(inst: ThueInstance, cfg: Config) -> tuple[str, object]:
    """("positive", path) | ("negative", certificate) | ("unknown", verdict)."""
    verdict = rewrite_goal(inst, cfg)
    if isinstance(verdict, Equivalent):
        return "positive", verdict.path
    certificate = negativity_certificate(inst, cfg)
    if certificate is not None:
        return "negative", certificate
    return "unknown", verdict


def assemble_countermodel(inst: ThueInstance, variant: str, canonical: Structure) -> Structure:
    """Disjoint union of the canonical structure with the variant's slots."""
    sig = Signature.from_instance(inst)
    parts = [canonical]
    parts.extend(slot(n, sig) for n in range(1, inst.slot_count(variant) + 1))
    return disjoint_union(parts)


@dataclass(frozen=True)
class CountermodelResult:
    found: bool
    reason: str
    structure: Structure | None = None
    certificate: Certificate | None = None
    report: dict | None = None


def find_countermodel(inst: ThueInstance, variant: str, cfg: Config) -> CountermodelResult:
    """Certificate search plus full verification of the assembled model.

    On success the result's structure models the compiled ontology under
    unique names and the partially closed world, and the compiled combined
    query has no satisfying assignment in it; both facts are checked here,
    not assumed.  The report records, per query component, whether that
    component alone embeds anywhere in the model.
    """
    compiled = compile_reduction(inst, variant, negate_t=cfg.phi_negate_t)
    certificate = negativity_certificate(inst, cfg)
    if certificate is None:
        return CountermodelResult(
            False,
            "no separating semigroup up to order "
            f"{cfg.max_semigroup_order} and no certified finite quotient",
        )
    model = assemble_countermodel(inst, variant, certificate.structure)

    model_report = check_model(
        model, compiled.ontology, ModelCheckFlags(una=True, pcwa=True)
    )
    if not model_report.ok:
        return CountermodelResult(
            False,
            "assembled structure failed the ontology check: "
            + model_report.violations[0].message,
            certificate=certificate,
        )

    witness_assignment = queries.evaluate(model, compiled.query)
    if witness_assignment is not None:
        return CountermodelResult(
            False,
            "assembled structure unexpectedly satisfies the combined query",
            certificate=certificate,
        )

    component_status = {}
    for comp in compiled.query.components:
        alone = queries.ConjunctiveQuery((comp,))
        component_status[comp.comp_id] = (
            "embeddable" if queries.evaluate(model, alone) is not None else "refuted"
        )
    report = {
        "variant": variant,
        "certificate": certificate.kind,
        "vertices": model.vertex_count,
        "slot_count": inst.slot_count(variant),
        "component_status": component_status,
        "refutation": "no assignment satisfies the combined query; components "
        "exceed the slots available under the pairwise constraints",
    }
    return CountermodelResult(True, "countermodel found and verified", model, certificate, report)
