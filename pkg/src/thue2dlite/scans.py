"""Exhaustive property scans over small-structure corpora.

Each scan walks every labeled structure up to a vertex bound (root pinned
to vertex zero) and checks one property pairing two independent routes, for
example the structural candidate conditions against the ontology model
check.  Scans are embarrassingly parallel; ``workers`` splits the
enumeration into deterministic index ranges, and reports are aggregated in
a fixed order so the outcome never depends on scheduling.
"""

from __future__ import annotations

import multiprocessing
from dataclasses import dataclass

from . import oracle, queries
from .ontology import ModelCheckFlags, candidate_ontology, check_model
from .rewriting import ThueInstance
from .structures import (
    Signature,
    Structure,
    enumerate_structures_block,
    is_candidate,
    is_perfect,
    structure_space_size,
    write_struct,
)


@dataclass(frozen=True)
class ScanReport:
    check: str
    total: int
    candidates: int
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


SCAN_NAMES = (
    "candidate-ontology-agreement",
    "imperfect-implies-divergence",
    "imperfect-implies-gap",
)


def _ranges(total: int, parts: int):
    step = (total + parts - 1) // parts
    return [(lo, min(lo + step, total)) for lo in range(0, total, step)]


def _agreement_chunk(args) -> tuple[int, int, list[str]]:
    alphabet, nv, lo, hi = args
    sig = Signature(alphabet)
    ontology = candidate_ontology_for(alphabet)
    flags = ModelCheckFlags(una=False, pcwa=False)
    total = candidates = 0
    bad: list[str] = []
    for D in enumerate_structures_block(sig, nv, lo, hi):
        total += 1
        structural = not is_candidate(D).violations
        semantic = not check_model(D, ontology, flags).violations
        if structural:
            candidates += 1
        if structural != semantic:
            bad.append(
                f"candidate={structural} but model={semantic} for\n{write_struct(D)}"
            )
    return total, candidates, bad


def candidate_ontology_for(alphabet: tuple[str, ...]):
    """Core ontology for a bare alphabet (no rules or goal involved)."""
    dummy = ThueInstance(alphabet, (), (alphabet[0],), (alphabet[0],))
    return candidate_ontology(dummy)


def scan_candidate_ontology_agreement(
    sig: Signature, max_vertices: int, workers: int = 1
) -> ScanReport:
    """Structural candidate check against the ontology model check, on every
    structure of the corpus.  Zero violations means the two routes agree."""
    jobs = []
    for nv in range(1, max_vertices + 1):
        total = structure_space_size(sig, nv)
        parts = max(1, min(workers * 4, total))
        for lo, hi in _ranges(total, parts):
            jobs.append((sig.alphabet, nv, lo, hi))
    results = _run_jobs(_agreement_chunk, jobs, workers)
    total = sum(r[0] for r in results)
    candidates = sum(r[1] for r in results)
    violations = tuple(v for r in results for v in r[2])
    return ScanReport("candidate-ontology-agreement", total, candidates, violations)


def _imperfection_chunk(args) -> tuple[int, int, list[str]]:
    inst, variant, nv, lo, hi = args
    sig = Signature.from_instance(inst)
    unions = []
    if variant in ("neq", "both"):
        unions.append(("divergence", queries.imperfection_union_neq(inst)))
    if variant in ("neg", "both"):
        unions.append(("gap", queries.imperfection_union_neg(inst)))
    total = imperfect = 0
    bad: list[str] = []
    for D in enumerate_structures_block(sig, nv, lo, hi):
        if is_candidate(D).violations:
            continue
        total += 1
        if is_perfect(D, inst).perfect:
            continue
        imperfect += 1
        for label, union in unions:
            if queries.evaluate_union(D, union) is None:
                bad.append(
                    f"imperfect candidate passes the {label} union:\n{write_struct(D)}"
                )
    return total, imperfect, bad


def scan_imperfect_detection(
    inst: ThueInstance, max_vertices: int, variant: str, workers: int = 1
) -> ScanReport:
    """Every imperfect candidate must satisfy the imperfection union of the
    given variant ("both" checks the inequality and the negation family in
    one pass over the corpus)."""
    if variant not in ("neq", "neg", "both"):
        raise ValueError(f"variant must be 'neq', 'neg' or 'both', not {variant!r}")
    sig = Signature.from_instance(inst)
    jobs = []
    for nv in range(1, max_vertices + 1):
        total = structure_space_size(sig, nv)
        parts = max(1, min(workers * 4, total))
        for lo, hi in _ranges(total, parts):
            jobs.append((inst, variant, nv, lo, hi))
    results = _run_jobs(_imperfection_chunk, jobs, workers)
    total = sum(r[0] for r in results)
    imperfect = sum(r[1] for r in results)
    violations = tuple(v for r in results for v in r[2])
    names = {
        "neq": "imperfect-implies-divergence",
        "neg": "imperfect-implies-gap",
        "both": "imperfect-implies-divergence-and-gap",
    }
    return ScanReport(names[variant], total, imperfect, violations)


def _run_jobs(worker, jobs, workers: int):
    if workers <= 1 or len(jobs) <= 1:
        return [worker(job) for job in jobs]
    with multiprocessing.Pool(workers) as pool:
        return pool.map(worker, jobs)


def run_scan(
    name: str, inst: ThueInstance, max_vertices: int, workers: int = 1
) -> ScanReport:
    sig = Signature.from_instance(inst)
    if name == "candidate-ontology-agreement":
        return scan_candidate_ontology_agreement(sig, max_vertices, workers)
    if name == "imperfect-implies-divergence":
        return scan_imperfect_detection(inst, max_vertices, "neq", workers)
    if name == "imperfect-implies-gap":
        return scan_imperfect_detection(inst, max_vertices, "neg", workers)
    raise ValueError(f"unknown check {name!r}; choose from {', '.join(SCAN_NAMES)}")
