"""Stable on-disk encodings for repair results and candidate programs."""
from __future__ import annotations

import json
from typing import Optional

from .core import Model, NotPossible, Predicate, Relation, RepairOutcome, Repaired, UsageError


def outcome_document(model: Model, outcome: Optional[RepairOutcome], report: dict) -> dict:
    doc = {
        "states": list(model.space.labels or (model.space.label(i) for i in range(model.space.count))),
        "delta_p_prime": None,
        "invariant_prime": None,
        "report": report,
    }
    if isinstance(outcome, Repaired):
        doc["delta_p_prime"] = [list(p) for p in sorted(outcome.delta_p_prime.pairs())]
        doc["invariant_prime"] = sorted(outcome.invariant_prime.members)
    return doc


def dump_document(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def load_candidate(path: str, model: Model) -> tuple[Relation, Predicate]:
    """Read a candidate program/invariant file (same schema as the repair
    output) and validate it against the model's state space."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise UsageError(f"candidate file is not valid JSON: {exc}")
    if not isinstance(doc, dict):
        raise UsageError("candidate file must hold a JSON object")
    n = model.space.count
    states = doc.get("states")
    if states is not None and len(states) != n:
        raise UsageError(
            f"candidate file lists {len(states)} states but the model has {n}"
        )
    pairs = doc.get("delta_p_prime")
    inv = doc.get("invariant_prime")
    if pairs is None or inv is None:
        raise UsageError("candidate file needs delta_p_prime and invariant_prime")
    try:
        rel = Relation.from_pairs(model.space, [(int(i), int(j)) for i, j in pairs])
        pred = Predicate.from_ids(model.space, [int(i) for i in inv])
    except (TypeError, ValueError) as exc:
        raise UsageError(f"malformed candidate file: {exc}")
    return rel, pred
