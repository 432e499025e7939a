"""Run configuration: every bound the tool uses, with documented defaults.

There is no randomness anywhere in the package, so a configuration pins the
behavior completely.  A JSON file named by the ``THUE2DLITE_CONFIG``
environment variable overrides the defaults; command-line flags override
both.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields

from .rewriting import ThueInstance

CONFIG_ENV_VAR = "THUE2DLITE_CONFIG"


@dataclass
class Config:
    # Bidirectional search: word-length cap (None means goal-derived) and
    # total expansion budget.
    max_word_len: int | None = None
    max_expansions: int = 1_000_000
    # Semigroup witness search.
    max_semigroup_order: int = 3
    # Bounded quotient certification.
    quotient_word_budget: int = 200_000
    # Chase rounds.
    chase_depth: int = 3
    # Exhaustive structure enumeration.
    enum_max_vertices: int = 3
    enum_ceiling: int = 4
    # Model-checking regimes and the optional extra negated role in the
    # combined negation query.
    una: bool = True
    pcwa: bool = True
    phi_negate_t: bool = False

    def __post_init__(self):
        for name in (
            "max_expansions",
            "max_semigroup_order",
            "quotient_word_budget",
            "chase_depth",
            "enum_max_vertices",
            "enum_ceiling",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.max_word_len is not None and self.max_word_len < 0:
            raise ValueError("max_word_len must be non-negative")

    def word_len_for(self, inst: ThueInstance) -> int:
        """Explicit cap, or the goal-derived default."""
        if self.max_word_len is not None:
            return max(
                self.max_word_len, len(inst.goal_left), len(inst.goal_right)
            )
        return default_word_len(inst)

    def as_dict(self) -> dict:
        return asdict(self)


def default_word_len(inst: ThueInstance) -> int:
    """Default cap: combined goal length plus eight symbols of slack."""
    return len(inst.goal_left) + len(inst.goal_right) + 8


def load_config(environ=None) -> Config:
    """Defaults, overridden by the JSON file named in the environment."""
    environ = os.environ if environ is None else environ
    path = environ.get(CONFIG_ENV_VAR)
    if not path:
        return Config()
    with open(path, encoding="utf-8") as handle:
        data = json.load(handle)
    known = {f.name for f in fields(Config)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return Config(**data)
