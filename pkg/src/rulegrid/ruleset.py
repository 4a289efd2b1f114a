"""Ruleset container: one goal, padded rules, padded initial objects."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .core import unpack_entity
from .errors import InvalidEncoding
from .goals import EMPTY_GOAL, decode_goal
from .rules import EMPTY_RULE, Encoding, decode_rule

# Generated benchmarks share these padded widths, chosen from the worst case
# of the shipped configs: a depth-3 full tree (14 rules) plus 4 distractor
# rules, and 16 leaf inputs plus distractor objects.
MAX_RULES = 18
MAX_INIT_OBJECTS = 18


@dataclass(frozen=True)
class Ruleset:
    """A task: goal encoding, rule encodings, and the objects placed at reset."""

    goal: Encoding = EMPTY_GOAL
    rules: tuple[Encoding, ...] = ()
    init_objects: tuple[int, ...] = ()

    @cached_property
    def active_rules(self) -> tuple[Encoding, ...]:
        """Non-empty rules, in stored order; the stepper scans only these."""
        return tuple(r for r in self.rules if r != EMPTY_RULE)

    @cached_property
    def active_objects(self) -> tuple[int, ...]:
        return tuple(o for o in self.init_objects if o)

    def canonical(self) -> bytes:
        """Padding-insensitive identity used for deduplication.

        Goal bytes, then lexicographically sorted rule encodings, then
        sorted object codes.
        """
        parts = [bytes(self.goal)]
        parts.extend(sorted(bytes(r) for r in self.active_rules))
        parts.append(bytes(sorted(self.active_objects)))
        return b"".join(parts)

    def padded(self, max_rules: int = MAX_RULES, max_objects: int = MAX_INIT_OBJECTS) -> "Ruleset":
        """Same task with rules/objects padded to fixed widths."""
        active_r, active_o = self.active_rules, self.active_objects
        if len(active_r) > max_rules:
            raise InvalidEncoding(f"{len(active_r)} rules exceed width {max_rules}")
        if len(active_o) > max_objects:
            raise InvalidEncoding(f"{len(active_o)} objects exceed width {max_objects}")
        return Ruleset(
            goal=self.goal,
            rules=active_r + (EMPTY_RULE,) * (max_rules - len(active_r)),
            init_objects=active_o + (0,) * (max_objects - len(active_o)),
        )

    def validate(self) -> "Ruleset":
        """Decode every encoding, rejecting any malformed slot."""
        decode_goal(self.goal)
        for r in self.rules:
            decode_rule(r)
        for o in self.init_objects:
            if o:
                unpack_entity(o)
        return self


EMPTY_RULESET = Ruleset()
