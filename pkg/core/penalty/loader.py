"""Penalty selection strings and the penalty registry."""
import logging
import re
from typing import Callable, List, Pattern, Tuple

from core.errors import InvalidInput
from core.penalty.base import PenaltyFunction
from core.penalty.power import PowerPenalty

logger = logging.getLogger(__name__)

PenaltyFactory = Callable[[re.Match], PenaltyFunction]

_FLOAT = r"[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?"

# Registry of (pattern, factory); first full match wins
_PENALTY_REGISTRY: List[Tuple[Pattern[str], PenaltyFactory]] = [
    (re.compile(r"p2|mse"), lambda m: PowerPenalty.mse()),
    (re.compile(r"mae"), lambda m: PowerPenalty.pseudo_mae()),
    (re.compile(rf"p1\+eps:({_FLOAT})"), lambda m: PowerPenalty(1.0 + float(m.group(1)))),
    (re.compile(rf"p({_FLOAT})"), lambda m: PowerPenalty(float(m.group(1)))),
]


def register_penalty(pattern: str, factory: PenaltyFactory) -> None:
    """Register a penalty family under a selection pattern.

    Args:
        pattern: Regular expression that must match the whole selection string
        factory: Builds the penalty from the match object
    """
    _PENALTY_REGISTRY.insert(0, (re.compile(pattern), factory))
    logger.debug(f"Registered penalty pattern {pattern!r}")


def parse_penalty(spec: str) -> PenaltyFunction:
    """Turn a selection string such as ``p2`` or ``p1+eps:0.0001`` into a penalty.

    Raises:
        InvalidInput: If no registered family matches
    """
    text = (spec or "").strip().lower()
    for pattern, factory in _PENALTY_REGISTRY:
        match = pattern.fullmatch(text)
        if match:
            return factory(match)
    raise InvalidInput(f"Unknown penalty {spec!r}; use 'p2' or 'p1+eps:<eps>'")
