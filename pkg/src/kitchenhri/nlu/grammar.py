"""Deterministic slot-filling grammar over the kitchen vocabulary.

The parser is total: any string yields a Command, with ``other`` as the
sink for everything the vocabulary cannot ground. Slot extraction scans
tokens, so adjective order never matters.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from ..world import Color, Location, ObjectQuery, ObjectType, Size
from .types import Command, CommandKind, DialogueContext, SymbolicState

_TYPES = {t.value: t for t in ObjectType}
_COLORS = {c.value: c for c in Color}
_SIZES = {s.value: s for s in Size}
_STORAGE = {"countertop": Location.COUNTERTOP, "dishwasher": Location.DISHWASHER,
            "cabinet": Location.CABINET}
_PLACEMENT = {"table": Location.TABLE, "counter": Location.COUNTER}

_ARTICLES = {"a", "an", "the", "my", "some"}
_FUNCTION_WORDS = _ARTICLES | {
    "please", "me", "you", "i", "we", "it", "to", "for", "of", "on", "in", "from",
    "and", "with", "that", "this", "would", "could", "can", "will", "like", "want",
    "need", "bring", "get", "fetch", "give", "hand", "grab", "take", "put", "place",
    "set", "prepare", "make", "up", "instead", "rather", "then", "now", "is", "at",
    "do", "be", "eat", "have", "one", "robot", "stop",
}


def _tokens(text: str) -> list[str]:
    return [t for t in re.split(r"[^a-z0-9]+", text.lower()) if t]


@dataclass
class ParseInfo:
    """Parser diagnostics used only for response wording."""

    unknown_nouns: list[str] = field(default_factory=list)


def _extract_query(tokens: list[str], with_location: bool = True) -> ObjectQuery:
    type_ = next((_TYPES[t] for t in tokens if t in _TYPES), None)
    color = next((_COLORS[t] for t in tokens if t in _COLORS), None)
    size = next((_SIZES[t] for t in tokens if t in _SIZES), None)
    source = None
    if with_location:
        source = next((_STORAGE[t] for t in tokens if t in _STORAGE), None)
    return ObjectQuery(type=type_, color=color, size=size, source_location=source)


def _placement(tokens: list[str]) -> Optional[Location]:
    return next((_PLACEMENT[t] for t in tokens if t in _PLACEMENT), None)


def _oov_nouns(tokens: list[str]) -> list[str]:
    """Tokens in noun position (after an article) that ground to nothing."""
    out = []
    vocab = _TYPES.keys() | _COLORS.keys() | _SIZES.keys() | _STORAGE.keys() | _PLACEMENT.keys()
    for prev, tok in zip(tokens, tokens[1:]):
        if prev in _ARTICLES and tok not in vocab and tok not in _FUNCTION_WORDS:
            out.append(tok)
    return out


def parse_with_info(text: str, ctx: Optional[DialogueContext] = None) -> tuple[Command, ParseInfo]:
    tokens = _tokens(text)
    info = ParseInfo(unknown_nouns=_oov_nouns(tokens))
    if not tokens:
        return Command(kind=CommandKind.OTHER.value), info

    if "stop" in tokens:
        return Command(kind=CommandKind.STOP.value), info

    if "instead" in tokens:
        split = tokens.index("instead")
        left, right = tokens[:split], tokens[split + 1:]
        if right and right[0] == "of":
            right = right[1:]
        add = _extract_query(left)
        delete = _extract_query(right, with_location=False)
        if add.type is None and _placement(left) is not None:
            # "put it on the counter instead (of the table)": a relocation
            return Command(kind=CommandKind.CHANGE_LOCATION.value,
                           destination=_placement(left)), info
        if delete.is_empty() and ctx is not None and ctx.last_add is not None:
            delete = ObjectQuery(type=ctx.last_add.type, color=ctx.last_add.color,
                                 size=ctx.last_add.size)
        if add.is_empty():
            return Command(kind=CommandKind.OTHER.value), info
        return Command(
            kind=CommandKind.REPLACE_OBJECT.value,
            add=add,
            delete=None if delete.is_empty() else delete,
        ), info

    if "breakfast" in tokens:
        return Command(kind=CommandKind.SETTING_BREAKFAST.value), info

    add = _extract_query(tokens)
    destination = _placement(tokens)
    if add.type is not None:
        return Command(kind=CommandKind.BRING_ME.value, add=add, destination=destination), info
    if destination is not None:
        return Command(kind=CommandKind.CHANGE_LOCATION.value, destination=destination), info
    return Command(kind=CommandKind.OTHER.value), info


def parse(text: str, ctx: Optional[DialogueContext] = None) -> Command:
    """Map an utterance to a Command; unrecognized input becomes ``other``."""
    return parse_with_info(text, ctx)[0]


class GrammarBackend:
    """Default offline dialogue-bridge backend."""

    name = "grammar"

    def extract(self, text: str, state: SymbolicState, ctx: DialogueContext) -> Command:
        return parse(text, ctx)
