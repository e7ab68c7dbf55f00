"""Simulated speech front-end.

Scripted or live text stands in for audio: transcripts pick up
controllable cutoff/substitution noise, and each utterance yields an
age-group estimate that is smoothed over the last five interactions
before the binary young/old split reaches the rest of the pipeline.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional


class AgeGroup(str, Enum):
    TEENS = "teens"
    TWENTIES = "twenties"
    THIRTIES = "thirties"
    FORTIES = "forties"
    FIFTIES = "fifties"
    SIXTIES = "sixties"
    SEVENTIES = "seventies"
    EIGHTIES = "eighties"
    NINETIES = "nineties"


AGE_GROUPS = list(AgeGroup)


class BinaryAge(str, Enum):
    YOUNG = "young"
    OLD = "old"


class Corruption(str, Enum):
    CLEAN = "clean"
    CUTOFF = "cutoff"
    SUBSTITUTED = "substituted"


@dataclass(frozen=True)
class Transcript:
    text: str
    confidence: float
    corruption: Corruption

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "confidence": self.confidence,
            "corruption": self.corruption.value,
        }


@dataclass
class NoiseConfig:
    """Transcript corruption model; probabilities sum to at most 1."""

    p_cutoff: float = 0.0
    p_substitute: float = 0.0
    substitution_table: dict[str, str] = field(default_factory=dict)
    clean_confidence_range: tuple[float, float] = (0.85, 1.0)
    corrupt_confidence_range: tuple[float, float] = (0.2, 0.6)

    def __post_init__(self):
        if self.p_cutoff + self.p_substitute > 1.0 + 1e-12:
            raise ValueError("p_cutoff + p_substitute must not exceed 1")


@dataclass
class AgeNoiseConfig:
    """Misclassification into one of the two adjacent age groups."""

    p_adjacent: float = 0.0


def corrupt(utterance: str, rng: random.Random, cfg: NoiseConfig) -> Transcript:
    """Produce the transcript the recognizer would have emitted.

    With p_cutoff the utterance is truncated at a word boundary (at least
    one word dropped); otherwise with p_substitute one word present in the
    substitution table is swapped. Anything else passes through clean.
    """
    if not utterance:
        raise ValueError("empty utterance")
    words = utterance.split()
    u = rng.random()
    if u < cfg.p_cutoff:
        keep = rng.randrange(0, len(words))  # strict prefix, possibly empty
        text = " ".join(words[:keep])
        return Transcript(text, _draw(rng, cfg.corrupt_confidence_range), Corruption.CUTOFF)
    if u < cfg.p_cutoff + cfg.p_substitute:
        hits = [i for i, w in enumerate(words) if _strip(w) in cfg.substitution_table]
        if hits:
            i = hits[rng.randrange(len(hits))]
            words = list(words)
            words[i] = _swap_word(words[i], cfg.substitution_table[_strip(words[i])])
            text = " ".join(words)
            return Transcript(text, _draw(rng, cfg.corrupt_confidence_range), Corruption.SUBSTITUTED)
        # nothing substitutable: fall through to a clean transcript
    return Transcript(utterance, _draw(rng, cfg.clean_confidence_range), Corruption.CLEAN)


_PUNCT = ".,!?;:'\""


def _strip(word: str) -> str:
    return word.strip(_PUNCT).lower()


def _swap_word(word: str, replacement: str) -> str:
    lead = word[: len(word) - len(word.lstrip(_PUNCT))]
    trail = word[len(word.rstrip(_PUNCT)):]
    return lead + replacement + trail


def _draw(rng: random.Random, bounds: tuple[float, float]) -> float:
    lo, hi = bounds
    return round(rng.uniform(lo, hi), 4)


def estimate_age(true_group: AgeGroup, rng: random.Random, cfg: AgeNoiseConfig) -> AgeGroup:
    """Predict the speaker's age group, drifting at most one group away."""
    if rng.random() >= cfg.p_adjacent:
        return true_group
    idx = AGE_GROUPS.index(true_group)
    neighbors = [i for i in (idx - 1, idx + 1) if 0 <= i < len(AGE_GROUPS)]
    return AGE_GROUPS[neighbors[rng.randrange(len(neighbors))]]


def to_binary(group: AgeGroup, first_old: AgeGroup = AgeGroup.FIFTIES) -> BinaryAge:
    """Binary split: groups from ``first_old`` upward count as old."""
    if AGE_GROUPS.index(group) >= AGE_GROUPS.index(first_old):
        return BinaryAge.OLD
    return BinaryAge.YOUNG


class AgeSmoother:
    """Majority vote over the last five binary estimates.

    A mean of exactly 0.5 keeps the previous output, so a single outlier
    never flips the published age mid-interaction.
    """

    WINDOW = 5

    def __init__(self):
        self.window: deque[BinaryAge] = deque(maxlen=self.WINDOW)
        self.last_output: Optional[BinaryAge] = None

    def update(self, estimate: BinaryAge) -> BinaryAge:
        self.window.append(estimate)
        mean = sum(1 for e in self.window if e == BinaryAge.OLD) / len(self.window)
        if mean > 0.5:
            out = BinaryAge.OLD
        elif mean < 0.5:
            out = BinaryAge.YOUNG
        else:
            out = self.last_output if self.last_output is not None else estimate
        self.last_output = out
        return out
