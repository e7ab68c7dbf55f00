"""Benchmark instruction generator.

The manifest declares, per template, which attribute subsets expand; the
published family totals (800 object requests, 1770 replacements, 41
breakfast variants, 2611 overall) are enforced as a hard contract.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Iterable, Optional

from ..nlu.types import Command, CommandKind
from ..world import Color, Location, ObjectQuery, ObjectType, Size

TYPES = [t.value for t in ObjectType]
COLORS = [c.value for c in Color]
SIZES = [s.value for s in Size]
STORAGE = ["countertop", "dishwasher", "cabinet"]

#: slot-profile name -> ordered field tuple
PROFILES = {
    "T": ("type",),
    "TC": ("type", "color"),
    "TS": ("type", "size"),
    "TCS": ("type", "color", "size"),
    "TCSL": ("type", "color", "size", "location"),
    "TCL": ("type", "color", "location"),
    "TSL": ("type", "size", "location"),
}


class ManifestCountMismatch(ValueError):
    """Template expansion does not reproduce the declared counts."""


@dataclass(frozen=True)
class BenchmarkInstruction:
    text: str
    gold: Command
    family: str

    def to_dict(self) -> dict:
        return {"text": self.text, "gold": self.gold.to_dict(), "family": self.family}

    @classmethod
    def from_dict(cls, d: dict) -> "BenchmarkInstruction":
        return cls(text=d["text"], gold=Command.from_dict(d["gold"]), family=d["family"])


DEFAULT_MANIFEST = {
    "counts": {"bring_me": 800, "replace": 1770, "breakfast": 41, "total": 2611},
    "bring_me": [
        {"text": "Bring me the {object} from the {location}.", "slots": "TCSL"},
        {"text": "Please fetch the {object} from the {location}.", "slots": "TCSL"},
        {"text": "Bring me the {object}.", "slots": "TCS"},
        {"text": "Could you bring me the {object}?", "slots": "TCS"},
        {"text": "I would like the {object}.", "slots": "TCS"},
        {"text": "Get me the {object} from the {location}.", "slots": "TCL"},
        {"text": "Please bring me the {object} from the {location}.", "slots": "TCL"},
        {"text": "Fetch the {object} from the {location}.", "slots": "TCL"},
        {"text": "Can you get me the {object} from the {location}?", "slots": "TCL"},
        {"text": "Hand me the {object}.", "slots": "TC"},
    ],
    "replace": [
        {"text": "Bring me the {add} instead of the {delete}.", "add": "TCS", "delete": "T"},
        {"text": "Please bring me the {add} instead of the {delete}.", "add": "TCS", "delete": "T"},
        {"text": "I would like the {add} instead of the {delete}.", "add": "TCS", "delete": "T"},
        {"text": "Could you get me the {add} instead of the {delete}?", "add": "TCS", "delete": "T"},
        {"text": "Get me the {add} instead of the {delete}.", "add": "TC", "delete": "T"},
        {"text": "I want the {add} instead of the {delete}.", "add": "TC", "delete": "T"},
        {"text": "Please fetch the {add} instead of the {delete}.", "add": "TC", "delete": "T"},
        {"text": "Fetch the {add} instead of the {delete}.", "add": "TS", "delete": "T"},
        {"text": "Hand me the {add} instead of the {delete}.", "add": "TS", "delete": "T"},
        {"text": "Bring me a {add} instead of a {delete}.", "add": "T", "delete": "T"},
        {"text": "Please bring me a {add} instead of a {delete}.", "add": "T", "delete": "T"},
        {"text": "Can you bring me a {add} instead of a {delete}?", "add": "T", "delete": "T"},
        {"text": "I need a {add} instead of a {delete}.", "add": "T", "delete": "T"},
        {"text": "Give me a {add} instead of a {delete}.", "add": "T", "delete": "T"},
        {"text": "I would rather have a {add} instead of a {delete}.", "add": "T", "delete": "T"},
    ],
    "breakfast": [
        "Please set the table for breakfast.",
        "Set the table for breakfast.",
        "Could you set the table for breakfast?",
        "Can you set the table for breakfast?",
        "Would you set the table for breakfast?",
        "Please prepare breakfast.",
        "Prepare breakfast.",
        "Prepare breakfast, please.",
        "Could you prepare breakfast?",
        "Can you prepare breakfast for me?",
        "Please make breakfast ready.",
        "Make breakfast ready, please.",
        "I would like breakfast now.",
        "I would like to have breakfast.",
        "I want breakfast.",
        "I want to have breakfast now.",
        "I would like to eat breakfast.",
        "Time for breakfast, please.",
        "It is time for breakfast.",
        "Let us have breakfast.",
        "Let me have my breakfast.",
        "Get breakfast ready.",
        "Get breakfast ready, please.",
        "Please get breakfast started.",
        "Start preparing breakfast.",
        "Start setting up breakfast.",
        "Set up breakfast.",
        "Set up breakfast, please.",
        "Please set up everything for breakfast.",
        "Set everything up for breakfast.",
        "Put breakfast on the table.",
        "Please put breakfast on the table.",
        "Serve breakfast.",
        "Serve breakfast, please.",
        "Could you serve breakfast?",
        "Breakfast, please.",
        "Breakfast time.",
        "I am ready for breakfast.",
        "We are ready for breakfast.",
        "Make the table ready for breakfast.",
        "Ready the table for breakfast, please.",
    ],
}


def _object_phrase(fields: dict) -> str:
    words = []
    if "size" in fields:
        words.append(fields["size"])
    if "color" in fields:
        words.append(fields["color"])
    words.append(fields["type"])
    return " ".join(words)


def _expand_profile(profile: str) -> Iterable[dict]:
    """Every attribute combination for a slot profile, in declaration order."""
    fields = PROFILES[profile]
    combos = [{}]
    domains = {"type": TYPES, "color": COLORS, "size": SIZES, "location": STORAGE}
    for name in fields:
        combos = [dict(c, **{name: v}) for c in combos for v in domains[name]]
    return combos


def _gold_query(fields: dict) -> ObjectQuery:
    return ObjectQuery(
        type=ObjectType(fields["type"]) if "type" in fields else None,
        color=Color(fields["color"]) if "color" in fields else None,
        size=Size(fields["size"]) if "size" in fields else None,
        source_location=Location(fields["location"]) if "location" in fields else None,
    )


def generate_benchmark(manifest: Optional[dict] = None,
                       seed: Optional[int] = None) -> list[BenchmarkInstruction]:
    """Expand the manifest deterministically; non-None seed shuffles the order."""
    manifest = manifest or DEFAULT_MANIFEST
    out: list[BenchmarkInstruction] = []

    bring_me: list[BenchmarkInstruction] = []
    for template in manifest["bring_me"]:
        for combo in _expand_profile(template["slots"]):
            text = template["text"].format(
                object=_object_phrase(combo), location=combo.get("location", ""))
            gold = Command(kind=CommandKind.BRING_ME.value, add=_gold_query(combo))
            bring_me.append(BenchmarkInstruction(text, gold, "bring_me"))

    replace: list[BenchmarkInstruction] = []
    for template in manifest["replace"]:
        for add_combo in _expand_profile(template["add"]):
            for del_combo in _expand_profile(template["delete"]):
                if add_combo == del_combo:
                    continue  # identical phrases make no replacement
                text = template["text"].format(
                    add=_object_phrase(add_combo), delete=_object_phrase(del_combo))
                gold = Command(
                    kind=CommandKind.REPLACE_OBJECT.value,
                    add=_gold_query(add_combo),
                    delete=_gold_query(del_combo),
                )
                replace.append(BenchmarkInstruction(text, gold, "replace"))

    breakfast = [
        BenchmarkInstruction(text, Command(kind=CommandKind.SETTING_BREAKFAST.value),
                             "breakfast")
        for text in manifest["breakfast"]
    ]

    counts = manifest["counts"]
    actual = {"bring_me": len(bring_me), "replace": len(replace),
              "breakfast": len(breakfast)}
    for family, expected in (("bring_me", counts["bring_me"]),
                             ("replace", counts["replace"]),
                             ("breakfast", counts["breakfast"])):
        if actual[family] != expected:
            raise ManifestCountMismatch(
                f"{family}: expanded {actual[family]}, manifest declares {expected}")
    out = bring_me + replace + breakfast
    if len(out) != counts["total"]:
        raise ManifestCountMismatch(
            f"total: expanded {len(out)}, manifest declares {counts['total']}")
    if seed is not None:
        random.Random(seed).shuffle(out)
    return out


def write_benchmark(instructions: list[BenchmarkInstruction], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for instr in instructions:
            fh.write(json.dumps(instr.to_dict(), sort_keys=True,
                                separators=(",", ":")) + "\n")


def read_benchmark(path: str) -> list[BenchmarkInstruction]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(BenchmarkInstruction.from_dict(json.loads(line)))
    return out
