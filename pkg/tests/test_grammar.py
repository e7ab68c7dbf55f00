import random
import string

from kitchenhri.nlu.grammar import GrammarBackend, parse, parse_with_info
from kitchenhri.nlu.types import CommandKind, DialogueContext
from kitchenhri.world import Color, Location, ObjectQuery, ObjectType, Size


def test_fully_attributed_request():
    cmd = parse("Bring me the small red cup.")
    assert cmd.kind == "bring_me"
    assert cmd.add == ObjectQuery(type=ObjectType.CUP, color=Color.RED, size=Size.SMALL)


def test_replace_with_explicit_delete():
    cmd = parse("Bring me a cup instead of a bowl.")
    assert cmd.kind == "replace_object"
    assert cmd.add == ObjectQuery(type=ObjectType.CUP)
    assert cmd.delete == ObjectQuery(type=ObjectType.BOWL)


def test_stop():
    cmd = parse("Stop!")
    assert cmd.kind == "stop"
    assert cmd.add is None and cmd.delete is None and cmd.destination is None


def test_out_of_vocabulary_replace_is_other():
    cmd = parse("I would like to eat cornflakes instead of bread")
    assert cmd.kind == "other"


def test_empty_input_is_other():
    assert parse("").kind == "other"


def test_breakfast_variants():
    for text in ["Please set the table for breakfast.",
                 "Could you prepare breakfast?",
                 "I want breakfast now"]:
        assert parse(text).kind == "setting_breakfast"


def test_adjective_order_invariance():
    a = parse("Bring me the small red cup.")
    b = parse("Bring me the red small cup.")
    assert a.add == b.add
    assert a.kind == b.kind


def test_source_location_slot():
    cmd = parse("Bring me the cup from the cabinet.")
    assert cmd.add == ObjectQuery(type=ObjectType.CUP, source_location=Location.CABINET)


def test_contextual_instead_resolves_from_history():
    ctx = DialogueContext(last_add=ObjectQuery(type=ObjectType.CUP))
    cmd = parse("Bring me the bowl instead.", ctx)
    assert cmd.kind == "replace_object"
    assert cmd.add == ObjectQuery(type=ObjectType.BOWL)
    assert cmd.delete == ObjectQuery(type=ObjectType.CUP)


def test_contextual_instead_without_history():
    cmd = parse("Bring me the bowl instead.", DialogueContext())
    assert cmd.kind == "replace_object"
    assert cmd.delete is None


def test_change_location():
    cmd = parse("Put it on the counter instead.")
    assert cmd.kind == "change_location"
    assert cmd.destination == Location.COUNTER
    cmd = parse("Place it on the table.")
    assert cmd.kind == "change_location"
    assert cmd.destination == Location.TABLE


def test_countertop_not_confused_with_counter():
    cmd = parse("Bring me the cup from the countertop.")
    assert cmd.add.source_location == Location.COUNTERTOP
    assert cmd.destination is None


def test_unknown_noun_reported():
    cmd, info = parse_with_info("bring me a pole")
    assert cmd.kind == "other"
    assert info.unknown_nouns == ["pole"]


def test_stop_beats_everything():
    assert parse("Stop! Bring me the cup instead of the bowl.").kind == "stop"


def test_parse_is_total_under_fuzz():
    rng = random.Random(99)
    alphabet = string.printable
    for _ in range(2000):
        text = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 60)))
        cmd = parse(text)
        assert cmd.kind in {k.value for k in CommandKind}


def test_parse_deterministic():
    texts = ["Bring me the big white milk.", "put it on the counter", "stop",
             "qwerty uiop", "Bring me a spoon instead of the cereal."]
    assert [parse(t).to_dict() for t in texts] == [parse(t).to_dict() for t in texts]


def test_backend_interface():
    backend = GrammarBackend()
    from kitchenhri.nlu.types import SymbolicState
    cmd = backend.extract("Bring me the cup.", SymbolicState(), DialogueContext())
    assert cmd.kind == "bring_me"
