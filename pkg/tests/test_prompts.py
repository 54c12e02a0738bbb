import pytest

from voxelsmith import prompts

from conftest import GOLDEN_DIR

SENTINELS = {
    "layout_synopsis": {"text": "<<TEXT>>"},
    "blueprint_system": {},
    "blueprint_user": {"retrievedPlans": "<<PLANS>>", "structure": "<<STRUCTURE>>"},
    "self_reflection": {"structure": "<<STRUCTURE>>", "Image": "<<IMAGE>>", "blueprint": "<<CODE>>"},
    "evaluation": {"INSTRUCTION": "<<INSTRUCTION>>", "IMAGE": "<<IMAGE>>"},
}


def golden(name):
    return (GOLDEN_DIR / f"{name}.txt").read_text(encoding="utf-8").rstrip("\n")


@pytest.mark.parametrize("name", sorted(SENTINELS))
def test_rendered_prompt_matches_golden(name):
    expected = golden(name)
    for slot, value in SENTINELS[name].items():
        assert expected.count("{" + slot + "}") == 1
        expected = expected.replace("{" + slot + "}", value)
    assert prompts.render(name, SENTINELS[name]) == expected


def test_substitution_is_single_pass():
    text = prompts.render("blueprint_user", {"retrievedPlans": "{structure}", "structure": "x {retrievedPlans}"})
    assert "{structure}" in text and "x {retrievedPlans}" in text


def test_missing_slot_is_an_error():
    with pytest.raises(prompts.MissingSlot):
        prompts.render("self_reflection", {"structure": "s"})


def test_empty_retrieval_is_none():
    assert prompts.format_retrieved([]) == "None"
    text = prompts.render("blueprint_user", {"retrievedPlans": prompts.format_retrieved([]), "structure": "s"})
    assert "(could be None)" in text and "\nNone\n" in text


def test_mismatch_hints_are_capped():
    hint = prompts.mismatch_hints([f"issue {i}" for i in range(50)], limit=5)
    assert hint.count("\n- issue") == 5 and "45 more" in hint
