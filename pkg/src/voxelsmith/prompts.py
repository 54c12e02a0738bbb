"""Prompt templates and slot substitution.

The four templates below are kept word for word; everything specific to
the blueprint language travels in separate follow-up messages so the
templates themselves never change.
"""
from __future__ import annotations

import re
from typing import Mapping

LAYOUT_SYNOPSIS = """\
Please translate the structure in the provided text with the following Minecraft details:

1. Components and Positioning: List all individual elements (e.g., blocks, materials, windows, doors, etc.) used in the structure and describe the position of each component relative to the entire structure.
2. Dimensional Layout: Provide the overall dimensions of the structure (length, width, height).
3. Description: Summarize the purpose and design of the structure (e.g., a house, tower, etc.), and outline the most logical construction sequence, taking into account how building certain parts first could obstruct access to other areas.

Please ensure the description is clear, precise, and professional, making it easy to recreate the structure programmatically.

Here is the provided text description: {text}"""

BLUEPRINT_SYSTEM = """\
You are an expert in both Minecraft and Python coding. Your task is to
generate Python code that creates layouts for Minecraft structures as a
list of tuples.

The structure layout should be represented in the following way:

- Each tuple contains:
  1. The block type (e.g., 'oak_planks', 'glass_pane', 'oak_door').
  2. The exact 3D position of the block, represented by a vec3 object with x, y, and z coordinates.

The layout should follow this format:
[
    ('block_type', start_pos.offset(x, y, z)),
    ('block_type', start_pos.offset(x, y, z)),
    ('block_type', start_pos.offset(x, y, z))
]

Important Notes:
- You do not need to manually define every block's coordinates.
Instead, provide efficient and reusable code that generates the layout
dynamically, based on the starting position.
- The variable storing the layout must be named layout.
- Do not append 'air' to the layout.

# Always start the code with this:
start_pos = self.bot.entity.position.floor()

# Layout generation code that returns the layout

# ...

# The output always ends with the layout being passed into the following method:
self.actions.buildStructure(layout, mode='creative')"""

BLUEPRINT_USER = """\
Here is a possibly relevant plan from past experiences that were effective under their contexts (could be None). If the task described isn't relevant, don't reference it. If it is highly relevant, then reference it:
{retrievedPlans}

Please provide the code for this structure: {structure}.

1. Do not import mineflayer or vec3
2. Do not miss any components
Ensure the generated code is properly indented and formatted as a complete Python script.

Only include the code and output the code into a compact JSON format on a single line without whitespace. The key is 'code' and the value is the actual code."""

SELF_REFLECTION = """\
You are an expert in both Minecraft structure generation and Python coding. Below is the current imperfect blueprint code used to generate a Minecraft structure, along with a description of the intended structure and an image of what was generated by the current code.

Structure Description:
{structure}

Image:
{Image}

Current Blueprint Code:
{blueprint}

Task: Generate the following features:
1. Reflection: Analyze why the current blueprint code does not successfully generate the structure as described. Compare the structure description with both the image and the code itself. Issues may arise either from discrepancies in the visual appearance of the generated structure compared to the description, or from errors in the code's syntax that prevent it from running. Keep this concise.
2. Code: Provide an improved, optimized version of the blueprint code that accurately aligns with the structure description and resolves any issues in the current code.

# Always start the code with this:
start_pos = self.bot.entity.position.floor()
# layout generation code that returns the layout
# ...
# The output always ends with the layout being passed into the following method
self.actions.buildStructure(layout, mode='creative')

Ensure the generated code is properly indented and formatted as a complete Python script. Include the code and reasoning into a compact JSON format on a single line without whitespace where we have two keys "reflection" and "code" and the value is the corresponding output."""

EVALUATION = """\
Your task is to evaluate the building across four key aspects:
1. Correctness: How accurately does the building adhere to the provided instructions, accounting for the inclusion of all specified components, block placements, and overall structure shape?
2. Complexity: How intricate and detailed is the structure?
3. Creativity: How unique and imaginative is the design?
4. Functionality: How well does the building serve its intended purpose or function?
Please provide a score (out of 10) for each of these aspects. Additionally, provide an overall total score based on the individual aspect ratings.

Instruction: {INSTRUCTION}
Image of the building: {IMAGE}"""

SLOTS = {
    "layout_synopsis": ("text",),
    "blueprint_system": (),
    "blueprint_user": ("retrievedPlans", "structure"),
    "self_reflection": ("structure", "Image", "blueprint"),
    "evaluation": ("INSTRUCTION", "IMAGE"),
}

TEMPLATES = {
    "layout_synopsis": LAYOUT_SYNOPSIS,
    "blueprint_system": BLUEPRINT_SYSTEM,
    "blueprint_user": BLUEPRINT_USER,
    "self_reflection": SELF_REFLECTION,
    "evaluation": EVALUATION,
}


class MissingSlot(KeyError):
    pass


def render(template_name: str, values: Mapping[str, str]) -> str:
    """Fill the named slots in one pass.

    Substituted text is never rescanned, so braces inside a blueprint or a
    user instruction survive untouched.
    """
    slots = SLOTS[template_name]
    missing = [s for s in slots if s not in values]
    if missing:
        raise MissingSlot(f"{template_name} needs {', '.join(missing)}")
    if not slots:
        return TEMPLATES[template_name]
    pattern = re.compile(r"\{(" + "|".join(re.escape(s) for s in slots) + r")\}")
    return pattern.sub(lambda m: str(values[m.group(1)]), TEMPLATES[template_name])


NO_RETRIEVAL = "None"


def format_retrieved(plans: list[str]) -> str:
    if not plans:
        return NO_RETRIEVAL
    return "\n\n".join(plans)


# Follow-up messages. These adapt the conversation to the blueprint
# language instead of a general-purpose script.
DSL_INSTRUCTIONS = """\
Output format override: instead of Python, write the layout in the blueprint language below and put that program, as a string, under the JSON key "code".

Offsets are relative to the start position. y is vertical; y=0 is the first layer above the ground. One statement per line:
  place BLOCK (x,y,z) [facing north|south|east|west]
  fill BLOCK (x1,y1,z1) (x2,y2,z2)      solid cuboid, corners inclusive
  shell BLOCK (x1,y1,z1) (x2,y2,z2)     hollow cuboid
  line BLOCK (x1,y1,z1) (x2,y2,z2)      straight or 45-degree line
  pyramid BLOCK (x,y,z) SIZE [step N]   square layers shrinking by N per side
Later statements replace earlier ones at the same cell, so openings can be carved by overwriting. Doors, beds, stairs, chests and furnaces take a facing. '#' starts a comment. Never place air."""

JSON_REPAIR = """\
Your previous reply could not be used: {error}
Reply again with only a single-line compact JSON object of the requested shape."""

DSL_REPAIR = """\
The blueprint program in your previous reply does not compile: {error}
Reply again with the corrected program as single-line compact JSON with the key "code"."""

SECTION_REPAIR = """\
Your previous reply is missing the section "{section}". Reply again with all three sections, each introduced by its heading: Components and Positioning, Dimensional Layout, Description."""

SCORE_REPAIR = """\
Your previous reply did not contain parseable scores. Reply with only a JSON object mapping each of {aspects} to an integer from 0 to 10, plus "total"."""


def mismatch_hints(lines: list[str], limit: int = 40) -> str:
    """Structured diff hints appended after the reflection prompt."""
    shown = lines[:limit]
    more = len(lines) - len(shown)
    body = "\n".join(f"- {ln}" for ln in shown)
    if more > 0:
        body += f"\n- ... and {more} more"
    return "Automated comparison of the built region against the current blueprint found:\n" + body


def fill(text: str, **values: str) -> str:
    """Single-pass slot fill for the follow-up message templates."""
    return re.sub(r"\{(\w+)\}", lambda m: str(values.get(m.group(1), m.group(0))), text)
