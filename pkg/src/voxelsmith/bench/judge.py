"""Rubric scoring of a finished build by a language model."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .. import prompts
from ..llm import Message
from .tasks import ASPECTS


class ScoreParseError(ValueError):
    pass


@dataclass(frozen=True)
class EvalScore:
    per_aspect: dict[str, float]

    def __post_init__(self):
        if not self.per_aspect:
            raise ValueError("a score needs at least one aspect")
        for a, s in self.per_aspect.items():
            if not 0 <= s <= 10:
                raise ValueError(f"{a} score {s} outside 0..10")

    @property
    def total(self) -> float:
        return sum(self.per_aspect[a] for a in sorted(self.per_aspect))

    @property
    def percentage(self) -> float:
        return self.total / (10 * len(self.per_aspect)) * 100

    def to_dict(self) -> dict:
        return {"per_aspect": dict(sorted(self.per_aspect.items())), "total": self.total,
                "percentage": self.percentage}


def score(per_aspect: dict[str, float], applicable: tuple[str, ...] | list[str]) -> EvalScore:
    """Keep only the applicable aspects."""
    return EvalScore({a: float(per_aspect[a]) for a in applicable})


_NUM = r"(\d+(?:\.\d+)?)"


def parse_scores(text: str, aspects=ASPECTS) -> dict[str, float]:
    """Pull ``Aspect: 8/10`` style scores out of free text."""
    found = {}
    for a in aspects:
        m = re.search(rf"{a}\W{{0,6}}?(?:score\W{{0,3}})?{_NUM}\s*(?:/\s*10|out of 10)?", text, re.I)
        if m:
            found[a] = float(m.group(1))
    return found


def _from_json(text: str) -> dict[str, float]:
    start, end = text.find("{"), text.rfind("}")
    if start < 0 or end <= start:
        return {}
    try:
        obj = json.loads(text[start:end + 1])
    except ValueError:
        return {}
    out = {}
    lower = {str(k).lower(): v for k, v in obj.items()} if isinstance(obj, dict) else {}
    for a in ASPECTS:
        v = lower.get(a.lower())
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            out[a] = float(v)
    return out


def _usable(found: dict[str, float], applicable) -> bool:
    return all(a in found and 0 <= found[a] <= 10 for a in applicable)


def judge(client, instruction: str, applicable: tuple[str, ...], views_text: str, *,
          image: str | None = None, temperature: float = 0.0) -> EvalScore:
    prompt = prompts.render("evaluation", {"INSTRUCTION": instruction, "IMAGE": views_text})
    attach = image if (image is not None and client.supports_images) else None
    messages = [Message("user", prompt, attach)]
    reply = client.complete(messages, temperature=temperature)
    found = parse_scores(reply)
    if not _usable(found, applicable):
        found = _from_json(reply)
    if _usable(found, applicable):
        return score(found, applicable)
    ask = prompts.fill(prompts.SCORE_REPAIR, aspects=", ".join(f'"{a}"' for a in applicable))
    messages += [Message("assistant", reply), Message("user", ask)]
    reply = client.complete(messages, temperature=temperature, json_mode=True)
    found = _from_json(reply) or parse_scores(reply)
    if not _usable(found, applicable):
        raise ScoreParseError(f"no usable scores for {', '.join(applicable)} in the judge reply")
    return score(found, applicable)
