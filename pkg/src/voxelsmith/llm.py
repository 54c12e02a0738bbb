"""Chat clients: a transcript-driven stub for tests and an HTTP client."""
from __future__ import annotations

import base64
import json
import mimetypes
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Protocol

URL_ENV = "VOXELSMITH_LLM_URL"
KEY_ENV = "VOXELSMITH_LLM_KEY"
MODEL_ENV = "VOXELSMITH_LLM_MODEL"


class LlmError(RuntimeError):
    pass


class TranscriptMismatch(LlmError):
    pass


class TranscriptExhausted(LlmError):
    pass


class JsonShapeError(ValueError):
    pass


@dataclass(frozen=True)
class Message:
    role: str  # system | user | assistant
    text: str
    image: str | None = None  # path to an image file

    def to_dict(self) -> dict:
        d = {"role": self.role, "text": self.text}
        if self.image is not None:
            d["image"] = self.image
        return d


class LlmClient(Protocol):
    supports_images: bool

    def complete(self, messages: list[Message], *, temperature: float = 0.0,
                 json_mode: bool = False) -> str: ...


@dataclass
class TranscriptEntry:
    expect_substring: str
    response: str


def load_transcript(path: str | Path) -> list[TranscriptEntry]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, list):
        raise ValueError(f"{path}: transcript must be a JSON array")
    out = []
    for i, item in enumerate(data):
        if not isinstance(item, dict) or "response" not in item:
            raise ValueError(f"{path}: entry {i} needs a 'response' field")
        out.append(TranscriptEntry(str(item.get("expect_substring", "")), str(item["response"])))
    return out


class ScriptedClient:
    """Replays canned responses in order.

    Each entry's ``expect_substring`` must occur somewhere in the outgoing
    messages, so a drifting prompt fails the run instead of silently
    receiving the wrong answer.
    """

    def __init__(self, entries: list[TranscriptEntry] | list[dict], supports_images: bool = False):
        self.entries = [e if isinstance(e, TranscriptEntry) else TranscriptEntry(e.get("expect_substring", ""), e["response"])
                        for e in entries]
        self.supports_images = supports_images
        self.cursor = 0

    @classmethod
    def from_file(cls, path: str | Path, supports_images: bool = False) -> ScriptedClient:
        return cls(load_transcript(path), supports_images)

    @property
    def remaining(self) -> int:
        return len(self.entries) - self.cursor

    def complete(self, messages: list[Message], *, temperature: float = 0.0, json_mode: bool = False) -> str:
        if self.cursor >= len(self.entries):
            raise TranscriptExhausted(f"transcript exhausted after {len(self.entries)} responses")
        entry = self.entries[self.cursor]
        sent = "\n".join(m.text for m in messages)
        if entry.expect_substring not in sent:
            raise TranscriptMismatch(
                f"transcript entry {self.cursor}: expected the prompt to contain {entry.expect_substring!r}")
        self.cursor += 1
        return entry.response


def _image_url(path: str) -> str:
    mime = mimetypes.guess_type(path)[0] or "image/png"
    data = base64.b64encode(Path(path).read_bytes()).decode("ascii")
    return f"data:{mime};base64,{data}"


class LiveClient:
    """OpenAI-style chat-completions endpoint over HTTPS."""

    supports_images = True

    def __init__(self, base_url: str | None = None, api_key: str | None = None, model: str | None = None,
                 trace_dir: str | Path | None = None, timeout: float = 120.0):
        import httpx

        self.base_url = (base_url or os.environ.get(URL_ENV, "")).rstrip("/")
        if not self.base_url:
            raise LlmError(f"set {URL_ENV} to the chat-completions base URL")
        self.api_key = api_key if api_key is not None else os.environ.get(KEY_ENV, "")
        self.model = model or os.environ.get(MODEL_ENV, "gpt-4o")
        self.trace_dir = Path(trace_dir) if trace_dir else None
        self._http = httpx.Client(timeout=timeout)
        self._calls = 0

    def _payload(self, messages: list[Message], temperature: float, json_mode: bool) -> dict:
        out = []
        for m in messages:
            if m.image is None:
                out.append({"role": m.role, "content": m.text})
            else:
                out.append({"role": m.role, "content": [
                    {"type": "text", "text": m.text},
                    {"type": "image_url", "image_url": {"url": _image_url(m.image)}},
                ]})
        body: dict[str, Any] = {"model": self.model, "messages": out, "temperature": temperature}
        if json_mode:
            body["response_format"] = {"type": "json_object"}
        return body

    def complete(self, messages: list[Message], *, temperature: float = 0.0, json_mode: bool = False) -> str:
        body = self._payload(messages, temperature, json_mode)
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        resp = self._http.post(f"{self.base_url}/chat/completions", json=body, headers=headers)
        self._calls += 1
        if self.trace_dir is not None:
            self.trace_dir.mkdir(parents=True, exist_ok=True)
            (self.trace_dir / f"http_{self._calls:03d}_request.json").write_text(json.dumps(body, indent=1))
            (self.trace_dir / f"http_{self._calls:03d}_response.json").write_text(resp.text)
        if resp.status_code >= 400:
            raise LlmError(f"endpoint returned HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, ValueError) as exc:
            raise LlmError(f"unexpected response body: {resp.text[:200]}") from exc


@dataclass
class RecordingClient:
    """Wraps a client and keeps every exchange for the run directory."""

    inner: Any
    log: list[dict] = field(default_factory=list)

    @property
    def supports_images(self) -> bool:
        return self.inner.supports_images

    def complete(self, messages: list[Message], *, temperature: float = 0.0, json_mode: bool = False) -> str:
        entry = {"messages": [m.to_dict() for m in messages], "temperature": temperature, "json_mode": json_mode}
        try:
            reply = self.inner.complete(messages, temperature=temperature, json_mode=json_mode)
        except Exception as exc:
            entry["error"] = f"{type(exc).__name__}: {exc}"
            self.log.append(entry)
            raise
        entry["response"] = reply
        self.log.append(entry)
        return reply

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e, sort_keys=True) + "\n" for e in self.log)


_FENCE = re.compile(r"```(?:json)?\s*(.*?)```", re.S)


def extract_json(text: str, keys: tuple[str, ...]) -> dict:
    """Parse the JSON object in a reply and check it has string values for ``keys``."""
    candidates = [text.strip()]
    candidates += [m.group(1).strip() for m in _FENCE.finditer(text)]
    start, end = text.find("{"), text.rfind("}")
    if 0 <= start < end:
        candidates.append(text[start:end + 1])
    obj = None
    for c in candidates:
        try:
            obj = json.loads(c)
        except ValueError:
            continue
        if isinstance(obj, dict):
            break
        obj = None
    if obj is None:
        raise JsonShapeError("reply is not a JSON object")
    missing = [k for k in keys if k not in obj]
    if missing:
        raise JsonShapeError(f"JSON object lacks key(s) {', '.join(map(repr, missing))}; got {sorted(obj)}")
    bad = [k for k in keys if not isinstance(obj[k], str)]
    if bad:
        raise JsonShapeError(f"value for {', '.join(map(repr, bad))} must be a string")
    return obj
