"""Persistent memory pool of past (task, plan) pairs with cosine retrieval."""
from __future__ import annotations

import hashlib
import json
import math
import re
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Protocol, Sequence

DEFAULT_DIM = 64
DEFAULT_TOP_K = 1


class EmbeddingFailure(ValueError):
    pass


class ZeroNorm(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


class EmbeddingProvider(Protocol):
    dim: int

    def embed(self, text: str) -> list[float]: ...


_TOKEN_SPLIT = re.compile(r"[^a-z0-9]+")


def tokens(text: str) -> list[str]:
    return [t for t in _TOKEN_SPLIT.split(text.lower()) if t]


class HashedBagOfWords:
    """Each token adds 1 to one of ``dim`` buckets; the result is L2-normalized.

    Buckets come from a blake2b digest so the mapping is stable across
    processes (unlike ``hash()``).
    """

    def __init__(self, dim: int = DEFAULT_DIM):
        if dim < 1:
            raise ValueError("dim must be positive")
        self.dim = dim

    def bucket(self, token: str) -> int:
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "big") % self.dim

    def embed(self, text: str) -> list[float]:
        vec = [0.0] * self.dim
        for tok in tokens(text):
            vec[self.bucket(tok)] += 1.0
        norm = math.sqrt(math.fsum(v * v for v in vec))
        if norm == 0.0:
            raise EmbeddingFailure(f"no tokens to embed in {text!r}")
        return [v / norm for v in vec]


def cosine(a: Sequence[float], b: Sequence[float]) -> float:
    if len(a) != len(b):
        raise DimensionMismatch(f"vectors have lengths {len(a)} and {len(b)}")
    na = math.sqrt(math.fsum(x * x for x in a))
    nb = math.sqrt(math.fsum(y * y for y in b))
    if na == 0.0 or nb == 0.0:
        raise ZeroNorm("cosine is undefined for a zero vector")
    c = math.fsum(x * y for x, y in zip(a, b)) / (na * nb)
    return max(-1.0, min(1.0, c))


@dataclass(frozen=True)
class MemoryRecord:
    id: int
    task_text: str
    plan_dsl: str
    embedding: tuple[float, ...]
    created_at: str

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "task_text": self.task_text,
            "plan_dsl": self.plan_dsl,
            "embedding": list(self.embedding),
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, d: dict) -> MemoryRecord:
        return cls(int(d["id"]), d["task_text"], d["plan_dsl"],
                   tuple(float(v) for v in d["embedding"]), d["created_at"])


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class MemoryPool:
    """Append-only pool, optionally backed by a JSON Lines file.

    Retrieval is an exhaustive scan. Writers take a lock; readers work on
    a snapshot of the record list, so they never see a half-added record.
    """

    def __init__(self, path: str | Path | None = None, embedder: EmbeddingProvider | None = None,
                 clock: Callable[[], str] = _utc_now):
        self.path = Path(path) if path is not None else None
        self.embedder = embedder or HashedBagOfWords()
        self.clock = clock
        self._records: list[MemoryRecord] = []
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            self._load()

    @property
    def dim(self) -> int:
        return self.embedder.dim

    def _load(self) -> None:
        with open(self.path, encoding="utf-8") as fh:
            for n, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                rec = MemoryRecord.from_dict(json.loads(line))
                if len(rec.embedding) != self.dim:
                    raise DimensionMismatch(
                        f"{self.path}:{n}: embedding has {len(rec.embedding)} components, pool uses {self.dim}")
                self._records.append(rec)

    def __len__(self) -> int:
        return len(self._records)

    @property
    def records(self) -> list[MemoryRecord]:
        return list(self._records)

    def add(self, task_text: str, plan_dsl: str) -> MemoryRecord:
        if not task_text.strip() or not plan_dsl.strip():
            raise ValueError("task text and plan must both be non-empty")
        vec = self.embedder.embed(task_text)
        if len(vec) != self.dim or not all(math.isfinite(v) for v in vec):
            raise EmbeddingFailure("embedder returned a malformed vector")
        with self._lock:
            next_id = self._records[-1].id + 1 if self._records else 1
            rec = MemoryRecord(next_id, task_text, plan_dsl, tuple(vec), self.clock())
            if self.path is not None:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with open(self.path, "a", encoding="utf-8") as fh:
                    # json writes floats with repr, which round-trips exactly
                    fh.write(json.dumps(rec.to_dict()) + "\n")
                    fh.flush()
            self._records = self._records + [rec]
        return rec

    def retrieve(self, query_text: str, k: int = DEFAULT_TOP_K) -> list[tuple[MemoryRecord, float]]:
        if k < 1:
            raise ValueError("k must be positive")
        records = self._records
        if not records:
            return []
        q = self.embedder.embed(query_text)
        scored = [(rec, cosine(q, rec.embedding)) for rec in records]
        scored.sort(key=lambda pair: (-pair[1], pair[0].id))
        return scored[:k]

    def clear(self) -> None:
        with self._lock:
            self._records = []
            if self.path is not None and self.path.exists():
                self.path.write_text("", encoding="utf-8")

    def copy_to(self, path: str | Path | None) -> MemoryPool:
        """Independent pool holding the same records (used to isolate trials)."""
        other = MemoryPool(None, self.embedder, self.clock)
        other._records = list(self._records)
        if path is not None:
            other.path = Path(path)
            other.path.parent.mkdir(parents=True, exist_ok=True)
            with open(other.path, "w", encoding="utf-8") as fh:
                for rec in other._records:
                    fh.write(json.dumps(rec.to_dict()) + "\n")
        return other


def retrieve(pool: MemoryPool, query_text: str, k: int = DEFAULT_TOP_K) -> list[tuple[MemoryRecord, float]]:
    return pool.retrieve(query_text, k)


def add(pool: MemoryPool, task_text: str, plan_dsl: str) -> MemoryRecord:
    return pool.add(task_text, plan_dsl)
