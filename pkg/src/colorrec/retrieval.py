"""Embedding providers and the exact nearest-neighbor exemplar index.

Exemplar search is exhaustive cosine over unit-normalized vectors; no
approximate structures. The index persists to a single self-describing
JSON container with magic header "CGIDX1".
"""

from __future__ import annotations

import base64
import hashlib
import json
import random
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np
import requests

from .errors import ProviderError, TransportError, ValidationError

INDEX_MAGIC = "CGIDX1"

FALLBACK_DIMENSION = 256


class EmbeddingProvider(Protocol):
    name: str
    dimension: int

    def embed(self, texts: Sequence[str]) -> list[list[float]]: ...


@dataclass(frozen=True)
class Exemplar:
    id: str
    query_text: str
    payload: str  # canonical JSON string
    vector: tuple[float, ...] = ()


@dataclass
class ExemplarIndex:
    provider_name: str
    dimension: int
    exemplars: list[Exemplar]
    matrix: np.ndarray  # (n, dimension), rows unit-normalized

    def __len__(self) -> int:
        return len(self.exemplars)


def _hash_to_bucket(gram: str, dimension: int) -> int:
    digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") % dimension


class FallbackEmbedder:
    """Deterministic offline embedder: hashed character 3-gram frequencies.

    256-dim L2-normalized vectors; empty text maps to a fixed unit basis
    vector so downstream cosine math stays well defined.
    """

    name = "hash3gram-256"
    dimension = FALLBACK_DIMENSION

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        out = []
        for text in texts:
            vec = np.zeros(self.dimension)
            if len(text) == 0:
                vec[0] = 1.0
                out.append(vec.tolist())
                continue
            grams = [text[i : i + 3] for i in range(len(text) - 2)] or [text]
            for gram in grams:
                vec[_hash_to_bucket(gram, self.dimension)] += 1.0
            norm = float(np.linalg.norm(vec))
            out.append((vec / norm).tolist())
        return out


class RemoteEmbeddingProvider:
    """HTTP embedding endpoint speaking {model, input} -> {data:[{embedding}]}."""

    def __init__(self, url: str, model: str, api_key: str | None = None,
                 dimension: int = 768, timeout: float = 60.0, name: str | None = None):
        self.url = url
        self.model = model
        self.api_key = api_key
        self.dimension = dimension
        self.timeout = timeout
        self.name = name or f"remote:{model}"

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            resp = requests.post(
                self.url,
                json={"model": self.model, "input": list(texts)},
                headers=headers,
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise TransportError(f"embedding request failed: {exc}") from exc
        if resp.status_code != 200:
            raise TransportError(
                f"embedding endpoint returned {resp.status_code}", status=resp.status_code
            )
        try:
            data = resp.json()["data"]
            vectors = [list(map(float, item["embedding"])) for item in data]
        except (KeyError, TypeError, ValueError) as exc:
            raise ProviderError(f"malformed embedding response: {exc}") from exc
        if len(vectors) != len(texts):
            raise ProviderError(
                f"embedding endpoint returned {len(vectors)} vectors for {len(texts)} inputs"
            )
        return vectors


class CachedEmbeddingProvider:
    """Persistent text->vector cache wrapper restoring determinism of remote providers."""

    def __init__(self, inner: EmbeddingProvider, cache_path: str | Path):
        self.inner = inner
        self.name = inner.name
        self.dimension = inner.dimension
        self.cache_path = Path(cache_path)
        self._cache: dict[str, list[float]] = {}
        self._lock = threading.Lock()
        if self.cache_path.exists():
            with open(self.cache_path, "r", encoding="utf-8") as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    entry = json.loads(line)
                    self._cache[entry["key"]] = entry["vector"]

    @staticmethod
    def _key(text: str) -> str:
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        missing = []
        with self._lock:
            for text in texts:
                if self._key(text) not in self._cache:
                    missing.append(text)
        if missing:
            fetched = self.inner.embed(missing)
            with self._lock:
                self.cache_path.parent.mkdir(parents=True, exist_ok=True)
                with open(self.cache_path, "a", encoding="utf-8") as fh:
                    for text, vec in zip(missing, fetched):
                        key = self._key(text)
                        if key in self._cache:
                            continue
                        self._cache[key] = vec
                        fh.write(json.dumps({"key": key, "vector": vec}) + "\n")
        with self._lock:
            return [list(self._cache[self._key(t)]) for t in texts]


def _normalize_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return matrix / norms


def build_index(
    corpus: Sequence[tuple[str, str, str]],
    provider: EmbeddingProvider,
    batch_size: int = 128,
    max_workers: int = 4,
) -> ExemplarIndex:
    """Embed (id, query_text, payload) rows into an exact-search index.

    Batches may be embedded concurrently (bounded pool); result order always
    follows the corpus.
    """
    if not corpus:
        raise ValidationError("cannot build an index from an empty corpus")
    ids = [row[0] for row in corpus]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise ValidationError(f"duplicate exemplar ids: {dupes[:5]}")

    texts = [row[1] for row in corpus]
    batches = [texts[i : i + batch_size] for i in range(0, len(texts), batch_size)]
    if len(batches) > 1 and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(provider.embed, batches))
    else:
        results = [provider.embed(b) for b in batches]
    vectors = [vec for batch in results for vec in batch]

    matrix = _normalize_rows(np.array(vectors, dtype=np.float64))
    if matrix.shape != (len(corpus), provider.dimension):
        raise ProviderError(
            f"provider returned shape {matrix.shape}, expected {(len(corpus), provider.dimension)}"
        )
    exemplars = [
        Exemplar(id=row[0], query_text=row[1], payload=row[2], vector=tuple(map(float, vec)))
        for row, vec in zip(corpus, matrix)
    ]
    return ExemplarIndex(provider.name, provider.dimension, exemplars, matrix)


def query_top_k(
    index: ExemplarIndex, text: str, k: int, provider: EmbeddingProvider | None = None
) -> list[tuple[Exemplar, float]]:
    """Top-k exemplars by cosine similarity; ties break by ascending id."""
    if len(index) == 0:
        raise ValidationError("cannot query an empty index")
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    provider = provider or FallbackEmbedder()
    if provider.name != index.provider_name:
        raise ValidationError(
            f"index built with provider {index.provider_name!r}, queried with {provider.name!r}"
        )
    q = np.array(provider.embed([text])[0], dtype=np.float64)
    norm = np.linalg.norm(q)
    if norm > 0.0:
        q = q / norm
    scores = index.matrix @ q
    order = sorted(range(len(index)), key=lambda i: (-scores[i], index.exemplars[i].id))
    return [(index.exemplars[i], float(scores[i])) for i in order[: min(k, len(index))]]


def sample_random(index: ExemplarIndex, seed: int) -> Exemplar:
    """Uniform seeded choice of one exemplar."""
    if len(index) == 0:
        raise ValidationError("cannot sample from an empty index")
    return index.exemplars[random.Random(seed).randrange(len(index))]


def save_index(index: ExemplarIndex, path: str | Path) -> None:
    payload = {
        "magic": INDEX_MAGIC,
        "provider": index.provider_name,
        "dimension": index.dimension,
        "ids": [e.id for e in index.exemplars],
        "query_texts": [e.query_text for e in index.exemplars],
        "payloads": [e.payload for e in index.exemplars],
        "dtype": "float64-le",
        "vectors": base64.b64encode(
            np.ascontiguousarray(index.matrix, dtype="<f8").tobytes()
        ).decode("ascii"),
    }
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, separators=(",", ":"), sort_keys=True)


def load_index(path: str | Path) -> ExemplarIndex:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("magic") != INDEX_MAGIC:
        raise ValidationError(f"{path}: not an exemplar index (magic {payload.get('magic')!r})")
    n = len(payload["ids"])
    dim = int(payload["dimension"])
    matrix = np.frombuffer(
        base64.b64decode(payload["vectors"]), dtype="<f8"
    ).reshape(n, dim).copy()
    exemplars = [
        Exemplar(id=i, query_text=q, payload=p, vector=tuple(map(float, vec)))
        for i, q, p, vec in zip(payload["ids"], payload["query_texts"], payload["payloads"], matrix)
    ]
    return ExemplarIndex(payload["provider"], dim, exemplars, matrix)
