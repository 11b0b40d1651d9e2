"""HTTP service exposing palette completion and generation.

Thin wrapper over the same pipeline the benchmark runs: parse, retrieve an
exemplar, prompt, call the provider, decode the reply.  Colors cross the
wire as #rrggbb strings regardless of the prompt representation, and the
endpoints keep no per-request state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .bench import (
    completion_exemplar_rows,
    completion_oracle,
    generation_exemplar_rows,
    generation_oracle,
    ingest_completion_corpus,
    ingest_pat,
)
from .colors import color_to_hex
from .document import document_from_value, fill_slots, serialize_document
from .errors import ProviderError, ReplyError, ValidationError
from .llm import LlmProviderConfig, MockChatProvider, complete_chat, extract_json, make_provider, make_request
from .naming import default_dictionary_path, load_dictionary
from .prompting import (
    PromptConfig,
    build_completion_prompt,
    build_generation_prompt,
    derive_query_text,
    extract_slot_colors,
    parse_generation_reply,
)
from .retrieval import FallbackEmbedder, build_index, load_index, query_top_k

_OVERRIDE_KEYS = {
    "representation": "representation",
    "profile": "profile_variant",
    "structure": "structure",
    "exemplars": "exemplar_policy",
    "exemplar_count": "exemplar_count",
}


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8765
    index_path: Path | None = None
    corpus_path: Path | None = None
    splits_path: Path | None = None
    pairs_path: Path | None = None
    dictionary_path: Path | None = None
    provider: LlmProviderConfig = field(default_factory=lambda: LlmProviderConfig(provider="mock"))
    mock_complete: str | None = None
    mock_generate: str | None = None
    cors_origins: tuple[str, ...] = ()
    body_limit: int = 1_000_000

    def __post_init__(self):
        for name in ("index_path", "corpus_path", "splits_path", "pairs_path",
                     "dictionary_path"):
            value = getattr(self, name)
            if value is not None:
                value = Path(value)
                object.__setattr__(self, name, value)
                if not value.exists():
                    raise ValidationError(f"{name.replace('_', ' ')} does not exist: {value}")
        if self.body_limit < 1024:
            raise ValidationError("body limit must be at least 1 KiB")
        object.__setattr__(self, "cors_origins", tuple(self.cors_origins))


class _State:
    """Read-only resources shared by all requests."""

    def __init__(self, cfg: ServiceConfig):
        self.cfg = cfg
        self.dictionary = load_dictionary(cfg.dictionary_path or default_dictionary_path())
        self.embedder = FallbackEmbedder()

        self.completion_index = None
        if cfg.index_path is not None:
            self.completion_index = load_index(cfg.index_path)
        elif cfg.corpus_path is not None:
            corpus = ingest_completion_corpus(cfg.corpus_path, cfg.splits_path)
            rows = completion_exemplar_rows(corpus.split("train"))
            if rows:
                self.completion_index = build_index(rows, self.embedder)

        self.generation_index = None
        if cfg.pairs_path is not None:
            pairs = ingest_pat(cfg.pairs_path)
            rows = generation_exemplar_rows(pairs.split("train"))
            if rows:
                self.generation_index = build_index(rows, self.embedder)

        policy = "similarity" if self.completion_index is not None else "none"
        self.completion_prompt = PromptConfig(task="completion", exemplar_policy=policy)
        policy = "similarity" if self.generation_index is not None else "none"
        self.generation_prompt = PromptConfig(task="generation", exemplar_policy=policy)

        if cfg.provider.provider == "mock":
            behavior = cfg.mock_complete or "#808080"
            self.completion_provider = MockChatProvider(
                mode="echo",
                oracle=completion_oracle({}, self.completion_prompt, self.dictionary, behavior),
            )
            behavior = cfg.mock_generate or "#264653,#2a9d8f,#e9c46a,#f4a261,#e76f51"
            self.generation_provider = MockChatProvider(
                mode="echo",
                oracle=generation_oracle({}, self.generation_prompt, self.dictionary, behavior),
            )
        else:
            provider = make_provider(cfg.provider)
            self.completion_provider = provider
            self.generation_provider = provider

    @property
    def index_size(self) -> int:
        size = 0
        if self.completion_index is not None:
            size += len(self.completion_index)
        if self.generation_index is not None:
            size += len(self.generation_index)
        return size


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def _apply_overrides(prompt: PromptConfig, overrides) -> PromptConfig:
    if overrides is None:
        return prompt
    if not isinstance(overrides, dict):
        raise ValidationError("overrides must be an object")
    fields = {}
    for key, value in overrides.items():
        if key not in _OVERRIDE_KEYS:
            raise ValidationError(f"unknown override {key!r}")
        fields[_OVERRIDE_KEYS[key]] = value
    if "representation" in fields and isinstance(fields["representation"], str):
        from .colors import Representation

        fields["representation"] = Representation.from_string(fields["representation"])
    return replace(prompt, **fields)


def _pick_exemplars(state: _State, index, prompt: PromptConfig, query: str):
    if prompt.exemplar_policy == "none" or index is None:
        return None
    ranked = query_top_k(index, query, max(prompt.exemplar_count, 1), state.embedder)
    return [ex for ex, _ in ranked]


def create_app(cfg: ServiceConfig) -> FastAPI:
    state = _State(cfg)
    app = FastAPI(title="palette service", docs_url=None, redoc_url=None)
    if cfg.cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(cfg.cors_origins),
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.middleware("http")
    async def limit_body(request: Request, call_next):
        length = request.headers.get("content-length")
        if length is not None and int(length) > cfg.body_limit:
            return _error(413, f"request body exceeds {cfg.body_limit} bytes")
        return await call_next(request)

    @app.get("/v1/health")
    def health():
        return {
            "status": "ok",
            "model": cfg.provider.resolved_model() or cfg.provider.provider,
            "index_size": state.index_size,
            "dict_size": len(state.dictionary),
        }

    @app.post("/v1/complete")
    async def complete(request: Request):
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            return _error(400, f"request body is not JSON: {exc.msg}")
        if not isinstance(body, dict) or "document" not in body:
            return _error(400, "request body must carry a document")
        try:
            doc = document_from_value(body["document"])
            prompt = _apply_overrides(state.completion_prompt, body.get("overrides"))
        except ValidationError as exc:
            return _error(400, str(exc))
        if prompt.task != "completion":
            return _error(400, "overrides cannot change the task")
        targets = doc.masked_slots()
        if not targets:
            return _error(400, "document has no masked slots")

        try:
            exemplars = _pick_exemplars(
                state, state.completion_index, prompt, derive_query_text(doc)
            )
            bundle = build_completion_prompt(doc, exemplars, prompt, state.dictionary)
            resp = complete_chat(
                state.completion_provider,
                make_request(bundle.system, bundle.user),
                cfg.provider.retry,
            )
            colors = extract_slot_colors(
                extract_json(resp.content), targets, prompt.representation,
                state.dictionary, state.embedder, prompt.structure,
            )
        except ReplyError as exc:
            return _error(422, f"could not resolve the model reply: {exc}")
        except ProviderError as exc:
            return _error(502, f"provider failure: {exc}")

        updated = fill_slots(doc, targets, colors)
        return {
            "colors": [color_to_hex(c) for c in colors],
            "updated_document": json.loads(serialize_document(updated)),
            "exemplar_id": exemplars[0].id if exemplars else None,
            "timing": {"provider_ms": int(resp.latency * 1000)},
        }

    @app.post("/v1/generate")
    async def generate(request: Request):
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            return _error(400, f"request body is not JSON: {exc.msg}")
        if not isinstance(body, dict):
            return _error(400, "request body must be an object")
        text = body.get("text")
        if not isinstance(text, str) or not text.strip():
            return _error(400, "text must be a non-empty string")
        try:
            prompt = _apply_overrides(state.generation_prompt, body.get("overrides"))
        except ValidationError as exc:
            return _error(400, str(exc))
        if prompt.task != "generation":
            return _error(400, "overrides cannot change the task")

        try:
            exemplars = _pick_exemplars(state, state.generation_index, prompt, text)
            bundle = build_generation_prompt(text, exemplars, prompt, state.dictionary)
            resp = complete_chat(
                state.generation_provider,
                make_request(bundle.system, bundle.user),
                cfg.provider.retry,
            )
            palette = parse_generation_reply(
                extract_json(resp.content), prompt.representation,
                state.dictionary, state.embedder,
            )
        except ReplyError as exc:
            return _error(422, f"could not resolve the model reply: {exc}")
        except ProviderError as exc:
            return _error(502, f"provider failure: {exc}")

        return {
            "palette": [color_to_hex(c) for c in palette.slots],
            "exemplar_id": exemplars[0].id if exemplars else None,
            "timing": {"provider_ms": int(resp.latency * 1000)},
        }

    return app


def run_service(cfg: ServiceConfig) -> None:
    import uvicorn

    uvicorn.run(create_app(cfg), host=cfg.host, port=cfg.port, log_level="warning")
