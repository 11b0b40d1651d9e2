"""Dataset ingestion and benchmark runners for both tasks.

The runners are deterministic under mock or replayed providers: case seeds
derive from (global seed, document id, k), workers never reorder results,
and reports carry no wall-clock data.  Live provider runs are captured to a
JSONL audit log so they can be replayed byte-identically.
"""

from __future__ import annotations

import csv
import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from .colors import Color, Representation, color_to_hex, hex_to_color, quantize
from .document import Document, MaskRecord, mask_palette, parse_document, serialize_document
from .errors import ProviderError, ReplyError, ValidationError
from .llm import (
    ChatRequest,
    LlmProviderConfig,
    MockChatProvider,
    RecordingProvider,
    TokenBucket,
    complete_chat,
    extract_json,
    make_provider,
    make_request,
    replay_provider,
)
from .metrics import MetricsReport, distribution, mean_std, palette_diversity, palette_similarity
from .naming import ColorDictionary, default_dictionary_path, load_dictionary
from .prompting import (
    PromptConfig,
    build_completion_prompt,
    build_generation_prompt,
    derive_query_text,
    parse_completion_reply,
    parse_generation_reply,
    stable_seed,
    template_set_hash,
)
from .retrieval import (
    ExemplarIndex,
    FallbackEmbedder,
    build_index,
    load_index,
    query_top_k,
    sample_random,
)

_TASKS = ("completion", "generation")
_KIND_ORDER = ("text", "colored_background", "svg", "raster")


@dataclass(frozen=True)
class IngestError:
    line: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.message}"


@dataclass(frozen=True)
class CompletionCorpus:
    """Validated documents plus their split assignment and skipped lines."""

    documents: tuple[Document, ...]
    splits: dict[str, tuple[str, ...]]
    errors: tuple[IngestError, ...] = ()

    def split(self, name: str) -> list[Document]:
        ids = set(self.splits.get(name, ()))
        return [d for d in self.documents if d.id in ids]


@dataclass(frozen=True)
class PatPair:
    """One text-to-palette pair: a description and its five-color target."""

    id: str
    text: str
    palette: tuple[Color, ...]

    def __post_init__(self):
        if not self.id:
            raise ValidationError("pair id must be non-empty")
        if not self.text or not self.text.strip():
            raise ValidationError(f"pair {self.id!r}: text must be non-empty")
        palette = tuple(self.palette)
        object.__setattr__(self, "palette", palette)
        if len(palette) != 5 or not all(isinstance(c, Color) for c in palette):
            raise ValidationError(f"pair {self.id!r}: exactly 5 colors required")


@dataclass(frozen=True)
class PatCorpus:
    pairs: tuple[PatPair, ...]
    splits: dict[str, tuple[str, ...]]
    split_seed: int | None = None

    def split(self, name: str) -> list[PatPair]:
        ids = set(self.splits.get(name, ()))
        return [p for p in self.pairs if p.id in ids]


@dataclass(frozen=True)
class CompletionCase:
    """A masked document ready for the pipeline, rebuildable from
    (document id, k, seed) against the same corpus."""

    document: Document
    record: MaskRecord
    kinds: tuple[str, ...]


@dataclass(frozen=True)
class RunConfig:
    task: str
    corpus_path: Path
    output_dir: Path
    prompt: PromptConfig
    provider: LlmProviderConfig = field(default_factory=lambda: LlmProviderConfig(provider="mock"))
    splits_path: Path | None = None
    index_path: Path | None = None
    dictionary_path: Path | None = None
    split: str = "test"
    ks: tuple[int, ...] = (1, 2, 3)
    seed: int = 0
    parallel: int = 1
    mock_behavior: str | None = None
    record_path: Path | None = None
    replay_path: Path | None = None
    rpm: float | None = None
    formats: tuple[str, ...] = ("json", "csv", "html")

    def __post_init__(self):
        if self.task not in _TASKS:
            raise ValidationError(f"unknown task {self.task!r}")
        if self.prompt.task != self.task:
            raise ValidationError("prompt config task does not match run task")
        for name in ("corpus_path", "output_dir", "splits_path", "index_path",
                     "dictionary_path", "record_path", "replay_path"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, Path(value))
        for name in ("corpus_path", "splits_path", "index_path", "dictionary_path",
                     "replay_path"):
            value = getattr(self, name)
            if value is not None and not value.exists():
                raise ValidationError(f"{name.replace('_', ' ')} does not exist: {value}")
        ks = tuple(self.ks)
        object.__setattr__(self, "ks", ks)
        if not ks or any(k not in (1, 2, 3) for k in ks):
            raise ValidationError("ks must be a non-empty subset of {1, 2, 3}")
        if self.parallel < 1:
            raise ValidationError("parallel must be >= 1")
        if self.mock_behavior is not None and self.provider.provider != "mock":
            raise ValidationError("mock behavior requires the mock provider")
        if self.rpm is not None and self.rpm <= 0:
            raise ValidationError("rpm must be positive")


@dataclass(frozen=True)
class CaseOutcome:
    """Per-case record kept alongside the aggregate report, mainly so the
    HTML emitter can render predicted vs ground-truth swatches."""

    case_id: str
    k: int | None
    kinds: tuple[str, ...]
    predicted: tuple[Color, ...] | None
    truth: tuple[Color, ...]
    exemplar_id: str | None = None
    correct: bool | None = None
    similarity: float | None = None
    failure: str | None = None


@dataclass(frozen=True)
class RunResult:
    report: MetricsReport
    cases: tuple[CaseOutcome, ...]


# --- ingestion ---


def _load_split_manifest(path: Path, known_ids: set[str]) -> dict[str, tuple[str, ...]]:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValidationError(f"split manifest {path} must be a JSON object")
    splits: dict[str, tuple[str, ...]] = {}
    assigned: dict[str, str] = {}
    for name, ids in raw.items():
        if not isinstance(ids, list) or not all(isinstance(i, str) for i in ids):
            raise ValidationError(f"split {name!r} must be a list of document ids")
        for doc_id in ids:
            if doc_id not in known_ids:
                raise ValidationError(f"split {name!r} references unknown id {doc_id!r}")
            if doc_id in assigned:
                raise ValidationError(
                    f"id {doc_id!r} assigned to both {assigned[doc_id]!r} and {name!r}"
                )
            assigned[doc_id] = name
        splits[name] = tuple(ids)
    missing = sorted(known_ids - set(assigned))
    if missing:
        raise ValidationError(f"split manifest leaves ids unassigned: {missing[:5]}")
    return splits


def ingest_completion_corpus(
    path: str | Path, splits_path: str | Path | None = None
) -> CompletionCorpus:
    """Read a JSONL corpus of documents plus its split manifest.

    Invalid lines are collected with their line numbers; the run aborts if
    more than 1% of lines fail validation.  Without a manifest (sibling
    splits.json by default) every document lands in the test split.
    """
    path = Path(path)
    documents: list[Document] = []
    errors: list[IngestError] = []
    total = 0
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            total += 1
            try:
                documents.append(parse_document(line))
            except ValidationError as exc:
                errors.append(IngestError(line_no, str(exc)))
    if total == 0:
        raise ValidationError(f"corpus {path} contains no documents")
    if len(errors) * 100 > total:
        head = "; ".join(str(e) for e in errors[:5])
        raise ValidationError(
            f"{len(errors)} of {total} lines invalid (>1%), aborting: {head}"
        )
    seen: set[str] = set()
    for d in documents:
        if d.id in seen:
            raise ValidationError(f"duplicate document id {d.id!r} in corpus")
        seen.add(d.id)

    if splits_path is None:
        candidate = path.parent / "splits.json"
        splits_path = candidate if candidate.exists() else None
    if splits_path is not None:
        splits = _load_split_manifest(Path(splits_path), {d.id for d in documents})
    else:
        splits = {"test": tuple(d.id for d in documents)}
    return CompletionCorpus(tuple(documents), splits, tuple(errors))


def _pat_pair_from_value(value: dict, where: str) -> tuple[PatPair, str | None]:
    for key in ("id", "text", "palette"):
        if key not in value:
            raise ValidationError(f"{where}: missing {key!r}")
    raw = value["palette"]
    if not isinstance(raw, list):
        raise ValidationError(f"{where}: palette must be a list")
    if len(raw) != 5:
        raise ValidationError(f"{where}: expected 5 colors, got {len(raw)}")
    colors = tuple(hex_to_color(v) for v in raw)
    split = value.get("split")
    if split is not None and not isinstance(split, str):
        raise ValidationError(f"{where}: split must be a string")
    return PatPair(str(value["id"]), str(value["text"]), colors), split


def _read_pat_rows(path: Path) -> list[tuple[dict, int]]:
    rows: list[tuple[dict, int]] = []
    if path.suffix.lower() == ".csv":
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            fields = reader.fieldnames or []
            color_cols = [f for f in fields if f.startswith("color")]
            for line_no, row in enumerate(reader, start=2):
                value = {
                    "id": row.get("id"),
                    "text": row.get("text"),
                    "palette": [row[c] for c in color_cols if row.get(c)],
                }
                if row.get("split"):
                    value["split"] = row["split"]
                rows.append((value, line_no))
        return rows
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                value = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"line {line_no}: JSON syntax error: {exc.msg}")
            if not isinstance(value, dict):
                raise ValidationError(f"line {line_no}: record must be a JSON object")
            rows.append((value, line_no))
    return rows


def ingest_pat(path: str | Path, split_seed: int = 0) -> PatCorpus:
    """Read text-to-palette pairs from CSV or JSONL.

    Records may carry an explicit split column; otherwise a seeded shuffle
    assigns floor(n/10) pairs each to val and test, the rest to train, and
    the seed is recorded in the corpus.
    """
    path = Path(path)
    rows = _read_pat_rows(path)
    if not rows:
        raise ValidationError(f"pat corpus {path} contains no pairs")
    pairs: list[PatPair] = []
    explicit: dict[str, str] = {}
    errors: list[str] = []
    for value, line_no in rows:
        try:
            pair, split = _pat_pair_from_value(value, f"line {line_no}")
            pairs.append(pair)
            if split is not None:
                explicit[pair.id] = split
        except ValidationError as exc:
            errors.append(str(exc))
    if errors:
        raise ValidationError(f"{len(errors)} invalid pairs: " + "; ".join(errors[:5]))
    seen: set[str] = set()
    for p in pairs:
        if p.id in seen:
            raise ValidationError(f"duplicate pair id {p.id!r}")
        seen.add(p.id)

    if explicit:
        if len(explicit) != len(pairs):
            raise ValidationError("either all pairs or none may carry a split")
        splits: dict[str, list[str]] = {}
        for p in pairs:
            splits.setdefault(explicit[p.id], []).append(p.id)
        return PatCorpus(tuple(pairs), {k: tuple(v) for k, v in splits.items()}, None)

    order = list(range(len(pairs)))
    random.Random(split_seed).shuffle(order)
    n_each = len(pairs) // 10
    test = [pairs[i].id for i in order[:n_each]]
    val = [pairs[i].id for i in order[n_each : 2 * n_each]]
    train = [pairs[i].id for i in order[2 * n_each :]]
    return PatCorpus(
        tuple(pairs),
        {"train": tuple(train), "val": tuple(val), "test": tuple(test)},
        split_seed,
    )


# --- exemplar pools ---


def completion_exemplar_rows(documents: list[Document]) -> list[tuple[str, str, str]]:
    return [(d.id, derive_query_text(d), serialize_document(d)) for d in documents]


def generation_exemplar_rows(pairs: list[PatPair]) -> list[tuple[str, str, str]]:
    rows = []
    for p in pairs:
        payload = json.dumps(
            {"description": p.text, "palette": [color_to_hex(c) for c in p.palette]},
            ensure_ascii=False,
        )
        rows.append((p.id, p.text, payload))
    return rows


def make_case(document: Document, k: int, global_seed: int) -> CompletionCase:
    """Mask one document for evaluation; the case seed folds in the document
    id and k so parallelism and case order never change the masking."""
    masked, record = mask_palette(document, k, stable_seed(global_seed, document.id, k))
    kinds = tuple(
        document.element_by_id(e.element_id).kind for e in record.entries
    )
    return CompletionCase(masked, record, kinds)


# --- mock oracles ---


def _fill_colors(behavior: str, expected: int, context: str) -> list[Color]:
    colors = [hex_to_color(tok.strip()) for tok in behavior.split(",")]
    if len(colors) != expected:
        raise ValidationError(
            f"{context} needs {expected} comma-separated hex colors, got {len(colors)}"
        )
    return colors


def _payload_json(req: ChatRequest) -> dict:
    for line in reversed(req.messages[-1].content.splitlines()):
        if line.startswith("{"):
            return json.loads(line)
    raise ValidationError("request carries no JSON document payload")


def _split_entries(body: str) -> list[str]:
    """Split a rendered palette list on top-level commas only; RGB and
    word-hex entries carry commas or parens of their own."""
    parts: list[str] = []
    depth = 0
    current: list[str] = []
    for ch in body:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(current).strip())
            current = []
        else:
            current.append(ch)
    if current:
        parts.append("".join(current).strip())
    return parts


def _payload_flat(req: ChatRequest) -> tuple[str, list[tuple[str, int]]]:
    lines = req.messages[-1].content.splitlines()
    start = None
    for i in range(len(lines) - 1, -1, -1):
        if lines[i].startswith("Document: "):
            start = i
            break
    if start is None:
        raise ValidationError("request carries no flat document payload")
    doc_id = lines[start][len("Document: ") :]
    try:
        palettes_at = lines.index("Palettes:", start)
    except ValueError:
        raise ValidationError("flat payload has no palette block") from None
    masked: list[tuple[str, int]] = []
    for line in lines[palettes_at + 1 :]:
        if ": [" not in line:
            continue
        element_id, _, body = line.partition(": [")
        for slot, entry in enumerate(_split_entries(body[:-1])):
            if entry == "_":
                masked.append((element_id, slot))
    return doc_id, masked


def completion_oracle(
    documents: dict[str, Document],
    prompt: PromptConfig,
    dictionary: ColorDictionary | None,
    behavior: str,
):
    """Reply generator for the mock provider on the completion task.

    "echo" answers with each masked slot's ground truth (recovered from the
    corpus, not from the prompt); a single hex answers with that color
    everywhere.  Both honor the configured structure and representation.
    """
    from .codec import encode_color

    fixed = None if behavior == "echo" else _fill_colors(behavior, 1, "completion mock")[0]
    rep = prompt.representation

    def truth(doc_id: str, element_id: str, slot: int) -> Color:
        if fixed is not None:
            return fixed
        doc = documents[doc_id]
        color = doc.element_by_id(element_id).palette.slots[slot]
        if color is None:
            raise ValidationError(f"{doc_id}/{element_id}[{slot}] has no ground truth")
        return color

    def oracle(req: ChatRequest) -> str:
        lines = [l for l in req.messages[-1].content.splitlines() if l.strip()]
        if not lines[-1].startswith("{"):
            doc_id, masked = _payload_flat(req)
            values = [
                encode_color(truth(doc_id, element_id, slot), rep, dictionary)
                for element_id, slot in masked
            ]
            return json.dumps(values, ensure_ascii=False)
        raw = _payload_json(req)
        doc_id = raw["id"]
        for element in raw["elements"]:
            palette = element["color_palette"]
            for slot, entry in enumerate(palette):
                if entry == "[MASK]":
                    palette[slot] = encode_color(
                        truth(doc_id, element["id"], slot), rep, dictionary
                    )
        return json.dumps(raw, ensure_ascii=False)

    return oracle


def generation_oracle(
    pairs: dict[str, PatPair],
    prompt: PromptConfig,
    dictionary: ColorDictionary | None,
    behavior: str,
):
    """Reply generator for the generation task: "echo" answers with the
    pair's ground-truth palette, otherwise with 5 fixed colors."""
    from .codec import encode_color

    fixed = None if behavior == "echo" else _fill_colors(behavior, 5, "generation mock")
    rep = prompt.representation

    def oracle(req: ChatRequest) -> str:
        if fixed is not None:
            palette = fixed
        else:
            text = None
            for line in reversed(req.messages[-1].content.splitlines()):
                if line.startswith("Description: "):
                    text = line[len("Description: ") :]
                    break
            if text is None or text not in pairs:
                raise ValidationError("request carries no known description")
            palette = list(pairs[text].palette)
        return json.dumps(
            [encode_color(c, rep, dictionary) for c in palette], ensure_ascii=False
        )

    return oracle


# --- runners ---


def _load_dictionary(cfg: RunConfig) -> ColorDictionary:
    return load_dictionary(cfg.dictionary_path or default_dictionary_path())


def _resolve_provider(cfg: RunConfig, oracle):
    if cfg.replay_path is not None:
        provider = replay_provider(cfg.replay_path)
    elif cfg.provider.provider == "mock" and cfg.mock_behavior is not None:
        provider = MockChatProvider(mode="echo", oracle=oracle)
    else:
        provider = make_provider(cfg.provider)
    if cfg.record_path is not None:
        provider = RecordingProvider(provider, cfg.record_path)
    return provider


def _build_exemplar_index(cfg: RunConfig, rows: list[tuple[str, str, str]]) -> ExemplarIndex | None:
    if cfg.prompt.exemplar_policy == "none":
        return None
    if cfg.index_path is not None:
        return load_index(cfg.index_path)
    if not rows:
        raise ValidationError("train split is empty; cannot retrieve exemplars")
    return _build_index_quiet(rows)


def _build_index_quiet(rows: list[tuple[str, str, str]]) -> ExemplarIndex:
    return build_index(rows, FallbackEmbedder())


def _pick_exemplars(cfg: RunConfig, index: ExemplarIndex | None, query: str, case_seed: int):
    if cfg.prompt.exemplar_policy == "none" or index is None:
        return None
    if cfg.prompt.exemplar_policy == "random":
        return [
            sample_random(index, stable_seed(case_seed, "exemplar", i))
            for i in range(cfg.prompt.exemplar_count)
        ]
    ranked = query_top_k(index, query, cfg.prompt.exemplar_count)
    return [ex for ex, _ in ranked]


def _breakdown(cases: list[CaseOutcome]) -> dict[str, tuple[float, float]]:
    """Per-element-kind accuracy and case share over single-mask cases."""
    singles = [c for c in cases if c.k == 1 and c.failure != "provider"]
    table: dict[str, tuple[float, float]] = {}
    for kind in _KIND_ORDER:
        of_kind = [c for c in singles if c.kinds[0] == kind]
        if not of_kind:
            continue
        correct = sum(1 for c in of_kind if c.correct)
        table[kind] = (
            100.0 * correct / len(of_kind),
            100.0 * len(of_kind) / len(singles),
        )
    return table


def _base_metadata(cfg: RunConfig, dictionary: ColorDictionary, index_size: int) -> dict:
    return {
        "task": cfg.task,
        "split": cfg.split,
        "seed": cfg.seed,
        "representation": cfg.prompt.representation.label,
        "profile_variant": cfg.prompt.profile_variant,
        "structure": cfg.prompt.structure,
        "exemplar_policy": cfg.prompt.exemplar_policy,
        "exemplar_count": cfg.prompt.exemplar_count,
        "provider": cfg.provider.provider,
        "model": cfg.provider.resolved_model(),
        "mock_behavior": cfg.mock_behavior,
        "corpus": cfg.corpus_path.name,
        "template_set": template_set_hash(),
        "dictionary_size": len(dictionary),
        "index_size": index_size,
    }


def run_completion(cfg: RunConfig) -> RunResult:
    """Mask, prompt, complete, and score every test document at each k."""
    if cfg.task != "completion":
        raise ValidationError("config task must be completion")
    corpus = ingest_completion_corpus(cfg.corpus_path, cfg.splits_path)
    test_docs = corpus.split(cfg.split)
    if not test_docs:
        raise ValidationError(f"split {cfg.split!r} is empty")
    dictionary = _load_dictionary(cfg)
    embedder = FallbackEmbedder()
    index = _build_exemplar_index(cfg, completion_exemplar_rows(corpus.split("train")))
    oracle = None
    if cfg.mock_behavior is not None:
        by_id = {d.id: d for d in corpus.documents}
        oracle = completion_oracle(by_id, cfg.prompt, dictionary, cfg.mock_behavior)
    provider = _resolve_provider(cfg, oracle)
    limiter = TokenBucket(cfg.rpm) if cfg.rpm else None

    jobs = [
        (doc, k)
        for k in cfg.ks
        for doc in test_docs
        if len(doc.filled_slots()) >= k
    ]

    def run_case(job: tuple[Document, int]) -> CaseOutcome:
        doc, k = job
        case = make_case(doc, k, cfg.seed)
        truth = tuple(e.ground_truth for e in case.record.entries)
        case_seed = stable_seed(cfg.seed, doc.id, k)
        try:
            exemplars = _pick_exemplars(
                cfg, index, derive_query_text(case.document), case_seed
            )
            bundle = build_completion_prompt(case.document, exemplars, cfg.prompt, dictionary)
            if limiter is not None:
                limiter.acquire()
            resp = complete_chat(provider, make_request(bundle.system, bundle.user),
                                 cfg.provider.retry)
            value = extract_json(resp.content)
            predicted = parse_completion_reply(
                value, case.record, cfg.prompt.representation, dictionary, embedder,
                cfg.prompt.structure,
            )
        except ReplyError:
            return CaseOutcome(doc.id, k, case.kinds, None, truth,
                               correct=False, failure="parse")
        except ProviderError:
            return CaseOutcome(doc.id, k, case.kinds, None, truth, failure="provider")
        correct = all(quantize(p) == quantize(t) for p, t in zip(predicted, truth))
        exemplar_id = exemplars[0].id if exemplars else None
        return CaseOutcome(doc.id, k, case.kinds, tuple(predicted), truth,
                           exemplar_id=exemplar_id, correct=correct)

    outcomes = _run_all(run_case, jobs, cfg.parallel)

    accuracy: dict[int, float] = {}
    dist: dict[int, float] = {}
    counts: dict[int, int] = {}
    parse_failures = 0
    incomplete = False
    for k in cfg.ks:
        of_k = [c for c in outcomes if c.k == k]
        scored = [c for c in of_k if c.failure != "provider"]
        incomplete = incomplete or len(scored) < len(of_k)
        parse_failures += sum(1 for c in scored if c.failure == "parse")
        counts[k] = len(of_k)
        if scored:
            accuracy[k] = 100.0 * sum(1 for c in scored if c.correct) / len(scored)
        predicted = [c for outcome in scored if outcome.predicted for c in outcome.predicted]
        if predicted:
            dist[k] = distribution(predicted)

    report = MetricsReport(
        task="completion",
        accuracy=accuracy,
        distribution=dist,
        element_breakdown=_breakdown(outcomes),
        case_counts=counts,
        parse_failures=parse_failures,
        incomplete=incomplete,
        metadata=_base_metadata(cfg, dictionary, len(index) if index else 0),
    )
    return RunResult(report, tuple(outcomes))


def run_generation(cfg: RunConfig) -> RunResult:
    """Prompt and score a five-color palette for every test pair."""
    if cfg.task != "generation":
        raise ValidationError("config task must be generation")
    corpus = ingest_pat(cfg.corpus_path, split_seed=cfg.seed)
    test_pairs = corpus.split(cfg.split)
    if not test_pairs:
        raise ValidationError(f"split {cfg.split!r} is empty")
    dictionary = _load_dictionary(cfg)
    embedder = FallbackEmbedder()
    index = _build_exemplar_index(cfg, generation_exemplar_rows(corpus.split("train")))
    oracle = None
    if cfg.mock_behavior is not None:
        by_text = {p.text.strip(): p for p in corpus.pairs}
        oracle = generation_oracle(by_text, cfg.prompt, dictionary, cfg.mock_behavior)
    provider = _resolve_provider(cfg, oracle)
    limiter = TokenBucket(cfg.rpm) if cfg.rpm else None

    def run_case(pair: PatPair) -> CaseOutcome:
        case_seed = stable_seed(cfg.seed, pair.id, "generation")
        try:
            exemplars = _pick_exemplars(cfg, index, pair.text, case_seed)
            bundle = build_generation_prompt(pair.text, exemplars, cfg.prompt, dictionary)
            if limiter is not None:
                limiter.acquire()
            resp = complete_chat(provider, make_request(bundle.system, bundle.user),
                                 cfg.provider.retry)
            palette = parse_generation_reply(
                extract_json(resp.content), cfg.prompt.representation, dictionary, embedder
            )
        except ReplyError:
            return CaseOutcome(pair.id, None, (), None, pair.palette, failure="parse")
        except ProviderError:
            return CaseOutcome(pair.id, None, (), None, pair.palette, failure="provider")
        predicted = tuple(palette.slots)
        similarity = palette_similarity(palette, _as_palette(pair.palette))
        exemplar_id = exemplars[0].id if exemplars else None
        return CaseOutcome(pair.id, None, (), predicted, pair.palette,
                           exemplar_id=exemplar_id, similarity=similarity)

    outcomes = _run_all(run_case, test_pairs, cfg.parallel)

    scored = [c for c in outcomes if c.failure is None]
    parse_failures = sum(1 for c in outcomes if c.failure == "parse")
    incomplete = any(c.failure == "provider" for c in outcomes)
    similarity: dict[str, float] = {}
    diversity = None
    metadata = _base_metadata(cfg, dictionary, len(index) if index else 0)
    if scored:
        sim_mean, sim_std = mean_std([c.similarity for c in scored])
        similarity = {"mean": sim_mean, "std": sim_std}
        div_mean, div_std = mean_std(
            [palette_diversity(_as_palette(c.predicted)) for c in scored]
        )
        diversity = (div_mean, div_std)
    gt_mean, gt_std = mean_std(
        [palette_diversity(_as_palette(p.palette)) for p in test_pairs]
    )
    metadata["ground_truth_diversity_mean"] = gt_mean
    metadata["ground_truth_diversity_std"] = gt_std

    report = MetricsReport(
        task="generation",
        similarity=similarity,
        diversity=diversity,
        case_counts={"pairs": len(outcomes)},
        parse_failures=parse_failures,
        incomplete=incomplete,
        metadata=metadata,
    )
    return RunResult(report, tuple(outcomes))


def _as_palette(colors):
    from .document import Palette

    return Palette(tuple(colors))


def _run_all(fn, jobs, parallel: int) -> list:
    if parallel == 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=parallel) as pool:
        return list(pool.map(fn, jobs))


def run_benchmark(cfg: RunConfig) -> RunResult:
    if cfg.task == "completion":
        return run_completion(cfg)
    return run_generation(cfg)


# --- ablation ---


@dataclass(frozen=True)
class AblationArm:
    name: str
    overrides: dict

    def apply(self, prompt: PromptConfig) -> PromptConfig:
        fields = dict(self.overrides)
        if "representation" in fields and isinstance(fields["representation"], str):
            fields["representation"] = Representation.from_string(fields["representation"])
        return replace(prompt, **fields)


def run_ablation(cfg: RunConfig, arms: list[AblationArm]) -> list[tuple[str, RunResult]]:
    """Run every arm of a prompt-space sweep from one base config."""
    if not arms:
        raise ValidationError("ablation needs at least one arm")
    names = [a.name for a in arms]
    if len(set(names)) != len(names):
        raise ValidationError("ablation arm names must be unique")
    rows = []
    for arm in arms:
        arm_cfg = replace(cfg, prompt=arm.apply(cfg.prompt))
        rows.append((arm.name, run_benchmark(arm_cfg)))
    return rows
