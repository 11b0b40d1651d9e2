"""Command-line entry points.

Exit codes: 0 success, 2 validation/usage error, 3 provider error,
4 incomplete run (a report was written but some cases failed on the
provider side).
"""

from __future__ import annotations

import json
import sys
from dataclasses import replace
from pathlib import Path

import click

from .bench import (
    AblationArm,
    RunConfig,
    completion_exemplar_rows,
    completion_oracle,
    generation_exemplar_rows,
    generation_oracle,
    ingest_completion_corpus,
    ingest_pat,
    run_ablation,
    run_benchmark,
)
from .codec import decode_color, encode_color
from .colors import Representation, color_to_hex
from .document import fill_slots, mask_palette, parse_document, serialize_document
from .errors import IncompleteRunError, ProviderError, ReplyError, ValidationError
from .extraction import extract_palette, load_pixels
from .llm import (
    LlmProviderConfig,
    MockChatProvider,
    RecordingProvider,
    RetryPolicy,
    complete_chat,
    extract_json,
    make_provider,
    make_request,
    replay_provider,
)
from .naming import default_dictionary_path, load_dictionary
from .prompting import (
    PromptConfig,
    build_completion_prompt,
    build_generation_prompt,
    derive_query_text,
    extract_slot_colors,
    parse_generation_reply,
)
from .reporting import ablation_csv, emit_report, load_report
from .retrieval import FallbackEmbedder, build_index, load_index, query_top_k, save_index
from .service import ServiceConfig, run_service

_PATH = click.Path(path_type=Path)
_EXISTING = click.Path(exists=True, dir_okay=False, path_type=Path)


def _read_config(path: Path) -> dict:
    if path.suffix.lower() == ".json":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    elif path.suffix.lower() == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    else:
        raise ValidationError(f"config {path} must be .toml or .json")
    if not isinstance(data, dict):
        raise ValidationError(f"config {path} must hold a table/object")
    return data


def _provider_config(data: dict) -> LlmProviderConfig:
    p = data.get("provider", {})
    retry = RetryPolicy(
        max_attempts=p.get("retry_attempts", 3),
        base_backoff=p.get("backoff", 0.5),
    )
    return LlmProviderConfig(
        provider=p.get("kind", "mock"),
        model=p.get("model", ""),
        endpoint=p.get("endpoint", ""),
        api_key=p.get("api_key"),
        temperature=p.get("temperature", 0.0),
        max_tokens=p.get("max_tokens", 1024),
        timeout=p.get("timeout", 30.0),
        retry=retry,
    )


def _prompt_config(task: str, data: dict, representation=None, profile=None,
                   structure=None, exemplars=None, exemplar_count=None) -> PromptConfig:
    p = data.get("prompt", {})
    rep = representation or p.get("representation")
    return PromptConfig(
        task=task,
        representation=Representation.from_string(rep) if rep else None,
        profile_variant=profile or p.get("profile", "short"),
        structure=structure or p.get("structure", "json"),
        exemplar_policy=exemplars or p.get("exemplars", "similarity"),
        exemplar_count=exemplar_count if exemplar_count is not None
        else p.get("exemplar_count", 1),
    )


_ARM_KEYS = {
    "representation": "representation",
    "profile": "profile_variant",
    "structure": "structure",
    "exemplars": "exemplar_policy",
    "exemplar_count": "exemplar_count",
}


def _ablation_arms(data: dict) -> list[AblationArm]:
    arms = []
    for raw in data.get("arms", []):
        if "name" not in raw:
            raise ValidationError("every ablation arm needs a name")
        overrides = {}
        for key, value in raw.items():
            if key == "name":
                continue
            if key not in _ARM_KEYS:
                raise ValidationError(f"arm {raw['name']!r}: unknown key {key!r}")
            overrides[_ARM_KEYS[key]] = value
        arms.append(AblationArm(raw["name"], overrides))
    return arms


def _require(value, name: str):
    if value is None:
        raise ValidationError(f"missing {name}: pass --{name} or set it in --config")
    return value


@click.group()
@click.option("--config", "config_path", type=_EXISTING, default=None,
              help="TOML or JSON config file.")
@click.option("--seed", type=int, default=None, help="Global random seed.")
@click.option("--parallel", type=int, default=None, help="Worker pool size.")
@click.option("--record", "record_path", type=_PATH, default=None,
              help="Append provider exchanges to this JSONL audit log.")
@click.option("--replay", "replay_path", type=_EXISTING, default=None,
              help="Serve provider replies from a recorded audit log.")
@click.pass_context
def cli(ctx, config_path, seed, parallel, record_path, replay_path):
    """Palette completion and generation toolkit."""
    data = _read_config(config_path) if config_path else {}
    ctx.obj = {
        "data": data,
        "seed": seed if seed is not None else data.get("seed", 0),
        "parallel": parallel if parallel is not None else data.get("parallel", 1),
        "record": record_path or _opt_path(data, "record"),
        "replay": replay_path or _opt_path(data, "replay"),
    }


def _opt_path(data: dict, key: str) -> Path | None:
    value = data.get(key)
    return Path(value) if value else None


@cli.command("convert-color")
@click.argument("value")
@click.option("--from", "source", required=True, help="Input representation.")
@click.option("--to", "target", required=True, help="Output representation.")
@click.option("--dictionary", type=_EXISTING, default=None)
def convert_color_cmd(value, source, target, dictionary):
    """Re-render a color VALUE between representations."""
    dict_ = load_dictionary(dictionary or default_dictionary_path())
    color = decode_color(value, Representation.from_string(source), dict_, FallbackEmbedder())
    click.echo(encode_color(color, Representation.from_string(target), dict_))


@cli.command("extract-palette")
@click.argument("image", type=_EXISTING)
@click.option("-n", "--max-colors", type=int, default=5, show_default=True)
def extract_palette_cmd(image, max_colors):
    """Print the dominant colors of IMAGE, one hex code per line."""
    palette = extract_palette(load_pixels(image), max_colors)
    for color in palette.slots:
        click.echo(color_to_hex(color))


@cli.command("mask")
@click.argument("document", type=_EXISTING)
@click.option("-k", type=int, default=1, show_default=True,
              help="Number of slots to mask.")
@click.option("--record-out", type=_PATH, default=None,
              help="Also write the mask record as JSON.")
@click.pass_context
def mask_cmd(ctx, document, k, record_out):
    """Mask K palette slots of DOCUMENT and print the result."""
    doc = parse_document(document.read_text(encoding="utf-8"))
    masked, record = mask_palette(doc, k, ctx.obj["seed"])
    click.echo(serialize_document(masked))
    if record_out:
        record_out.write_text(json.dumps({
            "document_id": record.document_id,
            "seed": record.seed,
            "k": record.k,
            "entries": [
                {
                    "element_id": e.element_id,
                    "slot_index": e.slot_index,
                    "ground_truth": color_to_hex(e.ground_truth) if e.ground_truth else None,
                }
                for e in record.entries
            ],
        }, indent=2) + "\n", encoding="utf-8")


@cli.command("build-index")
@click.argument("corpus", type=_EXISTING)
@click.option("-o", "--out", type=_PATH, required=True)
@click.option("--task", type=click.Choice(["completion", "generation"]),
              default="completion", show_default=True)
@click.option("--splits", type=_EXISTING, default=None)
@click.option("--split", "split_name", default="train", show_default=True)
def build_index_cmd(corpus, out, task, splits, split_name):
    """Embed an exemplar corpus into a searchable index file."""
    if task == "completion":
        ingested = ingest_completion_corpus(corpus, splits)
        pool = ingested.split(split_name) if split_name in ingested.splits else list(ingested.documents)
        rows = completion_exemplar_rows(pool)
    else:
        ingested = ingest_pat(corpus)
        pool = ingested.split(split_name) if split_name in ingested.splits else list(ingested.pairs)
        rows = generation_exemplar_rows(pool)
    index = build_index(rows, FallbackEmbedder())
    save_index(index, out)
    click.echo(f"indexed {len(index)} exemplars -> {out}")


def _one_shot_provider(ctx, prompt: PromptConfig, task: str, mock: str | None,
                       dictionary):
    if ctx.obj["replay"] is not None:
        provider = replay_provider(ctx.obj["replay"])
    elif mock is not None:
        oracle = (completion_oracle({}, prompt, dictionary, mock) if task == "completion"
                  else generation_oracle({}, prompt, dictionary, mock))
        provider = MockChatProvider(mode="echo", oracle=oracle)
    else:
        provider = make_provider(_provider_config(ctx.obj["data"]))
    if ctx.obj["record"] is not None:
        provider = RecordingProvider(provider, ctx.obj["record"])
    return provider


_PROMPT_OPTIONS = (
    click.option("--representation", default=None,
                 help="word | hexcode | rgb | cielab | wordhex-h | wordhex-w"),
    click.option("--profile", default=None, help="short | long"),
    click.option("--structure", default=None, help="json | flat"),
    click.option("--exemplars", default=None, help="similarity | random | none"),
    click.option("--exemplar-count", type=int, default=None),
)


def _with_prompt_options(fn):
    for option in reversed(_PROMPT_OPTIONS):
        fn = option(fn)
    return fn


@cli.command("complete")
@click.argument("document", type=_EXISTING)
@click.option("--index", "index_path", type=_EXISTING, default=None,
              help="Exemplar index built with build-index.")
@click.option("--mock", default=None, help="Mock provider fill color (#rrggbb).")
@click.option("--dictionary", type=_EXISTING, default=None)
@_with_prompt_options
@click.pass_context
def complete_cmd(ctx, document, index_path, mock, dictionary,
                 representation, profile, structure, exemplars, exemplar_count):
    """Fill the masked palette slots of DOCUMENT; prints JSON."""
    doc = parse_document(document.read_text(encoding="utf-8"))
    targets = doc.masked_slots()
    if not targets:
        raise ValidationError(f"document {doc.id!r} has no masked slots")
    if exemplars is None and index_path is None:
        exemplars = "none"
    prompt = _prompt_config("completion", ctx.obj["data"], representation,
                            profile, structure, exemplars, exemplar_count)
    dict_ = load_dictionary(dictionary or default_dictionary_path())
    embedder = FallbackEmbedder()

    chosen = None
    if prompt.exemplar_policy != "none":
        index = load_index(_require(index_path, "index"))
        ranked = query_top_k(index, derive_query_text(doc), max(prompt.exemplar_count, 1))
        chosen = [ex for ex, _ in ranked]

    provider = _one_shot_provider(ctx, prompt, "completion", mock, dict_)
    bundle = build_completion_prompt(doc, chosen, prompt, dict_)
    resp = complete_chat(provider, make_request(bundle.system, bundle.user),
                         _provider_config(ctx.obj["data"]).retry)
    colors = extract_slot_colors(extract_json(resp.content), targets,
                                 prompt.representation, dict_, embedder, prompt.structure)
    click.echo(json.dumps({
        "colors": [color_to_hex(c) for c in colors],
        "document": json.loads(serialize_document(fill_slots(doc, targets, colors))),
        "exemplar_id": chosen[0].id if chosen else None,
    }, ensure_ascii=False))


@cli.command("generate")
@click.argument("text")
@click.option("--index", "index_path", type=_EXISTING, default=None,
              help="Exemplar index built with build-index --task generation.")
@click.option("--mock", default=None,
              help="Mock provider palette (5 comma-separated hex colors).")
@click.option("--dictionary", type=_EXISTING, default=None)
@_with_prompt_options
@click.pass_context
def generate_cmd(ctx, text, index_path, mock, dictionary,
                 representation, profile, structure, exemplars, exemplar_count):
    """Generate a five-color palette for TEXT; prints JSON."""
    if exemplars is None and index_path is None:
        exemplars = "none"
    prompt = _prompt_config("generation", ctx.obj["data"], representation,
                            profile, structure, exemplars, exemplar_count)
    dict_ = load_dictionary(dictionary or default_dictionary_path())

    chosen = None
    if prompt.exemplar_policy != "none":
        index = load_index(_require(index_path, "index"))
        ranked = query_top_k(index, text, max(prompt.exemplar_count, 1))
        chosen = [ex for ex, _ in ranked]

    provider = _one_shot_provider(ctx, prompt, "generation", mock, dict_)
    bundle = build_generation_prompt(text, chosen, prompt, dict_)
    resp = complete_chat(provider, make_request(bundle.system, bundle.user),
                         _provider_config(ctx.obj["data"]).retry)
    palette = parse_generation_reply(extract_json(resp.content),
                                     prompt.representation, dict_, FallbackEmbedder())
    click.echo(json.dumps({
        "palette": [color_to_hex(c) for c in palette.slots],
        "exemplar_id": chosen[0].id if chosen else None,
    }, ensure_ascii=False))


def _run_config(ctx, task: str, corpus, splits, index, dictionary, out, split,
                mock, formats, rpm, representation, profile, structure,
                exemplars, exemplar_count) -> RunConfig:
    data = ctx.obj["data"]
    prompt = _prompt_config(task, data, representation, profile, structure,
                            exemplars, exemplar_count)
    fmt = formats or data.get("formats")
    if isinstance(fmt, str):
        fmt = tuple(part.strip() for part in fmt.split(",") if part.strip())
    return RunConfig(
        task=task,
        corpus_path=_require(corpus or _opt_path(data, "corpus"), "corpus"),
        splits_path=splits or _opt_path(data, "splits"),
        index_path=index or _opt_path(data, "index"),
        dictionary_path=dictionary or _opt_path(data, "dictionary"),
        output_dir=out or _opt_path(data, "output") or Path("out"),
        split=split or data.get("split", "test"),
        prompt=prompt,
        provider=_provider_config(data),
        mock_behavior=mock if mock is not None else data.get("mock"),
        seed=ctx.obj["seed"],
        parallel=ctx.obj["parallel"],
        record_path=ctx.obj["record"],
        replay_path=ctx.obj["replay"],
        rpm=rpm if rpm is not None else data.get("rpm"),
        formats=tuple(fmt) if fmt else ("json", "csv", "html"),
    )


def _eval_options(fn):
    options = (
        click.option("--corpus", type=_EXISTING, default=None),
        click.option("--splits", type=_EXISTING, default=None),
        click.option("--index", type=_EXISTING, default=None),
        click.option("--dictionary", type=_EXISTING, default=None),
        click.option("--out", type=_PATH, default=None),
        click.option("--split", default=None),
        click.option("--mock", default=None,
                     help='Mock provider: "echo" or fixed hex color(s).'),
        click.option("--formats", default=None, help="Comma-joined: json,csv,html."),
        click.option("--rpm", type=float, default=None),
    ) + _PROMPT_OPTIONS
    for option in reversed(options):
        fn = option(fn)
    return fn


def _run_eval(ctx, task: str, **kwargs):
    cfg = _run_config(ctx, task, **kwargs)
    arms = _ablation_arms(ctx.obj["data"])
    if arms:
        rows = run_ablation(cfg, arms)
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
        for name, result in rows:
            emit_report(result.report, cfg.output_dir, cfg.formats,
                        result.cases, basename=f"report_{name}")
        table = ablation_csv([(name, result.report) for name, result in rows])
        path = cfg.output_dir / "ablation.csv"
        path.write_text(table, encoding="utf-8")
        click.echo(f"{len(rows)} arms -> {path}")
        if any(result.report.incomplete for _, result in rows):
            raise IncompleteRunError("some arms have provider failures")
        return

    result = run_benchmark(cfg)
    paths = emit_report(result.report, cfg.output_dir, cfg.formats, result.cases)
    report = result.report
    for k in sorted(report.accuracy):
        click.echo(f"accuracy[{k}] = {report.accuracy[k]:.2f}")
    for k in sorted(report.distribution):
        click.echo(f"distribution[{k}] = {report.distribution[k]:.2f}")
    if report.similarity:
        click.echo(f"similarity = {report.similarity['mean']:.2f} "
                   f"(std {report.similarity['std']:.2f})")
    if report.diversity is not None:
        click.echo(f"diversity = {report.diversity[0]:.2f} "
                   f"(std {report.diversity[1]:.2f})")
    if report.parse_failures:
        click.echo(f"parse failures = {report.parse_failures}")
    for fmt in cfg.formats:
        click.echo(f"wrote {paths[fmt]}")
    if report.incomplete:
        raise IncompleteRunError("some cases failed on the provider side")


@cli.command("eval-completion")
@_eval_options
@click.pass_context
def eval_completion_cmd(ctx, **kwargs):
    """Run the palette completion benchmark and write reports."""
    _run_eval(ctx, "completion", **kwargs)


@cli.command("eval-generation")
@_eval_options
@click.pass_context
def eval_generation_cmd(ctx, **kwargs):
    """Run the palette generation benchmark and write reports."""
    _run_eval(ctx, "generation", **kwargs)


@cli.command("report")
@click.argument("report_file", type=_EXISTING)
@click.option("-o", "--out", type=_PATH, required=True)
@click.option("--formats", default="csv,html", show_default=True)
def report_cmd(report_file, out, formats):
    """Re-emit a JSON report in other formats."""
    report = load_report(report_file)
    fmt = tuple(part.strip() for part in formats.split(",") if part.strip())
    paths = emit_report(report, out, fmt)
    for path in paths.values():
        click.echo(f"wrote {path}")


@cli.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8765, show_default=True)
@click.option("--index", "index_path", type=_EXISTING, default=None)
@click.option("--corpus", type=_EXISTING, default=None)
@click.option("--splits", type=_EXISTING, default=None)
@click.option("--pairs", type=_EXISTING, default=None)
@click.option("--dictionary", type=_EXISTING, default=None)
@click.option("--mock-complete", default=None,
              help="Mock fill color for /v1/complete.")
@click.option("--mock-generate", default=None,
              help="Mock palette (5 hex colors) for /v1/generate.")
@click.option("--cors", multiple=True, help="Allowed CORS origin (repeatable).")
@click.pass_context
def serve_cmd(ctx, host, port, index_path, corpus, splits, pairs, dictionary,
              mock_complete, mock_generate, cors):
    """Serve the completion/generation HTTP API."""
    data = ctx.obj["data"]
    service = data.get("service", {})
    cfg = ServiceConfig(
        host=host,
        port=port,
        index_path=index_path or _opt_path(service, "index"),
        corpus_path=corpus or _opt_path(service, "corpus"),
        splits_path=splits or _opt_path(service, "splits"),
        pairs_path=pairs or _opt_path(service, "pairs"),
        dictionary_path=dictionary or _opt_path(service, "dictionary"),
        provider=_provider_config(data),
        mock_complete=mock_complete or service.get("mock_complete"),
        mock_generate=mock_generate or service.get("mock_generate"),
        cors_origins=tuple(cors) or tuple(service.get("cors", ())),
    )
    run_service(cfg)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return 2
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Abort:
        return 130
    except ValidationError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except IncompleteRunError as exc:
        click.echo(f"incomplete: {exc}", err=True)
        return 4
    except (ProviderError, ReplyError) as exc:
        click.echo(f"provider error: {exc}", err=True)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
