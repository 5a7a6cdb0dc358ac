"""Subcommand CLI driving the pipeline.

Flags mirror RunConfig fields; a key=value config file can seed any of them
and explicit flags win. The ROCOFORGE_CACHE environment variable overrides
the cache path from either source.

Exit codes: 0 success, 2 missing input (the path is named on stderr),
3 embedding provider unreachable, 1 any other error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import fields
from pathlib import Path

from . import __version__, pipeline
from .errors import ProviderUnavailable, RocoforgeError
from .evalpool import load_report_csv, render_report_text, write_report
from .pipeline import RunConfig

_LIST_FIELDS = {"models", "policies", "modes"}
_FLOAT_LIST_FIELDS = {"lambdas"}
_INT_LIST_FIELDS = {"seeds"}
_BOOL_FIELDS = {"strict"}
_INT_FIELDS = {"jobs"}


def _parse_config_file(path: str) -> dict:
    values: dict = {}
    known = {f.name for f in fields(RunConfig)}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in known:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
        if key in _LIST_FIELDS:
            values[key] = [v.strip() for v in raw.split(",") if v.strip()]
        elif key in _FLOAT_LIST_FIELDS:
            values[key] = [float(v) for v in raw.split(",") if v.strip()]
        elif key in _INT_LIST_FIELDS:
            values[key] = [int(v) for v in raw.split(",") if v.strip()]
        elif key in _BOOL_FIELDS:
            values[key] = raw.lower() in ("1", "true", "yes")
        elif key in _INT_FIELDS:
            values[key] = int(raw)
        else:
            values[key] = raw
    return values


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value config file; flags override it")
    parser.add_argument("--corpus", help="corpus input path")
    parser.add_argument("--split", help="annotation split name (default: test)")
    parser.add_argument("--provider-url", dest="provider_url", help="embedding service URL; empty = in-process stub")
    parser.add_argument("--models", help="comma-separated model names (default: stub)")
    parser.add_argument("--policy", action="append", dest="policies", help="caption policy (repeatable)")
    parser.add_argument("--lambda", action="append", dest="lambdas", type=float, help="mixing ratio (repeatable)")
    parser.add_argument("--mode", action="append", dest="modes", help="image mode: mix or patch (repeatable)")
    parser.add_argument("--seed", action="append", dest="seeds", type=int, help="random seed (repeatable)")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--cache", help="embedding cache directory")
    parser.add_argument("--strict", action=argparse.BooleanOptionalAction, default=None, help="strict ingestion/generation")
    parser.add_argument("--jobs", type=int, help="worker count (outputs are identical for any value)")


def build_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig()
    overrides: dict = {}
    if getattr(args, "config", None):
        overrides.update(_parse_config_file(args.config))
    for f in fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            overrides[f.name] = value
    if "models" in overrides and isinstance(overrides["models"], str):
        overrides["models"] = [m.strip() for m in overrides["models"].split(",") if m.strip()]
    for key, value in overrides.items():
        setattr(config, key, value)
    env_cache = os.environ.get("ROCOFORGE_CACHE")
    if env_cache:
        config.cache = env_cache
    config.validate()
    return config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rocoforge", description=__doc__)
    parser.add_argument("--version", action="version", version=f"rocoforge {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load an annotation file into the internal corpus format")
    _add_common(p)

    p = sub.add_parser("ei", help="score nouns per model and write consensus source words")
    _add_common(p)
    p.add_argument("--heatmap", action="store_true", help="score every word, not just nouns")

    p = sub.add_parser("gen-captions", help="generate fooling captions")
    _add_common(p)
    p.add_argument("--consensus", help="consensus.jsonl from the ei stage")
    p.add_argument("--ei", dest="ei_records", help="one model's ei_*.jsonl (for delete_high_ei/delete_low_ei)")

    p = sub.add_parser("gen-images", help="generate fooling images (mix/patch)")
    _add_common(p)
    p.add_argument("--images-root", dest="images_root", help="directory that corpus file_path entries resolve against")

    p = sub.add_parser("embed", help="warm the embedding cache for all pool members")
    _add_common(p)
    p.add_argument("--manifest", action="append", dest="manifests", default=None, help="caption/image manifest (repeatable)")
    p.add_argument("--images-root", dest="images_root")
    p.add_argument("--generated-root", dest="generated_root")

    p = sub.add_parser("eval", help="assemble pools and report R@1, drop rate, FR@1")
    _add_common(p)
    p.add_argument("--manifest", action="append", dest="manifests", default=None, help="caption/image manifest (repeatable)")
    p.add_argument("--images-root", dest="images_root")
    p.add_argument("--generated-root", dest="generated_root")

    p = sub.add_parser("report", help="re-render a report.csv as text and markdown")
    p.add_argument("--report", required=True, help="path to report.csv")
    p.add_argument("--out", help="directory to rewrite report.md/report.txt into")
    return parser


def _run(args: argparse.Namespace) -> int:
    if args.command == "report":
        report = load_report_csv(pipeline.require_input(args.report, "report file"))
        print(render_report_text(report), end="")
        if args.out:
            write_report(report, args.out)
        return 0
    config = build_config(args)
    if args.command == "ingest":
        path = pipeline.stage_ingest(config)
        print(f"wrote {path}")
    elif args.command == "ei":
        path = pipeline.stage_ei(config, heatmap=args.heatmap)
        print(f"wrote {path}")
    elif args.command == "gen-captions":
        for path in pipeline.stage_gen_captions(config, consensus_path=args.consensus, ei_path=args.ei_records):
            print(f"wrote {path}")
    elif args.command == "gen-images":
        for path in pipeline.stage_gen_images(config):
            print(f"wrote {path}")
    elif args.command == "embed":
        pipeline.stage_embed(config, args.manifests or [])
        print(f"cache warmed at {config.cache}")
    elif args.command == "eval":
        if not args.manifests:
            raise FileNotFoundError("no manifests given; pass at least one --manifest")
        report = pipeline.stage_eval(config, args.manifests)
        print(render_report_text(report), end="")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ProviderUnavailable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (RocoforgeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
