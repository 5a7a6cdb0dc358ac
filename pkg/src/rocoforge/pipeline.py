"""Pipeline stages behind the CLI, with reproducible run manifests.

Every stage writes a ``run_manifest.json`` beside its outputs holding the
tool version, the resolved config, its hash, and the hash of every input
file. Since each stage's inputs are earlier stages' outputs, the chain of
manifests links any artifact back to the original annotation file.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .cache import EmbeddingCache
from .captions import (
    CaptionManifestEntry,
    gen_deletion_set,
    gen_multiword_set,
    gen_single_word_set,
    load_caption_manifest,
    load_danger_words,
    load_vocabulary,
    write_caption_manifest,
)
from .concepts import load_registry, load_synonyms
from .corpus import Corpus, load_corpus_jsonl, load_karpathy_split, save_corpus_jsonl
from .ei import (
    compute_consensus,
    ei_statistics,
    load_consensus_jsonl,
    load_ei_jsonl,
    write_consensus_jsonl,
    write_ei_jsonl,
    write_stats_csv,
)
from .evalpool import EvalReport, evaluate_run, write_report
from .images import gen_image_set, lambda_label, load_image_manifest, write_image_manifest
from .providers import Embedder, HttpBackend, StubBackend

SUBSTITUTION = ("rand_voca", "same_concept", "diff_concept", "danger")
DELETIONS = ("delete_random", "delete_high_ei", "delete_low_ei")
ALL_POLICIES = SUBSTITUTION + DELETIONS + ("multiword",)


@dataclass
class RunConfig:
    corpus: str = ""
    split: str = "test"
    provider_url: str = ""
    models: list[str] = field(default_factory=lambda: ["stub"])
    policies: list[str] = field(default_factory=lambda: list(SUBSTITUTION))
    lambdas: list[float] = field(default_factory=lambda: [0.9, 0.8])
    modes: list[str] = field(default_factory=lambda: ["mix", "patch"])
    seeds: list[int] = field(default_factory=lambda: [0])
    out: str = "out"
    cache: str = ""
    strict: bool = True
    jobs: int = 1
    images_root: str = ""
    generated_root: str = ""

    def validate(self) -> None:
        if not self.seeds:
            raise ValueError("at least one seed is required")
        for lam in self.lambdas:
            if not 0.0 < lam < 1.0:
                raise ValueError(f"lambda values must be in (0, 1), got {lam}")
        for policy in self.policies:
            if policy not in ALL_POLICIES:
                raise ValueError(f"unknown policy {policy!r}; choose from {ALL_POLICIES}")


def make_embedder(config: RunConfig) -> Embedder:
    backend = HttpBackend(config.provider_url) if config.provider_url else StubBackend()
    cache = EmbeddingCache(config.cache) if config.cache else None
    return Embedder(backend=backend, cache=cache)


def _sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_run_manifest(out_dir: Path, command: str, config: RunConfig, inputs: list[Path], outputs: list[str]) -> None:
    config_json = json.dumps(asdict(config), sort_keys=True, separators=(",", ":"))
    manifest = {
        "command": command,
        "tool_version": __version__,
        "config": json.loads(config_json),
        "config_hash": hashlib.sha256(config_json.encode()).hexdigest(),
        "inputs": {str(p): _sha256_file(Path(p)) for p in sorted(set(map(str, inputs)))},
        "outputs": sorted(outputs),
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "run_manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def require_input(path: str | Path, what: str) -> Path:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"{what} not found: {path}")
    return path


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------

def stage_ingest(config: RunConfig) -> Path:
    src = require_input(config.corpus, "annotation file")
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus = load_karpathy_split(src, split=config.split, strict=config.strict)
    out_path = out_dir / "corpus.jsonl"
    save_corpus_jsonl(corpus, out_path)
    write_run_manifest(out_dir, "ingest", config, [src], [out_path.name])
    return out_path


def _load_corpus(config: RunConfig) -> tuple[Corpus, Path]:
    path = require_input(config.corpus, "corpus file")
    return load_corpus_jsonl(path), path


def stage_ei(config: RunConfig, heatmap: bool = False) -> Path:
    corpus, corpus_path = _load_corpus(config)
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    embedder = make_embedder(config)
    result = compute_consensus(
        corpus, embedder, list(config.models), seed=config.seeds[0], jobs=config.jobs, heatmap=heatmap
    )
    outputs = []
    for model, records in sorted(result.ei_records.items()):
        name = f"ei_{model}.jsonl"
        write_ei_jsonl(records, out_dir / name)
        outputs.append(name)
    write_consensus_jsonl(result.consensus, out_dir / "consensus.jsonl")
    stats = ei_statistics(result.consensus, corpus)
    write_stats_csv(stats, out_dir / "stats_consensus.csv", out_dir / "stats_words.csv")
    outputs += ["consensus.jsonl", "stats_consensus.csv", "stats_words.csv"]
    if result.skipped:
        (out_dir / "skipped_captions.txt").write_text("\n".join(result.skipped) + "\n", encoding="utf-8")
        outputs.append("skipped_captions.txt")
    write_run_manifest(out_dir, "ei", config, [corpus_path], outputs)
    return out_dir / "consensus.jsonl"


def stage_gen_captions(
    config: RunConfig,
    consensus_path: str | Path | None = None,
    ei_path: str | Path | None = None,
) -> list[Path]:
    corpus, corpus_path = _load_corpus(config)
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    registry = load_registry()
    synonyms = load_synonyms()
    vocab = load_vocabulary()
    danger = load_danger_words()

    inputs = [corpus_path]
    consensus = None
    if any(p in SUBSTITUTION for p in config.policies):
        consensus_file = require_input(consensus_path or Path(config.out) / "consensus.jsonl", "consensus file")
        consensus = load_consensus_jsonl(consensus_file)
        inputs.append(consensus_file)
    ei_records = None
    if any(p in ("delete_high_ei", "delete_low_ei") for p in config.policies):
        ei_file = require_input(ei_path, "EI records file")
        ei_records = load_ei_jsonl(ei_file)
        inputs.append(ei_file)

    outputs: list[Path] = []
    for policy in config.policies:
        for seed in config.seeds:
            if policy in SUBSTITUTION:
                result = gen_single_word_set(
                    corpus, consensus, policy, registry, vocab, danger,
                    seed=seed, synonyms=synonyms, strict=config.strict,
                )
            elif policy in DELETIONS:
                result = gen_deletion_set(corpus, policy.removeprefix("delete_"), ei_records, seed=seed)
            else:
                result = gen_multiword_set(corpus, vocab=vocab, seed=seed, registry=registry, synonyms=synonyms)
            path = out_dir / f"captions_{policy}_s{seed}.jsonl"
            write_caption_manifest(result.entries, path)
            outputs.append(path)
    write_run_manifest(out_dir, "gen-captions", config, inputs, [p.name for p in outputs])
    return outputs


def stage_gen_images(config: RunConfig) -> list[Path]:
    corpus, corpus_path = _load_corpus(config)
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    images_root = config.images_root or str(corpus_path.parent)
    outputs: list[Path] = []
    for mode in config.modes:
        for lam in config.lambdas:
            for seed in config.seeds:
                result = gen_image_set(corpus, images_root, mode, lam, seed, out_dir / "images", jobs=config.jobs)
                path = out_dir / f"images_{mode}_{lambda_label(lam)}_s{seed}.jsonl"
                write_image_manifest(result.entries, path)
                outputs.append(path)
    write_run_manifest(out_dir, "gen-images", config, [corpus_path], [p.name for p in outputs])
    return outputs


def _collect_manifests(paths: list[str | Path]):
    """Split manifest paths into caption and image manifests by their fields."""
    caption_sets: dict[tuple[str, str], list[CaptionManifestEntry]] = {}
    image_sets: dict[tuple[str, str, int], list] = {}
    for path in paths:
        path = require_input(path, "manifest")
        head = path.read_text(encoding="utf-8").splitlines()
        first = json.loads(head[0]) if head and head[0].strip() else {}
        if "new_caption_id" in first:
            entries = load_caption_manifest(path)
            for entry in entries:
                key = (entry.policy, str(entry.seed))
                caption_sets.setdefault(key, []).append(entry)
        elif "new_image_id" in first:
            entries = load_image_manifest(path)
            for entry in entries:
                key = (entry.mode, lambda_label(entry.lambda_requested), entry.seed)
                image_sets.setdefault(key, []).append(entry)
        # empty manifests contribute nothing
    return caption_sets, image_sets


def stage_embed(config: RunConfig, manifest_paths: list[str | Path]) -> None:
    """Warm the cache for every pool member (originals plus generated)."""
    if not config.cache:
        raise ValueError("embed stage needs a cache path")
    corpus, corpus_path = _load_corpus(config)
    caption_sets, image_sets = _collect_manifests(manifest_paths)
    embedder = make_embedder(config)
    images_root = Path(config.images_root or corpus_path.parent)
    generated_root = Path(config.generated_root or Path(config.out) / "images")
    caption_ids = [cid for img in corpus.images for cid in img.caption_ids]
    for model in config.models:
        texts = [corpus.captions[c].text for c in caption_ids]
        for entries in caption_sets.values():
            texts += [e.text for e in entries]
        embedder.embed_texts(model, texts)
        paths = [images_root / img.file_path for img in corpus.images]
        for entries in image_sets.values():
            paths += [generated_root / e.output_path for e in entries]
        embedder.embed_images(model, paths)
    out_dir = Path(config.out)
    write_run_manifest(
        out_dir, "embed", config,
        [corpus_path] + [Path(p) for p in manifest_paths],
        [f"{m}.embc" for m in config.models],
    )


def stage_eval(config: RunConfig, manifest_paths: list[str | Path]) -> EvalReport:
    corpus, corpus_path = _load_corpus(config)
    caption_sets, image_sets = _collect_manifests(manifest_paths)
    embedder = make_embedder(config)
    images_root = Path(config.images_root or corpus_path.parent)
    generated_root = Path(config.generated_root or Path(config.out) / "images")
    report = evaluate_run(
        corpus,
        embedder,
        list(config.models),
        caption_variants=caption_sets,
        image_variants=image_sets,
        images_root=images_root,
        generated_root=generated_root,
    )
    out_dir = Path(config.out)
    write_report(report, out_dir)
    write_run_manifest(
        out_dir, "eval", config,
        [corpus_path] + [Path(p) for p in manifest_paths],
        ["report.csv", "report.md", "report.txt"],
    )
    return report
