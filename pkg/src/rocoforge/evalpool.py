"""Retrieval pools, similarity kernels, and the R@1 / drop-rate / FR@1 report.

Pools pair original queries with an enlarged gallery: generated captions or
images are "fooling" items that are never correct answers, and pairs of two
generated items are never scored. Image-to-text counts a hit when the top-1
caption is any of the image's five originals; text-to-image when it is the
caption's own image. Ties break toward the lowest gallery index so reports
are byte-stable.

Scores are float32 dot products of unit-norm rows (cosine). Top-1 never
materializes the full score matrix: query rows are processed in blocks
sized to a memory budget.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .captions import CaptionManifestEntry
from .corpus import Corpus
from .errors import ManifestError, ShapeError, UndefinedDropRate
from .images import ImageManifestEntry
from .providers import Embedder, EmbeddingMatrix, ProviderId


@dataclass
class Pool:
    direction: str  # "i2t" or "t2i"
    queries: list[str]
    gallery: list[str]
    positives: dict[str, set[str]]
    fooling: set[str]

    def validate(self) -> None:
        gallery_set = set(self.gallery)
        for query, positive in self.positives.items():
            if positive & self.fooling:
                raise ManifestError(f"query {query}: positives overlap fooling set")
            missing = positive - gallery_set
            if missing:
                raise ManifestError(f"query {query}: positives missing from gallery: {sorted(missing)[:3]}")


def assemble_pool(
    corpus: Corpus,
    caption_manifests: list[CaptionManifestEntry] = (),
    image_manifests: list[ImageManifestEntry] = (),
    direction: str = "i2t",
) -> Pool:
    """Enlarged pool for one direction; generated items form the fooling set."""
    if direction not in ("i2t", "t2i"):
        raise ValueError(f"direction must be i2t or t2i, got {direction!r}")
    image_ids = [img.image_id for img in corpus.images]
    caption_ids = [cid for img in corpus.images for cid in img.caption_ids]
    if direction == "i2t":
        gallery = list(caption_ids)
        fooling = []
        for entry in caption_manifests:
            if entry.orig_caption_id not in corpus.captions:
                raise ManifestError(f"manifest caption {entry.new_caption_id} references unknown {entry.orig_caption_id}")
            fooling.append(entry.new_caption_id)
        pool = Pool(
            direction="i2t",
            queries=image_ids,
            gallery=gallery + fooling,
            positives={img.image_id: set(img.caption_ids) for img in corpus.images},
            fooling=set(fooling),
        )
    else:
        fooling = []
        for entry in image_manifests:
            if entry.orig_image_id not in {i.image_id for i in corpus.images}:
                raise ManifestError(f"manifest image {entry.new_image_id} references unknown {entry.orig_image_id}")
            fooling.append(entry.new_image_id)
        pool = Pool(
            direction="t2i",
            queries=list(caption_ids),
            gallery=image_ids + fooling,
            positives={cid: {corpus.captions[cid].image_id} for cid in caption_ids},
            fooling=set(fooling),
        )
    pool.validate()
    return pool


# ---------------------------------------------------------------------------
# Similarity and ranking kernels
# ---------------------------------------------------------------------------

def similarity(queries: EmbeddingMatrix, gallery: EmbeddingMatrix, block_rows: int = 1024) -> np.ndarray:
    """Full cosine matrix (dot of unit rows), computed in row blocks."""
    if queries.provider != gallery.provider:
        raise ShapeError(f"provider mismatch: {queries.provider} vs {gallery.provider}")
    q, g = queries.vectors, gallery.vectors
    if q.shape[1] != g.shape[1]:
        raise ShapeError(f"dim mismatch: {q.shape[1]} vs {g.shape[1]}")
    out = np.empty((q.shape[0], g.shape[0]), dtype=np.float32)
    gt = g.T
    for start in range(0, q.shape[0], block_rows):
        stop = min(start + block_rows, q.shape[0])
        np.dot(q[start:stop], gt, out=out[start:stop])
    return out


def top1_indices(sim: np.ndarray) -> np.ndarray:
    """First (lowest-index) argmax per row."""
    return np.argmax(sim, axis=1)


def streaming_top1(
    query_vectors: np.ndarray,
    gallery_vectors: np.ndarray,
    mem_budget_mb: int = 256,
) -> np.ndarray:
    """Top-1 gallery index per query without materializing all scores."""
    n_gallery = gallery_vectors.shape[0]
    row_block = max(1, int(mem_budget_mb * 1024 * 1024 / max(1, 4 * n_gallery)))
    out = np.empty(query_vectors.shape[0], dtype=np.int64)
    gt = gallery_vectors.T
    for start in range(0, query_vectors.shape[0], row_block):
        stop = min(start + row_block, query_vectors.shape[0])
        scores = query_vectors[start:stop] @ gt
        out[start:stop] = np.argmax(scores, axis=1)
    return out


def topk_indices(sim_row: np.ndarray, k: int) -> np.ndarray:
    """Top-k columns ordered by (-score, index); exact tie handling."""
    order = np.lexsort((np.arange(sim_row.shape[0]), -sim_row))
    return order[:k]


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

def _hits_from_top1(top1: np.ndarray, pool: Pool, member_of) -> float:
    hits = sum(1 for qi, gi in enumerate(top1) if member_of(pool.queries[qi], pool.gallery[gi]))
    return 100.0 * hits / len(pool.queries)


def recall_at_1(sim: np.ndarray, pool: Pool) -> float:
    """Percent of queries whose top-1 gallery item is a true positive."""
    _check_shape(sim, pool)
    return _hits_from_top1(top1_indices(sim), pool, lambda q, g: g in pool.positives[q])


def false_recall_at_1(sim: np.ndarray, pool: Pool) -> float:
    """Percent of queries whose top-1 gallery item is a fooling item."""
    _check_shape(sim, pool)
    return _hits_from_top1(top1_indices(sim), pool, lambda q, g: g in pool.fooling)


def recall_at_k(sim: np.ndarray, pool: Pool, k: int) -> float:
    """Percent of queries with a positive among the top k."""
    _check_shape(sim, pool)
    hits = 0
    for qi in range(sim.shape[0]):
        cols = topk_indices(sim[qi], k)
        positives = pool.positives[pool.queries[qi]]
        if any(pool.gallery[int(c)] in positives for c in cols):
            hits += 1
    return 100.0 * hits / len(pool.queries)


def _check_shape(sim: np.ndarray, pool: Pool) -> None:
    if sim.shape != (len(pool.queries), len(pool.gallery)):
        raise ShapeError(f"similarity shape {sim.shape} != pool {(len(pool.queries), len(pool.gallery))}")


def drop_rate(base_r1: float, new_r1: float) -> float:
    """Relative R@1 loss versus the clean pool, as a percentage."""
    if base_r1 == 0:
        raise UndefinedDropRate("base R@1 is zero")
    return 100.0 * (base_r1 - new_r1) / base_r1


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------

@dataclass
class EvalRow:
    model: str
    variant: str
    seed: str  # seed number, "avg", or "-" for the base row
    r_at_1: float
    drop_rate: float | None
    fr_at_1: float | None


@dataclass
class EvalReport:
    rows: list[EvalRow] = field(default_factory=list)

    def validate(self) -> None:
        """Range-check metrics and recompute drop rates against the base rows.

        A base row (drop and FR absent) opens a section; every later row of
        the same model is checked against it until the next base row.
        """
        current_base: dict[str, float] = {}
        for row in self.rows:
            if not 0.0 <= row.r_at_1 <= 100.0:
                raise ValueError(f"R@1 out of range in row {row}")
            if row.fr_at_1 is not None and not 0.0 <= row.fr_at_1 <= 100.0:
                raise ValueError(f"FR@1 out of range in row {row}")
            if row.drop_rate is None and row.fr_at_1 is None:
                current_base[row.model] = row.r_at_1
            elif row.drop_rate is not None and row.model in current_base:
                expect = drop_rate(current_base[row.model], row.r_at_1)
                if abs(expect - row.drop_rate) > 0.01:
                    raise ValueError(f"drop rate inconsistent in row {row}: expected {expect:.2f}")


def _fmt(value: float | None) -> str:
    return "-" if value is None else f"{value:.2f}"


def render_report_csv(report: EvalReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["model", "variant", "seed", "r_at_1", "drop_rate", "fr_at_1"])
    for row in report.rows:
        writer.writerow([row.model, row.variant, row.seed, f"{row.r_at_1:.2f}", _fmt(row.drop_rate), _fmt(row.fr_at_1)])
    return buf.getvalue()


def render_report_markdown(report: EvalReport) -> str:
    lines = ["| model | variant | seed | R@1 | drop rate | FR@1 |", "|---|---|---|---|---|---|"]
    for row in report.rows:
        lines.append(
            f"| {row.model} | {row.variant} | {row.seed} | {row.r_at_1:.2f} | {_fmt(row.drop_rate)} | {_fmt(row.fr_at_1)} |"
        )
    return "\n".join(lines) + "\n"


def render_report_text(report: EvalReport) -> str:
    headers = ["model", "variant", "seed", "R@1", "drop", "FR@1"]
    table = [
        [row.model, row.variant, row.seed, f"{row.r_at_1:.2f}", _fmt(row.drop_rate), _fmt(row.fr_at_1)]
        for row in report.rows
    ]
    widths = [max(len(h), *(len(r[i]) for r in table)) if table else len(h) for i, h in enumerate(headers)]
    fmt_row = lambda cells: "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    return "\n".join([fmt_row(headers), fmt_row(["-" * w for w in widths])] + [fmt_row(r) for r in table]) + "\n"


def write_report(report: EvalReport, out_dir: str | Path) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.csv").write_text(render_report_csv(report), encoding="utf-8")
    (out_dir / "report.md").write_text(render_report_markdown(report), encoding="utf-8")
    (out_dir / "report.txt").write_text(render_report_text(report), encoding="utf-8")


def load_report_csv(path: str | Path) -> EvalReport:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for record in csv.DictReader(fh):
            rows.append(
                EvalRow(
                    model=record["model"],
                    variant=record["variant"],
                    seed=record["seed"],
                    r_at_1=float(record["r_at_1"]),
                    drop_rate=None if record["drop_rate"] == "-" else float(record["drop_rate"]),
                    fr_at_1=None if record["fr_at_1"] == "-" else float(record["fr_at_1"]),
                )
            )
    return EvalReport(rows=rows)


# ---------------------------------------------------------------------------
# Full evaluation over manifests
# ---------------------------------------------------------------------------

def _metrics_for_pool(
    pool: Pool,
    query_matrix: EmbeddingMatrix,
    gallery_matrix: EmbeddingMatrix,
    mem_budget_mb: int,
) -> tuple[float, float]:
    if query_matrix.provider != gallery_matrix.provider:
        raise ShapeError(f"provider mismatch: {query_matrix.provider} vs {gallery_matrix.provider}")
    top1 = streaming_top1(query_matrix.vectors, gallery_matrix.vectors, mem_budget_mb)
    r1 = _hits_from_top1(top1, pool, lambda q, g: g in pool.positives[q])
    fr1 = _hits_from_top1(top1, pool, lambda q, g: g in pool.fooling)
    return r1, fr1


def evaluate_run(
    corpus: Corpus,
    embedder: Embedder,
    models: list[str | ProviderId],
    caption_variants: dict[tuple[str, str], list[CaptionManifestEntry]] | None = None,
    image_variants: dict[tuple[str, str, int], list[ImageManifestEntry]] | None = None,
    images_root: str | Path = ".",
    generated_root: str | Path = ".",
    mem_budget_mb: int = 256,
) -> EvalReport:
    """One report row per (model, variant, seed), plus seed-averaged image rows.

    ``caption_variants`` maps (variant name, seed label) to its manifest;
    ``image_variants`` maps (mode, lambda label, seed) to its manifest.
    """
    caption_variants = caption_variants or {}
    image_variants = image_variants or {}
    images_root = Path(images_root)
    generated_root = Path(generated_root)
    caption_ids = [cid for img in corpus.images for cid in img.caption_ids]
    caption_texts = {cid: corpus.captions[cid].text for cid in caption_ids}
    image_paths = {img.image_id: images_root / img.file_path for img in corpus.images}

    report = EvalReport()
    for model in models:
        pid = embedder._resolve(model)
        image_matrix = embedder.embed_images(pid, [image_paths[i] for i in image_paths])
        original_text_matrix = embedder.embed_texts(pid, [caption_texts[c] for c in caption_ids])

        # Image-to-text: base pool, then each caption variant.
        base_pool = assemble_pool(corpus, direction="i2t")
        base_r1, _ = _metrics_for_pool(base_pool, image_matrix, original_text_matrix, mem_budget_mb)
        report.rows.append(EvalRow(pid.name, "coco-i2t", "-", base_r1, None, None))
        for variant, seed_label in sorted(caption_variants):
            entries = caption_variants[(variant, seed_label)]
            pool = assemble_pool(corpus, caption_manifests=entries, direction="i2t")
            gallery_matrix = embedder.embed_texts(
                pid, [caption_texts[c] for c in caption_ids] + [e.text for e in entries]
            )
            r1, fr1 = _metrics_for_pool(pool, image_matrix, gallery_matrix, mem_budget_mb)
            report.rows.append(EvalRow(pid.name, variant, seed_label, r1, drop_rate(base_r1, r1), fr1))

        # Text-to-image: base pool, per-seed variants, then seed averages.
        query_matrix = embedder.embed_texts(pid, [caption_texts[c] for c in caption_ids])
        t2i_base = assemble_pool(corpus, direction="t2i")
        t2i_base_r1, _ = _metrics_for_pool(t2i_base, query_matrix, image_matrix, mem_budget_mb)
        report.rows.append(EvalRow(pid.name, "coco-t2i", "-", t2i_base_r1, None, None))
        by_variant: dict[str, list[EvalRow]] = {}
        for (mode, lam_str, seed) in sorted(image_variants):
            entries = image_variants[(mode, lam_str, seed)]
            pool = assemble_pool(corpus, image_manifests=entries, direction="t2i")
            gallery_matrix = embedder.embed_images(
                pid,
                [image_paths[i] for i in image_paths] + [generated_root / e.output_path for e in entries],
            )
            r1, fr1 = _metrics_for_pool(pool, query_matrix, gallery_matrix, mem_budget_mb)
            variant = f"{mode}@{lam_str}"
            row = EvalRow(pid.name, variant, str(seed), r1, drop_rate(t2i_base_r1, r1), fr1)
            report.rows.append(row)
            by_variant.setdefault(variant, []).append(row)
        for variant in sorted(by_variant):
            rows = by_variant[variant]
            if len(rows) < 2:
                continue
            report.rows.append(
                EvalRow(
                    pid.name,
                    variant,
                    "avg",
                    sum(r.r_at_1 for r in rows) / len(rows),
                    sum(r.drop_rate for r in rows) / len(rows),
                    sum(r.fr_at_1 for r in rows) / len(rows),
                )
            )
    return report
