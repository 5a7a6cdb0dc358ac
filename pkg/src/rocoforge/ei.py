"""Embedding-influence (EI) scoring and cross-model source-word consensus.

The EI score of a word is one minus the cosine between the caption's
embedding and the embedding of the caption with that word removed: a low
score means the encoder barely notices the word. Per model we pick the
lowest-EI noun; across models we take the most frequent pick, breaking
ties uniformly at random with a seeded generator. Scores are never
averaged across models.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import CaptionRecord, Corpus
from .errors import EmptyConsensus, NoSourceWord, NumericalDegeneracy
from .providers import Embedder, ProviderId


def derive_rng(seed: int, *parts: str) -> np.random.Generator:
    """Generator split deterministically from a global seed and string parts.

    Splitting per item keeps outputs independent of worker count and
    iteration order.
    """
    material = f"{seed}|" + "|".join(parts)
    digest = hashlib.sha256(material.encode("utf-8")).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "big"))


@dataclass
class EIRecord:
    caption_id: str
    model: str
    word_scores: dict[int, float]
    lowest_noun_idx: int
    highest_noun_idx: int


@dataclass
class ConsensusRecord:
    caption_id: str
    per_model_choice: dict[str, int]
    consensus_idx: int
    consensus_count: int
    tie_broken: bool
    seed: int


@dataclass
class StatsReport:
    consensus_histogram: dict[int, float]
    word_counts: list[tuple[str, int]]


def caption_full_text(caption: CaptionRecord) -> str:
    return " ".join(caption.cased_tokens)


def leave_one_out(caption: CaptionRecord, idx: int) -> str:
    """Caption text with word ``idx`` removed; casing and order preserved."""
    if not 0 <= idx < len(caption.cased_tokens):
        raise IndexError(f"token index {idx} out of range for caption {caption.caption_id}")
    return " ".join(t for i, t in enumerate(caption.cased_tokens) if i != idx)


def ei_from_vectors(full: np.ndarray, reduced: np.ndarray) -> float:
    """1 - cosine(full, reduced), computed with explicit norms in float64."""
    a = np.asarray(full, dtype=np.float64)
    b = np.asarray(reduced, dtype=np.float64)
    na = float(np.sqrt(np.dot(a, a)))
    nb = float(np.sqrt(np.dot(b, b)))
    if na == 0.0 or nb == 0.0:
        raise NumericalDegeneracy("zero-norm embedding in EI computation")
    value = 1.0 - float(np.dot(a, b)) / (na * nb)
    # Rounding can push the cosine a few ulps past ±1; snap those back so
    # the score honors its [0, 2] range. Real out-of-range values cannot
    # occur here (both operands are finite and nonzero).
    if -1e-12 < value < 0.0:
        return 0.0
    if 2.0 < value < 2.0 + 1e-12:
        return 2.0
    return value


def eligible_noun_indices(caption: CaptionRecord) -> list[int]:
    # Leave-one-out needs at least one word left over.
    if len(caption.tokens) < 2:
        return []
    return list(caption.noun_indices)


def score_caption(
    embedder: Embedder,
    provider: str | ProviderId,
    caption: CaptionRecord,
    heatmap: bool = False,
) -> EIRecord:
    """Score a caption's nouns (or every word in heatmap mode) in one batch."""
    nouns = eligible_noun_indices(caption)
    if not nouns:
        raise NoSourceWord(f"caption {caption.caption_id} has no eligible noun")
    indices = list(range(len(caption.tokens))) if heatmap else nouns
    texts = [caption_full_text(caption)] + [leave_one_out(caption, i) for i in indices]
    matrix = embedder.embed_texts(provider, texts)
    full = matrix.row(0)
    scores = {idx: ei_from_vectors(full, matrix.row(k + 1)) for k, idx in enumerate(indices)}
    noun_scores = [(scores[i], i) for i in nouns]
    lowest = min(noun_scores, key=lambda si: (si[0], si[1]))[1]
    highest = max(noun_scores, key=lambda si: (si[0], -si[1]))[1]
    pid = embedder._resolve(provider)
    return EIRecord(
        caption_id=caption.caption_id,
        model=pid.name,
        word_scores=scores,
        lowest_noun_idx=lowest,
        highest_noun_idx=highest,
    )


def ei_score(embedder: Embedder, provider: str | ProviderId, caption: CaptionRecord, idx: int) -> float:
    if len(caption.tokens) < 2:
        raise NoSourceWord(f"caption {caption.caption_id} too short for leave-one-out")
    texts = [caption_full_text(caption), leave_one_out(caption, idx)]
    matrix = embedder.embed_texts(provider, texts)
    return ei_from_vectors(matrix.row(0), matrix.row(1))


def select_extreme_noun(
    embedder: Embedder,
    provider: str | ProviderId,
    caption: CaptionRecord,
    mode: str = "lowest",
) -> int:
    """Index of the argmin/argmax-EI noun; ties go to the smallest index."""
    if mode not in ("lowest", "highest"):
        raise ValueError(f"mode must be 'lowest' or 'highest', got {mode!r}")
    record = score_caption(embedder, provider, caption)
    return record.lowest_noun_idx if mode == "lowest" else record.highest_noun_idx


def consensus_source_word(
    caption_id: str,
    choices: dict[str, int],
    rng: np.random.Generator,
    seed: int = 0,
) -> ConsensusRecord:
    """Most frequent per-model choice; seeded uniform pick among ties."""
    if not choices:
        raise EmptyConsensus(f"no model choices for caption {caption_id}")
    counts: dict[int, int] = {}
    for idx in choices.values():
        counts[idx] = counts.get(idx, 0) + 1
    top = max(counts.values())
    tied = sorted(idx for idx, c in counts.items() if c == top)
    tie_broken = len(tied) > 1
    consensus_idx = tied[int(rng.integers(len(tied)))] if tie_broken else tied[0]
    return ConsensusRecord(
        caption_id=caption_id,
        per_model_choice=dict(sorted(choices.items())),
        consensus_idx=consensus_idx,
        consensus_count=top,
        tie_broken=tie_broken,
        seed=seed,
    )


@dataclass
class ConsensusResult:
    ei_records: dict[str, list[EIRecord]]
    consensus: list[ConsensusRecord]
    skipped: list[str] = field(default_factory=list)


def compute_consensus(
    corpus: Corpus,
    embedder: Embedder,
    providers: list[str | ProviderId],
    seed: int = 0,
    jobs: int = 1,
    heatmap: bool = False,
) -> ConsensusResult:
    """Per-model EI records plus consensus picks for every scorable caption.

    Captions are processed independently; the per-caption RNG is split from
    (seed, caption_id) so the output is identical for any worker count.
    """
    pids = [embedder._resolve(p) for p in providers]
    caption_ids = [cid for image in corpus.images for cid in image.caption_ids]

    def score_one(cid: str):
        caption = corpus.captions[cid]
        if not eligible_noun_indices(caption):
            return cid, None, None
        records = [score_caption(embedder, pid, caption, heatmap=heatmap) for pid in pids]
        choices = {rec.model: rec.lowest_noun_idx for rec in records}
        consensus = consensus_source_word(cid, choices, derive_rng(seed, cid, "consensus"), seed=seed)
        return cid, records, consensus

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(score_one, caption_ids))
    else:
        results = [score_one(cid) for cid in caption_ids]

    out = ConsensusResult(ei_records={pid.name: [] for pid in pids}, consensus=[])
    for cid, records, consensus in results:
        if records is None:
            out.skipped.append(cid)
            continue
        for rec in records:
            out.ei_records[rec.model].append(rec)
        out.consensus.append(consensus)
    return out


def ei_statistics(consensus_records: list[ConsensusRecord], corpus: Corpus) -> StatsReport:
    """Consensus-size histogram and a descending source-word frequency table."""
    if not consensus_records:
        raise EmptyConsensus("no consensus records to summarize")
    histogram = {k: 0 for k in (1, 2, 3, 4)}
    word_counts: dict[str, int] = {}
    for record in consensus_records:
        histogram[record.consensus_count] = histogram.get(record.consensus_count, 0) + 1
        word = corpus.captions[record.caption_id].tokens[record.consensus_idx]
        word_counts[word] = word_counts.get(word, 0) + 1
    total = len(consensus_records)
    frequencies = {k: v / total for k, v in sorted(histogram.items())}
    table = sorted(word_counts.items(), key=lambda wc: (-wc[1], wc[0]))
    return StatsReport(consensus_histogram=frequencies, word_counts=table)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def write_ei_jsonl(records: list[EIRecord], path: str | Path) -> None:
    lines = [
        json.dumps(
            {
                "caption_id": r.caption_id,
                "model": r.model,
                "word_scores": {str(k): v for k, v in sorted(r.word_scores.items())},
                "lowest_noun_idx": r.lowest_noun_idx,
                "highest_noun_idx": r.highest_noun_idx,
            },
            separators=(",", ":"),
        )
        for r in records
    ]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def load_ei_jsonl(path: str | Path) -> list[EIRecord]:
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        d = json.loads(line)
        records.append(
            EIRecord(
                caption_id=d["caption_id"],
                model=d["model"],
                word_scores={int(k): v for k, v in d["word_scores"].items()},
                lowest_noun_idx=d["lowest_noun_idx"],
                highest_noun_idx=d["highest_noun_idx"],
            )
        )
    return records


def write_consensus_jsonl(records: list[ConsensusRecord], path: str | Path) -> None:
    lines = [
        json.dumps(
            {
                "caption_id": r.caption_id,
                "per_model_choice": r.per_model_choice,
                "consensus_idx": r.consensus_idx,
                "consensus_count": r.consensus_count,
                "tie_broken": r.tie_broken,
                "seed": r.seed,
            },
            separators=(",", ":"),
        )
        for r in records
    ]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def load_consensus_jsonl(path: str | Path) -> list[ConsensusRecord]:
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        d = json.loads(line)
        records.append(ConsensusRecord(**d))
    return records


def write_stats_csv(stats: StatsReport, histogram_path: str | Path, words_path: str | Path) -> None:
    hist_lines = ["bucket,frequency"] + [f"{k},{v:.6f}" for k, v in stats.consensus_histogram.items()]
    Path(histogram_path).write_text("\n".join(hist_lines) + "\n", encoding="utf-8")
    word_lines = ["word,count"] + [f"{w},{c}" for w, c in stats.word_counts]
    Path(words_path).write_text("\n".join(word_lines) + "\n", encoding="utf-8")
