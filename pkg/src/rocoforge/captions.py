"""Fooling-caption generation.

Four single-word substitution policies (rand_voca, same_concept,
diff_concept, danger), three deletion modes for the influence ablation, and
multi-word random substitution (k in 2..5, any part of speech).

All policies share the exclusion rules: the target never equals the source
and never comes from its synonym list; rand_voca additionally rejects
targets sharing the source's concept group when both are mapped. Article
agreement is deliberately not repaired ("an gun" stays), since the goal is
meaning-breaking text whose embedding barely moves.

Generation is pure per caption given the derived seed, so manifests are
byte-stable across runs and worker counts.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .concepts import ConceptRegistry, group_of, sample_diff_concept, sample_same_concept
from .corpus import Corpus, CaptionRecord
from .ei import ConsensusRecord, EIRecord, derive_rng, leave_one_out
from .errors import NoCandidate, NoOpSubstitution, UnmappedWord

SUBSTITUTION_POLICIES = ("rand_voca", "same_concept", "diff_concept", "danger")
DELETION_MODES = ("random", "high_ei", "low_ei")
MULTIWORD_K_RANGE = (2, 3, 4, 5)
MAX_ATTEMPTS = 100

_WORD_RE = re.compile(r"[a-z]+\Z")


@dataclass
class Vocabulary:
    words: list[str]

    def __post_init__(self) -> None:
        bad = [w for w in self.words if not _WORD_RE.match(w)]
        if bad:
            raise ValueError(f"vocabulary words must match [a-z]+; offenders: {bad[:5]}")


def _data_path(name: str) -> Path:
    return Path(str(resources.files("rocoforge").joinpath("data", name)))


def load_vocabulary(path: str | Path | None = None) -> Vocabulary:
    path = Path(path) if path else _data_path("vocab.txt")
    words = sorted({w.strip().lower() for w in path.read_text(encoding="utf-8").splitlines() if w.strip()})
    return Vocabulary(words=words)


def load_danger_words(path: str | Path | None = None) -> list[str]:
    path = Path(path) if path else _data_path("danger_words.txt")
    return [w.strip().lower() for w in path.read_text(encoding="utf-8").splitlines() if w.strip()]


@dataclass
class CaptionManifestEntry:
    new_caption_id: str
    orig_caption_id: str
    image_id: str
    policy: str
    source_indices: list[int]
    source_words: list[str]
    target_words: list[str]
    text: str
    seed: int
    fallback: bool = False

    def __post_init__(self) -> None:
        deleting = self.policy.startswith("delete_")
        if deleting:
            if self.target_words:
                raise ValueError(f"deletion entry {self.new_caption_id} must have no targets")
        elif not (len(self.source_indices) == len(self.source_words) == len(self.target_words)):
            raise ValueError(f"entry {self.new_caption_id}: index/word list lengths differ")
        if self.policy.startswith("multiword_"):
            k = int(self.policy.split("_", 1)[1])
            if not 2 <= k <= 5:
                raise ValueError(f"multiword k must be in 2..5, got {k}")


@dataclass
class GenerationResult:
    entries: list[CaptionManifestEntry]
    skipped: dict[str, int] = field(default_factory=dict)

    def skip(self, reason: str) -> None:
        self.skipped[reason] = self.skipped.get(reason, 0) + 1


def substitute(caption: CaptionRecord, idx: int, target: str) -> str:
    """Replace word ``idx`` with ``target``; other tokens keep their casing."""
    if not 0 <= idx < len(caption.cased_tokens):
        raise IndexError(f"token index {idx} out of range for caption {caption.caption_id}")
    if not target:
        raise ValueError("target word must be non-empty")
    if target.lower() == caption.tokens[idx]:
        raise NoOpSubstitution(f"target {target!r} equals source in caption {caption.caption_id}")
    tokens = list(caption.cased_tokens)
    tokens[idx] = target
    return " ".join(tokens)


def _rejects(
    source: str,
    target: str,
    synonyms: dict[str, set[str]],
    registry: ConceptRegistry | None,
    group_rule: bool,
) -> bool:
    if target.lower() == source.lower():
        return True
    if target.lower() in synonyms.get(source.lower(), set()):
        return True
    if group_rule and registry is not None:
        sg, tg = group_of(source, registry), group_of(target, registry)
        if sg is not None and tg is not None and sg == tg:
            return True
    return False


def _sample_rand_voca(
    source: str,
    vocab: Vocabulary,
    rng: np.random.Generator,
    synonyms: dict[str, set[str]],
    registry: ConceptRegistry | None,
) -> str | None:
    for _ in range(MAX_ATTEMPTS):
        target = vocab.words[int(rng.integers(len(vocab.words)))]
        if not _rejects(source, target, synonyms, registry, group_rule=True):
            return target
    return None


def _sample_policy_target(
    policy: str,
    source: str,
    rng: np.random.Generator,
    registry: ConceptRegistry,
    vocab: Vocabulary,
    danger_words: list[str],
    synonyms: dict[str, set[str]],
) -> tuple[str | None, bool]:
    """Target word for a policy, or (None, _) on exhaustion.

    The bool marks a fallback to rand_voca (unmapped source word).
    """
    if policy == "rand_voca":
        return _sample_rand_voca(source, vocab, rng, synonyms, registry), False
    if policy == "danger":
        for _ in range(MAX_ATTEMPTS):
            target = danger_words[int(rng.integers(len(danger_words)))]
            if not _rejects(source, target, synonyms, registry, group_rule=False):
                return target, False
        return None, False
    sampler = sample_same_concept if policy == "same_concept" else sample_diff_concept
    try:
        for _ in range(MAX_ATTEMPTS):
            target = sampler(source, rng, registry, synonyms)
            if not _rejects(source, target, synonyms, registry, group_rule=False):
                return target, False
        return None, False
    except (UnmappedWord, NoCandidate):
        return _sample_rand_voca(source, vocab, rng, synonyms, registry), True


def gen_single_word_set(
    corpus: Corpus,
    consensus: list[ConsensusRecord],
    policy: str,
    registry: ConceptRegistry,
    vocab: Vocabulary,
    danger_words: list[str],
    seed: int = 0,
    synonyms: dict[str, set[str]] | None = None,
    strict: bool = False,
) -> GenerationResult:
    """One forged caption per consensus-scored original caption."""
    if policy not in SUBSTITUTION_POLICIES:
        raise ValueError(f"unknown policy {policy!r}")
    synonyms = synonyms or {}
    by_caption = {c.caption_id: c for c in consensus}
    result = GenerationResult(entries=[])
    for image in corpus.images:
        for cid in image.caption_ids:
            record = by_caption.get(cid)
            if record is None:
                result.skip("no_source_word")
                continue
            caption = corpus.captions[cid]
            idx = record.consensus_idx
            source = caption.tokens[idx]
            rng = derive_rng(seed, cid, policy)
            target, fallback = _sample_policy_target(
                policy, source, rng, registry, vocab, danger_words, synonyms
            )
            if target is None:
                if strict:
                    result.skip("exhausted")
                    continue
                target = _sample_rand_voca(source, vocab, rng, synonyms, registry)
                fallback = True
                if target is None:
                    result.skip("exhausted")
                    continue
            result.entries.append(
                CaptionManifestEntry(
                    new_caption_id=f"{cid}!{policy}@s{seed}",
                    orig_caption_id=cid,
                    image_id=caption.image_id,
                    policy=policy,
                    source_indices=[idx],
                    source_words=[source],
                    target_words=[target],
                    text=substitute(caption, idx, target),
                    seed=seed,
                    fallback=fallback,
                )
            )
    return result


def gen_deletion_set(
    corpus: Corpus,
    mode: str,
    ei_records: list[EIRecord] | None = None,
    seed: int = 0,
) -> GenerationResult:
    """One caption per original with a noun deleted (no replacement)."""
    if mode not in DELETION_MODES:
        raise ValueError(f"unknown deletion mode {mode!r}")
    by_caption: dict[str, EIRecord] = {}
    if mode in ("high_ei", "low_ei"):
        if not ei_records:
            raise ValueError(f"deletion mode {mode!r} needs EI records")
        models = {r.model for r in ei_records}
        if len(models) > 1:
            raise ValueError(f"deletion wants one model's EI records, got {sorted(models)}")
        by_caption = {r.caption_id: r for r in ei_records}
    policy = f"delete_{mode}"
    result = GenerationResult(entries=[])
    for image in corpus.images:
        for cid in image.caption_ids:
            caption = corpus.captions[cid]
            if len(caption.tokens) < 2:
                result.skip("too_short")
                continue
            if mode == "random":
                if not caption.noun_indices:
                    result.skip("no_noun")
                    continue
                rng = derive_rng(seed, cid, policy)
                idx = caption.noun_indices[int(rng.integers(len(caption.noun_indices)))]
            else:
                record = by_caption.get(cid)
                if record is None:
                    result.skip("no_ei_record")
                    continue
                idx = record.lowest_noun_idx if mode == "low_ei" else record.highest_noun_idx
            result.entries.append(
                CaptionManifestEntry(
                    new_caption_id=f"{cid}!{policy}@s{seed}",
                    orig_caption_id=cid,
                    image_id=caption.image_id,
                    policy=policy,
                    source_indices=[idx],
                    source_words=[caption.tokens[idx]],
                    target_words=[],
                    text=leave_one_out(caption, idx),
                    seed=seed,
                )
            )
    return result


def gen_multiword_set(
    corpus: Corpus,
    ks: tuple[int, ...] = MULTIWORD_K_RANGE,
    vocab: Vocabulary | None = None,
    seed: int = 0,
    registry: ConceptRegistry | None = None,
    synonyms: dict[str, set[str]] | None = None,
) -> GenerationResult:
    """Replace k random words (any part of speech) per caption, per k."""
    vocab = vocab or load_vocabulary()
    synonyms = synonyms or {}
    for k in ks:
        if not 2 <= k <= 5:
            raise ValueError(f"k must be in 2..5, got {k}")
    result = GenerationResult(entries=[])
    for k in ks:
        policy = f"multiword_{k}"
        for image in corpus.images:
            for cid in image.caption_ids:
                caption = corpus.captions[cid]
                if len(caption.tokens) < k:
                    result.skip(f"too_short_k{k}")
                    continue
                rng = derive_rng(seed, cid, policy)
                positions = sorted(int(p) for p in rng.choice(len(caption.tokens), size=k, replace=False))
                targets = []
                for pos in positions:
                    target = _sample_rand_voca(caption.tokens[pos], vocab, rng, synonyms, registry)
                    if target is None:
                        break
                    targets.append(target)
                if len(targets) != k:
                    result.skip(f"exhausted_k{k}")
                    continue
                tokens = list(caption.cased_tokens)
                for pos, target in zip(positions, targets):
                    tokens[pos] = target
                result.entries.append(
                    CaptionManifestEntry(
                        new_caption_id=f"{cid}!{policy}@s{seed}",
                        orig_caption_id=cid,
                        image_id=caption.image_id,
                        policy=policy,
                        source_indices=positions,
                        source_words=[caption.tokens[p] for p in positions],
                        target_words=targets,
                        text=" ".join(tokens),
                        seed=seed,
                    )
                )
    return result


def write_caption_manifest(entries: list[CaptionManifestEntry], path: str | Path) -> None:
    lines = [
        json.dumps(
            {
                "new_caption_id": e.new_caption_id,
                "orig_caption_id": e.orig_caption_id,
                "image_id": e.image_id,
                "policy": e.policy,
                "source_indices": e.source_indices,
                "source_words": e.source_words,
                "target_words": e.target_words,
                "text": e.text,
                "seed": e.seed,
                "fallback": e.fallback,
            },
            ensure_ascii=True,
            separators=(",", ":"),
        )
        for e in entries
    ]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def load_caption_manifest(path: str | Path) -> list[CaptionManifestEntry]:
    entries = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            entries.append(CaptionManifestEntry(**json.loads(line)))
    return entries
