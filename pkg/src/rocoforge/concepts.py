"""Concept-group registry: word -> group lookup and in/out-of-group sampling.

The registry file is a two-column TSV (group_id, lemma). The shipped file
reconstructs a GRIT-style grouping of caption nouns plus seven added groups
whose sizes tests pin down; exact membership of the added groups is a
judgment call, so the lists live in data where they can be audited and
edited. A lemma belongs to at most one group; on conflict the first file
entry wins and a warning is logged.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import NoCandidate, RegistryError, UnmappedWord

log = logging.getLogger(__name__)

REQUIRED_GROUP_SIZES = {
    "material": 32,
    "color": 28,
    "direction": 50,
    "vehicle_part": 12,
    "shape": 15,
    "event": 11,
    "number": 14,
}


@dataclass
class ConceptGroup:
    group_id: str
    lemmas: set[str] = field(default_factory=set)


@dataclass
class ConceptRegistry:
    groups: dict[str, ConceptGroup]
    lemma_index: dict[str, str]

    def sorted_lemmas(self, group_id: str) -> list[str]:
        return sorted(self.groups[group_id].lemmas)

    @property
    def all_lemmas(self) -> list[str]:
        return sorted(self.lemma_index)


def _default_path(name: str) -> Path:
    return Path(str(resources.files("rocoforge").joinpath("data", name)))


def load_registry(path: str | Path | None = None, strict: bool = True) -> ConceptRegistry:
    """Load a registry TSV. Strict mode enforces the seven added groups."""
    path = Path(path) if path else _default_path("concept_groups.tsv")
    if not path.exists():
        raise RegistryError(f"registry file not found: {path}")
    groups: dict[str, ConceptGroup] = {}
    lemma_index: dict[str, str] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].rstrip()
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise RegistryError(f"{path}:{lineno}: expected group<TAB>lemma, got {line!r}")
        group_id, lemma = parts[0].strip(), parts[1].strip().lower()
        if not group_id or not lemma:
            raise RegistryError(f"{path}:{lineno}: empty group or lemma")
        if lemma in lemma_index:
            if lemma_index[lemma] != group_id:
                log.warning("lemma %r already in group %r; ignoring duplicate in %r", lemma, lemma_index[lemma], group_id)
            continue
        groups.setdefault(group_id, ConceptGroup(group_id)).lemmas.add(lemma)
        lemma_index[lemma] = group_id
    if strict:
        for group_id, size in REQUIRED_GROUP_SIZES.items():
            if group_id not in groups:
                raise RegistryError(f"registry missing required group {group_id!r}")
            if len(groups[group_id].lemmas) < size:
                raise RegistryError(
                    f"group {group_id!r} has {len(groups[group_id].lemmas)} lemmas, needs >= {size}"
                )
    for group in groups.values():
        if not group.lemmas:
            raise RegistryError(f"group {group.group_id!r} is empty")
    return ConceptRegistry(groups=groups, lemma_index=lemma_index)


def load_synonyms(path: str | Path | None = None) -> dict[str, set[str]]:
    """Symmetric word->partners map from a two-column TSV."""
    path = Path(path) if path else _default_path("synonyms.tsv")
    pairs: dict[str, set[str]] = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].rstrip()
        if not line:
            continue
        a, b = (w.strip().lower() for w in line.split("\t"))
        pairs.setdefault(a, set()).add(b)
        pairs.setdefault(b, set()).add(a)
    return pairs


def group_of(word: str, registry: ConceptRegistry) -> str | None:
    return registry.lemma_index.get(word.lower())


def _draw(candidates: list[str], rng: np.random.Generator) -> str:
    return candidates[int(rng.integers(len(candidates)))]


def sample_same_concept(
    source: str,
    rng: np.random.Generator,
    registry: ConceptRegistry,
    synonyms: dict[str, set[str]] | None = None,
) -> str:
    """Uniform lemma from the source's own group, excluding the source and
    its synonyms."""
    source = source.lower()
    group_id = group_of(source, registry)
    if group_id is None:
        raise UnmappedWord(f"{source!r} is not in any concept group")
    excluded = {source} | (synonyms or {}).get(source, set())
    candidates = [w for w in registry.sorted_lemmas(group_id) if w not in excluded]
    if not candidates:
        raise NoCandidate(f"group {group_id!r} exhausted for source {source!r}")
    return _draw(candidates, rng)


def sample_diff_concept(
    source: str,
    rng: np.random.Generator,
    registry: ConceptRegistry,
    synonyms: dict[str, set[str]] | None = None,
) -> str:
    """Uniform lemma over all groups other than the source's."""
    source = source.lower()
    group_id = group_of(source, registry)
    if group_id is None:
        raise UnmappedWord(f"{source!r} is not in any concept group")
    excluded = {source} | (synonyms or {}).get(source, set())
    candidates = [w for w in registry.all_lemmas if registry.lemma_index[w] != group_id and w not in excluded]
    if not candidates:
        raise NoCandidate(f"no lemma outside group {group_id!r}")
    return _draw(candidates, rng)
