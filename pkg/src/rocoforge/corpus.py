"""Corpus ingestion: Karpathy-style annotations, tokenization, noun tagging.

The tokenizer is deliberately dumb and deterministic: lowercase, split on
whitespace, strip punctuation off token edges (interior apostrophes and
hyphens survive). Noun tagging is lexicon membership against a shipped flat
word list minus a stop-noun exclusion list; there is no statistical tagger.
The stop list approximates "nouns whose substitution barely changes the
sentence" (row, group, picture, ...) and is editable data, not code.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import CorpusError

# ASCII punctuation plus the curly quotes/dashes that show up in captions.
_EDGE_PUNCT = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~‘’“”–—…"

DEFAULT_STOP_NOUNS = (
    "row group bunch number picture photo image view scene side lot couple pair kind type"
).split()


def tokenize_cased(text: str) -> list[str]:
    """Word tokens with original casing; punctuation-only chunks dropped."""
    out = []
    for chunk in text.split():
        core = chunk.strip(_EDGE_PUNCT)
        if core:
            out.append(core)
    return out


def tokenize(text: str) -> list[str]:
    """Lowercased word tokens. Deterministic; empty text gives []."""
    return [t.lower() for t in tokenize_cased(text)]


def detokenize(tokens: list[str]) -> str:
    return " ".join(tokens)


@dataclass(frozen=True)
class NounLexicon:
    nouns: frozenset[str]
    stop: frozenset[str]


def _read_wordlist(path: Path) -> list[str]:
    words = []
    for line in path.read_text(encoding="utf-8").splitlines():
        word = line.split("#", 1)[0].strip().lower()
        if word:
            words.append(word)
    return words


def _data_path(name: str) -> Path:
    return Path(str(resources.files("rocoforge").joinpath("data", name)))


def load_noun_lexicon(nouns_path: Path | None = None, stop_path: Path | None = None) -> NounLexicon:
    nouns = _read_wordlist(nouns_path or _data_path("nouns.txt"))
    stop = _read_wordlist(stop_path) if stop_path else list(DEFAULT_STOP_NOUNS)
    return NounLexicon(nouns=frozenset(nouns), stop=frozenset(stop))


def tag_nouns(tokens: list[str], lexicon: NounLexicon) -> list[int]:
    """Indices of lexicon nouns, stop nouns excluded. Sorted by position."""
    return [i for i, tok in enumerate(tokens) if tok in lexicon.nouns and tok not in lexicon.stop]


@dataclass
class CaptionRecord:
    caption_id: str
    image_id: str
    text: str
    tokens: list[str]
    noun_indices: list[int]
    cased_tokens: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.cased_tokens:
            self.cased_tokens = list(self.tokens)
        if len(self.cased_tokens) != len(self.tokens):
            raise CorpusError(f"caption {self.caption_id}: cased_tokens misaligned with tokens")
        for idx in self.noun_indices:
            if not 0 <= idx < len(self.tokens):
                raise CorpusError(f"caption {self.caption_id}: noun index {idx} out of range")
        if sorted(set(self.noun_indices)) != list(self.noun_indices):
            raise CorpusError(f"caption {self.caption_id}: noun_indices not strictly increasing")


@dataclass
class ImageRecord:
    image_id: str
    file_path: str
    caption_ids: list[str]


@dataclass
class Corpus:
    images: list[ImageRecord]
    captions: dict[str, CaptionRecord]
    split_name: str

    def validate(self) -> None:
        seen: set[str] = set()
        for image in self.images:
            if len(image.caption_ids) != 5:
                raise CorpusError(f"image {image.image_id} has {len(image.caption_ids)} captions, expected 5")
            for cid in image.caption_ids:
                if cid not in self.captions:
                    raise CorpusError(f"image {image.image_id} references missing caption {cid}")
                if self.captions[cid].image_id != image.image_id:
                    raise CorpusError(f"caption {cid} does not belong to image {image.image_id}")
                seen.add(cid)
        orphans = set(self.captions) - seen
        if orphans:
            raise CorpusError(f"orphan captions: {sorted(orphans)[:5]}")

    def captions_of(self, image_id: str) -> list[CaptionRecord]:
        image = next(img for img in self.images if img.image_id == image_id)
        return [self.captions[cid] for cid in image.caption_ids]


def _caption_from_sentence(sent: dict, image_id: str, index: int, lexicon: NounLexicon) -> CaptionRecord:
    raw = sent.get("raw", "")
    caption_id = str(sent["sentid"]) if "sentid" in sent else f"{image_id}#{index}"
    if "tokens" in sent and sent["tokens"]:
        tokens = [str(t).lower() for t in sent["tokens"]]
        cased = [str(t) for t in sent["tokens"]]
    else:
        cased = tokenize_cased(raw)
        tokens = [t.lower() for t in cased]
    return CaptionRecord(
        caption_id=caption_id,
        image_id=image_id,
        text=raw if raw else detokenize(cased),
        tokens=tokens,
        noun_indices=tag_nouns(tokens, lexicon),
        cased_tokens=cased,
    )


def load_karpathy_split(
    path: str | Path,
    split: str = "test",
    strict: bool = True,
    lexicon: NounLexicon | None = None,
) -> Corpus:
    """Load one split of a Karpathy-style annotation file.

    Lenient mode truncates images with more than 5 captions and drops images
    with fewer; strict mode rejects both, naming the image.
    """
    path = Path(path)
    lexicon = lexicon or load_noun_lexicon()
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorpusError(f"malformed JSON in {path} at byte offset {exc.pos}: {exc.msg}") from exc

    images: list[ImageRecord] = []
    captions: dict[str, CaptionRecord] = {}
    for entry in payload.get("images", []):
        if entry.get("split") != split:
            continue
        image_id = str(entry.get("cocoid", entry.get("imgid", "")))
        if not image_id:
            raise CorpusError(f"image entry without cocoid/imgid in {path}")
        sentences = entry.get("sentences", [])
        if len(sentences) != 5:
            if strict:
                raise CorpusError(
                    f"image {image_id} has {len(sentences)} captions, expected 5 (strict mode)"
                )
            if len(sentences) < 5:
                continue
            sentences = sentences[:5]
        records = [_caption_from_sentence(s, image_id, k, lexicon) for k, s in enumerate(sentences)]
        images.append(
            ImageRecord(
                image_id=image_id,
                file_path=str(entry.get("filename", "")),
                caption_ids=[r.caption_id for r in records],
            )
        )
        for record in records:
            if record.caption_id in captions:
                raise CorpusError(f"duplicate caption id {record.caption_id}")
            captions[record.caption_id] = record
    corpus = Corpus(images=images, captions=captions, split_name=split)
    corpus.validate()
    return corpus


def save_corpus_jsonl(corpus: Corpus, path: str | Path) -> None:
    """One line per image with embedded captions; byte-stable field order."""
    lines = []
    for image in corpus.images:
        record = {
            "image_id": image.image_id,
            "file_path": image.file_path,
            "split": corpus.split_name,
            "captions": [
                {
                    "caption_id": c.caption_id,
                    "text": c.text,
                    "tokens": c.tokens,
                    "cased_tokens": c.cased_tokens,
                    "noun_indices": c.noun_indices,
                }
                for c in (corpus.captions[cid] for cid in image.caption_ids)
            ],
        }
        lines.append(json.dumps(record, ensure_ascii=True, separators=(",", ":")))
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def load_corpus_jsonl(path: str | Path) -> Corpus:
    images: list[ImageRecord] = []
    captions: dict[str, CaptionRecord] = {}
    split_name = ""
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"malformed JSONL in {path} line {lineno} offset {exc.pos}: {exc.msg}") from exc
        split_name = split_name or record["split"]
        if record["split"] != split_name:
            raise CorpusError(f"mixed splits in {path}: {record['split']} vs {split_name}")
        caption_ids = []
        for c in record["captions"]:
            cap = CaptionRecord(
                caption_id=c["caption_id"],
                image_id=record["image_id"],
                text=c["text"],
                tokens=list(c["tokens"]),
                noun_indices=list(c["noun_indices"]),
                cased_tokens=list(c["cased_tokens"]),
            )
            captions[cap.caption_id] = cap
            caption_ids.append(cap.caption_id)
        images.append(
            ImageRecord(image_id=record["image_id"], file_path=record["file_path"], caption_ids=caption_ids)
        )
    corpus = Corpus(images=images, captions=captions, split_name=split_name)
    corpus.validate()
    return corpus
