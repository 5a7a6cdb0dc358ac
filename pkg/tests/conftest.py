import json
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from rocoforge.concepts import load_registry, load_synonyms
from rocoforge.corpus import Corpus, CaptionRecord, ImageRecord, load_noun_lexicon, tag_nouns, tokenize_cased
from rocoforge.captions import load_danger_words, load_vocabulary

# Hand-written caption pool; nouns drawn from the shipped lexicon so tagging
# and concept lookups behave predictably in tests.
TEMPLATE_CAPTIONS = [
    "A man with a red helmet on a small moped on a dirt road .",
    "A woman riding a horse on the beach .",
    "Two dogs playing with a ball in the park .",
    "A plate of pizza sitting on a wooden table .",
    "A group of people standing in a kitchen .",
    "A cat sleeping on a couch next to a laptop .",
    "A bus parked in front of a tall building .",
    "Several boats floating in the harbor at night .",
    "A young girl eating a sandwich at the market .",
    "An old clock hanging on the wall of the station .",
    "A vase of flowers sitting near a window .",
    "A man holding an umbrella next to a train .",
    "Two elephants walking through the tall grass .",
    "A pair of skiers going down a snowy mountain .",
    "A bowl of soup and a spoon on the counter .",
    "A person riding a skateboard down the street .",
    "A kitchen with a stove and a refrigerator .",
    "A bird perched on a branch of a tree .",
    "A truck driving across a long bridge .",
    "A child flying a kite in an open field .",
    "A bathroom with a white sink and a mirror .",
    "A herd of sheep grazing in a green meadow .",
    "A pile of books stacked on a desk .",
    "A police officer standing near a motorcycle .",
    "A surfer riding a large wave in the ocean .",
]


@pytest.fixture(scope="session")
def lexicon():
    return load_noun_lexicon()


@pytest.fixture(scope="session")
def registry():
    return load_registry()


@pytest.fixture(scope="session")
def synonyms():
    return load_synonyms()


@pytest.fixture(scope="session")
def vocab():
    return load_vocabulary()


@pytest.fixture(scope="session")
def danger_words():
    return load_danger_words()


def make_caption(caption_id: str, image_id: str, text: str, lexicon) -> CaptionRecord:
    cased = tokenize_cased(text)
    tokens = [t.lower() for t in cased]
    return CaptionRecord(
        caption_id=caption_id,
        image_id=image_id,
        text=text,
        tokens=tokens,
        noun_indices=tag_nouns(tokens, lexicon),
        cased_tokens=cased,
    )


def write_noise_png(path: Path, seed: int, size=(48, 32)) -> None:
    rng = np.random.default_rng(seed)
    pixels = rng.integers(0, 256, size=(size[1], size[0], 3), dtype=np.uint8)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(pixels, "RGB").save(path, format="PNG")


def build_corpus(root: Path, n_images: int, lexicon, with_images: bool = True, size=(48, 32)) -> Corpus:
    """Synthetic corpus: noise PNGs plus five template captions per image."""
    images = []
    captions = {}
    for i in range(n_images):
        image_id = f"im{i:04d}"
        file_path = f"{image_id}.png"
        if with_images:
            write_noise_png(root / file_path, seed=1000 + i, size=size)
        caption_ids = []
        for j in range(5):
            cid = f"{image_id}c{j}"
            text = TEMPLATE_CAPTIONS[(5 * i + j) % len(TEMPLATE_CAPTIONS)]
            captions[cid] = make_caption(cid, image_id, text, lexicon)
            caption_ids.append(cid)
        images.append(ImageRecord(image_id=image_id, file_path=file_path, caption_ids=caption_ids))
    corpus = Corpus(images=images, captions=captions, split_name="test")
    corpus.validate()
    return corpus


def write_karpathy_json(path: Path, n_images: int, split: str = "test", captions_per_image: int = 5) -> None:
    entries = []
    for i in range(n_images):
        sentences = []
        for j in range(captions_per_image):
            text = TEMPLATE_CAPTIONS[(captions_per_image * i + j) % len(TEMPLATE_CAPTIONS)]
            sentences.append({"raw": text, "sentid": 10_000 + 10 * i + j})
        entries.append(
            {"filename": f"im{i:04d}.png", "split": split, "cocoid": 5000 + i, "sentences": sentences}
        )
    path.write_text(json.dumps({"images": entries}), encoding="utf-8")


class WeightedBagBackend:
    """Text backend with explicit token weights on orthogonal axes.

    With every distinct token on its own axis, the cosine between a caption
    and its leave-one-out variant is an exact, strictly monotone function of
    the removed token's weight, so argmin/argmax expectations are provable.
    """

    def __init__(self, weights: dict[str, float], dim: int = 64, default_weight: float = 1.0):
        self.weights = dict(weights)
        self.dim = dim
        self.default_weight = default_weight
        self._axes: dict[str, int] = {}

    def _axis(self, token: str) -> int:
        if token not in self._axes:
            if len(self._axes) >= self.dim:
                raise ValueError("WeightedBagBackend ran out of axes; raise dim")
            self._axes[token] = len(self._axes)
        return self._axes[token]

    def embed_texts(self, model: str, dim: int, texts: list[str]) -> np.ndarray:
        rows = []
        for text in texts:
            acc = np.zeros(self.dim, dtype=np.float64)
            for token in text.lower().split():
                acc[self._axis(token)] += self.weights.get(token, self.default_weight)
            norm = np.linalg.norm(acc)
            rows.append((acc / norm if norm else acc).astype(np.float32))
        return np.stack(rows) if rows else np.zeros((0, self.dim), np.float32)

    def embed_images(self, model: str, dim: int, blobs: list[bytes]) -> np.ndarray:
        raise NotImplementedError


class ScaledBackend:
    """Wraps a backend, multiplying every vector by a positive constant."""

    def __init__(self, inner, scale: float):
        self.inner = inner
        self.scale = scale

    def embed_texts(self, model, dim, texts):
        return self.inner.embed_texts(model, dim, texts) * self.scale

    def embed_images(self, model, dim, blobs):
        return self.inner.embed_images(model, dim, blobs) * self.scale
