"""Fooling-image generation: Mix (global blend) and Patch (rectangle paste).

Mix blends a partner image into the original with weight (1 - lambda);
Patch pastes the partner, resized, into a random rectangle whose area is
(1 - lambda) of the image, so lambda always means "fraction of original
content". Partners come from the corpus itself via a seeded derangement,
with a best-effort pass that avoids partners sharing noun lemmas with the
original's captions.

Outputs are lossless PNGs written atomically; for a fixed seed the bytes
are identical across reruns and worker counts.
"""

from __future__ import annotations

import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .corpus import Corpus
from .ei import derive_rng
from .errors import InvalidImage

log = logging.getLogger(__name__)

MODES = ("mix", "patch")
DEFAULT_LAMBDA_GRID = (0.9, 0.8, 0.7, 0.6)


@dataclass
class ImageManifestEntry:
    new_image_id: str
    orig_image_id: str
    fake_image_id: str
    mode: str
    lambda_requested: float
    lambda_actual: float
    seed: int
    mask_rect: tuple[int, int, int, int] | None
    output_path: str

    def __post_init__(self) -> None:
        if self.mode == "mix":
            if self.mask_rect is not None or self.lambda_actual != self.lambda_requested:
                raise ValueError(f"mix entry {self.new_image_id} must have exact lambda and no rect")
        if self.new_image_id == self.orig_image_id:
            raise ValueError("generated image id equals the original id")


@dataclass
class ImageGenerationResult:
    entries: list[ImageManifestEntry]
    skipped: dict[str, int] = field(default_factory=dict)

    def skip(self, reason: str) -> None:
        self.skipped[reason] = self.skipped.get(reason, 0) + 1


def _check_size(img: Image.Image) -> None:
    if img.width == 0 or img.height == 0:
        raise InvalidImage(f"image has a zero dimension: {img.size}")


def mix(orig: Image.Image, fake: Image.Image, lam: float) -> Image.Image:
    """Per-pixel convex blend, rounded to 8 bits. lam=1 returns the original."""
    if not 0.0 < lam <= 1.0:
        raise ValueError(f"lambda must be in (0, 1], got {lam}")
    _check_size(orig)
    _check_size(fake)
    orig_rgb = orig.convert("RGB")
    fake_rgb = fake.convert("RGB")
    if fake_rgb.size != orig_rgb.size:
        fake_rgb = fake_rgb.resize(orig_rgb.size, Image.BILINEAR)
    blended = lam * np.asarray(orig_rgb, dtype=np.float64) + (1.0 - lam) * np.asarray(fake_rgb, dtype=np.float64)
    return Image.fromarray(np.rint(blended).clip(0, 255).astype(np.uint8), mode="RGB")


def _patch_rect(width: int, height: int, lambda_target: float, rng: np.random.Generator):
    """Rectangle of area ~ (1 - lambda) * W * H, aspect ratio ~ U[0.5, 2]."""
    area = (1.0 - lambda_target) * width * height
    if area < 0.5:
        return None
    aspect = float(rng.uniform(0.5, 2.0))
    w = int(round(math.sqrt(area * aspect)))
    w = min(max(w, 1), width)
    h = int(round(area / w))
    if h > height:
        h = height
        w = min(max(int(round(area / h)), 1), width)
    h = max(h, 1)
    x = int(rng.integers(0, width - w + 1))
    y = int(rng.integers(0, height - h + 1))
    return x, y, w, h


def patch(
    orig: Image.Image,
    fake: Image.Image,
    lambda_target: float,
    rng: np.random.Generator,
) -> tuple[Image.Image, float, tuple[int, int, int, int] | None]:
    """Paste the partner into a random rectangle; returns realized lambda."""
    if not 0.0 < lambda_target <= 1.0:
        raise ValueError(f"lambda must be in (0, 1], got {lambda_target}")
    _check_size(orig)
    _check_size(fake)
    orig_rgb = orig.convert("RGB")
    rect = _patch_rect(orig_rgb.width, orig_rgb.height, lambda_target, rng)
    if rect is None:
        return orig_rgb.copy(), 1.0, None
    x, y, w, h = rect
    out = orig_rgb.copy()
    out.paste(fake.convert("RGB").resize((w, h), Image.BILINEAR), (x, y))
    lambda_actual = 1.0 - (w * h) / (orig_rgb.width * orig_rgb.height)
    return out, lambda_actual, rect


def _noun_sets(corpus: Corpus) -> dict[str, set[str]]:
    nouns: dict[str, set[str]] = {}
    for image in corpus.images:
        lemmas: set[str] = set()
        for cid in image.caption_ids:
            caption = corpus.captions[cid]
            lemmas.update(caption.tokens[i] for i in caption.noun_indices)
        nouns[image.image_id] = lemmas
    return nouns


def pair_fakes(corpus: Corpus, rng: np.random.Generator) -> dict[str, str]:
    """Seeded derangement mapping each image to its fooling partner.

    A single improvement pass swaps assignments whose partner shares a noun
    lemma with the original's captions; leftovers are logged, not fatal.
    """
    ids = [img.image_id for img in corpus.images]
    n = len(ids)
    if n < 2:
        raise ValueError("pairing needs at least 2 images")
    perm = [int(p) for p in rng.permutation(n)]
    fixed = [i for i in range(n) if perm[i] == i]
    if len(fixed) == 1:
        j = (fixed[0] + 1) % n
        perm[fixed[0]], perm[j] = perm[j], perm[fixed[0]]
    elif len(fixed) > 1:
        rotated = fixed[1:] + fixed[:1]
        values = [perm[i] for i in fixed]
        for i, v in zip(rotated, values):
            perm[i] = v

    nouns = _noun_sets(corpus)

    def conflicted(i: int) -> bool:
        return bool(nouns[ids[i]] & nouns[ids[perm[i]]])

    for i in range(n):
        if not conflicted(i):
            continue
        for j in range(n):
            if j == i or perm[j] == i or perm[i] == j:
                continue
            if nouns[ids[i]] & nouns[ids[perm[j]]]:
                continue
            if nouns[ids[j]] & nouns[ids[perm[i]]]:
                continue
            perm[i], perm[j] = perm[j], perm[i]
            break
    leftovers = sum(1 for i in range(n) if conflicted(i))
    if leftovers:
        log.info("pair_fakes: %d/%d pairs still share a noun lemma", leftovers, n)
    return {ids[i]: ids[perm[i]] for i in range(n)}


def _atomic_save_png(img: Image.Image, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    img.save(tmp, format="PNG")
    os.replace(tmp, path)


def lambda_label(lam: float) -> str:
    return f"{lam:g}"


def gen_image_set(
    corpus: Corpus,
    images_root: str | Path,
    mode: str,
    lam: float,
    seed: int,
    out_dir: str | Path,
    jobs: int = 1,
) -> ImageGenerationResult:
    """One fooling image per original, written under mode/lambda/seed."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if not 0.0 < lam < 1.0:
        raise ValueError(f"lambda grid values must be in (0, 1), got {lam}")
    images_root = Path(images_root)
    out_dir = Path(out_dir)
    lam_str = lambda_label(lam)
    partner = pair_fakes(corpus, derive_rng(seed, "pair"))
    path_of = {img.image_id: images_root / img.file_path for img in corpus.images}

    def forge(image_id: str) -> ImageManifestEntry | None:
        fake_id = partner[image_id]
        try:
            with Image.open(path_of[image_id]) as orig, Image.open(path_of[fake_id]) as fake:
                rng = derive_rng(seed, image_id, mode, lam_str)
                if mode == "mix":
                    out, lambda_actual, rect = mix(orig, fake, lam), lam, None
                else:
                    out, lambda_actual, rect = patch(orig, fake, lam, rng)
        except (OSError, InvalidImage) as exc:
            log.warning("skipping image %s: %s", image_id, exc)
            return None
        rel = Path(mode) / lam_str / str(seed) / f"{image_id}.png"
        _atomic_save_png(out, out_dir / rel)
        return ImageManifestEntry(
            new_image_id=f"{image_id}!{mode}@l{lam_str}s{seed}",
            orig_image_id=image_id,
            fake_image_id=fake_id,
            mode=mode,
            lambda_requested=lam,
            lambda_actual=lambda_actual,
            seed=seed,
            mask_rect=rect,
            output_path=str(rel),
        )

    ids = [img.image_id for img in corpus.images]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            maybe_entries = list(pool.map(forge, ids))
    else:
        maybe_entries = [forge(i) for i in ids]
    result = ImageGenerationResult(entries=[])
    for entry in maybe_entries:
        if entry is None:
            result.skip("unreadable")
        else:
            result.entries.append(entry)
    return result


def write_image_manifest(entries: list[ImageManifestEntry], path: str | Path) -> None:
    lines = [
        json.dumps(
            {
                "new_image_id": e.new_image_id,
                "orig_image_id": e.orig_image_id,
                "fake_image_id": e.fake_image_id,
                "mode": e.mode,
                "lambda_requested": e.lambda_requested,
                "lambda_actual": e.lambda_actual,
                "seed": e.seed,
                "mask_rect": list(e.mask_rect) if e.mask_rect else None,
                "output_path": e.output_path,
            },
            ensure_ascii=True,
            separators=(",", ":"),
        )
        for e in entries
    ]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def load_image_manifest(path: str | Path) -> list[ImageManifestEntry]:
    entries = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        d = json.loads(line)
        d["mask_rect"] = tuple(d["mask_rect"]) if d["mask_rect"] else None
        entries.append(ImageManifestEntry(**d))
    return entries
