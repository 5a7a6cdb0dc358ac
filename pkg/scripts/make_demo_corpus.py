#!/usr/bin/env python3
"""Build a small synthetic corpus (annotation JSON + noise PNGs) for demos.

The captions are plain English sentences over the shipped noun lexicon and
the images are seeded RGB noise, which is all the in-process stub encoder
needs. Real runs replace this with an actual annotation file and image set.

Usage: python scripts/make_demo_corpus.py OUT_DIR [N_IMAGES]
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np
from PIL import Image

CAPTIONS = [
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


def main() -> None:
    if len(sys.argv) < 2:
        raise SystemExit(__doc__)
    out_dir = Path(sys.argv[1])
    n_images = int(sys.argv[2]) if len(sys.argv) > 2 else 20
    out_dir.mkdir(parents=True, exist_ok=True)

    entries = []
    for i in range(n_images):
        rng = np.random.default_rng(7000 + i)
        pixels = rng.integers(0, 256, size=(48, 64, 3), dtype=np.uint8)
        filename = f"demo{i:04d}.png"
        Image.fromarray(pixels, "RGB").save(out_dir / filename, format="PNG")
        sentences = [
            {"raw": CAPTIONS[(5 * i + j) % len(CAPTIONS)], "sentid": 100 * i + j} for j in range(5)
        ]
        entries.append({"filename": filename, "split": "test", "cocoid": 42000 + i, "sentences": sentences})

    (out_dir / "annotations.json").write_text(json.dumps({"images": entries}, indent=1), encoding="utf-8")
    print(f"wrote {out_dir}/annotations.json and {n_images} images")


if __name__ == "__main__":
    main()
