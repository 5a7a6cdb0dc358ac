#!/usr/bin/env python3
"""Regenerate fixtures/stub_vectors.json, the cross-implementation contract.

Any service that claims stub compatibility must reproduce every vector in
this file bit for bit (float32). The core test suite also checks itself
against the committed file, so accidental changes to the stub algorithm
show up as a failing contract test on both sides.
"""

from __future__ import annotations

import base64
import io
import json
from pathlib import Path

import numpy as np
from PIL import Image

from rocoforge.stub import STUB_VERSION, stub_image_vector, stub_text_vector

OUT = Path(__file__).resolve().parent.parent / "fixtures" / "stub_vectors.json"

TEXTS = [
    "a man with a red helmet on a small moped on a dirt road",
    "A man with a red helmet on a small moped on a dirt road .",
    "a woman riding a horse on the beach",
    "two dogs playing with a ball in the park",
    "a plate of pizza sitting on a wooden table",
    "a group of people standing in a kitchen",
    "a cat sleeping on a couch next to a laptop",
    "a bus parked in front of a tall building",
    "several boats floating in the harbor at night",
    "a young girl eating a sandwich at the market",
    "an old clock hanging on the wall of the station",
    "a man holding an umbrella next to a train",
    "a man holding an gun next to a train",
    "a man with a red helmet on a small on a dirt road",
    "umbrella",
    "gun",
    "pizza",
    "a",
    "a a a",
    "word",
    "Word",
    "WORD",
    "  leading and   internal   spaces  ",
    "tab\tseparated\ttokens",
    "café au lait",
    "don't stop",
    "",
    " ",
    "x",
    "xy",
    "a very long caption that keeps going with many distinct words to exercise accumulation order one two three four five six seven eight nine ten",
    "a kitchen with a stove and a refrigerator",
    "a bird perched on a branch of a tree",
    "a truck driving across a long bridge",
    "a child flying a kite in an open field",
    "a bathroom with a white sink and a mirror",
    "a herd of sheep grazing in a green meadow",
    "a pile of books stacked on a desk",
    "a police officer standing near a motorcycle",
    "a surfer riding a large wave in the ocean",
    "a vase of flowers sitting near a window",
    "two elephants walking through the tall grass",
]


def _pngs() -> list[bytes]:
    blobs = []
    for seed, size in ((1, (8, 6)), (2, (16, 12)), (3, (5, 5))):
        rng = np.random.default_rng(seed)
        arr = rng.integers(0, 256, size=(size[1], size[0], 3), dtype=np.uint8)
        buf = io.BytesIO()
        Image.fromarray(arr, "RGB").save(buf, format="PNG")
        blobs.append(buf.getvalue())
    buf = io.BytesIO()
    Image.new("RGB", (4, 4), (255, 0, 0)).save(buf, format="PNG")
    blobs.append(buf.getvalue())
    return blobs


def main() -> None:
    text_entries = []
    for i, text in enumerate(TEXTS):
        model, dim = [("stub", 64), ("blip", 256), ("clip", 512)][i % 3]
        vector = stub_text_vector(model, text, dim)
        text_entries.append(
            {"model": model, "dim": dim, "input": text, "vector": [float(x) for x in vector]}
        )

    image_entries = []
    for i, blob in enumerate(_pngs() * 2):
        model, dim = [("stub", 64), ("blip", 256)][i % 2]
        with Image.open(io.BytesIO(blob)) as img:
            rgb = img.convert("RGB")
            vector = stub_image_vector(model, rgb.width, rgb.height, rgb.tobytes(), dim)
        image_entries.append(
            {
                "model": model,
                "dim": dim,
                "png_b64": base64.b64encode(blob).decode("ascii"),
                "vector": [float(x) for x in vector],
            }
        )

    payload = {
        "stub_version": STUB_VERSION,
        "text": text_entries,
        "image": image_entries,
    }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8")
    print(f"wrote {OUT}: {len(text_entries)} text + {len(image_entries)} image entries")


if __name__ == "__main__":
    main()
