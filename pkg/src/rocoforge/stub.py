"""Deterministic stub embeddings.

The stub stands in for real encoders in tests and dry runs. It is specified
down to the bit so that an out-of-process service can reimplement it and
produce byte-identical float32 vectors (a shared fixture file pins this):

* value expansion: ``sha256(seed || uint32_be(counter))`` digests are split
  into big-endian uint32 words, each mapped to ``u / 2**31 - 1.0`` (exact in
  IEEE-754 float64);
* all accumulation is plain sequential float64 arithmetic (no pairwise or
  compensated summation);
* the final vector is L2-normalized in float64 and only then rounded to
  float32.

Text inputs are embedded as a weighted bag of whitespace tokens: each token
contributes ``weight(token) * unit_vector(token)``, with the weight drawn
deterministically from the token hash. Removing one token therefore shifts
the caption embedding by an amount that grows with that token's weight,
which is what influence-score tests lean on. Image inputs are embedded from
their decoded RGB pixels, so any pixel-level edit changes the vector.
"""

from __future__ import annotations

import hashlib
import math
import struct
from functools import lru_cache

import numpy as np

from .errors import NumericalDegeneracy

STUB_VERSION = 1

_TOKEN_TAG = b"\x00tok\x00"
_WEIGHT_TAG = b"\x00wgt\x00"
_IMAGE_TAG = b"\x00img\x00"
_EMPTY_TEXT_PAYLOAD = b"\x00empty-text"


def _expand(seed: bytes, dim: int) -> list[float]:
    """Expand ``seed`` into ``dim`` float64 values in [-1, 1)."""
    values: list[float] = []
    counter = 0
    while len(values) < dim:
        digest = hashlib.sha256(seed + counter.to_bytes(4, "big")).digest()
        for off in range(0, 32, 4):
            if len(values) == dim:
                break
            u = int.from_bytes(digest[off : off + 4], "big")
            values.append(u / 2147483648.0 - 1.0)
        counter += 1
    return values


def _normalize(values: list[float]) -> list[float]:
    # Sequential float64 accumulation and IEEE sqrt keep this reproducible
    # bit for bit in any language with correctly rounded primitives.
    acc = 0.0
    for v in values:
        acc += v * v
    norm = math.sqrt(acc)
    if norm == 0.0:
        raise NumericalDegeneracy("stub expansion produced a zero vector")
    return [v / norm for v in values]


def _to_float32(values: list[float]) -> np.ndarray:
    return np.array(struct.unpack(f"<{len(values)}f", struct.pack(f"<{len(values)}f", *values)), dtype=np.float32)


def stub_vector(data: bytes, dim: int) -> np.ndarray:
    """Unit-norm float32 vector derived from raw bytes.

    Deterministic, and sensitive to any byte change in ``data``.
    """
    if dim < 2:
        raise ValueError(f"stub dim must be >= 2, got {dim}")
    return _to_float32(_normalize(_expand(data, dim)))


@lru_cache(maxsize=65536)
def _token_unit(model: str, token: str, dim: int) -> tuple[float, ...]:
    seed = model.encode("utf-8") + _TOKEN_TAG + token.encode("utf-8")
    return tuple(_normalize(_expand(seed, dim)))


@lru_cache(maxsize=65536)
def stub_token_weight(model: str, token: str) -> float:
    """Deterministic per-token weight in [0.5, 1.5)."""
    seed = model.encode("utf-8") + _WEIGHT_TAG + token.encode("utf-8")
    u = int.from_bytes(hashlib.sha256(seed).digest()[:4], "big")
    return 0.5 + u / 4294967296.0


def stub_text_tokens(text: str) -> list[str]:
    """Whitespace tokenization used by the text stub (lowercased)."""
    return text.lower().split()


def stub_text_vector(model: str, text: str, dim: int) -> np.ndarray:
    """Weighted bag-of-tokens embedding of ``text``."""
    tokens = stub_text_tokens(text)
    if not tokens:
        return stub_vector(model.encode("utf-8") + _EMPTY_TEXT_PAYLOAD, dim)
    acc = [0.0] * dim
    for token in tokens:
        w = stub_token_weight(model, token)
        unit = _token_unit(model, token, dim)
        for i in range(dim):
            acc[i] += w * unit[i]
    return _to_float32(_normalize(acc))


def stub_image_payload(width: int, height: int, rgb: bytes) -> bytes:
    """Canonical byte payload for decoded pixels: RGB8 magic, size, rows."""
    if len(rgb) != width * height * 3:
        raise ValueError("rgb byte count does not match width*height*3")
    return b"RGB8" + width.to_bytes(4, "big") + height.to_bytes(4, "big") + rgb


def stub_image_vector(model: str, width: int, height: int, rgb: bytes, dim: int) -> np.ndarray:
    seed = model.encode("utf-8") + _IMAGE_TAG + stub_image_payload(width, height, rgb)
    return stub_vector(seed, dim)
