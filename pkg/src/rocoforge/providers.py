"""Uniform access to text/image embeddings.

Encoders live out of process behind a small HTTP protocol; the in-process
"stub" backend implements the same interface deterministically for tests
and dry runs. Results are cached by content hash and returned unit-norm in
input order.

Wire protocol (also served by the sidecar package):

    POST /v1/embed/text   {"model": str, "texts": [str]}
    POST /v1/embed/image  {"model": str, "images_b64": [str]}
      -> {"dim": int, "embeddings": [[float32, ...], ...]}
    GET  /v1/models       -> {"models": [{"name", "dim", "modality"}, ...]}

Status 400 means the request violates the contract; 503 is retryable.
"""

from __future__ import annotations

import base64
import hashlib
import io
import logging
import time
import unicodedata
from dataclasses import dataclass
from pathlib import Path

import httpx
import numpy as np
from PIL import Image

from . import stub
from .cache import EmbeddingCache
from .errors import NumericalDegeneracy, ProviderContractViolation, ProviderUnavailable

log = logging.getLogger(__name__)

UNIT_NORM_TOL = 1e-4
DEFAULT_BATCH_SIZE = 64

# Embedding widths per provider name. The non-stub entries mirror the usual
# public checkpoints of each model family; the sidecar advertises the same.
DEFAULT_PROVIDER_DIMS = {
    "vsrn": 2048,
    "vse-infty": 1024,
    "clip": 512,
    "blip": 256,
    "stub": 64,
}


@dataclass(frozen=True)
class ProviderId:
    name: str
    dim: int


def provider_id(name: str, dim: int | None = None) -> ProviderId:
    if dim is None:
        if name not in DEFAULT_PROVIDER_DIMS:
            raise ProviderContractViolation(f"unknown provider {name!r} and no dim given")
        dim = DEFAULT_PROVIDER_DIMS[name]
    return ProviderId(name=name, dim=dim)


def text_payload(text: str) -> bytes:
    return unicodedata.normalize("NFC", text).encode("utf-8")


def content_hash(provider: str, payload: bytes) -> bytes:
    return hashlib.sha256(provider.encode("utf-8") + b"\x00" + payload).digest()


@dataclass
class EmbeddingMatrix:
    provider: ProviderId
    keys: list[str]
    vectors: np.ndarray  # (n, dim) float32, unit rows

    def __post_init__(self) -> None:
        if self.vectors.ndim != 2 or self.vectors.shape != (len(self.keys), self.provider.dim):
            raise ProviderContractViolation(
                f"matrix shape {self.vectors.shape} does not match {len(self.keys)} keys x dim {self.provider.dim}"
            )

    def row(self, i: int) -> np.ndarray:
        return self.vectors[i]


def enforce_unit_norm(rows: np.ndarray, provider: str) -> np.ndarray:
    """Re-normalize rows outside tolerance (logged); reject zero rows."""
    rows = np.asarray(rows, dtype=np.float32)
    norms = np.linalg.norm(rows.astype(np.float64), axis=1)
    if np.any(norms == 0.0):
        bad = int(np.flatnonzero(norms == 0.0)[0])
        raise NumericalDegeneracy(f"provider {provider!r} returned a zero-norm embedding (row {bad})")
    off = np.abs(norms - 1.0) > UNIT_NORM_TOL
    if np.any(off):
        log.warning("provider %r returned %d rows off unit norm; re-normalizing", provider, int(off.sum()))
        rows = rows.copy()
        rows[off] = (rows[off].astype(np.float64) / norms[off, None]).astype(np.float32)
    return rows


class StubBackend:
    """Deterministic in-process backend; see the stub module for the math."""

    def embed_texts(self, model: str, dim: int, texts: list[str]) -> np.ndarray:
        return np.stack([stub.stub_text_vector(model, t, dim) for t in texts]) if texts else np.zeros((0, dim), np.float32)

    def embed_images(self, model: str, dim: int, blobs: list[bytes]) -> np.ndarray:
        rows = []
        for blob in blobs:
            with Image.open(io.BytesIO(blob)) as img:
                rgb = img.convert("RGB")
                rows.append(stub.stub_image_vector(model, rgb.width, rgb.height, rgb.tobytes(), dim))
        return np.stack(rows) if rows else np.zeros((0, dim), np.float32)


class HttpBackend:
    """Client for the embedding wire protocol with bounded retries."""

    def __init__(
        self,
        base_url: str,
        retries: int = 3,
        backoff_s: float = 0.2,
        timeout_s: float = 60.0,
        transport: httpx.BaseTransport | None = None,
    ):
        self.retries = retries
        self.backoff_s = backoff_s
        self._client = httpx.Client(base_url=base_url, timeout=timeout_s, transport=transport)

    def _post(self, path: str, body: dict, model: str, dim: int, n: int) -> np.ndarray:
        last_error: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                response = self._client.post(path, json=body)
            except httpx.TransportError as exc:
                last_error = exc
            else:
                if response.status_code == 503:
                    last_error = ProviderUnavailable(f"{path}: 503 from provider")
                elif response.status_code == 400:
                    raise ProviderContractViolation(f"{path}: {response.text}")
                elif response.status_code != 200:
                    raise ProviderContractViolation(f"{path}: unexpected status {response.status_code}")
                else:
                    payload = response.json()
                    if payload.get("dim") != dim:
                        raise ProviderContractViolation(
                            f"provider {model!r} advertises dim {payload.get('dim')}, registry says {dim}"
                        )
                    rows = np.asarray(payload["embeddings"], dtype=np.float32)
                    if rows.shape != (n, dim):
                        raise ProviderContractViolation(f"provider returned shape {rows.shape}, expected {(n, dim)}")
                    return rows
            if attempt < self.retries and self.backoff_s:
                time.sleep(self.backoff_s * (attempt + 1))
        raise ProviderUnavailable(f"{path}: provider unreachable after {self.retries + 1} attempts") from last_error

    def embed_texts(self, model: str, dim: int, texts: list[str]) -> np.ndarray:
        return self._post("/v1/embed/text", {"model": model, "texts": texts}, model, dim, len(texts))

    def embed_images(self, model: str, dim: int, blobs: list[bytes]) -> np.ndarray:
        images_b64 = [base64.b64encode(b).decode("ascii") for b in blobs]
        return self._post("/v1/embed/image", {"model": model, "images_b64": images_b64}, model, dim, len(blobs))


class Embedder:
    """Caching, batching front end over a backend.

    Identical inputs are deduplicated before hitting the backend, so purity
    of the backend is observable: repeated inputs yield bit-identical rows.
    """

    def __init__(
        self,
        backend=None,
        cache: EmbeddingCache | None = None,
        batch_size: int = DEFAULT_BATCH_SIZE,
        normalize: bool = True,
    ):
        self.backend = backend or StubBackend()
        self.cache = cache
        self.batch_size = batch_size
        self.normalize = normalize

    def _resolve(self, provider: str | ProviderId) -> ProviderId:
        return provider if isinstance(provider, ProviderId) else provider_id(provider)

    def _gather(self, provider: ProviderId, keys: list[bytes], payloads: list, embed_batch) -> np.ndarray:
        dim = provider.dim
        out: dict[bytes, np.ndarray] = {}
        missing: list[bytes] = []
        payload_of: dict[bytes, object] = {}
        for key, payload in zip(keys, payloads):
            if key in out or key in payload_of:
                continue
            cached = self.cache.get(provider.name, dim, key) if self.cache is not None else None
            if cached is not None:
                out[key] = cached
            else:
                payload_of[key] = payload
                missing.append(key)
        for start in range(0, len(missing), self.batch_size):
            chunk = missing[start : start + self.batch_size]
            try:
                rows = embed_batch(provider.name, dim, [payload_of[k] for k in chunk])
            except ProviderUnavailable as exc:
                raise ProviderUnavailable(
                    f"{exc} (first missing item: content hash {chunk[0].hex()})"
                ) from exc
            if self.normalize:
                rows = enforce_unit_norm(rows, provider.name)
            else:
                rows = np.asarray(rows, dtype=np.float32)
            for key, row in zip(chunk, rows):
                out[key] = row
            if self.cache is not None:
                self.cache.put_many(provider.name, dim, [(k, out[k]) for k in chunk])
        return np.stack([out[k] for k in keys]) if keys else np.zeros((0, dim), np.float32)

    def embed_texts(self, provider: str | ProviderId, texts: list[str]) -> EmbeddingMatrix:
        pid = self._resolve(provider)
        payloads = [text_payload(t) for t in texts]
        keys = [content_hash(pid.name, p) for p in payloads]
        vectors = self._gather(pid, keys, texts, self.backend.embed_texts)
        return EmbeddingMatrix(provider=pid, keys=[k.hex() for k in keys], vectors=vectors)

    def embed_images(self, provider: str | ProviderId, image_paths: list[str | Path]) -> EmbeddingMatrix:
        pid = self._resolve(provider)
        blobs = [Path(p).read_bytes() for p in image_paths]
        keys = [content_hash(pid.name, b) for b in blobs]
        vectors = self._gather(pid, keys, blobs, self.backend.embed_images)
        return EmbeddingMatrix(provider=pid, keys=[k.hex() for k in keys], vectors=vectors)
