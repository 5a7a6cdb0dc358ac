"""File-backed embedding cache.

One file per provider under a cache directory. Binary layout, little-endian:

    magic "EMBC" | u32 version | u64 count | u32 dim | u16 name_len | name
    then count records of (32-byte content hash, dim float32 values)

The record count lives at a fixed offset so appends only rewrite 8 header
bytes. Vectors round-trip bit-exactly (raw float32). The in-memory index is
loaded eagerly at open; writers are serialized behind a lock, readers hit
the dict, so a read after a write always sees the written vector.
"""

from __future__ import annotations

import struct
import threading
from pathlib import Path

import numpy as np

from .errors import ProviderContractViolation

MAGIC = b"EMBC"
VERSION = 1
_HEADER_FMT = "<IQIH"  # version, count, dim, name_len
_COUNT_OFFSET = 8
_NAME_OFFSET = 4 + struct.calcsize(_HEADER_FMT)
_HASH_SIZE = 32


class _ProviderFile:
    def __init__(self, path: Path, provider: str, dim: int | None):
        self.path = path
        self.provider = provider
        self.dim = dim
        self.vectors: dict[bytes, np.ndarray] = {}
        if path.exists():
            self._load()
        elif dim is None:
            raise ProviderContractViolation(f"{path}: cache file missing and no dim to create it")
        else:
            self._create()
        self._record_size = _HASH_SIZE + 4 * self.dim

    def _create(self) -> None:
        name = self.provider.encode("utf-8")
        header = MAGIC + struct.pack(_HEADER_FMT, VERSION, 0, self.dim, len(name)) + name
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_bytes(header)
        self._data_start = len(header)

    def _load(self) -> None:
        blob = self.path.read_bytes()
        if blob[:4] != MAGIC:
            raise ProviderContractViolation(f"{self.path}: bad cache magic {blob[:4]!r}")
        version, count, dim, name_len = struct.unpack_from(_HEADER_FMT, blob, 4)
        if version != VERSION:
            raise ProviderContractViolation(f"{self.path}: cache version {version} != {VERSION}")
        name = blob[_NAME_OFFSET : _NAME_OFFSET + name_len].decode("utf-8")
        if name != self.provider or (self.dim is not None and dim != self.dim):
            raise ProviderContractViolation(
                f"{self.path}: cache is for {name!r}/dim {dim}, expected {self.provider!r}/dim {self.dim}"
            )
        self.dim = dim
        self._data_start = _NAME_OFFSET + name_len
        record_size = _HASH_SIZE + 4 * dim
        offset = self._data_start
        for _ in range(count):
            key = blob[offset : offset + _HASH_SIZE]
            vec = np.frombuffer(blob, dtype="<f4", count=dim, offset=offset + _HASH_SIZE).copy()
            self.vectors[bytes(key)] = vec
            offset += record_size

    def append(self, items: list[tuple[bytes, np.ndarray]]) -> None:
        fresh = [(k, v) for k, v in items if k not in self.vectors]
        if not fresh:
            return
        with open(self.path, "r+b") as fh:
            fh.seek(0, 2)
            for key, vec in fresh:
                fh.write(key + np.asarray(vec, dtype="<f4").tobytes())
                self.vectors[key] = np.asarray(vec, dtype="<f4")
            fh.seek(_COUNT_OFFSET)
            fh.write(struct.pack("<Q", len(self.vectors)))


class EmbeddingCache:
    """Directory of per-provider cache files."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._files: dict[str, _ProviderFile] = {}
        self._lock = threading.RLock()

    def _file(self, provider: str, dim: int | None) -> _ProviderFile:
        pf = self._files.get(provider)
        if pf is None:
            pf = _ProviderFile(self.directory / f"{provider}.embc", provider, dim)
            self._files[provider] = pf
        elif dim is not None and pf.dim != dim:
            raise ProviderContractViolation(
                f"cache for {provider!r} holds dim {pf.dim}, requested dim {dim}"
            )
        return pf

    def get(self, provider: str, dim: int, key: bytes) -> np.ndarray | None:
        with self._lock:
            vec = self._file(provider, dim).vectors.get(key)
        return None if vec is None else vec.copy()

    def put_many(self, provider: str, dim: int, items: list[tuple[bytes, np.ndarray]]) -> None:
        with self._lock:
            self._file(provider, dim).append(items)

    def __len__(self) -> int:
        with self._lock:
            for path in sorted(self.directory.glob("*.embc")):
                if path.stem not in self._files:
                    self._files[path.stem] = _ProviderFile(path, path.stem, None)
            return sum(len(pf.vectors) for pf in self._files.values())
