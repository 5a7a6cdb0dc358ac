import struct
import threading

import numpy as np
import pytest

from rocoforge.cache import EmbeddingCache
from rocoforge.errors import ProviderContractViolation


def vec(seed: int, dim: int = 8) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.normal(size=dim)
    return (v / np.linalg.norm(v)).astype(np.float32)


def key(i: int) -> bytes:
    return i.to_bytes(32, "big")


class TestCacheBasics:
    def test_read_after_write(self, tmp_path):
        cache = EmbeddingCache(tmp_path)
        v = vec(1)
        cache.put_many("stub", 8, [(key(1), v)])
        got = cache.get("stub", 8, key(1))
        assert np.array_equal(got, v)
        assert got.tobytes() == v.tobytes()

    def test_miss_returns_none(self, tmp_path):
        cache = EmbeddingCache(tmp_path)
        assert cache.get("stub", 8, key(42)) is None

    def test_persists_across_reopen(self, tmp_path):
        EmbeddingCache(tmp_path).put_many("stub", 8, [(key(i), vec(i)) for i in range(5)])
        reopened = EmbeddingCache(tmp_path)
        for i in range(5):
            assert np.array_equal(reopened.get("stub", 8, key(i)), vec(i))
        assert len(reopened) == 5

    def test_duplicate_put_ignored(self, tmp_path):
        cache = EmbeddingCache(tmp_path)
        cache.put_many("stub", 8, [(key(1), vec(1))])
        cache.put_many("stub", 8, [(key(1), vec(2))])
        assert np.array_equal(cache.get("stub", 8, key(1)), vec(1))
        assert len(cache) == 1

    def test_providers_are_separate_files(self, tmp_path):
        cache = EmbeddingCache(tmp_path)
        cache.put_many("clip", 8, [(key(1), vec(1))])
        cache.put_many("blip", 8, [(key(1), vec(2))])
        assert (tmp_path / "clip.embc").exists()
        assert (tmp_path / "blip.embc").exists()
        assert np.array_equal(cache.get("clip", 8, key(1)), vec(1))
        assert np.array_equal(cache.get("blip", 8, key(1)), vec(2))


class TestCacheFileFormat:
    def test_header_layout(self, tmp_path):
        cache = EmbeddingCache(tmp_path)
        cache.put_many("stub", 8, [(key(1), vec(1)), (key(2), vec(2))])
        blob = (tmp_path / "stub.embc").read_bytes()
        assert blob[:4] == b"EMBC"
        version, count, dim, name_len = struct.unpack_from("<IQIH", blob, 4)
        assert (version, count, dim) == (1, 2, 8)
        name_offset = 4 + struct.calcsize("<IQIH")
        assert blob[name_offset : name_offset + name_len] == b"stub"
        record_size = 32 + 4 * 8
        assert len(blob) == name_offset + name_len + 2 * record_size

    def test_dim_mismatch_rejected(self, tmp_path):
        EmbeddingCache(tmp_path).put_many("stub", 8, [(key(1), vec(1))])
        with pytest.raises(ProviderContractViolation):
            EmbeddingCache(tmp_path).get("stub", 16, key(1))

    def test_bad_magic_rejected(self, tmp_path):
        (tmp_path / "stub.embc").write_bytes(b"XXXX" + b"\x00" * 20)
        with pytest.raises(ProviderContractViolation, match="magic"):
            EmbeddingCache(tmp_path).get("stub", 8, key(1))


class TestCacheConcurrency:
    def test_parallel_writers_and_readers(self, tmp_path):
        cache = EmbeddingCache(tmp_path)

        def writer(base: int) -> None:
            for i in range(base, base + 50):
                cache.put_many("stub", 8, [(key(i), vec(i))])

        threads = [threading.Thread(target=writer, args=(b,)) for b in (0, 50, 100)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(cache) == 150
        reopened = EmbeddingCache(tmp_path)
        for i in range(150):
            assert np.array_equal(reopened.get("stub", 8, key(i)), vec(i))
