import json
import hashlib
from pathlib import Path

import pytest

from rocoforge.cli import main
from rocoforge.evalpool import load_report_csv

from conftest import write_karpathy_json


def run(argv, capsys=None) -> int:
    return main([str(a) for a in argv])


@pytest.fixture()
def workspace(tmp_path, lexicon):
    """Annotation file plus images on disk, ready for ingest."""
    from conftest import write_noise_png

    ann = tmp_path / "annotations.json"
    write_karpathy_json(ann, 4)
    for i in range(4):
        write_noise_png(tmp_path / "stage" / f"im{i:04d}.png", seed=40 + i)
    return tmp_path


def ingest(tmp_path, ann) -> Path:
    out = tmp_path / "stage"
    assert run(["ingest", "--corpus", ann, "--split", "test", "--out", out]) == 0
    return out / "corpus.jsonl"


class TestIngestCommand:
    def test_writes_corpus_and_manifest(self, workspace):
        corpus_path = ingest(workspace, workspace / "annotations.json")
        assert corpus_path.exists()
        manifest = json.loads((workspace / "stage" / "run_manifest.json").read_text())
        assert manifest["command"] == "ingest"
        ann_hash = hashlib.sha256((workspace / "annotations.json").read_bytes()).hexdigest()
        assert ann_hash in manifest["inputs"].values()

    def test_missing_input_exits_2(self, tmp_path, capsys):
        assert run(["ingest", "--corpus", tmp_path / "nope.json", "--out", tmp_path]) == 2
        assert "nope.json" in capsys.readouterr().err


class TestFullPipeline:
    def run_pipeline(self, root: Path, out_name: str, jobs: int = 1) -> Path:
        ann = root / "annotations.json"
        out = root / out_name
        corpus = out / "corpus.jsonl"
        assert run(["ingest", "--corpus", ann, "--out", out]) == 0
        for i in range(4):
            src = root / "stage" / f"im{i:04d}.png"
            (out / f"im{i:04d}.png").write_bytes(src.read_bytes())
        assert run(["ei", "--corpus", corpus, "--models", "stub,clip", "--seed", 0, "--jobs", jobs, "--out", out / "ei"]) == 0
        assert (
            run(
                [
                    "gen-captions", "--corpus", corpus,
                    "--consensus", out / "ei" / "consensus.jsonl",
                    "--ei", out / "ei" / "ei_stub.jsonl",
                    "--policy", "rand_voca", "--policy", "danger", "--policy", "delete_low_ei", "--policy", "multiword",
                    "--seed", 0, "--out", out / "captions",
                ]
            )
            == 0
        )
        assert (
            run(
                [
                    "gen-images", "--corpus", corpus, "--images-root", out,
                    "--mode", "mix", "--mode", "patch", "--lambda", 0.9,
                    "--seed", 0, "--seed", 1, "--jobs", jobs, "--out", out / "genimg",
                ]
            )
            == 0
        )
        manifests = sorted((out / "captions").glob("captions_*.jsonl")) + sorted(out.glob("genimg/images_*.jsonl"))
        argv = ["eval", "--corpus", corpus, "--models", "stub", "--images-root", out,
                "--generated-root", out / "genimg" / "images", "--out", out / "report", "--jobs", jobs]
        for m in manifests:
            argv += ["--manifest", m]
        assert run(argv) == 0
        assert run(["report", "--report", out / "report" / "report.csv", "--out", out / "rendered"]) == 0
        return out

    def test_all_artifacts_present(self, workspace):
        out = self.run_pipeline(workspace, "run1")
        assert (out / "ei" / "consensus.jsonl").exists()
        assert (out / "ei" / "stats_consensus.csv").exists()
        assert (out / "captions" / "captions_rand_voca_s0.jsonl").exists()
        assert (out / "captions" / "captions_multiword_s0.jsonl").exists()
        assert (out / "genimg" / "images_mix_0.9_s0.jsonl").exists()
        assert list((out / "genimg" / "images").rglob("*.png"))
        assert (out / "report" / "report.csv").exists()
        assert (out / "rendered" / "report.md").exists()

    def test_rerun_byte_identical(self, workspace):
        out1 = self.run_pipeline(workspace, "runA")
        out2 = self.run_pipeline(workspace, "runB")
        compared = 0
        for path1 in sorted(out1.rglob("*")):
            if path1.is_dir() or path1.name == "run_manifest.json":
                continue
            rel = path1.relative_to(out1)
            path2 = out2 / rel
            assert path2.exists(), rel
            assert path1.read_bytes() == path2.read_bytes(), rel
            compared += 1
        assert compared > 10

    def test_jobs_do_not_change_bytes(self, workspace):
        out1 = self.run_pipeline(workspace, "serial", jobs=1)
        out2 = self.run_pipeline(workspace, "threaded", jobs=4)
        for path1 in sorted(out1.rglob("*.jsonl")) + sorted(out1.rglob("*.csv")):
            rel = path1.relative_to(out1)
            assert path1.read_bytes() == (out2 / rel).read_bytes(), rel

    def test_hash_chain_reaches_annotations(self, workspace):
        out = self.run_pipeline(workspace, "chained")
        ei_manifest = json.loads((out / "ei" / "run_manifest.json").read_text())
        corpus_hash = hashlib.sha256((out / "corpus.jsonl").read_bytes()).hexdigest()
        assert corpus_hash in ei_manifest["inputs"].values()
        ingest_manifest = json.loads((out / "run_manifest.json").read_text())
        ann_hash = hashlib.sha256((workspace / "annotations.json").read_bytes()).hexdigest()
        assert ann_hash in ingest_manifest["inputs"].values()

    def test_report_has_expected_rows(self, workspace):
        out = self.run_pipeline(workspace, "rows")
        report = load_report_csv(out / "report" / "report.csv")
        variants = {(r.variant, r.seed) for r in report.rows}
        assert ("coco-i2t", "-") in variants
        assert ("rand_voca", "0") in variants
        assert ("mix@0.9", "0") in variants and ("mix@0.9", "1") in variants
        assert ("mix@0.9", "avg") in variants
        report.validate()


class TestExitCodes:
    def test_eval_without_manifests(self, workspace, capsys):
        corpus = ingest(workspace, workspace / "annotations.json")
        code = run(["eval", "--corpus", corpus, "--out", workspace / "r"])
        assert code == 2
        assert "manifest" in capsys.readouterr().err

    def test_provider_down_exits_3(self, workspace, capsys, monkeypatch):
        import rocoforge.providers as providers

        monkeypatch.setattr(providers.HttpBackend, "__init__", _instant_fail_init)
        corpus = ingest(workspace, workspace / "annotations.json")
        code = run(
            ["ei", "--corpus", corpus, "--provider-url", "http://127.0.0.1:9", "--models", "stub", "--out", workspace / "ei"]
        )
        assert code == 3

    def test_bad_lambda_exits_1(self, workspace):
        corpus = ingest(workspace, workspace / "annotations.json")
        code = run(["gen-images", "--corpus", corpus, "--lambda", 1.5, "--out", workspace / "g"])
        assert code == 1


def _instant_fail_init(self, base_url, retries=0, backoff_s=0.0, timeout_s=0.05, transport=None):
    import httpx

    def refuse(request):
        raise httpx.ConnectError("connection refused", request=request)

    self.retries = 0
    self.backoff_s = 0.0
    self._client = httpx.Client(base_url=base_url, timeout=timeout_s, transport=httpx.MockTransport(refuse))


class TestEmbedCommand:
    def test_warms_cache_for_pool_members(self, workspace):
        corpus = ingest(workspace, workspace / "annotations.json")
        cache = workspace / "cache"
        assert (
            run(
                [
                    "embed", "--corpus", corpus, "--models", "stub",
                    "--images-root", workspace / "stage", "--cache", cache, "--out", workspace / "embed_out",
                ]
            )
            == 0
        )
        assert (cache / "stub.embc").exists()
        from rocoforge.cache import EmbeddingCache

        assert len(EmbeddingCache(cache)) >= 24  # 20 captions + 4 images

    def test_embed_requires_cache(self, workspace, capsys):
        corpus = ingest(workspace, workspace / "annotations.json")
        assert run(["embed", "--corpus", corpus, "--out", workspace / "x"]) == 1
        assert "cache" in capsys.readouterr().err


class TestConfigPlumbing:
    def test_config_file_and_flag_override(self, workspace):
        config = workspace / "run.conf"
        config.write_text("split = test\nmodels = stub,clip\nseeds = 3\nout = ignored\n")
        out = workspace / "cfg"
        assert run(["ingest", "--config", config, "--corpus", workspace / "annotations.json", "--out", out]) == 0
        manifest = json.loads((out / "run_manifest.json").read_text())
        assert manifest["config"]["models"] == ["stub", "clip"]
        assert manifest["config"]["seeds"] == [3]
        assert manifest["config"]["out"] == str(out)

    def test_unknown_config_key_rejected(self, workspace, capsys):
        config = workspace / "bad.conf"
        config.write_text("nonsense = 1\n")
        assert run(["ingest", "--config", config, "--corpus", workspace / "annotations.json", "--out", workspace / "x"]) == 1

    def test_env_overrides_cache_flag(self, workspace, monkeypatch):
        corpus = ingest(workspace, workspace / "annotations.json")
        env_cache = workspace / "env_cache"
        monkeypatch.setenv("ROCOFORGE_CACHE", str(env_cache))
        out = workspace / "ei_env"
        assert run(["ei", "--corpus", corpus, "--models", "stub", "--cache", workspace / "flag_cache", "--out", out]) == 0
        assert (env_cache / "stub.embc").exists()
        assert not (workspace / "flag_cache").exists()
