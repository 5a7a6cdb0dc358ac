import json

import pytest

from rocoforge.corpus import (
    detokenize,
    load_corpus_jsonl,
    load_karpathy_split,
    save_corpus_jsonl,
    tag_nouns,
    tokenize,
    tokenize_cased,
)
from rocoforge.errors import CorpusError

from conftest import TEMPLATE_CAPTIONS, build_corpus, write_karpathy_json


class TestTokenize:
    def test_strips_edge_punctuation(self):
        assert tokenize("A man with a red helmet.") == ["a", "man", "with", "a", "red", "helmet"]

    def test_interior_apostrophe_kept(self):
        assert tokenize("don't stop") == ["don't", "stop"]

    def test_empty_text(self):
        assert tokenize("") == []
        assert tokenize("  ...  ") == []

    def test_hand_counted_fixture(self):
        # Token counts of the first ten template captions, counted by hand.
        expected = [14, 8, 9, 9, 8, 10, 9, 8, 9, 10]
        got = [len(tokenize(t)) for t in TEMPLATE_CAPTIONS[:10]]
        assert got == expected

    def test_round_trip_through_detokenize(self):
        for text in TEMPLATE_CAPTIONS:
            tokens = tokenize(text)
            assert tokenize(detokenize(tokens)) == tokens

    def test_cased_alignment(self):
        for text in TEMPLATE_CAPTIONS:
            cased = tokenize_cased(text)
            assert [t.lower() for t in cased] == tokenize(text)


class TestTagNouns:
    def test_stop_noun_excluded(self, lexicon):
        tokens = "a row of motorcycles parked in front of a building".split()
        indices = tag_nouns(tokens, lexicon)
        assert [tokens[i] for i in indices] == ["motorcycles", "front", "building"]

    def test_function_words_only(self, lexicon):
        assert tag_nouns(["the", "of", "and"], lexicon) == []

    def test_deterministic(self, lexicon):
        tokens = tokenize(TEMPLATE_CAPTIONS[0])
        assert tag_nouns(tokens, lexicon) == tag_nouns(tokens, lexicon)

    def test_hand_annotated_gold(self, lexicon):
        gold = [
            [1, 5, 9, 12, 13],
            [1, 4, 7],
            [1, 5, 8],
            [1, 3, 8],
            [3, 7],
            [1, 5, 9],
            [1, 4, 8],
            [1, 5, 7],
            [2, 5, 8],
            [2, 6, 9],
            [1, 3, 7],
            [1, 4, 8],
            [1, 6],
            [3, 8],
            [1, 3, 6],
            [1, 4, 7],
            [1, 4, 7],
            [1, 5, 8],
            [1, 6],
            [1, 4, 8],
        ]
        for text, expected in zip(TEMPLATE_CAPTIONS[:20], gold):
            tokens = tokenize(text)
            assert tag_nouns(tokens, lexicon) == expected, f"caption: {text}"


class TestKarpathyLoad:
    def test_three_image_fixture(self, tmp_path, lexicon):
        path = tmp_path / "ann.json"
        write_karpathy_json(path, 3)
        corpus = load_karpathy_split(path, split="test")
        assert len(corpus.images) == 3
        assert len(corpus.captions) == 15

    def test_empty_annotations(self, tmp_path):
        path = tmp_path / "ann.json"
        path.write_text(json.dumps({"images": []}))
        corpus = load_karpathy_split(path)
        assert len(corpus.images) == 0 and len(corpus.captions) == 0

    def test_split_filter(self, tmp_path):
        path = tmp_path / "ann.json"
        write_karpathy_json(path, 2, split="val")
        assert len(load_karpathy_split(path, split="test").images) == 0
        assert len(load_karpathy_split(path, split="val").images) == 2

    def test_strict_rejects_short_image(self, tmp_path):
        path = tmp_path / "ann.json"
        write_karpathy_json(path, 2, captions_per_image=3)
        with pytest.raises(CorpusError, match="image 5000"):
            load_karpathy_split(path, split="test", strict=True)

    def test_lenient_truncates_and_drops(self, tmp_path):
        path = tmp_path / "ann.json"
        write_karpathy_json(path, 1, captions_per_image=7)
        corpus = load_karpathy_split(path, split="test", strict=False)
        assert len(corpus.images) == 1
        assert len(corpus.images[0].caption_ids) == 5

        write_karpathy_json(path, 1, captions_per_image=4)
        corpus = load_karpathy_split(path, split="test", strict=False)
        assert len(corpus.images) == 0

    def test_malformed_json_reports_offset(self, tmp_path):
        path = tmp_path / "ann.json"
        path.write_text('{"images": [}')
        with pytest.raises(CorpusError, match="byte offset"):
            load_karpathy_split(path)

    def test_trusted_tokens(self, tmp_path, lexicon):
        payload = {
            "images": [
                {
                    "filename": "x.png",
                    "split": "test",
                    "cocoid": 1,
                    "sentences": [
                        {"raw": f"caption number {k}", "tokens": ["a", "dog", "runs"], "sentid": k}
                        for k in range(5)
                    ],
                }
            ]
        }
        path = tmp_path / "ann.json"
        path.write_text(json.dumps(payload))
        corpus = load_karpathy_split(path)
        record = corpus.captions["0"]
        assert record.tokens == ["a", "dog", "runs"]
        assert record.noun_indices == [1]


class TestCorpusRoundTrip:
    def test_save_load_bit_identical(self, tmp_path, lexicon):
        corpus = build_corpus(tmp_path, 4, lexicon, with_images=False)
        first = tmp_path / "c1.jsonl"
        save_corpus_jsonl(corpus, first)
        loaded = load_corpus_jsonl(first)
        second = tmp_path / "c2.jsonl"
        save_corpus_jsonl(loaded, second)
        assert first.read_bytes() == second.read_bytes()

    def test_caption_count_consistency(self, tmp_path, lexicon):
        corpus = build_corpus(tmp_path, 6, lexicon, with_images=False)
        assert sum(len(img.caption_ids) for img in corpus.images) == len(corpus.captions)

    def test_validate_rejects_orphans(self, tmp_path, lexicon):
        corpus = build_corpus(tmp_path, 2, lexicon, with_images=False)
        from conftest import make_caption

        corpus.captions["orphan"] = make_caption("orphan", corpus.images[0].image_id, "a stray dog .", lexicon)
        with pytest.raises(CorpusError, match="orphan"):
            corpus.validate()

    def test_validate_rejects_wrong_caption_count(self, tmp_path, lexicon):
        corpus = build_corpus(tmp_path, 2, lexicon, with_images=False)
        dropped = corpus.images[0].caption_ids.pop()
        del corpus.captions[dropped]
        with pytest.raises(CorpusError, match="expected 5"):
            corpus.validate()
