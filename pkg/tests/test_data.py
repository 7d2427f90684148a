"""Metadata JSONL loading, the MFB1 feature-bank format, joining, and split
merge arithmetic."""

import struct

import numpy as np
import pytest

from memefusion.data import (DataFormatError, Example, FeatureBank, MemeRecord,
                             SplitSet, class_balance, join, load_features,
                             load_jsonl, merge_dedup, save_features, save_jsonl)


def write_lines(path, *lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def make_split(ids, name="custom", label=0):
    records = tuple(MemeRecord(id=i, img=f"{i}.png", text=f"text {i}", label=label)
                    for i in ids)
    return SplitSet(name=name, records=records)


class TestJsonl:
    def test_basic_load(self, tmp_path):
        path = tmp_path / "train.jsonl"
        write_lines(path,
                    '{"id": 0, "img": "a.png", "text": "hello", "label": 0}',
                    '{"id": 1, "img": "b.png", "text": "x", "label": 1}')
        split = load_jsonl(path)
        assert split.name == "train"
        assert len(split) == 2
        assert split[0] == MemeRecord(id=0, img="a.png", text="hello", label=0)
        assert split.ids() == [0, 1]

    def test_empty_file(self, tmp_path):
        path = tmp_path / "x.jsonl"
        path.write_text("", encoding="utf-8")
        split = load_jsonl(path)
        assert len(split) == 0 and split.name == "custom"

    def test_blank_lines_skipped_and_label_optional(self, tmp_path):
        path = tmp_path / "test_unseen.jsonl"
        write_lines(path, '{"id": 5, "img": "a.png", "text": "t"}', "")
        split = load_jsonl(path)
        assert split.name == "test_unseen"
        assert split[0].label is None

    def test_duplicate_id_reports_both_lines(self, tmp_path):
        path = tmp_path / "d.jsonl"
        write_lines(path,
                    '{"id": 7, "img": "a.png", "text": "t", "label": 0}',
                    '{"id": 7, "img": "b.png", "text": "u", "label": 1}')
        with pytest.raises(DataFormatError, match=r"duplicate id 7.*line 1"):
            load_jsonl(path)

    @pytest.mark.parametrize("line, message", [
        ('{"id": 1, "img": "a.png"}', "missing required field"),
        ('{"id": -1, "img": "a.png", "text": "t"}', "non-negative"),
        ('{"id": true, "img": "a.png", "text": "t"}', "non-negative"),
        ('{"id": 1.5, "img": "a.png", "text": "t"}', "non-negative"),
        ('{"id": 1, "img": 3, "text": "t"}', "must be strings"),
        ('{"id": 1, "img": "a.png", "text": "  "}', "text is empty"),
        ('{"id": 1, "img": "a.png", "text": "t", "label": 2}', "label must be 0 or 1"),
        ('[1, 2]', "expected a JSON object"),
        ('{oops', "malformed JSON"),
    ])
    def test_malformed_lines(self, tmp_path, line, message):
        path = tmp_path / "bad.jsonl"
        write_lines(path, line)
        with pytest.raises(DataFormatError, match=message):
            load_jsonl(path)

    def test_save_roundtrip_omits_missing_label(self, tmp_path):
        split = SplitSet(name="custom", records=(
            MemeRecord(id=1, img="a.png", text="t", label=1),
            MemeRecord(id=2, img="b.png", text="u"),
        ))
        path = tmp_path / "out.jsonl"
        save_jsonl(path, split)
        assert '"label"' not in path.read_text(encoding="utf-8").splitlines()[1]
        assert load_jsonl(path, name="custom") == split


class TestSplitSet:
    def test_duplicate_id_rejected(self):
        r = MemeRecord(id=1, img="a", text="t")
        with pytest.raises(ValueError, match="duplicate id"):
            SplitSet(name="x", records=(r, r))

    def test_labels_requires_all_labeled(self):
        split = SplitSet(name="x", records=(MemeRecord(id=1, img="a", text="t"),))
        with pytest.raises(ValueError, match="unlabeled"):
            split.labels()

    def test_labels_and_balance(self):
        split = make_split([0, 1, 2], label=1)
        assert split.labels().tolist() == [1, 1, 1]
        assert class_balance(split) == (3, 0)


class TestFeatureBank:
    def test_rejects_bad_entries(self):
        with pytest.raises(ValueError, match="2-D"):
            FeatureBank({1: np.zeros(4, dtype=np.float32)})
        with pytest.raises(ValueError, match="n_boxes"):
            FeatureBank({1: np.zeros((0, 4), dtype=np.float32)})
        with pytest.raises(ValueError, match="n_boxes"):
            FeatureBank({1: np.zeros((121, 4), dtype=np.float32)})
        with pytest.raises(ValueError, match="dim"):
            FeatureBank([(1, np.zeros((1, 4))), (2, np.zeros((1, 5)))])
        with pytest.raises(ValueError, match="non-finite"):
            FeatureBank({1: np.full((1, 2), np.nan)})
        with pytest.raises(ValueError, match="duplicate"):
            FeatureBank([(1, np.zeros((1, 2))), (1, np.zeros((1, 2)))])

    def test_boundary_120_boxes_accepted(self):
        bank = FeatureBank({3: np.zeros((120, 2), dtype=np.float32)})
        assert bank[3].shape == (120, 2)

    def test_entries_read_only(self):
        bank = FeatureBank({1: np.zeros((1, 2), dtype=np.float32)})
        with pytest.raises(ValueError):
            bank[1][0, 0] = 1.0

    def test_empty_bank_has_no_dim(self):
        bank = FeatureBank({})
        assert len(bank) == 0
        with pytest.raises(ValueError):
            bank.dim


class TestMfb1:
    def test_bit_exact_roundtrip(self, tmp_path):
        rng = np.random.default_rng(0)
        bank = FeatureBank({
            3: rng.normal(size=(2, 6)).astype(np.float32),
            9: rng.normal(size=(5, 6)).astype(np.float32),
        })
        path = tmp_path / "bank.mfb"
        save_features(path, bank)
        first = path.read_bytes()
        loaded = load_features(path)
        assert loaded.ids() == [3, 9]
        for i in (3, 9):
            assert np.array_equal(loaded[i], bank[i])
            assert loaded[i].dtype == np.float32
        save_features(tmp_path / "again.mfb", loaded)
        assert (tmp_path / "again.mfb").read_bytes() == first

    def test_zero_matrix_roundtrip(self, tmp_path):
        bank = FeatureBank({3: np.zeros((2, 8), dtype=np.float32)})
        path = tmp_path / "z.mfb"
        save_features(path, bank)
        assert np.array_equal(load_features(path)[3], np.zeros((2, 8)))

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.mfb"
        path.write_bytes(b"NOPE" + b"\x00" * 8)
        with pytest.raises(DataFormatError, match="bad magic"):
            load_features(path)

    def test_truncated_header(self, tmp_path):
        path = tmp_path / "trunc.mfb"
        path.write_bytes(b"MFB1\x01")
        with pytest.raises(DataFormatError, match="truncated"):
            load_features(path)

    def test_trailing_bytes_rejected(self, tmp_path):
        path = tmp_path / "trail.mfb"
        save_features(path, FeatureBank({1: np.zeros((1, 2), dtype=np.float32)}))
        path.write_bytes(path.read_bytes() + b"\x00")
        with pytest.raises(DataFormatError, match="trailing"):
            load_features(path)

    def test_truncated_payload_rejected(self, tmp_path):
        path = tmp_path / "cut.mfb"
        save_features(path, FeatureBank({1: np.ones((2, 3), dtype=np.float32)}))
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(DataFormatError, match="truncated payload"):
            load_features(path)

    def test_overlong_entry_rejected(self, tmp_path):
        path = tmp_path / "big.mfb"
        blob = b"MFB1" + struct.pack("<II", 1, 1) + struct.pack("<QI", 1, 121)
        blob += b"\x00" * (121 * 4)
        path.write_bytes(blob)
        with pytest.raises(DataFormatError, match="n_boxes 121"):
            load_features(path)


class TestJoin:
    def test_pairs_by_id_in_order(self):
        split = make_split([2, 1])
        bank = FeatureBank({1: np.ones((1, 3)), 2: np.zeros((2, 3))})
        examples = join(split, bank)
        assert [ex.id for ex in examples] == [2, 1]
        assert examples[0].features.shape == (2, 3)
        assert examples[0].tags is None

    def test_missing_ids_all_reported(self):
        split = make_split([1, 2, 3])
        bank = FeatureBank({2: np.zeros((1, 3))})
        with pytest.raises(ValueError, match=r"\[1, 3\]"):
            join(split, bank)

    def test_empty_split(self):
        assert join(make_split([]), FeatureBank({})) == []

    def test_tags_attached_by_id(self):
        from memefusion.tagging import TagVector

        split = make_split([5])
        bank = FeatureBank({5: np.zeros((1, 3))})
        examples = join(split, bank, {5: TagVector(racism=1)})
        assert examples[0].tags.racism == 1


class TestMergeDedup:
    def test_idempotent(self):
        a = make_split([1, 2, 3])
        assert merge_dedup(a, a).records == a.records

    def test_disjoint_union(self):
        merged = merge_dedup(make_split([1, 2]), make_split([3, 4, 5]))
        assert len(merged) == 5
        assert merged.ids() == [1, 2, 3, 4, 5]

    def test_order_is_a_then_new_from_b(self):
        a = make_split([4, 1])
        b = make_split([1, 9, 4, 7])
        assert merge_dedup(a, b).ids() == [4, 1, 9, 7]

    def test_conflicting_duplicate_rejected(self):
        a = make_split([1], label=0)
        b = make_split([1], label=1)
        with pytest.raises(ValueError, match="conflicting"):
            merge_dedup(a, b)

    def test_paper_split_sizes(self):
        # 500- and 540-element splits sharing 400 ids merge to 640
        a = make_split(range(0, 500))
        b = make_split(range(100, 640))
        assert len(merge_dedup(a, b)) == 640
