"""Synthetic data generator: determinism, label signal, planted lexicon
terms, simulated predictors, and the published-count mock dataset."""

import numpy as np
import pytest

from memefusion.analysis import incidence
from memefusion.data import save_features
from memefusion.metrics import auroc
from memefusion.synth import (INCIDENCE_FALSE_ROW, INCIDENCE_TRUE_ROW,
                              PLACEHOLDER_TERMS, SIGNAL_COORDS,
                              generate_split, incidence_mock,
                              placeholder_lexicon, simulate_hatexplain,
                              simulate_predictions)
from memefusion.tagging import CATEGORIES, TextTagger


class TestGenerateSplit:
    def test_deterministic(self, tmp_path):
        a_split, a_bank = generate_split(50, seed=3, name="train")
        b_split, b_bank = generate_split(50, seed=3, name="train")
        assert a_split == b_split
        save_features(tmp_path / "a.mfb", a_bank)
        save_features(tmp_path / "b.mfb", b_bank)
        assert (tmp_path / "a.mfb").read_bytes() == (tmp_path / "b.mfb").read_bytes()

    def test_seed_changes_content(self):
        a, _ = generate_split(50, seed=1)
        b, _ = generate_split(50, seed=2)
        assert a != b

    def test_shapes_and_ids(self):
        split, bank = generate_split(30, seed=0, id_start=100, region_dim=16,
                                     max_boxes=4)
        assert split.ids() == list(range(100, 130))
        assert bank.dim == 16
        for i in split.ids():
            assert 2 <= bank[i].shape[0] <= 4

    def test_features_carry_label_signal(self):
        split, bank = generate_split(300, seed=5, signal=1.0)
        leading = np.array([bank[r.id][:, :SIGNAL_COORDS].mean() for r in split])
        labels = split.labels()
        assert leading[labels == 1].mean() > 0.5
        assert leading[labels == 0].mean() < -0.5

    def test_hateful_texts_carry_planted_terms(self):
        split, _ = generate_split(400, seed=6)
        tagger = TextTagger(placeholder_lexicon()).fit()
        flagged = np.array([tagger.tag(r.text).n_categories() > 0 for r in split])
        labels = split.labels()
        assert flagged[labels == 1].mean() > 0.6   # plant_rate 0.8
        assert flagged[labels == 0].mean() < 0.25  # noise plants plus collisions

    def test_hateful_rate_honored(self):
        split, _ = generate_split(1000, seed=7, hateful_rate=0.35)
        assert 0.25 < split.labels().mean() < 0.45


class TestPlaceholderLexicon:
    def test_covers_all_categories(self):
        lex = placeholder_lexicon()
        for cat in CATEGORIES:
            assert len(lex.terms(cat)) >= 1
        assert set(PLACEHOLDER_TERMS) == set(CATEGORIES)

    def test_contains_multi_token_term(self):
        assert ("outer", "quux") in placeholder_lexicon().terms("nationality")


class TestSimulations:
    def test_hatexplain_range_and_determinism(self):
        split, _ = generate_split(100, seed=8)
        a = simulate_hatexplain(split, seed=1)
        b = simulate_hatexplain(split, seed=1)
        assert a == b
        assert set(a) == set(split.ids())
        assert all(0.0 <= v <= 1.0 for v in a.values())

    def test_hatexplain_correlates_with_label(self):
        split, _ = generate_split(400, seed=9)
        probs = simulate_hatexplain(split, seed=2)
        scores = np.array([probs[r.id] for r in split])
        assert auroc(scores, split.labels()) > 0.8

    def test_predictions_hit_target_auroc(self):
        split, _ = generate_split(2000, seed=10)
        for target in (0.6, 0.75, 0.9):
            preds = simulate_predictions(split, target, seed=3)
            got = auroc(np.asarray(preds.probas), split.labels())
            assert got == pytest.approx(target, abs=0.05)

    def test_predictions_deterministic_and_aligned(self):
        split, _ = generate_split(50, seed=11)
        a = simulate_predictions(split, 0.8, seed=4)
        b = simulate_predictions(split, 0.8, seed=4)
        assert a.ids == tuple(split.ids())
        assert np.array_equal(a.probas, b.probas)

    def test_target_validation(self):
        split, _ = generate_split(10, seed=12)
        for bad in (0.4, 1.0, 1.2):
            with pytest.raises(ValueError, match="target"):
                simulate_predictions(split, bad, seed=0)


class TestIncidenceMock:
    def test_reproduces_published_table(self):
        labels, flags = incidence_mock()
        inc = incidence(labels, flags)
        assert tuple(inc.counts[0].tolist()) == INCIDENCE_FALSE_ROW
        assert tuple(inc.counts[1].tolist()) == INCIDENCE_TRUE_ROW

    def test_totals(self):
        labels, flags = incidence_mock()
        assert len(labels) == 8500
        assert int(labels.sum()) == 3019
        assert int((labels == 0).sum()) == 5481

    def test_flag_rows_have_exact_category_counts(self):
        labels, flags = incidence_mock()
        sums = flags.sum(axis=1)
        assert sums.max() == 4  # the 4+ rows are realized with exactly 4
        assert np.all(sums <= 4)
