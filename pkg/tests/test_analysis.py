"""Phi correlation and the label-by-category-count incidence table."""

import math

import numpy as np
import pytest

from memefusion.analysis import (COLUMN_NAMES, INCIDENCE_HEADER,
                                 IncidenceTable, correlation_csv,
                                 correlation_matrix, incidence, incidence_csv,
                                 phi, report)
from memefusion.tagging import CATEGORIES


def random_flags(rng, n):
    labels = rng.integers(0, 2, size=n)
    flags = rng.integers(0, 2, size=(n, len(CATEGORIES)))
    return labels, flags


class TestPhi:
    def test_pinned_values(self):
        assert phi([0, 1, 0, 1], [0, 1, 0, 1]) == 1.0
        assert phi([0, 1, 0, 1], [1, 0, 1, 0]) == -1.0
        assert phi([0, 0, 1, 1], [0, 1, 0, 1]) == 0.0

    def test_constant_vector_is_nan(self):
        assert math.isnan(phi([1, 1, 1], [0, 1, 0]))
        assert math.isnan(phi([0, 1, 0], [0, 0, 0]))

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError, match="shape"):
            phi([0, 1], [0, 1, 1])
        with pytest.raises(ValueError, match="shape"):
            phi([[0, 1]], [[0, 1]])

    def test_symmetry(self):
        rng = np.random.default_rng(0)
        a = rng.integers(0, 2, size=50)
        b = rng.integers(0, 2, size=50)
        assert phi(a, b) == phi(b, a)

    def test_equals_pearson(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            a = rng.integers(0, 2, size=40)
            b = rng.integers(0, 2, size=40)
            if a.min() == a.max() or b.min() == b.max():
                continue
            assert phi(a, b) == pytest.approx(np.corrcoef(a, b)[0, 1], abs=1e-12)

    def test_relabel_antisymmetry(self):
        rng = np.random.default_rng(2)
        a = rng.integers(0, 2, size=30)
        b = rng.integers(0, 2, size=30)
        a[:2], b[:2] = [0, 1], [0, 1]
        assert phi(1 - a, b) == pytest.approx(-phi(a, b), abs=1e-12)


class TestCorrelationMatrix:
    def test_shape_and_symmetry(self):
        rng = np.random.default_rng(3)
        labels, flags = random_flags(rng, 60)
        corr = correlation_matrix(labels, flags)
        assert corr.shape == (8, 8)
        assert np.array_equal(corr, corr.T)
        assert np.all(np.diag(corr) == 1.0)

    def test_constant_column_gives_nan_row(self):
        rng = np.random.default_rng(4)
        labels, flags = random_flags(rng, 30)
        flags[:, 2] = 0
        corr = correlation_matrix(labels, flags)
        assert np.all(np.isnan(corr[3, :])) and np.all(np.isnan(corr[:, 3]))

    def test_label_column_comes_first(self):
        labels = np.array([0, 1, 0, 1])
        flags = np.zeros((4, 7), dtype=np.int64)
        flags[:, 0] = labels  # racism flag mirrors the label
        corr = correlation_matrix(labels, flags)
        assert corr[0, 1] == 1.0
        assert COLUMN_NAMES[0] == "hateful" and COLUMN_NAMES[1] == "racism"

    def test_shape_validation(self):
        with pytest.raises(ValueError, match="flags"):
            correlation_matrix([0, 1], np.zeros((2, 3)))


class TestIncidence:
    def test_hand_computed_counts(self):
        labels = [0, 0, 1, 1, 1]
        flags = np.zeros((5, 7), dtype=np.int64)
        flags[1, 0] = 1                  # benign, 1 category
        flags[2, :3] = 1                 # hateful, 3 categories
        flags[3, :5] = 1                 # hateful, 5 -> 4+ bucket
        inc = incidence(labels, flags)
        assert inc.counts.tolist() == [[1, 1, 0, 0, 0],
                                       [1, 0, 0, 1, 1]]
        assert inc.total() == 5

    def test_counts_partition_input(self):
        rng = np.random.default_rng(5)
        labels, flags = random_flags(rng, 200)
        inc = incidence(labels, flags)
        assert inc.total() == 200
        assert inc.counts[1].sum() == labels.sum()

    def test_empty_input(self):
        inc = incidence([], np.zeros((0, 7)))
        assert inc.total() == 0

    def test_hateful_share(self):
        inc = IncidenceTable(np.array([[3, 0, 1, 0, 0],
                                       [1, 0, 3, 0, 0]]))
        assert inc.hateful_share(0) == pytest.approx(0.25)
        assert inc.hateful_share(2) == pytest.approx(0.75)
        assert math.isnan(inc.hateful_share(1))

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            IncidenceTable(np.zeros((2, 4)))
        with pytest.raises(ValueError, match="flags"):
            incidence([0, 1], np.zeros((2, 3)))


class TestRendering:
    def test_incidence_csv(self):
        inc = IncidenceTable(np.array([[5, 4, 3, 2, 1], [0, 1, 2, 3, 4]]))
        assert incidence_csv(inc) == (INCIDENCE_HEADER + "\n"
                                      "false,5,4,3,2,1\n"
                                      "true,0,1,2,3,4\n")

    def test_correlation_csv_na_and_precision(self):
        corr = np.full((8, 8), np.nan)
        corr[0, 1] = corr[1, 0] = 0.123456
        text = correlation_csv(corr)
        lines = text.splitlines()
        assert lines[0] == "," + ",".join(COLUMN_NAMES)
        assert lines[1].split(",")[2] == "0.123"
        assert lines[1].split(",")[3] == "NA"

    def test_report_contents(self):
        labels = [0, 1, 1]
        flags = np.zeros((3, 7), dtype=np.int64)
        flags[1, 0] = 1
        flags[2, 0] = 1
        text = report(incidence(labels, flags), correlation_matrix(labels, flags))
        assert "false,1,0,0,0,0" in text
        assert "true,0,2,0,0,0" in text
        assert "hateful share at 1 categories: 100.00% (N = 2)" in text
        assert "hateful share at 4+ categories: NA" in text
        assert text.endswith("\n")

    def test_single_example_report_is_all_na(self):
        labels = [1]
        flags = np.ones((1, 7), dtype=np.int64)
        corr = correlation_matrix(labels, flags)
        assert np.all(np.isnan(corr))
        text = report(incidence(labels, flags), corr)
        assert "NA" in text
