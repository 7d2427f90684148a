"""Edit distance and Levenshtein automaton tests.

The DP implementation is pinned by known values and metric properties; the
automaton is checked against the DP as its defining property (small randomized
sweep here, the exhaustive one lives in test_acceptance)."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memefusion.fuzzy import MAX_EDITS, LevenshteinAutomaton, levenshtein

short_text = st.text(alphabet="abcd", max_size=8)
term_text = st.text(alphabet="abc", min_size=1, max_size=5)


class TestLevenshtein:
    @pytest.mark.parametrize("a, b, d", [
        ("", "", 0),
        ("abc", "abc", 0),
        ("abc", "", 3),
        ("", "xyz", 3),
        ("kitten", "sitting", 3),
        ("flaw", "lawn", 2),
        ("a", "b", 1),
        ("ab", "ba", 2),
        ("gorram", "goram", 1),
    ])
    def test_known_values(self, a, b, d):
        assert levenshtein(a, b) == d

    @given(short_text, short_text)
    def test_symmetry_and_bounds(self, a, b):
        d = levenshtein(a, b)
        assert d == levenshtein(b, a)
        assert abs(len(a) - len(b)) <= d <= max(len(a), len(b))
        assert (d == 0) == (a == b)

    @given(short_text, short_text, short_text)
    def test_triangle_inequality(self, a, b, c):
        assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)


class TestAutomaton:
    def test_empty_term_rejected(self):
        with pytest.raises(ValueError):
            LevenshteinAutomaton("", 1)

    @pytest.mark.parametrize("k", [-1, MAX_EDITS + 1, 1.5, "1"])
    def test_bad_k_rejected(self, k):
        with pytest.raises(ValueError):
            LevenshteinAutomaton("abc", k)

    def test_k0_is_exact_match(self):
        auto = LevenshteinAutomaton("frak", 0)
        assert auto.accepts("frak")
        for w in ("fra", "frakk", "frik", "", "kraf"):
            assert not auto.accepts(w)

    def test_char_classes(self):
        auto = LevenshteinAutomaton("aba", 1)
        assert auto.n_classes == 3  # {a, b} plus "other"
        assert auto.char_class("a") != auto.char_class("b")
        other = auto.n_classes - 1
        assert auto.char_class("z") == other
        assert auto.char_class("q") == other

    def test_other_class_chars_are_interchangeable(self):
        auto = LevenshteinAutomaton("smeg", 2)
        for w in ("smeg", "sxeg", "xxeg", "smegxx", "xmegx"):
            assert auto.accepts(w) == auto.accepts(w.replace("x", "q"))

    def test_dead_state_absorbs(self):
        auto = LevenshteinAutomaton("aa", 0)
        dead = auto._dead
        assert dead is not None
        assert not auto.is_accepting(dead)
        for cls in range(auto.n_classes):
            assert auto.next_state(dead, cls) == dead

    def test_public_walk_matches_accepts(self):
        auto = LevenshteinAutomaton("frell", 1)
        for w in ("frell", "frel", "frelx", "xfrell", "ffrell", "zz"):
            state = auto.start_state
            for ch in w:
                state = auto.next_state(state, auto.char_class(ch))
            assert auto.is_accepting(state) == auto.accepts(w)

    @settings(deadline=None, max_examples=300)
    @given(term_text, st.integers(0, MAX_EDITS), short_text)
    def test_accepts_equals_dp(self, term, k, word):
        auto = LevenshteinAutomaton(term, k)
        assert auto.accepts(word) == (levenshtein(term, word) <= k)

    @settings(deadline=None, max_examples=50)
    @given(term_text, st.integers(0, MAX_EDITS - 1), short_text)
    def test_acceptance_monotone_in_k(self, term, k, word):
        if LevenshteinAutomaton(term, k).accepts(word):
            assert LevenshteinAutomaton(term, k + 1).accepts(word)
