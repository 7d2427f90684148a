"""Sensitive-text tagging.

Each meme text receives seven binary flags: six protected categories matched
exactly on token sequences, plus a profanity flag that additionally catches
misspelled variants through Levenshtein automata. Slur lists are not shipped;
lexicons are user-supplied files (see ``load_lexicon``), and the test suite
uses an invented placeholder lexicon.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, replace
from typing import Iterable, Mapping

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .fuzzy import MAX_EDITS, LevenshteinAutomaton

CATEGORIES = (
    "racism",
    "nationality",
    "sex",
    "religion",
    "pregnancy",
    "disability",
    "profanity",
)
PROTECTED_CATEGORIES = CATEGORIES[:6]

# maximal runs of letters, digits and ASCII apostrophes; underscore separates
_TOKEN_RE = re.compile(r"(?:[^\W_]|')+", re.UNICODE)


def normalize(text: str) -> list[str]:
    """Lowercase ``text`` and split it into tokens.

    Tokens are maximal runs of Unicode letters, digits and ASCII apostrophes;
    every other character separates. Deterministic, never raises.
    """
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class TagVector:
    """Seven binary flags plus an optional external hate-speech probability."""

    racism: int = 0
    nationality: int = 0
    sex: int = 0
    religion: int = 0
    pregnancy: int = 0
    disability: int = 0
    profanity: int = 0
    hatexplain_proba: float | None = None

    def __post_init__(self):
        for cat in CATEGORIES:
            if getattr(self, cat) not in (0, 1):
                raise ValueError(f"flag {cat!r} must be 0 or 1")
        p = self.hatexplain_proba
        if p is not None and not 0.0 <= p <= 1.0:
            raise ValueError(f"hatexplain_proba must be in [0, 1], got {p}")

    def flags(self) -> tuple[int, ...]:
        """The seven flags in canonical category order."""
        return tuple(getattr(self, cat) for cat in CATEGORIES)

    def n_categories(self) -> int:
        return sum(self.flags())

    @classmethod
    def from_flags(cls, flags: Iterable[int], hatexplain_proba: float | None = None) -> "TagVector":
        values = list(flags)
        if len(values) != len(CATEGORIES):
            raise ValueError(f"expected {len(CATEGORIES)} flags, got {len(values)}")
        return cls(**dict(zip(CATEGORIES, (int(v) for v in values))), hatexplain_proba=hatexplain_proba)


class Lexicon:
    """Per-category term sets, stored as normalized token tuples."""

    def __init__(self, terms: Mapping[str, Iterable[str]]):
        unknown = sorted(set(terms) - set(CATEGORIES))
        if unknown:
            raise ValueError(f"unknown lexicon categories: {unknown}")
        table = {}
        for cat in CATEGORIES:
            entries = set()
            for raw in terms.get(cat, ()):
                tokens = tuple(normalize(raw))
                if not tokens:
                    raise ValueError(f"lexicon term {raw!r} under {cat!r} normalizes to nothing")
                entries.add(tokens)
            table[cat] = frozenset(entries)
        self._table = table

    def terms(self, category: str) -> frozenset[tuple[str, ...]]:
        return self._table[category]

    def __len__(self) -> int:
        return sum(len(v) for v in self._table.values())

    def __eq__(self, other):
        return isinstance(other, Lexicon) and self._table == other._table

    def __repr__(self):
        sizes = {cat: len(self._table[cat]) for cat in CATEGORIES if self._table[cat]}
        return f"Lexicon({sizes})"


def load_lexicon(path) -> Lexicon:
    """Read a lexicon file: UTF-8 lines ``category<TAB>term``, ``#`` comments."""
    groups: dict[str, list[str]] = {cat: [] for cat in CATEGORIES}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "\t" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'category<TAB>term'")
            cat, term = line.split("\t", 1)
            cat, term = cat.strip(), term.strip()
            if cat not in CATEGORIES:
                raise ValueError(f"{path}:{lineno}: unknown category {cat!r}")
            if not term:
                raise ValueError(f"{path}:{lineno}: empty term")
            groups[cat].append(term)
    return Lexicon(groups)


def save_lexicon(path, lexicon: Lexicon) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# category<TAB>term\n")
        for cat in CATEGORIES:
            for tokens in sorted(lexicon.terms(cat)):
                fh.write(f"{cat}\t{' '.join(tokens)}\n")


class TextTagger(TransformerMixin, BaseEstimator):
    """Produce per-text category/profanity flags.

    Protected categories match exactly: single-token terms against the token
    set, multi-token terms as consecutive token runs. Profanity additionally
    matches any token within ``k_profanity`` edits of a single-token profanity
    term; inexact hits require ``len(token) >= min_fuzzy_len`` to keep short
    tokens from matching everything, while exact hits always count.

    ``fit`` compiles the Levenshtein automata and takes no data.
    """

    def __init__(self, lexicon: Lexicon | Mapping[str, Iterable[str]] | None = None,
                 k_profanity: int = 1, min_fuzzy_len: int = 4):
        self.lexicon = lexicon
        self.k_profanity = k_profanity
        self.min_fuzzy_len = min_fuzzy_len

    def fit(self, X=None, y=None) -> "TextTagger":
        if not isinstance(self.k_profanity, int) or not 0 <= self.k_profanity <= MAX_EDITS:
            raise ValueError(f"k_profanity must be an integer in [0, {MAX_EDITS}]")
        lex = self.lexicon
        if lex is None:
            lex = Lexicon({})
        elif not isinstance(lex, Lexicon):
            lex = Lexicon(lex)
        self.lexicon_ = lex
        self._singles_ = {
            cat: frozenset(t[0] for t in lex.terms(cat) if len(t) == 1) for cat in CATEGORIES
        }
        self._sequences_ = {
            cat: tuple(sorted(t for t in lex.terms(cat) if len(t) > 1)) for cat in CATEGORIES
        }
        if self.k_profanity > 0:
            self.automata_ = tuple(
                LevenshteinAutomaton(term, self.k_profanity)
                for term in sorted(self._singles_["profanity"])
            )
        else:
            self.automata_ = ()
        return self

    def _check_fitted(self):
        if not hasattr(self, "lexicon_"):
            raise NotFittedError("TextTagger is not fitted; call fit() first")

    @staticmethod
    def _sequence_hit(tokens: list[str], seq: tuple[str, ...]) -> bool:
        span = len(seq)
        return any(tuple(tokens[i:i + span]) == seq for i in range(len(tokens) - span + 1))

    def tag(self, text: str) -> TagVector:
        """Tag one text. ``hatexplain_proba`` is left unset."""
        self._check_fitted()
        tokens = normalize(text)
        token_set = set(tokens)
        flags = {}
        for cat in CATEGORIES:
            hit = not token_set.isdisjoint(self._singles_[cat]) or any(
                self._sequence_hit(tokens, seq) for seq in self._sequences_[cat]
            )
            flags[cat] = int(hit)
        if not flags["profanity"] and self.automata_:
            flags["profanity"] = int(any(
                len(tok) >= self.min_fuzzy_len and aut.accepts(tok)
                for tok in token_set for aut in self.automata_
            ))
        return TagVector(**flags)

    def transform(self, X: Iterable[str]) -> np.ndarray:
        """Flags for each text, shape (n, 7), columns in ``CATEGORIES`` order."""
        self._check_fitted()
        rows = [self.tag(text).flags() for text in X]
        return np.asarray(rows, dtype=np.int64).reshape(len(rows), len(CATEGORIES))


def tag_text(text: str, lexicon, k_profanity: int = 1, min_fuzzy_len: int = 4) -> TagVector:
    """One-off convenience wrapper around :class:`TextTagger`."""
    return TextTagger(lexicon, k_profanity, min_fuzzy_len).fit().tag(text)


def attach_hatexplain(tags: Mapping[int, TagVector], probs: Mapping[int, float]) -> dict[int, TagVector]:
    """Attach external hate-speech probabilities to a tag table by id.

    Ids absent from ``probs`` keep their probability unset; ids in ``probs``
    but not in ``tags`` only produce a warning. Probabilities outside [0, 1]
    are an error.
    """
    bad = {i: p for i, p in probs.items() if not 0.0 <= float(p) <= 1.0}
    if bad:
        raise ValueError(f"hate-speech probabilities outside [0, 1]: {bad}")
    unknown = sorted(set(probs) - set(tags))
    if unknown:
        warnings.warn(f"hate-speech probabilities for unknown ids ignored: {unknown}")
    return {
        i: replace(tv, hatexplain_proba=float(probs[i])) if i in probs else tv
        for i, tv in tags.items()
    }


# -- CSV side files ------------------------------------------------------

TAG_CSV_HEADER = "id," + ",".join(CATEGORIES) + ",hatexplain_proba"


def write_tag_csv(path, tags: Mapping[int, TagVector]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(TAG_CSV_HEADER + "\n")
        for meme_id in sorted(tags):
            tv = tags[meme_id]
            proba = "" if tv.hatexplain_proba is None else f"{tv.hatexplain_proba:.6f}"
            flags = ",".join(str(f) for f in tv.flags())
            fh.write(f"{meme_id},{flags},{proba}\n")


def read_tag_csv(path) -> dict[int, TagVector]:
    tags: dict[int, TagVector] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != TAG_CSV_HEADER:
            raise ValueError(f"{path}: unexpected tag CSV header {header!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if len(cells) != len(CATEGORIES) + 2:
                raise ValueError(f"{path}:{lineno}: expected {len(CATEGORIES) + 2} cells")
            meme_id = int(cells[0])
            if meme_id in tags:
                raise ValueError(f"{path}:{lineno}: duplicate id {meme_id}")
            proba = float(cells[-1]) if cells[-1] else None
            tags[meme_id] = TagVector.from_flags((int(c) for c in cells[1:-1]), proba)
    return tags


def read_hatexplain_csv(path) -> dict[int, float]:
    """Read an ``id,proba`` side file."""
    probs: dict[int, float] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "id,proba":
            raise ValueError(f"{path}: expected header 'id,proba', got {header!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            id_cell, proba_cell = line.split(",")
            probs[int(id_cell)] = float(proba_cell)
    return probs
