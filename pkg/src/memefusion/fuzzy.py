"""Bounded edit-distance matching.

``levenshtein`` is the plain dynamic-programming edit distance and doubles as
the reference oracle for ``LevenshteinAutomaton``, which compiles a term and a
maximum distance ``k`` into a small DFA accepting exactly the strings within
distance ``k`` of the term.
"""

from __future__ import annotations

MAX_EDITS = 2


def levenshtein(a: str, b: str) -> int:
    """Edit distance between two strings (unit-cost insert/delete/substitute)."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    # prev[j] = distance between the consumed prefix of a and b[:j]
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


class LevenshteinAutomaton:
    """DFA accepting exactly the strings within edit distance ``k`` of ``term``.

    Construction runs the classic NFA over (position, errors) states, with
    epsilon moves for skipped term characters, and determinizes it eagerly.
    Matching a word is then one table lookup per character, which keeps
    scanning many tokens against the same term cheap.

    Characters that do not occur in the term all behave identically, so they
    share a single "other" character class and the transition table stays
    small regardless of the input alphabet.
    """

    def __init__(self, term: str, k: int):
        if not term:
            raise ValueError("term must be non-empty")
        if not isinstance(k, int) or not 0 <= k <= MAX_EDITS:
            raise ValueError(f"k must be an integer in [0, {MAX_EDITS}], got {k!r}")
        self.term = term
        self.k = k
        alphabet = sorted(set(term))
        self._class_of = {ch: i for i, ch in enumerate(alphabet)}
        self.n_classes = len(alphabet) + 1  # trailing index = "other"
        self._term_cls = [self._class_of[ch] for ch in term]
        self._compile()

    # -- NFA simulation -------------------------------------------------

    def _start_set(self) -> dict[int, int]:
        # epsilon closure of (0, 0): up to k leading term chars may be skipped
        return {i: i for i in range(min(self.k, len(self.term)) + 1)}

    def _step_set(self, state: dict[int, int], cls: int) -> dict[int, int]:
        """Advance a sparse {position: min_errors} state set by one character class."""
        n, k = len(self.term), self.k
        nxt: dict[int, int] = {}

        def relax(pos: int, err: int) -> None:
            if err <= k and err < nxt.get(pos, k + 1):
                nxt[pos] = err

        for pos, err in state.items():
            if pos < n and self._term_cls[pos] == cls:
                relax(pos + 1, err)  # exact character match
            if pos < n:
                relax(pos + 1, err + 1)  # substitution
            relax(pos, err + 1)  # extra character in the word
        # epsilon closure: skip term characters (single ascending pass is
        # enough because each move increases position and errors together)
        for pos in range(n):
            err = nxt.get(pos, k + 1) + 1
            if err <= k and err < nxt.get(pos + 1, k + 1):
                nxt[pos + 1] = err
        return nxt

    # -- determinization ------------------------------------------------

    def _compile(self) -> None:
        start = self._start_set()
        index: dict[tuple, int] = {tuple(sorted(start.items())): 0}
        sets = [start]
        trans: list[list[int]] = []
        accept: list[bool] = []
        n = len(self.term)
        i = 0
        while i < len(sets):
            current = sets[i]
            accept.append(n in current)
            row = []
            for cls in range(self.n_classes):
                nxt = self._step_set(current, cls)
                key = tuple(sorted(nxt.items()))
                j = index.get(key)
                if j is None:
                    j = len(sets)
                    index[key] = j
                    sets.append(nxt)
                row.append(j)
            trans.append(row)
            i += 1
        self._trans = trans
        self._accept = accept
        self._dead = index.get(())
        self.n_states = len(sets)
        self.start_state = 0

    # -- public DFA surface ----------------------------------------------

    def char_class(self, ch: str) -> int:
        return self._class_of.get(ch, self.n_classes - 1)

    def next_state(self, state: int, cls: int) -> int:
        return self._trans[state][cls]

    def is_accepting(self, state: int) -> bool:
        return self._accept[state]

    def accepts(self, word: str) -> bool:
        """True iff levenshtein(term, word) <= k."""
        state = 0
        trans = self._trans
        class_of = self._class_of
        other = self.n_classes - 1
        dead = self._dead
        for ch in word:
            state = trans[state][class_of.get(ch, other)]
            if state == dead:
                return False
        return self._accept[state]
