"""Deterministic finite automata used as switching constraints.

States and labels are 1-based; 0 stands for "undefined" both in the
transition table and in logical-matrix column targets.  No initial or final
states: a word is accepted when some state sequence can read it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .tensor import LogicalMatrix, Word, WordLike, _labels

DEFAULT_WORD_LIMIT = 10**7


class DfaError(ValueError):
    pass


@dataclass(frozen=True, eq=True)
class Dfa:
    """A partial, alive DFA ``f: [ℓ] x [m] -> [ℓ]``.

    ``table[q-1][j-1]`` is ``f(q, j)`` or 0 when undefined.
    """

    num_states: int
    num_labels: int
    table: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        table = tuple(tuple(int(t) for t in row) for row in self.table)
        object.__setattr__(self, "table", table)
        if self.num_states < 1 or self.num_labels < 1:
            raise DfaError("a DFA needs at least one state and one label")
        if len(table) != self.num_states or any(len(r) != self.num_labels for r in table):
            raise DfaError(f"transition table must be {self.num_states}x{self.num_labels}")
        for q, row in enumerate(table, 1):
            for t in row:
                if not 0 <= t <= self.num_states:
                    raise DfaError(f"transition from state {q} targets {t}, outside 1..{self.num_states}")
            if not any(row):
                raise DfaError(f"state {q} has no outgoing transition (DFA is not alive)")

    @classmethod
    def from_edges(cls, states: int, labels: int, edges) -> "Dfa":
        """Build from ``[from, to, label]`` triples; duplicate ``(from, label)`` is an error."""
        if states < 1 or labels < 1:
            raise DfaError("'states' and 'labels' must be positive")
        table = [[0] * labels for _ in range(states)]
        for pos, edge in enumerate(edges):
            try:
                src, dst, lab = (int(x) for x in edge)
            except (TypeError, ValueError):
                raise DfaError(f"edges[{pos}] must be a [from, to, label] triple, got {edge!r}") from None
            if not 1 <= src <= states:
                raise DfaError(f"edges[{pos}]: 'from' state {src} outside 1..{states}")
            if not 1 <= dst <= states:
                raise DfaError(f"edges[{pos}]: 'to' state {dst} outside 1..{states}")
            if not 1 <= lab <= labels:
                raise DfaError(f"edges[{pos}]: label {lab} outside 1..{labels}")
            if table[src - 1][lab - 1]:
                raise DfaError(f"edges[{pos}]: duplicate transition from state {src} on label {lab}")
            table[src - 1][lab - 1] = dst
        return cls(states, labels, tuple(map(tuple, table)))

    @classmethod
    def complete(cls, labels: int) -> "Dfa":
        """Single-state DFA accepting every word."""
        return cls(1, labels, ((1,) * labels,))

    @property
    def edges(self) -> list[tuple[int, int, int]]:
        return [
            (q, t, j)
            for q, row in enumerate(self.table, 1)
            for j, t in enumerate(row, 1)
            if t
        ]

    def transition(self, state: int, label: int) -> int:
        return self.table[state - 1][label - 1] if state else 0

    def target_array(self) -> np.ndarray:
        """``(m, ℓ+1)`` int array ``T[j-1, q] = f(q, j)`` with ``T[:, 0] = 0``."""
        out = np.zeros((self.num_labels, self.num_states + 1), dtype=np.int64)
        out[:, 1:] = np.array(self.table, dtype=np.int64).T
        return out

    def to_dict(self) -> dict:
        return {"states": self.num_states, "labels": self.num_labels, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_dict(cls, data: dict) -> "Dfa":
        for key in ("states", "labels", "edges"):
            if key not in data:
                raise DfaError(f"DFA description is missing field {key!r}")
        return cls.from_edges(int(data["states"]), int(data["labels"]), data["edges"])


@dataclass(frozen=True)
class StructureMatrices:
    per_label: tuple[LogicalMatrix, ...]
    stacked: LogicalMatrix


def structure_matrices(d: Dfa) -> StructureMatrices:
    """``F_j`` with ``F_j[s, t] = 1`` iff ``f(q_t, j) = q_s``; undefined gives a zero column."""
    per_label = tuple(
        LogicalMatrix(d.num_states, tuple(d.table[t][j] for t in range(d.num_states)))
        for j in range(d.num_labels)
    )
    stacked = LogicalMatrix(d.num_states, tuple(t for f in per_label for t in f.targets))
    return StructureMatrices(per_label, stacked)


def dfa_from_structure(per_label: Sequence[LogicalMatrix]) -> Dfa:
    ell = per_label[0].rows
    for f in per_label:
        if f.shape != (ell, ell):
            raise DfaError("structure matrices must all be square of the same size")
    table = tuple(tuple(f.targets[q] for f in per_label) for q in range(ell))
    return Dfa(ell, len(per_label), table)


def _checked_labels(d: Dfa, w: WordLike) -> tuple[int, ...]:
    labels = _labels(w)
    for j in labels:
        if not 1 <= j <= d.num_labels:
            raise ValueError(f"label {j} outside 1..{d.num_labels}")
    return labels


def f_product(d: Dfa, w: WordLike) -> LogicalMatrix:
    """``F_σ = F_{σ_{k-1}} ... F_{σ_0}``, composed on column targets."""
    labels = _checked_labels(d, w)
    if not labels:
        raise ValueError("word must be nonempty")
    targets = list(range(1, d.num_states + 1))
    for j in labels:
        targets = [d.transition(t, j) for t in targets]
    return LogicalMatrix(d.num_states, tuple(targets))


def has_cycle(f: LogicalMatrix) -> bool:
    """True iff the square logical matrix has spectral radius 1 (else it is nilpotent)."""
    if f.rows != f.cols:
        raise ValueError("expected a square logical matrix")
    for start in range(1, f.rows + 1):
        q = start
        for _ in range(f.rows):
            q = f.apply(q)
            if q == 0:
                break
        if q:
            return True
    return False


def _advance(d: Dfa, states: int, label: int) -> int:
    out = 0
    q = 1
    while states:
        if states & 1:
            t = d.table[q - 1][label - 1]
            if t:
                out |= 1 << (t - 1)
        states >>= 1
        q += 1
    return out


def accepts(d: Dfa, w: WordLike) -> bool:
    """Graph walk over the set of states still alive after each label."""
    alive = (1 << d.num_states) - 1
    for j in _checked_labels(d, w):
        alive = _advance(d, alive, j)
        if not alive:
            return False
    return True


def _word_array(d: Dfa, words) -> np.ndarray:
    w = np.asarray(words, dtype=np.int64)
    if w.ndim != 2 or w.shape[1] == 0:
        raise ValueError("words must be a nonempty (N, k) integer array")
    if w.size and (w.min() < 1 or w.max() > d.num_labels):
        raise ValueError(f"labels must lie in 1..{d.num_labels}")
    return w


def _image_table(d: Dfa) -> np.ndarray:
    """``img[j-1, S]`` = bitset of states reached from state bitset ``S`` on label ``j``."""
    ell = d.num_states
    table = d.target_array()
    masks = np.arange(1 << ell, dtype=np.int64)
    img = np.zeros((d.num_labels, 1 << ell), dtype=np.int64)
    for q in range(1, ell + 1):
        has_q = (masks >> (q - 1)) & 1
        for j in range(d.num_labels):
            t = table[j, q]
            if t:
                img[j] |= has_q << (t - 1)
    return img


def accepts_many(d: Dfa, words) -> np.ndarray:
    """Vectorised :func:`accepts` for an ``(N, k)`` array of equal-length words."""
    w = _word_array(d, words)
    n = w.shape[0]
    if d.num_states <= 16:
        img = _image_table(d)
        alive = np.full(n, (1 << d.num_states) - 1, dtype=np.int64)
        for i in range(w.shape[1]):
            alive = img[w[:, i] - 1, alive]
        return alive != 0
    table = d.target_array()
    rows = np.arange(n)[:, None]
    alive = np.ones((n, d.num_states), dtype=np.int64)
    for i in range(w.shape[1]):
        nxt = np.zeros((n, d.num_states + 1), dtype=np.int64)
        np.add.at(nxt, (rows, table[w[:, i] - 1, 1:]), alive)
        alive = (nxt[:, 1:] > 0).astype(np.int64)
    return alive.any(axis=1)


def f_products(d: Dfa, words) -> np.ndarray:
    """Column targets of ``F_σ`` for every row of an ``(N, k)`` word array, shape ``(N, ℓ)``."""
    w = _word_array(d, words)
    table = d.target_array()
    cur = np.broadcast_to(np.arange(1, d.num_states + 1), (w.shape[0], d.num_states))
    for i in range(w.shape[1]):
        cur = table[w[:, i, None] - 1, cur]
    return np.ascontiguousarray(cur)


class AcceptedWords:
    """Lexicographic stream of the accepted words of length ``k``.

    Depth-first over prefixes, abandoning a prefix as soon as its set of
    reachable states is empty.  Stops after ``limit`` words and sets
    :attr:`truncated`.
    """

    def __init__(self, d: Dfa, k: int, limit: int = DEFAULT_WORD_LIMIT):
        if k < 1:
            raise ValueError("word length must be positive")
        self.dfa = d
        self.k = k
        self.limit = limit
        self.truncated = False
        self.count = 0

    def __iter__(self) -> Iterator[Word]:
        d, k, m = self.dfa, self.k, self.dfa.num_labels
        prefix: list[int] = []
        sets = [(1 << d.num_states) - 1]
        next_label = [1]
        while next_label:
            j = next_label[-1]
            if j > m:
                next_label.pop()
                sets.pop()
                if prefix:
                    prefix.pop()
                continue
            next_label[-1] = j + 1
            alive = _advance(d, sets[-1], j)
            if not alive:
                continue
            if len(prefix) + 1 == k:
                if self.count >= self.limit:
                    self.truncated = True
                    return
                self.count += 1
                yield Word(tuple(prefix) + (j,), m)
                continue
            prefix.append(j)
            sets.append(alive)
            next_label.append(1)


def enumerate_accepted(d: Dfa, k: int, limit: int = DEFAULT_WORD_LIMIT) -> AcceptedWords:
    return AcceptedWords(d, k, limit)


def omega_to_dfa(omega, m: int | None = None) -> Dfa:
    """DFA on states = labels with ``f(q_j, i) = q_i`` iff ``omega[i, j] == 1``."""
    om = np.asarray(omega)
    if om.ndim != 2 or om.shape[0] != om.shape[1]:
        raise ValueError(f"omega must be square, got shape {om.shape}")
    if m is not None and om.shape[0] != m:
        raise ValueError(f"omega is {om.shape[0]}x{om.shape[0]} but m = {m}")
    if not np.all((om == 0) | (om == 1)):
        raise ValueError("omega must be a 0/1 matrix")
    m = om.shape[0]
    dead = [j + 1 for j in range(m) if not om[:, j].any()]
    if dead:
        raise DfaError(f"omega column(s) {dead} are all zero (dead states)")
    table = tuple(tuple(i + 1 if om[i, j] else 0 for i in range(m)) for j in range(m))
    return Dfa(m, m, table)
