"""Dense matrix helpers and the semi-tensor product calculus.

Matrices are plain ``float64`` numpy arrays.  Logical matrices (every column
is a unit vector or the zero vector) get their own column-index encoding so
that products of DFA structure matrices never have to be densified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

DEFAULT_ELEMENT_CAP = 10**8


class SizeCapError(ValueError):
    """Raised when a Kronecker/STP result would exceed the element cap."""


def as_matrix(a, *, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a finite 2-D float64 array (vectors become columns)."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def _check_cap(rows: int, cols: int, cap: int | None) -> None:
    cap = DEFAULT_ELEMENT_CAP if cap is None else cap
    if rows * cols > cap:
        raise SizeCapError(f"result of shape {rows}x{cols} exceeds element cap {cap}")


# ---------------------------------------------------------------------------
# Logical matrices and delta vectors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LogicalMatrix:
    """An ``rows x len(targets)`` 0/1 matrix stored by column targets.

    ``targets[j] == s`` means column ``j`` is the ``s``-th unit vector, and
    ``s == 0`` means the column is zero.  Indices are 1-based.
    """

    rows: int
    targets: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if self.rows < 1:
            raise ValueError("rows must be positive")
        if not self.targets:
            raise ValueError("a logical matrix needs at least one column")
        for t in self.targets:
            if not 0 <= t <= self.rows:
                raise ValueError(f"column target {t} outside 0..{self.rows}")

    @property
    def cols(self) -> int:
        return len(self.targets)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def is_zero(self) -> bool:
        return not any(self.targets)

    def dense(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols))
        for j, t in enumerate(self.targets):
            if t:
                out[t - 1, j] = 1.0
        return out

    def apply(self, index: int) -> int:
        """Image of the unit vector ``index`` (0 maps to 0)."""
        return self.targets[index - 1] if index else 0

    def __matmul__(self, other):
        if isinstance(other, LogicalMatrix):
            if self.cols != other.rows:
                raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
            return LogicalMatrix(self.rows, tuple(self.apply(t) for t in other.targets))
        if isinstance(other, DeltaVector):
            if self.cols != other.dim:
                raise ValueError("dimension mismatch")
            return DeltaVector(self.rows, self.apply(other.index))
        return self.dense() @ np.asarray(other, dtype=float)

    @classmethod
    def from_dense(cls, a) -> "LogicalMatrix":
        a = np.asarray(a)
        if a.ndim != 2:
            raise ValueError("expected a 2-D array")
        targets = []
        for j in range(a.shape[1]):
            col = a[:, j]
            nz = np.flatnonzero(col)
            if len(nz) == 0:
                targets.append(0)
            elif len(nz) == 1 and col[nz[0]] == 1:
                targets.append(int(nz[0]) + 1)
            else:
                raise ValueError(f"column {j + 1} is not a unit or zero vector")
        return cls(a.shape[0], tuple(targets))

    @classmethod
    def identity(cls, n: int) -> "LogicalMatrix":
        return cls(n, tuple(range(1, n + 1)))

    def __str__(self) -> str:
        return f"δ{self.rows}[{','.join(map(str, self.targets))}]"


def delta(n: int, targets: Iterable[int]) -> LogicalMatrix:
    """The matrix ``δ_n[i_1, ..., i_k]``."""
    return LogicalMatrix(n, tuple(targets))


@dataclass(frozen=True)
class DeltaVector:
    """The unit vector ``δ_dim^index``; ``index == 0`` is the zero vector."""

    dim: int
    index: int

    def __post_init__(self):
        if self.dim < 1 or not 0 <= self.index <= self.dim:
            raise ValueError(f"invalid delta vector δ_{self.dim}^{self.index}")

    def dense(self) -> np.ndarray:
        v = np.zeros((self.dim, 1))
        if self.index:
            v[self.index - 1, 0] = 1.0
        return v

    @property
    def is_zero(self) -> bool:
        return self.index == 0


# ---------------------------------------------------------------------------
# Words
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Word(Sequence[int]):
    """A switching word ``σ_0 σ_1 ... σ_{k-1}`` over the alphabet ``1..arity``.

    ``labels[0]`` is applied first.
    """

    labels: tuple[int, ...]
    arity: int

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(int(x) for x in self.labels))
        if self.arity < 1:
            raise ValueError("arity must be positive")
        for x in self.labels:
            if not 1 <= x <= self.arity:
                raise ValueError(f"label {x} outside 1..{self.arity}")

    def __len__(self) -> int:
        return len(self.labels)

    def __getitem__(self, i):
        return self.labels[i]

    def __iter__(self) -> Iterator[int]:
        return iter(self.labels)

    def __str__(self) -> str:
        if self.arity <= 9:
            return "".join(map(str, self.labels))
        return ",".join(map(str, self.labels))

    def __add__(self, other: "Word") -> "Word":
        if self.arity != other.arity:
            raise ValueError("cannot concatenate words over different alphabets")
        return Word(self.labels + other.labels, self.arity)

    @classmethod
    def parse(cls, text: str, arity: int) -> "Word":
        """Parse ``"231"`` (single-digit labels) or ``"2,3,1"``."""
        text = text.strip()
        if "," in text or " " in text:
            parts = [p for p in text.replace(",", " ").split() if p]
        else:
            parts = list(text)
        try:
            labels = tuple(int(p) for p in parts)
        except ValueError as exc:
            raise ValueError(f"cannot parse word {text!r}") from exc
        return cls(labels, arity)


WordLike = Union[Word, Sequence[int]]


def _labels(w: WordLike) -> tuple[int, ...]:
    return w.labels if isinstance(w, Word) else tuple(int(x) for x in w)


def word_to_index(w: WordLike, m: int | None = None) -> int:
    """1-based index τ of ``w`` among ``[m]^k``; the last label is most significant."""
    labels = _labels(w)
    if m is None:
        if not isinstance(w, Word):
            raise TypeError("arity m is required for a plain label sequence")
        m = w.arity
    if not labels:
        raise ValueError("word must be nonempty")
    tau = 1
    for i, j in enumerate(labels):
        if not 1 <= j <= m:
            raise ValueError(f"label {j} outside 1..{m}")
        tau += (j - 1) * m**i
    return tau


def index_to_word(tau: int, k: int, m: int) -> Word:
    if k < 1 or m < 1:
        raise ValueError("k and m must be positive")
    if not 1 <= tau <= m**k:
        raise ValueError(f"index {tau} outside 1..{m ** k}")
    rest = tau - 1
    labels = []
    for _ in range(k):
        rest, digit = divmod(rest, m)
        labels.append(digit + 1)
    return Word(tuple(labels), m)


# ---------------------------------------------------------------------------
# Products
# ---------------------------------------------------------------------------


def _dense(a) -> np.ndarray:
    if isinstance(a, (LogicalMatrix, DeltaVector)):
        return a.dense()
    return as_matrix(a)


def kron(a, b, *, cap: int | None = None) -> np.ndarray:
    a, b = _dense(a), _dense(b)
    _check_cap(a.shape[0] * b.shape[0], a.shape[1] * b.shape[1], cap)
    return np.kron(a, b)


def stp(a, b, *, cap: int | None = None) -> np.ndarray:
    """Left semi-tensor product ``(a ⊗ I_{s/n})(b ⊗ I_{s/p})`` with ``s = lcm(n, p)``."""
    a, b = _dense(a), _dense(b)
    n, p = a.shape[1], b.shape[0]
    if n == p:
        return a @ b
    s = math.lcm(n, p)
    _check_cap(a.shape[0] * (s // n), b.shape[1] * (s // p), cap)
    return kron(a, np.eye(s // n), cap=cap) @ kron(b, np.eye(s // p), cap=cap)


def stp_chain(*factors, cap: int | None = None) -> np.ndarray:
    """Left-to-right STP of all factors (STP is associative)."""
    if not factors:
        raise ValueError("need at least one factor")
    out = _dense(factors[0])
    for f in factors[1:]:
        out = stp(out, f, cap=cap)
    return out


def stp_power(a, k: int, *, cap: int | None = None) -> np.ndarray:
    if k < 1:
        raise ValueError("power must be positive")
    return stp_chain(*([a] * k), cap=cap)


def swap_matrix(n: int, m: int) -> LogicalMatrix:
    """``W_[n,m]``, the logical matrix with ``W ⋉ x ⋉ y = y ⋉ x`` for x∈R^n, y∈R^m."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    # column (i, j) holds δ_m^j ⋉ δ_n^i
    return LogicalMatrix(n * m, tuple((j - 1) * n + i for i in range(1, n + 1) for j in range(1, m + 1)))


def power_reducing_matrix(n: int) -> LogicalMatrix:
    """``Φ_n = diag(δ_n^1, ..., δ_n^n)``, so that ``x ⋉ x = Φ_n x`` on ``Δ_n``."""
    if n < 1:
        raise ValueError("n must be positive")
    return LogicalMatrix(n * n, tuple((i - 1) * n + i for i in range(1, n + 1)))
