"""Arbitrary and DFA-constrained switched systems and their lifts."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .automaton import Dfa, enumerate_accepted, f_product, structure_matrices
from .tensor import (
    DEFAULT_ELEMENT_CAP,
    DeltaVector,
    SizeCapError,
    Word,
    WordLike,
    _labels,
    as_matrix,
    kron,
    stp,
)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class ArbitrarySystem:
    """``x_{k+1} = A_{σ_k} x_k`` with unconstrained switching over ``A_1..A_m``."""

    matrices: tuple[np.ndarray, ...]

    def __post_init__(self):
        mats = tuple(_frozen(as_matrix(a, name=f"A_{i}")) for i, a in enumerate(self.matrices, 1))
        if not mats:
            raise ValueError("a switched system needs at least one matrix")
        n = mats[0].shape[0]
        for i, a in enumerate(mats, 1):
            if a.shape != (n, n):
                raise ValueError(f"A_{i} has shape {a.shape}, expected ({n}, {n})")
        object.__setattr__(self, "matrices", mats)

    @property
    def dim(self) -> int:
        return self.matrices[0].shape[0]

    @property
    def arity(self) -> int:
        return len(self.matrices)

    @property
    def h(self) -> np.ndarray:
        """``H = [A_1, ..., A_m]``."""
        return np.hstack(self.matrices)

    def stack(self) -> np.ndarray:
        return np.stack(self.matrices)


@dataclass(frozen=True, eq=False)
class ConstrainedSystem:
    """A matrix set whose switching words must be accepted by ``dfa``.

    ``label_words`` is set by :func:`t_product_lift`: label ``i`` of this
    system stands for ``label_words[i-1]`` over the parent alphabet.
    """

    system: ArbitrarySystem
    dfa: Dfa
    label_words: Optional[tuple[Word, ...]] = None

    def __post_init__(self):
        if self.dfa.num_labels != self.system.arity:
            raise ValueError(
                f"DFA has {self.dfa.num_labels} labels but the system has {self.system.arity} matrices"
            )
        if self.label_words is not None and len(self.label_words) != self.system.arity:
            raise ValueError("label_words must have one entry per label")


@dataclass(frozen=True, eq=False)
class LiftedSystem:
    """``A_M = {F_i ⊗ A_i}``, an arbitrary system of size ``nℓ``."""

    base: ConstrainedSystem
    phis: tuple[np.ndarray, ...] = field(default=())

    @property
    def ell(self) -> int:
        return self.base.dfa.num_states

    def as_system(self) -> ArbitrarySystem:
        return ArbitrarySystem(self.phis)


def _check_label(s: ArbitrarySystem, label: int) -> int:
    label = int(label)
    if not 1 <= label <= s.arity:
        raise ValueError(f"label {label} outside 1..{s.arity}")
    return label


def step(s: ArbitrarySystem, label: int, x) -> np.ndarray:
    """``x(k+1) = H ⋉ σ(k) ⋉ x(k)``."""
    label = _check_label(s, label)
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != s.dim:
        raise ValueError(f"state has length {x.shape[0]}, expected {s.dim}")
    a = stp(s.h, DeltaVector(s.arity, label))
    return (a @ x).reshape(-1)


def product(s: ArbitrarySystem, w: WordLike) -> np.ndarray:
    """``A_σ = A_{σ_{k-1}} ... A_{σ_0}``."""
    labels = _labels(w)
    if not labels:
        raise ValueError("word must be nonempty")
    out = s.matrices[_check_label(s, labels[0]) - 1].copy()
    for j in labels[1:]:
        out = s.matrices[_check_label(s, j) - 1] @ out
    return out


def h_tilde(s: ArbitrarySystem, k: int, *, cap: int | None = None) -> np.ndarray:
    """``H̃_k = H ⋉ (I_m ⊗ H) ⋉ ... ⋉ (I_{m^{k-1}} ⊗ H)``, of shape ``n x n m^k``."""
    if k < 1:
        raise ValueError("k must be positive")
    n, m = s.dim, s.arity
    limit = DEFAULT_ELEMENT_CAP if cap is None else cap
    if n * n * m**k > limit:
        raise SizeCapError(f"H̃_{k} has {n * n * m ** k} entries, above the cap {limit}")
    h = s.h
    out = h
    for i in range(1, k):
        out = stp(out, kron(np.eye(m**i), h, cap=cap), cap=cap)
    return out


def stp_lift(c: ConstrainedSystem) -> LiftedSystem:
    fs = structure_matrices(c.dfa).per_label
    phis = tuple(_frozen(kron(f.dense(), a)) for f, a in zip(fs, c.system.matrices))
    return LiftedSystem(c, phis)


def lifted_state(q: DeltaVector, x) -> np.ndarray:
    """``ξ = q ⋉ x = q ⊗ x``."""
    x = np.asarray(x, dtype=float).reshape(-1)
    return np.kron(q.dense().reshape(-1), x)


def lifted_step(lifted: LiftedSystem, label: int, xi) -> np.ndarray:
    """``ξ(k+1) = Φ_label ξ(k)``; a rejected label yields the zero vector."""
    label = _check_label(lifted.base.system, label)
    return lifted.phis[label - 1] @ np.asarray(xi, dtype=float).reshape(-1)


def t_product_lift(c: ConstrainedSystem, t: int, *, limit: int = 10**7) -> ConstrainedSystem:
    """The T-product system over accepted words of length ``t``.

    Labels are the accepted length-``t`` words in lexicographic order; the
    DFA keeps the original states and has an edge ``v -> F_σ(v)`` on label
    ``σ`` wherever that column of ``F_σ`` is nonzero.
    """
    if t < 1:
        raise ValueError("t must be positive")
    stream = enumerate_accepted(c.dfa, t, limit=limit)
    words = list(stream)
    if stream.truncated:
        raise SizeCapError(f"more than {limit} accepted words of length {t}")
    ell = c.dfa.num_states
    mats = []
    columns = []
    for w in words:
        mats.append(product(c.system, w))
        columns.append(f_product(c.dfa, w).targets)
    table = tuple(tuple(col[v] for col in columns) for v in range(ell))
    dfa = Dfa(ell, len(words), table)
    return ConstrainedSystem(ArbitrarySystem(tuple(mats)), dfa, tuple(words))


def _omega_array(omega, m: int) -> np.ndarray:
    om = np.asarray(omega)
    if om.shape != (m, m):
        raise ValueError(f"omega must be {m}x{m}, got shape {om.shape}")
    if not np.all((om == 0) | (om == 1)):
        raise ValueError("omega must be a 0/1 matrix")
    return om.astype(float)


def omega_structure(omega, i: int) -> np.ndarray:
    """``Ω_i``: row ``i`` of Ω kept in place, every other row zero."""
    om = np.asarray(omega, dtype=float)
    out = np.zeros_like(om)
    out[i - 1] = om[i - 1]
    return out


def omega_lift(s: ArbitrarySystem, omega) -> ArbitrarySystem:
    """``A_Ω = {Ω_i ⊗ A_i}``; a product is nonzero iff it is Ω-admissible."""
    om = _omega_array(omega, s.arity)
    return ArbitrarySystem(tuple(kron(omega_structure(om, i), a) for i, a in enumerate(s.matrices, 1)))


def edge_lift(c: ConstrainedSystem) -> tuple[np.ndarray, ...]:
    """One ``(δ_ℓ^j δ_ℓ^iᵀ) ⊗ A_s`` per edge ``(v_i, v_j, s)``, in ``c.dfa.edges`` order."""
    ell = c.dfa.num_states
    out = []
    for src, dst, lab in c.dfa.edges:
        e = np.zeros((ell, ell))
        e[dst - 1, src - 1] = 1.0
        out.append(kron(e, c.system.matrices[lab - 1]))
    return tuple(out)


def flatten_words(c: ConstrainedSystem, parents: Sequence[Word] | None) -> tuple[Word, ...] | None:
    """Express ``c``'s label words over the alphabet below ``parents``."""
    if c.label_words is None or parents is None:
        return c.label_words
    arity = parents[0].arity
    out = []
    for w in c.label_words:
        labels: tuple[int, ...] = ()
        for j in w:
            labels += parents[j - 1].labels
        out.append(Word(labels, arity))
    return tuple(out)
