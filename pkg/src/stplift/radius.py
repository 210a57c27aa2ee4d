"""Certified lower/upper bounds on the (constrained) joint spectral radius.

All fixed-horizon searches share one engine: a depth-first walk over the
word tree in which each child product is one matrix multiplication away from
its parent.  Nodes are processed in batches so norms and spectra go through
LAPACK a few thousand matrices at a time.  The tree is split by first label;
each subtree is searched independently and results are merged in label
order, so the output does not depend on the number of worker threads.

Lower bounds only use words whose infinite repetition is itself admissible
(for a DFA: ``F_σ`` has a cycle, equivalently ``ρ(F_σ) = 1``).  An accepted
word that cannot be repeated says nothing about the asymptotic growth rate.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .automaton import Dfa, omega_to_dfa
from .spectra import NormKind, _as_norm, batch_norms, batch_spectral_radii
from .systems import ArbitrarySystem, ConstrainedSystem, _omega_array, stp_lift
from .tensor import Word

DEFAULT_PRODUCT_CAP = 10**7
_TIE_RTOL = 1e-12
_BATCH = 4096


@dataclass
class BoundsResult:
    lower: float
    upper: float
    lower_witness: Optional[Word]
    horizon_or_delta: float
    products_evaluated: int
    wall_time: float
    upper_horizon: int = 0
    truncated: bool = False
    method: str = ""

    @property
    def certified(self) -> bool:
        return not self.truncated

    @property
    def verdict(self) -> str:
        if self.upper < 1.0:
            return "stable"
        if self.lower >= 1.0:
            return "unstable"
        return "undetermined"

    def to_dict(self, *, timing: bool = False) -> dict:
        out = {
            "method": self.method,
            "lower": self.lower,
            "upper": self.upper,
            "lower_witness": None if self.lower_witness is None else list(self.lower_witness.labels),
            "upper_horizon": self.upper_horizon,
            "horizon_or_delta": self.horizon_or_delta,
            "products_evaluated": self.products_evaluated,
            "truncated": self.truncated,
            "verdict": self.verdict,
        }
        if timing:
            out["wall_time"] = self.wall_time
        return out


# ---------------------------------------------------------------------------
# Switching constraints, vectorised over a batch of words
# ---------------------------------------------------------------------------


class _Free:
    """No constraint; every word is admissible and repeatable."""

    width = 0

    def initial(self) -> np.ndarray:
        return np.zeros((1, 0), dtype=np.int64)

    def advance(self, states: np.ndarray, m: int):
        b = states.shape[0]
        return np.zeros((b * m, 0), dtype=np.int64), np.ones(b * m, dtype=bool)

    def cyclic(self, states: np.ndarray) -> np.ndarray:
        return np.ones(states.shape[0], dtype=bool)

    def level_counts(self, m: int, k: int) -> list[int]:
        return [m**j for j in range(1, k + 1)]


class _DfaWalk:
    """Tracks ``F_σ`` as its column targets: ``state[b, t-1] = F_σ(t)``."""

    def __init__(self, dfa: Dfa, *, cyclic_lower: bool = True):
        self.dfa = dfa
        self.table = dfa.target_array()
        self.cyclic_lower = cyclic_lower
        self.width = dfa.num_states

    def initial(self) -> np.ndarray:
        return np.arange(1, self.width + 1, dtype=np.int64)[None, :]

    def advance(self, states: np.ndarray, m: int):
        # (b, m, ℓ) in (parent, label) order
        new = self.table[np.arange(m)[None, :, None], states[:, None, :]]
        new = new.reshape(-1, self.width)
        return new, new.any(axis=1)

    def cyclic(self, states: np.ndarray) -> np.ndarray:
        if not self.cyclic_lower:
            return np.ones(states.shape[0], dtype=bool)
        padded = np.concatenate([np.zeros((states.shape[0], 1), dtype=np.int64), states], axis=1)
        cur = states
        for _ in range(self.width):
            cur = np.take_along_axis(padded, cur, axis=1)
        return cur.any(axis=1)

    def level_counts(self, m: int, k: int) -> list[int]:
        full = (1 << self.width) - 1
        counts: dict[int, int] = {full: 1}
        out = []
        for _ in range(k):
            nxt: dict[int, int] = {}
            for states, c in counts.items():
                for j in range(m):
                    alive = 0
                    for q in range(self.width):
                        if states >> q & 1:
                            t = self.table[j, q + 1]
                            if t:
                                alive |= 1 << (t - 1)
                    if alive:
                        nxt[alive] = nxt.get(alive, 0) + c
            counts = nxt
            out.append(sum(counts.values()))
        return out


class _MarkovWalk:
    """Ω-admissibility; state is ``(first label, last label)``, 0 before the first."""

    def __init__(self, omega: np.ndarray):
        self.omega = omega.astype(bool)
        self.width = 2

    def initial(self) -> np.ndarray:
        return np.zeros((1, 2), dtype=np.int64)

    def advance(self, states: np.ndarray, m: int):
        b = states.shape[0]
        first = np.repeat(states[:, 0], m)
        last = np.repeat(states[:, 1], m)
        lab = np.tile(np.arange(1, m + 1), b)
        ok = (last == 0) | self.omega[lab - 1, np.maximum(last, 1) - 1]
        first = np.where(first == 0, lab, first)
        return np.stack([first, lab], axis=1), ok

    def cyclic(self, states: np.ndarray) -> np.ndarray:
        return self.omega[states[:, 0] - 1, states[:, 1] - 1]

    def level_counts(self, m: int, k: int) -> list[int]:
        om = self.omega.astype(object)
        v = [1] * m
        out = [m]
        for _ in range(k - 1):
            v = [sum(int(om[i, l]) * v[l] for l in range(m)) for i in range(m)]
            out.append(sum(v))
        return out


# ---------------------------------------------------------------------------
# Fixed-horizon search
# ---------------------------------------------------------------------------


@dataclass
class _Stats:
    k: int
    level_norm: list = field(default_factory=list)
    best: float = 0.0
    best_word: Optional[tuple] = None
    count: int = 0

    def __post_init__(self):
        if not self.level_norm:
            self.level_norm = [0.0] * (self.k + 1)

    def offer(self, value: float, word: tuple) -> None:
        if self.best_word is None or value > self.best * (1 + _TIE_RTOL):
            self.best, self.best_word = value, word
        elif value >= self.best * (1 - _TIE_RTOL) and (len(word), word) < (len(self.best_word), self.best_word):
            self.best, self.best_word = value, word

    def merge(self, other: "_Stats") -> None:
        self.level_norm = [max(a, b) for a, b in zip(self.level_norm, other.level_norm)]
        if other.best_word is not None:
            self.offer(other.best, other.best_word)
        self.count += other.count


class _Search:
    def __init__(self, mats: np.ndarray, k: int, kind: NormKind, walk):
        self.mats = mats
        self.m, self.d = mats.shape[0], mats.shape[1]
        self.k = k
        self.kind = kind
        self.walk = walk
        self.parents_per_batch = max(1, _BATCH // self.m)

    def children(self, P, W, S):
        m, d = self.m, self.d
        Q = np.matmul(self.mats[None, :], P[:, None]).reshape(-1, d, d)
        W2 = np.concatenate([np.repeat(W, m, axis=0), np.tile(np.arange(1, m + 1), len(W))[:, None]], axis=1)
        S2, alive = self.walk.advance(S, m)
        return Q, W2, S2, alive

    def evaluate(self, Q, W, S, j: int, stats: _Stats) -> None:
        norms = batch_norms(Q, self.kind)
        stats.level_norm[j] = max(stats.level_norm[j], float(norms.max()))
        # ρ ≤ ‖·‖, so only products whose norm can reach the incumbent need a spectrum
        root = norms ** (1.0 / j)
        cand = self.walk.cyclic(S)
        if stats.best_word is not None:
            cand &= root >= stats.best * (1 - _TIE_RTOL)
        idx = np.flatnonzero(cand)
        if len(idx) == 0:
            return
        rho = batch_spectral_radii(Q[idx]) ** (1.0 / j)
        top = rho.max()
        for i in np.flatnonzero(rho >= top * (1 - _TIE_RTOL)):
            stats.offer(float(rho[i]), tuple(int(x) for x in W[idx[i]]))

    def expand(self, P, W, S, depth: int, stats: _Stats) -> None:
        if depth >= self.k:
            return
        step = self.parents_per_batch
        for lo in range(0, len(P), step):
            Q, W2, S2, alive = self.children(P[lo : lo + step], W[lo : lo + step], S[lo : lo + step])
            keep = alive & Q.reshape(len(Q), -1).any(axis=1)
            stats.count += int(alive.sum())
            if not keep.any():
                continue
            Q, W2, S2 = Q[keep], W2[keep], S2[keep]
            self.evaluate(Q, W2, S2, depth + 1, stats)
            self.expand(Q, W2, S2, depth + 1, stats)

    def run(self, threads: int) -> _Stats:
        root = _Stats(self.k)
        P = np.eye(self.d)[None]
        W = np.zeros((1, 0), dtype=np.int64)
        Q, W1, S1, alive = self.children(P, W, self.walk.initial())
        keep = alive & Q.reshape(len(Q), -1).any(axis=1)
        root.count += int(alive.sum())
        Q, W1, S1 = Q[keep], W1[keep], S1[keep]
        if len(Q) == 0:
            return root
        self.evaluate(Q, W1, S1, 1, root)

        def subtree(i: int) -> _Stats:
            st = _Stats(self.k, best=root.best, best_word=root.best_word)
            self.expand(Q[i : i + 1], W1[i : i + 1], S1[i : i + 1], 1, st)
            return st

        if threads > 1 and len(Q) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                parts = list(pool.map(subtree, range(len(Q))))
        else:
            parts = [subtree(i) for i in range(len(Q))]
        for st in parts:
            root.merge(st)
        return root


def _horizon(walk, m: int, k: int, cap: int) -> int:
    total = 0
    reach = 0
    for j, c in enumerate(walk.level_counts(m, k), 1):
        total += c
        if total > cap:
            break
        reach = j
    return reach


def _fixed_horizon(mats: np.ndarray, k: int, kind: NormKind, walk, *, cap: int, threads: int, method: str, arity: int):
    if k < 1:
        raise ValueError("horizon k must be positive")
    t0 = time.perf_counter()
    reach = _horizon(walk, mats.shape[0], k, cap)
    if reach == 0:
        raise ValueError(f"product cap {cap} is too small for even one level of the word tree")
    stats = _Search(mats, reach, kind, walk).run(threads)
    upper, upper_j = math.inf, 0
    for j in range(1, reach + 1):
        v = stats.level_norm[j] ** (1.0 / j)
        if v < upper:
            upper, upper_j = v, j
    witness = None if stats.best_word is None else Word(stats.best_word, arity)
    lower = stats.best if witness is not None else 0.0
    return BoundsResult(
        lower=lower,
        # a witnessed ρ(A_σ)^{1/|σ|} never exceeds the true upper bound; only rounding can invert them
        upper=max(upper, lower),
        lower_witness=witness,
        horizon_or_delta=reach,
        products_evaluated=stats.count,
        wall_time=time.perf_counter() - t0,
        upper_horizon=upper_j,
        truncated=reach < k,
        method=method,
    )


def jsr_bounds(
    s: ArbitrarySystem,
    k: int,
    norm: NormKind | str = NormKind.TWO,
    *,
    cap: int = DEFAULT_PRODUCT_CAP,
    threads: int = 1,
) -> BoundsResult:
    """Bracket ``ρ(A)`` using all products of length at most ``k``.

    ``lower = max_j max_σ ρ(A_σ)^{1/j}`` and ``upper = min_j max_σ ‖A_σ‖^{1/j}``.
    If the tree up to ``k`` holds more than ``cap`` products the search stops
    at the deepest complete level and the result is flagged ``truncated``.
    """
    return _fixed_horizon(
        s.stack(), k, _as_norm(norm), _Free(), cap=cap, threads=threads, method="jsr", arity=s.arity
    )


def cjsr_bounds(
    c: ConstrainedSystem,
    k: int,
    norm: NormKind | str = NormKind.TWO,
    *,
    cap: int = DEFAULT_PRODUCT_CAP,
    threads: int = 1,
) -> BoundsResult:
    """Bracket the constrained JSR over DFA-accepted words of length at most ``k``."""
    res = _fixed_horizon(
        c.system.stack(), k, _as_norm(norm), _DfaWalk(c.dfa), cap=cap, threads=threads, method="cjsr",
        arity=c.system.arity,
    )
    assert res.upper > 0 or res.lower == 0, "alive DFA must accept words of every length"
    return res


def cjsr_bounds_via_lift(
    c: ConstrainedSystem,
    k: int,
    base: NormKind | str = NormKind.TWO,
    *,
    cap: int = DEFAULT_PRODUCT_CAP,
    threads: int = 1,
) -> BoundsResult:
    """The same bracket, computed on the lifted set ``{F_i ⊗ A_i}`` with the block norm.

    Rejected words are skipped by the logical ``F_σ`` test before any dense
    product is formed; the spectral lower bound needs no filter since
    ``ρ(F_σ ⊗ A_σ) = ρ(F_σ) ρ(A_σ)`` already vanishes on them.
    """
    lifted = stp_lift(c)
    kind = NormKind.block(_as_norm(base), lifted.ell)
    return _fixed_horizon(
        np.stack(lifted.phis), k, kind, _DfaWalk(c.dfa, cyclic_lower=False), cap=cap, threads=threads,
        method="cjsr-lift", arity=c.system.arity,
    )


def markovian_bounds(
    s: ArbitrarySystem,
    omega,
    k: int,
    norm: NormKind | str = NormKind.TWO,
    *,
    cap: int = DEFAULT_PRODUCT_CAP,
    threads: int = 1,
) -> BoundsResult:
    """Bracket the Markovian JSR: consecutive labels must satisfy ``ω[σ_{i+1}, σ_i] = 1``."""
    om = _omega_array(omega, s.arity)
    if not om.any(axis=0).all():
        raise ValueError("omega has an all-zero column")
    return _fixed_horizon(
        s.stack(), k, _as_norm(norm), _MarkovWalk(om), cap=cap, threads=threads, method="markovian",
        arity=s.arity,
    )


def markovian_bounds_via_dfa(s: ArbitrarySystem, omega, k: int, norm: NormKind | str = NormKind.TWO, **kw) -> BoundsResult:
    return cjsr_bounds(ConstrainedSystem(s, omega_to_dfa(omega, s.arity)), k, norm, **kw)


# ---------------------------------------------------------------------------
# Branch and bound
# ---------------------------------------------------------------------------


def _grip_chunk(mats, kind, P, W, PB, j, alpha, alpha_word):
    m, d = mats.shape[0], mats.shape[1]
    Q = np.matmul(mats[None, :], P[:, None]).reshape(-1, d, d)
    W2 = np.concatenate([np.repeat(W, m, axis=0), np.tile(np.arange(1, m + 1), len(W))[:, None]], axis=1)
    formed = len(Q)
    norms = batch_norms(Q, kind)
    nz = norms > 0
    Q, W2, norms = Q[nz], W2[nz], norms[nz]
    root = norms ** (1.0 / j)
    PB2 = np.minimum(np.repeat(PB, m)[nz], root)
    st = _Stats(j, best=alpha, best_word=alpha_word)
    idx = np.flatnonzero(root >= alpha * (1 - _TIE_RTOL))
    if len(idx):
        rho = batch_spectral_radii(Q[idx]) ** (1.0 / j)
        top = rho.max()
        for i in np.flatnonzero(rho >= top * (1 - _TIE_RTOL)):
            st.offer(float(rho[i]), tuple(int(x) for x in W2[idx[i]]))
    return Q, W2, PB2, st, formed


def gripenberg(
    s: ArbitrarySystem,
    delta: float,
    norm: NormKind | str = NormKind.TWO,
    max_products: int = 10**6,
    *,
    threads: int = 1,
    max_depth: int | None = None,
) -> BoundsResult:
    """Gripenberg's branch and bound.

    A product ``P`` of length ``j`` carries ``b(P) = min over its prefixes
    of ‖prefix‖^{1/len}``.  Products with ``b(P) ≤ α + δ`` are dropped, where
    ``α`` is the best ``ρ(A_σ)^{1/|σ|}`` seen so far; the survivors of each
    level certify ``ρ ≤ max(α + δ, max b(P))``.  When nothing survives the
    bracket is ``[α, α + δ]``.  Running out of ``max_products`` (or
    ``max_depth`` levels) returns the certified but wider bracket with
    ``truncated`` set.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    t0 = time.perf_counter()
    kind = _as_norm(norm)
    mats = s.stack()
    m = s.arity
    P = mats.copy()
    W = np.arange(1, m + 1, dtype=np.int64)[:, None]
    norms = batch_norms(P, kind)
    count = m
    best = _Stats(1)
    rho = batch_spectral_radii(P)
    for i in range(m):
        best.offer(float(rho[i]), (i + 1,))
    nz = norms > 0
    P, W, PB = P[nz], W[nz], norms[nz]
    upper, upper_j = math.inf, 1
    depth = 1
    truncated = False
    chunk = max(1, _BATCH // m)
    while True:
        alpha = best.best
        keep = PB > alpha + delta
        P, W, PB = P[keep], W[keep], PB[keep]
        level_upper = max(alpha + delta, float(PB.max()) if len(PB) else 0.0)
        if level_upper < upper:
            upper, upper_j = level_upper, depth
        if len(P) == 0:
            break
        if count + len(P) * m > max_products or (max_depth is not None and depth >= max_depth):
            truncated = True
            break
        depth += 1
        slices = [slice(lo, lo + chunk) for lo in range(0, len(P), chunk)]

        def work(sl, j=depth, a=alpha, aw=best.best_word):
            return _grip_chunk(mats, kind, P[sl], W[sl], PB[sl], j, a, aw)

        if threads > 1 and len(slices) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                parts = list(pool.map(work, slices))
        else:
            parts = [work(sl) for sl in slices]
        P = np.concatenate([p[0] for p in parts])
        W = np.concatenate([p[1] for p in parts])
        PB = np.concatenate([p[2] for p in parts])
        for p in parts:
            best.offer(p[3].best, p[3].best_word)
            count += p[4]
    return BoundsResult(
        lower=best.best,
        upper=max(upper, best.best),
        lower_witness=Word(best.best_word, m),
        horizon_or_delta=delta,
        products_evaluated=count,
        wall_time=time.perf_counter() - t0,
        upper_horizon=upper_j,
        truncated=truncated,
        method="gripenberg",
    )
