"""Spectral radius, sub-multiplicative matrix norms and the block norm.

Single-matrix entry points (:func:`eigenvalues`, :func:`matrix_norm`) carry
their own algorithms: Hessenberg reduction + Francis double-shift QR for the
spectrum, power iteration on ``aᵀa`` for the spectral norm.  The ``batch_*``
helpers evaluate whole stacks of products through LAPACK and are what the
bound searches in :mod:`stplift.radius` call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .tensor import as_matrix

_BASE_TAGS = ("induced-1", "induced-inf", "frobenius", "induced-2")
_ALIASES = {
    "one": "induced-1",
    "1": "induced-1",
    "inf": "induced-inf",
    "fro": "frobenius",
    "two": "induced-2",
    "2": "induced-2",
}


class EigenConvergenceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class NormKind:
    """A matrix norm: one of the four base norms or a block norm over one."""

    tag: str
    base: Optional["NormKind"] = None
    ell: Optional[int] = None

    def __post_init__(self):
        if self.tag == "block":
            if self.base is None or self.ell is None or self.ell < 1:
                raise ValueError("block norm needs a base norm and a positive ell")
            if self.base.tag == "block":
                raise ValueError("nested block norms are not supported")
        elif self.tag not in _BASE_TAGS:
            raise ValueError(f"unknown norm {self.tag!r}")

    @classmethod
    def parse(cls, name: str) -> "NormKind":
        name = name.strip().lower()
        return cls(_ALIASES.get(name, name))

    @classmethod
    def block(cls, base: "NormKind | str", ell: int) -> "NormKind":
        if isinstance(base, str):
            base = cls.parse(base)
        return cls("block", base, int(ell))

    def __str__(self) -> str:
        if self.tag == "block":
            return f"block({self.base},{self.ell})"
        return self.tag


NormKind.ONE = NormKind("induced-1")
NormKind.INF = NormKind("induced-inf")
NormKind.FRO = NormKind("frobenius")
NormKind.TWO = NormKind("induced-2")


def _as_norm(kind) -> NormKind:
    return NormKind.parse(kind) if isinstance(kind, str) else kind


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    radius: float


# ---------------------------------------------------------------------------
# Eigenvalues: Hessenberg reduction + Francis double-shift QR
# ---------------------------------------------------------------------------


def _house(x: np.ndarray) -> tuple[np.ndarray, float]:
    v = np.array(x, dtype=float)
    alpha = math.sqrt(float(v @ v))
    if alpha == 0.0:
        return v, 0.0
    v[0] += math.copysign(alpha, v[0])
    return v, 2.0 / float(v @ v)


def hessenberg(a: np.ndarray) -> np.ndarray:
    """Upper Hessenberg matrix orthogonally similar to ``a``."""
    h = np.array(a, dtype=float)
    n = h.shape[0]
    for k in range(n - 2):
        v, beta = _house(h[k + 1 :, k])
        if beta == 0.0:
            continue
        h[k + 1 :, k:] -= beta * np.outer(v, v @ h[k + 1 :, k:])
        h[:, k + 1 :] -= beta * np.outer(h[:, k + 1 :] @ v, v)
        h[k + 2 :, k] = 0.0
    return h


def _eig2x2(a: float, b: float, c: float, d: float) -> list[complex]:
    p = 0.5 * (a + d)
    det = a * d - b * c
    disc = 0.25 * (a - d) ** 2 + b * c
    if disc >= 0.0:
        r = math.sqrt(disc)
        l1 = p + math.copysign(r, p) if p != 0.0 else r
        l2 = det / l1 if l1 != 0.0 else p - r
        return [complex(l1), complex(l2)]
    r = math.sqrt(-disc)
    return [complex(p, r), complex(p, -r)]


def _francis_step(h: np.ndarray, exceptional: bool) -> None:
    """One implicit double-shift sweep on the (view of the) active window."""
    p = h.shape[0]
    if exceptional:
        w = abs(h[p - 1, p - 2]) + abs(h[p - 2, p - 3])
        s, t = 1.5 * w, w * w
    else:
        s = h[p - 2, p - 2] + h[p - 1, p - 1]
        t = h[p - 2, p - 2] * h[p - 1, p - 1] - h[p - 2, p - 1] * h[p - 1, p - 2]
    x = h[0, 0] * h[0, 0] + h[0, 1] * h[1, 0] - s * h[0, 0] + t
    y = h[1, 0] * (h[0, 0] + h[1, 1] - s)
    z = h[1, 0] * h[2, 1]
    for k in range(p - 2):
        v, beta = _house(np.array([x, y, z]))
        if beta != 0.0:
            q = max(0, k - 1)
            h[k : k + 3, q:] -= beta * np.outer(v, v @ h[k : k + 3, q:])
            r = min(k + 4, p)
            h[:r, k : k + 3] -= beta * np.outer(h[:r, k : k + 3] @ v, v)
        if k > 0:
            h[k + 1, k - 1] = 0.0
            h[k + 2, k - 1] = 0.0
        x = h[k + 1, k]
        y = h[k + 2, k]
        if k < p - 3:
            z = h[k + 3, k]
    v, beta = _house(np.array([x, y]))
    if beta != 0.0:
        h[p - 2 :, p - 3 :] -= beta * np.outer(v, v @ h[p - 2 :, p - 3 :])
        h[:, p - 2 :] -= beta * np.outer(h[:, p - 2 :] @ v, v)
    h[p - 1, p - 3] = 0.0


def qr_eigenvalues(a, max_sweeps: int | None = None) -> np.ndarray:
    """Eigenvalues by Hessenberg reduction and Francis double-shift QR.

    Converged trailing 1x1 blocks give real eigenvalues; converged trailing
    2x2 blocks are solved in closed form, which is where complex-conjugate
    pairs come from.  Raises :class:`EigenConvergenceError` after
    ``max_sweeps`` (default ``100 * n``) QR sweeps.
    """
    a = as_matrix(a)
    n = a.shape[0]
    if a.shape[1] != n:
        raise ValueError(f"eigenvalues need a square matrix, got {a.shape}")
    budget = 100 * n if max_sweeps is None else max_sweeps
    h = hessenberg(a)
    eps = np.finfo(float).eps
    scale = float(np.abs(h).sum()) or 1.0
    out: list[complex] = []
    hi = n - 1
    sweeps = 0
    since_deflation = 0
    while hi >= 0:
        lo = hi
        while lo > 0:
            s = abs(h[lo - 1, lo - 1]) + abs(h[lo, lo])
            if s == 0.0:
                s = scale
            if abs(h[lo, lo - 1]) <= eps * s:
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            out.append(complex(h[hi, hi]))
            hi -= 1
            since_deflation = 0
            continue
        if lo == hi - 1:
            out.extend(_eig2x2(h[lo, lo], h[lo, hi], h[hi, lo], h[hi, hi]))
            hi -= 2
            since_deflation = 0
            continue
        if sweeps >= budget:
            raise EigenConvergenceError(f"QR iteration did not converge in {budget} sweeps")
        sweeps += 1
        since_deflation += 1
        _francis_step(h[lo : hi + 1, lo : hi + 1], exceptional=since_deflation % 10 == 0)
    return np.array(out[::-1], dtype=complex)


def eigenvalues(a, *, method: str = "qr") -> Spectrum:
    """Spectrum of a square matrix.

    ``method="qr"`` uses :func:`qr_eigenvalues`; ``method="lapack"`` defers
    to ``numpy.linalg.eigvals`` (the same Hessenberg/QR scheme in LAPACK).
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"eigenvalues need a square matrix, got {a.shape}")
    if method == "qr":
        ev = qr_eigenvalues(a)
    elif method == "lapack":
        ev = np.linalg.eigvals(a).astype(complex)
    else:
        raise ValueError(f"unknown eigenvalue method {method!r}")
    return Spectrum(ev, float(np.abs(ev).max()))


def spectral_radius(a, *, method: str = "qr") -> float:
    return eigenvalues(a, method=method).radius


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------

_POWER_RTOL = 1e-10
_POWER_MAXITER = 10_000


def _power_sigma_sq(g: np.ndarray, v: np.ndarray) -> float:
    nv = np.linalg.norm(v)
    if nv == 0.0:
        return 0.0
    v = v / nv
    lam = float(v @ g @ v)
    for _ in range(_POWER_MAXITER):
        w = g @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        new = float(v @ g @ v)
        if abs(new - lam) <= _POWER_RTOL * abs(new):
            return new
        lam = new
    return lam


def spectral_norm(a) -> float:
    """Largest singular value by power iteration on ``aᵀa``.

    Starts from the all-ones vector, then repeats from a fixed perturbed
    start; the all-ones vector alone can sit exactly on a lower singular
    direction.
    """
    a = as_matrix(a)
    g = a.T @ a
    n = g.shape[0]
    if not np.any(g):
        return 0.0
    first = _power_sigma_sq(g, np.ones(n))
    perturbed = np.ones(n) + np.sin(np.arange(1, n + 1) * 1.7)
    second = _power_sigma_sq(g, perturbed)
    return math.sqrt(max(first, second, 0.0))


def _block_split(a: np.ndarray, ell: int) -> np.ndarray:
    """View a stack ``(..., nℓ, nℓ)`` as blocks ``(..., ℓ_row, ℓ_col, n, n)``."""
    rows, cols = a.shape[-2:]
    if rows != cols or rows % ell:
        raise ValueError(f"block norm needs a square matrix with size divisible by {ell}, got {rows}x{cols}")
    n = rows // ell
    lead = a.shape[:-2]
    return a.reshape(*lead, ell, n, ell, n).swapaxes(-3, -2)


def matrix_norm(a, kind: NormKind | str = NormKind.TWO) -> float:
    kind = _as_norm(kind)
    a = as_matrix(a)
    if kind.tag == "induced-1":
        return float(np.abs(a).sum(axis=0).max())
    if kind.tag == "induced-inf":
        return float(np.abs(a).sum(axis=1).max())
    if kind.tag == "frobenius":
        return float(math.sqrt(float((a * a).sum())))
    if kind.tag == "induced-2":
        return spectral_norm(a)
    return block_norm(a, kind.ell, kind.base)


def block_norm(s, ell: int, base: NormKind | str = NormKind.TWO) -> float:
    """Max over block-columns of the summed base norms of the ``ℓ x ℓ`` blocks."""
    base = _as_norm(base)
    blocks = _block_split(as_matrix(s), ell)
    best = 0.0
    for j in range(ell):
        best = max(best, sum(matrix_norm(blocks[i, j], base) for i in range(ell)))
    return best


def batch_norms(stack: np.ndarray, kind: NormKind | str = NormKind.TWO) -> np.ndarray:
    """Norms of every matrix in a ``(B, r, c)`` stack."""
    kind = _as_norm(kind)
    stack = np.asarray(stack, dtype=float)
    if stack.shape[0] == 0:
        return np.zeros(0)
    if kind.tag == "induced-1":
        return np.abs(stack).sum(axis=-2).max(axis=-1)
    if kind.tag == "induced-inf":
        return np.abs(stack).sum(axis=-1).max(axis=-1)
    if kind.tag == "frobenius":
        return np.sqrt((stack * stack).sum(axis=(-2, -1)))
    if kind.tag == "induced-2":
        return np.linalg.norm(stack, ord=2, axis=(-2, -1))
    blocks = _block_split(stack, kind.ell)
    b, ell, _, n, _ = blocks.shape
    base = batch_norms(blocks.reshape(-1, n, n), kind.base).reshape(b, ell, ell)
    return base.sum(axis=1).max(axis=1)


def batch_spectral_radii(stack: np.ndarray) -> np.ndarray:
    stack = np.asarray(stack, dtype=float)
    if stack.shape[0] == 0:
        return np.zeros(0)
    return np.abs(np.linalg.eigvals(stack)).max(axis=-1)
