import itertools

import numpy as np
import pytest

from stplift.automaton import Dfa
from stplift.systems import ArbitrarySystem, ConstrainedSystem

EX1 = [
    [[0.94, 0.56], [-0.35, 0.73]],
    [[0.94, 0.56], [0.14, 0.73]],
    [[0.94, 0.56], [-0.35, 0.46]],
    [[0.94, 0.56], [0.14, 0.46]],
]
EX2_EDGES = [
    [1, 3, 1], [2, 3, 1], [3, 3, 1], [4, 3, 1],
    [2, 1, 2], [3, 1, 2],
    [1, 2, 3], [3, 2, 3],
    [3, 4, 4],
]


@pytest.fixture
def ex1():
    return ArbitrarySystem(EX1)


@pytest.fixture
def ex2():
    return Dfa.from_edges(4, 4, EX2_EDGES)


@pytest.fixture
def ex3(ex1, ex2):
    return ConstrainedSystem(ex1, ex2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_dfa(rng, ell, m, density=0.6):
    """Random alive partial DFA."""
    table = [[int(rng.integers(1, ell + 1)) if rng.random() < density else 0 for _ in range(m)]
             for _ in range(ell)]
    for row in table:
        if not any(row):
            row[int(rng.integers(m))] = int(rng.integers(1, ell + 1))
    return Dfa(ell, m, tuple(map(tuple, table)))


def random_omega(rng, m, density=0.6):
    """Random 0/1 matrix with no zero row or column."""
    while True:
        om = (rng.random((m, m)) < density).astype(int)
        if om.any(axis=0).all() and om.any(axis=1).all():
            return om


def brute_accepts(dfa, word):
    """Try every start state and follow the (deterministic) transitions."""
    for q0 in range(1, dfa.num_states + 1):
        q = q0
        for j in word:
            q = dfa.table[q - 1][j - 1]
            if q == 0:
                break
        else:
            return True
    return False


def brute_product(mats, word):
    out = np.eye(mats[0].shape[0])
    for j in word:
        out = mats[j - 1] @ out
    return out


def brute_bounds(mats, k, norm, admissible=lambda w: True, repeatable=lambda w: True):
    """Independent fixed-horizon bracket by plain enumeration of [m]^j."""
    m = len(mats)
    lower, upper = 0.0, np.inf
    for j in range(1, k + 1):
        best_n = 0.0
        for w in itertools.product(range(1, m + 1), repeat=j):
            if not admissible(w):
                continue
            p = brute_product(mats, w)
            best_n = max(best_n, norm(p))
            if repeatable(w):
                lower = max(lower, max(abs(np.linalg.eigvals(p))) ** (1 / j))
        upper = min(upper, best_n ** (1 / j))
    return lower, upper


def norm2(p):
    return np.linalg.svd(p, compute_uv=False)[0]
