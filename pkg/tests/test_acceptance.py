"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines.
"""

import itertools
import subprocess
import sys
import time

import numpy as np
import pytest

from stplift.automaton import (
    Dfa,
    accepts,
    accepts_many,
    f_product,
    f_products,
    omega_to_dfa,
    structure_matrices,
)
from stplift.io import fixture_path
from stplift.radius import (
    cjsr_bounds,
    cjsr_bounds_via_lift,
    gripenberg,
    jsr_bounds,
    markovian_bounds,
)
from stplift.spectra import NormKind, spectral_radius
from stplift.systems import ArbitrarySystem, ConstrainedSystem, edge_lift, omega_lift, stp_lift
from stplift.tensor import DeltaVector, Word, delta, kron, power_reducing_matrix, stp, swap_matrix, word_to_index

from conftest import EX1, random_dfa, random_omega


def report(n, ok, detail):
    print(f"\ncriterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    return ok


def random_system(rng, n, m):
    return ArbitrarySystem(tuple(rng.standard_normal((n, n)) for _ in range(m)))


def test_criterion_01_example1_bounds(ex1):
    t0 = time.perf_counter()
    res = jsr_bounds(ex1, 7, NormKind.TWO, threads=1)
    elapsed = time.perf_counter() - t0
    ok = 1.1330 <= res.lower <= 1.1350 and 1.1570 <= res.upper <= 1.1770 and elapsed < 5.0
    assert report(1, ok, f"lower={res.lower:.6f} upper={res.upper:.6f} time={elapsed:.2f}s")


def test_criterion_02_single_matrix_radii():
    r2 = spectral_radius(np.array(EX1[1]))
    r4 = spectral_radius(np.array(EX1[3]))
    ok = abs(r2 - 1.1340) <= 5e-4 and abs(r4 - 1.0688) <= 5e-4
    assert report(2, ok, f"rho(A2)={r2:.6f} rho(A4)={r4:.6f}")


def test_criterion_03_example2(ex2):
    fs = structure_matrices(ex2).per_label
    expect = (delta(4, [3, 3, 3, 3]), delta(4, [0, 1, 1, 0]), delta(4, [2, 0, 2, 0]), delta(4, [0, 0, 4, 0]))
    w = Word.parse("231", 4)
    f231 = f_product(ex2, w)
    tau = word_to_index(w)
    ok = fs == expect and f231 == delta(4, [0, 3, 3, 0]) and tau == 10
    assert report(3, ok, f"F={', '.join(map(str, fs))}  F_231={f231}  index={tau}")


def test_criterion_04_example3_gripenberg(ex3):
    t0 = time.perf_counter()
    lifted = stp_lift(ex3)
    res = gripenberg(lifted.as_system(), 0.02, NormKind.block("two", lifted.ell), max_products=10**6)
    elapsed = time.perf_counter() - t0
    ok = (
        res.lower <= 0.9748172 <= res.upper
        and res.upper - res.lower <= 0.05
        and res.verdict == "stable"
        and elapsed < 120.0
    )
    assert report(
        4, ok,
        f"[{res.lower:.7f}, {res.upper:.7f}] width={res.upper - res.lower:.4f} verdict={res.verdict} "
        f"products={res.products_evaluated} time={elapsed:.2f}s",
    )


def test_criterion_05_lift_identity(ex3):
    rng = np.random.default_rng(5)
    cases = [ex3]
    for _ in range(50):
        n, ell, m = (int(rng.integers(1, hi + 1)) for hi in (3, 4, 3))
        cases.append(ConstrainedSystem(random_system(rng, n, m), random_dfa(rng, ell, m)))
    worst = 0.0
    for c in cases:
        for k in range(1, 7):
            a, b = cjsr_bounds(c, k), cjsr_bounds_via_lift(c, k)
            for x, y in ((a.lower, b.lower), (a.upper, b.upper)):
                worst = max(worst, abs(x - y) / max(1.0, abs(x)))
    assert report(5, worst <= 1e-9, f"{len(cases)} systems, k<=6, max rel. difference {worst:.2e}")


def alive_tables(ell, m):
    """All alive transition tables, one per orbit under renaming of states."""
    flat = np.array(list(itertools.product(range(ell + 1), repeat=ell * m)), dtype=np.int64)
    tables = flat.reshape(-1, ell, m)
    tables = tables[(tables != 0).any(axis=2).all(axis=1)]
    weights = (ell + 1) ** np.arange(ell * m)[::-1]
    codes = []
    for perm in itertools.permutations(range(1, ell + 1)):
        relabel = np.array((0,) + perm)
        inverse = np.argsort(perm)
        codes.append(relabel[tables][:, inverse, :].reshape(len(tables), -1) @ weights)
    codes = np.array(codes)
    return tables[codes[0] == codes.min(axis=0)]


def test_criterion_06_acceptance_equivalence():
    words = {(m, k): np.array(list(itertools.product(range(1, m + 1), repeat=k)), dtype=np.int64)
             for m in (1, 2, 3) for k in range(1, 6)}
    dfas = pairs = mismatches = 0
    for ell, m in itertools.product((1, 2, 3), repeat=2):
        for table in alive_tables(ell, m):
            d = Dfa(ell, m, table)
            dfas += 1
            for k in range(1, 6):
                w = words[m, k]
                walk = accepts_many(d, w)
                nonzero = f_products(d, w).any(axis=1)
                mismatches += int((walk != nonzero).sum())
                pairs += len(w)
    # the scalar entry points on a sample of the same space
    rng = np.random.default_rng(6)
    for _ in range(300):
        d = random_dfa(rng, int(rng.integers(1, 4)), int(rng.integers(1, 4)))
        w = tuple(int(x) for x in rng.integers(1, d.num_labels + 1, size=int(rng.integers(1, 6))))
        mismatches += accepts(d, w) != (not f_product(d, w).is_zero())
    ok = mismatches == 0
    assert report(6, ok, f"{dfas} DFAs up to state renaming, {pairs} (DFA, word) pairs, {mismatches} mismatches")


def test_criterion_07_markovian_triple_path(ex3):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(20):
        m = int(rng.integers(1, 4))
        n = int(rng.integers(1, 4))
        s = random_system(rng, n, m)
        om = random_omega(rng, m)
        dfa_sys = ConstrainedSystem(s, omega_to_dfa(om))
        lifted = omega_lift(s, om)
        for k in range(1, 6):
            a = markovian_bounds(s, om, k)
            b = cjsr_bounds(dfa_sys, k)
            c = jsr_bounds(lifted, k, NormKind.block("two", m))
            for r in (b, c):
                worst = max(worst, abs(r.lower - a.lower), abs(r.upper - a.upper))
    edges = ex3.dfa.edges
    mats = edge_lift(ex3)
    exact = all(
        np.array_equal(sum((mats[i] for i, e in enumerate(edges) if e[2] == s), np.zeros((8, 8))), phi)
        for s, phi in enumerate(stp_lift(ex3).phis, 1)
    )
    ok = worst <= 1e-9 and exact
    assert report(7, ok, f"20 (set, omega) instances, k<=5, max difference {worst:.2e}; edge-lift sum exact={exact}")


def test_criterion_08_stp_calculus():
    rng = np.random.default_rng(8)
    dim = lambda: int(rng.integers(1, 5))
    failures = {}

    def trial(name, ok):
        failures[name] = failures.get(name, 0) + (not ok)

    for _ in range(200):
        n = dim()
        x, a = rng.standard_normal((n, 1)), rng.standard_normal((dim(), dim()))
        trial("vector swap", np.allclose(stp(x, a), stp(kron(np.eye(n), a), x), rtol=0, atol=1e-12))

        i = int(rng.integers(1, n + 1))
        e = DeltaVector(n, i).dense()
        trial("power reducing", np.array_equal(stp(e, e), power_reducing_matrix(n).dense() @ e))

        p, q = dim(), dim()
        u, v = rng.standard_normal((p, 1)), rng.standard_normal((q, 1))
        trial("swap matrix", np.allclose(stp(stp(swap_matrix(p, q).dense(), u), v), stp(v, u), rtol=0, atol=1e-12))

        b, c, d = (rng.standard_normal((dim(), dim())) for _ in range(3))
        trial("associativity", np.allclose(stp(stp(b, c), d), stp(b, stp(c, d)), rtol=0, atol=1e-12))

        r, s = dim(), dim()
        a1, a2 = rng.standard_normal((r, s)), rng.standard_normal((s, dim()))
        b1, b2 = rng.standard_normal((p, q)), rng.standard_normal((q, dim()))
        trial("mixed product", np.allclose(kron(a1, b1) @ kron(a2, b2), kron(a1 @ a2, b1 @ b2), rtol=0, atol=1e-12))

        sa, sb = rng.standard_normal((r, r)), rng.standard_normal((p, p))
        got = np.sort(np.abs(np.linalg.eigvals(kron(sa, sb))))
        want = np.sort(np.abs(np.outer(np.linalg.eigvals(sa), np.linalg.eigvals(sb)).ravel()))
        trial("kron eigenvalues", np.allclose(got, want, rtol=0, atol=1e-9))

    ok = not any(failures.values())
    detail = ", ".join(f"{k} {200 - v}/200" for k, v in failures.items())
    assert report(8, ok, detail)


def test_criterion_09_monotone_bracket():
    rng = np.random.default_rng(9)
    bad = 0
    for _ in range(20):
        s = random_system(rng, int(rng.integers(1, 4)), int(rng.integers(1, 4)))
        prev = None
        for k in range(1, 7):
            res = jsr_bounds(s, k)
            bad += res.lower > res.upper
            if prev is not None:
                bad += res.lower < prev.lower or res.upper > prev.upper
            prev = res
    assert report(9, bad == 0, f"20 random systems, k=1..6, {bad} violations")


def test_criterion_10_cli_determinism():
    differing = []
    runs = 0
    for fixture in ("example1.json", "example2.json", "example3.json"):
        path = str(fixture_path(fixture))
        for command in (["bounds", path, "--k", "6"], ["gripenberg", path, "--delta", "0.02"]):
            outs = []
            for threads in ("1", "8"):
                proc = subprocess.run(
                    [sys.executable, "-m", "stplift", *command, "--threads", threads], capture_output=True,
                )
                outs.append((proc.returncode, proc.stdout, proc.stderr))
            runs += 1
            if outs[0] != outs[1]:
                differing.append(f"{command[0]} {fixture}")
    ok = not differing
    assert report(10, ok, f"{runs} command/fixture pairs, differing: {differing or 'none'}")
