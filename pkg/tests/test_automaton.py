import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stplift.automaton import (
    Dfa,
    DfaError,
    accepts,
    accepts_many,
    dfa_from_structure,
    enumerate_accepted,
    f_product,
    f_products,
    has_cycle,
    omega_to_dfa,
    structure_matrices,
)
from stplift.io import LoadError, fixture_path, load_dfa, parse_document
from stplift.spectra import spectral_radius
from stplift.systems import ArbitrarySystem, h_tilde
from stplift.tensor import Word, delta, word_to_index

from conftest import EX2_EDGES, brute_accepts, random_dfa, random_omega


def all_words(m, k):
    return np.array(list(itertools.product(range(1, m + 1), repeat=k)), dtype=np.int64)


# -- Example 2 --------------------------------------------------------------


def test_example2_structure_matrices(ex2):
    fs = structure_matrices(ex2).per_label
    assert fs == (delta(4, [3, 3, 3, 3]), delta(4, [0, 1, 1, 0]), delta(4, [2, 0, 2, 0]), delta(4, [0, 0, 4, 0]))
    assert structure_matrices(ex2).stacked.shape == (4, 16)


def test_example2_word_231(ex2):
    w = Word.parse("231", 4)
    assert f_product(ex2, w) == delta(4, [0, 3, 3, 0])
    assert word_to_index(w) == 10
    assert accepts(ex2, w)


def test_example2_via_h_tilde(ex2):
    """The 10th block of F̃_3 is F_231."""
    fs = ArbitrarySystem(tuple(f.dense() for f in structure_matrices(ex2).per_label))
    ft = h_tilde(fs, 3)
    np.testing.assert_array_equal(ft[:, 9 * 4 : 10 * 4], delta(4, [0, 3, 3, 0]).dense())


def test_example2_rejections(ex2):
    assert not accepts(ex2, (2, 2))
    assert not accepts(ex2, (4, 4))
    assert accepts(ex2, (1, 1, 1))
    with pytest.raises(ValueError):
        accepts(ex2, (5,))


def test_example2_roundtrip(ex2):
    assert dfa_from_structure(structure_matrices(ex2).per_label) == ex2
    assert Dfa.from_dict(ex2.to_dict()) == ex2
    assert sorted(ex2.edges) == sorted((a, b, c) for a, b, c in EX2_EDGES)


# -- acceptance equivalence ---------------------------------------------------


def test_accepts_matches_f_product_exhaustive_small():
    """Every alive DFA with ℓ, m ≤ 2, every word of length ≤ 5."""
    for ell, m in itertools.product((1, 2), repeat=2):
        for flat in itertools.product(range(ell + 1), repeat=ell * m):
            rows = [flat[q * m : (q + 1) * m] for q in range(ell)]
            if not all(any(r) for r in rows):
                continue
            d = Dfa(ell, m, rows)
            for k in range(1, 6):
                for w in itertools.product(range(1, m + 1), repeat=k):
                    ok = accepts(d, w)
                    assert ok == (not f_product(d, w).is_zero()) == brute_accepts(d, w)


def test_batched_matches_scalar(rng):
    for _ in range(40):
        d = random_dfa(rng, int(rng.integers(1, 5)), int(rng.integers(1, 4)))
        for k in (1, 3, 4):
            words = all_words(d.num_labels, k)
            acc = accepts_many(d, words)
            tg = f_products(d, words)
            for w, a, t in zip(words, acc, tg):
                assert a == accepts(d, w) == brute_accepts(d, w)
                assert tuple(t) == f_product(d, w).targets


def test_f_product_composition(rng):
    for _ in range(100):
        d = random_dfa(rng, 4, 3)
        u = tuple(int(x) for x in rng.integers(1, 4, size=3))
        v = tuple(int(x) for x in rng.integers(1, 4, size=2))
        assert f_product(d, u + v) == f_product(d, v) @ f_product(d, u)
        dense = np.eye(4)
        for j in u:
            dense = structure_matrices(d).per_label[j - 1].dense() @ dense
        np.testing.assert_array_equal(f_product(d, u).dense(), dense)


def test_f_product_radius_is_zero_or_one(rng):
    for _ in range(200):
        d = random_dfa(rng, int(rng.integers(1, 6)), 3)
        w = tuple(int(x) for x in rng.integers(1, 4, size=int(rng.integers(1, 6))))
        f = f_product(d, w)
        r = spectral_radius(f.dense())
        assert r == pytest.approx(1.0 if has_cycle(f) else 0.0, abs=1e-9)


def test_alive_dfa_accepts_every_length(rng):
    for _ in range(20):
        d = random_dfa(rng, int(rng.integers(1, 5)), int(rng.integers(1, 4)), density=0.3)
        for k in range(1, 21):
            assert any(True for _ in enumerate_accepted(d, k, limit=1))


# -- enumeration --------------------------------------------------------------


def test_enumeration_matches_brute_force(rng):
    for _ in range(30):
        d = random_dfa(rng, int(rng.integers(1, 5)), int(rng.integers(1, 4)))
        for k in range(1, 6):
            got = [w.labels for w in enumerate_accepted(d, k)]
            expect = [w for w in itertools.product(range(1, d.num_labels + 1), repeat=k) if brute_accepts(d, w)]
            assert got == expect


def test_enumeration_limit(ex2):
    stream = enumerate_accepted(ex2, 6, limit=10)
    words = list(stream)
    assert len(words) == 10 and stream.truncated
    full = enumerate_accepted(ex2, 3)
    assert len(list(full)) == full.count and not full.truncated
    assert full.count == sum(1 for w in itertools.product(range(1, 5), repeat=3) if brute_accepts(ex2, w))


def test_complete_dfa():
    d = Dfa.complete(3)
    assert len(list(enumerate_accepted(d, 4))) == 81


# -- Ω matrices ----------------------------------------------------------------


def test_omega_to_dfa_admissibility(rng):
    for _ in range(20):
        om = random_omega(rng, 3)
        d = omega_to_dfa(om)
        for k in range(1, 5):
            for w in itertools.product(range(1, 4), repeat=k):
                admissible = all(om[w[i + 1] - 1, w[i] - 1] for i in range(k - 1))
                assert accepts(d, w) == admissible


def test_omega_errors():
    with pytest.raises(DfaError):
        omega_to_dfa(np.array([[1, 0], [1, 0]]))
    with pytest.raises(ValueError):
        omega_to_dfa(np.array([[1, 2], [1, 0]]))
    with pytest.raises(ValueError):
        omega_to_dfa(np.ones((2, 3)))


# -- construction errors ---------------------------------------------------------


@pytest.mark.parametrize(
    "edges, message",
    [
        ([[1, 2, 1], [2, 1, 1], [1, 1, 1]], "duplicate"),
        ([[3, 1, 1], [1, 2, 1]], "'from'"),
        ([[1, 3, 1], [2, 1, 1]], "'to'"),
        ([[1, 2, 4], [2, 1, 1]], "label"),
        ([[1, 2, 1]], "not alive"),
        ([[1, 2]], "triple"),
    ],
)
def test_from_edges_errors(edges, message):
    with pytest.raises(DfaError, match=message):
        Dfa.from_edges(2, 2, edges)


def test_load_dfa_errors(tmp_path):
    assert load_dfa(fixture_path("example2.json")) == Dfa.from_edges(4, 4, EX2_EDGES)
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"states": 2, "labels": 2, "edges": [[1, 2, 1], [1, 1, 1]]}))
    with pytest.raises(LoadError, match="duplicate"):
        load_dfa(bad)
    bad.write_text("{not json")
    with pytest.raises(LoadError, match="invalid JSON"):
        load_dfa(bad)
    with pytest.raises(LoadError, match="'states'"):
        parse_document({"labels": 2, "edges": []})


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 4), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_to_dict_roundtrip(ell, m, seed):
    d = random_dfa(np.random.default_rng(seed), ell, m)
    assert Dfa.from_dict(json.loads(json.dumps(d.to_dict()))) == d
