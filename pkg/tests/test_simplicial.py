"""Simplex category, Dold–Kan in both variances, levelwise Sym and the
shuffle product, and the homotopy of free simplicial commutative rings."""

from __future__ import annotations

import random
from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from infol.complexes import CochainComplex, cohomology
from infol.cs_rings import _random_complex
from infol.exactlin import GF, QQ, ZZ, CohomologyGroup
from infol.simplicial import (
    BOUNDARY_DELTA1,
    DELTA0,
    DELTA1,
    TruncationError,
    codegeneracy,
    codenormalize,
    coface,
    compose,
    conormalize,
    denormalize,
    epi_mono,
    free_scr_homotopy,
    levelwise_cosym,
    levelwise_sym,
    monotone_maps,
    normalize,
    shuffles,
    surjections,
)

RINGS = [ZZ, QQ, GF(2), GF(3)]


def test_counts_in_the_simplex_category():
    for n in range(6):
        for k in range(n + 1):
            assert len(surjections(n, k)) == comb(n, k)
    for m in range(4):
        for n in range(4):
            assert len(monotone_maps(m, n)) == comb(m + n + 1, m + 1)


def test_cosimplicial_identities_on_maps():
    for n in range(1, 6):
        for i in range(n + 1):
            for j in range(i + 1, n + 1):
                # d^j d^i = d^i d^{j-1}
                assert compose(coface(n, j), coface(n - 1, i)) == compose(coface(n, i), coface(n - 1, j - 1))
        for j in range(n):
            for i in range(n + 1):
                lhs = compose(codegeneracy(n - 1, j), coface(n, i))
                if i < j:
                    rhs = compose(coface(n - 1, i), codegeneracy(n - 2, j - 1)) if n >= 2 else None
                elif i in (j, j + 1):
                    rhs = tuple(range(n))
                else:
                    rhs = compose(coface(n - 1, i - 1), codegeneracy(n - 2, j)) if n >= 2 else None
                if rhs is not None:
                    assert lhs == rhs


def test_epi_mono_factorization():
    for f in monotone_maps(3, 3):
        eps, image = epi_mono(f)
        assert tuple(image[e] for e in eps) == f
        assert sorted(set(eps)) == list(range(len(image)))


def test_finite_simplicial_sets():
    assert [len(DELTA0.simplices(q)) for q in range(4)] == [1, 1, 1, 1]
    assert [len(DELTA1.simplices(q)) for q in range(4)] == [2, 3, 4, 5]
    assert [len(BOUNDARY_DELTA1.simplices(q)) for q in range(4)] == [2, 2, 2, 2]
    assert len(DELTA1.nondegenerate(1)) == 1 and BOUNDARY_DELTA1.nondegenerate(1) == ()


def test_gamma_of_shifted_ring_ranks():
    M = denormalize(CochainComplex.concentrated(ZZ, -2), 4)
    assert M.ranks == (0, 0, 1, 3, 6)
    assert M.identity_violations() == []
    for method in ("quotient", "kernel"):
        C = normalize(M, method)
        assert C.ranks == {-2: 1}


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 100_000), st.sampled_from(range(len(RINGS))), st.integers(0, 2))
def test_dold_kan_round_trip(seed, ring_index, top):
    R = RINGS[ring_index]
    C = _random_complex(random.Random(seed), -top, 0, R)
    M = denormalize(C, top + 1)
    assert M.identity_violations() == []
    for method in ("quotient", "kernel"):
        assert normalize(M, method).same_as(C)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 100_000), st.sampled_from(range(len(RINGS))), st.integers(0, 2))
def test_codold_kan_round_trip(seed, ring_index, top):
    R = RINGS[ring_index]
    C = _random_complex(random.Random(seed), 0, top, R)
    K = codenormalize(C, top + 1)
    assert K.identity_violations() == []
    for method in ("kernel", "quotient"):
        assert conormalize(K, method).same_as(C)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 100_000), st.integers(1, 3))
def test_levelwise_sym_keeps_identities(seed, w):
    C = _random_complex(random.Random(seed), -1, 0, ZZ)
    M = denormalize(C, 2)
    assert levelwise_sym(M, w).identity_violations() == []
    K = codenormalize(_random_complex(random.Random(seed), 0, 1, ZZ), 2)
    assert levelwise_cosym(K, w).identity_violations() == []


def test_shuffle_counts_and_signs():
    for p in range(4):
        for q in range(4):
            sh = list(shuffles(p, q))
            assert len(sh) == comb(p + q, p)
            # signed count is the Gaussian binomial at -1
            want = 0 if p % 2 and q % 2 else comb((p + q) // 2, p // 2)
            assert sum(s for _, _, s in sh) == want
    # (1,1)-shuffles: identity (+1) and the transposition (-1)
    assert sorted(s for _, _, s in shuffles(1, 1)) == [-1, 1]


def test_free_scr_weight_two_on_degree_two_generator():
    hz = free_scr_homotopy(2, [1, 2], 5, ZZ)
    assert hz.homotopy(1, 2) == CohomologyGroup(ZZ, 1)
    H = hz.tables[2]
    assert H.nonzero().keys() == {-4}
    assert H[-4] == CohomologyGroup(ZZ, 1)
    group, free, tors = hz.class_coordinates(2, 4, hz.power_chain(2))
    assert abs(free[0]) == 2 and not tors


def test_free_scr_weight_two_on_degree_one_generator_is_acyclic():
    # Sym^2 of a degree-1 class vanishes: the shifted exterior square of a line
    for R in (ZZ, GF(2), GF(3)):
        hz = free_scr_homotopy(1, [2], 4, R)
        assert hz.tables[2].nonzero() == {}


def test_free_scr_needs_enough_levels():
    with pytest.raises(TruncationError):
        free_scr_homotopy(2, [2], 4, ZZ)


def test_normalized_chains_of_simplices():
    # Delta^1 as a simplicial abelian group: normalized chains compute a point
    from infol.simplicial import SimplicialModule
    from infol.exactlin import SparseMat

    ranks = tuple(len(DELTA1.simplices(n)) for n in range(4))
    faces, degens = {}, {}
    for n in range(4):
        src = DELTA1.simplices(n)
        for i in range(n + 1):
            if n >= 1:
                dst = {x: a for a, x in enumerate(DELTA1.simplices(n - 1))}
                faces[(n, i)] = SparseMat(len(dst), len(src), {(dst[DELTA1.act(coface(n, i), x)], c): 1 for c, x in enumerate(src)}, ZZ)
            if n < 3:
                dst = {x: a for a, x in enumerate(DELTA1.simplices(n + 1))}
                degens[(n, i)] = SparseMat(len(dst), len(src), {(dst[DELTA1.act(codegeneracy(n, i), x)], c): 1 for c, x in enumerate(src)}, ZZ)
    M = SimplicialModule(ZZ, ranks, faces, degens)
    assert M.identity_violations() == []
    H = cohomology(normalize(M), range(-2, 1))
    assert H[0] == CohomologyGroup(ZZ, 1) and H[-1].is_zero
