"""Infinitesimal cohomology of polynomial algebras through the Čech–Alexander
tower, the graded comparison, de Rham complexes and the char-0 comparison."""

from __future__ import annotations

import time
from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from infol.exactlin import GF, QQ, ZZ, CohomologyGroup
from infol.infcoh import (
    GrammarError,
    UnsupportedComparison,
    cech_alexander,
    compare_inf_derham,
    de_rham_classes,
    de_rham_cohomology,
    graded_compare,
    inf_cohomology,
    parse_algebra,
    spurious_kernel,
)
from infol.polys import Poly


def test_grammar():
    X = parse_algebra("Q[x,y]")
    assert X.ring == QQ and X.names == ("x", "y") and X.d == 2
    assert parse_algebra("Z[x]").ring == ZZ
    assert parse_algebra("Fp[x]", 3).ring == GF(3)
    assert parse_algebra("F5[t]").ring == GF(5)
    assert parse_algebra(" Q [ x , y ] ").names == ("x", "y")
    assert parse_algebra("Q").d == 0


@pytest.mark.parametrize("text,p", [("Q[x", None), ("R[x]", None), ("Fp[x]", None), ("F4[x]", None), ("Q[x,x]", None), ("F3[x]", 5), ("Q[1x]", None)])
def test_grammar_errors(text, p):
    with pytest.raises(GrammarError):
        parse_algebra(text, p)


def test_tower_maps_on_the_line():
    T = cech_alexander(parse_algebra("Q[x]"), 2, 8, 6)
    L1 = T.level(1)
    x, xi = L1.var(0), L1.var(1)
    images = {tuple(T.coface_images(0, k)[0].terms.items()) for k in (0, 1)}
    assert images == {tuple(x.terms.items()), tuple((x + xi).terms.items())}
    assert T.codegeneracy_images(0, 0)[1].is_zero()
    L2 = T.level(2)
    assert T.coface_images(1, 1)[1] == L2.var(1) + L2.var(2)
    # Taylor expansion of x^3 under the nontrivial coface, by the binomial theorem
    f = Poly.monomial((3,), QQ)
    want = Poly(QQ, 2, {(3 - k, k): comb(3, k) for k in range(4)})
    assert want in [T.apply(T.coface_images(0, k), f, L1) for k in (0, 1)]


@pytest.mark.parametrize("alg", ["Q[x]", "F3[x]", "Q[x,y]", "Z[x]", "F2[x,y]"])
def test_tower_identities(alg):
    T = cech_alexander(parse_algebra(alg), 3, 5, 4)
    assert T.generator_identity_violations() == []
    assert T.cosimplicial_module().identity_violations() == []


def test_affine_line_values():
    t = time.perf_counter()
    HQ = inf_cohomology(cech_alexander(parse_algebra("Q[x]"), 2, 8, 6))
    assert HQ[0] == CohomologyGroup(QQ, 1) and HQ[1].is_zero
    assert sorted(HQ.trusted) == [0, 1]
    H3 = inf_cohomology(cech_alexander(parse_algebra("F3[x]"), 2, 8, 6))
    assert H3[0] == CohomologyGroup(GF(3), 1) and 0 in H3.trusted
    assert time.perf_counter() - t < 60


@pytest.mark.parametrize("alg", ["Q[x]", "F3[x]", "Q[x,y]", "Q", "Z[x]"])
def test_h0_is_the_ground_ring(alg):
    X = parse_algebra(alg)
    H = inf_cohomology(cech_alexander(X, 2, 5, 4))
    assert H[0] == CohomologyGroup(X.ring, 1)


@settings(max_examples=12, deadline=None)
@given(st.sampled_from(["Q[x]", "F3[x]", "F2[x]", "Z[x]"]), st.integers(1, 5), st.integers(1, 3), st.integers(1, 3))
def test_stability_under_larger_truncation(alg, D, dp, dD):
    X = parse_algebra(alg)
    small = inf_cohomology(cech_alexander(X, 2, D + 1, D))
    big = inf_cohomology(cech_alexander(X, 2, D + 1 + dp + dD, D + dD))
    for n in small.trusted:
        assert big[n] == small[n]


def test_stability_eight_to_ten():
    for alg in ("Q[x]", "F3[x]"):
        X = parse_algebra(alg)
        a = inf_cohomology(cech_alexander(X, 2, 8, 6))
        b = inf_cohomology(cech_alexander(X, 2, 10, 8))
        assert all(a[n] == b[n] for n in a.trusted)


def test_negative_control_frobenius_ghosts():
    T = cech_alexander(parse_algebra("F3[x]"), 2, 3, 6)
    assert spurious_kernel(T) == ["1", "x^3", "x^6"]
    H = inf_cohomology(T)
    assert H[0].free_rank == 3
    assert list(H.trusted) == [] and H.trusted_window is None


@pytest.mark.parametrize("d,names", [(1, "x"), (2, "x,y")])
def test_graded_comparison(d, names):
    T = cech_alexander(parse_algebra(f"Q[{names}]"), 4, 5, 4)
    for n in range(4):
        for w in range(5):
            wit = graded_compare(T, n, w)
            assert wit.ok, (n, w)
            assert wit.rank == comb(n * d + w - 1, w) if n else wit.rank == int(w == 0)
            assert len(wit.bijection) == wit.rank
            assert set(wit.coface_ok) == {f"d{k}" for k in range(n + 2)}


def test_graded_comparison_examples():
    T = cech_alexander(parse_algebra("F3[x]"), 3, 4, 3)
    assert graded_compare(T, 1, 1).bijection == [("xi1", ("dx^(1)",))]
    assert graded_compare(T, 2, 2).rank == 3
    with pytest.raises(ValueError):
        graded_compare(T, 1, 4)


def test_de_rham():
    assert de_rham_cohomology(parse_algebra("Q[x]"), 10).nonzero() == {0: CohomologyGroup(QQ, 1)}
    assert de_rham_cohomology(parse_algebra("Q[x,y]"), 4).nonzero() == {0: CohomologyGroup(QQ, 1)}
    classes = de_rham_classes(parse_algebra("F3[x]"), 10)
    assert classes == {0: ["1", "x^3", "x^6", "x^9"], 1: ["x^2 dx", "x^5 dx", "x^8 dx"]}
    H = de_rham_cohomology(parse_algebra("F3[x]"), 10)
    assert H[0].free_rank == 4 and H[1].free_rank == 3


@pytest.mark.parametrize("alg", ["Q[x]", "Q[x,y]", "Q"])
def test_comparison_in_characteristic_zero(alg):
    res = compare_inf_derham(parse_algebra(alg), 2, 5, 4)
    assert res.verdict == "equivalent"
    assert res.trusted_window is not None


def test_comparison_refused_outside_rationals():
    for alg in ("F3[x]", "Z[x]"):
        with pytest.raises(UnsupportedComparison):
            compare_inf_derham(parse_algebra(alg))


def test_degenerate_parameters():
    with pytest.raises(ValueError):
        cech_alexander(parse_algebra("Q[x]"), 0, 8, 6)
    with pytest.raises(ValueError):
        cech_alexander(parse_algebra("Q[x]"), 2, 1, 0)
