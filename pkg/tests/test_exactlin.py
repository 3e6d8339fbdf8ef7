import itertools
from fractions import Fraction
from math import gcd, log

import pytest
from hypothesis import given, settings, strategies as st

from infol.exactlin import (
    GF,
    QQ,
    ZZ,
    CohomologyGroup,
    ComposabilityError,
    LinAlgError,
    SparseMat,
    kernel_basis,
    smith_normal_form,
    solve,
    subquotient,
)


def det(rows):
    if not rows:
        return 1
    return sum((-1) ** j * rows[0][j] * det([r[:j] + r[j + 1:] for r in rows[1:]]) for j in range(len(rows)))


def is_diagonal_product(M, diag, L, R):
    P = (L @ M @ R).to_dense()
    for i, row in enumerate(P):
        for j, v in enumerate(row):
            want = diag[i] if i == j else 0
            if v != want:
                return False
    return True


@pytest.mark.parametrize(
    "dense, expected",
    [
        ([[1, 0], [0, 1]], [1, 1]),
        ([[1, 0], [0, 2]], [1, 2]),
        ([[2, 4], [6, 8]], [2, 4]),
    ],
)
def test_snf_examples(dense, expected):
    M = SparseMat.from_dense(dense)
    diag, L, R = smith_normal_form(M)
    assert diag == expected
    assert is_diagonal_product(M, diag, L, R)


def test_snf_2468_oracle():
    # d1 = gcd of entries, d1*d2 = |det|
    rows = [[2, 4], [6, 8]]
    g = 0
    for v in itertools.chain(*rows):
        g = gcd(g, v)
    assert g == 2 and abs(det(rows)) // g == 4


def test_snf_rejects_rationals():
    with pytest.raises(LinAlgError):
        smith_normal_form(SparseMat.identity(2, QQ))


small_int_matrix = st.integers(1, 4).flatmap(
    lambda m: st.integers(1, 4).flatmap(
        lambda n: st.lists(st.lists(st.integers(-6, 6), min_size=n, max_size=n), min_size=m, max_size=m)
    )
)


@settings(max_examples=200, deadline=None)
@given(small_int_matrix)
def test_snf_properties(rows):
    M = SparseMat.from_dense(rows, cols=len(rows[0]))
    diag, L, R = smith_normal_form(M)
    assert is_diagonal_product(M, diag, L, R)
    assert abs(det(L.to_dense())) == 1 and abs(det(R.to_dense())) == 1
    nz = [d for d in diag if d]
    assert all(d >= 0 for d in diag)
    assert diag[: len(nz)] == nz  # zeros trail
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))


@settings(max_examples=50, deadline=None)
@given(small_int_matrix)
def test_snf_matches_sympy(rows):
    sympy = pytest.importorskip("sympy")
    from sympy.matrices.normalforms import smith_normal_form as sym_snf

    M = SparseMat.from_dense(rows, cols=len(rows[0]))
    diag, _, _ = smith_normal_form(M)
    S = sym_snf(sympy.Matrix(rows), domain=sympy.ZZ)
    theirs = [abs(int(S[i, i])) for i in range(min(S.shape))]
    assert diag == theirs


def test_kernel_examples():
    assert kernel_basis(SparseMat.zero(1, 1, QQ)) == [{0: Fraction(1)}]
    ker = kernel_basis(SparseMat.from_dense([[1, 1]], GF(2)))
    # enumerate F2^2
    expected = [v for v in itertools.product(range(2), repeat=2) if (v[0] + v[1]) % 2 == 0 and any(v)]
    assert len(ker) == 1 and (ker[0].get(0, 0), ker[0].get(1, 0)) in expected
    assert kernel_basis(SparseMat.from_dense([[2]], ZZ)) == []


@settings(max_examples=100, deadline=None)
@given(small_int_matrix, st.sampled_from(["Z", 2, 3, 5, "Q"]))
def test_kernel_vectors_are_killed(rows, which):
    ring = ZZ if which == "Z" else QQ if which == "Q" else GF(which)
    M = SparseMat.from_dense(rows, ring, cols=len(rows[0]))
    ker = kernel_basis(M)
    for v in ker:
        assert M.apply(v) == {}
    assert len(ker) == M.cols - __import__("infol.exactlin", fromlist=["rank"]).rank(M)


def test_subquotient_examples():
    z = SparseMat.zero(0, 1, ZZ)
    assert subquotient(SparseMat.from_dense([[2]]), z) == CohomologyGroup(ZZ, 0, (2,))
    assert subquotient(SparseMat.zero(1, 0, ZZ), z) == CohomologyGroup(ZZ, 1)
    assert subquotient(SparseMat.identity(1, QQ), SparseMat.zero(0, 1, QQ)) == CohomologyGroup(QQ, 0)


def test_subquotient_rejects_noncomposable():
    with pytest.raises(ComposabilityError):
        subquotient(SparseMat.identity(1), SparseMat.identity(1))


def _brute_subquotient_dim(d_in, d_out, p):
    n = len(d_out[0]) if d_out else len(d_in)
    vecs = list(itertools.product(range(p), repeat=n))
    ker = [v for v in vecs if all(sum(a * b for a, b in zip(row, v)) % p == 0 for row in d_out)]
    m = len(d_in[0]) if d_in and d_in[0] else 0
    im = {tuple(sum(d_in[i][j] * c[j] for j in range(m)) % p for i in range(n)) for c in itertools.product(range(p), repeat=m)}
    return round(log(len(ker) / len(im), p))


@settings(max_examples=150, deadline=None)
@given(
    st.sampled_from([2, 3, 5]),
    st.integers(1, 3),
    st.integers(0, 3),
    st.integers(0, 3),
    st.data(),
)
def test_subquotient_matches_brute_force(p, n, m, k, data):
    # build d_out @ d_in = 0 by taking d_in = K @ c with K spanning part of ker(d_out)
    ring = GF(p)
    d_out_rows = data.draw(st.lists(st.lists(st.integers(0, p - 1), min_size=n, max_size=n), min_size=k, max_size=k))
    d_out = SparseMat.from_dense(d_out_rows, ring, cols=n) if k else SparseMat.zero(0, n, ring)
    ker = kernel_basis(d_out)
    coeffs = data.draw(st.lists(st.lists(st.integers(0, p - 1), min_size=len(ker), max_size=len(ker)), min_size=m, max_size=m))
    cols = []
    for c in coeffs:
        v = {}
        for a, kv in zip(c, ker):
            for i, x in kv.items():
                v[i] = (v.get(i, 0) + a * x) % p
        cols.append(v)
    d_in = SparseMat.from_columns(n, cols, ring)
    got = subquotient(d_in, d_out).free_rank
    dense_in = d_in.to_dense()
    assert got == _brute_subquotient_dim(dense_in, d_out_rows, p)


def test_solve_integral():
    B = SparseMat.from_dense([[1, 0], [1, 1], [0, 1]])
    Y = SparseMat.from_dense([[2], [5], [3]])
    assert (B @ solve(B, Y)) == Y
    with pytest.raises(LinAlgError):
        solve(SparseMat.from_dense([[2]]), SparseMat.from_dense([[1]]))
