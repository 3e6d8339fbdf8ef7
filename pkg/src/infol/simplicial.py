"""Truncated simplicial and cosimplicial modules.

Dold–Kan normalization/denormalization, the Eilenberg–Zilber shuffle
product, levelwise free commutative rings and their homotopy.

Monotone maps ``[m] -> [n]`` are tuples of length ``m + 1``.  Face
``d_i`` is induced by the coface map that skips ``i``; degeneracy ``s_i``
by the map that repeats ``i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, combinations_with_replacement

from .complexes import CochainComplex, cohomology
from .exactlin import (
    ZZ,
    Coefficients,
    LinAlgError,
    SparseMat,
    homology_coordinates,
    in_image,
    kernel_basis,
    rank,
    smith_normal_form,
    solve,
)

__all__ = [
    "SimplicialModule",
    "CosimplicialModule",
    "FiniteSimplicialSet",
    "TruncationError",
    "surjections",
    "monotone_maps",
    "coface",
    "codegeneracy",
    "normalize",
    "conormalize",
    "denormalize",
    "codenormalize",
    "codenormal_operator",
    "levelwise_sym",
    "FreeSimplicialRing",
    "shuffle_product",
    "free_scr_homotopy",
    "ScrHomotopy",
    "DELTA0",
    "DELTA1",
    "BOUNDARY_DELTA1",
]


class TruncationError(ValueError):
    """Truncation level too small for the requested answer."""


# ---------------------------------------------------------------------------
# the simplex category
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def surjections(n: int, k: int) -> tuple:
    """Monotone surjections [n] -> [k], ordered lexicographically by jump positions."""
    if k > n or k < 0:
        return ()
    out = []
    for jumps in combinations(range(1, n + 1), k):
        f, v = [0], 0
        js = set(jumps)
        for j in range(1, n + 1):
            if j in js:
                v += 1
            f.append(v)
        out.append(tuple(f))
    return tuple(out)


@lru_cache(maxsize=None)
def monotone_maps(m: int, n: int) -> tuple:
    """All monotone maps [m] -> [n]."""
    return tuple(tuple(c) for c in combinations_with_replacement(range(n + 1), m + 1))


@lru_cache(maxsize=None)
def coface(n: int, i: int) -> tuple:
    """delta^i: [n-1] -> [n], skipping i."""
    return tuple(j for j in range(n + 1) if j != i)


@lru_cache(maxsize=None)
def codegeneracy(n: int, i: int) -> tuple:
    """sigma^i: [n+1] -> [n], hitting i twice."""
    return tuple(j if j <= i else j - 1 for j in range(n + 2))


def compose(f: tuple, g: tuple) -> tuple:
    """f after g."""
    return tuple(f[x] for x in g)


def epi_mono(f: tuple) -> tuple[tuple, tuple]:
    """Factor f = mono . epi; returns (epi, image)."""
    image = tuple(sorted(set(f)))
    pos = {v: a for a, v in enumerate(image)}
    return tuple(pos[v] for v in f), image


# ---------------------------------------------------------------------------
# module types
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SimplicialModule:
    """Levels 0..N of a simplicial module of finite free modules.

    ``faces[(n, i)]``: level n -> n-1; ``degens[(n, i)]``: level n -> n+1.
    """

    ring: Coefficients
    ranks: tuple
    faces: dict
    degens: dict
    labels: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return len(self.ranks) - 1

    def face(self, n: int, i: int) -> SparseMat:
        return self.faces[(n, i)]

    def degen(self, n: int, i: int) -> SparseMat:
        return self.degens[(n, i)]

    def identity_violations(self) -> list[str]:
        """All simplicial identities that fail within the truncation."""
        bad = []
        N = self.N
        for n in range(2, N + 1):
            for i in range(n):
                for j in range(i + 1, n + 1):
                    if self.face(n - 1, i) @ self.face(n, j) != self.face(n - 1, j - 1) @ self.face(n, i):
                        bad.append(f"d{i}d{j} at {n}")
        for n in range(0, N - 1):
            for i in range(n + 1):
                for j in range(i, n + 1):
                    if self.degen(n + 1, j + 1) @ self.degen(n, i) != self.degen(n + 1, i) @ self.degen(n, j):
                        bad.append(f"s{j + 1}s{i} at {n}")
        for n in range(0, N):
            I = SparseMat.identity(self.ranks[n], self.ring)
            for j in range(n + 1):
                s = self.degen(n, j)
                for i in range(n + 2):
                    lhs = self.face(n + 1, i) @ s
                    if i < j:
                        rhs = self.degen(n - 1, j - 1) @ self.face(n, i)
                    elif i in (j, j + 1):
                        rhs = I
                    else:
                        rhs = self.degen(n - 1, j) @ self.face(n, i - 1)
                    if lhs != rhs:
                        bad.append(f"d{i}s{j} at {n}")
        return bad

    def check(self) -> "SimplicialModule":
        bad = self.identity_violations()
        if bad:
            raise ValueError(f"simplicial identities fail: {bad[:5]}")
        return self


@dataclass(frozen=True, eq=False)
class CosimplicialModule:
    """Levels 0..N; ``cofaces[(n, i)]``: K^n -> K^{n+1}, ``codegens[(n, i)]``: K^{n+1} -> K^n."""

    ring: Coefficients
    ranks: tuple
    cofaces: dict
    codegens: dict
    labels: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return len(self.ranks) - 1

    def identity_violations(self) -> list[str]:
        bad = []
        N = self.N
        d, s = self.cofaces, self.codegens
        for n in range(0, N - 1):
            for i in range(n + 2):
                for j in range(i + 1, n + 3):
                    # d^j d^i = d^i d^{j-1}
                    if d[(n + 1, j)] @ d[(n, i)] != d[(n + 1, i)] @ d[(n, j - 1)]:
                        bad.append(f"d{j}d{i} at {n}")
        for n in range(0, N - 1):
            for i in range(n + 1):
                for j in range(i, n + 1):
                    # s^j s^i = s^i s^{j+1}
                    if s[(n, j)] @ s[(n + 1, i)] != s[(n, i)] @ s[(n + 1, j + 1)]:
                        bad.append(f"s{j}s{i} at {n}")
        for n in range(0, N):
            I = SparseMat.identity(self.ranks[n], self.ring)
            for j in range(n + 1):
                for i in range(n + 2):
                    lhs = s[(n, j)] @ d[(n, i)]
                    if i < j:
                        rhs = d[(n - 1, i)] @ s[(n - 1, j - 1)]
                    elif i in (j, j + 1):
                        rhs = I
                    else:
                        rhs = d[(n - 1, i - 1)] @ s[(n - 1, j)]
                    if lhs != rhs:
                        bad.append(f"s{j}d{i} at {n}")
        return bad

    def check(self) -> "CosimplicialModule":
        bad = self.identity_violations()
        if bad:
            raise ValueError(f"cosimplicial identities fail: {bad[:5]}")
        return self


@dataclass(frozen=True)
class FiniteSimplicialSet:
    """Delta^0, Delta^1 or the boundary of Delta^1.

    q-simplices are monotone maps [q] -> [dim of the ambient simplex] (all of
    them for a standard simplex, only the constant ones for the boundary).
    """

    name: str

    def __post_init__(self):
        if self.name not in ("Delta0", "Delta1", "dDelta1"):
            raise ValueError(f"unsupported simplicial set {self.name}")

    @property
    def dim(self) -> int:
        return 1 if self.name == "Delta1" else 0

    def simplices(self, q: int) -> tuple:
        if self.name == "Delta0":
            return ((0,) * (q + 1),)
        if self.name == "Delta1":
            return monotone_maps(q, 1)
        return ((0,) * (q + 1), (1,) * (q + 1))

    def act(self, theta: tuple, x: tuple) -> tuple:
        """Simplicial operator: pull x along theta."""
        return compose(x, theta)

    def nondegenerate(self, q: int) -> tuple:
        return tuple(x for x in self.simplices(q) if len(set(x)) == q + 1)


DELTA0 = FiniteSimplicialSet("Delta0")
DELTA1 = FiniteSimplicialSet("Delta1")
BOUNDARY_DELTA1 = FiniteSimplicialSet("dDelta1")


# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------


class _Quotient:
    """Projection P and section S for a free quotient M / D with D a summand."""

    def __init__(self, n: int, D: SparseMat, ring: Coefficients):
        self.n = n
        cols = [c for c in D.col_dicts() if c]
        unit = ring.kind != "Z" or all(len(c) == 1 and abs(next(iter(c.values()))) == 1 for c in cols)
        if all(len(c) == 1 for c in cols) and unit:
            hit = {next(iter(c)) for c in cols}
            keep = [i for i in range(n) if i not in hit]
            self.keep = keep
            self.P = SparseMat(len(keep), n, {(a, i): 1 for a, i in enumerate(keep)}, ring)
            self.S = self.P.transpose()
            return
        self.keep = None
        if ring.is_field:
            from .exactlin import _rref_rows

            pivots, reduced = _rref_rows(D.transpose())
            piv = set(pivots)
            free = [j for j in range(n) if j not in piv]
            ent = {}
            for a, j in enumerate(free):
                ent[(a, j)] = 1
            for pc, row in zip(pivots, reduced):
                for a, j in enumerate(free):
                    c = row.get(j)
                    if c is not None:
                        ent[(a, pc)] = ring.neg(c)
            # P(v) reads non-pivot coordinates of v reduced modulo the image
            self.P = SparseMat(len(free), n, ent, ring)
            self.S = SparseMat(n, len(free), {(j, a): 1 for a, j in enumerate(free)}, ring)
            return
        diag, left, _ = smith_normal_form(D)
        r = sum(1 for d in diag if d)
        if any(d != 1 for d in diag[:r]):
            raise LinAlgError("degenerate part is not a direct summand")
        linv = solve(left, SparseMat.identity(n, ring))
        self.P = left.submatrix(list(range(r, n)), list(range(n)))
        self.S = linv.submatrix(list(range(n)), list(range(r, n)))


class _Sub:
    """Basis B of a submodule given as a kernel; ``coords`` solves B x = y."""

    def __init__(self, n: int, S: SparseMat, ring: Coefficients):
        self.n = n
        colnorm = S.col_dicts()
        zero_cols = [j for j in range(n) if not colnorm[j]]
        nz = [j for j in range(n) if colnorm[j]]
        if not nz or rank(S.submatrix(list(range(S.rows)), nz)) == len(nz):
            self.idx = zero_cols
            self.B = SparseMat(n, len(zero_cols), {(i, a): 1 for a, i in enumerate(zero_cols)}, ring)
        else:
            self.idx = None
            self.B = SparseMat.from_columns(n, kernel_basis(S), ring)

    @property
    def dim(self) -> int:
        return self.B.cols

    def coords(self, Y: SparseMat) -> SparseMat:
        if self.idx is not None:
            pos = {i: a for a, i in enumerate(self.idx)}
            ent = {}
            for (i, j), v in Y.entries.items():
                if i not in pos:
                    raise LinAlgError("vector leaves the normalized submodule")
                ent[(pos[i], j)] = v
            return SparseMat(len(self.idx), Y.cols, ent, Y.ring)
        return solve(self.B, Y)


def _alt_sum(mats: list[SparseMat]) -> SparseMat:
    out = mats[0]
    for i, m in enumerate(mats[1:], start=1):
        out = out - m if i % 2 else out + m
    return out


def simplicial_quotients(M: SimplicialModule) -> list[_Quotient]:
    R = M.ring
    out = []
    for n in range(M.N + 1):
        if n == 0:
            D = SparseMat.zero(M.ranks[0], 0, R)
        else:
            D = M.degen(n - 1, 0)
            for i in range(1, n):
                D = D.hstack(M.degen(n - 1, i))
        out.append(_Quotient(M.ranks[n], D, R))
    return out


def normalize(M: SimplicialModule, method: str = "quotient") -> CochainComplex:
    """Normalized chains, homological level n stored in cohomological degree -n.

    ``method="quotient"``: M_n modulo degenerate simplices with the
    alternating face sum; ``method="kernel"``: intersection of ker d_i for
    i >= 1 with differential d_0.  Degree -(N+1) is flagged incomplete.
    """
    R = M.ring
    N = M.N
    if method == "quotient":
        Q = simplicial_quotients(M)
        ranks = {-n: Q[n].P.rows for n in range(N + 1)}
        diffs = {}
        for n in range(1, N + 1):
            bd = _alt_sum([M.face(n, i) for i in range(n + 1)])
            diffs[-n] = Q[n - 1].P @ bd @ Q[n].S
        return CochainComplex(R, ranks, diffs, incomplete={-(N + 1)})
    if method == "kernel":
        subs = []
        for n in range(N + 1):
            if n == 0:
                S = SparseMat.zero(0, M.ranks[0], R)
            else:
                S = M.face(n, 1)
                for i in range(2, n + 1):
                    S = S.vstack(M.face(n, i))
            subs.append(_Sub(M.ranks[n], S, R))
        ranks = {-n: subs[n].dim for n in range(N + 1)}
        diffs = {-n: subs[n - 1].coords(M.face(n, 0) @ subs[n].B) for n in range(1, N + 1)}
        return CochainComplex(R, ranks, diffs, incomplete={-(N + 1)})
    raise ValueError(f"unknown normalization method {method!r}")


def cosimplicial_subs(K: CosimplicialModule) -> list[_Sub]:
    R = K.ring
    subs = []
    for n in range(K.N + 1):
        if n == 0:
            S = SparseMat.zero(0, K.ranks[0], R)
        else:
            S = K.codegens[(n - 1, 0)]
            for i in range(1, n):
                S = S.vstack(K.codegens[(n - 1, i)])
        subs.append(_Sub(K.ranks[n], S, R))
    return subs


def conormalize(K: CosimplicialModule, method: str = "kernel") -> CochainComplex:
    """Normalized cochains in degrees 0..N.

    ``method="kernel"``: intersection of ker s^i with the alternating coface
    sum; ``method="quotient"``: K^n modulo the images of d^i, i >= 1, with
    differential d^0.  Level N+1 is missing, so degree N is untrusted.
    """
    R = K.ring
    N = K.N
    if method == "kernel":
        subs = cosimplicial_subs(K)
        ranks = {n: subs[n].dim for n in range(N + 1)}
        diffs = {}
        for n in range(N):
            dd = _alt_sum([K.cofaces[(n, i)] for i in range(n + 2)])
            diffs[n] = subs[n + 1].coords(dd @ subs[n].B)
        return CochainComplex(R, ranks, diffs, incomplete={N + 1})
    if method == "quotient":
        Q = []
        for n in range(N + 1):
            if n == 0:
                D = SparseMat.zero(K.ranks[0], 0, R)
            else:
                D = K.cofaces[(n - 1, 1)]
                for i in range(2, n + 1):
                    D = D.hstack(K.cofaces[(n - 1, i)])
            Q.append(_Quotient(K.ranks[n], D, R))
        ranks = {n: Q[n].P.rows for n in range(N + 1)}
        diffs = {n: Q[n + 1].P @ K.cofaces[(n, 0)] @ Q[n].S for n in range(N)}
        return CochainComplex(R, ranks, diffs, incomplete={N + 1})
    raise ValueError(f"unknown normalization method {method!r}")


# ---------------------------------------------------------------------------
# denormalization
# ---------------------------------------------------------------------------


def gamma_basis(n: int, dims: dict) -> list[tuple]:
    """Basis of Gamma_n: (surjection [n] ->> [k], index) for each k with dims[k] > 0."""
    out = []
    for k in sorted(dims):
        if dims[k] and k <= n:
            for sigma in surjections(n, k):
                out += [(sigma, b) for b in range(dims[k])]
    return out


def gamma_operator(theta: tuple, src: int, dst: int, dims: dict, boundary: dict, ring: Coefficients) -> SparseMat:
    """Matrix Gamma_src -> Gamma_dst induced by theta: [dst] -> [src].

    ``boundary[k]`` is the matrix C_k -> C_{k-1}.
    """
    sb = gamma_basis(src, dims)
    db = gamma_basis(dst, dims)
    dpos = {x: a for a, x in enumerate(db)}
    ent = {}
    cache = {}
    for col, (sigma, b) in enumerate(sb):
        key = sigma
        if key not in cache:
            eps, image = epi_mono(compose(sigma, theta))
            k = sigma[-1]
            if len(image) == k + 1:
                cache[key] = (eps, "id")
            elif image == tuple(range(1, k + 1)):
                cache[key] = (eps, "d")
            else:
                cache[key] = (None, None)
        eps, kind = cache[key]
        if kind == "id":
            ent[(dpos[(eps, b)], col)] = 1
        elif kind == "d":
            k = sigma[-1]
            for (i, j), v in boundary[k].entries.items():
                if j == b:
                    ent[(dpos[(eps, i)], col)] = v
    return SparseMat(len(db), len(sb), ent, ring)


def denormalize(C: CochainComplex, N: int | None = None) -> SimplicialModule:
    """Dold–Kan inverse: level n is the sum over surjections [n] ->> [k] of C_k.

    C must live in cohomological degrees [-N, 0].
    """
    if C.ranks and (C.hi > 0):
        raise ValueError("denormalize needs a complex in degrees <= 0")
    top = -C.lo if C.ranks else 0
    if N is None:
        N = top
    dims = {k: C.rank(-k) for k in range(top + 1)}
    boundary = {k: C.d(-k) for k in range(1, top + 1)}
    R = C.ring
    ranks = tuple(len(gamma_basis(n, dims)) for n in range(N + 1))
    faces, degens = {}, {}
    for n in range(N + 1):
        for i in range(n + 1):
            if n >= 1:
                faces[(n, i)] = gamma_operator(coface(n, i), n, n - 1, dims, boundary, R)
            if n < N:
                degens[(n, i)] = gamma_operator(codegeneracy(n, i), n, n + 1, dims, boundary, R)
    labels = {n: gamma_basis(n, dims) for n in range(N + 1)}
    return SimplicialModule(R, ranks, faces, degens, labels)


def codenormalize(C: CochainComplex, N: int) -> CosimplicialModule:
    """Cosimplicial Dold–Kan inverse for C in degrees [0, M].

    Built as the dual of the simplicial denormalization of the dual complex,
    so K^n is again indexed by surjections [n] ->> [k].
    """
    if C.ranks and C.lo < 0:
        raise ValueError("codenormalize needs a complex in degrees >= 0")
    top = C.hi if C.ranks else 0
    dims = {k: C.rank(k) for k in range(top + 1)}
    # dual boundary C_k^v -> C_{k-1}^v is the transpose of d: C^{k-1} -> C^k
    boundary = {k: C.d(k - 1).transpose() for k in range(1, top + 1)}
    R = C.ring
    ranks = tuple(len(gamma_basis(n, dims)) for n in range(N + 1))
    cofaces, codegens = {}, {}
    for n in range(N + 1):
        if n < N:
            for i in range(n + 2):
                cofaces[(n, i)] = gamma_operator(coface(n + 1, i), n + 1, n, dims, boundary, R).transpose()
            for i in range(n + 1):
                codegens[(n, i)] = gamma_operator(codegeneracy(n, i), n, n + 1, dims, boundary, R).transpose()
    labels = {n: gamma_basis(n, dims) for n in range(N + 1)}
    return CosimplicialModule(R, ranks, cofaces, codegens, labels)


def codenormal_operator(C: CochainComplex, theta: tuple, target: int) -> SparseMat:
    """Matrix K^m -> K^target of codenormalize(C) for theta: [m] -> [target]."""
    top = C.hi if C.ranks else 0
    dims = {k: C.rank(k) for k in range(top + 1)}
    boundary = {k: C.d(k - 1).transpose() for k in range(1, top + 1)}
    return gamma_operator(theta, target, len(theta) - 1, dims, boundary, C.ring).transpose()


# ---------------------------------------------------------------------------
# levelwise free commutative rings
# ---------------------------------------------------------------------------


def _sym_map(f: SparseMat, src_monos: list, dst_index: dict, ring: Coefficients) -> SparseMat:
    cols = f.col_dicts()
    ent = {}
    for c, mono in enumerate(src_monos):
        acc = {(): ring.one()}
        for idx in mono:
            nxt = {}
            for key, a in acc.items():
                for r, v in cols[idx].items():
                    k2 = tuple(sorted(key + (r,)))
                    nxt[k2] = ring.add(nxt.get(k2, ring.zero()), ring.mul(a, v))
            acc = {k: v for k, v in nxt.items() if not ring.is_zero(v)}
            if not acc:
                break
        for key, v in acc.items():
            ent[(dst_index[key], c)] = v
    return SparseMat(len(dst_index), len(src_monos), ent, ring)


def sym_monomials(n: int, w: int) -> list[tuple]:
    return list(combinations_with_replacement(range(n), w))


def levelwise_sym(M: SimplicialModule, w: int) -> SimplicialModule:
    """Weight-w part of the levelwise free commutative ring on M."""
    R = M.ring
    monos = [sym_monomials(r, w) for r in M.ranks]
    index = [{m: a for a, m in enumerate(ms)} for ms in monos]
    faces = {(n, i): _sym_map(f, monos[n], index[n - 1], R) for (n, i), f in M.faces.items()}
    degens = {(n, i): _sym_map(s, monos[n], index[n + 1], R) for (n, i), s in M.degens.items()}
    return SimplicialModule(R, tuple(len(m) for m in monos), faces, degens, {n: monos[n] for n in range(len(monos))})


def levelwise_cosym(K: CosimplicialModule, w: int) -> CosimplicialModule:
    """Weight-w part of the levelwise free commutative ring on a cosimplicial module."""
    R = K.ring
    monos = [sym_monomials(r, w) for r in K.ranks]
    index = [{m: a for a, m in enumerate(ms)} for ms in monos]
    cofaces = {(n, i): _sym_map(f, monos[n], index[n + 1], R) for (n, i), f in K.cofaces.items()}
    codegens = {(n, i): _sym_map(s, monos[n + 1], index[n], R) for (n, i), s in K.codegens.items()}
    return CosimplicialModule(R, tuple(len(m) for m in monos), cofaces, codegens, {n: monos[n] for n in range(len(monos))})


class FreeSimplicialRing:
    """Sym of a simplicial module M taken levelwise, materialized weight by weight."""

    def __init__(self, M: SimplicialModule):
        self.M = M
        self.ring = M.ring
        self._pieces: dict[int, SimplicialModule] = {}

    def piece(self, w: int) -> SimplicialModule:
        if w not in self._pieces:
            self._pieces[w] = levelwise_sym(self.M, w)
        return self._pieces[w]

    def index(self, w: int, n: int) -> dict:
        return {m: a for a, m in enumerate(self.piece(w).labels[n])}

    def multiply(self, n: int, a: int, x: dict, b: int, y: dict) -> dict:
        """Levelwise product of x (weight a) and y (weight b) at level n."""
        R = self.ring
        la, lb = self.piece(a).labels[n], self.piece(b).labels[n]
        idx = self.index(a + b, n)
        out: dict = {}
        for i, u in x.items():
            for j, v in y.items():
                k = idx[tuple(sorted(la[i] + lb[j]))]
                out[k] = R.add(out.get(k, R.zero()), R.mul(u, v))
        return {k: v for k, v in out.items() if not R.is_zero(v)}


def _perm_sign(seq) -> int:
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def shuffles(p: int, q: int):
    """(p, q)-shuffles as (mu, nu, sign)."""
    for mu in combinations(range(p + q), p):
        nu = tuple(j for j in range(p + q) if j not in mu)
        yield mu, nu, _perm_sign(mu + nu)


def _apply_degens(M: SimplicialModule, level: int, idxs, vec: dict) -> dict:
    for i in idxs:  # increasing order: s_{i_1} first
        vec = M.degen(level, i).apply(vec)
        level += 1
    return vec


def shuffle_product(A: FreeSimplicialRing, a: int, p: int, x: dict, b: int, q: int, y: dict) -> dict:
    """Eilenberg–Zilber product of chains x in weight a, level p and y in weight b, level q.

    Returns a chain of weight a+b at level p+q (unnormalized coordinates).
    """
    R = A.ring
    if p + q > A.M.N:
        raise TruncationError(f"shuffle product needs level {p + q} > N = {A.M.N}")
    Ma, Mb = A.piece(a), A.piece(b)
    out: dict = {}
    for mu, nu, sign in shuffles(p, q):
        xs = _apply_degens(Ma, p, nu, x)
        ys = _apply_degens(Mb, q, mu, y)
        prod = A.multiply(p + q, a, xs, b, ys)
        for k, v in prod.items():
            out[k] = R.add(out.get(k, R.zero()), v if sign > 0 else R.neg(v))
    return {k: v for k, v in out.items() if not R.is_zero(v)}


# ---------------------------------------------------------------------------
# homotopy of free simplicial commutative rings
# ---------------------------------------------------------------------------


@dataclass
class ScrHomotopy:
    """Homotopy of the weight pieces of the free simplicial ring on one generator."""

    ring: Coefficients
    gen_degree: int
    N: int
    algebra: FreeSimplicialRing
    tables: dict
    complexes: dict
    quotients: dict

    def homotopy(self, w: int, n: int):
        return self.tables[w][-n]

    def normalized_class(self, w: int, level: int, chain: dict) -> dict:
        """Project an unnormalized chain to normalized coordinates."""
        return self.quotients[w][level].P.apply(chain)

    def generator_chain(self) -> dict:
        """The fundamental class v at level gen_degree, weight 1."""
        labels = self.algebra.piece(1).labels[self.gen_degree]
        target = (((tuple(range(self.gen_degree + 1)), 0),))
        base = self.algebra.M.labels[self.gen_degree]
        k = base.index(target[0])
        return {labels.index((k,)): self.ring.one()}

    def power_chain(self, w: int) -> dict:
        """v^w via iterated shuffle products (unnormalized, level w*gen_degree)."""
        d = self.gen_degree
        x = self.generator_chain()
        for k in range(2, w + 1):
            x = shuffle_product(self.algebra, k - 1, (k - 1) * d, x, 1, d, self.generator_chain())
        return x

    def class_coordinates(self, w: int, n: int, chain: dict):
        """(group, free coordinates, torsion residues) of a normalized cycle in H_n of weight w."""
        C = self.complexes[w]
        z = self.normalized_class(w, n, chain)
        group, coords = homology_coordinates(C.d(-n - 1), C.d(-n))
        free, tors = coords(z)
        return group, free, tors

    def is_boundary(self, w: int, n: int, chain: dict) -> bool:
        C = self.complexes[w]
        return in_image(C.d(-n - 1), self.normalized_class(w, n, chain))


def free_scr_homotopy(gen_degree: int, weights, N: int, ring: Coefficients = ZZ) -> ScrHomotopy:
    """Homotopy of Sym(Gamma(ring[gen_degree])) weight by weight.

    Requires N >= gen_degree * w + 1 for every requested weight w.
    """
    weights = [weights] if isinstance(weights, int) else list(weights)
    for w in weights:
        if N < gen_degree * w + 1:
            raise TruncationError(f"weight {w}, degree {gen_degree} needs N >= {gen_degree * w + 1}, got {N}")
    C = CochainComplex.concentrated(ring, -gen_degree)
    M = denormalize(C, N)
    A = FreeSimplicialRing(M)
    tables, complexes, quotients = {}, {}, {}
    for w in weights:
        piece = A.piece(w)
        quotients[w] = simplicial_quotients(piece)
        Cw = normalize(piece)
        complexes[w] = Cw
        tables[w] = cohomology(Cw, range(-N, 1))
    return ScrHomotopy(ring, gen_degree, N, A, tables, complexes, quotients)
