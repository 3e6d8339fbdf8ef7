"""Truncated cosimplicial-simplicial modules and rings.

A cell (q, p) has q the cosimplicial index and p the simplicial one.
Normalizing both directions gives a bicomplex whose product totalization
lives in cohomological degree q - p.

Truncated windows only see finitely many cells, so a Tot computation is
trustworthy exactly when the normalized cells are known to vanish past the
window.  Modules therefore carry optional vanishing bounds ``qv``/``pv``:
normalized cells with q > qv or p > pv are zero.  Declared bounds are
re-verified numerically inside the window; without them nothing is trusted.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Callable

from .complexes import (
    Bicomplex,
    ChainMap,
    CochainComplex,
    CohomologyTable,
    cohomology,
    cone,
    tensor,
    tot_product,
)
from .exactlin import ZZ, Coefficients, LinAlgError, SparseMat, smith_normal_form, solve
from .simplicial import (
    DELTA1,
    BOUNDARY_DELTA1,
    CosimplicialModule,
    FiniteSimplicialSet,
    SimplicialModule,
    _Quotient,
    _Sub,
    _alt_sum,
    _sym_map,
    codegeneracy,
    coface,
    compose,
    epi_mono,
    surjections,
    sym_monomials,
)

__all__ = [
    "CsModule",
    "CsMap",
    "CsRing",
    "QisVerdict",
    "WindowError",
    "double_denormalize",
    "normalized_bicomplex",
    "tot_pi",
    "tot_map",
    "cotensor",
    "cotensor_map_constant",
    "cotensor_restrict",
    "finite_cochains",
    "finite_limit",
    "sym_delta",
    "phi",
    "path_object",
    "is_completed_qis",
    "cs_direct_sum",
    "cs_tensor",
    "cs_sym",
    "random_bicomplex",
    "random_cs_module",
]


class WindowError(ValueError):
    """Truncation windows of two objects do not match."""


# ---------------------------------------------------------------------------
# modules
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CsModule:
    """Cells (q, p) for 0 <= q <= Q, 0 <= p <= P.

    faces[(q, p, i)]: (q, p) -> (q, p-1)      degens[(q, p, i)]: (q, p) -> (q, p+1)
    cofaces[(q, p, i)]: (q, p) -> (q+1, p)    codegens[(q, p, i)]: (q+1, p) -> (q, p)
    """

    ring: Coefficients
    Q: int
    P: int
    ranks: dict
    faces: dict
    degens: dict
    cofaces: dict
    codegens: dict
    qv: int | None = None
    pv: int | None = None
    labels: dict = field(default_factory=dict)

    def rank(self, q: int, p: int) -> int:
        return self.ranks.get((q, p), 0)

    def cells(self):
        return [(q, p) for q in range(self.Q + 1) for p in range(self.P + 1)]

    def simplicial_at(self, q: int) -> SimplicialModule:
        return SimplicialModule(
            self.ring,
            tuple(self.rank(q, p) for p in range(self.P + 1)),
            {(p, i): m for (qq, p, i), m in self.faces.items() if qq == q},
            {(p, i): m for (qq, p, i), m in self.degens.items() if qq == q},
        )

    def cosimplicial_at(self, p: int) -> CosimplicialModule:
        return CosimplicialModule(
            self.ring,
            tuple(self.rank(q, p) for q in range(self.Q + 1)),
            {(q, i): m for (q, pp, i), m in self.cofaces.items() if pp == p},
            {(q, i): m for (q, pp, i), m in self.codegens.items() if pp == p},
        )

    def identity_violations(self) -> list[str]:
        bad = []
        for q in range(self.Q + 1):
            bad += [f"q={q}: {b}" for b in self.simplicial_at(q).identity_violations()]
        for p in range(self.P + 1):
            bad += [f"p={p}: {b}" for b in self.cosimplicial_at(p).identity_violations()]
        # the two directions commute
        for (q, p, i), f in self.faces.items():
            for j in range(q + 2):
                if q < self.Q and self.cofaces[(q, p - 1, j)] @ f != self.faces[(q + 1, p, i)] @ self.cofaces[(q, p, j)]:
                    bad.append(f"d^{j} d_{i} at {(q, p)}")
            for j in range(q):
                if self.codegens[(q - 1, p - 1, j)] @ f != self.faces[(q - 1, p, i)] @ self.codegens[(q - 1, p, j)]:
                    bad.append(f"s^{j} d_{i} at {(q, p)}")
        for (q, p, i), s in self.degens.items():
            for j in range(q + 2):
                if q < self.Q and self.cofaces[(q, p + 1, j)] @ s != self.degens[(q + 1, p, i)] @ self.cofaces[(q, p, j)]:
                    bad.append(f"d^{j} s_{i} at {(q, p)}")
        return bad

    def check(self) -> "CsModule":
        bad = self.identity_violations()
        if bad:
            raise ValueError(f"cosimplicial-simplicial identities fail: {bad[:5]}")
        return self

    @property
    def bounds_declared(self) -> bool:
        return self.qv is not None and self.pv is not None

    # -- constructors ----------------------------------------------------
    @classmethod
    def constant(cls, ring: Coefficients, Q: int, P: int, rank: int = 1) -> "CsModule":
        I = SparseMat.identity(rank, ring)
        ranks = {(q, p): rank for q in range(Q + 1) for p in range(P + 1)}
        faces, degens, cofaces, codegens = {}, {}, {}, {}
        for q, p in ranks:
            for i in range(p + 1):
                if p >= 1:
                    faces[(q, p, i)] = I
                if p < P:
                    degens[(q, p, i)] = I
            if q < Q:
                for i in range(q + 2):
                    cofaces[(q, p, i)] = I
                for i in range(q + 1):
                    codegens[(q, p, i)] = I
        return cls(ring, Q, P, ranks, faces, degens, cofaces, codegens, qv=0, pv=0)

    @classmethod
    def from_simplicial(cls, M: SimplicialModule, Q: int, pv: int | None = None) -> "CsModule":
        """Constant in the cosimplicial direction."""
        P = M.N
        ranks = {(q, p): M.ranks[p] for q in range(Q + 1) for p in range(P + 1)}
        faces = {(q, p, i): m for q in range(Q + 1) for (p, i), m in M.faces.items()}
        degens = {(q, p, i): m for q in range(Q + 1) for (p, i), m in M.degens.items()}
        cofaces, codegens = {}, {}
        for q in range(Q):
            for p in range(P + 1):
                I = SparseMat.identity(M.ranks[p], M.ring)
                for i in range(q + 2):
                    cofaces[(q, p, i)] = I
                for i in range(q + 1):
                    codegens[(q, p, i)] = I
        return cls(M.ring, Q, P, ranks, faces, degens, cofaces, codegens, qv=0, pv=pv)

    @classmethod
    def from_cosimplicial(cls, K: CosimplicialModule, P: int, qv: int | None = None) -> "CsModule":
        """Constant in the simplicial direction."""
        Q = K.N
        ranks = {(q, p): K.ranks[q] for q in range(Q + 1) for p in range(P + 1)}
        cofaces = {(q, p, i): m for p in range(P + 1) for (q, i), m in K.cofaces.items()}
        codegens = {(q, p, i): m for p in range(P + 1) for (q, i), m in K.codegens.items()}
        faces, degens = {}, {}
        for q in range(Q + 1):
            I = SparseMat.identity(K.ranks[q], K.ring)
            for p in range(P + 1):
                for i in range(p + 1):
                    if p >= 1:
                        faces[(q, p, i)] = I
                    if p < P:
                        degens[(q, p, i)] = I
        return cls(K.ring, Q, P, ranks, faces, degens, cofaces, codegens, qv=qv, pv=0)


@dataclass(frozen=True, eq=False)
class CsMap:
    """Cellwise matrices commuting with all structure maps."""

    source: CsModule
    target: CsModule
    mats: dict

    def __post_init__(self):
        S, T = self.source, self.target
        if (S.Q, S.P) != (T.Q, T.P):
            raise WindowError(f"windows {(S.Q, S.P)} and {(T.Q, T.P)} differ")

    def at(self, q: int, p: int) -> SparseMat:
        m = self.mats.get((q, p))
        if m is None:
            return SparseMat.zero(self.target.rank(q, p), self.source.rank(q, p), self.source.ring)
        return m

    def violations(self) -> list:
        S, T = self.source, self.target
        bad = []
        for key, m in S.faces.items():
            q, p, _ = key
            if T.faces[key] @ self.at(q, p) != self.at(q, p - 1) @ m:
                bad.append(("face", key))
        for key, m in S.degens.items():
            q, p, _ = key
            if T.degens[key] @ self.at(q, p) != self.at(q, p + 1) @ m:
                bad.append(("degen", key))
        for key, m in S.cofaces.items():
            q, p, _ = key
            if T.cofaces[key] @ self.at(q, p) != self.at(q + 1, p) @ m:
                bad.append(("coface", key))
        for key, m in S.codegens.items():
            q, p, _ = key
            if T.codegens[key] @ self.at(q + 1, p) != self.at(q, p) @ m:
                bad.append(("codegen", key))
        return bad

    def check(self) -> "CsMap":
        bad = self.violations()
        if bad:
            raise ValueError(f"map does not commute with structure maps: {bad[:5]}")
        return self

    def compose(self, other: "CsMap") -> "CsMap":
        """self after other."""
        return CsMap(other.source, self.target, {c: self.at(*c) @ other.at(*c) for c in other.source.cells()})

    def is_levelwise_surjective(self) -> bool:
        from .exactlin import is_surjective
        for c in self.source.cells():
            if self.target.rank(*c) and not is_surjective(self.at(*c)):
                return False
        return True


@dataclass(frozen=True, eq=False)
class CsRing:
    """Weight pieces (each a CsModule) with a cellwise multiplication.

    ``mult(a, b, q, p, x, y)`` multiplies x in weight a and y in weight b at
    cell (q, p); vectors are sparse dicts.  Ungraded rings use weight 0 only
    when no grading is relevant.
    """

    ring: Coefficients
    pieces: dict
    mult: Callable | None = None
    name: str = ""

    @property
    def weights(self) -> list[int]:
        return sorted(self.pieces)

    def piece(self, w: int) -> CsModule:
        return self.pieces[w]

    def multiply(self, a: int, b: int, q: int, p: int, x: dict, y: dict) -> dict:
        if self.mult is None:
            raise ValueError(f"{self.name or 'ring'} has no multiplication")
        return self.mult(a, b, q, p, x, y)


@dataclass(frozen=True)
class QisVerdict:
    verdict: str
    source: CohomologyTable
    target: CohomologyTable
    cone: CohomologyTable
    trusted_window: tuple | None

    def __post_init__(self):
        if self.verdict not in ("equivalent", "not_equivalent", "inconclusive"):
            raise ValueError(self.verdict)


# ---------------------------------------------------------------------------
# double denormalization
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _act(sigma: tuple, theta: tuple):
    """Factor sigma . theta; kind 'id', 'd' (image misses 0 only) or None."""
    eps, image = epi_mono(compose(sigma, theta))
    k = sigma[-1]
    if len(image) == k + 1:
        return eps, "id"
    if image == tuple(range(1, k + 1)):
        return eps, "d"
    return None, None


def _dd_basis(q: int, p: int, dims: dict) -> list[tuple]:
    out = []
    for (k, l), r in sorted(dims.items()):
        if r and k <= q and l <= p:
            for sigma in surjections(q, k):
                for tau in surjections(p, l):
                    out += [(sigma, tau, b) for b in range(r)]
    return out


def double_denormalize(cells: dict, dh: dict, dv: dict, Q: int, P: int, ring: Coefficients = ZZ) -> CsModule:
    """Cosimplicial-simplicial module whose normalized bicomplex is (cells, dh, dv).

    ``cells[(k, l)]`` ranks, ``dh[(k, l)]``: (k, l) -> (k+1, l),
    ``dv[(k, l)]``: (k, l) -> (k, l-1); the squares must commute.
    """
    dims = {c: r for c, r in cells.items() if r}
    basis = {(q, p): _dd_basis(q, p, dims) for q in range(Q + 1) for p in range(P + 1)}
    pos = {c: {x: a for a, x in enumerate(b)} for c, b in basis.items()}
    ranks = {c: len(b) for c, b in basis.items()}

    def zero(k, l, k2, l2):
        return SparseMat.zero(dims.get((k2, l2), 0), dims.get((k, l), 0), ring)

    def vmat(k, l):
        return dv.get((k, l)) or zero(k, l, k, l - 1)

    def hmat(k, l):
        return dh.get((k, l)) or zero(k, l, k + 1, l)

    def simp_op(theta, q, p_src, p_dst):
        ent = {}
        dst = pos[(q, p_dst)]
        for col, (sigma, tau, b) in enumerate(basis[(q, p_src)]):
            eps, kind = _act(tau, theta)
            if kind == "id":
                ent[(dst[(sigma, eps, b)], col)] = 1
            elif kind == "d":
                k, l = sigma[-1], tau[-1]
                for (i, j), v in vmat(k, l).entries.items():
                    if j == b:
                        ent[(dst[(sigma, eps, i)], col)] = v
        return SparseMat(ranks[(q, p_dst)], ranks[(q, p_src)], ent, ring)

    def cof(q, p, i):
        # d^i: (q, p) -> (q+1, p), dual to the Gamma face along delta^i
        ent = {}
        src = pos[(q, p)]
        theta = coface(q + 1, i)
        for row, (sigma, tau, a) in enumerate(basis[(q + 1, p)]):
            eps, kind = _act(sigma, theta)
            if kind == "id":
                ent[(row, src[(eps, tau, a)])] = 1
            elif kind == "d":
                k, l = sigma[-1], tau[-1]
                for (r, j), v in hmat(k - 1, l).entries.items():
                    if r == a:
                        ent[(row, src[(eps, tau, j)])] = v
        return SparseMat(ranks[(q + 1, p)], ranks[(q, p)], ent, ring)

    def codeg(q, p, i):
        # s^i: (q+1, p) -> (q, p); (sigma, .) at q pairs with sigma . sigma^i at q+1
        ent = {}
        src = pos[(q + 1, p)]
        theta = codegeneracy(q, i)
        for row, (sigma, tau, b) in enumerate(basis[(q, p)]):
            ent[(row, src[(compose(sigma, theta), tau, b)])] = 1
        return SparseMat(ranks[(q, p)], ranks[(q + 1, p)], ent, ring)

    faces, degens, cofaces, codegens = {}, {}, {}, {}
    for q in range(Q + 1):
        for p in range(P + 1):
            for i in range(p + 1):
                if p >= 1:
                    faces[(q, p, i)] = simp_op(coface(p, i), q, p, p - 1)
                if p < P:
                    degens[(q, p, i)] = simp_op(codegeneracy(p, i), q, p, p + 1)
            if q < Q:
                for i in range(q + 2):
                    cofaces[(q, p, i)] = cof(q, p, i)
                for i in range(q + 1):
                    codegens[(q, p, i)] = codeg(q, p, i)
    qv = max((k for k, _ in dims), default=0)
    pv = max((l for _, l in dims), default=0)
    return CsModule(ring, Q, P, ranks, faces, degens, cofaces, codegens, qv=qv, pv=pv, labels=basis)


# ---------------------------------------------------------------------------
# normalization and Tot
# ---------------------------------------------------------------------------


@dataclass
class _Normalized:
    bicomplex: Bicomplex
    subs: dict
    quots: dict

    def project(self, c, vec_ambient: SparseMat) -> SparseMat:
        return self.quots[c].P @ self.subs[c].coords(vec_ambient)

    def lift(self, c) -> SparseMat:
        return self.subs[c].B @ self.quots[c].S


def _normalize_cs(A: CsModule) -> _Normalized:
    R = A.ring
    subs = {}
    for q, p in A.cells():
        if q == 0:
            S = SparseMat.zero(0, A.rank(q, p), R)
        else:
            S = A.codegens[(q - 1, p, 0)]
            for i in range(1, q):
                S = S.vstack(A.codegens[(q - 1, p, i)])
        subs[(q, p)] = _Sub(A.rank(q, p), S, R)
    # simplicial degeneracies restricted to the cosimplicial normalization
    quots = {}
    for q, p in A.cells():
        n = subs[(q, p)].dim
        D = SparseMat.zero(n, 0, R)
        if p >= 1:
            for i in range(p):
                D = D.hstack(subs[(q, p)].coords(A.degens[(q, p - 1, i)] @ subs[(q, p - 1)].B))
        quots[(q, p)] = _Quotient(n, D, R)
    cells = {c: quots[c].P.rows for c in A.cells()}
    dh, dv = {}, {}
    for q, p in A.cells():
        if not cells[(q, p)]:
            continue
        lift = subs[(q, p)].B @ quots[(q, p)].S
        if q < A.Q and cells[(q + 1, p)]:
            dd = _alt_sum([A.cofaces[(q, p, i)] for i in range(q + 2)])
            dh[(q, p)] = quots[(q + 1, p)].P @ subs[(q + 1, p)].coords(dd @ lift)
        if p >= 1 and cells[(q, p - 1)]:
            bd = _alt_sum([A.faces[(q, p, i)] for i in range(p + 1)])
            dv[(q, p)] = quots[(q, p - 1)].P @ subs[(q, p - 1)].coords(bd @ lift)
    if A.bounds_declared and A.qv <= A.Q and A.pv <= A.P:
        for c, r in cells.items():
            if r and (c[0] > A.qv or c[1] > A.pv):
                raise ValueError(f"declared vanishing bounds violated at cell {c}")
        incomplete = frozenset()
    else:
        # nothing is certified: flag every total degree in (and next to) the window
        incomplete = frozenset((q, -1) for q in range(-A.P - 2, A.Q + 3))
    B = Bicomplex(R, cells, dh, dv, incomplete=incomplete)
    return _Normalized(B, subs, quots)


def normalized_bicomplex(A: CsModule) -> Bicomplex:
    return _normalize_cs(A).bicomplex


def tot_pi(A: CsModule) -> CochainComplex:
    """Product totalization of the doubly normalized bicomplex."""
    return tot_product(normalized_bicomplex(A))


def _layout(B: Bicomplex) -> dict:
    out: dict = {}
    for (q, p) in sorted(B.cells):
        out.setdefault(q - p, []).append((q, p))
    return out


def tot_map(f: CsMap) -> ChainMap:
    """Induced chain map on product totalizations."""
    ns, nt = _normalize_cs(f.source), _normalize_cs(f.target)
    Ts, Tt = tot_product(ns.bicomplex), tot_product(nt.bicomplex)
    ls, lt = _layout(ns.bicomplex), _layout(nt.bicomplex)
    R = f.source.ring
    mats = {}
    for n in sorted(set(ls) | set(lt)):
        src, dst = ls.get(n, []), lt.get(n, [])
        blocks = {}
        for a, c in enumerate(src):
            if c in dst:
                blocks[(dst.index(c), a)] = nt.project(c, f.at(*c) @ ns.lift(c))
        mats[n] = SparseMat.block(blocks, [nt.bicomplex.rank(*c) for c in dst], [ns.bicomplex.rank(*c) for c in src], R)
    return ChainMap(Ts, Tt, mats)


def is_completed_qis(f: CsMap) -> QisVerdict:
    """Compare Tot of source and target and test the induced map via its cone."""
    g = tot_map(f)
    C = cone(g)
    lo = min(g.source.lo, g.target.lo) - 1
    hi = max(g.source.hi, g.target.hi) + 1
    degs = range(lo, hi + 1)
    hs, ht, hc = cohomology(g.source, degs), cohomology(g.target, degs), cohomology(C, degs)
    trusted = sorted(n for n in degs if n in hs.trusted and n in ht.trusted and n in hc.trusted)
    if not trusted:
        verdict = "inconclusive"
    elif any(not hc[n].is_zero for n in trusted):
        verdict = "not_equivalent"
    elif len(trusted) == len(degs):
        verdict = "equivalent"
    else:
        verdict = "inconclusive"
    window = (trusted[0], trusted[-1]) if trusted else None
    return QisVerdict(verdict, hs, ht, hc, window)


# ---------------------------------------------------------------------------
# sums, tensors, Sym
# ---------------------------------------------------------------------------


def _check_windows(*As: CsModule):
    w = {(A.Q, A.P) for A in As}
    if len(w) != 1:
        raise WindowError(f"windows differ: {sorted(w)}")


def _bound(vals, op):
    if any(v is None for v in vals):
        return None
    return op(vals)


def cs_direct_sum(*As: CsModule) -> CsModule:
    _check_windows(*As)
    A0 = As[0]
    R = A0.ring

    def blk(key, src, dst, attr):
        return SparseMat.block(
            {(k, k): getattr(A, attr)[key] for k, A in enumerate(As)},
            [A.rank(*dst) for A in As],
            [A.rank(*src) for A in As],
            R,
        )

    ranks = {c: sum(A.rank(*c) for A in As) for c in A0.cells()}
    faces = {k: blk(k, k[:2], (k[0], k[1] - 1), "faces") for k in A0.faces}
    degens = {k: blk(k, k[:2], (k[0], k[1] + 1), "degens") for k in A0.degens}
    cofaces = {k: blk(k, k[:2], (k[0] + 1, k[1]), "cofaces") for k in A0.cofaces}
    codegens = {k: blk(k, (k[0] + 1, k[1]), k[:2], "codegens") for k in A0.codegens}
    return CsModule(
        R, A0.Q, A0.P, ranks, faces, degens, cofaces, codegens,
        qv=_bound([A.qv for A in As], max), pv=_bound([A.pv for A in As], max),
    )


def cs_tensor(A: CsModule, B: CsModule) -> CsModule:
    """Levelwise tensor product in both directions (basis order: A-index major)."""
    _check_windows(A, B)
    if A.ring != B.ring:
        raise LinAlgError("ring mismatch")
    ranks = {c: A.rank(*c) * B.rank(*c) for c in A.cells()}
    faces = {k: A.faces[k].kron(B.faces[k]) for k in A.faces}
    degens = {k: A.degens[k].kron(B.degens[k]) for k in A.degens}
    cofaces = {k: A.cofaces[k].kron(B.cofaces[k]) for k in A.cofaces}
    codegens = {k: A.codegens[k].kron(B.codegens[k]) for k in A.codegens}
    return CsModule(
        A.ring, A.Q, A.P, ranks, faces, degens, cofaces, codegens,
        qv=_bound([A.qv, B.qv], sum), pv=_bound([A.pv, B.pv], sum),
    )


def cs_sym(A: CsModule, w: int) -> CsModule:
    """Levelwise weight-w free commutative ring; normalized bounds scale by w."""
    R = A.ring
    monos = {c: sym_monomials(A.rank(*c), w) for c in A.cells()}
    index = {c: {m: a for a, m in enumerate(ms)} for c, ms in monos.items()}

    def lift(mats, dst_of, src_of):
        return {k: _sym_map(m, monos[src_of(k)], index[dst_of(k)], R) for k, m in mats.items()}

    faces = lift(A.faces, lambda k: (k[0], k[1] - 1), lambda k: k[:2])
    degens = lift(A.degens, lambda k: (k[0], k[1] + 1), lambda k: k[:2])
    cofaces = lift(A.cofaces, lambda k: (k[0] + 1, k[1]), lambda k: k[:2])
    codegens = lift(A.codegens, lambda k: k[:2], lambda k: (k[0] + 1, k[1]))
    ranks = {c: len(m) for c, m in monos.items()}
    qv = None if A.qv is None else A.qv * w
    pv = None if A.pv is None else A.pv * w
    return CsModule(R, A.Q, A.P, ranks, faces, degens, cofaces, codegens, qv=qv, pv=pv, labels=monos)


def sym_ring(A: CsModule, max_weight: int, name: str = "") -> CsRing:
    """Levelwise free commutative ring on A, weights 0..max_weight, product by monomial concatenation."""
    pieces = {w: cs_sym(A, w) for w in range(max_weight + 1)}
    R = A.ring

    def mult(a, b, q, p, x, y):
        la, lb = pieces[a].labels[(q, p)], pieces[b].labels[(q, p)]
        idx = {m: k for k, m in enumerate(pieces[a + b].labels[(q, p)])}
        out: dict = {}
        for i, u in x.items():
            for j, v in y.items():
                k = idx[tuple(sorted(la[i] + lb[j]))]
                out[k] = R.add(out.get(k, R.zero()), R.mul(u, v))
        return {k: v for k, v in out.items() if not R.is_zero(v)}

    return CsRing(R, pieces, mult, name)


# ---------------------------------------------------------------------------
# cotensors with finite simplicial sets
# ---------------------------------------------------------------------------


def cotensor(A: CsModule, K: FiniteSimplicialSet) -> CsModule:
    """(A^K)^q_p = (A^q_p)^{K_q}; basis ordered by (simplex of K, basis of A)."""
    R = A.ring
    simp = {q: K.simplices(q) for q in range(A.Q + 2)}
    spos = {q: {x: a for a, x in enumerate(s)} for q, s in simp.items()}
    ranks = {(q, p): len(simp[q]) * A.rank(q, p) for q, p in A.cells()}

    def diag(m, q):
        n = len(simp[q])
        return SparseMat.identity(n, R).kron(m)

    faces = {(q, p, i): diag(m, q) for (q, p, i), m in A.faces.items()}
    degens = {(q, p, i): diag(m, q) for (q, p, i), m in A.degens.items()}
    cofaces, codegens = {}, {}
    for (q, p, i), m in A.cofaces.items():
        # (d^i f)(y) = d^i_A f(y . delta^i) for y in K_{q+1}
        theta = coface(q + 1, i)
        sel = {(a, spos[q][K.act(theta, y)]): 1 for a, y in enumerate(simp[q + 1])}
        cofaces[(q, p, i)] = SparseMat(len(simp[q + 1]), len(simp[q]), sel, R).kron(m)
    for (q, p, i), m in A.codegens.items():
        # (s^i f)(y) = s^i_A f(y . sigma^i) for y in K_q
        theta = codegeneracy(q, i)
        sel = {(a, spos[q + 1][K.act(theta, y)]): 1 for a, y in enumerate(simp[q])}
        codegens[(q, p, i)] = SparseMat(len(simp[q]), len(simp[q + 1]), sel, R).kron(m)
    qv = None if A.qv is None else A.qv + K.dim
    labels = {c: [(x, b) for x in simp[c[0]] for b in range(A.rank(*c))] for c in A.cells()}
    return CsModule(R, A.Q, A.P, ranks, faces, degens, cofaces, codegens, qv=qv, pv=A.pv, labels=labels)


def cotensor_ring(A: CsRing, K: FiniteSimplicialSet) -> CsRing:
    """Product ring levelwise: multiplication is componentwise over simplices of K."""
    pieces = {w: cotensor(M, K) for w, M in A.pieces.items()}

    def mult(a, b, q, p, x, y):
        na, nb = A.pieces[a].rank(q, p), A.pieces[b].rank(q, p)
        nc = A.pieces[a + b].rank(q, p)
        out = {}
        for s in range(len(K.simplices(q))):
            xs = {i - s * na: v for i, v in x.items() if s * na <= i < (s + 1) * na}
            ys = {i - s * nb: v for i, v in y.items() if s * nb <= i < (s + 1) * nb}
            if xs and ys:
                for k, v in A.multiply(a, b, q, p, xs, ys).items():
                    out[k + s * nc] = v
        return out

    return CsRing(A.ring, pieces, mult if A.mult else None, f"{A.name}^{K.name}")


def cotensor_map_constant(A: CsModule, K: FiniteSimplicialSet) -> CsMap:
    """A = A^{Delta0} -> A^K induced by K -> Delta0 (constant functions)."""
    AK = cotensor(A, K)
    R = A.ring
    mats = {}
    for q, p in A.cells():
        n = len(K.simplices(q))
        ones = SparseMat(n, 1, {(a, 0): 1 for a in range(n)}, R)
        mats[(q, p)] = ones.kron(SparseMat.identity(A.rank(q, p), R))
    return CsMap(A, AK, mats)


def cotensor_restrict(A: CsModule, K: FiniteSimplicialSet, L: FiniteSimplicialSet) -> CsMap:
    """A^K -> A^L for L a simplicial subset of K (restriction of functions)."""
    AK, AL = cotensor(A, K), cotensor(A, L)
    R = A.ring
    mats = {}
    for q, p in A.cells():
        kpos = {x: a for a, x in enumerate(K.simplices(q))}
        sel = {(b, kpos[x]): 1 for b, x in enumerate(L.simplices(q))}
        mats[(q, p)] = SparseMat(len(L.simplices(q)), len(kpos), sel, R).kron(SparseMat.identity(A.rank(q, p), R))
    return CsMap(AK, AL, mats)


def finite_cochains(K: FiniteSimplicialSet, ring: Coefficients = ZZ) -> CochainComplex:
    """Normalized cochains of K (degrees 0..dim K)."""
    cells = {j: K.nondegenerate(j) for j in range(K.dim + 1)}
    ranks = {j: len(c) for j, c in cells.items()}
    diffs = {}
    for j in range(K.dim):
        pos = {x: a for a, x in enumerate(cells[j])}
        ent = {}
        for b, y in enumerate(cells[j + 1]):
            for i in range(j + 2):
                face = K.act(coface(j + 1, i), y)
                if face in pos:
                    a = pos[face]
                    ent[(b, a)] = ent.get((b, a), 0) + (-1) ** i
        diffs[j] = SparseMat(ranks[j + 1], ranks[j], ent, ring)
    return CochainComplex(ring, ranks, diffs)


def finite_limit(E: CochainComplex, K: FiniteSimplicialSet) -> CochainComplex:
    """E^K for a finite simplicial set: E tensored with normalized cochains of K."""
    return tensor(E, finite_cochains(K, E.ring))


# ---------------------------------------------------------------------------
# the functor phi and Sym^Delta
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _nondeg(n: int, j: int) -> tuple:
    """Injective maps [j] -> [n]."""
    return tuple(combinations(range(n + 1), j + 1))


def _push_chains(theta: tuple, n: int, m: int, j: int, ring) -> SparseMat:
    """N_j(Delta^n) -> N_j(Delta^m) along theta: [n] -> [m]; degenerate images vanish."""
    src, dst = _nondeg(n, j), _nondeg(m, j)
    pos = {x: a for a, x in enumerate(dst)}
    ent = {}
    for b, x in enumerate(src):
        y = tuple(theta[v] for v in x)
        if len(set(y)) == len(y):
            ent[(pos[y], b)] = 1
    return SparseMat(len(dst), len(src), ent, ring)


def _chain_boundary(n: int, j: int, ring) -> SparseMat:
    """N_j(Delta^n) -> N_{j-1}(Delta^n)."""
    src, dst = _nondeg(n, j), _nondeg(n, j - 1)
    pos = {x: a for a, x in enumerate(dst)}
    ent = {}
    for b, x in enumerate(src):
        for i in range(j + 1):
            ent[(pos[x[:i] + x[i + 1:]], b)] = (-1) ** i
    return SparseMat(len(dst), len(src), ent, ring)


def _simplex_complex(n: int, ring, cochains: bool) -> tuple[dict, dict]:
    """Cohomologically graded normalized (co)chains of Delta^n as (ranks, diffs)."""
    ranks, diffs = {}, {}
    for j in range(n + 1):
        r = len(_nondeg(n, j))
        if cochains:
            ranks[j] = r
            if j >= 1:
                diffs[j - 1] = _chain_boundary(n, j, ring).transpose()
        else:
            ranks[-j] = r
            if j >= 1:
                diffs[-j] = _chain_boundary(n, j, ring)
    return ranks, diffs


def _phi_complex(q: int, p: int, E: CochainComplex) -> CochainComplex:
    R = E.ring
    co = CochainComplex(R, *_simplex_complex(p, R, cochains=True))
    ch = CochainComplex(R, *_simplex_complex(q, R, cochains=False))
    return tensor(tensor(co, ch), E)


def _phi_map(E: CochainComplex, q: int, p: int, q2: int, p2: int, cotheta: tuple | None, theta: tuple | None) -> dict:
    """Chain map X(q, p) -> X(q2, p2) in degrees -1 and 0.

    ``cotheta``: [q] -> [q2] acting on chains; ``theta``: [p2] -> [p] acting on cochains.
    """
    R = E.ring
    out = {}
    for deg in (-1, 0):
        blocks = {}
        src_layout = _tensor_layout(q, p, E, deg)
        dst_layout = _tensor_layout(q2, p2, E, deg)
        for a, (j, k, e) in enumerate(src_layout):
            b_key = (j, k, e)
            if b_key not in dst_layout:
                continue
            b = dst_layout.index(b_key)
            # cochain part: degree j on Delta^p pulled back along theta
            if theta is None:
                cm = SparseMat.identity(len(_nondeg(p, j)), R)
            else:
                cm = _push_chains(theta, p2, p, j, R).transpose()
            if cotheta is None:
                hm = SparseMat.identity(len(_nondeg(q, k)), R)
            else:
                hm = _push_chains(cotheta, q, q2, k, R)
            blocks[(b, a)] = cm.kron(hm).kron(SparseMat.identity(E.rank(e), R))
        out[deg] = SparseMat.block(
            blocks,
            [len(_nondeg(p2, j)) * len(_nondeg(q2, k)) * E.rank(e) for j, k, e in dst_layout],
            [len(_nondeg(p, j)) * len(_nondeg(q, k)) * E.rank(e) for j, k, e in src_layout],
            R,
        )
    return out


def _tensor_layout(q: int, p: int, E: CochainComplex, deg: int) -> list[tuple]:
    """Block order of tensor(tensor(cochains(Delta^p), chains(Delta^q)), E) in degree deg.

    Matches ``complexes.tensor``: blocks ordered by the left factor's degree,
    recursively.  Entries are (cochain degree j, chain degree k, E degree e).
    """
    out = []
    left_degs = sorted({j - k for j in range(p + 1) for k in range(q + 1)})
    for ld in left_degs:
        e = deg - ld
        if not E.rank(e):
            continue
        for j in range(p + 1):
            k = j - ld
            if 0 <= k <= q:
                out.append((j, k, e))
    return out


def _phi_cell(q: int, p: int, E: CochainComplex):
    X = _phi_complex(q, p, E)
    d = X.d(-1)
    n = X.rank(0)
    R = E.ring
    if R.is_field:
        return _Quotient(n, d, R)
    diag, _, _ = smith_normal_form(d)
    if any(abs(v) > 1 for v in diag if v):
        raise LinAlgError(f"phi cell {(q, p)} has torsion")
    return _Quotient(n, d, R)


def phi(E: CochainComplex, Q: int, P: int) -> CsModule:
    """Cells (q, p) = degree-0 part of cochains(Delta^p) x chains(Delta^q) x E modulo image of degree -1."""
    if not E.ranks:
        raise ValueError("E must be nonzero and bounded")
    R = E.ring
    quots = {(q, p): _phi_cell(q, p, E) for q in range(Q + 1) for p in range(P + 1)}
    ranks = {c: Qt.P.rows for c, Qt in quots.items()}

    def induced(c1, c2, m0):
        return quots[c2].P @ m0 @ quots[c1].S

    faces, degens, cofaces, codegens = {}, {}, {}, {}
    for q in range(Q + 1):
        for p in range(P + 1):
            for i in range(p + 1):
                if p >= 1:
                    m = _phi_map(E, q, p, q, p - 1, None, coface(p, i))[0]
                    faces[(q, p, i)] = induced((q, p), (q, p - 1), m)
                if p < P:
                    m = _phi_map(E, q, p, q, p + 1, None, codegeneracy(p, i))[0]
                    degens[(q, p, i)] = induced((q, p), (q, p + 1), m)
            if q < Q:
                for i in range(q + 2):
                    m = _phi_map(E, q, p, q + 1, p, coface(q + 1, i), None)[0]
                    cofaces[(q, p, i)] = induced((q, p), (q + 1, p), m)
                for i in range(q + 1):
                    m = _phi_map(E, q + 1, p, q, p, codegeneracy(q, i), None)[0]
                    codegens[(q, p, i)] = induced((q + 1, p), (q, p), m)
    # The normalized cells form an unbounded diagonal staircase with unit
    # links, so no finite window certifies Tot: bounds stay undeclared.
    return CsModule(R, Q, P, ranks, faces, degens, cofaces, codegens)


def sym_delta(E: CochainComplex, max_weight: int, Q: int, P: int) -> CsRing:
    """Levelwise free commutative ring on phi(E), weights 0..max_weight."""
    return sym_ring(phi(E, Q, P), max_weight, name="SymDelta")


# ---------------------------------------------------------------------------
# path objects
# ---------------------------------------------------------------------------


def path_object(A: CsModule) -> tuple[CsMap, CsMap]:
    """A -> A^{Delta1} -> A^{dDelta1} = A x A."""
    return cotensor_map_constant(A, DELTA1), cotensor_restrict(A, DELTA1, BOUNDARY_DELTA1)


# ---------------------------------------------------------------------------
# random instances
# ---------------------------------------------------------------------------


def _random_unimodular(n: int, rng: random.Random, steps: int = 6) -> list[list[int]]:
    M = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(steps if n > 1 else 0):
        i, j = rng.sample(range(n), 2)
        c = rng.choice([-2, -1, 1, 2])
        for k in range(n):
            M[i][k] += c * M[j][k]
    return M


def _random_complex(rng: random.Random, lo: int, hi: int, ring: Coefficients) -> CochainComplex:
    """Sum of shifted ring and elementary two-term pieces, in a scrambled basis."""
    ranks = {n: 0 for n in range(lo, hi + 1)}
    pieces = []
    for n in range(lo, hi + 1):
        for _ in range(rng.randint(0, 1)):
            pieces.append((n, None))
        if n < hi and rng.random() < 0.6:
            pieces.append((n, rng.choice([1, 1, 2, 3]) if ring.kind == "Z" else 1))
    if not pieces:
        pieces.append((lo, None))
    idx = {n: [] for n in ranks}
    for n, m in pieces:
        idx[n].append(len(idx[n]))
        if m is not None:
            idx[n + 1].append(len(idx[n + 1]))
    ranks = {n: len(v) for n, v in idx.items()}
    # differential on the standard basis
    counters = {n: 0 for n in ranks}
    std = {n: {} for n in ranks}
    for n, m in pieces:
        a = counters[n]
        counters[n] += 1
        if m is not None:
            b = counters[n + 1]
            counters[n + 1] += 1
            std[n][(b, a)] = m
    # conjugate by random unimodular changes of basis
    U = {n: SparseMat.from_dense(_random_unimodular(r, rng), ring) if r else SparseMat.zero(0, 0, ring) for n, r in ranks.items()}
    diffs = {}
    for n in ranks:
        if n + 1 in ranks:
            D = SparseMat(ranks[n + 1], ranks[n], std[n], ring)
            Uinv = solve(U[n], SparseMat.identity(ranks[n], ring)) if ranks[n] else U[n]
            diffs[n] = U[n + 1] @ D @ Uinv
    return CochainComplex(ring, ranks, diffs)


def _tensor_bicomplex(H: CochainComplex, V: CochainComplex, ring: Coefficients):
    """Cells H^k x V_l with V_l stored in cohomological degree -l."""
    cells = {(k, l): H.rank(k) * V.rank(-l) for k in H.ranks for l in range(-V.lo + 1)}
    dh, dv = {}, {}
    for (k, l) in cells:
        dh[(k, l)] = H.d(k).kron(SparseMat.identity(V.rank(-l), ring))
        dv[(k, l)] = SparseMat.identity(H.rank(k), ring).kron(V.d(-l))
    return cells, dh, dv


def bicomplex_sum(parts: list, ring: Coefficients):
    """Block-diagonal sum of (cells, dh, dv) triples."""
    keys = sorted(set().union(*(c for c, _, _ in parts)))
    cells = {c: sum(pc.get(c, 0) for pc, _, _ in parts) for c in keys}
    dh, dv = {}, {}
    for store, attr, step in ((dh, 1, (1, 0)), (dv, 2, (0, -1))):
        for c in keys:
            dst = (c[0] + step[0], c[1] + step[1])
            if not cells.get(dst):
                continue
            blocks = {}
            for a, part in enumerate(parts):
                m = part[attr].get(c)
                if m is not None and part[0].get(c) and part[0].get(dst):
                    blocks[(a, a)] = m
            store[c] = SparseMat.block(blocks, [pc.get(dst, 0) for pc, _, _ in parts], [pc.get(c, 0) for pc, _, _ in parts], ring)
    return cells, dh, dv


def random_bicomplex(rng: random.Random, Qmax: int, Pmax: int, ring: Coefficients = ZZ):
    """Sum of two tensor products H x V, H in degrees [0, Qmax], V in homological [0, Pmax]."""
    parts = []
    for _ in range(2):
        H = _random_complex(rng, 0, rng.randint(0, Qmax), ring)
        V = _random_complex(rng, -rng.randint(0, Pmax), 0, ring)
        parts.append(_tensor_bicomplex(H, V, ring))
    return bicomplex_sum(parts, ring)


def random_cs_module(rng: random.Random, Q: int, P: int, ring: Coefficients = ZZ, Qmax: int = 2, Pmax: int = 2) -> CsModule:
    """Double denormalization of a random bicomplex; vanishing bounds are known exactly."""
    cells, dh, dv = random_bicomplex(rng, Qmax, Pmax, ring)
    return double_denormalize(cells, dh, dv, Q, P, ring)
