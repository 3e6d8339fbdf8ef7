"""Graded and mixed complexes, red-shift, Tate realizations, and the
cosimplicial-simplicial rings Z[u], Z[v], Z<u,v> with convolution.

Sign convention for mixed complexes: the mixed operator anticommutes with
the internal differential (d eps + eps d = 0).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from .complexes import ChainMap, CochainComplex, ComplexError, shift
from .cs_rings import CsModule, CsRing, cs_tensor
from .exactlin import ZZ, Coefficients, SparseMat, homology_coordinates, in_image, kernel_basis
from .simplicial import (
    FreeSimplicialRing,
    TruncationError,
    _Quotient,
    codenormal_operator,
    codenormalize,
    compose,
    denormalize,
    free_scr_homotopy,
    levelwise_sym,
    shuffles,
    surjections,
)

__all__ = [
    "GradedComplex",
    "MixedComplex",
    "FilteredComplex",
    "MixedError",
    "red_shift",
    "red_shift_inverse",
    "tate_realization",
    "mixed_to_filtered",
    "filtered_to_graded",
    "zu_piece",
    "zv_piece",
    "zu_ring",
    "build_zuv",
    "convolve",
    "red_shift_cs",
    "graded_tensor",
    "graded_product",
    "cup_product",
    "check_negative_weight_product",
    "NegativeWeightProduct",
]


class MixedError(ValueError):
    """Invalid mixed structure or unsound truncation."""


# ---------------------------------------------------------------------------
# graded / mixed / filtered complexes
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GradedComplex:
    ring: Coefficients
    pieces: dict

    @property
    def weights(self) -> list[int]:
        return sorted(self.pieces)

    def piece(self, w: int) -> CochainComplex:
        p = self.pieces.get(w)
        return p if p is not None else CochainComplex(self.ring, {})

    def same_as(self, other: "GradedComplex") -> bool:
        ws = set(self.pieces) | set(other.pieces)
        return all(self.piece(w).same_as(other.piece(w)) for w in ws)


@dataclass(frozen=True, eq=False)
class MixedComplex:
    """eps[(w, n)]: piece(w)^n -> piece(w+1)^{n+s}, s = -1 (flag minus) or +1 (plus)."""

    graded: GradedComplex
    eps: dict
    flag: str = "minus"

    def __post_init__(self):
        if self.flag not in ("minus", "plus"):
            raise MixedError(f"unknown flag {self.flag!r}")
        s = self.step
        G = self.graded
        clean = {}
        for (w, n), m in self.eps.items():
            if m.shape != (G.piece(w + 1).rank(n + s), G.piece(w).rank(n)):
                raise MixedError(f"eps at {(w, n)} has shape {m.shape}")
            if not m.is_zero():
                clean[(w, n)] = m
        object.__setattr__(self, "eps", clean)
        for (w, n), m in clean.items():
            if not (self.e(w + 1, n + s) @ m).is_zero():
                raise MixedError(f"eps^2 != 0 at {(w, n)}")
            anti = G.piece(w + 1).d(n + s) @ m + self.e(w, n + 1) @ G.piece(w).d(n)
            if not anti.is_zero():
                raise MixedError(f"d eps + eps d != 0 at {(w, n)}")

    @property
    def step(self) -> int:
        return -1 if self.flag == "minus" else 1

    @property
    def ring(self) -> Coefficients:
        return self.graded.ring

    @property
    def weights(self) -> list[int]:
        return self.graded.weights

    def e(self, w: int, n: int) -> SparseMat:
        m = self.eps.get((w, n))
        if m is None:
            G = self.graded
            return SparseMat.zero(G.piece(w + 1).rank(n + self.step), G.piece(w).rank(n), self.ring)
        return m

    def same_as(self, other: "MixedComplex") -> bool:
        if self.flag != other.flag or not self.graded.same_as(other.graded):
            return False
        keys = set(self.eps) | set(other.eps)
        return all(self.e(*k) == other.e(*k) for k in keys)


@dataclass(frozen=True, eq=False)
class FilteredComplex:
    """Decreasing filtration: stages[w] with inclusions[w]: stages[w+1] -> stages[w]."""

    ring: Coefficients
    stages: dict
    inclusions: dict = field(default_factory=dict)

    def __post_init__(self):
        from .exactlin import rank

        for w, f in self.inclusions.items():
            for n in f.source.degrees():
                m = f.at(n)
                if rank(m) != m.cols:
                    raise ComplexError(f"transition {w + 1} -> {w} is not injective in degree {n}")

    @property
    def indices(self) -> list[int]:
        return sorted(self.stages)


def red_shift(E: MixedComplex) -> MixedComplex:
    """piece(w) -> piece(w)[-2w]; flag minus becomes plus."""
    if E.flag != "minus":
        raise MixedError("red_shift needs a flag-minus mixed complex")
    pieces = {w: shift(C, -2 * w) for w, C in E.graded.pieces.items()}
    eps = {(w, n + 2 * w): m for (w, n), m in E.eps.items()}
    return MixedComplex(GradedComplex(E.ring, pieces), eps, "plus")


def red_shift_inverse(E: MixedComplex) -> MixedComplex:
    if E.flag != "plus":
        raise MixedError("red_shift_inverse needs a flag-plus mixed complex")
    pieces = {w: shift(C, 2 * w) for w, C in E.graded.pieces.items()}
    eps = {(w, n - 2 * w): m for (w, n), m in E.eps.items()}
    return MixedComplex(GradedComplex(E.ring, pieces), eps, "minus")


def _realization_layout(E: MixedComplex, weights: list[int]) -> dict:
    """Total degree -> list of (weight, internal degree)."""
    out: dict = {}
    for w in weights:
        C = E.graded.piece(w)
        off = 2 * w if E.flag == "minus" else 0
        for n in C.ranks:
            out.setdefault(n + off, []).append((w, n))
    return out


def tate_realization(E: MixedComplex, floor: int | None = None, ceiling: int | None = None) -> CochainComplex:
    """Sum over weights in [floor, ceiling] with total differential d + eps.

    Flag minus shifts weight p by [-2p]; flag plus shifts nothing.  A nonzero
    eps leaving the window makes the truncation unsound and raises.
    """
    ws = E.weights
    if not ws:
        return CochainComplex(E.ring, {})
    floor = min(ws) if floor is None else floor
    ceiling = max(ws) if ceiling is None else ceiling
    inside = [w for w in ws if floor <= w <= ceiling]
    for (w, n), m in E.eps.items():
        if floor <= w <= ceiling and w + 1 > ceiling:
            raise MixedError(f"eps leaves the weight window at weight {w}, degree {n}")
    layout = _realization_layout(E, inside)
    R = E.ring
    G = E.graded
    ranks = {t: sum(G.piece(w).rank(n) for w, n in cells) for t, cells in layout.items()}
    diffs = {}
    for t, src in layout.items():
        dst = layout.get(t + 1, [])
        if not dst:
            continue
        blocks = {}
        for a, (w, n) in enumerate(src):
            if (w, n + 1) in dst:
                blocks[(dst.index((w, n + 1)), a)] = G.piece(w).d(n)
            key = (w + 1, n + E.step)
            if key in dst:
                blocks[(dst.index(key), a)] = E.e(w, n)
        diffs[t] = SparseMat.block(blocks, [G.piece(w).rank(n) for w, n in dst], [G.piece(w).rank(n) for w, n in src], R)
    return CochainComplex(R, ranks, diffs)


def mixed_to_filtered(E: MixedComplex) -> FilteredComplex:
    """Stage w realizes the weights >= w; inclusions are block inclusions."""
    ws = E.weights
    if not ws:
        return FilteredComplex(E.ring, {})
    lo, hi = ws[0], ws[-1]
    stages = {w: tate_realization(E, w, hi) for w in range(lo, hi + 2)}
    R = E.ring
    inclusions = {}
    for w in range(lo, hi + 1):
        big = _realization_layout(E, [v for v in ws if v >= w])
        small = _realization_layout(E, [v for v in ws if v >= w + 1])
        mats = {}
        for t in set(big) | set(small):
            bcells, scells = big.get(t, []), small.get(t, [])
            ent = {}
            offs, o = {}, 0
            for c in bcells:
                offs[c] = o
                o += E.graded.piece(c[0]).rank(c[1])
            col = 0
            for c in scells:
                for k in range(E.graded.piece(c[0]).rank(c[1])):
                    ent[(offs[c] + k, col)] = 1
                    col += 1
            mats[t] = SparseMat(o, col, ent, R)
        inclusions[w] = ChainMap(stages[w + 1], stages[w], mats)
    return FilteredComplex(R, stages, inclusions)


def filtered_to_graded(F: FilteredComplex) -> GradedComplex:
    """gr^w = F^w / F^{w+1}, using the image of the transition map."""
    R = F.ring
    pieces = {}
    for w, f in F.inclusions.items():
        big = F.stages[w]
        quots = {}
        for n in big.degrees():
            quots[n] = _Quotient(big.rank(n), f.at(n) if n in f.mats else SparseMat.zero(big.rank(n), 0, R), R)
        ranks = {n: q.P.rows for n, q in quots.items()}
        diffs = {n: quots[n + 1].P @ big.d(n) @ quots[n].S for n in quots if n + 1 in quots}
        pieces[w] = CochainComplex(R, ranks, diffs)
    return GradedComplex(R, pieces)


# ---------------------------------------------------------------------------
# Z[u], Z[v], Z<u,v>
# ---------------------------------------------------------------------------


def _eta(nu: tuple, top: int) -> tuple:
    """Surjection [top] ->> [top - len(nu)] of the degeneracy string s_{nu_k} ... s_{nu_1}."""
    out = list(range(top + 1))
    for i in reversed(nu):
        out = [v if v <= i else v - 1 for v in out]
    return tuple(out)


@lru_cache(maxsize=None)
def zu_product_table(a: int, b: int, q: int) -> dict:
    """Level-q product K(Z[-2a]) x K(Z[-2b]) -> K(Z[-2(a+b)]) on surjection bases.

    Dual to tau -> sum over shuffles of sign (eta_nu tau) x (eta_mu tau).
    Returns {(left, right): {tau: coefficient}}.
    """
    pa, pb = 2 * a, 2 * b
    top = pa + pb
    table: dict = {}
    shuf = [(mu, nu, sg) for mu, nu, sg in shuffles(pa, pb)]
    etas = {}
    for mu, nu, sg in shuf:
        etas[(mu, nu)] = (_eta(nu, top), _eta(mu, top))
    for tau in surjections(q, top):
        for mu, nu, sg in shuf:
            en, em = etas[(mu, nu)]
            left, right = compose(en, tau), compose(em, tau)
            slot = table.setdefault((left, right), {})
            slot[tau] = slot.get(tau, 0) + sg
    return {k: {t: c for t, c in v.items() if c} for k, v in table.items()}


def zu_piece(n: int, Q: int, P: int, ring: Coefficients = ZZ) -> CsModule:
    """Weight-n part of Z[u]: the cosimplicial denormalization of ring[-2n], constant in p."""
    K = codenormalize(CochainComplex.concentrated(ring, 2 * n), Q)
    return CsModule.from_cosimplicial(K, P, qv=2 * n)


def zv_piece(n: int, Q: int, P: int, ring: Coefficients = ZZ) -> CsModule:
    """Weight-(-n) part of Z[v]: levelwise Sym^n of Gamma(ring[2]), constant in q."""
    M = denormalize(CochainComplex.concentrated(ring, -2), P)
    return CsModule.from_simplicial(levelwise_sym(M, n), Q, pv=2 * n)


def _gamma_labels(deg: int, N: int) -> dict:
    return {q: list(surjections(q, deg)) for q in range(N + 1)}


def _zuv_mult(ring: Coefficients, Q: int, P: int, max_u: int, max_v: int):
    ulabels = {n: _gamma_labels(2 * n, Q) for n in range(max_u + 1)}
    vbase = denormalize(CochainComplex.concentrated(ring, -2), P)
    vring = FreeSimplicialRing(vbase)

    def mult(a, b, q, p, x, y):
        if a == 0 or b == 0:
            # weight zero is the ground ring, one basis vector
            s, other = (x, y) if a == 0 else (y, x)
            c = s.get(0, ring.zero())
            return {k: ring.mul(c, v) for k, v in other.items() if not ring.is_zero(ring.mul(c, v))}
        if (a > 0) != (b > 0):
            return {}
        if a > 0:
            la, lb = ulabels[a][q], ulabels[b][q]
            lc = {t: k for k, t in enumerate(ulabels[a + b][q])}
            table = zu_product_table(a, b, q)
            out: dict = {}
            for i, u in x.items():
                for j, v in y.items():
                    for tau, c in table.get((la[i], lb[j]), {}).items():
                        k = lc[tau]
                        out[k] = ring.add(out.get(k, ring.zero()), ring.mul(c, ring.mul(u, v)))
            return {k: v for k, v in out.items() if not ring.is_zero(v)}
        return vring.multiply(p, -a, x, -b, y)

    return mult


def zu_ring(max_weight: int, Q: int, P: int, ring: Coefficients = ZZ) -> CsRing:
    pieces = {n: zu_piece(n, Q, P, ring) for n in range(max_weight + 1)}
    return CsRing(ring, pieces, _zuv_mult(ring, Q, P, max_weight, 0), "Z[u]")


def zv_ring(max_weight: int, Q: int, P: int, ring: Coefficients = ZZ) -> CsRing:
    pieces = {-n: zv_piece(n, Q, P, ring) for n in range(max_weight + 1)}
    return CsRing(ring, pieces, _zuv_mult(ring, Q, P, 0, max_weight), "Z[v]")


def build_zuv(max_weight: int, Q: int, P: int, ring: Coefficients = ZZ) -> CsRing:
    """Fiber product Z[v] x_Z Z[u] over the constant ring, weights in [-max_weight, max_weight].

    uv = 0 holds because mixed-sign weights have no common piece to land in.
    """
    pieces = {0: CsModule.constant(ring, Q, P)}
    for n in range(1, max_weight + 1):
        pieces[n] = zu_piece(n, Q, P, ring)
        pieces[-n] = zv_piece(n, Q, P, ring)
    return CsRing(ring, pieces, _zuv_mult(ring, Q, P, max_weight, max_weight), "Z<u,v>")


def convolve(A: CsRing, B: CsRing) -> CsRing:
    """(A . B)^{(n)} = A^{(n)} x B^{(n)} levelwise, multiplication componentwise."""
    if A.ring != B.ring:
        raise ValueError("ring mismatch in convolve")
    ws = sorted(set(A.pieces) & set(B.pieces))
    pieces = {w: cs_tensor(A.pieces[w], B.pieces[w]) for w in ws}
    R = A.ring

    def mult(a, b, q, p, x, y):
        if a + b not in pieces:
            raise TruncationError(f"weight {a + b} not materialized")
        nB = {w: B.pieces[w].rank(q, p) for w in (a, b)}
        nBc = B.pieces[a + b].rank(q, p)
        out: dict = {}
        for i, u in x.items():
            ia, ib = divmod(i, nB[a])
            for j, v in y.items():
                ja, jb = divmod(j, nB[b])
                pa = A.multiply(a, b, q, p, {ia: R.one()}, {ja: R.one()})
                if not pa:
                    continue
                pb = B.multiply(a, b, q, p, {ib: R.one()}, {jb: R.one()})
                c = R.mul(u, v)
                for ka, va in pa.items():
                    for kb, vb in pb.items():
                        k = ka * nBc + kb
                        out[k] = R.add(out.get(k, R.zero()), R.mul(c, R.mul(va, vb)))
        return {k: v for k, v in out.items() if not R.is_zero(v)}

    has = A.mult is not None and B.mult is not None
    return CsRing(R, pieces, mult if has else None, f"({A.name}).({B.name})")


def red_shift_cs(A: CsRing, max_weight: int | None = None) -> CsRing:
    """RS(A) = A convolved with Z<u,v>, on the weights of A."""
    some = next(iter(A.pieces.values()))
    mw = max(abs(w) for w in A.pieces) if max_weight is None else max_weight
    return convolve(A, build_zuv(mw, some.Q, some.P, A.ring))


def graded_product(A: CsRing, B: CsRing) -> dict:
    """Weight pieces of the product ring A x B (direct sums per weight)."""
    from .cs_rings import cs_direct_sum

    return {w: cs_direct_sum(A.pieces[w], B.pieces[w]) for w in sorted(set(A.pieces) & set(B.pieces))}


def graded_tensor(A: dict, B: dict, weights) -> dict:
    """Weight pieces of A x B (tensor of graded modules): sum over i + j = n."""
    from .cs_rings import cs_direct_sum

    out = {}
    for n in weights:
        parts = [cs_tensor(A[i], B[n - i]) for i in sorted(A) if n - i in B]
        if parts:
            out[n] = cs_direct_sum(*parts) if len(parts) > 1 else parts[0]
    return out


# ---------------------------------------------------------------------------
# products on Tot
# ---------------------------------------------------------------------------


def cup_product(A: CsRing, a: int, m: int, x: dict, b: int, n: int, y: dict, p: int = 0) -> dict:
    """Alexander–Whitney cup product of cosimplicial cochains x (weight a, level m)
    and y (weight b, level n) in a ring built from cosimplicial denormalizations.

    Vectors are in unnormalized coordinates at simplicial level p.
    """
    Ca = CochainComplex.concentrated(A.ring, 2 * a)
    Cb = CochainComplex.concentrated(A.ring, 2 * b)
    front = tuple(range(m + 1))
    back = tuple(range(m, m + n + 1))
    xf = codenormal_operator(Ca, front, m + n).apply(x)
    yb = codenormal_operator(Cb, back, m + n).apply(y)
    return A.multiply(a, b, m + n, p, xf, yb)


# ---------------------------------------------------------------------------
# divided-power scalar
# ---------------------------------------------------------------------------


@dataclass
class NegativeWeightProduct:
    ring: Coefficients
    scalar: int
    square_is_boundary: bool
    h4: object


def _bezout_generator(vectors: list[dict], coords: list[int]) -> dict:
    """Integer combination of vectors with coordinate gcd(coords)."""
    acc_vec: dict = {}
    acc_c = 0
    for v, c in zip(vectors, coords):
        if c == 0:
            continue
        g, s, t = _egcd(acc_c, c)
        new = {}
        for k in set(acc_vec) | set(v):
            val = s * acc_vec.get(k, 0) + t * v.get(k, 0)
            if val:
                new[k] = val
        acc_vec, acc_c = new, g
    return acc_vec


def _egcd(a: int, b: int):
    if b == 0:
        return (abs(a), 1 if a >= 0 else -1, 0)
    g, s, t = _egcd(b, a % b)
    return g, t, s - (a // b) * t


def check_negative_weight_product(N: int = 5, ring: Coefficients = ZZ) -> NegativeWeightProduct:
    """Scalar c with v.v = c * gamma in H_4 of the weight-2 piece of Z[v].

    The integral generator gamma is oriented so that c >= 0; over F_p both
    the square and the reduced generator are computed in F_p coefficients.
    """
    if N < 5:
        raise TruncationError("the weight-2 product needs N >= 5")
    hz = free_scr_homotopy(2, [2], N, ZZ)
    C = hz.complexes[2]
    group, coords = homology_coordinates(C.d(-5), C.d(-4))
    if group.free_rank != 1 or group.torsion:
        raise ValueError(f"unexpected H_4 = {group}")
    cycles = kernel_basis(C.d(-4))
    cs = [coords(z)[0][0] for z in cycles]
    gamma = _bezout_generator(cycles, cs)
    square = hz.normalized_class(2, 4, hz.power_chain(2))
    c = coords(square)[0][0] // coords(gamma)[0][0]
    if c < 0:
        c, gamma = -c, {k: -v for k, v in gamma.items()}
    if ring.kind == "Z":
        return NegativeWeightProduct(ring, c, in_image(C.d(-5), square), group)
    hf = free_scr_homotopy(2, [2], N, ring)
    Cf = hf.complexes[2]
    gf, coords_f = homology_coordinates(Cf.d(-5), Cf.d(-4))
    sq_f = hf.normalized_class(2, 4, hf.power_chain(2))
    gamma_f = {k: ring(v) for k, v in gamma.items() if not ring.is_zero(ring(v))}
    a, g = coords_f(sq_f)[0][0], coords_f(gamma_f)[0][0]
    scalar = ring.mul(a, ring.inv(g))
    return NegativeWeightProduct(ring, scalar, in_image(Cf.d(-5), sq_f), gf)
