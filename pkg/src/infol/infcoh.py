"""Čech–Alexander towers, infinitesimal cohomology of polynomial algebras,
algebraic de Rham complexes, and the graded comparison with Sym of Ω¹.

Level n of the tower is the completion of A^{⊗(n+1)} along the diagonal,
written A[ξ_1..ξ_n]: factor i has coordinates x + ξ_1 + ... + ξ_i.  Maps
are homogeneous for the total (x, ξ)-degree, so each total weight is a
finite direct summand.  Truncation keeps total weight <= D and ξ-degree
< prec; when prec > D the cutoff never bites and the weight pieces are
exact.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import combinations
from math import comb

from .complexes import CochainComplex, CohomologyTable, cohomology
from .exactlin import GF, QQ, ZZ, Coefficients, LinAlgError, SparseMat
from .graded_mixed import GradedComplex, MixedComplex, tate_realization
from .polys import Poly, Trunc, monomial_basis, monomials
from .simplicial import CosimplicialModule, _sym_map, codegeneracy, coface, sym_monomials

__all__ = [
    "SmoothAffine",
    "AdicAlgebra",
    "CechAlexanderTower",
    "GrammarError",
    "UnsupportedComparison",
    "parse_algebra",
    "cech_alexander",
    "inf_cohomology",
    "graded_compare",
    "GradedWitness",
    "de_rham",
    "de_rham_cohomology",
    "compare_inf_derham",
    "ComparisonResult",
    "spurious_kernel",
    "de_rham_classes",
]


class GrammarError(ValueError):
    """Malformed algebra description."""


class UnsupportedComparison(ValueError):
    """Comparison requested outside characteristic zero."""


@dataclass(frozen=True)
class SmoothAffine:
    """k[x_1..x_d]."""

    ring: Coefficients
    names: tuple = ("x",)

    def __post_init__(self):
        if self.ring.kind == "Poly":
            raise ValueError("base ring must be Z, Q or F_p")
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate variable names")

    @property
    def d(self) -> int:
        return len(self.names)

    def __str__(self) -> str:
        return f"{self.ring}[{','.join(self.names)}]"


_ALG = re.compile(r"^\s*(Q|Z|Fp|F\d+)\s*(?:\[\s*([A-Za-z_][A-Za-z_0-9]*(?:\s*,\s*[A-Za-z_][A-Za-z_0-9]*)*)?\s*\])?\s*$")


def parse_algebra(text: str, p: int | None = None) -> SmoothAffine:
    """Parse ``Q[x,y]``, ``Z[x]``, ``Fp[x]`` (with p given) or ``F3[x]``; ``Q`` is the point."""
    m = _ALG.match(text)
    if not m:
        raise GrammarError(f"cannot parse algebra {text!r}")
    base, vars_ = m.group(1), m.group(2)
    names = tuple(v.strip() for v in vars_.split(",")) if vars_ else ()
    if base == "Q":
        ring = QQ
    elif base == "Z":
        ring = ZZ
    else:
        q = p if base == "Fp" else int(base[1:])
        if q is None:
            raise GrammarError("Fp needs a prime (--p)")
        if base != "Fp" and p is not None and p != q:
            raise GrammarError(f"conflicting primes {q} and {p}")
        try:
            ring = GF(q)
        except ValueError as exc:
            raise GrammarError(str(exc)) from None
    try:
        return SmoothAffine(ring, names)
    except ValueError as exc:
        raise GrammarError(str(exc)) from None


# ---------------------------------------------------------------------------
# adic algebras and the tower
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AdicAlgebra:
    """A[ξ_1..ξ_n], each ξ_i a block of variables, truncated.

    Blocks have d variables (one per coordinate of the base) unless ``r`` is
    given; nerves of formal groupoids of relative rank r use blocks of size r.
    """

    base: SmoothAffine
    n: int
    prec: int
    D: int | None
    r: int | None = None

    @property
    def block(self) -> int:
        return self.base.d if self.r is None else self.r

    @property
    def nvars(self) -> int:
        return self.base.d + self.n * self.block

    @property
    def formal(self) -> frozenset:
        return frozenset(range(self.base.d, self.nvars))

    @property
    def trunc(self) -> Trunc:
        return Trunc(self.formal, self.prec, self.D)

    def xi(self, i: int, j: int) -> int:
        """Variable index of ξ_{i,j} (i >= 1)."""
        return self.base.d + (i - 1) * self.block + j

    def basis(self) -> list[tuple]:
        if self.D is None:
            raise ValueError("a basis needs a total-degree bound D")
        return monomial_basis(self.nvars, self.trunc, self.D)

    def normalized_basis(self) -> list[tuple]:
        """Monomials touching every ξ block: the conormalized cochains."""
        b = self.block
        out = []
        for e in self.basis():
            if all(any(e[self.xi(i, j)] for j in range(b)) for i in range(1, self.n + 1)):
                out.append(e)
        return out

    def xi_degree(self, e: tuple) -> int:
        return sum(e[k] for k in self.formal)

    def names(self) -> list[str]:
        b = self.block
        stem = "xi" if self.r is None else "t"
        if self.r is None and b > 1:
            blocks = [f"{stem}{i}_{self.base.names[j]}" for i in range(1, self.n + 1) for j in range(b)]
        elif b > 1:
            blocks = [f"{stem}{i}_{j + 1}" for i in range(1, self.n + 1) for j in range(b)]
        else:
            blocks = [f"{stem}{i}" for i in range(1, self.n + 1) for _ in range(b)]
        return list(self.base.names) + blocks

    def var(self, k: int) -> Poly:
        return Poly.var(k, self.nvars, self.base.ring)

    def coordinate(self, i: int, j: int) -> Poly:
        """Coordinate x_j of factor i."""
        out = self.var(j)
        for m in range(1, i + 1):
            out = out + self.var(self.xi(m, j))
        return out

    def mul(self, f: Poly, g: Poly) -> Poly:
        return f.mul(g, self.trunc)

    def label(self, e: tuple) -> str:
        return Poly.monomial(e, self.base.ring).to_str(self.names())


@dataclass
class CechAlexanderTower:
    base: SmoothAffine
    N: int
    prec: int
    D: int
    levels: list = field(default_factory=list)

    def level(self, n: int) -> AdicAlgebra:
        return AdicAlgebra(self.base, n, self.prec, self.D)

    # generator images --------------------------------------------------
    def coface_images(self, n: int, k: int) -> list[Poly]:
        """d^k: level n -> n+1 on generators (x_j, then ξ_{i,j})."""
        src, dst = self.level(n), self.level(n + 1)
        delta = coface(n + 1, k)
        d = self.base.d
        imgs = [dst.coordinate(delta[0], j) for j in range(d)]
        for i in range(1, n + 1):
            for j in range(d):
                imgs.append(dst.coordinate(delta[i], j) - dst.coordinate(delta[i - 1], j))
        assert len(imgs) == src.nvars
        return imgs

    def codegeneracy_images(self, n: int, k: int) -> list[Poly]:
        """s^k: level n+1 -> n on generators."""
        dst = self.level(n)
        sigma = codegeneracy(n, k)
        d = self.base.d
        imgs = [dst.coordinate(sigma[0], j) for j in range(d)]
        for i in range(1, n + 2):
            for j in range(d):
                imgs.append(dst.coordinate(sigma[i], j) - dst.coordinate(sigma[i - 1], j))
        return imgs

    def apply(self, images: list[Poly], f: Poly, target: AdicAlgebra) -> Poly:
        return f.subs(images, target.trunc)

    def generator_identity_violations(self) -> list[str]:
        """Cosimplicial identities compared on generator images."""
        bad = []

        def comp(outer, inner, tgt):
            return [g.subs(outer, tgt.trunc, tgt.nvars) for g in inner]

        for n in range(0, self.N - 1):
            tgt = self.level(n + 2)
            for i in range(n + 2):
                for j in range(i + 1, n + 3):
                    lhs = comp(self.coface_images(n + 1, j), self.coface_images(n, i), tgt)
                    rhs = comp(self.coface_images(n + 1, i), self.coface_images(n, j - 1), tgt)
                    if lhs != rhs:
                        bad.append(f"d{j}d{i} at {n}")
        for n in range(0, self.N):
            tgt = self.level(n)
            for j in range(n + 1):
                for i in range(n + 2):
                    lhs = comp(self.codegeneracy_images(n, j), self.coface_images(n, i), tgt)
                    if i < j:
                        rhs = comp(self.coface_images(n - 1, i), self.codegeneracy_images(n - 1, j - 1), tgt)
                    elif i in (j, j + 1):
                        rhs = [tgt.var(k) for k in range(tgt.nvars)]
                    else:
                        rhs = comp(self.coface_images(n - 1, i - 1), self.codegeneracy_images(n - 1, j), tgt)
                    if lhs != rhs:
                        bad.append(f"s{j}d{i} at {n}")
        return bad

    # module matrices ---------------------------------------------------
    def _map_matrix(self, images, src_monos, dst: AdicAlgebra, dst_index: dict, strict: bool = True) -> SparseMat:
        R = self.base.ring
        tr = dst.trunc
        cache: dict = {}

        def power(i, k):
            if (i, k) not in cache:
                cache[(i, k)] = images[i].pow(k, tr)
            return cache[(i, k)]

        ent = {}
        for c, e in enumerate(src_monos):
            term = Poly.constant(1, R, dst.nvars)
            for i, k in enumerate(e):
                if k:
                    term = term.mul(power(i, k), tr)
                    if term.is_zero():
                        break
            for ex, v in term.terms.items():
                r = dst_index.get(ex)
                if r is None:
                    if strict:
                        raise LinAlgError(f"image monomial {ex} outside the target basis")
                    continue
                ent[(r, c)] = v
        return SparseMat(len(dst_index), len(src_monos), ent, R)

    def cosimplicial_module(self) -> CosimplicialModule:
        """Full truncated cosimplicial module (all monomials), levels 0..N."""
        bases = [self.level(n).basis() for n in range(self.N + 1)]
        index = [{e: a for a, e in enumerate(b)} for b in bases]
        cofaces, codegens = {}, {}
        for n in range(self.N):
            for k in range(n + 2):
                cofaces[(n, k)] = self._map_matrix(self.coface_images(n, k), bases[n], self.level(n + 1), index[n + 1])
            for k in range(n + 1):
                codegens[(n, k)] = self._map_matrix(self.codegeneracy_images(n, k), bases[n + 1], self.level(n), index[n])
        return CosimplicialModule(self.base.ring, tuple(len(b) for b in bases), cofaces, codegens, {n: b for n, b in enumerate(bases)})

    def normalized_complex(self) -> CochainComplex:
        """Conormalized cochains: monomials touching every ξ block, alternating coface sum."""
        R = self.base.ring
        bases = [self.level(n).normalized_basis() for n in range(self.N + 1)]
        ranks = {n: len(b) for n, b in enumerate(bases)}
        diffs = {}
        for n in range(self.N):
            dst = self.level(n + 1)
            index = {e: a for a, e in enumerate(bases[n + 1])}
            full = {e: a for a, e in enumerate(dst.basis())}
            total = None
            for k in range(n + 2):
                m = self._map_matrix(self.coface_images(n, k), bases[n], dst, full)
                m = m if k % 2 == 0 else -m
                total = m if total is None else total + m
            # the alternating sum lands in the normalized part
            order = dst.basis()
            keep = {}
            for (r, c), v in total.entries.items():
                e = order[r]
                if e not in index:
                    raise LinAlgError("alternating coface sum left the normalized cochains")
                keep[(index[e], c)] = v
            diffs[n] = SparseMat(ranks[n + 1], ranks[n], keep, R)
        if self.prec > self.D:
            incomplete = frozenset({self.N + 1})
        else:
            incomplete = frozenset(range(-1, self.N + 2))
        labels = {n: [self.level(n).label(e) for e in b] for n, b in enumerate(bases)}
        return CochainComplex(R, ranks, diffs, labels=labels, incomplete=incomplete)


def cech_alexander(X: SmoothAffine, N: int, prec: int, D: int) -> CechAlexanderTower:
    if prec < 2 or N < 1 or D < 0:
        raise ValueError(f"need prec >= 2, N >= 1, D >= 0 (got prec={prec}, N={N}, D={D})")
    return CechAlexanderTower(X, N, prec, D)


def inf_cohomology(tower: CechAlexanderTower) -> CohomologyTable:
    """Cohomology of the conormalized tower; trusted degrees <= N-1 iff prec > D."""
    C = tower.normalized_complex()
    return cohomology(C, range(0, tower.N + 1))


def spurious_kernel(tower: CechAlexanderTower) -> list[str]:
    """Labels of a basis of the degree-0 kernel (level-0 functions equalized by both cofaces)."""
    from .exactlin import kernel_basis

    C = tower.normalized_complex()
    labels = C.labels.get(0, [])
    out = []
    for v in kernel_basis(C.d(0)):
        out.append(" + ".join((f"{c}*" if c != 1 else "") + labels[i] for i, c in sorted(v.items())))
    return out


# ---------------------------------------------------------------------------
# graded comparison
# ---------------------------------------------------------------------------


@dataclass
class GradedWitness:
    level: int
    weight: int
    rank: int
    expected_rank: int
    bijection: list
    coface_ok: dict

    @property
    def ok(self) -> bool:
        return self.rank == self.expected_rank and all(self.coface_ok.values())


def _xi_monomials(A: AdicAlgebra, w: int) -> list[tuple]:
    d = A.base.d
    k = A.n * A.block
    out = []
    for e in monomials(k, w):
        out.append((0,) * d + e)
    return out


def graded_compare(tower: CechAlexanderTower, n: int, w: int) -> GradedWitness:
    """Gr^w of level n against Sym^w of (Ω¹)^n, with coface compatibility.

    Gr^w is spanned over A by ξ-monomials of degree w; the bijection sends
    ξ_{i,j} to dx_j in the i-th summand.  A coface acts on Gr^w by the
    degree-w part of its action on ξ-monomials; compatibility asks that this
    equals Sym^w of the linear part, i.e. of the induced map on Ω¹ summands.
    """
    if w >= tower.prec:
        raise ValueError(f"weight {w} must be below prec {tower.prec}")
    R = tower.base.ring
    d = tower.base.d
    A = tower.level(n)
    b = A.block
    src = _xi_monomials(A, w)
    names = [f"d{v}" for v in tower.base.names] if A.r is None else [f"dt{j + 1}" if b > 1 else "dt" for j in range(b)]
    bijection = []
    for e in src:
        combo = []
        for v, k in enumerate(e[d:]):
            combo += [v] * k
        bijection.append((A.label(e), tuple(f"{names[v % b]}^({v // b + 1})" for v in sorted(combo))))
    expected = comb(n * b + w - 1, w) if n * b else int(w == 0)
    checks = {}
    if n < tower.N:
        B = tower.level(n + 1)
        dst = _xi_monomials(B, w)
        dst_index = {e: a for a, e in enumerate(dst)}
        for k in range(n + 2):
            imgs = tower.coface_images(n, k)
            # Gr action: degree-w ξ part of the image of each ξ-monomial
            full = Trunc(B.formal, None, None)
            gr_cols = {}
            for c, e in enumerate(src):
                term = Poly.constant(1, R, B.nvars)
                for i, p in enumerate(e):
                    if p:
                        term = term.mul(imgs[i].pow(p, full))
                part = term.homogeneous_part(B.formal, w)
                gr_cols[c] = {dst_index[ex]: v for ex, v in part.terms.items() if ex in dst_index and not any(ex[:d])}
                if any(any(ex[:d]) for ex in part.terms):
                    gr_cols[c] = None
            # linear part on Ω¹ summands
            lin = {}
            for v in range(n * b):
                img = imgs[d + v].homogeneous_part(B.formal, 1)
                for ex, c in img.terms.items():
                    u = next(t for t in range(d, B.nvars) if ex[t]) - d
                    lin[(u, v)] = c
            L = SparseMat((n + 1) * b, n * b, lin, R)
            sym_src = sym_monomials(n * b, w)
            sym_dst = {m: a for a, m in enumerate(sym_monomials((n + 1) * b, w))}
            S = _sym_map(L, sym_src, sym_dst, R)
            # translate ξ-monomials to multisets
            to_sym_src = {e: tuple(v for v, p in enumerate(e[d:]) for _ in range(p)) for e in src}
            to_sym_dst = {e: tuple(v for v, p in enumerate(e[d:]) for _ in range(p)) for e in dst}
            ok = True
            Scols = S.col_dicts()
            spos = {m: a for a, m in enumerate(sym_src)}
            for c, e in enumerate(src):
                col = gr_cols[c]
                if col is None:
                    ok = False
                    break
                mapped = {sym_dst[to_sym_dst[dst[r]]]: v for r, v in col.items()}
                if mapped != Scols[spos[to_sym_src[e]]]:
                    ok = False
                    break
            checks[f"d{k}"] = ok
    return GradedWitness(n, w, len(src), expected, bijection, checks)


# ---------------------------------------------------------------------------
# de Rham
# ---------------------------------------------------------------------------


def _forms_basis(d: int, w: int, D: int) -> list[tuple]:
    """(exponents, form indices) with total weight |a| + w <= D."""
    out = []
    for S in combinations(range(d), w):
        for a in monomial_basis(d, Trunc(), D - w) if D >= w else []:
            out.append((a, S))
    return out


def de_rham(X: SmoothAffine, D: int) -> MixedComplex:
    """Ω^w in cohomological degree -w, zero internal differential, ε = d (flag minus).

    Truncation keeps total weight (x-degree plus form degree) <= D, which d
    preserves; the flag-minus Tate realization is the usual de Rham complex.
    """
    R = X.ring
    d = X.d
    bases = {w: _forms_basis(d, w, D) for w in range(d + 1)}
    pieces = {w: CochainComplex(R, {-w: len(b)}) for w, b in bases.items() if b}
    eps = {}
    for w in range(d):
        src, dst = bases[w], bases[w + 1]
        if not src or not dst:
            continue
        pos = {x: i for i, x in enumerate(dst)}
        ent = {}
        for c, (a, S) in enumerate(src):
            for j in range(d):
                if not a[j] or j in S:
                    continue
                coeff = R(a[j])
                if R.is_zero(coeff):
                    continue
                b = list(a)
                b[j] -= 1
                T = tuple(sorted(S + (j,)))
                sign = -1 if sum(1 for s in S if s < j) % 2 else 1
                key = (tuple(b), T)
                ent[(pos[key], c)] = R.mul(coeff, R(sign))
        eps[(w, -w)] = SparseMat(len(dst), len(src), ent, R)
    return MixedComplex(GradedComplex(R, pieces), eps, "minus")


def de_rham_cohomology(X: SmoothAffine, D: int) -> CohomologyTable:
    """Weight pieces are exact summands, so every degree is trusted."""
    C = tate_realization(de_rham(X, D))
    return cohomology(C, range(0, X.d + 1))


def de_rham_classes(X: SmoothAffine, D: int) -> dict:
    """Explicit class representatives (monomial labels) when d = 1; used for reporting."""
    if X.d != 1:
        raise ValueError("class listing is implemented for one variable")
    R = X.ring
    x = X.names[0]
    h0, h1 = [], []
    for k in range(D + 1):
        if R.is_zero(R(k)):
            h0.append("1" if k == 0 else f"{x}^{k}" if k > 1 else x)
    for k in range(D):
        # x^k dx is exact iff (k+1) is invertible
        if R.is_zero(R(k + 1)):
            h1.append((f"{x}^{k} " if k > 1 else f"{x} " if k == 1 else "") + f"d{x}")
    return {0: h0, 1: h1}


@dataclass
class ComparisonResult:
    verdict: str
    inf: CohomologyTable
    derham: CohomologyTable
    trusted_window: tuple | None


def compare_inf_derham(X: SmoothAffine, N: int = 2, prec: int = 8, D: int = 6) -> ComparisonResult:
    """Compare infinitesimal and de Rham cohomology over Q on the common trusted window."""
    if X.ring.kind != "Q":
        raise UnsupportedComparison("the comparison with de Rham cohomology is only offered over Q")
    hi = inf_cohomology(cech_alexander(X, N, prec, D))
    hd = de_rham_cohomology(X, D)
    common = sorted(n for n in hi.trusted if n in hd.trusted or n > X.d)
    if not common:
        return ComparisonResult("inconclusive", hi, hd, None)
    same = all(hi[n] == hd[n] for n in common)
    return ComparisonResult("equivalent" if same else "not_equivalent", hi, hd, (common[0], common[-1]))
