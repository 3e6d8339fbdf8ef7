"""Smooth infinitesimal foliations through complete filtered function
algebras and formally smooth formal groupoids.

A formal groupoid over X = Spec k[x_1..x_d] of relative rank r is stored in
normal form: the arrow algebra is A[[t_1..t_r]] truncated at t-degree prec,
the source is x -> x and the unit is t -> unit(x) (zero in normal form).  The
remaining structure is given on generators:

* target:   x_j -> tau_j(x; t)
* compose:  t_j -> mu_j(x; t', t'') where t'' is a coordinate on the second
  arrow, which starts at tau(x; t')
* inverse:  t_j -> iota_j(x; t), an arrow starting at tau(x; t)

Level n of the nerve is A[[t^(1)..t^(n)]] with the usual cofaces (drop the
first arrow, compose two adjacent arrows, drop the last arrow) and
codegeneracies (insert a unit arrow).  For the formal pair groupoid these are
literally the Čech–Alexander maps, with ξ_i = t^(i).

A foliation is recorded by its cotangent complex L and the filtered
conormalized cochains of its tower (stage w = t-degree >= w); the groupoid
is recovered by reading the structure maps off the low cofaces.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .complexes import ChainMap, CochainComplex, CohomologyTable, ComplexError, cohomology, shift
from .exactlin import GF, QQ, ZZ, Coefficients, SparseMat
from .graded_mixed import FilteredComplex, filtered_to_graded
from .infcoh import AdicAlgebra, CechAlexanderTower, SmoothAffine, cech_alexander, graded_compare
from .polys import NO_TRUNC, Poly, Trunc, monomial_basis

__all__ = [
    "FormalGroupoid",
    "GroupoidAxiomError",
    "NerveTower",
    "FoliationData",
    "LinearStackDesc",
    "unit_groupoid",
    "pair_groupoid",
    "additive_formal_group",
    "multiplicative_formal_group",
    "tautological_foliation",
    "zero_foliation",
    "cotangent",
    "loop_space",
    "foliation_cohomology",
    "integrate",
    "differentiate",
    "adic_filtration",
    "same_structure",
    "same_foliation",
]


class GroupoidAxiomError(ValueError):
    """Structure maps violate the groupoid axioms at the working precision."""


# ---------------------------------------------------------------------------
# formal groupoids
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FormalGroupoid:
    base: SmoothAffine
    r: int
    prec: int
    target: tuple
    compose: tuple
    inverse: tuple
    unit: tuple = None
    name: str = ""

    def __post_init__(self):
        d, r = self.base.d, self.r
        R = self.base.ring
        unit = self.unit if self.unit is not None else tuple(Poly(R, d) for _ in range(r))
        object.__setattr__(self, "unit", tuple(unit))
        if self.prec < 1:
            raise ValueError("prec must be positive")
        shapes = [
            ("target", self.target, d, d + r),
            ("compose", self.compose, r, d + 2 * r),
            ("inverse", self.inverse, r, d + r),
            ("unit", self.unit, r, d),
        ]
        for label, polys, count, nvars in shapes:
            if len(polys) != count or any(f.nvars != nvars for f in polys):
                raise ValueError(f"{label} needs {count} polynomials in {nvars} variables")
        tr = self.arrow_trunc(1)
        object.__setattr__(self, "target", tuple(f.truncate(tr) for f in self.target))
        object.__setattr__(self, "inverse", tuple(f.truncate(tr) for f in self.inverse))
        object.__setattr__(self, "compose", tuple(f.truncate(self.arrow_trunc(2)) for f in self.compose))

    @property
    def ring(self) -> Coefficients:
        return self.base.ring

    def level(self, n: int, D: int | None = None) -> AdicAlgebra:
        return AdicAlgebra(self.base, n, self.prec, D, self.r)

    def arrow_trunc(self, n: int) -> Trunc:
        return self.level(n).trunc

    # nerve generator images ------------------------------------------------
    def _base_points(self, A: AdicAlgebra, upto: int) -> list[list[Poly]]:
        """bp[i] = starting point of arrow i (1-based) as polynomials on level A."""
        d, r = self.base.d, self.r
        tr = A.trunc
        bp = [None, [A.var(j) for j in range(d)]]
        for i in range(1, upto):
            imgs = bp[i] + [A.var(A.xi(i, j)) for j in range(r)]
            bp.append([f.subs(imgs, tr, A.nvars) for f in self.target])
        return bp

    def coface_images(self, n: int, k: int, D: int | None = None) -> list[Poly]:
        """d^k: level n -> n+1 on generators (x, then t^(1..n))."""
        d, r = self.base.d, self.r
        B = self.level(n + 1, D)
        tr = B.trunc
        xs = [B.var(j) for j in range(d)]

        def block(i):
            return [B.var(B.xi(i, j)) for j in range(r)]

        if k == 0:
            bp = self._base_points(B, 2)
            imgs = list(bp[2])
            for i in range(1, n + 1):
                imgs += block(i + 1)
        elif k == n + 1:
            imgs = list(xs)
            for i in range(1, n + 1):
                imgs += block(i)
        else:
            bp = self._base_points(B, k)
            imgs = list(xs)
            for i in range(1, k):
                imgs += block(i)
            args = bp[k] + block(k) + block(k + 1)
            imgs += [f.subs(args, tr, B.nvars) for f in self.compose]
            for i in range(k + 1, n + 1):
                imgs += block(i + 1)
        return [f.truncate(tr) for f in imgs]

    def codegeneracy_images(self, n: int, k: int, D: int | None = None) -> list[Poly]:
        """s^k: level n+1 -> n on generators; inserts a unit arrow at position k+1."""
        d, r = self.base.d, self.r
        A = self.level(n, D)
        tr = A.trunc
        imgs = [A.var(j) for j in range(d)]
        for i in range(1, k + 1):
            imgs += [A.var(A.xi(i, j)) for j in range(r)]
        bp = self._base_points(A, k + 1)
        imgs += [u.subs(bp[k + 1], tr, A.nvars) for u in self.unit]
        for i in range(k + 1, n + 1):
            imgs += [A.var(A.xi(i, j)) for j in range(r)]
        return [f.truncate(tr) for f in imgs]

    def nerve(self, N: int, D: int | None = None) -> "NerveTower":
        return NerveTower(self.base, N, self.prec, D, groupoid=self)

    # axioms ----------------------------------------------------------------
    def axiom_violations(self) -> list[str]:
        """Category axioms as cosimplicial identities of the nerve up to level 3, plus inverses."""
        bad = self.nerve(3).generator_identity_violations()
        d, r = self.base.d, self.r
        A = self.level(1)
        tr = A.trunc
        xs = [A.var(j) for j in range(d)]
        ts = [A.var(A.xi(1, j)) for j in range(r)]
        end = [f.subs(xs + ts, tr, A.nvars) for f in self.target]
        back = [f.subs(end + list(self.inverse), tr, A.nvars) for f in self.target]
        if back != [f.truncate(tr) for f in xs]:
            bad.append("inverse: target of the inverse is not the source")
        # compose(t, inverse) = unit at the source
        comp = [f.subs(xs + ts + list(self.inverse), tr, A.nvars) for f in self.compose]
        unit = [u.subs(xs, tr, A.nvars) for u in self.unit]
        if comp != unit:
            bad.append("inverse: t . inverse(t) is not the unit")
        return bad

    def check(self) -> None:
        bad = self.axiom_violations()
        if bad:
            raise GroupoidAxiomError("; ".join(bad))

    # serialization -----------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "base": {"ring": str(self.ring), "names": list(self.base.names)},
            "rank": self.r,
            "prec": self.prec,
            "name": self.name,
            "target": [f.to_json() for f in self.target],
            "compose": [f.to_json() for f in self.compose],
            "inverse": [f.to_json() for f in self.inverse],
            "unit": [f.to_json() for f in self.unit],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data: dict) -> "FormalGroupoid":
        ring = _ring_from_str(data["base"]["ring"])
        base = SmoothAffine(ring, tuple(data["base"]["names"]))
        d, r = base.d, data["rank"]

        def polys(key, nvars):
            return tuple(Poly(ring, nvars, {tuple(e): Fraction(c) for e, c in terms}) for terms in data[key])

        return cls(
            base,
            r,
            data["prec"],
            polys("target", d + r),
            polys("compose", d + 2 * r),
            polys("inverse", d + r),
            polys("unit", d),
            data.get("name", ""),
        )


def _ring_from_str(text: str) -> Coefficients:
    if text == "Z":
        return ZZ
    if text == "Q":
        return QQ
    if text.startswith("F"):
        return GF(int(text[1:]))
    raise ValueError(f"unknown ring {text!r}")


def same_structure(G: FormalGroupoid, H: FormalGroupoid) -> bool:
    """Exact equality of base, rank, precision and every structure map."""
    return (
        G.base == H.base
        and G.r == H.r
        and G.prec == H.prec
        and G.target == H.target
        and G.compose == H.compose
        and G.inverse == H.inverse
        and G.unit == H.unit
    )


def _vars(n: int, R: Coefficients) -> list[Poly]:
    return [Poly.var(i, n, R) for i in range(n)]


def unit_groupoid(X: SmoothAffine, prec: int = 6) -> FormalGroupoid:
    """Only identity arrows: relative rank 0."""
    d = X.d
    return FormalGroupoid(X, 0, prec, tuple(_vars(d, X.ring)), (), (), (), "unit")


def pair_groupoid(X: SmoothAffine, prec: int = 6) -> FormalGroupoid:
    """Formal completion of X x X along the diagonal: target x + t, composition t' + t''."""
    d, R = X.d, X.ring
    v1 = _vars(2 * d, R)
    v2 = _vars(3 * d, R)
    target = tuple(v1[j] + v1[d + j] for j in range(d))
    compose = tuple(v2[d + j] + v2[2 * d + j] for j in range(d))
    inverse = tuple(-v1[d + j] for j in range(d))
    return FormalGroupoid(X, d, prec, target, compose, inverse, None, "pair")


def additive_formal_group(ring: Coefficients, prec: int = 6) -> FormalGroupoid:
    """Ĝ_a over a point: t -> t' + t''."""
    X = SmoothAffine(ring, ())
    t1, t2 = _vars(2, ring)
    (t,) = _vars(1, ring)
    return FormalGroupoid(X, 1, prec, (), (t1 + t2,), (-t,), None, "Ga")


def multiplicative_formal_group(ring: Coefficients, prec: int = 6) -> FormalGroupoid:
    """Ĝ_m over a point in the coordinate t = g - 1: t -> t' + t'' + t't''."""
    X = SmoothAffine(ring, ())
    t1, t2 = _vars(2, ring)
    (t,) = _vars(1, ring)
    inv = Poly(ring, 1, {(k,): (-1) ** k for k in range(1, prec)})
    return FormalGroupoid(X, 1, prec, (), (t1 + t2 + t1 * t2,), (inv,), None, "Gm")


# ---------------------------------------------------------------------------
# nerves as towers
# ---------------------------------------------------------------------------


@dataclass
class NerveTower(CechAlexanderTower):
    """Truncated cosimplicial algebra of functions on the nerve of a formal groupoid."""

    groupoid: FormalGroupoid = None

    def level(self, n: int) -> AdicAlgebra:
        return self.groupoid.level(n, self.D)

    def coface_images(self, n: int, k: int) -> list[Poly]:
        return self.groupoid.coface_images(n, k, self.D)

    def codegeneracy_images(self, n: int, k: int) -> list[Poly]:
        return self.groupoid.codegeneracy_images(n, k, self.D)


def _tower_images(tower: CechAlexanderTower) -> dict:
    """All generator images of the tower, keyed by ('d' | 's', n, k)."""
    out = {}
    for n in range(tower.N):
        for k in range(n + 2):
            out[("d", n, k)] = tuple(tower.coface_images(n, k))
        for k in range(n + 1):
            out[("s", n, k)] = tuple(tower.codegeneracy_images(n, k))
    return out


# ---------------------------------------------------------------------------
# foliations
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FoliationData:
    """Cotangent complex L (ranks of free A-modules) and filtered functions.

    ``tower`` is the cosimplicial algebra whose conormalized cochains give
    ``functions``; it is None for foliations given only by their functions.
    """

    base: SmoothAffine
    L: CochainComplex
    functions: FilteredComplex
    gr_witness: dict = field(default_factory=dict)
    tower: CechAlexanderTower | None = None
    params: dict = field(default_factory=dict)
    kind: str = ""

    @property
    def smooth(self) -> bool:
        return set(self.L.ranks) <= {0}

    @property
    def rank(self) -> int:
        return self.L.rank(0)

    def realized(self) -> CochainComplex:
        return self.functions.stages[min(self.functions.stages)]

    def gr(self):
        return filtered_to_graded(self.functions)

    def invariant_violations(self) -> list[str]:
        """gr^0 is A in degree 0, and level-1 gr is polynomial on rank(L) generators."""
        bad = []
        G = self.gr()
        g0 = G.piece(0)
        expect = _base_rank(self.base, self.params.get("D"))
        if g0.ranks != ({0: expect} if expect else {}):
            bad.append(f"gr^0 has ranks {g0.ranks}, expected A = {expect} in degree 0")
        for (n, w), wit in self.gr_witness.items():
            if not wit.ok:
                bad.append(f"graded witness fails at level {n}, weight {w}")
        return bad

    def to_json(self) -> dict:
        out = {
            "base": {"ring": str(self.base.ring), "names": list(self.base.names)},
            "kind": self.kind,
            "params": dict(sorted(self.params.items())),
            "cotangent": {str(n): r for n, r in sorted(self.L.ranks.items())},
            "stages": {str(w): {str(n): r for n, r in sorted(C.ranks.items())} for w, C in sorted(self.functions.stages.items())},
        }
        if self.tower is not None:
            imgs = _tower_images(self.tower)
            out["structure"] = {f"{a}{k}@{n}": [f.to_json() for f in v] for (a, n, k), v in sorted(imgs.items())}
        return out


@dataclass(frozen=True, eq=False)
class LinearStackDesc:
    """V(E) over A, with shifts recorded explicitly.

    ``cotangent`` is the cotangent complex of the total space relative to X;
    for the loop space of a smooth foliation it is E = L[1].
    """

    base: SmoothAffine
    E: CochainComplex
    shift: int
    cotangent: CochainComplex
    groupoid: FormalGroupoid | None = None
    foliation: FoliationData | None = None


def _base_rank(X: SmoothAffine, D: int | None) -> int:
    if D is None:
        return 0
    return len(monomial_basis(X.d, NO_TRUNC, D))


def adic_filtration(C: CochainComplex, weights: dict, top: int) -> FilteredComplex:
    """Stage w = span of basis vectors of weight >= w (w = 0..top), assumed a subcomplex."""
    R = C.ring
    keep = {w: {n: [i for i, v in enumerate(weights.get(n, [])) if v >= w] for n in C.ranks} for w in range(top + 1)}
    stages = {}
    for w, idx in keep.items():
        ranks = {n: len(ix) for n, ix in idx.items()}
        diffs = {}
        for n, ix in idx.items():
            if n + 1 not in idx:
                continue
            full = C.d(n)
            sub = full.submatrix(idx[n + 1], ix)
            # the rows dropped must vanish on the kept columns
            drop = [i for i in range(C.rank(n + 1)) if i not in set(idx[n + 1])]
            if not full.submatrix(drop, ix).is_zero():
                raise ComplexError(f"weight {w} part is not a subcomplex in degree {n}")
            diffs[n] = sub
        labels = {n: [C.labels[n][i] for i in ix] for n, ix in idx.items() if n in C.labels}
        stages[w] = CochainComplex(R, ranks, diffs, labels=labels, incomplete=C.incomplete)
    inclusions = {}
    for w in range(top):
        big, small = keep[w], keep[w + 1]
        mats = {}
        for n in C.ranks:
            pos = {i: a for a, i in enumerate(big[n])}
            mats[n] = SparseMat(len(big[n]), len(small[n]), {(pos[i], c): 1 for c, i in enumerate(small[n])}, R)
        inclusions[w] = ChainMap(stages[w + 1], stages[w], mats)
    return FilteredComplex(R, stages, inclusions)


def _tower_foliation(tower: CechAlexanderTower, L: CochainComplex, kind: str, witness: bool = True) -> FoliationData:
    C = tower.normalized_complex()
    weights = {}
    for n in range(tower.N + 1):
        A = tower.level(n)
        weights[n] = [A.xi_degree(e) for e in A.normalized_basis()]
    top = tower.prec
    F = adic_filtration(C, weights, top)
    gr_witness = {}
    if witness:
        for n in range(tower.N + 1):
            for w in range(min(tower.prec - 1, tower.D) + 1):
                gr_witness[(n, w)] = graded_compare(tower, n, w)
    params = {"N": tower.N, "prec": tower.prec, "D": tower.D}
    return FoliationData(tower.base, L, F, gr_witness, tower, params, kind)


def tautological_foliation(X: SmoothAffine, N: int = 2, prec: int = 8, D: int = 6) -> FoliationData:
    """Functions from the Čech–Alexander tower, filtered by ξ-degree; L = Ω¹ free of rank d."""
    tower = cech_alexander(X, N, prec, D)
    L = CochainComplex.concentrated(X.ring, 0, X.d) if X.d else CochainComplex(X.ring, {})
    return _tower_foliation(tower, L, "tautological")


def zero_foliation(X: SmoothAffine, N: int = 2, prec: int = 8, D: int = 6) -> FoliationData:
    """L = 0 and functions A (total degree <= D) with the trivial filtration.

    Realized as the nerve of the unit groupoid, whose conormalized cochains
    are A in degree 0 and nothing above.
    """
    tower = unit_groupoid(X, prec).nerve(N, D)
    return _tower_foliation(tower, CochainComplex(X.ring, {}), "zero")


def cotangent(F: FoliationData) -> CochainComplex:
    return F.L


def foliation_cohomology(F: FoliationData) -> CohomologyTable:
    """Cohomology of the realized filtered functions (stage 0)."""
    C = F.realized()
    lo = min(C.ranks, default=0)
    hi = max(C.ranks, default=0)
    return cohomology(C, range(min(lo, 0), max(hi, 0) + 1))


def integrate(F: FoliationData) -> FormalGroupoid:
    """Read target, composition and unit off d^0, d^1 and s^0 of the tower; solve for the inverse."""
    if not F.smooth:
        raise ValueError("integration needs a smooth foliation (cotangent complex a bundle in degree 0)")
    if F.tower is None:
        raise ValueError("integration needs the cosimplicial tower of the foliation")
    T = F.tower
    if T.N < 2:
        raise ValueError("integration needs tower levels up to 2")
    X = F.base
    d, r = X.d, F.rank
    if T.level(1).block != r:
        raise ValueError(f"tower block size {T.level(1).block} does not match the cotangent rank {r}")
    target = T.coface_images(0, 0)[:d]
    source = T.coface_images(0, 1)[:d]
    A1 = T.level(1)
    if source != [A1.var(j) for j in range(d)]:
        raise GroupoidAxiomError("source map is not in normal form x -> x")
    compose = T.coface_images(1, 1)[d:]
    unit = T.codegeneracy_images(0, 0)[d:]
    # the inverse solves compose(x; t, iota) = unit(x) by fixed-point iteration
    prec = T.prec
    tr = Trunc(A1.formal, prec)
    xs = [A1.var(j) for j in range(d)]
    ts = [A1.var(A1.xi(1, j)) for j in range(r)]
    unit_x = [u.subs(xs, tr, A1.nvars) for u in unit]
    iota = [-t for t in ts]
    for _ in range(prec + 1):
        err = [f.subs(xs + ts + iota, tr, A1.nvars) - u for f, u in zip(compose, unit_x)]
        if all(e.is_zero() for e in err):
            break
        iota = [(i - e).truncate(tr) for i, e in zip(iota, err)]
    else:
        raise GroupoidAxiomError("inverse series did not converge")
    G = FormalGroupoid(
        X,
        r,
        prec,
        tuple(target),
        tuple(compose),
        tuple(iota),
        tuple(unit),
        name=F.kind,
    )
    G.check()
    return G


def differentiate(G: FormalGroupoid, N: int = 2, D: int | None = None) -> FoliationData:
    """Nerve of G, filtered by t-degree; L free of rank r (the invariant forms at the unit).

    D defaults to prec - 1 so that the t-degree cutoff never bites inside the
    kept total degrees.  Structure maps must fit inside total degree D.
    """
    G.check()
    D = G.prec - 1 if D is None else D
    for label, polys in (("target", G.target), ("compose", G.compose), ("inverse", G.inverse), ("unit", G.unit)):
        if any(sum(e) > D for f in polys for e in f.terms):
            raise ValueError(f"{label} has terms of total degree above D = {D}")
    r = _detect_rank(G)
    L = CochainComplex.concentrated(G.ring, 0, r) if r else CochainComplex(G.ring, {})
    tower = G.nerve(N, D)
    return _tower_foliation(tower, L, G.name or "groupoid")


def _detect_rank(G: FormalGroupoid) -> int:
    """Rank of e^*(Ω¹_{G/X}): the linear part of the composition in the second arrow must be the identity."""
    d, r = G.base.d, G.r
    for j, f in enumerate(G.compose):
        lin = {}
        for e, c in f.terms.items():
            if sum(e[d:]) == 1 and not any(e[:d]) and any(e[d + r :]):
                lin[e.index(1, d + r) - d - r] = c
        if lin != {j: G.ring.one()}:
            raise ValueError(f"cannot detect the relative rank: linear part of compose[{j}] is {lin}")
    return r


def same_foliation(F: FoliationData, H: FoliationData) -> bool:
    """Same cotangent ranks, same filtered functions stage by stage, same tower maps."""
    if F.base != H.base or F.L.ranks != H.L.ranks:
        return False
    if set(F.functions.stages) != set(H.functions.stages):
        return False
    if not all(F.functions.stages[w].same_as(H.functions.stages[w]) for w in F.functions.stages):
        return False
    if (F.tower is None) != (H.tower is None):
        return False
    if F.tower is not None:
        a, b = _tower_images(F.tower), _tower_images(H.tower)
        if a.keys() != b.keys():
            return False
        return all(list(a[k]) == list(b[k]) for k in a)
    return True


def loop_space(F: FoliationData) -> LinearStackDesc:
    """V(L) with cotangent L[1]; its groupoid is integrate(F), its functions those of the arrows.

    The arrow algebra A[[t]] (total degree <= D, t-degree < prec) sits in
    degree 0 with the t-adic filtration.
    """
    if not F.smooth:
        raise ValueError("loop spaces are offered for smooth foliations only")
    X = F.base
    E = F.L
    cot = shift(F.L, 1)
    G = integrate(F) if F.rank else None
    prec = F.params.get("prec", 1)
    D = F.params.get("D", 0)
    A1 = AdicAlgebra(X, 1, prec, D, F.rank)
    basis = A1.basis()
    C = CochainComplex(X.ring, {0: len(basis)}, labels={0: [A1.label(e) for e in basis]})
    funcs = adic_filtration(C, {0: [A1.xi_degree(e) for e in basis]}, prec)
    loop_fol = FoliationData(X, cot, funcs, {}, None, {"prec": prec, "D": D}, "loop")
    return LinearStackDesc(X, E, 1, cot, G, loop_fol)
