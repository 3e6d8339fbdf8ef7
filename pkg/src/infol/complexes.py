"""Bounded cochain complexes of finite free modules.

Conventions:

* cohomological grading throughout; homological degree ``p`` of a
  simplicial object is stored as cohomological degree ``-p``;
* ``d[n]`` is the matrix of the differential from degree ``n`` to ``n+1``;
* totalization of a bicomplex uses ``d = d_h + (-1)^q d_v`` where ``q`` is
  the cosimplicial (cohomological) index.

Every producer of a truncated complex lists the degrees whose module may be
missing generators in ``incomplete``; a degree is trusted when it and both
neighbours are complete.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .exactlin import CohomologyGroup, Coefficients, LinAlgError, SparseMat, subquotient

__all__ = [
    "CochainComplex",
    "Bicomplex",
    "ChainMap",
    "CohomologyTable",
    "ComplexError",
    "shift",
    "tensor",
    "direct_sum",
    "tot_product",
    "cohomology",
    "cone",
]


class ComplexError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CochainComplex:
    ring: Coefficients
    ranks: dict
    diffs: dict = field(default_factory=dict)
    labels: dict = field(default_factory=dict)
    incomplete: frozenset = frozenset()

    def __post_init__(self):
        ranks = {int(n): int(r) for n, r in self.ranks.items() if r}
        object.__setattr__(self, "ranks", ranks)
        object.__setattr__(self, "incomplete", frozenset(self.incomplete))
        diffs = {}
        for n, m in self.diffs.items():
            if m.shape != (self.rank(n + 1), self.rank(n)):
                raise ComplexError(f"d[{n}] has shape {m.shape}, expected {(self.rank(n + 1), self.rank(n))}")
            if m.ring != self.ring:
                raise ComplexError("differential over the wrong ring")
            if not m.is_zero():
                diffs[n] = m
        object.__setattr__(self, "diffs", diffs)
        for n in diffs:
            if n + 1 in diffs and not (diffs[n + 1] @ diffs[n]).is_zero():
                raise ComplexError(f"d[{n + 1}] d[{n}] != 0")

    @property
    def lo(self) -> int:
        return min(self.ranks, default=0)

    @property
    def hi(self) -> int:
        return max(self.ranks, default=-1)

    @property
    def window(self) -> tuple[int, int]:
        return (self.lo, self.hi)

    def rank(self, n: int) -> int:
        return self.ranks.get(n, 0)

    def d(self, n: int) -> SparseMat:
        m = self.diffs.get(n)
        if m is None:
            return SparseMat.zero(self.rank(n + 1), self.rank(n), self.ring)
        return m

    def degrees(self) -> range:
        return range(self.lo, self.hi + 1)

    def is_trusted(self, n: int) -> bool:
        return not ({n - 1, n, n + 1} & self.incomplete)

    def same_as(self, other: "CochainComplex") -> bool:
        """Exact equality of ranks and every differential matrix."""
        if self.ranks != other.ranks or self.ring != other.ring:
            return False
        degs = set(self.ranks) | set(other.ranks)
        return all(self.d(n) == other.d(n) for n in degs)

    def __repr__(self) -> str:
        return f"CochainComplex({self.ring}, ranks={dict(sorted(self.ranks.items()))})"

    @classmethod
    def concentrated(cls, ring: Coefficients, degree: int, rank: int = 1) -> "CochainComplex":
        return cls(ring, {degree: rank})


@dataclass(frozen=True, eq=False)
class ChainMap:
    source: CochainComplex
    target: CochainComplex
    mats: dict

    def __post_init__(self):
        for n in set(self.source.ranks) | set(self.target.ranks):
            m = self.at(n)
            if m.shape != (self.target.rank(n), self.source.rank(n)):
                raise ComplexError(f"map at degree {n} has shape {m.shape}")
            lhs = self.target.d(n) @ m
            rhs = self.at(n + 1) @ self.source.d(n)
            if lhs != rhs:
                raise ComplexError(f"map does not commute with d at degree {n}")

    def at(self, n: int) -> SparseMat:
        m = self.mats.get(n)
        if m is None:
            return SparseMat.zero(self.target.rank(n), self.source.rank(n), self.source.ring)
        return m


def shift(C: CochainComplex, n: int) -> CochainComplex:
    """C[n]: (C[n])^i = C^{i+n}, differential multiplied by (-1)^n."""
    sign = -1 if n % 2 else 1
    return CochainComplex(
        C.ring,
        {i - n: r for i, r in C.ranks.items()},
        {i - n: m.scale(sign) if sign < 0 else m for i, m in C.diffs.items()},
        {i - n: lab for i, lab in C.labels.items()},
        frozenset(i - n for i in C.incomplete),
    )


def direct_sum(*Cs: CochainComplex) -> CochainComplex:
    ring = Cs[0].ring
    degs = sorted(set().union(*(C.ranks for C in Cs)))
    ranks = {n: sum(C.rank(n) for C in Cs) for n in degs}
    diffs = {}
    for n in degs:
        blocks = {(k, k): C.d(n) for k, C in enumerate(Cs)}
        diffs[n] = SparseMat.block(blocks, [C.rank(n + 1) for C in Cs], [C.rank(n) for C in Cs], ring)
    incomplete = frozenset().union(*(C.incomplete for C in Cs))
    return CochainComplex(ring, ranks, diffs, incomplete=incomplete)


def tensor(C: CochainComplex, D: CochainComplex) -> CochainComplex:
    """Tensor product with Koszul signs; basis ordered by (i, C-basis, D-basis)."""
    if C.ring != D.ring:
        raise LinAlgError("ring mismatch in tensor")
    R = C.ring
    degs = sorted({i + j for i in C.ranks for j in D.ranks})
    # block layout: for each total degree, pieces (i, n-i) ordered by i
    layout = {n: [i for i in sorted(C.ranks) if D.rank(n - i)] for n in degs}
    ranks = {n: sum(C.rank(i) * D.rank(n - i) for i in layout[n]) for n in degs}
    diffs = {}
    for n in degs:
        src = layout[n]
        dst = layout.get(n + 1, [])
        if not dst:
            continue
        blocks = {}
        for a, i in enumerate(src):
            j = n - i
            if i + 1 in dst:
                b = dst.index(i + 1)
                blocks[(b, a)] = C.d(i).kron(SparseMat.identity(D.rank(j), R))
            if i in dst:
                b = dst.index(i)
                m = SparseMat.identity(C.rank(i), R).kron(D.d(j))
                blocks[(b, a)] = m.scale(-1) if i % 2 else m
        diffs[n] = SparseMat.block(
            blocks,
            [C.rank(i) * D.rank(n + 1 - i) for i in dst],
            [C.rank(i) * D.rank(n - i) for i in src],
            R,
        )
    incomplete = set()
    for i in C.incomplete:
        incomplete |= {i + j for j in set(D.ranks) | D.incomplete}
    for j in D.incomplete:
        incomplete |= {i + j for i in set(C.ranks) | C.incomplete}
    return CochainComplex(R, ranks, diffs, incomplete=frozenset(incomplete))


@dataclass(frozen=True, eq=False)
class Bicomplex:
    """Cells (q, p): q cosimplicial/cohomological, p simplicial/homological.

    ``dh[(q, p)]`` maps (q, p) -> (q+1, p); ``dv[(q, p)]`` maps (q, p) -> (q, p-1).
    The two differentials commute; signs enter only at totalization.
    """

    ring: Coefficients
    cells: dict
    dh: dict = field(default_factory=dict)
    dv: dict = field(default_factory=dict)
    incomplete: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "cells", {k: v for k, v in self.cells.items() if v})
        for (q, p), m in self.dh.items():
            if m.shape != (self.rank(q + 1, p), self.rank(q, p)):
                raise ComplexError(f"dh at {(q, p)} has shape {m.shape}")
        for (q, p), m in self.dv.items():
            if m.shape != (self.rank(q, p - 1), self.rank(q, p)):
                raise ComplexError(f"dv at {(q, p)} has shape {m.shape}")
        for (q, p) in self.cells:
            if not (self.h(q + 1, p) @ self.h(q, p)).is_zero():
                raise ComplexError(f"dh^2 != 0 at {(q, p)}")
            if not (self.v(q, p - 1) @ self.v(q, p)).is_zero():
                raise ComplexError(f"dv^2 != 0 at {(q, p)}")
            if self.h(q, p - 1) @ self.v(q, p) != self.v(q + 1, p) @ self.h(q, p):
                raise ComplexError(f"dh and dv do not commute at {(q, p)}")

    def rank(self, q: int, p: int) -> int:
        return self.cells.get((q, p), 0)

    def h(self, q: int, p: int) -> SparseMat:
        m = self.dh.get((q, p))
        return m if m is not None else SparseMat.zero(self.rank(q + 1, p), self.rank(q, p), self.ring)

    def v(self, q: int, p: int) -> SparseMat:
        m = self.dv.get((q, p))
        return m if m is not None else SparseMat.zero(self.rank(q, p - 1), self.rank(q, p), self.ring)


def tot_product(B: Bicomplex) -> CochainComplex:
    """Product-total complex: Tot^n = sum over q - p = n, d = d_h + (-1)^q d_v.

    Windows are finite, so the product is a finite sum.
    """
    R = B.ring
    cells_by_deg: dict[int, list] = {}
    for (q, p) in sorted(B.cells):
        cells_by_deg.setdefault(q - p, []).append((q, p))
    ranks = {n: sum(B.rank(*c) for c in cs) for n, cs in cells_by_deg.items()}
    diffs = {}
    for n, src in cells_by_deg.items():
        dst = cells_by_deg.get(n + 1, [])
        if not dst:
            continue
        blocks = {}
        for a, (q, p) in enumerate(src):
            if (q + 1, p) in dst:
                blocks[(dst.index((q + 1, p)), a)] = B.h(q, p)
            if (q, p - 1) in dst:
                m = B.v(q, p)
                blocks[(dst.index((q, p - 1)), a)] = m.scale(-1) if q % 2 else m
        diffs[n] = SparseMat.block(blocks, [B.rank(*c) for c in dst], [B.rank(*c) for c in src], R)
    incomplete = frozenset(q - p for (q, p) in B.incomplete)
    return CochainComplex(R, ranks, diffs, incomplete=incomplete)


@dataclass(frozen=True)
class CohomologyTable:
    ring: Coefficients
    window: tuple
    entries: dict
    trusted: frozenset = frozenset()

    def __post_init__(self):
        lo, hi = self.window
        bad = [n for n in self.trusted if not lo <= n <= hi]
        if bad:
            raise ValueError(f"trusted degrees {bad} outside window {self.window}")
        object.__setattr__(self, "trusted", frozenset(self.trusted))

    def __getitem__(self, n: int) -> CohomologyGroup:
        return self.entries.get(n, CohomologyGroup(self.ring, 0))

    @property
    def trusted_window(self) -> tuple | None:
        if not self.trusted:
            return None
        return (min(self.trusted), max(self.trusted))

    def rows(self) -> list[dict]:
        lo, hi = self.window
        return [
            {
                "degree": n,
                "rank": self[n].free_rank,
                "torsion": list(self[n].torsion),
                "trusted": n in self.trusted,
            }
            for n in range(lo, hi + 1)
        ]

    def nonzero(self) -> dict:
        return {n: g for n, g in self.entries.items() if not g.is_zero}

    def __str__(self) -> str:
        return ", ".join(f"H^{n}={self[n]}" + ("" if n in self.trusted else "?") for n in range(self.window[0], self.window[1] + 1))


def cohomology(C: CochainComplex, degrees: Iterable[int] | None = None) -> CohomologyTable:
    degs = list(C.degrees()) if degrees is None else list(degrees)
    entries = {n: subquotient(C.d(n - 1), C.d(n)) for n in degs}
    window = (min(degs), max(degs)) if degs else (0, -1)
    trusted = frozenset(n for n in degs if C.is_trusted(n))
    return CohomologyTable(C.ring, window, entries, trusted)


def cone(f: ChainMap) -> CochainComplex:
    """Mapping cone: cone^n = C^{n+1} + D^n, d(c, e) = (-d c, f c + d e)."""
    C, D = f.source, f.target
    R = C.ring
    degs = sorted({n - 1 for n in C.ranks} | set(D.ranks))
    ranks = {n: C.rank(n + 1) + D.rank(n) for n in degs}
    diffs = {}
    for n in degs:
        blocks = {
            (0, 0): C.d(n + 1).scale(-1),
            (1, 0): f.at(n + 1),
            (1, 1): D.d(n),
        }
        diffs[n] = SparseMat.block(blocks, [C.rank(n + 2), D.rank(n + 1)], [C.rank(n + 1), D.rank(n)], R)
    incomplete = frozenset({n - 1 for n in C.incomplete} | set(D.incomplete))
    return CochainComplex(R, ranks, diffs, incomplete=incomplete)
