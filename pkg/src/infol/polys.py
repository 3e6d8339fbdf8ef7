"""Truncated multivariate polynomials with exact coefficients.

Used for generator images of the Čech–Alexander towers and of formal
groupoids, where every map is an algebra map given on generators and
extended multiplicatively.  A ``Trunc`` bounds the total degree in a chosen
set of "formal" variables (the adic precision) and, optionally, the total
degree in all variables.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Sequence

from .exactlin import Coefficients


@dataclass(frozen=True)
class Trunc:
    formal: frozenset = frozenset()
    prec: int | None = None
    total: int | None = None

    def keeps(self, exps: tuple) -> bool:
        if self.prec is not None and sum(exps[i] for i in self.formal) >= self.prec:
            return False
        if self.total is not None and sum(exps) > self.total:
            return False
        return True


NO_TRUNC = Trunc()


class Poly:
    """Polynomial in ``nvars`` variables; terms map exponent tuples to coefficients."""

    __slots__ = ("ring", "nvars", "terms")

    def __init__(self, ring: Coefficients, nvars: int, terms: dict | None = None):
        self.ring = ring.scalars
        self.nvars = nvars
        R = self.ring
        clean = {}
        for e, c in (terms or {}).items():
            c = R(c)
            if not R.is_zero(c):
                clean[tuple(e)] = c
        self.terms = clean

    @classmethod
    def constant(cls, c, ring: Coefficients, nvars: int | None = None) -> "Poly":
        n = len(ring.variables) if nvars is None else nvars
        return cls(ring, n, {(0,) * n: c})

    @classmethod
    def var(cls, i: int, nvars: int, ring: Coefficients) -> "Poly":
        e = [0] * nvars
        e[i] = 1
        return cls(ring, nvars, {tuple(e): 1})

    @classmethod
    def monomial(cls, exps: Sequence[int], ring: Coefficients, coeff=1) -> "Poly":
        return cls(ring, len(exps), {tuple(exps): coeff})

    # -- basics -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self.terms == other.terms
        if other == 0:
            return not self.terms
        return NotImplemented

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        return f"Poly({self.to_str()})"

    def to_str(self, names: Sequence[str] | None = None) -> str:
        if not self.terms:
            return "0"
        names = names or [f"v{i}" for i in range(self.nvars)]
        out = []
        for e in sorted(self.terms, reverse=True):
            c = self.terms[e]
            mono = "*".join(n if k == 1 else f"{n}^{k}" for n, k in zip(names, e) if k)
            if not mono:
                out.append(str(c))
            elif c == 1:
                out.append(mono)
            else:
                out.append(f"{c}*{mono}")
        return " + ".join(out)

    def _binop_check(self, other: "Poly"):
        if self.nvars != other.nvars:
            raise ValueError("variable count mismatch")

    def _lift(self, other) -> "Poly":
        if isinstance(other, Poly):
            return other
        return Poly(self.ring, self.nvars, {(0,) * self.nvars: other})

    def __add__(self, other) -> "Poly":
        other = self._lift(other)
        self._binop_check(other)
        R = self.ring
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = R.add(t.get(e, R.zero()), c)
        return Poly(R, self.nvars, t)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        R = self.ring
        return Poly(R, self.nvars, {e: R.neg(c) for e, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "Poly":
        return self._lift(other) - self

    def mul(self, other, trunc: Trunc = NO_TRUNC) -> "Poly":
        other = self._lift(other)
        self._binop_check(other)
        R = self.ring
        t: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                if not trunc.keeps(e):
                    continue
                t[e] = R.add(t.get(e, R.zero()), R.mul(c1, c2))
        return Poly(R, self.nvars, t)

    def __mul__(self, other) -> "Poly":
        return self.mul(other)

    __rmul__ = __mul__

    def pow(self, k: int, trunc: Trunc = NO_TRUNC) -> "Poly":
        out = Poly.constant(1, self.ring, self.nvars)
        base = self
        while k:
            if k & 1:
                out = out.mul(base, trunc)
            k >>= 1
            if k:
                base = base.mul(base, trunc)
        return out

    def truncate(self, trunc: Trunc) -> "Poly":
        return Poly(self.ring, self.nvars, {e: c for e, c in self.terms.items() if trunc.keeps(e)})

    def subs(self, images: Sequence["Poly"], trunc: Trunc = NO_TRUNC, nvars: int | None = None) -> "Poly":
        """Algebra map sending variable i to ``images[i]``; ``nvars`` is needed when there are no images."""
        if len(images) != self.nvars:
            raise ValueError("need one image per variable")
        n_out = nvars if nvars is not None else images[0].nvars if images else 0
        R = self.ring
        cache: dict = {}

        def power(i, k):
            key = (i, k)
            if key not in cache:
                cache[key] = images[i].pow(k, trunc)
            return cache[key]

        out = Poly(R, n_out)
        for e, c in self.terms.items():
            term = Poly.constant(c, R, n_out)
            for i, k in enumerate(e):
                if k:
                    term = term.mul(power(i, k), trunc)
                    if term.is_zero():
                        break
            out = out + term
        return out.truncate(trunc)

    def degree_in(self, idx) -> int:
        idx = list(idx)
        return max((sum(e[i] for i in idx) for e in self.terms), default=-1)

    def homogeneous_part(self, idx, deg: int) -> "Poly":
        idx = list(idx)
        return Poly(self.ring, self.nvars, {e: c for e, c in self.terms.items() if sum(e[i] for i in idx) == deg})

    def embed(self, nvars: int, positions: Sequence[int]) -> "Poly":
        """Re-home variables: variable i goes to ``positions[i]`` among ``nvars``."""
        t = {}
        for e, c in self.terms.items():
            ne = [0] * nvars
            for i, k in enumerate(e):
                ne[positions[i]] += k
            t[tuple(ne)] = c
        return Poly(self.ring, nvars, t)

    def to_json(self) -> list:
        return [[list(e), str(c)] for e, c in sorted(self.terms.items())]


def monomials(nvars: int, degree: int) -> list[tuple]:
    """Exponent tuples of total degree ``degree``, in graded-lex order."""
    out = []
    for combo in combinations_with_replacement(range(nvars), degree):
        e = [0] * nvars
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return sorted(out, reverse=True)


def monomial_basis(nvars: int, trunc: Trunc, max_total: int) -> list[tuple]:
    """All monomials of total degree <= max_total kept by ``trunc``."""
    out = []
    for d in range(max_total + 1):
        out += [e for e in monomials(nvars, d) if trunc.keeps(e)]
    return out
