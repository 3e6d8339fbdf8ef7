"""Exact coefficient rings and sparse linear algebra.

Everything downstream (cohomology tables, normalizations, totalizations)
reduces to a handful of primitives here: rank, kernel, exact solving and
Smith normal form.  Matrices act on column vectors; vectors are plain
``dict`` objects mapping an index to a nonzero ring element.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

__all__ = [
    "Coefficients",
    "ZZ",
    "QQ",
    "GF",
    "SparseMat",
    "CohomologyGroup",
    "LinAlgError",
    "ComposabilityError",
    "smith_normal_form",
    "kernel_basis",
    "rank",
    "is_surjective",
    "solve",
    "subquotient",
    "homology_coordinates",
    "in_image",
]


class LinAlgError(ValueError):
    """Raised when an operation is not supported over the given ring."""


class ComposabilityError(LinAlgError):
    """Raised when d_out * d_in is not zero."""


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


@dataclass(frozen=True)
class Coefficients:
    """Descriptor of a base ring: Z, Q, F_p, or a polynomial ring over one of those."""

    kind: str
    p: int | None = None
    base: "Coefficients | None" = None
    variables: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in ("Z", "Q", "Fp", "Poly"):
            raise ValueError(f"unknown coefficient kind {self.kind!r}")
        if self.kind == "Fp" and not (isinstance(self.p, int) and _is_prime(self.p)):
            raise ValueError(f"F_p needs a prime p, got {self.p!r}")
        if self.kind == "Poly":
            if self.base is None or self.base.kind == "Poly":
                raise ValueError("polynomial base must be Z, Q or F_p")
            if len(set(self.variables)) != len(self.variables):
                raise ValueError("repeated polynomial variable")

    # -- constructors -------------------------------------------------
    @staticmethod
    def integers() -> "Coefficients":
        return ZZ

    @staticmethod
    def rationals() -> "Coefficients":
        return QQ

    @staticmethod
    def prime_field(p: int) -> "Coefficients":
        return Coefficients("Fp", p=p)

    @staticmethod
    def polynomial(base: "Coefficients", variables: Sequence[str]) -> "Coefficients":
        return Coefficients("Poly", base=base, variables=tuple(variables))

    # -- properties ---------------------------------------------------
    @property
    def is_field(self) -> bool:
        return self.kind in ("Q", "Fp")

    @property
    def characteristic(self) -> int:
        if self.kind == "Fp":
            return self.p
        if self.kind == "Poly":
            return self.base.characteristic
        return 0

    @property
    def scalars(self) -> "Coefficients":
        """The discrete ring underneath (self unless polynomial)."""
        return self.base if self.kind == "Poly" else self

    def __str__(self) -> str:
        if self.kind == "Fp":
            return f"F{self.p}"
        if self.kind == "Poly":
            return f"{self.base}[{','.join(self.variables)}]"
        return self.kind

    # -- arithmetic ---------------------------------------------------
    def __call__(self, x):
        """Coerce ``x`` into this ring."""
        k = self.kind
        if k == "Z":
            if isinstance(x, Fraction):
                if x.denominator != 1:
                    raise LinAlgError(f"{x} is not an integer")
                return int(x.numerator)
            return int(x)
        if k == "Q":
            return Fraction(x)
        if k == "Fp":
            if isinstance(x, Fraction):
                return (x.numerator * pow(x.denominator, -1, self.p)) % self.p
            return int(x) % self.p
        from .polys import Poly

        if isinstance(x, Poly):
            return x
        return Poly.constant(self.base(x), self)

    def zero(self):
        return self(0)

    def one(self):
        return self(1)

    def add(self, a, b):
        if self.kind == "Fp":
            return (a + b) % self.p
        return a + b

    def sub(self, a, b):
        if self.kind == "Fp":
            return (a - b) % self.p
        return a - b

    def mul(self, a, b):
        if self.kind == "Fp":
            return (a * b) % self.p
        return a * b

    def neg(self, a):
        if self.kind == "Fp":
            return (-a) % self.p
        return -a

    def is_zero(self, a) -> bool:
        if self.kind == "Poly":
            return a.is_zero()
        return a == 0

    def inv(self, a):
        if self.kind == "Q":
            return 1 / Fraction(a)
        if self.kind == "Fp":
            return pow(a, -1, self.p)
        if self.kind == "Z" and a in (1, -1):
            return a
        raise LinAlgError(f"{a} is not invertible in {self}")

    def reduce_from(self, other: "Coefficients", a):
        """Map an element of Z (or Q) into this ring."""
        if other.kind == "Z":
            return self(a)
        if other.kind == "Q" and self.kind in ("Q", "Fp"):
            return self(a)
        raise LinAlgError(f"no canonical map {other} -> {self}")


ZZ = Coefficients("Z")
QQ = Coefficients("Q")


def GF(p: int) -> Coefficients:
    return Coefficients("Fp", p=p)


# ---------------------------------------------------------------------------
# sparse matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SparseMat:
    """Sparse matrix with exact entries; no stored entry is zero."""

    rows: int
    cols: int
    entries: dict = field(default_factory=dict)
    ring: Coefficients = ZZ

    def __post_init__(self):
        clean = {}
        for (i, j), v in self.entries.items():
            if not (0 <= i < self.rows and 0 <= j < self.cols):
                raise IndexError(f"entry {(i, j)} outside {self.rows}x{self.cols}")
            v = self.ring(v)
            if not self.ring.is_zero(v):
                clean[(i, j)] = v
        object.__setattr__(self, "entries", clean)

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, rows: int, cols: int, ring: Coefficients = ZZ) -> "SparseMat":
        return cls(rows, cols, {}, ring)

    @classmethod
    def identity(cls, n: int, ring: Coefficients = ZZ) -> "SparseMat":
        return cls(n, n, {(i, i): 1 for i in range(n)}, ring)

    @classmethod
    def from_dense(cls, data: Sequence[Sequence], ring: Coefficients = ZZ, cols: int | None = None) -> "SparseMat":
        rows = len(data)
        if cols is None:
            cols = len(data[0]) if rows else 0
        ent = {(i, j): v for i, row in enumerate(data) for j, v in enumerate(row) if v != 0}
        return cls(rows, cols, ent, ring)

    @classmethod
    def from_columns(cls, rows: int, columns: Sequence[dict], ring: Coefficients = ZZ) -> "SparseMat":
        ent = {}
        for j, col in enumerate(columns):
            for i, v in col.items():
                ent[(i, j)] = v
        return cls(rows, len(columns), ent, ring)

    # -- views --------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def to_dense(self) -> list[list]:
        z = self.ring.zero()
        out = [[z] * self.cols for _ in range(self.rows)]
        for (i, j), v in self.entries.items():
            out[i][j] = v
        return out

    def row_dicts(self) -> list[dict]:
        out = [dict() for _ in range(self.rows)]
        for (i, j), v in self.entries.items():
            out[i][j] = v
        return out

    def col_dicts(self) -> list[dict]:
        out = [dict() for _ in range(self.cols)]
        for (i, j), v in self.entries.items():
            out[j][i] = v
        return out

    def column(self, j: int) -> dict:
        return {i: v for (i, jj), v in self.entries.items() if jj == j}

    def is_zero(self) -> bool:
        return not self.entries

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseMat):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    def __hash__(self):
        return hash((self.rows, self.cols, frozenset(self.entries.items())))

    def __repr__(self) -> str:
        return f"SparseMat({self.rows}x{self.cols}, nnz={len(self.entries)}, ring={self.ring})"

    # -- arithmetic ---------------------------------------------------
    def __matmul__(self, other: "SparseMat") -> "SparseMat":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        R = self.ring
        rows_b = other.row_dicts()
        out: dict = {}
        for (i, k), a in self.entries.items():
            for j, b in rows_b[k].items():
                key = (i, j)
                out[key] = R.add(out.get(key, R.zero()), R.mul(a, b))
        return SparseMat(self.rows, other.cols, out, R)

    def __add__(self, other: "SparseMat") -> "SparseMat":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} + {other.shape}")
        R = self.ring
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = R.add(out.get(k, R.zero()), v)
        return SparseMat(self.rows, self.cols, out, R)

    def __neg__(self) -> "SparseMat":
        return self.scale(-1)

    def __sub__(self, other: "SparseMat") -> "SparseMat":
        return self + (-other)

    def scale(self, c) -> "SparseMat":
        R = self.ring
        c = R(c)
        return SparseMat(self.rows, self.cols, {k: R.mul(c, v) for k, v in self.entries.items()}, R)

    def transpose(self) -> "SparseMat":
        return SparseMat(self.cols, self.rows, {(j, i): v for (i, j), v in self.entries.items()}, self.ring)

    @property
    def T(self) -> "SparseMat":
        return self.transpose()

    def apply(self, vec: dict) -> dict:
        R = self.ring
        cols = self.col_dicts()
        out: dict = {}
        for j, c in vec.items():
            for i, a in cols[j].items():
                out[i] = R.add(out.get(i, R.zero()), R.mul(a, c))
        return {i: v for i, v in out.items() if not R.is_zero(v)}

    def change_ring(self, ring: Coefficients) -> "SparseMat":
        return SparseMat(self.rows, self.cols, {k: ring.reduce_from(self.ring, v) for k, v in self.entries.items()}, ring)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "SparseMat":
        rmap = {r: a for a, r in enumerate(rows)}
        cmap = {c: b for b, c in enumerate(cols)}
        ent = {(rmap[i], cmap[j]): v for (i, j), v in self.entries.items() if i in rmap and j in cmap}
        return SparseMat(len(rows), len(cols), ent, self.ring)

    def kron(self, other: "SparseMat") -> "SparseMat":
        R = self.ring
        ent = {}
        for (i, j), a in self.entries.items():
            for (k, l), b in other.entries.items():
                ent[(i * other.rows + k, j * other.cols + l)] = R.mul(a, b)
        return SparseMat(self.rows * other.rows, self.cols * other.cols, ent, R)

    @staticmethod
    def block(blocks: dict, row_sizes: Sequence[int], col_sizes: Sequence[int], ring: Coefficients) -> "SparseMat":
        """Assemble from ``{(bi, bj): SparseMat}`` with the given block sizes."""
        roff = [0]
        for s in row_sizes:
            roff.append(roff[-1] + s)
        coff = [0]
        for s in col_sizes:
            coff.append(coff[-1] + s)
        ent = {}
        for (bi, bj), m in blocks.items():
            if m.shape != (row_sizes[bi], col_sizes[bj]):
                raise ValueError(f"block {(bi, bj)} has shape {m.shape}")
            for (i, j), v in m.entries.items():
                ent[(roff[bi] + i, coff[bj] + j)] = v
        return SparseMat(roff[-1], coff[-1], ent, ring)

    def hstack(self, other: "SparseMat") -> "SparseMat":
        return SparseMat.block({(0, 0): self, (0, 1): other}, [self.rows], [self.cols, other.cols], self.ring)

    def vstack(self, other: "SparseMat") -> "SparseMat":
        return SparseMat.block({(0, 0): self, (1, 0): other}, [self.rows, other.rows], [self.cols], self.ring)


# ---------------------------------------------------------------------------
# elimination over fields
# ---------------------------------------------------------------------------


def _require_discrete(R: Coefficients):
    if R.kind == "Poly":
        raise LinAlgError("linear algebra over polynomial rings is not supported")


def _rref_rows(M: SparseMat):
    """Row-reduce over a field.  Returns (pivot columns, reduced rows)."""
    R = M.ring
    rows = [r for r in M.row_dicts() if r]
    pivots: list[int] = []
    reduced: list[dict] = []
    for row in rows:
        row = dict(row)
        for pc, prow in zip(pivots, reduced):
            c = row.get(pc)
            if c is not None:
                for j, v in prow.items():
                    nv = R.sub(row.get(j, R.zero()), R.mul(c, v))
                    if R.is_zero(nv):
                        row.pop(j, None)
                    else:
                        row[j] = nv
        if not row:
            continue
        pc = min(row)
        inv = R.inv(row[pc])
        row = {j: R.mul(inv, v) for j, v in row.items()}
        # keep the basis fully reduced
        for k, prow in enumerate(reduced):
            c = prow.get(pc)
            if c is not None:
                for j, v in row.items():
                    nv = R.sub(prow.get(j, R.zero()), R.mul(c, v))
                    if R.is_zero(nv):
                        prow.pop(j, None)
                    else:
                        prow[j] = nv
        pivots.append(pc)
        reduced.append(row)
    return pivots, reduced


def _field_rank(M: SparseMat) -> int:
    R = M.ring
    rows = [r for r in M.row_dicts() if r]
    basis: dict[int, dict] = {}
    for row in rows:
        row = dict(row)
        while row:
            pc = min(row)
            if pc not in basis:
                inv = R.inv(row[pc])
                basis[pc] = {j: R.mul(inv, v) for j, v in row.items()}
                break
            c = row[pc]
            for j, v in basis[pc].items():
                nv = R.sub(row.get(j, R.zero()), R.mul(c, v))
                if R.is_zero(nv):
                    row.pop(j, None)
                else:
                    row[j] = nv
    return len(basis)


def rank(M: SparseMat) -> int:
    """Rank of M (over the fraction field when the ring is Z)."""
    _require_discrete(M.ring)
    if M.ring.kind == "Z":
        return _field_rank(M.change_ring(QQ))
    return _field_rank(M)


def is_surjective(M: SparseMat) -> bool:
    """Whether M maps onto R^rows.

    Over Z this runs a column Hermite reduction row by row without tracking
    transforms: the image lattice has a triangular basis whose diagonal
    product is its index, so M is onto exactly when every pivot is a unit.
    """
    R = M.ring
    _require_discrete(R)
    if R.kind != "Z":
        return rank(M) == M.rows
    cols: dict[int, dict[int, int]] = {}
    for (i, j), v in M.entries.items():
        cols.setdefault(j, {})[i] = v
    active = set(cols)
    for t in range(M.rows):
        while True:
            hits = [j for j in active if cols[j].get(t)]
            if not hits:
                return False
            c = min(hits, key=lambda j: (abs(cols[j][t]), len(cols[j]), j))
            if len(hits) == 1:
                break
            pc, a = cols[c], cols[c][t]
            for j in hits:
                if j == c:
                    continue
                q = cols[j][t] // a
                col = cols[j]
                for i, v in pc.items():
                    w = col.get(i, 0) - q * v
                    if w:
                        col[i] = w
                    else:
                        col.pop(i, None)
        if abs(cols[c][t]) != 1:
            return False
        active.discard(c)
    return True


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------


def smith_normal_form(M: SparseMat):
    """Smith normal form over Z.

    Returns ``(diagonal, left, right)`` with ``left @ M @ right`` diagonal,
    ``left`` and ``right`` unimodular and the diagonal a divisibility chain
    of nonnegative integers (length ``min(rows, cols)``).
    """
    if M.ring.kind != "Z":
        raise LinAlgError(f"Smith normal form needs integer coefficients, got {M.ring}")
    m, n = M.rows, M.cols
    A = [list(r) for r in M.to_dense()]
    L = [[int(i == j) for j in range(m)] for i in range(m)]
    Rt = [[int(i == j) for j in range(n)] for i in range(n)]  # rows of R^T

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        L[i], L[j] = L[j], L[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        Rt[i], Rt[j] = Rt[j], Rt[i]

    def add_row(dst, src, q):  # row_dst += q * row_src
        if q:
            ad, as_ = A[dst], A[src]
            for k in range(n):
                if as_[k]:
                    ad[k] += q * as_[k]
            ld, ls = L[dst], L[src]
            for k in range(m):
                if ls[k]:
                    ld[k] += q * ls[k]

    def add_col(dst, src, q):  # col_dst += q * col_src
        if q:
            for row in A:
                if row[src]:
                    row[dst] += q * row[src]
            rd, rs = Rt[dst], Rt[src]
            for k in range(n):
                if rs[k]:
                    rd[k] += q * rs[k]

    t = 0
    while t < min(m, n):
        # pivot on the entry of least absolute value
        best = None
        for i in range(t, m):
            row = A[i]
            for j in range(t, n):
                v = row[j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            piv = A[t][t]
            clean = True
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // piv))
                    if A[i][t]:
                        clean = False
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // piv))
                    if A[t][j]:
                        clean = False
            if not clean:
                cand = [(abs(A[i][t]), i, t) for i in range(t + 1, m) if A[i][t]]
                cand += [(abs(A[t][j]), t, j) for j in range(t + 1, n) if A[t][j]]
                _, i, j = min(cand)
                if j == t:
                    swap_rows(t, i)
                else:
                    swap_cols(t, j)
                continue
            bad = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if A[i][j] % piv:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            add_row(t, bad, 1)
        if A[t][t] < 0:
            A[t] = [-v for v in A[t]]
            L[t] = [-v for v in L[t]]
        t += 1
    diag = [A[i][i] for i in range(min(m, n))]
    left = SparseMat.from_dense(L, ZZ, cols=m)
    right = SparseMat.from_dense(Rt, ZZ, cols=n).transpose()
    return diag, left, right


# ---------------------------------------------------------------------------
# kernels, solving, subquotients
# ---------------------------------------------------------------------------


def kernel_basis(M: SparseMat) -> list[dict]:
    """Basis of ker(M) as sparse column vectors.

    Over a field this is a vector-space basis; over Z a Z-basis of the
    kernel lattice.
    """
    R = M.ring
    _require_discrete(R)
    if R.kind == "Z":
        diag, _, right = smith_normal_form(M)
        r = sum(1 for d in diag if d)
        cols = right.col_dicts()
        return [cols[j] for j in range(r, M.cols)]
    pivots, reduced = _rref_rows(M)
    pivset = set(pivots)
    basis = []
    for f in range(M.cols):
        if f in pivset:
            continue
        vec = {f: R.one()}
        for pc, row in zip(pivots, reduced):
            c = row.get(f)
            if c is not None:
                vec[pc] = R.neg(c)
        basis.append(vec)
    return basis


def solve(B: SparseMat, Y: SparseMat) -> SparseMat:
    """Exact X with ``B @ X == Y``; raises if no solution exists.

    Over Z the system is solved over Q and the answer must be integral.
    When B has dependent columns the free coordinates are set to zero.
    """
    R = B.ring
    _require_discrete(R)
    if B.rows != Y.rows:
        raise ValueError("row mismatch in solve")
    F = QQ if R.kind == "Z" else R
    Bf = B.change_ring(F) if R.kind == "Z" else B
    Yf = Y.change_ring(F) if R.kind == "Z" else Y
    aug = Bf.hstack(Yf)
    pivots, reduced = _rref_rows(aug)
    nb = B.cols
    ent = {}
    for pc, row in zip(pivots, reduced):
        if pc >= nb:
            raise LinAlgError("system has no solution")
        for j, v in row.items():
            if j >= nb:
                ent[(pc, j - nb)] = v
    X = SparseMat(nb, Y.cols, ent, F)
    if R.kind == "Z":
        for v in X.entries.values():
            if v.denominator != 1:
                raise LinAlgError("system has no integral solution")
        X = SparseMat(nb, Y.cols, {k: int(v) for k, v in X.entries.items()}, ZZ)
    return X


@dataclass(frozen=True)
class CohomologyGroup:
    """Finitely generated module: free part plus invariant factors (Z only)."""

    ring: Coefficients
    free_rank: int
    torsion: tuple[int, ...] = ()

    def __post_init__(self):
        t = tuple(self.torsion)
        object.__setattr__(self, "torsion", t)
        if t and self.ring.kind != "Z":
            raise ValueError("torsion is only reported over Z")
        for a, b in zip(t, t[1:]):
            if b % a:
                raise ValueError(f"invariant factors {t} do not form a divisibility chain")
        if any(d <= 1 for d in t):
            raise ValueError("invariant factors must exceed 1")

    @property
    def is_zero(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    def __str__(self) -> str:
        parts = []
        base = str(self.ring)
        if self.free_rank:
            parts.append(base if self.free_rank == 1 else f"{base}^{self.free_rank}")
        parts += [f"Z/{d}" for d in self.torsion]
        return " + ".join(parts) if parts else "0"


def _check_pair(d_in: SparseMat, d_out: SparseMat):
    if d_in.ring != d_out.ring:
        raise LinAlgError("ring mismatch")
    if d_in.rows != d_out.cols:
        raise ValueError(f"incompatible shapes {d_in.shape}, {d_out.shape}")
    if not (d_out @ d_in).is_zero():
        raise ComposabilityError("d_out @ d_in is not zero")


def subquotient(d_in: SparseMat, d_out: SparseMat) -> CohomologyGroup:
    """ker(d_out) / im(d_in)."""
    R = d_in.ring
    _require_discrete(R)
    _check_pair(d_in, d_out)
    n = d_in.rows
    if R.is_field:
        return CohomologyGroup(R, n - rank(d_out) - rank(d_in))
    # ker(d_out) is saturated, so its torsion over im(d_in) is that of Z^n/im(d_in)
    diag, _, _ = smith_normal_form(d_in)
    r_in = sum(1 for d in diag if d)
    torsion = tuple(d for d in diag if d > 1)
    return CohomologyGroup(R, n - rank(d_out) - r_in, torsion)


def in_image(M: SparseMat, vec: dict) -> bool:
    """Whether ``vec`` lies in the image of M (exactly, over M's ring)."""
    try:
        solve(M, SparseMat.from_columns(M.rows, [vec], M.ring))
    except LinAlgError:
        return False
    return True


def homology_coordinates(d_in: SparseMat, d_out: SparseMat):
    """Explicit presentation of ker(d_out)/im(d_in).

    Returns ``(group, coords)`` where ``coords(z)`` maps a cycle (dict) to
    ``(free, tors)``: integer/field coordinates in a fixed basis of the
    free part and residues modulo the invariant factors.
    """
    R = d_in.ring
    _require_discrete(R)
    _check_pair(d_in, d_out)
    n = d_in.rows
    K = SparseMat.from_columns(n, kernel_basis(d_out), R)
    k = K.cols
    B = solve(K, d_in) if d_in.cols else SparseMat.zero(k, 0, R)
    if R.is_field:
        # complement of im(B) inside F^k: pick the non-pivot coordinates
        pivots, reduced = _rref_rows(B.transpose())
        # rows of B^T span im(B)^T; reduce a vector modulo them
        free_idx = [j for j in range(k) if j not in set(pivots)]

        def coords(z: dict):
            c = solve(K, SparseMat.from_columns(n, [z], R)).column(0)
            c = dict(c)
            for pc, row in zip(pivots, reduced):
                a = c.get(pc)
                if a is not None:
                    for j, v in row.items():
                        nv = R.sub(c.get(j, R.zero()), R.mul(a, v))
                        if R.is_zero(nv):
                            c.pop(j, None)
                        else:
                            c[j] = nv
            return [c.get(j, R.zero()) for j in free_idx], []

        return CohomologyGroup(R, len(free_idx)), coords
    diag, left, _ = smith_normal_form(B)
    r = sum(1 for d in diag if d)
    tors_idx = [i for i in range(r) if diag[i] > 1]
    group = CohomologyGroup(R, k - r, tuple(diag[i] for i in tors_idx))

    def coords(z: dict):
        c = solve(K, SparseMat.from_columns(n, [z], R))
        y = (left @ c).column(0)
        free = [y.get(i, 0) for i in range(r, k)]
        tors = [y.get(i, 0) % diag[i] for i in tors_idx]
        return free, tors

    return group, coords
