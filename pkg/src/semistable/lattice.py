"""Exact integer linear algebra over free abelian groups.

Everything here is arbitrary-precision integer arithmetic; no floats.
Matrices are tuples of row tuples.  A map between lattices of ranks
(m out, n in) is an m x n integer matrix acting on column vectors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

Vector = tuple[int, ...]
Matrix = tuple[Vector, ...]

INFINITE = math.inf


# ---------------------------------------------------------------------------
# matrix helpers

def mat(rows: Iterable[Iterable[int]]) -> Matrix:
    return tuple(tuple(int(x) for x in row) for row in rows)


def identity(n: int) -> Matrix:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def zeros(m: int, n: int) -> Matrix:
    return tuple((0,) * n for _ in range(m))


def transpose(a: Matrix) -> Matrix:
    if not a:
        return ()
    return tuple(zip(*a))


def matmul(a: Matrix, b: Matrix) -> Matrix:
    bt = transpose(b)
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a)


def matvec(a: Matrix, v: Sequence[int]) -> Vector:
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def vec_add(u: Sequence[int], v: Sequence[int]) -> Vector:
    return tuple(x + y for x, y in zip(u, v))


def vec_sub(u: Sequence[int], v: Sequence[int]) -> Vector:
    return tuple(x - y for x, y in zip(u, v))


def vec_neg(v: Sequence[int]) -> Vector:
    return tuple(-x for x in v)


def vec_scale(c: int, v: Sequence[int]) -> Vector:
    return tuple(c * x for x in v)


def dot(u: Sequence, v: Sequence):
    return sum(x * y for x, y in zip(u, v))


def is_zero_vec(v: Sequence) -> bool:
    return all(x == 0 for x in v)


def primitive(v: Sequence[int]) -> Vector:
    """Divide out the gcd of the entries; the zero vector is returned as is."""
    g = 0
    for x in v:
        g = math.gcd(g, x)
    if g <= 1:
        return tuple(int(x) for x in v)
    return tuple(int(x) // g for x in v)


def columns(a: Matrix) -> list[Vector]:
    return list(transpose(a))


def from_columns(cols: Sequence[Sequence[int]], nrows: int) -> Matrix:
    if not cols:
        return tuple(() for _ in range(nrows))
    return transpose(mat(cols))


def hstack(a: Matrix, b: Matrix) -> Matrix:
    return tuple(ra + rb for ra, rb in zip(a, b))


def det(a: Matrix) -> int:
    """Exact determinant by fraction-free Bareiss elimination."""
    n = len(a)
    if n == 0:
        return 1
    assert all(len(row) == n for row in a)
    m = [list(row) for row in a]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


# ---------------------------------------------------------------------------
# normal forms

@dataclass(frozen=True)
class SNFDecomposition:
    """U * A * V = D with U, V unimodular and D diagonal, d1 | d2 | ..."""

    U: Matrix
    D: Matrix
    V: Matrix

    @property
    def rank(self) -> int:
        return sum(1 for i in range(min(len(self.D), len(self.D[0]) if self.D else 0))
                   if self.D[i][i] != 0)

    @property
    def invariant_factors(self) -> tuple[int, ...]:
        k = min(len(self.D), len(self.D[0]) if self.D else 0)
        return tuple(self.D[i][i] for i in range(k) if self.D[i][i] != 0)


def smith_normal_form(a: Matrix) -> SNFDecomposition:
    """Smith normal form with transformation matrices."""
    a = mat(a)
    m = len(a)
    n = len(a[0]) if m else 0
    d = [list(row) for row in a]
    u = [list(row) for row in identity(m)]
    v = [list(row) for row in identity(n)]

    def swap_rows(i, j):
        d[i], d[j] = d[j], d[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in d:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, c):
        d[dst] = [x + c * y for x, y in zip(d[dst], d[src])]
        u[dst] = [x + c * y for x, y in zip(u[dst], u[src])]

    def add_col(src, dst, c):
        for row in d:
            row[dst] += c * row[src]
        for row in v:
            row[dst] += c * row[src]

    t = 0
    while True:
        # locate the smallest nonzero entry of the trailing block
        pivot = None
        for i in range(t, m):
            for j in range(t, n):
                if d[i][j] != 0 and (pivot is None or abs(d[i][j]) < abs(d[pivot[0]][pivot[1]])):
                    pivot = (i, j)
        if pivot is None:
            break
        swap_rows(t, pivot[0])
        swap_cols(t, pivot[1])
        while True:
            for i in range(t + 1, m):
                if d[i][t] != 0:
                    add_row(t, i, -(d[i][t] // d[t][t]))
            if any(d[i][t] != 0 for i in range(t + 1, m)):
                # a remainder became the new, smaller pivot
                i = min((i for i in range(t + 1, m) if d[i][t] != 0),
                        key=lambda i: abs(d[i][t]))
                swap_rows(t, i)
                continue
            for j in range(t + 1, n):
                if d[t][j] != 0:
                    add_col(t, j, -(d[t][j] // d[t][t]))
            if any(d[t][j] != 0 for j in range(t + 1, n)):
                j = min((j for j in range(t + 1, n) if d[t][j] != 0),
                        key=lambda j: abs(d[t][j]))
                swap_cols(t, j)
                continue
            break
        # enforce divisibility of the rest of the block by the pivot
        bad = None
        for i in range(t + 1, m):
            for j in range(t + 1, n):
                if d[i][j] % d[t][t] != 0:
                    bad = (i, j)
                    break
            if bad:
                break
        if bad:
            add_row(bad[0], t, 1)
            continue
        if d[t][t] < 0:
            d[t] = [-x for x in d[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    return SNFDecomposition(mat(u), mat(d), mat(v))


def row_hermite_form(a: Matrix) -> Matrix:
    """Canonical basis (as rows) of the row space of an integer matrix.

    Row-style Hermite normal form: pivots positive, strictly increasing pivot
    columns, entries above a pivot reduced into [0, pivot).  Zero rows dropped.
    """
    rows = [list(r) for r in a if not is_zero_vec(r)]
    if not rows:
        return ()
    n = len(rows[0])
    result: list[list[int]] = []
    for col in range(n):
        pivots = [r for r in rows if r[col] != 0]
        if not pivots:
            continue
        # combine rows until a single one has a nonzero in this column
        while len(pivots) > 1:
            pivots.sort(key=lambda r: abs(r[col]))
            base = pivots[0]
            for r in pivots[1:]:
                q = r[col] // base[col]
                for k in range(n):
                    r[k] -= q * base[k]
            pivots = [r for r in pivots if r[col] != 0]
        piv = pivots[0]
        rows = [r for r in rows if r is not piv]
        # eliminate this column from the remaining rows
        for r in rows:
            if r[col] != 0:
                q = r[col] // piv[col]
                for k in range(n):
                    r[k] -= q * piv[k]
        rows = [r for r in rows if not is_zero_vec(r)]
        if piv[col] < 0:
            piv = [-x for x in piv]
        result.append(piv)
    # reduce entries above each pivot, left to right so earlier reductions
    # cannot reintroduce unreduced entries in later columns
    for i in range(len(result)):
        piv = result[i]
        col = next(k for k in range(n) if piv[k] != 0)
        for j in range(i):
            q = result[j][col] // piv[col]
            if q:
                result[j] = [x - q * y for x, y in zip(result[j], piv)]
    return mat(result)


def column_hermite_form(a: Matrix) -> Matrix:
    """Canonical basis (as columns) of the column space; see row_hermite_form."""
    return transpose(row_hermite_form(transpose(a)))


def solve_integer(a: Matrix, b: Sequence[int]) -> Vector | None:
    """One integer solution x of A x = b, or None if there is none."""
    snf = smith_normal_form(a)
    m = len(a)
    n = len(a[0]) if m else 0
    c = matvec(snf.U, b)
    y = [0] * n
    for i in range(m):
        d = snf.D[i][i] if i < n else 0
        if d == 0:
            if c[i] != 0:
                return None
        else:
            if c[i] % d != 0:
                return None
            y[i] = c[i] // d
    return matvec(snf.V, y)


def kernel_basis(a: Matrix) -> list[Vector]:
    """Basis (saturated) of the integer kernel of A, as vectors."""
    m = len(a)
    n = len(a[0]) if m else 0
    if n == 0:
        return []
    snf = smith_normal_form(a)
    r = snf.rank
    return [tuple(snf.V[i][j] for i in range(n)) for j in range(r, n)]


def right_inverse(a: Matrix) -> Matrix:
    """Integer right inverse of a surjective map; raises if not surjective."""
    m = len(a)
    cols = []
    for i in range(m):
        e = tuple(1 if j == i else 0 for j in range(m))
        x = solve_integer(a, e)
        if x is None:
            raise ValueError("matrix has no integer right inverse")
        cols.append(x)
    n = len(a[0]) if m else 0
    return from_columns(cols, n)


# ---------------------------------------------------------------------------
# lattices and maps

@dataclass(frozen=True)
class Lattice:
    rank: int

    def __post_init__(self):
        if self.rank < 0:
            raise ValueError("rank must be nonnegative")


@dataclass(frozen=True)
class LatticeMap:
    domain: Lattice
    codomain: Lattice
    matrix: Matrix

    def __post_init__(self):
        m = mat(self.matrix)
        object.__setattr__(self, "matrix", m)
        if len(m) != self.codomain.rank:
            raise ValueError("matrix row count does not match codomain rank")
        if any(len(row) != self.domain.rank for row in m):
            raise ValueError("matrix column count does not match domain rank")

    def __call__(self, v: Sequence[int]) -> Vector:
        return matvec(self.matrix, v)

    def compose(self, other: "LatticeMap") -> "LatticeMap":
        """self after other."""
        if other.codomain != self.domain:
            raise ValueError("maps are not composable")
        return LatticeMap(other.domain, self.codomain, matmul(self.matrix, other.matrix))

    @staticmethod
    def identity_map(lat: Lattice) -> "LatticeMap":
        return LatticeMap(lat, lat, identity(lat.rank))


@dataclass(frozen=True)
class Sublattice:
    """Sublattice of Z^n given by an independent column basis, stored in HNF."""

    ambient: Lattice
    basis: Matrix  # n x k, columns generate

    def __post_init__(self):
        b = mat(self.basis)
        if len(b) != self.ambient.rank:
            b = tuple(() for _ in range(self.ambient.rank)) if not b else b
        if len(b) != self.ambient.rank:
            raise ValueError("basis row count does not match ambient rank")
        h = column_hermite_form(b)
        ncols = len(h[0]) if h else 0
        if not h:
            h = tuple(() for _ in range(self.ambient.rank))
        # columns of an HNF are independent by construction
        object.__setattr__(self, "basis", h)

    @property
    def rank(self) -> int:
        return len(self.basis[0]) if self.basis else 0

    def vectors(self) -> list[Vector]:
        return columns(self.basis)

    def contains(self, v: Sequence[int]) -> bool:
        if self.rank == 0:
            return is_zero_vec(v)
        return solve_integer(self.basis, v) is not None

    def contains_sublattice(self, other: "Sublattice") -> bool:
        return all(self.contains(c) for c in other.vectors())

    def __le__(self, other: "Sublattice") -> bool:
        return other.contains_sublattice(self)


def full_sublattice(lat: Lattice) -> Sublattice:
    return Sublattice(lat, identity(lat.rank))


def zero_sublattice(lat: Lattice) -> Sublattice:
    return Sublattice(lat, tuple(() for _ in range(lat.rank)))


def sublattice_from_vectors(lat: Lattice, vecs: Iterable[Sequence[int]]) -> Sublattice:
    return Sublattice(lat, from_columns([tuple(v) for v in vecs], lat.rank))


# ---------------------------------------------------------------------------
# operations

def kernel_lattice(f: LatticeMap) -> Sublattice:
    """The saturated sublattice {v in domain : f(v) = 0}."""
    if f.codomain.rank == 0:
        return full_sublattice(f.domain)
    return sublattice_from_vectors(f.domain, kernel_basis(f.matrix))


def image_lattice(f: LatticeMap) -> Sublattice:
    return Sublattice(f.codomain, f.matrix)


def saturate(s: Sublattice) -> Sublattice:
    """(Q-span of s) intersected with the ambient lattice."""
    if s.rank == 0:
        return s
    snf = smith_normal_form(s.basis)
    r = snf.rank
    n = s.ambient.rank
    uinv = right_inverse(snf.U)  # U is unimodular, so this is its exact inverse
    cols = [tuple(uinv[i][j] for i in range(n)) for j in range(r)]
    return sublattice_from_vectors(s.ambient, cols)


def lattice_index(inner: Sublattice, outer: Sublattice) -> Union[int, float]:
    """|outer / inner| when finite, math.inf on a rank drop.

    Raises ValueError when inner is not contained in outer.
    """
    if inner.ambient != outer.ambient:
        raise ValueError("sublattices have different ambient lattices")
    coords = []
    for c in inner.vectors():
        x = solve_integer(outer.basis, c)
        if x is None:
            raise ValueError("inner sublattice is not contained in the outer one")
        coords.append(x)
    if inner.rank < outer.rank:
        return INFINITE
    x_mat = from_columns(coords, outer.rank)
    return abs(det(x_mat))


def fiber_product_lattice(p: LatticeMap, i: LatticeMap) -> tuple[Lattice, LatticeMap, LatticeMap]:
    """{(n, l) : p(n) = i(l)} with its two projections.

    The basis is taken from the kernel computation (SNF order), with each
    column sign-normalized so its first nonzero entry is positive.
    """
    if p.codomain != i.codomain:
        raise ValueError("maps do not share a codomain")
    stacked = hstack(p.matrix, tuple(tuple(-x for x in row) for row in i.matrix))
    basis = []
    for v in kernel_basis(stacked):
        lead = next((x for x in v if x != 0), 1)
        basis.append(vec_neg(v) if lead < 0 else v)
    k = len(basis)
    fiber = Lattice(k)
    nr = p.domain.rank
    proj_n = LatticeMap(fiber, p.domain, from_columns([v[:nr] for v in basis], nr))
    proj_l = LatticeMap(fiber, i.domain, from_columns([v[nr:] for v in basis], i.domain.rank))
    return fiber, proj_n, proj_l


@dataclass(frozen=True)
class LatticePushout:
    lattice: Lattice
    inc_left: LatticeMap   # from the codomain of u
    inc_right: LatticeMap  # from the codomain of v
    torsion_order: int


def pushout_lattice(u: LatticeMap, v: LatticeMap) -> LatticePushout:
    """(M + L) / <(u(p), -v(p))>, modulo torsion.

    The torsion killed in the quotient is reported via torsion_order.
    """
    if u.domain != v.domain:
        raise ValueError("maps do not share a domain")
    m, l = u.codomain.rank, v.codomain.rank
    rel = tuple(tuple(u.matrix[i][j] for j in range(u.domain.rank)) for i in range(m)) \
        + tuple(tuple(-v.matrix[i][j] for j in range(v.domain.rank)) for i in range(l))
    snf = smith_normal_form(rel)
    r = snf.rank
    torsion = 1
    for d in snf.invariant_factors:
        torsion *= d
    quot_rows = snf.U[r:]
    lat = Lattice(m + l - r)
    inc_left = LatticeMap(u.codomain, lat, tuple(row[:m] for row in quot_rows))
    inc_right = LatticeMap(v.codomain, lat, tuple(row[m:] for row in quot_rows))
    return LatticePushout(lat, inc_left, inc_right, torsion)


def dual_map(f: LatticeMap) -> LatticeMap:
    return LatticeMap(Lattice(f.codomain.rank), Lattice(f.domain.rank), transpose(f.matrix))


def intersect_sublattices(a: Sublattice, b: Sublattice) -> Sublattice:
    if a.ambient != b.ambient:
        raise ValueError("sublattices have different ambient lattices")
    ka, kb = a.rank, b.rank
    if ka == 0 or kb == 0:
        return zero_sublattice(a.ambient)
    neg_b = tuple(tuple(-x for x in row) for row in b.basis)
    stacked = hstack(a.basis, neg_b)
    vecs = [matvec(a.basis, v[:ka]) for v in kernel_basis(stacked)]
    return sublattice_from_vectors(a.ambient, vecs)


def preimage_sublattice(f: LatticeMap, s: Sublattice) -> Sublattice:
    """{v in domain : f(v) in s}."""
    if s.ambient != f.codomain:
        raise ValueError("sublattice does not live in the codomain")
    n = f.domain.rank
    if s.rank == 0:
        return kernel_lattice(f)
    neg_b = tuple(tuple(-x for x in row) for row in s.basis)
    stacked = hstack(f.matrix, neg_b)
    vecs = [v[:n] for v in kernel_basis(stacked)]
    return sublattice_from_vectors(f.domain, vecs)
