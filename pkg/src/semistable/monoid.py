"""Affine monoids: Hilbert bases, membership, pushouts, saturation, and a
bounded checker for the equational criterion of integrality.

All enumeration is exact and bounded by a strictly positive integer
functional (the sum of facet normals of the relevant cone), so results are
deterministic and independent of iteration order.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .cone import Cone, ConeError, dual_cone, image_cone, span_sublattice
from .lattice import (
    Lattice,
    LatticeMap,
    Sublattice,
    Vector,
    dot,
    full_sublattice,
    image_lattice,
    intersect_sublattices,
    is_zero_vec,
    kernel_lattice,
    mat,
    matvec,
    smith_normal_form,
    solve_integer,
    sublattice_from_vectors,
    transpose,
    vec_add,
    vec_neg,
    vec_sub,
)


class MonoidError(ValueError):
    pass


@dataclass(frozen=True)
class AffineMonoid:
    """Submonoid of a lattice given by a finite generating set.

    saturation_cone, when present, records that the monoid arose as
    (cone intersect lattice) data; generators must lie inside it.
    """

    lattice: Lattice
    generators: tuple[Vector, ...]
    saturation_cone: Optional[Cone] = None

    def __post_init__(self):
        gens = tuple(sorted({tuple(g) for g in self.generators if not is_zero_vec(g)}))
        object.__setattr__(self, "generators", gens)
        if self.saturation_cone is not None:
            for g in gens:
                if not self.saturation_cone.contains(g):
                    raise MonoidError(f"generator {g} outside the saturation cone")

    def cone(self) -> Cone:
        return Cone.from_generators(self.lattice, self.generators)

    def group(self) -> Sublattice:
        """The subgroup of the lattice generated by the monoid."""
        return sublattice_from_vectors(self.lattice, self.generators)


@dataclass(frozen=True)
class MonoidMap:
    source: AffineMonoid
    target: AffineMonoid
    lattice_map: LatticeMap

    def __post_init__(self):
        if (self.lattice_map.domain != self.source.lattice
                or self.lattice_map.codomain != self.target.lattice):
            raise MonoidError("lattice map does not match monoid lattices")
        for g in self.source.generators:
            img = self.lattice_map(g)
            if not _contains_modulo_units(img, self.target.generators,
                                          self.target.lattice):
                raise MonoidError(f"image of generator {g} is not in the target monoid")

    def __call__(self, v: Sequence[int]) -> Vector:
        return self.lattice_map(v)


# ---------------------------------------------------------------------------
# Hilbert bases

def _as_sublattice(lat_or_sub, ambient: Lattice) -> Sublattice:
    if isinstance(lat_or_sub, Sublattice):
        return lat_or_sub
    return full_sublattice(ambient)


def _smallest_multiple_coords(basis_cols, ray: Vector) -> Vector:
    """Coordinates (in the basis) of the smallest positive multiple of
    `ray` lying in the column lattice of basis_cols."""
    d = len(basis_cols[0]) if basis_cols else 0
    # solve basis * y = ray over the rationals
    from .lattice import row_hermite_form

    rows = [list(r) + [x] for r, x in zip(basis_cols, ray)]
    # gaussian elimination with fractions
    m = [[Fraction(x) for x in row] for row in rows]
    piv = []
    r = 0
    for c in range(d):
        sel = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if sel is None:
            continue
        m[r], m[sel] = m[sel], m[r]
        m[r] = [x / m[r][c] for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        piv.append(c)
        r += 1
    y = [Fraction(0)] * d
    for i, c in enumerate(piv):
        y[c] = m[i][-1]
    for i in range(r, len(m)):
        if m[i][-1] != 0:
            raise MonoidError("ray does not lie in the span of the lattice")
    k = 1
    for x in y:
        k = k * x.denominator // _gcd(k, x.denominator)
    return tuple(int(x * k) for x in y)


def _gcd(a: int, b: int) -> int:
    import math

    return math.gcd(a, b)


def hilbert_basis(c: Cone, L=None) -> list[Vector]:
    """Minimal generating set of c intersect L, lex sorted.

    Candidates are the lattice points of the zonotope spanned by the
    smallest lattice multiples of the extremal rays; irreducibles survive.
    """
    if not c.is_strictly_convex:
        raise ConeError("hilbert basis requires a strictly convex cone")
    L = _as_sublattice(L, c.lattice)
    if c.dim == 0:
        return []
    span = span_sublattice(c)
    M = intersect_sublattices(L, span)
    bm = M.basis  # n x d columns
    d = M.rank
    if d == 0:
        return []
    basis_rows = bm  # rows indexed by ambient coordinate
    # cone in M coordinates: facets pulled back through the basis
    cols = [tuple(basis_rows[i][j] for i in range(len(basis_rows))) for j in range(d)]
    facets_t = [tuple(dot(u, col) for col in cols) for u in c.facets]
    f_t = tuple(sum(u[j] for u in facets_t) for j in range(d))

    ray_coords = [_smallest_multiple_coords(basis_rows, r) for r in c.rays]
    bound = sum(dot(f_t, rc) for rc in ray_coords)

    # bounding box from the polytope vertices (0 and scaled rays)
    lo = [0] * d
    hi = [0] * d
    for rc in ray_coords:
        fr = dot(f_t, rc)
        for j in range(d):
            v = Fraction(bound * rc[j], fr)
            if v < lo[j]:
                lo[j] = v
            if v > hi[j]:
                hi[j] = v
    import math

    ranges = [range(math.floor(lo[j]), math.ceil(hi[j]) + 1) for j in range(d)]
    candidates = []
    for t in itertools.product(*ranges):
        if all(x == 0 for x in t):
            continue
        if dot(f_t, t) > bound:
            continue
        if any(dot(u, t) < 0 for u in facets_t):
            continue
        candidates.append(t)
    candidates.sort(key=lambda t: (dot(f_t, t), t))

    def in_monoid(t):
        return all(dot(u, t) >= 0 for u in facets_t)

    irreducible = []
    for t in candidates:
        ft = dot(f_t, t)
        reducible = False
        for s in candidates:
            if dot(f_t, s) >= ft:
                break
            if in_monoid(vec_sub(t, s)):
                reducible = True
                break
        if not reducible:
            irreducible.append(t)
    ambient = [tuple(dot(row, t) for row in basis_rows) for t in irreducible]
    return sorted(ambient)


def monoid_generators_of_cone(c: Cone, L=None) -> list[Vector]:
    """Generators of c intersect L, allowing cones with lines.

    For a strictly convex cone this is the Hilbert basis.  Otherwise the
    unit part (lattice points of the lineality space) contributes a basis
    with both signs, and the strictly convex quotient contributes lifts.
    """
    L = _as_sublattice(L, c.lattice)
    if c.dim == 0:
        return []
    if c.is_strictly_convex:
        return hilbert_basis(c, L)
    n = c.lattice.rank
    lin = sublattice_from_vectors(c.lattice, c.lines)
    units_lat = intersect_sublattices(L, lin)
    units = units_lat.vectors()

    # quotient by the saturated lineality
    from .lattice import from_columns

    lin_cols = from_columns([tuple(v) for v in c.lines], n)
    snf = smith_normal_form(lin_cols)
    l = snf.rank
    qmat = snf.U[l:]
    if not qmat:
        gens = [tuple(u) for u in units] + [vec_neg(u) for u in units]
        return sorted(set(gens))
    q = LatticeMap(c.lattice, Lattice(n - l), mat(qmat))
    span = span_sublattice(c)
    ls = intersect_sublattices(L, span)
    q_ls = sublattice_from_vectors(q.codomain, [q(v) for v in ls.vectors()])
    qc = Cone.from_generators(q.codomain, [q(g) for g in c.generators()])
    hb = hilbert_basis(qc, q_ls)
    # lift each quotient generator back into L intersect Span c
    lift_matrix = mat([q(col) for col in _basis_columns(ls)])
    lifts = []
    for h in hb:
        t = solve_integer(transpose(lift_matrix), h)
        assert t is not None
        lifts.append(tuple(dot(row, t) for row in ls.basis))
    gens = [tuple(u) for u in units] + [vec_neg(tuple(u)) for u in units] + lifts
    return sorted(set(gens))


def _basis_columns(s: Sublattice) -> list[Vector]:
    b = s.basis
    d = s.rank
    return [tuple(b[i][j] for i in range(len(b))) for j in range(d)]


def dual_monoid(c: Cone, L: Lattice | None = None) -> AffineMonoid:
    """Monoid of integer functionals nonnegative on c."""
    d = dual_cone(c)
    gens = monoid_generators_of_cone(d)
    return AffineMonoid(d.lattice, tuple(gens), saturation_cone=d)


# ---------------------------------------------------------------------------
# membership

def _positive_functional(gens: Sequence[Vector], n: int) -> Vector:
    c = Cone.from_generators(n, gens)
    if not c.is_strictly_convex:
        raise MonoidError(
            "no strictly positive functional: generators span a non-convex direction"
        )
    f = tuple(sum(u[j] for u in c.facets) for j in range(n)) if c.facets else (0,) * n
    for g in gens:
        if dot(f, g) <= 0:
            raise MonoidError("functional not strictly positive on a generator")
    return f


def monoid_membership(w: Sequence[int], M: AffineMonoid):
    """(True, coefficients) when w is a nonnegative combination, else (False, None)."""
    w = tuple(w)
    gens = M.generators
    if is_zero_vec(w):
        return True, (0,) * len(gens)
    if not gens:
        return False, None
    f = _positive_functional(gens, M.lattice.rank)
    fw = dot(f, w)
    if fw < 0:
        return False, None

    fg = [dot(f, g) for g in gens]

    def search(idx: int, rest: Vector, rest_f: int):
        if idx == len(gens):
            return () if is_zero_vec(rest) else None
        g, v = gens[idx], fg[idx]
        out = None
        for coeff in range(rest_f // v + 1):
            tail = search(idx + 1, vec_sub(rest, tuple(coeff * x for x in g)),
                          rest_f - coeff * v)
            if tail is not None:
                return (coeff,) + tail
        return out

    witness = search(0, w, fw)
    if witness is None:
        return False, None
    return True, witness


def _contains_modulo_units(w: Sequence[int], gens: Sequence[Vector],
                           lattice: Lattice) -> bool:
    """Membership that tolerates unit generators (g with -g in the cone)."""
    w = tuple(w)
    gens = tuple(tuple(g) for g in gens if not is_zero_vec(g))
    if is_zero_vec(w):
        return True
    if not gens:
        return False
    c = Cone.from_generators(lattice, gens)
    if c.is_strictly_convex:
        ok, _ = monoid_membership(w, AffineMonoid(lattice, gens))
        return ok
    # unit generators are those lying in the lineality space of the cone
    unit_gens = [g for g in gens if all(dot(u, g) == 0 for u in c.facets)
                 and all(dot(e, g) == 0 for e in c.span_equations)]
    rest = [g for g in gens if g not in unit_gens]
    # the unit generators span a linear space, so they generate a group
    U = sublattice_from_vectors(lattice, unit_gens)
    n = lattice.rank
    from .lattice import from_columns

    sat_lin_cols = from_columns([tuple(v) for v in c.lines], n)
    snf = smith_normal_form(sat_lin_cols)
    l = snf.rank
    qmat = snf.U[l:]
    if not qmat:
        return U.contains(w)
    q = LatticeMap(lattice, Lattice(n - l), mat(qmat))
    # the quotient kills exactly the lineality, so images of rest are nonzero
    qgens = tuple(q(g) for g in rest)
    qw = q(w)
    if is_zero_vec(qw):
        return U.contains(w)
    if not qgens:
        return False
    # enumerate every bounded witness for qw and test the residual in U
    f = _positive_functional(qgens, n - l)
    fw = dot(f, qw)
    if fw < 0:
        return False
    fg = [dot(f, g) for g in qgens]
    rest_nz = list(rest)

    found = []

    def search(idx: int, acc, rest_q: Vector, rest_f: int):
        if found:
            return
        if idx == len(qgens):
            if is_zero_vec(rest_q):
                total = (0,) * n
                for coeff, g in zip(acc, rest_nz):
                    total = vec_add(total, tuple(coeff * x for x in g))
                if U.contains(vec_sub(w, total)):
                    found.append(True)
            return
        v = fg[idx]
        for coeff in range(rest_f // v + 1):
            search(idx + 1, acc + (coeff,),
                   vec_sub(rest_q, tuple(coeff * x for x in qgens[idx])),
                   rest_f - coeff * v)
            if found:
                return

    search(0, (), qw, fw)
    return bool(found)


# ---------------------------------------------------------------------------
# image monoids and base lattices

def image_monoid_equals_cone_monoid(p: LatticeMap, sigma: Cone, kappa: Cone,
                                    N_sub: Sublattice | None = None,
                                    Q_sub: Sublattice | None = None) -> bool:
    """True iff p(N_sub intersect sigma) equals Q_sub intersect kappa."""
    N_sub = _as_sublattice(N_sub, p.domain)
    Q_sub = _as_sublattice(Q_sub, p.codomain)
    if image_cone(p, sigma) != kappa:
        raise MonoidError("sigma does not map onto kappa")
    image_gens = tuple(p(h) for h in hilbert_basis(sigma, N_sub))
    target = hilbert_basis(kappa, Q_sub)
    tgt_monoid = AffineMonoid(p.codomain, tuple(g for g in target))
    for g in image_gens:
        if not is_zero_vec(g):
            ok, _ = monoid_membership(g, tgt_monoid)
            assert ok, "image monoid escapes the cone monoid"
    src_monoid = AffineMonoid(p.codomain, image_gens)
    for h in target:
        ok, _ = monoid_membership(h, src_monoid)
        if not ok:
            return False
    return True


def q_kappa_lattice(p: LatticeMap, kappa: Cone,
                    contributing: Sequence[tuple[Cone, Sublattice]]) -> Sublattice:
    """Span(kappa) intersected with every image lattice p(N_sigma ∩ Span sigma)."""
    if not contributing:
        raise MonoidError("at least one contributing cone is required")
    result = span_sublattice(kappa)
    for sigma, n_sub in contributing:
        if not image_cone(p, sigma).contains_cone(kappa):
            raise MonoidError("contributing cone does not cover kappa")
        m = intersect_sublattices(n_sub, span_sublattice(sigma))
        img = sublattice_from_vectors(p.codomain, [p(v) for v in m.vectors()])
        result = intersect_sublattices(result, img)
    return result


# ---------------------------------------------------------------------------
# pushouts and saturation

def pushout_monoid(u: MonoidMap, v: MonoidMap) -> AffineMonoid:
    """Image of M ⊕ L in the pushout of the underlying lattices."""
    if u.source != v.source:
        raise MonoidError("pushout requires a shared source monoid")
    from .lattice import pushout_lattice

    po = pushout_lattice(u.lattice_map, v.lattice_map)
    gens = [po.inc_left(g) for g in u.target.generators]
    gens += [po.inc_right(g) for g in v.target.generators]
    return AffineMonoid(po.lattice, tuple(gens))


def is_saturated(M: AffineMonoid) -> bool:
    """True iff M equals (cone of M) intersected with (group of M)."""
    c = M.cone()
    group = M.group()
    for g in monoid_generators_of_cone(c, group):
        if not _contains_modulo_units(g, M.generators, M.lattice):
            return False
    return True


# ---------------------------------------------------------------------------
# equational criterion of integrality (bounded)

def _enumerate_monoid(gens: Sequence[Vector], f: Vector, bound: int) -> set[Vector]:
    n = len(f)
    zero = (0,) * n
    seen = {zero}
    frontier = [zero]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = vec_add(x, g)
                if y not in seen and dot(f, y) <= bound:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return seen


def kato_integral(u: MonoidMap, height_bound: int = 8):
    """Bounded check of the equational criterion of integrality for u.

    Returns (True, None) when no counterexample of height <= height_bound
    exists, else (False, (p1, p2, q1, q2)).  A True answer is evidence,
    not a proof.
    """
    if kernel_lattice(u.lattice_map).rank != 0:
        raise MonoidError("the criterion requires an injective lattice map")
    tgt = u.target
    src = u.source
    n = tgt.lattice.rank
    all_gens = list(tgt.generators) + [u(g) for g in src.generators]
    all_gens = [g for g in all_gens if not is_zero_vec(g)]
    if not all_gens:
        return True, None
    f = _positive_functional(all_gens, n)

    T = _enumerate_monoid(tgt.generators, f, height_bound)
    # source elements, keyed by their (injective) images
    fu = tuple(sum(f[i] * u.lattice_map.matrix[i][j] for i in range(n))
               for j in range(src.lattice.rank))
    S = _enumerate_monoid(src.generators, fu, height_bound)
    img = {tuple(u(s)): s for s in S}

    by_sum: dict[Vector, list[tuple[Vector, Vector]]] = {}
    for p in T:
        for q, s in img.items():
            key = vec_add(p, q)
            by_sum.setdefault(key, []).append((p, s))

    for pairs in by_sum.values():
        for (p1, s1), (p2, s2) in itertools.combinations(pairs, 2):
            if _kato_witness(p1, s1, p2, s2, u, T, S):
                continue
            q1 = tuple(u(s1))
            q2 = tuple(u(s2))
            return False, (p1, p2, q1, q2)
    return True, None


def _kato_witness(p1, s1, p2, s2, u: MonoidMap, T: set, S: set) -> bool:
    for r1 in S:
        w = vec_sub(p1, tuple(u(r1)))
        if w not in T:
            continue
        r2 = vec_sub(vec_add(s1, r1), s2)
        if r2 not in S:
            continue
        if vec_add(w, tuple(u(r2))) == p2:
            return True
    return False
