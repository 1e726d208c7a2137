"""Fans, stacky fans, fan morphisms, and the predicates on them:
properness, modifications, alterations, weak semistability, smoothness,
fiber products, cartesianness, base change, representability.

Support comparisons never touch real arithmetic: the ambient space is cut
into cells by every relevant hyperplane and one interior sample per cell
decides membership exactly.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .cone import (
    Cone,
    ConeError,
    dual_cone,
    image_cone,
    intersect,
    preimage_cone,
    span_sublattice,
    split_by_hyperplane,
)
from .lattice import (
    INFINITE,
    Lattice,
    LatticeMap,
    Sublattice,
    Vector,
    det,
    dot,
    dual_map,
    fiber_product_lattice,
    full_sublattice,
    hstack,
    intersect_sublattices,
    kernel_lattice,
    lattice_index,
    mat,
    matmul,
    preimage_sublattice,
    pushout_lattice,
    right_inverse,
    saturate,
    sublattice_from_vectors,
    transpose,
    vec_neg,
)
from .monoid import (
    AffineMonoid,
    MonoidMap,
    _contains_modulo_units,
    dual_monoid,
    image_monoid_equals_cone_monoid,
    pushout_monoid,
)


class FanError(ValueError):
    pass


# ---------------------------------------------------------------------------
# types

@dataclass(frozen=True)
class Fan:
    lattice: Lattice
    cones: tuple[Cone, ...]

    @staticmethod
    def from_cones(lattice: Lattice | int, cones: Iterable[Cone]) -> "Fan":
        if isinstance(lattice, int):
            lattice = Lattice(lattice)
        closed: dict = {}
        for c in cones:
            if c.lattice != lattice:
                raise FanError("cone lattice does not match the fan lattice")
            for f in c.faces():
                closed[(f.rays, f.lines)] = f
        if not closed:
            closed[((), ())] = Cone.zero(lattice)
        return Fan(lattice, tuple(sorted(closed.values())))

    def maximal_cones(self) -> list[Cone]:
        out = []
        for c in self.cones:
            if not any(o != c and o.contains_cone(c) for o in self.cones):
                out.append(c)
        return out

    def __contains__(self, c: Cone) -> bool:
        return c in self.cones


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...]

    def __bool__(self) -> bool:
        return not self.violations


def validate_fan(f: Fan) -> ValidationReport:
    bad: list[str] = []
    for c in f.cones:
        if not c.is_strictly_convex:
            bad.append(f"cone {c.rays} is not strictly convex")
    seen = set()
    for c in f.cones:
        key = (c.rays, c.lines)
        if key in seen:
            bad.append(f"duplicate cone {c.rays}")
        seen.add(key)
    cone_keys = {(c.rays, c.lines) for c in f.cones}
    for c in f.cones:
        if not c.is_strictly_convex:
            continue
        for face in c.faces():
            if (face.rays, face.lines) not in cone_keys:
                bad.append(f"face {face.rays} of {c.rays} missing from the fan")
    for a, b in itertools.combinations([c for c in f.cones if c.is_strictly_convex], 2):
        cap = intersect(a, b)
        if not is_face(cap, a) or not is_face(cap, b):
            bad.append(f"intersection of {a.rays} and {b.rays} is not a common face")
    return ValidationReport(tuple(bad))


def is_face(f: Cone, c: Cone) -> bool:
    if not c.is_strictly_convex:
        raise ConeError("face test requires a strictly convex cone")
    return f in c.faces()


def support_contains(f: Fan, v: Sequence) -> bool:
    return any(c.contains(v) for c in f.cones)


@dataclass(frozen=True)
class StackyFan:
    """Fan together with a finite-index sublattice for each cone."""

    fan: Fan
    assignments: tuple[tuple[Cone, Sublattice], ...]

    @staticmethod
    def from_dict(fan: Fan, sub: dict) -> "StackyFan":
        pairs = []
        for c in fan.cones:
            if c in sub:
                pairs.append((c, sub[c]))
            else:
                pairs.append((c, span_sublattice(c)))
        return StackyFan(fan, tuple(pairs))

    def sublattice(self, c: Cone) -> Sublattice:
        for cone, s in self.assignments:
            if cone == c:
                return s
        raise FanError(f"cone {c.rays} is not in the stacky fan")

    @staticmethod
    def trivial(fan: Fan) -> "StackyFan":
        return StackyFan.from_dict(fan, {})


def validate_stacky_fan(s: StackyFan) -> ValidationReport:
    bad: list[str] = []
    for c, sub in s.assignments:
        full = span_sublattice(c)
        try:
            idx = lattice_index(sub, full)
        except ValueError:
            bad.append(f"sublattice of {c.rays} is not contained in Span intersect N")
            continue
        if idx == INFINITE:
            bad.append(f"sublattice of {c.rays} has infinite index")
    cone_set = {c for c, _ in s.assignments}
    for c, sub in s.assignments:
        for face in c.faces():
            if face not in cone_set:
                continue
            expected = s.sublattice(face)
            got = intersect_sublattices(sub, span_sublattice(face))
            if got.basis != expected.basis:
                bad.append(
                    f"sublattice of face {face.rays} of {c.rays} disagrees with restriction"
                )
    return ValidationReport(tuple(bad))


@dataclass(frozen=True)
class FanMorphism:
    """Lattice map sending every source cone into some target cone.

    The assignment (smallest containing target cone) is recomputed here,
    never trusted from input.
    """

    source: Fan
    target: Fan
    lattice_map: LatticeMap
    assignment: tuple[tuple[Cone, Cone], ...] = field(default=(), compare=False)

    def __post_init__(self):
        if (self.lattice_map.domain != self.source.lattice
                or self.lattice_map.codomain != self.target.lattice):
            raise FanError("lattice map does not match fan lattices")
        pairs = []
        for c in self.source.cones:
            img = image_cone(self.lattice_map, c)
            target = minimal_containing_cone(self.target, img)
            pairs.append((c, target))
        object.__setattr__(self, "assignment", tuple(pairs))

    def image_of(self, c: Cone) -> Cone:
        for s, t in self.assignment:
            if s == c:
                return t
        raise FanError(f"cone {c.rays} is not in the source fan")

    def __call__(self, v: Sequence[int]) -> Vector:
        return self.lattice_map(v)

    def compose(self, other: "FanMorphism") -> "FanMorphism":
        return FanMorphism(other.source, self.target,
                           self.lattice_map.compose(other.lattice_map))


def minimal_containing_cone(f: Fan, c: Cone) -> Cone:
    """The unique fan cone whose relative interior meets relint(c)."""
    sample = c.interior_sample()
    for candidate in f.cones:
        if candidate.relint_contains(sample):
            if not candidate.contains_cone(c):
                raise FanError(
                    f"cone with sample {sample} straddles the fan cone {candidate.rays}"
                )
            return candidate
    raise FanError(f"no fan cone contains the point {sample}")


@dataclass(frozen=True)
class StackyMorphism:
    underlying: FanMorphism
    source: StackyFan
    target: StackyFan

    def __post_init__(self):
        if (self.underlying.source != self.source.fan
                or self.underlying.target != self.target.fan):
            raise FanError("underlying morphism does not match the stacky fans")
        p = self.underlying.lattice_map
        for sigma, kappa in self.underlying.assignment:
            n_s = self.source.sublattice(sigma)
            q_k = self.target.sublattice(kappa)
            img = sublattice_from_vectors(p.codomain, [p(v) for v in n_s.vectors()])
            if not q_k.contains_sublattice(img):
                raise FanError(
                    f"image of the sublattice of {sigma.rays} escapes the base sublattice"
                )


# ---------------------------------------------------------------------------
# cell decompositions for exact support comparison

def full_space_cone(lattice: Lattice | int) -> Cone:
    if isinstance(lattice, int):
        lattice = Lattice(lattice)
    n = lattice.rank
    gens = []
    for i in range(n):
        e = tuple(1 if j == i else 0 for j in range(n))
        gens.append(e)
        gens.append(vec_neg(e))
    return Cone.from_generators(lattice, gens)


def decompose_by_hyperplanes(start: Cone, functionals: Iterable[Vector]) -> list[Cone]:
    """All cells of the hyperplane arrangement restricted to `start`.

    Every point of `start` lies in some cell whose relative interior gives
    it the same sign vector, so one interior sample per cell decides any
    predicate defined by the functionals.
    """
    cells = {(start.rays, start.lines): start}
    for h in functionals:
        nxt: dict = {}
        for c in cells.values():
            pos = Cone.from_halfspaces(c.lattice, c.facets + (tuple(h),),
                                       c.span_equations)
            neg = Cone.from_halfspaces(c.lattice, c.facets + (vec_neg(h),),
                                       c.span_equations)
            zero = Cone.from_halfspaces(c.lattice, c.facets,
                                        c.span_equations + (tuple(h),))
            for part in (pos, neg, zero):
                nxt[(part.rays, part.lines)] = part
        cells = nxt
    return sorted(cells.values(), key=lambda c: (c.dim, c.rays, c.lines))


def _fan_functionals(f: Fan) -> list[Vector]:
    out = set()
    for c in f.cones:
        out.update(c.facets)
        out.update(c.span_equations)
    return sorted(out)


def _pulled_back_functionals(p: LatticeMap, g: Fan) -> list[Vector]:
    ft = transpose(p.matrix)
    out = set()
    for u in _fan_functionals(g):
        v = tuple(dot(u, row) for row in ft)
        if any(x != 0 for x in v):
            out.add(v)
    return sorted(out)


def is_proper(m: FanMorphism) -> bool:
    """Every point of the target support is hit by the source support.

    The source fan models a cone complex with no ambient complement, so the
    support comparison happens on the target side: cut the target space by
    the facets of the target cones and of every image cone, then check one
    interior sample per cell.
    """
    p = m.lattice_map
    images = [image_cone(p, sigma) for sigma in m.source.cones]
    hyps = set(_fan_functionals(m.target))
    for img in images:
        hyps.update(img.facets)
        hyps.update(img.span_equations)
    cells = decompose_by_hyperplanes(full_space_cone(m.target.lattice), sorted(hyps))
    for cell in cells:
        s = cell.interior_sample()
        if support_contains(m.target, s) and not any(img.contains(s) for img in images):
            return False
    return True


def supports_equal(f: Fan, g: Fan) -> bool:
    if f.lattice != g.lattice:
        raise FanError("support comparison requires a shared lattice")
    hyps = sorted(set(_fan_functionals(f)) | set(_fan_functionals(g)))
    cells = decompose_by_hyperplanes(full_space_cone(f.lattice), hyps)
    for cell in cells:
        s = cell.interior_sample()
        if support_contains(f, s) != support_contains(g, s):
            return False
    return True


# ---------------------------------------------------------------------------
# modifications and alterations

def is_modification(m: FanMorphism) -> bool:
    lm = m.lattice_map
    if lm.domain != lm.codomain or lm.matrix != tuple(
            tuple(1 if i == j else 0 for j in range(lm.domain.rank))
            for i in range(lm.domain.rank)):
        return False
    return supports_equal(m.source, m.target)


def is_alteration(m: FanMorphism) -> bool:
    lm = m.lattice_map
    if lm.domain.rank != lm.codomain.rank:
        return False
    if det(lm.matrix) == 0:
        return False
    # supports must agree under the real-linear isomorphism
    hyps = sorted(set(_fan_functionals(m.source))
                  | set(_pulled_back_functionals(lm, m.target)))
    cells = decompose_by_hyperplanes(full_space_cone(m.source.lattice), hyps)
    for cell in cells:
        s = cell.interior_sample()
        if support_contains(m.source, s) != support_contains(m.target, lm(s)):
            return False
    return True


def factor_alteration(m: FanMorphism) -> tuple[FanMorphism, FanMorphism]:
    """Split an alteration into a modification followed by a finite-index
    inclusion through the pulled-back fan."""
    if not is_alteration(m):
        raise FanError("morphism is not an alteration")
    j = m.lattice_map
    pulled = Fan.from_cones(m.source.lattice,
                            [preimage_cone(j, k) for k in m.target.cones])
    modification = FanMorphism(m.source, pulled, LatticeMap.identity_map(m.source.lattice))
    inclusion = FanMorphism(pulled, m.target, j)
    return modification, inclusion


def minimal_modification(p_map: LatticeMap, f: Fan, g: Fan) -> tuple[Fan, FanMorphism]:
    """Coarsest refinement of f whose cones map into cones of g."""
    if p_map.domain != f.lattice or p_map.codomain != g.lattice:
        raise FanError("lattice map does not match the fans")
    pieces = []
    for kappa in g.cones:
        pre = preimage_cone(p_map, kappa)
        for sigma in f.cones:
            pieces.append(intersect(pre, sigma))
    refined = Fan.from_cones(f.lattice, [c for c in pieces if c.is_strictly_convex])
    report = validate_fan(refined)
    if not report:
        raise FanError("preimage intersections do not form a fan: "
                       + "; ".join(report.violations))
    return refined, FanMorphism(refined, g, p_map)


# ---------------------------------------------------------------------------
# weak semistability

@dataclass(frozen=True)
class WeakSemistabilityReport:
    failures: tuple[tuple[Cone, int, str], ...]

    def __bool__(self) -> bool:
        return not self.failures

    def failing_cones(self) -> list[Cone]:
        return [c for c, _, _ in self.failures]


def is_weakly_semistable(m) -> WeakSemistabilityReport:
    if isinstance(m, StackyMorphism):
        under = m.underlying
        src_sub = m.source.sublattice
        tgt_sub = m.target.sublattice
    else:
        under = m
        src_sub = lambda c: full_sublattice(m.source.lattice)
        tgt_sub = lambda c: full_sublattice(m.target.lattice)
    p = under.lattice_map
    failures = []
    for sigma in under.source.cones:
        img = image_cone(p, sigma)
        if img not in under.target.cones:
            failures.append((sigma, 1, f"image cone {img.rays} is not in the target fan"))
            continue
        kappa = img
        if not image_monoid_equals_cone_monoid(p, sigma, kappa,
                                               src_sub(sigma), tgt_sub(kappa)):
            failures.append((sigma, 2, "image monoid is strictly smaller than the cone monoid"))
    return WeakSemistabilityReport(tuple(sorted(failures, key=lambda t: (t[0].dim, t[0].rays))))


def is_smooth_fan(f) -> bool:
    if isinstance(f, StackyFan):
        pairs = f.assignments
    else:
        pairs = tuple((c, span_sublattice(c)) for c in f.cones)
    for c, sub in pairs:
        if not c.is_strictly_convex:
            return False
        if len(c.rays) != c.dim:
            return False
        ray_lat = sublattice_from_vectors(c.lattice, c.rays)
        if ray_lat.basis != sub.basis:
            return False
    return True


def is_semistable(m) -> bool:
    if isinstance(m, StackyMorphism):
        return bool(is_weakly_semistable(m)) and is_smooth_fan(m.source) and is_smooth_fan(m.target)
    return (bool(is_weakly_semistable(m))
            and is_smooth_fan(m.source) and is_smooth_fan(m.target))


# ---------------------------------------------------------------------------
# fiber products

def toric_fiber_product(p: FanMorphism, q: FanMorphism):
    """Fan of fiber cones inside the fiber product lattice, with projections."""
    if p.target != q.target:
        raise FanError("fiber product requires a shared target")
    fib, pn, pl = fiber_product_lattice(p.lattice_map, q.lattice_map)
    cones = []
    for sigma in p.source.cones:
        for lam in q.source.cones:
            fc = intersect(preimage_cone(pn, sigma), preimage_cone(pl, lam))
            if fc.is_strictly_convex:
                cones.append(fc)
    fan = Fan.from_cones(fib, cones)
    proj_n = FanMorphism(fan, p.source, pn)
    proj_l = FanMorphism(fan, q.source, pl)
    return fan, proj_n, proj_l


@dataclass(frozen=True)
class CartesianReport:
    entries: tuple[tuple[Cone, Cone, Cone, bool, str], ...]

    def __bool__(self) -> bool:
        return all(ok for _, _, _, ok, _ in self.entries)


def cartesian_check(p: FanMorphism, q: FanMorphism) -> CartesianReport:
    """Compare the pushout of dual monoids with the dual monoid of each
    fiber cone under the canonical identification of dual lattices."""
    if p.target != q.target:
        raise FanError("cartesian check requires a shared target")
    fib, pn, pl = fiber_product_lattice(p.lattice_map, q.lattice_map)
    entries = []
    for sigma in p.source.cones:
        kappa = p.image_of(sigma)
        for lam in q.source.cones:
            if q.image_of(lam) != kappa:
                continue
            ok, reason = _cartesian_triple(p.lattice_map, q.lattice_map,
                                           sigma, kappa, lam, fib, pn, pl)
            entries.append((sigma, kappa, lam, ok, reason))
    return CartesianReport(tuple(sorted(
        entries, key=lambda t: (t[0].dim, t[0].rays, t[2].dim, t[2].rays))))


def _cartesian_triple(p: LatticeMap, q: LatticeMap, sigma: Cone, kappa: Cone,
                      lam: Cone, fib: Lattice, pn: LatticeMap, pl: LatticeMap):
    m_sigma = dual_monoid(sigma)
    m_kappa = dual_monoid(kappa)
    m_lambda = dual_monoid(lam)
    u = MonoidMap(m_kappa, m_sigma, dual_map(p))
    v = MonoidMap(m_kappa, m_lambda, dual_map(q))
    po = pushout_lattice(u.lattice_map, v.lattice_map)
    if po.torsion_order != 1:
        return False, f"pushout of dual lattices has torsion of order {po.torsion_order}"

    fc = intersect(preimage_cone(pn, sigma), preimage_cone(pl, lam))
    dm = dual_monoid(fc)
    if po.lattice.rank != fib.rank:
        return False, "pushout rank does not match the fiber rank"

    # the canonical map sends a class [m, l] to the functional it restricts
    # to on the fiber lattice
    pn_t = transpose(pn.matrix)
    pl_t = transpose(pl.matrix)

    def phi(m_elt, l_elt):
        a = tuple(dot(row, m_elt) for row in pn_t)
        b = tuple(dot(row, l_elt) for row in pl_t)
        return tuple(x + y for x, y in zip(a, b))

    # surjectivity at the level of monoids: the image monoid must be all of
    # the fiber dual monoid, and conversely must stay inside it
    mapped = [phi(g, (0,) * q.domain.rank) for g in m_sigma.generators]
    mapped += [phi((0,) * p.domain.rank, g) for g in m_lambda.generators]
    for g in mapped:
        if not _contains_modulo_units(g, dm.generators, dm.lattice):
            return False, "pushout monoid escapes the fiber dual monoid"
    for g in dm.generators:
        if not _contains_modulo_units(g, mapped, dm.lattice):
            return False, "fiber dual monoid is strictly larger than the pushout monoid"

    # bounded injectivity of the amalgamated pushout: pairs with the same
    # restriction must be connected by exchange moves through the base
    if not _pushout_injective_bounded(u, v, phi):
        return False, "canonical map identifies distinct pushout classes"
    return True, ""


def _word_ball(gens: Sequence[Vector], rank: int, length: int) -> set:
    zero = (0,) * rank
    seen = {zero}
    frontier = [zero]
    for _ in range(length):
        nxt = []
        for x in frontier:
            for g in gens:
                y = tuple(a + b for a, b in zip(x, g))
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return seen


def _pushout_injective_bounded(u: MonoidMap, v: MonoidMap, phi,
                               test_length: int = 4, universe_length: int = 8,
                               visit_cap: int = 50000) -> bool:
    """Check, up to bounded word length, that two pairs (m, l) with equal
    restriction to the fiber are related by moves (m, l) -> (m - u(g), l + v(g))
    through generators g of the base dual monoid."""
    m_rank = u.target.lattice.rank
    l_rank = v.target.lattice.rank
    m_univ = _word_ball(u.target.generators, m_rank, universe_length)
    l_univ = _word_ball(v.target.generators, l_rank, universe_length)
    m_test = _word_ball(u.target.generators, m_rank, test_length)
    l_test = _word_ball(v.target.generators, l_rank, test_length)
    moves = [(tuple(u(g)), tuple(v(g))) for g in u.source.generators]

    groups: dict = {}
    for m in m_test:
        for l in l_test:
            groups.setdefault(phi(m, l), []).append((m, l))

    for members in groups.values():
        if len(members) < 2:
            continue
        targets = set(members)
        start = members[0]
        seen = {start}
        frontier = [start]
        found = {start}
        while frontier and len(found) < len(targets) and len(seen) < visit_cap:
            nxt = []
            for m, l in frontier:
                for a, b in moves:
                    for cand in (
                        (tuple(x - y for x, y in zip(m, a)),
                         tuple(x + y for x, y in zip(l, b))),
                        (tuple(x + y for x, y in zip(m, a)),
                         tuple(x - y for x, y in zip(l, b))),
                    ):
                        cm, cl = cand
                        if cm in m_univ and cl in l_univ and cand not in seen:
                            seen.add(cand)
                            nxt.append(cand)
                            if cand in targets:
                                found.add(cand)
            frontier = nxt
        if len(found) < len(targets):
            return False
    return True


def base_change_along_alteration(p: FanMorphism, j: LatticeMap) -> tuple[Fan, FanMorphism]:
    """Pull a family back along a finite-index base lattice inclusion and
    take the coarsest fan refinement that maps to the pulled-back base."""
    if j.codomain != p.target.lattice:
        raise FanError("inclusion codomain must be the base lattice")
    if j.domain.rank != j.codomain.rank or det(j.matrix) == 0:
        raise FanError("base change requires a finite-index inclusion")
    fib, pi_n, pi_q = fiber_product_lattice(p.lattice_map, j)
    pulled_f = Fan.from_cones(fib, [preimage_cone(pi_n, s)
                                    for s in p.source.cones
                                    if preimage_cone(pi_n, s).is_strictly_convex])
    pulled_g = Fan.from_cones(j.domain, [preimage_cone(j, k) for k in p.target.cones])
    return minimal_modification(pi_q, pulled_f, pulled_g)


# ---------------------------------------------------------------------------
# representability

def is_representable(m: StackyMorphism) -> bool:
    """True iff every stacky sublattice is the full preimage of its base
    sublattice inside the span of its cone."""
    p = m.underlying.lattice_map
    for sigma, kappa in m.underlying.assignment:
        n_s = m.source.sublattice(sigma)
        q_k = m.target.sublattice(kappa)
        pre = preimage_sublattice(p, q_k)
        expected = intersect_sublattices(pre, span_sublattice(sigma))
        if expected.basis != n_s.basis:
            return False
    return True
