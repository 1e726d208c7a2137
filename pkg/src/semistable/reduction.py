"""The main pipeline: refine the base fan by image cones, attach base
sublattices, refine the total fan, and package the resulting stacky
morphism together with its universal property (factorization of compatible
alteration squares through it).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .cone import Cone, image_cone, intersect, preimage_cone, span_sublattice
from .fan import (
    Fan,
    FanError,
    FanMorphism,
    StackyFan,
    StackyMorphism,
    ValidationReport,
    decompose_by_hyperplanes,
    is_alteration,
    is_modification,
    is_proper,
    is_representable,
    is_weakly_semistable,
    minimal_containing_cone,
    minimal_modification,
    supports_equal,
    validate_fan,
    validate_stacky_fan,
)
from .lattice import (
    Lattice,
    LatticeMap,
    Sublattice,
    Vector,
    det,
    fiber_product_lattice,
    full_sublattice,
    intersect_sublattices,
    kernel_lattice,
    mat,
    matmul,
    preimage_sublattice,
    saturate,
    solve_integer,
    sublattice_from_vectors,
    transpose,
    vec_add,
    zero_sublattice,
)
from .monoid import q_kappa_lattice


class ReductionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# image refinement

@dataclass(frozen=True)
class N0Label:
    """Cell of the refined base together with the source cones whose image
    interiors cover the cell's interior."""

    cone: Cone
    members: tuple[Cone, ...]


def _n0_at(point: Sequence[int], images: Sequence[tuple[Cone, Cone]]) -> tuple[Cone, ...]:
    return tuple(sigma for sigma, img in images if img.relint_contains(point))


def image_refinement(p: FanMorphism) -> tuple[Fan, list[N0Label]]:
    """Coarsest subdivision of the target fan on whose cells the set of
    source cones mapping onto a neighborhood is constant."""
    if not is_proper(p):
        raise ReductionError("the morphism is not proper onto the target support")
    g = p.target
    images = [(sigma, image_cone(p.lattice_map, sigma)) for sigma in p.source.cones]

    hyps = set()
    for _, img in images:
        hyps.update(img.facets)
        hyps.update(img.span_equations)
    hyps = sorted(hyps)

    pieces: list[tuple[Cone, tuple[Cone, ...]]] = []
    hulls: dict = {}
    for kappa in g.cones:
        local = decompose_by_hyperplanes(kappa, hyps)
        by_label: dict = {}
        for piece in local:
            s1 = piece.interior_sample()
            label = _n0_at(s1, images)
            if piece.rays:
                s2 = vec_add(s1, piece.rays[0])
                if _n0_at(s2, images) != label:
                    raise ReductionError(
                        f"membership set is not constant on a cell of {kappa.rays}")
            pieces.append((piece, label))
            by_label.setdefault(label, []).append(piece)
        for label, group in by_label.items():
            gens = [gv for piece in group for gv in piece.generators()]
            hull = Cone.from_generators(g.lattice, gens)
            if not hull.is_strictly_convex:
                raise ReductionError("a label region has a non-convex hull")
            if not kappa.contains_cone(hull):
                raise ReductionError("a label hull escapes its base cone")
            # every arrangement piece interior to the hull must share the label
            for piece, piece_label in ((q, _n0_at(q.interior_sample(), images))
                                       for q in local):
                if hull.relint_contains(piece.interior_sample()) and piece_label != label:
                    raise ReductionError(
                        f"label region in {kappa.rays} is not a union of cells")
            hulls[(hull.rays, hull.lines)] = hull

    refined = Fan.from_cones(g.lattice, list(hulls.values()))
    report = validate_fan(refined)
    if not report:
        raise ReductionError("refined base is not a fan: " + "; ".join(report.violations))
    if not supports_equal(refined, g):
        raise ReductionError("refined base does not cover the target support")

    labels = []
    for cell in refined.cones:
        s1 = cell.interior_sample()
        label = _n0_at(s1, images)
        if cell.rays:
            s2 = vec_add(s1, cell.rays[0])
            if _n0_at(s2, images) != label:
                raise ReductionError(
                    f"membership set is not constant on the cell {cell.rays}")
        for piece, piece_label in pieces:
            if cell.relint_contains(piece.interior_sample()) and piece_label != label:
                raise ReductionError(
                    f"cell {cell.rays} merges regions with different membership sets")
        labels.append(N0Label(cell, label))
    return refined, labels


# ---------------------------------------------------------------------------
# base and total lattices

def base_lattices(p: FanMorphism, refined: Fan, labels: Sequence[N0Label]) -> StackyFan:
    """Attach to each refined base cone the intersection of the image
    lattices of its contributing source cones."""
    sub = {}
    for label in labels:
        kappa = label.cone
        if kappa.dim == 0:
            sub[kappa] = zero_sublattice(refined.lattice)
            continue
        if not label.members:
            raise ReductionError(f"cell {kappa.rays} has no contributing cones")
        contributing = [(sigma, full_sublattice(p.source.lattice))
                        for sigma in label.members]
        sub[kappa] = q_kappa_lattice(p.lattice_map, kappa, contributing)
    stacky = StackyFan.from_dict(refined, sub)
    report = validate_stacky_fan(stacky)
    if not report:
        raise ReductionError("base sublattices violate face compatibility: "
                             + "; ".join(report.violations))
    return stacky


def total_refinement(p: FanMorphism, base: StackyFan) -> tuple[StackyFan, StackyMorphism]:
    """Refine the source fan over the refined base and attach the preimage
    sublattices."""
    refined_f, morph = minimal_modification(p.lattice_map, p.source, base.fan)
    sub = {}
    for sigma in refined_f.cones:
        kappa = morph.image_of(sigma)
        q_k = base.sublattice(kappa)
        sub[sigma] = intersect_sublattices(
            preimage_sublattice(p.lattice_map, q_k), span_sublattice(sigma))
    total = StackyFan.from_dict(refined_f, sub)
    report = validate_stacky_fan(total)
    if not report:
        raise ReductionError("total sublattices violate face compatibility: "
                             + "; ".join(report.violations))
    sm = StackyMorphism(morph, total, base)
    ws = is_weakly_semistable(sm)
    if not ws:
        raise ReductionError(
            "constructed stacky morphism is not weakly semistable; failing cones: "
            + ", ".join(str(c.rays) for c in ws.failing_cones()))
    if not is_representable(sm):
        raise ReductionError("constructed stacky morphism is not representable")
    return total, sm


@dataclass(frozen=True)
class ReductionResult:
    base: StackyFan
    total: StackyFan
    stacky_map: StackyMorphism
    total_to_original: FanMorphism
    base_to_original: FanMorphism
    labels: tuple[N0Label, ...]


def reduce(p: FanMorphism) -> ReductionResult:
    refined_g, labels = image_refinement(p)
    base = base_lattices(p, refined_g, labels)
    total, sm = total_refinement(p, base)

    base_to_orig = FanMorphism(refined_g, p.target,
                               LatticeMap.identity_map(p.target.lattice))
    total_to_orig = FanMorphism(total.fan, p.source,
                                LatticeMap.identity_map(p.source.lattice))
    if not is_modification(base_to_orig):
        raise ReductionError("refined base is not a modification of the target fan")
    if not is_modification(total_to_orig):
        raise ReductionError("refined total is not a modification of the source fan")
    return ReductionResult(base, total, sm, total_to_orig, base_to_orig, tuple(labels))


# ---------------------------------------------------------------------------
# the category of compatible alteration squares

@dataclass(frozen=True)
class CategoryCObject:
    """Commutative square: an alteration of the base, the fiber-product
    total space, a modification of the pulled-back source fan, and a weakly
    semistable projection."""

    alteration: FanMorphism   # (Gamma, Q') -> (G, Q)
    total: FanMorphism        # (Phi, N') -> (F, N)
    projection: FanMorphism   # (Phi, N') -> (Gamma, Q')


def _fiber_identification(p: LatticeMap, i: LatticeMap,
                          j: LatticeMap, pi: LatticeMap):
    """Matrix of the induced map N' -> N x_Q Q', or None when it is not an
    isomorphism."""
    fib, pr_n, pr_q = fiber_product_lattice(p, i)
    if fib.rank != j.domain.rank:
        return None
    emb = pr_n.matrix + pr_q.matrix  # stacked: (n + q') x fib_rank
    cols = []
    n_prime = j.domain.rank
    for k in range(n_prime):
        e = tuple(1 if t == k else 0 for t in range(n_prime))
        target = tuple(j(e)) + tuple(pi(e))
        x = solve_integer(emb, target)
        if x is None:
            return None
        cols.append(x)
    matrix = tuple(tuple(cols[c][r] for c in range(n_prime))
                   for r in range(fib.rank))
    if abs(det(matrix)) != 1:
        return None
    return matrix


def validate_category_object(obj: CategoryCObject, p: FanMorphism,
                             kernel_variant: bool = False) -> ValidationReport:
    bad: list[str] = []
    i, j, pi = obj.alteration, obj.total, obj.projection
    if i.target != p.target:
        bad.append("alteration target is not the base fan of the family")
    if j.target != p.source:
        bad.append("total map target is not the source fan of the family")
    if pi.source != j.source or pi.target != i.source:
        bad.append("projection does not connect the total space to the altered base")
        return ValidationReport(tuple(bad))

    if not is_alteration(i):
        bad.append("the base map is not an alteration")

    left = matmul(p.lattice_map.matrix, j.lattice_map.matrix)
    right = matmul(i.lattice_map.matrix, pi.lattice_map.matrix)
    if left != right:
        bad.append("the square of lattice maps does not commute")

    if kernel_variant:
        ker_pi = kernel_lattice(pi.lattice_map)
        ker_p = kernel_lattice(p.lattice_map)
        moved = sublattice_from_vectors(
            p.source.lattice, [j(v) for v in ker_pi.vectors()])
        if saturate(moved).basis != ker_p.basis:
            bad.append("kernels of the vertical maps do not coincide")
    else:
        if _fiber_identification(p.lattice_map, i.lattice_map,
                                 j.lattice_map, pi.lattice_map) is None:
            bad.append("the total lattice is not the fiber product of the base change")

    # the total fan must be a modification of the pulled-back source fan
    try:
        pulled = Fan.from_cones(j.source.lattice,
                                [preimage_cone(j.lattice_map, sigma)
                                 for sigma in p.source.cones])
        if not supports_equal(j.source, pulled):
            bad.append("the total fan is not a modification of the pulled-back fan")
        else:
            FanMorphism(j.source, pulled,
                        LatticeMap.identity_map(j.source.lattice))
    except ValueError:
        bad.append("the total fan is not a modification of the pulled-back fan")

    ws = is_weakly_semistable(pi)
    if not ws:
        bad.append("the projection is not weakly semistable; failing cones: "
                   + ", ".join(str(c.rays) for c in ws.failing_cones()))
    return ValidationReport(tuple(bad))


@dataclass(frozen=True)
class FactorCertificate:
    """Forced cone assignments realizing the factorization through the
    reduced datum; forced because the lattice maps are fixed."""

    base_assignments: tuple[tuple[Cone, Cone], ...]
    total_assignments: tuple[tuple[Cone, Cone], ...]


def factor_through(obj: CategoryCObject, red: ReductionResult) -> FactorCertificate:
    i, j = obj.alteration, obj.total
    base_pairs = []
    for gamma in i.source.cones:
        img = image_cone(i.lattice_map, gamma)
        try:
            kappa = minimal_containing_cone(red.base.fan, img)
        except FanError:
            raise ReductionError(
                f"base cone {gamma.rays} does not land in a single refined cone; "
                "re-check that the base map is an alteration compatible with the family")
        q_k = red.base.sublattice(kappa)
        moved = sublattice_from_vectors(
            i.target.lattice,
            [i(v) for v in intersect_sublattices(
                full_sublattice(i.source.lattice),
                span_sublattice(gamma)).vectors()])
        if not q_k.contains_sublattice(moved):
            raise ReductionError(
                f"base cone {gamma.rays} carries lattice points outside the "
                "reduced base sublattice; re-check the fiber-product condition")
        base_pairs.append((gamma, kappa))

    total_pairs = []
    for phi in j.source.cones:
        img = image_cone(j.lattice_map, phi)
        try:
            sigma = minimal_containing_cone(red.total.fan, img)
        except FanError:
            raise ReductionError(
                f"total cone {phi.rays} does not land in a single refined cone; "
                "re-check that the total fan refines the pulled-back fan")
        n_s = red.total.sublattice(sigma)
        moved = sublattice_from_vectors(
            j.target.lattice,
            [j(v) for v in intersect_sublattices(
                full_sublattice(j.source.lattice),
                span_sublattice(phi)).vectors()])
        if not n_s.contains_sublattice(moved):
            raise ReductionError(
                f"total cone {phi.rays} carries lattice points outside the "
                "reduced total sublattice; re-check weak semistability of the projection")
        total_pairs.append((phi, sigma))
    return FactorCertificate(tuple(base_pairs), tuple(total_pairs))


def universal_minimal_modification(red: ReductionResult,
                                   i: FanMorphism) -> CategoryCObject:
    """Smallest compatible square over a given base alteration: the fiber
    of the reduced total fan with the (refined) altered base."""
    p = red.stacky_map.underlying
    if i.target != red.base_to_original.target:
        raise ReductionError("the alteration must target the original base fan")
    if not is_alteration(i):
        raise ReductionError("the base map is not an alteration")
    gamma_refined, i_refined = minimal_modification(i.lattice_map, i.source,
                                                    red.base.fan)
    p_orig = FanMorphism(red.total_to_original.target, red.base_to_original.target,
                         p.lattice_map)
    fib, pr_n, pr_q = fiber_product_lattice(p.lattice_map, i.lattice_map)
    cones = []
    for sigma in red.total.fan.cones:
        for gamma in gamma_refined.cones:
            fc = intersect(preimage_cone(pr_n, sigma), preimage_cone(pr_q, gamma))
            if fc.is_strictly_convex:
                cones.append(fc)
    phi_fan = Fan.from_cones(fib, cones)
    j = FanMorphism(phi_fan, red.total_to_original.target, pr_n)
    # the projection targets the refined altered base, so the returned
    # square carries the refinement of the given alteration
    i_refined_to_g = FanMorphism(gamma_refined, i.target, i.lattice_map)
    pi = FanMorphism(phi_fan, gamma_refined, pr_q)
    obj = CategoryCObject(i_refined_to_g, j, pi)
    report = validate_category_object(obj, p_orig)
    if not report:
        raise ReductionError("constructed square is invalid: "
                             + "; ".join(report.violations))
    return obj
