"""Cone complexes: cones living in individual chart lattices, glued along
faces, together with morphisms of complexes and the chart-local version of
the reduction pipeline.

A complex stores no ambient lattice.  Every transport of points, functionals
or sublattices between charts goes through the gluing embeddings, so the fan
case (all charts equal to one ambient lattice, identity embeddings) is
recovered exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .cone import Cone, image_cone, intersect, preimage_cone, span_sublattice
from .fan import (
    Fan,
    FanMorphism,
    ValidationReport,
    WeakSemistabilityReport,
    decompose_by_hyperplanes,
)
from .lattice import (
    Lattice,
    LatticeMap,
    Sublattice,
    Vector,
    full_sublattice,
    image_lattice,
    intersect_sublattices,
    is_zero_vec,
    kernel_lattice,
    matmul,
    matvec,
    preimage_sublattice,
    primitive,
    saturate,
    solve_integer,
    sublattice_from_vectors,
    transpose,
    vec_add,
    zero_sublattice,
)
from .monoid import MonoidError, image_monoid_equals_cone_monoid
from .reduction import ReductionError


class ComplexError(ValueError):
    pass


def _solve_rational(matrix: Sequence[Vector], vec: Sequence) -> Optional[tuple]:
    """One solution of matrix @ x = vec over the rationals, or None."""
    rows = [list(map(Fraction, r)) + [Fraction(v)] for r, v in zip(matrix, vec)]
    if any(Fraction(v) != 0 for v in vec[len(matrix):]):
        return None
    m = len(matrix)
    n = len(matrix[0]) if m else 0
    pivots = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, m) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        rows[r] = [x / rows[r][c] for x in rows[r]]
        for i in range(m):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    for i in range(r, m):
        if rows[i][n] != 0:
            return None
    x = [Fraction(0)] * n
    for i, c in enumerate(pivots):
        x[c] = rows[i][n]
    return tuple(x)


def _key(c: Cone):
    return (c.rays, c.lines)


def _face_closure(cones: Iterable[Cone]) -> list[Cone]:
    out: dict = {}
    for c in cones:
        for f in c.faces():
            out[_key(f)] = f
    return sorted(out.values(), key=lambda c: (c.dim, c.rays, c.lines))


# ---------------------------------------------------------------------------
# complexes

@dataclass(frozen=True)
class Gluing:
    """One face occurrence: `face` of cell `cell` is the image of the chart
    cell under `embedding` (chart lattice into the cell's lattice)."""

    cell: int
    face: Cone
    chart: int
    embedding: LatticeMap


@dataclass(frozen=True)
class ConeComplex:
    cells: tuple[Cone, ...]
    gluings: tuple[Gluing, ...]

    def gluing_for(self, cell: int, face: Cone) -> Optional[Gluing]:
        for g in self.gluings:
            if g.cell == cell and g.face == face:
                return g
        return None


def fan_as_complex(f: Fan) -> ConeComplex:
    """Every cone becomes a cell in the ambient lattice; faces are glued to
    their own cells by the identity."""
    cells = f.cones
    index = {c: i for i, c in enumerate(cells)}
    ident = LatticeMap.identity_map(f.lattice)
    gl = []
    for i, c in enumerate(cells):
        for face in c.faces():
            gl.append(Gluing(i, face, index[face], ident))
    return ConeComplex(cells, tuple(gl))


def validate_complex(cx: ConeComplex) -> ValidationReport:
    bad: list[str] = []
    for i, c in enumerate(cx.cells):
        if not c.is_strictly_convex:
            bad.append(f"cell {i} is not strictly convex")
    if any("convex" in b for b in bad):
        return ValidationReport(tuple(bad))

    by_occurrence: dict = {}
    for g in cx.gluings:
        c = cx.cells[g.cell]
        if g.face not in c.faces():
            bad.append(f"gluing on cell {g.cell} names {g.face.rays}, "
                       "which is not a face of the cell")
            continue
        occ = (g.cell, _key(g.face))
        if occ in by_occurrence:
            bad.append(f"face {g.face.rays} of cell {g.cell} is glued twice")
        by_occurrence[occ] = g

        e = g.embedding
        if e.domain != cx.cells[g.chart].lattice or e.codomain != c.lattice:
            bad.append(f"embedding for face {g.face.rays} of cell {g.cell} "
                       "connects the wrong lattices")
            continue
        if kernel_lattice(e).rank != 0:
            bad.append(f"embedding into cell {g.cell} is not injective")
        img = image_lattice(e)
        if saturate(img).basis != img.basis:
            bad.append(f"embedding into cell {g.cell} has a non-saturated image")
        if image_cone(e, cx.cells[g.chart]) != g.face:
            bad.append(f"chart {g.chart} does not map onto face "
                       f"{g.face.rays} of cell {g.cell}")

    for i, c in enumerate(cx.cells):
        for face in c.faces():
            if (i, _key(face)) not in by_occurrence:
                bad.append(f"face {face.rays} of cell {i} is not glued")
    if bad:
        return ValidationReport(tuple(bad))

    # composites agree: going to a face of a face directly or through the
    # intermediate chart must give the same embedding
    for g in cx.gluings:
        e = g.embedding
        for h in g.face.faces():
            direct = by_occurrence[(g.cell, _key(h))]
            h_chart = preimage_cone(e, h)
            step = by_occurrence.get((g.chart, _key(h_chart)))
            if step is None:
                bad.append(f"face {h.rays} of cell {g.cell} has no counterpart "
                           f"in chart {g.chart}")
                continue
            if step.chart != direct.chart:
                bad.append(f"cell {g.cell}, face {h.rays}: gluing through chart "
                           f"{g.chart} reaches cell {step.chart}, "
                           f"directly it reaches {direct.chart}")
                continue
            if matmul(e.matrix, step.embedding.matrix) != direct.embedding.matrix:
                bad.append(f"cell {g.cell}, face {h.rays}: composite gluing "
                           "disagrees with the direct one")
    return ValidationReport(tuple(bad))


# ---------------------------------------------------------------------------
# morphisms

@dataclass(frozen=True)
class ComplexMorphism:
    source: ConeComplex
    target: ConeComplex
    cell_maps: tuple[LatticeMap, ...]
    assignment: tuple[int, ...]

    def __post_init__(self):
        if len(self.cell_maps) != len(self.source.cells) or \
                len(self.assignment) != len(self.source.cells):
            raise ComplexError("one lattice map and one target cell per source cell")
        for i, sigma in enumerate(self.source.cells):
            m = self.cell_maps[i]
            kappa = self.target.cells[self.assignment[i]]
            if m.domain != sigma.lattice or m.codomain != kappa.lattice:
                raise ComplexError(f"map of cell {i} connects the wrong lattices")
            if not kappa.contains_cone(image_cone(m, sigma)):
                raise ComplexError(f"cell {i} does not map into its assigned cell")


def validate_complex_morphism(m: ComplexMorphism) -> ValidationReport:
    """Gluing compatibility: on every glued face the per-cell maps agree
    through some gluing of the assigned target cells."""
    bad: list[str] = []
    for g in m.source.gluings:
        i, j, e = g.cell, g.chart, g.embedding
        kappa, lam = m.assignment[i], m.assignment[j]
        span = span_sublattice(m.source.cells[j]).vectors()
        ok = False
        for tg in m.target.gluings:
            if tg.cell != kappa or tg.chart != lam:
                continue
            if all(matvec(m.cell_maps[i].matrix, matvec(e.matrix, v)) ==
                   matvec(tg.embedding.matrix, matvec(m.cell_maps[j].matrix, v))
                   for v in span):
                ok = True
                break
        if not ok:
            bad.append(f"maps of cells {i} and {j} disagree on the face "
                       f"{g.face.rays}")
    return ValidationReport(tuple(bad))


def fan_morphism_as_complex(p: FanMorphism) -> ComplexMorphism:
    src = fan_as_complex(p.source)
    tgt = fan_as_complex(p.target)
    tgt_index = {c: i for i, c in enumerate(tgt.cells)}
    maps = tuple(LatticeMap(p.source.lattice, p.target.lattice,
                            p.lattice_map.matrix) for _ in src.cells)
    assign = tuple(tgt_index[p.image_of(sigma)] for sigma in src.cells)
    return ComplexMorphism(src, tgt, maps, assign)


# ---------------------------------------------------------------------------
# transport between charts

def _routes(cx: ConeComplex, t: int, lam: int) -> list[tuple[Gluing, Gluing]]:
    """Pairs of gluings through a shared chart: the first embeds the chart
    into cell t, the second into cell lam."""
    out = []
    for g1 in cx.gluings:
        if g1.cell != t:
            continue
        for g2 in cx.gluings:
            if g2.cell == lam and g2.chart == g1.chart:
                out.append((g1, g2))
    return out


def _transport_point(route: tuple[Gluing, Gluing], w: Sequence):
    # the gluing identifies only the spans of the two face occurrences
    g1, g2 = route
    if any(sum(a * b for a, b in zip(eq, w)) != 0
           for eq in g1.face.span_equations):
        return None
    x = _solve_rational(g1.embedding.matrix, w)
    if x is None:
        return None
    return matvec(g2.embedding.matrix, x)


def complex_N0(m: ComplexMorphism, kappa: int, w: Sequence) -> frozenset[int]:
    """Source cells whose image interior covers the point w of target cell
    kappa, the point being transported through shared face charts."""
    cell = m.target.cells[kappa]
    if not cell.contains(w):
        raise ComplexError("the sample point lies outside the target cell")
    images = [image_cone(m.cell_maps[s], sigma)
              for s, sigma in enumerate(m.source.cells)]
    hit = set()
    for s in range(len(m.source.cells)):
        for route in _routes(m.target, kappa, m.assignment[s]):
            pt = _transport_point(route, w)
            if pt is not None and images[s].relint_contains(pt):
                hit.add(s)
                break
    return frozenset(hit)


# ---------------------------------------------------------------------------
# chart-local reduction

@dataclass(frozen=True)
class StackyComplex:
    complex: ConeComplex
    sublattices: tuple[Sublattice, ...]


@dataclass(frozen=True)
class ComplexReductionResult:
    base: StackyComplex
    total: StackyComplex
    morphism: ComplexMorphism
    base_owners: tuple[int, ...]
    total_owners: tuple[int, ...]
    positive_dimensional_lifts: tuple[int, ...]


@dataclass(frozen=True)
class _CellRun:
    """Everything the local reduction computed inside one target cell."""

    pieces: tuple[Cone, ...]
    members: dict
    sublattices: dict
    contributions: tuple


def _pull_functional(route: tuple[Gluing, Gluing], psi: Vector) -> Optional[Vector]:
    """Functional on the far cell, moved to the near cell through the shared
    chart; exists because embeddings have saturated images."""
    g1, g2 = route
    psi_c = matvec(transpose(g2.embedding.matrix), psi)
    return solve_integer(transpose(g1.embedding.matrix), psi_c)


def _run_target_cell(m: ComplexMorphism, t: int, images: Sequence[Cone]) -> _CellRun:
    cell = m.target.cells[t]
    contributions = []
    for s in range(len(m.source.cells)):
        for route in _routes(m.target, t, m.assignment[s]):
            contributions.append((s, route, images[s]))

    hyps = set()
    for s, route, img in contributions:
        for psi in img.facets + img.span_equations:
            moved = _pull_functional(route, psi)
            if moved is not None and not is_zero_vec(moved):
                hyps.add(primitive(moved))
        for eq in route[0].face.span_equations:
            hyps.add(primitive(eq))
    raw = decompose_by_hyperplanes(cell, sorted(hyps))

    def member_routes(pt):
        out = []
        seen = set()
        for s, route, img in contributions:
            if s in seen:
                continue
            moved = _transport_point(route, pt)
            if moved is not None and img.relint_contains(moved):
                out.append((s, route, img))
                seen.add(s)
        return out

    def covered(pt):
        return any(_transport_point(route, pt) is not None and
                   img.contains(_transport_point(route, pt))
                   for _, route, img in contributions)

    pieces_raw = []
    by_label: dict = {}
    for piece in raw:
        s1 = piece.interior_sample()
        if not covered(s1):
            raise ReductionError(
                f"target cell {t} is not covered by the source images near {s1}")
        label = frozenset(s for s, _, _ in member_routes(s1))
        if piece.rays:
            s2 = vec_add(s1, piece.rays[0])
            if frozenset(s for s, _, _ in member_routes(s2)) != label:
                raise ReductionError(
                    f"membership set is not constant on a cell of target cell {t}")
        pieces_raw.append((piece, label))
        by_label.setdefault(label, []).append(piece)

    hulls: dict = {}
    for label, group in by_label.items():
        gens = [gv for piece in group for gv in piece.generators()]
        hull = Cone.from_generators(cell.lattice, gens)
        if not hull.is_strictly_convex:
            raise ReductionError(f"a label region of target cell {t} is not convex")
        if not cell.contains_cone(hull):
            raise ReductionError(f"a label hull escapes target cell {t}")
        for piece, piece_label in pieces_raw:
            if hull.relint_contains(piece.interior_sample()) and piece_label != label:
                raise ReductionError(
                    f"a label region of target cell {t} is not a union of cells")
        hulls[_key(hull)] = hull

    pieces = tuple(_face_closure(hulls.values()))
    members: dict = {}
    subs: dict = {}
    for piece in pieces:
        s1 = piece.interior_sample()
        routes = member_routes(s1)
        label = frozenset(s for s, _, _ in routes)
        if piece.rays:
            s2 = vec_add(s1, piece.rays[0])
            if frozenset(s for s, _, _ in member_routes(s2)) != label:
                raise ReductionError(
                    f"cell of target cell {t} merges different membership sets")
        members[_key(piece)] = label
        if piece.dim == 0:
            subs[_key(piece)] = zero_sublattice(cell.lattice)
            continue
        if not routes:
            raise ReductionError(
                f"a cell of target cell {t} has no contributing source cells")
        result = span_sublattice(piece)
        for s, route, img in routes:
            sigma = m.source.cells[s]
            lat = intersect_sublattices(full_sublattice(sigma.lattice),
                                        span_sublattice(sigma))
            moved = []
            for v in lat.vectors():
                v_lam = matvec(m.cell_maps[s].matrix, v)
                x = solve_integer(route[1].embedding.matrix, v_lam)
                if x is None:
                    raise ReductionError(
                        f"image lattice of source cell {s} does not descend "
                        f"to the shared chart over target cell {t}")
                moved.append(matvec(route[0].embedding.matrix, x))
            result = intersect_sublattices(
                result, sublattice_from_vectors(cell.lattice, moved))
        subs[_key(piece)] = result
    return _CellRun(pieces, members, subs, tuple(contributions))


def _moved_sublattice(lat: Lattice, e: LatticeMap, sub: Sublattice) -> Sublattice:
    return sublattice_from_vectors(lat, [matvec(e.matrix, v)
                                         for v in sub.vectors()])


def _owner_face(cell: Cone, sample) -> Optional[Cone]:
    """Smallest face whose interior contains the sample; None for the cell
    itself."""
    if cell.relint_contains(sample):
        return None
    for f in cell.faces():
        if f != cell and f.relint_contains(sample):
            return f
    raise ReductionError("a subdivision cell escapes its chart cell")


def _assemble_complex(cx: ConeComplex, runs: dict) -> tuple:
    """New complex from the per-cell subdivisions: a piece belongs to the
    cell whose interior contains it, faces are glued through the original
    gluings."""
    cells = []
    owners = []
    index: dict = {}
    for t in range(len(cx.cells)):
        for piece in runs[t].pieces:
            if _owner_face(cx.cells[t], piece.interior_sample()) is None:
                index[(t, _key(piece))] = len(cells)
                cells.append(piece)
                owners.append(t)

    gl = []
    for new_idx, (piece, t) in enumerate(zip(cells, owners)):
        ident = LatticeMap.identity_map(cx.cells[t].lattice)
        for h in piece.faces():
            f = _owner_face(cx.cells[t], h.interior_sample())
            if f is None:
                gl.append(Gluing(new_idx, h, index[(t, _key(h))], ident))
                continue
            orig = cx.gluing_for(t, f)
            h_chart = preimage_cone(orig.embedding, h)
            chart_idx = index.get((orig.chart, _key(h_chart)))
            if chart_idx is None:
                raise ReductionError(
                    f"subdivisions disagree on the face pair "
                    f"({t}, {f.rays}) / chart {orig.chart}")
            gl.append(Gluing(new_idx, h, chart_idx, orig.embedding))
    return ConeComplex(tuple(cells), tuple(gl)), tuple(owners), index


def _check_face_agreement(cx: ConeComplex, pieces: dict, subs: dict) -> None:
    """The subdivision and sublattices computed inside a cell must restrict,
    on every glued face, to the ones computed in the face's own chart."""
    for g in cx.gluings:
        if g.chart == g.cell and g.face == cx.cells[g.cell]:
            continue
        inside = [p for p in pieces[g.cell] if g.face.contains_cone(p)]
        moved = {_key(preimage_cone(g.embedding, p)): p for p in inside}
        chart_keys = {_key(p) for p in pieces[g.chart]}
        if set(moved) != chart_keys:
            raise ReductionError(
                f"subdivisions disagree on the face pair "
                f"({g.cell}, {g.face.rays}) / chart {g.chart}")
        lat = cx.cells[g.cell].lattice
        for key, p in moved.items():
            lifted = _moved_sublattice(lat, g.embedding, subs[g.chart][key])
            if lifted.basis != subs[g.cell][_key(p)].basis:
                raise ReductionError(
                    f"sublattices disagree on the face pair "
                    f"({g.cell}, {g.face.rays}) / chart {g.chart}")


def reduce_complex(m: ComplexMorphism) -> ComplexReductionResult:
    """Run the reduction chart-locally over every target cell and glue the
    results; face agreement between neighbouring charts is asserted, never
    assumed."""
    report = validate_complex(m.source)
    if not report:
        raise ComplexError("source complex invalid: " + "; ".join(report.violations))
    report = validate_complex(m.target)
    if not report:
        raise ComplexError("target complex invalid: " + "; ".join(report.violations))
    report = validate_complex_morphism(m)
    if not report:
        raise ComplexError("morphism incompatible with gluings: "
                           + "; ".join(report.violations))

    images = [image_cone(m.cell_maps[s], sigma)
              for s, sigma in enumerate(m.source.cells)]
    runs = {t: _run_target_cell(m, t, images) for t in range(len(m.target.cells))}
    _check_face_agreement(m.target, {t: runs[t].pieces for t in runs},
                          {t: runs[t].sublattices for t in runs})

    base_cx, base_owners, base_index = _assemble_complex(m.target, runs)
    report = validate_complex(base_cx)
    if not report:
        raise ReductionError("glued base complex invalid: "
                             + "; ".join(report.violations))
    base_subs = tuple(runs[t].sublattices[_key(piece)]
                      for piece, t in zip(base_cx.cells, base_owners))

    flagged = sorted({s for t in runs for key, label in runs[t].members.items()
                      for s in label
                      if m.source.cells[s].dim > images[s].dim})

    # subdivide every source cell by the preimages of its target subdivision
    src_runs: dict = {}
    for s, sigma in enumerate(m.source.cells):
        lam = m.assignment[s]
        pmap = m.cell_maps[s]
        cut: dict = {}
        for piece in runs[lam].pieces:
            part = intersect(preimage_cone(pmap, piece), sigma)
            cut[_key(part)] = part
        parts = _face_closure(cut.values())
        pulled = set()
        for piece in runs[lam].pieces:
            for psi in piece.facets + piece.span_equations:
                moved = matvec(transpose(pmap.matrix), psi)
                if not is_zero_vec(moved):
                    pulled.add(primitive(moved))
        for check in decompose_by_hyperplanes(sigma, sorted(pulled)):
            if not any(p.contains_cone(check) for p in parts):
                raise ReductionError(
                    f"subdivision of source cell {s} misses part of the cell")
        subs: dict = {}
        for part in parts:
            img_sample = matvec(pmap.matrix, part.interior_sample())
            target_piece = next(p for p in runs[lam].pieces
                                if p.relint_contains(img_sample))
            q = runs[lam].sublattices[_key(target_piece)]
            subs[_key(part)] = intersect_sublattices(
                preimage_sublattice(pmap, q), span_sublattice(part))
        src_runs[s] = _CellRun(tuple(parts), {}, subs, ())

    _check_face_agreement(m.source, {s: src_runs[s].pieces for s in src_runs},
                          {s: src_runs[s].sublattices for s in src_runs})
    total_cx, total_owners, total_index = _assemble_complex(m.source, src_runs)
    report = validate_complex(total_cx)
    if not report:
        raise ReductionError("glued total complex invalid: "
                             + "; ".join(report.violations))
    total_subs = tuple(src_runs[s].sublattices[_key(piece)]
                       for piece, s in zip(total_cx.cells, total_owners))

    maps = []
    assign = []
    for piece, s in zip(total_cx.cells, total_owners):
        lam = m.assignment[s]
        pmap = m.cell_maps[s]
        img_sample = matvec(pmap.matrix, piece.interior_sample())
        target_piece = next(p for p in runs[lam].pieces
                            if p.relint_contains(img_sample))
        f = _owner_face(m.target.cells[lam], target_piece.interior_sample())
        if f is None:
            maps.append(pmap)
            assign.append(base_index[(lam, _key(target_piece))])
            continue
        orig = m.target.gluing_for(lam, f)
        cols = [solve_integer(orig.embedding.matrix, col)
                for col in zip(*pmap.matrix)]
        if all(c is not None for c in cols):
            chart_piece = preimage_cone(orig.embedding, target_piece)
            rows = tuple(zip(*cols))
            maps.append(LatticeMap(pmap.domain,
                                   m.target.cells[orig.chart].lattice,
                                   tuple(tuple(r) for r in rows)))
            assign.append(base_index[(orig.chart, _key(chart_piece))])
            continue
        # the map does not descend to the face chart: fall back to the
        # smallest cell of lam's own subdivision containing the image
        img = image_cone(pmap, piece)
        candidates = [(p.dim, p.rays, p.lines, base_index[(lam, _key(p))])
                      for p in runs[lam].pieces
                      if (lam, _key(p)) in base_index and p.contains_cone(img)]
        if not candidates:
            raise ReductionError(
                f"no target cell of the refined base receives total cell {s}")
        maps.append(pmap)
        assign.append(min(candidates)[3])

    morph = ComplexMorphism(total_cx, base_cx, tuple(maps), tuple(assign))
    report = validate_complex_morphism(morph)
    if not report:
        raise ReductionError("reduced morphism incompatible with gluings: "
                             + "; ".join(report.violations))
    ws = complex_weak_semistability(morph, total_subs, base_subs)
    if not ws:
        raise ReductionError(
            "reduced complex morphism is not weakly semistable: "
            + "; ".join(msg for _, _, msg in ws.failures))
    return ComplexReductionResult(StackyComplex(base_cx, base_subs),
                                  StackyComplex(total_cx, total_subs),
                                  morph, base_owners, total_owners,
                                  tuple(flagged))


# ---------------------------------------------------------------------------
# weak semistability, cell by cell

def complex_weak_semistability(m: ComplexMorphism,
                               source_sublattices: Optional[Sequence[Sublattice]] = None,
                               target_sublattices: Optional[Sequence[Sublattice]] = None
                               ) -> WeakSemistabilityReport:
    """Per-cell form of the two conditions: the image of every cell is a
    face of its assigned cell, and lattice points surject onto the lattice
    points of the image."""
    if source_sublattices is None:
        source_sublattices = [full_sublattice(c.lattice) for c in m.source.cells]
    if target_sublattices is None:
        target_sublattices = [full_sublattice(c.lattice) for c in m.target.cells]
    failures = []
    for s, sigma in enumerate(m.source.cells):
        t = m.assignment[s]
        cell = m.target.cells[t]
        img = image_cone(m.cell_maps[s], sigma)
        if img not in cell.faces():
            failures.append((sigma, 1,
                             f"image of cell {s} is not a face of its target cell"))
            continue
        if img == cell:
            q_sub = target_sublattices[t]
        else:
            gl = m.target.gluing_for(t, img)
            q_sub = _moved_sublattice(cell.lattice, gl.embedding,
                                      target_sublattices[gl.chart])
        try:
            ok = image_monoid_equals_cone_monoid(m.cell_maps[s], sigma, img,
                                                 source_sublattices[s], q_sub)
        except MonoidError as exc:
            failures.append((sigma, 2, f"cell {s}: {exc}"))
            continue
        if not ok:
            failures.append((sigma, 2,
                             f"lattice points of cell {s} do not cover the "
                             "lattice points of its image"))
    return WeakSemistabilityReport(tuple(failures))
