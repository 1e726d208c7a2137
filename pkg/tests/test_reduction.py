import pytest

from semistable.cone import Cone, span_sublattice
from semistable.fan import (
    Fan,
    FanMorphism,
    StackyMorphism,
    is_modification,
    is_representable,
    is_weakly_semistable,
)
from semistable.lattice import (
    Lattice,
    LatticeMap,
    full_sublattice,
    mat,
    sublattice_from_vectors,
)
from semistable.reduction import (
    CategoryCObject,
    FactorCertificate,
    N0Label,
    ReductionError,
    _n0_at,
    base_lattices,
    factor_through,
    image_refinement,
    reduce,
    total_refinement,
    universal_minimal_modification,
    validate_category_object,
)


def lmap(rows):
    rows = mat(rows)
    return LatticeMap(Lattice(len(rows[0])), Lattice(len(rows)), rows)


def cone(rank, *gens):
    return Cone.from_generators(rank, gens)


def blowup_fan():
    return Fan.from_cones(2, [cone(2, (1, 0), (1, 1)), cone(2, (1, 1), (0, 1))])


def quadrant_fan():
    return Fan.from_cones(2, [cone(2, (1, 0), (0, 1))])


def halfline_fan():
    return Fan.from_cones(1, [Cone.from_generators(1, [(1,)])])


def fix_semi():
    return FanMorphism(blowup_fan(), halfline_fan(), lmap([[1, 1]]))


def fix_double():
    f = halfline_fan()
    return FanMorphism(f, f, lmap([[2]]))


def fix_subdiv():
    return FanMorphism(blowup_fan(), quadrant_fan(),
                       LatticeMap.identity_map(Lattice(2)))


class TestImageRefinement:
    def test_fix_subdiv(self):
        refined, labels = image_refinement(fix_subdiv())
        assert refined == blowup_fan()
        by_cone = {l.cone: set(l.members) for l in labels}
        lower = cone(2, (1, 0), (1, 1))
        upper = cone(2, (1, 1), (0, 1))
        diag = cone(2, (1, 1))
        assert by_cone[lower] == {lower}
        assert by_cone[upper] == {upper}
        assert by_cone[diag] == {diag}
        assert by_cone[cone(2, (1, 0))] == {cone(2, (1, 0))}
        assert by_cone[cone(2, (0, 1))] == {cone(2, (0, 1))}

    def test_fix_semi(self):
        refined, labels = image_refinement(fix_semi())
        assert refined == halfline_fan()
        interior = next(l for l in labels if l.cone.dim == 1)
        assert len(interior.members) == 5  # every nonzero source cone

    def test_weakly_semistable_input_trivial(self):
        p = FanMorphism(quadrant_fan(), halfline_fan(), lmap([[1, 0]]))
        refined, _ = image_refinement(p)
        assert refined == halfline_fan()

    def test_rejects_non_proper(self):
        F = Fan.from_cones(1, [])
        G = halfline_fan()
        with pytest.raises(ReductionError):
            image_refinement(FanMorphism(F, G, lmap([[1]])))

    def test_minimality_merging_breaks_constancy(self):
        # adjacent cells of the refined base with different labels cannot be
        # merged: the merged region sees both label values
        p = fix_subdiv()
        refined, labels = image_refinement(p)
        from semistable.cone import image_cone
        images = [(s, image_cone(p.lattice_map, s)) for s in p.source.cones]
        assert _n0_at((2, 1), images) != _n0_at((1, 2), images)


class TestBaseLattices:
    def test_fix_semi_base_is_two_z(self):
        p = fix_semi()
        refined, labels = image_refinement(p)
        base = base_lattices(p, refined, labels)
        ray = Cone.from_generators(1, [(1,)])
        assert base.sublattice(ray).vectors() == [(2,)]

    def test_fix_double_base_is_two_z(self):
        p = fix_double()
        refined, labels = image_refinement(p)
        base = base_lattices(p, refined, labels)
        ray = Cone.from_generators(1, [(1,)])
        assert base.sublattice(ray).vectors() == [(2,)]

    def test_identity_full(self):
        p = fix_subdiv()
        refined, labels = image_refinement(p)
        base = base_lattices(p, refined, labels)
        for c in refined.cones:
            sub = base.sublattice(c)
            assert sub.basis == span_sublattice(c).basis


class TestTotalRefinement:
    def test_fix_semi(self):
        p = fix_semi()
        refined, labels = image_refinement(p)
        base = base_lattices(p, refined, labels)
        total, sm = total_refinement(p, base)
        assert total.fan == p.source
        lower = cone(2, (1, 0), (1, 1))
        even_sum = sublattice_from_vectors(Lattice(2), [(1, 1), (2, 0)])
        assert total.sublattice(lower).basis == even_sum.basis
        diag = cone(2, (1, 1))
        assert total.sublattice(diag).vectors() == [(1, 1)]
        e1 = cone(2, (1, 0))
        assert total.sublattice(e1).vectors() == [(2, 0)]
        assert is_weakly_semistable(sm)
        assert is_representable(sm)

    def test_fix_double(self):
        p = fix_double()
        refined, labels = image_refinement(p)
        base = base_lattices(p, refined, labels)
        total, sm = total_refinement(p, base)
        ray = Cone.from_generators(1, [(1,)])
        assert total.sublattice(ray).vectors() == [(1,)]
        assert is_weakly_semistable(sm)


class TestReduce:
    def test_fix_semi_full_pipeline(self):
        red = reduce(fix_semi())
        ray = Cone.from_generators(1, [(1,)])
        assert red.base.sublattice(ray).vectors() == [(2,)]
        assert is_modification(red.base_to_original)
        assert is_modification(red.total_to_original)
        assert is_weakly_semistable(red.stacky_map)
        assert is_representable(red.stacky_map)

    def test_fix_double_root_stack_datum(self):
        red = reduce(fix_double())
        ray = Cone.from_generators(1, [(1,)])
        assert red.base.sublattice(ray).vectors() == [(2,)]
        assert red.total.sublattice(ray).vectors() == [(1,)]

    def test_weakly_semistable_identity_reduction(self):
        p = FanMorphism(quadrant_fan(), halfline_fan(), lmap([[1, 0]]))
        red = reduce(p)
        assert red.base.fan == p.target
        assert red.total.fan == p.source
        for c in red.base.fan.cones:
            assert red.base.sublattice(c).basis == span_sublattice(c).basis

    def test_idempotence(self):
        red = reduce(fix_semi())
        refined_again, labels = image_refinement(red.stacky_map.underlying)
        assert refined_again == red.base.fan
        # reducing the underlying refined morphism changes nothing combinatorially
        red2 = reduce(red.stacky_map.underlying)
        assert red2.base.fan == red.base.fan
        assert red2.total.fan == red.total.fan


class TestCategoryObjects:
    def test_canonical_witness_fix_semi(self):
        red = reduce(fix_semi())
        i = FanMorphism(halfline_fan(), halfline_fan(), lmap([[2]]))
        obj = universal_minimal_modification(red, i)
        assert validate_category_object(obj, fix_semi())
        cert = factor_through(obj, red)
        assert isinstance(cert, FactorCertificate)
        # base factor sends the refined base ray into the 2Z cell
        ray = Cone.from_generators(1, [(1,)])
        pairs = dict(cert.base_assignments)
        assert pairs[ray] == ray

    def test_canonical_witness_fix_double(self):
        red = reduce(fix_double())
        i = FanMorphism(halfline_fan(), halfline_fan(), lmap([[2]]))
        obj = universal_minimal_modification(red, i)
        assert validate_category_object(obj, fix_double())
        factor_through(obj, red)

    def test_fix_double_deeper_alteration(self):
        red = reduce(fix_double())
        i = FanMorphism(halfline_fan(), halfline_fan(), lmap([[6]]))
        obj = universal_minimal_modification(red, i)
        assert validate_category_object(obj, fix_double())
        factor_through(obj, red)

    def test_fix_semi_deeper_alteration(self):
        red = reduce(fix_semi())
        i = FanMorphism(halfline_fan(), halfline_fan(), lmap([[4]]))
        obj = universal_minimal_modification(red, i)
        assert validate_category_object(obj, fix_semi())
        factor_through(obj, red)

    def test_fix_subdiv_identity_alteration(self):
        red = reduce(fix_subdiv())
        i = FanMorphism(quadrant_fan(), quadrant_fan(),
                        LatticeMap.identity_map(Lattice(2)))
        obj = universal_minimal_modification(red, i)
        # the altered base gets refined to the image subdivision
        assert obj.alteration.source == blowup_fan()
        assert validate_category_object(obj, fix_subdiv())
        factor_through(obj, red)

    def test_fix_subdiv_finer_modification(self):
        red = reduce(fix_subdiv())
        finer = Fan.from_cones(2, [cone(2, (1, 0), (2, 1)), cone(2, (2, 1), (1, 1)),
                                   cone(2, (1, 1), (0, 1))])
        i = FanMorphism(finer, quadrant_fan(), LatticeMap.identity_map(Lattice(2)))
        obj = universal_minimal_modification(red, i)
        assert validate_category_object(obj, fix_subdiv())
        factor_through(obj, red)

    def test_certificate_deterministic(self):
        red = reduce(fix_semi())
        i = FanMorphism(halfline_fan(), halfline_fan(), lmap([[2]]))
        obj = universal_minimal_modification(red, i)
        assert factor_through(obj, red) == factor_through(obj, red)


class TestValidationViolations:
    def test_non_ws_projection_reported(self):
        # identity base change of a non weakly semistable family: the square
        # is otherwise fine but the projection fails
        p = fix_semi()
        i = FanMorphism(halfline_fan(), halfline_fan(),
                        LatticeMap.identity_map(Lattice(1)))
        obj = CategoryCObject(i, FanMorphism(p.source, p.source,
                                             LatticeMap.identity_map(Lattice(2))),
                              p)
        report = validate_category_object(obj, p)
        assert not report
        assert any("not weakly semistable" in v for v in report.violations)

    def test_missing_cone_reported(self):
        p = fix_subdiv()
        i = FanMorphism(blowup_fan(), quadrant_fan(),
                        LatticeMap.identity_map(Lattice(2)))
        partial = Fan.from_cones(2, [cone(2, (1, 0), (1, 1))])
        obj = CategoryCObject(
            i,
            FanMorphism(partial, p.source, LatticeMap.identity_map(Lattice(2))),
            FanMorphism(partial, blowup_fan(), LatticeMap.identity_map(Lattice(2))))
        report = validate_category_object(obj, p)
        assert any("modification" in v for v in report.violations)

    def test_kernel_variant(self):
        red = reduce(fix_semi())
        i = FanMorphism(halfline_fan(), halfline_fan(), lmap([[2]]))
        obj = universal_minimal_modification(red, i)
        assert validate_category_object(obj, fix_semi(), kernel_variant=True)

    def test_factor_rejects_incompatible_base(self):
        red = reduce(fix_semi())
        # identity alteration does not factor: Q' = Z is not inside 2Z
        i = FanMorphism(halfline_fan(), halfline_fan(),
                        LatticeMap.identity_map(Lattice(1)))
        obj = CategoryCObject(i, FanMorphism(blowup_fan(), blowup_fan(),
                                             LatticeMap.identity_map(Lattice(2))),
                              fix_semi())
        with pytest.raises(ReductionError):
            factor_through(obj, red)
