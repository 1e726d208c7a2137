import itertools

import pytest
from hypothesis import given, settings, strategies as st

from semistable.cone import Cone, ConeError, dual_cone
from semistable.lattice import (
    Lattice,
    LatticeMap,
    dot,
    full_sublattice,
    mat,
    sublattice_from_vectors,
    transpose,
    vec_add,
)
from semistable.monoid import (
    AffineMonoid,
    MonoidError,
    MonoidMap,
    _contains_modulo_units,
    dual_monoid,
    hilbert_basis,
    image_monoid_equals_cone_monoid,
    is_saturated,
    kato_integral,
    monoid_generators_of_cone,
    monoid_membership,
    pushout_monoid,
    q_kappa_lattice,
)


def lmap(rows):
    rows = mat(rows)
    return LatticeMap(Lattice(len(rows[0])), Lattice(len(rows)), rows)


def naive_elements(gens, height, rank):
    """All monoid elements with coordinate sums of generator counts <= height."""
    out = {(0,) * rank}
    frontier = [(0,) * rank]
    for _ in range(height):
        nxt = []
        for x in frontier:
            for g in gens:
                y = vec_add(x, g)
                if y not in out:
                    out.add(y)
                    nxt.append(y)
        frontier = nxt
    return out


class TestHilbertBasis:
    def test_quadrant(self):
        c = Cone.from_generators(2, [(1, 0), (0, 1)])
        assert hilbert_basis(c) == [(0, 1), (1, 0)]

    def test_interior_generator_needed(self):
        c = Cone.from_generators(2, [(1, 0), (1, 2)])
        assert hilbert_basis(c) == [(1, 0), (1, 1), (1, 2)]

    def test_ray_in_even_sum_sublattice(self):
        c = Cone.from_generators(2, [(1, 1)])
        L = sublattice_from_vectors(Lattice(2), [(1, 1), (2, 0)])
        assert hilbert_basis(c, L) == [(1, 1)]

    def test_ray_needs_multiple_in_sublattice(self):
        c = Cone.from_generators(2, [(1, 0)])
        L = sublattice_from_vectors(Lattice(2), [(1, 1), (2, 0)])
        assert hilbert_basis(c, L) == [(2, 0)]

    def test_rejects_non_pointed(self):
        c = Cone.from_generators(2, [(1, 0), (-1, 0), (0, 1)])
        with pytest.raises(ConeError):
            hilbert_basis(c)

    def test_zero_cone(self):
        assert hilbert_basis(Cone.zero(2)) == []

    def test_minimality(self):
        c = Cone.from_generators(2, [(2, -1), (0, 1)])
        hb = hilbert_basis(c)
        for i in range(len(hb)):
            rest = AffineMonoid(Lattice(2), tuple(hb[:i] + hb[i + 1:]))
            ok, _ = monoid_membership(hb[i], rest)
            assert not ok

    def test_generates_everything_bounded(self):
        c = Cone.from_generators(2, [(3, -1), (1, 2)])
        hb = hilbert_basis(c)
        M = AffineMonoid(Lattice(2), tuple(hb))
        for x in range(-2, 7):
            for y in range(-3, 7):
                ok, _ = monoid_membership((x, y), M)
                assert ok == c.contains((x, y))


class TestMembership:
    def test_not_in_even(self):
        M = AffineMonoid(Lattice(1), ((2,),))
        ok, _ = monoid_membership((3,), M)
        assert not ok

    def test_witness(self):
        M = AffineMonoid(Lattice(1), ((2,), (3,)))
        ok, witness = monoid_membership((5,), M)
        assert ok
        assert witness == (1, 1)

    def test_gap(self):
        M = AffineMonoid(Lattice(1), ((2,), (3,)))
        ok, w = monoid_membership((1,), M)
        assert not ok and w is None

    def test_zero_always_member(self):
        M = AffineMonoid(Lattice(1), ((2,),))
        ok, w = monoid_membership((0,), M)
        assert ok and w == (0,)

    def test_fails_fast_on_units(self):
        M = AffineMonoid(Lattice(1), ((1,), (-1,)))
        with pytest.raises(MonoidError):
            monoid_membership((5,), M)

    @given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)),
                    min_size=1, max_size=3),
           st.tuples(st.integers(0, 8), st.integers(0, 8)))
    @settings(max_examples=60, deadline=None)
    def test_oracle_equivalence(self, gens, w):
        gens = [g for g in gens if g != (0, 0)]
        if not gens:
            return
        M = AffineMonoid(Lattice(2), tuple(gens))
        ok, _ = monoid_membership(w, M)
        assert ok == (tuple(w) in naive_elements(gens, 16, 2))


class TestUnitsAwareMembership:
    def test_group_case(self):
        gens = [(1, 0), (-1, 0)]
        assert _contains_modulo_units((5, 0), gens, Lattice(2))
        assert not _contains_modulo_units((0, 1), gens, Lattice(2))

    def test_halfplane_monoid(self):
        gens = [(1, -1), (-1, 1), (0, 1)]
        assert _contains_modulo_units((3, -2), gens, Lattice(2))
        assert _contains_modulo_units((-4, 5), gens, Lattice(2))
        assert not _contains_modulo_units((0, -1), gens, Lattice(2))

    def test_non_saturated_units(self):
        # units generate 2Z(1,-1); residuals must land in that subgroup
        gens = [(2, -2), (-2, 2), (0, 1)]
        assert _contains_modulo_units((2, -1), gens, Lattice(2))
        assert not _contains_modulo_units((1, 0), gens, Lattice(2))

    def test_matches_plain_membership_when_pointed(self):
        gens = [(2,), (3,)]
        assert _contains_modulo_units((5,), gens, Lattice(1))
        assert not _contains_modulo_units((1,), gens, Lattice(1))


class TestGeneratorsOfCone:
    def test_halfplane(self):
        c = Cone.from_generators(2, [(1, 0), (-1, 0), (0, 1)])
        gens = monoid_generators_of_cone(c)
        M = set(gens)
        assert (1, 0) in M and (-1, 0) in M
        # some lift with positive second coordinate generates the rest
        assert any(g[1] == 1 for g in gens)
        for v in [(3, 2), (-3, 2), (0, 5)]:
            assert _contains_modulo_units(v, gens, Lattice(2))
        assert not _contains_modulo_units((0, -1), gens, Lattice(2))

    def test_full_line(self):
        c = Cone.from_generators(1, [(1,), (-1,)])
        gens = monoid_generators_of_cone(c)
        assert set(gens) == {(1,), (-1,)}

    def test_pointed_matches_hilbert(self):
        c = Cone.from_generators(2, [(1, 0), (1, 2)])
        assert monoid_generators_of_cone(c) == hilbert_basis(c)


class TestDualMonoid:
    def test_quadrant(self):
        c = Cone.from_generators(2, [(1, 0), (0, 1)])
        assert dual_monoid(c).generators == ((0, 1), (1, 0))

    def test_ray_gives_halfplane_with_units(self):
        c = Cone.from_generators(2, [(1, 1)])
        dm = dual_monoid(c)
        gens = dm.generators
        # oracle: bounded enumeration must reach every dual lattice point
        for x in range(-3, 4):
            for y in range(-3, 4):
                v = (x, y)
                expected = x + y >= 0
                assert _contains_modulo_units(v, gens, Lattice(2)) == expected

    def test_zero_cone_dual_is_whole_lattice(self):
        dm = dual_monoid(Cone.zero(1))
        assert set(dm.generators) == {(1,), (-1,)}


class TestImageMonoidEquality:
    def test_chart_with_unit_image(self):
        p = lmap([[1, 1]])
        sigma = Cone.from_generators(2, [(1, 0), (1, 1)])
        kappa = Cone.from_generators(1, [(1,)])
        assert image_monoid_equals_cone_monoid(p, sigma, kappa)

    def test_diagonal_ray_fails(self):
        p = lmap([[1, 1]])
        sigma = Cone.from_generators(2, [(1, 1)])
        kappa = Cone.from_generators(1, [(1,)])
        assert not image_monoid_equals_cone_monoid(p, sigma, kappa)

    def test_doubling_fails(self):
        p = lmap([[2]])
        sigma = Cone.from_generators(1, [(1,)])
        kappa = Cone.from_generators(1, [(1,)])
        assert not image_monoid_equals_cone_monoid(p, sigma, kappa)

    def test_precondition(self):
        p = lmap([[1, 1]])
        sigma = Cone.from_generators(2, [(1, 0)])
        kappa = Cone.from_generators(1, [(-1,)])
        with pytest.raises(MonoidError):
            image_monoid_equals_cone_monoid(p, sigma, kappa)


def brute_force_q_kappa(p, kappa, contributing, height=12):
    """Oracle: points of kappa with a lattice preimage in every cone, as a group."""
    q_rank = p.codomain.rank
    assert q_rank == 1
    hits = []
    for w in range(1, height + 1):
        wv = (w,)
        ok_all = True
        for sigma, n_sub in contributing:
            found = False
            for x in range(-height * 3, height * 3 + 1):
                for y in range(-height * 3, height * 3 + 1):
                    v = (x, y)[: p.domain.rank]
                    if sigma.contains(v) and n_sub.contains(v) and p(v) == wv:
                        found = True
                        break
                if found:
                    break
            if not found:
                ok_all = False
                break
        if ok_all:
            hits.append(wv)
    return sublattice_from_vectors(p.codomain, hits)


class TestQKappaLattice:
    def test_sum_map_fixture(self):
        p = lmap([[1, 1]])
        kappa = Cone.from_generators(1, [(1,)])
        full = full_sublattice(Lattice(2))
        cones = [
            Cone.from_generators(2, [(1, 0), (1, 1)]),
            Cone.from_generators(2, [(1, 1), (0, 1)]),
            Cone.from_generators(2, [(1, 0)]),
            Cone.from_generators(2, [(1, 1)]),
            Cone.from_generators(2, [(0, 1)]),
        ]
        contributing = [(c, full) for c in cones]
        q = q_kappa_lattice(p, kappa, contributing)
        assert q.vectors() == [(2,)]
        oracle = brute_force_q_kappa(p, kappa, contributing)
        assert q.basis == oracle.basis

    def test_doubling(self):
        p = lmap([[2]])
        kappa = Cone.from_generators(1, [(1,)])
        contributing = [(Cone.from_generators(1, [(1,)]), full_sublattice(Lattice(1)))]
        q = q_kappa_lattice(p, kappa, contributing)
        assert q.vectors() == [(2,)]
        assert q.basis == brute_force_q_kappa(p, kappa, contributing).basis

    def test_identity(self):
        p = lmap([[1, 0], [0, 1]])
        kappa = Cone.from_generators(2, [(1, 0), (0, 1)])
        q = q_kappa_lattice(p, kappa, [(kappa, full_sublattice(Lattice(2)))])
        assert q.rank == 2
        assert q.contains((1, 0)) and q.contains((0, 1))

    def test_rejects_empty(self):
        p = lmap([[1]])
        with pytest.raises(MonoidError):
            q_kappa_lattice(p, Cone.from_generators(1, [(1,)]), [])


class TestPushoutSaturation:
    def test_two_three_pushout_not_saturated(self):
        z_pos = AffineMonoid(Lattice(1), ((1,),))
        u = MonoidMap(z_pos, z_pos, lmap([[2]]))
        v = MonoidMap(z_pos, z_pos, lmap([[3]]))
        po = pushout_monoid(u, v)
        assert po.lattice.rank == 1
        vals = sorted(abs(g[0]) for g in po.generators)
        assert vals == [2, 3]
        assert not is_saturated(po)

    def test_identity_pushout(self):
        z_pos = AffineMonoid(Lattice(1), ((1,),))
        u = MonoidMap(z_pos, z_pos, lmap([[1]]))
        po = pushout_monoid(u, u)
        assert is_saturated(po)

    def test_saturated_examples(self):
        assert is_saturated(AffineMonoid(Lattice(1), ((1,),)))
        assert is_saturated(AffineMonoid(Lattice(1), ((2,),)))  # group is 2Z
        assert not is_saturated(AffineMonoid(Lattice(1), ((2,), (3,))))
        assert is_saturated(AffineMonoid(Lattice(2), ((1, 0), (1, 1), (1, 2))))
        # the group of ((1,0),(1,2)) is the even-second-coordinate lattice,
        # and the monoid is all of cone intersect group, so it is saturated
        assert is_saturated(AffineMonoid(Lattice(2), ((1, 0), (1, 2))))
        # here the group is all of Z^2 but (1,1) is missed
        assert not is_saturated(AffineMonoid(Lattice(2), ((1, 0), (1, 2), (2, 1))))

    def test_saturated_with_units(self):
        assert is_saturated(AffineMonoid(Lattice(1), ((1,), (-1,))))
        assert is_saturated(AffineMonoid(Lattice(2), ((1, -1), (-1, 1), (0, 1))))


class TestKatoIntegral:
    def test_doubling_true(self):
        z_pos = AffineMonoid(Lattice(1), ((1,),))
        u = MonoidMap(z_pos, z_pos, lmap([[2]]))
        ok, cex = kato_integral(u, height_bound=10)
        assert ok and cex is None

    def test_identity_true(self):
        z_pos = AffineMonoid(Lattice(1), ((1,),))
        u = MonoidMap(z_pos, z_pos, lmap([[1]]))
        ok, _ = kato_integral(u, height_bound=6)
        assert ok

    def test_blowup_chart_dual_fails(self):
        # dual of (a,b) -> (a, a+b) between dual monoids of the quadrant
        quad = Cone.from_generators(2, [(1, 0), (0, 1)])
        src = dual_monoid(quad)
        tgt = dual_monoid(quad)
        u = MonoidMap(src, tgt, lmap([[1, 0], [1, 1]]))
        ok, cex = kato_integral(u, height_bound=6)
        assert not ok
        p1, p2, q1, q2 = cex
        assert vec_add(p1, q1) == vec_add(p2, q2)

    def test_rejects_non_injective(self):
        z_pos = AffineMonoid(Lattice(1), ((1,),))
        zero = AffineMonoid(Lattice(1), ())
        u = MonoidMap(z_pos, zero, lmap([[0]]))
        with pytest.raises(MonoidError):
            kato_integral(u)

    def test_counterexample_is_genuine(self):
        # verify the emitted counterexample by exhaustive witness search
        quad = Cone.from_generators(2, [(1, 0), (0, 1)])
        src = dual_monoid(quad)
        tgt = dual_monoid(quad)
        umap = lmap([[1, 0], [1, 1]])
        u = MonoidMap(src, tgt, umap)
        ok, (p1, p2, q1, q2) = kato_integral(u, height_bound=6)
        assert not ok
        elements = naive_elements(tgt.generators, 12, 2)
        src_elements = naive_elements(src.generators, 12, 2)
        for r1 in src_elements:
            w = tuple(a - b for a, b in zip(p1, umap(r1)))
            if w not in elements:
                continue
            for r2 in src_elements:
                if tuple(a + b for a, b in zip(w, umap(r2))) != p2:
                    continue
                s1 = next(s for s in src_elements if tuple(umap(s)) == q1)
                s2 = next(s for s in src_elements if tuple(umap(s)) == q2)
                assert vec_add(s1, r1) != vec_add(s2, r2)


class TestMonoidMapValidation:
    def test_rejects_escaping_generator(self):
        src = AffineMonoid(Lattice(1), ((1,),))
        tgt = AffineMonoid(Lattice(1), ((2,),))
        with pytest.raises(MonoidError):
            MonoidMap(src, tgt, lmap([[3]]))

    def test_accepts_valid(self):
        src = AffineMonoid(Lattice(1), ((1,),))
        tgt = AffineMonoid(Lattice(1), ((2,),))
        MonoidMap(src, tgt, lmap([[4]]))


# -- properties -------------------------------------------------------------

@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3)),
                min_size=1, max_size=4))
@settings(max_examples=60, deadline=None)
def test_hilbert_basis_generates_cone_points(gens):
    c = Cone.from_generators(2, gens)
    if not c.is_strictly_convex or c.dim == 0:
        return
    hb = hilbert_basis(c)
    M = AffineMonoid(Lattice(2), tuple(hb))
    for x in range(-2, 5):
        for y in range(-2, 5):
            ok, _ = monoid_membership((x, y), M)
            assert ok == c.contains((x, y))


@given(st.lists(st.tuples(st.integers(-2, 2), st.integers(-2, 2)),
                min_size=1, max_size=4),
       st.tuples(st.integers(-5, 5), st.integers(-5, 5)))
@settings(max_examples=60, deadline=None)
def test_units_membership_matches_naive(gens, w):
    gens = [g for g in gens if g != (0, 0)]
    if not gens:
        return
    got = _contains_modulo_units(w, gens, Lattice(2))
    assert got == (tuple(w) in naive_elements(gens, 14, 2))
