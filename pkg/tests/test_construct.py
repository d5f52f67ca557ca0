from __future__ import annotations

import random

import pytest

from fibercalc.catalog import bryan_donagi_x, elliptic, korkmaz_y
from fibercalc.construct import (
    BlockSpec,
    ConstructionError,
    NoSuitableCurve,
    block_name,
    build_block,
    fiber_sum,
    horizontal_stabilize,
    section_sum,
    select_curve,
    select_curve_pair,
    vertical_stabilize,
)
from fibercalc.invariants import (
    Asserted,
    DeclaredInvariants,
    Fibration,
    IncompleteData,
    Kind,
    fiber_cokernel,
    invariant_report,
)
from fibercalc.linalg import AbelianGroup
from fibercalc.monodromy import CurveClass, Letter, pairing, word_matrix

from conftest import random_curve


def block(family, g, h, m=1, a=None, b=None):
    return build_block(BlockSpec(family, g, h, m, a, b))


def test_block_spec_validation():
    with pytest.raises(ConstructionError):
        BlockSpec("S", 2, 2)
    with pytest.raises(ConstructionError):
        BlockSpec("Q", 1, 1, 3)
    with pytest.raises(ConstructionError):
        BlockSpec("Q", 2, 2, 0)
    a = CurveClass.standard(2, "a1")
    with pytest.raises(ConstructionError, match="distinct"):
        BlockSpec("R", 2, 2, 3, a, a)
    with pytest.raises(ConstructionError, match="disjoint"):
        BlockSpec("R", 2, 1, 3, a, CurveClass.standard(2, "b1"))
    with pytest.raises(ConstructionError, match="non-separating"):
        BlockSpec("Q", 2, 2, 3, CurveClass.separating_curve(2))
    assert block_name(BlockSpec("Q", 3, 9, 5)) == "Q_5(3,9)"
    assert block_name(BlockSpec("p", 3, 9)) == "P(3,9)"


def test_block_homology_small():
    assert invariant_report(block("P", 2, 1)).h1 == AbelianGroup(6)
    assert invariant_report(block("Q", 3, 9, 5)).h1 == AbelianGroup(23, (5,))
    assert invariant_report(block("R", 2, 1, 4)).h1 == AbelianGroup(4, (4,))
    b = block("R", 3, 2, 6)
    rep = invariant_report(b)
    assert rep.h1 == AbelianGroup(8, (6,)) and rep.signature == 0 and rep.euler == 8


def test_q_with_non_standard_curve():
    # any primitive curve gives the same group
    a = CurveClass(3, (2, 1, 0, 3, -1, 1))
    assert invariant_report(block("Q", 3, 2, 7, a)).h1 == AbelianGroup(9, (7,))


def test_curve_selection_on_blocks():
    q = block("Q", 2, 2, 3)
    a = select_curve(q, "nontorsion")
    ck = fiber_cokernel(q)
    img = ck.image(a.klass)
    assert any(img[ck.n_torsion:])
    t = select_curve(q, "torsion")
    assert not any(ck.image(t.klass)[ck.n_torsion:])
    p = block("P", 2, 2)
    with pytest.raises(NoSuitableCurve):
        select_curve(p, "torsion")
    x, y = select_curve_pair(q, disjoint=True)
    assert pairing(x.klass, y.klass) == 0


def test_selection_on_trivial_fiber_image():
    e1 = elliptic(1)
    with pytest.raises(NoSuitableCurve):
        select_curve(e1, "nontorsion")


def test_twisted_fiber_sum_preserves_invariants():
    rng = random.Random(5)
    q1, q2 = block("Q", 2, 1, 3), block("Q", 2, 1, 4)
    phi = word_matrix([Letter(random_curve(rng, 2), rng.choice([-1, 1])) for _ in range(5)], 2)
    straight = fiber_sum(q1, q2)
    twisted = fiber_sum(q1, q2, phi)
    assert twisted.cross_check and straight.cross_check
    assert twisted.sigma_after == straight.sigma_after == 0
    assert twisted.euler_after == 4
    assert twisted.gluing.startswith("twist")
    # a twist that sends a_1 to b_1 makes the two kernels transverse
    swap = word_matrix([Letter(CurveClass.standard(2, "a1")), Letter(CurveClass.standard(2, "b1"))] * 3, 2)
    rep = fiber_sum(q1, q2, swap @ swap @ swap)
    assert rep.cross_check


def test_fiber_sum_needs_primitive_fiber():
    e = Fibration(Kind.LEFSCHETZ, 1, 0, elliptic(1).body)
    with pytest.raises(ConstructionError, match="primitive"):
        fiber_sum(e, e)
    forced = Fibration(
        Kind.LEFSCHETZ, 1, 0, elliptic(1).body, asserted=Asserted(fiber_primitive_override=True)
    )
    rep = fiber_sum(forced, forced)
    assert (rep.sigma_after, rep.euler_after, str(rep.h1_after)) == (-16, 24, "0")


def test_section_sum_of_blocks():
    rep = section_sum(block("Q", 2, 2, 3), block("R", 3, 2, 4))
    assert rep.cross_check
    assert rep.result.fiber_genus == 5
    assert rep.h1_after == AbelianGroup(11, (12,))
    assert rep.closed_forms["b1(Z)+b1(T)-2h"] == rep.b1_after
    assert rep.result.zero_section() is not None
    with pytest.raises(ConstructionError, match="base genus"):
        section_sum(block("P", 2, 2), block("P", 2, 3))


def test_horizontal_even_path_on_block():
    rep = horizontal_stabilize(block("P", 2, 2), 2, 5)
    assert rep.path == "nontorsion"
    assert rep.b1_after == 11 and rep.h1_after.has_element_of_order(5)
    assert rep.kernel_dim == 0 and rep.cross_check
    assert rep.closed_forms["corrected: b1(Y)+b1(Q)-2g+d"] == rep.b1_after


def test_horizontal_odd_path_on_q2():
    q = block("Q", 2, 2, 2)
    rep = horizontal_stabilize(q, 2, 5)
    assert rep.path == "odd-b1" and len(rep.selected_curves) == 2
    assert rep.h1_after == AbelianGroup(9, (10,))
    assert rep.b1_after % 2 == 1 and rep.sigma_after == 0


def test_literal_torsion_partner_gives_even_b1():
    # R_m on one non-torsion and one torsion curve: the rank drops by one only
    q = block("Q", 2, 2, 2)
    a = select_curve(q, "nontorsion")
    b = select_curve(q, "torsion")
    rep = fiber_sum(q, block("R", 2, 2, 5, a, b), selected=(a, b))
    assert rep.b1_after == 10
    assert rep.kernel_dim == 1
    assert rep.closed_forms["printed: b1(Y)+b1(Q)-2h"] == 9
    assert rep.closed_forms["corrected: b1(Y)+b1(Q)-2g+d"] == 10


def test_printed_closed_form_disagrees_when_h_differs():
    # the printed formula subtracts 2h, the MV count subtracts 2g
    rep = horizontal_stabilize(block("P", 3, 1), 4, 3)
    cf = rep.closed_forms
    assert cf["corrected: b1(Y)+b1(Q)-2g+d"] == rep.b1_after
    assert cf["printed: b1(Y)+b1(Q)-2h"] != rep.b1_after


def test_vertical_paths():
    rep = vertical_stabilize(block("P", 2, 2), 2, 4)
    assert rep.path == "Q" and rep.h1_after == AbelianGroup(11, (4,))
    rep2 = vertical_stabilize(block("Q", 2, 2, 2), 3, 3)
    assert rep2.path == "R" and rep2.h1_after.has_element_of_order(3)
    assert rep2.b1_after % 2 == 1
    with pytest.raises(ConstructionError):
        vertical_stabilize(block("P", 2, 1), 2, 4)


def test_horizontal_on_korkmaz_seed():
    for g in (2, 3):
        rep = horizontal_stabilize(korkmaz_y(g), 1, 4)
        assert rep.h1_after == AbelianGroup(3, (4,))
        assert rep.sigma_after == invariant_report(korkmaz_y(g)).signature


def test_opaque_seed_needs_selection():
    x = bryan_donagi_x(2)
    partner = block("Q", 25, 1, 3)
    with pytest.raises(IncompleteData):
        fiber_sum(x, partner)
    rep = horizontal_stabilize(x, 1, 3)
    assert rep.route.startswith("cokernel")
    assert rep.b1_parity_after == 1
    assert rep.sigma_after == 16


def test_opaque_declared_h1_unknown_guard():
    f = Fibration(
        Kind.LEFSCHETZ, 2, 1,
        DeclaredInvariants(euler=8, signature=-4, h1=None, critical_points=8, fiber_primitive=True,
                           nontorsion_fiber_curve_exists=True),
    )
    with pytest.raises(IncompleteData):
        fiber_sum(f, block("P", 2, 1))
