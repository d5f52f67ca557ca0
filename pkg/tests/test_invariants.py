from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fibercalc.catalog import elliptic
from fibercalc.invariants import (
    Asserted,
    DeclaredInvariants,
    Fibration,
    FibrationError,
    H1Unknown,
    IncompleteData,
    Kind,
    Minimality,
    Section,
    euler_characteristic,
    fiber_cokernel,
    h1_total_space,
    invariant_report,
    meyer_sum,
    meyer_tau,
    signature,
)
from fibercalc.linalg import AbelianGroup, IntMatrix
from fibercalc.monodromy import (
    CurveClass,
    Handle,
    Letter,
    MonodromyFactorization,
    SpElement,
    conjugate_curve,
    letter_matrix,
    relation_word,
    word_matrix,
)

from conftest import letters

# genus-2 chain c1..c5: consecutive curves meet once, others are disjoint
CHAIN = [(0, 1, 0, 0), (1, 0, 0, 0), (0, 1, 0, -1), (0, 0, 1, 0), (0, 0, 0, 1)]


def lf(g, word, name=""):
    """Lefschetz fibration over S^2 whose relation t_{c_k}...t_{c_1} = 1 is given
    left to right as a product of twists (so c_1 is the last letter)."""
    cycles = tuple(Letter(CurveClass(g, v)) for v in reversed(word))
    return Fibration(Kind.LEFSCHETZ, g, 0, MonodromyFactorization(g, 0, (), cycles), name=name)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_elliptic_surfaces(n):
    rep = invariant_report(elliptic(n))
    assert rep.signature == -8 * n
    assert rep.euler == 12 * n
    assert rep.h1 == AbelianGroup(0)
    assert rep.b2 == 12 * n - 2


def test_genus2_chain_relations():
    # literature values: K3 # 2 CP^2-bar, the Horikawa-type and the 20-cycle relation
    f = lf(2, CHAIN * 6)
    rep = invariant_report(f)
    assert (rep.signature, rep.euler, str(rep.h1)) == (-18, 26, "0")
    f = lf(2, CHAIN[:4] * 10)
    rep = invariant_report(f)
    assert (rep.signature, rep.euler, str(rep.h1)) == (-24, 36, "0")
    palin = CHAIN + [CHAIN[4]] + CHAIN[3::-1]
    f = lf(2, palin * 2)
    rep = invariant_report(f)
    assert (rep.signature, rep.euler, str(rep.h1)) == (-12, 16, "0")


def test_separating_cycles_contribute():
    # homological shadow of Matsumoto's genus-2 fibration on T^2 x S^2 # 4 CP^2-bar:
    # (t_x t_y t_z t_sep)^2 with (T_x T_y T_z)^2 = I
    x, y, z = (0, 1, -1, -1), (1, -1, 0, 1), (1, 0, -1, 0)
    sep = CurveClass.separating_curve(2)
    word = [Letter(CurveClass(2, v)) for v in (z, y, x)] + [Letter(sep)]
    f = Fibration(Kind.LEFSCHETZ, 2, 0, MonodromyFactorization(2, 0, (), tuple(word * 2)))
    rep = invariant_report(f)
    assert (rep.signature, rep.euler, str(rep.h1)) == (-4, 4, "Z^2")
    assert f.separating_vanishing_cycles == 2


def test_signature_invariant_under_global_conjugation():
    phi = word_matrix([Letter(CurveClass(2, (1, 1, 0, 1)), 2), Letter(CurveClass(2, (0, 1, 1, 0)))], 2)
    f = lf(2, CHAIN * 6)
    g = Fibration(
        Kind.LEFSCHETZ, 2, 0, f.body.map_curves(lambda c: conjugate_curve(phi, c))
    )
    assert signature(g) == signature(f)
    assert invariant_report(g).h1 == invariant_report(f).h1


def test_meyer_sum_cyclic_rotation():
    word = relation_word(lf(2, CHAIN * 6).body)
    mats = [letter_matrix(l) for l in word]
    base = meyer_sum(mats)
    for k in (1, 7, 13, 29):
        assert meyer_sum(mats[k:] + mats[:k]) == base


def _elements(g):
    return st.lists(letters(g, 2), min_size=1, max_size=4).map(lambda w: word_matrix(w, g))


@given(st.sampled_from([1, 2, 3]).flatmap(lambda g: st.tuples(_elements(g), _elements(g), _elements(g))))
@settings(max_examples=150)
def test_meyer_cocycle(triple):
    a, b, c = triple
    g = a.genus
    assert meyer_tau(a, b) + meyer_tau(a @ b, c) == meyer_tau(a, b @ c) + meyer_tau(b, c)
    assert abs(meyer_tau(a, b)) <= 2 * g
    e = SpElement.identity(g)
    assert meyer_tau(e, a) == 0 == meyer_tau(a, e)
    assert meyer_tau(a, a.inverse()) == 0


def test_euler_formula_and_lefschetz_requirement():
    with pytest.raises(FibrationError, match="non-empty critical locus required"):
        Fibration(Kind.LEFSCHETZ, 1, 1, MonodromyFactorization(1, 1, (Handle(),)))
    with pytest.raises(FibrationError):
        Fibration(
            Kind.BUNDLE, 1, 0, MonodromyFactorization(1, 0, (), (Letter(CurveClass.standard(1, "a1")),))
        )
    assert euler_characteristic(elliptic(1)) == 12


def test_invalid_relation_rejected():
    with pytest.raises(FibrationError, match="invalid factorization"):
        lf(2, CHAIN * 5)


def opaque(**kw):
    defaults = dict(
        euler=4, signature=-4, h1=AbelianGroup(2), fiber_primitive=True,
        nontorsion_fiber_curve_exists=True, critical_points=8,
    )
    defaults.update(kw)
    return Fibration(Kind.LEFSCHETZ, 2, 0, DeclaredInvariants(**defaults), name="op")


def test_declared_consistency_checks():
    assert invariant_report(opaque()).b1 == 2
    with pytest.raises(FibrationError, match="contradicts"):
        opaque(euler=5)
    with pytest.raises(FibrationError, match="critical locus"):
        opaque(critical_points=0)
    with pytest.raises(FibrationError, match="b2"):
        Fibration(
            Kind.LEFSCHETZ, 2, 0,
            DeclaredInvariants(euler=1, signature=0, h1=AbelianGroup(0), critical_points=5),
        )
    with pytest.raises(FibrationError, match="generators"):
        opaque(h1=AbelianGroup(4, (2, 2)))
    with pytest.raises(FibrationError, match="non-torsion"):
        opaque(h1=AbelianGroup(0))
    with pytest.raises(FibrationError, match="base summand"):
        Fibration(
            Kind.BUNDLE, 2, 2,
            DeclaredInvariants(euler=4, signature=0, h1=AbelianGroup(2)),
        )


def test_declared_fiber_map_surjectivity():
    good = IntMatrix.from_rows([[1, 0, 0, 0], [0, 0, 1, 0]])
    assert fiber_cokernel(opaque(fiber_h1_map=good)).group == AbelianGroup(2)
    bad = IntMatrix.from_rows([[2, 0, 0, 0], [0, 0, 1, 0]])
    with pytest.raises(FibrationError, match="surject"):
        opaque(fiber_h1_map=bad)


def test_incomplete_data():
    f = opaque(euler=None, signature=None, critical_points=None)
    with pytest.raises(IncompleteData):
        invariant_report(f)
    rep = invariant_report(opaque(signature=None))
    assert rep.signature is None


def test_unknown_summand_bookkeeping():
    u = H1Unknown("x", 0, 9)
    assert u.effective_lower_bound == 10
    assert u.parity == 0
    v = u.drop_rank(1)
    assert v.effective_lower_bound == 9 and v.parity == 1
    with pytest.raises(FibrationError):
        H1Unknown("x", 2, 1)
    with pytest.raises(FibrationError):
        u.drop_rank(11)
    f = Fibration(
        Kind.BUNDLE, 25, 2,
        DeclaredInvariants(
            euler=96, signature=16, h1=AbelianGroup(0), h1_unknown=u,
            nontorsion_fiber_curve_exists=True, fiber_primitive=True,
        ),
    )
    rep = invariant_report(f)
    assert rep.b1 is None and rep.b1_parity == 0 and rep.b1_lower_bound == 10
    assert rep.b2_lower_bound == 96 - 2 + 20
    assert rep.minimality_basis is Minimality.BUNDLE_RULE


def test_fiber_map_rows_and_base_rows():
    g, h = 2, 2
    a = CurveClass.standard(g, "a1")
    fac = MonodromyFactorization(g, h, (Handle((Letter(a, 3),), ()), Handle()))
    f = Fibration(Kind.BUNDLE, g, h, fac, (Section(),))
    group, fmap = h1_total_space(f)
    assert str(group) == "Z^7 + Z_3"
    assert fmap.shape == (1 + 3 + 4, 4)
    # a_1 is 3-torsion; the last 2h rows (base) vanish on the fiber
    assert fmap.apply(a.klass)[0] % 3 != 0
    assert not any(fmap.apply(a.klass)[1:])
    assert all(not any(fmap.row(i)) for i in range(4, 8))


def test_minimality_rules():
    f = elliptic(1)
    assert invariant_report(f).minimality_basis is Minimality.NONE
    g = opaque()
    assert invariant_report(g).minimality_basis is Minimality.NONE  # h = 0
    rm = Fibration(
        Kind.LEFSCHETZ, 2, 1,
        DeclaredInvariants(euler=8, signature=-4, h1=AbelianGroup(3), critical_points=8),
        asserted=Asserted(relatively_minimal=True),
    )
    assert invariant_report(rm).minimality_basis is Minimality.RELMIN_RULE
    dm = Fibration(
        Kind.LEFSCHETZ, 2, 0,
        DeclaredInvariants(euler=4, signature=-4, h1=AbelianGroup(2), critical_points=8),
        asserted=Asserted(minimal=True),
    )
    assert invariant_report(dm).minimality_basis is Minimality.DECLARED


def test_declared_flags_must_be_booleans():
    with pytest.raises(FibrationError, match="boolean"):
        DeclaredInvariants(euler=4, signature=0, h1=AbelianGroup(2), fiber_primitive=None)
