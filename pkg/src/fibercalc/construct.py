"""Elementary blocks and the horizontal/vertical stabilizations built from them.

Horizontal stabilization is a fiber sum with a block Q_m (or R_m), vertical
stabilization a section sum.  First homology of a sum is computed twice when
both sides are explicit: from the composed monodromy and from the
Mayer-Vietoris cokernel of the two fiber (or section) inclusions.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

from .invariants import (
    Asserted,
    DeclaredInvariants,
    FibrationError,
    Fibration,
    H1Unknown,
    IncompleteData,
    InvariantReport,
    Kind,
    Section,
    euler_characteristic,
    fiber_cokernel,
    h1_total_space,
    invariant_report,
    model_basis_order,
    relation_matrix,
    signature,
)
from .linalg import (
    AbelianGroup,
    IntMatrix,
    cokernel_group,
    integer_kernel,
    primitive_root,
    rank,
    solve_integer,
)
from .monodromy import (
    CurveClass,
    Handle,
    Letter,
    MonodromyFactorization,
    SpElement,
    conjugate_curve,
    pairing,
)


class ConstructionError(FibrationError):
    pass


class NoSuitableCurve(ConstructionError):
    pass


class CrossCheckFailure(AssertionError):
    """The two H_1 routes disagree: a bug, never a user error."""


# ---------------------------------------------------------------------------
# Blocks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BlockSpec:
    family: str
    g: int
    h: int
    m: int = 1
    a: CurveClass | None = None
    b: CurveClass | None = None

    def __post_init__(self) -> None:
        fam = self.family.upper()
        object.__setattr__(self, "family", fam)
        if fam not in ("P", "Q", "R"):
            raise ConstructionError(f"unknown block family {self.family!r}")
        if self.g < 1 or self.h < 1:
            raise ConstructionError("block genera must be positive")
        if self.m < 1:
            raise ConstructionError("twist multiplicity m must be >= 1")
        if fam == "P":
            return
        if self.g + self.h < 3:
            raise ConstructionError(f"{fam} blocks need g + h >= 3, got g={self.g}, h={self.h}")
        a = self.a or CurveClass.standard(self.g, "a1")
        object.__setattr__(self, "a", a)
        self._check_curve(a, "a")
        if fam == "R":
            b = self.b or CurveClass.standard(self.g, "a2" if self.g >= 2 else "b1")
            object.__setattr__(self, "b", b)
            self._check_curve(b, "b")
            if b.klass == a.klass or b.klass == tuple(-x for x in a.klass):
                raise ConstructionError("a and b must have distinct homology classes")
            if self.h == 1 and pairing(a.klass, b.klass) != 0:
                raise ConstructionError(
                    "for h = 1 the curves a and b must be disjoint, but <a, b> != 0"
                )

    def _check_curve(self, c: CurveClass, label: str) -> None:
        if c.genus != self.g:
            raise ConstructionError(f"curve {label} lives on genus {c.genus}, expected {self.g}")
        if c.separating:
            raise ConstructionError(f"curve {label} must be non-separating")


def block_name(spec: BlockSpec) -> str:
    if spec.family == "P":
        return f"P({spec.g},{spec.h})"
    return f"{spec.family}_{spec.m}({spec.g},{spec.h})"


def build_block(spec: BlockSpec) -> Fibration:
    g, h, m = spec.g, spec.h, spec.m
    handles = [Handle() for _ in range(h)]
    disjoint: tuple[tuple[int, int], ...] = ()
    if spec.family == "Q":
        handles[0] = Handle((Letter(spec.a, m),), ())
    elif spec.family == "R":
        if h == 1:
            handles[0] = Handle((Letter(spec.a, m),), (Letter(spec.b, 1),))
            disjoint = ((0, 1),)
        else:
            handles[0] = Handle((Letter(spec.a, m),), ())
            handles[1] = Handle((Letter(spec.b, 1),), ())
    fac = MonodromyFactorization(g, h, tuple(handles))
    return Fibration(
        Kind.BUNDLE,
        g,
        h,
        fac,
        sections=(Section(0, True),),
        asserted=Asserted(mcg_valid=True, disjoint_pairs=disjoint),
        name=block_name(spec),
    )


# ---------------------------------------------------------------------------
# Curve selection
# ---------------------------------------------------------------------------


def _normalize_sign(v: Sequence[int]) -> tuple[int, ...]:
    v = primitive_root(v)
    first = next(x for x in v if x)
    return v if first > 0 else tuple(-x for x in v)


def _unknown(f: Fibration) -> H1Unknown | None:
    return None if f.is_explicit else f.body.h1_unknown


def _require_flag(f: Fibration, mode: str) -> None:
    if f.is_explicit:
        return
    flag = (
        f.body.nontorsion_fiber_curve_exists
        if mode == "nontorsion"
        else f.body.torsion_fiber_curve_exists
    )
    if not flag:
        raise NoSuitableCurve(f"{f.name or 'fibration'}: no declared {mode} fiber curve")


def _free_lifts(f: Fibration) -> list[tuple[int, ...]]:
    """Fiber classes mapping onto the free generators of the fiber image."""
    unknown = _unknown(f)
    if unknown is not None:
        order = model_basis_order(f.fiber_genus)
        n = 2 * f.fiber_genus
        # guaranteed free rank of the fiber image: b1 lower bound minus the base
        count = min(invariant_report(f).b1_lower_bound - 2 * f.base_genus, n)
        return [tuple(int(j == order[i]) for j in range(n)) for i in range(count)]
    ck = fiber_cokernel(f)
    return [ck.lift.column(ck.n_torsion + i) for i in range(ck.group.rank)]


def select_curve(f: Fibration, mode: str = "nontorsion") -> CurveClass:
    """A primitive fiber class whose image in H_1 is non-torsion (or torsion).

    Non-torsion: the preimage of the first free generator of the fiber image,
    so its image is primitive.  Torsion: preferably the preimage of a torsion
    generator, otherwise a class in the kernel of the fiber inclusion.
    """
    g = f.fiber_genus
    _require_flag(f, mode)
    if mode == "nontorsion":
        lifts = _free_lifts(f)
        if not lifts:
            raise NoSuitableCurve(
                f"{f.name or 'fibration'}: b1 = 2h, every fiber class maps to torsion"
            )
        return CurveClass(g, _normalize_sign(lifts[0]))
    if mode != "torsion":
        raise ValueError(f"unknown selection mode {mode!r}")
    if _unknown(f) is not None:
        raise IncompleteData("torsion selection needs a fully declared H_1")
    ck = fiber_cokernel(f)
    for i in range(ck.n_torsion):
        v = ck.lift.column(i)
        if any(v):
            return CurveClass(g, _normalize_sign(v))
    free_rows = ck.coords.submatrix(range(ck.n_torsion, ck.coords.rows), range(2 * g))
    ker = integer_kernel(free_rows)
    if not ker:
        raise NoSuitableCurve(
            f"{f.name or 'fibration'}: b1 = 2g + 2h, the fiber injects into H_1"
        )
    return CurveClass(g, _normalize_sign(ker[0]))


def select_curve_pair(f: Fibration, disjoint: bool) -> tuple[CurveClass, CurveClass]:
    """Two fiber classes whose images are independent free generators.

    With ``disjoint`` the pair must also have zero algebraic intersection.
    """
    _require_flag(f, "nontorsion")
    g = f.fiber_genus
    lifts = _free_lifts(f)
    if len(lifts) < 2:
        raise NoSuitableCurve(
            f"{f.name or 'fibration'}: need two independent non-torsion fiber classes"
        )
    candidates = [_normalize_sign(v) for v in lifts]
    if not disjoint:
        return CurveClass(g, candidates[0]), CurveClass(g, candidates[1])
    for i in range(len(candidates)):
        for j in range(i + 1, len(candidates)):
            if pairing(candidates[i], candidates[j]) == 0:
                return CurveClass(g, candidates[i]), CurveClass(g, candidates[j])
    # adjust the second class by elements of the fiber kernel
    if _unknown(f) is None:
        ck = fiber_cokernel(f)
        ker = integer_kernel(ck.coords)
        x, y = candidates[0], candidates[1]
        for k in ker:
            p = pairing(x, k)
            if p and pairing(x, y) % p == 0:
                c = -pairing(x, y) // p
                z = tuple(yi + c * ki for yi, ki in zip(y, k))
                if any(z):
                    return CurveClass(g, _normalize_sign(x)), CurveClass(g, _normalize_sign(z))
    raise NoSuitableCurve("no disjoint pair of independent non-torsion fiber classes found")


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StabilizationReport:
    operation: str
    result: Fibration
    partner: Fibration | None = None
    selected_curves: tuple[CurveClass, ...] = ()
    kernel_dim: int | None = None
    b1_before: int | None = None
    b1_partner: int | None = None
    b1_after: int | None = None
    b1_parity_after: int | None = None
    sigma_before: int | None = None
    sigma_partner: int | None = None
    sigma_after: int | None = None
    sigma_recomputed: int | None = None
    euler_after: int | None = None
    euler_recomputed: int | None = None
    h1_after: AbelianGroup | None = None
    h1_presentation: AbelianGroup | None = None
    h1_cokernel: AbelianGroup | None = None
    torsion_after: tuple[int, ...] = ()
    cross_check: bool | None = None
    route: str = ""
    gluing: str = "trivial"
    closed_forms: dict = field(default_factory=dict)
    path: str = ""

    @property
    def selected_curve(self) -> CurveClass | None:
        return self.selected_curves[0] if self.selected_curves else None


# ---------------------------------------------------------------------------
# Mayer-Vietoris helpers
# ---------------------------------------------------------------------------


def _coordinate_moduli(group: AbelianGroup, n_rows: int) -> list[tuple[int, ...]]:
    return [
        tuple(d if r == i else 0 for r in range(n_rows)) for i, d in enumerate(group.torsion)
    ]


def _fiber_sum_cokernel(
    left: tuple[AbelianGroup, IntMatrix], right: tuple[AbelianGroup, IntMatrix], g: int
) -> AbelianGroup:
    """coker(i_1 + i_2 : H_1(fiber) -> H_1(X_1) + H_1(X_2))."""
    (ga, ma), (gb, mb) = left, right
    na, nb = ma.rows, mb.rows
    cols = [c + (0,) * nb for c in _coordinate_moduli(ga, na)]
    cols += [(0,) * na + c for c in _coordinate_moduli(gb, nb)]
    for j in range(2 * g):
        cols.append(ma.column(j) + mb.column(j))
    return cokernel_group(IntMatrix.from_columns(cols, na + nb))


def _section_sum_cokernel(
    left: tuple[AbelianGroup, int], right: tuple[AbelianGroup, int], h: int
) -> AbelianGroup:
    """coker(s_1 + s_2 : H_1(base) -> H_1(X_1) + H_1(X_2)).

    Each section is the inclusion of the base summand, which sits in the
    last 2h coordinates of each group.
    """
    (ga, na), (gb, nb) = left, right
    cols = [c + (0,) * nb for c in _coordinate_moduli(ga, na)]
    cols += [(0,) * na + c for c in _coordinate_moduli(gb, nb)]
    for j in range(2 * h):
        col = [0] * (na + nb)
        col[na - 2 * h + j] = 1
        col[na + nb - 2 * h + j] = 1
        cols.append(tuple(col))
    return cokernel_group(IntMatrix.from_columns(cols, na + nb))


def _real_kernel_dim(maps: Sequence[IntMatrix], torsion_rows: Sequence[int], g: int) -> int:
    """dim ker of the rationalized fiber map into both sides."""
    rows = []
    for m, k in zip(maps, torsion_rows):
        rows += [m.row(i) for i in range(k, m.rows)]
    if not rows:
        return 2 * g
    return 2 * g - rank(IntMatrix.from_rows(rows, 2 * g))


def _conjugated(f: Fibration, twist: SpElement) -> Fibration:
    fac = f.body.map_curves(lambda c: conjugate_curve(twist, c))
    fac = replace(fac, extra_relators=tuple(twist.apply(r) for r in f.body.extra_relators))
    return replace(f, body=fac, name=f"{f.name}^phi" if f.name else "")


def _combined_flags(f1: Fibration, f2: Fibration, kind: Kind) -> Asserted:
    def rel_min(f: Fibration) -> bool:
        return f.kind is Kind.BUNDLE or f.asserted.relatively_minimal

    return Asserted(
        relatively_minimal=kind is Kind.LEFSCHETZ and rel_min(f1) and rel_min(f2),
        mcg_valid=f1.asserted.mcg_valid and f2.asserted.mcg_valid,
        fiber_primitive_override=False,
        minimal=False,
    )


def _report_or_none(f: Fibration) -> InvariantReport | None:
    try:
        return invariant_report(f)
    except IncompleteData:
        return None


def _sig_or_none(f: Fibration) -> int | None:
    try:
        return signature(f)
    except IncompleteData:
        return None


def _euler_or_none(f: Fibration) -> int | None:
    try:
        return euler_characteristic(f)
    except IncompleteData:
        return None


def _add(a: int | None, b: int | None, c: int = 0) -> int | None:
    return None if a is None or b is None else a + b + c


# ---------------------------------------------------------------------------
# Fiber sum
# ---------------------------------------------------------------------------


def fiber_sum(
    f1: Fibration,
    f2: Fibration,
    twist: SpElement | None = None,
    *,
    selected: Sequence[CurveClass] = (),
) -> StabilizationReport:
    """Fiber sum of two fibrations with the same fiber genus.

    ``twist`` conjugates the monodromy of ``f2`` (the gluing map on H_1).
    When one side is opaque without a declared fiber map, ``selected`` lists
    the fiber classes that were chosen through its standard fiber map; the
    partner's fiber relations must lie in their span.
    """
    g = f1.fiber_genus
    if f2.fiber_genus != g:
        raise ConstructionError(f"fiber genus mismatch: {g} vs {f2.fiber_genus}")
    for f in (f1, f2):
        if not f.fiber_primitive:
            raise ConstructionError(
                f"{f.name or 'fibration'}: fiber not known to be primitive (no section, no override)"
            )
    if not f1.is_explicit and not f2.is_explicit:
        raise ConstructionError("at least one summand must be explicit")
    if twist is not None:
        if twist.genus != g or not twist.is_symplectic():
            raise ConstructionError("twist must be an element of Sp(2g, Z) of the fiber genus")
        if not f2.is_explicit:
            raise ConstructionError("the twist acts on the second summand, which must be explicit")
        f2 = _conjugated(f2, twist)
    h = f1.base_genus + f2.base_genus
    k1, k2 = f1.critical_points, f2.critical_points
    kind = Kind.LEFSCHETZ if (k1 or 0) + (k2 or 0) > 0 or Kind.LEFSCHETZ in (f1.kind, f2.kind) else Kind.BUNDLE
    flags = _combined_flags(f1, f2, kind)
    sections: tuple[Section, ...] = ()
    s1, s2 = f1.zero_section() or (f1.sections[0] if f1.sections else None), (
        f2.zero_section() or (f2.sections[0] if f2.sections else None)
    )
    if s1 is not None and s2 is not None:
        sections = (Section(s1.self_intersection + s2.self_intersection, True),)
    else:
        flags = replace(flags, fiber_primitive_override=True)
    name = f"{f1.name or 'X'} #_F {f2.name or 'X'}"

    e_expected = _add(_euler_or_none(f1), _euler_or_none(f2), 4 * (g - 1))
    sig_expected = _add(_sig_or_none(f1), _sig_or_none(f2))
    rep1, rep2 = _report_or_none(f1), _report_or_none(f2)

    if f1.is_explicit and f2.is_explicit:
        fac = MonodromyFactorization(
            g,
            h,
            f1.body.handles + f2.body.handles,
            # t_{c_k}...t_{c_1} must equal H_1 H_2, so f2's cycles come first
            f2.body.vanishing_cycles + f1.body.vanishing_cycles,
            f1.body.extra_relators + f2.body.extra_relators,
        )
        result = Fibration(kind, g, h, fac, sections, flags, name=name)
        pres, _ = h1_total_space(result)
        mv = _fiber_sum_cokernel(h1_total_space(f1), h1_total_space(f2), g)
        if pres != mv:
            raise CrossCheckFailure(f"H_1 routes disagree: presentation {pres}, cokernel {mv}")
        ck1, ck2 = fiber_cokernel(f1), fiber_cokernel(f2)
        d = _real_kernel_dim([ck1.coords, ck2.coords], [ck1.n_torsion, ck2.n_torsion], g)
        e_re = euler_characteristic(result)
        sig_re = signature(result)
        if e_re != e_expected:
            raise CrossCheckFailure(f"euler {e_re} != {e_expected}")
        if sig_re != sig_expected:
            raise CrossCheckFailure(f"signature {sig_re} != Novikov sum {sig_expected}")
        return _fiber_report(
            result, f2, tuple(selected), d, rep1, rep2, pres, pres, mv, True,
            "presentation+cokernel", twist, e_re, sig_re, g, f1.base_genus,
        )

    # one opaque side
    opaque, explicit = (f1, f2) if not f1.is_explicit else (f2, f1)
    lattice = relation_matrix(explicit.body)
    d_opq: DeclaredInvariants = opaque.body
    unknown = d_opq.h1_unknown
    if d_opq.fiber_h1_map is None:
        _check_selected(opaque, lattice, selected)
    if unknown is None and d_opq.h1 is None:
        raise IncompleteData(f"{opaque.name or 'fibration'}: H_1 not declared")

    if unknown is None:
        h1_o = h1_total_space(opaque)
        h1_e = h1_total_space(explicit)
        mv = _fiber_sum_cokernel(h1_o, h1_e, g)
        cko, cke = fiber_cokernel(opaque), fiber_cokernel(explicit)
        d = _real_kernel_dim([cko.coords, cke.coords], [cko.n_torsion, cke.n_torsion], g)
        h1_known, new_unknown = mv, None
        route = "cokernel" + ("" if d_opq.fiber_h1_map is not None else " (standard fiber map)")
    else:
        s = len(selected)
        coeff = _coefficients(selected, lattice, g)
        new_unknown = unknown.drop_rank(s)
        h1_known = d_opq.h1 + AbelianGroup(2 * explicit.base_genus) + cokernel_group(coeff)
        mv = None
        d = 0
        route = "cokernel (undetermined summand)"

    k_res = None if k1 is None or k2 is None else k1 + k2
    free_fiber = None if new_unknown is not None else h1_known.rank - 2 * h
    declared = DeclaredInvariants(
        euler=e_expected,
        signature=sig_expected,
        h1=h1_known,
        fiber_primitive=True,
        nontorsion_fiber_curve_exists=(
            free_fiber > 0 if free_fiber is not None else new_unknown.effective_lower_bound > 0
        ),
        torsion_fiber_curve_exists=(free_fiber is not None and free_fiber < 2 * g),
        source=f"fiber sum of {f1.name or 'X'} and {f2.name or 'X'}",
        critical_points=k_res,
        h1_unknown=new_unknown,
    )
    result = Fibration(kind, g, h, declared, sections, flags, name=name)
    return _fiber_report(
        result, explicit if opaque is f1 else f1, tuple(selected), d, rep1, rep2,
        mv, None, mv, None, route, twist, euler_characteristic(result), _sig_or_none(result), g,
        f1.base_genus,
    )


def _coefficients(selected: Sequence[CurveClass], lattice: IntMatrix, g: int) -> IntMatrix:
    """Express each relation column in terms of the selected classes."""
    if not selected:
        return IntMatrix.zeros(0, lattice.cols)
    basis = IntMatrix.from_columns([c.klass for c in selected], 2 * g)
    cols = []
    for col in lattice.columns():
        sol = solve_integer(basis, col)
        if sol is None:
            raise IncompleteData(
                "partner relations leave the span of the selected curves; "
                "declare fiber_h1_map for the opaque summand"
            )
        cols.append(sol)
    return IntMatrix.from_columns(cols, len(selected))


def _check_selected(opaque: Fibration, lattice: IntMatrix, selected: Sequence[CurveClass]) -> None:
    if lattice.cols == 0:
        return
    if not selected:
        raise IncompleteData(
            f"{opaque.name or 'fibration'}: no declared fiber_h1_map; only partners built on "
            "curves selected for it (or with trivial monodromy) can be summed"
        )
    _coefficients(selected, lattice, opaque.fiber_genus)
    lifts = _free_lifts(opaque)
    for c in selected:
        if c.klass not in lifts:
            raise IncompleteData("selected curve was not chosen through the standard fiber map")


def _fiber_report(
    result, partner, selected, d, rep1, rep2, h1_after, pres, mv, cross, route, twist, e_re, sig_re, g,
    h_seed,
) -> StabilizationReport:
    rep = _report_or_none(result)
    b1a = rep.b1 if rep else None
    b1y = rep1.b1 if rep1 else None
    b1q = rep2.b1 if rep2 else None
    closed = {}
    if b1y is not None and b1q is not None:
        closed = {
            "printed: b1(Y)+b1(Q)-2h": b1y + b1q - 2 * h_seed,
            "corrected: b1(Y)+b1(Q)-2g+d": b1y + b1q - 2 * g + (d or 0),
        }
    return StabilizationReport(
        operation="fiber-sum",
        result=result,
        partner=partner,
        selected_curves=selected,
        kernel_dim=d,
        b1_before=b1y,
        b1_partner=b1q,
        b1_after=b1a,
        b1_parity_after=rep.b1_parity if rep else None,
        sigma_before=rep1.signature if rep1 else None,
        sigma_partner=rep2.signature if rep2 else None,
        sigma_after=rep.signature if rep else sig_re,
        sigma_recomputed=sig_re,
        euler_after=rep.euler if rep else e_re,
        euler_recomputed=e_re,
        h1_after=rep.h1 if rep else h1_after,
        h1_presentation=pres,
        h1_cokernel=mv,
        torsion_after=rep.h1.torsion if rep and rep.h1 else (),
        cross_check=cross,
        route=route,
        gluing="trivial" if twist is None else f"twist {twist.matrix.tolist()}",
        closed_forms=closed,
    )


# ---------------------------------------------------------------------------
# Section sum
# ---------------------------------------------------------------------------


def section_sum(f1: Fibration, f2: Fibration) -> StabilizationReport:
    """Sum along zero self-intersection sections; fiber genera add."""
    h = f1.base_genus
    if f2.base_genus != h:
        raise ConstructionError(f"base genus mismatch: {h} vs {f2.base_genus}")
    for f in (f1, f2):
        s = f.zero_section()
        if s is None:
            raise ConstructionError(
                f"{f.name or 'fibration'}: no section of self-intersection zero"
            )
        if not s.splits_base:
            raise ConstructionError(
                f"{f.name or 'fibration'}: section must induce the inclusion of the base summand"
            )
    if not f1.is_explicit and not f2.is_explicit:
        raise ConstructionError("at least one summand must be explicit")
    g1, g2 = f1.fiber_genus, f2.fiber_genus
    g = g1 + g2
    k1, k2 = f1.critical_points, f2.critical_points
    kind = Kind.LEFSCHETZ if Kind.LEFSCHETZ in (f1.kind, f2.kind) else Kind.BUNDLE
    flags = _combined_flags(f1, f2, kind)
    name = f"{f1.name or 'X'} #_s {f2.name or 'X'}"
    # A block's monodromy misses a disk away from the glued section, so a
    # flat section through that disk survives the sum.
    sections: tuple[Section, ...] = ()
    if any(_is_block(f) for f in (f1, f2)):
        sections = (Section(0, True),)
    e_expected = _add(_euler_or_none(f1), _euler_or_none(f2), 4 * (h - 1))
    sig_expected = _add(_sig_or_none(f1), _sig_or_none(f2))
    rep1, rep2 = _report_or_none(f1), _report_or_none(f2)

    if f1.is_explicit and f2.is_explicit:
        left = f1.body
        right = f2.body

        def pad_left(word):
            return tuple(Letter(l.curve.padded(0, g), l.power) for l in word)

        def pad_right(word):
            return tuple(Letter(l.curve.padded(g1, g), l.power) for l in word)

        handles = tuple(
            Handle(pad_left(a.alpha) + pad_right(b.alpha), pad_left(a.beta) + pad_right(b.beta))
            for a, b in zip(left.handles, right.handles)
        )
        extra = tuple(r + (0,) * (2 * g2) for r in left.extra_relators) + tuple(
            (0,) * (2 * g1) + r for r in right.extra_relators
        )
        fac = MonodromyFactorization(
            g, h, handles, pad_left(left.vanishing_cycles) + pad_right(right.vanishing_cycles), extra
        )
        result = Fibration(kind, g, h, fac, sections, flags, name=name)
        pres, _ = h1_total_space(result)
        mv = _section_sum_cokernel(
            (h1_total_space(f1)[0], _n_coords(f1)), (h1_total_space(f2)[0], _n_coords(f2)), h
        )
        if pres != mv:
            raise CrossCheckFailure(f"H_1 routes disagree: presentation {pres}, cokernel {mv}")
        e_re = euler_characteristic(result)
        sig_re = signature(result)
        if e_re != e_expected:
            raise CrossCheckFailure(f"euler {e_re} != {e_expected}")
        if sig_re != sig_expected:
            raise CrossCheckFailure(f"signature {sig_re} != Novikov sum {sig_expected}")
        cross: bool | None = True
        route = "presentation+cokernel"
        h1_pres: AbelianGroup | None = pres
    else:
        opaque, explicit = (f1, f2) if not f1.is_explicit else (f2, f1)
        d_opq: DeclaredInvariants = opaque.body
        # sections split the base, so the sum is H_1(opaque) + fiber part of the other
        fiber_part = fiber_cokernel(explicit).group
        if d_opq.h1 is None:
            raise IncompleteData(f"{opaque.name or 'fibration'}: H_1 not declared")
        if d_opq.h1_unknown is None:
            mv = _section_sum_cokernel(
                (h1_total_space(f1)[0], _n_coords(f1)), (h1_total_space(f2)[0], _n_coords(f2)), h
            )
            h1_known = mv
        else:
            mv = None
            h1_known = d_opq.h1 + fiber_part
        unknown = d_opq.h1_unknown
        free_fiber = None if unknown is not None else h1_known.rank - 2 * h
        declared = DeclaredInvariants(
            euler=e_expected,
            signature=sig_expected,
            h1=h1_known,
            fiber_primitive=False,
            nontorsion_fiber_curve_exists=(
                free_fiber > 0 if free_fiber is not None else unknown.effective_lower_bound > 0
            ),
            torsion_fiber_curve_exists=(free_fiber is not None and free_fiber < 2 * g),
            source=f"section sum of {f1.name or 'X'} and {f2.name or 'X'}",
            critical_points=None if k1 is None or k2 is None else k1 + k2,
            h1_unknown=unknown,
        )
        result = Fibration(kind, g, h, declared, sections, flags, name=name)
        e_re = euler_characteristic(result)
        sig_re = _sig_or_none(result)
        cross = None
        route = "cokernel"
        h1_pres = None

    rep = _report_or_none(result)
    b1z = rep1.b1 if rep1 else None
    b1t = rep2.b1 if rep2 else None
    closed = {}
    if b1z is not None and b1t is not None:
        closed = {"b1(Z)+b1(T)-2h": b1z + b1t - 2 * h}
    return StabilizationReport(
        operation="section-sum",
        result=result,
        partner=f2,
        kernel_dim=None,
        b1_before=b1z,
        b1_partner=b1t,
        b1_after=rep.b1 if rep else None,
        b1_parity_after=rep.b1_parity if rep else None,
        sigma_before=rep1.signature if rep1 else None,
        sigma_partner=rep2.signature if rep2 else None,
        sigma_after=rep.signature if rep else sig_re,
        sigma_recomputed=sig_re,
        euler_after=rep.euler if rep else e_re,
        euler_recomputed=e_re,
        h1_after=rep.h1 if rep else None,
        h1_presentation=h1_pres,
        h1_cokernel=mv,
        torsion_after=rep.h1.torsion if rep and rep.h1 else (),
        cross_check=cross,
        route=route,
        closed_forms=closed,
    )


def _is_block(f: Fibration) -> bool:
    return (
        f.is_explicit
        and f.kind is Kind.BUNDLE
        and f.asserted.mcg_valid
        and f.zero_section() is not None
    )


def _n_coords(f: Fibration) -> int:
    return h1_total_space(f)[1].rows


# ---------------------------------------------------------------------------
# Stabilizations
# ---------------------------------------------------------------------------


def horizontal_stabilize(
    f: Fibration, h_partner: int, m: int, twist: SpElement | None = None
) -> StabilizationReport:
    """Fiber sum with Q_m(g, h', a) on a selected non-torsion curve a.

    Seeds with even b1 use Q_m; seeds with odd b1 use R_m(g, h', a, b) on two
    independent non-torsion curves so the rank drops by two and b1 stays odd.
    """
    g, h = f.fiber_genus, f.base_genus
    if g < 2:
        raise ConstructionError("horizontal stabilization needs fiber genus >= 2")
    if f.kind is Kind.BUNDLE and h < 1:
        raise ConstructionError("horizontal stabilization of a bundle needs base genus >= 1")
    if not f.fiber_primitive:
        raise ConstructionError("fiber must be primitive in H_2 (section or override required)")
    rep = invariant_report(f)
    if rep.b1 is not None and rep.b1 <= 2 * h:
        raise NoSuitableCurve(f"b1 = {rep.b1} is not larger than 2h = {2 * h}")
    if rep.b1_parity == 0:
        a = select_curve(f, "nontorsion")
        partner = build_block(BlockSpec("Q", g, h_partner, m, a))
        selected: tuple[CurveClass, ...] = (a,)
        path = "nontorsion"
    else:
        a, b = select_curve_pair(f, disjoint=(h_partner == 1))
        partner = build_block(BlockSpec("R", g, h_partner, m, a, b))
        selected = (a, b)
        path = "odd-b1"
    report = fiber_sum(f, partner, twist, selected=selected)
    _check_postconditions(report, f, m)
    return replace(report, path=path)


def vertical_stabilize(f: Fibration, g_partner: int, m: int) -> StabilizationReport:
    """Section sum with Q_m(g', h) when b1 is even, R_m(g', h) when odd."""
    h = f.base_genus
    if f.kind is Kind.BUNDLE and h < 2:
        raise ConstructionError("vertical stabilization of a bundle needs base genus >= 2")
    if f.kind is Kind.LEFSCHETZ and h < 1:
        raise ConstructionError("vertical stabilization of a Lefschetz fibration needs base genus >= 1")
    if f.zero_section() is None:
        raise ConstructionError("vertical stabilization needs a section of self-intersection zero")
    rep = invariant_report(f)
    if rep.b1_parity == 0:
        partner = build_block(BlockSpec("Q", g_partner, h, m))
        path = "Q"
    else:
        partner = build_block(BlockSpec("R", g_partner, h, m))
        path = "R"
    report = section_sum(f, partner)
    _check_postconditions(report, f, m)
    return replace(report, path=path, selected_curves=(partner.body.handles[0].alpha[0].curve,))


def _check_postconditions(report: StabilizationReport, seed: Fibration, m: int) -> None:
    res = invariant_report(report.result)
    problems = []
    if res.b1_parity != 1:
        problems.append("b1 is not odd")
    if report.sigma_before is not None and res.signature != report.sigma_before:
        problems.append("signature changed")
    if res.h1 is not None and not res.h1.has_element_of_order(m):
        problems.append(f"no element of order {m} in H_1")
    if report.kernel_dim not in (None, 0):
        problems.append(f"kernel dimension {report.kernel_dim} != 0")
    if problems:
        raise CrossCheckFailure("stabilization postconditions failed: " + "; ".join(problems))
