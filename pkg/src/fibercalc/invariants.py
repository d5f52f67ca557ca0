"""Fibrations and the invariants of their total spaces.

Two kinds of body are supported: an explicit monodromy factorization, from
which e, H_1 and the signature are computed, and an opaque record whose
invariants are declared from the literature and only cross-checked.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from typing import Union

from .linalg import (
    AbelianGroup,
    Cokernel,
    IntMatrix,
    cokernel,
    integer_kernel,
    solve_integer,
    symmetric_signature,
)
from .monodromy import (
    MonodromyFactorization,
    SpElement,
    intersection_form,
    letter_matrix,
    relation_word,
    verify_homological_relation,
)


class FibrationError(ValueError):
    pass


class IncompleteData(FibrationError):
    """A declared value needed for the computation is missing."""


class Kind(str, Enum):
    BUNDLE = "bundle"
    LEFSCHETZ = "lefschetz"


@dataclass(frozen=True)
class Section:
    self_intersection: int = 0
    splits_base: bool = True


@dataclass(frozen=True)
class Asserted:
    """Claims that cannot be checked homologically and are taken on trust."""

    relatively_minimal: bool = False
    mcg_valid: bool = False
    fiber_primitive_override: bool = False
    minimal: bool = False
    disjoint_pairs: tuple[tuple[int, int], ...] = ()


@dataclass(frozen=True)
class H1Unknown:
    """An undetermined summand U of H_1.

    H_1 is ``U' + h1`` where ``U'`` is ``U`` with ``rank_deficit`` free
    summands removed.  Only the parity and a lower bound of rank(U) are
    known; its torsion is some unknown finite group shared by everything
    carrying the same ``tag``.
    """

    tag: str
    rank_parity: int
    rank_lower_bound: int
    rank_deficit: int = 0

    def __post_init__(self) -> None:
        if self.rank_parity not in (0, 1):
            raise FibrationError("rank parity must be 0 or 1")
        if self.rank_lower_bound < self.rank_deficit:
            raise FibrationError("unknown summand cannot lose more rank than it has")

    @property
    def effective_lower_bound(self) -> int:
        lb = self.rank_lower_bound
        if lb % 2 != self.rank_parity:
            lb += 1
        return lb - self.rank_deficit

    @property
    def parity(self) -> int:
        return (self.rank_parity + self.rank_deficit) % 2

    def drop_rank(self, k: int) -> H1Unknown:
        if self.effective_lower_bound < k:
            raise FibrationError("unknown summand may not have enough free rank")
        return replace(self, rank_deficit=self.rank_deficit + k)


@dataclass(frozen=True)
class DeclaredInvariants:
    euler: int | None
    signature: int | None
    h1: AbelianGroup | None
    fiber_primitive: bool = False
    nontorsion_fiber_curve_exists: bool = False
    torsion_fiber_curve_exists: bool = False
    source: str = ""
    critical_points: int | None = None
    fiber_h1_map: IntMatrix | None = None
    h1_unknown: H1Unknown | None = None
    companion: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        for name in ("fiber_primitive", "nontorsion_fiber_curve_exists", "torsion_fiber_curve_exists"):
            if not isinstance(getattr(self, name), bool):
                raise FibrationError(f"{name} must be a boolean, got {getattr(self, name)!r}")


@dataclass(frozen=True)
class Fibration:
    kind: Kind
    fiber_genus: int
    base_genus: int
    body: Union[MonodromyFactorization, DeclaredInvariants]
    sections: tuple[Section, ...] = ()
    asserted: Asserted = field(default_factory=Asserted)
    name: str = ""
    citation: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "sections", tuple(self.sections))
        g, h = self.fiber_genus, self.base_genus
        if g < 1:
            raise FibrationError(f"fiber genus must be >= 1, got {g}")
        if h < 0:
            raise FibrationError(f"base genus must be >= 0, got {h}")
        if self.is_explicit:
            body = self.body
            if (body.fiber_genus, body.base_genus) != (g, h):
                raise FibrationError("factorization genera differ from the fibration's")
            if self.kind is Kind.LEFSCHETZ and body.is_bundle:
                raise FibrationError(
                    "non-empty critical locus required: a Lefschetz fibration needs a vanishing cycle"
                )
            if self.kind is Kind.BUNDLE and not body.is_bundle:
                raise FibrationError("a bundle cannot have vanishing cycles")
            report = verify_homological_relation(body)
            if not report:
                raise FibrationError(f"invalid factorization: {report.message}")
        else:
            _check_declared(self)

    @property
    def is_explicit(self) -> bool:
        return isinstance(self.body, MonodromyFactorization)

    @property
    def critical_points(self) -> int | None:
        if self.is_explicit:
            return len(self.body.vanishing_cycles)
        if self.kind is Kind.BUNDLE:
            return 0
        return self.body.critical_points

    @property
    def separating_vanishing_cycles(self) -> int:
        if not self.is_explicit:
            raise FibrationError("separating count needs an explicit factorization")
        return sum(1 for c in self.body.vanishing_cycles if c.curve.separating)

    def zero_section(self) -> Section | None:
        return next((s for s in self.sections if s.self_intersection == 0), None)

    @property
    def fiber_primitive(self) -> bool:
        """A section meets the fiber once, which forces the fiber class to be primitive."""
        if self.sections or self.asserted.fiber_primitive_override:
            return True
        return (not self.is_explicit) and self.body.fiber_primitive


def _check_declared(f: Fibration) -> None:
    d: DeclaredInvariants = f.body
    g, h = f.fiber_genus, f.base_genus
    if f.kind is Kind.LEFSCHETZ and d.critical_points is not None and d.critical_points < 1:
        raise FibrationError(
            "non-empty critical locus required: declared critical point count must be >= 1"
        )
    if f.kind is Kind.BUNDLE and d.critical_points not in (None, 0):
        raise FibrationError("a bundle has no critical points")
    k = 0 if f.kind is Kind.BUNDLE else d.critical_points
    if d.euler is not None and k is not None:
        expected = 4 * (g - 1) * (h - 1) + k
        if d.euler != expected:
            raise FibrationError(
                f"declared euler {d.euler} contradicts 4(g-1)(h-1)+k = {expected}"
            )
    if d.h1 is not None and d.euler is not None and d.h1_unknown is None:
        b2 = d.euler - 2 + 2 * d.h1.rank
        if b2 < 0:
            raise FibrationError(f"declared invariants give b2 = {b2} < 0")
    if d.h1 is not None and d.h1_unknown is None:
        if d.h1.rank < 2 * h:
            raise FibrationError("H_1 must contain the base summand Z^{2h}")
        image_gens = d.h1.rank - 2 * h + len(d.h1.torsion)
        if image_gens > 2 * g:
            raise FibrationError(
                f"fiber image needs {image_gens} generators but H_1(fiber) has rank {2 * g}"
            )
        if d.nontorsion_fiber_curve_exists and d.h1.rank <= 2 * h:
            raise FibrationError("a non-torsion fiber curve needs b1 > 2h")
    if d.fiber_h1_map is not None and d.h1 is not None:
        rows = len(d.h1.torsion) + d.h1.rank
        if d.fiber_h1_map.shape != (rows, 2 * g):
            raise FibrationError(
                f"fiber_h1_map has shape {d.fiber_h1_map.shape}, expected {(rows, 2 * g)}"
            )
        if d.h1_unknown is None:
            declared_fiber_cokernel(f)


# ---------------------------------------------------------------------------
# Euler characteristic
# ---------------------------------------------------------------------------


def euler_formula(g: int, h: int, k: int) -> int:
    return 4 * (g - 1) * (h - 1) + k


def euler_characteristic(f: Fibration) -> int:
    if f.is_explicit:
        return euler_formula(f.fiber_genus, f.base_genus, f.critical_points)
    d = f.body
    if d.euler is None:
        if f.critical_points is not None:
            return euler_formula(f.fiber_genus, f.base_genus, f.critical_points)
        raise IncompleteData(f"{f.name or 'fibration'}: euler characteristic not declared")
    return d.euler


# ---------------------------------------------------------------------------
# First homology
# ---------------------------------------------------------------------------


def relation_matrix(fac: MonodromyFactorization) -> IntMatrix:
    """Columns generate the kernel of H_1(fiber) -> H_1(total space)."""
    n = 2 * fac.fiber_genus
    cols: list[tuple[int, ...]] = []
    ident = IntMatrix.identity(n)
    for a, b in fac.handle_matrices():
        for m in (a, b):
            if not m.is_identity():
                cols += (m.matrix - ident).columns()
    cols += [c.curve.klass for c in fac.vanishing_cycles if not c.curve.separating]
    cols += list(fac.extra_relators)
    cols = [c for c in cols if any(c)]
    return IntMatrix.from_columns(cols, n)


@lru_cache(maxsize=4096)
def _fiber_cokernel_cached(fac: MonodromyFactorization) -> Cokernel:
    return cokernel(relation_matrix(fac))


def fiber_cokernel(f: Fibration) -> Cokernel:
    """Image of H_1(fiber) in H_1(total space), with coordinates."""
    if f.is_explicit:
        return _fiber_cokernel_cached(f.body)
    return declared_fiber_cokernel(f)


def model_basis_order(g: int) -> list[int]:
    """Fiber basis indices in the order a_1..a_g, b_1..b_g (pairwise disjoint first)."""
    return [2 * i for i in range(g)] + [2 * i + 1 for i in range(g)]


def declared_fiber_cokernel(f: Fibration) -> Cokernel:
    """Fiber image for an opaque record.

    Uses the declared map when present; its last 2h free rows are the base
    coordinates and are dropped.  Otherwise the image is the kernel of
    H_1 -> H_1(base), i.e. ``Z^(b1-2h) + torsion``, and we take a standard
    surjection from Z^2g onto it, sending a_1, a_2, ... to the free
    generators first.  Invariants of sums with blocks whose curves are
    selected through this map do not depend on that choice.
    """
    d: DeclaredInvariants = f.body
    g, h = f.fiber_genus, f.base_genus
    if d.h1 is None or d.h1_unknown is not None:
        raise IncompleteData(f"{f.name or 'fibration'}: H_1 is not fully declared")
    t = d.h1.torsion
    n = 2 * g
    free_fiber = d.h1.rank - 2 * h
    group = AbelianGroup(free_fiber, t)
    if d.fiber_h1_map is not None:
        coords = d.fiber_h1_map.submatrix(range(len(t) + free_fiber), range(n))
    else:
        order = model_basis_order(g)
        rows = []
        for i in range(len(t)):
            rows.append([int(j == order[free_fiber + i]) for j in range(n)])
        for i in range(free_fiber):
            rows.append([int(j == order[i]) for j in range(n)])
        coords = IntMatrix.from_rows(rows, n)
    return Cokernel(group, coords, _lift_for(coords, group))


def _lift_for(coords: IntMatrix, group: AbelianGroup) -> IntMatrix:
    """Preimages in Z^2g of the coordinate generators."""
    n = coords.cols
    k = len(group.torsion)
    moduli = IntMatrix.from_columns(
        [tuple(group.torsion[i] if r == i else 0 for r in range(coords.rows)) for i in range(k)],
        coords.rows,
    )
    system = coords.hstack(moduli)
    cols = []
    for i in range(coords.rows):
        target = tuple(int(r == i) for r in range(coords.rows))
        sol = solve_integer(system, target)
        if sol is None:
            raise FibrationError("declared fiber_h1_map does not surject onto the fiber image")
        cols.append(sol[:n])
    return IntMatrix.from_columns(cols, n)


def h1_total_space(f: Fibration) -> tuple[AbelianGroup, IntMatrix]:
    """H_1 = Z^{2h} + coker(relations), with the fiber inclusion map.

    The map's rows are coordinates of H_1: torsion generators (reduced
    modulo their order), free fiber generators, then the 2h base generators.
    """
    if not f.is_explicit:
        d = f.body
        if d.h1 is None or d.h1_unknown is not None:
            raise IncompleteData(f"{f.name or 'fibration'}: H_1 is not fully declared")
        ck = declared_fiber_cokernel(f)
    else:
        ck = fiber_cokernel(f)
    h = f.base_genus
    group = AbelianGroup(ck.group.rank + 2 * h, ck.group.torsion)
    rows = []
    for i in range(ck.coords.rows):
        r = ck.coords.row(i)
        if i < ck.n_torsion:
            r = tuple(x % ck.group.torsion[i] for x in r)
        rows.append(r)
    rows += [(0,) * (2 * f.fiber_genus)] * (2 * h)
    return group, IntMatrix.from_rows(rows, 2 * f.fiber_genus)


def betti_and_b2(f: Fibration) -> tuple[int, int]:
    rep = invariant_report(f)
    if rep.b1 is None:
        raise IncompleteData("b1 is only known up to parity")
    return rep.b1, rep.b2


# ---------------------------------------------------------------------------
# Signature
# ---------------------------------------------------------------------------


def meyer_tau(a: SpElement, b: SpElement) -> int:
    """Meyer's signature cocycle.

    Signature of the symmetrized form (x1+y1)^T J^{-1} (I-B) y2 on
    V = {(x, y) : (A^{-1} - I) x + (B - I) y = 0}.  J^{-1} rather than J
    because our positive twist b -> b - a is the inverse of Meyer's.
    """
    if a.genus != b.genus:
        raise FibrationError("meyer_tau needs elements of the same genus")
    if a.is_identity() or b.is_identity():
        return 0
    n = 2 * a.genus
    ident = IntMatrix.identity(n)
    m = (a.inverse().matrix - ident).hstack(b.matrix - ident)
    ker = integer_kernel(m)
    if not ker:
        return 0
    # J^{-1} = -J
    form = (-intersection_form(a.genus)) @ (ident - b.matrix)
    fy = [form.apply(v[n:]) for v in ker]
    s = [tuple(p + q for p, q in zip(v[:n], v[n:])) for v in ker]
    k = len(ker)
    gram = [[sum(x * y for x, y in zip(s[i], fy[j])) for j in range(k)] for i in range(k)]
    sym = [[gram[i][j] + gram[j][i] for j in range(k)] for i in range(k)]
    return symmetric_signature(sym)


def meyer_sum(mats: list[SpElement]) -> int:
    """sum_k tau(C_1...C_k, C_{k+1}) over a word."""
    if not mats:
        return 0
    total = 0
    prefix = mats[0]
    for c in mats[1:]:
        total += meyer_tau(prefix, c)
        prefix = prefix @ c
    return total


def signature(f: Fibration) -> int:
    if not f.is_explicit:
        if f.body.signature is None:
            raise IncompleteData(f"{f.name or 'fibration'}: signature not declared")
        return f.body.signature
    return _explicit_signature(f.body)


@lru_cache(maxsize=4096)
def _explicit_signature(fac: MonodromyFactorization) -> int:
    word = relation_word(fac)
    mats = [letter_matrix(l) for l in word]
    separating = sum(1 for c in fac.vanishing_cycles if c.curve.separating)
    return -meyer_sum(mats) - separating


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


class Minimality(str, Enum):
    BUNDLE_RULE = "bundle-rule"
    RELMIN_RULE = "relative-minimality-rule"
    DECLARED = "declared"
    NONE = "none"


def minimality_basis(f: Fibration) -> Minimality:
    g, h = f.fiber_genus, f.base_genus
    if f.kind is Kind.BUNDLE and g >= 2 and h >= 2:
        return Minimality.BUNDLE_RULE
    if f.kind is Kind.LEFSCHETZ and f.asserted.relatively_minimal and g >= 2 and h >= 1:
        return Minimality.RELMIN_RULE
    if f.asserted.minimal:
        return Minimality.DECLARED
    return Minimality.NONE


@dataclass(frozen=True)
class InvariantReport:
    euler: int
    signature: int | None
    h1: AbelianGroup | None
    b1: int | None
    b2: int | None
    fiber_h1_map: IntMatrix | None
    minimality_basis: Minimality
    b1_parity: int
    b1_lower_bound: int
    h1_unknown: H1Unknown | None = None

    @property
    def b2_lower_bound(self) -> int:
        return self.euler - 2 + 2 * self.b1_lower_bound


def invariant_report(f: Fibration) -> InvariantReport:
    e = euler_characteristic(f)
    try:
        sig = signature(f)
    except IncompleteData:
        sig = None
    unknown = None if f.is_explicit else f.body.h1_unknown
    if f.is_explicit or unknown is None:
        if not f.is_explicit and f.body.h1 is None:
            raise IncompleteData(f"{f.name or 'fibration'}: H_1 not declared")
        h1, fmap = h1_total_space(f)
        b1 = h1.rank
        b2 = e - 2 + 2 * b1
        if b2 < 0:
            raise FibrationError(f"b2 = {b2} < 0")
        return InvariantReport(e, sig, h1, b1, b2, fmap, minimality_basis(f), b1 % 2, b1)
    known = f.body.h1
    parity = (unknown.parity + known.rank) % 2
    lb = unknown.effective_lower_bound + known.rank
    return InvariantReport(
        e, sig, known, None, None, None, minimality_basis(f), parity, lb, unknown
    )
