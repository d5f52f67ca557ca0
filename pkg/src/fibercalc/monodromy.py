"""Curves on a closed surface, their Dehn twists acting on H_1, and monodromy words.

Basis of H_1(Sigma_g) is a_1, b_1, ..., a_g, b_g with <a_i, b_i> = +1, so the
intersection form is block diagonal with blocks [[0, 1], [-1, 0]].  A Dehn twist
t_c acts by the transvection x -> x + <x, c> c.  Words multiply left to right:
``word_matrix([l1, l2])`` is ``M(l1) @ M(l2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .linalg import IntMatrix, LinalgError, block_diagonal, is_primitive_vector


class MonodromyError(ValueError):
    pass


def intersection_form(g: int) -> IntMatrix:
    n = 2 * g
    rows = [[0] * n for _ in range(n)]
    for i in range(g):
        rows[2 * i][2 * i + 1] = 1
        rows[2 * i + 1][2 * i] = -1
    return IntMatrix.from_rows(rows, n)


def pairing(x: Sequence[int], y: Sequence[int]) -> int:
    """Algebraic intersection number <x, y> = x^T J y."""
    if len(x) != len(y) or len(x) % 2:
        raise MonodromyError("pairing needs two vectors of the same even length")
    return sum(x[2 * i] * y[2 * i + 1] - x[2 * i + 1] * y[2 * i] for i in range(len(x) // 2))


@dataclass(frozen=True)
class CurveClass:
    """A simple closed curve on Sigma_g, remembered only through its homology class."""

    genus: int
    klass: tuple[int, ...]
    separating: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "klass", tuple(int(x) for x in self.klass))
        if self.genus < 1:
            raise MonodromyError(f"fiber genus must be >= 1, got {self.genus}")
        if len(self.klass) != 2 * self.genus:
            raise MonodromyError(
                f"class has length {len(self.klass)}, expected {2 * self.genus}"
            )
        zero = not any(self.klass)
        if self.separating != zero:
            raise MonodromyError("a curve is separating exactly when its class is zero")
        if not zero and not is_primitive_vector(self.klass):
            raise MonodromyError(f"non-separating class {list(self.klass)} is not primitive")

    @classmethod
    def standard(cls, genus: int, name: str) -> CurveClass:
        """``standard(g, "a2")`` is the basis curve a_2 on Sigma_g."""
        kind, idx = name[0], int(name[1:])
        if kind not in "ab" or not 1 <= idx <= genus:
            raise MonodromyError(f"no standard curve {name!r} on a genus {genus} surface")
        v = [0] * (2 * genus)
        v[2 * (idx - 1) + (kind == "b")] = 1
        return cls(genus, tuple(v))

    @classmethod
    def separating_curve(cls, genus: int) -> CurveClass:
        return cls(genus, (0,) * (2 * genus), True)

    def padded(self, offset: int, total_genus: int) -> CurveClass:
        """The same curve viewed on a larger surface, sitting in handles offset+1..offset+g."""
        v = (0,) * (2 * offset) + self.klass
        v += (0,) * (2 * total_genus - len(v))
        return CurveClass(total_genus, v, self.separating)


@dataclass(frozen=True)
class Letter:
    """The twist t_curve^power."""

    curve: CurveClass
    power: int = 1

    @property
    def genus(self) -> int:
        return self.curve.genus

    def inverse(self) -> Letter:
        return Letter(self.curve, -self.power)


@dataclass(frozen=True)
class SpElement:
    genus: int
    matrix: IntMatrix

    def __post_init__(self) -> None:
        if self.matrix.shape != (2 * self.genus, 2 * self.genus):
            raise MonodromyError("matrix shape does not match the genus")

    @classmethod
    def identity(cls, g: int) -> SpElement:
        return cls(g, IntMatrix.identity(2 * g))

    def __matmul__(self, other: SpElement) -> SpElement:
        if self.genus != other.genus:
            raise MonodromyError(f"genus mismatch: {self.genus} vs {other.genus}")
        return SpElement(self.genus, self.matrix @ other.matrix)

    def inverse(self) -> SpElement:
        # M^{-1} = -J M^T J for symplectic M, written out entrywise
        n = 2 * self.genus
        m = self.matrix.entries
        sign = [1 if r % 2 == 0 else -1 for r in range(n)]
        partner = [r + 1 if r % 2 == 0 else r - 1 for r in range(n)]
        rows = tuple(
            tuple(sign[r] * sign[s] * m[partner[s]][partner[r]] for s in range(n))
            for r in range(n)
        )
        return SpElement(self.genus, IntMatrix(n, n, rows))

    def is_identity(self) -> bool:
        return self.matrix.is_identity()

    def is_symplectic(self) -> bool:
        j = intersection_form(self.genus)
        return self.matrix.T @ j @ self.matrix == j

    def apply(self, v: Sequence[int]) -> tuple[int, ...]:
        return self.matrix.apply(v)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SpElement) and self.genus == other.genus and self.matrix == other.matrix

    def __hash__(self) -> int:
        return hash((self.genus, self.matrix))


def transvection_matrix(c: CurveClass, power: int = 1) -> SpElement:
    g = c.genus
    n = 2 * g
    if c.separating or power == 0:
        return SpElement.identity(g)
    v = c.klass
    # <x, c> = w . x
    w = [0] * n
    for i in range(g):
        w[2 * i] = v[2 * i + 1]
        w[2 * i + 1] = -v[2 * i]
    rows = [[int(r == s) + power * v[r] * w[s] for s in range(n)] for r in range(n)]
    return SpElement(g, IntMatrix.from_rows(rows, n))


def letter_matrix(letter: Letter) -> SpElement:
    return transvection_matrix(letter.curve, letter.power)


def word_matrix(word: Iterable[Letter], g: int) -> SpElement:
    out = SpElement.identity(g)
    for i, letter in enumerate(word):
        if letter.genus != g:
            raise MonodromyError(f"letter {i} lives on genus {letter.genus}, expected {g}")
        if letter.curve.separating or letter.power == 0:
            continue
        out = out @ letter_matrix(letter)
    return out


def commutator(a: SpElement, b: SpElement) -> SpElement:
    if a.is_identity() or b.is_identity():
        return SpElement.identity(a.genus)
    return a @ b @ a.inverse() @ b.inverse()


def embed_block_diagonal(a: SpElement, b: SpElement) -> SpElement:
    return SpElement(a.genus + b.genus, block_diagonal(a.matrix, b.matrix))


def conjugate_curve(phi: SpElement, c: CurveClass) -> CurveClass:
    """The class phi(c); phi t_c phi^{-1} = t_{phi(c)} on homology."""
    if phi.genus != c.genus:
        raise MonodromyError("twist and curve live on different genera")
    if c.separating:
        return c
    return CurveClass(c.genus, phi.apply(c.klass))


# ---------------------------------------------------------------------------
# Factorizations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Handle:
    alpha: tuple[Letter, ...] = ()
    beta: tuple[Letter, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", tuple(self.alpha))
        object.__setattr__(self, "beta", tuple(self.beta))

    @property
    def letters(self) -> tuple[Letter, ...]:
        return self.alpha + self.beta

    def is_trivial(self) -> bool:
        return not self.alpha and not self.beta


@dataclass(frozen=True)
class MonodromyFactorization:
    """Homological monodromy of a fibration over Sigma_h.

    The defining relation is t_{c_k} ... t_{c_1} = prod_i [alpha_i, beta_i]
    (functional order, so c_1 acts first); for a bundle both sides are trivial.
    ``extra_relators`` are additional fiber classes killed in H_1, for bundles
    whose surface relation lifts non-trivially.
    """

    fiber_genus: int
    base_genus: int
    handles: tuple[Handle, ...]
    vanishing_cycles: tuple[Letter, ...] = ()
    extra_relators: tuple[tuple[int, ...], ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "handles", tuple(self.handles))
        object.__setattr__(self, "vanishing_cycles", tuple(self.vanishing_cycles))
        object.__setattr__(
            self, "extra_relators", tuple(tuple(int(x) for x in r) for r in self.extra_relators)
        )
        g = self.fiber_genus
        if len(self.handles) != self.base_genus:
            raise MonodromyError(
                f"{len(self.handles)} handle pairs for base genus {self.base_genus}"
            )
        for i, h in enumerate(self.handles):
            for side in ("alpha", "beta"):
                for j, letter in enumerate(getattr(h, side)):
                    if letter.genus != g:
                        raise MonodromyError(
                            f"handle {i} {side} letter {j} has genus {letter.genus}, expected {g}"
                        )
        for k, letter in enumerate(self.vanishing_cycles):
            if letter.genus != g:
                raise MonodromyError(f"vanishing cycle {k} has genus {letter.genus}, expected {g}")
            if letter.power != 1:
                raise MonodromyError(f"vanishing cycle {k} has power {letter.power}, expected 1")
        for r in self.extra_relators:
            if len(r) != 2 * g:
                raise MonodromyError("extra relator has the wrong length")

    @property
    def is_bundle(self) -> bool:
        return not self.vanishing_cycles

    def handle_matrices(self) -> list[tuple[SpElement, SpElement]]:
        g = self.fiber_genus
        return [(word_matrix(h.alpha, g), word_matrix(h.beta, g)) for h in self.handles]

    def commutator_product(self) -> SpElement:
        out = SpElement.identity(self.fiber_genus)
        for a, b in self.handle_matrices():
            out = out @ commutator(a, b)
        return out

    def vanishing_product(self) -> SpElement:
        """rho(t_{c_k}) ... rho(t_{c_1})."""
        return word_matrix(reversed(self.vanishing_cycles), self.fiber_genus)

    def all_letters(self) -> Iterable[Letter]:
        for h in self.handles:
            yield from h.letters
        yield from self.vanishing_cycles

    def map_curves(self, fn) -> MonodromyFactorization:
        """Apply ``fn`` (CurveClass -> CurveClass) to every letter."""

        def conv(word):
            return tuple(Letter(fn(l.curve), l.power) for l in word)

        handles = tuple(Handle(conv(h.alpha), conv(h.beta)) for h in self.handles)
        probe = fn(CurveClass.separating_curve(self.fiber_genus))
        return MonodromyFactorization(
            probe.genus, self.base_genus, handles, conv(self.vanishing_cycles), ()
        )


@dataclass(frozen=True)
class ValidityReport:
    valid: bool
    relation: str
    message: str
    lhs: IntMatrix | None = None
    rhs: IntMatrix | None = None
    nontrivial_handles: tuple[int, ...] = ()

    def __bool__(self) -> bool:
        return self.valid


def verify_homological_relation(f: MonodromyFactorization) -> ValidityReport:
    """Check the monodromy relation in Sp(2g, Z).

    Passing is necessary, not sufficient: the Torelli group is invisible here.
    """
    mats = f.handle_matrices()
    comms = [commutator(a, b) for a, b in mats]
    nontrivial = tuple(i for i, c in enumerate(comms) if not c.is_identity())
    rhs = SpElement.identity(f.fiber_genus)
    for c in comms:
        rhs = rhs @ c
    if f.is_bundle:
        if rhs.is_identity():
            return ValidityReport(True, "bundle", "product of handle commutators is the identity")
        return ValidityReport(
            False,
            "bundle",
            "product of handle commutators is not the identity "
            f"(non-trivial commutators at handles {list(nontrivial)})",
            rhs.matrix,
            IntMatrix.identity(2 * f.fiber_genus),
            nontrivial,
        )
    lhs = f.vanishing_product()
    if lhs == rhs:
        return ValidityReport(True, "lefschetz", "product of twists equals product of commutators")
    return ValidityReport(
        False,
        "lefschetz",
        "product of vanishing-cycle twists differs from the product of handle commutators "
        f"(non-trivial commutators at handles {list(nontrivial)})",
        lhs.matrix,
        rhs.matrix,
        nontrivial,
    )


def relation_word(f: MonodromyFactorization) -> list[Letter]:
    """Letters whose left-to-right product is the identity.

    The relation t_{c_k}...t_{c_1} = prod [A_i, B_i] is rewritten as
    (prod [A_i, B_i])^{-1} t_{c_k} ... t_{c_1} = 1; the inverse of the
    commutator product is [B_h, A_h] ... [B_1, A_1].
    """
    out: list[Letter] = []
    for h in reversed(f.handles):
        out += list(h.beta)
        out += list(h.alpha)
        out += [l.inverse() for l in reversed(h.beta)]
        out += [l.inverse() for l in reversed(h.alpha)]
    out += list(reversed(f.vanishing_cycles))
    return out


__all__ = [
    "CurveClass",
    "Handle",
    "Letter",
    "LinalgError",
    "MonodromyError",
    "MonodromyFactorization",
    "SpElement",
    "ValidityReport",
    "commutator",
    "conjugate_curve",
    "embed_block_diagonal",
    "intersection_form",
    "letter_matrix",
    "pairing",
    "relation_word",
    "transvection_matrix",
    "verify_homological_relation",
    "word_matrix",
]
