"""Exact integer matrices, Smith normal form and finitely generated abelian groups.

Everything here works over Python ints, so nothing overflows or rounds.
Matrices are immutable; operations return new objects.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence


class LinalgError(ValueError):
    pass


@dataclass(frozen=True)
class IntMatrix:
    """Row-major integer matrix of shape ``rows x cols``."""

    rows: int
    cols: int
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.rows < 0 or self.cols < 0:
            raise LinalgError("negative matrix shape")
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise LinalgError(
                f"entry count does not match shape {self.rows}x{self.cols}"
            )

    # -- construction ------------------------------------------------------

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: int | None = None) -> IntMatrix:
        data = tuple(tuple(int(x) for x in r) for r in rows)
        if cols is None:
            cols = len(data[0]) if data else 0
        return cls(len(data), cols, data)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], rows: int) -> IntMatrix:
        """Matrix whose columns are the given vectors in ``Z^rows``."""
        for c in columns:
            if len(c) != rows:
                raise LinalgError(f"column of length {len(c)} in Z^{rows}")
        data = tuple(tuple(int(c[i]) for c in columns) for i in range(rows))
        return cls(rows, len(columns), data)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> IntMatrix:
        return cls(rows, cols, tuple((0,) * cols for _ in range(rows)))

    @classmethod
    def identity(cls, n: int) -> IntMatrix:
        return cls(n, n, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    # -- access ------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.entries[i][j]

    def row(self, i: int) -> tuple[int, ...]:
        return self.entries[i]

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(r[j] for r in self.entries)

    def columns(self) -> list[tuple[int, ...]]:
        return [self.column(j) for j in range(self.cols)]

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.entries]

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.entries for x in r)

    def is_identity(self) -> bool:
        return self.rows == self.cols and all(
            x == (i == j) for i, r in enumerate(self.entries) for j, x in enumerate(r)
        )

    # -- arithmetic --------------------------------------------------------

    def __matmul__(self, other: IntMatrix) -> IntMatrix:
        if self.cols != other.rows:
            raise LinalgError(f"cannot multiply {self.shape} by {other.shape}")
        # row-by-row accumulation skips zero entries; our matrices are sparse
        n = other.cols
        orows = other.entries
        data = []
        for r in self.entries:
            acc = [0] * n
            for k, a in enumerate(r):
                if a:
                    ok = orows[k]
                    for j in range(n):
                        if ok[j]:
                            acc[j] += a * ok[j]
            data.append(tuple(acc))
        return IntMatrix(self.rows, n, tuple(data))

    def __add__(self, other: IntMatrix) -> IntMatrix:
        if self.shape != other.shape:
            raise LinalgError("shape mismatch in addition")
        return IntMatrix(
            self.rows,
            self.cols,
            tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.entries, other.entries)),
        )

    def __sub__(self, other: IntMatrix) -> IntMatrix:
        return self + other.scale(-1)

    def __neg__(self) -> IntMatrix:
        return self.scale(-1)

    def scale(self, k: int) -> IntMatrix:
        return IntMatrix(self.rows, self.cols, tuple(tuple(k * x for x in r) for r in self.entries))

    def apply(self, v: Sequence[int]) -> tuple[int, ...]:
        if len(v) != self.cols:
            raise LinalgError("vector length does not match matrix")
        return tuple(sum(a * b for a, b in zip(r, v)) for r in self.entries)

    def transpose(self) -> IntMatrix:
        return IntMatrix(self.cols, self.rows, tuple(zip(*self.entries)) if self.rows else tuple(() for _ in range(self.cols)))

    @property
    def T(self) -> IntMatrix:
        return self.transpose()

    def hstack(self, other: IntMatrix) -> IntMatrix:
        if self.rows != other.rows:
            raise LinalgError("row count mismatch in hstack")
        return IntMatrix(
            self.rows, self.cols + other.cols,
            tuple(r + s for r, s in zip(self.entries, other.entries)),
        )

    def vstack(self, other: IntMatrix) -> IntMatrix:
        if self.cols != other.cols:
            raise LinalgError("column count mismatch in vstack")
        return IntMatrix(self.rows + other.rows, self.cols, self.entries + other.entries)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> IntMatrix:
        return IntMatrix(
            len(rows), len(cols), tuple(tuple(self.entries[i][j] for j in cols) for i in rows)
        )

    def __pow__(self, n: int) -> IntMatrix:
        if self.rows != self.cols:
            raise LinalgError("power of a non-square matrix")
        if n < 0:
            return self.inverse() ** (-n)
        result = IntMatrix.identity(self.rows)
        base = self
        while n:
            if n & 1:
                result = result @ base
            base = base @ base
            n >>= 1
        return result

    def det(self) -> int:
        if self.rows != self.cols:
            raise LinalgError("determinant of a non-square matrix")
        return bareiss_det([list(r) for r in self.entries])

    def inverse(self) -> IntMatrix:
        """Inverse of a unimodular matrix (raises if the inverse is not integral)."""
        inv = rational_inverse(self)
        out = []
        for r in inv:
            row = []
            for x in r:
                if x.denominator != 1:
                    raise LinalgError("matrix is not invertible over the integers")
                row.append(x.numerator)
            out.append(tuple(row))
        return IntMatrix(self.rows, self.cols, tuple(out))

    def __repr__(self) -> str:
        return f"IntMatrix({self.tolist()!r})"


def block_diagonal(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    rows = [list(r) + [0] * b.cols for r in a.entries]
    rows += [[0] * a.cols + list(r) for r in b.entries]
    return IntMatrix(a.rows + b.rows, a.cols + b.cols, tuple(tuple(r) for r in rows))


def bareiss_det(m: list[list[int]]) -> int:
    """Fraction-free determinant. Mutates ``m``."""
    n = len(m)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        pk = m[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * pk - m[i][k] * m[k][j]) // prev
        prev = pk
    return sign * m[n - 1][n - 1]


def rational_inverse(a: IntMatrix) -> list[list[Fraction]]:
    n = a.rows
    if n != a.cols:
        raise LinalgError("inverse of a non-square matrix")
    aug = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(a.entries)]
    for c in range(n):
        p = next((r for r in range(c, n) if aug[r][c] != 0), None)
        if p is None:
            raise LinalgError("singular matrix")
        aug[c], aug[p] = aug[p], aug[c]
        pv = aug[c][c]
        aug[c] = [x / pv for x in aug[c]]
        for r in range(n):
            if r != c and aug[r][c] != 0:
                f = aug[r][c]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[c])]
    return [r[n:] for r in aug]


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------


def smith_normal_form(m: IntMatrix) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return ``(U, D, V)`` with ``U @ m @ V == D``.

    ``U`` and ``V`` are unimodular, ``D`` is diagonal with non-negative
    entries ``d_1 | d_2 | ...``. Pivots are the smallest nonzero absolute
    value in the active block, ties broken by lowest (row, column).
    """
    r, c = m.rows, m.cols
    a = [list(row) for row in m.entries]
    u = [[int(i == j) for j in range(r)] for i in range(r)]
    v = [[int(i == j) for j in range(c)] for i in range(c)]

    def swap_rows(i: int, j: int) -> None:
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i: int, j: int) -> None:
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(dst: int, src: int, k: int) -> None:
        # row_dst += k * row_src
        a[dst] = [x + k * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x + k * y for x, y in zip(u[dst], u[src])]

    def add_col(dst: int, src: int, k: int) -> None:
        for row in a:
            row[dst] += k * row[src]
        for row in v:
            row[dst] += k * row[src]

    for t in range(min(r, c)):
        while True:
            best = None
            for i in range(t, r):
                for j in range(t, c):
                    x = a[i][j]
                    if x and (best is None or abs(x) < best[0]):
                        best = (abs(x), i, j)
            if best is None:
                return _finish(a, u, v, r, c)
            _, pi, pj = best
            if pi != t:
                swap_rows(t, pi)
            if pj != t:
                swap_cols(t, pj)
            p = a[t][t]
            dirty = False
            for i in range(t + 1, r):
                if a[i][t]:
                    q = a[i][t] // p
                    add_row(i, t, -q)
                    dirty = dirty or a[i][t] != 0
            for j in range(t + 1, c):
                if a[t][j]:
                    q = a[t][j] // p
                    add_col(j, t, -q)
                    dirty = dirty or a[t][j] != 0
            if dirty:
                continue
            # row and column cleared; enforce divisibility on the rest
            bad = next(
                (i for i in range(t + 1, r) for j in range(t + 1, c) if a[i][j] % p),
                None,
            )
            if bad is None:
                break
            add_row(t, bad, 1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
    return _finish(a, u, v, r, c)


def _finish(a, u, v, r, c):
    return (
        IntMatrix(r, r, tuple(tuple(x) for x in u)),
        IntMatrix(r, c, tuple(tuple(x) for x in a)),
        IntMatrix(c, c, tuple(tuple(x) for x in v)),
    )


def diagonal(d: IntMatrix) -> list[int]:
    return [d[i, i] for i in range(min(d.rows, d.cols))]


def invariant_factors(m: IntMatrix) -> list[int]:
    """Nonzero diagonal of the Smith form."""
    return [x for x in diagonal(smith_normal_form(m)[1]) if x]


def rank(m: IntMatrix) -> int:
    return len(invariant_factors(m))


def solve_integer(m: IntMatrix, b: Sequence[int]) -> tuple[int, ...] | None:
    """Some ``x`` in Z^cols with ``m x = b``, or None if there is none."""
    u, d, v = smith_normal_form(m)
    y = u.apply(b)
    diag = diagonal(d)
    z = [0] * m.cols
    for i, yi in enumerate(y):
        di = diag[i] if i < len(diag) else 0
        if di == 0:
            if yi != 0:
                return None
        elif yi % di:
            return None
        else:
            z[i] = yi // di
    return v.apply(z)


def integer_kernel(m: IntMatrix) -> list[tuple[int, ...]]:
    """A basis of ``{x in Z^cols : m x = 0}``; the lattice is saturated."""
    _, d, v = smith_normal_form(m)
    k = sum(1 for x in diagonal(d) if x)
    return [v.column(j) for j in range(k, m.cols)]


# ---------------------------------------------------------------------------
# Abelian groups
# ---------------------------------------------------------------------------


def normalize_torsion(divisors: Iterable[int]) -> tuple[int, ...]:
    """Invariant-factor chain of ``sum Z_d``; drops trivial factors."""
    ds = [abs(int(d)) for d in divisors]
    if any(d == 0 for d in ds):
        raise LinalgError("torsion order 0 is not a finite cyclic group")
    ds = [d for d in ds if d != 1]
    if not ds:
        return ()
    # SNF of diag(ds) gives the chain.
    n = len(ds)
    diag = IntMatrix(n, n, tuple(tuple(ds[i] if i == j else 0 for j in range(n)) for i in range(n)))
    return tuple(x for x in invariant_factors(diag) if x != 1)


@dataclass(frozen=True)
class AbelianGroup:
    """``Z^rank + Z_{d_1} + ... + Z_{d_k}`` with ``d_i | d_{i+1}`` and ``d_i >= 2``."""

    rank: int
    torsion: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.rank < 0:
            raise LinalgError("negative rank")
        t = tuple(self.torsion)
        object.__setattr__(self, "torsion", t)
        if any(d < 2 for d in t):
            raise LinalgError(f"torsion entries must be >= 2, got {list(t)}")
        if any(t[i + 1] % t[i] for i in range(len(t) - 1)):
            raise LinalgError(f"torsion {list(t)} is not a divisor chain")

    @classmethod
    def from_summands(cls, rank: int, cyclic_orders: Iterable[int] = ()) -> AbelianGroup:
        return cls(rank, normalize_torsion(cyclic_orders))

    def direct_sum(self, other: AbelianGroup) -> AbelianGroup:
        return AbelianGroup.from_summands(self.rank + other.rank, self.torsion + other.torsion)

    __add__ = direct_sum

    @property
    def torsion_order(self) -> int:
        out = 1
        for d in self.torsion:
            out *= d
        return out

    @property
    def exponent(self) -> int:
        return self.torsion[-1] if self.torsion else 1

    def has_element_of_order(self, m: int) -> bool:
        return m >= 1 and self.exponent % m == 0

    def __str__(self) -> str:
        parts = []
        if self.rank:
            parts.append("Z" if self.rank == 1 else f"Z^{self.rank}")
        parts += [f"Z_{d}" for d in self.torsion]
        return " + ".join(parts) if parts else "0"


def abelian_group_equal(g: AbelianGroup, h: AbelianGroup) -> bool:
    return g.rank == h.rank and g.torsion == h.torsion


def cokernel_group(m: IntMatrix) -> AbelianGroup:
    """``Z^rows / (column span of m)``."""
    ds = invariant_factors(m)
    return AbelianGroup(m.rows - len(ds), tuple(d for d in ds if d != 1))


@dataclass(frozen=True)
class Cokernel:
    """A cokernel together with coordinates on it.

    ``coords`` maps ``Z^rows`` to coordinates: row ``i`` of ``coords`` is read
    modulo ``torsion[i]`` for the first ``len(torsion)`` rows, the remaining
    ``group.rank`` rows are free coordinates.
    """

    group: AbelianGroup
    coords: IntMatrix
    lift: IntMatrix  # columns: preimages in Z^rows of each coordinate generator

    @property
    def n_torsion(self) -> int:
        return len(self.group.torsion)

    def image(self, x: Sequence[int]) -> tuple[int, ...]:
        y = self.coords.apply(x)
        t = self.group.torsion
        return tuple(yi % t[i] if i < len(t) else yi for i, yi in enumerate(y))

    def free_part(self, x: Sequence[int]) -> tuple[int, ...]:
        return self.image(x)[self.n_torsion:]

    def is_torsion(self, x: Sequence[int]) -> bool:
        return not any(self.free_part(x))


def cokernel(m: IntMatrix) -> Cokernel:
    u, d, _ = smith_normal_form(m)
    diag = diagonal(d) + [0] * (m.rows - min(m.rows, m.cols))
    keep = [i for i, x in enumerate(diag) if x != 1]
    torsion_rows = [i for i in keep if diag[i] > 1]
    free_rows = [i for i in keep if diag[i] == 0]
    order = torsion_rows + free_rows
    coords = u.submatrix(order, range(m.rows))
    uinv = u.inverse()
    lift = uinv.submatrix(range(m.rows), order)
    group = AbelianGroup(len(free_rows), tuple(diag[i] for i in torsion_rows))
    return Cokernel(group, coords, lift)


def is_primitive_vector(v: Sequence[int]) -> bool:
    if not any(v):
        raise LinalgError("the zero vector has no primitivity")
    g = 0
    for x in v:
        g = gcd(g, int(x))
    return g == 1


def primitive_root(v: Sequence[int]) -> tuple[int, ...]:
    g = 0
    for x in v:
        g = gcd(g, int(x))
    if g == 0:
        raise LinalgError("the zero vector has no primitive root")
    return tuple(int(x) // g for x in v)


# ---------------------------------------------------------------------------
# Rational helpers
# ---------------------------------------------------------------------------


def symmetric_signature(rows: Sequence[Sequence[int | Fraction]]) -> int:
    """Signature of a symmetric matrix by congruence diagonalization over Q."""
    a = [[Fraction(x) for x in r] for r in rows]
    n = len(a)
    sig = 0
    k = 0
    while k < n:
        if a[k][k] == 0:
            j = next((j for j in range(k + 1, n) if a[j][j] != 0), None)
            if j is not None:
                a[k], a[j] = a[j], a[k]
                for r in a:
                    r[k], r[j] = r[j], r[k]
            else:
                j = next((j for j in range(k + 1, n) if a[k][j] != 0), None)
                if j is None:
                    k += 1
                    continue
                # e_k <- e_k + e_j makes the pivot 2 a_kj != 0
                for i in range(n):
                    a[k][i] += a[j][i]
                for i in range(n):
                    a[i][k] += a[i][j]
        p = a[k][k]
        sig += 1 if p > 0 else -1
        for i in range(k + 1, n):
            if a[i][k]:
                f = a[i][k] / p
                a[i] = [x - f * y for x, y in zip(a[i], a[k])]
        for i in range(k + 1, n):
            a[k][i] = Fraction(0)
            a[i][k] = Fraction(0)
        k += 1
    return sig
