"""Built-in seeds and an on-disk catalog of fibrations.

Layout of a catalog directory::

    index.json          {"entries": {id: {"file": ..., "provenance": ...}}}
    entries/<id>.json   {"id", "provenance", "fibration", "report"}

Entry files are renamed into place before the index is rewritten, so the
index never points at a partially written file.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .construct import BlockSpec, build_block
from .invariants import (
    Asserted,
    DeclaredInvariants,
    Fibration,
    FibrationError,
    H1Unknown,
    IncompleteData,
    Kind,
    Section,
    invariant_report,
)
from .linalg import AbelianGroup
from .monodromy import CurveClass, Letter, MonodromyFactorization
from .serialize import dumps, fibration_from_dict, fibration_to_dict, report_to_dict


class CatalogError(FibrationError):
    pass


class DuplicateEntry(CatalogError):
    pass


class UnknownEntry(CatalogError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown entry"


ID_PATTERN = re.compile(r"^[a-z0-9][a-z0-9._-]*$", re.IGNORECASE)


# ---------------------------------------------------------------------------
# Built-in entries
# ---------------------------------------------------------------------------


def elliptic(n: int) -> Fibration:
    """E(n): 12n twists alternating along a_1 and b_1 on the torus."""
    if n < 1:
        raise CatalogError("E(n) needs n >= 1")
    a = CurveClass.standard(1, "a1")
    b = CurveClass.standard(1, "b1")
    word = tuple([Letter(a), Letter(b)] * (6 * n))
    return Fibration(
        Kind.LEFSCHETZ,
        1,
        0,
        MonodromyFactorization(1, 0, (), word),
        sections=(Section(-n, True),),
        asserted=Asserted(relatively_minimal=True, mcg_valid=True),
        name=f"E({n})",
        citation="elliptic surface, (t_a t_b)^{6n} = 1",
    )


def korkmaz_y(g: int) -> Fibration:
    """Relatively minimal genus-g Lefschetz fibration Y(g) over the sphere."""
    if g < 2:
        raise CatalogError("korkmaz-Y{g} needs g >= 2")
    if g % 2 == 0:
        h1, sig, k = AbelianGroup(g), -4, 2 * g + 4
    else:
        h1, sig, k = AbelianGroup(g - 1), -8, 2 * g + 10
    body = DeclaredInvariants(
        euler=4 * (g - 1) * (0 - 1) + k,
        signature=sig,
        h1=h1,
        fiber_primitive=True,
        nontorsion_fiber_curve_exists=True,
        torsion_fiber_curve_exists=True,
        source="Korkmaz, generalized Matsumoto fibrations (twisted fiber sum)",
        critical_points=k,
    )
    return Fibration(
        Kind.LEFSCHETZ,
        g,
        0,
        body,
        asserted=Asserted(relatively_minimal=True, mcg_valid=True),
        name=f"korkmaz-Y{g}",
        citation="M. Korkmaz, Noncomplex smooth 4-manifolds with Lefschetz fibrations",
    )


def korkmaz_yn(g: int, n: int) -> Fibration:
    """Template for Y_n(g); euler and signature must be supplied by the user."""
    if g < 2 or n < 1:
        raise CatalogError("korkmaz-Yn{g}-{n} needs g >= 2 and n >= 1")
    body = DeclaredInvariants(
        euler=None,
        signature=None,
        h1=AbelianGroup.from_summands(1, [n] if n > 1 else []),
        fiber_primitive=True,
        nontorsion_fiber_curve_exists=True,
        torsion_fiber_curve_exists=True,
        source="Korkmaz: pi_1 = Z + Z_n (template; euler, signature required)",
        critical_points=None,
    )
    return Fibration(
        Kind.LEFSCHETZ,
        g,
        0,
        body,
        asserted=Asserted(relatively_minimal=True, mcg_valid=True),
        name=f"korkmaz-Yn{g}-{n}",
        citation="M. Korkmaz, Noncomplex smooth 4-manifolds with Lefschetz fibrations",
    )


def bryan_donagi_x(n: int, companion: bool = False) -> Fibration:
    """The Kodaira fibration X_n; ``companion`` selects the second fibration."""
    if n < 2:
        raise CatalogError("bryan-donagi-X{n} needs n >= 2")
    main = ((4 * n - 2) * n * n + 1, 2)
    other = (2 * n * n + 1, 2 * n)
    g, h = other if companion else main
    sig = 8 * (n**3 - n) // 3
    body = DeclaredInvariants(
        euler=4 * (g - 1) * (h - 1),
        signature=sig,
        h1=AbelianGroup(0),
        fiber_primitive=True,
        nontorsion_fiber_curve_exists=True,
        torsion_fiber_curve_exists=False,
        source="Bryan-Donagi Kodaira fibrations X_n",
        critical_points=0,
        h1_unknown=H1Unknown(f"bryan-donagi-X{n}", 0, 2 * n * n + 1),
        companion=main if companion else other,
    )
    suffix = "-companion" if companion else ""
    return Fibration(
        Kind.BUNDLE,
        g,
        h,
        body,
        asserted=Asserted(mcg_valid=True),
        name=f"bryan-donagi-X{n}{suffix}",
        citation="J. Bryan, R. Donagi, Surface bundles over surfaces of small genus",
    )


def ekkos_genus3(h: int, signature: int | None = None) -> Fibration:
    """Template: genus-3 bundle over Sigma_h with a zero section."""
    if h < 9:
        raise CatalogError("ekkos-genus3-h{h} needs h >= 9")
    body = DeclaredInvariants(
        euler=8 * (h - 1),
        signature=signature,
        h1=AbelianGroup(2 * h),
        fiber_primitive=True,
        nontorsion_fiber_curve_exists=False,
        torsion_fiber_curve_exists=True,
        source="Endo-Korkmaz-Kotschick-Ozbagci-Stipsicz (template; signature required)",
        critical_points=0,
    )
    return Fibration(
        Kind.BUNDLE,
        3,
        h,
        body,
        sections=(Section(0, True),),
        asserted=Asserted(mcg_valid=True),
        name=f"ekkos-genus3-h{h}",
        citation="H. Endo et al., Commutators, Lefschetz fibrations and the signatures of surface bundles",
    )


_PATTERNS: list[tuple[re.Pattern, object]] = [
    (re.compile(r"^P-(\d+)-(\d+)$"), lambda g, h: build_block(BlockSpec("P", int(g), int(h)))),
    (
        re.compile(r"^([QR])(\d+)-(\d+)-(\d+)$"),
        lambda fam, m, g, h: build_block(BlockSpec(fam, int(g), int(h), int(m))),
    ),
    (re.compile(r"^E(\d+)$"), lambda n: elliptic(int(n))),
    (re.compile(r"^korkmaz-Y(\d+)$"), lambda g: korkmaz_y(int(g))),
    (re.compile(r"^korkmaz-Yn(\d+)-(\d+)$"), lambda g, n: korkmaz_yn(int(g), int(n))),
    (re.compile(r"^bryan-donagi-X(\d+)$"), lambda n: bryan_donagi_x(int(n))),
    (re.compile(r"^bryan-donagi-X(\d+)-companion$"), lambda n: bryan_donagi_x(int(n), True)),
    (re.compile(r"^ekkos-genus3-h(\d+)$"), lambda h: ekkos_genus3(int(h))),
]

LISTED_BUILTINS = (
    ["P-2-2", "P-3-9", "Q2-2-2", "Q3-2-2", "Q5-3-9", "R2-2-1", "R2-2-2", "E1", "E2", "E3"]
    + [f"korkmaz-Y{g}" for g in range(2, 6)]
    + [f"korkmaz-Yn{g}-{n}" for g in (2, 3) for n in (2, 3)]
    + ["bryan-donagi-X2", "bryan-donagi-X2-companion", "bryan-donagi-X3"]
    + ["ekkos-genus3-h9"]
)


def builtin(entry_id: str) -> Fibration | None:
    for pattern, make in _PATTERNS:
        m = pattern.match(entry_id)
        if m:
            try:
                return make(*m.groups())
            except FibrationError as exc:
                raise CatalogError(f"{entry_id}: {exc}") from None
    return None


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    fibration: Fibration
    report: dict | None = None
    provenance: str = "user"
    mismatch: str | None = None


def _cached_report(f: Fibration) -> dict | None:
    try:
        return report_to_dict(invariant_report(f))
    except IncompleteData:
        return None


def default_catalog_dir() -> Path:
    return Path(os.environ.get("FIBERCALC_CATALOG", "catalog"))


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_index(directory: Path) -> dict:
    p = directory / "index.json"
    if not p.exists():
        return {"entries": {}}
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CatalogError(f"corrupt catalog index {p}: {exc}") from None


def catalog_store(entry: CatalogEntry, directory: Path | str | None = None) -> Path:
    directory = Path(directory) if directory is not None else default_catalog_dir()
    if not ID_PATTERN.match(entry.id):
        raise CatalogError(f"invalid catalog id {entry.id!r}")
    index = _read_index(directory)
    if entry.id in index["entries"] or builtin(entry.id) is not None:
        raise DuplicateEntry(f"catalog id {entry.id!r} already exists")
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CatalogError(f"catalog directory {directory} is not writable: {exc}") from None
    report = entry.report if entry.report is not None else _cached_report(entry.fibration)
    rel = f"entries/{entry.id}.json"
    doc = {
        "id": entry.id,
        "provenance": entry.provenance,
        "fibration": fibration_to_dict(entry.fibration),
        "report": report,
    }
    try:
        _atomic_write(directory / rel, dumps(doc))
        index["entries"][entry.id] = {"file": rel, "provenance": entry.provenance}
        _atomic_write(directory / "index.json", dumps(index))
    except PermissionError as exc:
        raise CatalogError(f"catalog directory {directory} is not writable: {exc}") from None
    return directory / rel


def catalog_load(entry_id: str, directory: Path | str | None = None) -> CatalogEntry:
    directory = Path(directory) if directory is not None else default_catalog_dir()
    index = _read_index(directory)
    info = index["entries"].get(entry_id)
    if info is None:
        f = builtin(entry_id)
        if f is None:
            raise UnknownEntry(f"no catalog entry {entry_id!r}")
        return CatalogEntry(entry_id, f, _cached_report(f), "built-in")
    doc = json.loads((directory / info["file"]).read_text(encoding="utf-8"))
    f = fibration_from_dict(doc["fibration"])
    fresh = _cached_report(f)
    mismatch = None
    if doc.get("report") != fresh:
        mismatch = "cached report differs from recomputation; using recomputed values"
    return CatalogEntry(entry_id, f, fresh, doc.get("provenance", "user"), mismatch)


def catalog_list(directory: Path | str | None = None) -> list[tuple[str, str]]:
    directory = Path(directory) if directory is not None else default_catalog_dir()
    out = [(i, "built-in") for i in LISTED_BUILTINS]
    index = _read_index(directory)
    out += sorted((i, e.get("provenance", "user")) for i, e in index["entries"].items())
    return out
