"""JSON documents for fibrations and certificates.

Homology classes and matrix entries are written as decimal strings so that
no consumer silently rounds them; everything else uses plain JSON types.
Output is deterministic: keys are sorted and every field is always present.
"""

from __future__ import annotations

import json
from typing import Any

from .invariants import (
    Asserted,
    DeclaredInvariants,
    Fibration,
    FibrationError,
    H1Unknown,
    InvariantReport,
    Kind,
    Section,
)
from .linalg import AbelianGroup, IntMatrix, LinalgError
from .monodromy import CurveClass, Handle, Letter, MonodromyError, MonodromyFactorization


class SchemaError(FibrationError):
    """A document does not follow the fibration schema."""

    def __init__(self, path: str, message: str) -> None:
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


# ---------------------------------------------------------------------------
# Emit
# ---------------------------------------------------------------------------


def _letter_doc(letter: Letter) -> dict:
    return {
        "class": [str(x) for x in letter.curve.klass],
        "power": letter.power,
        "separating": letter.curve.separating,
    }


def _group_doc(group: AbelianGroup | None) -> dict | None:
    if group is None:
        return None
    return {"rank": group.rank, "torsion": list(group.torsion)}


def _matrix_doc(m: IntMatrix | None) -> list | None:
    if m is None:
        return None
    return [[str(x) for x in row] for row in m.tolist()]


def fibration_to_dict(f: Fibration) -> dict:
    doc: dict[str, Any] = {
        "kind": f.kind.value,
        "fiber_genus": f.fiber_genus,
        "base_genus": f.base_genus,
        "body": "explicit" if f.is_explicit else "opaque",
        "sections": [
            {"self_intersection": s.self_intersection, "splits_base": s.splits_base}
            for s in f.sections
        ],
        "asserted": {
            "relatively_minimal": f.asserted.relatively_minimal,
            "mcg_valid": f.asserted.mcg_valid,
            "disjoint_pairs": [list(p) for p in f.asserted.disjoint_pairs],
            "fiber_primitive_override": f.asserted.fiber_primitive_override,
            "minimal": f.asserted.minimal,
        },
        "meta": {"name": f.name, "citation": f.citation},
    }
    if f.is_explicit:
        fac: MonodromyFactorization = f.body
        doc["handles"] = [
            {"alpha": [_letter_doc(l) for l in h.alpha], "beta": [_letter_doc(l) for l in h.beta]}
            for h in fac.handles
        ]
        doc["vanishing_cycles"] = [_letter_doc(l) for l in fac.vanishing_cycles]
        doc["extra_relators"] = [[str(x) for x in r] for r in fac.extra_relators]
    else:
        d: DeclaredInvariants = f.body
        u = d.h1_unknown
        doc.update(
            {
                "euler": d.euler,
                "signature": d.signature,
                "h1": _group_doc(d.h1),
                "fiber_primitive": d.fiber_primitive,
                "nontorsion_fiber_curve_exists": d.nontorsion_fiber_curve_exists,
                "torsion_fiber_curve_exists": d.torsion_fiber_curve_exists,
                "source": d.source,
                "critical_points": d.critical_points,
                "fiber_h1_map": _matrix_doc(d.fiber_h1_map),
                "h1_unknown": None
                if u is None
                else {
                    "tag": u.tag,
                    "rank_parity": u.rank_parity,
                    "rank_lower_bound": u.rank_lower_bound,
                    "rank_deficit": u.rank_deficit,
                },
                "companion": None if d.companion is None else list(d.companion),
            }
        )
    return doc


def dumps(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def emit_fibration(f: Fibration) -> str:
    return dumps(fibration_to_dict(f))


def report_to_dict(rep: InvariantReport) -> dict:
    return {
        "euler": rep.euler,
        "signature": rep.signature,
        "h1": str(rep.h1) if rep.h1 is not None else None,
        "h1_group": _group_doc(rep.h1),
        "b1": rep.b1,
        "b2": rep.b2,
        "b1_parity": rep.b1_parity,
        "b1_lower_bound": rep.b1_lower_bound,
        "b2_lower_bound": rep.b2_lower_bound,
        "h1_unknown": None
        if rep.h1_unknown is None
        else {
            "tag": rep.h1_unknown.tag,
            "rank_parity": rep.h1_unknown.rank_parity,
            "rank_lower_bound": rep.h1_unknown.rank_lower_bound,
            "rank_deficit": rep.h1_unknown.rank_deficit,
        },
        "fiber_h1_map": _matrix_doc(rep.fiber_h1_map),
        "minimality_basis": rep.minimality_basis.value,
    }


# ---------------------------------------------------------------------------
# Parse
# ---------------------------------------------------------------------------


_MISSING = object()


def _get(doc: dict, key: str, path: str, default: Any = _MISSING) -> Any:
    if key in doc:
        return doc[key]
    if default is _MISSING:
        raise SchemaError(path, f"missing field {key!r}")
    return default


def _int(x: Any, path: str, *, nullable: bool = False) -> int | None:
    if x is None and nullable:
        return None
    if isinstance(x, bool) or not isinstance(x, int):
        raise SchemaError(path, f"expected an integer, got {x!r}")
    return x


def _bool(x: Any, path: str) -> bool:
    if not isinstance(x, bool):
        raise SchemaError(path, f"expected a boolean, got {x!r}")
    return x


def _str(x: Any, path: str) -> str:
    if not isinstance(x, str):
        raise SchemaError(path, f"expected a string, got {x!r}")
    return x


def _list(x: Any, path: str) -> list:
    if not isinstance(x, list):
        raise SchemaError(path, f"expected an array, got {type(x).__name__}")
    return x


def _dict(x: Any, path: str) -> dict:
    if not isinstance(x, dict):
        raise SchemaError(path, f"expected an object, got {type(x).__name__}")
    return x


def _decimal(x: Any, path: str) -> int:
    if not isinstance(x, str):
        raise SchemaError(path, f"expected a decimal string, got {x!r}")
    s = x[1:] if x[:1] in "+-" else x
    if not s.isdigit() or not s.isascii():
        raise SchemaError(path, f"{x!r} is not a decimal integer")
    return int(x)


def _int_vector(x: Any, path: str) -> tuple[int, ...]:
    return tuple(_decimal(v, f"{path}[{i}]") for i, v in enumerate(_list(x, path)))


def _parse_letter(doc: Any, g: int, path: str) -> Letter:
    doc = _dict(doc, path)
    klass = _int_vector(_get(doc, "class", path), f"{path}.class")
    power = _int(_get(doc, "power", path), f"{path}.power")
    sep = _bool(_get(doc, "separating", path, False), f"{path}.separating")
    if len(klass) != 2 * g:
        raise SchemaError(f"{path}.class", f"has length {len(klass)}, expected {2 * g}")
    if power == 0:
        raise SchemaError(f"{path}.power", "power must be non-zero")
    try:
        curve = CurveClass(g, klass, sep)
    except MonodromyError as exc:
        raise SchemaError(f"{path}.class", str(exc)) from None
    return Letter(curve, power)


def _parse_group(doc: Any, path: str) -> AbelianGroup:
    doc = _dict(doc, path)
    rank = _int(_get(doc, "rank", path), f"{path}.rank")
    torsion = [
        _int(t, f"{path}.torsion[{i}]")
        for i, t in enumerate(_list(_get(doc, "torsion", path, []), f"{path}.torsion"))
    ]
    try:
        return AbelianGroup.from_summands(rank, torsion)
    except LinalgError as exc:
        raise SchemaError(path, str(exc)) from None


def fibration_from_dict(doc: Any) -> Fibration:
    doc = _dict(doc, "")
    kind_s = _str(_get(doc, "kind", ""), "kind")
    if kind_s not in ("bundle", "lefschetz"):
        raise SchemaError("kind", f"expected 'bundle' or 'lefschetz', got {kind_s!r}")
    g = _int(_get(doc, "fiber_genus", ""), "fiber_genus")
    h = _int(_get(doc, "base_genus", ""), "base_genus")
    if g < 1:
        raise SchemaError("fiber_genus", f"must be >= 1, got {g}")
    if h < 0:
        raise SchemaError("base_genus", f"must be >= 0, got {h}")
    body_s = _str(_get(doc, "body", ""), "body")

    sections = []
    for i, s in enumerate(_list(_get(doc, "sections", "", []), "sections")):
        p = f"sections[{i}]"
        s = _dict(s, p)
        sections.append(
            Section(
                _int(_get(s, "self_intersection", p), f"{p}.self_intersection"),
                _bool(_get(s, "splits_base", p, True), f"{p}.splits_base"),
            )
        )
    a = _dict(_get(doc, "asserted", "", {}), "asserted")
    pairs = []
    for i, pr in enumerate(_list(a.get("disjoint_pairs", []), "asserted.disjoint_pairs")):
        p = f"asserted.disjoint_pairs[{i}]"
        pr = _list(pr, p)
        if len(pr) != 2:
            raise SchemaError(p, "expected a pair of letter indices")
        pairs.append((_int(pr[0], f"{p}[0]"), _int(pr[1], f"{p}[1]")))
    asserted = Asserted(
        relatively_minimal=_bool(a.get("relatively_minimal", False), "asserted.relatively_minimal"),
        mcg_valid=_bool(a.get("mcg_valid", False), "asserted.mcg_valid"),
        fiber_primitive_override=_bool(
            a.get("fiber_primitive_override", False), "asserted.fiber_primitive_override"
        ),
        minimal=_bool(a.get("minimal", False), "asserted.minimal"),
        disjoint_pairs=tuple(pairs),
    )
    meta = _dict(_get(doc, "meta", "", {}), "meta")
    name = _str(meta.get("name", ""), "meta.name")
    citation = _str(meta.get("citation", ""), "meta.citation")

    if body_s == "explicit":
        handles = []
        raw = _list(_get(doc, "handles", ""), "handles")
        if len(raw) != h:
            raise SchemaError("handles", f"{len(raw)} handle pairs for base genus {h}")
        for i, hd in enumerate(raw):
            p = f"handles[{i}]"
            hd = _dict(hd, p)
            alpha = tuple(
                _parse_letter(l, g, f"{p}.alpha[{j}]")
                for j, l in enumerate(_list(_get(hd, "alpha", p, []), f"{p}.alpha"))
            )
            beta = tuple(
                _parse_letter(l, g, f"{p}.beta[{j}]")
                for j, l in enumerate(_list(_get(hd, "beta", p, []), f"{p}.beta"))
            )
            handles.append(Handle(alpha, beta))
        vcs = []
        for k, l in enumerate(_list(_get(doc, "vanishing_cycles", "", []), "vanishing_cycles")):
            p = f"vanishing_cycles[{k}]"
            letter = _parse_letter(l, g, p)
            if letter.power != 1:
                raise SchemaError(f"{p}.power", "vanishing cycles must have power 1")
            vcs.append(letter)
        extra = []
        for k, r in enumerate(_list(_get(doc, "extra_relators", "", []), "extra_relators")):
            p = f"extra_relators[{k}]"
            v = _int_vector(r, p)
            if len(v) != 2 * g:
                raise SchemaError(p, f"has length {len(v)}, expected {2 * g}")
            extra.append(v)
        if kind_s == "lefschetz" and not vcs:
            raise SchemaError(
                "vanishing_cycles",
                "non-empty critical locus required: a Lefschetz fibration needs a vanishing cycle",
            )
        body: Any = MonodromyFactorization(g, h, tuple(handles), tuple(vcs), tuple(extra))
    elif body_s == "opaque":
        h1_raw = _get(doc, "h1", "")
        h1 = None if h1_raw is None else _parse_group(h1_raw, "h1")
        fmap = doc.get("fiber_h1_map")
        fmap_m = None
        if fmap is not None:
            rows = [_int_vector(r, f"fiber_h1_map[{i}]") for i, r in enumerate(_list(fmap, "fiber_h1_map"))]
            if any(len(r) != 2 * g for r in rows):
                raise SchemaError("fiber_h1_map", f"rows must have length {2 * g}")
            fmap_m = IntMatrix.from_rows(rows, 2 * g)
        u = doc.get("h1_unknown")
        unknown = None
        if u is not None:
            u = _dict(u, "h1_unknown")
            unknown = H1Unknown(
                _str(_get(u, "tag", "h1_unknown"), "h1_unknown.tag"),
                _int(_get(u, "rank_parity", "h1_unknown"), "h1_unknown.rank_parity"),
                _int(_get(u, "rank_lower_bound", "h1_unknown"), "h1_unknown.rank_lower_bound"),
                _int(u.get("rank_deficit", 0), "h1_unknown.rank_deficit"),
            )
        comp = doc.get("companion")
        if comp is not None:
            comp = _list(comp, "companion")
            if len(comp) != 2:
                raise SchemaError("companion", "expected [fiber_genus, base_genus]")
            comp = (_int(comp[0], "companion[0]"), _int(comp[1], "companion[1]"))
        body = DeclaredInvariants(
            euler=_int(_get(doc, "euler", ""), "euler", nullable=True),
            signature=_int(_get(doc, "signature", ""), "signature", nullable=True),
            h1=h1,
            fiber_primitive=_bool(doc.get("fiber_primitive", False), "fiber_primitive"),
            nontorsion_fiber_curve_exists=_bool(
                doc.get("nontorsion_fiber_curve_exists", False), "nontorsion_fiber_curve_exists"
            ),
            torsion_fiber_curve_exists=_bool(
                doc.get("torsion_fiber_curve_exists", False), "torsion_fiber_curve_exists"
            ),
            source=_str(doc.get("source", ""), "source"),
            critical_points=_int(doc.get("critical_points"), "critical_points", nullable=True),
            fiber_h1_map=fmap_m,
            h1_unknown=unknown,
            companion=comp,
        )
    else:
        raise SchemaError("body", f"expected 'explicit' or 'opaque', got {body_s!r}")
    return Fibration(Kind(kind_s), g, h, body, tuple(sections), asserted, name, citation)


def parse_fibration(text: str) -> Fibration:
    """Parse and validate a fibration document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(
            "", f"parse error at line {exc.lineno}, column {exc.colno} (offset {exc.pos}): {exc.msg}"
        ) from None
    return fibration_from_dict(doc)
