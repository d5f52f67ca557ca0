"""Non-complexity and homotopy-distinction certificates, and family generators.

Certificates carry the evidence values each premise was decided on, so a
granted certificate can be re-checked without redoing the computation.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .catalog import CatalogError, catalog_load
from .construct import (
    ConstructionError,
    StabilizationReport,
    horizontal_stabilize,
    vertical_stabilize,
)
from .invariants import (
    Fibration,
    FibrationError,
    IncompleteData,
    InvariantReport,
    Minimality,
    invariant_report,
)

NONCOMPLEX = "noncomplex-both-orientations"
DISTINCT = "homotopy-distinct"
FAMILY = "family"

RULE_KODAIRA = "Enriques-Kodaira classification: minimal complex surfaces with odd b1"
RULE_BUNDLE = "surface bundle with fiber and base genus >= 2 is minimal"
RULE_RELMIN = "relatively minimal Lefschetz fibration, g >= 2, h >= 1, is minimal"
RULE_H1 = "homotopy equivalent manifolds have isomorphic H_1"


class IncompleteSeed(FibrationError):
    pass


class ModeBoundError(FibrationError):
    pass


@dataclass(frozen=True)
class Premise:
    condition: str
    evidence: dict
    rule: str
    holds: bool

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "evidence": self.evidence,
            "rule": self.rule,
            "holds": self.holds,
        }


@dataclass(frozen=True)
class Certificate:
    kind: str
    subject: str
    premises: tuple[Premise, ...]
    conclusion: str
    status: str
    reason: str = ""

    @property
    def granted(self) -> bool:
        return self.status == "granted"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "subject": self.subject,
            "premises": [p.to_dict() for p in self.premises],
            "conclusion": self.conclusion,
            "status": self.status,
            "reason": self.reason,
        }


def _decide(kind: str, subject: str, premises: list[Premise], conclusion: str) -> Certificate:
    failing = next((p for p in premises if not p.holds), None)
    if failing is None:
        return Certificate(kind, subject, tuple(premises), conclusion, "granted")
    return Certificate(
        kind, subject, tuple(premises), conclusion, "refused", f"premise failed: {failing.condition}"
    )


# ---------------------------------------------------------------------------
# Non-complexity
# ---------------------------------------------------------------------------


def noncomplex_premises(f: Fibration, rep: InvariantReport) -> list[Premise]:
    basis = rep.minimality_basis
    rule = {
        Minimality.BUNDLE_RULE: RULE_BUNDLE,
        Minimality.RELMIN_RULE: RULE_RELMIN,
        Minimality.DECLARED: "declared minimal",
    }.get(basis, "no minimality rule applies")
    b2_known = rep.b2 if rep.b2 is not None else rep.b2_lower_bound
    return [
        Premise(
            "b1 odd",
            {"b1": rep.b1, "b1_parity": rep.b1_parity, "h1": str(rep.h1) if rep.h1 else None},
            RULE_KODAIRA,
            rep.b1_parity == 1,
        ),
        Premise(
            "minimal",
            {
                "basis": basis.value,
                "kind": f.kind.value,
                "fiber_genus": f.fiber_genus,
                "base_genus": f.base_genus,
                "relatively_minimal": f.asserted.relatively_minimal,
                "declared_minimal": f.asserted.minimal,
            },
            rule,
            basis is not Minimality.NONE,
        ),
        Premise(
            "b2 != 0",
            {"b2": rep.b2, "b2_lower_bound": rep.b2_lower_bound},
            "b2 = e - 2 + 2 b1",
            b2_known > 0,
        ),
        Premise(
            "e != 0 or sigma != 0",
            {"euler": rep.euler, "signature": rep.signature},
            RULE_KODAIRA,
            rep.euler != 0 or (rep.signature is not None and rep.signature != 0),
        ),
    ]


def certify_noncomplex(f: Fibration) -> Certificate:
    """Neither X nor its reverse admits a complex structure, if all premises hold."""
    subject = f.name or "fibration"
    conclusion = f"{subject} admits no complex structure with either orientation"
    try:
        rep = invariant_report(f)
    except IncompleteData as exc:
        return Certificate(
            NONCOMPLEX, subject, (), conclusion, "refused", f"invariants not computable: {exc}"
        )
    return _decide(NONCOMPLEX, subject, noncomplex_premises(f, rep), conclusion)


def recheck_noncomplex(cert: Certificate) -> bool:
    """Re-evaluate every premise from the evidence stored in the certificate."""
    if cert.kind != NONCOMPLEX or len(cert.premises) != 4:
        return False
    p1, p2, p3, p4 = (p.evidence for p in cert.premises)
    b1_ok = p1["b1_parity"] == 1 and (p1["b1"] is None or p1["b1"] % 2 == 1)
    g, h, kind = p2["fiber_genus"], p2["base_genus"], p2["kind"]
    min_ok = (
        (kind == "bundle" and g >= 2 and h >= 2)
        or (kind == "lefschetz" and p2["relatively_minimal"] and g >= 2 and h >= 1)
        or p2["declared_minimal"]
    )
    b2 = p3["b2"] if p3["b2"] is not None else p3["b2_lower_bound"]
    e_ok = p4["euler"] != 0 or (p4["signature"] not in (None, 0))
    verdict = b1_ok and min_ok and b2 > 0 and e_ok
    return verdict == cert.granted


# ---------------------------------------------------------------------------
# Distinction
# ---------------------------------------------------------------------------


def distinguish(f1: Fibration, f2: Fibration) -> Certificate:
    """Granted when H_1 proves the total spaces are not homotopy equivalent.

    A refusal only means H_1 does not tell them apart.
    """
    s1, s2 = f1.name or "X1", f2.name or "X2"
    subject = f"{s1} vs {s2}"
    conclusion = f"{s1} and {s2} are not homotopy equivalent"
    try:
        r1, r2 = invariant_report(f1), invariant_report(f2)
    except IncompleteData as exc:
        return Certificate(DISTINCT, subject, (), conclusion, "refused", f"H_1 not computable: {exc}")
    u1, u2 = r1.h1_unknown, r2.h1_unknown
    if u1 is None and u2 is None:
        differ = r1.h1 != r2.h1
        premise = Premise(
            "H_1 not isomorphic",
            {"h1_a": str(r1.h1), "h1_b": str(r2.h1)},
            RULE_H1,
            differ,
        )
        return _finish_distinct(subject, [premise], conclusion)
    evidence: dict[str, Any] = {
        "h1_a": _describe(r1),
        "h1_b": _describe(r2),
    }
    if r1.b1_parity != r2.b1_parity:
        evidence["argument"] = "b1 parities differ"
        return _finish_distinct(subject, [Premise("H_1 not isomorphic", evidence, RULE_H1, True)], conclusion)
    if u1 is not None and u2 is not None and u1.tag == u2.tag:
        # H_1 = U' + K with U' = U minus a free summand of rank d; f.g. abelian
        # groups cancel, so the comparison reduces to the known parts
        rank_a = r1.h1.rank - u1.rank_deficit
        rank_b = r2.h1.rank - u2.rank_deficit
        differ = rank_a != rank_b or r1.h1.torsion != r2.h1.torsion
        evidence["argument"] = "shared undetermined summand cancels"
        evidence["rank_offset_a"] = rank_a
        evidence["rank_offset_b"] = rank_b
        return _finish_distinct(
            subject, [Premise("H_1 not isomorphic", evidence, RULE_H1, differ)], conclusion
        )
    known = r1 if u1 is None else r2
    other = r2 if u1 is None else r1
    if known.b1 is not None and known.b1 < other.b1_lower_bound:
        evidence["argument"] = "b1 below the other's lower bound"
        return _finish_distinct(subject, [Premise("H_1 not isomorphic", evidence, RULE_H1, True)], conclusion)
    evidence["argument"] = "undetermined summand prevents comparison"
    return _finish_distinct(subject, [Premise("H_1 not isomorphic", evidence, RULE_H1, False)], conclusion)


def _describe(rep: InvariantReport) -> str:
    if rep.h1_unknown is None:
        return str(rep.h1)
    u = rep.h1_unknown
    known = str(rep.h1)
    return f"U[{u.tag}, rank deficit {u.rank_deficit}] + {known}"


def _finish_distinct(subject: str, premises: list[Premise], conclusion: str) -> Certificate:
    cert = _decide(DISTINCT, subject, premises, conclusion)
    if not cert.granted:
        return Certificate(
            cert.kind, subject, cert.premises, conclusion, "refused", "not distinguished by H_1"
        )
    return cert


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------


_MODES = {
    "i": "thm-1.1-i",
    "ii": "thm-1.1-ii",
    "iii": "thm-1.1-iii",
}


@dataclass(frozen=True)
class FamilySpec:
    mode: str
    g: int | None = None
    h: int = 0
    n: int | None = None
    count: int = 5
    m_start: int = 1
    seed: str | None = None

    def __post_init__(self) -> None:
        mode = _MODES.get(self.mode, self.mode)
        if mode not in _MODES.values():
            raise ModeBoundError(f"unknown family mode {self.mode!r}")
        object.__setattr__(self, "mode", mode)
        if self.count < 1:
            raise ModeBoundError("count must be >= 1")
        if self.m_start < 1:
            raise ModeBoundError("m must start at 1 or later")
        if mode == "thm-1.1-i":
            if self.g is None or self.g < 4 or self.h < 9:
                raise ModeBoundError("mode i requires g >= 4 and h >= 9")
        elif mode == "thm-1.1-ii":
            if self.n is None or self.n < 2 or not 3 <= self.h <= 8:
                raise ModeBoundError("mode ii requires n >= 2 and 3 <= h <= 8")
            expected = (4 * self.n - 2) * self.n**2 + 1
            if self.g is not None and self.g != expected:
                raise ModeBoundError(f"mode ii with n = {self.n} has fiber genus {expected}")
        else:
            if self.g is None or self.g < 2 or self.h < 0:
                raise ModeBoundError("mode iii requires g >= 2 and h >= 0")

    @property
    def m_values(self) -> range:
        return range(self.m_start, self.m_start + self.count)

    def default_seeds(self) -> list[str]:
        if self.mode == "thm-1.1-i":
            return [f"ekkos-genus3-h{self.h}"]
        if self.mode == "thm-1.1-ii":
            return [f"bryan-donagi-X{self.n}"]
        if self.h == 0:
            return [f"korkmaz-Yn{self.g}-{m}" for m in self.m_values]
        return [f"korkmaz-Y{self.g}"]


@dataclass(frozen=True)
class FamilyMember:
    m: int
    fibration: Fibration
    noncomplex: Certificate
    distinct: Certificate
    report: StabilizationReport | None = None

    def __iter__(self):
        return iter((self.fibration, self.noncomplex, self.distinct))


def _load_seed(entry_id: str, catalog: Path | str | None) -> Fibration:
    try:
        return catalog_load(entry_id, catalog).fibration
    except CatalogError as exc:
        raise IncompleteSeed(f"seed {entry_id!r} unavailable: {exc}") from None


def _require_complete(f: Fibration, need: tuple[str, ...]) -> None:
    if f.is_explicit:
        return
    missing = [k for k in need if getattr(f.body, k) is None]
    if missing:
        raise IncompleteSeed(
            f"seed {f.name or 'fibration'} lacks declared {', '.join(missing)}; "
            "complete the catalog entry from the source"
        )


def generate_family(
    spec: FamilySpec,
    catalog: Path | str | None = None,
    seed: Fibration | None = None,
) -> list[FamilyMember]:
    """Stabilize the mode's seed for each m and certify every member."""
    members: list[tuple[int, Fibration, StabilizationReport | None]] = []
    if spec.mode == "thm-1.1-iii" and spec.h == 0:
        ids = [spec.seed] * spec.count if spec.seed else spec.default_seeds()
        for m, entry in zip(spec.m_values, ids):
            f = seed if seed is not None else _load_seed(entry, catalog)
            _require_complete(f, ("euler", "signature"))
            members.append((m, f, None))
    else:
        f = seed if seed is not None else _load_seed(spec.seed or spec.default_seeds()[0], catalog)
        _require_complete(f, ("euler", "signature", "h1"))
        for m in spec.m_values:
            try:
                if spec.mode == "thm-1.1-i":
                    if f.fiber_genus != 3:
                        raise IncompleteSeed("mode i needs a genus-3 seed")
                    rep = vertical_stabilize(f, spec.g - 3, m)
                elif spec.mode == "thm-1.1-ii":
                    rep = horizontal_stabilize(f, spec.h - f.base_genus, m)
                else:
                    if f.fiber_genus != spec.g:
                        raise IncompleteSeed(f"seed has fiber genus {f.fiber_genus}, expected {spec.g}")
                    rep = horizontal_stabilize(f, spec.h - f.base_genus, m)
            except ConstructionError as exc:
                raise IncompleteSeed(f"seed {f.name or 'fibration'} cannot be stabilized: {exc}") from None
            members.append((m, rep.result, rep))
    fibs = [f for _, f, _ in members]
    out = []
    for i, (m, f, rep) in enumerate(members):
        nc = certify_noncomplex(f)
        pair_certs = [distinguish(f, other) for j, other in enumerate(fibs) if j != i]
        premises = [
            Premise(c.conclusion, {"status": c.status, "premises": [p.to_dict() for p in c.premises]}, RULE_H1, c.granted)
            for c in pair_certs
        ]
        fam = _decide(
            FAMILY,
            f.name or f"member m={m}",
            premises,
            f"member m={m} is not homotopy equivalent to any other member of the family",
        )
        out.append(FamilyMember(m, f, nc, fam, rep))
    return out
