"""Exact homological invariants of surface bundles and Lefschetz fibrations."""

from __future__ import annotations

from .certify import (
    Certificate,
    FamilySpec,
    IncompleteSeed,
    ModeBoundError,
    certify_noncomplex,
    distinguish,
    generate_family,
)
from .construct import (
    BlockSpec,
    ConstructionError,
    NoSuitableCurve,
    StabilizationReport,
    build_block,
    fiber_sum,
    horizontal_stabilize,
    section_sum,
    select_curve,
    vertical_stabilize,
)
from .invariants import (
    Asserted,
    DeclaredInvariants,
    Fibration,
    FibrationError,
    H1Unknown,
    IncompleteData,
    InvariantReport,
    Kind,
    Section,
    euler_characteristic,
    h1_total_space,
    invariant_report,
    meyer_tau,
    signature,
)
from .linalg import AbelianGroup, IntMatrix, cokernel, smith_normal_form
from .monodromy import (
    CurveClass,
    Handle,
    Letter,
    MonodromyFactorization,
    SpElement,
    verify_homological_relation,
)
from .serialize import emit_fibration, parse_fibration

__version__ = "0.1.0"

__all__ = [
    "AbelianGroup",
    "Asserted",
    "BlockSpec",
    "build_block",
    "Certificate",
    "certify_noncomplex",
    "cokernel",
    "ConstructionError",
    "CurveClass",
    "DeclaredInvariants",
    "distinguish",
    "emit_fibration",
    "euler_characteristic",
    "FamilySpec",
    "fiber_sum",
    "Fibration",
    "FibrationError",
    "generate_family",
    "h1_total_space",
    "H1Unknown",
    "Handle",
    "horizontal_stabilize",
    "IncompleteData",
    "IncompleteSeed",
    "IntMatrix",
    "invariant_report",
    "InvariantReport",
    "Kind",
    "Letter",
    "meyer_tau",
    "ModeBoundError",
    "MonodromyFactorization",
    "NoSuitableCurve",
    "parse_fibration",
    "Section",
    "section_sum",
    "select_curve",
    "signature",
    "smith_normal_form",
    "SpElement",
    "StabilizationReport",
    "verify_homological_relation",
    "vertical_stabilize",
]
