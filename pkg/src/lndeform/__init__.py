"""Exact deformation theory of algebras over the Landweber-Novikov algebra."""

from .base import Q, Z, BaseRing, Zmod
from .deformation import (
    Automorphism,
    Deformation,
    conjugate,
    deformation_obstruction,
    equivalent_extensions,
    extend_automorphism,
    extend_deformation,
    gauge_step,
    infinitesimal_class,
    invert_automorphism,
    obstruction_sequence,
    rigidity_certificate,
    validate_automorphism,
    validate_deformation,
)
from .exp_seq import ExpSeq, enumerate_seqs, splittings
from .fstar_complex import Cochain, FStar
from .ln_structure import StructureTable, associativity_report, structure_constants
from .ring_core import FiniteRing, hochschild_cohomology, validate_ring
from .s_algebra import ActionTable, canonical_instance, trivial_instance, validate_action

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "BaseRing",
    "Z",
    "Q",
    "Zmod",
    "ExpSeq",
    "enumerate_seqs",
    "splittings",
    "StructureTable",
    "structure_constants",
    "associativity_report",
    "FiniteRing",
    "validate_ring",
    "hochschild_cohomology",
    "ActionTable",
    "validate_action",
    "trivial_instance",
    "canonical_instance",
    "Cochain",
    "FStar",
    "Deformation",
    "Automorphism",
    "validate_deformation",
    "validate_automorphism",
    "infinitesimal_class",
    "deformation_obstruction",
    "extend_deformation",
    "obstruction_sequence",
    "extend_automorphism",
    "invert_automorphism",
    "conjugate",
    "gauge_step",
    "rigidity_certificate",
    "equivalent_extensions",
]
