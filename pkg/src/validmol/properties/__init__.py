"""Descriptors for candidate molecules: weight, logP, H-bond counts, fingerprints, SA score."""

from validmol.properties.crippen import UnassignedAtomType, atom_types, crippen_logp
from validmol.properties.descriptors import (
    PropertyProfile,
    hbd_hba,
    lipinski_violations,
    molecular_weight,
    property_profile,
)
from validmol.properties.fingerprint import (
    DimensionMismatch,
    Fingerprint,
    fold,
    morgan_environments,
    morgan_fingerprint,
    tanimoto,
)
from validmol.properties.sa import sa_penalties, sa_score

__all__ = [
    "DimensionMismatch",
    "Fingerprint",
    "PropertyProfile",
    "UnassignedAtomType",
    "atom_types",
    "crippen_logp",
    "fold",
    "hbd_hba",
    "lipinski_violations",
    "molecular_weight",
    "morgan_environments",
    "morgan_fingerprint",
    "property_profile",
    "sa_penalties",
    "sa_score",
    "tanimoto",
]
