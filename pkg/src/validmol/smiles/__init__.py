"""SMILES lexing, parsing, chemical validation and canonical output."""

from __future__ import annotations

from validmol.smiles.aromaticity import perceive_aromaticity
from validmol.smiles.parser import parse_to_mol
from validmol.smiles.sanitize import CHEM_FAILED, sanitize
from validmol.smiles.syntax import (
    INVALID_CHARACTER,
    UNBALANCED_BRACKETS,
    UNBALANCED_PARENTHESES,
    UNMATCHED_RING_CLOSURE,
    tokenize,
    validate_syntax,
)
from validmol.smiles.types import (
    Atom,
    Bond,
    BondOrder,
    ChemVerdict,
    LexError,
    Molecule,
    ParseFailure,
    SmilesToken,
    SyntaxVerdict,
    TokenKind,
)
from validmol.smiles.writer import canonical_ranks, canonical_smiles, symmetry_classes, write_smiles

CANNOT_PARSE = "Cannot parse to molecule"
UNEXPECTED = "Unexpected error: "


def validate_chemistry(s: str) -> ChemVerdict:
    """Syntax check, parse and sanitize; never raises.

    >>> validate_chemistry("CCO").ok
    True
    >>> validate_chemistry("C(C)(C)(C)(C)C").message
    'Chemical validation failed: valence exceeded'
    """
    try:
        try:
            mol = parse_to_mol(s)
        except ParseFailure as exc:
            return ChemVerdict(False, f"{CANNOT_PARSE}: {exc.reason}")
        return sanitize(mol)
    except Exception as exc:  # noqa: BLE001 - totality over arbitrary input
        return ChemVerdict(False, UNEXPECTED + f"{type(exc).__name__}: {exc}")


def mol_from_smiles(s: str) -> Molecule:
    """Parse and sanitize, raising ValueError with the verdict message on failure."""
    verdict = validate_chemistry(s)
    if not verdict.ok:
        raise ValueError(verdict.message)
    return verdict.molecule  # type: ignore[return-value]


def canonicalize(s: str) -> str:
    return canonical_smiles(mol_from_smiles(s))


__all__ = [
    "Atom",
    "Bond",
    "BondOrder",
    "CANNOT_PARSE",
    "CHEM_FAILED",
    "ChemVerdict",
    "INVALID_CHARACTER",
    "LexError",
    "Molecule",
    "ParseFailure",
    "SmilesToken",
    "SyntaxVerdict",
    "TokenKind",
    "UNBALANCED_BRACKETS",
    "UNBALANCED_PARENTHESES",
    "UNMATCHED_RING_CLOSURE",
    "UNEXPECTED",
    "canonical_ranks",
    "canonical_smiles",
    "canonicalize",
    "mol_from_smiles",
    "parse_to_mol",
    "perceive_aromaticity",
    "sanitize",
    "tokenize",
    "validate_chemistry",
    "validate_syntax",
    "symmetry_classes",
    "write_smiles",
]
