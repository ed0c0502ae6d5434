"""Molecular weight, H-bond counts, Lipinski rule-of-five and the combined profile."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from validmol.properties.crippen import crippen_logp
from validmol.properties.sa import sa_score
from validmol.smiles.elements import ATOMIC_WEIGHT
from validmol.smiles.types import Molecule

_H = 1


def molecular_weight(mol: Molecule) -> float:
    """Average molecular weight, implicit and explicit hydrogens included."""
    return sum(ATOMIC_WEIGHT[a.element] + mol.total_h(a.index) * ATOMIC_WEIGHT[_H] for a in mol.atoms)


def _attached_h(mol: Molecule, i: int) -> int:
    return mol.total_h(i) + sum(1 for j, _ in mol.neighbors(i) if mol.atoms[j].element == _H)


def hbd_hba(mol: Molecule) -> tuple[int, int]:
    """Lipinski counts: donors = hydrogens on N or O, acceptors = N and O atoms."""
    hbd = hba = 0
    for a in mol.atoms:
        if a.element in (7, 8):
            hba += 1
            hbd += _attached_h(mol, a.index)
    return hbd, hba


@dataclass(frozen=True)
class PropertyProfile:
    mw: float
    logp: float
    hbd: int
    hba: int
    heavy_atoms: int
    sa_score: float
    lipinski_violations: int = 0

    def __post_init__(self) -> None:
        if not 1.0 <= self.sa_score <= 10.0:
            raise ValueError("sa_score outside [1, 10]")
        if min(self.hbd, self.hba, self.heavy_atoms) < 0 or not 0 <= self.lipinski_violations <= 4:
            raise ValueError("negative count or violation count outside 0..4")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> "PropertyProfile":
        return cls(**obj)


def lipinski_violations(p: PropertyProfile) -> int:
    return (p.mw > 500) + (p.logp > 5) + (p.hbd > 5) + (p.hba > 10)


def property_profile(mol: Molecule) -> PropertyProfile:
    hbd, hba = hbd_hba(mol)
    p = PropertyProfile(
        mw=molecular_weight(mol),
        logp=crippen_logp(mol),
        hbd=hbd,
        hba=hba,
        heavy_atoms=mol.heavy_atom_count(),
        sa_score=sa_score(mol),
    )
    return PropertyProfile(**{**asdict(p), "lipinski_violations": lipinski_violations(p)})
