"""Aromaticity perception on sanitized (kekulized) molecules.

Used for canonical output and descriptor calculation so that kekulé and
aromatic writings of the same compound compare equal. A ring is aromatic
when every atom can take part in a pi system and the per-ring electron
count satisfies 4n+2; double bonds only count toward a ring when they lie
in a ring that is itself accepted, which is resolved by fixed-point
iteration.
"""

from __future__ import annotations

from dataclasses import replace

from validmol.smiles.elements import AROMATIC_ELEMENTS, VALENCE_ELECTRONS
from validmol.smiles.sanitize import is_huckel, pi_electrons
from validmol.smiles.types import BondOrder, Molecule


def _ring_bond_ids(mol: Molecule, ring: tuple[int, ...]) -> list[int]:
    return [mol.bond_index(x, y) for x, y in zip(ring, ring[1:] + ring[:1])]  # type: ignore[misc]


def _candidate_atom(mol: Molecule, i: int, ring_bonds: frozenset[int]) -> bool:
    atom = mol.atoms[i]
    if atom.element not in AROMATIC_ELEMENTS:
        return False
    doubles = []
    sigma = 0
    for _, k in mol.neighbors(i):
        order = mol.bonds[k].valence_order
        if order == 3:
            return False
        if order == 2:
            doubles.append(k)
        sigma += 1
    if len(doubles) > 1:
        return False
    if doubles:
        if doubles[0] in ring_bonds:
            return True
        # exocyclic C=X (X = N, O, S) keeps the atom sp2 but contributes no electrons
        partner = mol.bonds[doubles[0]].other(i)
        return atom.element == 6 and mol.atoms[partner].element in (7, 8, 16)
    free = VALENCE_ELECTRONS[atom.element] - atom.charge - sigma - mol.total_h(i)
    if free >= 2:
        return atom.element in (7, 8, 15, 16) or (atom.element == 6 and atom.charge < 0)
    return free == 0 and (atom.element == 5 or (atom.element == 6 and atom.charge > 0))


def aromatic_rings(mol: Molecule) -> list[tuple[int, ...]]:
    ring_bonds = mol.ring_bonds()
    rings = []
    for ring in mol.rings:
        ids = _ring_bond_ids(mol, ring)
        if any(mol.bonds[k].valence_order == 3 for k in ids):
            continue
        if all(_candidate_atom(mol, i, ring_bonds) for i in ring):
            rings.append(ring)
    while True:
        pi = frozenset(k for ring in rings for k in _ring_bond_ids(mol, ring))
        keep = [r for r in rings if is_huckel(sum(pi_electrons(mol, i, pi) for i in r))]
        if len(keep) == len(rings):
            return keep
        rings = keep


def perceive_aromaticity(mol: Molecule) -> Molecule:
    """Return a copy whose aromatic flags and bond orders reflect perceived aromaticity.

    Kekulé bond orders are retained in ``Bond.kekule`` so valences and
    implicit hydrogen counts are unchanged.
    """
    if not mol.sanitized:
        raise ValueError("aromaticity perception needs a sanitized molecule")
    rings = aromatic_rings(mol)
    arom_atoms = {i for r in rings for i in r}
    arom_bonds = {k for r in rings for k in _ring_bond_ids(mol, r)}
    atoms = tuple(replace(a, aromatic=a.index in arom_atoms) for a in mol.atoms)
    bonds = []
    for k, b in enumerate(mol.bonds):
        if k in arom_bonds:
            bonds.append(replace(b, order=BondOrder.AROMATIC))
        elif b.order is BondOrder.AROMATIC:
            bonds.append(replace(b, order=BondOrder(b.kekule or 1)))
        else:
            bonds.append(b)
    return Molecule(atoms, tuple(bonds), mol.rings, mol.implicit_h)
