"""Circular (Morgan-style) fingerprints and Tanimoto similarity."""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass

from validmol.smiles.aromaticity import perceive_aromaticity
from validmol.smiles.types import Molecule

DEFAULT_RADIUS = 2
DEFAULT_NBITS = 2048


class DimensionMismatch(ValueError):
    pass


def _hash(values: tuple) -> int:
    data = ",".join(str(v) for v in values).encode()
    return int.from_bytes(hashlib.blake2b(data, digest_size=4).digest(), "big")


def morgan_environments(mol: Molecule, radius: int = DEFAULT_RADIUS) -> Counter[int]:
    """Unfolded 32-bit environment identifiers with multiplicities.

    Round 0 hashes the atom invariant (atomic number, degree, charge,
    total H, in-ring flag, aromatic flag). Round r hashes the atom's
    previous identifier with its sorted (bond order, neighbour identifier)
    pairs. As in ECFP, an environment covering exactly the same bonds as one
    already recorded is dropped; within a round the smaller identifier wins.
    """
    arom = perceive_aromaticity(mol)
    ring_atoms = arom.ring_atoms()
    n = len(arom.atoms)
    ids = [
        _hash((a.element, arom.degree(i), a.charge, arom.total_h(i), int(i in ring_atoms), int(a.aromatic)))
        for i, a in enumerate(arom.atoms)
    ]
    found: Counter[int] = Counter(ids)
    bond_sets: list[frozenset[int]] = [frozenset()] * n
    seen: set[frozenset[int]] = set()
    for r in range(1, radius + 1):
        nxt = []
        new_sets = []
        for i in range(n):
            env = sorted((int(arom.bonds[k].order), ids[n_]) for n_, k in arom.neighbors(i))
            nxt.append(_hash((r, ids[i], *(x for pair in env for x in pair))))
            grown = set(bond_sets[i])
            for j, k in arom.neighbors(i):
                grown.add(k)
                grown |= bond_sets[j]
            new_sets.append(frozenset(grown))
        for i in sorted(range(n), key=lambda i: (sorted(new_sets[i]), nxt[i])):
            if new_sets[i] and new_sets[i] not in seen:
                seen.add(new_sets[i])
                found[nxt[i]] += 1
        ids, bond_sets = nxt, new_sets
    return found


@dataclass(frozen=True)
class Fingerprint:
    bits: int
    nbits: int = DEFAULT_NBITS
    radius: int = DEFAULT_RADIUS

    def __post_init__(self) -> None:
        if self.nbits <= 0 or self.radius < 0:
            raise ValueError("nbits must be positive and radius non-negative")
        if self.bits < 0 or self.bits >> self.nbits:
            raise ValueError("bits outside the fingerprint width")

    @property
    def popcount(self) -> int:
        return bin(self.bits).count("1")

    def on_bits(self) -> list[int]:
        return [i for i in range(self.nbits) if self.bits >> i & 1]


def fold(identifiers, nbits: int = DEFAULT_NBITS, radius: int = DEFAULT_RADIUS) -> Fingerprint:
    bits = 0
    for ident in identifiers:
        bits |= 1 << (ident % nbits)
    return Fingerprint(bits, nbits, radius)


def morgan_fingerprint(mol: Molecule, radius: int = DEFAULT_RADIUS, nbits: int = DEFAULT_NBITS) -> Fingerprint:
    return fold(morgan_environments(mol, radius), nbits, radius)


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    if a.nbits != b.nbits:
        raise DimensionMismatch(f"{a.nbits} vs {b.nbits} bits")
    union = bin(a.bits | b.bits).count("1")
    if union == 0:
        return 1.0
    return bin(a.bits & b.bits).count("1") / union
