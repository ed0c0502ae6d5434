"""Atom-contribution logP (Wildman-Crippen types).

The table ships as ``validmol/data/crippen.txt``: tab-separated
``type, pattern, logP, MR`` records (MR may be blank), tried in file order with the first
matching pattern deciding an atom's type. Hydrogens are typed as explicit
atoms, so every hydrogen contributes too.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from validmol.properties.smarts import HGraph, PatternAtom, compile_smarts, matches_at
from validmol.smiles.aromaticity import perceive_aromaticity
from validmol.smiles.types import Molecule


class UnassignedAtomType(ValueError):
    def __init__(self, atom: int, element: int):
        super().__init__(f"atom {atom} (Z={element}) matches no logP atom type")
        self.atom = atom
        self.element = element


@dataclass(frozen=True)
class CrippenRule:
    type_id: str
    pattern: str
    logp: float
    mr: float


@lru_cache(maxsize=None)
def crippen_rules() -> tuple[CrippenRule, ...]:
    text = resources.files("validmol.data").joinpath("crippen.txt").read_text()
    rules = []
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        rules.append(CrippenRule(fields[0], fields[1], float(fields[2]), float(fields[3] or 0.0)))
    return tuple(rules)


@lru_cache(maxsize=None)
def _compiled() -> tuple[tuple[CrippenRule, PatternAtom], ...]:
    return tuple((r, compile_smarts(r.pattern)) for r in crippen_rules())


def atom_types(mol: Molecule) -> list[CrippenRule]:
    """Rule assigned to each atom: heavy atoms in molecule order, then hydrogens.

    Hydrogens follow in the order of the heavy atom that carries them.
    """
    arom = perceive_aromaticity(mol)
    g = HGraph(arom)
    out = []
    for i in range(len(g)):
        for rule, pat in _compiled():
            if matches_at(pat, g, i):
                out.append(rule)
                break
        else:
            raise UnassignedAtomType(i, g.views[i].z)
    return out


def crippen_logp(mol: Molecule) -> float:
    return sum(r.logp for r in atom_types(mol))
