"""Ertl-style synthetic accessibility score.

Fragment term: mean log-frequency contribution of radius-2 environments,
looked up in ``validmol/data/sa_fragments.txt`` (``identifier<TAB>score``
per line; unseen environments score -4). Complexity penalties: size,
stereocentres, spiro atoms, bridgeheads, macrocycles. The raw value is
mapped affinely onto 1 (easy) .. 10 (hard).
"""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Iterable
from functools import lru_cache
from importlib import resources
from itertools import combinations

from validmol.properties.fingerprint import morgan_environments
from validmol.smiles.types import Molecule
from validmol.smiles.writer import symmetry_classes

UNSEEN_FRAGMENT = -4.0
_RAW_MIN = -4.0
_RAW_MAX = 2.5
REFERENCE_CORPUS_SIZE = 1_000_000


@lru_cache(maxsize=None)
def fragment_table() -> dict[int, float]:
    text = resources.files("validmol.data").joinpath("sa_fragments.txt").read_text()
    table = {}
    for line in text.splitlines():
        if line and not line.startswith("#"):
            ident, score = line.split("\t")
            table[int(ident)] = float(score)
    return table


def fragment_scores_from_counts(counts: Counter[int], n_molecules: int) -> dict[int, float]:
    """log10(scaled count / n80) per fragment.

    n80 is the number of most frequent fragments that together cover 80%
    of all occurrences. Counts are scaled to a nominal corpus of
    REFERENCE_CORPUS_SIZE molecules so that a small training corpus lands
    on the usual score scale instead of being shifted toward "hard".
    """
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    total = sum(counts.values())
    target = total * 8 // 10
    running = 0
    n80 = 1
    for i, (_, c) in enumerate(ordered):
        running += c
        if running < target:
            n80 = max(i, 1)
    scale = REFERENCE_CORPUS_SIZE / n_molecules
    return {ident: math.log10(c * scale / n80) for ident, c in ordered}


def corpus_fragment_counts(mols: Iterable[Molecule]) -> Counter[int]:
    total: Counter[int] = Counter()
    for mol in mols:
        total.update(morgan_environments(mol, 2))
    return total


def stereocenter_count(mol: Molecule) -> int:
    """Potential tetrahedral carbon centres with four distinguishable substituents."""
    classes = symmetry_classes(mol)
    n = 0
    for i, atom in enumerate(mol.atoms):
        if atom.element != 6:
            continue
        h = mol.total_h(i)
        if h > 1 or mol.degree(i) + h != 4:
            continue
        if any(mol.bonds[k].valence_order != 1 for _, k in mol.neighbors(i)):
            continue
        neigh = [classes[j] for j, _ in mol.neighbors(i)]
        if len(set(neigh)) == len(neigh):
            n += 1
    return n


def spiro_and_bridgehead_counts(mol: Molecule) -> tuple[int, int]:
    spiro: set[int] = set()
    bridge: set[int] = set()
    rings = [set(r) for r in mol.rings]
    for r1, r2 in combinations(rings, 2):
        shared = r1 & r2
        if len(shared) == 1:
            spiro |= shared
        elif len(shared) > 2:
            for a in shared:
                inside = sum(1 for j, _ in mol.neighbors(a) if j in shared)
                if inside < 2:
                    bridge.add(a)
    return len(spiro), len(bridge)


def sa_penalties(mol: Molecule) -> dict[str, float]:
    """Complexity penalty terms, each subtracted from the fragment score."""
    n_atoms = mol.heavy_atom_count()
    n_spiro, n_bridge = spiro_and_bridgehead_counts(mol)
    return {
        "size": n_atoms**1.005 - n_atoms,
        "stereo": math.log10(stereocenter_count(mol) + 1),
        "spiro": math.log10(n_spiro + 1),
        "bridgehead": math.log10(n_bridge + 1),
        "macrocycle": math.log10(2) if any(len(r) > 8 for r in mol.rings) else 0.0,
    }


def sa_score(mol: Molecule, table: dict[int, float] | None = None) -> float:
    table = fragment_table() if table is None else table
    envs = morgan_environments(mol, 2)
    n_frag = sum(envs.values())
    score1 = sum(table.get(ident, UNSEEN_FRAGMENT) * c for ident, c in envs.items()) / n_frag
    score2 = -sum(sa_penalties(mol).values())
    n_atoms = mol.heavy_atom_count()
    # symmetric molecules have few distinct environments and are easier than the mean suggests
    score3 = 0.5 * math.log(n_atoms / len(envs)) if n_atoms > len(envs) else 0.0

    raw = score1 + score2 + score3
    scaled = 11.0 - (raw - _RAW_MIN + 1) / (_RAW_MAX - _RAW_MIN) * 9.0
    if scaled > 8.0:
        scaled = 8.0 + math.log(scaled + 1.0 - 9.0)
    return min(10.0, max(1.0, scaled))
