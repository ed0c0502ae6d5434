"""Canonical atom ranking and SMILES output."""

from __future__ import annotations

from collections.abc import Sequence

from validmol.smiles.aromaticity import perceive_aromaticity
from validmol.smiles.elements import allowed_valences
from validmol.smiles.types import BondOrder, Molecule

_ORGANIC = {5: "B", 6: "C", 7: "N", 8: "O", 15: "P", 16: "S", 9: "F", 17: "Cl", 35: "Br", 53: "I"}


def _bond_code(order: BondOrder) -> int:
    return int(order)


def _relabel(keys: Sequence) -> list[int]:
    order = sorted(set(keys))
    index = {k: i for i, k in enumerate(order)}
    return [index[k] for k in keys]


def _refine(mol: Molecule, ranks: list[int]) -> list[int]:
    while True:
        keys = [
            (
                ranks[i],
                tuple(sorted((ranks[n], _bond_code(mol.bonds[k].order)) for n, k in mol.neighbors(i))),
            )
            for i in range(len(mol.atoms))
        ]
        new = _relabel(keys)
        if len(set(new)) == len(set(ranks)):
            return new
        ranks = new


def symmetry_classes(mol: Molecule) -> list[int]:
    """Refined invariant classes; atoms sharing a class are topologically equivalent
    as far as refinement can tell."""
    ring_atoms = mol.ring_atoms()
    init = [
        (
            a.element,
            mol.degree(a.index),
            mol.total_h(a.index),
            a.charge,
            a.isotope or 0,
            a.aromatic,
            a.index in ring_atoms,
        )
        for a in mol.atoms
    ]
    return _refine(mol, _relabel(init))


def canonical_ranks(mol: Molecule) -> list[int]:
    """Distinct rank per atom from iterative neighbourhood refinement.

    Ties left after refinement are broken by promoting one member of the
    lowest tied class and refining again.
    """
    ranks = symmetry_classes(mol)
    n = len(ranks)
    while len(set(ranks)) < n:
        counts: dict[int, int] = {}
        for r in ranks:
            counts[r] = counts.get(r, 0) + 1
        tied = min(r for r, c in counts.items() if c > 1)
        chosen = min(i for i in range(n) if ranks[i] == tied)
        ranks = _refine(mol, _relabel([(ranks[i], 0 if i == chosen else 1) for i in range(n)]))
    return ranks


def _implicit_h_on_reparse(mol: Molecule, i: int) -> int:
    atom = mol.atoms[i]
    allowed = allowed_valences(atom.element, 0) or ()
    if atom.aromatic:
        s = sum(
            1 if mol.bonds[k].order is BondOrder.AROMATIC else int(mol.bonds[k].order)
            for _, k in mol.neighbors(i)
        )
    else:
        s = mol.bond_order_sum(i)
    for v in allowed:
        if v >= s:
            needs_pi = atom.aromatic and s + 1 <= v
            return v - s - needs_pi
    return -1


def _atom_text(mol: Molecule, i: int) -> str:
    atom = mol.atoms[i]
    h = mol.total_h(i)
    sym = _ORGANIC.get(atom.element)
    plain = (
        sym is not None
        and atom.charge == 0
        and atom.isotope is None
        and _implicit_h_on_reparse(mol, i) == h
    )
    if plain:
        return sym.lower() if atom.aromatic else sym  # type: ignore[union-attr]
    symbol = atom.element_symbol
    if atom.aromatic:
        symbol = symbol.lower()
    out = "[" + (str(atom.isotope) if atom.isotope else "") + symbol
    if h:
        out += "H" + (str(h) if h > 1 else "")
    if atom.charge:
        sign = "+" if atom.charge > 0 else "-"
        out += sign + (str(abs(atom.charge)) if abs(atom.charge) > 1 else "")
    return out + "]"


def _bond_text(mol: Molecule, k: int) -> str:
    b = mol.bonds[k]
    if b.order is BondOrder.AROMATIC:
        return ""
    if b.order is BondOrder.DOUBLE:
        return "="
    if b.order is BondOrder.TRIPLE:
        return "#"
    if mol.atoms[b.a].aromatic and mol.atoms[b.b].aromatic:
        return "-"
    return ""


def write_smiles(mol: Molecule, ranks: Sequence[int]) -> str:
    """Depth-first SMILES writer; lower-ranked atoms are visited first.

    Stereo marks are not emitted.
    """
    n = len(mol.atoms)
    visited = [False] * n
    order: list[int] = []
    parent: dict[int, int | None] = {}
    closures: dict[int, list[tuple[int, int]]] = {i: [] for i in range(n)}  # atom -> (partner, bond)
    tree_children: dict[int, list[int]] = {i: [] for i in range(n)}
    roots: list[int] = []

    for start in sorted(range(n), key=lambda i: ranks[i]):
        if visited[start]:
            continue
        roots.append(start)
        parent[start] = None
        stack = [start]
        # iterative DFS that mirrors recursive visiting order
        iters: dict[int, list[tuple[int, int]]] = {}
        visited[start] = True
        order.append(start)
        iters[start] = sorted(mol.neighbors(start), key=lambda nk: ranks[nk[0]])
        seen_bonds: set[int] = set()
        while stack:
            u = stack[-1]
            if iters[u]:
                v, k = iters[u].pop(0)
                if k in seen_bonds:
                    continue
                seen_bonds.add(k)
                if visited[v]:
                    closures[v].append((u, k))
                    closures[u].append((v, k))
                else:
                    visited[v] = True
                    parent[v] = u
                    tree_children[u].append(v)
                    order.append(v)
                    iters[v] = sorted(mol.neighbors(v), key=lambda nk: ranks[nk[0]])
                    stack.append(v)
            else:
                stack.pop()

    # ring labels assigned in writing order
    position = {a: p for p, a in enumerate(order)}
    free: list[int] = []
    next_label = 1
    open_label: dict[int, int] = {}  # bond -> label
    pieces: dict[int, str] = {}

    def label_text(label: int) -> str:
        return str(label) if label < 10 else f"%{label:02d}"

    for a in order:
        text = _atom_text(mol, a)
        for partner, k in sorted(closures[a], key=lambda pk: (position[pk[0]], ranks[pk[0]])):
            if k in open_label:
                label = open_label.pop(k)
                text += label_text(label)
                free.append(label)
                free.sort()
            else:
                if free:
                    label = free.pop(0)
                else:
                    label = next_label
                    next_label += 1
                open_label[k] = label
                text += _bond_text(mol, k) + label_text(label)
        pieces[a] = text

    def emit(a: int) -> str:
        out = pieces[a]
        kids = tree_children[a]
        for idx, c in enumerate(kids):
            k = mol.bond_index(a, c)
            seg = _bond_text(mol, k) + emit(c)  # type: ignore[arg-type]
            out += seg if idx == len(kids) - 1 else "(" + seg + ")"
        return out

    return ".".join(emit(r) for r in roots)


def canonical_smiles(mol: Molecule) -> str:
    """Deterministic SMILES for a sanitized molecule, aromatic form."""
    arom = perceive_aromaticity(mol)
    return write_smiles(arom, canonical_ranks(arom))
