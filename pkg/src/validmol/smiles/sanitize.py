"""Valence, kekulization and aromaticity verification (the chemistry gate)."""

from __future__ import annotations

from dataclasses import replace

import networkx as nx

from validmol.smiles.elements import VALENCE_ELECTRONS, allowed_valences
from validmol.smiles.types import BondOrder, ChemVerdict, Molecule

VALENCE_EXCEEDED = "valence exceeded"
KEKULIZATION_IMPOSSIBLE = "kekulization impossible"
AROMATIC_NOT_IN_RING = "aromatic atom not in ring"
HUCKEL_VIOLATION = "Hückel violation"
UNSUPPORTED_ELEMENT = "unsupported element"

CHEM_FAILED = "Chemical validation failed: "


class SanitizeError(ValueError):
    def __init__(self, reason: str, detail: str = ""):
        super().__init__(reason + (f" ({detail})" if detail else ""))
        self.reason = reason
        self.detail = detail


def _target_valence(allowed: tuple[int, ...], s: int) -> int | None:
    for v in allowed:
        if v >= s:
            return v
    return None


def _needs_double(mol: Molecule, i: int) -> bool:
    atom = mol.atoms[i]
    allowed = allowed_valences(atom.element, atom.charge)
    s = mol.bond_order_sum(i) + (atom.explicit_h or 0)
    v = _target_valence(allowed, s)  # type: ignore[arg-type]
    if v is None:
        raise SanitizeError(VALENCE_EXCEEDED, f"atom {i}")
    return s + 1 <= v


def _perfect_matching(nodes: list[int], edges: list[tuple[int, int]]) -> set[tuple[int, int]] | None:
    adj: dict[int, list[int]] = {u: [] for u in nodes}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    for lst in adj.values():
        lst.sort()
    mate: dict[int, int] = {}

    # greedy on low-degree atoms first, then simple augmenting paths
    for u in sorted(nodes, key=lambda x: (len(adj[x]), x)):
        if u in mate:
            continue
        for v in adj[u]:
            if v not in mate:
                mate[u] = v
                mate[v] = u
                break

    def augment(u: int, seen: set[int]) -> bool:
        for v in adj[u]:
            if v in seen:
                continue
            seen.add(v)
            w = mate.get(v)
            if w is None or augment(w, seen):
                mate[u] = v
                mate[v] = u
                return True
        return False

    for u in nodes:
        if u not in mate:
            augment(u, {u})
    if len(mate) < len(nodes):
        # bipartite-style augmenting can miss odd cycles; defer to blossom
        g = nx.Graph()
        g.add_nodes_from(nodes)
        g.add_edges_from(edges)
        matching = nx.max_weight_matching(g, maxcardinality=True)
        if 2 * len(matching) < len(nodes):
            return None
        return {(min(a, b), max(a, b)) for a, b in matching}
    return {(min(u, v), max(u, v)) for u, v in mate.items() if u < v}


def pi_electrons(mol: Molecule, i: int, pi_bonds: frozenset[int]) -> int:
    """Pi electrons contributed by atom ``i`` to an aromatic ring.

    A double bond in ``pi_bonds`` gives 1, any other double bond gives 0,
    otherwise a lone pair (2) or empty orbital (0) from electron counting.
    """
    atom = mol.atoms[i]
    sigma = 0
    for _, k in mol.neighbors(i):
        order = mol.bonds[k].valence_order
        if order >= 2:
            return 1 if k in pi_bonds else 0
        sigma += 1
    sigma += mol.total_h(i)
    free = VALENCE_ELECTRONS.get(atom.element, 4) - atom.charge - sigma
    if free >= 2:
        return 2
    return max(free, 0)


def is_huckel(count: int) -> bool:
    return count >= 2 and (count - 2) % 4 == 0


def sanitize_or_raise(mol: Molecule) -> Molecule:
    atoms = list(mol.atoms)
    bonds = list(mol.bonds)
    for a in atoms:
        if a.element == 0 or allowed_valences(a.element, a.charge) is None:
            raise SanitizeError(UNSUPPORTED_ELEMENT, a.element_symbol)

    ring_bond_ids = mol.ring_bonds()
    ring_atom_ids = mol.ring_atoms()

    # an unwritten bond between aromatic atoms outside any ring is a plain single bond
    for k, b in enumerate(bonds):
        if b.order is BondOrder.AROMATIC and k not in ring_bond_ids:
            if b.implicit:
                bonds[k] = replace(b, order=BondOrder.SINGLE)
            else:
                raise SanitizeError(AROMATIC_NOT_IN_RING, f"bond {b.a}-{b.b}")
    for a in atoms:
        if a.aromatic and a.index not in ring_atom_ids:
            raise SanitizeError(AROMATIC_NOT_IN_RING, f"atom {a.index}")
    work = Molecule(tuple(atoms), tuple(bonds), mol.rings)

    aromatic_bonds = frozenset(k for k, b in enumerate(bonds) if b.order is BondOrder.AROMATIC)
    for k in aromatic_bonds:
        b = bonds[k]
        if not (atoms[b.a].aromatic and atoms[b.b].aromatic):
            raise SanitizeError(KEKULIZATION_IMPOSSIBLE, f"aromatic bond {b.a}-{b.b}")

    # kekulize: every aromatic atom lacking a pi bond must get exactly one
    needy = [a.index for a in atoms if a.aromatic and _needs_double(work, a.index)]
    needy_set = set(needy)
    candidate_edges = []
    for k in sorted(aromatic_bonds):
        b = bonds[k]
        if b.a in needy_set and b.b in needy_set:
            candidate_edges.append((min(b.a, b.b), max(b.a, b.b)))
    matching = _perfect_matching(needy, candidate_edges) if needy else set()
    if matching is None:
        raise SanitizeError(KEKULIZATION_IMPOSSIBLE)
    for k, b in enumerate(bonds):
        if b.order is BondOrder.AROMATIC:
            pair = (min(b.a, b.b), max(b.a, b.b))
            bonds[k] = replace(b, kekule=2 if pair in matching else 1)
        else:
            bonds[k] = replace(b, kekule=int(b.order))
    work = Molecule(tuple(atoms), tuple(bonds), mol.rings)

    implicit = []
    for a in atoms:
        allowed = allowed_valences(a.element, a.charge)
        s = work.bond_order_sum(a.index)
        if a.bracket:
            if s + a.explicit_h > max(allowed):  # type: ignore[arg-type]
                raise SanitizeError(VALENCE_EXCEEDED, f"atom {a.index}")
            implicit.append(0)
        else:
            v = _target_valence(allowed, s)  # type: ignore[arg-type]
            if v is None:
                raise SanitizeError(VALENCE_EXCEEDED, f"atom {a.index}")
            implicit.append(v - s)
    out = Molecule(tuple(atoms), tuple(bonds), mol.rings, tuple(implicit))

    for ring in mol.rings:
        ids = []
        for x, y in zip(ring, ring[1:] + ring[:1]):
            ids.append(out.bond_index(x, y))
        if not all(k in aromatic_bonds for k in ids):
            continue
        count = sum(pi_electrons(out, i, aromatic_bonds) for i in ring)
        if not is_huckel(count):
            raise SanitizeError(HUCKEL_VIOLATION, f"ring {ring} has {count} pi electrons")
    return out


def sanitize(mol: Molecule) -> ChemVerdict:
    """Check valences and aromaticity, assigning implicit hydrogens.

    Failures come back as verdicts whose message starts with
    ``"Chemical validation failed: "`` followed by the reason.
    """
    try:
        clean = sanitize_or_raise(mol)
    except SanitizeError as exc:
        return ChemVerdict(False, CHEM_FAILED + exc.reason)
    return ChemVerdict(True, None, clean)
