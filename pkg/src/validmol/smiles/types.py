from __future__ import annotations

import enum
from dataclasses import dataclass, field

from validmol.smiles.elements import Z_TO_SYMBOL


class TokenKind(enum.Enum):
    ORGANIC_ATOM = "OrganicAtom"
    BRACKET_ATOM = "BracketAtom"
    BOND = "Bond"
    RING_CLOSURE = "RingClosure"
    BRANCH_OPEN = "BranchOpen"
    BRANCH_CLOSE = "BranchClose"
    DOT = "Dot"


@dataclass(frozen=True)
class SmilesToken:
    kind: TokenKind
    text: str
    position: int

    @property
    def ring_label(self) -> int:
        return int(self.text.lstrip("%"))


class BondOrder(enum.IntEnum):
    SINGLE = 1
    DOUBLE = 2
    TRIPLE = 3
    AROMATIC = 4


@dataclass(frozen=True)
class Atom:
    element: int
    index: int
    isotope: int | None = None
    charge: int = 0
    explicit_h: int | None = None
    aromatic: bool = False
    symbol: str = ""
    chirality: str | None = None  # recorded, never validated

    @property
    def bracket(self) -> bool:
        return self.explicit_h is not None

    @property
    def element_symbol(self) -> str:
        return self.symbol or Z_TO_SYMBOL.get(self.element, "*")


@dataclass(frozen=True)
class Bond:
    a: int
    b: int
    order: BondOrder
    ring_closure: bool = False
    implicit: bool = False  # no bond symbol was written
    stereo: str | None = None
    kekule: int | None = None  # 1/2/3 once sanitized

    def other(self, i: int) -> int:
        return self.b if i == self.a else self.a

    @property
    def valence_order(self) -> int:
        if self.kekule is not None:
            return self.kekule
        return 1 if self.order is BondOrder.AROMATIC else int(self.order)


@dataclass(frozen=True)
class Molecule:
    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...]
    rings: tuple[tuple[int, ...], ...] = ()
    implicit_h: tuple[int, ...] | None = None
    _adjacency: tuple[tuple[tuple[int, int], ...], ...] = field(
        default=(), repr=False, compare=False
    )

    def __post_init__(self) -> None:
        adj: list[list[tuple[int, int]]] = [[] for _ in self.atoms]
        for k, bond in enumerate(self.bonds):
            adj[bond.a].append((bond.b, k))
            adj[bond.b].append((bond.a, k))
        object.__setattr__(self, "_adjacency", tuple(tuple(x) for x in adj))

    @property
    def sanitized(self) -> bool:
        return self.implicit_h is not None

    def neighbors(self, i: int) -> tuple[tuple[int, int], ...]:
        """(neighbor atom index, bond index) pairs of atom ``i``."""
        return self._adjacency[i]

    def degree(self, i: int) -> int:
        return len(self._adjacency[i])

    def bond_index(self, i: int, j: int) -> int | None:
        for n, k in self._adjacency[i]:
            if n == j:
                return k
        return None

    def bond_between(self, i: int, j: int) -> Bond | None:
        k = self.bond_index(i, j)
        return None if k is None else self.bonds[k]

    def total_h(self, i: int) -> int:
        atom = self.atoms[i]
        h = atom.explicit_h or 0
        if self.implicit_h is not None:
            h += self.implicit_h[i]
        return h

    def bond_order_sum(self, i: int) -> int:
        return sum(self.bonds[k].valence_order for _, k in self._adjacency[i])

    def ring_atoms(self) -> frozenset[int]:
        return frozenset(i for ring in self.rings for i in ring)

    def ring_bonds(self) -> frozenset[int]:
        out = set()
        for ring in self.rings:
            for x, y in zip(ring, ring[1:] + ring[:1]):
                k = self.bond_index(x, y)
                if k is not None:
                    out.add(k)
        return frozenset(out)

    def heavy_atom_count(self) -> int:
        return sum(1 for a in self.atoms if a.element != 1)

    def __len__(self) -> int:
        return len(self.atoms)


@dataclass(frozen=True)
class SyntaxVerdict:
    ok: bool
    message: str | None = None
    position: int | None = None


@dataclass(frozen=True)
class ChemVerdict:
    ok: bool
    message: str | None = None
    molecule: Molecule | None = None


class LexError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class ParseFailure(ValueError):
    """Raised when a string cannot be turned into a molecular graph."""

    def __init__(self, reason: str):
        super().__init__(f"Cannot parse to molecule: {reason}")
        self.reason = reason
