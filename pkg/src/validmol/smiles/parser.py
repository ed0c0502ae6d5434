"""SMILES string -> unsanitized molecular graph."""

from __future__ import annotations

from dataclasses import replace

from validmol.smiles.elements import AROMATIC_ELEMENTS, SYMBOL_TO_Z
from validmol.smiles.rings import find_sssr
from validmol.smiles.syntax import parse_bracket_body, tokenize, validate_syntax
from validmol.smiles.types import (
    Atom,
    Bond,
    BondOrder,
    LexError,
    Molecule,
    ParseFailure,
    TokenKind,
)

_BOND_SYMBOLS = {
    "-": BondOrder.SINGLE,
    "=": BondOrder.DOUBLE,
    "#": BondOrder.TRIPLE,
    ":": BondOrder.AROMATIC,
    "/": BondOrder.SINGLE,
    "\\": BondOrder.SINGLE,
}


def _element_of(symbol: str) -> tuple[int, bool]:
    if symbol == "*":
        return 0, False
    if symbol[0].islower():
        z = SYMBOL_TO_Z.get(symbol.capitalize(), 0)
        if z not in AROMATIC_ELEMENTS:
            raise ParseFailure(f"aromatic symbol {symbol!r} not supported")
        return z, True
    return SYMBOL_TO_Z.get(symbol, 0), False


def _bracket_atom(text: str, index: int) -> Atom:
    parts = parse_bracket_body(text[1:-1])
    symbol = parts["symbol"]
    z, aromatic = _element_of(symbol)
    iso = int(parts["isotope"]) if parts["isotope"] else None
    if iso == 0:
        iso = None
    h = 0
    if parts["hcount"]:
        h = int(parts["hcount"][1:] or 1)
    charge = 0
    c = parts["charge"]
    if c:
        if c in ("++", "--"):
            charge = 2 if c == "++" else -2
        elif len(c) == 1:
            charge = 1 if c == "+" else -1
        else:
            charge = int(c)
    name = symbol if z == 0 else ""
    return Atom(
        element=z,
        index=index,
        isotope=iso,
        charge=charge,
        explicit_h=h,
        aromatic=aromatic,
        symbol=name,
        chirality=parts["chiral"],
    )


def _organic_atom(text: str, index: int) -> Atom:
    z, aromatic = _element_of(text)
    return Atom(element=z, index=index, aromatic=aromatic, symbol="*" if z == 0 else "")


def parse_graph(s: str) -> Molecule:
    """Build the graph without any chemistry checks.

    Raises ParseFailure for syntactic or structural problems.
    """
    verdict = validate_syntax(s)
    if not verdict.ok:
        raise ParseFailure(verdict.message or "syntax error")
    try:
        tokens = tokenize(s)
    except LexError as exc:
        raise ParseFailure(str(exc)) from exc

    atoms: list[Atom] = []
    bonds: dict[frozenset[int], Bond] = {}
    prev: int | None = None
    pending: str | None = None
    stack: list[int | None] = []
    open_rings: dict[int, tuple[int, str | None]] = {}

    def add_bond(a: int, b: int, symbol: str | None, ring: bool) -> None:
        if a == b:
            raise ParseFailure("atom bonded to itself")
        key = frozenset((a, b))
        if key in bonds:
            raise ParseFailure(f"duplicate bond between atoms {a} and {b}")
        if symbol is None:
            aromatic = atoms[a].aromatic and atoms[b].aromatic
            order = BondOrder.AROMATIC if aromatic else BondOrder.SINGLE
        else:
            order = _BOND_SYMBOLS[symbol]
        stereo = symbol if symbol in ("/", "\\") else None
        bonds[key] = Bond(a, b, order, ring_closure=ring, implicit=symbol is None, stereo=stereo)

    for tok in tokens:
        kind = tok.kind
        if kind in (TokenKind.ORGANIC_ATOM, TokenKind.BRACKET_ATOM):
            idx = len(atoms)
            if kind is TokenKind.ORGANIC_ATOM:
                atoms.append(_organic_atom(tok.text, idx))
            else:
                atoms.append(_bracket_atom(tok.text, idx))
            if prev is not None:
                add_bond(prev, idx, pending, ring=False)
            elif pending is not None:
                raise ParseFailure(f"bond symbol with no preceding atom at position {tok.position}")
            pending = None
            prev = idx
        elif kind is TokenKind.BOND:
            if pending is not None:
                raise ParseFailure(f"consecutive bond symbols at position {tok.position}")
            if prev is None:
                raise ParseFailure(f"bond symbol with no preceding atom at position {tok.position}")
            pending = tok.text
        elif kind is TokenKind.RING_CLOSURE:
            if prev is None:
                raise ParseFailure(f"ring closure with no preceding atom at position {tok.position}")
            label = tok.ring_label
            if label in open_rings:
                start, sym = open_rings.pop(label)
                if sym is not None and pending is not None and sym != pending:
                    raise ParseFailure(f"ring closure {label} has conflicting bond orders")
                add_bond(start, prev, pending if pending is not None else sym, ring=True)
            else:
                open_rings[label] = (prev, pending)
            pending = None
        elif kind is TokenKind.BRANCH_OPEN:
            if prev is None:
                raise ParseFailure(f"branch with no preceding atom at position {tok.position}")
            if pending is not None:
                raise ParseFailure(f"bond symbol before branch at position {tok.position}")
            stack.append(prev)
        elif kind is TokenKind.BRANCH_CLOSE:
            if pending is not None:
                raise ParseFailure(f"bond symbol with no following atom at position {tok.position}")
            if not stack:
                raise ParseFailure("unbalanced parentheses")
            prev = stack.pop()
        elif kind is TokenKind.DOT:
            if pending is not None:
                raise ParseFailure(f"bond symbol with no following atom at position {tok.position}")
            if stack:
                raise ParseFailure("'.' inside a branch")
            prev = None

    if pending is not None:
        raise ParseFailure("bond symbol with no following atom")
    if open_rings:
        raise ParseFailure("unmatched ring closure")
    if not atoms:
        raise ParseFailure("no atoms")

    bond_list = list(bonds.values())
    # ':' marks both ends aromatic
    flagged = set()
    for b in bond_list:
        if b.order is BondOrder.AROMATIC and not b.implicit:
            flagged.update((b.a, b.b))
    for i in flagged:
        atom = atoms[i]
        if not atom.aromatic:
            if atom.element not in AROMATIC_ELEMENTS:
                raise ParseFailure(f"aromatic bond to non-aromatic element at atom {i}")
            atoms[i] = replace(atom, aromatic=True)

    mol = Molecule(tuple(atoms), tuple(bond_list))
    return Molecule(mol.atoms, mol.bonds, find_sssr(mol))


def parse_to_mol(s: str) -> Molecule:
    """Parse a SMILES string into a molecular graph (no valence checking).

    >>> m = parse_to_mol("C1CC1")
    >>> len(m.atoms), len(m.bonds), len(m.rings)
    (3, 3, 1)
    """
    return parse_graph(s)
