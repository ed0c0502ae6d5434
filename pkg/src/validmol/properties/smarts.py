"""Tree-shaped SMARTS subset, enough for atom-typing tables.

Supported: bracket atoms with element symbols (aliphatic/aromatic),
``#n``, ``H<n>``, ``X<n>``, charges (``+``, ``-2``, ``+0``), ``A``, ``a``,
negation ``!``, high-precedence AND by juxtaposition or ``&``, OR ``,``
and low-precedence AND ``;``. Bare atoms from the organic subset plus
``a``/``A``. Bonds ``-``, ``=``, ``#``, ``:``, and the default (single or
aromatic). Branches with parentheses. Ring closures are not supported.
"""

from __future__ import annotations

import re
from collections.abc import Callable
from dataclasses import dataclass

from validmol.smiles.elements import SYMBOL_TO_Z
from validmol.smiles.types import BondOrder, Molecule


@dataclass(frozen=True)
class AtomView:
    """What an atom primitive may inspect."""

    z: int
    aromatic: bool
    charge: int
    h: int  # total hydrogens, explicit neighbours included
    x: int  # total connections, hydrogens included


AtomPred = Callable[[AtomView], bool]


class HGraph:
    """Molecule with every hydrogen materialised as a node."""

    def __init__(self, mol: Molecule):
        n = len(mol.atoms)
        z = [a.element for a in mol.atoms]
        arom = [a.aromatic for a in mol.atoms]
        charge = [a.charge for a in mol.atoms]
        adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for b in mol.bonds:
            order = int(b.order)
            adj[b.a].append((b.b, order))
            adj[b.b].append((b.a, order))
        for i in range(n):
            for _ in range(mol.total_h(i)):
                j = len(z)
                z.append(1)
                arom.append(False)
                charge.append(0)
                adj.append([(i, 1)])
                adj[i].append((j, 1))
        self.heavy_count = n
        self.adj = adj
        self.views = [
            AtomView(
                z[i],
                arom[i],
                charge[i],
                sum(1 for j, _ in adj[i] if z[j] == 1),
                len(adj[i]),
            )
            for i in range(len(z))
        ]

    def __len__(self) -> int:
        return len(self.views)


def _bond_ok(code: str, order: int) -> bool:
    if code == "":
        return order in (BondOrder.SINGLE, BondOrder.AROMATIC)
    return order == {"-": 1, "=": 2, "#": 3, ":": 4}[code]


@dataclass
class PatternAtom:
    pred: AtomPred
    children: list[tuple[str, "PatternAtom"]]


class SmartsError(ValueError):
    pass


_AROMATIC_SYMBOLS = {"c": 6, "n": 7, "o": 8, "s": 16, "p": 15, "b": 5}
_BARE = {"Cl": 17, "Br": 35, "B": 5, "C": 6, "N": 7, "O": 8, "P": 15, "S": 16, "F": 9, "I": 53}


def _elem(z: int, aromatic: bool | None) -> AtomPred:
    if aromatic is None:
        return lambda v: v.z == z
    return lambda v: v.z == z and v.aromatic == aromatic


class _BracketParser:
    """Recursive descent over one bracket body."""

    def __init__(self, text: str):
        self.s = text
        self.i = 0

    def parse(self) -> AtomPred:
        pred = self._low_and()
        if self.i != len(self.s):
            raise SmartsError(f"trailing text in [{self.s}] at {self.i}")
        return pred

    def _peek(self) -> str:
        return self.s[self.i] if self.i < len(self.s) else ""

    def _low_and(self) -> AtomPred:
        parts = [self._or()]
        while self._peek() == ";":
            self.i += 1
            parts.append(self._or())
        return lambda v: all(p(v) for p in parts)

    def _or(self) -> AtomPred:
        parts = [self._high_and()]
        while self._peek() == ",":
            self.i += 1
            parts.append(self._high_and())
        return lambda v: any(p(v) for p in parts)

    def _high_and(self) -> AtomPred:
        parts = [self._unary()]
        while self._peek() and self._peek() not in ",;":
            if self._peek() == "&":
                self.i += 1
            parts.append(self._unary())
        return lambda v: all(p(v) for p in parts)

    def _unary(self) -> AtomPred:
        if self._peek() == "!":
            self.i += 1
            inner = self._unary()
            return lambda v: not inner(v)
        return self._primitive()

    def _number(self, default: int | None) -> int | None:
        m = re.match(r"\d+", self.s[self.i :])
        if not m:
            return default
        self.i += m.end()
        return int(m.group())

    def _primitive(self) -> AtomPred:
        c = self._peek()
        if c == "#":
            self.i += 1
            z = self._number(None)
            if z is None:
                raise SmartsError(f"'#' without number in [{self.s}]")
            return _elem(z, None)
        if c in "+-":
            self.i += 1
            n = self._number(None)
            if n is None:
                # '++' style repeats
                n = 1
                while self._peek() == c:
                    self.i += 1
                    n += 1
            q = n if c == "+" else -n
            return lambda v: v.charge == q
        if c == "H":
            self.i += 1
            n = self._number(1)
            return lambda v: v.h == n
        if c == "X":
            self.i += 1
            n = self._number(1)
            return lambda v: v.x == n
        if c == "A":
            self.i += 1
            return lambda v: not v.aromatic
        if c == "a":
            self.i += 1
            return lambda v: v.aromatic
        two = self.s[self.i : self.i + 2]
        if len(two) == 2 and two[1].islower() and two in SYMBOL_TO_Z:
            self.i += 2
            return _elem(SYMBOL_TO_Z[two], False)
        if c.isupper() and c in SYMBOL_TO_Z:
            self.i += 1
            return _elem(SYMBOL_TO_Z[c], False)
        if c in _AROMATIC_SYMBOLS:
            self.i += 1
            return _elem(_AROMATIC_SYMBOLS[c], True)
        raise SmartsError(f"unsupported primitive {c!r} in [{self.s}]")


def _bare_atom(s: str, i: int) -> tuple[AtomPred, int]:
    two = s[i : i + 2]
    if two in ("Cl", "Br"):
        return _elem(_BARE[two], False), i + 2
    c = s[i]
    if c in _BARE:
        return _elem(_BARE[c], False), i + 1
    if c in _AROMATIC_SYMBOLS:
        return _elem(_AROMATIC_SYMBOLS[c], True), i + 1
    if c == "a":
        return (lambda v: v.aromatic), i + 1
    if c == "A":
        return (lambda v: not v.aromatic), i + 1
    if c == "*":
        return (lambda v: True), i + 1
    raise SmartsError(f"unsupported atom {c!r} at {i} in {s!r}")


def compile_smarts(pattern: str) -> PatternAtom:
    """Compile a tree SMARTS pattern; the first atom is the root."""
    root: PatternAtom | None = None
    stack: list[PatternAtom] = []
    prev: PatternAtom | None = None
    bond = ""
    i = 0
    while i < len(pattern):
        c = pattern[i]
        if c in "-=#:" and root is not None:
            bond = c
            i += 1
            continue
        if c == "(":
            if prev is None:
                raise SmartsError(f"branch before atom in {pattern!r}")
            stack.append(prev)
            i += 1
            continue
        if c == ")":
            if not stack:
                raise SmartsError(f"unbalanced ')' in {pattern!r}")
            prev = stack.pop()
            i += 1
            continue
        if c == "[":
            end = pattern.index("]", i)
            pred = _BracketParser(pattern[i + 1 : end]).parse()
            i = end + 1
        else:
            pred, i = _bare_atom(pattern, i)
        node = PatternAtom(pred, [])
        if prev is None:
            root = node
        else:
            prev.children.append((bond, node))
        bond = ""
        prev = node
    if root is None or stack:
        raise SmartsError(f"malformed pattern {pattern!r}")
    return root


def matches_at(pattern: PatternAtom, g: HGraph, start: int) -> bool:
    """True when ``pattern`` embeds in ``g`` with its root on ``start`` (atoms distinct)."""
    if not pattern.pred(g.views[start]):
        return False
    used = {start}

    def place(items: list[tuple[int, str, PatternAtom]]) -> bool:
        # items: (anchor graph atom, bond code, pattern node) still to map
        if not items:
            return True
        anchor, code, node = items[0]
        rest = items[1:]
        for j, order in g.adj[anchor]:
            if j in used or not _bond_ok(code, order) or not node.pred(g.views[j]):
                continue
            used.add(j)
            if place([(j, c, ch) for c, ch in node.children] + rest):
                return True
            used.discard(j)
        return False

    return place([(start, c, ch) for c, ch in pattern.children])
