"""Deterministic 2D layout and SVG drawing for sanitized molecules.

Layout is computed on the canonical form, so any spelling of the same
molecule produces the same picture. Ring systems go on regular polygons
(fused rings share an edge, spiro rings share a vertex); everything else is
spread breadth-first around already placed atoms. Congested molecules may
overlap; the SVG title says so when it happens.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from xml.sax.saxutils import escape

from validmol.smiles import Molecule, canonical_smiles, mol_from_smiles

BOND = 1.0
SCALE = 30.0
MARGIN = 18.0
OVERLAP = 0.45  # fraction of a bond length

Point = tuple[float, float]

_COLORS = {7: "#2040c0", 8: "#d02020", 9: "#20a020", 15: "#d07000", 16: "#a0a000", 17: "#20a020", 35: "#a03020", 53: "#8020a0"}


def _sub(a: Point, b: Point) -> Point:
    return (a[0] - b[0], a[1] - b[1])


def _add(a: Point, b: Point) -> Point:
    return (a[0] + b[0], a[1] + b[1])


def _scale(a: Point, k: float) -> Point:
    return (a[0] * k, a[1] * k)


def _norm(a: Point) -> Point:
    d = math.hypot(*a)
    return (1.0, 0.0) if d < 1e-9 else (a[0] / d, a[1] / d)


def _rotate(a: Point, deg: float) -> Point:
    r = math.radians(deg)
    c, s = math.cos(r), math.sin(r)
    return (a[0] * c - a[1] * s, a[0] * s + a[1] * c)


@dataclass(frozen=True)
class Layout:
    coords: tuple[Point, ...]
    overlaps: int


def _ring_systems(mol: Molecule) -> list[list[tuple[int, ...]]]:
    systems: list[list[tuple[int, ...]]] = []
    for ring in mol.rings:
        touching = [s for s in systems if any(set(ring) & set(r) for r in s)]
        merged = [ring]
        for s in touching:
            merged = s + merged
            systems.remove(s)
        systems.append(merged)
    return systems


def _polygon_on_edge(p: Point, q: Point, n: int, away_from: Point) -> list[Point]:
    """Vertices of a regular n-gon with edge p->q, on the side opposite ``away_from``.

    Returned in order starting at q and walking away from p; p itself is last.
    """
    edge = _sub(q, p)
    length = math.hypot(*edge)
    apothem = length / (2 * math.tan(math.pi / n))
    mid = _scale(_add(p, q), 0.5)
    normal = _norm((-edge[1], edge[0]))
    if (normal[0] * (away_from[0] - mid[0]) + normal[1] * (away_from[1] - mid[1])) > 0:
        normal = _scale(normal, -1)
    centre = _add(mid, _scale(normal, apothem))
    radius = length / (2 * math.sin(math.pi / n))
    start = math.atan2(q[1] - centre[1], q[0] - centre[0])
    # direction of travel: the sense that moves q away from p
    sweep = 2 * math.pi / n
    probe = (centre[0] + radius * math.cos(start + sweep), centre[1] + radius * math.sin(start + sweep))
    if math.hypot(*_sub(probe, p)) < 1e-6:
        sweep = -sweep
    return [
        (centre[0] + radius * math.cos(start + k * sweep), centre[1] + radius * math.sin(start + k * sweep))
        for k in range(n)
    ]


def _place_system(
    mol: Molecule, rings: list[tuple[int, ...]], anchor: int, pos: dict[int, Point], outward: Point
) -> None:
    """Place every ring of one system; ``anchor`` is already in ``pos``."""
    pending = list(rings)
    first = next(r for r in pending if anchor in r)
    n = len(first)
    radius = BOND / (2 * math.sin(math.pi / n))
    centre = _add(pos[anchor], _scale(_norm(outward), radius))
    k0 = first.index(anchor)
    base = math.atan2(pos[anchor][1] - centre[1], pos[anchor][0] - centre[0])
    for k in range(n):
        atom = first[(k0 + k) % n]
        ang = base + 2 * math.pi * k / n
        pos[atom] = (centre[0] + radius * math.cos(ang), centre[1] + radius * math.sin(ang))
    pending.remove(first)
    while pending:
        ring = max(pending, key=lambda r: (sum(a in pos for a in r), -len(r), tuple(-a for a in r)))
        pending.remove(ring)
        n = len(ring)
        placed = [a in pos for a in ring]
        if all(placed):
            continue
        # find the longest cyclic run of placed atoms
        best: tuple[int, int] | None = None
        for s in range(n):
            if placed[s] and not placed[s - 1]:
                length = 0
                while placed[(s + length) % n]:
                    length += 1
                if best is None or length > best[1]:
                    best = (s, length)
        assert best is not None
        s, length = best
        if length == 1:
            # spiro: new ring hangs off the shared atom, away from its neighbours
            atom = ring[s]
            nbrs = [pos[b] for b, _ in mol.neighbors(atom) if b in pos]
            away = _norm(_sub(pos[atom], _scale(_reduce_add(nbrs), 1 / len(nbrs))))
            radius = BOND / (2 * math.sin(math.pi / n))
            centre = _add(pos[atom], _scale(away, radius))
            base = math.atan2(pos[atom][1] - centre[1], pos[atom][0] - centre[0])
            for k in range(1, n):
                a = ring[(s + k) % n]
                ang = base + 2 * math.pi * k / n
                pos.setdefault(a, (centre[0] + radius * math.cos(ang), centre[1] + radius * math.sin(ang)))
            continue
        p_atom = ring[s]
        q_atom = ring[(s + length - 1) % n]
        free = n - length
        # regular polygon over the run's end points, on the side away from
        # the atoms already crowding those end points
        crowd = [pos[x] for e in (p_atom, q_atom) for x, _ in mol.neighbors(e) if x in pos and x not in (p_atom, q_atom)]
        hint = _scale(_reduce_add(crowd), 1 / len(crowd)) if crowd else (0.0, 0.0)
        verts = _polygon_on_edge(pos[p_atom], pos[q_atom], free + 2, hint)
        for k in range(1, free + 1):
            a = ring[(s + length - 1 + k) % n]
            pos.setdefault(a, verts[k])


def _spread(k: int, anchored: int) -> list[float]:
    """Angular offsets for ``k`` new branches around the outward direction."""
    if k == 0:
        return []
    if anchored == 0:
        return [360.0 * i / k for i in range(k)]
    if k == 1:
        return [0.0]
    width = {2: 60.0, 3: 90.0}.get(k, 120.0 * (k - 1) / k) if anchored == 1 else 30.0 * (k - 1)
    return [-width + 2 * width * i / (k - 1) for i in range(k)]


def compute_layout(mol: Molecule) -> Layout:
    """Coordinates in bond-length units for ``mol`` in its own atom order."""
    n = len(mol.atoms)
    pos: dict[int, Point] = {}
    systems = _ring_systems(mol)
    system_of = {a: idx for idx, s in enumerate(systems) for r in s for a in r}
    done_systems: set[int] = set()
    turn: dict[int, float] = {}
    offset_x = 0.0
    for root in range(n):
        if root in pos:
            continue
        pos[root] = (offset_x, 0.0)
        queue = deque([root])
        component = [root]
        while queue:
            a = queue.popleft()
            if a in system_of and system_of[a] not in done_systems:
                sys_idx = system_of[a]
                placed_nbrs = [pos[b] for b, _ in mol.neighbors(a) if b in pos and system_of.get(b) != sys_idx]
                out = _norm(_sub(pos[a], placed_nbrs[0])) if placed_nbrs else (1.0, 0.0)
                _place_system(mol, systems[sys_idx], a, pos, out)
                done_systems.add(sys_idx)
                members = sorted({x for r in systems[sys_idx] for x in r} - {a})
                component.extend(members)
                queue.extend(members)
            new = [b for b, _ in sorted(mol.neighbors(a)) if b not in pos]
            if not new:
                continue
            anchored = [pos[b] for b, _ in mol.neighbors(a) if b in pos]
            if anchored:
                out = _norm(_sub(pos[a], _scale(_reduce_add(anchored), 1 / len(anchored))))
            else:
                out = (1.0, 0.0)
            offsets = _spread(len(new), len(anchored))
            if len(new) == 1 and len(anchored) == 1:
                bond = mol.bond_between(a, new[0])
                prev = mol.bond_between(a, next(b for b, _ in mol.neighbors(a) if b in pos))
                linear = any(x is not None and x.valence_order == 3 for x in (bond, prev)) or (
                    bond is not None and prev is not None and bond.valence_order == 2 and prev.valence_order == 2
                )
                if not linear:
                    sign = -turn.get(a, 1.0)
                    offsets = [60.0 * sign]
                    turn[new[0]] = sign
            for b, off in zip(new, offsets):
                pos[b] = _add(pos[a], _scale(_rotate(out, off), BOND))
                turn.setdefault(b, 1.0)
                component.append(b)
                queue.append(b)
        offset_x = max(pos[i][0] for i in component) + 2 * BOND
    coords = tuple(pos[i] for i in range(n))
    bonded = {(min(b.a, b.b), max(b.a, b.b)) for b in mol.bonds}
    overlaps = sum(
        1
        for i in range(n)
        for j in range(i + 1, n)
        if (i, j) not in bonded and math.hypot(*_sub(coords[i], coords[j])) < OVERLAP * BOND
    )
    return Layout(coords, overlaps)


def _reduce_add(points: list[Point]) -> Point:
    return (sum(p[0] for p in points), sum(p[1] for p in points))


def _label(mol: Molecule, i: int) -> str | None:
    atom = mol.atoms[i]
    sym = atom.element_symbol
    if sym.islower():
        sym = sym.capitalize()
    if atom.element == 6 and not atom.charge and not atom.isotope and mol.degree(i) > 0:
        return None
    h = mol.total_h(i)
    text = (str(atom.isotope) if atom.isotope else "") + sym
    if h:
        text += "H" + (str(h) if h > 1 else "")
    if atom.charge:
        mag = abs(atom.charge)
        text += ("" if mag == 1 else str(mag)) + ("+" if atom.charge > 0 else "−")
    return text


def _f(x: float) -> str:
    s = f"{x:.2f}"
    return "0.00" if s == "-0.00" else s


def depict_molecule(mol: Molecule, title: str | None = None) -> str:
    """Inline SVG for a sanitized molecule; identical molecules give identical bytes."""
    canonical = canonical_smiles(mol)
    mol = mol_from_smiles(canonical)
    layout = compute_layout(mol)
    xs = [x for x, _ in layout.coords]
    ys = [y for _, y in layout.coords]
    min_x, min_y = min(xs), min(ys)
    width = (max(xs) - min_x) * SCALE + 2 * MARGIN
    height = (max(ys) - min_y) * SCALE + 2 * MARGIN

    def px(i: int) -> Point:
        x, y = layout.coords[i]
        # flip y so the picture is not mirrored relative to the math frame
        return ((x - min_x) * SCALE + MARGIN, height - ((y - min_y) * SCALE + MARGIN))

    labels = [_label(mol, i) for i in range(len(mol.atoms))]
    ring_centres = _ring_centres(mol, px)
    note = title or canonical
    if layout.overlaps:
        note += f" (layout has {layout.overlaps} overlapping atom pair(s))"
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" class="molecule" width="{_f(width)}" height="{_f(height)}" '
        f'viewBox="0 0 {_f(width)} {_f(height)}">',
        f"<title>{escape(note)}</title>",
        '<g stroke="#000000" stroke-width="1.4" stroke-linecap="round">',
    ]
    for k, bond in enumerate(mol.bonds):
        a, b = px(bond.a), px(bond.b)
        a = _trim(a, b, labels[bond.a] is not None)
        b = _trim(b, a, labels[bond.b] is not None)
        order = bond.valence_order
        if order == 1:
            parts.append(_line(a, b))
            continue
        d = _norm(_sub(b, a))
        normal = (-d[1], d[0])
        if order == 2 and k in ring_centres:
            # ring double bond: main line plus a shorter inner line
            c = ring_centres[k]
            mid = _scale(_add(a, b), 0.5)
            if normal[0] * (c[0] - mid[0]) + normal[1] * (c[1] - mid[1]) < 0:
                normal = _scale(normal, -1)
            inner_a = _add(_add(a, _scale(normal, 4.0)), _scale(d, 4.0))
            inner_b = _sub(_add(b, _scale(normal, 4.0)), _scale(d, 4.0))
            parts.append(_line(a, b))
            parts.append(_line(inner_a, inner_b))
            continue
        offsets = (-2.5, 2.5) if order == 2 else (-4.0, 0.0, 4.0)
        for off in offsets:
            parts.append(_line(_add(a, _scale(normal, off)), _add(b, _scale(normal, off))))
    parts.append("</g>")
    for i, text in enumerate(labels):
        if text is None:
            continue
        x, y = px(i)
        color = _COLORS.get(mol.atoms[i].element, "#000000")
        parts.append(
            f'<text x="{_f(x)}" y="{_f(y + 4.5)}" font-family="sans-serif" font-size="13" '
            f'text-anchor="middle" fill="{color}">{escape(text)}</text>'
        )
    parts.append("</svg>")
    return "".join(parts)


def _ring_centres(mol: Molecule, px) -> dict[int, Point]:
    """Bond index -> centre of the smallest ring holding it."""
    out: dict[int, Point] = {}
    for ring in sorted(mol.rings, key=len, reverse=True):
        pts = [px(a) for a in ring]
        centre = _scale(_reduce_add(pts), 1 / len(pts))
        for x, y in zip(ring, ring[1:] + ring[:1]):
            k = mol.bond_index(x, y)
            if k is not None:
                out[k] = centre
    return out


def _trim(a: Point, b: Point, labelled: bool) -> Point:
    if not labelled:
        return a
    return _add(a, _scale(_norm(_sub(b, a)), 7.0))


def _line(a: Point, b: Point) -> str:
    return f'<line x1="{_f(a[0])}" y1="{_f(a[1])}" x2="{_f(b[0])}" y2="{_f(b[1])}"/>'
