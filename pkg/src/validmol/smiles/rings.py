"""Smallest set of smallest rings via Horton candidate cycles + GF(2) elimination."""

from __future__ import annotations

from collections import deque
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from validmol.smiles.types import Molecule


def _bfs_parents(adj: list[list[int]], root: int) -> tuple[dict[int, int], dict[int, int]]:
    dist = {root: 0}
    parent: dict[int, int] = {}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in adj[u]:  # adjacency lists are sorted: lowest index wins ties
            if v not in dist:
                dist[v] = dist[u] + 1
                parent[v] = u
                queue.append(v)
    return dist, parent


def _path(parent: dict[int, int], root: int, target: int) -> list[int]:
    out = [target]
    while out[-1] != root:
        out.append(parent[out[-1]])
    out.reverse()
    return out


def _orient(cycle: list[int]) -> tuple[int, ...]:
    k = cycle.index(min(cycle))
    rot = cycle[k:] + cycle[:k]
    if len(rot) > 2 and rot[-1] < rot[1]:
        rot = [rot[0]] + rot[1:][::-1]
    return tuple(rot)


def find_sssr(mol: "Molecule") -> tuple[tuple[int, ...], ...]:
    """Return ring atom cycles, smallest first, ties broken on sorted atom indices.

    Each ring starts at its lowest atom index and walks toward the lower of
    that atom's two ring neighbours.
    """
    n = len(mol.atoms)
    edges = [(min(b.a, b.b), max(b.a, b.b)) for b in mol.bonds]
    if not edges:
        return ()
    edge_id = {e: k for k, e in enumerate(edges)}
    adj: list[list[int]] = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    for lst in adj:
        lst.sort()

    # cyclomatic number per connected component
    seen = [False] * n
    components = 0
    for s in range(n):
        if not seen[s]:
            components += 1
            stack = [s]
            seen[s] = True
            while stack:
                u = stack.pop()
                for v in adj[u]:
                    if not seen[v]:
                        seen[v] = True
                        stack.append(v)
    nrings = len(edges) - n + components
    if nrings <= 0:
        return ()

    # only atoms on some cycle can root a candidate; prune tree-like atoms first
    deg = [len(a) for a in adj]
    alive = [True] * n
    queue = deque(i for i in range(n) if deg[i] <= 1)
    while queue:
        u = queue.popleft()
        if not alive[u]:
            continue
        alive[u] = False
        for v in adj[u]:
            if alive[v]:
                deg[v] -= 1
                if deg[v] == 1:
                    queue.append(v)

    candidates: dict[int, tuple[int, ...]] = {}
    for root in range(n):
        if not alive[root]:
            continue
        dist, parent = _bfs_parents(adj, root)
        for x, y in edges:
            if not (alive[x] and alive[y]) or x not in dist or y not in dist:
                continue
            if abs(dist[x] - dist[y]) > 1:
                continue
            px = _path(parent, root, x)
            py = _path(parent, root, y)
            if set(px) & set(py) != {root}:
                continue
            cycle = px + py[1:][::-1]
            if len(cycle) < 3:
                continue
            mask = 0
            for u, v in zip(cycle, cycle[1:] + cycle[:1]):
                mask |= 1 << edge_id[(min(u, v), max(u, v))]
            if mask not in candidates:
                candidates[mask] = _orient(cycle)

    ordered = sorted(candidates.items(), key=lambda kv: (len(kv[1]), sorted(kv[1]), kv[1]))
    basis: dict[int, int] = {}  # pivot bit -> reduced vector
    chosen: list[tuple[int, ...]] = []
    for mask, cycle in ordered:
        v = mask
        while v:
            pivot = v.bit_length() - 1
            if pivot in basis:
                v ^= basis[pivot]
            else:
                basis[pivot] = v
                chosen.append(cycle)
                break
        if len(chosen) == nrings:
            break
    return tuple(chosen)
