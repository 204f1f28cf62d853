"""Candidate directed trees: free-tree enumeration, orientations, plough demand.

Free trees are produced from canonical rooted level sequences (successor
rule on level sequences, constant amortized time) filtered down to one
representative per isomorphism class by a center-rooted canonical form.
Each representative is relabeled into a canonical layout: vertex 0 is the
root, children are ordered by subtree code, ids are assigned in preorder.

A TreeCandidate is an orientation of a free tree together with the plough
demand L(v) = max(0, outdeg(v) - indeg(v)): the number of walks that must
start at v to cover the arcs by arc-disjoint paths.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Optional

MAX_ORDER = 16

#: number of free trees on 1..9 vertices (used as a quick self-check)
FREE_TREE_COUNTS = (1, 1, 1, 2, 3, 6, 11, 23, 47)


@dataclass(frozen=True)
class FreeTree:
    """Unrooted tree in canonical layout; edges are (parent, child) in preorder."""

    order: int
    edges: tuple[tuple[int, int], ...]
    code: tuple[int, ...]  # depth of each vertex in the canonical layout

    def code_str(self) -> str:
        return " ".join(str(d) for d in self.code)


@dataclass(frozen=True)
class TreeCandidate:
    """Directed tree with plough-demand weights."""

    order: int
    arcs: tuple[tuple[int, int], ...]
    demand: tuple[int, ...]
    free_code: tuple[int, ...]
    orientation: tuple[bool, ...]  # per canonical edge: True = parent->child

    def total_demand(self) -> int:
        return sum(self.demand)

    def code_str(self) -> str:
        levels = " ".join(str(d) for d in self.free_code)
        if not self.orientation:
            return levels
        dirs = "".join("d" if down else "u" for down in self.orientation)
        return f"{levels} / {dirs}"


def _rooted_level_sequences(n: int) -> Iterator[list[int]]:
    """All canonical level sequences of rooted trees on n vertices (root level 1)."""
    if n == 1:
        yield [1]
        return
    seq = list(range(1, n + 1))
    while True:
        yield seq[:]
        p = next((i for i in range(n - 1, -1, -1) if seq[i] > 2), -1)
        if p < 0:
            return
        q = next(i for i in range(p - 1, -1, -1) if seq[i] == seq[p] - 1)
        span = p - q
        seq = seq[:p]
        for i in range(p, n):
            seq.append(seq[i - span])


def _levels_to_parents(levels: list[int]) -> list[int]:
    parents = [-1] * len(levels)
    stack = [0]
    for i in range(1, len(levels)):
        while levels[stack[-1]] != levels[i] - 1:
            stack.pop()
        parents[i] = stack[-1]
        stack.append(i)
    return parents


def _adjacency(n: int, edges) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    return adj


def _tree_centers(adj: list[list[int]]) -> list[int]:
    n = len(adj)
    if n <= 2:
        return list(range(n))
    deg = [len(a) for a in adj]
    layer = [v for v in range(n) if deg[v] == 1]
    remaining = n
    while remaining > 2:
        remaining -= len(layer)
        nxt = []
        for v in layer:
            for u in adj[v]:
                deg[u] -= 1
                if deg[u] == 1:
                    nxt.append(u)
            deg[v] = 0
        layer = nxt
    return sorted(layer)


def _subtree_code(adj, v, parent):
    return tuple(sorted((_subtree_code(adj, c, v) for c in adj[v] if c != parent), reverse=True))


def _canonical_free(adj: list[list[int]]) -> tuple[tuple, int]:
    """(canonical code, canonical root) for the free tree given by adjacency."""
    best = None
    for c in _tree_centers(adj):
        code = _subtree_code(adj, c, -1)
        if best is None or code > best[0]:
            best = (code, c)
    return best


def _canonical_layout(adj: list[list[int]], root: int) -> tuple[tuple[int, ...], tuple[tuple[int, int], ...]]:
    """Relabel in preorder with children sorted by subtree code descending."""
    depths: list[int] = []
    edges: list[tuple[int, int]] = []
    counter = [0]

    def visit(v, parent, depth):
        my_id = counter[0]
        counter[0] += 1
        depths.append(depth)
        kids = sorted(
            ((_subtree_code(adj, c, v), c) for c in adj[v] if c != parent), reverse=True
        )
        for _, c in kids:
            edges.append((my_id, None))  # placeholder: child id assigned on visit
            slot = len(edges) - 1
            child_id = counter[0]
            edges[slot] = (my_id, child_id)
            visit(c, v, depth + 1)

    visit(root, -1, 0)
    return tuple(depths), tuple(edges)


@lru_cache(maxsize=None)
def _free_trees_of_order(order: int) -> tuple[FreeTree, ...]:
    seen = set()
    found: list[FreeTree] = []
    for levels in _rooted_level_sequences(order):
        parents = _levels_to_parents(levels)
        edges = [(parents[i], i) for i in range(1, order)]
        adj = _adjacency(order, edges)
        code, root = _canonical_free(adj)
        if code in seen:
            continue
        seen.add(code)
        depths, canon_edges = _canonical_layout(adj, root)
        found.append(FreeTree(order=order, edges=canon_edges, code=depths))
    found.sort(key=lambda t: t.code)
    return tuple(found)


def enumerate_free_trees(order: int) -> Iterator[FreeTree]:
    """One representative per isomorphism class, in canonical code order."""
    if not (1 <= order <= MAX_ORDER):
        raise ValueError(f"order must be in [1, {MAX_ORDER}]")
    yield from _free_trees_of_order(order)


def plough_demand(arcs, order: Optional[int] = None) -> tuple[int, ...]:
    """L(v) = max(0, outdeg(v) - indeg(v)); input must be a directed tree."""
    arcs = [tuple(a) for a in arcs]
    if order is None:
        order = max((max(u, v) for u, v in arcs), default=0) + 1
    if len(arcs) != order - 1:
        raise ValueError("a tree on n vertices has n-1 arcs")
    if len(set(frozenset(a) for a in arcs)) != len(arcs):
        raise ValueError("repeated underlying edge")
    adj = _adjacency(order, arcs)
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for u in adj[v]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    if len(seen) != order:
        raise ValueError("underlying graph is not connected")
    out = [0] * order
    inc = [0] * order
    for u, v in arcs:
        out[u] += 1
        inc[v] += 1
    return tuple(max(0, o - i) for o, i in zip(out, inc))


def _directed_code(adj_dir, v, parent):
    # adj_dir[v] = list of (neighbor, is_outgoing_from_v)
    return tuple(
        sorted(
            ((down, _directed_code(adj_dir, c, v)) for c, down in adj_dir[v] if c != parent),
            reverse=True,
        )
    )


def _directed_canonical(order: int, arcs) -> tuple:
    und = _adjacency(order, arcs)
    adj_dir: list[list[tuple[int, bool]]] = [[] for _ in range(order)]
    for u, v in arcs:
        adj_dir[u].append((v, True))
        adj_dir[v].append((u, False))
    return max(_directed_code(adj_dir, c, -1) for c in _tree_centers(und))


def orient_tree(tree: FreeTree, dedupe: bool = False) -> Iterator[TreeCandidate]:
    """All 2^(order-1) orientations; dedupe collapses directed-isomorphic ones."""
    m = tree.order - 1
    seen = set()
    for mask in range(1 << m):
        arcs = tuple(
            (u, v) if (mask >> i) & 1 else (v, u) for i, (u, v) in enumerate(tree.edges)
        )
        if dedupe:
            key = _directed_canonical(tree.order, arcs)
            if key in seen:
                continue
            seen.add(key)
        demand = plough_demand(arcs, order=tree.order) if m else (0,)
        yield TreeCandidate(
            order=tree.order,
            arcs=arcs,
            demand=demand,
            free_code=tree.code,
            orientation=tuple(bool((mask >> i) & 1) for i in range(m)),
        )


def candidate_from_code(code: str) -> TreeCandidate:
    """Parse a printable candidate code: depth sequence, then '/' and one
    direction character per non-root vertex ('d' = away from parent)."""
    if "/" in code:
        levels_part, dirs = code.split("/", 1)
        dirs = dirs.strip()
    else:
        levels_part, dirs = code, ""
    try:
        levels = [int(x) for x in levels_part.split()]
    except ValueError:
        raise ValueError(f"bad depth sequence in {code!r}") from None
    order = len(levels)
    if order == 0 or levels[0] != 0:
        raise ValueError("depth sequence must start with 0")
    if len(dirs) != order - 1 or any(c not in "du" for c in dirs):
        raise ValueError("need one 'd'/'u' per non-root vertex after '/'")
    parents = [-1] * order
    stack = [0]
    for i in range(1, order):
        if not (1 <= levels[i] <= levels[i - 1] + 1):
            raise ValueError(f"depth jump at position {i} in {code!r}")
        while levels[stack[-1]] != levels[i] - 1:
            stack.pop()
        parents[i] = stack[-1]
        stack.append(i)
    arcs = tuple(
        (parents[i], i) if dirs[i - 1] == "d" else (i, parents[i]) for i in range(1, order)
    )
    demand = plough_demand(arcs, order=order) if order > 1 else (0,)
    return TreeCandidate(
        order=order,
        arcs=arcs,
        demand=demand,
        free_code=tuple(levels),
        orientation=tuple(c == "d" for c in dirs),
    )


def candidate_stream(
    f_count: int,
    max_order: int,
    budget: Optional[int] = None,
    dedupe: bool = True,
) -> Iterator[TreeCandidate]:
    """Candidates with f_count <= order <= max_order, total demand within budget.

    Empty for f_count = 0: callers resolve the at-most-one-facility case
    before enumerating.  Deterministic order: by order, then free-tree code,
    then orientation.
    """
    if f_count <= 0:
        return
    for order in range(f_count, max_order + 1):
        for tree in enumerate_free_trees(order):
            for cand in orient_tree(tree, dedupe=dedupe):
                if budget is not None and cand.total_demand() > budget:
                    continue
                yield cand
