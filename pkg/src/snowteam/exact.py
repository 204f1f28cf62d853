"""Brute-force ground-truth solvers for desk-scale instances.

Two engines for the clearing decision:

* A breadth-first search over (plough positions, cleared arcs) states, for
  instances within small explicit limits.  Witness walks are move-count
  minimal.  Ploughs are interchangeable, so positions are kept sorted.

* A sequential engine for acyclic instances of any size within memo limits:
  walk unions are interleaving-independent, so ploughs can be processed one
  at a time, and extending a walk never breaks connectivity, so only
  sink-maximal paths need to be considered.  States collapse to (touched
  vertices, connectivity partition).  This makes the Set-Cover gadgets
  tractable, which the plain BFS state space is not.

Both engines implement the same semantics and are cross-checked in tests.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, replace
from typing import Optional

from .digraph import Instance, SolutionWalks, Walk, facilities_connected, verify_st_solution
from .tpe import TpeInstance


class LimitsExceeded(ValueError):
    pass


@dataclass(frozen=True)
class ExactLimits:
    max_n: int = 8
    max_arcs: int = 14
    max_kb: int = 4
    max_bfs_states: int = 3_000_000
    max_dag_choices: int = 200_000
    max_dag_states: int = 2_000_000


def _is_dag(inst: Instance) -> bool:
    indeg = [len(inst.in_adj[v]) for v in range(inst.n)]
    queue = deque(v for v in range(inst.n) if indeg[v] == 0)
    seen = 0
    while queue:
        v = queue.popleft()
        seen += 1
        for u in inst.out_adj[v]:
            indeg[u] -= 1
            if indeg[u] == 0:
                queue.append(u)
    return seen == inst.n


def _initial_positions(inst: Instance) -> tuple[int, ...]:
    return tuple(sorted(v for v in range(inst.n) for _ in range(inst.ploughs[v])))


def _zero_length_solution(inst: Instance) -> SolutionWalks:
    return SolutionWalks(tuple(Walk((v,)) for v in _initial_positions(inst)))


def _replay_moves(inst: Instance, moves: list[tuple[int, int]]) -> SolutionWalks:
    """Attribute a move sequence to concrete ploughs (first plough at the tail moves)."""
    walks = [[v] for v in _initial_positions(inst)]
    for u, v in moves:
        idx = next(i for i, w in enumerate(walks) if w[-1] == u)
        walks[idx].append(v)
    return SolutionWalks(tuple(Walk(tuple(w)) for w in walks))


def _bfs_st(inst: Instance, limits: ExactLimits) -> tuple[bool, Optional[SolutionWalks]]:
    arc_list = sorted(inst.arcs)
    arc_bit = {a: 1 << i for i, a in enumerate(arc_list)}
    if facilities_connected(inst, set()):
        return True, _zero_length_solution(inst)

    def accepting(cleared_mask: int) -> bool:
        cleared = {arc_list[i] for i in range(len(arc_list)) if (cleared_mask >> i) & 1}
        return facilities_connected(inst, cleared)

    start = (_initial_positions(inst), 0)
    pred: dict = {start: None}
    accept_cache: dict[int, bool] = {0: False}
    queue = deque([start])
    while queue:
        positions, cleared = queue.popleft()
        for i, v in enumerate(positions):
            if i > 0 and positions[i - 1] == v:
                continue  # ploughs at the same vertex are interchangeable
            rest = positions[:i] + positions[i + 1 :]
            for u in inst.out_adj[v]:
                state = (tuple(sorted(rest + (u,))), cleared | arc_bit[(v, u)])
                if state in pred:
                    continue
                pred[state] = ((positions, cleared), v, u)
                if len(pred) > limits.max_bfs_states:
                    raise LimitsExceeded("BFS state budget exhausted")
                mask = state[1]
                hit = accept_cache.get(mask)
                if hit is None:
                    hit = accept_cache.setdefault(mask, accepting(mask))
                if hit:
                    moves: list[tuple[int, int]] = []
                    cur = state
                    while pred[cur] is not None:
                        prev, mv_from, mv_to = pred[cur]
                        moves.append((mv_from, mv_to))
                        cur = prev
                    moves.reverse()
                    return True, _replay_moves(inst, moves)
                queue.append(state)
    return False, None


def _maximal_paths(inst: Instance, start: int, cap: int) -> list[tuple[int, ...]]:
    """All paths from start that end at an out-degree-0 vertex (DAG hosts only)."""
    out: list[tuple[int, ...]] = []
    stack = [(start,)]
    while stack:
        path = stack.pop()
        nexts = inst.out_adj[path[-1]]
        if not nexts:
            out.append(path)
            if len(out) > cap:
                raise LimitsExceeded("too many maximal paths per plough")
            continue
        for u in nexts:
            stack.append(path + (u,))
    return out


def _reach_set(inst: Instance, start: int) -> frozenset[int]:
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for u in inst.out_adj[v]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return frozenset(seen)


class _UnionFind:
    def __init__(self):
        self.parent: dict[int, int] = {}

    def add(self, x):
        if x not in self.parent:
            self.parent[x] = x

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b):
        self.add(a)
        self.add(b)
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def _dag_st(inst: Instance, limits: ExactLimits) -> tuple[bool, Optional[SolutionWalks]]:
    fac = inst.facilities()
    if len(fac) <= 1:
        return True, _zero_length_solution(inst)
    starts = list(_initial_positions(inst))
    total_choices = 0
    choices: list[list[tuple[int, ...]]] = []
    for s in starts:
        paths = _maximal_paths(inst, s, limits.max_dag_choices)
        total_choices += len(paths)
        if total_choices > limits.max_dag_choices:
            raise LimitsExceeded("too many maximal paths overall")
        choices.append(paths)
    reach = [_reach_set(inst, s) for s in starts]
    suffix_blobs: list[list[frozenset[int]]] = [[] for _ in range(len(starts) + 1)]
    for i in range(len(starts) - 1, -1, -1):
        suffix_blobs[i] = suffix_blobs[i + 1] + [reach[i]]

    failed: set = set()

    def state_key(touched: frozenset, comp: dict[int, int]):
        return (tuple(sorted(touched)), tuple(comp[v] for v in sorted(touched)))

    def canonical_components(uf: _UnionFind, touched) -> dict[int, int]:
        root_min: dict[int, int] = {}
        for v in sorted(touched):
            r = uf.find(v)
            root_min.setdefault(r, v)
        return {v: root_min[uf.find(v)] for v in touched}

    def mergeable(touched, comp, i) -> bool:
        """Optimistic check: can remaining ploughs connect all facilities?"""
        uf = _UnionFind()
        for v in touched:
            uf.union(v, comp[v])
        for f in fac:
            uf.add(f)
        for blob in suffix_blobs[i]:
            it = iter(blob)
            first = next(it)
            uf.add(first)
            for v in it:
                uf.union(first, v)
        roots = {uf.find(f) for f in fac}
        return len(roots) == 1

    def accepts(touched, comp) -> bool:
        if not fac <= touched:
            return False
        return len({comp[f] for f in fac}) == 1

    def recurse(i: int, touched: frozenset, comp: dict[int, int]) -> Optional[list]:
        if accepts(touched, comp):
            return []
        if i == len(starts):
            return None
        key = (i, state_key(touched, comp))
        if key in failed:
            return None
        if not mergeable(touched, comp, i):
            failed.add(key)
            return None
        ranked = sorted(
            choices[i], key=lambda p: -len((set(p) - touched) & fac) if len(p) > 1 else 0
        )
        for path in ranked:
            if len(path) == 1:
                n_touched, n_comp = touched, comp
            else:
                uf = _UnionFind()
                for v in touched:
                    uf.union(v, comp[v])
                for v in path:
                    uf.add(v)
                for a, b in zip(path, path[1:]):
                    uf.union(a, b)
                n_touched = touched | set(path)
                n_comp = canonical_components(uf, n_touched)
            rest = recurse(i + 1, n_touched, n_comp)
            if rest is not None:
                return [path] + rest
        failed.add(key)
        if len(failed) > limits.max_dag_states:
            raise LimitsExceeded("sequential-engine memo budget exhausted")
        return None

    chosen = recurse(0, frozenset(), {})
    if chosen is None:
        return False, None
    # ploughs that were not needed keep zero-length walks
    walks = [Walk(p) for p in chosen] + [Walk((s,)) for s in starts[len(chosen) :]]
    return True, SolutionWalks(tuple(walks))


def solve_st_exact(
    inst: Instance, limits: Optional[ExactLimits] = None
) -> tuple[bool, Optional[SolutionWalks]]:
    """Ground-truth clearing decision with a verifying witness on YES."""
    limits = limits or ExactLimits()
    small = (
        inst.n <= limits.max_n
        and len(inst.arcs) <= limits.max_arcs
        and inst.total_ploughs() <= limits.max_kb
    )
    if small:
        ans, witness = _bfs_st(inst, limits)
    elif _is_dag(inst):
        ans, witness = _dag_st(inst, limits)
    else:
        raise LimitsExceeded(
            f"instance (n={inst.n}, m={len(inst.arcs)}, k_B={inst.total_ploughs()}) "
            "exceeds the exact-search limits and is not acyclic"
        )
    if ans:
        ok, reason = verify_st_solution(inst, witness)
        assert ok, f"exact witness failed verification: {reason}"
    return ans, witness


def solve_tpe_exact(inst: TpeInstance) -> Optional[dict[int, int]]:
    """Brute force over injective maps; returns an embedding or None."""
    host, tree = inst.host, inst.tree
    if host.n > 8 or tree.order > 5:
        raise LimitsExceeded("exact embedding search limits: n <= 8, order <= 5")
    if tree.order > host.n:
        return None
    verts = range(host.n)
    for image in itertools.permutations(verts, tree.order):
        if any(tree.demand[v] > host.ploughs[image[v]] for v in range(tree.order)):
            continue
        if not inst.terminals <= set(image):
            continue
        if all((image[u], image[v]) in host.arcs for u, v in tree.arcs):
            return {v: image[v] for v in range(tree.order)}
    return None


def _stu_bfs(inst: Instance, k: int, limits: ExactLimits) -> bool:
    """STU semantics: k free-start ploughs; a plough's first move is a placement."""
    if len(inst.facilities()) <= 1:
        return True
    if k <= 0:
        return False
    arc_list = sorted(inst.arcs)
    arc_bit = {a: 1 << i for i, a in enumerate(arc_list)}

    def accepting(mask: int) -> bool:
        cleared = {arc_list[i] for i in range(len(arc_list)) if (mask >> i) & 1}
        return facilities_connected(inst, cleared)

    start = ((), k, 0)  # placed positions, unplaced count, cleared mask
    seen = {start}
    queue = deque([start])
    accept_cache: dict[int, bool] = {0: False}
    while queue:
        placed, unplaced, cleared = queue.popleft()
        succs = []
        if unplaced:
            succs.extend(
                (tuple(sorted(placed + (v,))), unplaced - 1, cleared) for v in range(inst.n)
            )
        for i, v in enumerate(placed):
            if i > 0 and placed[i - 1] == v:
                continue
            rest = placed[:i] + placed[i + 1 :]
            for u in inst.out_adj[v]:
                succs.append(
                    (tuple(sorted(rest + (u,))), unplaced, cleared | arc_bit[(v, u)])
                )
        for state in succs:
            if state in seen:
                continue
            seen.add(state)
            if len(seen) > limits.max_bfs_states:
                raise LimitsExceeded("STU search state budget exhausted")
            mask = state[2]
            hit = accept_cache.get(mask)
            if hit is None:
                hit = accept_cache.setdefault(mask, accepting(mask))
            if hit:
                return True
            queue.append(state)
    return False


def solve_variant_exact(inst: Instance, variant: str, k: Optional[int] = None,
                        limits: Optional[ExactLimits] = None):
    """Exact optimum for 'min-st' / 'max-st', or the 'stu' decision for k ploughs."""
    limits = limits or ExactLimits()
    if variant == "min-st":
        ranges = [range(b + 1) for b in inst.ploughs]
        best: Optional[int] = None
        for combo in itertools.product(*ranges):
            total = sum(combo)
            if best is not None and total >= best:
                continue
            sub = replace(inst, ploughs=tuple(combo))
            if solve_st_exact(sub, limits)[0]:
                best = total
        return best
    if variant == "max-st":
        fac = sorted(inst.facilities())
        for size in range(len(fac), 1, -1):
            for kept in itertools.combinations(fac, size):
                trimmed = replace(
                    inst, facility=tuple(v in set(kept) for v in range(inst.n))
                )
                if solve_st_exact(trimmed, limits)[0]:
                    return size
        return min(1, len(fac))
    if variant == "stu":
        if k is None or k < 0:
            raise ValueError("stu needs a plough count k >= 0")
        if inst.n > limits.max_n or len(inst.arcs) > limits.max_arcs or k > limits.max_kb:
            raise LimitsExceeded("stu exact limits exceeded")
        return _stu_bfs(inst, k, limits)
    raise ValueError(f"unknown variant {variant!r}")
