"""Digraph instance model, walks, transitive closure and the solution verifier.

An instance is a simple digraph (no self-loops, no repeated arcs; antiparallel
pairs allowed) with two vertex weightings: a facility flag F and a plough
count B.  A solution is a list of directed walks, one per plough, whose
cleared arcs must connect all facilities in the underlying graph.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field


class ParseError(ValueError):
    """Malformed instance or walk text; carries a 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Instance:
    """Digraph with facility flags and per-vertex plough counts.

    Immutable; derived adjacency is precomputed.  Plough counts are capped
    at n-1 per vertex (more ploughs at one vertex can never help).
    """

    n: int
    arcs: frozenset[tuple[int, int]]
    facility: tuple[bool, ...]
    ploughs: tuple[int, ...]
    out_adj: tuple[tuple[int, ...], ...] = field(init=False, compare=False, repr=False)
    in_adj: tuple[tuple[int, ...], ...] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("instance needs at least one vertex")
        if len(self.facility) != self.n or len(self.ploughs) != self.n:
            raise ValueError("facility/plough vectors must have length n")
        for u, v in self.arcs:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"arc ({u},{v}) out of range")
            if u == v:
                raise ValueError(f"self-loop ({u},{v})")
        for v, b in enumerate(self.ploughs):
            if b < 0:
                raise ValueError(f"negative plough count at {v}")
            if b > self.n - 1:
                raise ValueError(f"plough count {b} at {v} exceeds n-1")
        outs: list[list[int]] = [[] for _ in range(self.n)]
        ins: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in sorted(self.arcs):
            outs[u].append(v)
            ins[v].append(u)
        object.__setattr__(self, "out_adj", tuple(tuple(x) for x in outs))
        object.__setattr__(self, "in_adj", tuple(tuple(sorted(x)) for x in ins))

    def facilities(self) -> frozenset[int]:
        return frozenset(v for v in range(self.n) if self.facility[v])

    def bases(self) -> frozenset[int]:
        return frozenset(v for v in range(self.n) if self.ploughs[v] > 0)

    def total_ploughs(self) -> int:
        return sum(self.ploughs)

    def has_arc(self, u: int, v: int) -> bool:
        return (u, v) in self.arcs


def make_instance(n, arcs, facilities, ploughs) -> Instance:
    """Convenience constructor from any iterables / facility set / plough map."""
    fac = tuple(v in set(facilities) for v in range(n))
    if isinstance(ploughs, dict):
        pl = tuple(ploughs.get(v, 0) for v in range(n))
    else:
        pl = tuple(ploughs)
    return Instance(n=n, arcs=frozenset(tuple(a) for a in arcs), facility=fac, ploughs=pl)


@dataclass(frozen=True)
class Walk:
    """A plough trajectory: nonempty vertex sequence; length 0 is allowed."""

    vertices: tuple[int, ...]

    def __post_init__(self):
        if len(self.vertices) == 0:
            raise ValueError("walk needs at least one vertex")

    @property
    def start(self) -> int:
        return self.vertices[0]

    @property
    def end(self) -> int:
        return self.vertices[-1]

    @property
    def length(self) -> int:
        return len(self.vertices) - 1

    def arcs(self) -> list[tuple[int, int]]:
        vs = self.vertices
        return [(vs[i], vs[i + 1]) for i in range(len(vs) - 1)]


@dataclass(frozen=True)
class SolutionWalks:
    """A candidate solution: one walk per plough."""

    walks: tuple[Walk, ...]

    def start_counts(self) -> Counter:
        return Counter(w.start for w in self.walks)

    def arc_union(self) -> set[tuple[int, int]]:
        cleared: set[tuple[int, int]] = set()
        for w in self.walks:
            cleared.update(w.arcs())
        return cleared


def walks_from_lists(seqs) -> SolutionWalks:
    return SolutionWalks(tuple(Walk(tuple(s)) for s in seqs))


# ---------------------------------------------------------------------------
# text formats

def _content_lines(text) -> list[tuple[int, str]]:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    out = []
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((i, line))
    return out


def parse_instance(text) -> Instance:
    """Parse the line-oriented instance format.

    Layout: ``st <n> <m>``, then n lines ``v <id> <F> <B>`` with ids 0..n-1
    in order, then m lines ``a <u> <v>``.  ``#`` starts a comment.
    """
    lines = _content_lines(text)
    if not lines:
        raise ParseError(1, "empty instance text")
    ln, head = lines[0]
    parts = head.split()
    if len(parts) != 3 or parts[0] != "st":
        raise ParseError(ln, f"expected header 'st <n> <m>', got {head!r}")
    try:
        n, m = int(parts[1]), int(parts[2])
    except ValueError:
        raise ParseError(ln, "header counts must be integers") from None
    if n < 1 or m < 0:
        raise ParseError(ln, f"bad header counts n={n} m={m}")
    if len(lines) != 1 + n + m:
        raise ParseError(ln, f"expected {1 + n + m} content lines, found {len(lines)}")

    facility = []
    ploughs = []
    for idx in range(n):
        ln, line = lines[1 + idx]
        parts = line.split()
        if len(parts) != 4 or parts[0] != "v":
            raise ParseError(ln, f"expected 'v <id> <F> <B>', got {line!r}")
        try:
            vid, f, b = int(parts[1]), int(parts[2]), int(parts[3])
        except ValueError:
            raise ParseError(ln, "vertex fields must be integers") from None
        if vid != idx:
            raise ParseError(ln, f"vertex ids must appear in order; expected {idx}, got {vid}")
        if f not in (0, 1):
            raise ParseError(ln, f"facility flag must be 0 or 1, got {f}")
        if b < 0:
            raise ParseError(ln, f"plough count must be nonnegative, got {b}")
        if b >= n:
            raise ParseError(ln, f"plough count {b} at vertex {vid} must be at most n-1={n - 1}")
        facility.append(bool(f))
        ploughs.append(b)

    arcs: set[tuple[int, int]] = set()
    for idx in range(m):
        ln, line = lines[1 + n + idx]
        parts = line.split()
        if len(parts) != 3 or parts[0] != "a":
            raise ParseError(ln, f"expected 'a <u> <v>', got {line!r}")
        try:
            u, v = int(parts[1]), int(parts[2])
        except ValueError:
            raise ParseError(ln, "arc endpoints must be integers") from None
        if not (0 <= u < n and 0 <= v < n):
            raise ParseError(ln, f"arc ({u},{v}) references an unknown vertex")
        if u == v:
            raise ParseError(ln, f"self-loop ({u},{u}) is not allowed")
        if (u, v) in arcs:
            raise ParseError(ln, f"duplicate arc ({u},{v})")
        arcs.add((u, v))

    return Instance(n=n, arcs=frozenset(arcs), facility=tuple(facility), ploughs=tuple(ploughs))


def serialize_instance(inst: Instance) -> str:
    """Canonical text for an instance; round-trips through parse_instance."""
    out = [f"st {inst.n} {len(inst.arcs)}"]
    for v in range(inst.n):
        out.append(f"v {v} {int(inst.facility[v])} {inst.ploughs[v]}")
    for u, v in sorted(inst.arcs):
        out.append(f"a {u} {v}")
    return "\n".join(out) + "\n"


def parse_walks(text) -> SolutionWalks:
    """One walk per line as space-separated vertex ids; empty file = no walks."""
    walks = []
    for ln, line in _content_lines(text):
        try:
            vs = tuple(int(x) for x in line.split())
        except ValueError:
            raise ParseError(ln, f"walk entries must be integers: {line!r}") from None
        walks.append(Walk(vs))
    return SolutionWalks(tuple(walks))


def serialize_walks(sol: SolutionWalks) -> str:
    return "".join(" ".join(str(v) for v in w.vertices) + "\n" for w in sol.walks)


# ---------------------------------------------------------------------------
# graph operations

def transitive_closure(inst: Instance) -> Instance:
    """Digraph with an arc (u,v) whenever a nonempty directed path u->v exists.

    Self-loops are excluded even for vertices on cycles; F and B carry over.
    """
    arcs: set[tuple[int, int]] = set()
    for s in range(inst.n):
        seen = set()
        stack = list(inst.out_adj[s])
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            stack.extend(inst.out_adj[v])
        arcs.update((s, t) for t in seen if t != s)
    return Instance(n=inst.n, arcs=frozenset(arcs), facility=inst.facility, ploughs=inst.ploughs)


def sources(inst: Instance) -> frozenset[int]:
    """Vertices with in-degree zero."""
    return frozenset(v for v in range(inst.n) if not inst.in_adj[v])


def facilities_connected(inst: Instance, cleared) -> bool:
    """True iff all facilities lie in one component of the cleared subgraph.

    The cleared subgraph is the undirected graph on the endpoints of the
    cleared arcs.  A facility incident to no cleared arc fails the check
    unless there are fewer than two facilities (then the condition is
    vacuous and the answer is True).
    """
    cleared = set(cleared)
    for a in cleared:
        if tuple(a) not in inst.arcs:
            raise ValueError(f"cleared set contains a non-arc {a}")
    fac = inst.facilities()
    if len(fac) <= 1:
        return True
    adj: dict[int, set[int]] = {}
    for u, v in cleared:
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    start = next(iter(fac))
    if start not in adj:
        return False
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return fac <= seen


def walk_is_valid(inst: Instance, w: Walk) -> bool:
    return all(a in inst.arcs for a in w.arcs())


def verify_st_solution(inst: Instance, sol: SolutionWalks) -> tuple[bool, str]:
    """Check a solution; returns (ok, reason).

    Requires exactly one walk per plough, the start multiset to match B,
    every walk to follow arcs of the instance, and the cleared arcs to
    connect all facilities.
    """
    kb = inst.total_ploughs()
    if len(sol.walks) != kb:
        return False, f"expected {kb} walks, got {len(sol.walks)}"
    starts = sol.start_counts()
    for v in range(inst.n):
        if starts.get(v, 0) != inst.ploughs[v]:
            return False, f"{starts.get(v, 0)} walks start at {v} but B({v})={inst.ploughs[v]}"
    for i, w in enumerate(sol.walks):
        if any(not (0 <= x < inst.n) for x in w.vertices):
            return False, f"walk {i} uses an unknown vertex"
        if not walk_is_valid(inst, w):
            return False, f"walk {i} uses a missing arc"
    if not facilities_connected(inst, sol.arc_union()):
        return False, "facilities are not connected by the cleared arcs"
    return True, "ok"
