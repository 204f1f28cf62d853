"""Set-Cover reduction gadget: builder, walk translations, hard families.

The gadget digraph for a set system (U, S, k) has, per item i, one element
component made of vertical 5-vertex paths (one per set containing i), plus a
hub z fed by k source vertices z_1..z_k and one horizontal path per set
threading the v-row of the components of its items.  All vertices are
facilities; exactly the sources hold one plough each.  Covers of size k and
clearing solutions translate into each other constructively.

Vertex ids are dense: element components in item order (u_i first, then per
containing set j: u_{i,j}, u'_{i,j}, v_{i,j}, v'_{i,j}), then z, then
z_1..z_k.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from .digraph import Instance, ParseError, SolutionWalks, Walk, verify_st_solution, _content_lines


@dataclass(frozen=True)
class SetCoverInstance:
    """Universe {1..n_items}, family of item subsets, budget k."""

    n_items: int
    sets: tuple[tuple[int, ...], ...]
    k: int

    def __post_init__(self):
        if self.n_items < 1:
            raise ValueError("need at least one item")
        if self.k < 1:
            raise ValueError("budget k must be positive")
        covered: set[int] = set()
        for s in self.sets:
            if not s:
                raise ValueError("empty set in the family")
            if list(s) != sorted(set(s)):
                raise ValueError(f"set {s} must be strictly ascending")
            if not all(1 <= x <= self.n_items for x in s):
                raise ValueError(f"set {s} mentions an unknown item")
            covered.update(s)
        if covered != set(range(1, self.n_items + 1)):
            missing = sorted(set(range(1, self.n_items + 1)) - covered)
            raise ValueError(f"items {missing} belong to no set")

    @property
    def m(self) -> int:
        return len(self.sets)

    def containing(self, item: int) -> list[int]:
        """1-based indices of the sets containing the item."""
        return [j + 1 for j, s in enumerate(self.sets) if item in s]

    def is_cover(self, indices) -> bool:
        got: set[int] = set()
        for j in indices:
            if not (1 <= j <= self.m):
                return False
            got.update(self.sets[j - 1])
        return got == set(range(1, self.n_items + 1))


def parse_set_cover(text) -> SetCoverInstance:
    """Format: ``sc <n> <m> <k>`` then m lines ``s <item> <item> ...``."""
    lines = _content_lines(text)
    if not lines:
        raise ParseError(1, "empty set-cover text")
    ln, head = lines[0]
    parts = head.split()
    if len(parts) != 4 or parts[0] != "sc":
        raise ParseError(ln, f"expected header 'sc <n> <m> <k>', got {head!r}")
    try:
        n, m, k = int(parts[1]), int(parts[2]), int(parts[3])
    except ValueError:
        raise ParseError(ln, "header counts must be integers") from None
    if len(lines) != 1 + m:
        raise ParseError(ln, f"expected {1 + m} content lines, found {len(lines)}")
    sets = []
    for idx in range(m):
        ln, line = lines[1 + idx]
        parts = line.split()
        if not parts or parts[0] != "s":
            raise ParseError(ln, f"expected 's <item> ...', got {line!r}")
        try:
            items = tuple(int(x) for x in parts[1:])
        except ValueError:
            raise ParseError(ln, "items must be integers") from None
        sets.append(items)
    try:
        return SetCoverInstance(n_items=n, sets=tuple(sets), k=k)
    except ValueError as e:
        raise ParseError(lines[0][0], str(e)) from None


def serialize_set_cover(sc: SetCoverInstance) -> str:
    out = [f"sc {sc.n_items} {sc.m} {sc.k}"]
    for s in sc.sets:
        out.append("s " + " ".join(str(x) for x in s))
    return "\n".join(out) + "\n"


@dataclass(frozen=True)
class GadgetLayout:
    """Built gadget plus the structured-name -> dense-id map."""

    sc: SetCoverInstance
    instance: Instance
    names: dict[tuple, int]

    def name_of(self, vid: int) -> str:
        for name, i in self.names.items():
            if i == vid:
                kind = name[0]
                if kind == "u":
                    return f"u_{{{name[1]},{name[2]}}}"
                if kind == "uc":
                    return f"u_{name[1]}"
                if kind == "up":
                    return f"u'_{{{name[1]},{name[2]}}}"
                if kind == "v":
                    return f"v_{{{name[1]},{name[2]}}}"
                if kind == "vp":
                    return f"v'_{{{name[1]},{name[2]}}}"
                if kind == "z":
                    return "z"
                return f"z_{name[1]}"
        raise KeyError(vid)


def build_gadget(sc: SetCoverInstance) -> GadgetLayout:
    names: dict[tuple, int] = {}
    counter = itertools.count()
    for i in range(1, sc.n_items + 1):
        names[("uc", i)] = next(counter)
        for j in sc.containing(i):
            for kind in ("u", "up", "v", "vp"):
                names[(kind, i, j)] = next(counter)
    names[("z",)] = next(counter)
    for l in range(1, sc.k + 1):
        names[("zs", l)] = next(counter)
    n = next(counter)

    arcs: set[tuple[int, int]] = set()
    for i in range(1, sc.n_items + 1):
        for j in sc.containing(i):
            arcs.add((names[("u", i, j)], names[("uc", i)]))
            arcs.add((names[("uc", i)], names[("up", i, j)]))
            arcs.add((names[("up", i, j)], names[("v", i, j)]))
            arcs.add((names[("v", i, j)], names[("vp", i, j)]))
    for t in range(1, sc.m + 1):
        row = [names[("z",)]] + [names[("v", x, t)] for x in sc.sets[t - 1]]
        arcs.update(zip(row, row[1:]))
    for l in range(1, sc.k + 1):
        arcs.add((names[("zs", l)], names[("z",)]))

    source_names = [("u", i, j) for i in range(1, sc.n_items + 1) for j in sc.containing(i)]
    source_names += [("zs", l) for l in range(1, sc.k + 1)]
    ploughs = {names[s]: 1 for s in source_names}
    inst = Instance(
        n=n,
        arcs=frozenset(arcs),
        facility=tuple(True for _ in range(n)),
        ploughs=tuple(ploughs.get(v, 0) for v in range(n)),
    )
    expected_order = 4 * sum(len(s) for s in sc.sets) + sc.n_items + sc.k + 1
    assert n == expected_order
    return GadgetLayout(sc=sc, instance=inst, names=names)


def _vertical_path(g: GadgetLayout, i: int, j: int) -> Walk:
    nm = g.names
    return Walk(
        (nm[("u", i, j)], nm[("uc", i)], nm[("up", i, j)], nm[("v", i, j)], nm[("vp", i, j)])
    )


def _horizontal_walk(g: GadgetLayout, t: int, l: int) -> Walk:
    """(z_t, z) followed by the full horizontal path of set l."""
    nm = g.names
    return Walk((nm[("zs", t)], nm[("z",)]) + tuple(nm[("v", x, l)] for x in g.sc.sets[l - 1]))


def cover_to_walks(g: GadgetLayout, cover) -> SolutionWalks:
    """Translate a size-k cover into a verifying clearing solution."""
    cover = sorted(set(cover))
    if len(cover) != g.sc.k:
        raise ValueError(f"cover must have exactly k={g.sc.k} distinct sets, got {cover}")
    if not g.sc.is_cover(cover):
        raise ValueError(f"{cover} is not a cover of the universe")
    walks = [
        _vertical_path(g, i, j)
        for i in range(1, g.sc.n_items + 1)
        for j in g.sc.containing(i)
    ]
    walks += [_horizontal_walk(g, t, l) for t, l in enumerate(cover, start=1)]
    sol = SolutionWalks(tuple(walks))
    ok, reason = verify_st_solution(g.instance, sol)
    assert ok, f"constructed solution must verify: {reason}"
    return sol


def _classify_starts(g: GadgetLayout, sol: SolutionWalks):
    """Map each walk to its start name; gadget solutions have one walk per source."""
    id_to_name = {v: k for k, v in g.names.items()}
    by_start: dict[tuple, Walk] = {}
    for w in sol.walks:
        name = id_to_name[w.start]
        if name in by_start:
            raise ValueError(f"two walks start at {name}")
        by_start[name] = w
    return by_start


def canonicalize_solution(g: GadgetLayout, sol: SolutionWalks) -> SolutionWalks:
    """Rewrite a verifying solution so every vertical plough clears exactly its
    own vertical path and every z-plough rides one full horizontal path.

    Each rewrite preserves verification; the loop terminates because every
    swap strictly decreases the number of nonconforming walks.
    """
    ok, reason = verify_st_solution(g.instance, sol)
    if not ok:
        raise ValueError(f"solution must verify before canonicalization: {reason}")
    nm = g.names
    id_to_name = {v: k for k, v in g.names.items()}
    by_start = _classify_starts(g, sol)
    comp_vertices: dict[int, set[int]] = {}
    for name, vid in nm.items():
        if name[0] in ("u", "uc", "up", "v", "vp"):
            comp_vertices.setdefault(name[1], set()).add(vid)

    # Stage 1: confine vertical ploughs to their own element component.
    # An escaping walk leaves through a horizontal arc right after a v-row
    # vertex v_{i,j'}; the walk that ends at the matching v'_{i,j'} (one must
    # exist: that sink is a facility with a single in-arc) donates its tail.
    # Swapping the two tails keeps the cleared arc set identical, and the
    # donor is never a confined walk, so the escape count strictly drops.
    guard = 0
    while True:
        guard += 1
        if guard > 2 * len(sol.walks) + 16:
            raise RuntimeError("component-confinement loop failed to make progress")
        escaped = None
        for name, walk in by_start.items():
            if name[0] == "u" and not set(walk.vertices) <= comp_vertices[name[1]]:
                escaped = (name, walk)
                break
        if not escaped:
            break
        name, walk = escaped
        i = name[1]
        # the first four vertices are forced: u_{i,j}, u_i, u'_{i,j'}, v_{i,j'}
        split_pos = 3
        j_prime = id_to_name[walk.vertices[split_pos]][2]
        vp_id = nm[("vp", i, j_prime)]
        v_id = nm[("v", i, j_prime)]
        donor_name = next(
            dn for dn, dw in by_start.items() if dn != name and dw.vertices[-1] == vp_id
        )
        donor = by_start[donor_name]
        donor_cut = donor.vertices.index(v_id)
        by_start[name] = Walk(walk.vertices[: split_pos + 1] + (vp_id,))
        by_start[donor_name] = Walk(donor.vertices[: donor_cut + 1] + walk.vertices[split_pos + 1 :])

    # Stage 2: make each confined vertical plough take its own column, then
    # extend every vertical walk to the full 5-vertex path.
    for i in range(1, g.sc.n_items + 1):
        pending = True
        while pending:
            pending = False
            taken = {}
            for j in g.sc.containing(i):
                w = by_start[("u", i, j)]
                if len(w.vertices) >= 3:
                    taken[j] = id_to_name[w.vertices[2]][2]
            for j, jp in taken.items():
                if jp == j:
                    continue
                donor = next(jj for jj, tgt in taken.items() if tgt == j)
                wj, wd = by_start[("u", i, j)], by_start[("u", i, donor)]
                by_start[("u", i, j)] = Walk(wj.vertices[:2] + wd.vertices[2:])
                by_start[("u", i, donor)] = Walk(wd.vertices[:2] + wj.vertices[2:])
                pending = True
                break
        for j in g.sc.containing(i):
            by_start[("u", i, j)] = _vertical_path(g, i, j)

    # Stage 3: each z-plough rides one full horizontal path.
    for t in range(1, g.sc.k + 1):
        w = by_start[("zs", t)]
        ride = 1  # default horizontal row when the walk stops at z
        for vid in w.vertices[2:]:
            vn = id_to_name[vid]
            if vn[0] == "v":
                ride = vn[2]
                break
            if vn[0] == "vp":
                ride = vn[2]
                break
        by_start[("zs", t)] = _horizontal_walk(g, t, ride)

    result = SolutionWalks(tuple(by_start[nm_key] for nm_key in sorted(by_start)))
    ok, reason = verify_st_solution(g.instance, result)
    assert ok, f"canonical solution must verify: {reason}"
    return result


def walks_to_cover(g: GadgetLayout, sol: SolutionWalks) -> tuple[int, ...]:
    """Read a set cover off a verifying solution (canonicalizing first)."""
    canon = canonicalize_solution(g, sol)
    by_start = _classify_starts(g, canon)
    id_to_name = {v: k for k, v in g.names.items()}
    rows = set()
    for t in range(1, g.sc.k + 1):
        third = by_start[("zs", t)].vertices[2]
        rows.add(id_to_name[third][2])
    cover = tuple(sorted(rows))
    assert g.sc.is_cover(cover), "canonical z-walks must induce a cover"
    return cover


def solve_set_cover_exact(sc: SetCoverInstance) -> Optional[tuple[int, ...]]:
    """Brute force over k-subsets of the family; None when no cover exists."""
    if sc.m > 20:
        raise ValueError("exact set-cover search limited to m <= 20")
    for combo in itertools.combinations(range(1, sc.m + 1), min(sc.k, sc.m)):
        if sc.is_cover(combo):
            return combo
    return None


def gen_fig3(n: int) -> Instance:
    """Zigzag family: two end facilities that need n-1 ploughs to reconnect."""
    if n < 3 or n % 2 == 0:
        raise ValueError("family is defined for odd n >= 3")
    arcs = []
    for v in range(1, n, 2):
        arcs += [(v, v - 1), (v, v + 1)]
    return Instance(
        n=n,
        arcs=frozenset(arcs),
        facility=tuple(v in (0, n - 1) for v in range(n)),
        ploughs=tuple(2 if v % 2 else 0 for v in range(n)),
    )


def serialize_gadget(g: GadgetLayout) -> str:
    """Instance text with a comment block documenting the name map."""
    from .digraph import serialize_instance

    lines = ["# set-cover gadget; vertex names:"]
    for name in sorted(g.names, key=lambda nm: g.names[nm]):
        lines.append(f"#   {g.names[name]} = {g.name_of(g.names[name])}")
    return "\n".join(lines) + "\n" + serialize_instance(g.instance)
