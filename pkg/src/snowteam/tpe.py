"""Tree-pattern embedding: monotone circuit construction and randomized detection.

The decision "does the weighted directed tree T embed into the host digraph,
covering all terminals and respecting per-vertex plough capacities" is encoded
as a polynomial Q(X, z): Q has a monomial z^|S| * (product of eta distinct
host variables) exactly when an embedding exists.  The polynomial is built
as a shared monotone circuit (one gate family per tree-vertex/host-vertex
pair) and tested by evaluating over the group algebra GF(2^64)[Z_2^k]:
squares vanish, so only multilinear monomials can survive, and a surviving
monomial is detected with constant probability per randomized trial.

The detector is one-sided: a nonzero evaluation proves the monomial exists;
a zero answer on every trial is wrong only with probability at most
(1 - p)^trials for per-trial success rate p.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .algebra import (
    _bit_expand,
    _clmul_reduce_arrays,
    _fwht,
    _parity_to_gf,
    _poly_mul_acc,
    GroupAlgebraElem,
    sample_assignment,
)
from .digraph import Instance
from .trees import TreeCandidate

# Gate-count ceiling: the unpruned construction uses at most 3 + 6*eta*n
# gates, which stays below CIRCUIT_SIZE_C * n^3 for every n >= 1, eta <= n.
CIRCUIT_SIZE_C = 10

ZERO_GATE = 0  # gates[0] is always the constant 0
Z_GATE = 1  # gates[1] is always the constant z


@dataclass(frozen=True)
class TpeInstance:
    """Host digraph, pattern tree, terminal set and tree root."""

    host: Instance
    tree: TreeCandidate
    terminals: frozenset[int]
    root: int = 0

    def __post_init__(self):
        if not all(0 <= t < self.host.n for t in self.terminals):
            raise ValueError("terminals outside host vertex range")
        if not (0 <= self.root < self.tree.order):
            raise ValueError("root outside tree vertex range")


def make_tpe_instance(
    host: Instance,
    tree: TreeCandidate,
    terminals=None,
    root: int = 0,
) -> TpeInstance:
    """Terminals default to facilities plus plough bases of the host."""
    if terminals is None:
        terminals = host.facilities() | host.bases()
    return TpeInstance(host=host, tree=tree, terminals=frozenset(terminals), root=root)


def indicator(u: int, w: int, inst: TpeInstance) -> str:
    """Per-pair leaf factor: 'z' on affordable terminals, '1' on affordable
    non-terminals, '0' when the demand exceeds the capacity."""
    if inst.tree.demand[u] > inst.host.ploughs[w]:
        return "0"
    return "z" if w in inst.terminals else "1"


@dataclass
class Circuit:
    """Monotone arithmetic circuit in topological gate order.

    Gate encodings: ("zero",) | ("const", z_exp) | ("x", host_vertex, tree_vertex)
    | ("add", ids) | ("mul", a, b).  Gate 0 is the constant 0, gate 1 is z.
    """

    gates: list[tuple]
    output: int
    host_n: int
    tree_order: int
    n_terminals: int
    prepruning_bound: int = field(default=0)

    def x_gate_ids(self) -> list[int]:
        return [i for i, g in enumerate(self.gates) if g[0] == "x"]

    def validate(self) -> None:
        """Structural monotonicity/topology check."""
        for i, g in enumerate(self.gates):
            kind = g[0]
            if kind == "add":
                assert all(0 <= c < i for c in g[1]), "add gate references forward"
            elif kind == "mul":
                assert 0 <= g[1] < i and 0 <= g[2] < i, "mul gate references forward"
            elif kind == "const":
                assert g[1] >= 0, "negative z power"
            else:
                assert kind in ("zero", "x"), f"unknown gate kind {kind}"
        assert 0 <= self.output < len(self.gates)


def _rooted_structure(tree: TreeCandidate, root: int):
    """Return (order of vertices deepest-first, in_children, out_children)."""
    eta = tree.order
    und: list[list[int]] = [[] for _ in range(eta)]
    arcset = set(tree.arcs)
    for u, v in tree.arcs:
        und[u].append(v)
        und[v].append(u)
    parent = [-2] * eta
    parent[root] = -1
    bfs = [root]
    for v in bfs:
        for c in und[v]:
            if parent[c] == -2:
                parent[c] = v
                bfs.append(c)
    in_children: list[list[int]] = [[] for _ in range(eta)]
    out_children: list[list[int]] = [[] for _ in range(eta)]
    for v in range(eta):
        p = parent[v]
        if p < 0:
            continue
        if (v, p) in arcset:
            in_children[p].append(v)
        else:
            out_children[p].append(v)
    return list(reversed(bfs)), in_children, out_children


def build_circuit(inst: TpeInstance) -> Circuit:
    """Shared-DAG circuit for Q(X, z); zero-indicator branches are pruned."""
    host, tree = inst.host, inst.tree
    n, eta = host.n, tree.order
    order, in_children, out_children = _rooted_structure(tree, inst.root)

    gates: list[tuple] = [("zero",), ("const", 1)]

    def add_gate(children: list[int]) -> int:
        children = [c for c in children if c != ZERO_GATE]
        if not children:
            return ZERO_GATE
        if len(children) == 1:
            return children[0]
        gates.append(("add", tuple(children)))
        return len(gates) - 1

    def mul_gate(a: int, b: int) -> int:
        if a == ZERO_GATE or b == ZERO_GATE:
            return ZERO_GATE
        gates.append(("mul", a, b))
        return len(gates) - 1

    qid: dict[tuple[int, int], int] = {}
    for u in order:
        for w in range(n):
            ind = indicator(u, w, inst)
            if ind == "0":
                qid[(u, w)] = ZERO_GATE
                continue
            factors = []
            dead = False
            for v in in_children[u]:
                s = add_gate([qid[(v, wp)] for wp in host.in_adj[w]])
                if s == ZERO_GATE:
                    dead = True
                    break
                factors.append(s)
            if not dead:
                for v in out_children[u]:
                    s = add_gate([qid[(v, wp)] for wp in host.out_adj[w]])
                    if s == ZERO_GATE:
                        dead = True
                        break
                    factors.append(s)
            if dead:
                qid[(u, w)] = ZERO_GATE
                continue
            gates.append(("x", w, u))
            acc = len(gates) - 1
            if ind == "z":
                acc = mul_gate(Z_GATE, acc)
            for f in factors:
                acc = mul_gate(acc, f)
            qid[(u, w)] = acc

    output = add_gate([qid[(inst.root, w)] for w in range(n)])
    bound = 3 + 6 * eta * n
    assert len(gates) <= bound <= CIRCUIT_SIZE_C * n**3
    circ = Circuit(
        gates=gates,
        output=output,
        host_n=n,
        tree_order=eta,
        n_terminals=len(inst.terminals),
        prepruning_bound=bound,
    )
    circ.validate()
    return circ


# ---------------------------------------------------------------------------
# exact symbolic oracle

def expand_symbolic(
    circuit: Circuit, max_vars: int, max_zdeg: int
) -> dict[tuple[tuple[int, ...], int], int]:
    """Full sum-product expansion with exact integer coefficients.

    Keys are (sorted variable multiset, z-degree); terms above the caps are
    discarded.  Guarded to small circuits: the expansion is exponential.
    """
    if circuit.host_n > 6 or circuit.tree_order > 4:
        raise ValueError("symbolic expansion guard: host_n <= 6 and tree_order <= 4")
    vals: list[dict] = []
    for g in circuit.gates:
        kind = g[0]
        if kind == "zero":
            vals.append({})
        elif kind == "const":
            vals.append({((), g[1]): 1} if g[1] <= max_zdeg else {})
        elif kind == "x":
            vals.append({((g[1],), 0): 1} if max_vars >= 1 else {})
        elif kind == "add":
            acc: dict = {}
            for c in g[1]:
                for key, coef in vals[c].items():
                    acc[key] = acc.get(key, 0) + coef
            vals.append({k: v for k, v in acc.items() if v})
        else:
            acc = {}
            for (va, za), ca in vals[g[1]].items():
                for (vb, zb), cb in vals[g[2]].items():
                    z = za + zb
                    if z > max_zdeg:
                        continue
                    merged = tuple(sorted(va + vb))
                    if len(merged) > max_vars:
                        continue
                    key = (merged, z)
                    acc[key] = acc.get(key, 0) + ca * cb
            vals.append({k: v for k, v in acc.items() if v})
    return vals[circuit.output]


# ---------------------------------------------------------------------------
# randomized evaluation over the group algebra

class _Val:
    """Batched value: arr[trial, z_degree, group_mask], nonzero degrees in [lo, hi]."""

    __slots__ = ("arr", "lo", "hi")

    def __init__(self, arr, lo, hi):
        self.arr = arr
        self.lo = lo
        self.hi = hi


def _live_gates(circuit: Circuit) -> list[bool]:
    """Gates reachable from the output; pruned branches leave dead families."""
    live = [False] * len(circuit.gates)
    stack = [circuit.output]
    while stack:
        gid = stack.pop()
        if live[gid]:
            continue
        live[gid] = True
        gate = circuit.gates[gid]
        if gate[0] == "add":
            stack.extend(gate[1])
        elif gate[0] == "mul":
            stack.extend(gate[1:3])
    return live


def _eval_batch(
    circuit: Circuit, zcap: int, k: int, seed: int, trial_indices
) -> np.ndarray:
    """Evaluate all trials at once; returns the z^zcap slice, shape (T, 2^k)."""
    trial_indices = list(trial_indices)
    t_count = len(trial_indices)
    g_size = 1 << k
    n = circuit.host_n
    x_ids = circuit.x_gate_ids()
    x_col = {gid: i for i, gid in enumerate(x_ids)}
    live = _live_gates(circuit)

    v0s = np.empty(t_count, dtype=np.int64)
    vws = np.empty((t_count, n), dtype=np.int64)
    rs = np.empty((t_count, max(len(x_ids), 1)), dtype=np.uint64)
    seed = seed % (1 << 63)  # seed sequences need nonnegative entropy
    for row, trial in enumerate(trial_indices):
        rng = np.random.default_rng((seed, trial))
        v0, vw = sample_assignment(rng, n, k)
        v0s[row] = v0
        vws[row] = vw
        if x_ids:
            rs[row] = rng.integers(0, 1 << 64, size=len(x_ids), dtype=np.uint64)

    rows = np.arange(t_count)
    g_idx = np.arange(g_size)
    vals: list[Optional[_Val]] = []

    def materialize_x(gid: int) -> _Val:
        w = circuit.gates[gid][1]
        arr = np.zeros((t_count, zcap + 1, g_size), dtype=np.uint64)
        r = rs[:, x_col[gid]]
        arr[rows, 0, v0s] ^= r
        arr[rows, 0, vws[:, w]] ^= r
        return _Val(arr, 0, 0)

    def xmul(val: _Val, xgid: int) -> Optional[_Val]:
        # value * r*(g_v0 + g_vw): permutation-xor on the group axis, one
        # field multiplication by the per-trial scalar
        w = circuit.gates[xgid][1]
        span = val.arr[:, val.lo : val.hi + 1, :]
        idx0 = (g_idx[None, :] ^ v0s[:, None])[:, None, :]
        idxw = (g_idx[None, :] ^ vws[:, w][:, None])[:, None, :]
        comb = np.take_along_axis(span, np.broadcast_to(idx0, span.shape), axis=2)
        comb = comb ^ np.take_along_axis(span, np.broadcast_to(idxw, span.shape), axis=2)
        prod = _clmul_reduce_arrays(comb, rs[:, x_col[xgid]][:, None, None])
        arr = np.zeros_like(val.arr)
        arr[:, val.lo : val.hi + 1, :] = prod
        return _Val(arr, val.lo, val.hi)

    def shift(val: _Val, e: int) -> Optional[_Val]:
        lo, hi = val.lo + e, min(val.hi + e, zcap)
        if lo > zcap:
            return None
        arr = np.zeros_like(val.arr)
        arr[:, lo : hi + 1, :] = val.arr[:, val.lo : val.lo + (hi - lo) + 1, :]
        return _Val(arr, lo, hi)

    def general_mul(a: _Val, b: _Val) -> Optional[_Val]:
        lo, hi = a.lo + b.lo, min(a.hi + b.hi, zcap)
        if lo > zcap:
            return None
        ta = _fwht(_bit_expand(a.arr[:, a.lo : a.hi + 1, :]))
        tb = _fwht(_bit_expand(b.arr[:, b.lo : b.hi + 1, :]))
        pairs = [
            (i, j)
            for i in range(a.hi - a.lo + 1)
            for j in range(b.hi - b.lo + 1)
            if a.lo + i + b.lo + j <= zcap
        ]
        ai = ta[:, [p[0] for p in pairs]]
        bj = tb[:, [p[1] for p in pairs]]
        acc = np.zeros(ai.shape[:-1] + (127,), dtype=np.uint64)
        _poly_mul_acc(acc, ai, bj)
        degs = sorted({a.lo + i + b.lo + j for i, j in pairs})
        per_deg = np.empty((t_count, len(degs), g_size, 127), dtype=np.uint64)
        for di, d in enumerate(degs):
            cols = [pi for pi, (i, j) in enumerate(pairs) if a.lo + i + b.lo + j == d]
            per_deg[:, di] = acc[:, cols].sum(axis=1, dtype=np.uint64)
        inv = _fwht(per_deg)
        fields = _parity_to_gf((inv >> np.uint64(k)) & np.uint64(1))
        arr = np.zeros((t_count, zcap + 1, g_size), dtype=np.uint64)
        for di, d in enumerate(degs):
            arr[:, d, :] = fields[:, di, :]
        return _Val(arr, lo, hi)

    for gid, gate in enumerate(circuit.gates):
        kind = gate[0]
        if not live[gid]:
            vals.append(None)
        elif kind == "zero":
            vals.append(None)
        elif kind == "const":
            if gate[1] > zcap:
                vals.append(None)
            else:
                arr = np.zeros((t_count, zcap + 1, g_size), dtype=np.uint64)
                arr[:, gate[1], 0] = 1
                vals.append(_Val(arr, gate[1], gate[1]))
        elif kind == "x":
            vals.append(materialize_x(gid))
        elif kind == "add":
            parts = [vals[c] for c in gate[1] if vals[c] is not None]
            if not parts:
                vals.append(None)
            else:
                arr = parts[0].arr.copy()
                for p in parts[1:]:
                    arr ^= p.arr
                vals.append(_Val(arr, min(p.lo for p in parts), max(p.hi for p in parts)))
        else:
            a, b = vals[gate[1]], vals[gate[2]]
            if a is None or b is None:
                vals.append(None)
                continue
            ga, gb = circuit.gates[gate[1]], circuit.gates[gate[2]]
            if ga[0] == "const":
                vals.append(shift(b, ga[1]))
            elif gb[0] == "const":
                vals.append(shift(a, gb[1]))
            elif ga[0] == "x":
                vals.append(xmul(b, gate[1]))
            elif gb[0] == "x":
                vals.append(xmul(a, gate[2]))
            else:
                vals.append(general_mul(a, b))

    out = vals[circuit.output]
    if out is None or not (out.lo <= zcap <= out.hi):
        return np.zeros((t_count, g_size), dtype=np.uint64)
    return out.arr[:, zcap, :]


def eval_trial(circuit: Circuit, t: int, k: int, seed: int) -> GroupAlgebraElem:
    """One randomized evaluation; returns the z^t slice of the output."""
    return GroupAlgebraElem(k, _eval_batch(circuit, t, k, seed, [0])[0])


def detect_zt_multilinear(
    circuit: Circuit, t: int, k: int, trials: int = 32, seed: int = 1
) -> bool:
    """True iff some trial evaluates the z^t slice to a nonzero vector.

    One-sided: never true when no multilinear z^t monomial of degree <= 2^k
    survival class exists; a false negative has probability at most
    (1-p)^trials for per-trial success rate p.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    done = 0
    for wave in (min(8, trials), trials - min(8, trials)):
        if wave <= 0:
            continue
        res = _eval_batch(circuit, t, k, seed, range(done, done + wave))
        done += wave
        if res.any():
            return True
    return False


def solve_tpe(inst: TpeInstance, trials: int = 32, seed: int = 1) -> bool:
    """Randomized embedding decision: z-degree |terminals|, group dim = tree order."""
    eta = inst.tree.order
    if eta > inst.host.n or len(inst.terminals) > eta:
        return False
    circuit = build_circuit(inst)
    return detect_zt_multilinear(circuit, t=len(inst.terminals), k=eta, trials=trials, seed=seed)
