import random

import numpy as np
import pytest

from snowteam.digraph import make_instance, transitive_closure
from snowteam.tpe import (
    Circuit,
    build_circuit,
    detect_zt_multilinear,
    eval_trial,
    expand_symbolic,
    indicator,
    make_tpe_instance,
    solve_tpe,
    CIRCUIT_SIZE_C,
)
from snowteam.trees import enumerate_free_trees, orient_tree, candidate_stream


def _tree_edge_down():
    """Single arc 0 -> 1 with demand (1, 0)."""
    ft = next(iter(enumerate_free_trees(2)))
    return next(c for c in orient_tree(ft) if c.arcs == ((0, 1),))


def _tree_star_out():
    """Arcs 0->1, 0->2 with demand (2, 0, 0)."""
    ft = next(iter(enumerate_free_trees(3)))
    return next(c for c in orient_tree(ft) if c.arcs == ((0, 1), (0, 2)))


def toy1_closure():
    return transitive_closure(make_instance(3, [(0, 1), (1, 2)], {0, 2}, {0: 1}))


def toy1_tpe():
    return make_tpe_instance(toy1_closure(), _tree_edge_down())


def test_indicator_cases():
    inst = toy1_tpe()
    # terminal, affordable demand
    assert indicator(0, 0, inst) == "z"
    # non-terminal, zero demand
    assert indicator(1, 1, inst) == "1"
    # demand exceeds capacity
    assert indicator(0, 1, inst) == "0"


def test_toy1_circuit_expansion():
    circ = build_circuit(toy1_tpe())
    got = expand_symbolic(circ, max_vars=3, max_zdeg=3)
    assert got == {((0, 1), 1): 1, ((0, 2), 2): 1}


def test_single_vertex_tree_circuit():
    host = make_instance(2, [], facilities={0}, ploughs={})
    tree = next(iter(orient_tree(next(iter(enumerate_free_trees(1))))))
    circ = build_circuit(make_tpe_instance(host, tree))
    got = expand_symbolic(circ, max_vars=2, max_zdeg=2)
    assert got == {((0,), 1): 1, ((1,), 0): 1}


def test_symmetric_embeddings_double_coefficient():
    host = make_instance(3, [(0, 1), (0, 2)], facilities=set(), ploughs={0: 2})
    circ = build_circuit(make_tpe_instance(host, _tree_star_out()))
    got = expand_symbolic(circ, max_vars=3, max_zdeg=3)
    assert got[((0, 1, 2), 1)] == 2


def test_expand_guard():
    host = make_instance(7, [(0, 1)], facilities={0}, ploughs={})
    circ = build_circuit(make_tpe_instance(host, _tree_edge_down()))
    with pytest.raises(ValueError, match="guard"):
        expand_symbolic(circ, 5, 5)


def _random_host(rng, n, max_arcs):
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    arcs = rng.sample(pairs, k=rng.randint(0, min(max_arcs, len(pairs))))
    fac = set(rng.sample(range(n), k=rng.randint(0, min(2, n))))
    ploughs = {v: rng.randint(0, 2) for v in rng.sample(range(n), k=min(n, 2)) if n > 1}
    ploughs = {v: min(b, n - 1) for v, b in ploughs.items()}
    return make_instance(n, arcs, fac, ploughs)


def test_gate_count_bound():
    rng = random.Random(5)
    for n in (5, 10, 20, 30):
        host = _random_host(rng, n, 4 * n)
        for eta in (1, 3, min(7, n)):
            for tree in enumerate_free_trees(eta):
                cand = next(iter(orient_tree(tree)))
                circ = build_circuit(make_tpe_instance(host, cand))
                assert len(circ.gates) <= circ.prepruning_bound <= CIRCUIT_SIZE_C * n**3


def test_circuit_is_monotone_and_topological():
    circ = build_circuit(toy1_tpe())
    circ.validate()


def _hand_circuit_two_x(var_a, var_b):
    """(z * x_a) * (z * x_b) with distinct x-gate occurrences."""
    gates = [
        ("zero",),
        ("const", 1),
        ("x", var_a, 0),
        ("mul", 1, 2),
        ("x", var_b, 1),
        ("mul", 1, 4),
        ("mul", 3, 5),
    ]
    return Circuit(gates=gates, output=6, host_n=3, tree_order=2, n_terminals=2)


def test_eval_square_is_zero():
    circ = _hand_circuit_two_x(0, 0)
    for seed in range(30):
        assert eval_trial(circ, t=2, k=2, seed=seed).is_zero()
    assert not detect_zt_multilinear(circ, t=2, k=2, trials=16, seed=7)


def test_eval_distinct_variables_survive_often():
    circ = _hand_circuit_two_x(0, 1)
    hits = sum(not eval_trial(circ, t=2, k=2, seed=s).is_zero() for s in range(200))
    assert hits / 200 >= 0.2


def test_toy1_detection():
    circ = build_circuit(toy1_tpe())
    # z^2 x0 x2 exists
    assert detect_zt_multilinear(circ, t=2, k=2, trials=32, seed=3)
    # z^1 x0 x1 exists as well
    assert detect_zt_multilinear(circ, t=1, k=2, trials=32, seed=3)
    # no z^0 monomial: every tree vertex placement hits at least one terminal?
    # (expansion above shows only z^1 and z^2 terms)
    assert not detect_zt_multilinear(circ, t=0, k=2, trials=8, seed=3)


def test_solve_tpe_examples():
    assert solve_tpe(toy1_tpe(), trials=48, seed=1)

    host = make_instance(2, [(1, 0)], facilities={0, 1}, ploughs={1: 1})
    assert solve_tpe(make_tpe_instance(host, _tree_edge_down()), trials=48, seed=1)

    host_bad = make_instance(2, [(1, 0)], facilities={0, 1}, ploughs={0: 1})
    assert not solve_tpe(make_tpe_instance(host_bad, _tree_edge_down()), trials=16, seed=1)


def test_solve_tpe_agrees_with_exact_oracle():
    from snowteam.exact import solve_tpe_exact

    rng = random.Random(11)
    checked_yes = checked_no = 0
    for _ in range(60):
        n = rng.randint(2, 5)
        host = _random_host(rng, n, 10)
        eta = rng.randint(1, min(3, n))
        cands = list(candidate_stream(1, eta))
        cand = rng.choice([c for c in cands if c.order <= n])
        terminals = set(rng.sample(range(n), k=rng.randint(0, min(cand.order, n))))
        inst = make_tpe_instance(host, cand, terminals=terminals)
        want = solve_tpe_exact(inst) is not None
        got = solve_tpe(inst, trials=64, seed=17)
        if want:
            checked_yes += 1
            assert got, (host, cand, terminals)
        else:
            checked_no += 1
            assert not got, (host, cand, terminals)
    assert checked_yes >= 5 and checked_no >= 5


def test_exact_embedding_respects_conditions():
    from snowteam.exact import solve_tpe_exact

    inst = toy1_tpe()
    emb = solve_tpe_exact(inst)
    assert emb == {0: 0, 1: 2}

    host = make_instance(2, [(1, 0)], facilities={0, 1}, ploughs={0: 1})
    assert solve_tpe_exact(make_tpe_instance(host, _tree_edge_down())) is None

    single = next(iter(orient_tree(next(iter(enumerate_free_trees(1))))))
    host2 = make_instance(2, [], facilities={1}, ploughs={})
    assert solve_tpe_exact(make_tpe_instance(host2, single)) == {0: 1}


def test_detection_one_sided_on_certified_no_instances():
    from snowteam.exact import solve_tpe_exact

    rng = random.Random(41)
    checked = 0
    while checked < 100:
        n = rng.randint(2, 5)
        host = _random_host(rng, n, 8)
        cand = rng.choice([c for c in candidate_stream(1, min(4, n)) if c.order <= n])
        terminals = set(rng.sample(range(n), k=rng.randint(0, min(cand.order, n))))
        inst = make_tpe_instance(host, cand, terminals=terminals)
        if solve_tpe_exact(inst) is not None:
            continue
        circ = build_circuit(inst)
        res = _every_trial_zero(circ, len(terminals), cand.order, seed=checked, trials=8)
        assert res, (host, cand, terminals)
        checked += 1


def _every_trial_zero(circ, t, k, seed, trials):
    return all(eval_trial(circ, t, k, seed=seed * 1000 + i).is_zero() for i in range(trials))


def test_toy1_survival_frequency():
    circ = build_circuit(toy1_tpe())
    hits = sum(not eval_trial(circ, t=2, k=2, seed=s).is_zero() for s in range(200))
    assert hits / 200 >= 0.2


def _reference_eval(circuit, zcap, k, seed):
    """Slow evaluator over the public algebra types, drawing the same stream."""
    from snowteam.algebra import AlgebraValue, GroupAlgebraElem, ga_mul_naive, sample_assignment

    rng = np.random.default_rng((seed % (1 << 63), 0))
    v0, vw = sample_assignment(rng, circuit.host_n, k)
    x_ids = circuit.x_gate_ids()
    rs = rng.integers(0, 1 << 64, size=len(x_ids), dtype=np.uint64) if x_ids else []
    x_col = {gid: i for i, gid in enumerate(x_ids)}

    def zmul_naive(a, b):
        parts = [GroupAlgebraElem.zero(k) for _ in range(zcap + 1)]
        for i in range(zcap + 1):
            for j in range(zcap + 1 - i):
                parts[i + j] = parts[i + j] + ga_mul_naive(a.parts[i], b.parts[j])
        return AlgebraValue(zcap, tuple(parts))

    vals = []
    zero = AlgebraValue.zero(zcap, k)
    for gid, gate in enumerate(circuit.gates):
        kind = gate[0]
        if kind == "zero":
            vals.append(zero)
        elif kind == "const":
            parts = [GroupAlgebraElem.zero(k) for _ in range(zcap + 1)]
            if gate[1] <= zcap:
                parts[gate[1]] = GroupAlgebraElem.identity(k)
            vals.append(AlgebraValue(zcap, tuple(parts)))
        elif kind == "x":
            r = int(rs[x_col[gid]])
            elem = GroupAlgebraElem.basis(k, int(v0), r) + GroupAlgebraElem.basis(
                k, int(vw[gate[1]]), r
            )
            parts = [elem] + [GroupAlgebraElem.zero(k) for _ in range(zcap)]
            vals.append(AlgebraValue(zcap, tuple(parts)))
        elif kind == "add":
            acc = zero
            for c in gate[1]:
                acc = acc + vals[c]
            vals.append(acc)
        else:
            vals.append(zmul_naive(vals[gate[1]], vals[gate[2]]))
    return vals[circuit.output].parts[zcap]


def test_engine_matches_reference_algebra_evaluation():
    """The batched engine agrees bit-for-bit with an evaluator composed from
    the public group-algebra operations on the same randomness."""
    rng = random.Random(77)
    for _ in range(15):
        n = rng.randint(2, 4)
        host = _random_host(rng, n, 8)
        cand = rng.choice([c for c in candidate_stream(1, min(3, n), dedupe=False)])
        terminals = set(rng.sample(range(n), k=rng.randint(0, min(cand.order, n))))
        inst = make_tpe_instance(host, cand, terminals=terminals)
        circ = build_circuit(inst)
        t, k = len(terminals), cand.order
        for seed in (1, 9):
            got = eval_trial(circ, t, k, seed)
            want = _reference_eval(circ, t, k, seed)
            assert got == want, (host, cand, terminals, seed)


def _direct_polynomial(inst, max_vars, max_zdeg):
    """Unshared recursive expansion of the defining product-of-sums formulas."""
    host, tree = inst.host, inst.tree
    und = {v: [] for v in range(tree.order)}
    arcset = set(tree.arcs)
    for u, v in tree.arcs:
        und[u].append(v)
        und[v].append(u)

    def poly_mul(a, b):
        out = {}
        for (va, za), ca in a.items():
            for (vb, zb), cb in b.items():
                if za + zb > max_zdeg or len(va) + len(vb) > max_vars:
                    continue
                key = (tuple(sorted(va + vb)), za + zb)
                out[key] = out.get(key, 0) + ca * cb
        return {k: v for k, v in out.items() if v}

    def poly_add(ps):
        out = {}
        for p in ps:
            for k, v in p.items():
                out[k] = out.get(k, 0) + v
        return {k: v for k, v in out.items() if v}

    def q(u, w, parent):
        if tree.demand[u] > host.ploughs[w]:
            return {}
        ze = 1 if w in inst.terminals else 0
        acc = {((w,), ze): 1}
        for v in und[u]:
            if v == parent:
                continue
            if (v, u) in arcset:
                branch = poly_add([q(v, wp, u) for wp in host.in_adj[w]])
            else:
                branch = poly_add([q(v, wp, u) for wp in host.out_adj[w]])
            acc = poly_mul(acc, branch)
        return acc

    return poly_add([q(inst.root, w, -1) for w in range(host.n)])


def test_shared_dag_matches_unshared_expansion():
    rng = random.Random(23)
    for _ in range(40):
        n = rng.randint(2, 5)
        host = _random_host(rng, n, 12)
        cand = rng.choice([c for c in candidate_stream(1, min(4, n), dedupe=False)])
        terminals = set(rng.sample(range(n), k=rng.randint(0, 2)))
        inst = make_tpe_instance(host, cand, terminals=terminals)
        circ = build_circuit(inst)
        assert expand_symbolic(circ, 6, 6) == _direct_polynomial(inst, 6, 6)
