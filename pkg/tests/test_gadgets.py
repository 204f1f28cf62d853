import itertools
import random

import pytest

from snowteam.digraph import parse_instance, verify_st_solution, walks_from_lists
from snowteam.exact import solve_st_exact, solve_variant_exact
from snowteam.gadgets import (
    GadgetLayout,
    SetCoverInstance,
    build_gadget,
    canonicalize_solution,
    cover_to_walks,
    gen_fig3,
    parse_set_cover,
    serialize_gadget,
    serialize_set_cover,
    solve_set_cover_exact,
    walks_to_cover,
)

SAMPLE = SetCoverInstance(
    n_items=5, sets=((1, 3, 4), (2, 3), (2, 4, 5), (3, 4, 5)), k=2
)


def test_sample_gadget_order_sources_ploughs():
    g = build_gadget(SAMPLE)
    inst = g.instance
    assert inst.n == 52  # 4*11 + 5 + 2 + 1
    from snowteam.digraph import sources

    assert len(sources(inst)) == 13  # k + sum of set sizes
    assert inst.total_ploughs() == 13
    assert all(inst.facility)
    assert inst.bases() == sources(inst)


def test_tiny_gadget_order_formula():
    g = build_gadget(SetCoverInstance(1, ((1,),), 1))
    assert g.instance.n == 4 * 1 + 1 + 1 + 1


def test_gadgets_are_dags_and_connected():
    import networkx as nx

    rng = random.Random(0)
    for _ in range(100):
        n = rng.randint(1, 5)
        m = rng.randint(1, 4)
        while True:
            sets = sorted(
                {
                    tuple(sorted(rng.sample(range(1, n + 1), k=rng.randint(1, n))))
                    for _ in range(m)
                }
            )
            if set().union(*map(set, sets)) == set(range(1, n + 1)):
                break
        sc = SetCoverInstance(n, tuple(sets), rng.randint(1, len(sets)))
        g = build_gadget(sc)
        dg = nx.DiGraph()
        dg.add_nodes_from(range(g.instance.n))
        dg.add_edges_from(g.instance.arcs)
        assert nx.is_directed_acyclic_graph(dg)
        assert nx.is_connected(dg.to_undirected())
        expected = 4 * sum(len(s) for s in sc.sets) + sc.n_items + sc.k + 1
        assert g.instance.n == expected


def test_set_cover_invariants():
    with pytest.raises(ValueError, match="no set"):
        SetCoverInstance(2, ((1,),), 1)
    with pytest.raises(ValueError, match="ascending"):
        SetCoverInstance(2, ((2, 1),), 1)
    with pytest.raises(ValueError, match="empty set"):
        SetCoverInstance(1, ((), (1,)), 1)
    with pytest.raises(ValueError, match="positive"):
        SetCoverInstance(1, ((1,),), 0)


def test_set_cover_text_round_trip():
    text = serialize_set_cover(SAMPLE)
    assert parse_set_cover(text) == SAMPLE
    assert text.splitlines()[0] == "sc 5 4 2"


def test_serialize_gadget_parses_back():
    g = build_gadget(SAMPLE)
    text = serialize_gadget(g)
    assert parse_instance(text) == g.instance
    body = [l for l in text.splitlines() if l and not l.startswith("#")]
    assert sum(1 for l in body if l.startswith("v ")) == 52


def test_solve_set_cover_exact_sample():
    assert solve_set_cover_exact(SAMPLE) == (1, 3)
    k1 = SetCoverInstance(SAMPLE.n_items, SAMPLE.sets, 1)
    assert solve_set_cover_exact(k1) is None
    km = SetCoverInstance(SAMPLE.n_items, SAMPLE.sets, 4)
    assert solve_set_cover_exact(km) == (1, 2, 3, 4)


def test_cover_to_walks_verifies():
    g = build_gadget(SAMPLE)
    sol = cover_to_walks(g, {1, 3})
    assert len(sol.walks) == 13
    ok, reason = verify_st_solution(g.instance, sol)
    assert ok, reason


def test_cover_to_walks_rejects_bad_covers():
    g = build_gadget(SAMPLE)
    with pytest.raises(ValueError, match="exactly k"):
        cover_to_walks(g, {4})
    with pytest.raises(ValueError, match="not a cover"):
        cover_to_walks(g, {2, 4})


def test_canonicalize_fixpoint():
    g = build_gadget(SAMPLE)
    sol = cover_to_walks(g, {1, 3})
    assert canonicalize_solution(g, sol) == sol


def test_canonicalize_rejects_non_verifying():
    g = build_gadget(SAMPLE)
    with pytest.raises(ValueError, match="verify"):
        canonicalize_solution(g, walks_from_lists([[0]]))


def test_walks_to_cover_round_trip():
    g = build_gadget(SAMPLE)
    for cover in itertools.combinations(range(1, 5), 2):
        if SAMPLE.is_cover(cover):
            assert walks_to_cover(g, cover_to_walks(g, cover)) == cover


def test_walks_to_cover_from_exact_witness():
    sc = SetCoverInstance(2, ((1,), (1, 2)), 1)
    g = build_gadget(sc)
    ans, witness = solve_st_exact(g.instance)
    assert ans
    cover = walks_to_cover(g, witness)
    assert sc.is_cover(cover) and len(cover) <= sc.k


def test_canonicalize_handles_crafted_escape():
    """A solution whose vertical plough rides a horizontal row is rewritten."""
    sc = SetCoverInstance(2, ((1, 2),), 1)
    g = build_gadget(sc)
    nm = g.names
    # vertical plough of item 1 walks past its v-vertex into item 2's column;
    # the z-plough stops early and the item-2 plough keeps its own path.
    crafted = walks_from_lists(
        [
            [nm[("u", 1, 1)], nm[("uc", 1)], nm[("up", 1, 1)], nm[("v", 1, 1)],
             nm[("v", 2, 1)], nm[("vp", 2, 1)]],
            [nm[("u", 2, 1)], nm[("uc", 2)], nm[("up", 2, 1)], nm[("v", 2, 1)],
             nm[("vp", 2, 1)]],
            [nm[("zs", 1)], nm[("z",)], nm[("v", 1, 1)], nm[("vp", 1, 1)]],
        ]
    )
    ok, reason = verify_st_solution(g.instance, crafted)
    assert ok, reason
    canon = canonicalize_solution(g, crafted)
    id_to_name = {v: k for k, v in nm.items()}
    for w in canon.walks:
        start = id_to_name[w.start]
        if start[0] == "u":
            i, j = start[1], start[2]
            assert [id_to_name[v] for v in w.vertices] == [
                ("u", i, j), ("uc", i), ("up", i, j), ("v", i, j), ("vp", i, j)
            ]
        else:
            assert id_to_name[w.vertices[1]] == ("z",)
            assert id_to_name[w.vertices[2]][0] == "v"
    # idempotent
    assert canonicalize_solution(g, canon) == canon


def test_canonicalize_random_witnesses():
    rng = random.Random(13)
    for _ in range(25):
        n = rng.randint(1, 3)
        m = rng.randint(1, 3)
        while True:
            sets = sorted(
                {
                    tuple(sorted(rng.sample(range(1, n + 1), k=rng.randint(1, n))))
                    for _ in range(m)
                }
            )
            if set().union(*map(set, sets)) == set(range(1, n + 1)):
                break
        sc = SetCoverInstance(n, tuple(sets), rng.randint(1, len(sets)))
        g = build_gadget(sc)
        ans, witness = solve_st_exact(g.instance)
        want = solve_set_cover_exact(sc) is not None
        assert ans == want
        if ans:
            canon = canonicalize_solution(g, witness)
            ok, reason = verify_st_solution(g.instance, canon)
            assert ok, reason
            assert sc.is_cover(walks_to_cover(g, witness))


def test_gen_fig3_closure_adds_nothing():
    from snowteam.digraph import transitive_closure

    inst = gen_fig3(5)
    assert transitive_closure(inst).arcs == inst.arcs


def test_gen_fig3():
    inst = gen_fig3(3)
    assert inst.arcs == {(1, 0), (1, 2)}
    assert solve_variant_exact(inst, "min-st") == 2
    inst5 = gen_fig3(5)
    assert len(inst5.arcs) == 4
    assert solve_variant_exact(inst5, "min-st") == 4
    with pytest.raises(ValueError):
        gen_fig3(4)
    with pytest.raises(ValueError):
        gen_fig3(1)
