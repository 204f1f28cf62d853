"""Set-Cover gadget round trip.

Encodes a set system as a clearing instance, solves it exactly, and reads a
cover back off the witness walks; then shows that shrinking the budget
makes the gadget unsolvable.
"""

from snowteam import (
    SetCoverInstance,
    build_gadget,
    cover_to_walks,
    solve_set_cover_exact,
    solve_st_exact,
    sources,
    walks_to_cover,
)

sc = SetCoverInstance(
    n_items=5, sets=((1, 3, 4), (2, 3), (2, 4, 5), (3, 4, 5)), k=2
)
print("universe 1..5, sets:", sc.sets, "budget", sc.k)
print("brute-force cover:", solve_set_cover_exact(sc))

gadget = build_gadget(sc)
inst = gadget.instance
print(f"\ngadget: {inst.n} vertices, {len(inst.arcs)} arcs, "
      f"{len(sources(inst))} sources, {inst.total_ploughs()} ploughs")

answer, witness = solve_st_exact(inst)
print("clearing the gadget:", "YES" if answer else "NO")
print("cover read off the witness:", walks_to_cover(gadget, witness))

print("\nforward translation: cover {1, 3} -> walks")
sol = cover_to_walks(gadget, {1, 3})
for walk in sol.walks[-2:]:
    print("  z-walk:", " -> ".join(gadget.name_of(v) for v in walk.vertices))

tight = SetCoverInstance(sc.n_items, sc.sets, k=1)
print("\nno single set covers the universe:", solve_set_cover_exact(tight))
print("budget-1 gadget:", "YES" if solve_st_exact(build_gadget(tight).instance)[0] else "NO")
