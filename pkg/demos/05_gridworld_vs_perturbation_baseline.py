"""Why transition structure matters: a wall the baseline cannot see.

The blocked_corridor map has lava two cells east of the start, but every
path to it is walled off; the only reachable lava is a long detour away.
A transition-aware explanation over the realized graph refuses to point
anywhere (no risky node within reach). A perturbation baseline that wiggles
coordinates and asks "is that tile lava?" happily blames +x, because it
never checks whether any trajectory can actually get there.
"""

import risklens as rl
from risklens.baseline import grid_spec, perturb_explain

grid = rl.bundled_map("blocked_corridor")
print("\n".join("".join(row) for row in grid.tiles))

log = rl.grid_generate(grid, episodes=300, max_steps=250, seed=20240817)
g = rl.build(log, 0.01)
binary = rl.label_binary(g)
print(f"\n{g.n_nodes} nodes (one per reachable cell), risky: {binary.risky_ids()}")

start = (0.0, 0.0)
risky = binary.risky_ids()
if len(risky):
    print(f"shortest path from start to a risky node: "
          f"{rl.distance_to_risk(g, binary, start, cap=30)} steps")

print("\ntransition-aware direction at the start cell:")
for n in (3, 6, 10):
    ex = rl.direction_of_risk(g, binary, start, n)
    if isinstance(ex, rl.NoDirection):
        print(f"  n={n}: NoDirection ({ex.reason}, {ex.sample_size} nodes in reach)")
    else:
        print(f"  n={n}: g=({ex.g[0]:+.3f}, {ex.g[1]:+.3f})")

print("\nperturbation baseline at the same cell:")
ex = perturb_explain(start, grid_spec(grid, reach=3), samples=1000, seed=7)
print(f"  g=({ex.g[0]:+.3f}, {ex.g[1]:+.3f})  "
      f"[{ex.sample_size} valid perturbations, {ex.risky_count} hit lava]")
print("\nthe baseline blames +x although no run can reach that lava;")
print("the graph knows the corridor is blocked and says so.")
