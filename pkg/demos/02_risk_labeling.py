"""Label graph nodes with binary and probabilistic risk.

Binary labels are the least fixed point of "contains a fatal record, or all
routes out lead to risky nodes". Probabilistic values start from observed
fatality rates and relax toward the RMS of successor values.
"""

import numpy as np

import risklens as rl

log = rl.cliff_generate(episodes=80, max_steps=150, seed=11)
g = rl.build(log, 0.1)
print(f"graph: {g.n_nodes} nodes / {g.n_edges} edges")

binary = rl.label_binary(g)
print(f"binary risky: {binary.n_risky} of {g.n_nodes} nodes -> {binary.risky_ids()}")

# dead ends (truncated episodes) can optionally count as risky too
pess = rl.label_binary(g, dead_ends_risky=True)
note = "" if pess.n_risky != binary.n_risky else " (no node here is a pure dead end)"
print(f"with dead_ends_risky=True: {pess.n_risky} risky{note}")

# where do the risky nodes actually live?
risky_x = g.normalizer.inverse(g.representatives[binary.risky_ids()])[:, 0]
if len(risky_x):
    print(f"risky representatives sit at x in [{risky_x.min():.3f}, {risky_x.max():.3f}] "
          f"(fatal band starts at x=0.9)")

print()
prob = rl.risk_init(g)
print(f"initial values: {np.count_nonzero(prob.values)} nonzero, max={prob.values.max():.3f}")

for total in (10, 50, 200):
    r = rl.risk_iterate(g, rl.risk_init(g), learning_rate=0.01, iterations=total)
    x = g.normalizer.inverse(g.representatives)[:, 0]
    near = r.values[x > 0.8].mean()
    far = r.values[x < 0.2].mean()
    print(f"after {total:>3} iterations: mean risk near cliff {near:.4f}, far side {far:.4f}")

print("\nvalues stay in [0,1] and rise smoothly toward the fatal band;")
print("binary labels only fire where fatality is locally unavoidable.")
