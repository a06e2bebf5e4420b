"""Build epsilon transition graphs from a synthetic interaction log.

Walks the full round trip: generate a cliff-world log, write it to JSONL,
ingest it back, then discretize at a few resolutions and look at what the
graph retains.
"""

from pathlib import Path

import risklens as rl

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

log = rl.cliff_generate(episodes=60, max_steps=150, seed=404)
print(f"generated {len(log.episodes)} episodes, "
      f"{log.n_records} records, {log.n_transitions} transitions")

# round trip through the on-disk format
log_path = OUT / "cliff.jsonl"
rl.emit(log, log_path)
rl.write_schema(log.schema, OUT / "cliff.schema.json")
log2 = rl.ingest(log_path, rl.read_schema(OUT / "cliff.schema.json"))
assert log2.n_records == log.n_records
print(f"round trip through {log_path.name}: {log2.n_records} records back")

fatal = sum(ep[-1].fatal for ep in log.episodes)
print(f"{fatal} episodes ended in the fatal band\n")

# coarser epsilon -> fewer nodes, more aggregation per node
for epsilon in (0.05, 0.1, 0.2):
    g = rl.build(log, epsilon)
    self_loops = sum(1 for e in g.edges() if e.src == e.dst)
    print(f"epsilon={epsilon:<5} nodes={g.n_nodes:<4} edges={g.n_edges:<5} "
          f"self-loops={self_loops:<4} fatal-nodes={int((g.fatal_counts > 0).sum())}")

g = rl.build(log, 0.1)
from risklens.graph import save

save(g, OUT / "cliff_graph.json")
print(f"\nsaved epsilon=0.1 graph to {OUT / 'cliff_graph.json'}")

# every stored state maps back to a node within epsilon
nid = g.find_node(log.episodes[0][0].state)
rep = g.normalizer.inverse(g.representatives[nid])
print(f"first state {log.episodes[0][0].state} -> node {nid} (rep ~ {rep.round(3)})")
