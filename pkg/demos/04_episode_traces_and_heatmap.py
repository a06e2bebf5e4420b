"""Trace one episode's distance-to-risk and render its direction heatmap.

For every step of an episode: BFS hops from the current node to the nearest
risky node (capped), plus the local direction-of-risk. The trace lands in a
CSV and a PPM heatmap (blue = feature pushes toward risk, red = away).
"""

from pathlib import Path

import risklens as rl
from risklens.explain import CAP_EXCEEDED

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

log = rl.cliff_generate(episodes=120, max_steps=200, seed=23)
g = rl.build(log, 0.08)
binary = rl.label_binary(g)

# pick an episode that actually ends in the fatal band
episode = next(ep for ep in log.episodes if ep[-1].fatal)
states = [rec.state for rec in episode]
print(f"episode {episode[0].episode_id}: {len(states)} steps, ends fatal")

trace = rl.trace_episode(g, binary, states, n=6, cap=8)

def fmt(d):
    return ">8" if d is CAP_EXCEEDED else str(d)

profile = [fmt(d) for d in trace.distances]
print("distance-to-risk profile:", " ".join(profile[:30]), "...")
print("last ten steps:         ", " ".join(profile[-10:]))

csv_path = OUT / "episode_trace.csv"
rl.trace_csv(trace, csv_path)
print(f"\nwrote {csv_path} ({csv_path.stat().st_size} bytes)")

ppm_path = OUT / "episode_heatmap.ppm"
rl.render_heatmap(trace, ppm_path, vscale=24)
print(f"wrote {ppm_path}: {len(states)}x{2 * 24} pixels")

# the round trip preserves everything, including capped steps
back = rl.read_trace_csv(csv_path)
assert back.distances == trace.distances
print("CSV round trip exact")
