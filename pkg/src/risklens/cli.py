"""Command-line front end for the full pipeline.

Subcommands: gen-grid, gen-cliff, build-graph, label-risk, explain,
trace-risk, heatmap, compare-baseline. All commands are deterministic given
identical inputs and seeds; failures print one JSON error line to stderr and
exit nonzero. JSON outputs use sorted keys so runs can be diffed byte for
byte.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import baseline as baseline_mod
from . import explain as explain_mod
from . import graph as graph_mod
from . import logmodel, render, risk, toyenvs


def _parse_state(text: str) -> np.ndarray:
    try:
        return np.array([float(part) for part in text.split(",")], dtype=float)
    except ValueError:
        raise ValueError(
            f"state must be comma-separated numbers, got {text!r}"
        ) from None


def _default_schema_path(log_path: str | Path) -> Path:
    return Path(log_path).with_suffix(".schema.json")


def _emit_json(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _explanation_payload(result, graph) -> dict:
    if isinstance(result, explain_mod.NoDirection):
        return {
            "no_direction": True,
            "reason": result.reason,
            "sample_size": result.sample_size,
            "risky_count": result.risky_count,
        }
    payload = {
        "no_direction": False,
        "mode": result.mode,
        "features": list(graph.schema.names) if graph is not None else None,
        "g": [float(v) for v in result.g],
        "bias": result.bias,
        "sample_size": result.sample_size,
        "risky_count": result.risky_count,
    }
    if payload["features"] is None:
        del payload["features"]
    return payload


def _cmd_gen_grid(args) -> int:
    grid = toyenvs.GridMap.from_file(args.map)
    log = toyenvs.grid_generate(grid, args.episodes, args.max_steps, args.seed)
    logmodel.emit(log, args.out)
    schema_out = args.schema_out or _default_schema_path(args.out)
    logmodel.write_schema(log.schema, schema_out)
    return 0


def _cmd_gen_cliff(args) -> int:
    log = toyenvs.cliff_generate(
        args.episodes,
        args.max_steps,
        args.seed,
        step_size=args.step_size,
        fatal_x=args.fatal_x,
    )
    logmodel.emit(log, args.out)
    schema_out = args.schema_out or _default_schema_path(args.out)
    logmodel.write_schema(log.schema, schema_out)
    return 0


def _cmd_build_graph(args) -> int:
    schema_path = args.schema or _default_schema_path(args.log)
    schema = logmodel.read_schema(schema_path)
    log = logmodel.ingest(args.log, schema)
    g = graph_mod.build(log, args.epsilon, metric=args.metric)
    graph_mod.save(g, args.out)
    return 0


def _cmd_label_risk(args) -> int:
    g = graph_mod.load(args.graph)
    if args.mode in ("binary", "both"):
        g.binary_risk = risk.label_binary(g, dead_ends_risky=args.dead_ends_risky)
    if args.mode in ("probabilistic", "both"):
        g.prob_risk = risk.risk_iterate(
            g, risk.risk_init(g), args.learning_rate, args.iterations
        )
    graph_mod.save(g, args.out or args.graph)
    return 0


def _require_binary(g) -> risk.BinaryRiskLabeling:
    if g.binary_risk is None:
        raise ValueError("graph carries no binary risk labeling; run label-risk")
    return g.binary_risk


def _require_prob(g) -> risk.ProbabilisticRisk:
    if g.prob_risk is None:
        raise ValueError(
            "graph carries no probabilistic risk labeling; "
            "run label-risk --mode probabilistic"
        )
    return g.prob_risk


def _cmd_explain(args) -> int:
    g = graph_mod.load(args.graph)
    state = _parse_state(args.state)
    if args.mode == "classification":
        result = explain_mod.direction_of_risk(
            g, _require_binary(g), state, args.depth, reg=args.reg, iters=args.iters
        )
    else:
        result = explain_mod.direction_of_risk_regression(
            g, _require_prob(g), state, args.depth, reg=args.reg_regression
        )
    payload = _explanation_payload(result, g)
    if args.denormalize and not payload["no_direction"]:
        payload["g_raw"] = [float(v) for v in result.denormalized(g.normalizer)]
    _emit_json(payload, args.out)
    return 0


def _cmd_trace_risk(args) -> int:
    g = graph_mod.load(args.graph)
    log = logmodel.ingest(args.log, g.schema)
    if args.episode is None:
        episode = log.episodes[0]
    else:
        matches = [ep for ep in log.episodes if ep[0].episode_id == args.episode]
        if not matches:
            raise ValueError(f"log has no episode {args.episode!r}")
        episode = matches[0]
    states = np.array([rec.state for rec in episode])
    trace = explain_mod.trace_episode(
        g,
        _require_binary(g),
        states,
        args.depth,
        args.cap,
        mode=args.mode,
        prob_risk=g.prob_risk if args.mode == "regression" else None,
        iters=args.iters,
    )
    render.trace_csv(trace, args.out)
    return 0


def _cmd_heatmap(args) -> int:
    trace = render.read_trace_csv(args.trace)
    exclude = tuple(n for n in (args.exclude_features or "").split(",") if n)
    render.render_heatmap(trace, args.out, vscale=args.vscale, exclude=exclude)
    return 0


def _cmd_compare_baseline(args) -> int:
    g = graph_mod.load(args.graph)
    grid = toyenvs.GridMap.from_file(args.map)
    state = _parse_state(args.state)
    aware = explain_mod.direction_of_risk(
        g, _require_binary(g), state, args.depth, reg=args.reg, iters=args.iters
    )
    spec = baseline_mod.grid_spec(grid, reach=args.reach)
    blind = baseline_mod.perturb_explain(
        state,
        spec,
        samples=args.samples,
        seed=args.seed,
        reg=args.reg,
        iters=args.iters,
    )
    payload = {
        "state": [float(v) for v in state],
        "transition_aware": _explanation_payload(aware, g),
        "perturbation_baseline": _explanation_payload(blind, None),
    }
    _emit_json(payload, args.out)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="risklens",
        description="Risk explanations for sequential decision logs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-grid", help="generate a gridworld log from a map file")
    p.add_argument("--map", required=True, help="ASCII map file")
    p.add_argument("--episodes", type=int, required=True)
    p.add_argument("--max-steps", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output JSONL log")
    p.add_argument("--schema-out", default=None, help="schema sidecar path")
    p.set_defaults(func=_cmd_gen_grid)

    p = sub.add_parser("gen-cliff", help="generate a continuous cliff-world log")
    p.add_argument("--episodes", type=int, required=True)
    p.add_argument("--max-steps", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--step-size", type=float, default=0.08)
    p.add_argument("--fatal-x", type=float, default=0.9)
    p.add_argument("--out", required=True, help="output JSONL log")
    p.add_argument("--schema-out", default=None, help="schema sidecar path")
    p.set_defaults(func=_cmd_gen_cliff)

    p = sub.add_parser("build-graph", help="build a transition graph from a log")
    p.add_argument("--log", required=True, help="JSONL log")
    p.add_argument("--schema", default=None, help="schema JSON (default: <log>.schema.json)")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--metric", default="euclidean")
    p.add_argument("--out", required=True, help="output graph JSON")
    p.set_defaults(func=_cmd_build_graph)

    p = sub.add_parser("label-risk", help="attach risk labelings to a graph file")
    p.add_argument("--graph", required=True)
    p.add_argument("--mode", choices=("binary", "probabilistic", "both"), default="binary")
    p.add_argument("--dead-ends-risky", action="store_true")
    p.add_argument("--learning-rate", type=float, default=0.01)
    p.add_argument("--iterations", type=int, default=50)
    p.add_argument("--out", default=None, help="output graph JSON (default: in place)")
    p.set_defaults(func=_cmd_label_risk)

    p = sub.add_parser("explain", help="direction of risk at a query state")
    p.add_argument("--graph", required=True)
    p.add_argument("--state", required=True, help="comma-separated raw feature values")
    p.add_argument("--depth", type=int, required=True, help="reachability hop budget")
    p.add_argument(
        "--mode", choices=("classification", "regression"), default="classification"
    )
    p.add_argument("--reg", type=float, default=1e-3)
    p.add_argument("--reg-regression", type=float, default=0.0)
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--denormalize", action="store_true", help="also report raw-unit weights")
    p.add_argument("--out", default=None, help="output JSON (default: stdout)")
    p.set_defaults(func=_cmd_explain)

    p = sub.add_parser("trace-risk", help="per-step distances and directions for an episode")
    p.add_argument("--graph", required=True)
    p.add_argument("--log", required=True, help="JSONL log holding the episode")
    p.add_argument("--episode", default=None, help="episode id (default: first)")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--cap", type=int, required=True, help="distance search cap")
    p.add_argument(
        "--mode", choices=("classification", "regression"), default="classification"
    )
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--out", required=True, help="output CSV")
    p.set_defaults(func=_cmd_trace_risk)

    p = sub.add_parser("heatmap", help="render a trace CSV as a PPM heatmap")
    p.add_argument("--trace", required=True, help="trace CSV from trace-risk")
    p.add_argument("--vscale", type=int, default=5)
    p.add_argument(
        "--exclude-features", default=None, help="comma-separated feature names to hide"
    )
    p.add_argument("--out", required=True, help="output PPM image")
    p.set_defaults(func=_cmd_heatmap)

    p = sub.add_parser(
        "compare-baseline",
        help="transition-aware explanation vs perturbation baseline at one state",
    )
    p.add_argument("--graph", required=True)
    p.add_argument("--map", required=True, help="ASCII map file for the baseline oracle")
    p.add_argument("--state", required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--reach", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reg", type=float, default=1e-3)
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--out", default=None, help="output JSON (default: stdout)")
    p.set_defaults(func=_cmd_compare_baseline)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        sys.stderr.write(json.dumps({"error": str(exc)}, sort_keys=True) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
