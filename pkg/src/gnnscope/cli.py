"""Command-line interface: predict headlessly, list models, run the service.

Exit codes: 0 success, 2 flag errors (the message names the flag), 3 engine
errors (the message carries the stable engine error name).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .datasets import load_dataset, parse_graph_json, select_inference_target
from .errors import EngineError
from .model import list_models, load_model, resolve_bundle
from .service import ServiceConfig, serve
from .trace import serialize_trace

_TASKS = {"node": "node_classification", "graph": "graph_classification",
          "link": "link_prediction"}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gnnscope",
        description="Glass-box GNN inference with full computation traces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("predict", help="run one prediction and dump its trace")
    p.add_argument("--model", required=True, choices=("gcn", "gat", "sage"))
    p.add_argument("--task", required=True, choices=("node", "graph", "link"))
    p.add_argument("--dataset", choices=("mutag", "karate", "twitch"))
    p.add_argument("--graph-index", type=int,
                   help="graph selector for collection datasets")
    p.add_argument("--node", type=int, help="target node index")
    p.add_argument("--edge", help="target node pair as A,B")
    p.add_argument("--input", help="path to a graph JSON file instead of --dataset")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="where to write the trace JSON")
    p.add_argument("--data-dir", help="override the dataset fixture directory")

    m = sub.add_parser("models", help="list the shipped model catalog")
    m.add_argument("--bundle-dir", help="override the bundle directory")

    s = sub.add_parser("serve", help="run the HTTP service")
    s.add_argument("--port", type=int, default=8000)
    s.add_argument("--bundle-dir", help="override the bundle directory")
    s.add_argument("--dataset-dir", help="override the dataset directory")
    s.add_argument("--max-trace-nodes", type=int, default=2000)
    s.add_argument("--no-cors", action="store_true",
                   help="disable CORS headers")
    return parser


def _cmd_predict(args, parser: argparse.ArgumentParser) -> int:
    task = _TASKS[args.task]
    if (args.dataset is None) == (args.input is None):
        parser.error("provide exactly one of --dataset or --input")

    if args.input is not None:
        graph = parse_graph_json(Path(args.input).read_bytes())
        if task == "graph_classification":
            target = "graph"
        elif task == "node_classification":
            if args.node is None:
                parser.error("--node is required for --task node")
            target = args.node
        else:
            if args.edge is None:
                parser.error("--edge is required for --task link")
            target = _parse_edge(args.edge, parser)
        class_names = None
    else:
        dataset = load_dataset(args.dataset, args.data_dir)
        class_names = dataset[0].class_names
        if task == "graph_classification":
            if args.graph_index is None:
                parser.error("--graph-index is required for --task graph")
            selector = args.graph_index
        elif task == "node_classification":
            if args.node is None:
                parser.error("--node is required for --task node")
            selector = args.node
        else:
            if args.edge is None:
                parser.error("--edge is required for --task link")
            selector = _parse_edge(args.edge, parser)
        graph, target = select_inference_target(dataset, task, selector)

    entry = resolve_bundle(args.model, task, args.dataset)
    model = load_model(entry)
    prediction, trace = model.predict(graph, target, rng_seed=args.seed)

    if args.out:
        Path(args.out).write_bytes(serialize_trace(trace))

    label = str(prediction.predicted_class)
    if class_names and task != "link_prediction":
        label = f"{prediction.predicted_class} ({class_names[prediction.predicted_class]})"
    probs = ", ".join(f"{p:.4f}" for p in prediction.probabilities)
    print(f"task: {task}")
    print(f"target: {prediction.target}")
    print(f"predicted class: {label}")
    print(f"probabilities: [{probs}]")
    print(f"trace: {prediction.trace_id}" + (f" -> {args.out}" if args.out else ""))
    return 0


def _parse_edge(text: str, parser: argparse.ArgumentParser) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        parser.error("--edge expects two indices as A,B")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        parser.error("--edge expects integer indices as A,B")


def _cmd_models(args) -> int:
    for entry in list_models(args.bundle_dir):
        print(f"{entry.variant:5s} {entry.task:22s} {entry.dataset_id:7s} "
              f"{entry.path.name}")
    return 0


def _cmd_serve(args) -> int:
    config = ServiceConfig(port=args.port,
                           max_trace_nodes=args.max_trace_nodes,
                           cors_allowed=not args.no_cors)
    if args.bundle_dir:
        config.bundle_dir = Path(args.bundle_dir)
    if args.dataset_dir:
        config.dataset_dir = Path(args.dataset_dir)
    try:
        config.validate()
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    serve(config)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "predict":
            return _cmd_predict(args, parser)
        if args.command == "models":
            return _cmd_models(args)
        return _cmd_serve(args)
    except EngineError as exc:
        print(f"error: {exc.name}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
