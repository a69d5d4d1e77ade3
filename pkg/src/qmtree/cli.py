"""Command-line front end.

Subcommands::

    qmtree validate MODEL
    qmtree propagate MODEL [EVIDENCE ...] [--node ID | --all] [--trace PATH]
                     [--skip-markov-check] [--mode batch|concurrent] [--seed N]
    qmtree oracle-check MODEL [EVIDENCE ...] [--tol X]

Exit codes: 0 success; 1 input/parse/structure errors; 2 Markov-check
violation (validate); 3 total conflict during propagation; 4 deviation
above tolerance (oracle-check).

The env var ``QMT_MAX_FRAME`` overrides the oracle's frame cap.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Sequence

from . import modelio
from .engine import Engine, new_engine
from .errors import QmtError, TotalConflict
from .modelio import ModelDocument, canonical_dumps
from .oracle import ORACLE_MAX_FRAME, check_marginals_against_global
from .trees import validate_markov

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_MARKOV = 2
EXIT_CONFLICT = 3
EXIT_DEVIATION = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmtree",
        description="Propagate belief functions in a qualitative Markov tree.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser(
        "validate", help="check that a model is a qualitative Markov tree"
    )
    p_validate.add_argument("model", help="model JSON file")

    p_prop = sub.add_parser(
        "propagate", help="enter evidence, propagate, and print marginals"
    )
    p_prop.add_argument("model", help="model JSON file")
    p_prop.add_argument("evidence", nargs="*", help="evidence JSON files")
    group = p_prop.add_mutually_exclusive_group()
    group.add_argument("--node", help="print only this node's marginal")
    group.add_argument("--all", action="store_true", help="print every marginal (default)")
    p_prop.add_argument("--trace", metavar="PATH", help="write the firing log as JSON lines")
    p_prop.add_argument(
        "--skip-markov-check",
        action="store_true",
        help="trust the model instead of running the Markov validation",
    )
    p_prop.add_argument("--mode", choices=("batch", "concurrent"), default="batch")
    p_prop.add_argument("--seed", type=int, default=0, help="schedule seed (concurrent mode)")

    p_check = sub.add_parser(
        "oracle-check",
        help="compare engine marginals against one global combination",
    )
    p_check.add_argument("model", help="model JSON file")
    p_check.add_argument("evidence", nargs="*", help="evidence JSON files")
    p_check.add_argument("--tol", type=float, default=1e-9, help="max per-mass deviation")
    return parser


def _fail(err: Exception, code: int) -> int:
    sys.stderr.write(
        canonical_dumps({"error": type(err).__name__, "message": str(err)})
    )
    return code


def _load_all(model_path: str, evidence_paths: Sequence[str]) -> tuple[ModelDocument, list]:
    model = modelio.load_model(model_path)
    evidence = list(model.evidence)
    for path in evidence_paths:
        evidence.extend(modelio.load_evidence(model, path))
    return model, evidence


def cmd_validate(args) -> int:
    try:
        model = modelio.load_model(args.model)
        tree = model.tree()
    except QmtError as err:
        return _fail(err, EXIT_INPUT)
    report = validate_markov(tree)
    sys.stdout.write(canonical_dumps(report.to_json()))
    return EXIT_OK if report.ok else EXIT_MARKOV


def _marginals_json(engine: Engine, nodes: Sequence[str]) -> dict:
    out: dict = {}
    for node in nodes:
        marginal = engine.marginal(node)
        partition = marginal.partition
        entry: dict = {
            "mass": modelio.evidence_to_json(node, marginal.mass, partition)["mass"]
        }
        if partition.block_count <= 12:
            entry["belief"] = [
                {
                    "blocks": [
                        list(partition.blocks[i].labels())
                        for i in range(partition.block_count)
                        if bits >> i & 1
                    ],
                    "belief": value,
                }
                for bits, value in sorted(marginal.belief_table().items())
            ]
        out[node] = entry
    return out


def cmd_propagate(args) -> int:
    try:
        model, evidence = _load_all(args.model, args.evidence)
        tree = model.tree()
        engine = new_engine(tree, validate=not args.skip_markov_check)
    except QmtError as err:
        return _fail(err, EXIT_INPUT)
    try:
        for node, mass in evidence:
            engine.enter_evidence(node, mass)
        if args.mode == "concurrent":
            log = engine.propagate_concurrent(args.seed)
        else:
            log = engine.propagate_batch()
    except TotalConflict as err:
        return _fail(err, EXIT_CONFLICT)
    except QmtError as err:
        return _fail(err, EXIT_INPUT)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as handle:
            for event in log:
                handle.write(modelio.canonical_line(event.to_json()))
    nodes = [args.node] if args.node else list(tree.node_ids)
    try:
        marginals = _marginals_json(engine, nodes)
    except QmtError as err:
        return _fail(err, EXIT_INPUT)
    doc = {
        "schema_version": modelio.SCHEMA_VERSION,
        "mode": args.mode,
        "firings": len(log),
        "marginals": marginals,
    }
    sys.stdout.write(canonical_dumps(doc))
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    max_frame = ORACLE_MAX_FRAME
    env_cap = os.environ.get("QMT_MAX_FRAME")
    if env_cap:
        try:
            max_frame = int(env_cap)
        except ValueError:
            return _fail(ValueError(f"QMT_MAX_FRAME={env_cap!r} is not an integer"), EXIT_INPUT)
    try:
        model, evidence = _load_all(args.model, args.evidence)
        tree = model.tree()
        by_node: dict[str, list] = {}
        for node, mass in evidence:
            by_node.setdefault(node, []).append(mass)
        report = check_marginals_against_global(
            tree, by_node, args.tol, max_frame=max_frame
        )
    except TotalConflict as err:
        return _fail(err, EXIT_CONFLICT)
    except QmtError as err:
        return _fail(err, EXIT_INPUT)
    sys.stdout.write(canonical_dumps(report.to_json()))
    return EXIT_OK if report.passed else EXIT_DEVIATION


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "validate":
        return cmd_validate(args)
    if args.command == "propagate":
        return cmd_propagate(args)
    return cmd_oracle_check(args)


if __name__ == "__main__":
    sys.exit(main())
