"""JSON schemas for models, evidence, mass functions, and reports.

Model document::

    {
      "schema_version": 1,
      "frame": ["a", "b", ...],
      "nodes": {"X": [["a", "b"], ["c"]], ...},   # partition blocks per node
      "edges": [["X", "Y"], ...],
      "evidence": [ <evidence object>, ... ]       # optional
    }

Evidence object (also accepted as a standalone file, single or list)::

    {"node": "X", "mass": [{"blocks": [["a", "b"]], "mass": 0.7}, ...]}

Each ``blocks`` entry lists blocks of the node's partition forming a focal
block set; masses must sum to 1 within the mass tolerance.

Mass functions on the base frame serialize as a list of
``{"subset": [labels], "mass": number}`` in canonical (ascending bit mask)
order.

All emitted JSON uses sorted keys, UTF-8, and numbers rounded to 12
significant digits, so identical inputs give byte-identical output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .beliefs import MassFunction
from .errors import ParseError, QmtError
from .frames import Frame, Partition
from .trees import MarkovTree, Network, as_tree, build_network

SCHEMA_VERSION = 1


@dataclass
class ModelDocument:
    """Parsed model file: a network plus any embedded evidence."""

    frame: Frame
    partitions: dict[str, Partition]
    edges: list[tuple[str, str]]
    evidence: list[tuple[str, MassFunction]] = field(default_factory=list)

    def network(self) -> Network:
        return build_network(self.frame, self.partitions, self.edges)

    def tree(self) -> MarkovTree:
        return as_tree(self.network())


def _expect(condition: bool, message: str) -> None:
    if not condition:
        raise ParseError(message)


def parse_model(doc: Any) -> ModelDocument:
    """Validate and convert a decoded model document."""
    _expect(isinstance(doc, dict), "model document must be a JSON object")
    _expect("schema_version" in doc, "model document is missing 'schema_version'")
    _expect(
        doc["schema_version"] == SCHEMA_VERSION,
        f"unsupported schema_version {doc['schema_version']!r}",
    )
    for key in ("frame", "nodes", "edges"):
        _expect(key in doc, f"model document is missing {key!r}")
    labels = doc["frame"]
    _expect(
        isinstance(labels, list) and all(isinstance(x, str) for x in labels),
        "'frame' must be a list of strings",
    )
    try:
        frame = Frame(labels)
    except QmtError as err:
        raise ParseError(f"bad frame: {err}") from None
    nodes = doc["nodes"]
    _expect(isinstance(nodes, dict) and nodes, "'nodes' must be a nonempty object")
    partitions: dict[str, Partition] = {}
    for node, blocks in nodes.items():
        _expect(
            isinstance(blocks, list)
            and all(
                isinstance(b, list) and all(isinstance(x, str) for x in b)
                for b in blocks
            ),
            f"partition at node {node!r} must be a list of label lists",
        )
        try:
            partitions[node] = Partition.from_labels(frame, blocks)
        except QmtError as err:
            raise ParseError(f"bad partition at node {node!r}: {err}") from None
    edges_doc = doc["edges"]
    _expect(isinstance(edges_doc, list), "'edges' must be a list")
    edges: list[tuple[str, str]] = []
    for entry in edges_doc:
        _expect(
            isinstance(entry, list) and len(entry) == 2
            and all(isinstance(x, str) for x in entry),
            f"edge {entry!r} must be a pair of node ids",
        )
        edges.append((entry[0], entry[1]))
    model = ModelDocument(frame, partitions, edges)
    for item in doc.get("evidence", []):
        model.evidence.append(parse_evidence_item(model, item))
    return model


def load_model(path: str | Path) -> ModelDocument:
    try:
        with open(path, encoding="utf-8") as handle:
            doc = json.load(handle)
    except OSError as err:
        raise ParseError(f"cannot read {path}: {err}") from None
    except json.JSONDecodeError as err:
        raise ParseError(f"invalid JSON in {path}: {err}") from None
    return parse_model(doc)


def parse_evidence_item(model: ModelDocument, item: Any) -> tuple[str, MassFunction]:
    """One evidence object -> (node id, mass function on its coarse frame)."""
    _expect(isinstance(item, dict), "evidence item must be a JSON object")
    _expect("node" in item and "mass" in item, "evidence item needs 'node' and 'mass'")
    node = item["node"]
    _expect(node in model.partitions, f"evidence references unknown node {node!r}")
    partition = model.partitions[node]
    block_index = {
        frozenset(block.labels()): idx for idx, block in enumerate(partition.blocks)
    }
    entries = item["mass"]
    _expect(isinstance(entries, list) and entries, "'mass' must be a nonempty list")
    focal: dict[Any, float] = {}
    for entry in entries:
        _expect(
            isinstance(entry, dict) and "blocks" in entry and "mass" in entry,
            "each mass entry needs 'blocks' and 'mass'",
        )
        bits = 0
        for block in entry["blocks"]:
            _expect(
                isinstance(block, list) and all(isinstance(x, str) for x in block),
                "each block must be a list of labels",
            )
            idx = block_index.get(frozenset(block))
            _expect(
                idx is not None,
                f"{sorted(block)!r} is not a block of node {node!r}'s partition",
            )
            bits |= 1 << idx
        subset = partition.coarse_frame.subset_from_bits(bits)
        _expect(subset not in focal, "duplicate focal block set in evidence")
        mass = entry["mass"]
        _expect(isinstance(mass, (int, float)), "'mass' must be a number")
        focal[subset] = float(mass)
    try:
        return node, MassFunction(partition.coarse_frame, focal)
    except QmtError as err:
        raise ParseError(f"bad evidence at node {node!r}: {err}") from None


def load_evidence(model: ModelDocument, path: str | Path) -> list[tuple[str, MassFunction]]:
    """An evidence file: a single evidence object or a list of them."""
    try:
        with open(path, encoding="utf-8") as handle:
            doc = json.load(handle)
    except OSError as err:
        raise ParseError(f"cannot read {path}: {err}") from None
    except json.JSONDecodeError as err:
        raise ParseError(f"invalid JSON in {path}: {err}") from None
    items = doc if isinstance(doc, list) else [doc]
    return [parse_evidence_item(model, item) for item in items]


def dump_model(model: ModelDocument) -> str:
    """Canonical serialization; parse -> dump round-trips byte-identically."""
    doc: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "frame": list(model.frame.labels),
        "nodes": {
            node: model.partitions[node].as_labels()
            for node in sorted(model.partitions)
        },
        "edges": sorted(sorted(edge) for edge in model.edges),
    }
    if model.evidence:
        doc["evidence"] = [
            evidence_to_json(node, mass, model.partitions[node])
            for node, mass in model.evidence
        ]
    return canonical_dumps(doc)


def evidence_to_json(node: str, mass: MassFunction, partition: Partition) -> dict:
    return {
        "node": node,
        "mass": [
            {
                "blocks": [
                    list(partition.blocks[i].labels())
                    for i in range(partition.block_count)
                    if int(bits) >> i & 1
                ],
                "mass": float(value),
            }
            for bits, value in zip(mass.bits, mass.masses)
        ],
    }


def mass_to_json(mass: MassFunction) -> list[dict]:
    """Base-frame serialization: focal subsets in canonical order."""
    return [
        {"subset": list(subset.labels()), "mass": value} for subset, value in mass.items()
    ]


def mass_from_json(frame: Frame, doc: Any) -> MassFunction:
    _expect(isinstance(doc, list) and doc, "mass function must be a nonempty list")
    focal = {}
    for entry in doc:
        _expect(
            isinstance(entry, dict) and "subset" in entry and "mass" in entry,
            "each entry needs 'subset' and 'mass'",
        )
        try:
            subset = frame.subset(entry["subset"])
        except QmtError as err:
            raise ParseError(f"bad subset: {err}") from None
        _expect(subset not in focal, "duplicate focal subset")
        focal[subset] = float(entry["mass"])
    try:
        return MassFunction(frame, focal)
    except QmtError as err:
        raise ParseError(f"bad mass function: {err}") from None


def _round_floats(value: Any) -> Any:
    """Round all floats to 12 significant digits for stable output."""
    if isinstance(value, float):
        return float(f"{value:.12g}")
    if isinstance(value, dict):
        return {k: _round_floats(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round_floats(v) for v in value]
    return value


def canonical_dumps(obj: Any) -> str:
    """Deterministic JSON: sorted keys, 2-space indent, rounded numbers."""
    return json.dumps(_round_floats(obj), sort_keys=True, indent=2) + "\n"


def canonical_line(obj: Any) -> str:
    """Deterministic single-line JSON (for JSON-lines logs)."""
    return json.dumps(_round_floats(obj), sort_keys=True, separators=(",", ":")) + "\n"
