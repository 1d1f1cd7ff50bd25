"""Knowledge-graph storage, triple-file ingestion and symbolic set operators.

Graphs are immutable after construction.  The train/valid/test split is
cumulative: the valid graph holds train+validation edges and the test graph
holds train+validation+test edges, so every query can be answered under
three progressively larger edge sets.

The set-level operators in this module (projection, intersection, union,
complement) are the exact ground-truth semantics that the learned embedding
operators approximate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, GraphError, ParseError

__all__ = [
    "KnowledgeGraph",
    "GraphSplits",
    "LoadReport",
    "load_triples",
    "load_vocab",
    "save_splits",
    "load_splits",
    "project_set",
    "set_intersection",
    "set_union",
    "set_complement",
]

TIERS = ("train", "valid", "test")


class KnowledgeGraph:
    """Entity/relation vocabularies plus per-relation adjacency.

    ``forward_index[r][h]`` is the frozenset of tails t with (h, r, t) in the
    graph; ``incoming[t]`` lists (relation, head) pairs sorted for
    deterministic sampling.
    """

    __slots__ = ("entity_count", "relation_count", "triples", "forward_index", "incoming")

    def __init__(self, entity_count: int, relation_count: int, triples):
        triples = frozenset((int(h), int(r), int(t)) for h, r, t in triples)
        for h, r, t in triples:
            if not (0 <= h < entity_count and 0 <= t < entity_count):
                raise GraphError(f"entity id out of range in triple ({h}, {r}, {t})")
            if not 0 <= r < relation_count:
                raise GraphError(f"relation id out of range in triple ({h}, {r}, {t})")
        self.entity_count = int(entity_count)
        self.relation_count = int(relation_count)
        self.triples = triples
        forward: dict[int, dict[int, set[int]]] = {}
        incoming: dict[int, list[tuple[int, int]]] = {}
        for h, r, t in triples:
            forward.setdefault(r, {}).setdefault(h, set()).add(t)
            incoming.setdefault(t, []).append((r, h))
        self.forward_index = {
            r: {h: frozenset(ts) for h, ts in heads.items()} for r, heads in forward.items()
        }
        self.incoming = {t: tuple(sorted(pairs)) for t, pairs in incoming.items()}

    @property
    def entities(self) -> range:
        return range(self.entity_count)

    def __len__(self) -> int:
        return len(self.triples)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, KnowledgeGraph)
            and self.entity_count == other.entity_count
            and self.relation_count == other.relation_count
            and self.triples == other.triples
        )


@dataclass(frozen=True)
class GraphSplits:
    """Cumulative graphs: train <= valid <= test (by triple inclusion)."""

    train: KnowledgeGraph
    valid: KnowledgeGraph
    test: KnowledgeGraph

    def __post_init__(self):
        if not (self.train.triples <= self.valid.triples <= self.test.triples):
            raise GraphError("splits must be cumulative: train <= valid <= test")

    def graph(self, tier: str) -> KnowledgeGraph:
        if tier not in TIERS:
            raise ValueError(f"unknown tier {tier!r}")
        return getattr(self, tier)


# -- symbolic set operators ------------------------------------------------


def project_set(kg: KnowledgeGraph, source, relation: int) -> frozenset[int]:
    """Union of relation-r neighbours over the source entities."""
    if not 0 <= relation < kg.relation_count:
        raise GraphError(f"invalid relation id {relation}")
    heads = kg.forward_index.get(relation, {})
    out: set[int] = set()
    for v in source:
        out |= heads.get(v, frozenset())
    return frozenset(out)


def set_intersection(kg: KnowledgeGraph, *sets) -> frozenset[int]:
    result = set(sets[0])
    for s in sets[1:]:
        result &= set(s)
    return frozenset(result)


def set_union(kg: KnowledgeGraph, *sets) -> frozenset[int]:
    result: set[int] = set()
    for s in sets:
        result |= set(s)
    return frozenset(result)


def set_complement(kg: KnowledgeGraph, entity_set) -> frozenset[int]:
    """Complement relative to the full entity vocabulary of the graph."""
    return frozenset(range(kg.entity_count)) - frozenset(entity_set)


# -- ingestion ---------------------------------------------------------------


@dataclass
class LoadReport:
    """Structured summary of one ingest run."""

    mode: str
    entity_count: int
    relation_count: int
    lines: dict[str, int] = field(default_factory=dict)
    duplicates: dict[str, int] = field(default_factory=dict)
    cross_split_repeats: dict[str, int] = field(default_factory=dict)
    reverse_relations_added: bool = False

    def as_text(self) -> str:
        rows = [
            f"mode: {self.mode}",
            f"entities: {self.entity_count}",
            f"relations: {self.relation_count}",
        ]
        for tier in TIERS:
            rows.append(
                f"{tier}: {self.lines.get(tier, 0)} lines, "
                f"{self.duplicates.get(tier, 0)} duplicates, "
                f"{self.cross_split_repeats.get(tier, 0)} repeats of earlier splits"
            )
        if self.reverse_relations_added:
            rows.append("reverse relations: added")
        return "\n".join(rows)

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=True)


def load_vocab(path) -> dict[str, int]:
    """Read a `name<TAB>id` vocabulary file."""
    mapping: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(f"{path}:{lineno}: expected `name<TAB>id`, got {line!r}")
            name, ident = parts
            try:
                mapping[name] = int(ident)
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: id {ident!r} is not an integer") from exc
    return mapping


def _read_raw(path) -> list[tuple[str, str, str]]:
    rows: list[tuple[str, str, str]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ParseError(
                    f"{path}:{lineno}: expected head<TAB>relation<TAB>tail, got {len(parts)} fields"
                )
            rows.append((parts[0], parts[1], parts[2]))
    return rows


class _IdAssigner:
    """First-seen-order id assignment for string tokens."""

    def __init__(self, fixed: dict[str, int] | None = None, kind: str = "entity"):
        self.fixed = fixed
        self.kind = kind
        self.mapping: dict[str, int] = dict(fixed) if fixed else {}

    def resolve(self, token: str) -> int:
        if self.fixed is not None:
            if token not in self.mapping:
                raise DataError(f"unknown {self.kind} {token!r} (not in vocabulary)")
            return self.mapping[token]
        if token not in self.mapping:
            self.mapping[token] = len(self.mapping)
        return self.mapping[token]


def load_triples(
    train_path,
    valid_path=None,
    test_path=None,
    entity_vocab: dict[str, int] | None = None,
    relation_vocab: dict[str, int] | None = None,
    add_reverse: bool = False,
) -> tuple[GraphSplits, LoadReport]:
    """Ingest tab-separated triple files into cumulative graph splits.

    Tokens may be integer ids (numeric mode) or strings; strings are mapped
    through the supplied vocabularies or assigned ids in first-seen order.
    Missing valid/test paths reuse the previous split's edge set.
    """
    paths = {"train": train_path, "valid": valid_path, "test": test_path}
    raw = {tier: _read_raw(p) if p is not None else [] for tier, p in paths.items()}

    all_tokens = [tok for rows in raw.values() for row in rows for tok in row]
    numeric = (
        entity_vocab is None
        and relation_vocab is None
        and all_tokens
        and all(tok.lstrip("-").isdigit() for tok in all_tokens)
    )
    if numeric:
        mode = "numeric"
        resolve_e = resolve_r = int
    else:
        mode = "vocab" if entity_vocab or relation_vocab else "string"
        entities = _IdAssigner(entity_vocab, "entity")
        relations = _IdAssigner(relation_vocab, "relation")
        resolve_e, resolve_r = entities.resolve, relations.resolve

    report = LoadReport(mode=mode, entity_count=0, relation_count=0)
    cumulative: set[tuple[int, int, int]] = set()
    per_tier: dict[str, frozenset] = {}
    for tier in TIERS:
        seen_here: set[tuple[int, int, int]] = set()
        dupes = repeats = 0
        for h, r, t in raw[tier]:
            triple = (resolve_e(h), resolve_r(r), resolve_e(t))
            if triple in seen_here:
                dupes += 1
                continue
            seen_here.add(triple)
            if triple in cumulative:
                repeats += 1
        cumulative |= seen_here
        report.lines[tier] = len(raw[tier])
        report.duplicates[tier] = dupes
        report.cross_split_repeats[tier] = repeats
        per_tier[tier] = frozenset(cumulative)

    ids = [(h, t) for h, _, t in cumulative]
    if numeric:
        if any(h < 0 or t < 0 for h, t in ids):
            raise DataError("numeric mode requires nonnegative ids")
        entity_count = 1 + max(max(h, t) for h, t in ids) if ids else 0
        relation_count = 1 + max(r for _, r, _ in cumulative) if cumulative else 0
    else:
        entity_count = (
            (max(entity_vocab.values()) + 1) if entity_vocab else len(entities.mapping)
        )
        relation_count = (
            (max(relation_vocab.values()) + 1) if relation_vocab else len(relations.mapping)
        )

    if add_reverse:
        base = relation_count
        per_tier = {
            tier: frozenset(triples | {(t, r + base, h) for h, r, t in triples})
            for tier, triples in per_tier.items()
        }
        relation_count *= 2
        report.reverse_relations_added = True

    report.entity_count = entity_count
    report.relation_count = relation_count
    splits = GraphSplits(
        train=KnowledgeGraph(entity_count, relation_count, per_tier["train"]),
        valid=KnowledgeGraph(entity_count, relation_count, per_tier["valid"]),
        test=KnowledgeGraph(entity_count, relation_count, per_tier["test"]),
    )
    return splits, report


# -- canonical graph file ----------------------------------------------------

_GRAPH_FORMAT_VERSION = 1


def _triple_array(triples) -> np.ndarray:
    arr = np.array(sorted(triples), dtype=np.int64).reshape(-1, 3)
    return arr


def save_splits(splits: GraphSplits, path) -> None:
    """Write the cumulative splits to one .npz container (lossless)."""
    train = splits.train.triples
    valid_extra = splits.valid.triples - train
    test_extra = splits.test.triples - splits.valid.triples
    meta = {
        "format_version": _GRAPH_FORMAT_VERSION,
        "entity_count": splits.train.entity_count,
        "relation_count": splits.train.relation_count,
    }
    np.savez_compressed(
        path,
        train=_triple_array(train),
        valid_extra=_triple_array(valid_extra),
        test_extra=_triple_array(test_extra),
        meta=np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8),
    )


def load_splits(path) -> GraphSplits:
    path = Path(path)
    if not path.exists():
        raise DataError(f"graph file {path} does not exist")
    with np.load(path) as data:
        try:
            meta = json.loads(bytes(data["meta"].tobytes()).decode("utf-8"))
            train = [tuple(row) for row in data["train"]]
            valid_extra = [tuple(row) for row in data["valid_extra"]]
            test_extra = [tuple(row) for row in data["test_extra"]]
        except KeyError as exc:
            raise DataError(f"graph file {path} is missing field {exc}") from exc
    if meta.get("format_version") != _GRAPH_FORMAT_VERSION:
        raise DataError(
            f"graph file {path} has format version {meta.get('format_version')}, expected {_GRAPH_FORMAT_VERSION}"
        )
    ne, nr = meta["entity_count"], meta["relation_count"]
    train_set = frozenset(train)
    valid_set = train_set | frozenset(valid_extra)
    test_set = valid_set | frozenset(test_extra)
    return GraphSplits(
        train=KnowledgeGraph(ne, nr, train_set),
        valid=KnowledgeGraph(ne, nr, valid_set),
        test=KnowledgeGraph(ne, nr, test_set),
    )
