"""Graph value types, SNAP edge-list I/O and a brute-force k-hop oracle."""

from __future__ import annotations

import enum
from collections import defaultdict
from typing import Iterable, Mapping, NamedTuple, Sequence, TextIO

NodeId = int

# Reserved marker for empty cols_vector slots; never a valid node id.
SENTINEL: NodeId = 2**64 - 1


class ParseError(ValueError):
    def __init__(self, lineno: int, message: str, source: str | None = None):
        self.lineno = lineno
        self.source = source
        where = f"{source}:{lineno}" if source else f"line {lineno}"
        super().__init__(f"{where}: {message}")


class Edge(NamedTuple):
    src: NodeId
    dst: NodeId


class EventKind(enum.Enum):
    INSERT = "insert"
    DELETE = "delete"


class EdgeEvent(NamedTuple):
    kind: EventKind
    edge: Edge

    @classmethod
    def insert(cls, src: NodeId, dst: NodeId) -> "EdgeEvent":
        return cls(EventKind.INSERT, Edge(src, dst))

    @classmethod
    def delete(cls, src: NodeId, dst: NodeId) -> "EdgeEvent":
        return cls(EventKind.DELETE, Edge(src, dst))


def check_node_id(x: int) -> NodeId:
    if not 0 <= x < SENTINEL:
        raise ValueError(f"node id out of range: {x}")
    return x


def _parse_id(tok: str, lineno: int, source: str | None) -> NodeId:
    if not tok.isdigit() or not tok.isascii():
        raise ParseError(lineno, f"not a non-negative integer: {tok!r}", source)
    value = int(tok)
    if value >= SENTINEL:
        raise ParseError(lineno, f"node id too large: {tok}", source)
    return value


def parse_snap_edgelist(text: str | Iterable[str], source: str | None = None) -> list[Edge]:
    """Parse SNAP-style ``src dst`` lines.

    Lines starting with ``#`` and blank lines are skipped.  Only the first two
    tokens of a line are read; any further columns are ignored.  Duplicated
    edges are kept as they appear.
    """
    lines = text.splitlines() if isinstance(text, str) else text
    edges: list[Edge] = []
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        toks = stripped.split()
        if len(toks) < 2:
            raise ParseError(lineno, "expected two node ids", source)
        edges.append(Edge(_parse_id(toks[0], lineno, source), _parse_id(toks[1], lineno, source)))
    return edges


def read_snap_file(path: str) -> list[Edge]:
    with open(path, encoding="utf-8") as fh:
        return parse_snap_edgelist(fh, source=path)


def serialize_edgelist(edges: Iterable[Edge], out: TextIO | None = None) -> str:
    text = "".join(f"{e[0]} {e[1]}\n" for e in edges)
    if out is not None:
        out.write(text)
    return text


def khop_oracle(
    edges: Iterable[tuple[NodeId, NodeId]], sources: Sequence[NodeId], k: int
) -> list[set[NodeId]]:
    """Nodes reachable from each source by a directed walk of exactly ``k`` edges.

    Deliberately naive: rebuilds its own adjacency and expands one frontier
    per source, sharing nothing with the simulator.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    adj: dict[NodeId, set[NodeId]] = defaultdict(set)
    for u, v in edges:
        adj[u].add(v)
    out = []
    for s in sources:
        frontier = {s}
        for _ in range(k):
            nxt: set[NodeId] = set()
            for u in frontier:
                nxt |= adj.get(u, set())
            frontier = nxt
        out.append(frontier)
    return out


def replay_events(events: Iterable[EdgeEvent], initial: Iterable[Edge] = ()) -> set[Edge]:
    """Edge set after applying ``events`` in order to ``initial``."""
    live = {Edge(*e) for e in initial}
    for ev in events:
        if ev.kind is EventKind.INSERT:
            live.add(Edge(*ev.edge))
        else:
            live.discard(Edge(*ev.edge))
    return live


def out_degrees(edges: Iterable[tuple[NodeId, NodeId]]) -> Mapping[NodeId, int]:
    """Out-degree per node after collapsing duplicate edges."""
    deg: dict[NodeId, int] = defaultdict(int)
    for u, _ in set(map(tuple, edges)):
        deg[u] += 1
    return deg
