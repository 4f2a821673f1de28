"""
Graph specifications, Laplacians and the pinned partition.

A stored edge (j, i, w) means agent i listens to node j with weight w, so
information flows j -> i. Node indices are 1-based in documents; internally the
source is always moved to the last position.
"""

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from pydantic_core import PydanticCustomError
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

PIVOT_TOL = 1e-10
ONES_TOL = 1e-9

# error codes carried by GraphSpecError
MALFORMED = "malformed"
NONPOSITIVE_WEIGHT = "nonpositive_weight"
NONFINITE_WEIGHT = "nonfinite_weight"
SELF_EDGE = "self_edge"
DUPLICATE_EDGE = "duplicate_edge"
OUT_OF_RANGE = "out_of_range"
MISSING_SOURCE = "missing_source"
BAD_LABELS = "bad_labels"
_CODES = {
    NONPOSITIVE_WEIGHT, NONFINITE_WEIGHT, SELF_EDGE, DUPLICATE_EDGE, OUT_OF_RANGE, MISSING_SOURCE,
    BAD_LABELS,
}


class GraphSpecError(ValueError):
    """Invalid graph document or graph construction request."""

    def __init__(self, code: str, message: str, entry: Any = None):
        self.code = code
        self.entry = entry
        super().__init__(f"{code.replace('_', ' ')}: {message}")


class PinningError(Exception):
    """The pinned Laplacian is singular or fails K^-1 B = 1."""

    def __init__(self, message: str, condition: float = float("inf")):
        self.condition = condition
        super().__init__(f"{message} (condition estimate {condition:.3e})")


class Edge(BaseModel):
    """Agent ``to_node`` listens to ``from_node`` with weight ``weight``."""

    model_config = ConfigDict(frozen=True)

    from_node: int
    to_node: int
    weight: float


class GraphSpec(BaseModel):
    """Directed weighted graph with one designated source node."""

    model_config = ConfigDict(frozen=True)

    node_count: int = Field(description="Total nodes n+1, source included")
    source: Optional[int] = None
    edges: Tuple[Edge, ...] = ()
    labels: Optional[Tuple[str, ...]] = None

    @model_validator(mode="after")
    def check_invariants(self) -> "GraphSpec":
        if self.node_count < 2:
            raise PydanticCustomError(
                OUT_OF_RANGE,
                "graph needs at least 2 nodes, got {entry}",
                {"entry": self.node_count},
            )
        if self.source is None:
            raise PydanticCustomError(MISSING_SOURCE, "no source node given", {"entry": None})
        if not 1 <= self.source <= self.node_count:
            raise PydanticCustomError(
                MISSING_SOURCE,
                "source {entry} is not a node index",
                {"entry": self.source},
            )
        seen = set()
        for e in self.edges:
            entry = [e.from_node, e.to_node, e.weight]
            for idx in (e.from_node, e.to_node):
                if not 1 <= idx <= self.node_count:
                    raise PydanticCustomError(
                        OUT_OF_RANGE, "edge {entry} has index outside [1, n+1]", {"entry": entry}
                    )
            if e.from_node == e.to_node:
                raise PydanticCustomError(SELF_EDGE, "edge {entry} is a self-edge", {"entry": entry})
            if not np.isfinite(e.weight):
                raise PydanticCustomError(
                    NONFINITE_WEIGHT, "edge {entry} has nonfinite weight", {"entry": entry}
                )
            if e.weight <= 0:
                raise PydanticCustomError(
                    NONPOSITIVE_WEIGHT, "edge {entry} has nonpositive weight", {"entry": entry}
                )
            key = (e.from_node, e.to_node)
            if key in seen:
                raise PydanticCustomError(
                    DUPLICATE_EDGE, "edge {entry} is given twice", {"entry": entry}
                )
            seen.add(key)
        if self.labels is not None and len(self.labels) != self.node_count:
            raise PydanticCustomError(
                BAD_LABELS,
                "expected one label per node, got {entry}",
                {"entry": len(self.labels)},
            )
        return self

    @property
    def agent_count(self) -> int:
        return self.node_count - 1

    def label_of(self, node: int) -> str:
        return self.labels[node - 1] if self.labels else str(node)


@dataclass(frozen=True)
class Laplacian:
    """Dense graph Laplacian; ``order[k]`` is the 1-based node at row k."""

    entries: np.ndarray
    order: Tuple[int, ...]
    labels: Tuple[str, ...]

    def __post_init__(self):
        self.entries.setflags(write=False)

    @property
    def size(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class PinnedSystem:
    """Pinned Laplacian K, input vector B and the agents they index."""

    K: np.ndarray
    B: np.ndarray
    source: int
    nodes: Tuple[int, ...]
    labels: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        self.K.setflags(write=False)
        self.B.setflags(write=False)

    @property
    def n(self) -> int:
        return self.K.shape[0]

    def index_of(self, node: int) -> int:
        """0-based row of a 1-based agent node."""
        return self.nodes.index(node)


def _from_validation_error(exc: ValidationError) -> GraphSpecError:
    err = exc.errors()[0]
    code = err["type"] if err["type"] in _CODES else MALFORMED
    entry = (err.get("ctx") or {}).get("entry", err.get("input"))
    where = ".".join(str(p) for p in err.get("loc", ()))
    message = err["msg"] if code != MALFORMED or not where else f"{where}: {err['msg']}"
    return GraphSpecError(code, message, entry)


def graph_spec(
    node_count: int,
    source: Optional[int],
    edges: Sequence[Sequence[Any]],
    labels: Optional[Sequence[str]] = None,
) -> GraphSpec:
    """Build a validated GraphSpec from (from, to, weight) triples."""
    try:
        triples = [
            Edge(from_node=e[0], to_node=e[1], weight=e[2]) if not isinstance(e, Edge) else e
            for e in edges
        ]
    except (TypeError, IndexError, KeyError) as e:
        raise GraphSpecError(MALFORMED, f"edges must be [from, to, weight] triples ({e})")
    except ValidationError as e:
        raise _from_validation_error(e)
    try:
        return GraphSpec(
            node_count=node_count,
            source=source,
            edges=tuple(triples),
            labels=tuple(labels) if labels is not None else None,
        )
    except ValidationError as e:
        raise _from_validation_error(e)


def parse_graph(text: Union[str, bytes]) -> GraphSpec:
    """
    Parse a graph document.

    The document is a JSON object with ``nodes``, ``source``, ``edges`` (array
    of [from, to, weight]) and optional ``labels``.

    Raises:
        GraphSpecError: with ``code`` naming the violated rule
    """
    if isinstance(text, bytes):
        if text.startswith(b"\xef\xbb\xbf"):
            raise GraphSpecError(MALFORMED, "document starts with a byte-order mark")
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise GraphSpecError(MALFORMED, f"document is not UTF-8 ({e})")
    if text.startswith("\ufeff"):
        raise GraphSpecError(MALFORMED, "document starts with a byte-order mark")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise GraphSpecError(MALFORMED, f"not a JSON document ({e})")
    if not isinstance(doc, dict):
        raise GraphSpecError(MALFORMED, "document must be an object")
    unknown = set(doc) - {"nodes", "source", "edges", "labels"}
    if unknown:
        raise GraphSpecError(MALFORMED, f"unknown fields {sorted(unknown)}", sorted(unknown))
    if "nodes" not in doc:
        raise GraphSpecError(MALFORMED, "field 'nodes' is required")
    if "source" not in doc:
        raise GraphSpecError(MISSING_SOURCE, "field 'source' is required")
    edges = doc.get("edges", [])
    if not isinstance(edges, list) or any(
        not isinstance(e, list) or len(e) != 3 for e in edges
    ):
        raise GraphSpecError(MALFORMED, "edges must be an array of [from, to, weight] triples")
    for e in edges:
        if any(isinstance(v, bool) for v in e) or not all(isinstance(v, (int, float)) for v in e):
            raise GraphSpecError(MALFORMED, f"edge {e} must hold numbers", e)
        if not isinstance(e[0], int) or not isinstance(e[1], int):
            raise GraphSpecError(MALFORMED, f"edge {e} must use integer node indices", e)
    nodes = doc["nodes"]
    if isinstance(nodes, bool) or not isinstance(nodes, int):
        raise GraphSpecError(MALFORMED, "field 'nodes' must be an integer", nodes)
    source = doc["source"]
    if isinstance(source, bool) or not isinstance(source, int):
        raise GraphSpecError(MISSING_SOURCE, "field 'source' must be a node index", source)
    labels = doc.get("labels")
    if labels is not None and (
        not isinstance(labels, list) or not all(isinstance(s, str) for s in labels)
    ):
        raise GraphSpecError(MALFORMED, "labels must be an array of strings")
    return graph_spec(nodes, source, edges, labels)


def dump_graph(spec: GraphSpec) -> str:
    """Serialize a GraphSpec to a document parse_graph accepts."""
    doc = {
        "nodes": spec.node_count,
        "source": spec.source,
        "edges": [[e.from_node, e.to_node, e.weight] for e in spec.edges],
    }
    if spec.labels is not None:
        doc["labels"] = list(spec.labels)
    return json.dumps(doc, indent=2) + "\n"


def load_graph(path: Union[str, Path]) -> GraphSpec:
    """Read and parse a graph file."""
    return parse_graph(Path(path).read_bytes())


def save_graph(spec: GraphSpec, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_graph(spec), encoding="utf-8", newline="\n")
    return path


def _listener_graph(spec: GraphSpec) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(range(1, spec.node_count + 1))
    g.add_edges_from((e.from_node, e.to_node) for e in spec.edges)
    return g


def unreachable_nodes(spec: GraphSpec) -> List[int]:
    """Non-source nodes with no directed path from the source."""
    g = _listener_graph(spec)
    reached = nx.descendants(g, spec.source) | {spec.source}
    return sorted(set(g.nodes) - reached)


def check_source_connected(spec: GraphSpec) -> bool:
    """True iff every agent is reachable from the source along listener edges."""
    return not unreachable_nodes(spec)


def build_laplacian(spec: GraphSpec) -> Laplacian:
    """
    Build the (n+1)x(n+1) Laplacian with l_ij = -w_ij for j in N_i and the
    row weight sums on the diagonal. The source occupies the last row.
    """
    order = tuple(v for v in range(1, spec.node_count + 1) if v != spec.source) + (spec.source,)
    position = {node: k for k, node in enumerate(order)}
    L = np.zeros((spec.node_count, spec.node_count))
    for e in spec.edges:
        i, j = position[e.to_node], position[e.from_node]
        L[i, j] -= e.weight
        L[i, i] += e.weight
    labels = tuple(spec.label_of(node) for node in order)
    return Laplacian(entries=L, order=order, labels=labels)


def pin(
    lap: Laplacian,
    source: int,
    pivot_tol: float = PIVOT_TOL,
    ones_tol: float = ONES_TOL,
) -> PinnedSystem:
    """
    Partition the Laplacian around the source.

    K is L with the source row and column removed, B the negated source column
    over the agent rows.

    Raises:
        PinningError: if a factorization pivot falls below ``pivot_tol`` or
            K^-1 B differs from the ones vector by more than ``ones_tol``
    """
    if source not in lap.order:
        raise GraphSpecError(MISSING_SOURCE, f"source {source} is not in the Laplacian", source)
    s = lap.order.index(source)
    keep = [k for k in range(lap.size) if k != s]
    K = np.array(lap.entries[np.ix_(keep, keep)])
    B = -np.array(lap.entries[keep, s]) + 0.0  # no -0.0 for unpinned agents
    nodes = tuple(lap.order[k] for k in keep)
    labels = tuple(lap.labels[k] for k in keep)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(K, check_finite=True)
        pivots = np.abs(np.diag(lu))
        if pivots.min() < pivot_tol:
            raise PinningError(
                f"pinned Laplacian is singular (smallest pivot {pivots.min():.3e}); "
                f"some agent has no directed path from source {source}",
                condition=float(np.linalg.cond(K)),
            )
        ones = lu_solve((lu, piv), B)
    deviation = float(np.max(np.abs(ones - 1.0)))
    if deviation > ones_tol:
        raise PinningError(
            f"K^-1 B deviates from the ones vector by {deviation:.3e}",
            condition=float(np.linalg.cond(K)),
        )
    return PinnedSystem(K=K, B=B, source=source, nodes=nodes, labels=labels)


def pinned_system(spec: GraphSpec, **tolerances) -> PinnedSystem:
    """pin(build_laplacian(spec), spec.source), naming unreachable agents on failure."""
    try:
        return pin(build_laplacian(spec), spec.source, **tolerances)
    except PinningError as e:
        missing = unreachable_nodes(spec)
        if missing:
            raise PinningError(
                f"agents {missing} are not reachable from source {spec.source}",
                condition=e.condition,
            ) from e
        raise


def ring_with_leader(n: int, leader: int) -> GraphSpec:
    """
    n agents in a ring; agent i listens to i-1 and i+1 (mod n), the leader also
    listens to the source n+1. All weights are 1.
    """
    if n < 3:
        raise GraphSpecError(OUT_OF_RANGE, f"a ring needs at least 3 agents, got {n}", n)
    if not 1 <= leader <= n:
        raise GraphSpecError(OUT_OF_RANGE, f"leader {leader} outside [1, {n}]", leader)
    edges = []
    for i in range(1, n + 1):
        prev = (i - 2) % n + 1
        nxt = i % n + 1
        edges.append((prev, i, 1.0))
        edges.append((nxt, i, 1.0))
    edges.append((n + 1, leader, 1.0))
    return graph_spec(n + 1, n + 1, edges)


def ordered_subgraphs_fixture() -> GraphSpec:
    """
    Six agents in topologically-ordered subgraphs plus source 7.

    Blocks {1}, {2, 3}, {4}, {5}, {6}: agent 1 hears the source, agents 2 and 3
    hear each other and agent 1, agents 4 and 5 hear 2 and 3, agent 6 hears 2..5.
    The pinned spectrum is {1, 1, 1, 1, 3, 4}.
    """
    edges = [
        (7, 1, 1.0),
        (1, 2, 1.0), (3, 2, 1.0),
        (1, 3, 1.0), (2, 3, 1.0),
        (2, 4, 1.0),
        (3, 5, 1.0),
        (2, 6, 1.0), (3, 6, 1.0), (4, 6, 1.0), (5, 6, 1.0),
    ]
    return graph_spec(7, 7, edges)
