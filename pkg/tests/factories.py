"""Random connected graphs and small hand-built systems shared by the tests."""

import os
import sys

import numpy as np

sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.models.graph import GraphSpec, PinnedSystem, graph_spec


def random_connected_graph(
    rng: np.random.Generator,
    n: int,
    symmetric: bool = False,
    extra_prob: float = 0.2,
    pinned_fraction: float = 0.0,
) -> GraphSpec:
    """
    n agents plus source n+1, every agent reachable from the source.

    A random arborescence rooted at the source guarantees reachability; extra
    agent-to-agent edges are added with probability ``extra_prob``. With
    ``symmetric`` every agent-to-agent edge is mirrored with the same weight,
    so K is symmetric. ``pinned_fraction`` of the agents also hear the source.
    """
    source = n + 1
    order = rng.permutation(n) + 1
    weights = {}

    def add(j, i, w):
        if (j, i) not in weights:
            weights[(j, i)] = w
            if symmetric and j != source:
                weights[(i, j)] = w

    for pos, agent in enumerate(order):
        parent = source if pos == 0 else int(rng.choice(np.concatenate([[source], order[:pos]])))
        add(int(parent), int(agent), float(rng.uniform(0.5, 2.0)))
    for j in range(1, n + 1):
        for i in range(1, n + 1):
            if i != j and rng.random() < extra_prob:
                add(j, i, float(rng.uniform(0.5, 2.0)))
    for agent in range(1, n + 1):
        if rng.random() < pinned_fraction:
            add(source, agent, float(rng.uniform(0.5, 2.0)))
    edges = [(j, i, w) for (j, i), w in sorted(weights.items())]
    return graph_spec(n + 1, source, edges)


def system_from_matrix(K, B=None) -> PinnedSystem:
    """A PinnedSystem around an arbitrary K (B defaults to the row sums)."""
    K = np.array(K, dtype=float)
    B = np.array(K.sum(axis=1) if B is None else B, dtype=float)
    n = K.shape[0]
    return PinnedSystem(K=K, B=B, source=n + 1, nodes=tuple(range(1, n + 1)))
