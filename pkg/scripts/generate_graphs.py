#!/usr/bin/env python3
"""
DSR Consensus - Example Graph Generation Script

Writes the example graph documents under 01_data/graphs/ and checks that each
one parses back to the same graph and has a nonsingular pinned Laplacian.

Usage:
    python scripts/generate_graphs.py

    # Or a custom directory and ring size:
    python scripts/generate_graphs.py --output-dir /tmp/graphs --agents 12 --leader 3

Example:
    $ python scripts/generate_graphs.py
    Saved 3 graphs to 01_data/graphs
"""

import os
import sys
import argparse
from pathlib import Path
from typing import Dict

# Add project root to path for imports
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.models.graph import (
    GraphSpec,
    graph_spec,
    load_graph,
    ordered_subgraphs_fixture,
    pinned_system,
    ring_with_leader,
    save_graph,
)
from src.utils.logging import setup_logger

logger = setup_logger()


def example_graphs(agents: int = 31, leader: int = 16) -> Dict[str, GraphSpec]:
    """The ring scenario, the ordered-subgraphs fixture and the minimal pinned pair."""
    return {
        f"ring{agents}_leader{leader}.json": ring_with_leader(agents, leader),
        "ordered_subgraphs.json": ordered_subgraphs_fixture(),
        "pair.json": graph_spec(2, 2, [(2, 1, 1.0)]),
    }


def generate_graphs(output_dir: str, agents: int = 31, leader: int = 16) -> Dict[str, Path]:
    """
    Write every example graph and verify it.

    Args:
        output_dir (str): Directory for the graph files
        agents (int): Ring size
        leader (int): Ring agent that hears the source

    Returns:
        Dict[str, Path]: File name to written path

    Raises:
        ValueError: If a written file does not parse back to the same graph
    """
    written = {}
    for name, spec in example_graphs(agents, leader).items():
        path = save_graph(spec, Path(output_dir) / name)
        if load_graph(path) != spec:
            raise ValueError(f"{path} does not round-trip")
        sys_ = pinned_system(spec)
        logger.info(f"  {name}: {sys_.n} agents, source {spec.source}")
        written[name] = path
    logger.info(f"Saved {len(written)} graphs to {output_dir}")
    return written


def main():
    """Main entry point for the graph generation script."""
    parser = argparse.ArgumentParser(description='Write the example graph documents')
    parser.add_argument(
        '--output-dir',
        type=str,
        default='01_data/graphs',
        help='Directory for graph files (default: 01_data/graphs)'
    )
    parser.add_argument('--agents', type=int, default=31, help='Ring size (default: 31)')
    parser.add_argument('--leader', type=int, default=16, help='Ring leader (default: 16)')
    args = parser.parse_args()

    try:
        generate_graphs(args.output_dir, args.agents, args.leader)
    except Exception as e:
        logger.error(f"Graph generation failed: {str(e)}")
        sys.exit(1)


if __name__ == '__main__':
    main()
