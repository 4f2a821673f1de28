"""Unit tests for the example graph generation script."""

import os
import shutil
import sys
import tempfile
import unittest

sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../../scripts')))

from generate_graphs import example_graphs, generate_graphs
from src.models.graph import load_graph, ring_with_leader


class TestGenerateGraphs(unittest.TestCase):

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_example_names(self):
        self.assertEqual(
            sorted(example_graphs(12, 3)),
            ["ordered_subgraphs.json", "pair.json", "ring12_leader3.json"],
        )

    def test_files_round_trip(self):
        written = generate_graphs(self.temp_dir, agents=7, leader=2)
        self.assertEqual(len(written), 3)
        self.assertEqual(load_graph(written["ring7_leader2.json"]), ring_with_leader(7, 2))

    def test_bundled_ring_is_current(self):
        """The shipped ring file matches what the script writes."""
        written = generate_graphs(self.temp_dir)
        bundled = os.path.join(os.path.dirname(__file__), '../../01_data/graphs/ring31_leader16.json')
        self.assertEqual(load_graph(written["ring31_leader16.json"]), load_graph(bundled))


if __name__ == '__main__':
    unittest.main()
