import itertools
import json
from collections import Counter
from math import prod

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bnmoo.bn_model import (
    BayesianNetwork,
    Cpt,
    CycleError,
    Dag,
    Dataset,
    Genome,
    decode_unchecked,
    encode,
    genome_length,
    is_acyclic,
    load_network,
    network_from_dict,
    network_to_dict,
    parameter_count,
    position_to_cell,
    repair_cycles,
    save_network,
    to_dot,
    topological_order,
)
from bnmoo.synth import random_cpts, random_dag

from .conftest import acyclic_by_permutation


def chain(n):
    return Dag(n, frozenset((i, i + 1) for i in range(n - 1)))


class TestAcyclicity:
    def test_empty(self):
        assert is_acyclic(set(), 2)

    def test_two_cycle(self):
        assert not is_acyclic({(0, 1), (1, 0)}, 2)

    def test_four_node_cycle_agrees_with_oracle(self):
        edges = {(0, 1), (1, 2), (2, 3), (3, 1)}
        assert acyclic_by_permutation(edges, 4) is False
        assert is_acyclic(edges, 4) is False

    def test_dag_rejects_cycles_and_self_loops(self):
        with pytest.raises(CycleError):
            Dag(3, frozenset({(0, 1), (1, 2), (2, 0)}))
        with pytest.raises(ValueError):
            Dag(2, frozenset({(1, 1)}))
        with pytest.raises(ValueError):
            Dag(2, frozenset({(0, 2)}))


class TestTopologicalOrder:
    def test_chain(self):
        assert topological_order(chain(3)) == [0, 1, 2]

    def test_empty_ties_by_index(self):
        assert topological_order(Dag(3)) == [0, 1, 2]

    def test_tie_break_matches_enumeration(self):
        dag = Dag(3, frozenset({(2, 0), (1, 0)}))
        valid = [
            list(p)
            for p in itertools.permutations(range(3))
            if all(p.index(a) < p.index(b) for a, b in dag.edges)
        ]
        assert min(valid) == [1, 2, 0]
        assert topological_order(dag) == [1, 2, 0]

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 9), st.floats(0, 1), st.integers(0, 2**32 - 1))
    def test_relabeling_gives_lower_triangular(self, n, density, seed):
        dag = random_dag(n, density, np.random.default_rng(seed))
        order = topological_order(dag)
        pos = {v: k for k, v in enumerate(order)}
        adj = np.zeros((n, n), dtype=int)
        for p, c in dag.edges:
            adj[pos[c], pos[p]] = 1  # row = child, column = parent
        assert np.array_equal(adj, np.tril(adj, k=-1))


class TestCodec:
    def test_smallest_case(self):
        assert encode(Dag(2, frozenset({(0, 1)}))).bits.tolist() == [1, 0]
        assert decode_unchecked(Genome(2, [0, 0])) == frozenset()

    def test_three_node_positions(self):
        # position order (0,1),(0,2),(1,0),(1,2),(2,0),(2,1)
        assert [position_to_cell(p, 3) for p in range(6)] == [
            (0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)
        ]
        bits = encode(Dag(3, frozenset({(0, 2), (2, 1)}))).bits
        assert bits.tolist() == [0, 1, 0, 0, 0, 1]

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            Genome(3, [0, 1, 0])

    @settings(max_examples=100, deadline=None)
    @given(st.integers(1, 10), st.floats(0, 1), st.integers(0, 2**32 - 1))
    def test_round_trip(self, n, density, seed):
        dag = random_dag(n, density, np.random.default_rng(seed))
        g = encode(dag)
        assert len(g.bits) == genome_length(n)
        assert decode_unchecked(g) == dag.edges
        assert encode(Dag(n, decode_unchecked(g))) == g


class TestRepair:
    def test_noop_on_dag(self, rng):
        dag = random_dag(8, 0.4, rng)
        assert repair_cycles(encode(dag), rng).edges == dag.edges

    def test_two_cycle_frequencies(self):
        rng = np.random.default_rng(7)
        counts = Counter(
            repair_cycles(Genome(2, [1, 1]), rng).edges for _ in range(10_000)
        )
        assert set(counts) == {frozenset({(0, 1)}), frozenset({(1, 0)})}
        assert abs(counts[frozenset({(0, 1)})] / 10_000 - 0.5) <= 0.02

    def test_full_genome_three_nodes(self, rng):
        g = Genome(3, [1] * 6)
        for _ in range(50):
            dag = repair_cycles(g, rng)
            assert acyclic_by_permutation(dag.edges, 3)
            assert dag.edges <= decode_unchecked(g)

    def test_deterministic_given_rng_state(self):
        g = Genome(6, np.random.default_rng(1).integers(0, 2, 30))
        a = repair_cycles(g, np.random.default_rng(99))
        b = repair_cycles(g, np.random.default_rng(99))
        assert a == b

    @settings(max_examples=150, deadline=None)
    @given(st.integers(2, 8), st.data())
    def test_repair_property(self, n, data):
        bits = data.draw(st.lists(st.integers(0, 1), min_size=n * (n - 1), max_size=n * (n - 1)))
        g = Genome(n, bits)
        dag = repair_cycles(g, np.random.default_rng(data.draw(st.integers(0, 1000))))
        assert is_acyclic(dag.edges, n)
        assert dag.edges <= decode_unchecked(g)


class TestParameterCount:
    def test_empty_graph(self):
        assert parameter_count(Dag(15), [2] * 15) == 15

    def test_chain_fifteen_binary(self):
        dag = chain(15)
        # per-node enumeration of parent configurations
        per_node = [
            (2 - 1) * len(list(itertools.product(*[range(2)] * len(dag.parents(i)))))
            for i in range(15)
        ]
        assert sum(per_node) == 1 + 14 * 2 == 29
        assert parameter_count(dag, [2] * 15) == 29

    def test_two_binary_parents(self):
        dag = Dag(3, frozenset({(0, 2), (1, 2)}))
        configs = list(itertools.product(range(2), range(2)))
        assert len(configs) == 4
        assert parameter_count(dag, [2, 2, 2]) == 1 + 1 + 4

    def test_mixed_arities(self):
        dag = Dag(3, frozenset({(0, 2), (1, 2)}))
        assert parameter_count(dag, [3, 4, 5]) == 2 + 3 + 4 * 3 * 4

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.integers(2, 5), min_size=1, max_size=8))
    def test_empty_is_sum_of_free_marginals(self, arities):
        n = len(arities)
        assert parameter_count(Dag(n), arities) == sum(a - 1 for a in arities)


class TestTypes:
    def test_dataset_validation(self):
        with pytest.raises(ValueError):
            Dataset(np.array([[0, 2]]), (2, 2))
        with pytest.raises(ValueError):
            Dataset(np.zeros((0, 2)))
        with pytest.raises(ValueError):
            Dataset(np.zeros((3, 2)), (2, 1))
        d = Dataset(np.array([[0, 1], [1, 2]]), (2, 3))
        assert (d.m, d.n) == (2, 2)
        assert not d.cells.flags.writeable

    def test_cpt_validation(self):
        with pytest.raises(ValueError):
            Cpt(0, (), [[0.5, 0.6]])
        with pytest.raises(ValueError):
            Cpt(0, (), [[-0.1, 1.1]])
        Cpt(0, (), [[0.3, 0.7]])

    def test_network_parent_consistency(self):
        dag = Dag(2, frozenset({(0, 1)}))
        good = (Cpt(0, (), [[0.5, 0.5]]), Cpt(1, (0,), [[1, 0], [0, 1]]))
        BayesianNetwork(dag, good)
        with pytest.raises(ValueError):
            BayesianNetwork(dag, (Cpt(0, (), [[0.5, 0.5]]), Cpt(1, (), [[0.5, 0.5]])))
        with pytest.raises(ValueError):
            BayesianNetwork(dag, (Cpt(0, (), [[0.5, 0.5]]), Cpt(1, (0,), [[1, 0]])))

    def test_cpt_rows_match_parent_configurations(self, rng):
        bn = random_cpts(random_dag(7, 0.5, rng), [2, 3, 2, 2, 3, 2, 2], rng)
        for cpt in bn.cpts:
            assert cpt.table.shape[0] == prod(bn.arities[p] for p in cpt.parent_set)


class TestSerialization:
    def test_json_round_trip(self, rng, tmp_path):
        bn = random_cpts(random_dag(6, 0.5, rng), None, rng)
        save_network(bn, tmp_path / "net.json")
        doc = json.loads((tmp_path / "net.json").read_text())
        assert set(doc) == {"n", "arities", "edges", "cpts"}
        back = load_network(tmp_path / "net.json")
        assert back.dag == bn.dag
        for a, b in zip(back.cpts, bn.cpts):
            assert np.array_equal(a.table, b.table)

    def test_dag_without_cpts(self):
        dag = chain(4)
        doc = network_to_dict(dag)
        assert "cpts" not in doc
        assert network_from_dict(doc) == dag

    def test_dot_labels(self):
        dot = to_dot(Dag(3, frozenset({(0, 2)})), "g")
        assert "V1 -> V3;" in dot and "V2;" in dot and dot.startswith("digraph g {")
