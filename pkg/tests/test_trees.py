"""Networks, separation, and qualitative Markov tree validation."""

import random

import numpy as np
import pytest

from generators import random_partition, random_tree_edges
from qmtree import (
    DuplicateEdge,
    Frame,
    NotAnEdge,
    NotATree,
    OverlappingSets,
    Partition,
    SelfLoop,
    UnknownNode,
    as_tree,
    build_network,
    edge_kernel,
    is_qualitative_markov_network,
    is_tree,
    separates,
    singleton_partition,
    subtree_components,
    trivial_partition,
    validate_markov,
)


def part(frame, *blocks):
    return Partition(frame, [frame.subset(b) for b in blocks])


@pytest.fixture
def path3(frame4):
    parts = {n: trivial_partition(frame4) for n in ("1", "2", "3")}
    return build_network(frame4, parts, [("1", "2"), ("2", "3")])


class TestBuildNetwork:
    def test_path(self, path3):
        assert path3.neighbors("2") == ("1", "3")
        assert path3.is_leaf("1") and path3.is_leaf("3") and not path3.is_leaf("2")

    def test_self_loop(self, frame4):
        with pytest.raises(SelfLoop):
            build_network(
                frame4, {"1": trivial_partition(frame4)}, [("1", "1")]
            )

    def test_single_node(self, frame4):
        net = build_network(frame4, {"1": trivial_partition(frame4)}, [])
        assert net.neighbors("1") == ()

    def test_duplicate_edge(self, frame4):
        parts = {n: trivial_partition(frame4) for n in "12"}
        with pytest.raises(DuplicateEdge):
            build_network(frame4, parts, [("1", "2"), ("2", "1")])

    def test_unknown_node(self, frame4):
        with pytest.raises(UnknownNode):
            build_network(
                frame4, {"1": trivial_partition(frame4)}, [("1", "9")]
            )


class TestIsTree:
    def test_path(self, path3):
        assert is_tree(path3)

    def test_triangle(self, frame4):
        parts = {n: trivial_partition(frame4) for n in "123"}
        net = build_network(
            frame4, parts, [("1", "2"), ("2", "3"), ("1", "3")]
        )
        assert not is_tree(net)

    def test_disconnected(self, frame4):
        parts = {n: trivial_partition(frame4) for n in "12"}
        assert not is_tree(build_network(frame4, parts, []))

    def test_as_tree_rejects(self, frame4):
        parts = {n: trivial_partition(frame4) for n in "12"}
        with pytest.raises(NotATree):
            as_tree(build_network(frame4, parts, []))


class TestSeparates:
    def test_middle_separates(self, path3):
        assert separates(path3, {"1"}, {"3"}, {"2"})

    def test_empty_separator_fails(self, path3):
        assert not separates(path3, {"1"}, {"3"}, set())

    def test_avoidable_separator(self, path3):
        assert not separates(path3, {"1"}, {"2"}, {"3"})

    def test_overlap_rejected(self, path3):
        with pytest.raises(OverlappingSets):
            separates(path3, {"1"}, {"1"}, {"2"})

    def test_unknown_node(self, path3):
        with pytest.raises(UnknownNode):
            separates(path3, {"9"}, {"3"}, {"2"})

    def test_empty_side_vacuous(self, path3):
        assert separates(path3, set(), {"3"}, set())


class TestSubtreeComponents:
    def test_center_of_path(self, path3):
        tree = as_tree(path3)
        assert subtree_components(tree, "2") == (frozenset("1"), frozenset("3"))

    def test_leaf(self, path3):
        tree = as_tree(path3)
        assert subtree_components(tree, "1") == (frozenset({"2", "3"}),)

    def test_star_center(self, frame4):
        parts = {n: trivial_partition(frame4) for n in "0123"}
        tree = as_tree(
            build_network(frame4, parts, [("0", "1"), ("0", "2"), ("0", "3")])
        )
        assert subtree_components(tree, "0") == (
            frozenset("1"),
            frozenset("2"),
            frozenset("3"),
        )

    def test_partitions_the_rest(self, frame4):
        rng = random.Random(5)
        ids = [f"n{i}" for i in range(7)]
        parts = {n: trivial_partition(frame4) for n in ids}
        tree = as_tree(build_network(frame4, parts, random_tree_edges(rng, ids)))
        for node in ids:
            components = subtree_components(tree, node)
            assert len(components) == len(tree.neighbors(node))
            union = set().union(*components) if components else set()
            assert union == set(ids) - {node}
            assert sum(len(c) for c in components) == len(ids) - 1


def cube_chain():
    frame = Frame([f"{x}{y}{z}" for x in "01" for y in "01" for z in "01"])

    def by(pos):
        return Partition(
            frame,
            [frame.subset([l for l in frame.labels if l[pos] == v]) for v in "01"],
        )

    parts = {"X": by(0), "Y": by(1), "Z": by(2)}
    return frame, as_tree(build_network(frame, parts, [("X", "Y"), ("Y", "Z")]))


class TestValidateMarkov:
    def test_cube_chain_passes(self):
        _, tree = cube_chain()
        report = validate_markov(tree)
        assert report.ok
        assert tree.markov_validated

    def test_single_node_passes(self, frame4):
        tree = as_tree(build_network(frame4, {"1": singleton_partition(frame4)}, []))
        assert validate_markov(tree).ok

    def test_fine_trivial_fine_fails_with_witness(self):
        frame = Frame(["a", "b"])
        fine = singleton_partition(frame)
        parts = {"1": fine, "2": trivial_partition(frame), "3": fine}
        tree = as_tree(build_network(frame, parts, [("1", "2"), ("2", "3")]))
        report = validate_markov(tree)
        assert not report.ok
        assert report.node == "2"
        assert report.witness["given_block"] == ["a", "b"]
        assert sorted(map(tuple, report.witness["selection"])) == [("a",), ("b",)]
        assert not tree.markov_validated

    def test_diagnostic_star_passes(self, frame4):
        parts = {
            "D": singleton_partition(frame4),
            "S1": part(frame4, "ab", "cd"),
            "S2": part(frame4, "a", "bcd"),
        }
        tree = as_tree(build_network(frame4, parts, [("D", "S1"), ("D", "S2")]))
        assert validate_markov(tree).ok

    def test_two_node_trees_always_pass(self, rng):
        for _ in range(20):
            size = rng.randint(2, 5)
            frame = Frame([f"e{i}" for i in range(size)])
            parts = {
                "1": random_partition(rng, frame),
                "2": random_partition(rng, frame),
            }
            tree = as_tree(build_network(frame, parts, [("1", "2")]))
            assert validate_markov(tree).ok


class TestEdgeKernel:
    def test_same_partition_is_identity(self, frame4):
        p = part(frame4, "ab", "cd")
        tree = as_tree(build_network(frame4, {"1": p, "2": p}, [("1", "2")]))
        kernel = edge_kernel(tree, "1", "2")
        assert np.array_equal(kernel, np.eye(2, dtype=bool))

    def test_crossing_partitions_all_true(self, frame4):
        tree = as_tree(
            build_network(
                frame4,
                {"1": part(frame4, "ab", "cd"), "2": part(frame4, "ac", "bd")},
                [("1", "2")],
            )
        )
        assert edge_kernel(tree, "1", "2").all()

    def test_trivial_target_single_column(self, frame4):
        tree = as_tree(
            build_network(
                frame4,
                {"1": part(frame4, "ab", "cd"), "2": trivial_partition(frame4)},
                [("1", "2")],
            )
        )
        kernel = edge_kernel(tree, "1", "2")
        assert kernel.shape == (2, 1)
        assert kernel.all()

    def test_transpose_symmetry(self, rng):
        frame = Frame([f"e{i}" for i in range(5)])
        parts = {
            "1": random_partition(rng, frame),
            "2": random_partition(rng, frame),
        }
        tree = as_tree(build_network(frame, parts, [("1", "2")]))
        assert np.array_equal(
            edge_kernel(tree, "1", "2"), edge_kernel(tree, "2", "1").T
        )

    def test_rows_and_columns_nonzero(self, rng):
        for _ in range(10):
            frame = Frame([f"e{i}" for i in range(6)])
            parts = {
                "1": random_partition(rng, frame),
                "2": random_partition(rng, frame),
            }
            tree = as_tree(build_network(frame, parts, [("1", "2")]))
            kernel = edge_kernel(tree, "1", "2")
            assert kernel.any(axis=0).all() and kernel.any(axis=1).all()

    def test_not_an_edge(self, path3):
        tree = as_tree(path3)
        with pytest.raises(NotAnEdge):
            edge_kernel(tree, "1", "3")


class TestNetworkDefinitionCrossCheck:
    def test_node_local_check_matches_direct_definition(self):
        rng = random.Random(424242)
        agree = 0
        for _ in range(60):
            n_nodes = rng.randint(2, 4)
            size = rng.randint(2, 5)
            frame = Frame([f"e{i}" for i in range(size)])
            ids = [f"n{i}" for i in range(n_nodes)]
            parts = {i: random_partition(rng, frame) for i in ids}
            net = build_network(frame, parts, random_tree_edges(rng, ids))
            tree = as_tree(net)
            assert validate_markov(tree).ok == is_qualitative_markov_network(net)
            agree += 1
        assert agree == 60
