"""Tests for the auxiliary longest-path DAG and the star solver."""

import random

import pytest

from gmmn.errors import CapExceeded, WrongClass
from gmmn.geometry import (
    Point,
    SubgridWindow,
    TerminalPair,
    build_hanan_grid,
)
from gmmn.instance_graph import EDGELESS, STAR, build_intersection_graph
from gmmn.oracle import solve_bruteforce
from gmmn.star_dag import (
    NEG,
    AuxDag,
    GadgetSpec,
    boundary_sets,
    build_leaf_gadgets,
    build_simplified_dag,
    gamma,
    longest_path,
    solve_star,
)


def make(specs):
    return [
        TerminalPair.make(i, Point(*a), Point(*b))
        for i, (a, b) in enumerate(specs)
    ]


class TestGamma:
    def test_regular_shares_full_distance(self):
        assert gamma("regular", Point(0, 0), Point(3, 5)) == 8

    def test_flipped_shares_one_axis(self):
        assert gamma("flipped", Point(0, 0), Point(3, 5)) == 5
        assert gamma("flipped", Point(0, 0), Point(5, 3)) == 5

    def test_degenerate_is_additive(self):
        assert gamma("degenerate", Point(0, 0), Point(4, 0)) == 4


class TestBoundarySets:
    def test_three_by_three_window(self):
        sets = boundary_sets(SubgridWindow(0, 2, 0, 2))
        assert len(sets.v_ll) == 5
        assert len(sets.v_ur) == 5
        assert len(sets.v_corner) == 2
        assert len(sets.v_interior) == 1
        assert sets.v_corner == frozenset({(2, 0), (0, 2)})

    def test_partition_covers_window(self):
        w = SubgridWindow(0, 3, 0, 4)
        sets = boundary_sets(w)
        everything = sets.v_ll | sets.v_ur | sets.v_interior
        assert everything == frozenset(w.positions())


def build_star_dag(inst, simplified=True):
    pairs = sorted(inst, key=lambda p: p.id)
    grid = build_hanan_grid(pairs)
    center = pairs[0]
    gadgets = build_leaf_gadgets(grid, center, pairs[1:], simplified)
    return AuxDag(grid, center, gadgets)


SAMPLE = [
    ((0, 0), (20, 20)),
    ((2, 2), (6, 6)),
    ((8, 12), (12, 8)),
    ((14, 3), (17, 3)),
    ((15, 14), (19, 18)),
]


class TestDagStructure:
    @pytest.mark.parametrize("simplified", [True, False])
    def test_acyclic_every_arc_advances(self, simplified):
        dag = build_star_dag(make(SAMPLE), simplified)
        index = dag.topo_index()
        arcs = 0
        for src, dst, length, _kind in dag.iter_arcs():
            assert index[src] < index[dst]
            assert length >= 0
            arcs += 1
        assert arcs > 0

    @pytest.mark.parametrize("simplified", [True, False])
    def test_node_count_is_linear_in_window(self, simplified):
        dag = build_star_dag(make(SAMPLE), simplified)
        assert dag.node_count <= 6 * dag.cw.vertex_count

    def test_interior_positions_are_dead(self):
        # Extra point terminals densify the grid inside the leaf window.
        inst = make(
            [
                ((0, 0), (10, 10)),
                ((2, 2), (8, 8)),
                ((4, 12), (6, 14)),
                ((12, 4), (14, 6)),
            ]
        )
        dag = build_star_dag(inst)
        w = dag.grid.subgrid(inst[1].box)
        interior = boundary_sets(w).v_interior
        assert len(interior) == 4
        for i, j in interior:
            assert dag._rel(i, j) in dag.dead


class TestLongestPath:
    CENTER = TerminalPair.make(0, Point(0, 0), Point(10, 10))

    def test_zero_leaves_value_zero(self):
        dag = build_simplified_dag(self.CENTER, [])
        value, arcs = longest_path(dag)
        assert value == 0
        assert all(length == 0 for _, _, length in arcs)

    def test_regular_leaf_shares_its_distance(self):
        leaf = TerminalPair.make(1, Point(2, 2), Point(6, 6))
        dag = build_simplified_dag(self.CENTER, [(leaf, None)])
        assert longest_path(dag)[0] == leaf.distance

    def test_flipped_leaf_shares_one_axis(self):
        leaf = TerminalPair.make(1, Point(2, 6), Point(6, 2))
        dag = build_simplified_dag(self.CENTER, [(leaf, None)])
        assert longest_path(dag)[0] == 4

    def test_custom_assigner_matches_compact_gadget(self):
        leaf = TerminalPair.make(1, Point(2, 6), Point(6, 2))

        def assigner(p, q):
            return gamma(leaf.orientation, p, q)

        dag = build_simplified_dag(self.CENTER, [(leaf, assigner)])
        assert longest_path(dag)[0] == 4

    def test_arcs_form_a_connected_witness(self):
        leaf = TerminalPair.make(1, Point(2, 2), Point(6, 6))
        dag = build_simplified_dag(self.CENTER, [(leaf, None)])
        value, arcs = longest_path(dag)
        assert arcs[0][0] == dag.source_pos
        assert arcs[-1][1] == dag.sink_pos
        assert sum(length for _, _, length in arcs) == value
        for (_, a, _), (b, _, _) in zip(arcs, arcs[1:]):
            assert a == b

    def test_unreachable_is_sentinel(self):
        dag = build_simplified_dag(self.CENTER, [])
        value, arcs = longest_path(dag, dag.sink_pos, dag.source_pos)
        assert value == NEG and arcs == []

    def test_same_node_is_zero(self):
        dag = build_simplified_dag(self.CENTER, [])
        assert longest_path(dag, dag.source_pos, dag.source_pos) == (0, [])


class TestFrozenStarOptima:
    def test_nested_regular_pairs(self):
        inst = make([((0, 0), (10, 10)), ((2, 2), (6, 6))])
        assert solve_star(inst).total_length == 20

    def test_flipped_pair_inside_regular(self):
        inst = make([((0, 0), (10, 10)), ((2, 6), (6, 2))])
        assert solve_star(inst).total_length == 24
        assert solve_star(inst, simplified=False).total_length == 24

    def test_flipped_center_is_reflected(self):
        inst = make([((0, 10), (10, 0)), ((2, 2), (6, 6))])
        assert (
            solve_star(inst).total_length
            == solve_bruteforce(inst).total_length
        )

    def test_single_pair(self):
        inst = make([((1, 2), (4, 0))])
        net = solve_star(inst)
        assert net.total_length == 5

    def test_rejects_non_star(self):
        inst = make(
            [
                ((0, 0), (6, 6)),
                ((4, 4), (10, 10)),
                ((8, 8), (14, 14)),
                ((12, 12), (18, 18)),
            ]
        )
        with pytest.raises(WrongClass):
            solve_star(inst)


class TestAgainstOracle:
    def _random_instances(self, seed, count):
        rng = random.Random(seed)
        out = []
        while len(out) < count:
            n = rng.randint(1, 4)
            pairs = [
                TerminalPair.make(
                    i,
                    Point(rng.randint(0, 8), rng.randint(0, 8)),
                    Point(rng.randint(0, 8), rng.randint(0, 8)),
                )
                for i in range(n)
            ]
            if build_intersection_graph(pairs).class_tag in (STAR, EDGELESS):
                out.append(pairs)
        return out

    def test_random_stars_match_oracle(self):
        for inst in self._random_instances(20250823, 120):
            try:
                want = solve_bruteforce(inst).total_length
            except CapExceeded:
                continue
            grid = build_hanan_grid(inst)
            for simplified in (True, False):
                net = solve_star(inst, simplified=simplified)
                assert net.total_length == want, (inst, simplified)
                net.validate(grid)
