"""Tests for the coloring-based approximation."""

import random

from gmmn.errors import CapExceeded
from gmmn.approx_coloring import approx_solve, greedy_color
from gmmn.geometry import Point, TerminalPair, build_hanan_grid
from gmmn.instance_graph import build_intersection_graph
from gmmn.oracle import solve_bruteforce
from gmmn.star_dag import solve_star


def make(specs):
    return [
        TerminalPair.make(i, Point(*a), Point(*b))
        for i, (a, b) in enumerate(specs)
    ]


class TestGreedyColor:
    def test_edgeless_uses_one_color(self):
        inst = make([((0, 0), (1, 1)), ((5, 5), (6, 6))])
        assert greedy_color(build_intersection_graph(inst)).k == 1

    def test_star_uses_two_colors(self):
        inst = make([((0, 0), (10, 10)), ((2, 2), (4, 4)), ((6, 6), (8, 8))])
        ig = build_intersection_graph(inst)
        assert ig.class_tag == "star"
        assert greedy_color(ig).k == 2

    def test_odd_cycle_uses_three_colors(self):
        ring = make(
            [
                ((0, 0), (4, 1)),
                ((3, 0), (4, 4)),
                ((1, 3), (4, 4)),
                ((0, 2), (2, 4)),
                ((0, 0), (1, 3)),
            ]
        )
        ig = build_intersection_graph(ring)
        assert ig.class_tag == "cycle" and ig.n == 5
        coloring = greedy_color(ig)
        assert coloring.k == 3
        coloring.validate(ig)

    def test_k_never_exceeds_degree_plus_one(self):
        rng = random.Random(23)
        for _ in range(50):
            n = rng.randint(1, 6)
            inst = [
                TerminalPair.make(
                    i,
                    Point(rng.randint(0, 8), rng.randint(0, 8)),
                    Point(rng.randint(0, 8), rng.randint(0, 8)),
                )
                for i in range(n)
            ]
            ig = build_intersection_graph(inst)
            coloring = greedy_color(ig)
            coloring.validate(ig)
            assert coloring.k <= ig.max_degree + 1


class TestApproxSolve:
    def test_edgeless_is_exact_with_ratio_one(self):
        inst = make([((0, 0), (2, 3)), ((10, 0), (12, 2))])
        net, k, ratio = approx_solve(inst)
        assert k == ratio == 1
        assert net.total_length == sum(p.distance for p in inst)

    def test_feasible_on_general_instances(self):
        rng = random.Random(29)
        for _ in range(30):
            n = rng.randint(1, 6)
            inst = [
                TerminalPair.make(
                    i,
                    Point(rng.randint(0, 8), rng.randint(0, 8)),
                    Point(rng.randint(0, 8), rng.randint(0, 8)),
                )
                for i in range(n)
            ]
            net, k, ratio = approx_solve(inst)
            net.validate(build_hanan_grid(inst))
            assert max(p.distance for p in inst) <= net.total_length
            assert net.total_length <= sum(p.distance for p in inst)

    def test_certified_ratio_against_the_oracle(self):
        rng = random.Random(31)
        checked = 0
        while checked < 30:
            n = rng.randint(1, 4)
            inst = [
                TerminalPair.make(
                    i,
                    Point(rng.randint(0, 7), rng.randint(0, 7)),
                    Point(rng.randint(0, 7), rng.randint(0, 7)),
                )
                for i in range(n)
            ]
            try:
                opt = solve_bruteforce(inst).total_length
            except CapExceeded:
                continue
            net, k, ratio = approx_solve(inst)
            assert net.total_length <= ratio * opt, inst
            checked += 1

    def test_ratio_two_on_star_instances(self):
        inst = make([((0, 0), (10, 10)), ((2, 6), (6, 2)), ((7, 9), (9, 7))])
        opt = solve_star(inst).total_length
        net, k, ratio = approx_solve(inst)
        assert k == 2
        assert net.total_length <= 2 * opt
