"""Reference dynamic program for tree-shaped intersection graphs.

Each non-root pair v gets a table mapping an "in-out pair" — the entry and
exit vertex of the parent's path through the shared window, or epsilon when
the parent shares nothing — to the maximum total length of segments shared
inside v's subtree.  Every cell is a longest-path query on an auxiliary DAG
over v's subgrid whose gadgets encode the children's table differences and
the parent crossing.  This module favors clarity over speed and serves as
the differential-testing reference for the accelerated solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import WrongClass
from .geometry import (
    DEGENERATE,
    FLIPPED,
    REGULAR,
    BoundingBox,
    GridNetwork,
    HananGrid,
    MPath,
    Point,
    TerminalPair,
    build_hanan_grid,
    densify,
    join,
    meet,
)
from .instance_graph import (
    EDGELESS,
    FOREST,
    STAR,
    TREE,
    IntersectionGraph,
    RootedTree,
    build_intersection_graph,
    root_tree,
)
from .star_dag import (
    DEG_DENSE,
    DEG_UNIT,
    FULL,
    AuxDag,
    Crossing,
    GadgetSpec,
    center_portion,
    crossing_mode,
    default_l_path,
    path_through_constraint,
    reflect_instance,
    reflect_point,
    shared_constraint,
)

PARENT_GADGET_ID = -1


@dataclass(frozen=True)
class InOutPair:
    """Entry/exit vertices of the parent's path through the shared window.

    ``EPSILON`` (both fields None) means the parent's path avoids the window.
    Non-epsilon pairs are stored with p lexicographically <= q, which makes
    the key independent of the parent's traversal direction.
    """

    p: Optional[Point]
    q: Optional[Point]

    @classmethod
    def make(cls, p: Point, q: Point) -> "InOutPair":
        if q < p:
            p, q = q, p
        return cls(p, q)

    @property
    def is_epsilon(self) -> bool:
        return self.p is None

    @property
    def is_point(self) -> bool:
        return self.p is not None and self.p == self.q


EPSILON = InOutPair(None, None)


def enumerate_inout_pairs(
    v: TerminalPair, u: TerminalPair, grid: HananGrid
) -> list[InOutPair]:
    """All candidate parent crossings of the window B(v) ∩ B(u).

    Entry and exit of any M-path through a box lie on the window boundary,
    so boundary-vertex pairs (plus epsilon and single-vertex pairs) are a
    superset of the realizable crossings; unrealizable cells are harmless
    because the parent's DAG never selects them.
    """
    box = v.box.intersect(u.box)
    if box is None:
        raise WrongClass("in-out pairs require overlapping boxes")
    w = grid.subgrid(box)
    boundary = [
        grid.vertex(i, j)
        for i, j in w.positions()
        if i in (w.i_lo, w.i_hi) or j in (w.j_lo, w.j_hi)
    ]
    out = [EPSILON]
    for a in range(len(boundary)):
        for b in range(a, len(boundary)):
            out.append(InOutPair.make(boundary[a], boundary[b]))
    return out


@dataclass
class TreeContext:
    """Everything a per-cell computation needs for one tree component."""

    pairs: list[TerminalPair]  # component pairs, indexed by node id
    grid: HananGrid
    tree: RootedTree
    tables: dict[int, dict[InOutPair, int]]

    def children(self, v: int) -> tuple[int, ...]:
        return self.tree.children[v]

    def eps_value(self, w: int) -> int:
        return self.tables[w][EPSILON]


def prepare_tree(pairs: list[TerminalPair], vertices: Optional[list[int]] = None,
                 ig: Optional[IntersectionGraph] = None) -> TreeContext:
    """Root one tree component and fill every node's table bottom-up."""
    if ig is None:
        ig = build_intersection_graph(pairs)
    tree = root_tree(ig, vertices)
    ctx = TreeContext(sorted(pairs, key=lambda p: p.id),
                      build_hanan_grid(pairs), tree, {})
    for v in tree.postorder:
        u = tree.parent[v]
        if u is None:
            ctx.tables[v] = {EPSILON: compute_dp_cell(ctx, v, EPSILON)}
            continue
        table: dict[InOutPair, int] = {}
        keys = enumerate_inout_pairs(ctx.pairs[v], ctx.pairs[u], ctx.grid)
        eps = compute_dp_cell(ctx, v, EPSILON)
        table[EPSILON] = eps
        for key in keys:
            if key.is_epsilon:
                continue
            value = compute_dp_cell(ctx, v, key)
            assert value >= eps, (v, key, value, eps)
            table[key] = value
        ctx.tables[v] = table
    return ctx


@dataclass
class _Frame:
    """Per-node coordinate frame (identity or y-reflection)."""

    reflected: bool

    def fwd(self, p: Point) -> Point:
        return reflect_point(p) if self.reflected else p

    back = fwd  # the reflection is an involution


def _parent_gadget(
    grid_v: HananGrid, p_f: Point, q_f: Point
) -> tuple[Optional[GadgetSpec], str]:
    """Gadget encoding sharable length with the parent crossing (p, q).

    Returns (spec or None for a point crossing, shape orientation of the
    crossing in the node's frame).
    """
    shape = TerminalPair.make(PARENT_GADGET_ID, p_f, q_f).orientation
    if p_f == q_f:
        return None, shape
    window = grid_v.subgrid(BoundingBox(meet(p_f, q_f), join(p_f, q_f)))
    if window.a == 1 or window.b == 1:
        style = DEG_UNIT
    elif shape == REGULAR:
        style = REGULAR
    else:
        style = FLIPPED
    return GadgetSpec(PARENT_GADGET_ID, window, style, None), shape


def _build_cell_dag(
    ctx: TreeContext, v: int, inout: InOutPair
) -> tuple[AuxDag, int, _Frame, str, dict[int, int]]:
    """The auxiliary DAG for one table cell, in v's normalized frame.

    Returns (dag, kappa, frame, parent crossing shape, pair-id → node map).
    """
    frame = _Frame(ctx.pairs[v].orientation == FLIPPED)
    fpairs = reflect_instance(ctx.pairs) if frame.reflected else ctx.pairs
    grid_v = build_hanan_grid(fpairs)
    center = fpairs[v]
    node_of = {p.id: k for k, p in enumerate(ctx.pairs)}

    gadgets: list[GadgetSpec] = []
    kappa = 0
    for w in ctx.children(v):
        kappa += ctx.eps_value(w)
        box = center.box.intersect(fpairs[w].box)
        assert box is not None
        window = grid_v.subgrid(box)
        style = DEG_DENSE if (window.a == 1 or window.b == 1) else FULL

        def weight(p: Point, q: Point, _w: int = w) -> int:
            key = InOutPair.make(frame.back(p), frame.back(q))
            eps = ctx.eps_value(_w)
            return ctx.tables[_w].get(key, eps) - eps

        gadgets.append(GadgetSpec(ctx.pairs[w].id, window, style, weight))

    shape = DEGENERATE
    if not inout.is_epsilon:
        spec, shape = _parent_gadget(grid_v, frame.fwd(inout.p), frame.fwd(inout.q))
        if spec is not None:
            gadgets.append(spec)
    return AuxDag(grid_v, center, gadgets), kappa, frame, shape, node_of


def compute_dp_cell(ctx: TreeContext, v: int, inout: InOutPair) -> int:
    """Maximum total shared length inside v's subtree for one parent crossing.

    Longest source-sink path of the cell's DAG plus the children's
    unconditional table values.
    """
    if not ctx.children(v) and inout.is_epsilon:
        return 0
    dag, kappa, _, _, _ = _build_cell_dag(ctx, v, inout)
    return dag.best_value(dag.forward()) + kappa


def _reconstruct(
    ctx: TreeContext, v: int, inout: InOutPair
) -> tuple[dict[int, list[Point]], Optional[list[Point]]]:
    """Realize v's subtree for the chosen cell.

    Returns (node → path waypoints in the original frame, and — when the
    cell is non-epsilon — the parent's required subpath from the canonical
    in-out entry to the exit, which the caller embeds into its own path).
    """
    dag, _, frame, shape, node_of = _build_cell_dag(ctx, v, inout)
    lam = dag.forward()
    _, crossings, waypoints = dag.witness(lam)

    requirement: Optional[list[Point]] = None
    insert: dict[int, list[Point]] = {}  # crossing index -> v-frame portion
    paths: dict[int, list[Point]] = {}
    seen_children: set[int] = set()

    for k, c in enumerate(crossings):
        if c.pair_id == PARENT_GADGET_ID:
            mode = crossing_mode(shape, c)
            insert[k] = center_portion(mode, c)
            constraint = shared_constraint(mode, c)
            pseudo = TerminalPair.make(
                PARENT_GADGET_ID, frame.fwd(inout.p), frame.fwd(inout.q)
            )
            req_f = path_through_constraint(pseudo, constraint)
            requirement = [frame.back(pt) for pt in req_f]
            canonical = InOutPair.make(inout.p, inout.q)
            if requirement[0] != canonical.p:
                requirement.reverse()
            continue
        w = node_of[c.pair_id]
        seen_children.add(w)
        key = InOutPair.make(frame.back(c.entry), frame.back(c.exit))
        sub_paths, sub_req = _reconstruct(ctx, w, key)
        paths.update(sub_paths)
        assert sub_req is not None
        portion = [frame.fwd(pt) for pt in sub_req]
        if portion[0] != c.entry:
            portion.reverse()
        assert portion[0] == c.entry and portion[-1] == c.exit
        insert[k] = portion

    for w in ctx.children(v):
        if w not in seen_children:
            sub_paths, _ = _reconstruct(ctx, w, EPSILON)
            paths.update(sub_paths)

    if not inout.is_epsilon and requirement is None:
        # v's path avoids the crossing box entirely; any parent subpath works.
        pseudo = TerminalPair.make(PARENT_GADGET_ID, inout.p, inout.q)
        requirement = default_l_path(pseudo)

    # Splice the realized portions into the witness waypoints.
    pts: list[Point] = []
    ci = 0
    for k, pt in enumerate(waypoints):
        pts.append(pt)
        if (
            ci < len(crossings)
            and pt == crossings[ci].entry
            and k + 1 < len(waypoints)
            and waypoints[k + 1] == crossings[ci].exit
        ):
            portion = insert.get(ci)
            if portion is None:
                portion = center_portion("line", crossings[ci])
            pts.extend(portion[1:-1])
            ci += 1
    assert ci == len(crossings)

    original = [frame.back(pt) for pt in pts]
    if original[0] != ctx.pairs[v].s:
        original.reverse()
    paths[v] = original
    return paths, requirement


def _solve_component(
    pairs: list[TerminalPair],
    full_grid: HananGrid,
    vertices: Optional[list[int]] = None,
    ig: Optional[IntersectionGraph] = None,
) -> tuple[list[MPath], int]:
    if len(pairs) == 1 or (vertices is not None and len(vertices) == 1):
        comp = pairs if vertices is None else [pairs[vertices[0]]]
        pair = comp[0]
        return [MPath(pair.id, densify(full_grid, default_l_path(pair)))], 0

    if vertices is not None:
        sub = sorted((pairs[k] for k in vertices), key=lambda p: p.id)
        ctx = prepare_tree(sub, None, None)
    else:
        ctx = prepare_tree(pairs, None, ig)
    root = ctx.tree.root
    best = ctx.tables[root][EPSILON]
    node_paths, _ = _reconstruct(ctx, root, EPSILON)
    mpaths = [
        MPath(ctx.pairs[v].id, densify(full_grid, pts))
        for v, pts in sorted(node_paths.items())
    ]
    return mpaths, best


def solve_tree(instance: list[TerminalPair]) -> GridNetwork:
    """Exact solver for instances whose intersection graph is a forest."""
    pairs = sorted(instance, key=lambda p: p.id)
    ig = build_intersection_graph(pairs)
    if ig.class_tag not in (TREE, STAR, EDGELESS, FOREST):
        raise WrongClass(
            f"tree solver requires an acyclic intersection graph, got {ig.class_tag}"
        )
    grid = build_hanan_grid(pairs)
    all_paths: list[MPath] = []
    total_shared = 0
    for comp in ig.components():
        mpaths, shared = _solve_component(
            pairs, grid, comp if len(comp) < ig.n else None, ig
        )
        all_paths.extend(mpaths)
        total_shared += shared
    all_paths.sort(key=lambda m: m.pair_id)
    network = GridNetwork.from_paths(pairs, all_paths)
    network.validate(grid)
    expected = sum(p.distance for p in pairs) - total_shared
    assert network.total_length == expected, (network.total_length, expected)
    return network
