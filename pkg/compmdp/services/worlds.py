from typing import Dict, Iterable, List, Sequence, Tuple, Union

from loguru import logger

from compmdp.core.exceptions import DuplicateRegion, EmptyOverlap, OutOfBounds, PreconditionFailed, RegionOnObstacle
from compmdp.model.diagrams import Bridge, Span, ZigZagDiagram
from compmdp.model.dist import Dist
from compmdp.model.group import GroupAction, GroupElement
from compmdp.model.labels import Atom, Label, Pair
from compmdp.model.mdp import FiniteMdp, MdpMorphism, make_point_mdp
from compmdp.schemas import Cell, GridLayout
from compmdp.services.composition import composition_service
from compmdp.services.morphism import morphism_service
from compmdp.services.puncture import puncture_service
from compmdp.services.symmetry import symmetry_service

MOVES: Dict[str, Tuple[int, int]] = {
    "up": (-1, 0),
    "down": (1, 0),
    "left": (0, -1),
    "right": (0, 1),
    "stay": (0, 0),
}
LATERAL = {"up": ("left", "right"), "down": ("left", "right"), "left": ("up", "down"), "right": ("up", "down")}
MIRRORED = {"left": "right", "right": "left", "up": "up", "down": "down", "stay": "stay"}


def cell_label(cell: Cell, prefix: str = "") -> Atom:
    return Atom(f"{prefix}r{cell[0]}c{cell[1]}")


def move_label(cell: Cell, move: str, prefix: str = "") -> Atom:
    return Atom(f"{prefix}r{cell[0]}c{cell[1]}.{move}")


def _as_cells(goal: Union[Cell, Iterable[Cell], None]) -> List[Cell]:
    if goal is None:
        return []
    if isinstance(goal, tuple) and len(goal) == 2 and all(isinstance(x, int) for x in goal):
        return [goal]
    return [tuple(c) for c in goal]


def _point_at(state: Label, action: Label) -> FiniteMdp:
    return FiniteMdp([state], {action: state}, {action: Dist.point(state)}, {action: 0.0})


class WorldsService:
    def _check_cells(self, width: int, height: int, cells: Iterable[Cell], what: str) -> None:
        for r, c in cells:
            if not (0 <= r < height and 0 <= c < width):
                raise OutOfBounds(f"{what} cell ({r}, {c}) is outside the {width}x{height} grid")

    def grid_world(
        self,
        width: int,
        height: int,
        obstacles: Iterable[Cell] = (),
        goal: Union[Cell, Iterable[Cell], None] = None,
        slip: float = 0.0,
        absorbing_goal: bool = False,
        prefix: str = "",
    ) -> FiniteMdp:
        """Cells with up/down/left/right/stay; obstacles are kept, puncturing is a separate step."""
        if width < 1 or height < 1:
            raise OutOfBounds(f"grid must be at least 1x1, got {width}x{height}")
        if not 0 <= slip < 1:
            raise PreconditionFailed(f"slip must lie in [0, 1), got {slip}")
        obstacles = _as_cells(obstacles)
        goals = set(_as_cells(goal))
        self._check_cells(width, height, obstacles, "obstacle")
        self._check_cells(width, height, goals, "goal")

        def step(cell: Cell, move: str) -> Cell:
            dr, dc = MOVES[move]
            r, c = cell[0] + dr, cell[1] + dc
            return (r, c) if 0 <= r < height and 0 <= c < width else cell

        cells = [(r, c) for r in range(height) for c in range(width)]
        goal_labels = {cell_label(g, prefix) for g in goals}
        psi: Dict[Label, Label] = {}
        trans: Dict[Label, Dist] = {}
        reward: Dict[Label, float] = {}
        for cell in cells:
            isolated = all(step(cell, m) == cell for m in LATERAL)
            moves = ["stay"] if isolated or (absorbing_goal and cell in goals) else list(MOVES)
            here = cell_label(cell, prefix)
            for move in moves:
                masses: List[Tuple[Label, float]] = []
                if move == "stay":
                    masses.append((here, 1.0))
                else:
                    masses.append((cell_label(step(cell, move), prefix), 1.0 - slip))
                    for side in LATERAL[move]:
                        masses.append((cell_label(step(cell, side), prefix), slip / 2))
                a = move_label(cell, move, prefix)
                psi[a] = here
                trans[a] = Dist(masses)
                reward[a] = 0.0 if cell in goals else trans[a].mass_of(goal_labels)
        m = FiniteMdp([cell_label(c, prefix) for c in cells], psi, trans, reward)
        logger.debug(f"Grid {width}x{height}: {m.n_states} states, {m.n_actions} actions")
        return m

    def grid_from_layout(self, layout: GridLayout, prefix: str = "") -> FiniteMdp:
        return self.grid_world(
            layout.width, layout.height, layout.obstacles, layout.goals, layout.slip, layout.absorbing_goal, prefix
        )

    def course_layout(self) -> GridLayout:
        """4x4 grid, start bottom-left, destination top-right, three obstacle cells."""
        return GridLayout(width=4, height=4, obstacles=[(1, 1), (1, 2), (2, 3)], goals=[(0, 3)], start=(3, 0))

    def course_obstacle_groups(self) -> Tuple[List[Cell], List[Cell]]:
        return [(1, 1), (1, 2)], [(2, 3)]

    def safe_grid(self, layout: GridLayout, prefix: str = "") -> Tuple[FiniteMdp, MdpMorphism]:
        grid = self.grid_from_layout(layout, prefix)
        return puncture_service.puncture(grid, [cell_label(o, prefix) for o in layout.obstacles])

    def sequential_regions(
        self,
        layout: GridLayout,
        regions: Sequence[Cell],
        forward_moving: bool = True,
    ) -> ZigZagDiagram:
        """One punctured environment per region plus a final free one, bridged at the regions."""
        regions = [tuple(r) for r in regions]
        self._check_cells(layout.width, layout.height, regions, "region")
        if len(set(regions)) != len(regions):
            raise DuplicateRegion("regions must be distinct cells")
        on_obstacle = [r for r in regions if r in set(layout.obstacles)]
        if on_obstacle:
            raise RegionOnObstacle(f"region {on_obstacle[0]} lies on an obstacle")

        obstacles = [cell_label(o) for o in layout.obstacles]
        envs: List[FiniteMdp] = []
        for region in regions:
            grid = self.grid_world(
                layout.width, layout.height, layout.obstacles, region, layout.slip, absorbing_goal=forward_moving
            )
            envs.append(puncture_service.puncture(grid, obstacles)[0])
        final = self.grid_world(layout.width, layout.height, layout.obstacles, None, layout.slip)
        envs.append(puncture_service.puncture(final, obstacles)[0])

        bridges = []
        for k, region in enumerate(regions):
            state, action = cell_label(region), move_label(region, "stay")
            point = _point_at(state, action)
            bridges.append(
                Bridge(
                    mdp=point,
                    left=MdpMorphism(point, envs[k], {state: state}, {action: action}, reward_compatible=True),
                    right=MdpMorphism(point, envs[k + 1], {state: state}, {action: action}, reward_compatible=True),
                )
            )
        logger.info(f"Sequential regions diagram: {len(envs)} environments over {len(regions)} regions")
        return ZigZagDiagram(tuple(envs), tuple(bridges))

    def fetch_and_place(
        self,
        box: Tuple[int, int] = (2, 2),
        outside: Tuple[int, int] = (3, 2),
        overlap: Sequence[Tuple[Cell, Cell]] = (((0, 1), (1, 0)),),
        shelf: Cell = (0, 2),
        stationary: bool = True,
    ) -> ZigZagDiagram:
        """Box -> Fetch -> Move -> Place, with Move = Fetch glued to Outside along Overlap.

        `box` and `outside` are (width, height); `overlap` pairs box cells with
        the outside cells they coincide with.
        """
        if not overlap:
            raise EmptyOverlap("the overlap region must contain at least one cell")
        bw, bh = box
        ow, oh = outside
        self._check_cells(bw, bh, [b for b, _ in overlap], "overlap")
        self._check_cells(ow, oh, [o for _, o in overlap] + [shelf], "outside")
        if shelf in {o for _, o in overlap}:
            raise PreconditionFailed("the shelf must lie outside the overlap")

        # Box: arm tip and object positions
        b = self.grid_world(bw, bh, prefix="box.")
        joint = composition_service.product(b, b).product
        diagonal = {Pair(s, s) for s in b.states}
        keep = []
        for a in joint.actions:
            arm, obj = a.parts
            if joint.psi[a] in diagonal:
                if not stationary or joint.trans[a].support() <= diagonal:
                    keep.append(a)
            elif not stationary or str(obj).endswith(".stay"):
                keep.append(a)
        box_mdp, _ = morphism_service.restrict_actions(joint, keep)
        box_mdp = box_mdp.with_reward(
            {a: 0.0 if box_mdp.psi[a] in diagonal else box_mdp.trans[a].mass_of(diagonal) for a in box_mdp.actions}
        )
        fetch, fetch_in_box = morphism_service.canonical_subprocess(box_mdp, diagonal)

        outside_mdp = self.grid_world(ow, oh, goal=shelf, absorbing_goal=True, prefix="out.")

        # Overlap: cells shared by the box and the outside, with the moves both agree on
        to_fetch_f: Dict[Label, Label] = {
            cell_label(o, "out."): Pair(cell_label(bc, "box."), cell_label(bc, "box.")) for bc, o in overlap
        }
        psi: Dict[Label, Label] = {}
        trans: Dict[Label, Dist] = {}
        to_fetch_g: Dict[Label, Label] = {}
        for bc, o in overlap:
            for move in MOVES:
                out_action = move_label(o, move, "out.")
                box_action = move_label(bc, move, "box.")
                pair_action = Pair(box_action, box_action)
                if out_action not in outside_mdp.psi or pair_action not in fetch.psi:
                    continue
                (o_next,) = outside_mdp.trans[out_action].support()
                (b_next,) = fetch.trans[pair_action].support()
                if to_fetch_f.get(o_next) != b_next:
                    continue
                psi[out_action] = cell_label(o, "out.")
                trans[out_action] = outside_mdp.trans[out_action]
                to_fetch_g[out_action] = pair_action
        overlap_mdp = FiniteMdp(to_fetch_f, psi, trans, {a: 0.0 for a in psi})
        into_fetch = MdpMorphism(overlap_mdp, fetch, to_fetch_f, to_fetch_g, reward_compatible=True)
        into_outside = morphism_service.inclusion(overlap_mdp, outside_mdp)
        move = composition_service.pushout(Span(into_fetch, into_outside))

        shelf_state, shelf_stay = cell_label(shelf, "out."), move_label(shelf, "stay", "out.")
        place = _point_at(shelf_state, shelf_stay)
        pt = make_point_mdp()
        (pt_state,), (pt_action,) = pt.states, pt.actions
        bridges = (
            Bridge(mdp=fetch, left=fetch_in_box, right=move.incl1),
            Bridge(
                mdp=place,
                left=MdpMorphism(
                    place,
                    move.glued,
                    {shelf_state: move.incl2.f[shelf_state]},
                    {shelf_stay: move.incl2.g[shelf_stay]},
                    reward_compatible=True,
                ),
                right=MdpMorphism(place, pt, {shelf_state: pt_state}, {shelf_stay: pt_action}, reward_compatible=True),
            ),
        )
        logger.info(
            f"Fetch-and-place: box {box_mdp.n_states} states, fetch {fetch.n_states}, move {move.glued.n_states}"
        )
        return ZigZagDiagram((box_mdp, move.glued, pt), bridges)

    def mirror_group(self, m: FiniteMdp, layout: GridLayout, prefix: str = "") -> GroupAction:
        """Left/right reflection of a (possibly punctured) grid."""
        w = layout.width
        alpha: Dict[Label, Label] = {}
        beta: Dict[Label, Label] = {}
        for r in range(layout.height):
            for c in range(w):
                alpha[cell_label((r, c), prefix)] = cell_label((r, w - 1 - c), prefix)
                for move, image in MIRRORED.items():
                    beta[move_label((r, c), move, prefix)] = move_label((r, w - 1 - c), image, prefix)
        reflection = GroupElement(
            {s: alpha[s] for s in m.states}, {a: beta[a] for a in m.actions}, name="mirror"
        )
        return symmetry_service.close_group(m, [reflection])

    def ring_world(self, n_rings: int, ring_size: int) -> FiniteMdp:
        """Discrete cylinder: rings stacked vertically, reward for entering the top ring."""
        if n_rings < 1 or ring_size < 1:
            raise OutOfBounds("ring world needs at least one ring of one cell")

        def state(k: int, j: int) -> Atom:
            return Atom(f"k{k}p{j}")

        top = n_rings - 1
        psi: Dict[Label, Label] = {}
        trans: Dict[Label, Dist] = {}
        reward: Dict[Label, float] = {}
        for k in range(n_rings):
            for j in range(ring_size):
                targets = {
                    "up": (min(k + 1, top), j),
                    "down": (max(k - 1, 0), j),
                    "cw": (k, (j + 1) % ring_size),
                    "ccw": (k, (j - 1) % ring_size),
                    "stay": (k, j),
                }
                for move, (k2, j2) in targets.items():
                    a = Atom(f"k{k}p{j}.{move}")
                    psi[a] = state(k, j)
                    trans[a] = Dist.point(state(k2, j2))
                    reward[a] = 1.0 if k2 == top and k != top else 0.0
        return FiniteMdp([state(k, j) for k in range(n_rings) for j in range(ring_size)], psi, trans, reward)

    def rotation_group(self, m: FiniteMdp, n_rings: int, ring_size: int) -> GroupAction:
        alpha: Dict[Label, Label] = {}
        beta: Dict[Label, Label] = {}
        for k in range(n_rings):
            for j in range(ring_size):
                turned = (j + 1) % ring_size
                alpha[Atom(f"k{k}p{j}")] = Atom(f"k{k}p{turned}")
                for move in ("up", "down", "cw", "ccw", "stay"):
                    beta[Atom(f"k{k}p{j}.{move}")] = Atom(f"k{k}p{turned}.{move}")
        return symmetry_service.close_group(m, [GroupElement(alpha, beta, name="rotate")])

    def monotonicity_counterexample(self) -> ZigZagDiagram:
        """A greedy first leg that forfeits a large reward only reachable through the other exit."""
        s, p, q, t = (Atom(x) for x in ("s", "p", "q", "t"))
        go_p, go_q = Atom("s.go_p"), Atom("s.go_q")
        p_stay, q_stay, t_stay, q_go = Atom("p.stay"), Atom("q.stay"), Atom("t.stay"), Atom("q.go_t")
        first = FiniteMdp(
            [s, p, q],
            {go_p: s, go_q: s, p_stay: p, q_stay: q},
            {go_p: Dist.point(p), go_q: Dist.point(q), p_stay: Dist.point(p), q_stay: Dist.point(q)},
            {go_p: 1.0, go_q: 0.5, p_stay: 0.0, q_stay: 0.0},
        )
        second = FiniteMdp(
            [p, q, t],
            {p_stay: p, q_stay: q, q_go: q, t_stay: t},
            {p_stay: Dist.point(p), q_stay: Dist.point(q), q_go: Dist.point(t), t_stay: Dist.point(t)},
            {p_stay: 0.0, q_stay: 0.0, q_go: 10.0, t_stay: 0.0},
        )
        exits = FiniteMdp(
            [p, q],
            {p_stay: p, q_stay: q},
            {p_stay: Dist.point(p), q_stay: Dist.point(q)},
            {p_stay: 0.0, q_stay: 0.0},
        )
        bridge = Bridge(
            mdp=exits,
            left=morphism_service.inclusion(exits, first),
            right=morphism_service.inclusion(exits, second),
        )
        return ZigZagDiagram((first, second), (bridge,))


worlds_service = WorldsService()
