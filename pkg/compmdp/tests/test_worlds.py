import pytest

from compmdp.core.exceptions import (
    DuplicateRegion,
    EmptyOverlap,
    NotAutomorphism,
    OutOfBounds,
    PreconditionFailed,
    RegionOnObstacle,
)
from compmdp.model.labels import Atom
from compmdp.services.mdp import mdp_service
from compmdp.services.morphism import morphism_service
from compmdp.services.worlds import cell_label, move_label, worlds_service
from compmdp.services.zigzag import zigzag_service


class TestGridWorld:
    """Test grid construction."""

    def test_course_counts(self, course_grid):
        """Test the unpunctured 4x4 grid has five moves per cell."""
        assert course_grid.n_states == 16
        assert course_grid.n_actions == 80
        assert mdp_service.validate(course_grid).ok

    def test_goal_reward_on_entry(self, course_grid):
        """Test only moves into the destination are rewarded."""
        rewarded = {a for a in course_grid.actions if course_grid.reward_of(a) > 0}
        assert rewarded == {move_label((0, 2), "right"), move_label((1, 3), "up")}

    def test_walls_bounce(self, course_grid):
        """Test moving off the grid stays put."""
        assert course_grid.trans[move_label((0, 0), "up")].support() == {cell_label((0, 0))}

    def test_single_cell(self):
        """Test a 1x1 grid only has the stay action."""
        m = worlds_service.grid_world(1, 1)
        assert m.actions == (move_label((0, 0), "stay"),)

    def test_slip_masses(self):
        """Test a slipping move splits its residual mass sideways."""
        m = worlds_service.grid_world(3, 3, slip=0.2)
        mu = m.trans[move_label((1, 1), "up")]
        assert mu.mass_of({cell_label((0, 1))}) == pytest.approx(0.8)
        assert mu.mass_of({cell_label((1, 0))}) == pytest.approx(0.1)
        assert mu.mass_of({cell_label((1, 2))}) == pytest.approx(0.1)
        assert mdp_service.validate(m).ok

    def test_absorbing_goal(self):
        """Test an absorbing destination only keeps stay."""
        m = worlds_service.grid_world(2, 2, goal=(0, 1), absorbing_goal=True)
        assert m.actions_at(cell_label((0, 1))) == (move_label((0, 1), "stay"),)

    def test_prefix(self):
        """Test labels carry the prefix."""
        m = worlds_service.grid_world(1, 2, prefix="box.")
        assert Atom("box.r1c0") in m.state_set

    @pytest.mark.parametrize(
        "kwargs, error",
        [
            ({"width": 0, "height": 2}, OutOfBounds),
            ({"width": 2, "height": 2, "obstacles": [(2, 0)]}, OutOfBounds),
            ({"width": 2, "height": 2, "goal": (0, 5)}, OutOfBounds),
            ({"width": 2, "height": 2, "slip": 1.0}, PreconditionFailed),
        ],
    )
    def test_bad_grids(self, kwargs, error):
        """Test malformed grids are rejected."""
        with pytest.raises(error):
            worlds_service.grid_world(**kwargs)


class TestSequentialRegions:
    """Test the region-visiting diagram."""

    def test_shape(self, course_layout):
        """Test one environment per region plus the free one."""
        z = worlds_service.sequential_regions(course_layout, [(3, 3), (0, 0)])
        assert len(z.environments) == 3
        assert all(env.n_states == 13 for env in z.environments)
        assert all(b.mdp.n_states == 1 for b in z.bridges)
        assert zigzag_service.is_forward_moving(z)

    def test_region_checks(self, course_layout):
        """Test regions off the grid, on obstacles or repeated are rejected."""
        with pytest.raises(OutOfBounds):
            worlds_service.sequential_regions(course_layout, [(4, 0)])
        with pytest.raises(RegionOnObstacle):
            worlds_service.sequential_regions(course_layout, [(1, 1)])
        with pytest.raises(DuplicateRegion):
            worlds_service.sequential_regions(course_layout, [(0, 0), (0, 0)])


class TestFetchAndPlace:
    """Test the robot-arm diagram."""

    def test_shape(self):
        """Test the three environments and both bridge legs."""
        z = worlds_service.fetch_and_place()
        assert len(z.environments) == 3
        assert z.environments[-1].n_states == 1
        for bridge in z.bridges:
            assert morphism_service.check_morphism(bridge.left).ok
            assert morphism_service.check_morphism(bridge.right).ok

    def test_fetch_is_diagonal(self):
        """Test the fetch bridge holds the arm on the object."""
        z = worlds_service.fetch_and_place()
        fetch = z.bridges[0].mdp
        assert fetch.n_states == 4
        assert all(len(set(s.parts)) == 1 for s in fetch.states)

    def test_composite_builds(self):
        """Test the whole task glues into one MDP."""
        composite = zigzag_service.build_composite(worlds_service.fetch_and_place())
        assert mdp_service.validate(composite.mdp).ok

    def test_overlap_checks(self):
        """Test the overlap must be non-empty and avoid the shelf."""
        with pytest.raises(EmptyOverlap):
            worlds_service.fetch_and_place(overlap=())
        with pytest.raises(PreconditionFailed):
            worlds_service.fetch_and_place(shelf=(1, 0))


class TestSymmetricWorlds:
    """Test the worlds built for the quotient checks."""

    def test_ring_world(self):
        """Test ring sizes and the top-ring reward."""
        m = worlds_service.ring_world(2, 3)
        assert m.n_states == 6
        assert m.n_actions == 30
        assert m.reward_of(Atom("k0p0.up")) == 1.0
        assert m.reward_of(Atom("k1p0.up")) == 0.0

    def test_ring_world_bounds(self):
        """Test an empty ring world is rejected."""
        with pytest.raises(OutOfBounds):
            worlds_service.ring_world(0, 3)

    def test_mirror_group_order(self):
        """Test reflecting a grid without goals gives a group of order two."""
        layout = worlds_service.course_layout().model_copy(update={"obstacles": [], "goals": []})
        plain = worlds_service.grid_from_layout(layout)
        assert worlds_service.mirror_group(plain, layout).order == 2

    def test_mirror_needs_symmetric_reward(self, course_grid, course_layout):
        """Test a one-sided destination breaks the reflection."""
        with pytest.raises(NotAutomorphism):
            worlds_service.mirror_group(course_grid, course_layout)
