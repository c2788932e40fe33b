from pathlib import Path

import factory
import pytest

from compmdp.model.dist import Dist
from compmdp.model.labels import Atom
from compmdp.model.mdp import FiniteMdp
from compmdp.schemas import GridLayout
from compmdp.services.sampling import sampling_service
from compmdp.services.worlds import worlds_service

FIXTURES = Path(__file__).parent / "fixtures"


class GridLayoutFactory(factory.Factory):
    """Obstacle-free square grids with the goal in the top-right corner."""

    class Meta:
        model = GridLayout

    width = 3
    height = 3
    obstacles = factory.LazyFunction(list)
    goals = factory.LazyAttribute(lambda o: [(0, o.width - 1)])
    start = factory.LazyAttribute(lambda o: (o.height - 1, 0))
    slip = 0.0
    absorbing_goal = False


@pytest.fixture
def fixtures_dir() -> Path:
    """Directory of the shipped fixture documents."""
    return FIXTURES


@pytest.fixture
def rng():
    """Seed-pinned generator for randomized properties."""
    return sampling_service.rng(20240611)


@pytest.fixture
def self_loop() -> FiniteMdp:
    """One state, one action looping with reward 1."""
    s, a = Atom("s"), Atom("s.loop")
    return FiniteMdp([s], {a: s}, {a: Dist.point(s)}, {a: 1.0})


@pytest.fixture
def chain() -> FiniteMdp:
    """s steps into the terminal state t with reward 1."""
    s, t, a = Atom("s"), Atom("t"), Atom("s.step")
    return FiniteMdp([s, t], {a: s}, {a: Dist.point(t)}, {a: 1.0})


@pytest.fixture
def coin() -> FiniteMdp:
    """Three states; one action splits evenly, everything else loops."""
    x, y, z = Atom("x"), Atom("y"), Atom("z")
    flip, stay_y, stay_z = Atom("x.flip"), Atom("y.stay"), Atom("z.stay")
    return FiniteMdp(
        [x, y, z],
        {flip: x, stay_y: y, stay_z: z},
        {flip: Dist({y: 0.5, z: 0.5}), stay_y: Dist.point(y), stay_z: Dist.point(z)},
        {flip: 0.0, stay_y: 1.0, stay_z: 2.0},
    )


@pytest.fixture
def two_cells() -> FiniteMdp:
    """Two mirror-symmetric cells, each able to stay or hop across."""
    a, b = Atom("a"), Atom("b")
    a_go, a_stay, b_go, b_stay = Atom("a.go"), Atom("a.stay"), Atom("b.go"), Atom("b.stay")
    return FiniteMdp(
        [a, b],
        {a_go: a, a_stay: a, b_go: b, b_stay: b},
        {a_go: Dist.point(b), a_stay: Dist.point(a), b_go: Dist.point(a), b_stay: Dist.point(b)},
        {a_go: 1.0, a_stay: 0.0, b_go: 1.0, b_stay: 0.0},
    )


@pytest.fixture
def course_layout() -> GridLayout:
    """The 4x4 layout with three obstacle cells."""
    return worlds_service.course_layout()


@pytest.fixture
def course_grid(course_layout) -> FiniteMdp:
    """Unpunctured 4x4 grid with reward for entering the destination."""
    return worlds_service.grid_from_layout(course_layout)
