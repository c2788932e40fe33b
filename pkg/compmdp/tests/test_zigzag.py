import pytest

from compmdp.core.exceptions import EmptiedBridge, IndexOutOfRange, Mismatch, NotASubprocess
from compmdp.model.diagrams import Bridge, ZigZagDiagram
from compmdp.model.dist import Dist
from compmdp.model.labels import Atom
from compmdp.model.mdp import FiniteMdp
from compmdp.services.morphism import morphism_service
from compmdp.services.worlds import worlds_service
from compmdp.services.zigzag import zigzag_service

P, Q, S = Atom("p"), Atom("q"), Atom("s")
P_STAY, P_BACK, P_GO, Q_STAY = Atom("p.stay"), Atom("p.back"), Atom("p.go"), Atom("q.stay")


def _mdp(states, moves) -> FiniteMdp:
    """moves: action -> (anchor, target, reward)."""
    return FiniteMdp(
        states,
        {a: src for a, (src, _, _) in moves.items()},
        {a: Dist.point(dst) for a, (_, dst, _) in moves.items()},
        {a: r for a, (_, _, r) in moves.items()},
    )


def _bridge(n: FiniteMdp, left: FiniteMdp, right: FiniteMdp) -> Bridge:
    return Bridge(mdp=n, left=morphism_service.inclusion(n, left), right=morphism_service.inclusion(n, right))


@pytest.fixture
def counterexample() -> ZigZagDiagram:
    """Two environments where the first leg's greedy exit forfeits the big reward."""
    return worlds_service.monotonicity_counterexample()


@pytest.fixture
def leaky() -> ZigZagDiagram:
    """The bridge state p can step back out of the handover in the first environment."""
    first = _mdp([S, P], {Atom("s.go"): (S, P, 1.0), P_STAY: (P, P, 0.0), P_BACK: (P, S, 0.0)})
    second = _mdp([P, Q], {P_STAY: (P, P, 0.0), P_GO: (P, Q, 1.0), Q_STAY: (Q, Q, 0.0)})
    handover = _mdp([P], {P_STAY: (P, P, 0.0)})
    return ZigZagDiagram((first, second), (_bridge(handover, first, second),))


class TestBridge:
    """Test the legs a bridge accepts."""

    def test_collapsing_leg_rejected(self):
        """Test a leg that merges bridge states is not a subprocess."""
        both = _mdp([P, Q], {P_STAY: (P, P, 0.0), Q_STAY: (Q, Q, 0.0)})
        with pytest.raises(NotASubprocess):
            Bridge(mdp=both, left=morphism_service.unique_morphism_to_pt(both), right=morphism_service.identity(both))

    def test_partial_leg_accepted(self, leaky: ZigZagDiagram):
        """Test an injective leg that misses actions at its image still makes a bridge."""
        bridge = leaky.bridges[0]
        assert morphism_service.is_subprocess(bridge.left)
        assert not morphism_service.is_full_subprocess(bridge.left)


class TestComposite:
    """Test gluing a zig-zag diagram."""

    def test_two_environments(self, counterexample: ZigZagDiagram):
        """Test shared exits are glued once."""
        composite = zigzag_service.build_composite(counterexample)
        assert composite.mdp.n_states == 4
        assert composite.mdp.n_actions == 6
        assert len(composite.component_inclusions) == 2
        for incl in composite.component_inclusions:
            assert morphism_service.check_morphism(incl).ok

    def test_single_environment(self, coin: FiniteMdp):
        """Test a lone environment is its own composite."""
        composite = zigzag_service.build_composite(ZigZagDiagram((coin,)))
        assert composite.mdp is coin

    def test_bridge_count_mismatch(self, coin: FiniteMdp, chain: FiniteMdp):
        """Test environments and bridges must alternate."""
        with pytest.raises(Mismatch):
            ZigZagDiagram((coin, chain))

    def test_truncate(self, counterexample: ZigZagDiagram):
        """Test truncation drops the leading environments."""
        tail = zigzag_service.truncate(counterexample, 1)
        assert tail.environments == counterexample.environments[1:]
        assert tail.n == 0
        assert zigzag_service.truncate(counterexample, 0) is counterexample

    @pytest.mark.parametrize("i", [-1, 2])
    def test_truncate_out_of_range(self, counterexample: ZigZagDiagram, i):
        """Test indices outside [0, n] raise."""
        with pytest.raises(IndexOutOfRange):
            zigzag_service.truncate(counterexample, i)

    def test_embed_truncation(self, counterexample: ZigZagDiagram):
        """Test the tail composite sits inside the full one."""
        assert morphism_service.check_morphism(zigzag_service.embed_truncation(counterexample, 1)).ok

    def test_bridge_images(self, counterexample: ZigZagDiagram):
        """Test the handover states of the first bridge."""
        assert zigzag_service.bridge_images(counterexample, 0) == frozenset({P, Q})
        with pytest.raises(IndexOutOfRange):
            zigzag_service.bridge_images(counterexample, 1)


class TestForwardMoving:
    """Test the forward-moving condition and its repair."""

    def test_full_bridge_is_forward_moving(self, counterexample: ZigZagDiagram):
        """Test bridges owning every action at their image qualify."""
        assert zigzag_service.is_forward_moving(counterexample)
        assert zigzag_service.make_forward_moving(counterexample) is counterexample

    def test_leaky_bridge_repaired(self, leaky: ZigZagDiagram):
        """Test actions leaving the handover are dropped."""
        assert not zigzag_service.is_forward_moving(leaky)
        repaired = zigzag_service.make_forward_moving(leaky)
        assert zigzag_service.is_forward_moving(repaired)
        assert P_BACK not in repaired.environments[0].psi
        assert repaired.environments[1] is leaky.environments[1]

    def test_repair_is_idempotent(self, leaky: ZigZagDiagram):
        """Test repairing a repaired diagram hands it back unchanged."""
        repaired = zigzag_service.make_forward_moving(leaky)
        assert zigzag_service.make_forward_moving(repaired) is repaired

    def test_emptied_bridge(self):
        """Test a repair that strips a bridge of every action raises."""
        first = _mdp([P], {P_STAY: (P, P, 0.0)})
        middle = _mdp([P, Q], {P_STAY: (P, P, 0.0), P_GO: (P, Q, 1.0), Q_STAY: (Q, Q, 0.0)})
        last = _mdp([P, Q], {Q_STAY: (Q, Q, 0.0)})
        only_q = _mdp([P, Q], {Q_STAY: (Q, Q, 0.0)})
        z = ZigZagDiagram(
            (first, middle, last),
            (_bridge(first, first, middle), _bridge(only_q, middle, last)),
        )
        with pytest.raises(EmptiedBridge):
            zigzag_service.make_forward_moving(z)


class TestStitching:
    """Test monotonicity and the stitched policy."""

    def test_counterexample_not_monotonic(self, counterexample: ZigZagDiagram):
        """Test the greedy first leg disagrees with the composite."""
        assert not zigzag_service.is_monotonic(counterexample, gamma=0.9)

    def test_counterexample_gap(self, counterexample: ZigZagDiagram):
        """Test stitching loses the reward behind the other exit."""
        assert zigzag_service.stitched_gap(counterexample, gamma=0.9) == pytest.approx(8.5, abs=1e-6)

    def test_counterexample_report(self, counterexample: ZigZagDiagram):
        """Test the report flags the failure."""
        report = zigzag_service.verify_stitching(counterexample, gamma=0.9)
        assert report.forward_moving
        assert not report.monotonic
        assert report.verdict == "FAIL"

    def test_stitched_policy_covers_composite(self, counterexample: ZigZagDiagram):
        """Test every non-terminal composite state gets an action."""
        composite = zigzag_service.build_composite(counterexample)
        stitched = zigzag_service.stitch_policies(counterexample, gamma=0.9, composite=composite)
        assert set(stitched.policy) == set(composite.mdp.states)
        assert len(stitched.component_policies) == 2

    def test_sequential_regions_pass(self, course_layout):
        """Test visiting regions in order stitches to the optimum."""
        z = worlds_service.sequential_regions(course_layout, [(3, 3), (0, 0), (0, 3)])
        report = zigzag_service.verify_stitching(z, gamma=0.9)
        assert report.environments == 4
        assert report.forward_moving
        assert report.monotonic
        assert report.passed
