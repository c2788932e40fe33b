import pytest

from compmdp.core.exceptions import BudgetExceeded, DanglingState, Mismatch, NotASubprocess
from compmdp.model.dist import Dist
from compmdp.model.labels import Atom
from compmdp.model.mdp import POINT_STATE, FiniteMdp, MdpMorphism
from compmdp.services.mdp import mdp_service
from compmdp.services.morphism import morphism_service
from compmdp.services.sampling import sampling_service


class TestCheckMorphism:
    """Test morphism validity."""

    def test_identity_valid(self, coin: FiniteMdp):
        """Test the identity passes both squares."""
        assert morphism_service.check_morphism(morphism_service.identity(coin)).ok

    def test_unique_map_to_pt(self, coin: FiniteMdp):
        """Test every MDP maps to pt."""
        m = morphism_service.unique_morphism_to_pt(coin)
        assert morphism_service.check_morphism(m).ok
        assert m.image_states() == frozenset({POINT_STATE})

    def test_transition_square_failure(self, coin: FiniteMdp):
        """Test a state map that breaks a pushforward is reported."""
        x, y, z = Atom("x"), Atom("y"), Atom("z")
        swap = MdpMorphism(coin, coin, {x: x, y: z, z: y}, {a: a for a in coin.actions})
        report = morphism_service.check_morphism(swap)
        assert not report.ok
        assert {issue.code for issue in report.issues} == {"anchor-square", "transition-square"}

    def test_reward_checked_only_when_flagged(self, coin: FiniteMdp):
        """Test reward compatibility is opt-in."""
        bumped = coin.with_reward({a: coin.reward_of(a) + 1 for a in coin.actions})
        plain = MdpMorphism(coin, bumped, {s: s for s in coin.states}, {a: a for a in coin.actions})
        flagged = MdpMorphism(coin, bumped, plain.f, plain.g, reward_compatible=True)
        assert morphism_service.check_morphism(plain).ok
        assert [i.code for i in morphism_service.check_morphism(flagged).issues] == ["reward"] * 3

    def test_unmapped_state(self, coin: FiniteMdp):
        """Test a partial state map is reported."""
        partial = MdpMorphism(coin, coin, {Atom("x"): Atom("x")}, {})
        codes = {issue.code for issue in morphism_service.check_morphism(partial).issues}
        assert "unmapped-state" in codes
        assert "unmapped-action" in codes


class TestCompose:
    """Test morphism composition."""

    def test_compose_mismatch(self, coin: FiniteMdp, chain: FiniteMdp):
        """Test composing non-adjacent morphisms raises."""
        with pytest.raises(Mismatch):
            morphism_service.compose(morphism_service.identity(coin), morphism_service.identity(chain))

    def test_composition_of_random_morphisms_valid(self, rng):
        """Test composites of valid morphisms are valid on 200 random MDPs."""
        for _ in range(200):
            m = sampling_service.random_mdp(rng, int(rng.integers(1, 7)))
            first = sampling_service.random_quotient_morphism(rng, m)
            second = morphism_service.unique_morphism_to_pt(first.target)
            assert morphism_service.check_morphism(first).ok
            assert morphism_service.check_morphism(second).ok
            assert morphism_service.check_morphism(morphism_service.compose(second, first)).ok
            assert morphism_service.check_morphism(morphism_service.unique_morphism_to_pt(m)).ok


class TestSubprocess:
    """Test subprocesses and the canonical subprocess."""

    def test_canonical_subprocess_drops_leaking_actions(self, coin: FiniteMdp):
        """Test actions with mass outside the subset are dropped."""
        sub, incl = morphism_service.canonical_subprocess(coin, [Atom("x"), Atom("y")])
        assert sub.actions == (Atom("y.stay"),)
        assert morphism_service.is_subprocess(incl)
        assert morphism_service.check_morphism(incl).ok

    def test_canonical_subprocess_whole_space(self, coin: FiniteMdp):
        """Test keeping every state keeps every action."""
        sub, _ = morphism_service.canonical_subprocess(coin, coin.states)
        assert sub == coin

    def test_canonical_subprocess_stray_state(self, coin: FiniteMdp):
        """Test a subset outside S raises."""
        with pytest.raises(DanglingState):
            morphism_service.canonical_subprocess(coin, [Atom("nowhere")])

    def test_full_subprocess(self, coin: FiniteMdp):
        """Test full means every action at an image state is in the image."""
        sub, incl = morphism_service.canonical_subprocess(coin, [Atom("y"), Atom("z")])
        assert morphism_service.is_full_subprocess(incl)
        _, bare_incl = morphism_service.restrict_actions(sub, [Atom("y.stay")])
        assert not morphism_service.is_full_subprocess(morphism_service.compose(incl, bare_incl))

    def test_factor_through_canonical_rejects_non_injective(self, coin: FiniteMdp):
        """Test a collapsing morphism is not a subprocess."""
        with pytest.raises(NotASubprocess):
            morphism_service.factor_through_canonical(morphism_service.unique_morphism_to_pt(coin))

    def test_maximality_on_random_subsets(self, rng):
        """Test every subprocess on a subset factors uniquely through the canonical one."""
        for _ in range(100):
            m = sampling_service.random_mdp(rng, int(rng.integers(1, 6)))
            keep = sampling_service.random_subset(rng, m.states, 0.6) or list(m.states[:1])
            sub = sampling_service.random_subprocess(rng, m, keep)
            factor = morphism_service.factor_through_canonical(sub)
            _, canon_incl = morphism_service.canonical_subprocess(m, keep)
            assert morphism_service.check_morphism(factor).ok
            assert morphism_service.compose(canon_incl, factor).same_maps(sub)


class TestEnumerate:
    """Test morphism enumeration and action-map completion."""

    def test_enumerate_into_pt(self, coin: FiniteMdp):
        """Test there is exactly one morphism into pt."""
        found = list(morphism_service.enumerate_morphisms(coin, mdp_service.point_mdp()))
        assert len(found) == 1

    def test_enumerate_self_maps(self, two_cells: FiniteMdp):
        """Test the symmetric pair has exactly the identity and the swap as automorphisms."""
        found = list(morphism_service.enumerate_morphisms(two_cells, two_cells, injective=True))
        assert len(found) == 2
        assert all(morphism_service.check_morphism(m).ok for m in found)

    def test_enumerate_budget(self, two_cells: FiniteMdp):
        """Test the enumeration stops at the budget."""
        with pytest.raises(BudgetExceeded):
            list(morphism_service.enumerate_morphisms(two_cells, two_cells, budget=2))

    def test_find_action_map(self, coin: FiniteMdp):
        """Test completing a state map picks matching actions."""
        m = morphism_service.find_action_map(coin, coin, {s: s for s in coin.states})
        assert m is not None
        assert dict(m.g) == {a: a for a in coin.actions}

    def test_find_action_map_none(self, coin: FiniteMdp):
        """Test an impossible state map yields None."""
        s = Atom("x")
        lonely = FiniteMdp([s], {}, {})
        assert morphism_service.find_action_map(coin, lonely, {t: s for t in coin.states}) is None

    def test_point_dist_pushforward(self):
        """Test pushforward through the service delegates to the distribution."""
        a, b = Atom("a"), Atom("b")
        assert morphism_service.pushforward({a: b}, Dist.point(a)) == Dist.point(b)
