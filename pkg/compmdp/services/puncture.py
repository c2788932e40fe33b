from typing import Iterable, Optional, Tuple

from loguru import logger

from compmdp.core.config import settings
from compmdp.core.exceptions import BudgetExceeded, DanglingState, PreconditionFailed
from compmdp.model.diagrams import Cospan, Span
from compmdp.model.labels import Label, Pair, StateId
from compmdp.model.mdp import FiniteMdp, MdpMorphism
from compmdp.services.composition import composition_service
from compmdp.services.mdp import mdp_service
from compmdp.services.morphism import morphism_service


def _extend(label: Label) -> Label:
    """Pair(Pair(s1, .., sk), s) -> Pair(s1, .., sk, s)"""
    head, tail = label.parts
    return Pair(*head.parts, tail)


class PunctureService:
    def puncture(
        self, m: FiniteMdp, obstacles: Iterable[StateId], eps: Optional[float] = None
    ) -> Tuple[FiniteMdp, MdpMorphism]:
        """Remove O, every action anchored on O and every action with mass above eps into O."""
        obstacles = frozenset(obstacles)
        stray = [o for o in obstacles if not m.has_state(o)]
        if stray:
            raise DanglingState(f"obstacle {min(stray)} is not a state of the MDP")
        punctured, inclusion = morphism_service.canonical_subprocess(m, m.state_set - obstacles, eps)
        logger.info(
            f"Punctured {len(obstacles)} states: {m.n_actions - punctured.n_actions} actions removed, "
            f"{punctured.n_states} states left"
        )
        return punctured, inclusion

    def puncture_along(
        self, m2: FiniteMdp, sub: MdpMorphism, eps: Optional[float] = None
    ) -> Tuple[FiniteMdp, MdpMorphism]:
        return self.puncture(m2, sub.image_states(), eps)

    def check_static_obstacles(
        self,
        m: FiniteMdp,
        o1: Iterable[StateId],
        o2: Iterable[StateId],
        eps: Optional[float] = None,
    ) -> bool:
        """M12 is both the fiber product of M1 and M2 over M and the apex they glue back to M along."""
        o1, o2 = frozenset(o1), frozenset(o2)
        if o1 & o2:
            raise PreconditionFailed(f"obstacle groups overlap at {min(o1 & o2)}")
        m1, incl1 = self.puncture(m, o1, eps)
        m2, incl2 = self.puncture(m, o2, eps)
        m12, _ = self.puncture(m, o1 | o2, eps)

        fiber = composition_service.fiber_product(Cospan(incl1, incl2))
        is_fiber = mdp_service.isomorphic(fiber.product, m12, eps=eps) is not None

        span = Span(morphism_service.inclusion(m12, m1), morphism_service.inclusion(m12, m2))
        glued = composition_service.pushout(span, eps)
        is_pushout = mdp_service.isomorphic(glued.glued, m, eps=eps) is not None

        logger.info(f"Static obstacles: fiber square {is_fiber}, pushout square {is_pushout}")
        return is_fiber and is_pushout

    def check_disjoint_recovery(self, s: Span, eps: Optional[float] = None) -> bool:
        """Puncturing the glue along the part of M2 outside M3 gives back M1."""
        eps = settings.EPSILON if eps is None else eps
        m2 = s.m2.target
        shared = s.m2.image_states()
        shared_actions = s.m2.image_actions()
        for a in m2.actions:
            if a in shared_actions:
                continue
            mu = m2.trans[a]
            if mu.total() - mu.mass_of(shared) <= eps:
                raise PreconditionFailed(f"action {a} of the second leg is supported on the shared part")
        r = composition_service.pushout(s, eps)
        outside = [r.incl2.f[y] for y in m2.states if y not in shared]
        punctured, _ = self.puncture(r.glued, outside, eps)
        hint = MdpMorphism(s.m1.target, punctured, r.incl1.f, r.incl1.g, reward_compatible=punctured.has_reward)
        return mdp_service.isomorphic(s.m1.target, punctured, hint=hint, eps=eps) is not None

    def collision_free_product(self, m: FiniteMdp, n_agents: int, budget: Optional[int] = None) -> FiniteMdp:
        """N-fold product punctured along the big diagonal."""
        budget = budget or settings.PRODUCT_STATE_BUDGET
        if n_agents < 2:
            raise PreconditionFailed("a collision-free product needs at least two agents")
        if m.n_states ** n_agents > budget:
            raise BudgetExceeded(f"{m.n_states}^{n_agents} product states exceed the budget of {budget}")
        joint = composition_service.product(m, m, budget).product
        for _ in range(n_agents - 2):
            joint = composition_service.product(joint, m, budget).product
            joint, _ = mdp_service.relabel(joint, _extend, _extend)
        diagonal = [
            s for s in joint.states if isinstance(s, Pair) and len(set(s.parts)) < len(s.parts)
        ]
        free, _ = self.puncture(joint, diagonal)
        logger.info(f"Collision-free product of {n_agents} agents: {free.n_states} states, {free.n_actions} actions")
        return free


puncture_service = PunctureService()
