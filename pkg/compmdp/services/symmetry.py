from collections import deque
from typing import Dict, Iterable, List, Optional, Tuple

from loguru import logger

from compmdp.core.config import settings
from compmdp.core.exceptions import BudgetExceeded, InconsistentOrbit, NotAutomorphism, NotInvariant, RewardClash
from compmdp.model.diagrams import Span
from compmdp.model.dist import Dist
from compmdp.model.group import GroupAction, GroupElement
from compmdp.model.labels import ActionId, Atom, Label, Orbit, Pair, StateId
from compmdp.model.mdp import FiniteMdp, MdpMorphism
from compmdp.model.solution import Solution
from compmdp.services.composition import composition_service
from compmdp.services.morphism import morphism_service
from compmdp.services.solver import solver_service


def _as_morphism(m: FiniteMdp, g: GroupElement) -> MdpMorphism:
    return MdpMorphism(
        m, m, {s: g.state(s) for s in m.states}, {a: g.action(a) for a in m.actions}, reward_compatible=m.has_reward
    )


class SymmetryService:
    def _check_automorphism(self, m: FiniteMdp, g: GroupElement, eps: Optional[float]) -> None:
        name = g.name or "unnamed generator"
        for table, universe, kind in ((g.alpha, m.state_set, "state"), (g.beta, set(m.actions), "action")):
            stray = [x for x in list(table) + list(table.values()) if x not in universe]
            if stray:
                raise NotAutomorphism(f"{name}: {kind} {min(stray)} is not in the MDP")
            if set(table) != set(table.values()):
                raise NotAutomorphism(f"{name}: {kind} map is not a bijection")
        for direction, element in (("forward", g), ("inverse", g.inverse())):
            report = morphism_service.check_morphism(_as_morphism(m, element), eps)
            if not report.ok:
                raise NotAutomorphism(f"{name} ({direction}): {report.issues[0].message}")

    def close_group(
        self,
        m: FiniteMdp,
        gens: Iterable[GroupElement],
        budget: Optional[int] = None,
        eps: Optional[float] = None,
    ) -> GroupAction:
        budget = budget or settings.GROUP_BUDGET
        gens = tuple(gens)
        for g in gens:
            self._check_automorphism(m, g, eps)

        identity = GroupElement.identity()
        elements: List[GroupElement] = [identity]
        seen = {identity}
        queue = deque([identity])
        while queue:
            x = queue.popleft()
            for g in gens:
                y = x.then(g)
                if y in seen:
                    continue
                if len(elements) >= budget:
                    raise BudgetExceeded(f"group closure exceeded {budget} elements")
                seen.add(y)
                elements.append(y)
                queue.append(y)
        logger.info(f"Group closed: {len(gens)} generators, {len(elements)} elements")
        return GroupAction(mdp=m, generators=gens, elements=tuple(elements))

    def _element_tags(self, G: GroupAction) -> List[Atom]:
        return [Atom(f"g{i}") for i in range(G.order)]

    def product_with_group(self, m: FiniteMdp, G: GroupAction) -> FiniteMdp:
        """M x G: every state and action tagged with a group element, dynamics unchanged."""
        tags = self._element_tags(G)
        psi: Dict[Label, Label] = {}
        trans: Dict[Label, Dist] = {}
        reward: Optional[Dict[Label, float]] = {} if m.has_reward else None
        for tag in tags:
            for a in m.actions:
                hat = Pair(a, tag)
                psi[hat] = Pair(m.psi[a], tag)
                trans[hat] = m.trans[a].pushforward(lambda s, tag=tag: Pair(s, tag))
                if reward is not None:
                    reward[hat] = m.reward_of(a)
        return FiniteMdp([Pair(s, tag) for tag in tags for s in m.states], psi, trans, reward)

    def _orbits(self, items: Iterable[Label], move) -> Dict[Label, Orbit]:
        orbit_of: Dict[Label, Orbit] = {}
        for x in items:
            if x in orbit_of:
                continue
            orbit = Orbit(move(x))
            for member in orbit.members:
                orbit_of[member] = orbit
        return orbit_of

    def quotient(
        self, m: FiniteMdp, G: GroupAction, eps: Optional[float] = None
    ) -> Tuple[FiniteMdp, MdpMorphism]:
        eps = settings.EPSILON if eps is None else eps
        state_orbit = self._orbits(m.states, lambda s: {h.state(s) for h in G.elements})
        action_orbit = self._orbits(m.actions, lambda a: {h.action(a) for h in G.elements})

        psi: Dict[Label, Label] = {}
        trans: Dict[Label, Dist] = {}
        reward: Optional[Dict[Label, float]] = {} if m.has_reward else None
        for orbit in sorted(set(action_orbit.values())):
            rep = orbit.members[0]
            psi[orbit] = state_orbit[m.psi[rep]]
            trans[orbit] = m.trans[rep].pushforward(state_orbit)
            for a in orbit.members[1:]:
                if not m.trans[a].pushforward(state_orbit).is_close(trans[orbit], eps):
                    raise InconsistentOrbit(f"members {rep} and {a} of an action orbit disagree after quotienting")
            if reward is not None:
                values = [m.reward_of(a) for a in orbit.members]
                if max(values) - min(values) > eps:
                    raise RewardClash(f"reward is not constant on the orbit of {rep}")
                reward[orbit] = values[0]

        quotient = FiniteMdp(set(state_orbit.values()), psi, trans, reward)
        q = MdpMorphism(m, quotient, state_orbit, action_orbit, reward_compatible=m.has_reward)
        logger.info(f"Quotient by a group of order {G.order}: {m.n_states} -> {quotient.n_states} states")
        return quotient, q

    def check_quotient_universal(
        self,
        m: FiniteMdp,
        G: GroupAction,
        n: FiniteMdp,
        invariant_morphism: MdpMorphism,
        quotient: Optional[Tuple[FiniteMdp, MdpMorphism]] = None,
    ) -> MdpMorphism:
        """The unique M/G -> N through which a G-invariant morphism M -> N factors."""
        for h in G.elements:
            for s in m.states:
                if invariant_morphism.f[h.state(s)] != invariant_morphism.f[s]:
                    raise NotInvariant(f"element {h.name or h} moves the image of state {s}")
            for a in m.actions:
                if invariant_morphism.g[h.action(a)] != invariant_morphism.g[a]:
                    raise NotInvariant(f"element {h.name or h} moves the image of action {a}")
        quotient_mdp, q = quotient or self.quotient(m, G)
        f = {orbit: invariant_morphism.f[orbit.members[0]] for orbit in quotient_mdp.states}
        g = {orbit: invariant_morphism.g[orbit.members[0]] for orbit in quotient_mdp.actions}
        return MdpMorphism(quotient_mdp, n, f, g, reward_compatible=invariant_morphism.reward_compatible)

    def check_quotient_matches_pushout(self, m: FiniteMdp, G: GroupAction, eps: Optional[float] = None) -> bool:
        """Gluing M to itself along (pr1, rho) from M x G yields the orbit quotient."""
        hat = self.product_with_group(m, G)
        tags = self._element_tags(G)
        element_of = dict(zip(tags, G.elements))
        pr1 = MdpMorphism(hat, m, {p: p.parts[0] for p in hat.states}, {p: p.parts[0] for p in hat.actions})
        rho = MdpMorphism(
            hat,
            m,
            {p: element_of[p.parts[1]].state(p.parts[0]) for p in hat.states},
            {p: element_of[p.parts[1]].action(p.parts[0]) for p in hat.actions},
        )
        r = composition_service.pushout(Span(pr1, rho), eps)
        quotient_mdp, q = self.quotient(m, G, eps)
        mediator = composition_service.check_pushout_universal(r, (q, q))
        bijective = (
            len(set(mediator.f.values())) == quotient_mdp.n_states == r.glued.n_states
            and len(set(mediator.g.values())) == quotient_mdp.n_actions == r.glued.n_actions
        )
        return bijective and morphism_service.check_morphism(mediator, eps).ok

    def lift_policy(
        self, m: FiniteMdp, G: GroupAction, quotient_solution: Solution, q: MdpMorphism
    ) -> Dict[StateId, ActionId]:
        """Pull the quotient's greedy choice back to the smallest matching action at each state."""
        policy: Dict[StateId, ActionId] = {}
        for s in m.states:
            chosen = quotient_solution.policy.get(q.f[s])
            if chosen is None:
                continue
            matches = [a for a in m.actions_at(s) if q.g[a] == chosen]
            if matches:
                policy[s] = min(matches)
        return policy

    def check_policy_lift(
        self,
        m: FiniteMdp,
        G: GroupAction,
        gamma: Optional[float] = None,
        tol: float = 1e-6,
        eps: Optional[float] = None,
    ) -> List[StateId]:
        """States where the lifted quotient policy misses the optimal backup of M by more than tol."""
        quotient_mdp, q = self.quotient(m, G, eps)
        lifted = self.lift_policy(m, G, solver_service.value_iteration(quotient_mdp, gamma), q)
        values = solver_service.value_iteration(m, gamma).values
        misses = []
        for s in m.states:
            if m.is_terminal(s):
                continue
            _, best = solver_service.bellman_backup(m, values, s, gamma, tol)
            if lifted.get(s) not in best:
                misses.append(s)
        if misses:
            logger.warning(f"Lifted policy is not greedy at {len(misses)} states")
        return misses


symmetry_service = SymmetryService()
