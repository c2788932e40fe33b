import itertools
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Tuple

from loguru import logger

from compmdp.core.config import settings
from compmdp.core.exceptions import BudgetExceeded, DanglingState, Mismatch, NotASubprocess
from compmdp.model.dist import Dist, StateMap
from compmdp.model.labels import ActionId, StateId
from compmdp.model.mdp import POINT_ACTION, POINT_STATE, FiniteMdp, MdpMorphism, make_point_mdp
from compmdp.schemas import ValidationReport


def _max_matching(candidates: Dict[ActionId, List[ActionId]]) -> Optional[Dict[ActionId, ActionId]]:
    """Kuhn's augmenting paths; returns a perfect matching of the keys or None."""
    owner: Dict[ActionId, ActionId] = {}

    def augment(a, seen) -> bool:
        for b in candidates[a]:
            if b in seen:
                continue
            seen.add(b)
            if b not in owner or augment(owner[b], seen):
                owner[b] = a
                return True
        return False

    for a in candidates:
        if not augment(a, set()):
            return None
    return {a: b for b, a in owner.items()}


class MorphismService:
    def _eps(self, eps: Optional[float]) -> float:
        return settings.EPSILON if eps is None else eps

    def pushforward(self, f: StateMap, mu: Dist) -> Dist:
        return mu.pushforward(f)

    def identity(self, m: FiniteMdp) -> MdpMorphism:
        return MdpMorphism(
            m, m, {s: s for s in m.states}, {a: a for a in m.actions}, reward_compatible=m.has_reward
        )

    def inclusion(self, sub: FiniteMdp, m: FiniteMdp) -> MdpMorphism:
        """Label-preserving inclusion of a sub-MDP built by restriction."""
        return MdpMorphism(
            sub,
            m,
            {s: s for s in sub.states},
            {a: a for a in sub.actions},
            reward_compatible=sub.has_reward and m.has_reward,
        )

    def unique_morphism_to_pt(self, m: FiniteMdp, pt: Optional[FiniteMdp] = None) -> MdpMorphism:
        pt = pt or make_point_mdp()
        return MdpMorphism(
            m, pt, {s: POINT_STATE for s in m.states}, {a: POINT_ACTION for a in m.actions}
        )

    def check_morphism(self, m: MdpMorphism, eps: Optional[float] = None) -> ValidationReport:
        """Both compatibility squares, plus R1 = R2 o g when flagged reward-compatible."""
        eps = self._eps(eps)
        src, tgt = m.source, m.target
        report = ValidationReport(subject="morphism")
        for s in src.states:
            if s not in m.f:
                report.add("unmapped-state", f"state {s} has no image", str(s))
            elif not tgt.has_state(m.f[s]):
                report.add("dangling-image", f"image {m.f[s]} of state {s} is not a target state", str(s))
        check_reward = m.reward_compatible and src.has_reward and tgt.has_reward
        for a in src.actions:
            if a not in m.g:
                report.add("unmapped-action", f"action {a} has no image", str(a))
                continue
            b = m.g[a]
            if b not in tgt.psi:
                report.add("dangling-image", f"image {b} of action {a} is not a target action", str(a))
                continue
            if m.f.get(src.psi.get(a)) != tgt.psi[b]:
                report.add("anchor-square", f"anchor square fails for action {a}", str(a))
            try:
                pushed = src.trans[a].pushforward(m.f)
            except (DanglingState, KeyError):
                report.add("transition-square", f"transition of action {a} leaves the state map", str(a))
                continue
            distance = pushed.distance(tgt.trans.get(b, Dist()))
            if distance > eps:
                report.add(
                    "transition-square",
                    f"transition square fails for action {a} (distance {distance:.3g})",
                    str(a),
                )
            if check_reward and abs(src.reward_of(a) - tgt.reward_of(b)) > eps:
                report.add(
                    "reward",
                    f"reward mismatch for action {a}: {src.reward_of(a)} vs {tgt.reward_of(b)}",
                    str(a),
                )
        return report

    def compose(self, m2: MdpMorphism, m1: MdpMorphism) -> MdpMorphism:
        """m2 o m1"""
        if not (m1.target is m2.source or m1.target == m2.source):
            raise Mismatch("cannot compose: target of the first morphism is not the source of the second")
        return MdpMorphism(
            m1.source,
            m2.target,
            {s: m2.f[t] for s, t in m1.f.items()},
            {a: m2.g[b] for a, b in m1.g.items()},
            reward_compatible=m1.reward_compatible and m2.reward_compatible,
        )

    def is_subprocess(self, m: MdpMorphism) -> bool:
        return m.is_injective()

    def is_full_subprocess(self, m: MdpMorphism) -> bool:
        if not self.is_subprocess(m):
            return False
        image = m.image_actions()
        for t in m.image_states():
            if any(b not in image for b in m.target.actions_at(t)):
                return False
        return True

    def restrict_actions(self, m: FiniteMdp, keep_actions: Iterable[ActionId]) -> Tuple[FiniteMdp, MdpMorphism]:
        keep = set(keep_actions) & set(m.actions)
        sub = FiniteMdp(
            m.states,
            {a: m.psi[a] for a in keep},
            {a: m.trans[a] for a in keep},
            None if m.reward is None else {a: m.reward[a] for a in keep},
        )
        return sub, self.inclusion(sub, m)

    def canonical_subprocess(
        self, m: FiniteMdp, keep: Iterable[StateId], eps: Optional[float] = None
    ) -> Tuple[FiniteMdp, MdpMorphism]:
        """Largest subprocess on `keep`: actions anchored there whose mass outside is at most eps."""
        eps = self._eps(eps)
        keep = frozenset(keep)
        stray = [s for s in keep if not m.has_state(s)]
        if stray:
            raise DanglingState(f"state {min(stray)} is not a state of the MDP")
        psi: Dict[ActionId, StateId] = {}
        trans: Dict[ActionId, Dist] = {}
        for a in m.actions:
            if m.psi[a] not in keep:
                continue
            mu = m.trans[a]
            if mu.total() - mu.mass_of(keep) > eps:
                continue
            psi[a] = m.psi[a]
            trans[a] = mu.restrict(keep)
        reward = None if m.reward is None else {a: m.reward[a] for a in psi}
        sub = FiniteMdp(keep, psi, trans, reward)
        logger.debug(f"Canonical subprocess kept {sub.n_states}/{m.n_states} states, {sub.n_actions}/{m.n_actions} actions")
        return sub, self.inclusion(sub, m)

    def factor_through_canonical(self, sub: MdpMorphism, eps: Optional[float] = None) -> MdpMorphism:
        if not self.is_subprocess(sub):
            raise NotASubprocess("morphism is not injective on states and actions")
        canon, _ = self.canonical_subprocess(sub.target, sub.image_states(), eps)
        outside = [a for a, b in sub.g.items() if b not in canon.psi]
        if outside:
            raise NotASubprocess(f"action {min(outside)} does not land in the canonical subprocess")
        return MdpMorphism(sub.source, canon, sub.f, sub.g, reward_compatible=sub.reward_compatible)

    def _action_candidates(
        self,
        source: FiniteMdp,
        target: FiniteMdp,
        f: Mapping[StateId, StateId],
        a: ActionId,
        eps: float,
        with_reward: bool,
    ) -> List[ActionId]:
        pushed = source.trans[a].pushforward(f)
        return [
            b
            for b in target.actions_at(f[source.psi[a]])
            if pushed.is_close(target.trans[b], eps)
            and (not with_reward or abs(source.reward_of(a) - target.reward_of(b)) <= eps)
        ]

    def find_action_map(
        self,
        source: FiniteMdp,
        target: FiniteMdp,
        f: Mapping[StateId, StateId],
        injective: bool = False,
        reward_compatible: bool = False,
        eps: Optional[float] = None,
    ) -> Optional[MdpMorphism]:
        """Complete a state map to a morphism, or None when some action has no partner."""
        eps = self._eps(eps)
        with_reward = reward_compatible and source.has_reward and target.has_reward
        g: Dict[ActionId, ActionId] = {}
        for s in source.states:
            candidates = {
                a: self._action_candidates(source, target, f, a, eps, with_reward) for a in source.actions_at(s)
            }
            if injective:
                matched = _max_matching(candidates)
                if matched is None:
                    return None
                g.update(matched)
            else:
                for a, options in candidates.items():
                    if not options:
                        return None
                    g[a] = options[0]
        return MdpMorphism(source, target, f, g, reward_compatible=reward_compatible)

    def enumerate_morphisms(
        self,
        source: FiniteMdp,
        target: FiniteMdp,
        budget: Optional[int] = None,
        injective: bool = False,
        reward_compatible: bool = False,
        eps: Optional[float] = None,
    ) -> Iterator[MdpMorphism]:
        """Every morphism source -> target, in deterministic order."""
        eps = self._eps(eps)
        budget = budget or settings.MORPHISM_ENUM_BUDGET
        with_reward = reward_compatible and source.has_reward and target.has_reward
        order = list(source.states)
        position = {s: i for i, s in enumerate(order)}
        ready: Dict[int, List[ActionId]] = {}
        for a in source.actions:
            needed = [source.psi[a], *source.trans[a].support()]
            ready.setdefault(max(position[s] for s in needed), []).append(a)
        steps = 0

        def tick():
            nonlocal steps
            steps += 1
            if steps > budget:
                raise BudgetExceeded(f"morphism enumeration exceeded {budget} steps")

        def assign(i: int, f: Dict[StateId, StateId]):
            if i == len(order):
                options = [
                    self._action_candidates(source, target, f, a, eps, with_reward) for a in source.actions
                ]
                for choice in itertools.product(*options):
                    tick()
                    if injective and len(set(choice)) != len(choice):
                        continue
                    yield MdpMorphism(
                        source, target, dict(f), dict(zip(source.actions, choice)), reward_compatible
                    )
                return
            s = order[i]
            for t in target.states:
                tick()
                if injective and t in f.values():
                    continue
                f[s] = t
                if all(self._action_candidates(source, target, f, a, eps, with_reward) for a in ready.get(i, ())):
                    yield from assign(i + 1, f)
                del f[s]

        yield from assign(0, {})


morphism_service = MorphismService()
