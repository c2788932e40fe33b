import math
from collections import Counter
from typing import Callable, Dict, List, Mapping, Optional, Tuple, Union

from loguru import logger

from compmdp.core.config import settings
from compmdp.core.exceptions import BudgetExceeded, Mismatch, SizeExceeded
from compmdp.model.labels import ActionId, Label, StateId, canonical_form
from compmdp.model.mdp import FiniteMdp, MdpMorphism, make_empty_mdp, make_point_mdp
from compmdp.schemas import ValidationReport
from compmdp.services.morphism import morphism_service

LabelMap = Union[Mapping[Label, Label], Callable[[Label], Label], None]


def _lookup(table: LabelMap) -> Callable[[Label], Label]:
    if table is None:
        return lambda x: x
    if callable(table) and not isinstance(table, Mapping):
        return table
    return lambda x: table.get(x, x)


class MdpService:
    def point_mdp(self) -> FiniteMdp:
        return make_point_mdp()

    def empty_mdp(self, rewarded: bool = False) -> FiniteMdp:
        return make_empty_mdp(rewarded)

    def canonical_form(self, label: Label) -> Label:
        return canonical_form(label)

    def validate(self, m: FiniteMdp, eps: Optional[float] = None) -> ValidationReport:
        eps = settings.EPSILON if eps is None else eps
        report = ValidationReport(subject="mdp")
        for a in m.actions:
            if a not in m.psi:
                report.add("missing-anchor", f"missing anchor for action {a}", str(a))
            elif not m.has_state(m.psi[a]):
                report.add("dangling-anchor", f"dangling anchor {m.psi[a]} for action {a}", str(a))
            mu = m.trans.get(a)
            if mu is None:
                report.add("missing-transition", f"missing transition for action {a}", str(a))
                continue
            for s in mu:
                if not m.has_state(s):
                    report.add("dangling-target", f"dangling transition target {s} for action {a}", str(a))
            total = mu.total()
            if abs(total - 1.0) > eps:
                report.add("mass", f"mass {total:.12g} ≠ 1 for action {a}", str(a))
            if m.reward is not None:
                if a not in m.reward:
                    report.add("missing-reward", f"missing reward for action {a}", str(a))
                elif not math.isfinite(m.reward[a]):
                    report.add("reward", f"non-finite reward for action {a}", str(a))
        return report

    def relabel(
        self, m: FiniteMdp, state_map: LabelMap = None, action_map: LabelMap = None
    ) -> Tuple[FiniteMdp, MdpMorphism]:
        """Bijective renaming; returns the renamed MDP and the morphism m -> renamed."""
        fs, ga = _lookup(state_map), _lookup(action_map)
        f = {s: fs(s) for s in m.states}
        g = {a: ga(a) for a in m.actions}
        if len(set(f.values())) != len(f) or len(set(g.values())) != len(g):
            raise Mismatch("relabeling must be injective")
        renamed = FiniteMdp(
            f.values(),
            {g[a]: f[m.psi[a]] for a in m.actions},
            {g[a]: m.trans[a].pushforward(f) for a in m.actions},
            None if m.reward is None else {g[a]: m.reward[a] for a in m.actions},
        )
        return renamed, MdpMorphism(m, renamed, f, g, reward_compatible=m.has_reward)

    def _is_isomorphism(self, candidate: MdpMorphism, eps: float) -> bool:
        return (
            len(set(candidate.f.values())) == candidate.target.n_states == len(candidate.f)
            and len(set(candidate.g.values())) == candidate.target.n_actions == len(candidate.g)
            and morphism_service.check_morphism(candidate, eps).ok
        )

    def _label_match(self, m1: FiniteMdp, m2: FiniteMdp) -> Optional[Tuple[Dict, Dict]]:
        def keyed(labels):
            table = {canonical_form(x): x for x in labels}
            return table if len(table) == len(labels) else None

        s1, s2 = keyed(m1.states), keyed(m2.states)
        a1, a2 = keyed(m1.actions), keyed(m2.actions)
        if None in (s1, s2, a1, a2) or set(s1) != set(s2) or set(a1) != set(a2):
            return None
        return {s1[k]: s2[k] for k in s1}, {a1[k]: a2[k] for k in a1}

    def _colors(self, m1: FiniteMdp, m2: FiniteMdp) -> Tuple[Dict[StateId, int], Dict[StateId, int]]:
        """Joint colour refinement on the transition graph, free of float comparisons."""
        sides = (m1, m2)
        colors = [
            {s: (len(m.actions_at(s)), tuple(sorted(len(m.trans[a]) for a in m.actions_at(s)))) for s in m.states}
            for m in sides
        ]
        n_classes = -1
        while True:
            signatures = []
            for m, col in zip(sides, colors):
                signatures.append(
                    {
                        s: (
                            col[s],
                            tuple(sorted(tuple(sorted(col[t] for t in m.trans[a])) for a in m.actions_at(s))),
                        )
                        for s in m.states
                    }
                )
            palette = {sig: i for i, sig in enumerate(sorted(set(signatures[0].values()) | set(signatures[1].values())))}
            colors = [{s: palette[sig] for s, sig in sig_map.items()} for sig_map in signatures]
            if len(palette) == n_classes:
                return colors[0], colors[1]
            n_classes = len(palette)

    def isomorphic(
        self,
        m1: FiniteMdp,
        m2: FiniteMdp,
        hint: Optional[MdpMorphism] = None,
        eps: Optional[float] = None,
        max_states: Optional[int] = None,
    ) -> Optional[MdpMorphism]:
        eps = settings.EPSILON if eps is None else eps
        max_states = max_states or settings.ISO_MAX_STATES
        if m1.n_states != m2.n_states or m1.n_actions != m2.n_actions:
            return None
        rewarded = m1.has_reward and m2.has_reward

        def witness(f, g) -> Optional[MdpMorphism]:
            candidate = MdpMorphism(m1, m2, f, g, reward_compatible=rewarded)
            return candidate if self._is_isomorphism(candidate, eps) else None

        if hint is not None:
            found = witness(hint.f, hint.g)
            if found is not None:
                return found
        matched = self._label_match(m1, m2)
        if matched is not None:
            found = witness(*matched)
            if found is not None:
                logger.debug("Isomorphism found by canonical labels")
                return found
        if m1.n_states > max_states:
            raise SizeExceeded(f"isomorphism search limited to {max_states} states, got {m1.n_states}")

        c1, c2 = self._colors(m1, m2)
        if Counter(c1.values()) != Counter(c2.values()):
            return None
        buckets: Dict[int, List[StateId]] = {}
        for t, c in c2.items():
            buckets.setdefault(c, []).append(t)
        order = sorted(m1.states, key=lambda s: (len(buckets[c1[s]]), s))
        budget = settings.MORPHISM_ENUM_BUDGET
        steps = 0

        def search(i: int, f: Dict[StateId, StateId], used: set) -> Optional[MdpMorphism]:
            nonlocal steps
            if i == len(order):
                completed = morphism_service.find_action_map(
                    m1, m2, f, injective=True, reward_compatible=rewarded, eps=eps
                )
                if completed is not None and self._is_isomorphism(completed, eps):
                    return completed
                return None
            s = order[i]
            for t in buckets[c1[s]]:
                if t in used:
                    continue
                steps += 1
                if steps > budget:
                    raise BudgetExceeded(f"isomorphism search exceeded {budget} steps")
                f[s] = t
                used.add(t)
                found = search(i + 1, f, used)
                used.discard(t)
                del f[s]
                if found is not None:
                    return found
            return None

        return search(0, {}, set())


mdp_service = MdpService()
