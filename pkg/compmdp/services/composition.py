from typing import Dict, Hashable, List, Optional, Tuple

from loguru import logger

from compmdp.core.config import settings
from compmdp.core.exceptions import BudgetExceeded, Mismatch, NonCommuting, NotIndependent, RewardClash
from compmdp.model.diagrams import Cospan, FiberProductResult, PushoutResult, Span
from compmdp.model.dist import Dist
from compmdp.model.labels import Glued, Label, Left, Pair, Right
from compmdp.model.mdp import FiniteMdp, MdpMorphism, make_point_mdp
from compmdp.services.morphism import morphism_service


class _UnionFind:
    def __init__(self):
        self.parent: Dict[Hashable, Hashable] = {}

    def add(self, x: Hashable) -> None:
        self.parent.setdefault(x, x)

    def find(self, x: Hashable) -> Hashable:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: Hashable, y: Hashable) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[max(rx, ry)] = min(rx, ry)

    def classes(self) -> Dict[Hashable, List[Hashable]]:
        out: Dict[Hashable, List[Hashable]] = {}
        for x in self.parent:
            out.setdefault(self.find(x), []).append(x)
        return out


def _density(mu1: Dist, mu2: Dist, f1, f2) -> Dict[Label, float]:
    """nu(s1, s2) = mu1(s1) mu2(s2) / mu3(f1 s1) over pairs agreeing in the apex."""
    mu3 = mu1.pushforward(f1)
    by_image: Dict[Label, List[Tuple[Label, float]]] = {}
    for s2, p2 in mu2.items():
        by_image.setdefault(f2[s2], []).append((s2, p2))
    nu: Dict[Label, float] = {}
    for s1, p1 in mu1.items():
        z = f1[s1]
        denom = mu3.mass(z)
        if denom <= 0:
            continue
        for s2, p2 in by_image.get(z, ()):
            nu[Pair(s1, s2)] = p1 * p2 / denom
    return nu


def _commutes(c: Cospan, a1: MdpMorphism, a2: MdpMorphism) -> Optional[str]:
    for s in a1.source.states:
        if c.m1.f[a1.f[s]] != c.m2.f[a2.f[s]]:
            return f"outer square fails at state {s}"
    for b in a1.source.actions:
        if c.m1.g[a1.g[b]] != c.m2.g[a2.g[b]]:
            return f"outer square fails at action {b}"
    return None


class CompositionService:
    def _eps(self, eps: Optional[float]) -> float:
        return settings.EPSILON if eps is None else eps

    def fiber_product(self, c: Cospan, budget: Optional[int] = None) -> FiberProductResult:
        budget = budget or settings.PRODUCT_STATE_BUDGET
        m1, m2 = c.m1, c.m2
        left, right = m1.source, m2.source

        over: Dict[Label, List[Label]] = {}
        for s2 in right.states:
            over.setdefault(m2.f[s2], []).append(s2)
        n_pairs = sum(len(over.get(m1.f[s1], ())) for s1 in left.states)
        if n_pairs > budget:
            raise BudgetExceeded(f"fiber product would have {n_pairs} states, budget is {budget}")
        states = [Pair(s1, s2) for s1 in left.states for s2 in over.get(m1.f[s1], ())]

        actions_over: Dict[Label, List[Label]] = {}
        for a2 in right.actions:
            actions_over.setdefault(m2.g[a2], []).append(a2)

        rewarded = c.apex.has_reward and m1.reward_compatible and m2.reward_compatible
        psi: Dict[Label, Label] = {}
        trans: Dict[Label, Dist] = {}
        reward: Dict[Label, float] = {}
        proj1_g: Dict[Label, Label] = {}
        proj2_g: Dict[Label, Label] = {}
        for a1 in left.actions:
            for a2 in actions_over.get(m1.g[a1], ()):
                a = Pair(a1, a2)
                psi[a] = Pair(left.psi[a1], right.psi[a2])
                trans[a] = Dist(_density(left.trans[a1], right.trans[a2], m1.f, m2.f))
                proj1_g[a], proj2_g[a] = a1, a2
                if rewarded:
                    reward[a] = c.apex.reward_of(m1.g[a1])

        product = FiniteMdp(states, psi, trans, reward if rewarded else None)
        proj1 = MdpMorphism(product, left, {p: p.parts[0] for p in states}, proj1_g, reward_compatible=rewarded)
        proj2 = MdpMorphism(product, right, {p: p.parts[1] for p in states}, proj2_g, reward_compatible=rewarded)
        logger.info(f"Fiber product built: {product.n_states} states, {product.n_actions} actions")
        return FiberProductResult(product=product, proj1=proj1, proj2=proj2, cospan=c)

    def product(self, m1: FiniteMdp, m2: FiniteMdp, budget: Optional[int] = None) -> FiberProductResult:
        """Cartesian product, the fiber product over pt."""
        pt = make_point_mdp()
        cospan = Cospan(
            morphism_service.unique_morphism_to_pt(m1, pt), morphism_service.unique_morphism_to_pt(m2, pt)
        )
        return self.fiber_product(cospan, budget)

    def check_pushforward_prop(self, r: FiberProductResult, eps: Optional[float] = None) -> bool:
        eps = self._eps(eps)
        for a in r.product.actions:
            mu = r.product.trans[a]
            for proj in (r.proj1, r.proj2):
                if not mu.pushforward(proj.f).is_close(proj.target.trans[proj.g[a]], eps):
                    logger.debug(f"Marginal of {a} along a projection differs from the factor")
                    return False
        return True

    def is_conditionally_independent(
        self, n: FiniteMdp, a1: MdpMorphism, a2: MdpMorphism, c: Cospan, eps: Optional[float] = None
    ) -> bool:
        eps = self._eps(eps)
        problem = _commutes(c, a1, a2)
        if problem:
            raise NonCommuting(problem)
        joint = {s: Pair(a1.f[s], a2.f[s]) for s in n.states}
        for b in n.actions:
            observed = n.trans[b].pushforward(joint)
            nu = Dist(_density(a1.target.trans[a1.g[b]], a2.target.trans[a2.g[b]], c.m1.f, c.m2.f))
            if not observed.is_close(nu, eps):
                logger.debug(f"Action {b} is not conditionally independent over the apex")
                return False
        return True

    def universal_map_into_fiber(
        self, n: FiniteMdp, a1: MdpMorphism, a2: MdpMorphism, r: FiberProductResult, eps: Optional[float] = None
    ) -> MdpMorphism:
        if not self.is_conditionally_independent(n, a1, a2, r.cospan, eps):
            raise NotIndependent("cone is not a conditionally independent pair")
        return MdpMorphism(
            n,
            r.product,
            {s: Pair(a1.f[s], a2.f[s]) for s in n.states},
            {b: Pair(a1.g[b], a2.g[b]) for b in n.actions},
            reward_compatible=a1.reward_compatible and a2.reward_compatible and r.product.has_reward,
        )

    def pushout(self, s: Span, eps: Optional[float] = None) -> PushoutResult:
        """Glue M1 and M2 along the apex: Left / Glued / Right components."""
        eps = self._eps(eps)
        m1, m2 = s.m1, s.m2
        left, right = m1.target, m2.target

        def quotient(side1, side2, leg1, leg2, apex_items):
            uf = _UnionFind()
            for x in side1:
                uf.add((1, x))
            for y in side2:
                uf.add((2, y))
            witness: Dict[Tuple[int, Label], Label] = {}
            for z in apex_items:
                uf.union((1, leg1[z]), (2, leg2[z]))
                for node in ((1, leg1[z]), (2, leg2[z])):
                    if node not in witness or z < witness[node]:
                        witness[node] = z
            label: Dict[Tuple[int, Label], Label] = {}
            for members in uf.classes().values():
                glued = [witness[m] for m in members if m in witness]
                if glued:
                    tag = Glued(min(glued))
                else:
                    side, x = members[0]
                    tag = (Left if side == 1 else Right)(x)
                for member in members:
                    label[member] = tag
            return label

        state_label = quotient(left.states, right.states, m1.f, m2.f, s.apex.states)
        action_label = quotient(left.actions, right.actions, m1.g, m2.g, s.apex.actions)

        i1_f = {x: state_label[(1, x)] for x in left.states}
        i2_f = {y: state_label[(2, y)] for y in right.states}
        i1_g = {a: action_label[(1, a)] for a in left.actions}
        i2_g = {b: action_label[(2, b)] for b in right.actions}

        rewarded = left.has_reward and right.has_reward
        psi: Dict[Label, Label] = {}
        trans: Dict[Label, Dist] = {}
        rewards: Dict[Label, List[float]] = {}
        for b in right.actions:
            tag = i2_g[b]
            psi[tag] = i2_f[right.psi[b]]
            trans[tag] = right.trans[b].pushforward(i2_f)
            if rewarded:
                rewards.setdefault(tag, []).append(right.reward_of(b))
        # leg-1 values win on identified actions
        for a in left.actions:
            tag = i1_g[a]
            psi[tag] = i1_f[left.psi[a]]
            trans[tag] = left.trans[a].pushforward(i1_f)
            if rewarded:
                rewards.setdefault(tag, []).append(left.reward_of(a))

        reward = None
        if rewarded:
            reward = {}
            for tag, values in rewards.items():
                if max(values) - min(values) > eps:
                    raise RewardClash(f"rewards disagree on glued action {tag}: {sorted(values)}")
                reward[tag] = values[-1]

        glued = FiniteMdp(set(i1_f.values()) | set(i2_f.values()), psi, trans, reward)
        incl1 = MdpMorphism(left, glued, i1_f, i1_g, reward_compatible=rewarded)
        incl2 = MdpMorphism(right, glued, i2_f, i2_g, reward_compatible=rewarded)
        logger.info(f"Pushout built: {glued.n_states} states, {glued.n_actions} actions")
        return PushoutResult(glued=glued, incl1=incl1, incl2=incl2, span=s)

    def check_pushout_universal(
        self, r: PushoutResult, candidate: Tuple[MdpMorphism, MdpMorphism]
    ) -> MdpMorphism:
        n1, n2 = candidate
        s = r.span
        for z in s.apex.states:
            if n1.f[s.m1.f[z]] != n2.f[s.m2.f[z]]:
                raise NonCommuting(f"cocone legs disagree on apex state {z}")
        for z in s.apex.actions:
            if n1.g[s.m1.g[z]] != n2.g[s.m2.g[z]]:
                raise NonCommuting(f"cocone legs disagree on apex action {z}")
        f: Dict[Label, Label] = {}
        g: Dict[Label, Label] = {}
        for incl, leg in ((r.incl2, n2), (r.incl1, n1)):
            f.update({x: leg.f[y] for y, x in incl.f.items()})
            g.update({x: leg.g[y] for y, x in incl.g.items()})
        return MdpMorphism(
            r.glued, n1.target, f, g, reward_compatible=n1.reward_compatible and n2.reward_compatible
        )

    def check_subprocess_gluing(self, s: Span, r: PushoutResult) -> bool:
        if not (morphism_service.is_subprocess(s.m1) and morphism_service.is_subprocess(s.m2)):
            raise Mismatch("subprocess gluing needs both span legs to be subprocesses")
        return morphism_service.is_subprocess(r.incl1) and morphism_service.is_subprocess(r.incl2)


composition_service = CompositionService()
