"""Seeded generators of small well-formed instances for randomized checks."""
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from compmdp.model.diagrams import Cospan, FiberProductResult, Span
from compmdp.model.dist import Dist
from compmdp.model.labels import Atom, Label
from compmdp.model.mdp import FiniteMdp, MdpMorphism
from compmdp.services.morphism import morphism_service


def _masses(rng: np.random.Generator, k: int) -> np.ndarray:
    """k positive masses summing to one, on a 1/8 grid so sums are exact."""
    cuts = np.sort(rng.choice(np.arange(1, 8), size=k - 1, replace=False)) if k > 1 else np.array([], dtype=int)
    edges = np.concatenate(([0], cuts, [8]))
    return np.diff(edges) / 8.0


class SamplingService:
    def rng(self, seed: Optional[int]) -> np.random.Generator:
        return np.random.default_rng(seed)

    def random_subset(self, rng: np.random.Generator, items: Sequence, p: float = 0.5) -> List:
        return [x for x in items if rng.random() < p]

    def _random_dist(self, rng: np.random.Generator, targets: Sequence[Label], max_support: int = 3) -> Dist:
        k = int(rng.integers(1, min(max_support, len(targets), 7) + 1))
        chosen = rng.choice(len(targets), size=k, replace=False)
        return Dist(zip((targets[i] for i in chosen), _masses(rng, k)))

    def random_mdp(
        self,
        rng: np.random.Generator,
        n_states: Optional[int] = None,
        max_actions_per_state: int = 2,
        reward: bool = True,
        terminal_rate: float = 0.0,
        prefix: str = "s",
    ) -> FiniteMdp:
        n_states = n_states or int(rng.integers(1, 6))
        states = [Atom(f"{prefix}{i}") for i in range(n_states)]
        psi: Dict[Label, Label] = {}
        trans: Dict[Label, Dist] = {}
        rewards: Dict[Label, float] = {}
        for s in states:
            if rng.random() < terminal_rate:
                continue
            for j in range(int(rng.integers(1, max_actions_per_state + 1))):
                a = Atom(f"{s}.a{j}")
                psi[a] = s
                trans[a] = self._random_dist(rng, states)
                rewards[a] = float(rng.integers(0, 4))
        return FiniteMdp(states, psi, trans, rewards if reward else None)

    def random_quotient_morphism(self, rng: np.random.Generator, m: FiniteMdp, n_blocks: Optional[int] = None) -> MdpMorphism:
        """Collapse states onto random blocks and push every action forward."""
        n_blocks = n_blocks or int(rng.integers(1, m.n_states + 1))
        blocks = [Atom(f"q{i}") for i in range(n_blocks)]
        assignment = rng.permutation(np.arange(m.n_states) % n_blocks)
        f = {s: blocks[int(assignment[i])] for i, s in enumerate(m.states)}
        psi: Dict[Label, Label] = {}
        trans: Dict[Label, Dist] = {}
        rewards: Dict[Label, float] = {}
        g: Dict[Label, Label] = {}
        seen: Dict[Tuple, Label] = {}
        for a in m.actions:
            pushed = m.trans[a].pushforward(f)
            key = (f[m.psi[a]], pushed, m.reward_of(a))
            if key not in seen:
                seen[key] = a
                psi[a], trans[a], rewards[a] = key[0], pushed, m.reward_of(a)
            g[a] = seen[key]
        target = FiniteMdp(blocks, psi, trans, rewards if m.has_reward else None)
        return MdpMorphism(m, target, f, g, reward_compatible=m.has_reward)

    def random_refinement(
        self, rng: np.random.Generator, apex: FiniteMdp, max_copies: int = 2, prefix: str = "x"
    ) -> MdpMorphism:
        """Split every apex state into copies and every apex action's mass among the copies."""
        copies: Dict[Label, List[Label]] = {}
        f: Dict[Label, Label] = {}
        for i, z in enumerate(apex.states):
            copies[z] = [Atom(f"{prefix}{i}_{j}") for j in range(int(rng.integers(1, max_copies + 1)))]
            f.update({c: z for c in copies[z]})
        psi: Dict[Label, Label] = {}
        trans: Dict[Label, Dist] = {}
        rewards: Dict[Label, float] = {}
        g: Dict[Label, Label] = {}
        for b in apex.actions:
            for c in copies[apex.psi[b]]:
                a = Atom(f"{c}.{b}")
                masses: List[Tuple[Label, float]] = []
                for z, p in apex.trans[b].items():
                    split = _masses(rng, len(copies[z]))
                    masses.extend((copy, p * w) for copy, w in zip(copies[z], split))
                psi[a], trans[a], g[a] = c, Dist(masses), b
                rewards[a] = apex.reward_of(b)
        source = FiniteMdp(f, psi, trans, rewards if apex.has_reward else None)
        return MdpMorphism(source, apex, f, g, reward_compatible=apex.has_reward)

    def random_subprocess(self, rng: np.random.Generator, m: FiniteMdp, keep: Sequence[Label]) -> MdpMorphism:
        """A random action subset of the canonical subprocess on `keep`, included into m."""
        canon, _ = morphism_service.canonical_subprocess(m, keep)
        sub, _ = morphism_service.restrict_actions(canon, self.random_subset(rng, canon.actions, 0.7))
        return morphism_service.inclusion(sub, m)

    def random_cospan(self, rng: np.random.Generator, apex_states: int = 3) -> Cospan:
        apex = self.random_mdp(rng, int(rng.integers(1, apex_states + 1)), prefix="z")
        m1 = self.random_refinement(rng, apex, prefix="x")
        if rng.random() < 0.3:
            keep = self.random_subset(rng, apex.states, 0.7) or list(apex.states[:1])
            m2 = self.random_subprocess(rng, apex, keep)
        else:
            m2 = self.random_refinement(rng, apex, prefix="y")
        return Cospan(m1, m2)

    def random_injective_span(self, rng: np.random.Generator, support_condition: bool = False) -> Span:
        """M1 <- M3 -> M2 with both legs subprocess inclusions.

        With `support_condition`, every action M2 adds carries mass onto the
        states M2 adds.
        """
        m1 = self.random_mdp(rng, int(rng.integers(1, 5)), prefix="s")
        keep = self.random_subset(rng, m1.states, 0.6)
        into_m1 = self.random_subprocess(rng, m1, keep)
        m3 = into_m1.source

        fresh = [Atom(f"n{i}") for i in range(int(rng.integers(1, 3)))]
        states = list(m3.states) + fresh
        psi = dict(m3.psi)
        trans = dict(m3.trans)
        rewards = {a: m3.reward_of(a) for a in m3.actions}
        for i, s in enumerate(states):
            for j in range(int(rng.integers(0 if s in m3.state_set else 1, 3))):
                a = Atom(f"e{i}.a{j}")
                mu = self._random_dist(rng, states)
                if support_condition and not any(x in fresh for x in mu):
                    mu = Dist({**{x: p / 2 for x, p in mu.items()}, fresh[0]: 0.5 + mu.mass(fresh[0]) / 2})
                psi[a], trans[a] = s, mu
                rewards[a] = float(rng.integers(0, 4))
        m2 = FiniteMdp(states, psi, trans, rewards)
        return Span(into_m1, morphism_service.inclusion(m3, m2))

    def random_independent_cone(
        self, rng: np.random.Generator, r: FiberProductResult
    ) -> Tuple[FiniteMdp, MdpMorphism, MdpMorphism]:
        """A random subprocess of the fiber product with the projections restricted to it."""
        keep = self.random_subset(rng, r.product.states, 0.7) or list(r.product.states[:1])
        incl = self.random_subprocess(rng, r.product, keep)
        return (
            incl.source,
            morphism_service.compose(r.proj1, incl),
            morphism_service.compose(r.proj2, incl),
        )


sampling_service = SamplingService()
