from typing import Dict, FrozenSet, List, Optional

from loguru import logger

from compmdp.core.config import settings
from compmdp.core.exceptions import EmptiedBridge, IndexOutOfRange, MaxIterExceeded, SolverDiverged
from compmdp.model.diagrams import Bridge, Composite, Span, StitchedPolicy, ZigZagDiagram
from compmdp.model.labels import ActionId, StateId
from compmdp.model.mdp import FiniteMdp, MdpMorphism
from compmdp.model.solution import Solution
from compmdp.schemas import StitchingReport
from compmdp.services.composition import composition_service
from compmdp.services.morphism import morphism_service
from compmdp.services.solver import solver_service


class ZigZagService:
    def _solve(self, m: FiniteMdp, gamma: Optional[float], tol: Optional[float]) -> Solution:
        try:
            return solver_service.value_iteration(m, gamma=gamma, tol=tol, strict=True)
        except MaxIterExceeded as e:
            raise SolverDiverged(e.detail)

    def build_composite(self, z: ZigZagDiagram) -> Composite:
        """C_0 = M_0, C_{i+1} = C_i glued to M_{i+1} along N_i."""
        composite = z.environments[0]
        inclusions: List[MdpMorphism] = [morphism_service.identity(composite)]
        for i, bridge in enumerate(z.bridges):
            into_composite = morphism_service.compose(inclusions[i], bridge.left)
            r = composition_service.pushout(Span(into_composite, bridge.right))
            inclusions = [morphism_service.compose(r.incl1, incl) for incl in inclusions]
            inclusions.append(r.incl2)
            composite = r.glued
        logger.info(
            f"Composite of {len(z.environments)} environments: "
            f"{composite.n_states} states, {composite.n_actions} actions"
        )
        return Composite(mdp=composite, component_inclusions=tuple(inclusions), diagram=z)

    def truncate(self, z: ZigZagDiagram, i: int) -> ZigZagDiagram:
        if not 0 <= i <= z.n:
            raise IndexOutOfRange(f"truncation index {i} outside [0, {z.n}]")
        if i == 0:
            return z
        return ZigZagDiagram(z.environments[i:], z.bridges[i:])

    def embed_truncation(self, z: ZigZagDiagram, i: int, full: Optional[Composite] = None) -> MdpMorphism:
        """The induced inclusion of the truncated composite into the full one."""
        full = full or self.build_composite(z)
        part = self.build_composite(self.truncate(z, i))
        f: Dict[StateId, StateId] = {}
        g: Dict[ActionId, ActionId] = {}
        for j, incl in enumerate(part.component_inclusions):
            target = full.component_inclusions[i + j]
            f.update({incl.f[s]: target.f[s] for s in incl.source.states})
            g.update({incl.g[a]: target.g[a] for a in incl.source.actions})
        return MdpMorphism(part.mdp, full.mdp, f, g, reward_compatible=part.mdp.has_reward)

    def bridge_images(self, z: ZigZagDiagram, i: int) -> FrozenSet[StateId]:
        if not 0 <= i < z.n:
            raise IndexOutOfRange(f"bridge index {i} outside [0, {z.n})")
        return z.bridges[i].left.image_states()

    def is_forward_moving(self, z: ZigZagDiagram) -> bool:
        return all(morphism_service.is_full_subprocess(b.left) for b in z.bridges)

    def make_forward_moving(self, z: ZigZagDiagram) -> ZigZagDiagram:
        """Drop every action of M_i at the image of N_i that does not come from N_i."""
        envs = list(z.environments)
        bridge_mdps = [b.mdp for b in z.bridges]
        changed_any = False
        while True:
            changed = False
            for i, bridge in enumerate(z.bridges):
                image = {bridge.left.f[s] for s in bridge_mdps[i].states}
                allowed = {bridge.left.g[a] for a in bridge_mdps[i].actions}
                drop = [a for a in envs[i].actions if envs[i].psi[a] in image and a not in allowed]
                if drop:
                    envs[i], _ = morphism_service.restrict_actions(envs[i], set(envs[i].actions) - set(drop))
                    logger.debug(f"Environment {i}: dropped {len(drop)} actions leaving the bridge image")
                    changed = True
            for i, bridge in enumerate(z.bridges):
                n_i = bridge_mdps[i]
                stale = [
                    a
                    for a in n_i.actions
                    if bridge.left.g[a] not in envs[i].psi or bridge.right.g[a] not in envs[i + 1].psi
                ]
                if stale:
                    n_i, _ = morphism_service.restrict_actions(n_i, set(n_i.actions) - set(stale))
                    if not n_i.actions:
                        raise EmptiedBridge(f"bridge {i} lost all of its actions")
                    bridge_mdps[i] = n_i
                    changed = True
            if not changed:
                break
            changed_any = True
        if not changed_any:
            return z

        bridges = []
        for i, bridge in enumerate(z.bridges):
            n_i = bridge_mdps[i]
            left = MdpMorphism(
                n_i, envs[i], bridge.left.f, {a: bridge.left.g[a] for a in n_i.actions}, bridge.left.reward_compatible
            )
            right = MdpMorphism(
                n_i,
                envs[i + 1],
                bridge.right.f,
                {a: bridge.right.g[a] for a in n_i.actions},
                bridge.right.reward_compatible,
            )
            bridges.append(Bridge(mdp=n_i, left=left, right=right))
        return ZigZagDiagram(tuple(envs), tuple(bridges))

    def is_monotonic(
        self,
        z: ZigZagDiagram,
        gamma: Optional[float] = None,
        tol: Optional[float] = None,
        solve_tol: Optional[float] = None,
    ) -> bool:
        """Greedy choices inside each component agree with those of the composites.

        Checked on states of M_i off the image of N_i, against v* of C_n, of the
        continuation composite C_[i,n] and of M_i alone.
        """
        gamma = settings.GAMMA if gamma is None else gamma
        tol = settings.TIE_TOLERANCE if tol is None else tol
        full = self.build_composite(z)
        full_values = self._solve(full.mdp, gamma, solve_tol).values
        for i, m_i in enumerate(z.environments):
            part = self.build_composite(self.truncate(z, i)) if i else full
            part_values = self._solve(part.mdp, gamma, solve_tol).values if i else full_values
            own_values = self._solve(m_i, gamma, solve_tol).values
            views = [
                {s: full_values[full.component_inclusions[i].f[s]] for s in m_i.states},
                {s: part_values[part.component_inclusions[0].f[s]] for s in m_i.states},
                own_values,
            ]
            handed_over = self.bridge_images(z, i) if i < z.n else frozenset()
            for s in m_i.states:
                if s in handed_over or m_i.is_terminal(s):
                    continue
                choices = [solver_service.bellman_backup(m_i, v, s, gamma, tol)[1] for v in views]
                if not choices[0] == choices[1] == choices[2]:
                    logger.info(f"Monotonicity fails in environment {i} at state {s}")
                    return False
        return True

    def stitch_policies(
        self,
        z: ZigZagDiagram,
        gamma: Optional[float] = None,
        composite: Optional[Composite] = None,
        solve_tol: Optional[float] = None,
    ) -> StitchedPolicy:
        composite = composite or self.build_composite(z)
        component_policies = []
        policy: Dict[StateId, ActionId] = {}
        for i, m_i in enumerate(z.environments):
            pi = self._solve(m_i, gamma, solve_tol).policy
            component_policies.append(pi)
            incl = composite.component_inclusions[i]
            # later components overwrite the states they share with earlier ones
            policy.update({incl.f[s]: incl.g[a] for s, a in pi.items()})
        return StitchedPolicy(component_policies=tuple(component_policies), policy=policy)

    def stitched_gap(self, z: ZigZagDiagram, gamma: Optional[float] = None, tol: Optional[float] = None) -> float:
        """Max-norm gap between v* of C_n and the value of the stitched policy."""
        tol = settings.TOLERANCE if tol is None else tol
        solve_tol = tol / 10
        composite = self.build_composite(z)
        optimal = self._solve(composite.mdp, gamma, solve_tol).values
        stitched = self.stitch_policies(z, gamma, composite, solve_tol)
        try:
            achieved = solver_service.policy_evaluation(composite.mdp, stitched.policy, gamma, solve_tol)
        except MaxIterExceeded as e:
            raise SolverDiverged(e.detail)
        return max((abs(optimal[s] - achieved[s]) for s in composite.mdp.states), default=0.0)

    def verify_stitching(
        self, z: ZigZagDiagram, gamma: Optional[float] = None, tol: Optional[float] = None
    ) -> StitchingReport:
        gamma = settings.GAMMA if gamma is None else gamma
        tol = settings.TOLERANCE if tol is None else tol
        forward = self.is_forward_moving(z)
        monotonic = self.is_monotonic(z, gamma, solve_tol=tol / 10)
        gap = self.stitched_gap(z, gamma, tol) if forward else None
        composite = self.build_composite(z).mdp
        report = StitchingReport(
            forward_moving=forward,
            monotonic=monotonic,
            gap=gap,
            gamma=gamma,
            tol=tol,
            environments=len(z.environments),
            composite_states=composite.n_states,
            composite_actions=composite.n_actions,
        )
        logger.info(f"Stitching check: forward-moving={forward} monotonic={monotonic} gap={gap} -> {report.verdict}")
        return report


zigzag_service = ZigZagService()
