import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, FrozenSet, List, Mapping, Optional, Tuple

import numpy as np
from loguru import logger
from scipy import sparse

from compmdp.core.config import settings
from compmdp.core.exceptions import MaxIterExceeded, PreconditionFailed
from compmdp.model.labels import ActionId, StateId
from compmdp.model.mdp import FiniteMdp
from compmdp.model.solution import Solution


class _Compiled:
    """Row-per-action CSR layout with actions grouped by anchor state."""

    def __init__(self, m: FiniteMdp):
        self.states = list(m.states)
        self.index = {s: i for i, s in enumerate(self.states)}
        self.actions: List[ActionId] = []
        self.starts: List[int] = []
        self.anchored: List[int] = []
        for i, s in enumerate(self.states):
            block = m.actions_at(s)
            if block:
                self.starts.append(len(self.actions))
                self.anchored.append(i)
                self.actions.extend(block)
        rows, cols, data = [], [], []
        for row, a in enumerate(self.actions):
            for s, p in m.trans[a].items():
                rows.append(row)
                cols.append(self.index[s])
                data.append(p)
        shape = (len(self.actions), len(self.states))
        self.P = sparse.csr_matrix((data, (rows, cols)), shape=shape, dtype=np.float64)
        self.r = np.array([m.reward_of(a) for a in self.actions], dtype=np.float64)
        self.starts_arr = np.array(self.starts, dtype=np.intp)
        self.anchored_arr = np.array(self.anchored, dtype=np.intp)

    def row_blocks(self, n_blocks: int) -> List[Tuple[int, int]]:
        """Split action rows into contiguous blocks on state-group boundaries."""
        n_groups = len(self.starts)
        if not n_groups:
            return [(0, 0)]
        bounds = [self.starts[g] for g in np.linspace(0, n_groups, n_blocks + 1, dtype=int)[:-1]]
        bounds = sorted(set(bounds)) + [len(self.actions)]
        return list(zip(bounds[:-1], bounds[1:]))


class SolverService:
    def _gamma(self, gamma: Optional[float]) -> float:
        gamma = settings.GAMMA if gamma is None else gamma
        if not 0 <= gamma < 1:
            raise PreconditionFailed(f"discount must lie in [0, 1), got {gamma}")
        return gamma

    def _q_values(self, c: _Compiled, v: np.ndarray, gamma: float, pool: Optional[ThreadPoolExecutor]) -> np.ndarray:
        if pool is None:
            return c.r + gamma * (c.P @ v)
        blocks = c.row_blocks(settings.SOLVER_WORKERS)
        parts = pool.map(lambda span: c.P[span[0]:span[1]] @ v, blocks)
        return c.r + gamma * np.concatenate(list(parts))

    def _backup(self, c: _Compiled, q: np.ndarray) -> np.ndarray:
        v = np.zeros(len(c.states))
        if len(c.actions):
            v[c.anchored_arr] = np.maximum.reduceat(q, c.starts_arr)
        return v

    def _greedy(self, c: _Compiled, q: np.ndarray, tie: float) -> Dict[StateId, ActionId]:
        policy: Dict[StateId, ActionId] = {}
        ends = c.starts[1:] + [len(c.actions)]
        for start, end, i in zip(c.starts, ends, c.anchored):
            block = q[start:end]
            best = block.max()
            # actions inside a block are in label order, so the first hit is the smallest label
            pick = int(np.argmax(block >= best - tie))
            policy[c.states[i]] = c.actions[start + pick]
        return policy

    def value_iteration(
        self,
        m: FiniteMdp,
        gamma: Optional[float] = None,
        tol: Optional[float] = None,
        max_iter: Optional[int] = None,
        parallel: Optional[bool] = None,
        strict: bool = False,
    ) -> Solution:
        gamma = self._gamma(gamma)
        tol = settings.TOLERANCE if tol is None else tol
        max_iter = max_iter or settings.MAX_ITER
        parallel = settings.PARALLEL_SWEEP if parallel is None else parallel
        if not m.has_reward:
            raise PreconditionFailed("value iteration needs a reward function")

        c = _Compiled(m)
        threshold = settings.stop_threshold(gamma, tol)
        v = np.zeros(len(c.states))
        residuals: List[float] = []
        converged = False
        pool = ThreadPoolExecutor(max_workers=settings.SOLVER_WORKERS) if parallel else None
        try:
            for _ in range(max_iter):
                new_v = self._backup(c, self._q_values(c, v, gamma, pool))
                residual = float(np.max(np.abs(new_v - v))) if len(v) else 0.0
                residuals.append(residual)
                v = new_v
                logger.debug(f"Sweep {len(residuals)}: residual {residual:.3e}")
                if residual <= threshold:
                    converged = True
                    break
            q = self._q_values(c, v, gamma, pool)
        finally:
            if pool is not None:
                pool.shutdown()

        if not converged:
            message = f"value iteration stopped after {max_iter} sweeps with residual {residuals[-1]:.3e}"
            if strict:
                raise MaxIterExceeded(message)
            logger.warning(message)
        return Solution(
            values={s: float(v[i]) for i, s in enumerate(c.states)},
            policy=self._greedy(c, q, settings.TIE_TOLERANCE),
            gamma=gamma,
            iterations=len(residuals),
            residual=residuals[-1] if residuals else 0.0,
            converged=converged,
            residuals=residuals,
        )

    def policy_evaluation(
        self,
        m: FiniteMdp,
        policy: Mapping[StateId, ActionId],
        gamma: Optional[float] = None,
        tol: Optional[float] = None,
        max_iter: Optional[int] = None,
    ) -> Dict[StateId, float]:
        gamma = self._gamma(gamma)
        tol = settings.TOLERANCE if tol is None else tol
        max_iter = max_iter or settings.MAX_ITER
        states = list(m.states)
        index = {s: i for i, s in enumerate(states)}
        rows, cols, data, rewards = [], [], [], np.zeros(len(states))
        for s in states:
            if m.is_terminal(s):
                continue
            a = policy.get(s)
            if a is None or m.psi.get(a) != s:
                raise PreconditionFailed(f"policy has no valid action at state {s}")
            rewards[index[s]] = m.reward_of(a)
            for t, p in m.trans[a].items():
                rows.append(index[s])
                cols.append(index[t])
                data.append(p)
        P = sparse.csr_matrix((data, (rows, cols)), shape=(len(states), len(states)), dtype=np.float64)
        threshold = settings.stop_threshold(gamma, tol)
        v = np.zeros(len(states))
        for _ in range(max_iter):
            new_v = rewards + gamma * (P @ v)
            residual = float(np.max(np.abs(new_v - v))) if len(v) else 0.0
            v = new_v
            if residual <= threshold:
                return {s: float(v[i]) for i, s in enumerate(states)}
        raise MaxIterExceeded(f"policy evaluation did not settle within {max_iter} sweeps")

    def bellman_backup(
        self,
        m: FiniteMdp,
        values: Mapping[StateId, float],
        s: StateId,
        gamma: Optional[float] = None,
        tol: Optional[float] = None,
    ) -> Tuple[float, FrozenSet[ActionId]]:
        """One exact backup at s; the argmax set holds every action within tol of the best."""
        gamma = self._gamma(gamma)
        tol = settings.TIE_TOLERANCE if tol is None else tol
        actions = m.actions_at(s)
        if not actions:
            return 0.0, frozenset()
        q = {
            a: math.fsum(p * (m.reward_of(a) + gamma * values.get(t, 0.0)) for t, p in m.trans[a].items())
            for a in actions
        }
        best = max(q.values())
        return best, frozenset(a for a, value in q.items() if value >= best - tol)


solver_service = SolverService()
