from __future__ import annotations

from types import MappingProxyType
from typing import Dict, Iterable, Mapping, Optional, Tuple

from compmdp.model.dist import Dist
from compmdp.model.labels import ActionId, Atom, StateId


class FiniteMdp:
    """M = (S, A, psi, T) with an optional action reward R.

    Instances are immutable. Construction does not validate: dangling
    anchors, unnormalized distributions and missing rewards are reported by
    `mdp_service.validate` so that broken documents can still be inspected.
    """

    __slots__ = ("states", "actions", "psi", "trans", "reward", "_state_set", "_by_state")

    def __init__(
        self,
        states: Iterable[StateId],
        psi: Mapping[ActionId, StateId],
        trans: Mapping[ActionId, Dist],
        reward: Optional[Mapping[ActionId, float]] = None,
    ):
        states = tuple(sorted(set(states)))
        actions = tuple(sorted(set(psi) | set(trans)))
        by_state: Dict[StateId, list] = {s: [] for s in states}
        for a in actions:
            if a in psi:
                by_state.setdefault(psi[a], []).append(a)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "actions", actions)
        object.__setattr__(self, "psi", MappingProxyType({a: psi[a] for a in actions if a in psi}))
        object.__setattr__(self, "trans", MappingProxyType({a: trans[a] for a in actions if a in trans}))
        object.__setattr__(
            self,
            "reward",
            None if reward is None else MappingProxyType({a: float(reward[a]) for a in actions if a in reward}),
        )
        object.__setattr__(self, "_state_set", frozenset(states))
        object.__setattr__(self, "_by_state", MappingProxyType({s: tuple(v) for s, v in by_state.items()}))

    def __setattr__(self, name, value):
        raise AttributeError("FiniteMdp is immutable")

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_actions(self) -> int:
        return len(self.actions)

    @property
    def has_reward(self) -> bool:
        return self.reward is not None

    def has_state(self, s: StateId) -> bool:
        return s in self._state_set

    @property
    def state_set(self) -> frozenset:
        return self._state_set

    def actions_at(self, s: StateId) -> Tuple[ActionId, ...]:
        return self._by_state.get(s, ())

    def is_terminal(self, s: StateId) -> bool:
        return not self._by_state.get(s)

    def reward_of(self, a: ActionId) -> float:
        if self.reward is None:
            return 0.0
        return self.reward.get(a, 0.0)

    def with_reward(self, reward: Optional[Mapping[ActionId, float]]) -> "FiniteMdp":
        return FiniteMdp(self.states, self.psi, self.trans, reward)

    def without_reward(self) -> "FiniteMdp":
        return self.with_reward(None)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiniteMdp):
            return NotImplemented
        return (
            self.states == other.states
            and self.actions == other.actions
            and self.psi == other.psi
            and self.trans == other.trans
            and self.reward == other.reward
        )

    __hash__ = None

    def __repr__(self) -> str:
        tag = ", rewarded" if self.has_reward else ""
        return f"FiniteMdp(|S|={self.n_states}, |A|={self.n_actions}{tag})"


class MdpMorphism:
    """m = (f, g): source -> target, stored as explicit finite tables."""

    __slots__ = ("source", "target", "f", "g", "reward_compatible")

    def __init__(
        self,
        source: FiniteMdp,
        target: FiniteMdp,
        f: Mapping[StateId, StateId],
        g: Mapping[ActionId, ActionId],
        reward_compatible: bool = False,
    ):
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "f", MappingProxyType(dict(f)))
        object.__setattr__(self, "g", MappingProxyType(dict(g)))
        object.__setattr__(self, "reward_compatible", reward_compatible)

    def __setattr__(self, name, value):
        raise AttributeError("MdpMorphism is immutable")

    def image_states(self) -> frozenset:
        return frozenset(self.f.values())

    def image_actions(self) -> frozenset:
        return frozenset(self.g.values())

    def is_injective(self) -> bool:
        return len(set(self.f.values())) == len(self.f) and len(set(self.g.values())) == len(self.g)

    def same_maps(self, other: "MdpMorphism") -> bool:
        return self.f == other.f and self.g == other.g

    def __eq__(self, other) -> bool:
        if not isinstance(other, MdpMorphism):
            return NotImplemented
        return (
            self.same_maps(other)
            and (self.source is other.source or self.source == other.source)
            and (self.target is other.target or self.target == other.target)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"MdpMorphism({self.source!r} -> {self.target!r})"


POINT_STATE = Atom("pt")
POINT_ACTION = Atom("pt.stay")


def make_point_mdp() -> FiniteMdp:
    return FiniteMdp(
        [POINT_STATE],
        {POINT_ACTION: POINT_STATE},
        {POINT_ACTION: Dist.point(POINT_STATE)},
        {POINT_ACTION: 0.0},
    )


def make_empty_mdp(rewarded: bool = False) -> FiniteMdp:
    return FiniteMdp([], {}, {}, {} if rewarded else None)

