from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping, Tuple

from compmdp.model.labels import ActionId, StateId
from compmdp.model.mdp import FiniteMdp


class GroupElement:
    """rho_g = (alpha_g, beta_g): a state permutation paired with an action permutation.

    Only moved points are stored, so the identity is the empty pair of tables
    and two elements are equal iff they act identically.
    """

    __slots__ = ("alpha", "beta", "name", "_key")

    def __init__(self, alpha: Mapping[StateId, StateId], beta: Mapping[ActionId, ActionId], name: str = ""):
        alpha = {s: t for s, t in alpha.items() if s != t}
        beta = {a: b for a, b in beta.items() if a != b}
        object.__setattr__(self, "alpha", MappingProxyType(alpha))
        object.__setattr__(self, "beta", MappingProxyType(beta))
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "_key", (tuple(sorted(alpha.items())), tuple(sorted(beta.items()))))

    def __setattr__(self, name, value):
        raise AttributeError("GroupElement is immutable")

    @classmethod
    def identity(cls) -> "GroupElement":
        return cls({}, {}, name="e")

    @property
    def is_identity(self) -> bool:
        return not self.alpha and not self.beta

    def state(self, s: StateId) -> StateId:
        return self.alpha.get(s, s)

    def action(self, a: ActionId) -> ActionId:
        return self.beta.get(a, a)

    def then(self, other: "GroupElement") -> "GroupElement":
        """other after self, i.e. rho_other o rho_self."""
        moved_s = set(self.alpha) | set(other.alpha)
        moved_a = set(self.beta) | set(other.beta)
        return GroupElement(
            {s: other.state(self.state(s)) for s in moved_s},
            {a: other.action(self.action(a)) for a in moved_a},
        )

    def inverse(self) -> "GroupElement":
        return GroupElement(
            {t: s for s, t in self.alpha.items()},
            {b: a for a, b in self.beta.items()},
            name=f"{self.name}^-1" if self.name else "",
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __lt__(self, other: "GroupElement") -> bool:
        return self._key < other._key

    def __repr__(self) -> str:
        return f"GroupElement({self.name or 'unnamed'}, moves {len(self.alpha)} states)"


@dataclass(frozen=True, eq=False)
class GroupAction:
    """A finite group acting on `mdp`; `elements[0]` is the identity."""

    mdp: FiniteMdp
    generators: Tuple[GroupElement, ...]
    elements: Tuple[GroupElement, ...]

    @property
    def order(self) -> int:
        return len(self.elements)
