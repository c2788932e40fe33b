from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Tuple

from compmdp.core.exceptions import Mismatch, NotASubprocess
from compmdp.model.labels import ActionId, StateId
from compmdp.model.mdp import FiniteMdp, MdpMorphism


def _same(a: FiniteMdp, b: FiniteMdp) -> bool:
    return a is b or a == b


@dataclass(frozen=True, eq=False)
class Cospan:
    """m1: M1 -> M3 <- M2 :m2"""

    m1: MdpMorphism
    m2: MdpMorphism

    def __post_init__(self):
        if not _same(self.m1.target, self.m2.target):
            raise Mismatch("cospan legs must share their target")

    @property
    def apex(self) -> FiniteMdp:
        return self.m1.target


@dataclass(frozen=True, eq=False)
class Span:
    """m1: M1 <- M3 -> M2 :m2"""

    m1: MdpMorphism
    m2: MdpMorphism

    def __post_init__(self):
        if not _same(self.m1.source, self.m2.source):
            raise Mismatch("span legs must share their source")

    @property
    def apex(self) -> FiniteMdp:
        return self.m1.source

    def swapped(self) -> "Span":
        return Span(self.m2, self.m1)


@dataclass(frozen=True, eq=False)
class FiberProductResult:
    product: FiniteMdp
    proj1: MdpMorphism
    proj2: MdpMorphism
    cospan: Cospan


@dataclass(frozen=True, eq=False)
class PushoutResult:
    glued: FiniteMdp
    incl1: MdpMorphism
    incl2: MdpMorphism
    span: Span


@dataclass(frozen=True, eq=False)
class Bridge:
    """N_i with its legs into M_i (left) and M_{i+1} (right)."""

    mdp: FiniteMdp
    left: MdpMorphism
    right: MdpMorphism

    def __post_init__(self):
        if not (_same(self.left.source, self.mdp) and _same(self.right.source, self.mdp)):
            raise Mismatch("bridge legs must start at the bridge MDP")
        for side, leg in (("left", self.left), ("right", self.right)):
            if not leg.is_injective():
                raise NotASubprocess(f"bridge {side} leg identifies states or actions of the bridge MDP")


@dataclass(frozen=True, eq=False)
class ZigZagDiagram:
    environments: Tuple[FiniteMdp, ...]
    bridges: Tuple[Bridge, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "environments", tuple(self.environments))
        object.__setattr__(self, "bridges", tuple(self.bridges))
        if not self.environments:
            raise Mismatch("a zig-zag diagram needs at least one environment")
        if len(self.bridges) != len(self.environments) - 1:
            raise Mismatch(
                f"{len(self.environments)} environments need {len(self.environments) - 1} bridges, "
                f"got {len(self.bridges)}"
            )
        for i, bridge in enumerate(self.bridges):
            if not _same(bridge.left.target, self.environments[i]):
                raise Mismatch(f"bridge {i} left leg does not land in environment {i}")
            if not _same(bridge.right.target, self.environments[i + 1]):
                raise Mismatch(f"bridge {i} right leg does not land in environment {i + 1}")

    @property
    def n(self) -> int:
        return len(self.bridges)


@dataclass(frozen=True, eq=False)
class Composite:
    mdp: FiniteMdp
    component_inclusions: Tuple[MdpMorphism, ...]
    diagram: Optional[ZigZagDiagram] = None


@dataclass(frozen=True, eq=False)
class StitchedPolicy:
    component_policies: Tuple[Mapping[StateId, ActionId], ...]
    policy: Dict[StateId, ActionId] = field(default_factory=dict)
