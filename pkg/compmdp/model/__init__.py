from compmdp.model.diagrams import (
    Bridge,
    Composite,
    Cospan,
    FiberProductResult,
    PushoutResult,
    Span,
    StitchedPolicy,
    ZigZagDiagram,
)
from compmdp.model.dist import Dist
from compmdp.model.group import GroupAction, GroupElement
from compmdp.model.labels import ActionId, Atom, Glued, Label, Left, Orbit, Pair, Right, StateId
from compmdp.model.mdp import FiniteMdp, MdpMorphism
from compmdp.model.solution import Solution

__all__ = [
    "ActionId",
    "Atom",
    "Bridge",
    "Composite",
    "Cospan",
    "Dist",
    "FiberProductResult",
    "FiniteMdp",
    "Glued",
    "GroupAction",
    "GroupElement",
    "Label",
    "Left",
    "MdpMorphism",
    "Orbit",
    "Pair",
    "PushoutResult",
    "Right",
    "Solution",
    "Span",
    "StateId",
    "StitchedPolicy",
    "ZigZagDiagram",
]
