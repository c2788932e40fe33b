from typing import Mapping, Optional, Union

from loguru import logger

from compmdp.core.exceptions import SemanticError, UnboundName
from compmdp.io.documents import UnboundBridge, Document, GeneratorSet, UnboundMap
from compmdp.io.expr import Expr, Fiber, Glue, Name, Product, Puncture, Quotient, ZigZag
from compmdp.model.diagrams import Bridge, Cospan, Span, ZigZagDiagram
from compmdp.model.mdp import FiniteMdp
from compmdp.services.composition import composition_service
from compmdp.services.morphism import morphism_service
from compmdp.services.puncture import puncture_service
from compmdp.services.symmetry import symmetry_service
from compmdp.services.zigzag import zigzag_service

Value = Union[FiniteMdp, ZigZagDiagram]

_KINDS = {FiniteMdp: "an mdp", UnboundMap: "a morphism", UnboundBridge: "a bridge", GeneratorSet: "a group"}


def _kind(value: object) -> str:
    return _KINDS.get(type(value), "a solution")


class Evaluator:
    """Evaluates an expression tree against named documents.

    A zig-zag used where an MDP is expected stands for its composite.
    """

    def __init__(self, bindings: Mapping[str, Document], eps: Optional[float] = None, budget: Optional[int] = None):
        self.bindings = bindings
        self.eps = eps
        self.budget = budget

    def lookup(self, name: str, expected: type) -> Document:
        if name not in self.bindings:
            raise UnboundName(f"name {name!r} is not bound")
        value = self.bindings[name]
        if not isinstance(value, expected):
            raise SemanticError(f"{name} is {_kind(value)}, expected {_KINDS[expected]}")
        return value

    def evaluate(self, expr: Expr) -> Value:
        if isinstance(expr, ZigZag):
            return self.diagram(expr)
        return self.mdp(expr)

    def mdp(self, expr: Expr) -> FiniteMdp:
        if isinstance(expr, Name):
            return self.lookup(expr.name, FiniteMdp)
        if isinstance(expr, Product):
            return composition_service.product(self.mdp(expr.left), self.mdp(expr.right), self.budget).product
        if isinstance(expr, Fiber):
            left, right, apex = self.mdp(expr.left), self.mdp(expr.right), self.mdp(expr.apex)
            m1 = self.lookup(expr.f, UnboundMap).bind(left, apex, expr.f)
            m2 = self.lookup(expr.g, UnboundMap).bind(right, apex, expr.g)
            return composition_service.fiber_product(Cospan(m1, m2), self.budget).product
        if isinstance(expr, Glue):
            left, right, apex = self.mdp(expr.left), self.mdp(expr.right), self.mdp(expr.apex)
            m1 = self.lookup(expr.f, UnboundMap).bind(apex, left, expr.f)
            m2 = self.lookup(expr.g, UnboundMap).bind(apex, right, expr.g)
            return composition_service.pushout(Span(m1, m2), self.eps).glued
        if isinstance(expr, Puncture):
            return puncture_service.puncture(self.mdp(expr.base), expr.obstacles, self.eps)[0]
        if isinstance(expr, Quotient):
            base = self.mdp(expr.base)
            generator_set = self.lookup(expr.group, GeneratorSet)
            group = symmetry_service.close_group(base, generator_set.generators, eps=self.eps)
            return symmetry_service.quotient(base, group, self.eps)[0]
        if isinstance(expr, ZigZag):
            return zigzag_service.build_composite(self.diagram(expr)).mdp
        raise SemanticError(f"cannot evaluate {type(expr).__name__}")

    def bridge(self, name: str, left_env: FiniteMdp, right_env: FiniteMdp) -> Bridge:
        """A bridge document, or a bare MDP included into both sides by label."""
        if name not in self.bindings:
            raise UnboundName(f"name {name!r} is not bound")
        value = self.bindings[name]
        if isinstance(value, UnboundBridge):
            return value.bind(left_env, right_env, name)
        if isinstance(value, FiniteMdp):
            legs = [morphism_service.inclusion(value, env) for env in (left_env, right_env)]
            for side, leg in zip(("left", "right"), legs):
                report = morphism_service.check_morphism(leg, self.eps)
                if not report.ok:
                    raise SemanticError(f"{name} is not a sub-MDP of its {side} environment", report.messages())
            return Bridge(mdp=value, left=legs[0], right=legs[1])
        raise SemanticError(f"{name} is {_kind(value)}, expected a bridge")

    def diagram(self, expr: ZigZag) -> ZigZagDiagram:
        environments = [self.mdp(e) for e in expr.environments]
        bridges = [
            self.bridge(name, environments[i], environments[i + 1]) for i, name in enumerate(expr.bridges)
        ]
        logger.debug(f"Zig-zag with {len(environments)} environments evaluated")
        return ZigZagDiagram(tuple(environments), tuple(bridges))


def evaluate(
    expr: Expr, bindings: Mapping[str, Document], eps: Optional[float] = None, budget: Optional[int] = None
) -> Value:
    return Evaluator(bindings, eps, budget).evaluate(expr)
