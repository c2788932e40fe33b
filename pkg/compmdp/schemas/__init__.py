from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator

Cell = Tuple[int, int]


# Base schemas
class BaseDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")


# Report schemas
class Issue(BaseModel):
    code: str
    subject: Optional[str] = None
    message: str


class ValidationReport(BaseModel):
    subject: str = "mdp"
    issues: List[Issue] = Field(default_factory=list)

    @computed_field
    @property
    def ok(self) -> bool:
        return not self.issues

    def add(self, code: str, message: str, subject: Optional[str] = None) -> None:
        self.issues.append(Issue(code=code, subject=subject, message=message))

    def messages(self) -> List[str]:
        return [issue.message for issue in self.issues]


class CheckReport(BaseModel):
    check: str
    passed: bool
    trials: int = 1
    failures: List[str] = Field(default_factory=list)
    details: Dict[str, Any] = Field(default_factory=dict)

    @computed_field
    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"


class StitchingReport(BaseModel):
    forward_moving: bool
    monotonic: bool
    gap: Optional[float] = None
    gamma: float
    tol: float
    environments: int
    composite_states: int
    composite_actions: int

    @computed_field
    @property
    def passed(self) -> bool:
        return self.forward_moving and self.monotonic and self.gap is not None and self.gap <= self.tol

    @computed_field
    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"


# MDP document schemas
class ActionDocument(BaseDocument):
    id: str
    state: str
    reward: Optional[float] = None
    to: Dict[str, float]


class MdpDocument(BaseDocument):
    kind: Literal["mdp"] = "mdp"
    states: List[str]
    actions: List[ActionDocument] = Field(default_factory=list)


# Morphism document schemas
class MapDocument(BaseDocument):
    states: Dict[str, str]
    actions: Dict[str, str] = Field(default_factory=dict)
    reward_compatible: bool = False


class MorphismDocument(MapDocument):
    kind: Literal["morphism"] = "morphism"


class BridgeDocument(BaseDocument):
    kind: Literal["bridge"] = "bridge"
    mdp: MdpDocument
    left: MapDocument
    right: MapDocument


# Group document schemas
class GeneratorDocument(BaseDocument):
    name: str = ""
    states: str = Field(description="state permutation in cycle notation, e.g. (a b)(c d)")
    actions: str = Field(default="", description="action permutation in cycle notation")


class GroupDocument(BaseDocument):
    kind: Literal["group"] = "group"
    generators: List[GeneratorDocument] = Field(default_factory=list)


# Solution schemas
class SolutionDocument(BaseDocument):
    kind: Literal["solution"] = "solution"
    gamma: float
    iterations: int
    residual: float
    converged: bool
    values: Dict[str, float]
    policy: Dict[str, str]


# World schemas
class GridLayout(BaseModel):
    width: int = Field(ge=1)
    height: int = Field(ge=1)
    obstacles: List[Cell] = Field(default_factory=list)
    goals: List[Cell] = Field(default_factory=list)
    start: Optional[Cell] = None
    slip: float = Field(default=0.0, ge=0, lt=1)
    absorbing_goal: bool = False

    @field_validator("obstacles", "goals")
    @classmethod
    def unique_cells(cls, cells: List[Cell]) -> List[Cell]:
        return sorted(set(cells))
