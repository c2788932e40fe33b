from dataclasses import dataclass, field
from typing import Dict, List

from compmdp.model.labels import ActionId, StateId


@dataclass(frozen=True)
class Solution:
    values: Dict[StateId, float]
    policy: Dict[StateId, ActionId]
    gamma: float
    iterations: int
    residual: float
    converged: bool = True
    residuals: List[float] = field(default_factory=list, repr=False)
