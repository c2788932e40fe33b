from __future__ import annotations

import math
from typing import Callable, Dict, Iterable, Iterator, Mapping, Tuple, Union

from compmdp.core.exceptions import DanglingState
from compmdp.model.labels import Label

StateMap = Union[Mapping[Label, Label], Callable[[Label], Label]]


class Dist(Mapping[Label, float]):
    """Finite probability distribution with strictly positive stored masses.

    Zero entries are dropped on construction, so `support()` is exactly the
    key set. Normalization is not enforced here; `FiniteMdp.validate` reports
    unnormalized distributions as data.
    """

    __slots__ = ("_mass", "_hash")

    def __init__(self, masses: Union[Mapping[Label, float], Iterable[Tuple[Label, float]]] = ()):
        items = masses.items() if isinstance(masses, Mapping) else masses
        acc: Dict[Label, float] = {}
        for state, p in items:
            p = float(p)
            if math.isnan(p) or p < 0:
                raise ValueError(f"invalid probability {p!r} for {state}")
            if p == 0.0:
                continue
            acc[state] = acc.get(state, 0.0) + p
        self._mass = {s: acc[s] for s in sorted(acc)}
        self._hash = None

    @classmethod
    def point(cls, state: Label) -> "Dist":
        return cls({state: 1.0})

    def __getitem__(self, state: Label) -> float:
        return self._mass[state]

    def __iter__(self) -> Iterator[Label]:
        return iter(self._mass)

    def __len__(self) -> int:
        return len(self._mass)

    def __eq__(self, other) -> bool:
        if isinstance(other, Dist):
            return self._mass == other._mass
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(self._mass.items()))
        return self._hash

    def __repr__(self) -> str:
        body = ", ".join(f"{s}: {p!r}" for s, p in self._mass.items())
        return f"Dist({{{body}}})"

    def mass(self, state: Label) -> float:
        return self._mass.get(state, 0.0)

    def mass_of(self, states) -> float:
        return math.fsum(p for s, p in self._mass.items() if s in states)

    def total(self) -> float:
        return math.fsum(self._mass.values())

    def support(self) -> frozenset:
        return frozenset(self._mass)

    def pushforward(self, f: StateMap) -> "Dist":
        """Image measure: mass at t is the sum of masses over f^-1(t)."""
        lookup = f.get if isinstance(f, Mapping) else f
        out: Dict[Label, list] = {}
        for state, p in self._mass.items():
            target = lookup(state)
            if target is None:
                raise DanglingState(f"state {state} is outside the map's domain")
            out.setdefault(target, []).append(p)
        return Dist({t: math.fsum(ps) for t, ps in out.items()})

    def restrict(self, keep) -> "Dist":
        """Drop mass outside `keep` without renormalizing."""
        return Dist({s: p for s, p in self._mass.items() if s in keep})

    def distance(self, other: "Dist") -> float:
        """Sup-norm distance between the two mass functions."""
        keys = set(self._mass) | set(other._mass)
        if not keys:
            return 0.0
        return max(abs(self.mass(k) - other.mass(k)) for k in keys)

    def is_close(self, other: "Dist", eps: float) -> bool:
        return self.distance(other) <= eps
