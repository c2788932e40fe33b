"""Structured state and action identifiers.

Every construction tags the identifiers it produces (Left/Right/Glued for
pushouts, Pair for fiber products, Orbit for quotients) so repeated builds
are label-identical and isomorphism checks can try a label match first.
"""
from __future__ import annotations

import functools
import re
from typing import Iterable, Tuple, Union

ATOM_PATTERN = re.compile(r"[A-Za-z0-9_.:+\-]+")


@functools.total_ordering
class Label:
    """Immutable structured tag, totally ordered by (kind, payload)."""

    __slots__ = ("_key", "_hash")

    KIND = -1

    def _payload(self) -> tuple:
        raise NotImplementedError

    def _init_key(self) -> None:
        key = (self.KIND,) + self._payload()
        object.__setattr__(self, "_key", key)
        object.__setattr__(self, "_hash", hash(key))

    @property
    def key(self) -> tuple:
        return self._key

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if not isinstance(other, Label):
            return NotImplemented
        return self._hash == other._hash and self._key == other._key

    def __lt__(self, other) -> bool:
        if not isinstance(other, Label):
            return NotImplemented
        return self._key < other._key

    def __repr__(self) -> str:
        return f"{type(self).__name__}({str(self)!r})"


class Atom(Label):
    __slots__ = ("name",)
    KIND = 0

    def __init__(self, name: str):
        if not isinstance(name, str) or not ATOM_PATTERN.fullmatch(name):
            raise ValueError(f"invalid atom name {name!r}")
        object.__setattr__(self, "name", name)
        self._init_key()

    def _payload(self) -> tuple:
        return (self.name,)

    def __str__(self) -> str:
        return self.name


class _Wrapped(Label):
    __slots__ = ("inner",)
    PREFIX = ""

    def __init__(self, inner: Label):
        if not isinstance(inner, Label):
            raise TypeError(f"expected a Label, got {type(inner).__name__}")
        object.__setattr__(self, "inner", inner)
        self._init_key()

    def _payload(self) -> tuple:
        return (self.inner.key,)

    def __str__(self) -> str:
        return f"{self.PREFIX}({self.inner})"


class Left(_Wrapped):
    __slots__ = ()
    KIND = 1
    PREFIX = "L"


class Right(_Wrapped):
    __slots__ = ()
    KIND = 2
    PREFIX = "R"


class Glued(_Wrapped):
    __slots__ = ()
    KIND = 3
    PREFIX = "G"


class Pair(Label):
    """Tuple tag; binary for fiber products, n-ary after flattening."""

    __slots__ = ("parts",)
    KIND = 4

    def __init__(self, *parts: Label):
        if len(parts) < 2:
            raise ValueError("a Pair needs at least two parts")
        for part in parts:
            if not isinstance(part, Label):
                raise TypeError(f"expected a Label, got {type(part).__name__}")
        object.__setattr__(self, "parts", tuple(parts))
        self._init_key()

    def _payload(self) -> tuple:
        return tuple(p.key for p in self.parts)

    def __str__(self) -> str:
        return "(" + ",".join(str(p) for p in self.parts) + ")"


class Orbit(Label):
    """Sorted, duplicate-free set of members."""

    __slots__ = ("members",)
    KIND = 5

    def __init__(self, members: Iterable[Label]):
        members = tuple(sorted(set(members)))
        if not members:
            raise ValueError("an Orbit needs at least one member")
        object.__setattr__(self, "members", members)
        self._init_key()

    def _payload(self) -> tuple:
        return (tuple(m.key for m in self.members),)

    def __str__(self) -> str:
        return "{" + ",".join(str(m) for m in self.members) + "}"


StateId = Label
ActionId = Label

LabelLike = Union[Label, str]


def as_label(value: LabelLike) -> Label:
    if isinstance(value, Label):
        return value
    return Atom(value)


def canonical_form(label: Label) -> Label:
    """Strip construction tags that do not change identity.

    Left/Right/Glued wrappers are dropped, a Pair whose parts all strip to the
    same label collapses to it, and a singleton Orbit collapses to its member.
    """
    if isinstance(label, _Wrapped):
        return canonical_form(label.inner)
    if isinstance(label, Pair):
        parts: Tuple[Label, ...] = tuple(canonical_form(p) for p in label.parts)
        if all(p == parts[0] for p in parts):
            return parts[0]
        return Pair(*parts)
    if isinstance(label, Orbit):
        members = [canonical_form(m) for m in label.members]
        if len(set(members)) == 1:
            return members[0]
        return Orbit(members)
    return label
