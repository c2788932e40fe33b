"""JSON documents for MDPs, morphisms, bridges, groups and solutions.

Labels are written in their text form: atoms as-is, ``L(x)``/``R(x)``/``G(x)``
for pushout tags, ``(a,b)`` for fiber-product pairs and ``{a,b}`` for orbits.
Probabilities go through ``json`` unchanged, which writes the shortest
representation that reparses to the same float.
"""
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

from loguru import logger
from pydantic import BaseModel, ValidationError

from compmdp.core.exceptions import DocumentSyntaxError, SemanticError
from compmdp.model.diagrams import Bridge
from compmdp.model.dist import Dist
from compmdp.model.group import GroupElement
from compmdp.model.labels import ATOM_PATTERN, ActionId, Atom, Glued, Label, Left, Orbit, Pair, Right, StateId
from compmdp.model.mdp import FiniteMdp, MdpMorphism
from compmdp.model.solution import Solution
from compmdp.schemas import (
    ActionDocument,
    BridgeDocument,
    GeneratorDocument,
    GroupDocument,
    MapDocument,
    MdpDocument,
    MorphismDocument,
    SolutionDocument,
)
from compmdp.services.mdp import mdp_service
from compmdp.services.morphism import morphism_service

_WRAPPERS = {"L": Left, "R": Right, "G": Glued}


class _LabelReader:
    """Cursor over label text; whitespace is only allowed inside brackets."""

    def __init__(self, text: str, pos: int = 0):
        self.text = text
        self.pos = pos

    def error(self, message: str) -> DocumentSyntaxError:
        line = self.text.count("\n", 0, self.pos) + 1
        col = self.pos - (self.text.rfind("\n", 0, self.pos) + 1) + 1
        return DocumentSyntaxError(message, line, col)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def at_end(self) -> bool:
        return self.pos >= len(self.text)

    def skip_ws(self) -> None:
        while self.peek().isspace():
            self.pos += 1

    def expect(self, char: str) -> None:
        if self.peek() != char:
            found = repr(self.peek()) if self.peek() else "end of text"
            raise self.error(f"expected {char!r}, found {found}")
        self.pos += 1

    def _sequence(self, close: str) -> List[Label]:
        items = []
        self.skip_ws()
        items.append(self.read())
        self.skip_ws()
        while self.peek() == ",":
            self.pos += 1
            self.skip_ws()
            items.append(self.read())
            self.skip_ws()
        self.expect(close)
        return items

    def read(self) -> Label:
        char = self.peek()
        if char == "(":
            self.pos += 1
            parts = self._sequence(")")
            if len(parts) < 2:
                raise self.error("a pair needs at least two parts")
            return Pair(*parts)
        if char == "{":
            self.pos += 1
            return Orbit(self._sequence("}"))
        match = ATOM_PATTERN.match(self.text, self.pos)
        if match is None:
            raise self.error("expected a label")
        name = match.group()
        self.pos = match.end()
        if name in _WRAPPERS and self.peek() == "(":
            self.pos += 1
            self.skip_ws()
            inner = self.read()
            self.skip_ws()
            self.expect(")")
            return _WRAPPERS[name](inner)
        return Atom(name)


def format_label(label: Label) -> str:
    return str(label)


def parse_label(text: str) -> Label:
    reader = _LabelReader(text.strip())
    label = reader.read()
    if not reader.at_end():
        raise reader.error(f"unexpected {reader.peek()!r} after label")
    return label


def parse_cycles(text: str) -> Dict[Label, Label]:
    """Permutation from cycle notation such as ``(a b)(c d e)``; members are whitespace-separated."""
    reader = _LabelReader(text)
    table: Dict[Label, Label] = {}
    reader.skip_ws()
    while not reader.at_end():
        reader.expect("(")
        reader.skip_ws()
        cycle: List[Label] = []
        while reader.peek() != ")":
            if reader.at_end():
                raise reader.error("unterminated cycle")
            cycle.append(reader.read())
            if not (reader.peek().isspace() or reader.peek() == ")"):
                raise reader.error("cycle members must be separated by whitespace")
            reader.skip_ws()
        reader.expect(")")
        for i, x in enumerate(cycle):
            if x in table:
                raise SemanticError(f"label {x} appears twice in cycle notation")
            table[x] = cycle[(i + 1) % len(cycle)]
        reader.skip_ws()
    return table


def format_cycles(table: Mapping[Label, Label]) -> str:
    seen = set()
    cycles = []
    for start in sorted(table):
        if start in seen or table[start] == start:
            continue
        cycle = [start]
        seen.add(start)
        x = table[start]
        while x != start:
            cycle.append(x)
            seen.add(x)
            x = table[x]
        cycles.append("(" + " ".join(format_label(c) for c in cycle) + ")")
    return "".join(cycles)


# Unbound documents
@dataclass(frozen=True)
class UnboundMap:
    """A morphism document; its endpoints come from where it is used."""

    f: Mapping[StateId, StateId]
    g: Mapping[ActionId, ActionId]
    reward_compatible: bool = False

    def bind(self, source: FiniteMdp, target: FiniteMdp, name: str = "morphism") -> MdpMorphism:
        m = MdpMorphism(source, target, self.f, self.g, self.reward_compatible)
        report = morphism_service.check_morphism(m)
        if not report.ok:
            raise SemanticError(f"{name} is not a morphism here", report.messages())
        return m


@dataclass(frozen=True)
class UnboundBridge:
    mdp: FiniteMdp
    left: UnboundMap
    right: UnboundMap

    def bind(self, left_env: FiniteMdp, right_env: FiniteMdp, name: str = "bridge") -> Bridge:
        return Bridge(
            mdp=self.mdp,
            left=self.left.bind(self.mdp, left_env, f"{name} (left leg)"),
            right=self.right.bind(self.mdp, right_env, f"{name} (right leg)"),
        )


@dataclass(frozen=True)
class GeneratorSet:
    generators: Tuple[GroupElement, ...]


Document = Union[FiniteMdp, UnboundMap, UnboundBridge, GeneratorSet, SolutionDocument]


# Reading
def _load_json(text: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentSyntaxError(e.msg, e.lineno, e.colno)
    if not isinstance(data, dict):
        raise SemanticError("a document must be a JSON object")
    return data


def _validated(schema: type, data: dict) -> BaseModel:
    try:
        return schema.model_validate(data)
    except ValidationError as e:
        issues = [f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()]
        raise SemanticError(f"invalid {schema.__name__}", issues)


def _label(text: str, where: str) -> Label:
    try:
        return parse_label(text)
    except (DocumentSyntaxError, ValueError) as e:
        raise SemanticError(f"bad label {text!r} in {where}", [str(e)])


def _label_map(table: Mapping[str, str], where: str) -> Dict[Label, Label]:
    return {_label(k, where): _label(v, where) for k, v in table.items()}


def mdp_from_document(doc: MdpDocument, check: bool = True) -> FiniteMdp:
    states = [_label(s, "states") for s in doc.states]
    psi: Dict[Label, Label] = {}
    trans: Dict[Label, Dist] = {}
    reward: Dict[Label, float] = {}
    for action in doc.actions:
        a = _label(action.id, "actions")
        if a in psi:
            raise SemanticError(f"action {a} is declared twice")
        psi[a] = _label(action.state, f"action {a}")
        try:
            trans[a] = Dist({_label(t, f"action {a}"): p for t, p in action.to.items()})
        except ValueError as e:
            raise SemanticError(f"bad transition for action {a}", [str(e)])
        if action.reward is not None:
            reward[a] = action.reward
    rewarded = any(action.reward is not None for action in doc.actions)
    m = FiniteMdp(states, psi, trans, reward if rewarded else None)
    if check:
        report = mdp_service.validate(m)
        if not report.ok:
            raise SemanticError("invalid mdp", report.messages())
    return m


def parse_mdp(text: str, check: bool = True) -> FiniteMdp:
    """Read an MDP document; with `check` the result must pass `mdp_service.validate`."""
    data = _load_json(text)
    data.setdefault("kind", "mdp")
    return mdp_from_document(_validated(MdpDocument, data), check)


def _unbound_map(doc: MapDocument) -> UnboundMap:
    return UnboundMap(
        f=_label_map(doc.states, "state map"),
        g=_label_map(doc.actions, "action map"),
        reward_compatible=doc.reward_compatible,
    )


def _generator(doc: GeneratorDocument) -> GroupElement:
    try:
        return GroupElement(parse_cycles(doc.states), parse_cycles(doc.actions), name=doc.name)
    except DocumentSyntaxError as e:
        raise SemanticError(f"bad cycle notation in generator {doc.name or '?'}", [e.detail])


def parse_document(text: str, check: bool = True) -> Document:
    """Dispatch on `kind`; a document without one is read as an MDP."""
    data = _load_json(text)
    kind = data.get("kind", "mdp")
    if kind == "mdp":
        data.setdefault("kind", "mdp")
        return mdp_from_document(_validated(MdpDocument, data), check)
    if kind == "morphism":
        return _unbound_map(_validated(MorphismDocument, data))
    if kind == "bridge":
        doc = _validated(BridgeDocument, data)
        return UnboundBridge(mdp_from_document(doc.mdp, check), _unbound_map(doc.left), _unbound_map(doc.right))
    if kind == "group":
        doc = _validated(GroupDocument, data)
        return GeneratorSet(tuple(_generator(g) for g in doc.generators))
    if kind == "solution":
        return _validated(SolutionDocument, data)
    raise SemanticError(f"unknown document kind {kind!r}")


def load_document(path: Union[str, Path], check: bool = True) -> Document:
    path = Path(path)
    logger.debug(f"Loading document {path}")
    return parse_document(path.read_text(encoding="utf-8"), check)


def load_bindings(binds: Iterable[str] = (), docs: Optional[Union[str, Path]] = None) -> Dict[str, Document]:
    """Every *.json under `docs` bound by file stem, then NAME=path pairs on top."""
    bindings: Dict[str, Document] = {}
    if docs is not None:
        for path in sorted(Path(docs).glob("*.json")):
            bindings[path.stem] = load_document(path)
    for bind in binds:
        name, sep, path = bind.partition("=")
        if not sep or not name.strip():
            raise SemanticError(f"binding {bind!r} is not of the form NAME=path")
        bindings[name.strip()] = load_document(path.strip())
    logger.info(f"Loaded {len(bindings)} bindings")
    return bindings


# Writing
def _dump(doc: BaseModel) -> str:
    return json.dumps(doc.model_dump(mode="json", exclude_none=True), indent=2, ensure_ascii=False) + "\n"


def mdp_document(m: FiniteMdp) -> MdpDocument:
    return MdpDocument(
        states=[format_label(s) for s in m.states],
        actions=[
            ActionDocument(
                id=format_label(a),
                state=format_label(m.psi[a]),
                reward=m.reward[a] if m.reward is not None and a in m.reward else None,
                to={format_label(t): p for t, p in m.trans[a].items()},
            )
            for a in m.actions
        ],
    )


def serialize_mdp(m: FiniteMdp) -> str:
    return _dump(mdp_document(m))


def _map_document(m: MdpMorphism) -> MapDocument:
    return MapDocument(
        states={format_label(s): format_label(t) for s, t in m.f.items()},
        actions={format_label(a): format_label(b) for a, b in m.g.items()},
        reward_compatible=m.reward_compatible,
    )


def serialize_morphism(m: MdpMorphism) -> str:
    return _dump(MorphismDocument(**_map_document(m).model_dump()))


def serialize_bridge(bridge: Bridge) -> str:
    return _dump(
        BridgeDocument(mdp=mdp_document(bridge.mdp), left=_map_document(bridge.left), right=_map_document(bridge.right))
    )


def serialize_group(generators: Iterable[GroupElement]) -> str:
    return _dump(
        GroupDocument(
            generators=[
                GeneratorDocument(name=g.name, states=format_cycles(g.alpha), actions=format_cycles(g.beta))
                for g in generators
            ]
        )
    )


def solution_document(solution: Solution) -> SolutionDocument:
    return SolutionDocument(
        gamma=solution.gamma,
        iterations=solution.iterations,
        residual=solution.residual,
        converged=solution.converged,
        values={format_label(s): v for s, v in solution.values.items()},
        policy={format_label(s): format_label(a) for s, a in solution.policy.items()},
    )


def serialize_solution(solution: Solution) -> str:
    return _dump(solution_document(solution))
