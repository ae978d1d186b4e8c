"""Neuron-diagram data model: neurons, edges, diagrams, scenarios, events.

All types are immutable. ``Diagram`` keeps its neurons sorted by (time, id)
and its edges sorted by (source, target, kind) so that two structurally equal
diagrams compare equal regardless of declaration order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Mapping

ID_RE = re.compile(r"[A-Za-z][A-Za-z0-9]*\Z")
EVENT_RE = re.compile(r"([A-Za-z][A-Za-z0-9]*)([+-])\(t(\d+)\)\Z")


class Kind(str, Enum):
    STIM = "stim"
    INHIB = "inhib"


_KIND_ORDER = {Kind.STIM: 0, Kind.INHIB: 1}


@dataclass(frozen=True)
class Neuron:
    id: str
    time: int
    threshold: int = 1


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    kind: Kind = Kind.STIM

    def sort_key(self):
        return (self.source, self.target, _KIND_ORDER[self.kind])

    def __str__(self) -> str:
        arrow = "->" if self.kind is Kind.STIM else "-|"
        return f"{self.source} {arrow} {self.target}"


@dataclass(frozen=True)
class Scenario:
    """Exogenous input: the time-1 neurons that fire.

    Declaration order is kept (it only affects how the scenario is phrased
    in transcriptions); duplicates are dropped.
    """

    fired_roots: tuple[str, ...] = ()

    def __post_init__(self):
        seen = dict.fromkeys(self.fired_roots)
        object.__setattr__(self, "fired_roots", tuple(seen))

    def __contains__(self, neuron_id: str) -> bool:
        return neuron_id in self.fired_roots


@dataclass(frozen=True)
class Diagram:
    name: str
    horizon: int
    neurons: tuple[Neuron, ...]
    edges: tuple[Edge, ...]
    query: str
    # neurons drawn without a label in the source figure; their events are
    # left out of answer lines but still analysed
    unlabelled: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(
            self, "neurons", tuple(sorted(self.neurons, key=lambda n: (n.time, n.id)))
        )
        object.__setattr__(self, "edges", tuple(sorted(self.edges, key=Edge.sort_key)))
        object.__setattr__(self, "unlabelled", frozenset(self.unlabelled))

    @cached_property
    def by_id(self) -> dict[str, Neuron]:
        return {n.id: n for n in self.neurons}

    @cached_property
    def _in(self) -> dict[str, tuple[Edge, ...]]:
        out: dict[str, list[Edge]] = {n.id: [] for n in self.neurons}
        for e in self.edges:
            out.setdefault(e.target, []).append(e)
        return {k: tuple(v) for k, v in out.items()}

    @cached_property
    def _out(self) -> dict[str, tuple[Edge, ...]]:
        out: dict[str, list[Edge]] = {n.id: [] for n in self.neurons}
        for e in self.edges:
            out.setdefault(e.source, []).append(e)
        return {k: tuple(v) for k, v in out.items()}

    def in_edges(self, neuron_id: str) -> tuple[Edge, ...]:
        return self._in.get(neuron_id, ())

    def out_edges(self, neuron_id: str) -> tuple[Edge, ...]:
        return self._out.get(neuron_id, ())

    def time(self, neuron_id: str) -> int:
        return self.by_id[neuron_id].time

    def roots(self) -> list[str]:
        return [n.id for n in self.neurons if n.time == 1]

    def slot(self, t: int) -> list[str]:
        return [n.id for n in self.neurons if n.time == t]

    def descendants(self, neuron_id: str) -> frozenset[str]:
        """Neurons reachable from ``neuron_id`` over edges of either kind."""
        seen: set[str] = set()
        stack = [neuron_id]
        while stack:
            for e in self.out_edges(stack.pop()):
                if e.target not in seen:
                    seen.add(e.target)
                    stack.append(e.target)
        return frozenset(seen)


class Role(str, Enum):
    ROOT = "root"
    PROXIMATE = "proximate"
    INTERMEDIATE = "intermediate"


@dataclass(frozen=True, order=True)
class Event:
    """A neuron firing (``positive``) or not firing at its time slot."""

    neuron: str
    positive: bool
    time: int

    def sort_key(self):
        return (self.time, not self.positive, self.neuron)

    def render(self) -> str:
        return f"{self.neuron}{'+' if self.positive else '-'}(t{self.time})"

    def __str__(self) -> str:
        return self.render()

    @classmethod
    def parse(cls, text: str) -> "Event":
        m = EVENT_RE.match(text.strip())
        if not m:
            raise ValueError(f"malformed event {text!r}, expected e.g. 'C+(t1)'")
        neuron, sign, t = m.groups()
        if int(t) < 1:
            raise ValueError(f"malformed event {text!r}: time slots start at t1")
        return cls(neuron, sign == "+", int(t))


def render_event(e: Event) -> str:
    return e.render()


def parse_event(text: str) -> Event:
    return Event.parse(text)


# -- validation -------------------------------------------------------------

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Violation:
    code: str
    element: str
    message: str
    severity: str = ERROR

    def __str__(self) -> str:
        return f"{self.severity.upper()} {self.code} [{self.element}]: {self.message}"


class DiagramError(ValueError):
    """Raised when a diagram breaks a structural rule."""

    def __init__(self, violations: list[Violation]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


def validate(d: Diagram, s: Scenario | None = None) -> list[Violation]:
    """Check every structural rule; returns violations (errors and warnings)."""
    out: list[Violation] = []
    add = lambda code, el, msg, sev=ERROR: out.append(Violation(code, el, msg, sev))

    if d.horizon < 1:
        add("BAD_HORIZON", d.name, f"horizon must be >= 1, got {d.horizon}")
    seen: set[str] = set()
    for n in d.neurons:
        if n.id in seen:
            add("DUPLICATE_ID", n.id, f"neuron {n.id} declared more than once")
        seen.add(n.id)
        if not ID_RE.match(n.id):
            add("BAD_ID", n.id, "ids are a letter followed by letters/digits")
        if n.threshold < 1:
            add("BAD_THRESHOLD", n.id, f"threshold must be >= 1, got {n.threshold}")
        if not 1 <= n.time <= d.horizon:
            add("TIME_OUT_OF_RANGE", n.id, f"time t{n.time} outside t1..t{d.horizon}")

    ids = d.by_id
    seen_edges: set[tuple] = set()
    for e in d.edges:
        el = str(e)
        key = (e.source, e.target, e.kind)
        if key in seen_edges:
            add("DUPLICATE_EDGE", el, "edge declared more than once")
        seen_edges.add(key)
        missing = [x for x in (e.source, e.target) if x not in ids]
        for x in missing:
            add("UNDECLARED_NEURON", el, f"undeclared neuron {x}")
        if missing:
            continue
        if e.source == e.target:
            add("SELF_EDGE", el, "a neuron cannot connect to itself")
            continue
        ts, tt = ids[e.source].time, ids[e.target].time
        if e.kind is Kind.STIM and tt != ts + 1:
            add("STIM_NOT_ADJACENT", el, f"stimulation must go from t{ts} to t{ts + 1}, not t{tt}")
        if e.kind is Kind.INHIB and tt <= ts:
            add("INHIB_NOT_FORWARD", el, f"inhibition must target a later time (t{ts} -> t{tt})")

    stim_pairs = {(e.source, e.target) for e in d.edges if e.kind is Kind.STIM}
    for e in d.edges:
        if e.kind is Kind.INHIB and (e.source, e.target) in stim_pairs:
            add("STIM_AND_INHIB", str(e), "same source both stimulates and inhibits (inhibition wins)", WARNING)
    for n in d.neurons:
        if n.time > 1 and n.id in ids:
            n_stim = sum(1 for e in d.in_edges(n.id) if e.kind is Kind.STIM)
            if n_stim < n.threshold:
                add(
                    "UNREACHABLE_THRESHOLD",
                    n.id,
                    f"threshold {n.threshold} but only {n_stim} stimulating input(s); can never fire",
                    WARNING,
                )

    if d.query not in ids:
        add("QUERY_UNKNOWN", d.query, f"query neuron {d.query} is not declared")
    elif ids[d.query].time != d.horizon:
        add("QUERY_NOT_FINAL", d.query, f"query neuron must sit at t{d.horizon}")
    times = {n.time for n in d.neurons}
    for t in range(1, d.horizon + 1):
        if t not in times:
            add("EMPTY_SLOT", f"t{t}", f"time slot t{t} has no neuron")
    for u in sorted(d.unlabelled - set(ids)):
        add("UNDECLARED_NEURON", u, f"undeclared neuron {u} in unlabelled list")

    if s is not None:
        for r in s.fired_roots:
            if r not in ids:
                add("UNDECLARED_NEURON", r, f"undeclared neuron {r} in fire list")
            elif ids[r].time != 1:
                add("FIRED_NOT_ROOT", r, f"only t1 neurons fire exogenously, {r} is at t{ids[r].time}")
    return out


def errors(violations: Iterable[Violation]) -> list[Violation]:
    return [v for v in violations if v.severity == ERROR]


# -- canonical machine format -------------------------------------------------


def to_machine(d: Diagram, s: Scenario) -> dict:
    doc = {
        "name": d.name,
        "horizon": d.horizon,
        "neurons": [{"id": n.id, "time": n.time, "threshold": n.threshold} for n in d.neurons],
        "edges": [{"source": e.source, "target": e.target, "kind": e.kind.value} for e in d.edges],
        "fired_roots": list(s.fired_roots),
        "query": d.query,
    }
    if d.unlabelled:
        doc["unlabelled"] = sorted(d.unlabelled)
    return doc


def from_machine(doc: Mapping) -> tuple[Diagram, Scenario]:
    try:
        d = Diagram(
            name=str(doc["name"]),
            horizon=int(doc["horizon"]),
            neurons=tuple(
                Neuron(str(n["id"]), int(n["time"]), int(n.get("threshold", 1)))
                for n in doc["neurons"]
            ),
            edges=tuple(
                Edge(str(e["source"]), str(e["target"]), Kind(e["kind"])) for e in doc["edges"]
            ),
            query=str(doc["query"]),
            unlabelled=frozenset(doc.get("unlabelled", ())),
        )
        s = Scenario(tuple(doc.get("fired_roots", ())))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed diagram document: {exc}") from exc
    bad = errors(validate(d, s))
    if bad:
        raise DiagramError(bad)
    return d, s
