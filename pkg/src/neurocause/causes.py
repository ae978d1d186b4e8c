"""Counterfactual cause identification in neuron diagrams.

X is a cause of the final event Y iff flipping X, ceteris paribus, flips Y.
When X fires and forks into several paths towards Y, the flip is applied
with *off-path maximal blocking*: any inhibition lying off the direct
(shortest) X->Y path whose firing traces back to X stays active in the
counterfactual run. Path analysis happens on the diagram with redundant
chain neurons collapsed onto their parent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Mapping

from .model import Diagram, Edge, Event, Kind, Role, Scenario
from .simulator import Intervention, Trace, simulate, simulate_with


class Case(str, Enum):
    X_OFF = "X_OFF"
    X_ON_NONBIFURCATING = "X_ON_NONBIFURCATING"
    X_ON_BIFURCATING = "X_ON_BIFURCATING"


class NoPathError(LookupError):
    pass


# -- collapse -------------------------------------------------------------------


@dataclass(frozen=True)
class CollapsedDiagram:
    diagram: Diagram
    absorbed: Mapping[str, str]  # absorbed neuron -> surviving ancestor
    origin: Mapping[Edge, Edge]  # collapsed edge -> edge of the original diagram

    def survivor(self, neuron_id: str) -> str:
        return self.absorbed.get(neuron_id, neuron_id)

    def image(self, edge: Edge) -> Edge | None:
        """Collapsed counterpart of an original edge (None if it was folded away)."""
        return self._images.get(edge)

    @cached_property
    def _images(self) -> dict[Edge, Edge]:
        return {orig: ce for ce, orig in self.origin.items()}


def collapse_redundant(d: Diagram, t: Trace) -> CollapsedDiagram:
    """Fold every redundant neuron onto its parent until nothing changes.

    A neuron is redundant when its only input is a single stimulating edge
    from a parent in the same factual state, it has threshold 1 and exactly
    one outgoing edge. Its out-edge is re-attached to the parent. Roots and
    the query neuron are kept; a fold that would duplicate an existing edge
    is skipped.
    """
    edges: list[Edge] = list(d.edges)
    origin: dict[Edge, Edge] = {e: e for e in edges}
    alive = {n.id: n for n in d.neurons}
    parent_of: dict[str, str] = {}

    changed = True
    while changed:
        changed = False
        for nid in sorted(alive, key=lambda k: (alive[k].time, k)):
            n = alive[nid]
            if n.time == 1 or nid == d.query or n.threshold != 1:
                continue
            ins = [e for e in edges if e.target == nid]
            outs = [e for e in edges if e.source == nid]
            if len(ins) != 1 or len(outs) != 1 or ins[0].kind is not Kind.STIM:
                continue
            parent, out = ins[0].source, outs[0]
            if t[parent] != t[nid]:
                continue
            rewired = Edge(parent, out.target, out.kind)
            if rewired in origin:
                continue
            edges.remove(ins[0])
            edges.remove(out)
            edges.append(rewired)
            origin[rewired] = origin.pop(out)
            del origin[ins[0]]
            del alive[nid]
            parent_of[nid] = parent
            changed = True
            break

    absorbed = {}
    for nid in parent_of:
        root = nid
        while root in parent_of:
            root = parent_of[root]
        absorbed[nid] = root
    cd = Diagram(d.name, d.horizon, tuple(alive.values()), tuple(edges), d.query, d.unlabelled)
    return CollapsedDiagram(cd, absorbed, origin)


# -- path analysis ----------------------------------------------------------------


@dataclass(frozen=True)
class PathAnalysis:
    x: Event
    y: Event
    bifurcating: bool
    direct_path: tuple[Edge, ...]
    indirect_paths: tuple[tuple[Edge, ...], ...]
    off_path_events: frozenset[Event]
    shortest_path_ties: tuple[tuple[Edge, ...], ...]


def _path_key(path: tuple[Edge, ...]):
    ids = [path[0].source] + [e.target for e in path]
    kinds = [0 if e.kind is Kind.STIM else 1 for e in path]
    return (len(path), ids, kinds)


def simple_paths(d: Diagram, src: str, dst: str) -> list[tuple[Edge, ...]]:
    out: list[tuple[Edge, ...]] = []
    stack: list[tuple[str, tuple[Edge, ...]]] = [(src, ())]
    while stack:
        node, path = stack.pop()
        if node == dst and path:
            out.append(path)
            continue
        for e in d.out_edges(node):
            stack.append((e.target, path + (e,)))
    return sorted(out, key=_path_key)


def analyze_paths(cd: CollapsedDiagram, x: Event, y: Event, factual: Trace) -> PathAnalysis:
    """Classify the X->Y paths of the collapsed diagram into direct and indirect.

    Raises ``NoPathError`` when Y is unreachable from X.
    """
    d = cd.diagram
    xs, ys = cd.survivor(x.neuron), cd.survivor(y.neuron)
    paths = simple_paths(d, xs, ys)
    if not paths:
        raise NoPathError(f"no path from {x} to {y}")
    shortest = len(paths[0])
    ties = tuple(p for p in paths if len(p) == shortest)
    direct = ties[0]
    indirect = tuple(p for p in paths if p is not direct)
    on_direct = {xs} | {e.target for e in direct}
    off = {e.target for p in indirect for e in p} - on_direct
    # an absorbed X had exactly one outgoing edge
    bifurcating = x.neuron not in cd.absorbed and len(d.out_edges(xs)) >= 2
    return PathAnalysis(
        x=x,
        y=y,
        bifurcating=bifurcating,
        direct_path=direct,
        indirect_paths=indirect,
        off_path_events=frozenset(factual.event(d, n) for n in off),
        shortest_path_ties=ties,
    )


# -- verdicts -----------------------------------------------------------------------


@dataclass(frozen=True)
class CauseVerdict:
    is_cause: bool
    case_used: Case
    counterfactual_trace: Trace
    maintained_blocks_used: frozenset[Edge] = frozenset()
    tie_ambiguous: bool = False


def plain_intervention(d: Diagram, x: Event) -> Intervention:
    """Flip X and hold every event that does not depend on X at its factual value."""
    keep = d.descendants(x.neuron) | {x.neuron}
    return Intervention(
        clamps={x.neuron: not x.positive},
        frozen=frozenset(n.id for n in d.neurons if n.id not in keep),
    )


def plain_counterfactual(d: Diagram, s: Scenario, x: Event, factual: Trace | None = None) -> Trace:
    factual = factual or simulate(d, s)
    return simulate_with(d, s, plain_intervention(d, x), factual)


def _check_event(d: Diagram, factual: Trace, e: Event, what: str) -> None:
    if e.neuron not in d.by_id:
        raise ValueError(f"{what} {e}: unknown neuron {e.neuron}")
    if d.time(e.neuron) != e.time:
        raise ValueError(f"{what} {e}: {e.neuron} sits at t{d.time(e.neuron)}")
    if factual[e.neuron] != e.positive:
        raise ValueError(f"{what} {e} did not happen in the factual run")


def is_cause(
    d: Diagram,
    s: Scenario,
    x: Event,
    y: Event,
    *,
    factual: Trace | None = None,
    collapsed: CollapsedDiagram | None = None,
) -> CauseVerdict:
    factual = factual or simulate(d, s)
    _check_event(d, factual, x, "candidate")
    _check_event(d, factual, y, "effect")
    if x.neuron == y.neuron or x.time >= y.time:
        raise ValueError(f"candidate {x} must happen before {y}")

    cd = collapsed or collapse_redundant(d, factual)
    plain_iv = plain_intervention(d, x)
    plain = simulate_with(d, s, plain_iv, factual)
    flipped = lambda tr: tr[y.neuron] != y.positive

    if not x.positive:
        return CauseVerdict(flipped(plain), Case.X_OFF, plain)
    try:
        pa = analyze_paths(cd, x, y, factual)
    except NoPathError:
        pa = None
    if pa is None or not pa.bifurcating:
        return CauseVerdict(flipped(plain), Case.X_ON_NONBIFURCATING, plain)

    # blocking that traces back to the factual firing of X
    downstream = d.descendants(x.neuron) | {x.neuron}
    traced = [
        e
        for e in d.edges
        if e.kind is Kind.INHIB
        and e.source in downstream
        and factual[e.source]
        and not plain[e.source]
    ]
    runs = []
    for direct in pa.shortest_path_ties:
        on_path = set(direct)
        blocks = frozenset(e for e in traced if cd.image(e) not in on_path)
        iv = Intervention(plain_iv.clamps, blocks, plain_iv.frozen)
        tr = simulate_with(d, s, iv, factual)
        runs.append((flipped(tr), tr, blocks))
    verdicts = {r[0] for r in runs}
    first_verdict, first_trace, first_blocks = runs[0]
    return CauseVerdict(
        first_verdict, Case.X_ON_BIFURCATING, first_trace, first_blocks, len(verdicts) > 1
    )


# -- full reports ---------------------------------------------------------------------


def role_for(t: int, effect_time: int) -> Role:
    if t == 1:
        return Role.ROOT
    if t == effect_time - 1:
        return Role.PROXIMATE
    return Role.INTERMEDIATE


@dataclass(frozen=True)
class CauseReport:
    query_event: Event
    causes: tuple[tuple[Event, Role], ...]
    verdicts: Mapping[Event, CauseVerdict] = field(default_factory=dict)
    unlabelled: frozenset[str] = frozenset()

    @property
    def occurs(self) -> bool:
        return self.query_event.positive

    @property
    def verdict(self) -> str:
        return "occurs" if self.occurs else "does not occur"

    def cause_events(self) -> frozenset[Event]:
        return frozenset(e for e, _ in self.causes)

    def listed_causes(self) -> frozenset[Event]:
        """Causes among labelled neurons (what an answer line shows)."""
        return frozenset(e for e in self.cause_events() if e.neuron not in self.unlabelled)

    def answer_line(self) -> str:
        """Answer in the ``Yes. C+(t1); D+(t2)`` style."""
        head = "Yes." if self.occurs else "No."
        by_time: dict[int, list[Event]] = {}
        for e in sorted(self.listed_causes(), key=Event.sort_key):
            by_time.setdefault(e.time, []).append(e)
        groups = [", ".join(e.render() for e in evs) for _, evs in sorted(by_time.items())]
        return head + (" " + "; ".join(groups) if groups else "")

    def to_machine(self) -> dict:
        return {
            "query": self.query_event.render(),
            "verdict": self.verdict,
            "causes": [{"event": e.render(), "role": r.value} for e, r in self.causes],
            "audit": [
                {
                    "event": e.render(),
                    "is_cause": v.is_cause,
                    "case_used": v.case_used.value,
                    "tie_ambiguous": v.tie_ambiguous,
                }
                for e, v in sorted(self.verdicts.items(), key=lambda kv: kv[0].sort_key())
            ],
        }


def find_causes(d: Diagram, s: Scenario) -> CauseReport:
    factual = simulate(d, s)
    y = factual.event(d, d.query)
    cd = collapse_redundant(d, factual)
    verdicts: dict[Event, CauseVerdict] = {}
    for n in d.neurons:
        if n.id == d.query or n.time >= y.time:
            continue
        x = factual.event(d, n.id)
        verdicts[x] = is_cause(d, s, x, y, factual=factual, collapsed=cd)
    causes = tuple(
        (x, role_for(x.time, y.time))
        for x in sorted(verdicts, key=Event.sort_key)
        if verdicts[x].is_cause
    )
    return CauseReport(y, causes, verdicts, d.unlabelled)
