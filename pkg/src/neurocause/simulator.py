"""Deterministic firing dynamics, with and without interventions.

A neuron at a later slot fires iff no inhibitor of it fired (at any earlier
time) and at least ``threshold`` of its stimulating sources fired. Sources
always sit at earlier slots, so one pass in time order settles every state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .model import Diagram, Edge, Event, Kind, Scenario


@dataclass(frozen=True)
class Trace:
    states: Mapping[str, bool]

    def fired(self, neuron_id: str) -> bool:
        return self.states[neuron_id]

    def __getitem__(self, neuron_id: str) -> bool:
        return self.states[neuron_id]

    def event(self, d: Diagram, neuron_id: str) -> Event:
        return Event(neuron_id, self.states[neuron_id], d.time(neuron_id))

    def events(self, d: Diagram) -> list[Event]:
        return [self.event(d, n.id) for n in d.neurons]

    def restrict(self, ids) -> "Trace":
        return Trace({k: v for k, v in self.states.items() if k in ids})

    def tokens(self, d: Diagram) -> list[str]:
        return [e.render() for e in self.events(d)]

    def to_machine(self) -> dict[str, str]:
        return {k: "fired" if v else "not_fired" for k, v in sorted(self.states.items())}


@dataclass(frozen=True)
class Intervention:
    """Forced states for a counterfactual run.

    ``clamps`` override everything; ``frozen`` neurons keep their factual
    state; targets of ``maintained_blocks`` edges count as inhibited no
    matter what their source does in the counterfactual run.
    """

    clamps: Mapping[str, bool] = field(default_factory=dict)
    maintained_blocks: frozenset[Edge] = frozenset()
    frozen: frozenset[str] = frozenset()

    def __bool__(self) -> bool:
        return bool(self.clamps or self.maintained_blocks or self.frozen)


def _fires(d: Diagram, nid: str, states: dict[str, bool]) -> bool:
    stim = 0
    for e in d.in_edges(nid):
        if not states[e.source]:
            continue
        if e.kind is Kind.INHIB:
            return False
        stim += 1
    return stim >= d.by_id[nid].threshold


def simulate(d: Diagram, s: Scenario) -> Trace:
    states: dict[str, bool] = {}
    for n in d.neurons:
        states[n.id] = n.id in s.fired_roots if n.time == 1 else _fires(d, n.id, states)
    return Trace(states)


def simulate_with(
    d: Diagram, s: Scenario, iv: Intervention, factual: Trace | None = None
) -> Trace:
    """Run the dynamics under ``iv``; per neuron: clamp > frozen > maintained block > dynamics."""
    if not iv:
        return simulate(d, s)
    if iv.frozen and factual is None:
        factual = simulate(d, s)
    blocked = {e.target for e in iv.maintained_blocks}
    states: dict[str, bool] = {}
    for n in d.neurons:
        nid = n.id
        if nid in iv.clamps:
            states[nid] = bool(iv.clamps[nid])
        elif nid in iv.frozen:
            states[nid] = factual[nid]
        elif nid in blocked:
            states[nid] = False
        elif n.time == 1:
            states[nid] = nid in s.fired_roots
        else:
            states[nid] = _fires(d, nid, states)
    return Trace(states)
