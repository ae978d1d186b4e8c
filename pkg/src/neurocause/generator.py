"""Seeded random neuron diagrams and a fixed complexity score for bucketing."""

from __future__ import annotations

import random
import string
from dataclasses import dataclass

from .model import Diagram, Edge, Kind, Neuron, Scenario


@dataclass(frozen=True)
class GenParams:
    horizon: int = 4
    width: tuple[int, int] = (1, 3)
    stim_density: float = 0.6
    inhib_prob: float = 0.2
    threshold2_prob: float = 0.3
    root_fire_prob: float = 0.6
    seed: int = 0

    def __post_init__(self):
        if self.horizon < 2:
            raise ValueError("horizon must be >= 2")
        lo, hi = self.width
        if lo < 1 or hi < lo:
            raise ValueError(f"bad width range {self.width}")
        for name in ("stim_density", "inhib_prob", "threshold2_prob", "root_fire_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")


def _label(i: int) -> str:
    letters = string.ascii_uppercase
    out = ""
    i += 1
    while i:
        i, r = divmod(i - 1, 26)
        out = letters[r] + out
    return out


def generate(p: GenParams) -> tuple[Diagram, Scenario]:
    """Build a valid diagram; every call with the same params gives the same result.

    Slot ``t`` holds neurons named ``A<t>``, ``B<t>``, ... Stimulations link
    adjacent slots with probability ``stim_density``; a neuron left without
    any stimulating input gets one from a random neuron of the previous slot.
    Inhibitions run forward from any earlier slot.
    """
    rng = random.Random(p.seed)
    slots = [[f"{_label(i)}{t}" for i in range(rng.randint(*p.width))] for t in range(1, p.horizon + 1)]
    time = {nid: t for t, ids in enumerate(slots, start=1) for nid in ids}

    stim: set[tuple[str, str]] = set()
    for t in range(1, p.horizon):
        for v in slots[t]:
            for u in slots[t - 1]:
                if rng.random() < p.stim_density:
                    stim.add((u, v))
            if not any(dst == v for _, dst in stim):
                stim.add((rng.choice(slots[t - 1]), v))

    inhib: set[tuple[str, str]] = set()
    for t in range(1, p.horizon):
        for v in slots[t]:
            for earlier in slots[:t]:
                for u in earlier:
                    if rng.random() < p.inhib_prob and (u, v) not in stim:
                        inhib.add((u, v))

    neurons = []
    for nid, t in time.items():
        n_in = sum(1 for _, dst in stim if dst == nid)
        thr = 2 if n_in >= 2 and rng.random() < p.threshold2_prob else 1
        neurons.append(Neuron(nid, t, thr))
    fired = tuple(r for r in slots[0] if rng.random() < p.root_fire_prob)
    query = rng.choice(slots[-1])

    edges = [Edge(u, v, Kind.STIM) for u, v in stim] + [Edge(u, v, Kind.INHIB) for u, v in inhib]
    d = Diagram(f"gen-{p.seed}", p.horizon, tuple(neurons), tuple(edges), query)
    return d, Scenario(fired)


def sweep_params(seed: int) -> GenParams:
    """Parameter mix used for the seeded property sweeps (horizon 2..5, width 1..3)."""
    return GenParams(
        horizon=2 + seed % 4,
        width=(1, 3),
        stim_density=0.6,
        inhib_prob=0.25,
        threshold2_prob=0.3,
        root_fire_prob=0.6,
        seed=seed,
    )


# -- complexity -------------------------------------------------------------------

WEIGHTS = {"neurons": 1, "edges": 1, "inhib_edges": 2, "bifurcations": 2, "depth": 1, "threshold2_count": 2}


@dataclass(frozen=True)
class ComplexityScore:
    total: int
    parts: dict

    def bucket(self, width: int = 10) -> str:
        lo = self.total // width * width
        return f"{lo}-{lo + width - 1}"


def complexity(d: Diagram) -> ComplexityScore:
    parts = {
        "neurons": len(d.neurons),
        "edges": len(d.edges),
        "inhib_edges": sum(1 for e in d.edges if e.kind is Kind.INHIB),
        "bifurcations": sum(1 for n in d.neurons if len(d.out_edges(n.id)) >= 2),
        "depth": d.horizon,
        "threshold2_count": sum(1 for n in d.neurons if n.threshold >= 2),
    }
    return ComplexityScore(sum(WEIGHTS[k] * v for k, v in parts.items()), parts)
