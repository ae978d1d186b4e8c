"""Shared fixtures and independent reference implementations.

The oracles below avoid the package's own scheduling and intervention code:
states are found by iterating the firing rule to a fixpoint in arbitrary
order, and descendants come from a plain graph search over the edge list.
"""

from __future__ import annotations

import pytest

from neurocause.corpus import load_corpus
from neurocause.generator import generate, sweep_params

N_SWEEP = 1000


def oracle_states(d, fired, clamp=None, hold=None):
    """Fixpoint iteration of the firing rule; ``clamp`` and ``hold`` map ids to forced states."""
    forced = dict(hold or {})
    forced.update(clamp or {})
    ids = sorted(n.id for n in d.neurons)[::-1]  # deliberately not in time order
    thr = {n.id: n.threshold for n in d.neurons}
    t1 = {n.id for n in d.neurons if n.time == 1}
    st = {i: False for i in ids}
    for _ in range(len(ids) + 1):
        new = {}
        for i in ids:
            if i in forced:
                new[i] = forced[i]
            elif i in t1:
                new[i] = i in fired
            else:
                srcs = [(e.source, e.kind.value) for e in d.edges if e.target == i]
                blocked = any(st[s] for s, k in srcs if k == "inhib")
                new[i] = not blocked and sum(st[s] for s, k in srcs if k == "stim") >= thr[i]
        if new == st:
            break
        st = new
    return st


def oracle_descendants(d, x):
    out, todo = set(), [x]
    while todo:
        u = todo.pop()
        for e in d.edges:
            if e.source == u and e.target not in out:
                out.add(e.target)
                todo.append(e.target)
    return out


def oracle_plain_flip(d, s, x, y):
    """Does flipping ``x`` (others not downstream of it held) flip ``y``?"""
    fact = oracle_states(d, set(s.fired_roots))
    keep = oracle_descendants(d, x) | {x}
    hold = {i: v for i, v in fact.items() if i not in keep}
    cf = oracle_states(d, set(s.fired_roots), clamp={x: not fact[x]}, hold=hold)
    return cf[y] != fact[y]


@pytest.fixture(scope="session")
def corpus():
    return load_corpus()


@pytest.fixture(scope="session")
def golden(corpus):
    entries, _ = corpus
    return [e for e in entries if e.executable]


@pytest.fixture(scope="session")
def generated():
    return [generate(sweep_params(i)) for i in range(N_SWEEP)]
