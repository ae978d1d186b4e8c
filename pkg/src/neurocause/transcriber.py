"""Plain-English transcription of neuron diagrams for testing language models.

``transcribe`` renders a diagram as conditional sentences plus the standard
question; ``reverse_parse`` reads such text back into a diagram, which is
how transcription faithfulness is checked.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .model import Diagram, Edge, Kind, Neuron, Scenario

HYP_PROMPT = (
    "Can you, in order to give this answer, reason step by step and list all "
    "the hypotheses and laws of nature you use to come to your answer?"
)


def hyp_prompt() -> str:
    return HYP_PROMPT


@dataclass(frozen=True)
class Prompt:
    diagram_name: str
    body: str
    question: str
    hyp_followup: str = HYP_PROMPT

    def text(self, with_hyp: bool = False) -> str:
        parts = [self.body, self.question] if self.body else [self.question]
        if with_hyp:
            parts.append(self.hyp_followup)
        return "\n\n".join(parts) + "\n"


def _join(items: list[str]) -> str:
    if len(items) <= 1:
        return "".join(items)
    return ", ".join(items[:-1]) + " and " + items[-1]


def _header(horizon: int) -> str:
    if horizon < 2:
        return ""
    s = "Suppose time t1 is earlier than time t2"
    for t in range(3, horizon + 1):
        s += f", which is earlier than time t{t}"
    return s + "."


def _threshold_clause(d: Diagram, target: Neuron, source: str) -> str:
    k = target.threshold
    if k == 1:
        return ""
    others = sorted(e.source for e in d.in_edges(target.id) if e.kind is Kind.STIM and e.source != source)
    at = [f"{o} at t{d.time(o)}" for o in others]
    if k == 2 and len(others) == 2:
        return f", if also either {at[0]} or {at[1]} (or both) would occur"
    if k == 2 and len(others) == 1:
        return f", if also {others[0]} would occur at t{d.time(others[0])}"
    return f", if also at least {k - 1} of {_join(at) or 'no other neuron'} would occur"


def _unless_clause(d: Diagram, target: Neuron) -> str:
    inhibitors = sorted(e.source for e in d.in_edges(target.id) if e.kind is Kind.INHIB)
    if not inhibitors:
        return ""
    parts = []
    for i in inhibitors:
        ti = d.time(i)
        when = f"at t{ti}" if target.time - ti == 1 else "at an earlier time"
        parts.append(f"{i} would occur {when}")
    return ", unless " + " or ".join(parts)


def _scenario_sentence(s: Scenario) -> str:
    roots = list(s.fired_roots)
    if not roots:
        return "Suppose no neuron occurs at t1."
    verb = "occurs" if len(roots) == 1 else "occur"
    return f"Suppose {_join(roots)} {verb} at t1."


def question_for(d: Diagram) -> str:
    q, t = d.query, d.time(d.query)
    return f"Does {q} occur at t{t}? What is/are the cause(s) of {q}'s occurring or not occurring?"


def transcribe(d: Diagram, s: Scenario) -> Prompt:
    sentences = [_header(d.horizon)] if d.horizon > 1 else []
    pinned = set(s.fired_roots) | {d.query}
    for target in sorted(d.neurons, key=lambda n: (n.time, n.id)):
        stim = sorted(e.source for e in d.in_edges(target.id) if e.kind is Kind.STIM)
        tail = _unless_clause(d, target)
        for src in stim:
            sentences.append(
                f"If {src} would occur at t{d.time(src)}, {target.id} would occur at t{target.time}"
                f"{_threshold_clause(d, target, src)}{tail}."
            )
        if stim:
            pinned.update(stim)
            pinned.add(target.id)
            pinned.update(e.source for e in d.in_edges(target.id) if target.time - d.time(e.source) == 1)
        else:
            for e in d.in_edges(target.id):
                sentences.append(
                    f"If {e.source} would occur at t{d.time(e.source)}, {target.id} would not occur at t{target.time}."
                )
                pinned.update((e.source, target.id))
        if target.time > 1 and not stim and target.threshold != 1:
            sentences.append(f"Neuron {target.id} needs at least {target.threshold} stimulating signals.")
    for n in d.neurons:
        if n.id not in pinned:
            sentences.append(f"Neuron {n.id} can only occur at t{n.time}.")
    sentences.append(_scenario_sentence(s))
    return Prompt(d.name, " ".join(sentences), question_for(d))


# -- reading transcriptions back ------------------------------------------------------

_SENT_SPLIT = re.compile(r"(?<=[.?])\s+")
_ID = r"([A-Za-z][A-Za-z0-9]*)"
_COND = re.compile(rf"If {_ID} would occur at t(\d+), (.+?) would occur at t(\d+)(.*)\.$")
_NOT = re.compile(rf"If {_ID} would occur at t(\d+), {_ID} would not occur at t(\d+)\.$")
_EITHER = re.compile(
    rf",? if also either {_ID}(?: at t(\d+))? or {_ID}(?: at t(\d+))? \(or both\) would occur(?: at t(\d+))?"
)
_ALSO_ONE = re.compile(rf",? if also {_ID} would occur at t(\d+)")
_AT_LEAST = re.compile(r",? if also at least (\d+) of (.+?) would occur")
_AND_NOT = re.compile(rf",? and {_ID} would not occur at t(\d+)")
_UNLESS = re.compile(r",? unless (.+)$")
_INHIBITOR = re.compile(rf"{_ID} (?:would occur|occurs) (?:at t(\d+)|at an earlier time)")
_SCEN = re.compile(r"Suppose (?:both )?(.+?) occurs? at t1\.$")
_QUESTION = re.compile(rf"Does {_ID} occur at t(\d+)\?")
_PIN = re.compile(rf"Neuron {_ID} can only occur at t(\d+)\.$")
_THR = re.compile(rf"Neuron {_ID} needs at least (\d+) stimulating signals\.$")


def _split_ids(text: str) -> list[str]:
    return [p for p in re.split(r",\s*|\s+and\s+", text.strip()) if p]


def sentences(text: str) -> list[str]:
    return [s for s in _SENT_SPLIT.split(" ".join(text.split())) if s]


def sentence_set(text: str) -> frozenset[str]:
    """Whitespace-normalised sentence set; joint targets ("B and D would occur")
    are expanded into one sentence per target."""
    out = set()
    for sent in sentences(text):
        m = _COND.match(sent)
        if m and " and " in m.group(3) and not m.group(5):
            src, ts, joint, tt, _ = m.groups()
            for tgt in _split_ids(joint):
                out.add(f"If {src} would occur at t{ts}, {tgt} would occur at t{tt}.")
        else:
            out.add(sent)
    return frozenset(out)


class TranscriptionError(ValueError):
    pass


def reverse_parse(prompt: Prompt) -> tuple[Diagram, Scenario]:
    """Rebuild the diagram a transcription describes."""
    times: dict[str, int] = {}
    thresholds: dict[str, int] = {}
    edges: set[Edge] = set()
    late_inhib: list[tuple[str, str]] = []
    fired: list[str] = []
    horizon = 1

    def pin(nid: str, t) -> None:
        if t is None:
            return
        t = int(t)
        if times.setdefault(nid, t) != t:
            raise TranscriptionError(f"{nid} placed at both t{times[nid]} and t{t}")

    def set_thr(nid: str, k: int) -> None:
        if thresholds.setdefault(nid, k) != k:
            raise TranscriptionError(f"conflicting thresholds for {nid}")

    for sent in sentences(prompt.body + " " + prompt.question):
        if sent.startswith("Suppose time t1"):
            horizon = max(int(t) for t in re.findall(r"time t(\d+)", sent))
        elif m := _SCEN.match(sent):
            if m.group(1) != "no neuron":
                fired = _split_ids(m.group(1))
                for r in fired:
                    pin(r, 1)
        elif m := _NOT.match(sent):
            src, ts, tgt, tt = m.groups()
            pin(src, ts)
            pin(tgt, tt)
            edges.add(Edge(src, tgt, Kind.INHIB))
        elif m := _COND.match(sent):
            src, ts, joint, tt, rest = m.groups()
            pin(src, ts)
            targets = _split_ids(joint)
            for tgt in targets:
                pin(tgt, tt)
                edges.add(Edge(src, tgt, Kind.STIM))
            k = 1
            if e := _EITHER.search(rest):
                o1, t1, o2, t2, tall = e.groups()
                pin(o1, t1 or tall)
                pin(o2, t2 or tall)
                k = 2
                rest = rest.replace(e.group(0), "")
            elif e := _ALSO_ONE.search(rest):
                pin(e.group(1), e.group(2))
                k = 2
                rest = rest.replace(e.group(0), "")
            elif e := _AT_LEAST.search(rest):
                k = int(e.group(1)) + 1
                for item in re.findall(rf"{_ID} at t(\d+)", e.group(2)):
                    pin(*item)
                rest = rest.replace(e.group(0), "")
            for tgt in targets:
                set_thr(tgt, k)
            if e := _AND_NOT.search(rest):
                pin(e.group(1), e.group(2))
                edges.add(Edge(src, e.group(1), Kind.INHIB))
                rest = rest.replace(e.group(0), "")
            if e := _UNLESS.search(rest):
                for inh, ti in _INHIBITOR.findall(e.group(1)):
                    pin(inh, ti or None)
                    for tgt in targets:
                        late_inhib.append((inh, tgt))
        elif m := _PIN.match(sent):
            pin(*m.groups())
        elif m := _THR.match(sent):
            set_thr(m.group(1), int(m.group(2)))
        elif m := _QUESTION.match(sent):
            query = m.group(1)
            pin(query, m.group(2))
        elif sent.startswith("What is/are the cause"):
            continue
        else:
            raise TranscriptionError(f"unrecognised sentence: {sent!r}")

    for inh, tgt in late_inhib:
        edges.add(Edge(inh, tgt, Kind.INHIB))
    unplaced = {e.source for e in edges} | {e.target for e in edges}
    unplaced -= set(times)
    if unplaced:
        raise TranscriptionError(f"no time slot for {sorted(unplaced)}")
    neurons = tuple(Neuron(n, t, thresholds.get(n, 1)) for n, t in times.items())
    return Diagram(prompt.diagram_name, horizon, neurons, tuple(edges), query), Scenario(tuple(fired))
