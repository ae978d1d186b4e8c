"""Bundled golden cases and hypothesis-listing questions.

``manifest.json`` lists all 26 causal-test diagrams with their expected
answer lines. Only the diagrams whose wiring can be read off the published
transcriptions ship a ``.nd`` file; the rest carry ``diagram: null`` and can
be completed by dropping a DSL file next to the manifest, e.g.::

    diagram 4
    times 3
    neuron A t=1
    ...
    query E

``hd_questions.json`` holds the ten physics questions, their reference
answers and the hypotheses each needs, with keyword rubrics.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources

from ..causes import CauseReport, find_causes
from ..dsl import parse_diagram
from ..model import EVENT_RE, Diagram, Event, Scenario

STRUCTURE_UNAVAILABLE = "requires Paul & Hall figures"


class CorpusError(RuntimeError):
    pass


@dataclass(frozen=True)
class RecordedAnswer:
    model: str
    response_text: str | None
    grade: str | None = None
    structured: dict | None = None
    note: str | None = None


@dataclass(frozen=True)
class CorpusEntry:
    id: str
    answer: str
    expected_occurs: bool
    expected_causes: tuple[Event, ...]
    causes_complete: bool
    diagram: tuple[Diagram, Scenario] | None = None
    source: str | None = None
    transcription: str | None = None
    recorded_answers: tuple[RecordedAnswer, ...] = ()

    @property
    def executable(self) -> bool:
        return self.diagram is not None

    @property
    def expected_verdict(self) -> str:
        return "occurs" if self.expected_occurs else "does not occur"


@dataclass(frozen=True)
class Hypothesis:
    label: str
    statement: str
    rubric: tuple[tuple[str, ...], ...]


@dataclass(frozen=True)
class HDQuestion:
    id: str
    question: str
    reference_answer: str
    hypotheses: tuple[Hypothesis, ...]
    recorded_answers: tuple[dict, ...] = field(default_factory=tuple)


def parse_answer(text: str) -> tuple[bool, tuple[Event, ...], bool]:
    """Split an answer line such as ``Yes. C+(t1); D+(t2)`` into
    (occurs, listed causes, complete)."""
    head = text.strip().split(None, 1)[0].rstrip(".").lower()
    if head not in ("yes", "no"):
        raise ValueError(f"answer must start with Yes/No: {text!r}")
    events = tuple(
        Event.parse(m.group(0)) for m in re.finditer(EVENT_RE.pattern.rstrip(r"\Z"), text)
    )
    complete = not re.search(r"\betc\b|and effects", text)
    return head == "yes", events, complete


def _data(name: str):
    return resources.files(__package__).joinpath(name)


def load_diagram_file(name: str) -> tuple[Diagram, Scenario]:
    return parse_diagram(_data("diagrams").joinpath(name).read_text(encoding="utf-8"))


def _entries() -> list[CorpusEntry]:
    raw = json.loads(_data("manifest.json").read_text(encoding="utf-8"))["causal"]
    by_id = {r["id"]: r for r in raw}
    out = []
    for r in raw:
        base = by_id[r["alias_of"]] if "alias_of" in r else r
        occurs, causes, complete = parse_answer(base["answer"])
        recorded = tuple(
            RecordedAnswer(
                model=a["model"],
                response_text=a.get("response_text"),
                grade=a.get("grade"),
                structured=a.get("structured"),
                note=a.get("note"),
            )
            for a in base.get("recorded_answers", ())
        )
        out.append(
            CorpusEntry(
                id=r["id"],
                answer=base["answer"],
                expected_occurs=occurs,
                expected_causes=causes,
                causes_complete=complete,
                diagram=load_diagram_file(base["diagram"]) if base.get("diagram") else None,
                source=base.get("source"),
                transcription=base.get("transcription"),
                recorded_answers=recorded,
            )
        )
    return out


def _questions() -> list[HDQuestion]:
    raw = json.loads(_data("hd_questions.json").read_text(encoding="utf-8"))["questions"]
    out = []
    for q in raw:
        hyps = tuple(
            Hypothesis(h["label"], h["statement"], tuple(tuple(g) for g in h["rubric"]))
            for h in q["hypotheses"]
        )
        for h in hyps:
            if not h.rubric or not all(h.rubric):
                raise CorpusError(f"{q['id']} {h.label}: empty rubric group")
        out.append(
            HDQuestion(q["id"], q["question"], q["reference_answer"], hyps, tuple(q.get("recorded_answers", ())))
        )
    return out


@dataclass(frozen=True)
class GoldenResult:
    entry: CorpusEntry
    report: CauseReport
    verdict_ok: bool
    causes_ok: bool
    missing: frozenset[Event]
    extra: frozenset[Event]

    @property
    def ok(self) -> bool:
        return self.verdict_ok and self.causes_ok


def check_entry(entry: CorpusEntry) -> GoldenResult:
    """Run the engine on an executable entry and compare with the expected answer.

    Complete answers must match exactly; answers ending in "etc." only need
    to be covered. Neurons drawn unlabelled in the source figure are left out
    of the comparison.
    """
    if entry.diagram is None:
        raise CorpusError(f"entry {entry.id}: {STRUCTURE_UNAVAILABLE}")
    d, s = entry.diagram
    report = find_causes(d, s)
    got = report.listed_causes()
    want = frozenset(entry.expected_causes)
    missing = want - got
    extra = got - want
    causes_ok = not missing and (not extra or not entry.causes_complete)
    return GoldenResult(entry, report, report.occurs == entry.expected_occurs, causes_ok, missing, extra)


def self_check(entries: list[CorpusEntry]) -> list[GoldenResult]:
    return [check_entry(e) for e in entries if e.executable]


def load_corpus(check: bool = True) -> tuple[list[CorpusEntry], list[HDQuestion]]:
    entries, questions = _entries(), _questions()
    if check:
        bad = [r for r in self_check(entries) if not r.ok]
        if bad:
            r = bad[0]
            raise CorpusError(
                f"golden entry {r.entry.id} diverges: expected {r.entry.answer!r}, "
                f"engine says {r.report.answer_line()!r}"
            )
    return entries, questions


def entry_by_id(entries: list[CorpusEntry], id_: str) -> CorpusEntry:
    for e in entries:
        if e.id == id_:
            return e
    raise KeyError(id_)


def data_path(name: str):
    """Filesystem path of a bundled data file (for the CLI and examples)."""
    return _data(name)
