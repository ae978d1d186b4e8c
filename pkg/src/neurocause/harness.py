"""Grading of external answers against engine ground truth.

Causal answers are compared to ``find_causes`` output; hypothesis listings
are scored against per-hypothesis keyword rubrics. ``run_batch`` ingests a
JSONL transcript stream and aggregates grades, optionally per complexity
bucket.
"""

from __future__ import annotations

import json
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

from .causes import CauseReport, find_causes
from .corpus import CorpusEntry, HDQuestion
from .generator import complexity
from .model import Diagram, Event, Scenario, from_machine

log = logging.getLogger(__name__)

OCCURS = "occurs"
NOT_OCCURS = "does not occur"


class Grade(str, Enum):
    CORRECT = "CORRECT"
    PARTLY_CORRECT = "PARTLY_CORRECT"
    INCORRECT = "INCORRECT"


class Source(str, Enum):
    STRUCTURED = "STRUCTURED"
    EXTRACTED = "EXTRACTED"


class GradingError(ValueError):
    pass


class ExtractionEmpty(GradingError):
    code = "EXTRACTION_EMPTY"


def _norm_verdict(v) -> str | None:
    if v is None:
        return None
    if isinstance(v, bool):
        return OCCURS if v else NOT_OCCURS
    s = str(v).strip().lower().replace("-", " ").replace("_", " ")
    if s in ("occurs", "yes", "occur", "true"):
        return OCCURS
    if s in ("does not occur", "no", "not occurs", "false"):
        return NOT_OCCURS
    if s in ("", "absent", "none"):
        return None
    raise GradingError(f"unknown verdict {v!r}")


@dataclass(frozen=True)
class ModelAnswer:
    diagram_id: str
    verdict: str | None  # OCCURS, NOT_OCCURS or None when the answer gives none
    causes: frozenset[Event]
    source: Source = Source.STRUCTURED
    raw_text: str | None = None

    @classmethod
    def structured(cls, diagram_id: str, verdict, causes: Iterable) -> "ModelAnswer":
        evs = frozenset(c if isinstance(c, Event) else Event.parse(c) for c in causes)
        return cls(str(diagram_id), _norm_verdict(verdict), evs)

    @classmethod
    def from_report(cls, diagram_id: str, report: CauseReport) -> "ModelAnswer":
        return cls(str(diagram_id), report.verdict, report.listed_causes())


@dataclass(frozen=True)
class GradeReport:
    diagram_id: str
    grade: Grade
    verdict_match: bool
    causes_hit: frozenset[Event]
    causes_missed: frozenset[Event]
    causes_spurious: frozenset[Event]

    def to_machine(self) -> dict:
        r = lambda s: sorted(e.render() for e in s)
        return {
            "id": self.diagram_id,
            "grade": self.grade.value,
            "verdict_match": self.verdict_match,
            "causes_hit": r(self.causes_hit),
            "causes_missed": r(self.causes_missed),
            "causes_spurious": r(self.causes_spurious),
        }


def grade_causal(
    ref: CauseReport,
    ans: ModelAnswer,
    *,
    diagram_id: str | None = None,
    required: Iterable[Event] | None = None,
) -> GradeReport:
    """Grade ``ans`` against the engine's report for the same diagram.

    ``required`` is the cause list the answer must name (defaults to the
    report's labelled causes; pass the reference table's list when it is
    truncated). An answer is CORRECT when the verdict matches and its causes
    cover ``required`` without naming anything outside the engine's true
    cause set. With the verdict right and some true cause named it is
    PARTLY_CORRECT; everything else is INCORRECT.
    """
    if diagram_id is not None and str(diagram_id) != ans.diagram_id:
        raise GradingError(f"answer is for diagram {ans.diagram_id}, reference is {diagram_id}")
    need = frozenset(required) if required is not None else ref.listed_causes()
    true = ref.cause_events() | need
    got = ans.causes
    verdict_match = ans.verdict == ref.verdict
    hit, missed, spurious = got & need, need - got, got - true
    if not verdict_match:
        grade = Grade.INCORRECT
    elif not missed and not spurious:
        grade = Grade.CORRECT
    elif got & true:
        grade = Grade.PARTLY_CORRECT
    else:
        grade = Grade.INCORRECT
    return GradeReport(ans.diagram_id, grade, verdict_match, hit, missed, spurious)


# -- free-text extraction -----------------------------------------------------------

_T = r"t(\d+)"
_NEG_PATTERNS = [
    re.compile(rf"non-?occurrence of ([A-Za-z][A-Za-z0-9]*) at {_T}", re.I),
    re.compile(rf"\b([A-Z][A-Za-z0-9]*)(?:'s)? not occurring at {_T}"),
]
_POS_PATTERNS = [
    re.compile(rf"\b([A-Z][A-Za-z0-9]*) occurring at {_T}"),
    re.compile(rf"(?<!non-)(?<!non)\b(?:occurrence|presence) of ([A-Z][A-Za-z0-9]*) at {_T}"),
    re.compile(rf"\b([A-Z][A-Za-z0-9]*)'s occurrence at {_T}"),
]
_CAUSED_BY = re.compile(r"caused by ([A-Z][A-Za-z0-9]*)\b")
_TOKEN = re.compile(rf"\b([A-Za-z][A-Za-z0-9]*)([+-])\({_T}\)")


def _verdict_re(q: str) -> re.Pattern:
    neg = r"(?:does not|doesn't|will not|won't|would not|did not|cannot|can't) occur"
    pos = r"(?:does occur|occurs|will occur|would occur|fires|does fire)"
    return re.compile(rf"\b{re.escape(q)} (?:(?P<neg>{neg})|(?P<pos>{pos}))")


def extract_answer(text: str, d: Diagram, diagram_id: str | None = None) -> ModelAnswer:
    """Best-effort reading of a prose answer; raises ``ExtractionEmpty`` if nothing is found.

    The last occurrence statement about the query neuron decides the verdict.
    Events whose neuron or time does not fit the diagram are dropped.
    """
    text = text or ""
    verdict = None
    for m in _verdict_re(d.query).finditer(text):
        verdict = NOT_OCCURS if m.group("neg") else OCCURS

    found: list[tuple[str, bool, int | None]] = []
    for m in _TOKEN.finditer(text):
        found.append((m.group(1), m.group(2) == "+", int(m.group(3))))
    for pat in _NEG_PATTERNS:
        found += [(m.group(1), False, int(m.group(2))) for m in pat.finditer(text)]
    for pat in _POS_PATTERNS:
        found += [(m.group(1), True, int(m.group(2))) for m in pat.finditer(text)]
    found += [(m.group(1), True, None) for m in _CAUSED_BY.finditer(text)]

    causes = set()
    for nid, positive, t in found:
        if nid == d.query:
            continue
        if nid not in d.by_id or (t is not None and d.time(nid) != t):
            log.warning("dropping %s at t%s: not in diagram %s", nid, t, d.name)
            continue
        causes.add(Event(nid, positive, d.time(nid)))
    if verdict is None and not causes:
        raise ExtractionEmpty("EXTRACTION_EMPTY: no verdict or cause found")
    return ModelAnswer(diagram_id or d.name, verdict, frozenset(causes), Source.EXTRACTED, text)


# -- hypothesis listings --------------------------------------------------------------


def _token_hit(token: str, text: str) -> bool:
    return re.search(r"\b" + re.escape(token.lower()), text) is not None


@dataclass(frozen=True)
class HDGradeReport:
    question_id: str
    covered: Mapping[str, bool]
    answer_verdict: str | None = None  # filled in by a human reviewer

    @property
    def coverage(self) -> float:
        return sum(self.covered.values()) / len(self.covered) if self.covered else 0.0

    def uncovered(self) -> list[str]:
        return [k for k, v in self.covered.items() if not v]

    def to_machine(self) -> dict:
        return {
            "id": self.question_id,
            "covered": dict(self.covered),
            "coverage": round(self.coverage, 4),
            "answer_verdict": self.answer_verdict or "manual review",
        }


def grade_hd(q: HDQuestion, response: str) -> HDGradeReport:
    """A hypothesis counts as covered when every rubric group has a token
    starting some word of the response (case-insensitive)."""
    text = (response or "").lower()
    covered = {
        h.label: all(any(_token_hit(tok, text) for tok in group) for group in h.rubric)
        for h in q.hypotheses
    }
    return HDGradeReport(q.id, covered)


# -- batches -------------------------------------------------------------------------------


@dataclass(frozen=True)
class RecordResult:
    index: int
    id: str
    kind: str
    report: GradeReport | HDGradeReport | None = None
    error: str | None = None
    complexity: int | None = None
    bucket: str | None = None

    def to_machine(self) -> dict:
        out = {"index": self.index, "id": self.id, "kind": self.kind}
        if self.report is not None:
            out.update(self.report.to_machine())
        if self.error:
            out["error"] = self.error
        if self.complexity is not None:
            out["complexity"] = self.complexity
            out["bucket"] = self.bucket
        return out


@dataclass(frozen=True)
class BatchReport:
    records: tuple[RecordResult, ...] = ()
    bucket_width: int = 10

    @property
    def grade_counts(self) -> dict[str, int]:
        c = Counter(r.report.grade.value for r in self.records if isinstance(r.report, GradeReport))
        return {g.value: c.get(g.value, 0) for g in Grade}

    @property
    def errors(self) -> list[RecordResult]:
        return [r for r in self.records if r.error]

    def by_bucket(self) -> dict[str, dict[str, int]]:
        out: dict[str, dict[str, int]] = {}
        for r in self.records:
            if r.bucket is None or not isinstance(r.report, GradeReport):
                continue
            row = out.setdefault(r.bucket, {g.value: 0 for g in Grade})
            row[r.report.grade.value] += 1
        return dict(sorted(out.items(), key=lambda kv: int(kv[0].split("-")[0])))

    def correct_rate_by_bucket(self) -> dict[str, float]:
        return {b: row["CORRECT"] / sum(row.values()) for b, row in self.by_bucket().items()}

    def mean_coverage(self) -> float | None:
        cov = [r.report.coverage for r in self.records if isinstance(r.report, HDGradeReport)]
        return sum(cov) / len(cov) if cov else None

    def to_machine(self) -> dict:
        return {
            "records": [r.to_machine() for r in self.records],
            "grade_counts": self.grade_counts,
            "by_bucket": self.by_bucket(),
            "hd_mean_coverage": self.mean_coverage(),
            "errors": len(self.errors),
        }


@dataclass
class Catalogue:
    """Lookup for ids referenced by transcript records."""

    diagrams: dict[str, tuple[Diagram, Scenario]] = field(default_factory=dict)
    required: dict[str, frozenset[Event]] = field(default_factory=dict)
    questions: dict[str, HDQuestion] = field(default_factory=dict)

    @classmethod
    def from_corpus(cls, entries: Iterable[CorpusEntry], questions: Iterable[HDQuestion]) -> "Catalogue":
        cat = cls()
        for e in entries:
            if e.diagram is not None:
                cat.diagrams[e.id] = e.diagram
                cat.required[e.id] = frozenset(e.expected_causes)
        cat.questions = {q.id: q for q in questions}
        return cat


def _grade_record(i: int, rec: dict, cat: Catalogue, width: int, cache: dict) -> RecordResult:
    if isinstance(rec, dict) and "_malformed" in rec:
        return RecordResult(i, "?", "?", error=f"malformed record: {rec['_malformed']}")
    if not isinstance(rec, dict) or "id" not in rec:
        return RecordResult(i, "?", "?", error="malformed record: missing id")
    rid, kind = str(rec["id"]), rec.get("kind", "causal")
    if kind == "hd":
        q = cat.questions.get(rid)
        if q is None:
            return RecordResult(i, rid, kind, error=f"unknown question id {rid}")
        return RecordResult(i, rid, kind, grade_hd(q, rec.get("response_text", "")))
    if kind != "causal":
        return RecordResult(i, rid, kind, error=f"unknown record kind {kind!r}")

    if "diagram" in rec:
        d, s = from_machine(rec["diagram"])
        required = None
    elif rid in cat.diagrams:
        d, s = cat.diagrams[rid]
        required = cat.required.get(rid)
    else:
        return RecordResult(i, rid, kind, error=f"unknown diagram id {rid}")
    key = id(d)
    if key not in cache:
        cache[key] = (d, find_causes(d, s))
    ref = cache[key][1]
    try:
        if "structured" in rec:
            st = rec["structured"]
            ans = ModelAnswer.structured(rid, st.get("verdict"), st.get("causes", []))
        elif "response_text" in rec:
            ans = extract_answer(rec["response_text"], d, rid)
        else:
            return RecordResult(i, rid, kind, error="malformed record: no answer")
        report = grade_causal(ref, ans, required=required)
    except (GradingError, ValueError) as exc:
        return RecordResult(i, rid, kind, error=str(exc))
    score = complexity(d)
    return RecordResult(i, rid, kind, report, complexity=score.total, bucket=score.bucket(width))


def run_batch(records: Iterable[dict], catalogue: Catalogue, bucket_width: int = 10) -> BatchReport:
    cache: dict = {}
    out = tuple(_grade_record(i, rec, catalogue, bucket_width, cache) for i, rec in enumerate(records))
    return BatchReport(out, bucket_width)


def read_jsonl(lines: Iterable[str]) -> list[dict]:
    out = []
    for n, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            out.append(json.loads(line))
        except json.JSONDecodeError as exc:
            out.append({"_malformed": f"line {n}: {exc.msg}"})
    return out


# -- calibration -------------------------------------------------------------------------

CALIBRATION = {"1": Grade.CORRECT, "2": Grade.PARTLY_CORRECT, "5": Grade.INCORRECT, "10": Grade.CORRECT, "18": Grade.INCORRECT}


def calibration_check(catalogue: Catalogue, records: Iterable[dict]) -> dict[str, tuple[Grade | None, Grade]]:
    """Grade the structured published answers; returns the mismatches (empty when calibrated)."""
    got = {r.id: r.report.grade if r.report else None for r in run_batch(records, catalogue).records}
    return {k: (got.get(k), v) for k, v in CALIBRATION.items() if got.get(k) != v}
