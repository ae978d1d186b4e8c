import json

import pytest

from neurocause import Event, find_causes
from neurocause.corpus import data_path, entry_by_id
from neurocause.generator import generate, sweep_params
from neurocause.harness import (
    NOT_OCCURS,
    OCCURS,
    Catalogue,
    ExtractionEmpty,
    Grade,
    GradingError,
    ModelAnswer,
    Source,
    calibration_check,
    extract_answer,
    grade_causal,
    grade_hd,
    read_jsonl,
    run_batch,
)
from neurocause.model import to_machine

E = Event.parse


@pytest.fixture(scope="module")
def catalogue(corpus):
    return Catalogue.from_corpus(*corpus)


def ref_for(corpus, id_):
    e = entry_by_id(corpus[0], id_)
    return e, find_causes(*e.diagram)


def answer(id_, verdict, *toks):
    return ModelAnswer.structured(id_, verdict, toks)


def test_grade_diagram1_correct(corpus):
    _, ref = ref_for(corpus, "1")
    g = grade_causal(ref, answer("1", "occurs", "D+(t2)", "C+(t1)"))
    assert g.grade is Grade.CORRECT and g.verdict_match


def test_grade_diagram2_partly_for_spurious(corpus):
    _, ref = ref_for(corpus, "2")
    g = grade_causal(ref, answer("2", "occurs", "C+(t1)", "A+(t1)", "D+(t2)", "B-(t2)"))
    assert g.grade is Grade.PARTLY_CORRECT
    assert g.causes_spurious == {E("A+(t1)")}


def test_grade_wrong_verdict_incorrect(corpus):
    _, ref = ref_for(corpus, "5")
    g = grade_causal(ref, answer("5", "does not occur", "A+(t1)", "D+(t2)", "F-(t3)"))
    assert g.grade is Grade.INCORRECT and not g.verdict_match


def test_grade_no_overlap_incorrect(corpus):
    _, ref = ref_for(corpus, "1")
    assert grade_causal(ref, answer("1", "occurs", "A+(t1)")).grade is Grade.INCORRECT
    assert grade_causal(ref, answer("1", "occurs")).grade is Grade.INCORRECT


def test_grade_missing_cause_partly(corpus):
    _, ref = ref_for(corpus, "1")
    g = grade_causal(ref, answer("1", "occurs", "C+(t1)"))
    assert g.grade is Grade.PARTLY_CORRECT and g.causes_missed == {E("D+(t2)")}


def test_absent_verdict_is_incorrect(corpus):
    _, ref = ref_for(corpus, "1")
    assert grade_causal(ref, answer("1", None, "C+(t1)", "D+(t2)")).grade is Grade.INCORRECT


def test_truncated_reference_accepts_extra_true_causes(corpus):
    e, ref = ref_for(corpus, "18")
    listed = [x.render() for x in e.expected_causes]
    g = grade_causal(ref, answer("18", "occurs", *listed, "E+(t3)"), required=e.expected_causes)
    assert g.grade is Grade.CORRECT
    g = grade_causal(ref, answer("18", "occurs", *listed, "F+(t1)"), required=e.expected_causes)
    assert g.grade is Grade.PARTLY_CORRECT and g.causes_spurious == {E("F+(t1)")}


def test_grade_rejects_id_mismatch(corpus):
    _, ref = ref_for(corpus, "1")
    with pytest.raises(GradingError):
        grade_causal(ref, answer("2", "occurs"), diagram_id="1")


def test_grade_report_invariants(corpus):
    e, ref = ref_for(corpus, "10")
    for toks in [(), ("A+(t1)",), ("A+(t1)", "D-(t2)"), ("B+(t2)", "F+(t2)", "A+(t1)", "C+(t1)")]:
        g = grade_causal(ref, answer("10", "occurs", *toks))
        assert g.causes_hit | g.causes_missed == ref.listed_causes()
        assert not g.causes_hit & g.causes_spurious


def test_unknown_verdict_string():
    with pytest.raises(GradingError):
        answer("1", "maybe")


def test_extract_row1(corpus):
    e = entry_by_id(corpus[0], "1")
    ans = extract_answer(e.recorded_answers[0].response_text, e.diagram[0], "1")
    assert ans.verdict == OCCURS
    assert ans.causes == {E("D+(t2)"), E("C+(t1)")}
    assert ans.source is Source.EXTRACTED and ans.raw_text


def test_extract_row18_verdict(corpus):
    e = entry_by_id(corpus[0], "18")
    ans = extract_answer(e.recorded_answers[0].response_text, e.diagram[0], "18")
    assert ans.verdict == NOT_OCCURS


def test_extract_empty():
    d = generate(sweep_params(0))[0]
    with pytest.raises(ExtractionEmpty):
        extract_answer("", d)
    with pytest.raises(ExtractionEmpty):
        extract_answer("No idea, sorry.", d)


def test_extract_drops_unknown_events(corpus, caplog):
    e = entry_by_id(corpus[0], "1")
    ans = extract_answer("E does occur at t3 because of Z+(t1) and C+(t2) and the non-occurrence of B at t2.", e.diagram[0])
    assert ans.causes == {E("B-(t2)")}
    assert "dropping" in caplog.text


def test_extraction_soundness_on_generated(generated):
    text = "A1+(t1) B2-(t2) A3 occurring at t3, caused by C2; Q9+(t1). A4 does not occur."
    for d, _ in generated[:200]:
        try:
            ans = extract_answer(text, d)
        except ExtractionEmpty:
            continue
        for ev in ans.causes:
            assert ev.neuron in d.by_id and d.time(ev.neuron) == ev.time


def test_hd_q5_full_coverage(corpus):
    q = {q.id: q for q in corpus[1]}["Q5"]
    text = next(a["response_text"] for a in q.recorded_answers if a["kind"] == "answer")
    r = grade_hd(q, text)
    assert r.coverage == 1.0 and r.answer_verdict is None


def test_hd_q2_misses_h3_to_h5(corpus):
    q = {q.id: q for q in corpus[1]}["Q2"]
    text = next(a["response_text"] for a in q.recorded_answers if a["kind"] == "answer")
    assert grade_hd(q, text).uncovered() == ["H3", "H4", "H5"]


def test_hd_reference_material_covers_everything(corpus):
    for q in corpus[1]:
        text = q.reference_answer + " " + " ".join(h.statement for h in q.hypotheses)
        assert grade_hd(q, text).coverage == 1.0, q.id


def test_hd_tokens_match_word_prefixes(corpus):
    q = {q.id: q for q in corpus[1]}["Q5"]
    assert grade_hd(q, "HEATING the RESISTANCE will INCREASE it").covered["H3"]
    assert not grade_hd(q, "preheat the irresistible increase").covered["H3"]


def test_empty_batch(catalogue):
    r = run_batch([], catalogue)
    assert r.records == () and r.grade_counts == {"CORRECT": 0, "PARTLY_CORRECT": 0, "INCORRECT": 0}


def test_calibration(catalogue):
    recs = read_jsonl(data_path("structured_answers.jsonl").read_text().splitlines())
    assert calibration_check(catalogue, recs) == {}
    got = {r.id: r.report.grade for r in run_batch(recs, catalogue).records}
    assert got == {"1": Grade.CORRECT, "2": Grade.PARTLY_CORRECT, "5": Grade.INCORRECT, "10": Grade.CORRECT, "18": Grade.INCORRECT}


def test_calibration_detects_drift(catalogue):
    recs = read_jsonl(data_path("structured_answers.jsonl").read_text().splitlines())
    recs[0] = {"id": "1", "kind": "causal", "structured": {"verdict": "occurs", "causes": ["C+(t1)"]}}
    assert calibration_check(catalogue, recs)["1"] == (Grade.PARTLY_CORRECT, Grade.CORRECT)


def test_batch_errors_are_recorded(catalogue):
    lines = [
        '{"id": "4", "kind": "causal", "structured": {"verdict": "occurs", "causes": []}}',
        '{"id": "Q99", "kind": "hd", "response_text": "x"}',
        "{not json",
        '{"kind": "causal"}',
        '{"id": "1", "kind": "causal"}',
        '{"id": "1", "kind": "causal", "structured": {"verdict": "occurs", "causes": ["C+(t1)", "D+(t2)"]}}',
    ]
    r = run_batch(read_jsonl(lines), catalogue)
    assert [bool(x.error) for x in r.records] == [True, True, True, True, True, False]
    assert sum(r.grade_counts.values()) == 1


def test_batch_with_inline_diagrams_self_grades(catalogue):
    recs = []
    for i in range(100):
        d, s = generate(sweep_params(i))
        rep = find_causes(d, s)
        recs.append(
            {
                "id": d.name,
                "kind": "causal",
                "diagram": to_machine(d, s),
                "structured": {"verdict": rep.verdict, "causes": [e.render() for e in rep.listed_causes()]},
            }
        )
    r = run_batch(recs, catalogue)
    assert r.grade_counts["CORRECT"] == 100
    assert sum(sum(row.values()) for row in r.by_bucket().values()) == 100
    assert all(0 <= v <= 1 for v in r.correct_rate_by_bucket().values())


def test_batch_report_is_deterministic(catalogue):
    lines = data_path("recorded_responses.jsonl").read_text().splitlines()
    a = json.dumps(run_batch(read_jsonl(lines), catalogue).to_machine())
    b = json.dumps(run_batch(read_jsonl(lines), catalogue).to_machine())
    assert a == b
