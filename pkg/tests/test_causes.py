import pytest

from conftest import oracle_plain_flip
from neurocause import (
    Edge,
    Event,
    Kind,
    Role,
    analyze_paths,
    collapse_redundant,
    find_causes,
    is_cause,
    parse_diagram,
    simulate,
)
from neurocause.causes import Case, NoPathError, plain_counterfactual, role_for, simple_paths
from neurocause.corpus import load_diagram_file

E = Event.parse


@pytest.fixture(scope="module")
def fig1():
    return load_diagram_file("d01.nd")


@pytest.mark.parametrize("tok,expected", [("C+(t1)", True), ("D+(t2)", True), ("A+(t1)", False), ("B-(t2)", False)])
def test_fig1_event_verdicts(fig1, tok, expected):
    d, s = fig1
    assert is_cause(d, s, E(tok), E("E+(t3)")).is_cause is expected


def test_fig1_preempting_cause_uses_maintained_block(fig1):
    d, s = fig1
    v = is_cause(d, s, E("C+(t1)"), E("E+(t3)"))
    assert v.case_used is Case.X_ON_BIFURCATING
    assert v.maintained_blocks_used == frozenset({Edge("C", "B", Kind.INHIB)})
    # without the block the backup path through B takes over
    assert plain_counterfactual(d, s, E("C+(t1)"))["E"]


def test_cases_selected(fig1):
    d, s = fig1
    y = E("E+(t3)")
    assert is_cause(d, s, E("B-(t2)"), y).case_used is Case.X_OFF
    assert is_cause(d, s, E("A+(t1)"), y).case_used is Case.X_ON_NONBIFURCATING


@pytest.mark.parametrize("tok", ["C-(t1)", "Z+(t1)", "C+(t2)"])
def test_candidate_must_be_factual_event(fig1, tok):
    d, s = fig1
    with pytest.raises(ValueError):
        is_cause(d, s, E(tok), E("E+(t3)"))


def test_candidate_must_precede_effect(fig1):
    d, s = fig1
    with pytest.raises(ValueError):
        is_cause(d, s, E("E+(t3)"), E("E+(t3)"))


def test_collapse_fig1(fig1):
    d, s = fig1
    cd = collapse_redundant(d, simulate(d, s))
    assert dict(cd.absorbed) == {"D": "C"}
    assert Edge("C", "E", Kind.STIM) in cd.diagram.edges
    assert cd.origin[Edge("C", "E", Kind.STIM)] == Edge("D", "E", Kind.STIM)
    assert cd.image(Edge("C", "D", Kind.STIM)) is None


def test_collapse_keeps_roots_query_and_thresholds():
    d, s = load_diagram_file("d10.nd")
    cd = collapse_redundant(d, simulate(d, s))
    kept = {n.id for n in cd.diagram.neurons}
    assert {"A", "C", "E"} <= kept
    assert cd.diagram.by_id["E"].threshold == 2


def test_collapse_needs_same_state_as_parent():
    d, s = load_diagram_file("d18.nd")
    cd = collapse_redundant(d, simulate(d, s))
    # B is off while its parent A fired, so it survives
    assert "B" not in cd.absorbed


def test_collapse_chain_folds_to_first_ancestor():
    d, s = load_diagram_file("d05.nd")
    cd = collapse_redundant(d, simulate(d, s))
    assert cd.absorbed["A1"] == "A" and cd.absorbed["A2"] == "A"


def test_path_analysis_fig1(fig1):
    d, s = fig1
    fact = simulate(d, s)
    cd = collapse_redundant(d, fact)
    pa = analyze_paths(cd, E("C+(t1)"), E("E+(t3)"), fact)
    assert pa.bifurcating
    assert pa.direct_path == (Edge("C", "E", Kind.STIM),)
    assert pa.indirect_paths == ((Edge("C", "B", Kind.INHIB), Edge("B", "E", Kind.STIM)),)
    assert pa.off_path_events == frozenset({E("B-(t2)")})


def test_no_path_raises_and_falls_back():
    src = "diagram x\ntimes 2\nneuron A t=1\nneuron B t=1\nneuron E t=2\nstim A -> E\nfire A B\nquery E\n"
    d2, s2 = parse_diagram(src)
    f2 = simulate(d2, s2)
    with pytest.raises(NoPathError):
        analyze_paths(collapse_redundant(d2, f2), E("B+(t1)"), E("E+(t2)"), f2)
    assert is_cause(d2, s2, E("B+(t1)"), E("E+(t2)")).is_cause is False


def test_simple_paths_are_ordered():
    d, s = load_diagram_file("d10.nd")
    paths = simple_paths(d, "A", "E")
    assert [len(p) for p in paths] == sorted(len(p) for p in paths)
    assert [p[0].target for p in paths] == ["B", "D"]


def test_roles():
    assert role_for(1, 3) is Role.ROOT
    assert role_for(2, 3) is Role.PROXIMATE
    assert role_for(2, 4) is Role.INTERMEDIATE
    assert role_for(1, 2) is Role.ROOT


def test_answer_line_format(fig1):
    r = find_causes(*fig1)
    assert r.answer_line() == "Yes. C+(t1); D+(t2)"
    assert r.verdict == "occurs"
    assert dict(r.causes) == {E("C+(t1)"): Role.ROOT, E("D+(t2)"): Role.PROXIMATE}


def test_answer_line_negative_and_empty():
    src = "diagram x\ntimes 2\nneuron A t=1\nneuron E t=2\nstim A -> E\nquery E\n"
    assert find_causes(*parse_diagram(src)).answer_line() == "No. A-(t1)"
    src = "diagram x\ntimes 2\nneuron A t=1\nneuron B t=1\nneuron E t=2\nstim A -> E\nfire A B\nquery E\n"
    assert find_causes(*parse_diagram(src)).answer_line() == "Yes. A+(t1)"


def test_unlabelled_neurons_hidden_from_answer_line():
    d, s = load_diagram_file("d05.nd")
    r = find_causes(d, s)
    assert E("A1+(t2)") in r.cause_events()
    assert E("A1+(t2)") not in r.listed_causes()
    assert "A1" not in r.answer_line()


def test_machine_report_has_audit(fig1):
    doc = find_causes(*fig1).to_machine()
    assert doc["verdict"] == "occurs"
    assert {"event": "C+(t1)", "role": "root"} in doc["causes"]
    assert len(doc["audit"]) == 4


def test_off_and_nonbifurcating_match_oracle(golden):
    for e in golden:
        d, s = e.diagram
        r = find_causes(d, s)
        for x, v in r.verdicts.items():
            if v.case_used is not Case.X_ON_BIFURCATING:
                assert v.is_cause == oracle_plain_flip(d, s, x.neuron, d.query), (e.id, x)
