"""Neuron-diagram simulation, counterfactual cause finding and answer grading."""

from .causes import (
    CauseReport,
    CauseVerdict,
    CollapsedDiagram,
    PathAnalysis,
    analyze_paths,
    collapse_redundant,
    find_causes,
    is_cause,
)
from .dsl import DiagramSyntaxError, format_diagram, parse_diagram
from .model import (
    Diagram,
    DiagramError,
    Edge,
    Event,
    Kind,
    Neuron,
    Role,
    Scenario,
    parse_event,
    render_event,
    validate,
)
from .generator import GenParams, complexity, generate
from .harness import (
    Grade,
    GradeReport,
    HDGradeReport,
    ModelAnswer,
    extract_answer,
    grade_causal,
    grade_hd,
    run_batch,
)
from .simulator import Intervention, Trace, simulate, simulate_with
from .transcriber import Prompt, reverse_parse, transcribe

__version__ = "0.1.0"
