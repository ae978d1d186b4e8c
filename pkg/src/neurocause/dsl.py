"""Line-oriented text format for neuron diagrams.

Grammar (``#`` starts a comment, blank lines are ignored)::

    diagram <name>
    times <T>
    neuron <ID> t=<k> [threshold=<n>]
    stim <SRC> -> <DST>
    inhib <SRC> -| <DST>
    fire <ID> [<ID> ...]        # repeatable
    query <ID>
    unlabelled <ID> [<ID> ...]  # optional, repeatable

Example (Fig. 1 of Paul & Hall)::

    diagram fig1
    times 3
    neuron A t=1
    neuron C t=1
    neuron B t=2
    neuron D t=2
    neuron E t=3
    stim A -> B
    stim B -> E
    inhib C -| B
    stim C -> D
    stim D -> E
    fire C A
    query E
"""

from __future__ import annotations

import logging
import re

from .model import (
    ID_RE,
    Diagram,
    DiagramError,
    Edge,
    Kind,
    Neuron,
    Scenario,
    Violation,
    errors,
    validate,
)

log = logging.getLogger(__name__)

_TOKEN = re.compile(r"\S+")


class DiagramSyntaxError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        self.line, self.col = line, col
        super().__init__(f"line {line}, column {col}: {msg}")


def _tokens(line: str) -> list[tuple[str, int]]:
    return [(m.group(), m.start() + 1) for m in _TOKEN.finditer(line)]


def _ident(tok: str, col: int, lineno: int) -> str:
    if not ID_RE.match(tok):
        raise DiagramSyntaxError(f"bad neuron id {tok!r}", lineno, col)
    return tok


def _int_field(tok: str, key: str, lineno: int, col: int) -> int:
    prefix = key + "="
    if not tok.startswith(prefix) or not tok[len(prefix):].isdigit():
        raise DiagramSyntaxError(f"expected {key}=<integer>, got {tok!r}", lineno, col)
    return int(tok[len(prefix):])


def parse_diagram(text: str) -> tuple[Diagram, Scenario]:
    """Parse DSL source into a validated ``(Diagram, Scenario)`` pair.

    Raises ``DiagramSyntaxError`` for malformed lines and ``DiagramError``
    when the parsed structure breaks a diagram rule (undeclared neuron,
    duplicate declaration, non-adjacent stimulation, ...). Warnings are
    logged, not raised.
    """
    name = horizon = query = None
    neurons: list[Neuron] = []
    edges: list[Edge] = []
    fired: list[str] = []
    unlabelled: list[str] = []
    declared: dict[str, int] = {}
    referenced: list[tuple[str, int, int]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        toks = _tokens(line)
        if not toks:
            continue
        (kw, kcol), args = toks[0], toks[1:]

        def need(n):
            if len(args) != n:
                col = args[n][1] if len(args) > n else len(line.rstrip()) + 1
                raise DiagramSyntaxError(f"'{kw}' takes {n} argument(s), got {len(args)}", lineno, col)

        if kw == "diagram":
            if not args:
                raise DiagramSyntaxError("'diagram' needs a name", lineno, len(line.rstrip()) + 1)
            if name is not None:
                raise DiagramSyntaxError("duplicate 'diagram' line", lineno, kcol)
            name = line[args[0][1] - 1:].strip()
        elif kw == "times":
            need(1)
            if not args[0][0].isdigit() or int(args[0][0]) < 1:
                raise DiagramSyntaxError(f"expected a positive integer, got {args[0][0]!r}", lineno, args[0][1])
            if horizon is not None:
                raise DiagramSyntaxError("duplicate 'times' line", lineno, kcol)
            horizon = int(args[0][0])
        elif kw == "neuron":
            if len(args) not in (2, 3):
                raise DiagramSyntaxError("usage: neuron <ID> t=<k> [threshold=<n>]", lineno, kcol)
            nid = _ident(*args[0], lineno)
            t = _int_field(args[1][0], "t", lineno, args[1][1])
            thr = _int_field(args[2][0], "threshold", lineno, args[2][1]) if len(args) == 3 else 1
            if nid in declared:
                raise DiagramError(
                    [Violation("DUPLICATE_ID", nid, f"line {lineno}: neuron {nid} already declared on line {declared[nid]}")]
                )
            declared[nid] = lineno
            neurons.append(Neuron(nid, t, thr))
        elif kw in ("stim", "inhib"):
            arrow = "->" if kw == "stim" else "-|"
            need(3)
            if args[1][0] != arrow:
                raise DiagramSyntaxError(f"expected '{arrow}', got {args[1][0]!r}", lineno, args[1][1])
            src = _ident(*args[0], lineno)
            dst = _ident(*args[2], lineno)
            referenced += [(src, lineno, args[0][1]), (dst, lineno, args[2][1])]
            edges.append(Edge(src, dst, Kind.STIM if kw == "stim" else Kind.INHIB))
        elif kw == "fire":
            if not args:
                raise DiagramSyntaxError("'fire' needs at least one neuron id", lineno, len(line.rstrip()) + 1)
            for tok, col in args:
                fired.append(_ident(tok, col, lineno))
                referenced.append((tok, lineno, col))
        elif kw == "query":
            need(1)
            if query is not None:
                raise DiagramSyntaxError("duplicate 'query' line", lineno, kcol)
            query = _ident(*args[0], lineno)
            referenced.append((query, lineno, args[0][1]))
        elif kw == "unlabelled":
            for tok, col in args:
                unlabelled.append(_ident(tok, col, lineno))
                referenced.append((tok, lineno, col))
        else:
            raise DiagramSyntaxError(f"unknown keyword {kw!r}", lineno, kcol)

    end = len(text.splitlines()) + 1
    if name is None:
        raise DiagramSyntaxError("missing 'diagram <name>' line", end, 1)
    if horizon is None:
        raise DiagramSyntaxError("missing 'times <T>' line", end, 1)
    if query is None:
        raise DiagramSyntaxError("missing 'query <ID>' line", end, 1)

    undeclared = [
        Violation("UNDECLARED_NEURON", nid, f"line {ln}, column {col}: undeclared neuron {nid}")
        for nid, ln, col in referenced
        if nid not in declared
    ]
    if undeclared:
        raise DiagramError(undeclared)

    d = Diagram(name, horizon, tuple(neurons), tuple(edges), query, frozenset(unlabelled))
    s = Scenario(tuple(fired))
    found = validate(d, s)
    bad = errors(found)
    if bad:
        raise DiagramError(bad)
    for v in found:
        log.warning("%s: %s", d.name, v)
    return d, s


def format_diagram(d: Diagram, s: Scenario) -> str:
    """Canonical DSL source; ``parse_diagram`` inverts it exactly."""
    lines = [f"diagram {d.name}", f"times {d.horizon}"]
    for n in d.neurons:
        thr = f" threshold={n.threshold}" if n.threshold != 1 else ""
        lines.append(f"neuron {n.id} t={n.time}{thr}")
    for e in d.edges:
        lines.append(f"{e.kind.value} {e}")
    if s.fired_roots:
        lines.append("fire " + " ".join(s.fired_roots))
    lines.append(f"query {d.query}")
    if d.unlabelled:
        lines.append("unlabelled " + " ".join(sorted(d.unlabelled)))
    return "\n".join(lines) + "\n"


def load(path) -> tuple[Diagram, Scenario]:
    with open(path, encoding="utf-8") as fh:
        return parse_diagram(fh.read())
