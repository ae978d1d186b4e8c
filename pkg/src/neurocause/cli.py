"""Command-line entry point: ``neurocause <command> ...``.

Diagram arguments are DSL files (``.nd``), machine-format JSON files, or
``corpus:<id>`` for a bundled golden case.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .causes import find_causes
from .corpus import STRUCTURE_UNAVAILABLE, CorpusError, data_path, entry_by_id, load_corpus, self_check
from .dsl import DiagramSyntaxError, format_diagram, parse_diagram
from .generator import GenParams, complexity, generate
from .harness import Catalogue, calibration_check, read_jsonl, run_batch
from .model import Diagram, DiagramError, Scenario, errors, from_machine, to_machine, validate
from .simulator import simulate
from .transcriber import HYP_PROMPT, transcribe

log = logging.getLogger("neurocause")

EXIT_OK, EXIT_ERROR, EXIT_CALIBRATION = 0, 1, 2


class CliError(RuntimeError):
    pass


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)


def load_any(ref: str) -> tuple[Diagram, Scenario]:
    if ref.startswith("corpus:"):
        entries, _ = load_corpus(check=False)
        try:
            e = entry_by_id(entries, ref.split(":", 1)[1])
        except KeyError:
            raise CliError(f"no corpus entry {ref}") from None
        if e.diagram is None:
            raise CliError(f"{ref}: {STRUCTURE_UNAVAILABLE}")
        return e.diagram
    path = Path(ref)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        return from_machine(json.loads(text))
    return parse_diagram(text)


# -- commands -------------------------------------------------------------------------


def cmd_validate(args) -> int:
    try:
        d, s = load_any(args.diagram)
        found = validate(d, s)
    except DiagramError as exc:
        found = list(exc.violations)
    if args.format == "machine":
        print(_dump([{"code": v.code, "element": v.element, "severity": v.severity, "message": v.message} for v in found]))
    else:
        for v in found:
            print(f"{v.severity}\t{v.code}\t{v.element}\t{v.message}")
        if not found:
            print("ok")
    return EXIT_ERROR if errors(found) else EXIT_OK


def cmd_simulate(args) -> int:
    d, s = load_any(args.diagram)
    if args.fire is not None:
        s = Scenario(tuple(x for x in args.fire.split(",") if x))
        if errors(validate(d, s)):
            raise CliError("; ".join(v.message for v in errors(validate(d, s))))
    trace = simulate(d, s)
    if args.format == "machine":
        print(_dump(trace.to_machine()))
    else:
        print(" ".join(trace.tokens(d)))
    return EXIT_OK


def cmd_causes(args) -> int:
    d, s = load_any(args.diagram)
    report = find_causes(d, s)
    if args.format == "machine":
        print(_dump(report.to_machine()))
    else:
        print(report.answer_line())
    return EXIT_OK


def cmd_transcribe(args) -> int:
    d, s = load_any(args.diagram)
    prompt = transcribe(d, s)
    if args.format == "machine":
        print(_dump({"name": prompt.diagram_name, "prompt": prompt.text(args.with_hyp).rstrip("\n")}))
    else:
        sys.stdout.write(prompt.text(args.with_hyp))
    return EXIT_OK


def _gen_params(args, seed: int) -> GenParams:
    return GenParams(
        horizon=args.horizon,
        width=(args.min_width, args.max_width),
        stim_density=args.stim_density,
        inhib_prob=args.inhib_prob,
        threshold2_prob=args.threshold2_prob,
        root_fire_prob=args.root_fire_prob,
        seed=seed,
    )


def cmd_generate(args) -> int:
    base = args.gen_seed if args.gen_seed is not None else args.seed
    out_dir = Path(args.out) if args.out else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    chunks = []
    for i in range(args.count):
        d, s = generate(_gen_params(args, base + i))
        if args.format == "machine":
            doc = to_machine(d, s)
            doc["complexity"] = complexity(d).total
            text = json.dumps(doc, sort_keys=True)
        else:
            text = format_diagram(d, s)
        if out_dir:
            (out_dir / f"{d.name}.{'json' if args.format == 'machine' else 'nd'}").write_text(text + "\n")
        else:
            chunks.append(text)
    if chunks:
        print(("\n" if args.format == "machine" else "\n\n").join(c.rstrip("\n") for c in chunks))
    return EXIT_OK


def cmd_corpus_run(args) -> int:
    entries, questions = load_corpus(check=False)
    results = {r.entry.id: r for r in self_check(entries)}
    rows = []
    for e in entries:
        r = results.get(e.id)
        if r is None:
            rows.append({"id": e.id, "status": "STRUCTURE_UNAVAILABLE", "expected": e.answer})
            continue
        rows.append(
            {
                "id": e.id,
                "status": "PASS" if r.ok else "FAIL",
                "expected": e.answer,
                "engine": r.report.answer_line(),
                "extra_causes": sorted(x.render() for x in r.extra),
            }
        )
    failed = sum(1 for r in rows if r["status"] == "FAIL")
    if args.format == "machine":
        print(_dump({"entries": rows, "hd_questions": len(questions), "failed": failed}))
    else:
        for r in rows:
            print(f"{r['id']}\t{r['status']}\t{r.get('engine', STRUCTURE_UNAVAILABLE)}")
        print(f"executable={len(results)} failed={failed} hd_questions={len(questions)}")
    return EXIT_ERROR if failed else EXIT_OK


def cmd_corpus_prompt(args) -> int:
    entries, questions = load_corpus(check=False)
    qs = {q.id: q for q in questions}
    if args.id in qs:
        text = qs[args.id].question
        if args.with_hyp:
            text += "\n\n" + HYP_PROMPT
        print(text)
        return EXIT_OK
    d, s = load_any(f"corpus:{args.id}")
    sys.stdout.write(transcribe(d, s).text(args.with_hyp))
    return EXIT_OK


def _catalogue() -> Catalogue:
    entries, questions = load_corpus()
    return Catalogue.from_corpus(entries, questions)


def cmd_grade(args) -> int:
    cat = _catalogue()
    bundled = read_jsonl(data_path("structured_answers.jsonl").read_text(encoding="utf-8").splitlines())
    bad = calibration_check(cat, bundled)
    if bad:
        for k, (got, want) in bad.items():
            print(f"calibration: diagram {k} graded {got} (expected {want.value})", file=sys.stderr)
        return EXIT_CALIBRATION

    with open(args.transcripts, encoding="utf-8") as fh:
        records = read_jsonl(fh)
    report = run_batch(records, cat, args.bucket_width)
    if args.format == "machine":
        print(_dump(report.to_machine()))
    else:
        print("index\tid\tkind\tgrade\tdetail")
        for r in report.records:
            if r.error:
                print(f"{r.index}\t{r.id}\t{r.kind}\tERROR\t{r.error}")
            elif r.kind == "hd":
                print(f"{r.index}\t{r.id}\thd\tcoverage={r.report.coverage:.2f}\tuncovered={','.join(r.report.uncovered()) or '-'}")
            else:
                m = r.report
                print(
                    f"{r.index}\t{r.id}\tcausal\t{m.grade.value}\tverdict_match={m.verdict_match} "
                    f"missed={','.join(sorted(e.render() for e in m.causes_missed)) or '-'} "
                    f"spurious={','.join(sorted(e.render() for e in m.causes_spurious)) or '-'}"
                )
        print("---")
        print("\t".join(f"{k}={v}" for k, v in report.grade_counts.items()))
        for b, rate in report.correct_rate_by_bucket().items():
            print(f"bucket {b}\tcorrect_rate={rate:.2f}")
        if report.mean_coverage() is not None:
            print(f"hd_mean_coverage={report.mean_coverage():.2f}")
    if args.figures:
        from .plotting import render_report_figures

        for p in render_report_figures(report, args.figures):
            print(f"figure: {p}", file=sys.stderr)
    return EXIT_ERROR if report.errors else EXIT_OK


# -- parser ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="neurocause", description=__doc__.splitlines()[0])
    p.add_argument("--format", choices=("text", "machine"), default="text")
    p.add_argument("--seed", type=int, default=0, help="default seed for commands that generate")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    for name, fn, helptext in (
        ("validate", cmd_validate, "check a diagram for structural errors"),
        ("simulate", cmd_simulate, "print the factual trace"),
        ("causes", cmd_causes, "print the answer line for the query neuron"),
        ("transcribe", cmd_transcribe, "render the diagram as an English prompt"),
    ):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("diagram")
        sp.set_defaults(func=fn)
        if name == "simulate":
            sp.add_argument("--fire", help="comma-separated roots that fire (overrides the file)")
        if name == "transcribe":
            sp.add_argument("--with-hyp", action="store_true", help="append the hypothesis-listing follow-up")

    g = sub.add_parser("generate", help="emit seeded random diagrams")
    g.add_argument("--seed", dest="gen_seed", type=int, default=None)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--horizon", type=int, default=4)
    g.add_argument("--min-width", type=int, default=1)
    g.add_argument("--max-width", type=int, default=3)
    g.add_argument("--stim-density", type=float, default=0.6)
    g.add_argument("--inhib-prob", type=float, default=0.2)
    g.add_argument("--threshold2-prob", type=float, default=0.3)
    g.add_argument("--root-fire-prob", type=float, default=0.6)
    g.add_argument("--out", help="write one file per diagram into this directory")
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("corpus", help="bundled golden cases")
    csub = c.add_subparsers(dest="corpus_command", required=True)
    cr = csub.add_parser("run", help="check every executable entry against its expected answer")
    cr.set_defaults(func=cmd_corpus_run)
    cp = csub.add_parser("prompt", help="print the prompt for a diagram or HD question id")
    cp.add_argument("id")
    cp.add_argument("--with-hyp", action="store_true")
    cp.set_defaults(func=cmd_corpus_prompt)

    gr = sub.add_parser("grade", help="grade a JSONL transcript file")
    gr.add_argument("transcripts")
    gr.add_argument("--bucket-width", type=int, default=10)
    gr.add_argument("--figures", metavar="DIR", help="also write report figures here")
    gr.set_defaults(func=cmd_grade)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (CliError, CorpusError, DiagramSyntaxError, DiagramError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
