"""Command-line driver: load lexicons, run sentences, print reports and traces.

Exit codes: 0 complete parse, 1 incomplete parse (an open mandatory slot at
quiescence), 2 usage or lexicon errors, 3 step-limit halt.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .cost import CostModel
from .engine import (
    EngineConfig,
    RunResult,
    render_solution,
    run,
    total_cost,
)
from .lexicon import (
    Lexicon,
    LexiconError,
    load,
    load_core,
    molecules_for_sentence,
)
from .terms import App, Const, Lam, app_spine, lam_spine, normalize, term_to_text


class NoAnswerError(Exception):
    pass


@dataclass
class RunReport:
    tokens: list
    segmentation: list
    solution: str
    raw_term: str
    control_term: str
    type_string: str
    cost: str
    steps: int
    halt: str
    exit_code: int
    trace_lines: list
    configurations: list


# --------------------------------------------------------------------------
# Control-applied reading


def control_applied(t, lex: Lexicon):
    """Resolve residual control applications: wherever a constant's sentential
    argument is still a function, apply it to the constant's control-source
    arguments (one application per declared control source)."""
    if isinstance(t, Lam):
        return Lam(t.var, t.var_type, control_applied(t.body, lex))
    if not isinstance(t, App):
        return t
    head, args, records = app_spine(t)
    args = [control_applied(a, lex) for a in args]
    if isinstance(head, Const):
        entry = lex.entry_for_constant(head.name)
        if entry is not None and entry.control_sources:
            for slot, sources in sorted(entry.control_sources.items()):
                if slot >= len(args):
                    continue
                arg = args[slot]
                for src in sources:
                    if isinstance(arg, Lam) and src < len(args):
                        arg = normalize(App(arg, args[src]))
                args[slot] = arg
    out = head
    for a, r in zip(args, records):
        out = App(out, a, r)
    return out


# --------------------------------------------------------------------------
# Reports


def _final_terms(result: RunResult, lex: Lexicon):
    tops = result.solution.top_molecules()
    if not tops:
        return None, None, ""
    if len(tops) == 1:
        mol = tops[0]
        raw = mol.term()
        return raw, control_applied(raw, lex), mol.type_string()
    raws = [m.term() for m in tops]
    raw_text = "; ".join(term_to_text(t) for t in raws)
    ctl_text = "; ".join(term_to_text(control_applied(t, lex)) for t in raws)
    types = "; ".join(m.type_string() for m in tops)
    return raw_text, ctl_text, types


def run_sentence(sentence: str, lex: Lexicon,
                 cfg: EngineConfig | None = None) -> tuple:
    """Parse one sentence; returns (RunResult, RunReport)."""
    cfg = cfg or EngineConfig()
    tokens, segmentation, molecules = molecules_for_sentence(sentence, lex)
    result = run(molecules, cfg)
    raw, ctl, type_string = _final_terms(result, lex)
    raw_text = raw if isinstance(raw, str) else (term_to_text(raw) if raw else "")
    ctl_text = ctl if isinstance(ctl, str) else (term_to_text(ctl) if ctl else "")
    exit_code = {"quiescent": 0, "incomplete-mandatory-slot": 1,
                 "step-limit": 3}[result.halt_reason]
    report = RunReport(
        tokens=tokens,
        segmentation=segmentation,
        solution=render_solution(result.solution),
        raw_term=raw_text,
        control_term=ctl_text,
        type_string=type_string,
        cost=str(total_cost(result.solution)),
        steps=result.steps,
        halt=result.halt_reason,
        exit_code=exit_code,
        trace_lines=[ev.line() for ev in result.events],
        configurations=result.configurations,
    )
    return result, report


def format_report(report: RunReport, trace: str = "off",
                  fmt: str = "text", result: RunResult | None = None) -> str:
    lines = []
    if trace == "events" and result is not None:
        for ev in result.events:
            lines.append(ev.line() if fmt == "text" else ev.record_line())
    elif trace == "fig4":
        lines.extend(report.configurations)
    seg = " | ".join(" ".join(morphs) for morphs in report.segmentation)
    if fmt == "records":
        lines.append(f"report tokens={' '.join(report.tokens)}")
        lines.append(f"report segmentation={seg}")
        lines.append(f"report solution={report.solution}")
        lines.append(f"report raw={report.raw_term} : {report.type_string}")
        lines.append(f"report control-applied={report.control_term} : {report.type_string}")
        lines.append(f"report cost={report.cost}")
        lines.append(f"report steps={report.steps}")
        lines.append(f"report halt={report.halt}")
    else:
        lines.append(f"tokens: {' '.join(report.tokens)}")
        lines.append(f"segmentation: {seg}")
        lines.append(f"solution: {report.solution}")
        lines.append(f"raw: {report.raw_term} : {report.type_string}")
        lines.append(f"control-applied: {report.control_term} : {report.type_string}")
        lines.append(f"cost: {report.cost}")
        lines.append(f"steps: {report.steps}")
        lines.append(f"halt: {report.halt}")
    return "\n".join(lines)


# --------------------------------------------------------------------------
# Question answering over the final reading


def answer_agent(sentence: str, lex: Lexicon,
                 cfg: EngineConfig | None = None) -> str:
    """Surface form of the main verb's agent in the control-applied reading."""
    result, report = run_sentence(sentence, lex, cfg)
    if report.exit_code != 0:
        raise NoAnswerError(f"no answer: parse halted {report.halt}")
    root_consts = {}
    for entry in lex.verb_roots():
        _, sem_body = lam_spine(entry.sem)
        head, _, _ = app_spine(sem_body)
        if isinstance(head, Const):
            root_consts[head.name] = entry
    tops = result.solution.top_molecules()
    if len(tops) != 1:
        raise NoAnswerError("no answer: no single sentence molecule")
    term = control_applied(tops[0].term(), lex)

    found = []

    def walk(t):
        if isinstance(t, Lam):
            walk(t.body)
            return
        if isinstance(t, App):
            head, args, _ = app_spine(t)
            if isinstance(head, Const) and head.name in root_consts:
                entry = root_consts[head.name]
                for i, arg_fs in enumerate(entry.dag.args):
                    if arg_fs.atom("role") == "agent" and i < len(args):
                        found.append(args[i])
            for a in args:
                walk(a)

    walk(term)
    if not found:
        raise NoAnswerError("no answer: main verb not found in the reading")
    agent = found[0]
    if not isinstance(agent, Const):
        raise NoAnswerError("no answer: agent is unfilled")
    surface = lex.surface_for_constant(agent.name)
    if surface is None:
        raise NoAnswerError(f"no answer: unknown constant {agent.name}")
    return surface


# --------------------------------------------------------------------------
# Entry point


def _resolve_lexicon_path(spec: str) -> str:
    p = Path(spec)
    if p.exists():
        return p.read_text()
    packaged = Path(__file__).parent / "lexicon" / p.name
    if packaged.exists():
        return packaged.read_text()
    raise LexiconError(f"lexicon file not found: {spec}")


def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="champarse",
        description="Assemble sentences from lexical molecules reacting in membranes.")
    ap.add_argument("--lexicon", action="append", default=None, metavar="PATH",
                    help="lexicon file (repeatable; default: bundled core lexicon)")
    ap.add_argument("--k", default="2", metavar="RATIONAL",
                    help="marked-binding cost constant k > 1 (default 2)")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-steps", type=int, default=10000)
    ap.add_argument("--trace", choices=["off", "events", "fig4"], default="off")
    ap.add_argument("--format", choices=["text", "records"], default="text",
                    dest="fmt")
    ap.add_argument("sentence", nargs="?", default=None,
                    help="sentence to parse (reads stdin lines when omitted)")
    return ap


def main(argv=None) -> int:
    ap = build_arg_parser()
    args = ap.parse_args(argv)
    try:
        k = Fraction(args.k)
        cfg = EngineConfig(model=CostModel(k=k), seed=args.seed,
                           max_steps=args.max_steps, trace=args.trace)
    except (ValueError, ZeroDivisionError) as exc:
        print(f"error: bad configuration: {exc}", file=sys.stderr)
        return 2
    try:
        if args.lexicon:
            lex = Lexicon()
            for spec in args.lexicon:
                lex.update(load(_resolve_lexicon_path(spec), spec))
        else:
            lex = load_core()
    except LexiconError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    sentences = []
    if args.sentence is not None:
        sentences.append(args.sentence)
    else:
        sentences.extend(line.strip() for line in sys.stdin if line.strip())

    worst = 0
    for sentence in sentences:
        try:
            result, report = run_sentence(sentence, lex, cfg)
        except LexiconError as exc:
            print(f"error: {exc}", file=sys.stderr)
            worst = max(worst, 2)
            continue
        print(format_report(report, trace=args.trace, fmt=args.fmt,
                            result=result))
        worst = max(worst, report.exit_code)
    return worst


if __name__ == "__main__":
    raise SystemExit(main())
