"""Command-line front end.

Exit codes are a stable scripting contract: 0 success (and Solvable, and
true model-checking verdicts), 2 Unsolvable (and false verdicts), 1 any
error, including argument errors.  All output is deterministic; canonical
orderings everywhere and no timestamps.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .kernel import agent_name, frame_to_dot, is_proper
from .logic import (
    FormulaParseError,
    Know,
    eval_formula,
    model_from_json,
    model_to_json,
    parse_formula,
)
from .schedules import (
    enum_schedules,
    fubini,
    input_model,
    parse_schedule,
    protocol_model,
    schedule_to_json,
)
from .simengine import format_trace, record_to_json, run
from .solver import decision_to_json, solve, solve_report
from .tasks import builtin, output_model, task_from_json, task_to_json
from .topology import complex_to_dot, complex_to_json, frame_to_complex

DEFAULT_MAX_N = 5

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNSOLVABLE = 2


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract reserves 2 for
    Unsolvable, so route everything through exit code 1."""

    def error(self, message):
        raise CliError(message)


def _check_n(args) -> None:
    if args.n < 0:
        raise CliError("--n must be >= 0")
    if args.n > DEFAULT_MAX_N and not args.max_n_override:
        estimate = fubini(args.n + 1) ** args.rounds
        raise CliError(
            f"--n {args.n} exceeds the default cap of {DEFAULT_MAX_N}; the "
            f"run would enumerate {estimate} schedules. Pass "
            "--max-n-override to proceed."
        )


def _load_task(args):
    if args.task_file:
        with open(args.task_file) as fh:
            return task_from_json(json.load(fh))
    if args.task:
        return builtin(args.task, args.n, args.rounds)
    raise CliError("supply --task or --task-file")


def _threads() -> int:
    raw = os.environ.get("EPIKIT_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        raise CliError(f"EPIKIT_THREADS must be an integer, got {raw!r}")
    if value < 1:
        raise CliError("EPIKIT_THREADS must be >= 1")
    return value


def _resolve_state(token: str, n: int, rounds: int) -> int:
    """A state is an index or, for schedule-indexed models, schedule text."""
    if token.isdigit():
        return int(token)
    target = parse_schedule(token)
    for k, sched in enumerate(enum_schedules(n, rounds)):
        if sched == target:
            return k
    raise CliError(f"schedule {token!r} is not a state of this model")


def _build_model(args):
    kind = args.kind
    if kind == "input":
        return input_model(args.n, args.rounds)
    if kind == "protocol":
        return protocol_model(args.n, args.rounds)
    if kind == "output":
        task = _load_task(args)
        model, _ = output_model(task, args.n, args.rounds)
        return model
    raise CliError(f"unknown model kind {kind!r}")


def _build_complex(args):
    if args.kind == "protocol":
        frame = protocol_model(args.n, args.rounds).frame
        labels = [s.text() for s in enum_schedules(args.n, args.rounds)]
    elif args.kind == "output":
        task = _load_task(args)
        frame = task.output.frame
        labels = [
            "(" + ",".join(str(v) for v in t) + ")" for t in task.output.tuples
        ]
    else:
        raise CliError(f"unknown complex kind {args.kind!r}")
    if not is_proper(frame):
        raise CliError("frame is not proper; it has no dual complex")
    complex_, _ = frame_to_complex(frame)
    return complex_, frame, labels


# ---------------------------------------------------------------------------
# subcommands

def cmd_schedules(args) -> int:
    _check_n(args)
    scheds = enum_schedules(args.n, args.rounds)
    if args.json:
        print(json.dumps([schedule_to_json(s) for s in scheds], indent=2))
    else:
        for s in scheds:
            print(s.text())
    return EXIT_OK


def cmd_run(args) -> int:
    sched = parse_schedule(args.schedule)
    record = run(sched)
    if args.json:
        print(json.dumps(record_to_json(record), indent=2))
    else:
        sys.stdout.write(format_trace(record))
    return EXIT_OK


def cmd_model(args) -> int:
    _check_n(args)
    model = _build_model(args)
    if args.dot:
        sys.stdout.write(frame_to_dot(model.frame))
    else:
        print(json.dumps(model_to_json(model), indent=2))
    return EXIT_OK


def cmd_complex(args) -> int:
    _check_n(args)
    complex_, _, _ = _build_complex(args)
    if args.dot:
        sys.stdout.write(complex_to_dot(complex_))
    else:
        print(json.dumps(complex_to_json(complex_), indent=2))
    return EXIT_OK


def cmd_mc(args) -> int:
    _check_n(args)
    if args.model_file:
        with open(args.model_file) as fh:
            model = model_from_json(json.load(fh))
    else:
        model = _build_model(args)
    state = _resolve_state(args.state, args.n, args.rounds)
    if not 0 <= state < model.frame.state_count:
        raise CliError(f"state {state} out of range")
    try:
        formula = parse_formula(args.formula)
    except FormulaParseError as exc:
        raise CliError(f"formula parse error: {exc}")
    verdict = eval_formula(model, state, formula)
    print("true" if verdict else "false")
    if not verdict and isinstance(formula, Know):
        agent = formula.agent
        cls = model.frame.partitions[agent][state]
        for other in model.frame.classes_by_agent[agent][cls]:
            if not eval_formula(model, other, formula.sub):
                print(
                    f"witness: state {other} is {agent_name(agent)}-related "
                    "and falsifies the body"
                )
                break
    return EXIT_OK if verdict else EXIT_UNSOLVABLE


def cmd_check(args) -> int:
    _check_n(args)
    _threads()  # validate the worker bound even though search is sequential
    task = _load_task(args)
    verdict = solve(task, args.n, args.rounds)
    if args.report:
        print(json.dumps(solve_report(task, args.n, args.rounds), indent=2))
    else:
        print("solvable" if verdict.solvable else "unsolvable")
    if verdict.solvable and args.certificate:
        with open(args.certificate, "w") as fh:
            json.dump(decision_to_json(task, verdict), fh, indent=2)
            fh.write("\n")
    return EXIT_OK if verdict.solvable else EXIT_UNSOLVABLE


def cmd_export(args) -> int:
    _check_n(args)
    if bool(args.dot) == bool(args.json):
        raise CliError("choose exactly one of --dot PATH or --json PATH")
    path = args.dot or args.json
    what = args.what

    if args.dot:
        if what == "schedules":
            raise CliError("schedules export only as --json")
        if what in ("input-model", "protocol-model", "output-model"):
            args.kind = what.split("-")[0]
            text = frame_to_dot(_build_model(args).frame)
        elif what in ("protocol-complex", "output-complex"):
            args.kind = what.split("-")[0]
            complex_, _, _ = _build_complex(args)
            text = complex_to_dot(complex_)
        elif what == "task":
            raise CliError("tasks export only as --json")
        else:
            raise CliError(f"unknown export object {what!r}")
        with open(path, "w") as fh:
            fh.write(text)
        return EXIT_OK

    if what == "schedules":
        data = [schedule_to_json(s) for s in enum_schedules(args.n, args.rounds)]
    elif what in ("input-model", "protocol-model", "output-model"):
        args.kind = what.split("-")[0]
        data = model_to_json(_build_model(args))
    elif what in ("protocol-complex", "output-complex"):
        args.kind = what.split("-")[0]
        complex_, _, _ = _build_complex(args)
        data = complex_to_json(complex_)
    elif what == "task":
        data = task_to_json(_load_task(args))
    else:
        raise CliError(f"unknown export object {what!r}")
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# wiring

def _add_shared(parser, need_task=False):
    parser.add_argument("--n", type=int, default=2, help="largest process id (n+1 processes)")
    parser.add_argument("--rounds", type=int, default=1, help="number of rounds N")
    parser.add_argument("--max-n-override", action="store_true",
                        help="lift the default cap on --n")
    if need_task:
        parser.add_argument("--task", choices=["testset", "two-testset", "two_testset", "snapshot"],
                            help="built-in task name")
        parser.add_argument("--task-file", help="JSON task description")


def build_parser() -> _Parser:
    parser = _Parser(prog="epikit", description=__doc__)
    parser.add_argument("--version", action="version", version=f"epikit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("schedules", help="list the canonical schedule enumeration")
    _add_shared(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_schedules)

    p = sub.add_parser("run", help="simulate one schedule round by round")
    p.add_argument("--schedule", required=True, help="e.g. '0|1,2;0,1,2'")
    p.add_argument("--json", action="store_true", help="emit the run record as JSON")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("model", help="print a built-in Kripke model")
    p.add_argument("kind", choices=["input", "protocol", "output"])
    _add_shared(p, need_task=True)
    p.add_argument("--dot", action="store_true", help="emit the frame as DOT")
    p.set_defaults(func=cmd_model)

    p = sub.add_parser("complex", help="print a dual chromatic complex")
    p.add_argument("kind", choices=["protocol", "output"])
    _add_shared(p, need_task=True)
    p.add_argument("--dot", action="store_true", help="emit facet adjacency as DOT")
    p.set_defaults(func=cmd_complex)

    p = sub.add_parser("mc", help="evaluate a formula at a state")
    p.add_argument("kind", choices=["input", "protocol", "output"], nargs="?",
                   default="protocol")
    _add_shared(p, need_task=True)
    p.add_argument("--model-file", help="JSON model instead of a built-in")
    p.add_argument("--state", required=True,
                   help="state index or schedule text for schedule-indexed models")
    p.add_argument("--formula", required=True)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("check", help="decide task solvability")
    _add_shared(p, need_task=True)
    p.add_argument("--certificate", help="write the decision map here when solvable")
    p.add_argument("--report", action="store_true", help="emit the full JSON report")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("export", help="write an object to a file")
    p.add_argument("what", choices=[
        "schedules", "input-model", "protocol-model", "output-model",
        "protocol-complex", "output-complex", "task",
    ])
    _add_shared(p, need_task=True)
    p.add_argument("--dot", metavar="PATH", help="write DOT here")
    p.add_argument("--json", metavar="PATH", help="write JSON here")
    p.set_defaults(func=cmd_export)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
