"""Command line interface.

Exit codes: 0 on success (property holds), 1 when a property is violated or
a plan is infeasible, 2 on usage or parse errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from cosynth.automata import InputError, dfa_to_text, language_equal, load_dfa, minimize, save_dfa
from cosynth.langops import project, widen_like
from cosynth.lstar import DfaTeacher, LearnLog, learn
from cosynth.motion import (
    environment_from_text,
    integrate,
    labeling_from_text,
    motion_dfa,
    replan,
    simulate,
    synthesize_motion_plan,
    MotionInfeasible,
    ReplanInfeasible,
)
from cosynth.pipeline import PipelineConfig, run_pipeline
from cosynth.synthesis import SynthesisProblem, synthesize_supervisor
from cosynth.verification import verify
from cosynth.automata import complement as _complement
from cosynth.automata import parallel_compose as _compose


def _write(dfa, out: str | None) -> None:
    text = dfa_to_text(dfa)
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _load_env(path: str):
    return environment_from_text(Path(path).read_text(encoding="utf-8"), source=path)


def cmd_compose(args) -> int:
    result = _compose(load_dfa(args.left), load_dfa(args.right))
    _write(minimize(result) if args.minimize else result, args.out)
    return 0


def cmd_project(args) -> int:
    dfa = load_dfa(args.automaton)
    _write(project(dfa, tuple(args.events.split(","))), args.out)
    return 0


def cmd_complement(args) -> int:
    _write(_complement(load_dfa(args.automaton)), args.out)
    return 0


def cmd_supc(args) -> int:
    spec = load_dfa(args.spec)
    plant = load_dfa(args.plant)
    plant = widen_like(plant, spec.alphabet)
    log = LearnLog() if args.trace else None
    supervisor = synthesize_supervisor(
        SynthesisProblem(spec, spec.alphabet, plant_dfa=plant), log=log
    )
    if args.trace:
        Path(args.trace).write_text(log.text(), encoding="utf-8")
    _write(supervisor, args.out)
    return 0


def cmd_learn(args) -> int:
    target = load_dfa(args.target)
    log = LearnLog() if args.trace else None
    learned = learn(DfaTeacher(target), target.alphabet, log=log)
    if args.trace:
        Path(args.trace).write_text(log.text(), encoding="utf-8")
    _write(learned, args.out)
    witness = language_equal(learned, target)
    return 0 if witness is None else 1


def cmd_verify(args) -> int:
    prop = load_dfa(args.property)
    modules = [load_dfa(p) for p in args.modules]
    verdict, _assumptions, stats = verify(modules, prop)
    sys.stdout.write(verdict.render())
    if stats.fallback:
        sys.stdout.write("note: proof rule inconclusive; verdict from the direct product check\n")
    return 0 if verdict.holds() else 1


def cmd_plan(args) -> int:
    mission = load_dfa(args.mission)
    env = _load_env(args.env)
    labelings = labeling_from_text(
        Path(args.labeling).read_text(encoding="utf-8"), env.regions, source=args.labeling
    )
    if args.agent not in labelings:
        raise InputError(f"labeling file lacks agent {args.agent!r}")
    if args.agent not in env.initial_regions:
        raise InputError(f"environment lacks an initial region for {args.agent!r}")
    v0 = env.initial_regions[args.agent]
    gm = motion_dfa(env, v0)
    motion_plan = synthesize_motion_plan(mission, labelings[args.agent], gm, v0)
    lp = integrate(mission, motion_plan, labelings[args.agent], v0, gm, agent=args.agent)
    prefix = Path(args.out_prefix)
    save_dfa(motion_plan, prefix.with_name(prefix.name + "_motion.aut"))
    save_dfa(lp.dfa, prefix.with_name(prefix.name + "_integrated.aut"))
    save_dfa(lp.profile, prefix.with_name(prefix.name + "_profile.aut"))
    return 0


def cmd_replan(args) -> int:
    mission = load_dfa(args.mission)
    env = _load_env(args.env)
    real_env = _load_env(args.real_env)
    labelings = labeling_from_text(
        Path(args.labeling).read_text(encoding="utf-8"), env.regions, source=args.labeling
    )
    v0 = env.initial_regions[args.agent]
    gm = motion_dfa(env, v0)
    motion_plan = synthesize_motion_plan(mission, labelings[args.agent], gm, v0)
    lp = integrate(mission, motion_plan, labelings[args.agent], v0, gm, agent=args.agent)
    new_lp = replan(lp, gm, real_env)
    prefix = Path(args.out_prefix)
    save_dfa(new_lp.dfa, prefix.with_name(prefix.name + "_integrated.aut"))
    save_dfa(new_lp.profile, prefix.with_name(prefix.name + "_profile.aut"))
    return 0


def cmd_simulate(args) -> int:
    config = PipelineConfig.load(args.config)
    config.max_rounds = args.max_rounds
    config.check_depth = args.check_depth
    report = run_pipeline(
        config,
        real_env_path=args.real_env,
        schedule_path=args.schedule,
        log_stream=sys.stderr,
        stop_event=args.stop_event,
    )
    if args.trace_out and report.trace is not None:
        Path(args.trace_out).write_text(report.trace, encoding="utf-8")
    elif report.trace is not None:
        sys.stdout.write(report.trace)
    return 0 if report.status == "holds" else 1


def cmd_pipeline(args) -> int:
    config = PipelineConfig.load(args.config)
    config.max_rounds = args.max_rounds
    config.check_depth = args.check_depth
    for override in args.assumption_alphabet or ():
        name, _, events = override.partition("=")
        if not events:
            raise InputError("--assumption-alphabet wants agent=ev1,ev2,...")
        for agent in config.agents:
            if agent.name == name:
                agent.assumption_events = tuple(events.split(","))
                break
        else:
            raise InputError(f"unknown agent {name!r} in --assumption-alphabet")
    report = run_pipeline(
        config,
        real_env_path=args.real_env,
        schedule_path=args.schedule,
        log_stream=sys.stderr if args.verbose else None,
        stop_event=args.stop_event,
    )
    report.save(args.out)
    if args.trace_out and report.trace is not None:
        Path(args.trace_out).write_text(report.trace, encoding="utf-8")
    sys.stdout.write(f"status: {report.status}\n")
    return 0 if report.status == "holds" else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cosynth", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compose", help="parallel composition of two automata")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("-o", "--out")
    p.add_argument("--minimize", action="store_true")
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("project", help="natural projection onto an event subset")
    p.add_argument("automaton")
    p.add_argument("--events", required=True, help="comma-separated target events")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("complement", help="language complement")
    p.add_argument("automaton")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_complement)

    p = sub.add_parser("supc", help="learn the supervisor enforcing supC(spec) on the plant")
    p.add_argument("spec")
    p.add_argument("plant")
    p.add_argument("-o", "--out")
    p.add_argument("--trace", help="write the MQ/EQ/CE learning trace to this file")
    p.set_defaults(func=cmd_supc)

    p = sub.add_parser("learn", help="learn a DFA from a target automaton teacher")
    p.add_argument("target")
    p.add_argument("-o", "--out")
    p.add_argument("--trace", help="write the MQ/EQ/CE learning trace to this file")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("verify", help="assume-guarantee check of modules against a property")
    p.add_argument("property")
    p.add_argument("modules", nargs="+")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("plan", help="synthesise a motion plan and integrated plan")
    p.add_argument("mission")
    p.add_argument("--env", required=True)
    p.add_argument("--labeling", required=True)
    p.add_argument("--agent", required=True)
    p.add_argument("-o", "--out-prefix", required=True)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("replan", help="replan an integrated plan against a real environment")
    p.add_argument("mission")
    p.add_argument("--env", required=True)
    p.add_argument("--real-env", required=True)
    p.add_argument("--labeling", required=True)
    p.add_argument("--agent", required=True)
    p.add_argument("-o", "--out-prefix", required=True)
    p.set_defaults(func=cmd_replan)

    p = sub.add_parser("simulate", help="run the pipeline and simulate the plans")
    p.add_argument("--config", required=True)
    p.add_argument("--real-env")
    p.add_argument("--schedule")
    p.add_argument("--trace-out")
    p.add_argument("--stop-event", default="r")
    p.add_argument("--max-rounds", type=int, default=100)
    p.add_argument("--check-depth", type=int, default=12)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("pipeline", help="full synthesis pipeline from a configuration file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory for report and artifacts")
    p.add_argument("--real-env")
    p.add_argument("--schedule")
    p.add_argument("--trace-out")
    p.add_argument("--stop-event", default="r")
    p.add_argument("--max-rounds", type=int, default=100)
    p.add_argument("--check-depth", type=int, default=12)
    p.add_argument("--assumption-alphabet", action="append",
                   metavar="AGENT=EV1,EV2", help="override one agent's interface alphabet")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (MotionInfeasible, ReplanInfeasible) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
