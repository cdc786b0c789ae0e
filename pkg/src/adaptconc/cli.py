"""Command-line front end.

Usage::

    adaptconc bound --ineq cor1 --n 100 --epsilon 1 --delta 0.1333333 --s +
    adaptconc compare --n 1000000 --p 0.75 --s + --epsilon-grid 0.5,1,2
    adaptconc simulate --process "iid_bernoulli(p=0.5)" --n 100 --trials 100000 --ineq theorem1 --a 0 --b 1
    adaptconc certify --out cert.json
    adaptconc invert --ineq azuma --target 0.05

Exit codes: 0 success, 1 usage error, 2 domain error, 3 certification
failure, 4 soundness violation.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import fmt
from .bounds import (
    CorollaryQuery,
    MeanKnownQuery,
    Sign,
    TheoremQuery,
    baseline_rhs,
    chernoff_mult_eps_form,
    chernoff_mult_rhs,
    cor1_eval,
    cor1_threshold,
    cor2_eval,
    cor2_threshold,
    cor3_rhs,
    rs13_rhs,
    theorem1_rhs,
    theorem1_threshold,
)
from .certify import CertGridSpec, certify_grid
from .errors import DomainError, UnsupportedError, UsageError
from .invert import FAMILIES, evaluate, invert_epsilon
from .simulate import (
    ProcessSpec,
    default_battery,
    default_bound_configs,
    estimate_tail,
    generate,
    load_processes,
)
from ._rng import trial_seed

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_CERT, EXIT_UNSOUND = 0, 1, 2, 3, 4
SEED_ENV = "ADAPTCONC_SEED"

BOUND_COLUMNS = [
    "ineq", "n", "epsilon", "a", "b", "delta", "s", "p", "variance",
    "threshold_base", "threshold_slope", "threshold_scale", "threshold_value",
    "rhs", "log_rhs", "vacuous", "event_impossible", "warnings",
]
COMPARE_COLUMNS = ["ineq", "epsilon", "rhs", "log_rhs", "vacuous"]
SIMULATE_COLUMNS = [
    "process", "n", "trials", "violations", "freq", "ci_level", "ci_upper",
    "sound_level", "ci_lower", "bound_ineq", "bound_rhs", "sound", "master_seed",
]
INVERT_COLUMNS = ["ineq", "target", "epsilon", "rhs", "log_rhs"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _sign(text: str) -> Sign:
    try:
        return Sign.parse(text)
    except UsageError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _float_list(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed number list {text!r}") from None
    return values


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _require(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.command} --ineq {args.ineq} needs {', '.join(missing)}")


# -- bound ------------------------------------------------------------------------


def cmd_bound(args) -> int:
    rec = {c: None for c in BOUND_COLUMNS}
    rec["ineq"] = args.ineq
    thr = None
    ineq = args.ineq
    if ineq == "theorem1":
        _require(args, "n", "a", "b")
        q = TheoremQuery(args.n, args.a, args.b)
        bv, thr = theorem1_rhs(q), theorem1_threshold(q)
        rec.update(n=q.n, a=q.a, b=q.b)
    elif ineq in ("cor1", "cor2"):
        _require(args, "n", "epsilon", "delta", "s")
        q = CorollaryQuery(args.n, args.epsilon, args.delta, args.s)
        stat = args.Delta if args.Delta is not None else max(-1.0, min(1.0, q.delta))
        if ineq == "cor1":
            rec["threshold_value"], bv = cor1_eval(q, stat)
            thr = cor1_threshold(q)
        else:
            rec["threshold_value"], bv, _ = cor2_eval(q, stat)
            thr = cor2_threshold(q) if not bv.vacuous else None
        rec.update(n=q.n, epsilon=q.epsilon, delta=q.delta, s=str(q.s))
    elif ineq == "cor3":
        _require(args, "n", "p", "epsilon", "s")
        q = MeanKnownQuery(args.n, args.p, args.epsilon, args.s)
        bv = cor3_rhs(q)
        rec.update(n=q.n, p=q.p, epsilon=q.epsilon, s=str(q.s))
    elif ineq == "rs13":
        _require(args, "epsilon", "s")
        means = args.means if args.means is not None else ([args.p] if args.p is not None else None)
        if not means:
            raise UsageError("rs13 needs --means or --p")
        bv = rs13_rhs(means, args.epsilon, args.s)
        rec.update(epsilon=args.epsilon, s=str(args.s), p=sum(means) / len(means), n=len(means))
    elif ineq == "chernoff":
        _require(args, "n", "p", "s")
        if args.epsilon is not None:
            bv = chernoff_mult_eps_form(args.n, args.p, args.epsilon, args.s)
        elif args.delta is not None:
            bv = chernoff_mult_rhs(args.n * args.p, args.delta, args.s)
        else:
            raise UsageError("chernoff needs --epsilon or --delta")
        rec.update(n=args.n, p=args.p, epsilon=args.epsilon, delta=args.delta, s=str(args.s))
    else:
        _require(args, "epsilon")
        n = args.n if args.n is not None else 1
        if ineq in ("bernstein", "bennett"):
            _require(args, "n")
        bv = baseline_rhs(ineq, n, args.epsilon, args.variance)
        rec.update(n=args.n, epsilon=args.epsilon, variance=args.variance)
    if thr is not None:
        rec.update(threshold_base=thr.base, threshold_slope=thr.slope, threshold_scale=thr.scale)
        if ineq == "theorem1" and args.Delta is not None:
            rec["threshold_value"] = thr.at_delta(args.Delta)
    rec.update(rhs=bv.rhs, log_rhs=bv.log_rhs, vacuous=bv.vacuous, event_impossible=bv.event_impossible)
    rec["warnings"] = "; ".join(bv.warnings)
    for w in bv.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if args.format == "csv":
        _emit(fmt.dumps_csv([rec], BOUND_COLUMNS), args.out)
    else:
        _emit(fmt.dumps_json({"schema": "adaptconc.bound/1", **rec}), args.out)
    return EXIT_OK


# -- compare ----------------------------------------------------------------------


def _eps_grid(args) -> list[float]:
    if args.epsilon_grid is not None:
        grid = args.epsilon_grid
    elif args.eps_min is not None and args.eps_max is not None and args.eps_num:
        if args.eps_num == 1:
            grid = [args.eps_min]
        else:
            step = (args.eps_max - args.eps_min) / (args.eps_num - 1)
            grid = [args.eps_min + i * step for i in range(args.eps_num)]
    else:
        grid = []
    if not grid or any(e < 0 for e in grid):
        raise UsageError("need a nonempty grid of nonnegative epsilon values")
    return grid


def compare_rows(n: int, p: float, s: Sign, grid: list[float]) -> list[dict]:
    v = p * (1 - p)
    rows = []
    for eps in grid:
        entries = [
            ("kato_cor3", lambda: cor3_rhs(MeanKnownQuery(n, p, eps, s))),
            ("rs13", lambda: rs13_rhs([p], eps, s)),
            ("azuma", lambda: baseline_rhs("azuma", n, eps)),
            ("bernstein", lambda: baseline_rhs("bernstein", n, eps, v)),
            ("bennett", lambda: baseline_rhs("bennett", n, eps, v)),
            ("chernoff_mult", lambda: chernoff_mult_eps_form(n, p, eps, s)),
        ]
        for name, fn in entries:
            try:
                bv = fn()
            except DomainError:
                continue  # not parameterisable at this point
            rows.append({"ineq": name, "epsilon": eps, "rhs": bv.rhs, "log_rhs": bv.log_rhs, "vacuous": bv.vacuous})
    return rows


def cmd_compare(args) -> int:
    if args.n is None or args.p is None:
        raise UsageError("compare needs --n and --p")
    grid = _eps_grid(args)
    MeanKnownQuery(args.n, args.p, 0.0, args.s)  # validates n and p
    rows = compare_rows(args.n, args.p, args.s, grid)
    if args.format == "json":
        doc = {"schema": "adaptconc.compare/1", "n": args.n, "p": args.p, "s": str(args.s), "rows": rows}
        _emit(fmt.dumps_json(doc), args.out)
    else:
        _emit(fmt.dumps_csv(rows, COMPARE_COLUMNS), args.out)
    return EXIT_OK


# -- simulate ---------------------------------------------------------------------


def _master_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env, 0)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return 0


def _sim_bound(args, n: int):
    if args.ineq == "theorem1":
        _require(args, "a", "b")
        q = TheoremQuery(n, args.a, args.b)
        return f"theorem1(a={q.a!r}, b={q.b!r})", theorem1_threshold(q), theorem1_rhs(q)
    if args.ineq == "cor1":
        _require(args, "epsilon", "delta", "s")
        q = CorollaryQuery(n, args.epsilon, args.delta, args.s)
        return (
            f"cor1(epsilon={q.epsilon!r}, delta={q.delta!r}, s={q.s})",
            cor1_threshold(q),
            cor1_eval(q, max(-1.0, min(1.0, q.delta)))[1],
        )
    raise UsageError("simulate supports --ineq theorem1 or cor1, or --battery")


def cmd_simulate(args) -> int:
    if args.n is None or args.n < 1:
        raise UsageError("simulate needs --n >= 1")
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    if not 0 < args.level < 1 or not 0 < args.sound_level < 1:
        raise UsageError("confidence levels must lie in (0, 1)")
    seed = _master_seed(args)
    if args.battery:
        processes = default_battery()
        configs = default_bound_configs(args.bound_n or args.n)
    else:
        if args.process_file:
            processes = load_processes(args.process_file)
        elif args.process:
            processes = [ProcessSpec.parse(p) for p in args.process]
        else:
            raise UsageError("simulate needs --process, --process-file or --battery")
        if args.ineq is None:
            raise UsageError("simulate needs --ineq")
        configs = [_sim_bound(args, args.bound_n or args.n)]

    runs = []
    for proc in processes:
        for label, thr, bv in configs:
            est = estimate_tail(
                proc, args.n, args.trials, thr, bv, seed,
                level=args.level, sound_level=args.sound_level, threads=args.threads,
            )
            runs.append({
                "process": str(proc),
                "n": args.n,
                "trials": est.trials,
                "violations": est.violations,
                "freq": est.freq,
                "ci_level": est.ci_level,
                "ci_upper": est.ci_upper,
                "sound_level": est.sound_level,
                "ci_lower": est.ci_lower,
                "bound": {"ineq": label, "rhs": est.bound_rhs, "log_rhs": bv.log_rhs, "threshold": thr.as_dict()},
                "sound": est.sound,
                "master_seed": seed,
            })
    if args.trajectory_csv:
        traj = generate(processes[0], args.n, trial_seed(seed, 0))
        Path(args.trajectory_csv).write_text(traj.to_csv())

    all_sound = all(r["sound"] for r in runs)
    if args.format == "csv":
        flat = [{**{k: v for k, v in r.items() if k != "bound"}, "bound_ineq": r["bound"]["ineq"],
                 "bound_rhs": r["bound"]["rhs"]} for r in runs]
        _emit(fmt.dumps_csv(flat, SIMULATE_COLUMNS), args.out)
    else:
        doc = {"schema": "adaptconc.simulate/1", "master_seed": seed, "sound": all_sound, "runs": runs}
        _emit(fmt.dumps_json(doc), args.out)
    if not all_sound:
        print("soundness violation: observed frequency exceeds the bound", file=sys.stderr)
        return EXIT_UNSOUND
    return EXIT_OK


# -- certify ----------------------------------------------------------------------


def cmd_certify(args) -> int:
    spec = CertGridSpec(
        y_min=args.y_min, y_max=args.y_max, y_step=args.y_step,
        x_span=args.x_span, x_step=args.x_step, slack=args.slack,
    )
    report = certify_grid(spec, threads=args.threads)
    _emit(fmt.dumps_json(report.as_dict()), args.out)
    if not report.passed:
        for c in report.checks:
            if c.min_margin < -spec.slack:
                print(f"check {c.condition} failed: margin {c.min_margin:.3e} at {c.worst_point}", file=sys.stderr)
        return EXIT_CERT
    return EXIT_OK


# -- invert -----------------------------------------------------------------------


def cmd_invert(args) -> int:
    params = {
        "n": args.n, "delta": args.delta, "s": args.s, "p": args.p,
        "variance": args.variance, "means": args.means,
    }
    params = {k: v for k, v in params.items() if k in FAMILIES[args.ineq]}
    eps = invert_epsilon(args.ineq, args.target, **params)
    bv = evaluate(args.ineq, eps, **params)
    rec = {"ineq": args.ineq, "target": args.target, "epsilon": eps, "rhs": bv.rhs, "log_rhs": bv.log_rhs}
    if args.format == "csv":
        _emit(fmt.dumps_csv([rec], INVERT_COLUMNS), args.out)
    else:
        _emit(fmt.dumps_json({"schema": "adaptconc.invert/1", **rec}), args.out)
    return EXIT_OK


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="adaptconc", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, default_format="json"):
        p.add_argument("--format", choices=("json", "csv"), default=default_format)
        p.add_argument("--out", help="output file (default: stdout)")

    def bound_params(p):
        p.add_argument("--n", type=int)
        p.add_argument("--a", type=float)
        p.add_argument("--b", type=float)
        p.add_argument("--epsilon", type=float)
        p.add_argument("--delta", type=float, help="bias guess delta (delta' for cor2)")
        p.add_argument("--s", type=_sign, default=Sign.PLUS, help="+ or -")
        p.add_argument("--p", type=float)
        p.add_argument("--variance", type=float)
        p.add_argument("--means", type=_float_list, help="comma-separated expected values (rs13)")

    p = sub.add_parser("bound", help="evaluate one inequality")
    p.add_argument("--ineq", required=True, choices=(
        "theorem1", "cor1", "cor2", "cor3", "rs13", "chernoff", "azuma", "hoeffding", "bernstein", "bennett"))
    bound_params(p)
    p.add_argument("--Delta", type=float, help="observed bias statistic for the threshold value")
    common(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("compare", help="table of bounds over an epsilon grid (independent case, known mean)")
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--s", type=_sign, default=Sign.PLUS)
    p.add_argument("--epsilon-grid", type=_float_list)
    p.add_argument("--eps-min", type=float)
    p.add_argument("--eps-max", type=float)
    p.add_argument("--eps-num", type=int)
    common(p, "csv")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("simulate", help="Monte Carlo soundness check")
    p.add_argument("--process", action="append", help="process spec, e.g. 'iid_bernoulli(p=0.5)'")
    p.add_argument("--process-file", help="file with one process spec per line")
    p.add_argument("--battery", action="store_true", help="default processes x default bound configurations")
    p.add_argument("--ineq", choices=("theorem1", "cor1"))
    bound_params(p)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--bound-n", type=int, help="build the bound for this n instead (negative control)")
    p.add_argument("--seed", type=int, help=f"master seed (else ${SEED_ENV}, else 0)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--level", type=float, default=0.99, help="level of the reported upper limit")
    p.add_argument("--sound-level", type=float, default=0.999, help="level of the lower limit used for soundness")
    p.add_argument("--trajectory-csv", help="write trial 0 of the first process as CSV (index,x,mu)")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("certify", help="grid certification of the proof conditions")
    d = CertGridSpec()
    p.add_argument("--y-min", type=float, default=d.y_min)
    p.add_argument("--y-max", type=float, default=d.y_max)
    p.add_argument("--y-step", type=float, default=d.y_step)
    p.add_argument("--x-span", type=float, default=d.x_span)
    p.add_argument("--x-step", type=float, default=d.x_step)
    p.add_argument("--slack", type=float, default=d.slack)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("invert", help="epsilon at which a bound reaches a target probability")
    p.add_argument("--ineq", required=True, choices=sorted(FAMILIES))
    p.add_argument("--target", type=float, required=True)
    bound_params(p)
    common(p)
    p.set_defaults(func=cmd_invert)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, UnsupportedError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
