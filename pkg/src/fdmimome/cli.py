"""Command-line entry: run/validate/list experiments.

Exit status: 0 on success, 2 on usage error (bad experiment id, malformed
or infeasible parameters, unreadable config), 3 on runtime failure.
Worker count comes from FDMIMOME_WORKERS (default 1).
"""

import argparse
import sys

from .experiments import EXPERIMENT_IDS, ExperimentSpec, run, validate

USAGE_ERROR = 2
RUNTIME_ERROR = 3


def _parse_value(text):
    items = text.split(",") if "," in text else [text]
    parsed = []
    for item in items:
        item = item.strip()
        try:
            parsed.append(int(item))
            continue
        except ValueError:
            pass
        try:
            parsed.append(float(item))
            continue
        except ValueError:
            parsed.append(item)
    return parsed if len(parsed) > 1 else parsed[0]


def _collect_params(args):
    params = {}
    if args.config:
        try:
            with open(args.config) as fh:
                for line in fh:
                    line = line.split("#", 1)[0].strip()
                    if not line:
                        continue
                    if "=" not in line:
                        raise ValueError(f"malformed config line: {line!r}")
                    key, value = line.split("=", 1)
                    params[key.strip()] = _parse_value(value)
        except OSError as exc:
            raise ValueError(f"cannot read config file: {exc}")
    for item in args.param or []:
        if "=" not in item:
            raise ValueError(f"--param expects k=v, got {item!r}")
        key, value = item.split("=", 1)
        params[key.strip()] = _parse_value(value)
    return params


def _build_spec(args):
    params = _collect_params(args)
    return ExperimentSpec(
        experiment=args.experiment,
        params=params,
        trials=args.trials,
        seed=args.seed,
        out=args.out,
        preset=args.preset,
    )


def _add_common(sub):
    sub.add_argument("experiment", choices=EXPERIMENT_IDS)
    sub.add_argument("--param", action="append", metavar="K=V",
                     help="override one parameter; commas make a grid")
    sub.add_argument("--config", help="flat key=value file applied before --param")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--trials", type=int, default=None)
    sub.add_argument("--out", default=None)
    sub.add_argument("--preset", choices=("desk", "paper"), default="desk")


def main(argv=None):
    parser = argparse.ArgumentParser(prog="fdmimome",
                                     description="full-duplex MIMOME secrecy experiments")
    subparsers = parser.add_subparsers(dest="command", required=True)
    _add_common(subparsers.add_parser("run", help="run an experiment and write its CSV"))
    _add_common(subparsers.add_parser("validate", help="dry-run grid feasibility check"))
    subparsers.add_parser("list", help="list experiment ids")
    args = parser.parse_args(argv)

    if args.command == "list":
        for name in EXPERIMENT_IDS:
            print(name)
        return 0

    try:
        spec = _build_spec(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR

    diag = validate(spec)
    if args.command == "validate":
        print(f"experiment: {spec.experiment}")
        print(f"feasible: {diag['ok']}")
        print(f"cells: {diag['cells']}")
        if diag["ok"]:
            print(f"trials per cell: {diag['trials']}")
        for problem in diag["problems"]:
            print(f"problem: {problem}")
        return 0 if diag["ok"] else USAGE_ERROR

    if not diag["ok"]:
        for problem in diag["problems"]:
            print(f"error: {problem}", file=sys.stderr)
        return USAGE_ERROR
    try:
        out = run(spec)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
