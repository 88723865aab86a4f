"""Command line entry point: ``poissonpoly <subcommand> [flags]``.

Subcommands: ``verify-identity``, ``scaling``, ``oracle-1d``, ``suite``.
Any flag may also come from a flat ``key=value`` file given by ``--config``;
flags on the command line win. Exit status is 0 when every verdict passes,
2 when some check fails and 1 on usage or configuration errors.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field

from . import __version__
from . import experiments as ex
from . import identities as ids
from .measure import ConvexBody, MeasureModel
from .oracle import oracle_1d
from .reports import DEFAULT_THRESHOLD, FAMILY_THRESHOLD, default_workers

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2

IDENTITY_IDS = ("factorial_moment", "variance_I", "gf", "cumulant", "vertex_expectation",
                "point_balance", "vertex_second_moment", "vertex_factorial_moment",
                "vertex_gf", "efron_buchta")
DEFAULT_BODY = {1: "interval", 2: "disk", 3: "ball3d"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclass
class RunManifest:
    config: dict
    version: str
    wall_time: float
    records: list
    verdict: str = "pass"
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"config": self.config, "version": self.version, "wall_time": self.wall_time,
                "records": self.records, "verdict": self.verdict, **self.extra}


# ------------------------------------------------------------------ parsing

def _floats(text: str) -> list:
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _names(text: str) -> list:
    return [v.strip() for v in str(text).split(",") if v.strip()]


def _common(p):
    p.add_argument("--config", help="key=value file; command-line flags override it")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: $POISSONPOLY_WORKERS or 1)")
    p.add_argument("--output", help="write reports here (JSON lines) instead of stdout")
    p.add_argument("--manifest", help="also write a run manifest (JSON) here")


def _measure_flags(p):
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--measure", choices=("uniform", "gaussian"), default="uniform")
    p.add_argument("--body", default=None,
                   help="interval, disk, ellipse, square or ball3d (default by dimension)")
    p.add_argument("--ellipse-a", type=float, default=2.0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="poissonpoly", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify-identity", help="run one identity verifier")
    _common(v)
    _measure_flags(v)
    v.add_argument("--id", required=True, choices=IDENTITY_IDS)
    v.add_argument("--t", type=float)
    v.add_argument("--n", type=int)
    v.add_argument("--k", type=int, default=1)
    v.add_argument("--order", type=int, default=3)
    v.add_argument("--z", type=_floats, default=None)
    v.add_argument("--x", type=_floats, default=None)
    v.add_argument("--reps", type=int, default=10_000)
    v.add_argument("--J", type=int, default=ids.DEFAULT_AUX_POINTS)
    v.add_argument("--z-threshold", type=float, default=DEFAULT_THRESHOLD)
    v.add_argument("--bootstrap-B", type=int, default=ids.DEFAULT_BOOTSTRAP)

    s = sub.add_parser("scaling", help="fit power-law exponents over a t grid")
    _common(s)
    _measure_flags(s)
    s.add_argument("--functional", type=_names, default=list(ex.FUNCTIONALS))
    s.add_argument("--t-grid", type=_floats, default=list(ex.DEFAULT_GRID))
    s.add_argument("--reps", type=int, default=10_000, help="replications per t")
    s.add_argument("--J", type=int, default=ex.SCALING_AUX_POINTS)
    s.add_argument("--csv", help="per-t estimates as CSV")

    o = sub.add_parser("oracle-1d", help="exact one-dimensional reference values")
    o.add_argument("--config")
    o.add_argument("--t", type=float, required=True)

    q = sub.add_parser("suite", help="run every verifier")
    _common(q)
    q.add_argument("--profile", choices=("quick", "full"), default="quick")
    q.add_argument("--z-threshold", type=float, default=FAMILY_THRESHOLD)
    q.add_argument("--bootstrap-B", type=int, default=ids.DEFAULT_BOOTSTRAP)
    return parser


def read_config(path: str) -> dict:
    """Flat ``key=value`` lines; blank lines and ``#`` comments are ignored."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as e:
        raise UsageError(f"cannot read config file {path!r}: {e.strerror}")
    for no, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{no}: expected key=value")
        k, v = (x.strip() for x in line.split("=", 1))
        out[k.lstrip("-").replace("-", "_")] = v
    return out


_LIST_FLAGS = ("--z", "--x", "--t-grid")


def _glue_lists(argv) -> list:
    """Join ``--z -0.05,0.02`` into ``--z=-0.05,0.02`` so argparse keeps negative lists."""
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in _LIST_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-") \
                and argv[i + 1][1:2] in set("0123456789."):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def _config_path(argv):
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if a.startswith("--config="):
            return a.split("=", 1)[1]
    return None


def parse_args(argv) -> argparse.Namespace:
    argv = _glue_lists(list(argv))
    parser = build_parser()
    path = _config_path(argv)
    if path is not None:
        command = next((a for a in argv if a in _subparsers(parser)), None)
        if command is None:
            raise UsageError("a subcommand is required")
        sp = _subparsers(parser)[command]
        cfg = read_config(path)
        cfg.pop("config", None)
        actions = {a.dest: a for a in sp._actions}
        unknown = sorted(set(cfg) - set(actions))
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        for k in cfg:
            actions[k].required = False
        sp.set_defaults(**cfg)
    args = parser.parse_args(argv)
    return args


def _subparsers(parser) -> dict:
    return parser._subparsers._group_actions[0].choices


def _model(args) -> MeasureModel:
    if args.d not in (1, 2, 3):
        raise UsageError("--d must be 1, 2 or 3")
    if args.measure == "gaussian":
        if args.body is not None:
            raise UsageError("--body applies to the uniform measure only")
        return MeasureModel.gaussian(args.d)
    name = args.body or DEFAULT_BODY[args.d]
    body = ConvexBody.from_name(name, a=args.ellipse_a)
    if body.dim != args.d:
        raise UsageError(f"body {name!r} lives in dimension {body.dim}, not --d {args.d}")
    return MeasureModel.uniform(body)


def _workers(args) -> int:
    w = default_workers() if args.workers is None else args.workers
    if w < 1:
        raise UsageError("--workers must be at least 1")
    return w


def _config_echo(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items())
            if k not in ("config", "output", "manifest", "csv")}


# ------------------------------------------------------------------ commands

def _require(cond, msg):
    if not cond:
        raise UsageError(msg)


def run_identity(args, m, workers) -> list:
    R, seed, thr, t = args.reps, args.seed, args.z_threshold, args.t
    _require(R >= 30, "--reps must be at least 30")
    kw = dict(seed=seed, workers=workers, threshold=thr)
    if args.id == "efron_buchta":
        _require(args.n is not None, "--n is required for efron_buchta")
        return [ids.verify_efron_buchta(m, args.n, args.k, R, **kw)]
    _require(t is not None and t > 0, "--t must be given and positive")
    if args.id == "factorial_moment":
        return [ids.verify_factorial_moment(m, t, args.k, R, **kw)]
    if args.id == "variance_I":
        return [ids.verify_variance_I(m, t, R, B=args.bootstrap_B, **kw)]
    if args.id == "gf":
        _require(args.z, "--z is required for gf")
        return ids.verify_gf_identity(m, t, args.z, R, **kw)
    if args.id == "cumulant":
        return ids.verify_cumulants(m, t, args.order, R, B=args.bootstrap_B, **kw)
    if args.id == "vertex_expectation":
        return [ids.verify_vertex_expectation(m, t, R, **kw)]
    if args.id == "point_balance":
        return [ids.verify_point_balance(m, t, R, **kw)]
    if args.id == "vertex_second_moment":
        return list(ids.verify_vertex_second_moment(m, t, R, args.J, B=args.bootstrap_B, **kw))
    if args.id == "vertex_factorial_moment":
        return [ids.verify_vertex_factorial_moment(m, t, args.k, R, args.J, **kw)]
    _require(args.x, "--x is required for vertex_gf")
    return ids.verify_vertex_gf(m, t, args.x, R, **kw)


def suite_plan(profile: str) -> list:
    """(identity id, measure, keyword arguments) for every verifier in the suite."""
    full = profile == "full"
    R = 100_000 if full else 10_000
    disk = MeasureModel.uniform(ConvexBody.disk())
    line = MeasureModel.uniform(ConvexBody.interval())
    square = MeasureModel.uniform(ConvexBody.square())
    return [
        ("factorial_moment", disk, dict(t=50.0, k=1, reps=R)),
        ("factorial_moment", disk, dict(t=50.0, k=2, reps=R)),
        ("factorial_moment", disk, dict(t=50.0, k=3, reps=R)),
        ("variance_I", disk, dict(t=50.0, reps=R)),
        ("gf", disk, dict(t=50.0, z=[-1.0, -0.05, 0.0, 0.02, 0.05], reps=R)),
        ("vertex_expectation", disk, dict(t=50.0, reps=R)),
        ("point_balance", disk, dict(t=50.0, reps=R)),
        ("cumulant", disk, dict(t=30.0, order=3, reps=1_000_000 if full else R)),
        ("vertex_second_moment", disk, dict(t=30.0, J=64, reps=R)),
        ("vertex_factorial_moment", disk, dict(t=30.0, k=3, J=64, reps=R)),
        ("vertex_gf", disk, dict(t=40.0, x=[0.0, 0.3, 0.5, 0.8, 1.0], reps=R)),
        ("efron_buchta", line, dict(n=2, k=1, reps=R)),
        ("efron_buchta", square, dict(n=3, k=1, reps=R)),
        ("efron_buchta", disk, dict(n=20, k=2, reps=R)),
    ]


def _suite(args, workers) -> list:
    reports = []
    for identity, m, kw in suite_plan(args.profile):
        ns = argparse.Namespace(id=identity, t=None, n=None, k=1, order=3, z=None, x=None,
                                J=ids.DEFAULT_AUX_POINTS, seed=args.seed,
                                z_threshold=args.z_threshold, bootstrap_B=args.bootstrap_B)
        for k, v in kw.items():
            setattr(ns, k, v)
        reports.extend(run_identity(ns, m, workers))
    return reports


def _emit(lines, path):
    text = "".join(line + "\n" for line in lines)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _finish(args, records, verdict, started, extra=None) -> int:
    if getattr(args, "manifest", None):
        man = RunManifest(_config_echo(args), __version__, round(time.time() - started, 3),
                          records, verdict, extra or {})
        with open(args.manifest, "w", encoding="utf-8") as fh:
            json.dump(man.to_dict(), fh, indent=2)
            fh.write("\n")
    return EXIT_OK if verdict == "pass" else EXIT_FAIL


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    started = time.time()
    try:
        args = parse_args(argv)
        if args.command == "oracle-1d":
            _require(args.t > 0, "--t must be positive")
            print(json.dumps(oracle_1d(args.t).to_dict()))
            return EXIT_OK
        workers = _workers(args)
        if args.command == "scaling":
            m = _model(args)
            runs = ex.run_scaling_many(m, args.functional, args.t_grid, args.reps, args.J,
                                       seed=args.seed, workers=workers)
            runs = list(runs.values())
            if args.csv:
                ex.write_csv(runs, args.csv)
            records = [r.summary() for r in runs]
            _emit([json.dumps(r) for r in records], args.output)
            verdict = "pass" if all(r["verdict"] == "pass" for r in records) else "fail"
            return _finish(args, records, verdict, started)
        if args.command == "suite":
            reports = _suite(args, workers)
        else:
            reports = run_identity(args, _model(args), workers)
    except UsageError as e:
        print(f"poissonpoly: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as e:
        print(f"poissonpoly: error: precondition violated: {e}", file=sys.stderr)
        return EXIT_USAGE
    records = [r.to_dict() for r in reports]
    _emit([json.dumps(r) for r in records], args.output)
    for r in reports:
        print(r.line(), file=sys.stderr)
    verdict = "pass" if all(r.passed for r in reports) else "fail"
    return _finish(args, records, verdict, started)


def run_cli(argv=None) -> int:
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
