"""Command line entry point: ``orbitspan {profile,schedule,witness,cover,verify}``."""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from ..cells import build_cover, build_cover_plan, sample_cell_pairs, sample_tent_pairs, verify_cover
from ..certify import check_schedule
from ..covering import MemoryBudgetExceeded
from ..oracle import (StepBudgetExceeded, WitnessNotFound, minimality_probe, nonequicontinuity_witness,
                      nonunique_ergodicity_witness, tbeta_witness)
from ..schedule import DepthInfeasible, build_schedule
from ..systems import HorizonOverflow, appendix_system
from .config import OUT_ENV, ConfigError, ExperimentConfig
from .runner import BudgetExceeded, OutputError, dumps, run_experiment, write_text
from .suite import file_digest, run_suite

EXIT_OK, EXIT_ASSERT, EXIT_USAGE, EXIT_BUDGET, EXIT_IO = 0, 1, 2, 3, 4
WITNESSES = ("nonequicontinuity", "nonunique-ergodicity", "tbeta", "minimality")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _out_dir(args) -> str | None:
    return args.out or os.environ.get(OUT_ENV)


def _emit(obj, args, filename: str) -> None:
    text = dumps(obj)
    sys.stdout.write(text)
    out = _out_dir(args)
    if out:
        write_text(os.path.join(out, filename), text)


def cmd_profile(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    if args.seed is not None:
        d = cfg.to_dict()
        d["seed"] = args.seed
        cfg = ExperimentConfig.from_dict(d)
    res = run_experiment(cfg, out_dir=args.out, workers=args.workers, svg=True if args.svg else None)
    for m, v in res.verdicts.items():
        print(f"{cfg.name} {m}: {v}")
    for path in res.files.values():
        print(f"wrote {path}")
    for f in res.failures:
        print(f"check failed: {f}", file=sys.stderr)
    return EXIT_ASSERT if res.failures else EXIT_OK


def cmd_schedule(args) -> int:
    sch = build_schedule(args.alpha, depth=args.depth, budget=Fraction(args.budget))
    text = sch.to_text()
    audit = check_schedule(sch, seed=args.seed or 0)
    sys.stdout.write(text)
    out = _out_dir(args)
    if out:
        write_text(os.path.join(out, "schedule.txt"), text)
        write_text(os.path.join(out, "schedule-audit.json"), dumps(audit.to_dict()))
    for c in audit.checks:
        print(f"# {'ok  ' if c.passed else 'FAIL'} level {c.level} {c.name} ({c.method})", file=sys.stderr)
    return EXIT_OK if audit.passed else EXIT_ASSERT


def cmd_witness(args) -> int:
    sch = build_schedule(args.alpha, depth=args.depth)
    if args.name == "nonequicontinuity":
        rep = nonequicontinuity_witness(sch, args.k)
    elif args.name == "nonunique-ergodicity":
        rep = nonunique_ergodicity_witness(sch, args.k)
    elif args.name == "tbeta":
        rep = tbeta_witness(sch, args.k, args.s, args.beta)
    else:
        target = tuple(float(v) for v in args.target.split(","))
        res = minimality_probe(appendix_system(sch), (0.0, 0.0), target, args.eps, args.budget)
        _emit({"tag": "minimality", "target": list(target), "eps": args.eps, "budget": args.budget,
               "hit_time": res.hit_time, "closest": res.closest, "exhausted": res.exhausted},
              args, "witness-minimality.json")
        return EXIT_OK if not res.exhausted else EXIT_ASSERT
    _emit(rep.to_dict(), args, f"witness-{args.name}.json")
    return EXIT_ASSERT if rep.passed is False else EXIT_OK


def cmd_cover(args) -> int:
    sch = build_schedule(args.alpha, depth=args.depth)
    plan = build_cover_plan(args.eps, sch)
    n = args.n if args.n else 4 * sch.level(args.k).plateau
    cover = build_cover(n, args.eps, sch, plan)
    summary = cover.summary()
    out = {"plan": plan.summary(), "cover": {**summary, "counts": {k: str(v) for k, v in summary["counts"].items()},
                                              "bounds": {k: str(v) for k, v in summary["bounds"].items()}}}
    ok = summary["within_bounds"]
    if args.pairs:
        seed = args.seed or 0
        pairs = (sample_tent_pairs(cover, "Q", args.pairs, seed) +
                 sample_cell_pairs(cover, max(1, args.pairs // 5), seed + 1, family="T"))
        checks = verify_cover(cover, pairs)
        out["families"] = {k: v.to_dict() for k, v in checks.items()}
        ok &= all(c.passed for c in checks.values())
    _emit(out, args, "cover.json")
    return EXIT_OK if ok else EXIT_ASSERT


def cmd_verify(args) -> int:
    out = _out_dir(args) or "orbitspan-out"
    only = [int(v) for v in args.only.split(",")] if args.only else None
    log = (lambda s: print(s, flush=True))
    run = run_suite(out, seed=args.seed or 0, quick=args.quick, only=only, log=log)
    ok = run.passed
    if args.repeat:
        again = run_suite(os.path.join(out, "repeat"), seed=args.seed or 0, quick=args.quick, only=only)
        same = all(file_digest(run.files[k]) == file_digest(again.files[k]) for k in ("json", "csv"))
        print(f"criterion 12 [{'PASS' if same else 'FAIL'}] re-run with the same seed is byte-identical")
        ok &= same
    for path in run.files.values():
        print(f"wrote {path}")
    return EXIT_OK if ok else EXIT_ASSERT


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help=f"output directory (default: ${OUT_ENV})")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--seed", type=int)
    common.add_argument("--svg", action="store_true", help="also write an SVG chart")
    common.add_argument("--config", help="experiment config (JSON)")

    p = _Parser(prog="orbitspan", description="Spanning-number experiments for orbit metrics.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    sp = sub.add_parser("profile", parents=[common], help="run a configured span profile")

    ss = sub.add_parser("schedule", parents=[common], help="build, print and verify a parameter schedule")
    ss.add_argument("--alpha", default="golden")
    ss.add_argument("--depth", type=int, default=2)
    ss.add_argument("--budget", default="1/100")

    sw = sub.add_parser("witness", parents=[common], help="run a named witness procedure")
    sw.add_argument("name", choices=WITNESSES)
    sw.add_argument("--k", type=int, default=2)
    sw.add_argument("--alpha", default="golden")
    sw.add_argument("--depth", type=int, default=2)
    sw.add_argument("--s", type=int, default=1)
    sw.add_argument("--beta", default="sqrt2")
    sw.add_argument("--target", default="0.5,0.5")
    sw.add_argument("--eps", type=float, default=0.05)
    sw.add_argument("--budget", type=int, default=10 ** 8)

    sc = sub.add_parser("cover", parents=[common], help="build and count the explicit cover cells")
    sc.add_argument("--eps", type=float, default=0.009)
    sc.add_argument("--k", type=int, default=2)
    sc.add_argument("--n", type=int)
    sc.add_argument("--pairs", type=int, default=0, help="intra-cell pairs to verify")
    sc.add_argument("--alpha", default="golden")
    sc.add_argument("--depth", type=int, default=2)

    sv = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    sv.add_argument("--quick", action="store_true", help="reduced instance counts")
    sv.add_argument("--only", help="comma-separated criterion numbers")
    sv.add_argument("--repeat", action="store_true", help="run twice and compare outputs byte for byte")
    return p


HANDLERS = {"profile": cmd_profile, "schedule": cmd_schedule, "witness": cmd_witness,
            "cover": cmd_cover, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "profile" and not args.config:
            raise UsageError("profile needs --config PATH")
        if args.workers < 1:
            raise UsageError("--workers must be >= 1")
        return HANDLERS[args.command](args)
    except UsageError as exc:
        print(f"orbitspan: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"orbitspan: invalid config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BudgetExceeded, MemoryBudgetExceeded, HorizonOverflow, StepBudgetExceeded, DepthInfeasible) as exc:
        print(f"orbitspan: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (OutputError, OSError) as exc:
        print(f"orbitspan: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    except (WitnessNotFound, ValueError) as exc:
        print(f"orbitspan: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
