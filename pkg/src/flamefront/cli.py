"""Command-line entry point: ``flamefront {dispersion,run,frankel,validate}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .evolution import SelfIntersectionError, run
from .frankel import frankel_run
from .geometry import GeometryError
from .io import Checkpoint, ConfigError, DirectorySink, ResumeError, RunConfig, write_summary
from .linear_theory import stabilized_growth_rate
from .solver import SolverError

EXIT_OK, EXIT_FAILED, EXIT_ERROR = 0, 1, 2

log = logging.getLogger("flamefront")


def _cmd_dispersion(args) -> int:
    res = stabilized_growth_rate(args.theta, args.k, args.lambda_c)
    print(json.dumps(res.as_record(), indent=1))
    return EXIT_OK


def _start(args):
    config = RunConfig.from_file(args.config)
    out = Path(args.output) if args.output else config.output_dir()
    if args.resume:
        ck = Checkpoint.load(args.resume)
        if ck.config.hash() != config.hash() and not args.force:
            raise ResumeError("checkpoint was written with a different configuration "
                              "(use --force to resume anyway)")
        return config, out, ck.front, ck.turbulence, ck.step
    turb = config.turbulence_field()
    return config, out, config.initial_state(turb), turb, 0


def _cmd_run(args, frankel=False) -> int:
    config, out, front, turb, start = _start(args)
    params, step_cfg = config.params(), config.step_config()
    sink = DirectorySink(out, config, turb, resume_tau=front.tau if start else None,
                         extra_meta={"model": "small-expansion" if frankel else "full"})
    log.info("writing to %s", out)
    if frankel:
        summary = frankel_run(front, params, step_cfg, sinks=[sink], start_step=start)
    else:
        summary = run(front, params, step_cfg, turb, sinks=[sink], start_step=start)
    write_summary(out, summary)
    print(json.dumps(summary.as_record(), indent=1))
    return EXIT_OK


def _cmd_validate(args) -> int:
    from .validation import run_suite

    results = run_suite(quick=not args.full)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    if args.json:
        Path(args.json).write_text(json.dumps([r.as_record() for r in results], indent=1,
                                              default=str))
    return EXIT_OK if passed == len(results) else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="flamefront",
                                description="Boundary-integral simulation of 2D flame fronts.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("dispersion", help="growth rate of a planar front perturbation")
    d.add_argument("--theta", type=float, required=True)
    d.add_argument("--k", type=float, required=True)
    d.add_argument("--lambda-c", type=float, default=0.0)
    d.set_defaults(func=_cmd_dispersion)

    for name, helptext in (("run", "evolve a front from a JSON config"),
                           ("frankel", "evolve with the small-expansion front law")):
        r = sub.add_parser(name, help=helptext)
        r.add_argument("--config", required=True)
        r.add_argument("--output", help="output directory (overrides config and environment)")
        if name == "run":
            r.add_argument("--resume", metavar="CHECKPOINT")
            r.add_argument("--force", action="store_true",
                           help="resume even if the configuration changed")
            r.set_defaults(func=_cmd_run)
        else:
            r.set_defaults(func=lambda a: _cmd_run(a, frankel=True), resume=None, force=False)

    v = sub.add_parser("validate", help="run the acceptance suite")
    g = v.add_mutually_exclusive_group()
    g.add_argument("--quick", action="store_true", help="fast subset (default)")
    g.add_argument("--full", action="store_true", help="all criteria at full resolution")
    v.add_argument("--json", help="also write results to this file")
    v.set_defaults(func=_cmd_validate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ResumeError, FileNotFoundError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR
    except (SolverError, GeometryError, SelfIntersectionError) as err:
        print(f"runtime error: {err}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
