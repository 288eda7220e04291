"""Command-line entry point: ``nlch {hypotheses,simulate,converge,dissipate}``."""

import argparse
import sys

from ..errors import BlowUpError, ConfigError, HypothesisViolation
from . import campaigns
from . import config as cf

EXIT_OK, EXIT_CONFIG, EXIT_HYPOTHESIS, EXIT_BLOWUP, EXIT_THRESHOLD = 0, 2, 3, 4, 5


def build_parser():
    p = argparse.ArgumentParser(prog="nlch", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_, default_out):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", metavar="PATH", help="JSON run configuration (defaults if omitted)")
        sp.add_argument("--out", metavar="DIR", default=None, help=f"output directory (default {default_out})")
        sp.add_argument("--override-hypotheses", action="store_true", help="run even if a hypothesis check fails")
        sp.add_argument("--threads", type=int, default=1, metavar="N", help="worker threads for independent runs")
        return sp

    add("hypotheses", "audit (H1)-(H6) for a config", "runs/hypotheses")
    add("simulate", "integrate one trajectory with diagnostics", "output.directory from the config")
    sp = add("converge", "(alpha, eps) sweep and rate fit", "runs/converge")
    sp.add_argument("--slope-threshold", type=float, default=None, metavar="X", help="minimum log-log slope")
    add("dissipate", "long runs, decay rate and absorbing entry times", "runs/dissipate")
    return p


def _summary(cmd, rep):
    if cmd == "hypotheses":
        return f"all hypotheses pass (c_0 = {rep['H2']['c_0']:.4g}, c_J = {rep['H1']['c_J']:.4g})"
    if cmd == "simulate":
        return f"{rep['n_steps']} steps, mass drift {rep['mass_drift']:.2e}, residual {rep['final_energy_residual']:.3e}"
    if cmd == "converge":
        f = rep["rate_fit"]
        return f"slope {f['slope']:.4f}, r2 {f['r2']:.4f} over {len(f['points'])} points"
    return f"entry times {[e['entry_time'] for e in rep['runs']]}, long-time bound {rep['long_time_bound']:.4g}"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = cf.load(args.config)
        out = args.out
        if out is None:
            out = cfg["output"]["directory"] if args.command == "simulate" else f"runs/{args.command}"
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        if args.command == "hypotheses":
            rep = campaigns.cmd_hypotheses(cfg, out)
        elif args.command == "simulate":
            rep = campaigns.cmd_simulate(cfg, out, override=args.override_hypotheses)
        elif args.command == "converge":
            rep = campaigns.cmd_converge(
                cfg, out, threads=args.threads, slope_threshold=args.slope_threshold,
                override=args.override_hypotheses,
            )
        else:
            rep = campaigns.cmd_dissipate(cfg, out, threads=args.threads, override=args.override_hypotheses)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except HypothesisViolation as e:
        print(f"hypothesis failure: {e}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except BlowUpError as e:
        print(f"numerical blow-up: {e}", file=sys.stderr)
        return EXIT_BLOWUP
    except campaigns.ThresholdFailure as e:
        print(f"threshold failure: {e}", file=sys.stderr)
        return EXIT_THRESHOLD
    print(f"{args.command}: {_summary(args.command, rep)} -> {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
