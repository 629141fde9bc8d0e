"""Command-line entry point: ``bvarkit <subcommand> --config FILE [--output-dir DIR]``."""

import argparse
import logging
import os
import sys

from . import __version__
from .exceptions import ConfigError
from .report import EXIT_CODES, SUBCOMMANDS, PipelineError, parse_config, run_pipeline

logger = logging.getLogger("bvarkit")


def _parser():
    parser = argparse.ArgumentParser(
        prog="bvarkit",
        description="Classical and Minnesota-prior Bayesian VAR diagnostics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--output-dir", help="override the configured output directory")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _summary(bundle):
    lines = [f"wrote {len(bundle.files)} files to {bundle.output_dir}"]
    if bundle.selection is not None:
        w = bundle.selection.winners
        lines.append("lag winners: " + ", ".join(f"{k}={w[k]}" for k in sorted(w))
                     + f"; using d={bundle.chosen_d}")
    if bundle.ols_error:
        lines.append(f"OLS unavailable: {bundle.ols_error}")
    if bundle.stability_bvar is not None:
        ols = bundle.stability_ols
        lines.append("max root modulus: "
                     + (f"OLS {ols.max_modulus:.4f} ({'stable' if ols.stable else 'unstable'}), "
                        if ols is not None else "")
                     + f"BVAR {bundle.stability_bvar.max_modulus:.4f} "
                     + f"({'stable' if bundle.stability_bvar.stable else 'unstable'})")
    for v in bundle.verdicts:
        lines.append(f"{v.source} -> {v.target}: {v.direction} "
                     f"(share positive {v.share_positive:.2f})")
    return "\n".join(lines)


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
        config = parse_config(text, base_dir=os.path.dirname(os.path.abspath(args.config)))
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CODES["config"]
    except ConfigError as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_CODES["config"]
    try:
        bundle = run_pipeline(config, args.command, args.output_dir)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    print(_summary(bundle))
    return 0


if __name__ == "__main__":
    sys.exit(main())
