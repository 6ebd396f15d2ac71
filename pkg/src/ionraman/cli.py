"""Command-line entry point: ``ionraman run|validate|crossmodel``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .integrate import IntegrationError, MonitorViolation, StiffnessError
from .scenarios import (
    ConfigError,
    PRESETS,
    apply_overrides,
    parse_config,
    preset,
    render_config,
    run_crossmodel,
    run_scenario,
)

EXIT_OK, EXIT_CONFIG, EXIT_MONITOR = 0, 2, 3

log = logging.getLogger("ionraman")


def _load(args):
    if args.config and getattr(args, "preset", None):
        raise ConfigError("give either --config or --preset, not both")
    if args.config:
        cfg = parse_config(Path(args.config).read_text())
    elif getattr(args, "preset", None):
        cfg = preset(args.preset)
    else:
        raise ConfigError("one of --config or --preset is required")
    if getattr(args, "override", None):
        cfg = apply_overrides(cfg, args.override)
    if getattr(args, "out", None):
        cfg = cfg.with_(out=args.out)
    return cfg


def _cmd_run(args) -> int:
    cfg = _load(args)
    fit = True if args.fit else None
    _, summary = run_scenario(cfg, fit=fit)
    sys.stdout.write(summary.render())
    return EXIT_OK


def _cmd_validate(args) -> int:
    cfg = _load(args)
    sys.stdout.write(render_config(cfg))
    return EXIT_OK


def _cmd_crossmodel(args) -> int:
    cfg = _load(args)
    result = run_crossmodel(cfg, n_samples=args.samples)
    sys.stdout.write(result.render())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ionraman", description="Raman-driven trapped-ion master-equation simulator.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, presets=True):
        p.add_argument("--config", help="key = value scenario file")
        if presets:
            p.add_argument("--preset", choices=sorted(PRESETS))
        p.add_argument("--override", action="append", metavar="KEY=VALUE", help="override one key (repeatable)")

    p = sub.add_parser("run", help="integrate a scenario and write trajectory + summary")
    common(p)
    p.add_argument("--out", help="trajectory path (overrides the config)")
    p.add_argument("--fit", action="store_true", help="always fit a damped cosine to P_down")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("validate", help="parse a config and print its resolved form")
    common(p)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("crossmodel", help="compare three-level and effective dynamics")
    common(p)
    p.add_argument("--samples", type=int, default=400)
    p.set_defaults(func=_cmd_crossmodel)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, StiffnessError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (MonitorViolation, IntegrationError) as exc:
        print(f"integration aborted: {exc}", file=sys.stderr)
        return EXIT_MONITOR


if __name__ == "__main__":
    sys.exit(main())
