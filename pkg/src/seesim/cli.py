"""Command-line entry points: scenario runs, the live service, and reports.

Exit codes: 0 success, 1 input error (bad config/scenario/arguments),
2 runtime failure. The SEESIM_LOG_DIR environment variable sets the artifact
root; --out overrides it.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .artifacts import read_runlog_csv, write_json
from .config import RobotConfig, load_config
from .control import tracking_summary
from .errors import ConfigError, ScenarioError, SeesimError


class _Parser(argparse.ArgumentParser):
    """argparse variant that reports usage problems as input errors (exit 1)."""

    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="seesim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="execute a scenario file")
    run.add_argument("scenario", help="scenario YAML document")
    run.add_argument("--config", help="robot config YAML (defaults apply if omitted)")
    run.add_argument("--out", help="artifact root (default: $SEESIM_LOG_DIR or ./runs)")

    serve = sub.add_parser("serve", help="start the live steering service")
    serve.add_argument("--config", help="robot config YAML")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8710)
    serve.add_argument("--frontend", help="directory of built UI assets to serve")

    report = sub.add_parser("report", help="summarise a run log and render figures")
    report.add_argument("runlog", help="run-log CSV produced by a closed_loop scenario")
    report.add_argument("--out", help="output directory (default: alongside the log)")
    return parser


def _load_cfg(path) -> RobotConfig:
    return load_config(path) if path else RobotConfig()


def _cmd_run(args) -> int:
    from .scenarios import load_scenario, output_root, run_scenario

    cfg = _load_cfg(args.config)
    scenario = load_scenario(args.scenario)
    run_scenario(cfg, scenario, out_dir=args.out)
    print(f"scenario {scenario.kind} -> {output_root(args.out) / scenario.output}")
    return 0


def _cmd_serve(args) -> int:
    from .server import serve

    cfg = _load_cfg(args.config)
    serve(cfg, host=args.host, port=args.port, frontend_dir=args.frontend)
    return 0


def _cmd_report(args) -> int:
    from . import figures

    log_path = Path(args.runlog)
    if not log_path.is_file():
        raise ScenarioError(f"run log not found: {log_path}")
    log = read_runlog_csv(log_path)
    outdir = Path(args.out) if args.out else log_path.parent
    outdir.mkdir(parents=True, exist_ok=True)
    stats = tracking_summary(log)
    summary = {
        "errors_mm": {key: {k: v * 1e3 for k, v in row.items()} for key, row in stats.items()},
        "samples": int(log.time.shape[0]),
        "source": log_path.name,
    }
    write_json(outdir / "report.json", summary)
    figures.runlog_figures(log, outdir)
    mean = summary["errors_mm"]["euclidean"]["mean"]
    print(f"report -> {outdir} (mean tracking error {mean:.3f} mm)")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {"run": _cmd_run, "serve": _cmd_serve, "report": _cmd_report}
    try:
        return handlers[args.command](args)
    except (ConfigError, ScenarioError, FileNotFoundError) as exc:
        print(f"seesim: input error: {exc}", file=sys.stderr)
        return 1
    except SeesimError as exc:
        print(f"seesim: runtime failure: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 2


if __name__ == "__main__":
    sys.exit(main())
