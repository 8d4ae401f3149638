"""Batch experiment runner: a thin client of the experiment service.

Usage: mangrad <subcommand> --config <file> [--check] [--seed N] [--out DIR]

Each subcommand validates its JSON config against the service request
schema, runs the corresponding handler in-process, and writes the returned
files to the output directory. Timestamps live only in the meta.json
sidecar, so repeated runs with the same config and seed are byte-identical.

Exit codes: 0 ok, 2 config/validation error, 3 numeric failure,
4 check failure (design verification always gates; other commands gate
under --check).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from pydantic import ValidationError

from . import __version__
from .errors import NumericError, UsageError
from .service import handlers, models

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_CHECK = 4

_COMMANDS = {
    "rgd-run": (models.RgdRunRequest, handlers.run_rgd, False),
    "saddle-hitting": (models.SaddleHittingRequest, handlers.run_saddle_hitting, False),
    "ou-hitting": (models.OuHittingRequest, handlers.run_ou_hitting, False),
    "design-verify": (models.DesignVerifyRequest, handlers.run_design_verify, True),
    "stats-check": (models.StatsCheckRequest, handlers.run_stats_check, False),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mangrad", description=__doc__)
    parser.add_argument("--version", action="version", version=f"mangrad {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--check", action="store_true", help="exit 4 if any result check fails")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=None, help="override the output directory")
    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config file {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path!r} is not valid JSON: {exc}") from exc


def _write_outputs(out_dir: Path, response, started: float, command: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, content in response.files.items():
        (out_dir / name).write_text(content, encoding="utf-8", newline="\n")
    meta = {
        "command": command,
        "version": __version__,
        "timestamp_utc": datetime.now(timezone.utc).isoformat(),
        "duration_s": time.monotonic() - started,
        "checks": [c.model_dump() for c in response.checks],
    }
    (out_dir / "meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .service.app import app

        uvicorn.run(app, host=args.host, port=args.port)
        return EXIT_OK

    request_model, handler, always_gate = _COMMANDS[args.command]
    try:
        payload = _load_config(args.config)
        if args.seed is not None:
            payload["seed"] = args.seed
        if args.out is not None:
            payload["output_dir"] = args.out
        out_dir = payload.get("output_dir") or f"mangrad_out/{args.command}"
        try:
            request = request_model.model_validate(payload)
        except ValidationError as exc:
            print(f"config error:\n{exc}", file=sys.stderr)
            return EXIT_CONFIG
        started = time.monotonic()
        response = handler(request)
    except UsageError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    _write_outputs(Path(out_dir), response, started, args.command)
    for check in response.checks:
        status = "PASS" if check.passed else "FAIL"
        print(f"[{status}] {check.name}: {check.detail}")
    print(f"wrote {len(response.files)} files to {out_dir}")

    failed = [c for c in response.checks if not c.passed]
    if failed and (args.check or always_gate):
        return EXIT_CHECK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
