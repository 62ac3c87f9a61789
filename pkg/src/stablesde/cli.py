"""Command-line front end: `stablesde <command> --config <path> [--seed N] [--out DIR]`.

Commands: hk-check, epsilon0, sampler-validate, resolvent-compare,
decay-check, bifurcation, and `run --all` which executes the default suite
(the acceptance gate).  Every invocation writes its artifacts plus a
manifest (config hash, package and library versions, seeds, output
checksums) into the output directory; re-running the same configuration
reproduces all outputs byte for byte.

Exit codes: 0 all assertions passed; 1 an experiment assertion failed (the
failing rows are printed); 2 configuration error (machine-readable error
list on stderr).

Precedence: config file values override built-in defaults, command-line
flags override the config file.  STABLESDE_THREADS caps kernel worker
threads.
"""

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .errors import ConfigurationError, DomainError
from .experiments import COMMANDS, default_suite, run_experiment
from .kernels import backend_name

EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_CONFIG = 2


def _load_config(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigurationError(f"config file not found: {path}")
    text = p.read_text()
    if p.suffix == ".toml":
        try:
            import tomllib
        except ImportError as exc:  # python < 3.11
            raise ConfigurationError(
                "TOML configs need Python >= 3.11; use JSON"
            ) from exc
        return tomllib.loads(text)
    return json.loads(text)


def _config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _write_outputs(out_dir: Path, result, config: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    checksums = {}
    for name, content in result.files.items():
        data = content.encode() if isinstance(content, str) else content
        (out_dir / name).write_bytes(data)
        checksums[name] = hashlib.sha256(data).hexdigest()
    manifest = {
        "command": result.command,
        "config": config,
        "config_sha256": _config_hash(config),
        "package_version": __version__,
        "numpy_version": np.__version__,
        "scipy_version": scipy.__version__,
        "kernel_backend": backend_name(),
        "seed": config.get("seed", 0),
        "passed": result.passed,
        "outputs": checksums,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=1, sort_keys=True) + "\n"
    )


def _run_single(config: dict, out_dir: Path) -> int:
    try:
        result = run_experiment(config)
    except (ConfigurationError, DomainError, KeyError, TypeError) as exc:
        print(json.dumps({"errors": [str(exc)]}), file=sys.stderr)
        return EXIT_CONFIG
    _write_outputs(out_dir, result, config)
    for line in result.failures:
        print(f"FAIL [{result.command}] {line}", file=sys.stderr)
    status = "pass" if result.passed else "FAIL"
    print(f"{result.command}: {status} -> {out_dir}")
    return EXIT_OK if result.passed else EXIT_ASSERTION


def _run_suite(fast: bool, out_root: Path, seed_override) -> int:
    worst = EXIT_OK
    for config in default_suite(fast=fast):
        name = config.pop("name")
        if seed_override is not None:
            config["seed"] = seed_override
        code = _run_single(config, out_root / name)
        worst = max(worst, code)
    print(f"suite: {'pass' if worst == EXIT_OK else 'FAIL'}")
    return worst


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stablesde",
        description="Numerical laboratory for supercritical stable-noise SDEs",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", required=True, help="JSON or TOML config file")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--out", default="out", help="output directory")
    p_run = sub.add_parser("run", help="run the default experiment suite")
    p_run.add_argument("--all", action="store_true",
                       help="full acceptance-scale suite")
    p_run.add_argument("--fast", action="store_true",
                       help="reduced sample sizes (smoke test)")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", default="out", help="output directory root")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        if not (args.all or args.fast):
            print("run: choose --all or --fast", file=sys.stderr)
            return EXIT_CONFIG
        return _run_suite(args.fast and not args.all, Path(args.out), args.seed)
    try:
        config = _load_config(args.config)
    except (ConfigurationError, json.JSONDecodeError) as exc:
        print(json.dumps({"errors": [str(exc)]}), file=sys.stderr)
        return EXIT_CONFIG
    if config.get("command", args.command) != args.command:
        print(json.dumps({"errors": [
            f"config command {config.get('command')!r} does not match "
            f"invoked command {args.command!r}"
        ]}), file=sys.stderr)
        return EXIT_CONFIG
    config["command"] = args.command
    if args.seed is not None:
        config["seed"] = args.seed
    return _run_single(config, Path(args.out))


if __name__ == "__main__":
    sys.exit(main())
