"""
Sparse Bellman CLI

Usage:
    python cli/main.py eval --r 1 --omega 0.2 --A 2
    python cli/main.py constants --r 1 --omega-n 3
    python cli/main.py surface --r 0.8 --what M --nx 200 --ny 100 -o m.csv
    python cli/main.py verify --r 1 --samples 100000 --seed 7
    python cli/main.py oracle extremizer --r 1 --n 2
    python cli/main.py op sparse --r 1 --sequence seq.json --function f.json

stdout carries only the JSON/CSV payload; logs go to stderr and logs/.
Exit codes: 0 success, 1 failed property or soundness check, 2 usage or domain error.
"""
import argparse
import os
import sys
from typing import Any, Dict, List, Optional, Tuple

BACKEND_DIR = os.path.abspath(os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "backend"))
if BACKEND_DIR not in sys.path:
    sys.path.insert(0, BACKEND_DIR)

from dotenv import load_dotenv
from pydantic import ValidationError

from api_helpers import APIHelpers, load_json_file
from api_models import RunConfig, SampleSpec
from errors import DomainError, ResourceError
from logger import logger
from serialization import csv_text, dumps, to_jsonable
from surface_export import SURFACE_COLUMNS

filename = os.path.basename(__file__)

THREADS_ENV = "SPARSE_BELLMAN_THREADS"
COMMAND_KEYS = ("command", "oracle_command", "op_kind", "config")


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", type=str, help="JSON file with the same keys as the flags")
    common.add_argument("--threads", type=int, help=f"Worker threads, 0 = auto (fallback: env {THREADS_ENV})")
    common.add_argument("--format", choices=["json", "csv"], help="Payload format (default json)")
    common.add_argument("-o", "--output", type=str, help="Write the payload to this path instead of stdout")
    common.add_argument("--seed", type=int, help="Seed of every random generator (default 7)")
    common.add_argument("--tolerance", type=float, help="Accepted violation (default 1e-9)")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(description="Sparse Bellman CLI", parents=[common],
                                     argument_default=argparse.SUPPRESS)
    subparsers = parser.add_subparsers(dest="command")

    def add(subs, name: str, help_text: str) -> argparse.ArgumentParser:
        return subs.add_parser(name, help=help_text, parents=[common], argument_default=argparse.SUPPRESS)

    eval_parser = add(subparsers, "eval", "Closed-form values at (omega, A) or (x, A, lambda)")
    eval_parser.add_argument("--r", type=float)
    eval_parser.add_argument("--omega", type=float)
    eval_parser.add_argument("--A", type=float)
    eval_parser.add_argument("--x", type=float)
    eval_parser.add_argument("--lambda", dest="lam", type=float)

    constants_parser = add(subparsers, "constants", "Sharp constants and the omega_n table")
    constants_parser.add_argument("--r", type=float)
    constants_parser.add_argument("--p", type=float)
    constants_parser.add_argument("--omega-n", dest="omega_n", type=int)

    surface_parser = add(subparsers, "surface", "CSV export of a surface over an (omega, A) grid")
    surface_parser.add_argument("--r", type=float)
    surface_parser.add_argument("--what", choices=sorted(SURFACE_COLUMNS))
    surface_parser.add_argument("--nx", type=int)
    surface_parser.add_argument("--ny", type=int)
    surface_parser.add_argument("--omega-max", dest="omega_max", type=float)
    surface_parser.add_argument("--lambda", dest="lam_surface", type=float, help="Level for --what B")

    verify_parser = add(subparsers, "verify", "Supersolution suite and closed-form checks")
    verify_parser.add_argument("--r", type=float)
    verify_parser.add_argument("--samples", type=int)
    verify_parser.add_argument("--candidate", type=str)

    oracle_parser = add(subparsers, "oracle", "Brute-force oracles")
    oracles = oracle_parser.add_subparsers(dest="oracle_command")
    dp_parser = add(oracles, "dp", "Value iteration compared against the closed form")
    dp_parser.add_argument("--r", type=float)
    dp_parser.add_argument("--grid", choices=["reference", "small"])
    dp_parser.add_argument("--depth", type=int)
    dp_parser.add_argument("--stride", type=int)
    dp_parser.add_argument("--gap-tol", dest="gap_tol", type=float)
    dp_parser.add_argument("--interp-tol", dest="interp_tol", type=float)
    enum_parser = add(oracles, "enum", "Exhaustive search over shallow trees")
    enum_parser.add_argument("--r", type=float)
    enum_parser.add_argument("--depth", type=int)
    enum_parser.add_argument("--omega", type=float)
    enum_parser.add_argument("--A", type=float)
    enum_parser.add_argument("--restarts", type=int)
    enum_parser.add_argument("--iterations", type=int)
    extremizer_parser = add(oracles, "extremizer", "Replay an explicit extremal configuration")
    extremizer_parser.add_argument("--r", type=float)
    extremizer_parser.add_argument("--n", type=int)
    extremizer_parser.add_argument("--maximal", action="store_true")
    extremizer_parser.add_argument("--omega", type=float)
    extremizer_parser.add_argument("--A", type=float)
    extremizer_parser.add_argument("--depth", type=int)

    op_parser = add(subparsers, "op", "Apply an operator to dyadic JSON payloads")
    kinds = op_parser.add_subparsers(dest="op_kind")
    for kind, help_text in (("sparse", "A_{alpha,r} in power form"), ("powermean", "Q_{alpha,p}"),
                            ("maximal", "Adapted maximal operator")):
        kind_parser = add(kinds, kind, help_text)
        kind_parser.add_argument("--sequence", type=str, required=True)
        kind_parser.add_argument("--function", type=str, required=True)
        if kind == "sparse":
            kind_parser.add_argument("--r", type=float)
        if kind == "powermean":
            kind_parser.add_argument("--p", type=float)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Flag > config file > environment > RunConfig defaults."""
    merged: Dict[str, Any] = {}
    env_threads = os.getenv(THREADS_ENV)
    if env_threads:
        try:
            merged["threads"] = int(env_threads)
        except ValueError:
            raise DomainError(f"{THREADS_ENV} must be an integer, got {env_threads!r}")
    config_path = getattr(args, "config", None)
    if config_path:
        loaded = load_json_file(config_path, "config")
        if not isinstance(loaded, dict):
            raise DomainError(f"Config file {config_path} must hold a JSON object")
        merged.update(loaded)
    merged.update({key: value for key, value in vars(args).items() if key not in COMMAND_KEYS})
    return RunConfig.model_validate(merged)


def _require(config: RunConfig, *names: str) -> None:
    missing = [name for name in names if getattr(config, name) is None]
    if missing:
        raise DomainError(f"Missing required parameter(s): {', '.join('--' + name for name in missing)}")


def _record_csv(record: Dict[str, Any]) -> str:
    """One-row CSV of the scalar fields of a payload."""
    flat = {key: value for key, value in to_jsonable(record).items() if not isinstance(value, (dict, list))}
    return csv_text(list(flat), [list(flat.values())])


def _render(payload: Any, config: RunConfig, csv_body: Optional[str] = None) -> str:
    if config.format == "csv":
        return csv_body if csv_body is not None else _record_csv(to_jsonable(payload))
    return dumps(payload) + "\n"


def cmd_eval(config: RunConfig, helpers: APIHelpers) -> Tuple[str, int]:
    _require(config, "A")
    payload = helpers.eval_helper(config.r, config.A, config.omega, config.x, config.lam)
    return _render(payload, config), 0


def cmd_constants(config: RunConfig, helpers: APIHelpers) -> Tuple[str, int]:
    # r has a default; constants --p 2 alone reports only the power-mean constant
    given = config.model_fields_set
    r = config.r if "r" in given or config.p is None or config.omega_n is not None else None
    payload = helpers.constants_helper(r, config.p, config.omega_n)
    csv_body = None
    if "omega_n" in payload:
        rows = zip(range(len(payload["omega_n"])), payload["omega_n"], payload["ratios"])
        csv_body = csv_text(["n", "omega_n", "ratio"], rows)
    return _render(payload, config, csv_body), 0


def cmd_surface(config: RunConfig, helpers: APIHelpers) -> Tuple[str, int]:
    text = helpers.surface_helper(config.r, config.what, config.nx, config.ny, config.omega_max, config.lam_surface)
    return text, 0


def cmd_verify(config: RunConfig, helpers: APIHelpers) -> Tuple[str, int]:
    spec = SampleSpec(sample_count=config.samples, rng_seed=config.seed, tolerance=config.tolerance)
    payload = helpers.verify_helper(config.r, spec, config.candidate)
    rows = ((report.property_name, report.samples, report.max_violation, report.tolerance, report.passed)
            for report in payload["reports"])
    csv_body = csv_text(["property", "samples", "max_violation", "tolerance", "passed"], rows)
    return _render(payload, config, csv_body), 0 if payload["passed"] else 1


def cmd_oracle(config: RunConfig, helpers: APIHelpers, oracle: Optional[str]) -> Tuple[str, int]:
    if oracle == "dp":
        report, table = helpers.dp_helper(config.r, config.grid, config.depth, config.stride,
                                          config.interp_tol, config.gap_tol)
        return _render(report, config, table.to_csv()), 0 if report.passed else 1
    if oracle == "enum":
        _require(config, "omega", "A")
        report = helpers.enum_helper(config.r, config.omega, config.A, config.depth, config.restarts,
                                     config.iterations, config.seed, config.tolerance)
        return _render(report, config), 0 if report.sound else 1
    if oracle == "extremizer":
        if config.maximal:
            _require(config, "omega", "A")
            report = helpers.maximal_extremizer_helper(config.omega, config.A, config.depth)
        else:
            report = helpers.extremizer_helper(config.r, config.n)
        return _render(report, config), 0 if report.exact else 1
    raise DomainError("oracle needs one of: dp, enum, extremizer")


def cmd_op(config: RunConfig, helpers: APIHelpers, kind: Optional[str]) -> Tuple[str, int]:
    if kind is None:
        raise DomainError("op needs one of: sparse, powermean, maximal")
    _require(config, "sequence", "function")
    if kind == "powermean":
        _require(config, "p")
    output = helpers.op_helper(kind, load_json_file(config.sequence, "sequence"),
                               load_json_file(config.function, "function"), config.r, config.p)
    return _render(output, config, helpers.operator_csv(output)), 0


def write_payload(text: str, output: Optional[str]) -> None:
    if output is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        with open(output, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    except OSError as e:
        raise DomainError(f"Cannot write {output}: {e}")
    logger.info(f"[{filename}] Wrote {len(text)} characters to {output}")


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    parser = build_parser()
    args = parser.parse_args(argv)
    command = getattr(args, "command", None)
    if command is None:
        parser.print_help(sys.stderr)
        return 2

    try:
        config = resolve_config(args)
        helpers = APIHelpers(threads=config.threads)
        if command == "eval":
            text, code = cmd_eval(config, helpers)
        elif command == "constants":
            text, code = cmd_constants(config, helpers)
        elif command == "surface":
            text, code = cmd_surface(config, helpers)
        elif command == "verify":
            text, code = cmd_verify(config, helpers)
        elif command == "oracle":
            text, code = cmd_oracle(config, helpers, getattr(args, "oracle_command", None))
        else:
            text, code = cmd_op(config, helpers, getattr(args, "op_kind", None))
        write_payload(text, config.output)
    except (DomainError, ResourceError, ValidationError) as e:
        logger.error(f"[{filename}] {command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 2
    if code != 0:
        logger.warning(f"[{filename}] {command} finished with failed checks")
    return code


if __name__ == "__main__":
    sys.exit(main())
