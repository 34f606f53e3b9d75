"""Command line client for the residua service.

Every check command builds a JSON payload, posts it to the service (an
in-process app by default, a remote one with --server), and prints the
returned record as canonical JSON.  Exit codes: 0 when the check passed,
1 when it ran but failed, 2 for usage and IO errors.

A --config file (JSON object keyed by flag name) supplies defaults for
any flag; explicit command line values win.  The RESIDUA_SEED
environment variable overrides --seed.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import os
import sys

import httpx

from .reports import (
    IoFailure,
    TOOL_VERSION,
    canonical_json,
    emit_report,
    study_rows_csv,
)
from .service import create_app

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

_LIST_FIELDS = {
    "factors": str,
    "ci": str,
    "units": str,
    "weights": int,
    "k": int,
    "mu": int,
    "nu": int,
    "deltas": float,
}


def _split_list(value, item_type):
    """Accept a comma string from the command line or a list from config."""
    if value is None:
        return None
    if isinstance(value, str):
        parts = [p.strip() for p in value.split(",")]
        parts = [p for p in parts if p]
    else:
        parts = list(value)
    try:
        return [item_type(p) for p in parts]
    except (TypeError, ValueError) as exc:
        raise _UsageError(f"bad list value {value!r}: {exc}") from None


def _parse_alpha(value):
    if value is None or not isinstance(value, str):
        return value
    try:
        rows = json.loads(value)
    except json.JSONDecodeError as exc:
        raise _UsageError(f"--alpha must be a JSON matrix: {exc}") from None
    return rows


def _parse_lambdas(value):
    """Semicolon-separated groups of comma-separated numbers."""
    if value is None or not isinstance(value, str):
        return value
    groups = [g for g in (chunk.strip() for chunk in value.split(";")) if g]
    return [_split_list(g, float) for g in groups]


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="residua",
        description="exact and numerical checks for residue currents on monomial data",
    )
    parser.add_argument("--version", action="version", version=TOOL_VERSION)
    sub = parser.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--config", help="JSON file with default flag values")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--server", help="base URL of a running service")

    p = sub.add_parser("gamma-check", help="curve vs iterated limits for one coefficient ratio")
    common(p)
    p.add_argument("--alpha", help="JSON exponent matrix, e.g. [[1,0],[1,1]]")
    p.add_argument("--k", help="comma multiplicities, default all 1")
    p.add_argument("--p", type=int, help="number of leading columns expanded")
    p.add_argument("--sigma", help="'id' or comma permutation of 1..r")
    p.add_argument("--mu", help="comma curve weights, strictly decreasing")
    p.add_argument("--random", type=int, help="run this many random instances instead")
    p.add_argument("--seed", type=int, help="seed for --random (default 0)")
    p.add_argument("--exploratory", action="store_true")

    p = sub.add_parser("ch-eval", help="iterated residue product of monomials")
    common(p)
    p.add_argument("--factors", help="comma monomials, innermost first")
    p.add_argument("--weights", help="comma curve weights")
    p.add_argument("--units", help="comma rational unit constants")
    p.add_argument("--testform", help="monomial|diff")
    p.add_argument("--profile", type=int, help="bump profile degree (default 4)")
    p.add_argument("--exploratory", action="store_true")

    p = sub.add_parser("product-eval", help="mixed product of U/R/M factors")
    common(p)
    p.add_argument("--factors", help="comma KIND:monomial[:unit[:pole]] factors")
    p.add_argument("--weights", help="comma curve weights")
    p.add_argument("--testform", help="monomial|diff")
    p.add_argument("--profile", type=int)
    p.add_argument("--exploratory", action="store_true")

    p = sub.add_parser("m-eval", help="product of positive closed factors")
    common(p)
    p.add_argument("--factors", help="comma monomials")
    p.add_argument("--weights", help="comma curve weights")
    p.add_argument("--testform", help="monomial|diff")
    p.add_argument("--profile", type=int)
    p.add_argument("--exploratory", action="store_true")

    p = sub.add_parser("duality", help="does multiplying by g kill the residue?")
    common(p)
    p.add_argument("--ci", help="comma monomials with disjoint supports")
    p.add_argument("--g", help="monomial to multiply in")

    p = sub.add_parser("quad-compare", help="cutoff quadrature along a path vs the exact value")
    common(p)
    p.add_argument("--factors", help="comma factors, bare monomials mean R blocks")
    p.add_argument("--weights", help="comma curve weights")
    p.add_argument("--testform", help="monomial|diff")
    p.add_argument("--profile", type=int)
    p.add_argument("--nu", help="comma path weights, strictly decreasing")
    p.add_argument("--deltas", help="comma base scales for the path")
    p.add_argument("--cutoff", choices=("smoothstep", "characteristic"))
    p.add_argument("--order", type=int, help="smoothstep order (default 2)")
    p.add_argument("--rtol", type=float, help="quadrature relative tolerance")
    p.add_argument("--tolerance", type=float, help="convergence verdict tolerance")
    p.add_argument("--lambda-tol", dest="lambda_tol", type=float)
    p.add_argument("--lambdas", help="semicolon groups of comma lambda values")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def _apply_config(args: argparse.Namespace) -> None:
    path = getattr(args, "config", None)
    if not path:
        return
    try:
        with open(path, encoding="utf-8") as handle:
            config = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise _UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(config, dict):
        raise _UsageError(f"config {path} must hold a JSON object")
    for key, value in config.items():
        dest = key.replace("-", "_")
        if not hasattr(args, dest):
            raise _UsageError(f"config key {key!r} is not a flag of {args.command}")
        current = getattr(args, dest)
        if current is None or current is False:
            setattr(args, dest, value)


def _payload(args: argparse.Namespace) -> dict:
    payload = {}
    skip = {"command", "config", "out", "format", "server"}
    for key, value in vars(args).items():
        if key in skip or value is None:
            continue
        if key in _LIST_FIELDS:
            value = _split_list(value, _LIST_FIELDS[key])
        elif key == "alpha":
            value = _parse_alpha(value)
        elif key == "lambdas":
            value = _parse_lambdas(value)
        payload[key] = value
    seed_env = os.environ.get("RESIDUA_SEED")
    if seed_env is not None and hasattr(args, "seed"):
        try:
            payload["seed"] = int(seed_env)
        except ValueError:
            raise _UsageError(f"RESIDUA_SEED must be an integer, got {seed_env!r}") from None
    return payload


def _post(server: str | None, command: str, payload: dict):
    if server:
        try:
            with httpx.Client(base_url=server, timeout=600.0) as client:
                response = client.post(f"/v1/{command}", json=payload)
                return response.status_code, response.json()
        except httpx.HTTPError as exc:
            raise _UsageError(f"cannot reach {server}: {exc}") from None

    async def go():
        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(
            transport=transport, base_url="http://service.local", timeout=600.0
        ) as client:
            response = await client.post(f"/v1/{command}", json=payload)
            return response.status_code, response.json()

    return asyncio.run(go())


def _render(body: dict, fmt: str) -> str:
    if fmt == "json":
        return canonical_json(body)
    if body.get("error"):
        # failed runs keep their structured record even in csv mode
        return canonical_json(body)
    rows = (body.get("report") or {}).get("study", {}).get("rows")
    if rows is None:
        raise _UsageError("csv format is only available for quad-compare reports")
    return study_rows_csv(rows)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    if args.command == "serve":
        import uvicorn

        uvicorn.run(create_app(), host=args.host, port=args.port)
        return EXIT_PASS
    try:
        _apply_config(args)
        payload = _payload(args)
        status, body = _post(args.server, args.command, payload)
        if status == 422:
            body = {
                "command": args.command,
                "inputs": payload,
                "error": {"type": "ValidationError", "message": json.dumps(body)},
                "usage": True,
                "pass": False,
                "toolVersion": TOOL_VERSION,
            }
        elif status not in (200, 400):
            raise _UsageError(f"service answered {status}: {body}")
        emit_report(_render(body, args.format), args.out)
    except _UsageError as exc:
        print(f"residua: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IoFailure as exc:
        print(f"residua: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if body.get("usage"):
        return EXIT_USAGE
    return EXIT_PASS if body.get("pass") else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
