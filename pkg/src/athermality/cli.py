"""Command-line client for the athermality service.

Every command marshals its inputs into a service request, posts it (to an
in-process instance by default, or to ``--server URL``), and writes the JSON
or CSV artifact.  Exit codes: 0 feasible / success, 1 infeasible, 2 parse
error, 3 precondition violation, 4 search budget exhausted.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from dataclasses import dataclass, field

import httpx

EXIT_FEASIBLE = 0
EXIT_INFEASIBLE = 1
EXIT_PARSE = 2
EXIT_PRECONDITION = 3
EXIT_BUDGET = 4


class _ExitWith(Exception):
    def __init__(self, code: int):
        self.code = code


@dataclass
class RunConfig:
    command: str
    inputs: dict = field(default_factory=dict)
    out: str | None = None
    fmt: str = "json"
    server: str | None = None


def _post(path: str, payload: dict, server: str | None) -> tuple[int, dict]:
    if server:
        with httpx.Client(base_url=server, timeout=600.0) as client:
            resp = client.post(path, json=payload)
            return resp.status_code, resp.json()

    async def _run():
        from .service import app

        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(
            transport=transport, base_url="http://athermality.internal", timeout=600.0
        ) as client:
            resp = await client.post(path, json=payload)
            return resp.status_code, resp.json()

    return asyncio.run(_run())


def _load_doc(path: str, beta: float | None) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot parse {path}: {exc}", file=sys.stderr)
        raise _ExitWith(EXIT_PARSE)
    if beta is not None:
        doc["beta"] = beta
    return doc


def _emit(config: RunConfig, text: str) -> None:
    if config.out:
        with open(config.out, "w") as fh:
            fh.write(text)
    else:
        print(text)


def _http_exit(status: int, body: dict) -> int:
    detail = body.get("detail", body)
    print(f"error ({status}): {detail}", file=sys.stderr)
    if status in (400, 422):
        return EXIT_PARSE
    if status == 409:
        return EXIT_PRECONDITION
    return EXIT_PARSE


def _decision_exit(decision: str) -> int:
    return {
        "Feasible": EXIT_FEASIBLE,
        "Infeasible": EXIT_INFEASIBLE,
        "NotFoundWithinBudget": EXIT_BUDGET,
    }.get(decision, EXIT_PARSE)


def run(config: RunConfig) -> int:
    """Dispatch one command; returns the process exit status."""
    handler = {
        "convert-check": _run_convert_check,
        "qubit-gpc": _run_qubit_gpc,
        "divergence": _run_divergence,
        "distill": _run_distill,
        "asymptotics": _run_asymptotics,
        "slar": _run_slar,
        "type-stats": _run_type_stats,
    }[config.command]
    return handler(config)


def _run_convert_check(config: RunConfig) -> int:
    status, body = _post("/v1/convert-check", config.inputs, config.server)
    if status != 200:
        return _http_exit(status, body)
    _emit(config, json.dumps(body, indent=2))
    return _decision_exit(body["decision"])


def _run_qubit_gpc(config: RunConfig) -> int:
    status, body = _post("/v1/qubit-gpc", config.inputs, config.server)
    if status != 200:
        return _http_exit(status, body)
    _emit(config, json.dumps(body, indent=2))
    if body.get("verdict"):
        return _decision_exit(body["verdict"]["decision"])
    return EXIT_FEASIBLE


def _run_divergence(config: RunConfig) -> int:
    status, body = _post("/v1/divergence", config.inputs, config.server)
    if status != 200:
        return _http_exit(status, body)
    _emit(config, json.dumps(body, indent=2))
    return EXIT_FEASIBLE


def _run_distill(config: RunConfig) -> int:
    status, body = _post("/v1/distill", config.inputs, config.server)
    if status != 200:
        return _http_exit(status, body)
    _emit(config, json.dumps(body, indent=2))
    return EXIT_FEASIBLE


def _run_asymptotics(config: RunConfig) -> int:
    status, body = _post("/v1/asymptotics", config.inputs, config.server)
    if status != 200:
        return _http_exit(status, body)
    if config.fmt == "csv":
        _emit(config, body["csv"])
    else:
        _emit(config, json.dumps({"curve": body["curve"], "rows": body["rows"]}, indent=2))
    return EXIT_FEASIBLE


def _run_slar(config: RunConfig) -> int:
    status, body = _post("/v1/slar", config.inputs, config.server)
    if status != 200:
        return _http_exit(status, body)
    _emit(config, json.dumps(body, indent=2))
    return EXIT_FEASIBLE


def _run_type_stats(config: RunConfig) -> int:
    status, body = _post("/v1/type-stats", config.inputs, config.server)
    if status != 200:
        return _http_exit(status, body)
    _emit(config, json.dumps(body, indent=2))
    return EXIT_FEASIBLE


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="athermality",
        description="Convertibility of athermality states and resource rates.",
    )
    parser.add_argument("--server", default=None, help="remote service URL (default: in-process)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=None, help="write the artifact to this path")
        p.add_argument("--beta", type=float, default=None, help="override beta from state files")

    p = sub.add_parser("convert-check", help="decide source -> target convertibility")
    p.add_argument("source")
    p.add_argument("target")
    p.add_argument("--mode", choices=["covariant", "gpc", "same-diagonal"], default="covariant")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--budget", type=int, default=20000)
    common(p)

    p = sub.add_parser("qubit-gpc", help="qubit closed-form decision or threshold sweep")
    p.add_argument("target")
    p.add_argument("--source", default=None)
    p.add_argument("--sweep", action="store_true")
    p.add_argument("--sweep-diagonal", type=float, default=0.5)
    p.add_argument("--tol", type=float, default=1e-9)
    common(p)

    p = sub.add_parser("divergence", help="entropies and divergences of one state")
    p.add_argument("state")
    p.add_argument(
        "--which",
        choices=["relative-entropy", "coherence", "dmax", "dmax-eps", "dmin-eps", "cost-gpo"],
        default="relative-entropy",
    )
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--reference", default=None, help="state file for the reference gamma")
    common(p)

    p = sub.add_parser("distill", help="single-shot distillable athermality")
    p.add_argument("state")
    p.add_argument("--eps", type=float, default=0.01)
    common(p)

    p = sub.add_parser("asymptotics", help="rate, cost, coherence or budget curves")
    p.add_argument("state")
    p.add_argument("--curve", choices=["distill", "cost", "coherence", "budget"], default="distill")
    p.add_argument("--alpha", type=float, default=0.75)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--n-max", type=int, default=None)
    p.add_argument("--format", choices=["json", "csv"], default="csv")
    common(p)

    p = sub.add_parser("slar", help="sublinear reference system for a pure state")
    p.add_argument("state")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, default=0.75)
    common(p)

    p = sub.add_parser("type-stats", help="type counts, typical sets and tail bounds")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--p", default=None, help="comma-separated source distribution")
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--out", default=None)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    beta = getattr(args, "beta", None)
    inputs: dict = {}
    if args.command == "convert-check":
        inputs = {
            "source": _load_doc(args.source, beta),
            "target": _load_doc(args.target, beta),
            "mode": args.mode,
            "tol": args.tol,
            "budget": args.budget,
        }
    elif args.command == "qubit-gpc":
        inputs = {
            "target": _load_doc(args.target, beta),
            "sweep": args.sweep,
            "sweep_diagonal": args.sweep_diagonal,
            "tol": args.tol,
        }
        if args.source:
            inputs["source"] = _load_doc(args.source, beta)
        elif not args.sweep:
            print("error: qubit-gpc needs --source or --sweep", file=sys.stderr)
            raise _ExitWith(EXIT_PARSE)
    elif args.command == "divergence":
        inputs = {
            "state": _load_doc(args.state, beta),
            "which": args.which,
            "eps": args.eps,
        }
        if args.reference:
            inputs["reference"] = _load_doc(args.reference, beta)
    elif args.command == "distill":
        inputs = {"state": _load_doc(args.state, beta), "eps": args.eps}
    elif args.command == "asymptotics":
        inputs = {
            "state": _load_doc(args.state, beta),
            "curve": args.curve,
            "alpha": args.alpha,
        }
        if args.n is not None:
            inputs["n"] = args.n
        if args.n_max is not None:
            inputs["n_max"] = args.n_max
    elif args.command == "slar":
        inputs = {"state": _load_doc(args.state, beta), "n": args.n, "alpha": args.alpha}
    elif args.command == "type-stats":
        inputs = {"n": args.n, "m": args.m}
        if args.p is not None:
            try:
                inputs["p"] = [float(x) for x in args.p.split(",")]
            except ValueError:
                print(f"error: cannot parse distribution {args.p!r}", file=sys.stderr)
                raise _ExitWith(EXIT_PARSE)
        if args.eps is not None:
            inputs["eps"] = args.eps
    return RunConfig(
        command=args.command,
        inputs=inputs,
        out=getattr(args, "out", None),
        fmt=getattr(args, "format", "json"),
        server=args.server,
    )


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "serve":
        import uvicorn

        from .service import app

        uvicorn.run(app, host=args.host, port=args.port)
        return 0
    try:
        return run(_config_from_args(args))
    except _ExitWith as exc:
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
