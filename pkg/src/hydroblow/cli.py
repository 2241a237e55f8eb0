"""Command-line front end: a thin client over the HTTP service.

Every subcommand resolves its parameters from an optional JSON config
document (one section per command) overridden by explicit flags, posts one
request, and writes the returned files plus the resolved config verbatim.
All rendering happens server-side, so `--server URL` against a remote
instance produces byte-identical artifacts to the default in-process mode.

Exit codes: 0 success / verdict pass; 2 domain error (bad input, unknown
config key); 3 certification or trace-match failure; 4 no-blowup verdict;
5 resolution exhaustion before the first checkpoint; 6 step-size underflow
without threshold crossing.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import httpx

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_CERTIFICATION = 3
EXIT_NO_BLOWUP = 4
EXIT_EXHAUSTION = 5
EXIT_UNDERFLOW = 6

_KIND_EXIT = {
    "domain": EXIT_DOMAIN,
    "certification": EXIT_CERTIFICATION,
    "convergence": EXIT_CERTIFICATION,
    "no_blowup": EXIT_NO_BLOWUP,
    "step_underflow": EXIT_UNDERFLOW,
}

_VERDICT_EXIT = {
    "blowup": EXIT_OK,
    "pass": EXIT_OK,
    "no_blowup": EXIT_NO_BLOWUP,
    "trace_mismatch": EXIT_CERTIFICATION,
    "exhausted_early": EXIT_EXHAUSTION,
    "step_underflow": EXIT_UNDERFLOW,
}


def _float_list(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part.strip() != ""]


_COMMON_FLAGS: dict[str, dict] = {
    "m": {"type": float, "help": "profile parameter m > 0"},
    "H": {"type": float, "help": "channel height"},
}

_COMMAND_FLAGS: dict[str, dict[str, dict]] = {
    "profile": {
        **_COMMON_FLAGS,
        "N": {"type": int, "help": "grid intervals (N+1 nodes)"},
        "grid": {"type": str, "choices": ["chebyshev", "uniform"], "help": "node layout"},
        "s": {"type": int, "help": "arches; s >= 2 builds the glued sign-changing profile"},
        "tol": {"type": float, "help": "certification tolerance override"},
    },
    "simulate1d": {
        **_COMMON_FLAGS,
        "N": {"type": int, "help": "grid intervals"},
        "t_end": {"type": float, "help": "integration end time"},
        "amplitude": {"type": float, "help": "initial data = amplitude * phi"},
        "rel_tol": {"type": float, "help": "relative step tolerance"},
        "abs_tol": {"type": float, "help": "absolute step tolerance"},
        "blowup_threshold": {"type": float, "help": "terminate when max|W| crosses this"},
        "max_steps": {"type": int, "help": "accepted-step budget"},
        "snapshot_times": {"type": _float_list, "help": "comma-separated snapshot times"},
        "method": {"type": str, "choices": ["spectral", "fd4"], "help": "derivative scheme"},
    },
    "simulate2d": {
        **_COMMON_FLAGS,
        "L": {"type": float, "help": "horizontal period"},
        "k": {"type": int, "help": "seeded wavenumber"},
        "k_max": {"type": int, "help": "retained Fourier modes"},
        "Nz": {"type": int, "help": "vertical Chebyshev intervals"},
        "nu": {"type": float, "help": "artificial viscosity (0 = inviscid)"},
        "t_end": {"type": float, "help": "integration end time"},
        "rel_tol": {"type": float, "help": "relative step tolerance"},
        "abs_tol": {"type": float, "help": "absolute step tolerance"},
        "filter_strength": {"type": float, "help": "exponential filter strength (0 = off)"},
        "snapshot_times": {"type": _float_list, "help": "comma-separated checkpoint times"},
        "trace_tol": {"type": float, "help": "allowed relative trace error"},
        "exhaustion_limit": {"type": float, "help": "top-band energy fraction limit"},
        "max_steps": {"type": int, "help": "accepted-step budget"},
    },
    "sweep": {
        "m_list": {"type": _float_list, "help": "comma-separated m values"},
        "H": {"type": float, "help": "channel height"},
        "profile_N": {"type": int, "help": "grid intervals for certification"},
        "sim_N": {"type": int, "help": "grid intervals for the 1D run"},
        "t_end": {"type": float, "help": "1D run end time"},
        "rel_tol": {"type": float, "help": "relative step tolerance"},
        "abs_tol": {"type": float, "help": "absolute step tolerance"},
    },
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hydroblow",
        description="Self-similar blowup profiles and channel-flow simulations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command, flags in _COMMAND_FLAGS.items():
        p = sub.add_parser(command, help=f"run the {command} pipeline")
        for name, spec in flags.items():
            kwargs = {"default": None, "help": spec["help"], "type": spec["type"]}
            if "choices" in spec:
                kwargs["choices"] = spec["choices"]
            p.add_argument(f"--{name.replace('_', '-')}", dest=name, **kwargs)
        p.add_argument("--config", type=Path, default=None, help="JSON config document")
        p.add_argument("--outdir", type=Path, default=Path("."), help="output directory")
        p.add_argument("--server", type=str, default=None, help="remote service URL")
    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", type=str, default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8077)
    return parser


def _load_section(config_path: Path | None, command: str) -> dict:
    if config_path is None:
        return {}
    try:
        document = json.loads(config_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SystemExit(f"hydroblow: cannot read config {config_path}: {exc}")
    if not isinstance(document, dict):
        raise SystemExit(f"hydroblow: config root must be an object: {config_path}")
    section = document.get(command, {})
    if not isinstance(section, dict):
        raise SystemExit(f"hydroblow: config section {command!r} must be an object")
    return section


class _InProcessClient:
    """Synchronous facade posting straight into the ASGI app, no socket."""

    def __init__(self):
        from .service import create_app

        self._app = create_app()

    def post(self, path: str, json: dict | None = None) -> httpx.Response:
        import asyncio

        async def go():
            transport = httpx.ASGITransport(app=self._app)
            async with httpx.AsyncClient(
                transport=transport, base_url="http://hydroblow", timeout=None
            ) as client:
                return await client.post(path, json=json)

        return asyncio.run(go())

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


def _client(server: str | None):
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    return _InProcessClient()


def _http_error_exit(payload: dict) -> int:
    detail = payload.get("detail")
    if isinstance(detail, list):
        # pydantic validation report: unknown keys, bounds, types
        for item in detail:
            loc = ".".join(str(part) for part in item.get("loc", ())[1:])
            print(f"hydroblow: invalid parameter {loc}: {item.get('msg')}", file=sys.stderr)
        return EXIT_DOMAIN
    if isinstance(detail, dict):
        name = detail.get("invariant")
        suffix = f" [{name}]" if name else ""
        print(f"hydroblow: {detail.get('kind')}: {detail.get('message')}{suffix}", file=sys.stderr)
        return _KIND_EXIT.get(detail.get("kind"), 1)
    print(f"hydroblow: request failed: {payload}", file=sys.stderr)
    return 1


def _write_outputs(outdir: Path, command: str, body: dict) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    for name, content in body.get("files", {}).items():
        (outdir / name).write_text(content, encoding="utf-8")
    resolved = {command: body.get("resolved", {})}
    text = json.dumps(resolved, indent=2, sort_keys=True) + "\n"
    (outdir / "config_resolved.json").write_text(text, encoding="utf-8")


def _summarize(command: str, body: dict) -> str:
    if command == "profile":
        return (
            f"profile: segments={body['segments']} residual={body['residual']:.3e} "
            f"phi_max={body['phi_max']:.6f}"
        )
    if command == "simulate1d":
        t_est = body["T_est"]
        t_text = "n/a" if t_est is None else f"{t_est:.6f}"
        return f"simulate1d: verdict={body['verdict']} T_est={t_text} reason={body['reason']}"
    if command == "simulate2d":
        err = body["max_rel_err_checked"]
        err_text = "n/a" if err is None else f"{err:.3e}"
        return (
            f"simulate2d: verdict={body['verdict']} max_rel_err={err_text} "
            f"exhausted_at={body['exhausted_at']}"
        )
    rows = body["rows"]
    good = sum(1 for r in rows if r["status"] == "ok")
    return f"sweep: {good}/{len(rows)} rows ok failed={body['failed']}"


def _run_command(args: argparse.Namespace) -> int:
    command = args.command
    section = _load_section(args.config, command)
    overrides = {
        name: getattr(args, name)
        for name in _COMMAND_FLAGS[command]
        if getattr(args, name) is not None
    }
    request = {**section, **overrides}
    with _client(args.server) as client:
        response = client.post(f"/{command}", json=request)
        if response.status_code != 200:
            return _http_error_exit(response.json())
        body = response.json()
    _write_outputs(args.outdir, command, body)
    print(_summarize(command, body))
    if command == "profile":
        return EXIT_OK
    if command == "sweep":
        if not body["failed"]:
            return EXIT_OK
        return _KIND_EXIT.get(body["first_failure"], EXIT_CERTIFICATION)
    return _VERDICT_EXIT.get(body["verdict"], 1)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "serve":
        import uvicorn

        from .service import create_app

        uvicorn.run(create_app(), host=args.host, port=args.port)
        return EXIT_OK
    return _run_command(args)


if __name__ == "__main__":
    sys.exit(main())
