"""Command-line interface: a thin client of the certification service.

By default requests run against an in-process instance of the FastAPI app
through an ASGI transport, so no server has to be running; ``--server URL``
points the same commands at a remote instance.  ``rankcertify serve`` starts
the HTTP server.

Exit codes for ``certify``: 0 stationary, 2 feasible but not stationary,
3 infeasible, 1 input error.  ``solve`` exits 0 iff the solver converged and
the result is certified stationary.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import httpx

ENV_SEED = "RANKCERTIFY_SEED"


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=300.0)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from starlette.testclient import TestClient

    from .service.app import app

    return TestClient(app)


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise SystemExit(_fail(f"file not found: {path}"))
    except json.JSONDecodeError as exc:
        raise SystemExit(_fail(f"malformed JSON in {path}: line {exc.lineno}, column {exc.colno}: {exc.msg}"))


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 1


def _cert_text(d: dict) -> str:
    lines = ["stationarity certificate"]
    for key, val in d.items():
        if key == "qualification" and isinstance(val, dict):
            lines.append("  qualification:")
            lines.extend(f"    {k}: {v}" for k, v in val.items())
        elif key == "notes":
            lines.extend(f"  note: {n}" for n in val)
        else:
            lines.append(f"  {key}: {val}")
    return "\n".join(lines)


def _print_cert(cert: dict, report: str) -> None:
    if report == "json":
        print(json.dumps(cert, indent=2))
    else:
        print(_cert_text(cert))


def _cert_exit_code(cert: dict) -> int:
    if not cert["feasible"]:
        return 3
    return 0 if cert["f_stationary"] else 2


def cmd_certify(args) -> int:
    problem = _load_json(args.problem_file)
    point = _load_json(args.point_file)
    payload = {"problem": problem, "point": point, "tol": args.tol, "rank_tol": args.rank_tol}
    if args.alpha is not None:
        payload["alpha"] = args.alpha
    with _client(args.server) as client:
        resp = client.post("/certify", json=payload)
    if resp.status_code != 200:
        return _fail(resp.json().get("detail", resp.text))
    cert = resp.json()
    _print_cert(cert, args.report)
    return _cert_exit_code(cert)


def cmd_solve(args) -> int:
    problem = _load_json(args.problem_file)
    if args.rank is not None:
        if args.rank < 1:
            return _fail(f"rank bound must be positive, got {args.rank}")
        problem["rank"] = args.rank
    seed = int(os.environ.get(ENV_SEED, args.seed))
    payload = {
        "problem": problem,
        "solver": args.solver,
        "seed": seed,
        "params": {"tol": args.tol, "max_iter": args.max_iter, "alpha0": args.alpha},
    }
    if args.x0:
        payload["x0"] = _load_json(args.x0)
    with _client(args.server) as client:
        resp = client.post("/solve", json=payload)
    if resp.status_code != 200:
        return _fail(resp.json().get("detail", resp.text))
    out = resp.json()
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write("iter,objective,feas_residual,step\n")
            for row in out["trace"]:
                fh.write(f"{row['iter']},{row['objective']},{row['feas_residual']},{row['step']}\n")
    cert = out["certificate"]
    if args.report == "json":
        print(json.dumps(out, indent=2))
    else:
        print(f"converged: {out['converged']} ({out['stop_reason']})")
        print(_cert_text(cert))
    certified = cert["f_stationary"] or cert["alpha_stationary"]
    return 0 if (out["converged"] and certified) else 2


def cmd_demo(args) -> int:
    with _client(args.server) as client:
        resp = client.get(f"/demos/{args.name}")
    if resp.status_code != 200:
        return _fail(resp.json().get("detail", resp.text))
    out = resp.json()
    if args.report == "json":
        print(json.dumps(out, indent=2))
    else:
        print(f"demo: {out['name']}")
        print(out["description"])
        print("expected:")
        for k, v in out["expected"].items():
            print(f"  {k}: {v}")
        if "certificate" in out:
            print(_cert_text(out["certificate"]))
        else:
            print("results:")
            print(json.dumps(out["results"], indent=2))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rankcertify", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--server", default=None, help="remote service URL (default: in-process)")
        p.add_argument("--report", choices=("json", "text"), default="text")

    p = sub.add_parser("certify", help="certify a candidate point against a problem file")
    p.add_argument("problem_file")
    p.add_argument("point_file")
    p.add_argument("--alpha", type=float, default=None, help="step size for the alpha test (default 0.5*beta)")
    p.add_argument("--tol", type=float, default=1e-8, help="stationarity tolerance")
    p.add_argument("--rank-tol", type=float, default=1e-10, dest="rank_tol")
    common(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("solve", help="run a solver and certify the result")
    p.add_argument("problem_file")
    p.add_argument("--solver", choices=("ap", "alm"), default="alm")
    p.add_argument("--alpha", type=float, default=1.0, help="initial step size")
    p.add_argument("--rank", type=int, default=None, help="override the problem's rank bound")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=2000, dest="max_iter")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", default=None, help="write the iteration trace to this CSV file")
    p.add_argument("--x0", default=None, help="initial point file (matrix JSON)")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("demo", help="run a bundled worked example")
    p.add_argument("name", choices=("hankel3", "lrr4", "example21"))
    common(p)
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        raise
    except httpx.HTTPError as exc:
        return _fail(f"service unreachable: {exc}")


if __name__ == "__main__":
    sys.exit(main())
