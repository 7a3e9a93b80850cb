"""Command-line surface: capacity runs, orbit traces, bound tables, verify.

Exit codes: 0 success, 1 usage error, 2 numeric non-convergence.  All
outputs are deterministic for a fixed (command, flags, seed) triple and
files are only written after the computation finishes.
"""

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import bodies as bd
from . import bounds as bn
from . import ehz
from . import orbits as ob
from . import verify
from .symcore import matrix_AL, matrix_Mt


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Provenance record embedded in JSON outputs; fixing it (plus the
    command) fixes every emitted byte."""

    command: str
    ts: list = field(default_factory=list)
    n_samples: int = 256
    restarts: int = 8
    seed: int = 0
    out_dir: str | None = None
    fmt: str = "csv"

    @classmethod
    def from_args(cls, args, ts=()):
        return cls(command=args.command, ts=[float(t) for t in ts],
                   n_samples=args.n_samples, restarts=args.restarts,
                   seed=args.seed, out_dir=args.out, fmt=args.format)

    def to_json(self) -> dict:
        return {"command": self.command, "ts": self.ts,
                "N": self.n_samples, "restarts": self.restarts,
                "seed": self.seed, "format": self.fmt}


def _parse_grid(spec: str) -> list:
    """Parse 'a:b:step' into an inclusive float grid."""
    try:
        a, b, step = (float(x) for x in spec.split(":"))
    except ValueError as exc:
        raise UsageError("grid must look like a:b:step") from exc
    if step <= 0 or b < a:
        raise UsageError("grid must satisfy a <= b with positive step")
    count = int(round((b - a) / step))
    vals = [round(a + i * step, 12) for i in range(count + 1)]
    return [v for v in vals if a - 1e-12 <= v <= b + 1e-12]


def _body_from_spec(spec: dict):
    kind = spec.get("kind")
    if kind == "ball4":
        return bd.CapacityBall(float(spec.get("r", 1.0)), 2)
    if kind == "ellipsoid":
        radii = spec.get("radii")
        if not radii:
            raise UsageError("ellipsoid body needs a radii list")
        return bd.EllipsoidBody.from_radii([float(r) for r in radii])
    if kind == "intersection":
        t = spec.get("t")
        if t is None:
            raise UsageError("intersection body needs t")
        return bd.ball_cap_cylinder_intersection(float(t))
    if kind == "mt-image":
        t = spec.get("t")
        if t is None:
            raise UsageError("mt-image body needs t")
        return bd.EllipsoidBody.from_linear_image(matrix_Mt(float(t)))
    if kind == "al-scaled":
        L = float(spec.get("L", 1.0))
        if "t" in spec and spec["t"] is not None:
            M = matrix_AL(L) @ matrix_Mt(float(spec["t"]))
            return bd.EllipsoidBody.from_linear_image(M)
        return bd.EllipsoidBody.from_linear_image(matrix_AL(L), float(spec.get("r", 1.0)))
    raise UsageError("unknown body kind %r" % kind)


def _write(out_dir: Path | None, name: str, text: str) -> None:
    if out_dir is None:
        sys.stdout.write(text)
        return
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / name).write_text(text)


def cmd_ehz(args) -> int:
    spec = {"kind": args.body, "t": args.t, "r": args.r, "L": args.L,
            "radii": [float(x) for x in args.radii.split(",")] if args.radii else None}
    body = _body_from_spec(spec)
    cfg = RunConfig.from_args(args, ts=[args.t] if args.t is not None else [])
    res = ehz.ehz_capacity(body, N=cfg.n_samples, restarts=cfg.restarts, seed=cfg.seed)
    report = {"config": cfg.to_json(),
              "body": {k: v for k, v in spec.items() if v is not None}}
    report.update(res.to_json())
    out_dir = Path(args.out) if args.out else None
    if args.format == "json" or out_dir is not None:
        _write(out_dir, "ehz.json", json.dumps(report, indent=2) + "\n")
        if out_dir is not None:
            _write(out_dir, "loop.csv", res.loop.to_csv())
    print("capacity ≈ %.4f  (N=%d, restarts=%d, seed=%d, converged=%s)"
          % (res.capacity, res.n_samples, res.restarts, res.seed, res.converged))
    return 0 if res.converged else 2


def cmd_orbits(args) -> int:
    t = args.t
    if t is None or not 0.0 < t < 1.0:
        raise UsageError("orbits requires --t strictly between 0 and 1")
    cfg = RunConfig.from_args(args, ts=[t])
    action, best, found = ob.min_action_scan(t, samples=args.samples, seed=cfg.seed)
    lines = ["arc,region,angle,action_increment," +
             ",".join(f"end_{c}" for c in ("x1", "y1", "x2", "y2"))]
    for i, arc in enumerate(best.arcs):
        lines.append(",".join([str(i), arc.region, f"{arc.angle:.12g}",
                               f"{arc.action:.12g}"]
                              + [f"{c:.12g}" for c in arc.end]))
    out_dir = Path(args.out) if args.out else None
    _write(out_dir, "orbit.csv", "\n".join(lines) + "\n")
    summary = {"config": cfg.to_json(), "t": t, "min_action": action,
               "glide_plus_action": t,
               "closed_orbits_found": len(found)}
    if t < 0.5:
        summary["glide_minus_action"] = t * (3.0 - 4.0 * t * t)
    if out_dir is not None:
        _write(out_dir, "summary.json", json.dumps(summary, indent=2) + "\n")
    print("min action %.6f at t=%.4g" % (action, t))
    print("glide actions: PLUS %.6f%s"
          % (t, ", MINUS %.6f" % summary["glide_minus_action"] if t < 0.5 else ""))
    return 0


def cmd_bounds(args) -> int:
    grid = _parse_grid(args.grid)
    if any(not 0.0 < g < 1.0 for g in grid):
        raise UsageError("grid values must lie strictly inside (0, 1)")
    table = bn.BoundTable.on_grid(grid)
    out_dir = Path(args.out) if args.out else None
    _write(out_dir, "bounds.csv", table.to_csv())
    if args.format == "svg":
        _write(out_dir, "bounds.svg", table.to_svg())
    if out_dir is not None:
        print("wrote bound table for %d grid points to %s" % (len(grid), out_dir))
    return 0


def cmd_verify(args) -> int:
    report = verify.run_criteria(level=args.level, seed=args.seed)
    for item in report:
        status = "PASS" if item["passed"] else "FAIL"
        print("[%s] %s  measured=%s" % (status, item["name"], item["measured"]))
        if item["detail"]:
            print("        %s" % item["detail"])
    payload = json.dumps({"level": args.level, "seed": args.seed,
                          "criteria": report}, indent=2, default=str) + "\n"
    out_dir = Path(args.out) if args.out else None
    if out_dir is not None:
        _write(out_dir, "verify.json", payload)
    all_pass = all(item["passed"] for item in report)
    print("verify: %d/%d criteria passed" % (sum(i["passed"] for i in report), len(report)))
    return 0 if all_pass else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="symcap",
                                     description="symplectic capacity laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ehz", help="capacity of a convex body")
    p.add_argument("--body", required=True,
                   choices=["ball4", "ellipsoid", "intersection", "mt-image", "al-scaled"])
    p.add_argument("--t", type=float)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--radii", type=str, help="comma-separated capacities")
    p.set_defaults(func=cmd_ehz)

    p = sub.add_parser("orbits", help="closed characteristic scan")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--samples", type=int, default=32)
    p.set_defaults(func=cmd_orbits)

    p = sub.add_parser("bounds", help="lower-bound table and chart")
    p.add_argument("--grid", type=str, default="0.01:0.99:0.01",
                   help="t grid as a:b:step")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("verify", help="run the acceptance criteria")
    p.add_argument("--level", choices=["quick", "full"], default="quick")
    p.set_defaults(func=cmd_verify)

    for p in sub.choices.values():
        p.add_argument("--n-samples", type=int, default=256)
        p.add_argument("--restarts", type=int, default=8)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--format", choices=["csv", "json", "svg"], default="csv")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage problems; remap to the contract
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except UsageError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
