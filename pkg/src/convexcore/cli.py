"""Command-line interface.

Every subcommand embeds its :class:`RunConfig` in the output.  JSON reports
go to ``<out>/<command>.json`` when ``--out`` is given and to standard output
otherwise; clouds are CSV files with the same rule.  Exit codes: 0 ok,
2 bad input, 3 geometric or numerical failure, 4 resource cap.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Any, Sequence

import numpy as np

from . import gallery as gal
from . import limitsets as ls
from . import pqgeom as pq
from .cloud import PointCloud
from .config import DEFAULT, RunConfig, resolve_seed
from .domains import ConvexDomain, _complement_basis, domain_from_json, dual_domain
from .errors import ConvexCoreError, InputError
from .groups import GroupSpec, gap_profile, orbit, qi_defect, word_ball
from .schemas import validate


# ---------------------------------------------------------------------------
# I/O helpers
# ---------------------------------------------------------------------------


def _clean(obj: Any) -> Any:
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None, -0.0 to 0.0."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v + 0.0 if math.isfinite(v) else None
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _read_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read JSON from {path}: {exc}") from exc


def _read_group(path: str) -> GroupSpec:
    spec = _read_json(path)
    if isinstance(spec, dict) and "group" in spec and "generators" not in spec:
        spec = spec["group"]
    return GroupSpec.from_json(spec)


def _read_domain(path: str | None) -> ConvexDomain | None:
    if path is None:
        return None
    spec = _read_json(path)
    if isinstance(spec, dict) and "domain" in spec and "type" not in spec:
        spec = spec["domain"]
    return domain_from_json(spec)


def _read_form(path: str) -> pq.PQForm:
    spec = _read_json(path)
    if isinstance(spec, dict) and "form" in spec and "p" not in spec and "gram" not in spec:
        spec = spec["form"]
    return pq.PQForm.from_json(spec)


def _read_cloud(path: str) -> PointCloud:
    try:
        with open(path) as fh:
            text = fh.read()
        return PointCloud.from_csv(text)
    except (OSError, ValueError, IndexError) as exc:
        raise InputError(f"cannot read cloud from {path}: {exc}") from exc


def _emit(args, name: str, text: str) -> None:
    if args.out is None:
        sys.stdout.write(text)
        return
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, name)
    with open(path, "w") as fh:
        fh.write(text)
    print(path)


def _report(args, name: str, body: dict, schema: str) -> None:
    body = _clean(dict(body, run_config=args.run_config.to_dict()))
    validate(body, schema)
    _emit(args, f"{name}.json", dumps(body))


# ---------------------------------------------------------------------------
# SVG (chart dimension 2 only)
# ---------------------------------------------------------------------------


def _chart_coords(omega: ConvexDomain, P: np.ndarray) -> np.ndarray:
    c = omega.chart / np.linalg.norm(omega.chart)
    B = _complement_basis(omega.chart)
    cx = P @ c
    keep = np.abs(cx) > 1e-12
    return (P[keep] / cx[keep, None]) @ B


def svg_chart(omega: ConvexDomain, cloud: PointCloud, size: int = 512, frontier: int = 256) -> str:
    """Frontier polygon and cloud in the domain's affine chart."""
    F = _chart_coords(omega, omega.frontier_samples(frontier, np.random.default_rng(0)))
    ctr = F.mean(axis=0)
    F = F[np.argsort(np.arctan2(F[:, 1] - ctr[1], F[:, 0] - ctr[0]))]
    X = _chart_coords(omega, cloud.points) if len(cloud) else np.zeros((0, 2))
    allp = np.vstack([F, X])
    lo, hi = allp.min(axis=0), allp.max(axis=0)
    scale = 0.9 * size / max(float(np.max(hi - lo)), 1e-12)

    def px(p):
        x = (p[0] - lo[0]) * scale + 0.05 * size
        y = size - ((p[1] - lo[1]) * scale + 0.05 * size)
        return f"{x:.3f},{y:.3f}"

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        '<rect width="100%" height="100%" fill="white"/>',
        '<polygon fill="none" stroke="black" stroke-width="1" points="' + " ".join(px(p) for p in F) + '"/>',
    ]
    for p in X:
        x, y = px(p).split(",")
        out.append(f'<circle cx="{x}" cy="{y}" r="1.2" fill="#1f4e9c"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _maybe_svg(args, name: str, omega: ConvexDomain | None, cloud: PointCloud) -> None:
    if args.out is None or omega is None or omega.n != 3:
        return
    _emit(args, f"{name}.svg", svg_chart(omega, cloud))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _parse_params(items: Sequence[str]) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise InputError(f"parameter {item!r} is not of the form key=value")
        k, v = item.split("=", 1)
        out[k] = v
    return out


def cmd_gallery(args) -> int:
    if args.action == "list":
        body = {"examples": [{"name": n, "params": gal.GALLERY[n][1]} for n in gal.gallery_names()]}
        _report(args, "gallery_list", body, "gallery_list")
        return 0
    if not args.name:
        raise InputError("gallery emit needs an example name")
    try:
        ex = gal.build(args.name, **_parse_params(args.param))
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from exc
    _report(args, f"gallery_{args.name}", ex.to_json(), "gallery_emit")
    return 0


def _orbit_seeds(omega: ConvexDomain, k: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    S = omega.interior_point.rep[None, :]
    if k > 1:
        S = np.vstack([S, ls.random_interior_points(omega, k - 1, rng)])
    return S[:k]


def cmd_orbit(args) -> int:
    G = _read_group(args.group)
    omega = _read_domain(args.domain)
    if args.seeds < 1:
        raise InputError("--seeds must be at least 1")
    ball = word_ball(G, args.radius, DEFAULT, jobs=args.jobs)
    cloud = orbit(G, omega, _orbit_seeds(omega, args.seeds, args.run_config.seed), args.radius, ball=ball)
    _emit(args, "orbit.csv", cloud.to_csv(args.run_config.to_dict()))
    _maybe_svg(args, "orbit", omega, cloud)
    return 0


def cmd_limitset(args) -> int:
    G = _read_group(args.group)
    omega = _read_domain(args.domain)
    seed = args.run_config.seed
    ball = word_ball(G, args.radius, DEFAULT, jobs=args.jobs)
    if args.kind == "proximal":
        cloud = ls.proximal_limit_set(G, args.radius, ball=ball)
    else:
        if omega is None:
            omega = ls.find_omega_max(G, args.radius, ball, DEFAULT, seed)
            if omega is None:
                raise ls.NotProperlyConvex("no properly convex invariant domain found; pass --domain")
        if args.kind == "orbital":
            cloud = ls.orbital_limit_set(G, omega, None, args.radius, ball=ball, seed=seed)
        else:
            cloud = ls.limit_cloud(G, omega, args.radius, ball, DEFAULT, seed)
    _emit(args, "limitset.csv", cloud.to_csv(args.run_config.to_dict()))
    _maybe_svg(args, "limitset", omega, cloud)
    return 0


def diagnose_report(G: GroupSpec, omega: ConvexDomain | None, R: int, seed: int, jobs: int = 1) -> dict:
    """The body of a diagnose report (without the run configuration)."""
    ball = word_ball(G, R, DEFAULT, jobs=jobs)
    v = ls.verdict(G, omega, R, DEFAULT, seed, ball=ball, jobs=jobs)
    gp = gap_profile(G, R, (1, 2), ball=ball)
    dom = omega
    if dom is None and v.evidence.get("domain_source") == "omega_max":
        dom = ls.find_omega_max(G, R, ball, DEFAULT, seed)
    qi = None
    if dom is not None:
        try:
            qi = qi_defect(G, dom, dom.interior_point, R, ball=ball).to_dict()
        except ConvexCoreError:
            qi = None
    return {
        "verdict": v.verdict,
        "gap_profile": gp.to_dict(),
        "qi_defect": qi,
        "segments": v.evidence.get("segments", []),
        "pets": v.evidence.get("pets", []),
        "evidence": v.evidence,
        "domain": dom.to_json() if dom is not None else None,
    }


def cmd_diagnose(args) -> int:
    G = _read_group(args.group)
    omega = _read_domain(args.domain)
    body = diagnose_report(G, omega, args.radius, args.run_config.seed, args.jobs)
    _report(args, "diagnose", body, "diagnose")
    return 0


def cmd_dual(args) -> int:
    omega = _read_domain(args.domain)
    _report(args, "dual", {"domain": dual_domain(omega, args.samples).to_json()}, "dual")
    return 0


def cmd_signature(args) -> int:
    F = pq.bn_form(args.n)
    _report(args, "signature", {"n": args.n, "k": F.p, "l": F.q}, "signature")
    return 0


def cmd_negativity(args) -> int:
    F = _read_form(args.form)
    cloud = _read_cloud(args.cloud)
    res = pq.negativity(F, cloud, seed=args.run_config.seed)
    tr = pq.is_transverse(F, cloud)
    body = dict(res.to_dict(), points=len(cloud), min_abs_pairing=tr.min_abs_pairing)
    _report(args, "negativity", body, "negativity")
    return 0


def cmd_flatten(args) -> int:
    F = _read_form(args.form)
    cloud = _read_cloud(args.cloud)
    X = pq.flatten_many(F, cloud.points, args.t) if len(cloud) else cloud.points
    out = PointCloud(X, cloud.sources, cloud.word_lengths)
    _emit(args, "flatten.csv", out.to_csv(args.run_config.to_dict()))
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with 2 already; keep the message on stderr
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed (overridden by CONVEXCORE_SEED)")
    common.add_argument("--jobs", type=int, default=1, help="threads for word-ball enumeration")
    common.add_argument("--out", default=None, help="output directory; standard output when omitted")

    p = _Parser(prog="convexcore", description="Diagnostics for discrete groups acting on convex projective domains.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gallery", parents=[common], help="list or emit gallery examples")
    g.add_argument("action", choices=["list", "emit"])
    g.add_argument("name", nargs="?")
    g.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    g.set_defaults(func=cmd_gallery, radius=0)

    o = sub.add_parser("orbit", parents=[common], help="orbit cloud of seed points")
    o.add_argument("group")
    o.add_argument("domain")
    o.add_argument("--radius", type=int, default=8)
    o.add_argument("--seeds", type=int, default=1)
    o.set_defaults(func=cmd_orbit)

    lsp = sub.add_parser("limitset", parents=[common], help="limit set cloud")
    lsp.add_argument("group")
    lsp.add_argument("--domain")
    lsp.add_argument("--radius", type=int, default=8)
    lsp.add_argument("--kind", choices=["proximal", "orbital", "both"], default="both")
    lsp.set_defaults(func=cmd_limitset)

    d = sub.add_parser("diagnose", parents=[common], help="verdict report")
    d.add_argument("group")
    d.add_argument("--domain")
    d.add_argument("--radius", type=int, default=8)
    d.set_defaults(func=cmd_diagnose)

    du = sub.add_parser("dual", parents=[common], help="dual domain")
    du.add_argument("domain")
    du.add_argument("--samples", type=int, default=None)
    du.set_defaults(func=cmd_dual, radius=0)

    s = sub.add_parser("signature", parents=[common], help="signature of the invariant form B_n")
    s.add_argument("--n", type=int, required=True)
    s.set_defaults(func=cmd_signature, radius=0)

    ng = sub.add_parser("negativity", parents=[common], help="negativity of a boundary cloud")
    ng.add_argument("form")
    ng.add_argument("cloud")
    ng.set_defaults(func=cmd_negativity, radius=0)

    f = sub.add_parser("flatten", parents=[common], help="sphere flattening of a boundary cloud")
    f.add_argument("form")
    f.add_argument("cloud")
    f.add_argument("--t", type=float, required=True)
    f.set_defaults(func=cmd_flatten, radius=0)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "radius", 0) < 0:
            raise InputError("--radius must be non-negative")
        if args.jobs < 1:
            raise InputError("--jobs must be at least 1")
        seed = resolve_seed(args.seed)
        formats = {"orbit": ("csv", "svg"), "limitset": ("csv", "svg"), "flatten": ("csv",)}.get(args.command, ("json",))
        args.run_config = RunConfig(seed, args.radius, args.out or "-", args.jobs, formats, DEFAULT)
        return int(args.func(args) or 0)
    except ConvexCoreError as exc:
        print(f"convexcore: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
