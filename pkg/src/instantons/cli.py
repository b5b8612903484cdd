"""Batch command line: ``instantons <command> [flags]``.

Every command writes files under the ``--output`` prefix.  Each file starts
with a header carrying the hash of the resolved configuration and the
tolerance record.  Exit status: 0 success, 2 usage error, 3 numerical failure
(a ``<prefix>.diagnostics.json`` sidecar explains the failure).
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import traceback
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

COMMANDS = ("zinst", "dualz-check", "periods", "prepotential", "limitshape", "legendre",
            "ronkin", "burgers", "frozen")
STOCHASTIC = {"limitshape": "mcmc_steps"}
DEFAULT_TOLERANCES = {"quadrature": 1e-12, "newton": 1e-12, "curl": 1e-2}

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


class UsageError(ValueError):
    pass


@dataclass
class JobConfig:
    command: str
    params: dict = field(default_factory=dict)
    output: str = "out"
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    seed: int | None = None
    threads: int = 1

    def validate(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        for k, v in self.tolerances.items():
            if not (isinstance(v, (int, float)) and v > 0):
                raise UsageError(f"tolerance {k} must be positive")
        key = STOCHASTIC.get(self.command)
        stochastic = bool(key and self.params.get(key))
        if stochastic and self.seed is None:
            raise UsageError("a seed is required for stochastic runs")
        if not stochastic and self.seed is not None:
            raise UsageError("seed given for a deterministic command")
        if self.threads < 1:
            raise UsageError("threads must be positive")

    def hash(self) -> str:
        # threads do not change results, so they are left out of the hash
        d = {"command": self.command, "params": self.params, "tolerances": self.tolerances, "seed": self.seed}
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]

    def header(self) -> dict:
        return {"command": self.command, "config_hash": self.hash(), "tolerances": self.tolerances}


# ---------------------------------------------------------------------------
# output helpers


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, complex):
        return {"re": float(x.real), "im": float(x.imag)}
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _ensure_dir(path):
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)


def write_json(path, cfg: JobConfig, payload: dict):
    _ensure_dir(path)
    with open(path, "w") as fh:
        json.dump({"header": cfg.header(), **_jsonable(payload)}, fh, indent=1, sort_keys=True)
        fh.write("\n")


def write_csv(path, cfg: JobConfig, columns, rows):
    _ensure_dir(path)
    with open(path, "w") as fh:
        fh.write("# " + json.dumps(cfg.header(), sort_keys=True) + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(v if isinstance(v, str) else _fmt(v) for v in row) + "\n")


def write_svg(path, cfg: JobConfig, polylines, dots=(), size=480):
    """polylines: list of (points, stroke colour); dots: (points, fill colour)."""
    pts = [np.asarray(p) for p, _ in polylines] + [np.asarray(p) for p, _ in dots]
    allp = np.vstack([p for p in pts if len(p)])
    lo, hi = allp.min(axis=0), allp.max(axis=0)
    scale = (size - 20) / max(float(np.max(hi - lo)), 1e-12)

    def tr(p):
        return 10 + (p[0] - lo[0]) * scale, size - 10 - (p[1] - lo[1]) * scale

    _ensure_dir(path)
    with open(path, "w") as fh:
        fh.write(f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">\n')
        fh.write(f"<!-- {json.dumps(cfg.header(), sort_keys=True)} -->\n")
        for p, colour in polylines:
            d = " ".join("%.3f,%.3f" % tr(q) for q in np.asarray(p))
            fh.write(f'<polyline fill="none" stroke="{colour}" stroke-width="1" points="{d}"/>\n')
        for p, colour in dots:
            for q in np.asarray(p):
                fh.write('<circle cx="%.3f" cy="%.3f" r="1" fill="%s"/>\n' % (*tr(q), colour))
        fh.write("</svg>\n")


# ---------------------------------------------------------------------------
# commands


def _floats(v):
    return [float(x) for x in (v if isinstance(v, (list, tuple)) else str(v).split(","))]


def _need(params, *keys):
    missing = [k for k in keys if params.get(k) is None]
    if missing:
        raise UsageError("missing parameter(s): " + ", ".join(missing))


def _curve(params):
    from .swcurve import SWCurve

    if params.get("curve"):
        with open(params["curve"]) as fh:
            return SWCurve.from_json(fh.read())
    _need(params, "coeffs", "lambda")
    return SWCurve(tuple(_floats(params["coeffs"])), float(params["lambda"]))


def cmd_zinst(cfg: JobConfig):
    from .nekrasov import GaugeParams, z_inst

    p = cfg.params
    _need(p, "r", "eps", "lambda", "nmax")
    r = int(p["r"])
    a = _floats(p["a"]) if p.get("a") is not None else [0.0] * r
    if len(a) != r:
        raise UsageError("a must have r entries")
    eps = p["eps"]
    eps = Fraction(str(eps)) if p.get("exact") else float(eps)
    lam = Fraction(str(p["lambda"])) if p.get("exact") else float(p["lambda"])
    if p.get("exact"):
        a = [Fraction(str(x)) for x in a]
    g = GaugeParams(eps, tuple(a), lam)
    s = z_inst(g, int(p["nmax"]), threads=cfg.threads)
    write_json(cfg.output + ".json", cfg, {"z_inst": float(s.value), "coefficients": list(s.coefficients),
                                           "last_term": float(s.last_term)})
    return {"z_inst": float(s.value)}


def cmd_dualz_check(cfg: JobConfig):
    from .nekrasov import dual_z_lattice, dual_z_partitions
    from .partitions import PeriodicPotential

    p = cfg.params
    _need(p, "xi", "eps", "lambda")
    V = PeriodicPotential(tuple(_floats(p["xi"])))
    eps, lam = float(p["eps"]), float(p["lambda"])
    A = dual_z_partitions(V, eps, lam, int(p.get("size_max", 30)))
    B = dual_z_lattice(V, eps, lam, int(p.get("radius", 3)), int(p.get("nmax", 8)))
    diff = abs(A.value - B.value)
    ok = diff <= A.tail + B.tail + 1e-12 * abs(A.value)
    payload = {"partition_route": A.value, "partition_tail": A.tail, "lattice_route": B.value,
               "lattice_tail": B.tail, "difference": diff, "relative": diff / abs(A.value), "agree": ok}
    write_json(cfg.output + ".json", cfg, payload)
    return payload


def cmd_periods(cfg: JobConfig):
    from .swcurve import band_gap, is_maximal, periods_a_dual

    C = _curve(cfg.params)
    if not is_maximal(C):
        raise ArithmeticError("band structure is not maximal")
    per = periods_a_dual(C)
    write_csv(cfg.output + ".csv", cfg, ["i", "a", "a_dual"],
              [(str(i + 1), x, y) for i, (x, y) in enumerate(zip(per.a, per.a_dual))])
    bg = band_gap(C)
    write_json(cfg.output + ".json", cfg, {"a": per.a, "a_dual": per.a_dual, "checksum": per.checksum,
                                           "bands": bg.bands, "gaps": bg.gaps})
    return {"a": per.a.tolist()}


def cmd_prepotential(cfg: JobConfig):
    from .swcurve import prepotential, prepotential_hessian

    p = cfg.params
    _need(p, "a", "lambda")
    a, lam = np.array(_floats(p["a"])), float(p["lambda"])
    F = prepotential(a, lam)
    H = prepotential_hessian(a, lam)
    payload = {"a": a, "F": F, "hessian": H.matrix, "asymmetry": H.asymmetry, "eigenvalues": H.eigenvalues}
    write_json(cfg.output + ".json", cfg, payload)
    return {"F": F}


def cmd_limitshape(cfg: JobConfig):
    from .limitshape import facet_intercepts, psi_star
    from .swcurve import periods_a

    p = cfg.params
    C = _curve(p)
    psi = psi_star(C, int(p.get("n_per_band", 400)))
    lo, hi = psi.breakpoints[0], psi.breakpoints[-1]
    pad = 0.25 * (hi - lo)
    x = np.linspace(lo - pad, hi + pad, int(p.get("samples", 801)))
    write_csv(cfg.output + ".csv", cfg, ["x", "psi"], zip(x, psi(x)))
    payload = {"breakpoints_range": [lo, hi]}
    if C.r > 1:
        fd = facet_intercepts(psi, C.r)
        payload.update(intercepts=fd.intercepts, a_from_intercepts=fd.a)
    payload["a_periods"] = periods_a(C)
    if p.get("mcmc_steps"):
        from .partitions import PeriodicPotential
        from .sampler import mcmc_profile_average

        if C.r != 1:
            raise UsageError("the MCMC comparison is implemented for r = 1")
        eps = float(p.get("eps", 0.05))
        avg = mcmc_profile_average(PeriodicPotential((0.0,)), eps, C.lambda_scale, int(p["mcmc_steps"]),
                                   cfg.seed, x)
        l1 = float(np.trapezoid(np.abs(avg.mean_profile - psi(x)), x))
        payload.update(mcmc_l1=l1, mcmc_mean_size=float(np.mean(avg.sizes)))
    write_json(cfg.output + ".json", cfg, payload)
    return payload


def cmd_legendre(cfg: JobConfig):
    from .limitshape import legendre_check

    p = cfg.params
    if p.get("curve") or p.get("coeffs"):
        from .limitshape import xi_from_gaps

        C = _curve(p)
        xi, lam = list(xi_from_gaps(C).xi), C.lambda_scale
    else:
        _need(p, "xi", "lambda")
        xi, lam = _floats(p["xi"]), float(p["lambda"])
    rep = legendre_check(xi, lam)
    write_json(cfg.output + ".json", cfg, rep.to_dict())
    return {"relative_gap": rep.relative_gap, "gradient_error": rep.gradient_error}


def _plane_curve(source):
    from .stepped import PlaneCurve

    if isinstance(source, str):
        with open(source) as fh:
            return PlaneCurve.from_json(fh.read())
    return PlaneCurve(tuple(((m[0], m[1]), m[2]) for m in source["monomials"]))


def cmd_ronkin(cfg: JobConfig):
    from .stepped import amoeba_membership, ronkin, ronkin_gradient

    p = cfg.params
    _need(p, "plane")
    P = _plane_curve(p["plane"])
    xr, yr = _floats(p.get("xrange", "-3,3")), _floats(p.get("yrange", "-3,3"))
    n = int(p.get("n", 21))
    xs, ys = np.linspace(xr[0], xr[1], n), np.linspace(yr[0], yr[1], n)
    rows, inside = [], []
    for y in ys:
        for x in xs:
            R = ronkin(P, x, y, tol=cfg.tolerances["quadrature"])
            g = ronkin_gradient(P, x, y)
            rows.append((x, y, R, g[0], g[1]))
            if amoeba_membership(P, x, y).inside:
                inside.append((x, y))
    write_csv(cfg.output + ".csv", cfg, ["x", "y", "R", "Rx", "Ry"], rows)
    box = [(xr[0], yr[0]), (xr[1], yr[0]), (xr[1], yr[1]), (xr[0], yr[1]), (xr[0], yr[0])]
    write_svg(cfg.output + ".svg", cfg, [(box, "gray")], [(inside, "black")] if inside else ())
    return {"nodes": len(rows), "amoeba_nodes": len(inside)}


def _burgers_data(p):
    from .stepped import LINE, BurgersData, TernaryForm, cardioid_example

    if p.get("cardioid"):
        c = p["cardioid"]
        B, _ = cardioid_example(c.get("a", 0.25), tuple(c.get("cusp", (0.55, 0.45))),
                                c.get("rotation", -math.pi / 2))
        return B
    P = _plane_curve(p["P"]) if p.get("P") else LINE
    if p.get("Q_ternary"):
        return BurgersData(P, TernaryForm(tuple(((t[0], t[1], t[2]), t[3]) for t in p["Q_ternary"])), 0.0)
    _need(p, "Q")
    return BurgersData(P, _plane_curve(p["Q"]), float(p.get("c", 0.0)))


def _load_config_file(p):
    if p.get("config"):
        with open(p["config"]) as fh:
            extra = json.load(fh)
        return {**extra, **{k: v for k, v in p.items() if k != "config"}}
    return p


def cmd_burgers(cfg: JobConfig):
    from .stepped import burgers_grid

    p = cfg.params
    B = _burgers_data(p)
    xr, yr = _floats(p.get("xrange", "-1,1")), _floats(p.get("yrange", "-1,1"))
    n = int(p.get("n", 41))
    xs, ys = np.linspace(xr[0], xr[1], n), np.linspace(yr[0], yr[1], n)
    Z, G, L = burgers_grid(B, xs, ys)
    rows = []
    for i, y in enumerate(ys):
        for j, x in enumerate(xs):
            rows.append((x, y, G[i, j, 0], G[i, j, 1], "liquid" if L[i, j] else "frozen"))
    write_csv(cfg.output + ".csv", cfg, ["x", "y", "hx", "hy", "phase"], rows)
    return {"liquid_fraction": float(L.mean())}


def cmd_frozen(cfg: JobConfig):
    from .stepped import ISO, cardioid, fit_cardioid, frozen_boundary, to_plane

    p = cfg.params
    B = _burgers_data(p)
    fb = frozen_boundary(B, int(p.get("resolution", 1500)))
    if not len(fb.points):
        raise ArithmeticError("no frozen boundary traced")
    pts = to_plane(fb.points)
    cusp = to_plane(fb.cusps[0].point) if fb.cusps else None
    fit = fit_cardioid(pts, cusp)
    th = np.linspace(0, 2 * math.pi, 721)
    overlay = cardioid(fit.a, fit.cusp, fit.rotation, th)
    write_svg(cfg.output + ".svg", cfg, [(overlay, "red")], [(pts[::5], "black")])
    write_csv(cfg.output + ".csv", cfg, ["x", "y", "t"], zip(fb.points[:, 0], fb.points[:, 1], fb.double_root))
    payload = {"cardioid": {"a": fit.a, "cusp": fit.cusp, "rotation": fit.rotation, "residual": fit.residual},
               "cusps": [{"point": c.point, "t": c.t, "residuals": list(c.residuals)} for c in fb.cusps],
               "projection": ISO}
    write_json(cfg.output + ".json", cfg, payload)
    return {"residual": fit.residual}


HANDLERS = {"zinst": cmd_zinst, "dualz-check": cmd_dualz_check, "periods": cmd_periods,
            "prepotential": cmd_prepotential, "limitshape": cmd_limitshape, "legendre": cmd_legendre,
            "ronkin": cmd_ronkin, "burgers": cmd_burgers, "frozen": cmd_frozen}


def run(cfg: JobConfig) -> int:
    """Run one job; returns the exit status."""
    try:
        cfg.params = _load_config_file(cfg.params)
        cfg.validate()
    except (UsageError, OSError, json.JSONDecodeError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        summary = HANDLERS[cfg.command](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # numerical failure: leave a diagnostic sidecar
        diag = {"header": cfg.header(), "error": type(exc).__name__, "message": str(exc),
                "traceback": traceback.format_exc().splitlines()[-6:]}
        _ensure_dir(cfg.output + ".diagnostics.json")
        with open(cfg.output + ".diagnostics.json", "w") as fh:
            json.dump(_jsonable(diag), fh, indent=1)
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(json.dumps(_jsonable(summary), sort_keys=True))
    return EXIT_OK


def _parser():
    ap = argparse.ArgumentParser(prog="instantons", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", default="out", help="output path prefix")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--seed", type=int)
    common.add_argument("--config", help="JSON file with parameters (flags override)")
    common.add_argument("--tol-quadrature", type=float, default=DEFAULT_TOLERANCES["quadrature"])
    common.add_argument("--tol-newton", type=float, default=DEFAULT_TOLERANCES["newton"])
    common.add_argument("--tol-curl", type=float, default=DEFAULT_TOLERANCES["curl"])
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("zinst", parents=[common], help="truncated instanton sum")
    s.add_argument("--r", type=int)
    s.add_argument("--eps", type=str)
    s.add_argument("--lambda", dest="lambda", type=str)
    s.add_argument("--a", help="comma-separated Coulomb parameters")
    s.add_argument("--nmax", type=int)
    s.add_argument("--exact", action="store_true", default=None, help="rational arithmetic")

    s = sub.add_parser("dualz-check", parents=[common], help="compare the two dual-sum routes")
    s.add_argument("--xi")
    s.add_argument("--eps", type=float)
    s.add_argument("--lambda", dest="lambda", type=float)
    s.add_argument("--size-max", dest="size_max", type=int)
    s.add_argument("--radius", type=int)
    s.add_argument("--nmax", type=int)

    for name, helptext in (("periods", "a and a-dual periods"), ("limitshape", "minimizing profile")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--curve", help="curve JSON file")
        s.add_argument("--coeffs", help="comma-separated P coefficients, highest first")
        s.add_argument("--lambda", dest="lambda", type=float)
    s.add_argument("--mcmc-steps", dest="mcmc_steps", type=int)
    s.add_argument("--eps", type=float)

    s = sub.add_parser("prepotential", parents=[common], help="F(a) and its Hessian")
    s.add_argument("--a")
    s.add_argument("--lambda", dest="lambda", type=float)

    s = sub.add_parser("legendre", parents=[common], help="two-route dual free energy check")
    s.add_argument("--xi", help="increasing, comma-separated (or take it from --curve)")
    s.add_argument("--curve", help="curve JSON file; xi is read off its gaps")
    s.add_argument("--coeffs")
    s.add_argument("--lambda", dest="lambda", type=float)

    s = sub.add_parser("ronkin", parents=[common], help="Ronkin function grid and amoeba")
    s.add_argument("--plane", help="plane curve JSON file")
    s.add_argument("--xrange")
    s.add_argument("--yrange")
    s.add_argument("--n", type=int)

    for name in ("burgers", "frozen"):
        s = sub.add_parser(name, parents=[common], help="complex Burgers solutions" if name == "burgers"
                           else "frozen boundary and cardioid fit")
        s.add_argument("--xrange")
        s.add_argument("--yrange")
        s.add_argument("--n", type=int)
        s.add_argument("--resolution", type=int)
    return ap


def config_from_args(argv=None) -> JobConfig:
    ns = vars(_parser().parse_args(argv))
    tol = {"quadrature": ns.pop("tol_quadrature"), "newton": ns.pop("tol_newton"), "curl": ns.pop("tol_curl")}
    command, output, threads, seed = ns.pop("command"), ns.pop("output"), ns.pop("threads"), ns.pop("seed")
    params = {k: v for k, v in ns.items() if v is not None}
    return JobConfig(command, params, output, tol, seed, threads)


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())

