"""Trace the frozen boundary of the cardioid example, fit a cardioid and draw both."""
import argparse

import numpy as np

from instantons.stepped import cardioid, cardioid_example, fit_cardioid, frozen_boundary, to_plane


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--resolution", type=int, default=1500)
    ap.add_argument("--svg", default="cardioid.svg")
    args = ap.parse_args()
    B, cond = cardioid_example()
    print(f"dual cubic fit condition ratio {cond:.1e}")
    fb = frozen_boundary(B, args.resolution)
    pts = to_plane(fb.points)
    fit = fit_cardioid(pts, to_plane(fb.cusps[0].point) if fb.cusps else None)
    print(f"{len(pts)} boundary points, {len(fb.cusps)} cusp(s)")
    print(f"fit a={fit.a:.6f} cusp={np.round(fit.cusp, 6).tolist()} rotation={fit.rotation:.6f} "
          f"residual={fit.residual:.1e}")
    model = cardioid(fit.a, fit.cusp, fit.rotation, np.linspace(0, 2 * np.pi, 600))
    lo, hi = pts.min(axis=0) - 0.05, pts.max(axis=0) + 0.05
    scale = 480 / max(hi - lo)

    def xy(p):
        return f"{(p[0] - lo[0]) * scale:.2f},{(hi[1] - p[1]) * scale:.2f}"

    with open(args.svg, "w") as f:
        f.write('<svg xmlns="http://www.w3.org/2000/svg" width="500" height="500">\n')
        f.write(f'<polyline fill="none" stroke="#888" stroke-width="3" points="{" ".join(map(xy, model))}"/>\n')
        for p in pts:
            f.write(f'<circle cx="{xy(p).split(",")[0]}" cy="{xy(p).split(",")[1]}" r="0.8" fill="#c22"/>\n')
        f.write("</svg>\n")
    print("wrote", args.svg)


if __name__ == "__main__":
    main()
