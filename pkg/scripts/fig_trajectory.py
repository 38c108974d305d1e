"""Candidate geodesic of R^5(1,1): the (x, y1, y2) projection and its speed check.

Writes trajectory.csv and, with matplotlib, trajectory.png.
"""
import argparse
import math

import numpy as np

from jetgeo import dynamics as dy
from jetgeo import poly as pc

from _common import out_dir, pyplot


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--span", type=float, default=8.0, help="integrate over [-span, span]")
    ap.add_argument("--step", type=float, default=0.01)
    ap.add_argument("--out", default="figures")
    args = ap.parse_args()

    a, b, nu = 1.0, 1.0, pc.PencilMomentum(1.0, 1.0)
    x0 = pc.x_plus_formula(a, b, nu.tau, nu.eta)
    te = np.round(np.arange(-args.span, args.span + args.step / 2, args.step), 12)
    red = dy.integrate_reduced(nu.poly(a, b).potential(), dy.ReducedState(0.0, x0),
                               (-args.span, args.span), t_eval=te, truncate=False)
    mag = dy.geodesic_magnetic(a, b, nu, red, dy.MagneticPoint(x0, 0, 0, 0, 0))
    d = out_dir(args.out)
    with open(d / "trajectory.csv", "w", encoding="utf-8") as fh:
        mag.write_csv(fh)
    length = mag.arc_length(("x", "y1", "y2"))
    print(f"samples {len(mag.t)}, arc length {length:.9f} over time {mag.t[-1] - mag.t[0]:.9f}")
    print(f"max |H - 1/2| = {np.max(np.abs(mag.energy() - 0.5)):.2e}")

    plt = pyplot()
    if plt is None:
        return
    fig = plt.figure(figsize=(6, 5))
    ax = fig.add_subplot(projection="3d")
    ax.plot(mag.column("y1"), mag.column("y2"), mag.column("x"), lw=1.2)
    ax.set_xlabel("y1")
    ax.set_ylabel("y2")
    ax.set_zlabel("x")
    ax.set_title(f"(a,b)=(1,1), nu=(0,0,1,1), |t| <= {args.span:g}")
    fig.tight_layout()
    fig.savefig(d / "trajectory.png", dpi=150)
    print(f"wrote {d / 'trajectory.png'}")


if __name__ == "__main__":
    main()
