"""Sign certificates: rho_1, rho_2, rho_3 on (-1, 1) and 6 rho_5^2 - 4 rho_4 rho_6 on (-1, 0)."""
import argparse
import csv

import numpy as np

from jetgeo.periodmap import rho_suite

from _common import out_dir, pyplot


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-n", type=int, default=1000)
    ap.add_argument("--out", default="figures")
    args = ap.parse_args()

    c = np.linspace(-1, 1, args.n + 2)[1:-1]
    r = rho_suite(c)
    d = out_dir(args.out)
    with open(d / "rho.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["v2", "rho1", "rho2", "rho3", "rho4", "rho5", "rho6", "disc"])
        for row in zip(c, r.rho1, r.rho2, r.rho3, r.rho4, r.rho5, r.rho6, r.disc):
            w.writerow([f"{v:.17g}" for v in row])
    neg = c < 0
    print(f"min rho1 {r.rho1.min():.3e}, rho2 {r.rho2.min():.3e}, rho3 {r.rho3.min():.3e}")
    print(f"max disc on (-1, 0): {r.disc[neg].max():.3e}")

    plt = pyplot()
    if plt is None:
        return
    fig, (left, right) = plt.subplots(1, 2, figsize=(10, 4))
    for name in ("rho1", "rho2", "rho3"):
        left.plot(c, getattr(r, name), label=name)
    left.axhline(0, color="k", lw=0.5)
    left.legend()
    right.plot(c[neg], r.disc[neg])
    right.axhline(0, color="k", lw=0.5)
    right.set_title("6 rho5^2 - 4 rho4 rho6")
    for ax in (left, right):
        ax.set_xlabel("v2")
    fig.tight_layout()
    fig.savefig(d / "rho.png", dpi=150)
    print(f"wrote {d / 'rho.png'}")


if __name__ == "__main__":
    main()
