"""Image of the period map for one magnetic space, both branches, with the injectivity report."""
import argparse
import csv
import json

import numpy as np

from jetgeo import periodmap as pm

from _common import out_dir, pyplot


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--a", type=float, default=1.0)
    ap.add_argument("--b", type=float, default=1.0)
    ap.add_argument("-n", type=int, default=40, help="grid nodes per axis")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="figures")
    args = ap.parse_args()

    grid = pm.GridSpec(n_tau=args.n, n_eta=args.n + 1)
    rep = pm.injectivity_probe(args.a, args.b, grid, workers=args.workers)
    ov = pm.overlay(args.a, args.b, grid, workers=args.workers)
    d = out_dir(args.out)
    with open(d / "image.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(pm.SWEEP_COLUMNS)
        for row in ov.plus + ov.minus:
            w.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in row])
    summary = {**rep.to_json_dict(), "overlay_matches": len(ov.matches),
               "overlay_all_at_eta_zero": ov.all_at_eta_zero,
               "overlay_min_offaxis_distance": ov.min_offaxis_distance}
    (d / "image.json").write_text(json.dumps(summary, indent=2), encoding="utf-8")
    print(f"collisions {len(rep.collisions)}, min distance {rep.min_image_distance:.3e}, "
          f"overlay matches {len(ov.matches)} (all at eta = 0: {ov.all_at_eta_zero})")

    plt = pyplot()
    if plt is None:
        return
    fig = plt.figure(figsize=(7, 6))
    ax = fig.add_subplot(projection="3d")
    for rows, label in ((ov.plus, "Theta+"), (ov.minus, "Theta-")):
        p = np.array([r[5:8] for r in rows])
        ax.scatter(p[:, 0], p[:, 1], p[:, 2], s=3, label=label)
    ax.set_xlabel("Theta1")
    ax.set_ylabel("Theta2")
    ax.set_zlabel("Theta3")
    ax.legend()
    fig.tight_layout()
    fig.savefig(d / "image.png", dpi=150)
    print(f"wrote {d / 'image.png'}")


if __name__ == "__main__":
    main()
