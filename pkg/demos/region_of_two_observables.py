"""Walk through the uncertainty region of two qubit observables.

Run: python3 demos/region_of_two_observables.py [--plot out.png]
"""
import argparse
import math

import numpy as np

from qubit_uncertainty import regions
from qubit_uncertainty.observables import QubitObservable
from qubit_uncertainty.states import sample_spectral, uncertainty


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--plot", help="save a figure of the regions to this path")
    args = parser.parse_args()

    # Two unit observables in the x-y plane; only their angle matters.
    print("angle      area(formula)  area(2000^2 grid)")
    for theta in (math.pi / 16, math.pi / 8, math.pi / 4, 3 * math.pi / 8, math.pi / 2):
        print(f"{theta:8.5f}   {regions.area_pair(theta):12.8f}  {regions.area_grid(theta):12.8f}")

    theta0, area0 = regions.max_area()
    print(f"\nlargest region at angle {theta0:.6f} (pi/4 = {math.pi / 4:.6f}), area {area0:.6f}")

    # Sampled states never leave the region; the lower boundary is reached by pure states.
    a = QubitObservable(0.0, (1.0, 0.0, 0.0))
    b = QubitObservable(0.0, (math.cos(theta0), math.sin(theta0), 0.0))
    spec = regions.region_spec([a, b])
    r = sample_spectral(np.random.default_rng(0), size=50_000)
    pts = np.stack([uncertainty(a, r), uncertainty(b, r)], axis=-1)
    print(f"sampled states inside the region: {np.mean(regions.contains_pair(spec, pts)):.3f}")
    edge = regions.boundary_pair(spec, 64)
    print(f"largest boundary residual: {np.max(np.abs(regions.pair_residual(spec, edge))):.2e}")

    if args.plot:
        import matplotlib.pyplot as plt

        fig, axes = plt.subplots(1, 3, figsize=(11, 3.6))
        for ax, theta in zip(axes, (math.pi / 8, theta0, math.pi / 2)):
            sp = regions.unit_pair(theta)
            grid_axes, inside = regions.membership_grid(sp, 300)
            ax.contourf(grid_axes[0], grid_axes[1], inside.T.astype(float), levels=[0.5, 1.5])
            curve = regions.boundary_pair(sp, 200)
            ax.plot(curve[:, 0], curve[:, 1], "k")
            ax.set_title(f"angle {theta:.3f}, area {regions.area_pair(theta):.3f}")
            ax.set_xlabel("uncertainty of A")
            ax.set_aspect("equal")
        axes[0].set_ylabel("uncertainty of B")
        fig.tight_layout()
        fig.savefig(args.plot, dpi=120)
        print(f"figure written to {args.plot}")


if __name__ == "__main__":
    main()
