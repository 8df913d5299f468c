"""Refinement sweeps for the explicit viscous scheme.

``riemann``: L1 distance of the viscous solution to the stationary step
(1, -1) at t = 0.5, halving eps = delta and dx together.
``sine``: L1 distance between the viscous and the front-tracking solution
for 0.5 sin(2 pi x) at t = 0.3, halving eps = delta, dx and h together.
"""

import argparse
import time

from gradflux.config import initial_profile
from gradflux.flux import make_flux_pair
from gradflux.fronttrack import run_semigroup
from gradflux.profile import Bounded, Periodic, Profile, l1_distance
from gradflux.viscous import ViscousParams, run_viscous

FP = make_flux_pair("burgers", "burgers_plus_1")


def riemann_level(f):
    p0 = Profile.step(Bounded(-1, 1), 0.0, 1.0, -1.0)
    run = run_viscous(p0, FP, ViscousParams(epsilon=1e-3 * f, delta=1e-3 * f,
                                           dx=f / 800, t_end=0.5))
    return l1_distance(run.to_trajectory().profiles[-1], p0)


def sine_level(f):
    p0 = initial_profile("sine", Periodic(1.0))
    semi = run_semigroup(p0, FP, 0.005 * f, 0.3)
    run = run_viscous(p0, FP, ViscousParams(epsilon=1e-3 * f, delta=1e-3 * f,
                                           dx=f / 2000, t_end=0.3))
    return l1_distance(semi.profiles[-1], run.to_trajectory().profiles[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("case", choices=("riemann", "sine"))
    ap.add_argument("--levels", type=int, default=3)
    args = ap.parse_args()
    level = riemann_level if args.case == "riemann" else sine_level
    prev = None
    for k in reversed(range(args.levels)):
        f = 2 ** k
        t0 = time.perf_counter()
        d = level(f)
        ratio = "-" if prev is None else f"{prev / d:.3f}"
        print(f"eps={1e-3 * f:.4g}  L1={d:.5f}  ratio={ratio}  ({time.perf_counter() - t0:.1f}s)",
              flush=True)
        prev = d


if __name__ == "__main__":
    main()
