"""Dual-lattice pairing and V-space ranks for the built-in schemes."""
from __future__ import annotations

import argparse
import time
from dataclasses import dataclass

from apk.cps import BUILTIN, TAU, check_pairing, dual_scheme, same_lattice
from apk.exactnum import QuadReal
from apk.spectra import vspace_rank


@dataclass
class Config:
    bound: int = 20
    coeff_bound: int = 10_000


def run(cfg: Config):
    for name, (make, _) in BUILTIN.items():
        S = make()
        t0 = time.perf_counter()
        DS = dual_scheme(S)
        rep = check_pairing(S, DS, bound=cfg.bound)
        back = same_lattice(S, dual_scheme(DS.scheme).scheme)
        print(f"{name:15s} pairs={rep.pairs_checked:>9} failures={rep.failures} "
              f"dual-of-dual={back} mode={rep.mode!r} {time.perf_counter() - t0:.2f}s")
    grid = (1, 0.5, 0.1, 0.02)
    s2 = float(QuadReal.sqrt(2))
    cases = {"{1}": [1], "{1, tau}": [1, TAU],
             "Z^2 + sqrt2 Z^2": [(1, 0), (0, 1), (s2, 0), (0, s2)]}
    for label, gens in cases.items():
        cb = cfg.coeff_bound if len(gens) <= 2 else 100
        t0 = time.perf_counter()
        r = vspace_rank(gens, grid, cb)
        print(f"vspace_rank {label:18s} = {r} (coeff_bound {cb}, "
              f"{time.perf_counter() - t0:.2f}s)")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--bound", type=int, default=Config.bound)
    a = p.parse_args()
    run(Config(a.bound))


if __name__ == "__main__":
    main()
