"""Equivariance modulus omega(R): Fibonacci characters against the integers.

Prints one row per radius.  The Fibonacci column uses the character picked
for a target period; its decay scale is set by |a*| (about 2 |a*| / R).
"""
from __future__ import annotations

import argparse
from dataclasses import dataclass

from apk.cps import TAU, fibonacci_scheme, find_small_eigenvalue
from apk.exactnum import QuadReal
from apk.generators import gen_fibonacci_cps, gen_lattice
from apk.patternspace import Region
from apk.spectra import equivariance_modulus


@dataclass
class Config:
    half: float = 10_000
    target: float = 10.0
    eps: float = 0.05
    grid: tuple = (10, 25, 50, 100, 200, 400, 800, 1600, 3200)


def run(cfg: Config):
    D = gen_fibonacci_cps(Region((-cfg.half,), (cfg.half,)))
    Z = gen_lattice(1, [[1]], Region((-cfg.half / 10,), (cfg.half / 10,)))
    ch = find_small_eigenvalue(fibonacci_scheme(), cfg.target, cfg.eps)
    rep = equivariance_modulus(D, ch, list(cfg.grid), allow_empty=True)
    zgrid = [R for R in cfg.grid if R < cfg.half / 25]
    repz = equivariance_modulus(Z, (QuadReal.sqrt(2),), zgrid, allow_empty=True)
    zmap = dict(zip(zgrid, repz.omega))
    print(f"character a = {ch.a[0]} (|a| = {ch.norm():.5f}, |a*| = {ch.star_norm():.2f}, "
          f"window diam {float(TAU):.3f})")
    print(f"{'R':>6} {'omega_fib':>10} {'pairs':>9} {'omega_Z_sqrt2':>14}")
    for R, w, n in zip(cfg.grid, rep.omega, rep.pair_counts):
        z = zmap.get(R)
        print(f"{R:>6} {'-' if w is None else f'{w:.4f}':>10} {n:>9} "
              f"{'-' if z is None else f'{z:.4f}':>14}")
    return rep, repz


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--half", type=float, default=Config.half)
    p.add_argument("--target", type=float, default=Config.target)
    a = p.parse_args()
    run(Config(a.half, a.target))


if __name__ == "__main__":
    main()
