"""Degenerate pullback forms on a product torus T^a x T^b.

The projection onto the second factor pulls a Kahler form on T^b back to
the block-diagonal form 0 + omega_Y, which vanishes along the fibres.  That
form sits inside Gamma_m exactly when m <= b and on the boundary beyond.
The demo prints the membership pattern, runs the torus pipeline with the
pullback as a slot while it is admissible, and evaluates mixed positivity
with the pullback as the closed-cone argument once it is not.

    python scripts/product_torus_demo.py --a 1 --b 2 --seed 4
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag

from ghx.errors import ConeViolation
from ghx.garding import mixed_positivity
from ghx.herm import MetricPencil
from ghx.sampling import random_hermitian, random_metric, stream
from ghx.sympoly import in_gamma_m
from ghx.torus import TorusContext, random_potential, verify_theorem_a_torus


@dataclass
class ProductConfig:
    a: int = 1          # fibre dimension
    b: int = 2          # base dimension
    seed: int = 0
    N: int = 0          # grid points per axis, 0 picks the default


def run(cfg: ProductConfig) -> None:
    n = cfg.a + cfg.b
    rng = stream(cfg.seed)
    omega_x, omega_y = random_metric(rng, cfg.a).G.matrix, random_metric(rng, cfg.b).G.matrix
    G = MetricPencil(block_diag(omega_x, omega_y))
    pullback = block_diag(np.zeros((cfg.a, cfg.a)), omega_y)
    ctx = TorusContext(n, cfg.N)
    print(f"T^{cfg.a} x T^{cfg.b}, grid N={ctx.N}")
    for m in range(1, n + 1):
        gm = in_gamma_m(pullback, G, m)
        print(f"  m={m}: pullback margins {np.array2string(gm.margins, precision=3)} "
              f"-> {'inside' if gm.member else 'boundary'}")
        if gm.member and m >= 2:
            # slots: the metric m-2 times and the pullback last
            alphas = [G.G.matrix] * (m - 2) + [pullback]
            r = verify_theorem_a_torus(alphas, G, random_hermitian(rng, n),
                                       random_potential(rng, ctx), ctx)
            print(f"        torus run ok={r.ok} integrated Q={r.integrated:.6e} "
                  f"mismatch={r.relative_mismatch:.1e} representer min eig={r.representer_min_eig:.3e}")
        elif not gm.member:
            try:
                verify_theorem_a_torus([pullback] * (m - 1), G, np.eye(n), None, ctx)
            except ConeViolation as exc:
                print(f"        slot refused: {exc}")
            val = mixed_positivity(pullback, [G.G.matrix] * (m - 1), G)
            print(f"        D(pullback, omega^(m-1)) = {val:.6e} > 0")


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    d = ProductConfig()
    for name in ("a", "b", "seed", "N"):
        p.add_argument(f"--{name}", type=int, default=getattr(d, name))
    args = p.parse_args(argv)
    run(ProductConfig(args.a, args.b, args.seed, args.N))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
