"""
Path-integral vs spectral evaluation of the semigroup
=====================================================

The same function of (x, t) is computed two ways: as a Monte Carlo
average of a weight functional over jump paths, and by a split-step
Fourier solver on a periodic grid.  The two implementations share no
code beyond the model parameters, which is what makes the agreement
meaningful.
"""

import numpy as np

from relfk import (ModelParams, bump_fields, certify_epsilon,
                   estimate_u_grid, grid_for, sample_on_grid, split_step)

params = ModelParams(1, 1.0)
fields = bump_fields(1, v_amp=0.5)     # scalar potential + bump profile
t = 1.0

# certify a jump-size cutoff: the bias budget below is a rigorous
# bound, so MC error bars plus the budget must cover the oracle
cert = certify_epsilon(params, fields, t, target=1e-2)
print(f"certified cutoff {cert.cutoff:g} "
      f"(truncation budget {cert.parts['total']:.2e})")

grid = grid_for(1, fields.support_radius, t, n=4096)
oracle = split_step(sample_on_grid(fields.g, grid), t, 64, params,
                    sample_on_grid(fields.v, grid), grid)

xs = np.linspace(-2.0, 2.0, 9)
ests = estimate_u_grid(params, fields, xs[:, None], t, cert.cutoff,
                       20_000, seed=3, experiment=1, threads=4)
interp = np.interp(xs, grid.axis(), np.real(oracle))

print(f"\n{'x':>5} {'monte carlo':>12} {'split step':>11} "
      f"{'gap':>9} {'3 stderr + budget':>18}")
for x, est, orc in zip(xs, ests, interp):
    gap = abs(est.mean.real - orc)
    bound = 3 * est.stderr + cert.parts["total"]
    flag = "" if gap <= bound else "  <-- outside!"
    print(f"{x:5.1f} {est.mean.real:12.6f} {orc:11.6f} "
          f"{gap:9.6f} {bound:18.6f}{flag}")
