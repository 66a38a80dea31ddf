"""Cross-checks against the brute-force references.

The fast banded dissipator is compared with dense products, the variance-rate
sums with a finite difference, and the classical walk is checked for strictly
increasing entropy and variance.
"""
# %%
import numpy as np

from marketoqs.operators import DissipatorSpec, LadderKernel
from marketoqs.oracle import (WalkSpec, boundary_margin, classical_walk, random_density_matrix,
                              self_check, variance_rate_check)
from marketoqs.scenarios import default_grid

# %%
ok, lines = self_check(seed=1, trials=20)
print("\n".join(lines))

# %%
rng = np.random.default_rng(2)
x = default_grid(64).values
for spec in (DissipatorSpec.gaussian(400.0), DissipatorSpec.ng1(400.0, 280.0),
             DissipatorSpec.ng2(400.0, LadderKernel.three_tap(0.1))):
    rho = random_density_matrix(64, rng, margin=boundary_margin(spec))
    rc = variance_rate_check(rho, spec, x)
    print(f"{spec.model.value:8s} analytic={rc.analytic:+.10e} fd={rc.finite_difference:+.10e} "
          f"rel={rc.rel_diff:.1e}")

# %%
init = np.zeros(101)
init[50] = 1.0
ps = classical_walk(WalkSpec(init, np.array([0.3, 0.4, 0.3]), 40))
print("walk variance after 40 steps:", np.round(sum(((np.arange(101) - 50) ** 2) * ps[-1]), 6))
