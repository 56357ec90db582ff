#!/usr/bin/env python3
"""Framework-parameter algebra.

The bootstrap argument closes only when the weighted-energy drift
coefficient is negative, which pins the interior weight exponent above a
critical value alpha0.  This script computes that root, validates the two
reference parameter tuples, and sweeps the one-parameter diffusive family.
"""
import numpy as np

from petrace.params import (
    alpha0,
    alpha0_residual,
    fixed_diffusive_choice,
    reference_sigma0_params,
    reference_sigma1_params,
    validate_params,
)

a0 = alpha0()
print(f"critical weight exponent alpha0 = {a0:.10f}")
print(f"residual at the root: {alpha0_residual(a0):.3e}")
print(f"residual at alpha = 3 (must be negative): {alpha0_residual(3.0):+.6f}\n")

for name, params in (("sigma=0", reference_sigma0_params()),
                     ("sigma=1", reference_sigma1_params())):
    verdict = validate_params(params)
    print(f"reference tuple {name}: {'admissible' if verdict.passed else 'REJECTED'}")
    for check in verdict.checks:
        print(f"    {check.condition:<32} value={check.value:.5g} bound={check.bound:.5g}")
    print()

print("one-parameter diffusive family (eta0=4, k=(alpha+1)/2, ...):")
for alpha in np.linspace(a0 + 0.02, 2.48, 8):
    p = fixed_diffusive_choice(float(alpha))
    ok = validate_params(p).passed
    print(f"    alpha={alpha:.3f}: k={p.k:.4f} l={p.l:.4f} eps_a={p.eps_a:.4f} "
          f"eps_c={p.eps_c:.4f} -> {'ok' if ok else 'FAIL'}")
