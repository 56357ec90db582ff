#!/usr/bin/env python3
"""The rescaled frame and the trapped regime.

In self-similar variables the blow-up becomes a slowly varying state: the
scales obey lam ~ s exp(-s) and 1/nu ~ s, while the perturbation energies
stay under explicit bounds (the trapped regime).  The zero-average tail is
only light enough to pass the *initial* closeness budgets at a deep
starting epoch, so this demo starts at s0 = 35.
"""
import math

import numpy as np

from petrace.diagnostics import check_initial_closeness
from petrace.grid import Field, Grid, definite
from petrace.params import FrameworkParams
from petrace.selfsim import SelfsimConfig, build_state, phi, psi, run_selfsim

s0 = 35.0
lam0 = s0 * math.exp(-s0)
nu0 = 1.0 / (2.0 * math.log(1.0 / lam0))
n = 1537
g = Grid(0.0, 1.0 / nu0, n)
z = g.nodes
m = definite(phi(z), g.h) / definite(psi(z), g.h)
atil = -m * psi(z)                       # balances int(phi + atil) = 0
ctil = 5e-6 * z**2 * np.exp(-z)
state = build_state(Field(g, atil), Field(g, ctil), lam0, nu0, s0, sigma=0)
print(f"start: s0 = {s0}, lam0 = {lam0:.4g}, 1/nu0 = {1/nu0:.2f}, "
      f"balance amplitude m = {m:.5f}")

params = FrameworkParams(sigma=0, alpha=2.0, gamma=2.0, h_a=1.1, h_c=0.5,
                         eps_a=0.6, eps_c=0.75)
verdict = check_initial_closeness(state, params)
print(f"initial closeness: {'pass' if verdict.passed else 'FAIL'}")
for c in verdict.checks:
    print(f"    {c.condition:<38} value={c.value:<12.4g} bound={c.bound:.4g}")

traj = run_selfsim(state, SelfsimConfig(s_end=s0 + 5.0, stride=20, params=params))
print(f"\ntrapped window s in [{traj.s[0]:.1f}, {traj.s[-1]:.1f}] "
      f"({len(traj.s)} samples, all trapped: {bool(np.all(traj.trapped == 1.0))})")
print(f"{'s':>7} {'lam/(s e^-s)':>13} {'nu*s':>7} {'Ia2/bound':>10} {'Ec2':>10}")
for i in range(0, len(traj.s), max(1, len(traj.s) // 8)):
    s = traj.s[i]
    print(f"{s:7.2f} {traj.lam[i] / (s * math.exp(-s)):13.4f} {traj.nu[i] * s:7.3f} "
          f"{traj.Ia2[i] * s**params.h_a:10.3g} {traj.Ec2[i]:10.3g}")
