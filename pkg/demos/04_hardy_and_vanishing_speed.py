#!/usr/bin/env python3
"""Weighted Hardy inequality and vanishing-speed exponents.

The diffusive-temperature energy estimate leans on
int f^2 x^-(k-...) <= (2/(1+k))^2 int f'^2 x^-k for functions vanishing at
both endpoints; the weighted integrals are only finite when the fields
vanish fast enough at x = 0, which is what the vanishing-speed exponent
monitor measures.
"""
import numpy as np

from petrace.diagnostics import hardy_check, vanishing_exponent
from petrace.errors import SingularWeight
from petrace.grid import Field, Grid

g = Grid(0.0, 1.0, 2049)
x = g.nodes

print("Hardy margins for f = x^m (1-x):")
print(f"{'k':>5} {'m':>3} {'lhs':>12} {'rhs':>12} {'lhs/rhs':>9}")
for k, m in ((0.5, 2), (1.0, 2), (1.5, 2), (3.0, 3)):
    f = Field(g, x**m * (1.0 - x))
    lhs, rhs = hardy_check(f, k)
    print(f"{k:5.1f} {m:3d} {lhs:12.5g} {rhs:12.5g} {lhs / rhs:9.4f}")

print("\nslow vanishing is rejected (weighted integrand blows up at 0):")
try:
    hardy_check(Field(g, x**0.6 * (1.0 - x)), 3.0)
except SingularWeight as exc:
    print(f"    SingularWeight: {exc}")

print("\nvanishing-speed exponents from log-log slopes near the origin:")
for expo in (1.0, 1.5, 2.0, 2.5):
    f = Field(g, x**expo * (1.0 + 0.05 * np.sin(3.0 * x)))
    measured = vanishing_exponent(f, 0.5)
    print(f"    f ~ x^{expo:<4} measured {measured:.3f}")
