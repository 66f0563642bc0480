"""
Convergence orders on the pendulum
==================================

Global error at t = 1 against step size for a handful of Taylor variational
integrators, measured against a high-order Taylor reference run.  The
printed slopes should sit near the nominal orders.
"""
from pathlib import Path

import numpy as np

from taylorvi import harness as H
from taylorvi.plotting import emit_plot

out = Path(__file__).with_name("output")
out.mkdir(exist_ok=True)

# (method, Taylor order, quadrature) and the order we expect to see
cases = [
    ("tvi", 0, "rect_left", 1),
    ("tvi", 1, "trapezoid", 2),
    ("tvi", 3, "gauss2", 4),
    ("sym_tvi", 1, "trapezoid", 2),
    ("sym_tvi", 3, "gauss2", 4),
    ("stormer_verlet", None, None, 2),
]
specs = [H.RunSpec("pendulum", m, r=r, quadrature=q) for m, r, q, _ in cases]
hs = [0.2, 0.1, 0.05, 0.025]

results = H.convergence_study("pendulum", specs, hs, T=1.0)

csvs = []
for res, (*_, expected) in zip(results, cases):
    print(f"{res.spec.label:<28} slope {res.slope:5.2f}   (expected {expected})")
    path = out / f"conv_{res.spec.label.replace(':', '_')}.csv"
    H.write_convergence_csv(res, path)
    csvs.append(path)

# one log-log panel with every method
print(emit_plot(csvs, "loglog", out / "convergence.svg"))

# errors should shrink monotonically with h
for res in results:
    assert np.all(np.diff(res.error) < 0), res.spec.label
