"""
The outer solar system
======================

Sun plus the four giant planets and Pluto, with a step of 400 days.  The
implicit variational methods reuse one Jacobian across steps (chord
Newton), which is what makes them affordable here.  Expect the fourth-order
explicit Taylor method to lose the energy entirely, while the sixth-order
variational integrator stays within about 1e-4 relative error.
"""
import time

import numpy as np

from taylorvi import harness as H

steps = 500  # about 550 years; raise for a longer picture
specs = [
    H.RunSpec("outer_solar", "taylor", r=4, steps=steps),
    H.RunSpec("outer_solar", "taylor", r=6, steps=steps),
    H.RunSpec("outer_solar", "tvi", r=3, quadrature="gauss2", steps=steps, reuse_jacobian=True),
    H.RunSpec("outer_solar", "tvi", r=5, quadrature="gauss3", steps=steps, reuse_jacobian=True),
]

for spec in specs:
    t0 = time.perf_counter()
    traj = H.run_trajectory(spec)
    rel = np.max(np.abs(traj.energy_error)) / abs(traj.energy[0])
    print(f"{spec.label:<30} max relative |dE| {rel:9.2e}   {time.perf_counter() - t0:6.1f} s   {traj.status}")
