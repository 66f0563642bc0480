"""
Comparing integrators on the Kepler problem
===========================================

Eccentric two-body orbit, every method at the same step size.  The table
pairs each method's energy error with its cost.  Symplectic
methods trade a little accuracy per step for bounded energy error.
"""
from pathlib import Path

from taylorvi import harness as H
from taylorvi.plotting import emit_plot

out = Path(__file__).with_name("output")
out.mkdir(exist_ok=True)

steps = 400
specs = [
    H.RunSpec("kepler2d", "euler_b", steps=steps),
    H.RunSpec("kepler2d", "stormer_verlet", steps=steps),
    H.RunSpec("kepler2d", "taylor", r=4, steps=steps),
    H.RunSpec("kepler2d", "tvi", r=1, quadrature="trapezoid", steps=steps),
    H.RunSpec("kepler2d", "tvi", r=3, quadrature="gauss2", steps=steps),
    H.RunSpec("kepler2d", "sym_tvi", r=3, quadrature="gauss2", steps=steps),
    H.RunSpec("kepler2d", "svhd", steps=steps),
]

rows, trajectories = H.compare("kepler2d", specs, reference=True, workers=4)
print(f"{'method':<26}{'max |dE|':>12}{'global':>12}{'wall s':>9}{'iters':>8}")
for row in rows:
    print(
        f"{row['method']:<26}{row['max_energy_error']:>12.3e}{row['global_error']:>12.3e}"
        f"{row['wall_time']:>9.2f}{row['newton_iters']:>8}"
    )
H.write_comparison_csv(rows, out / "kepler_comparison.csv")

# the fourth-order variational orbit, drawn in the plane
H.write_trajectory_csv(trajectories[4], out / "kepler_tvi4.csv")
print(emit_plot(out / "kepler_tvi4.csv", "orbit_xy", out / "kepler_tvi4_orbit.svg"))
