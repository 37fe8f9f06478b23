"""
Checking the closed forms against a brute-force field.

The radiation field is cut into a finite lattice of modes and the exact
linear amplitude equations are integrated numerically. The report
compares that run with every closed form and shows the finite band
smearing the sharp causal front at the detector.
"""
import numpy as np

from lambda_entangle import DetectorParams, SystemParams, build_grid, integrate, validate

# scaled desk parameters: omega = 100 gamma, delta_omega / gamma = 9.2
p = SystemParams.symmetric(omega=10.0, delta_omega=0.92, gamma=0.1)
det = DetectorParams(efficiency=0.1, t_d=5.0)

for hw in (40, 90):
    grid = build_grid(p, half_width_in_gammas=hw, modes_per_gamma=10)
    report = validate(p, grid, horizon=30.0, detector=det)
    print(f"\nhalf width {hw} gamma, {grid.mode_count} modes/channel, passed={report.passed}")
    for c in report.checks:
        print(f"  {c.name:28s} {c.max_deviation:10.3e}  tol {c.tolerance:.1e}  {'ok' if c.passed else 'FAIL'}")

# %% the detector field switches on at t_d, up to ringing of width ~ 1/W
grid = build_grid(p, 90, 10)
tr = integrate(p, grid, 8.0, det, t_eval=np.linspace(4.0, 6.0, 21))
field = np.abs(tr.detector_field()[0]) / np.sqrt(p.gamma_plus / (2 * np.pi))
for t, f in zip(tr.times, field):
    print(f"t = {t:4.2f} ns  |E|/front = {f:.3f}")
