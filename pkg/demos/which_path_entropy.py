"""
How much entanglement does a single spontaneous decay leave behind?

Walks through the frequency-only and frequency+polarization entropies for
the lab parameters (1/gamma = 12 ns, splitting 2 pi x 122 MHz), then scans
the splitting to show how which-path information in the photon frequency
drives the frequency-only entropy up to ln 2.
"""
import math

import numpy as np

from lambda_entangle import (SystemParams, entropy_fo, entropy_fo_asymptote, entropy_fp, eta_asymptote,
                             rho_fo)

p = SystemParams.from_lab_units(gamma_inv_ns=12.0, delta_omega_mhz=122.0)
print(f"gamma = {p.gamma:.5f} /ns, delta_omega = {p.delta_omega:.5f} rad/ns, ratio = {p.splitting_ratio:.3f}")

# %% entropy curves on a coarse grid
t = np.linspace(0, 60, 13)
print("\n t[ns]   S_fo    S_fp    gap")
for ti, a, b in zip(t, entropy_fo(p, t), entropy_fp(p, t)):
    print(f"{ti:5.1f}  {a:.4f}  {b:.4f}  {b - a:.4f}")

# the early hump comes from the excited level; both curves settle near ln 2
print(f"\nln 2 = {math.log(2):.4f}, S_fo(inf) = {entropy_fo_asymptote(p):.4f}")

# %% the late-time qubit state is mixed but keeps a small coherence
rho = rho_fo(p, 500.0)
print("late rho_fo:\n", np.round(rho.elements, 4))
print(f"normalized coherence {rho.normalized_coherence_magnitude():.4f} = |eta_inf| {eta_asymptote(p):.4f}")

# %% scanning the splitting
print("\n dw/gamma  |eta_inf|  S_fo(inf)")
for ratio in (0.0, 0.3, 1.0, 3.0, 9.2, 30.0):
    q = SystemParams.symmetric(p.omega, ratio * p.gamma, p.gamma)
    print(f"{ratio:8.1f}  {eta_asymptote(q):9.4f}  {entropy_fo_asymptote(q):9.4f}")
