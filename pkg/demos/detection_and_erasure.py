"""
Detecting the photon, then erasing what it knew.

A broadband detector behind an H filter projects the qubit onto a mixed
state whose coherence is still suppressed by which-path information. A
short shutter window throws that information away and the projected state
becomes pure; widening the window brings the mixing back.
"""
import math

import numpy as np

from lambda_entangle import (DetectorParams, ShutterSpec, SystemParams, blur_sweep, conditional_probability,
                             joint_probability, post_detection_entropy, rho_detected, rho_erased,
                             shutter_weight)

p = SystemParams.from_lab_units()
d = DetectorParams(efficiency=1.0, t_d=7.0, filter="H")

# %% conditional probability: oscillates about 1/2 with a small late amplitude
tau = np.linspace(0, 120, 12001)
prob = conditional_probability(p, d, tau + d.t_d, normalized=True)
late = prob[tau > 80]
print(f"late oscillation: mean {late.mean():.4f}, half range {(late.max() - late.min()) / 2:.4f}, "
      f"expected {0.5 * p.gamma / p.delta_omega:.4f}")
print(f"beat period 2 pi / delta_omega = {2 * math.pi / p.delta_omega:.3f} ns")

rho = rho_detected(p, d, d.t_d + 60)
print(f"broadband detection at tau = 60 ns: purity {rho.purity():.4f}, "
      f"entropy {post_detection_entropy(p, 60.0):.4f} nats")

# %% a short shutter purifies the state
s = ShutterSpec(t_D=d.t_d + 60, delta_t=0.05)
er = rho_erased(p, d, s)
print(f"\nshutter 50 ps: weight {shutter_weight(p, d, s):.3e}, purity {er.purity():.12f}")

for tau_i in np.linspace(0.5, 8.5, 9):
    si = ShutterSpec(d.t_d + tau_i, 0.05)
    print(f"tau {tau_i:4.1f} ns  P(M|H) / N = {joint_probability(p, d, si, 0.0) / shutter_weight(p, d, si):.3f}")

# %% the blurrer: coherence versus window width
t_D = d.t_d + 120
widths = [0.05, 0.5, 2, 4, 8.2, 12, 16.4, 40, 120]
floor = rho_detected(p, d, t_D).normalized_coherence_magnitude()
print(f"\nwhich-path floor {floor:.4f}")
for w, c in zip(widths, blur_sweep(p, d, t_D, widths)):
    print(f"window {w:6.2f} ns  coherence {c:.4f}")
# windows spanning whole beat periods dip towards the floor; in between coherence revives
