"""
Broadband photodetection behind an H/V polarization filter.

Detector coupling constants and angular factors are folded into a single
efficiency. Detection is strictly causal: nothing is registered until the
photon front arrives at ``t_d`` (retarded time ``tau = t_D - t_d > 0``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import CHANNELS, Channel, ParameterError, Polarization, QubitDensityMatrix, SystemParams
from .entropy import post_detection_entropy
from .ww_dynamics import _coherence_product, _out, one_minus_exp

__all__ = [
    "DetectorParams", "detector_amplitude", "field_amplitude", "cross_spectral_integral",
    "rho_detected", "conditional_probability", "post_detection_entropy",
]


@dataclass(frozen=True)
class DetectorParams:
    """Ideal broadband detector.

    Parameters
    ----------
    efficiency : float
        Flat spectral density of the detector, in (0, 1].
    t_d : float
        Propagation delay from emitter to detector, ns.
    filter : Polarization or str
        Linear polarization passed by the filter.
    """

    efficiency: float = 1.0
    t_d: float = 0.0
    filter: Polarization = Polarization.H

    def __post_init__(self):
        eff = float(self.efficiency)
        td = float(self.t_d)
        if not (math.isfinite(eff) and 0 < eff <= 1):
            raise ParameterError("efficiency", f"must lie in (0, 1], got {self.efficiency}")
        if not (math.isfinite(td) and td >= 0):
            raise ParameterError("t_d", f"must be >= 0, got {self.t_d}")
        object.__setattr__(self, "efficiency", eff)
        object.__setattr__(self, "t_d", td)
        object.__setattr__(self, "filter", Polarization.parse(self.filter))

    def to_dict(self) -> dict:
        return {"efficiency": self.efficiency, "t_d": self.t_d, "filter": self.filter.value}


def _retarded(d: DetectorParams, t_D):
    t = np.asarray(t_D, dtype=float)
    if np.any(~np.isfinite(t)):
        raise ValueError("detection time must be finite")
    tau = t - d.t_d
    return t, tau, tau > 0


def detector_amplitude(p: SystemParams, d: DetectorParams, ch: Channel, nu, t: float):
    """Amplitude for exciting the detector level at frequency `nu` by time `t`.

    Per unit detector coupling; vanishes identically for ``t <= t_d``.
    """
    nu = np.asarray(nu, dtype=float)
    s = float(t) - d.t_d
    if s <= 0:
        val = np.zeros(nu.shape, dtype=complex)
    else:
        x = nu - ch.frequency(p) + 0.5j * p.gamma
        val = (1j * ch.filter_sign(d.filter) * math.sqrt(ch.width(p) / (2 * math.pi))
               * np.exp(1j * nu * d.t_d) * (-np.expm1(1j * x * s)) / x)
    return val.item() if val.ndim == 0 else val


def field_amplitude(p: SystemParams, d: DetectorParams, ch: Channel, t, *, frame: float | None = None):
    """Filtered field of channel `ch` at the detector, in a frame rotating at `frame`.

    ``delta * sqrt(gamma_ch / 2 pi) exp(-i (omega_ch - frame) s - gamma s / 2)``
    for ``s = t - t_d > 0`` and zero before. `frame` defaults to the mean
    optical frequency, which keeps the phases small.
    """
    frame = p.omega if frame is None else frame
    t = np.asarray(t, dtype=float)
    s = t - d.t_d
    live = s > 0
    sp = np.where(live, s, 0.0)
    val = (ch.filter_sign(d.filter) * math.sqrt(ch.width(p) / (2 * math.pi))
           * np.exp(-(1j * (ch.frequency(p) - frame) + 0.5 * p.gamma) * sp))
    return _out(np.where(live, val, 0.0), t)


def cross_spectral_integral(p: SystemParams, a: Channel, b: Channel, tau):
    """``int F_a(w) F_b*(w) dw`` for the two detector-side spectral amplitudes.

    Zero for ``tau <= 0``; the diagonal ``a == b`` is the real number
    ``(gamma_a / gamma)(1 - exp(-gamma tau))``.
    """
    tau_a = np.asarray(tau, dtype=float)
    live = tau_a > 0
    tp = np.where(live, tau_a, 0.0)
    dab = a.frequency(p) - b.frequency(p)
    weight = math.sqrt(a.width(p) * b.width(p)) / p.gamma
    if a is b:
        val = weight * one_minus_exp(p.gamma * tp) + 0j
    else:
        val = weight * one_minus_exp((p.gamma + 1j * dab) * tp) / (1 + 1j * dab / p.gamma)
    return _out(np.where(live, val, 0.0), tau)


def _detected_entries(p: SystemParams, d: DetectorParams, t_D):
    """Populations and [0, 1] coherence of the detected state (Schroedinger picture)."""
    t, tau, live = _retarded(d, t_D)
    tp = np.where(live, tau, 0.0)
    eff = d.efficiency
    sign = d.filter.sign_minus
    if p.equal_widths:
        n = 0.5 * eff * one_minus_exp(p.gamma * tp)
        r00 = r11 = n
        c = eff * sign * _coherence_product(p, tp)
    else:
        r00 = eff * np.real(cross_spectral_integral(p, Channel.PLUS, Channel.PLUS, tp))
        r11 = eff * np.real(cross_spectral_integral(p, Channel.MINUS, Channel.MINUS, tp))
        c = eff * sign * cross_spectral_integral(p, Channel.PLUS, Channel.MINUS, tp)
    c = c * np.exp(1j * p.delta_omega * t)
    zero = np.zeros_like(tp)
    return (np.where(live, r00, zero), np.where(live, r11, zero),
            np.where(live, c, zero.astype(complex)))


def rho_detected(p: SystemParams, d: DetectorParams, t_D: float) -> QubitDensityMatrix:
    """Projected qubit state at detection time `t_D` (trace = detection probability)."""
    r00, r11, c = _detected_entries(p, d, float(t_D))
    return QubitDensityMatrix.from_entries(float(r00), float(r11), complex(c))


def conditional_probability(p: SystemParams, d: DetectorParams, t_D, phi: float = 0.0,
                            *, normalized: bool = False):
    """Probability of a filtered detection with the qubit found in (|+1> + e^{i phi}|-1>)/sqrt 2.

    With ``normalized=True`` the result is divided by the efficiency.
    """
    r00, r11, c = _detected_entries(p, d, t_D)
    prob = 0.5 * (r00 + r11) + np.real(np.exp(1j * phi) * c)
    if normalized:
        prob = prob / d.efficiency
    return _out(np.asarray(prob), t_D)


def detected_weight(p: SystemParams, d: DetectorParams, t_D):
    """Total detection probability behind the filter, the trace of `rho_detected`."""
    r00, r11, _ = _detected_entries(p, d, t_D)
    return _out(np.asarray(r00 + r11), t_D)


def channel_weights(p: SystemParams, d: DetectorParams, t_D) -> np.ndarray:
    """Per-channel detection probabilities, efficiency * diagonal cross-spectral integrals."""
    tau = np.asarray(t_D, dtype=float) - d.t_d
    return np.array([d.efficiency * np.real(cross_spectral_integral(p, ch, ch, tau)) for ch in CHANNELS])
