"""
Closed-form Wigner-Weisskopf emission: amplitudes, wavepacket overlaps,
photon number, the coherence factor eta(t) and the reduced qubit states.

Scalar-in/scalar-out functions also accept numpy arrays of times and then
return arrays of the same shape. Every formula is written through
``expm1`` of a negative argument so that it is accurate at small
``gamma * t`` and underflows gracefully at large ``gamma * t``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import (Channel, QubitDensityMatrix, SystemParams, ThreeLevelState)


class EntanglementMode(enum.Enum):
    """Whether the two decay photons share a polarization (frequency only) or not."""

    FREQUENCY_ONLY = "frequency_only"
    FREQUENCY_POLARIZATION = "frequency_polarization"

    @classmethod
    def parse(cls, value) -> "EntanglementMode":
        if isinstance(value, cls):
            return value
        return cls(str(value))


def _times(t, *, strict: bool = False, name: str = "t") -> np.ndarray:
    a = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(a)):
        raise ValueError(f"{name} must be finite")
    if strict:
        if np.any(a <= 0):
            raise ValueError(f"{name} must be > 0")
    elif np.any(a < 0):
        raise ValueError(f"{name} must be >= 0")
    return a


def _out(a, like):
    return a.item() if np.ndim(like) == 0 else a


def one_minus_exp(z):
    """1 - exp(-z) for real or complex z, without cancellation at small |z|."""
    return -np.expm1(-np.asarray(z))


def excited_amplitude(p: SystemParams, t):
    """C_A(t) = exp(-gamma t / 2)."""
    a = _times(t)
    return _out(np.exp(-0.5 * p.gamma * a), t)


def excited_population(p: SystemParams, t):
    a = _times(t)
    return _out(np.exp(-p.gamma * a), t)


def photon_amplitude(p: SystemParams, ch: Channel, k, t):
    """Spectral amplitude of the photon emitted into channel `ch`.

    Normalized so that ``integral |C(k, t)|^2 dk`` equals
    ``(gamma_ch / gamma) (1 - exp(-gamma t))``.

    Parameters
    ----------
    k : float or array_like
        Photon angular frequency, rad/ns.
    t : float
        Time since the start of the decay, ns. Must be scalar when `k` is an array.
    """
    tt = _times(t)
    kk = np.asarray(k, dtype=float)
    x = kk - ch.frequency(p) + 0.5j * p.gamma
    # 1 - exp(i x t)
    val = math.sqrt(ch.width(p) / (2 * math.pi)) * (-np.expm1(1j * x * tt)) / x
    return val.item() if val.ndim == 0 else val


@dataclass(frozen=True)
class LineshapeOverlap:
    """Value of the lineshape integral ``int G_a(w, t) G_b*(w, t) dw``."""

    value: complex
    omega_a: float
    omega_b: float
    t: float


def lineshape_overlap(p: SystemParams, a: Channel, b: Channel, t: float) -> LineshapeOverlap:
    """Exact overlap of two truncated Lorentzian lineshapes.

    ``2 pi [1 - exp(-i D t) exp(-gamma t)] / (gamma + i D)`` with
    ``D = omega_a - omega_b``.
    """
    t = float(_times(t))
    wa, wb = a.frequency(p), b.frequency(p)
    z = p.gamma + 1j * (wa - wb)
    value = 2 * math.pi * complex(one_minus_exp(z * t)) / z
    return LineshapeOverlap(value=value, omega_a=wa, omega_b=wb, t=t)


def wavepacket_norms(p: SystemParams, t: float, mode="frequency_only") -> np.ndarray:
    """Gram matrix ``G[a, b] = <sigma_a(t)|sigma_b(t)>`` of the two photon wavepackets.

    Index 0 is the packet paired with |+1>, index 1 the one paired with |-1>.
    In frequency-polarization mode the packets have orthogonal polarizations
    and the off-diagonal vanishes identically.
    """
    mode = EntanglementMode.parse(mode)
    gram = np.zeros((2, 2), dtype=complex)
    for a in (Channel.PLUS, Channel.MINUS):
        for b in (Channel.PLUS, Channel.MINUS):
            if a is not b and mode is EntanglementMode.FREQUENCY_POLARIZATION:
                continue
            weight = 2 * math.sqrt(a.width(p) * b.width(p)) / (2 * math.pi)
            gram[a.index, b.index] = weight * lineshape_overlap(p, b, a, t).value
    return gram


def photon_number(p: SystemParams, t):
    """Mean number of emitted photons, 1 - exp(-gamma t)."""
    a = _times(t)
    return _out(one_minus_exp(p.gamma * a), t)


def _coherence_product(p: SystemParams, t):
    """(1 - exp(-gamma t)) * eta(t) / 2, finite and exact at t = 0."""
    z = p.gamma + 1j * p.delta_omega
    return 0.5 * one_minus_exp(z * t) / (1 + 1j * p.splitting_ratio)


def eta(p: SystemParams, t):
    """Coherence factor eta(t); its modulus measures surviving which-path coherence.

    Rejects ``t = 0``, where eta is a removable 0/0.
    """
    a = _times(t, strict=True)
    if p.delta_omega == 0:
        return _out(np.ones_like(a, dtype=complex), t)
    z = p.gamma + 1j * p.delta_omega
    val = one_minus_exp(z * a) / (one_minus_exp(p.gamma * a) * (1 + 1j * p.splitting_ratio))
    return _out(val, t)


def eta_asymptote(p: SystemParams) -> float:
    """|eta(t -> inf)| = 1 / sqrt(1 + (delta_omega / gamma)^2)."""
    return 1.0 / math.sqrt(1.0 + p.splitting_ratio ** 2)


def rho_fo(p: SystemParams, t: float) -> QubitDensityMatrix:
    """Reduced qubit state (Schroedinger picture) when photons differ only in frequency.

    Requires equal partial widths.
    """
    p.require_equal_widths("frequency-only reduced density matrix")
    t = float(_times(t))
    n = float(one_minus_exp(p.gamma * t))
    c = complex(np.exp(1j * p.delta_omega * t) * _coherence_product(p, t))
    return QubitDensityMatrix.from_entries(0.5 * n, 0.5 * n, c)


def rho_fp(p: SystemParams, t: float) -> QubitDensityMatrix:
    """Reduced qubit state when the photons also carry orthogonal polarizations."""
    t = float(_times(t))
    n = float(one_minus_exp(p.gamma * t))
    return QubitDensityMatrix.from_entries(p.gamma_plus / p.gamma * n, p.gamma_minus / p.gamma * n, 0.0)


def rho_qubit(p: SystemParams, t: float, mode="frequency_only") -> QubitDensityMatrix:
    mode = EntanglementMode.parse(mode)
    if mode is EntanglementMode.FREQUENCY_ONLY:
        return rho_fo(p, t)
    return rho_fp(p, t)


def three_level_state(p: SystemParams, t: float, mode="frequency_only") -> ThreeLevelState:
    """Full emitter state: exp(-gamma t) on |A> plus the qubit block."""
    return ThreeLevelState(excited_population(p, float(t)), rho_qubit(p, t, mode))
