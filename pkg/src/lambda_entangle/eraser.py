"""
Time-binned (shuttered) detection as a quantum eraser.

A rectangular shutter opens the detector only during ``[t_D - delta_t, t_D]``.
When the window is short on both the lifetime and the beat period, the
frequency information of the photon is lost and the detected qubit state is
pure. For arbitrary windows, `numeric_shutter_coherence` integrates the
detector correlation directly and interpolates between full erasure and
the which-path limit of `rho_detected`.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .core import Channel, QubitDensityMatrix, SystemParams
from .photodetect import DetectorParams, field_amplitude

ERASER_LIMIT = 0.05
QUAD_EPSABS = 1e-10
QUAD_EPSREL = 1e-6
QUAD_LIMIT = 200


class ShutterRegimeError(ValueError):
    """The shutter is too wide for the closed-form eraser; use `numeric_shutter_coherence`."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach tolerance. Carries the last estimate and error bound."""

    def __init__(self, message: str, estimate: complex, error_bound: float):
        super().__init__(f"{message} (estimate={estimate!r}, error bound={error_bound:.3e})")
        self.estimate = estimate
        self.error_bound = error_bound


@dataclass(frozen=True)
class ShutterSpec:
    """Rectangular shutter that closes at `t_D` after staying open for `delta_t` (ns)."""

    t_D: float
    delta_t: float

    def __post_init__(self):
        t_D, dt = float(self.t_D), float(self.delta_t)
        if not math.isfinite(t_D):
            raise ValueError("t_D must be finite")
        if not (math.isfinite(dt) and dt > 0):
            raise ValueError(f"delta_t must be > 0, got {self.delta_t}")
        object.__setattr__(self, "t_D", t_D)
        object.__setattr__(self, "delta_t", dt)

    def to_dict(self) -> dict:
        return {"t_D": self.t_D, "delta_t": self.delta_t}


def check_eraser_regime(p: SystemParams, s: ShutterSpec) -> None:
    """Raise unless gamma*delta_t and delta_omega*delta_t are both below 0.05."""
    gdt = p.gamma * s.delta_t
    wdt = p.delta_omega * s.delta_t
    if gdt >= ERASER_LIMIT or wdt >= ERASER_LIMIT:
        raise ShutterRegimeError(
            f"shutter window too wide for the closed-form eraser (gamma*dt={gdt:.4g}, "
            f"delta_omega*dt={wdt:.4g}, both must be < {ERASER_LIMIT}); "
            "use numeric_shutter_coherence (the blurrer) instead")


def shutter_weight(p: SystemParams, d: DetectorParams, s: ShutterSpec) -> float:
    """Normalization N(tau) = (efficiency / 2) gamma delta_t exp(-gamma tau), zero for tau <= 0."""
    tau = s.t_D - d.t_d
    if tau <= 0:
        return 0.0
    return 0.5 * d.efficiency * p.gamma * s.delta_t * math.exp(-p.gamma * tau)


def rho_erased(p: SystemParams, d: DetectorParams, s: ShutterSpec) -> QubitDensityMatrix:
    """Qubit state after a short-shutter detection; pure whenever it is non-zero."""
    check_eraser_regime(p, s)
    w = shutter_weight(p, d, s)
    c = w * d.filter.sign_minus * complex(np.exp(1j * p.delta_omega * d.t_d))
    return QubitDensityMatrix.from_entries(w, w, c)


@dataclass(frozen=True)
class PureQubitState:
    """Weighted pure state; its density matrix is ``weight * outer(v, v*)``.

    `amplitudes` are kept exactly as constructed (not necessarily unit norm).
    """

    amplitudes: np.ndarray = field(repr=False)
    weight: float

    def __post_init__(self):
        v = np.array(self.amplitudes, dtype=complex)
        if v.shape != (2,):
            raise ValueError("amplitudes must be a complex 2-vector")
        w = float(self.weight)
        if not (math.isfinite(w) and w >= 0):
            raise ValueError(f"weight must be >= 0, got {self.weight}")
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)
        object.__setattr__(self, "weight", w)

    def unit_vector(self) -> np.ndarray:
        return self.amplitudes / np.linalg.norm(self.amplitudes)

    def density_matrix(self) -> QubitDensityMatrix:
        v = self.amplitudes
        return QubitDensityMatrix(self.weight * np.outer(v, v.conj()))

    def purity(self) -> float:
        return self.density_matrix().purity()


def purified_state(p: SystemParams, d: DetectorParams, s: ShutterSpec) -> PureQubitState:
    """Pure-state form of `rho_erased`.

    Amplitudes ``(exp(i omega_+ t_d), delta exp(i omega_- t_d))`` with weight N(tau);
    delta is the filter sign.
    """
    check_eraser_regime(p, s)
    amps = np.array([np.exp(1j * p.omega_plus * d.t_d),
                     d.filter.sign_minus * np.exp(1j * p.omega_minus * d.t_d)])
    return PureQubitState(amps, shutter_weight(p, d, s))


def evolve_free(state: PureQubitState, p: SystemParams, t: float) -> PureQubitState:
    """Free precession of the qubit for a time `t` (global phase dropped)."""
    if t < 0:
        raise ValueError("t must be >= 0")
    phases = np.exp(1j * np.array([p.omega_plus, p.omega_minus]) * t)
    return PureQubitState(state.amplitudes * phases, state.weight)


def readout_state(p: SystemParams, t: float, phi: float) -> np.ndarray:
    """Superposition |M(t)> = (e^{i omega_+ t}|+1> + e^{i omega_- t} e^{i phi}|-1>)/sqrt 2.

    This is the state the microwave pulses map onto the readout level at time `t`.
    """
    return np.array([np.exp(1j * p.omega_plus * t),
                     np.exp(1j * (p.omega_minus * t + phi))]) / math.sqrt(2)


def joint_probability(p: SystemParams, d: DetectorParams, s: ShutterSpec, phi: float,
                      t_free: float = 0.0) -> float:
    """Probability of a shuttered detection followed by a readout in |M>.

    The qubit precesses freely for `t_free` after the shutter closes, then
    is projected on |M(t_D + t_free)>. The result is ``N(tau)`` times the
    projection probability of the normalized post-detection state, i.e.
    ``(N/2)[1 + delta cos(delta_omega tau - phi)]``; it does not depend on
    `t_free`.
    """
    state = evolve_free(purified_state(p, d, s), p, t_free)
    if state.weight == 0.0:
        return 0.0
    m = readout_state(p, s.t_D + t_free, phi)
    overlap = np.vdot(m, state.unit_vector())
    return state.weight * float(abs(overlap) ** 2)


def _quad_real(f, a: float, b: float) -> tuple[float, float]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        res = integrate.quad(f, a, b, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL,
                             limit=QUAD_LIMIT, full_output=1)
    val, err, info = res[0], res[1], res[2]
    if len(res) > 3:
        raise QuadratureError(f"quadrature failed on [{a}, {b}]: {res[3]}", val, err)
    return val, err


def _quad_complex(f, a: float, b: float) -> complex:
    re, _ = _quad_real(lambda t: f(t).real, a, b)
    im, _ = _quad_real(lambda t: f(t).imag, a, b)
    return complex(re, im)


def numeric_shutter_coherence(p: SystemParams, d: DetectorParams, t_D: float,
                              delta_t: float) -> QubitDensityMatrix:
    """Detected qubit state for an arbitrary shutter window, by adaptive quadrature.

    Integrates the broadband detector correlation of the two filtered
    channel fields over the open part of ``[t_D - delta_t, t_D]`` (the
    detector sees nothing before ``t_d``) and returns the Schroedinger
    picture matrix at `t_D`.
    """
    s = ShutterSpec(t_D, delta_t)
    lo = max(s.t_D - s.delta_t, d.t_d)
    hi = s.t_D
    if hi <= lo:
        return QubitDensityMatrix.zero()

    def bilinear(a: Channel, b: Channel):
        return lambda t: field_amplitude(p, d, a, t) * np.conj(field_amplitude(p, d, b, t))

    scale = 2 * math.pi * d.efficiency
    r00 = scale * _quad_complex(bilinear(Channel.PLUS, Channel.PLUS), lo, hi).real
    r11 = scale * _quad_complex(bilinear(Channel.MINUS, Channel.MINUS), lo, hi).real
    c = scale * _quad_complex(bilinear(Channel.PLUS, Channel.MINUS), lo, hi)
    c *= complex(np.exp(1j * p.delta_omega * s.t_D))
    return QubitDensityMatrix.from_entries(r00, r11, c)


def blur_sweep(p: SystemParams, d: DetectorParams, t_D: float, delta_ts, *, max_workers: int = 1):
    """Normalized coherence magnitude of `numeric_shutter_coherence` for each window width.

    Results come back in the order of `delta_ts`.
    """
    delta_ts = [float(x) for x in delta_ts]

    def one(dt):
        rho = numeric_shutter_coherence(p, d, t_D, dt)
        return rho.normalized_coherence_magnitude() if rho.trace > 0 else float("nan")

    if max_workers <= 1:
        return np.array([one(dt) for dt in delta_ts])
    from concurrent.futures import ThreadPoolExecutor
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return np.array(list(pool.map(one, delta_ts)))
