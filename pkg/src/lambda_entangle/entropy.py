"""Von Neumann entanglement entropies of the emitter after tracing out the field (nats)."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import entr

from .core import SystemParams
from .ww_dynamics import _coherence_product, _out, _times, eta, one_minus_exp

LN3 = math.log(3.0)
NEG_TOL = 1e-12


def vn_entropy(probs) -> float | np.ndarray:
    """-sum p ln p over the last axis, with 0 ln 0 = 0.

    The weights need not sum to one. Values in [-1e-12, 0) are treated as
    round-off and clipped to zero.
    """
    p = np.asarray(probs, dtype=float)
    if np.any(~np.isfinite(p)):
        raise ValueError("probabilities must be finite")
    if np.any(p > 1 + 1e-9):
        raise ValueError(f"probability above 1: {p.max()}")
    if np.any(p < -NEG_TOL):
        raise ValueError(f"negative probability: {p.min()}")
    s = entr(np.clip(p, 0.0, 1.0)).sum(axis=-1)
    return float(s) if np.ndim(s) == 0 else s


def _qubit_eigenvalues_fo(p: SystemParams, t: np.ndarray):
    n = one_minus_exp(p.gamma * t)
    c = np.abs(_coherence_product(p, t))
    return 0.5 * n + c, 0.5 * n - c


def entropy_fo(p: SystemParams, t):
    """Entanglement entropy when photon and qubit are entangled in frequency only."""
    p.require_equal_widths("frequency-only entropy")
    a = _times(t)
    lam1, lam2 = _qubit_eigenvalues_fo(p, a)
    pe = np.exp(-p.gamma * a)
    s = vn_entropy(np.stack([pe, lam1, np.clip(lam2, 0.0, None)], axis=-1))
    return _out(np.asarray(s), t)


def entropy_fo_asymptote(p: SystemParams) -> float:
    """Late-time limit of `entropy_fo`; depends only on delta_omega / gamma."""
    p.require_equal_widths("frequency-only entropy")
    x = 1.0 / math.hypot(1.0, p.splitting_ratio)
    return vn_entropy([(1 + x) / 2, (1 - x) / 2])


def entropy_fp(p: SystemParams, t):
    """Entanglement entropy for frequency and polarization entanglement.

    Valid for unequal partial widths; each qubit level carries the
    branching weight gamma_pm / gamma of the emitted population.
    """
    a = _times(t)
    n = one_minus_exp(p.gamma * a)
    pe = np.exp(-p.gamma * a)
    s = vn_entropy(np.stack([pe, p.gamma_plus / p.gamma * n, p.gamma_minus / p.gamma * n], axis=-1))
    return _out(np.asarray(s), t)


def entropy_fp_asymptote(p: SystemParams) -> float:
    return vn_entropy([p.gamma_plus / p.gamma, p.gamma_minus / p.gamma])


def entropy_gap(p: SystemParams, t):
    """S_fp(t) - S_fo(t); never negative."""
    return _out(np.asarray(entropy_fp(p, t)) - np.asarray(entropy_fo(p, t)), t)


def post_detection_entropy(p: SystemParams, tau):
    """Entropy of the trace-normalized qubit state after an H/V-filtered detection.

    Parameters
    ----------
    tau : float or array_like
        Retarded detection time t_D - t_d, ns; must be positive.
    """
    p.require_equal_widths("post-detection entropy")
    a = _times(tau, strict=True, name="tau")
    x = np.abs(np.asarray(eta(p, a)))
    s = vn_entropy(np.stack([(1 + x) / 2, np.clip((1 - x) / 2, 0.0, None)], axis=-1))
    return _out(np.asarray(s), tau)


class EntropyKind(enum.Enum):
    FO = "fo"
    FP = "fp"
    POST_DETECTION = "post_detection"


@dataclass(frozen=True)
class EntropyCurve:
    times: np.ndarray
    values: np.ndarray
    label: EntropyKind

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape or t.ndim != 1:
            raise ValueError("times and values must be 1-D arrays of equal length")
        if np.any(np.diff(t) < 0):
            raise ValueError("times must be ordered")
        if np.any(v < -NEG_TOL) or np.any(v > LN3 + NEG_TOL):
            raise ValueError("entropy outside [0, ln 3]")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "label", EntropyKind(self.label) if not isinstance(self.label, EntropyKind) else self.label)


def entropy_curve(p: SystemParams, times, kind="fo") -> EntropyCurve:
    """Evaluate one of the entropies on a time grid (retarded time for post_detection)."""
    kind = EntropyKind(kind) if not isinstance(kind, EntropyKind) else kind
    t = np.asarray(times, dtype=float)
    fn = {EntropyKind.FO: entropy_fo, EntropyKind.FP: entropy_fp,
          EntropyKind.POST_DETECTION: post_detection_entropy}[kind]
    return EntropyCurve(t, np.asarray(fn(p, t), dtype=float), kind)
