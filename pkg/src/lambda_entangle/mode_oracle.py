"""
Brute-force check of the closed forms on a discretized radiation field.

The continuum of photon modes is replaced by a uniform frequency lattice
around the optical frequency, with a constant coupling per decay channel
fixed by the golden rule. The resulting finite linear system is integrated
exactly (no pole approximation), optionally together with a passive
broadband detector fed by the propagated field. Agreement with the
closed forms is then a statement about the continuum limit, with
tolerances set by the finite bandwidth of the lattice.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .core import CHANNELS, NARROW_WIDTH_RATIO, Channel, ParameterError, SystemParams
from .photodetect import DetectorParams, cross_spectral_integral
from .ww_dynamics import one_minus_exp, rho_fo, rho_fp, wavepacket_norms

MIN_HALF_WIDTH = 40.0
MIN_MODES_PER_GAMMA = 10.0


class IntegrationError(RuntimeError):
    """The ODE solver stopped early; `t_reached` is the last time it got to."""

    def __init__(self, message: str, t_reached: float):
        super().__init__(f"{message} (reached t={t_reached:.6g} ns)")
        self.t_reached = t_reached


@dataclass(frozen=True)
class ModeGrid:
    frequencies: np.ndarray = field(repr=False)
    spacing: float
    half_width: float
    coupling_plus: float
    coupling_minus: float

    @property
    def mode_count(self) -> int:
        return int(self.frequencies.size)

    @property
    def recurrence_time(self) -> float:
        return 2 * math.pi / self.spacing

    def coupling(self, ch: Channel) -> float:
        return self.coupling_plus if ch is Channel.PLUS else self.coupling_minus

    def golden_rule_width(self, ch: Channel) -> float:
        """2 pi g^2 times the lattice density of states."""
        return 2 * math.pi * self.coupling(ch) ** 2 / self.spacing


def build_grid(p: SystemParams, half_width_in_gammas: float = 40.0,
               modes_per_gamma: float = 10.0) -> ModeGrid:
    """Uniform lattice over [omega - W, omega + W] with W = half_width * gamma."""
    if not half_width_in_gammas >= MIN_HALF_WIDTH:
        raise ParameterError("half_width_in_gammas",
                             f"must be >= {MIN_HALF_WIDTH:g}, got {half_width_in_gammas}")
    if not modes_per_gamma >= MIN_MODES_PER_GAMMA:
        raise ParameterError("modes_per_gamma",
                             f"must be >= {MIN_MODES_PER_GAMMA:g}, got {modes_per_gamma}")
    dk = p.gamma / modes_per_gamma
    w = half_width_in_gammas * p.gamma
    n_side = int(round(half_width_in_gammas * modes_per_gamma))
    freqs = p.omega + dk * np.arange(-n_side, n_side + 1)
    freqs.setflags(write=False)
    return ModeGrid(
        frequencies=freqs,
        spacing=dk,
        half_width=w,
        coupling_plus=math.sqrt(p.gamma_plus * dk / (2 * math.pi)),
        coupling_minus=math.sqrt(p.gamma_minus * dk / (2 * math.pi)),
    )


@dataclass
class Trajectory:
    """Lattice amplitudes (interaction picture) at the stored times.

    ``channel_amplitudes[c, k, i]`` is the amplitude of lattice mode ``k``
    of channel ``c`` (0 = plus, 1 = minus) at ``times[i]``;
    ``detector_amplitudes`` has the same layout over the detector lattice.
    """

    times: np.ndarray
    excited: np.ndarray
    channel_amplitudes: np.ndarray
    params: SystemParams
    grid: ModeGrid
    detector: DetectorParams | None = None
    detector_amplitudes: np.ndarray | None = None

    def norm(self) -> np.ndarray:
        """|C_A|^2 + sum |C_k|^2; detector amplitudes carry no back-action and are excluded."""
        return np.abs(self.excited) ** 2 + np.sum(np.abs(self.channel_amplitudes) ** 2, axis=(0, 1))

    def gram(self, mode="frequency_only") -> np.ndarray:
        """Wavepacket Gram matrices, shape (n_times, 2, 2)."""
        c = self.channel_amplitudes
        g = np.empty((self.times.size, 2, 2), dtype=complex)
        for a in range(2):
            for b in range(2):
                g[:, a, b] = 2 * np.sum(c[b] * np.conj(c[a]), axis=0)
        if str(getattr(mode, "value", mode)) == "frequency_polarization":
            g[:, 0, 1] = g[:, 1, 0] = 0.0
        return g

    def rho_qubit(self, mode="frequency_only") -> np.ndarray:
        """Reduced qubit matrices in the Schroedinger picture, shape (n_times, 2, 2)."""
        g = self.gram(mode)
        rho = 0.5 * np.transpose(g, (0, 2, 1))
        phase = np.exp(1j * self.params.delta_omega * self.times)
        rho[:, 0, 1] *= phase
        rho[:, 1, 0] *= np.conj(phase)
        return rho

    def detector_field(self) -> np.ndarray:
        """Filtered field of each channel at the detector, shape (2, n_times), lab frame."""
        if self.detector is None:
            raise ValueError("trajectory was integrated without a detector")
        k = self.grid.frequencies
        pref = 1j * math.sqrt(self.grid.spacing) / (2 * math.pi)
        ph = np.exp(-1j * np.outer(self.times - self.detector.t_d, k))
        out = np.empty((2, self.times.size), dtype=complex)
        for ch in CHANNELS:
            out[ch.index] = ch.filter_sign(self.detector.filter) * pref * np.einsum(
                "ik,ki->i", ph, self.channel_amplitudes[ch.index])
        return out

    def detector_bilinears(self) -> np.ndarray:
        """sum_j D_{j,a} D*_{j,b}, shape (n_times, 2, 2)."""
        if self.detector_amplitudes is None:
            raise ValueError("trajectory was integrated without a detector")
        d = self.detector_amplitudes
        out = np.empty((self.times.size, 2, 2), dtype=complex)
        for a in range(2):
            for b in range(2):
                out[:, a, b] = np.sum(d[a] * np.conj(d[b]), axis=0)
        return out


def integrate(p: SystemParams, grid: ModeGrid, horizon: float,
              with_detector: DetectorParams | None = None, *, t_eval=None,
              rtol: float = 1e-9, atol: float = 1e-12,
              allow_recurrence: bool = False) -> Trajectory:
    """Integrate the lattice amplitude equations from C_A(0) = 1.

    The detector (if any) uses a lattice identical to the photon one with a
    common coupling ``sqrt(efficiency * spacing)``, i.e. a flat spectral
    density equal to the efficiency across the band. It is driven by the
    field propagated to ``x_d = t_d`` and exerts no back-action.
    """
    # With a constant coupling, delta_omega only enters through detunings, so
    # only gamma/omega and a positive-frequency band are enforced here.
    if not p.gamma / p.omega < NARROW_WIDTH_RATIO:
        raise ParameterError("omega", f"lattice oracle needs gamma/omega below {NARROW_WIDTH_RATIO}")
    if grid.frequencies[0] <= 0:
        raise ParameterError("half_width_in_gammas", "lattice band reaches non-positive frequencies")
    if not horizon > 0:
        raise ValueError("horizon must be > 0")
    if horizon >= grid.recurrence_time or (horizon >= 0.5 * grid.recurrence_time and not allow_recurrence):
        raise ValueError(f"horizon {horizon} ns too close to the lattice recurrence time "
                         f"{grid.recurrence_time:.4g} ns")
    if t_eval is None:
        t_eval = np.linspace(0.0, horizon, 61)
    t_eval = np.asarray(t_eval, dtype=float)

    k = grid.frequencies
    n = k.size
    det = np.stack([k - ch.frequency(p) for ch in CHANNELS])
    g = np.array([grid.coupling(ch) for ch in CHANNELS])[:, None]
    sl_c = slice(1, 1 + 2 * n)
    sl_d = slice(1 + 2 * n, 1 + 4 * n)

    if with_detector is not None:
        signs = np.array([ch.filter_sign(with_detector.filter) for ch in CHANNELS])[:, None]
        kappa = math.sqrt(with_detector.efficiency * grid.spacing)
        pref = 1j * math.sqrt(grid.spacing) / (2 * math.pi)
        t_d = with_detector.t_d

    def rhs(t, y):
        ca = y[0]
        c = y[sl_c].reshape(2, n)
        ph = np.exp(1j * det * t)
        dy = np.empty_like(y)
        dy[0] = -1j * np.sum(g * np.conj(ph) * c)
        dy[sl_c] = (-1j * g * ph * ca).ravel()
        if with_detector is not None:
            field_ = pref * (c @ np.exp(-1j * k * (t - t_d)))
            dy[sl_d] = (kappa * signs * np.exp(1j * k * t) * field_[:, None]).ravel()
        return dy

    size = 1 + (4 if with_detector is not None else 2) * n
    y0 = np.zeros(size, dtype=complex)
    y0[0] = 1.0
    sol = solve_ivp(rhs, (0.0, float(t_eval[-1])), y0, method="DOP853", t_eval=t_eval,
                    rtol=rtol, atol=atol)
    if sol.status != 0:
        t_reached = float(sol.t[-1]) if sol.t.size else 0.0
        raise IntegrationError(f"ODE integration failed: {sol.message}", t_reached)

    y = sol.y
    return Trajectory(
        times=sol.t,
        excited=y[0],
        channel_amplitudes=y[sl_c].reshape(2, n, -1),
        params=p,
        grid=grid,
        detector=with_detector,
        detector_amplitudes=y[sl_d].reshape(2, n, -1) if with_detector is not None else None,
    )


@dataclass
class CheckResult:
    name: str
    max_deviation: float
    tolerance: float
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "max_deviation": self.max_deviation,
                "tolerance": self.tolerance, "passed": self.passed, "detail": self.detail}


@dataclass
class ValidationReport:
    checks: list[CheckResult]
    meta: dict

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {"passed": self.passed, "meta": self.meta, "checks": [c.to_dict() for c in self.checks]}

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


# Tolerances: lattice bandwidth, not integrator error, dominates all of these
TOL_NORM = 1e-7
TOL_EXCITED = 0.02
TOL_GRAM = 0.03
TOL_WHICH_PATH = 0.03
TOL_RHO = 0.03
TOL_DETECTOR = 0.03
TOL_PRECURSOR = 1e-3
EXCITED_WINDOW = (0.2, 3.0)
WHICH_PATH_WINDOW = (1.0, 3.0)


def _check(name, dev, tol, detail="") -> CheckResult:
    dev = float(dev)
    return CheckResult(name, dev, tol, bool(np.isfinite(dev) and dev <= tol), detail)


def _window(gt, lo, hi):
    m = (gt >= lo - 1e-12) & (gt <= hi + 1e-12)
    return m


def validate(p: SystemParams, grid: ModeGrid, horizon: float,
             detector: DetectorParams | None = None, *, checkpoints: int = 61,
             trajectory: Trajectory | None = None) -> ValidationReport:
    """Compare a lattice run against every closed form it can reach.

    A report is always produced; checks that miss their tolerance are
    flagged rather than raised.
    """
    gamma = p.gamma
    checks: list[CheckResult] = []
    recurrence_ok = horizon < 0.5 * grid.recurrence_time
    checks.append(_check("recurrence_margin", horizon / grid.recurrence_time, 0.5,
                         "horizon / recurrence time"))

    if trajectory is None:
        times = np.linspace(0.0, horizon, checkpoints)
        if detector is not None:
            w = grid.half_width
            fine = np.arange(max(detector.t_d - 2.0, 0.0), min(detector.t_d + 2.0, horizon),
                             0.1 / w)
            times = np.union1d(times, fine)
        try:
            trajectory = integrate(p, grid, horizon, detector, t_eval=times,
                                   allow_recurrence=not recurrence_ok)
        except (ValueError, IntegrationError) as exc:
            checks.append(CheckResult("integration", float("nan"), 0.0, False, str(exc)))
            return ValidationReport(checks, {"params": p.to_dict(), "horizon": horizon})
    tr = trajectory
    t = tr.times
    gt = gamma * t

    checks.append(_check("norm_conservation", np.max(np.abs(tr.norm() - 1.0)), TOL_NORM))

    m = _window(gt, *EXCITED_WINDOW)
    pop = np.abs(tr.excited[m]) ** 2
    checks.append(_check("excited_population", np.max(np.abs(pop / np.exp(-gt[m]) - 1.0)),
                         TOL_EXCITED, "max relative deviation of |C_A|^2 from exp(-gamma t)"))

    n_photon = one_minus_exp(gt)
    for mode in ("frequency_only", "frequency_polarization"):
        g_or = tr.gram(mode)[m]
        g_cf = np.array([wavepacket_norms(p, ti, mode) for ti in t[m]])
        dev = np.max(np.abs(g_or - g_cf), axis=(1, 2)) / n_photon[m]
        checks.append(_check(f"gram_{mode}", np.max(dev), TOL_GRAM,
                             "max entry deviation relative to the photon number"))

    mw = _window(gt, *WHICH_PATH_WINDOW)
    if np.any(mw):
        g_or = tr.gram("frequency_only")[mw]
        g_cf = np.array([wavepacket_norms(p, ti) for ti in t[mw]])

        def factor(g):
            return np.abs(g[:, 1, 0]) / np.sqrt(g[:, 0, 0].real * g[:, 1, 1].real)

        dev = np.max(np.abs(factor(g_or) / factor(g_cf) - 1.0))
        checks.append(_check("which_path_factor", dev, TOL_WHICH_PATH,
                             f"oracle overlap magnitude at horizon: {factor(g_or)[-1]:.6g}"))

    rho_or = tr.rho_qubit("frequency_only")[m]
    if p.equal_widths:
        rho_cf = np.array([rho_fo(p, ti).elements for ti in t[m]])
        dev = np.max(np.abs(rho_or - rho_cf), axis=(1, 2)) / n_photon[m]
        checks.append(_check("rho_frequency_only", np.max(dev), TOL_RHO))
    rho_or = tr.rho_qubit("frequency_polarization")[m]
    rho_cf = np.array([rho_fp(p, ti).elements for ti in t[m]])
    dev = np.max(np.abs(rho_or - rho_cf), axis=(1, 2)) / n_photon[m]
    checks.append(_check("rho_frequency_polarization", np.max(dev), TOL_RHO))

    meta = {
        "params": p.to_dict(),
        "grid": {"mode_count": grid.mode_count, "spacing": grid.spacing,
                 "half_width": grid.half_width, "recurrence_time": grid.recurrence_time},
        "horizon": horizon,
        "stored_times": int(t.size),
    }

    if tr.detector is not None:
        d = tr.detector
        tau = t - d.t_d
        md = _window(gamma * tau, EXCITED_WINDOW[0], np.inf)
        bil = tr.detector_bilinears()[md]
        cf = np.empty_like(bil)
        for a in CHANNELS:
            for b in CHANNELS:
                sign = a.filter_sign(d.filter) * b.filter_sign(d.filter)
                cf[:, a.index, b.index] = d.efficiency * sign * cross_spectral_integral(p, a, b, tau[md])
        scale = d.efficiency * one_minus_exp(gamma * tau[md])
        dev = np.max(np.abs(bil - cf), axis=(1, 2)) / scale if np.any(md) else np.array([np.nan])
        checks.append(_check("detector_correlations", np.max(dev), TOL_DETECTOR,
                             "sum_j D_a D_b* vs efficiency x cross-spectral integral"))

        fld = tr.detector_field()
        front = np.array([math.sqrt(ch.width(p) / (2 * math.pi)) for ch in CHANNELS])
        resolution = 1.0 / grid.half_width
        onset_dev = 0.0
        onsets = []
        for ch in CHANNELS:
            above = np.abs(fld[ch.index]) >= 0.5 * front[ch.index]
            onset = float(t[np.argmax(above)]) if np.any(above) else float("inf")
            onsets.append(onset)
            onset_dev = max(onset_dev, abs(onset - d.t_d))
        checks.append(_check("causal_onset", onset_dev, resolution,
                             f"half-amplitude front crossings {onsets} vs t_d={d.t_d}"))

        pre = t < d.t_d - resolution
        leak = np.sum(np.abs(tr.detector_amplitudes) ** 2, axis=(0, 1))
        leak_max = float(np.max(leak[pre]) / d.efficiency) if np.any(pre) else 0.0
        checks.append(_check("precursor_leakage", leak_max, TOL_PRECURSOR,
                             "detected weight before t_d - 1/W, per unit efficiency"))
        meta["detector"] = d.to_dict()

    return ValidationReport(checks, meta)
