"""
Command-line front end: curve generation, eraser/blurrer runs, oracle validation.

Usage examples:
  lambda-entangle entropy --t-end-ns 60 --out fig_entropy.csv
  lambda-entangle detect --t-d-ns 7 --format json --out detect.json
  lambda-entangle erase --delta-t-ns 0.05 --phi-rad 0
  lambda-entangle blur --tau-ns 120 --dt-min-ns 0.1 --dt-max-ns 20
  lambda-entangle oracle --half-width-gammas 90 --modes-per-gamma 10 --out report.json
  lambda-entangle sweep --ratio-max 20 --ratio-count 201

Settings resolve as built-in defaults < command defaults < ``--config`` file < flags.
The config file holds one ``key = value`` per line (keys as the long flag
names, dashes or underscores), ``#`` starts a comment.

Exit codes: 0 ok, 1 bad configuration or parameters, 2 I/O failure,
3 oracle check failure (the report is still written).
"""
from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import __version__
from .core import ParameterError, Polarization, SystemParams, UnequalWidthsError
from .dataset import CurveDataset
from .entropy import entropy_fo, entropy_fo_asymptote, entropy_fp, entropy_fp_asymptote, post_detection_entropy
from .eraser import (ShutterRegimeError, ShutterSpec, blur_sweep, check_eraser_regime,
                     joint_probability, rho_erased, shutter_weight)
from .mode_oracle import build_grid, validate
from .photodetect import DetectorParams, conditional_probability, rho_detected
from .ww_dynamics import eta_asymptote

EXIT_OK, EXIT_PARAMS, EXIT_IO, EXIT_ORACLE = 0, 1, 2, 3
THREADS_ENV = "LAMBDA_ENTANGLE_THREADS"

# key -> (type, default); None means "not set"
SETTINGS = {
    "out": (str, None),
    "format": (str, "csv"),
    "precision": (int, 9),
    "gamma_inv_ns": (float, 12.0),
    "delta_omega_mhz": (float, 122.0),
    "delta_omega_rad_ns": (float, None),
    "omega_rad_ns": (float, 2 * math.pi * 471e3),
    "branching_plus": (float, 0.5),
    "t_d_ns": (float, 7.0),
    "delta_t_ns": (float, 0.05),
    "phi_rad": (float, 0.0),
    "filter": (str, "H"),
    "efficiency": (float, 1.0),
    "t_start_ns": (float, 0.0),
    "t_end_ns": (float, 60.0),
    "t_step_ns": (float, 0.06),
    "omit_dark": (bool, False),
    "bits": (bool, False),
    "tau_ns": (float, 120.0),
    "dt_min_ns": (float, 0.1),
    "dt_max_ns": (float, 20.0),
    "dt_count": (int, 50),
    "half_width_gammas": (float, 90.0),
    "modes_per_gamma": (float, 10.0),
    "horizon_ns": (float, 30.0),
    "ratio_min": (float, 0.0),
    "ratio_max": (float, 20.0),
    "ratio_count": (int, 201),
}

# scaled desk scenario: omega = 100 gamma, delta_omega / gamma = 9.2
COMMAND_DEFAULTS = {
    "erase": {"t_start_ns": 0.06},
    "oracle": {"gamma_inv_ns": 10.0, "delta_omega_rad_ns": 0.92, "omega_rad_ns": 10.0,
               "t_d_ns": 5.0, "efficiency": 0.1},
}

COMMANDS = ("entropy", "detect", "erase", "blur", "oracle", "sweep")


class ConfigError(ValueError):
    pass


def _coerce(key: str, raw):
    kind = SETTINGS[key][0]
    if raw is None or isinstance(raw, kind) and not (kind is int and isinstance(raw, bool)):
        return raw
    text = str(raw).strip()
    try:
        if kind is bool:
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        return kind(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {text!r} as {kind.__name__}") from None


def read_config(path: str) -> dict:
    """Parse a flat ``key = value`` file."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in SETTINGS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = _coerce(key, value)
    return out


def resolve(command: str, config: dict, flags: dict) -> dict:
    settings = {k: v[1] for k, v in SETTINGS.items()}
    settings.update(COMMAND_DEFAULTS.get(command, {}))
    settings.update(config)
    settings.update({k: _coerce(k, v) for k, v in flags.items() if v is not None})
    if settings["format"] not in ("csv", "json"):
        raise ConfigError(f"format: expected csv or json, got {settings['format']!r}")
    if not 6 <= settings["precision"] <= 17:
        raise ConfigError(f"precision: must lie in [6, 17], got {settings['precision']}")
    if not settings["t_step_ns"] > 0:
        raise ConfigError("t_step_ns: must be > 0")
    if not settings["t_end_ns"] > settings["t_start_ns"]:
        raise ConfigError("t_end_ns: must exceed t_start_ns")
    return settings


def build_params(s: dict) -> SystemParams:
    p = SystemParams.from_lab_units(s["gamma_inv_ns"], s["delta_omega_mhz"], s["omega_rad_ns"],
                                    s["branching_plus"])
    if s["delta_omega_rad_ns"] is not None:
        p = SystemParams(p.omega, s["delta_omega_rad_ns"], p.gamma_plus, p.gamma_minus)
    return p


def build_detector(s: dict) -> DetectorParams:
    return DetectorParams(s["efficiency"], s["t_d_ns"], Polarization.parse(s["filter"]))


def time_grid(s: dict) -> np.ndarray:
    n = int(math.floor((s["t_end_ns"] - s["t_start_ns"]) / s["t_step_ns"] + 1e-9)) + 1
    return s["t_start_ns"] + s["t_step_ns"] * np.arange(n)


def thread_cap() -> int:
    raw = os.environ.get(THREADS_ENV)
    cpus = os.cpu_count() or 1
    if raw is None:
        return cpus
    try:
        return max(1, min(int(raw), cpus))
    except ValueError:
        raise ConfigError(f"{THREADS_ENV}: expected an integer, got {raw!r}") from None


def _resolved(s: dict) -> dict:
    # the destination path is not part of the run, so it stays out of the bytes
    return {k: v for k, v in sorted(s.items()) if k != "out"}


def _meta(command: str, s: dict, p: SystemParams, **extra) -> dict:
    meta = {"command": command, "version": __version__, "config": _resolved(s),
            "params": p.to_dict()}
    meta.update(extra)
    return meta


def cmd_entropy(s: dict) -> CurveDataset:
    p = build_params(s)
    t = time_grid(s)
    s_fo = np.asarray(entropy_fo(p, t))
    s_fp = np.asarray(entropy_fp(p, t))
    unit, scale = ("bits", 1 / math.log(2)) if s["bits"] else ("nats", 1.0)
    cols = {"t_ns": t, f"S_fo_{unit}": scale * s_fo, f"S_fp_{unit}": scale * s_fp,
            f"gap_{unit}": scale * (s_fp - s_fo)}
    return CurveDataset(cols, _meta("entropy", s, p))


def cmd_detect(s: dict) -> CurveDataset:
    p = build_params(s)
    p.require_equal_widths("post-detection entropy")
    tau = time_grid(s)
    if s["omit_dark"]:
        tau = tau[tau > 0]
    live = tau > 0
    cols = {"tau_ns": tau}
    for pol in Polarization:
        d = DetectorParams(s["efficiency"], s["t_d_ns"], pol)
        cols[f"P_{pol.value}_per_eff"] = conditional_probability(p, d, tau + d.t_d, s["phi_rad"],
                                                                  normalized=True)
    ent = np.zeros_like(tau)
    if np.any(live):
        ent[live] = post_detection_entropy(p, tau[live])
    cols["S_post_nats"] = ent
    return CurveDataset(cols, _meta("detect", s, p))


def cmd_erase(s: dict) -> CurveDataset:
    p = build_params(s)
    tau = time_grid(s)
    tau = tau[tau > 0]
    d0 = build_detector(s)
    check_eraser_regime(p, ShutterSpec(d0.t_d + 1.0, s["delta_t_ns"]))
    cols = {"tau_ns": tau}
    weights = np.empty_like(tau)
    for pol in Polarization:
        d = DetectorParams(s["efficiency"], s["t_d_ns"], pol)
        vals = np.empty_like(tau)
        for i, ti in enumerate(tau):
            sh = ShutterSpec(d.t_d + ti, s["delta_t_ns"])
            vals[i] = joint_probability(p, d, sh, s["phi_rad"])
            weights[i] = shutter_weight(p, d, sh)
        cols[f"P_joint_{pol.value}"] = vals
    purity = np.empty_like(tau)
    for i, ti in enumerate(tau):
        rho = rho_erased(p, d0, ShutterSpec(d0.t_d + ti, s["delta_t_ns"]))
        purity[i] = rho.purity() if rho.trace > 0 else float("nan")
    cols["weight"] = weights
    cols["purity"] = purity
    return CurveDataset(cols, _meta("erase", s, p))


def cmd_blur(s: dict) -> CurveDataset:
    p = build_params(s)
    d = build_detector(s)
    if not s["tau_ns"] > 0:
        raise ConfigError("tau_ns: must be > 0")
    if not 0 < s["dt_min_ns"] < s["dt_max_ns"] or s["dt_count"] < 2:
        raise ConfigError("blur sweep needs 0 < dt_min_ns < dt_max_ns and dt_count >= 2")
    t_D = d.t_d + s["tau_ns"]
    dts = np.linspace(s["dt_min_ns"], s["dt_max_ns"], s["dt_count"])
    mags = blur_sweep(p, d, t_D, dts, max_workers=thread_cap())
    floor = rho_detected(p, d, t_D).normalized_coherence_magnitude()
    return CurveDataset({"delta_t_ns": dts, "coherence": mags, "which_path_floor": np.full_like(dts, floor)},
                        _meta("blur", s, p, t_D_ns=t_D))


def cmd_sweep(s: dict) -> CurveDataset:
    if not (0 <= s["ratio_min"] < s["ratio_max"]) or s["ratio_count"] < 2:
        raise ConfigError("sweep needs 0 <= ratio_min < ratio_max and ratio_count >= 2")
    base = build_params(s)
    ratios = np.linspace(s["ratio_min"], s["ratio_max"], s["ratio_count"])
    eta_inf = np.empty_like(ratios)
    s_fo = np.empty_like(ratios)
    s_fp = np.empty_like(ratios)
    for i, r in enumerate(ratios):
        p = SystemParams(base.omega, r * base.gamma, base.gamma_plus, base.gamma_minus)
        eta_inf[i] = eta_asymptote(p)
        s_fo[i] = entropy_fo_asymptote(p) if p.equal_widths else float("nan")
        s_fp[i] = entropy_fp_asymptote(p)
    return CurveDataset({"ratio": ratios, "eta_inf": eta_inf, "S_fo_inf_nats": s_fo, "S_fp_inf_nats": s_fp},
                        _meta("sweep", s, base))


def _emit(text: str, out) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def cmd_oracle(s: dict) -> int:
    p = build_params(s)
    d = build_detector(s)
    grid = build_grid(p, s["half_width_gammas"], s["modes_per_gamma"])
    report = validate(p, grid, s["horizon_ns"], d)
    report.meta["version"] = __version__
    report.meta["config"] = _resolved(s)
    _emit(report.to_json() + "\n", s["out"])
    for c in report.failures():
        print(f"FAIL {c.name}: {c.max_deviation:.4g} > {c.tolerance:.4g} {c.detail}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_ORACLE


HANDLERS = {"entropy": cmd_entropy, "detect": cmd_detect, "erase": cmd_erase,
            "blur": cmd_blur, "sweep": cmd_sweep}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lambda-entangle",
                                 description="Entanglement and photodetection curves for a Lambda emitter.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file")
    common.add_argument("--out", help="output path (stdout if omitted)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--precision", type=int, help="significant digits, 6..17 (default 9)")
    phys = common.add_argument_group("physics")
    phys.add_argument("--gamma-inv-ns", type=float, help="lifetime 1/gamma, ns (default 12)")
    phys.add_argument("--delta-omega-mhz", type=float, help="splitting / 2 pi, MHz (default 122)")
    phys.add_argument("--delta-omega-rad-ns", type=float, help="splitting in rad/ns, overrides MHz form")
    phys.add_argument("--omega-rad-ns", type=float, help="mean optical frequency, rad/ns")
    phys.add_argument("--branching-plus", type=float, help="gamma_plus / gamma (default 0.5)")
    phys.add_argument("--t-d-ns", type=float, help="emitter-detector delay, ns")
    phys.add_argument("--delta-t-ns", type=float, help="shutter window, ns")
    phys.add_argument("--phi-rad", type=float, help="readout phase, rad")
    phys.add_argument("--filter", choices=("H", "V"))
    phys.add_argument("--efficiency", type=float)
    grid = common.add_argument_group("time grid")
    grid.add_argument("--t-start-ns", type=float)
    grid.add_argument("--t-end-ns", type=float)
    grid.add_argument("--t-step-ns", type=float)

    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("entropy", parents=[common], help="S_fo, S_fp and their gap versus t")
    p.add_argument("--bits", action="store_const", const=True, help="report entropies in bits")
    p = sub.add_parser("detect", parents=[common], help="conditional probabilities versus tau")
    p.add_argument("--omit-dark", action="store_const", const=True, help="drop rows with tau <= 0")
    sub.add_parser("erase", parents=[common], help="shuttered joint probabilities versus tau")
    p = sub.add_parser("blur", parents=[common], help="coherence versus shutter width")
    p.add_argument("--tau-ns", type=float, help="retarded detection time (default 120)")
    p.add_argument("--dt-min-ns", type=float)
    p.add_argument("--dt-max-ns", type=float)
    p.add_argument("--dt-count", type=int)
    p = sub.add_parser("oracle", parents=[common], help="mode-lattice validation report (JSON)")
    p.add_argument("--half-width-gammas", type=float)
    p.add_argument("--modes-per-gamma", type=float)
    p.add_argument("--horizon-ns", type=float)
    p = sub.add_parser("sweep", parents=[common], help="late-time limits versus delta_omega / gamma")
    p.add_argument("--ratio-min", type=float)
    p.add_argument("--ratio-max", type=float)
    p.add_argument("--ratio-count", type=int)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    flags = {k: v for k, v in vars(args).items() if k in SETTINGS}
    try:
        config = read_config(args.config) if args.config else {}
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    try:
        s = resolve(args.command, config, flags)
        if args.command == "oracle":
            return cmd_oracle(s)
        data = HANDLERS[args.command](s)
        text = data.render(s["format"], s["precision"])
    except ShutterRegimeError as exc:
        print(f"error: {exc}; try the blur command", file=sys.stderr)
        return EXIT_PARAMS
    except (ConfigError, ParameterError, UnequalWidthsError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        _emit(text, s["out"])
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
