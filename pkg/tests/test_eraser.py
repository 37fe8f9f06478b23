import math

import numpy as np
import pytest

from lambda_entangle import (DetectorParams, QuadratureError, ShutterRegimeError, ShutterSpec,
                             SystemParams, blur_sweep, evolve_free, joint_probability,
                             numeric_shutter_coherence, purified_state, readout_state, rho_detected,
                             rho_erased, shutter_weight)
from lambda_entangle import eraser

GAMMA = 1 / 12
DW = 2 * math.pi * 0.122
P = SystemParams.symmetric(100.0, DW, GAMMA)
DH = DetectorParams(0.8, 7.0, "H")
DV = DetectorParams(0.8, 7.0, "V")


def _window_integral_state(p, d, t_D, delta_t):
    """Exact rectangular-window integral of the filtered channel fields."""
    s0, s1 = max(t_D - delta_t, d.t_d) - d.t_d, t_D - d.t_d

    def integral(z):
        return (np.exp(-z * s0) - np.exp(-z * s1)) / z

    r00 = d.efficiency * p.gamma_plus * integral(p.gamma)
    r11 = d.efficiency * p.gamma_minus * integral(p.gamma)
    z = p.gamma + 1j * p.delta_omega
    c = (d.efficiency * d.filter.sign_minus * math.sqrt(p.gamma_plus * p.gamma_minus)
         * np.exp(1j * p.delta_omega * t_D) * integral(z))
    return np.array([[r00, c], [np.conj(c), r11]])


def test_shutter_spec_validation():
    with pytest.raises(ValueError):
        ShutterSpec(10.0, 0.0)
    with pytest.raises(ValueError):
        ShutterSpec(float("nan"), 0.1)


def test_regime_rejection_points_to_blurrer():
    with pytest.raises(ShutterRegimeError, match="numeric_shutter_coherence"):
        rho_erased(P, DH, ShutterSpec(20.0, 0.3))


def test_rho_erased_causal():
    assert np.all(rho_erased(P, DH, ShutterSpec(7.0, 0.05)).elements == 0)
    assert np.all(rho_erased(P, DH, ShutterSpec(3.0, 0.05)).elements == 0)


def test_rho_erased_normalized_form():
    r = rho_erased(P, DH, ShutterSpec(19.0, 0.05)).normalized()
    ph = np.exp(1j * DW * DH.t_d)
    assert np.allclose(r.elements, 0.5 * np.array([[1, ph], [np.conj(ph), 1]]), atol=1e-15)
    assert r.purity() == pytest.approx(1.0, abs=1e-12)


def test_rho_erased_trace_example():
    # the quoted 0.3 ns window needs a small splitting to satisfy the shutter invariant;
    # the trace does not depend on the splitting
    p = SystemParams.symmetric(100.0, 0.1, GAMMA)
    d = DetectorParams(1.0, 2.0)
    r = rho_erased(p, d, ShutterSpec(7.0, 0.3))
    assert r.trace == pytest.approx(0.025 * math.exp(-5 / 12), rel=1e-14)
    assert r.trace == pytest.approx(0.016481, abs=5e-7)


def test_purity_theorem_random():
    rng = np.random.default_rng(7)
    for _ in range(300):
        dw = rng.uniform(0, 2)
        g = rng.uniform(0.01, 1)
        p = SystemParams.symmetric(100.0, dw, g)
        dt = rng.uniform(1e-4, 0.999) * 0.05 / max(g, dw, 1e-9)
        d = DetectorParams(rng.uniform(0.01, 1), rng.uniform(0, 20), rng.choice(["H", "V"]))
        r = rho_erased(p, d, ShutterSpec(d.t_d + rng.uniform(0.01, 50), dt))
        assert abs(r.purity() - 1) <= 1e-12


def test_purified_state_reconstructs_rho_erased():
    s = ShutterSpec(23.0, 0.04)
    for d in (DH, DV):
        st = purified_state(P, d, s)
        assert np.max(np.abs(st.density_matrix().elements - rho_erased(P, d, s).elements)) <= 1e-12
        rel = np.angle(st.amplitudes[0] / st.amplitudes[1])
        expected = DW * d.t_d + (0 if d.filter.value == "H" else math.pi)
        assert np.exp(1j * rel) == pytest.approx(np.exp(1j * expected), abs=1e-12)
        assert np.angle(st.amplitudes[0]) == pytest.approx(np.angle(np.exp(1j * P.omega_plus * d.t_d)))


def test_purified_state_examples():
    d0 = DetectorParams(1.0, 0.0)
    st = purified_state(P, d0, ShutterSpec(5.0, 0.05))
    assert np.allclose(st.unit_vector(), np.array([1, 1]) / math.sqrt(2))
    assert st.weight == pytest.approx(shutter_weight(P, d0, ShutterSpec(5.0, 0.05)))
    dv = DetectorParams(1.0, 0.0, "V")
    assert np.allclose(purified_state(P, dv, ShutterSpec(5.0, 0.05)).unit_vector(),
                       np.array([1, -1]) / math.sqrt(2))
    dpi = DetectorParams(1.0, math.pi / DW)
    v = purified_state(P, dpi, ShutterSpec(dpi.t_d + 5.0, 0.05)).unit_vector()
    v = v / (v[0] / abs(v[0]))
    assert np.allclose(v, np.array([1, -1]) / math.sqrt(2), atol=1e-12)


def test_evolve_free():
    st = purified_state(P, DH, ShutterSpec(20.0, 0.05))
    assert np.array_equal(evolve_free(st, P, 0.0).amplitudes, st.amplitudes)
    a = evolve_free(evolve_free(st, P, 3.0), P, 4.5)
    b = evolve_free(st, P, 7.5)
    assert np.allclose(a.amplitudes, b.amplitudes, atol=1e-12)
    rel0 = st.amplitudes[0] / st.amplitudes[1]
    rel1 = b.amplitudes[0] / b.amplitudes[1]
    assert rel1 / rel0 == pytest.approx(np.exp(1j * DW * 7.5), abs=1e-12)
    assert b.weight == st.weight and b.purity() == pytest.approx(1.0, abs=1e-12)


def test_joint_probability_examples():
    s = ShutterSpec(DH.t_d + 1e-9, 0.05)
    n = shutter_weight(P, DH, s)
    assert joint_probability(P, DH, s, 0.0) == pytest.approx(n, rel=1e-12)
    s = ShutterSpec(DH.t_d + math.pi / DW, 0.05)
    assert math.pi / DW == pytest.approx(4.098, abs=1e-3)
    assert joint_probability(P, DH, s, 0.0) == pytest.approx(0.0, abs=1e-15)


def test_joint_probability_closed_form_and_branches():
    for tau in np.linspace(0.1, 40, 37):
        for phi in (0.0, 0.4, 2.0):
            s = ShutterSpec(DH.t_d + tau, 0.03)
            n = shutter_weight(P, DH, s)
            h = joint_probability(P, DH, s, phi)
            v = joint_probability(P, DV, s, phi)
            assert h == pytest.approx(0.5 * n * (1 + math.cos(DW * tau - phi)), abs=1e-15)
            assert abs(h + v - n) <= 1e-12


def test_joint_probability_projection_matches_trace_form():
    # N |<M|psi_hat>|^2 equals Tr(rho M M^dag) / 2 for the unnormalized printed state
    s = ShutterSpec(DH.t_d + 6.3, 0.02)
    for t_free in (0.0, 3.0, 17.0):
        st = evolve_free(purified_state(P, DH, s), P, t_free)
        m = readout_state(P, s.t_D + t_free, 0.9)
        trace_form = np.real(np.vdot(m, st.density_matrix().elements @ m))
        assert joint_probability(P, DH, s, 0.9, t_free) == pytest.approx(trace_form / 2, rel=1e-12)


def test_joint_probability_free_evolution_invariance():
    s = ShutterSpec(DH.t_d + 9.1, 0.04)
    ref = joint_probability(P, DH, s, 1.3)
    for t in (0.0, 3.0, 17.0):
        assert abs(joint_probability(P, DH, s, 1.3, t) - ref) <= 1e-12


def test_joint_probability_full_visibility():
    taus = np.linspace(0.01, 2 * math.pi / DW, 4001)
    vals = np.array([joint_probability(P, DH, ShutterSpec(DH.t_d + t, 0.03), 0.0)
                     / shutter_weight(P, DH, ShutterSpec(DH.t_d + t, 0.03)) for t in taus])
    vis = (vals.max() - vals.min()) / (vals.max() + vals.min())
    assert vis == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("t_D,dt", [(20.0, 0.06), (30.0, 5.0), (80.0, 73.0), (9.0, 40.0)])
def test_numeric_shutter_matches_exact_window_integral(t_D, dt):
    for d in (DH, DV):
        num = numeric_shutter_coherence(P, d, t_D, dt).elements
        ref = _window_integral_state(P, d, t_D, dt)
        assert np.max(np.abs(num - ref)) <= 1e-8 * np.max(np.abs(ref))


def test_numeric_shutter_unequal_widths():
    p = SystemParams(100.0, DW, 0.06, 0.02)
    num = numeric_shutter_coherence(p, DH, 30.0, 12.0).elements
    assert np.max(np.abs(num - _window_integral_state(p, DH, 30.0, 12.0))) <= 1e-9


def test_numeric_shutter_small_window_is_pure():
    p = SystemParams.symmetric(100.0, GAMMA, GAMMA)
    dt = 0.005 / GAMMA
    r = numeric_shutter_coherence(p, DH, 27.0, dt)
    e = rho_erased(p, DH, ShutterSpec(27.0, dt))
    assert r.normalized_coherence_magnitude() == pytest.approx(1.0, abs=2e-6)
    assert r.purity() == pytest.approx(e.purity(), abs=2e-6)


def test_numeric_shutter_degenerate_levels():
    p0 = SystemParams.symmetric(100.0, 0.0, GAMMA)
    for dt in (0.1, 3.0, 50.0):
        assert numeric_shutter_coherence(p0, DH, 60.0, dt).normalized_coherence_magnitude() == pytest.approx(
            1.0, abs=1e-10)


def test_numeric_shutter_full_span_reaches_which_path_floor():
    tau = 10 / GAMMA
    t_D = DH.t_d + tau
    r = numeric_shutter_coherence(P, DH, t_D, tau)
    floor = rho_detected(P, DH, t_D)
    assert np.max(np.abs(r.elements - floor.elements)) <= 1e-8
    assert r.normalized_coherence_magnitude() == pytest.approx(0.1081, abs=2e-4)


def test_numeric_shutter_before_arrival_is_zero():
    assert np.all(numeric_shutter_coherence(P, DH, 6.0, 3.0).elements == 0)


def test_quadrature_failure_carries_estimate(monkeypatch):
    monkeypatch.setattr(eraser, "QUAD_LIMIT", 1)
    fast = SystemParams.symmetric(1000.0, 40.0, GAMMA)
    with pytest.raises(QuadratureError) as exc:
        numeric_shutter_coherence(fast, DH, 200.0, 190.0)
    assert exc.value.error_bound > 0
    assert math.isfinite(exc.value.estimate)


BLUR_GRID = np.linspace(0.1, 20, 20)


def test_blurrer_monotone_within_a_beat_period():
    p = SystemParams.symmetric(100.0, 2 * GAMMA, GAMMA)
    mags = blur_sweep(p, DH, DH.t_d + 120, BLUR_GRID)
    assert np.all(np.diff(mags) <= 0)


@pytest.mark.xfail(strict=True, reason="a rectangular window spanning several beat periods "
                                       "revives coherence between multiples of 2 pi / delta_omega")
def test_blurrer_monotone_at_large_splitting():
    p = SystemParams.symmetric(100.0, 9.2 * GAMMA, GAMMA)
    mags = blur_sweep(p, DH, DH.t_d + 120, BLUR_GRID)
    assert np.all(np.diff(mags) <= 0)


@pytest.mark.parametrize("ratio", [2.0, 9.2])
def test_blurrer_bounds(ratio):
    p = SystemParams.symmetric(100.0, ratio * GAMMA, GAMMA)
    t_D = DH.t_d + 10 / GAMMA
    floor = rho_detected(p, DH, t_D).normalized_coherence_magnitude()
    mags = blur_sweep(p, DH, t_D, np.r_[1e-3, BLUR_GRID, 10 / GAMMA])
    assert mags[0] == pytest.approx(1.0, abs=1e-5)
    assert np.all(mags <= 1 + 1e-12)
    assert np.all(mags >= floor * (1 - 1e-2))
    assert mags[-1] == pytest.approx(floor, rel=1e-2)


def test_blur_sweep_threads_preserve_order():
    dts = [12.0, 0.2, 5.0, 1.0, 19.0]
    assert np.array_equal(blur_sweep(P, DH, 60.0, dts, max_workers=4), blur_sweep(P, DH, 60.0, dts))
