"""
스펙트럼 흐름 / 교차 / 전이 확률 테스트

대부분 두 준위 Landau-Zener 모형 H = ½[[v t, Δ], [Δ, -v t]] 으로 확인한다.
"""
import logging
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from sap_simulator import spectral_analysis
from sap_simulator.config import RateTableConfig, SpectralConfig
from sap_simulator.errors import ContractError, SingularityError, WindowTooNarrowError
from sap_simulator.exact_dynamics import EigenSlice
from sap_simulator.hubbard import BoseHubbardModel, RateTable, get_hubbard_model
from sap_simulator.models import TrajectoryParams
from sap_simulator.spectral_analysis import (
    SpectralFlow, analyze_transitions, build_flow, coupling_series, detect_crossings, find_dark_track,
    hubbard_slicer, landau_zener_probability, nonadiabatic_coupling, scan_transition_map, track_bands,
    transition_probability,
)


def lz_slicer(delta=1.0, sweep=1.0):
    def slicer(t):
        H = 0.5 * np.array([[sweep * t, delta], [delta, -sweep * t]])
        w, v = np.linalg.eigh(H)
        return EigenSlice(t=t, energies=w, states=v)
    return slicer


@pytest.fixture(scope="module")
def lz_flow():
    return build_flow(lz_slicer(), np.linspace(-60.0, 60.0, 1201))


def _p(flow, scale):
    return transition_probability(flow, 0, 1, (-60.0, 60.0), T=flow.T * scale).p


# ============================================================
# track
# ============================================================
def test_tracks_follow_sorted_levels(lz_flow):
    assert lz_flow.n_tracks == 2
    assert np.all(lz_flow.energies[:, 0] < lz_flow.energies[:, 1])
    assert np.min(lz_flow.gap(0, 1)) == pytest.approx(1.0, abs=1e-3)
    assert np.min(lz_flow.overlaps) > 0.99


def test_tracking_needs_states():
    slices = [EigenSlice(t=0.0, energies=np.zeros(2)), EigenSlice(t=1.0, energies=np.zeros(2))]
    with pytest.raises(ContractError):
        track_bands(slices)
    with pytest.raises(ContractError):
        track_bands([lz_slicer()(0.0)])


def test_reversed_slices_mirror_tracks():
    slicer = lz_slicer()
    slices = [slicer(float(t)) for t in np.linspace(-10.0, 10.0, 201)]
    forward = track_bands(slices)
    backward = track_bands(slices[::-1])
    assert np.allclose(np.sort(backward.energies[::-1], axis=1), np.sort(forward.energies, axis=1))


def test_frozen_hamiltonian_has_no_coupling():
    H = np.diag([0.0, 1.0, 3.0])

    def slicer(t):
        w, v = np.linalg.eigh(H)
        return EigenSlice(t=t, energies=w, states=v)

    flow = build_flow(slicer, np.linspace(0.0, 10.0, 21))
    assert np.allclose(coupling_series(flow, 0, 1), 0.0)
    assert nonadiabatic_coupling(flow, 0, 2, 5.0) == 0.0


# ============================================================
# 결합
# ============================================================
def test_coupling_peaks_at_avoided_crossing(lz_flow):
    c = coupling_series(lz_flow, 0, 1)
    assert abs(lz_flow.times[np.argmax(np.abs(c))]) < 0.15
    # |⟨1|∂_t|0⟩| = v Δ / (2 (v²t² + Δ²))
    assert abs(nonadiabatic_coupling(lz_flow, 0, 1, 0.0)) == pytest.approx(0.5, rel=1e-2)
    assert abs(nonadiabatic_coupling(lz_flow, 0, 1, 2.0)) == pytest.approx(0.5 / 5.0, rel=1e-2)


def test_coupling_antisymmetric(lz_flow):
    for t in (-3.0, 0.0, 1.7):
        c01 = nonadiabatic_coupling(lz_flow, 0, 1, t)
        c10 = nonadiabatic_coupling(lz_flow, 1, 0, t)
        assert c01 == pytest.approx(-np.conj(c10), abs=1e-9)


def test_coupling_with_rediagonalization(lz_flow):
    direct = nonadiabatic_coupling(lz_flow, 0, 1, 0.0, slicer=lz_slicer())
    assert abs(direct) == pytest.approx(0.5, rel=2e-3)


def test_exact_degeneracy_is_singular():
    flow = build_flow(lz_slicer(delta=0.0), np.linspace(-5.0, 5.0, 101))
    with pytest.raises(SingularityError):
        nonadiabatic_coupling(flow, 0, 1, 0.0)


# ============================================================
# 전이 확률
# ============================================================
def test_landau_zener_formula():
    assert landau_zener_probability(1.0, 1.0) == pytest.approx(np.exp(-np.pi / 2))
    assert landau_zener_probability(0.0, 1.0) == 1.0


def test_fast_sweep_is_diabatic(lz_flow):
    assert _p(lz_flow, 1e-8) > 0.99
    assert _p(lz_flow, 1e-4) > 0.9


def test_probability_decreases_with_duration(lz_flow):
    scales = [0.05, 0.2, 0.5, 1.0, 2.0]
    probs = [_p(lz_flow, s) for s in scales]
    assert all(0.0 <= p <= 1.0 for p in probs)
    assert all(a > b for a, b in zip(probs, probs[1:]))


def test_slow_sweep_decays_like_landau_zener(lz_flow):
    # 느린 극한에서 ln p 의 기울기 = -πΔ²/(2v) (T 배율 1 당)
    slope = np.log(_p(lz_flow, 4.0) / _p(lz_flow, 3.0))
    assert -2.0 < slope < -1.2


@pytest.mark.parametrize("scale,ratio", [(0.0194, 0.891), (0.2, 0.728), (1.0, 0.603), (1.498, 0.577)])
def test_deviation_from_landau_zener(lz_flow, scale, ratio):
    # 정규화된 추정치 / Landau-Zener: 빠른 쪽 0.89 에서 느린 쪽 0.58 로 줄어든다
    assert _p(lz_flow, scale) / landau_zener_probability(1.0, 1.0 / scale) == pytest.approx(ratio, abs=0.03)


def test_probability_is_gauge_invariant(lz_flow):
    slicer = lz_slicer()
    rng = np.random.default_rng(7)
    slices = []
    for t in np.linspace(-60.0, 60.0, 1201):
        s = slicer(float(t))
        phases = np.exp(1j * rng.uniform(0.0, 2 * np.pi, size=2))
        slices.append(EigenSlice(t=s.t, energies=s.energies, states=s.states * phases[None, :]))
    rotated = track_bands(slices)
    for scale in (0.2, 1.0):
        assert _p(rotated, scale) == pytest.approx(_p(lz_flow, scale), abs=1e-9)


def test_window_must_contain_decay(lz_flow):
    with pytest.raises(WindowTooNarrowError):
        transition_probability(lz_flow, 0, 1, (-5.0, 5.0))
    with pytest.raises(WindowTooNarrowError):
        transition_probability(lz_flow, 0, 1, (0.0, 0.2))


# ============================================================
# 교차 검출
# ============================================================
def test_detect_single_crossing():
    flow = build_flow(lz_slicer(delta=0.01, sweep=1e-3), np.linspace(-50.0, 50.0, 501))
    events = detect_crossings(flow, 0, threshold=0.02)
    assert len(events) == 1
    ev = events[0]
    assert ev.track_a == 0 and ev.track_b == 1
    assert abs(ev.t_c) < 0.2
    assert ev.gap == pytest.approx(0.01, abs=1e-4)
    assert ev.window[0] < ev.t_c < ev.window[1]
    assert detect_crossings(flow, 0, threshold=0.005) == []


def _gap_flow(times, gap):
    """dark track 0 은 E_g 에 고정, track 1 은 그 위로 gap 만큼 (에너지만 쓰는 검출용)"""
    n = len(times)
    energies = np.column_stack([np.full(n, 1.25), 1.25 + gap])
    return SpectralFlow(times=times, energies=energies, vectors=np.zeros((n, 2, 2)),
                        columns=np.tile([0, 1], (n, 1)), overlaps=np.ones((n, 2)),
                        bands=["pair", "pair"], T=float(times[-1]))


def test_degenerate_noisy_ends_are_not_crossings():
    times = np.linspace(0.0, 1000.0, 401)
    x = (times - 500.0) / 100.0
    envelope = np.sin(np.pi * times / 1000.0) ** 8
    gap = envelope * (0.003 + 0.05 * x ** 2 / (1.0 + x ** 2))
    # 양 끝: 축퇴 + 반올림 잡음
    gap = gap + np.random.default_rng(3).uniform(0.0, 1e-12, size=len(times))
    events = detect_crossings(_gap_flow(times, gap), 0)
    assert len(events) == 1
    assert events[0].t_c == pytest.approx(500.0, abs=2.5)
    assert events[0].gap == pytest.approx(0.003, abs=1e-4)


def test_shallow_ripple_is_not_a_crossing():
    times = np.linspace(0.0, 100.0, 201)
    gap = 0.01 + 1e-3 * np.sin(times)
    assert detect_crossings(_gap_flow(times, gap), 0) == []


# ============================================================
# Hubbard 흐름 / 전이 지도
# ============================================================
def _synthetic_rates():
    d = np.linspace(1.0, 10.0, 91)
    return RateTable(g=0.5, d=d, omega0=-np.exp(-d ** 2 / 4.0),
                     omega1=-1.5 * np.exp(-d ** 2 / 5.0), omega_co=-0.2 * np.exp(-d ** 2 / 2.0))


def test_hubbard_flow_dark_track():
    model = BoseHubbardModel(1.25, TrajectoryParams(T=1000.0), _synthetic_rates())
    eye = np.eye(model.dimension)
    flow = build_flow(hubbard_slicer(model), np.linspace(0.0, 1000.0, 101), E_g=1.25, reference=eye)
    dark = find_dark_track(flow, eye[:, model.left_state])
    assert flow.bands[dark] == "pair"
    assert sorted(flow.bands).count("pair") == 3
    assert sorted(flow.bands).count("single") == 3


def test_transition_map_cells():
    cells = scan_transition_map([1.25], [1000.0, 500.0], model="bose", n_slices=41)
    assert [c.T for c in cells] == [500.0, 1000.0]
    assert all(c.E_g == 1.25 for c in cells)
    # Hubbard pair band 의 dark track 에는 교차가 없다
    assert all(c.estimate is None and c.crossing_index == -1 and "no crossing" in c.error for c in cells)


def test_bose_pair_band_has_no_crossings():
    model = get_hubbard_model("bose", 1.25, TrajectoryParams(T=4000.0))
    eye = np.eye(model.dimension)
    flow = build_flow(hubbard_slicer(model), np.linspace(0.0, 4000.0, 401), E_g=1.25, reference=eye)
    dark = find_dark_track(flow, eye[:, model.left_state])
    pair = [j for j, band in enumerate(flow.bands) if band == "pair" and j != dark]
    # 양 끝의 pair band 는 반올림 수준까지 축퇴
    assert min(flow.gap(dark, j)[0] for j in pair) < 1e-7
    assert detect_crossings(flow, dark) == []


@pytest.fixture
def synthetic_factory(monkeypatch):
    """spectral_analysis 의 모델 생성을 synthetic rate 로 바꾸고 넘겨받은 rate_config 를 기록"""
    seen = []

    def create(kind, E_g, traj, cotunneling=True, rates=None, rate_config=None):
        seen.append(rate_config)
        return BoseHubbardModel(E_g, traj, _synthetic_rates(), cotunneling=cotunneling)

    monkeypatch.setattr(spectral_analysis, "get_hubbard_model", create)
    return seen


NO_CROSSINGS = SpectralConfig(crossing_gap_threshold=1e-9)


def test_rate_config_reaches_hubbard_model(synthetic_factory):
    config = RateTableConfig(d_step=0.5)
    analysis = analyze_transitions(1.25, [1000.0], model="bose", n_slices=21, spectral=NO_CROSSINGS,
                                   rate_config=config)
    assert synthetic_factory == [config]
    assert analysis.flow.n_tracks == 6
    assert analysis.events == []


def test_scan_warns_outside_validated_range(synthetic_factory, caplog):
    with caplog.at_level(logging.WARNING, logger="sap_simulator.spectral_analysis"):
        scan_transition_map([1.05], [500.0], model="bose", n_slices=21, spectral=NO_CROSSINGS)
    assert any("outside validated range" in r.getMessage() for r in caplog.records)
    caplog.clear()
    with caplog.at_level(logging.WARNING, logger="sap_simulator.spectral_analysis"):
        scan_transition_map([1.25], [500.0], model="bose", n_slices=21, spectral=NO_CROSSINGS)
    assert not any("outside validated range" in r.getMessage() for r in caplog.records)
