"""
Hubbard 축약 모델 테스트
- Gram-Schmidt 터널링 rate
- Bose / Fermi / 세 모드 행렬 원소
- 시간 전개와 dark-state 추적
"""
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from sap_simulator.config import RateTableConfig
from sap_simulator.errors import DomainError, GeometryError
from sap_simulator.hubbard import (
    BoseHubbardModel, FermiHubbardModel, RateTable, ThreeModeModel, cotunneling_rate, dark_state_of,
    degenerate_clusters, evolve_hubbard, excited_band_rate, fock_vector, get_hubbard_model, load_rate_table,
    single_particle_rate,
)
from sap_simulator.hubbard.base import apply_operators
from sap_simulator.hubbard.rates import RATE_COLUMNS
from sap_simulator.models import TrajectoryParams
from sap_simulator.store import read_csv


def _synthetic_rates(g=0.5):
    """가우시안 꼴의 단순한 rate (격자 계산 없이)"""
    d = np.linspace(1.0, 10.0, 91)
    return RateTable(g=g, d=d,
                     omega0=-np.exp(-d ** 2 / 4.0),
                     omega1=-1.5 * np.exp(-d ** 2 / 5.0),
                     omega_co=-0.2 * np.exp(-d ** 2 / 2.0))


@pytest.fixture
def traj():
    return TrajectoryParams(T=1000.0)


# ============================================================
# rate
# ============================================================
def test_single_particle_rate_reference_value():
    assert single_particle_rate(3.0) == pytest.approx(-0.0883, abs=1e-3)


def test_rates_decay_with_separation():
    d = [3.0, 4.0, 5.0, 6.0]
    values = [abs(single_particle_rate(x)) for x in d]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert all(single_particle_rate(x) < 0 for x in d)
    # 들뜬 band 는 더 멀리 퍼져 있다
    assert abs(excited_band_rate(4.0)) > abs(single_particle_rate(4.0))


def test_cotunneling_reference_value():
    assert cotunneling_rate(3.0, 0.0) == pytest.approx(-0.0186, abs=1e-3)
    assert abs(cotunneling_rate(5.0, 0.0)) < abs(cotunneling_rate(3.0, 0.0))


def test_rate_domain():
    with pytest.raises(DomainError):
        single_particle_rate(-1.0)
    with pytest.raises(DomainError):
        cotunneling_rate(3.0, -0.5)
    with pytest.raises(GeometryError):
        single_particle_rate(0.01)


def test_rate_table_spline_and_range():
    table = _synthetic_rates()
    assert table.evaluate(3.0, "omega0") == pytest.approx(-np.exp(-9.0 / 4.0), rel=1e-12)
    assert table.evaluate(3.05, "omega0") == pytest.approx(-np.exp(-3.05 ** 2 / 4.0), rel=1e-4)
    with pytest.raises(DomainError):
        table.evaluate(11.0, "omega0")


def test_rate_table_cache(tmp_path):
    config = RateTableConfig(d_lo=3.0, d_hi=4.0, d_step=0.25)
    table = load_rate_table(0.5, d_lo=3.0, d_hi=4.0, config=config, cache_dir=str(tmp_path))
    files = list(tmp_path.glob("rates_*.csv"))
    assert len(files) == 1
    header, rows = read_csv(str(files[0]))
    assert header == RATE_COLUMNS
    assert len(rows) == 5
    cached = load_rate_table(0.5, d_lo=3.0, d_hi=4.0, config=config, cache_dir=str(tmp_path))
    assert np.array_equal(cached.omega_co, table.omega_co)


# ============================================================
# 연산자
# ============================================================
def test_bose_operators():
    amp, out = apply_operators((0, 0, 0), [(0, True), (0, True)], "bose")
    assert out == (2, 0, 0)
    assert amp == pytest.approx(np.sqrt(2.0))
    assert apply_operators((0, 1, 0), [(0, False)], "bose") == (0.0, None)


def test_fermion_signs():
    amp, out = apply_operators((1, 1, 0), [(2, True), (0, False)], "fermi")
    assert out == (0, 1, 1)
    assert amp == -1.0
    assert apply_operators((1, 1, 0), [(0, True), (1, False)], "fermi") == (0.0, None)


# ============================================================
# 모델 행렬
# ============================================================
def test_bose_matrix_elements(traj):
    model = BoseHubbardModel(1.25, traj, _synthetic_rates())
    t = 0.3 * traj.T
    H = model.matrix(t)
    r = model.rate_set(t)
    assert model.dimension == 6
    assert np.allclose(H, H.T)
    # (2,0,0) 대각 = U + 2 ε₀ = E_g
    assert H[0, 0] == pytest.approx(1.25)
    assert H[3, 3] == pytest.approx(1.0)
    # ⟨2,0,0|H|1,1,0⟩ = √2 Ω_LM
    assert H[0, 3] == pytest.approx(np.sqrt(2.0) * r.omega_LM)
    assert H[2, 4] == pytest.approx(np.sqrt(2.0) * r.omega_MR)
    # ⟨2,0,0|H|0,2,0⟩ = Ω⁽co⁾_LM
    assert H[0, 1] == pytest.approx(r.omega_co_LM)
    assert H[1, 2] == pytest.approx(r.omega_co_MR)
    assert H[0, 2] == 0.0


def test_cotunneling_switch(traj):
    model = BoseHubbardModel(1.25, traj, _synthetic_rates(), cotunneling=False)
    H = model.matrix(0.3 * traj.T)
    assert H[0, 1] == 0.0 and H[1, 2] == 0.0


def test_fermi_matrix_elements(traj):
    model = FermiHubbardModel(1.6, traj, _synthetic_rates())
    t = 0.3 * traj.T
    H = model.matrix(t)
    r = model.rate_set(t)
    labels = model.labels
    assert model.dimension == 9
    assert np.allclose(H, H.T)
    LL, MM = labels.index("L0L1"), labels.index("M0M1")
    LM = labels.index("L0M1")
    # ε₀ + ε₁ + U = E_g
    assert H[LL, LL] == pytest.approx(1.6)
    assert H[LM, LM] == pytest.approx(2.0)
    # a†_L0 a†_L1 a_M0 a_M1 |M0M1⟩ = -|L0L1⟩ (모드 순서 L0 M0 R0 L1 M1 R1)
    assert H[LL, MM] == pytest.approx(-r.omega_co_LM)
    assert abs(H[LL, LM]) == pytest.approx(abs(r.omega1_LM))


def test_three_mode_dark_state(traj):
    model = ThreeModeModel(1.0, traj, _synthetic_rates())
    assert model.mixing_angle(0.3 * traj.T) < 0.2
    assert model.mixing_angle(0.7 * traj.T) > 0.5 * np.pi - 0.2
    for t in (0.2 * traj.T, 0.5 * traj.T, 0.8 * traj.T):
        assert model.mixing_angle(t) + model.mixing_angle(traj.T - t) == pytest.approx(0.5 * np.pi, abs=1e-6)
        dark = model.dark_vector(t)
        assert np.allclose(model.matrix(t) @ dark, 0.0, atol=1e-12)


def test_factory(traj):
    rates = _synthetic_rates()
    assert isinstance(get_hubbard_model("bose", 1.25, traj, rates=rates), BoseHubbardModel)
    assert isinstance(get_hubbard_model("fermi", 1.6, traj, rates=rates), FermiHubbardModel)
    assert isinstance(get_hubbard_model("three-mode", 1.0, traj, rates=rates), ThreeModeModel)
    with pytest.raises(ValueError):
        get_hubbard_model("anyon", 1.25, traj, rates=rates)


# ============================================================
# 전개 / dark state
# ============================================================
def test_three_mode_adiabatic_transfer():
    model = ThreeModeModel(1.0, TrajectoryParams(T=4000.0), _synthetic_rates())
    result = evolve_hubbard(model, fock_vector(model, model.left_state), dt=0.5, n_records=11)
    assert result.populations.shape == (11, 3)
    assert np.allclose(result.populations.sum(axis=1), 1.0, atol=1e-10)
    assert result.populations[-1, model.right_state] > 0.95
    assert result.norm_drift < 1e-8


def test_evolve_rejects_bad_state(traj):
    model = ThreeModeModel(1.0, traj, _synthetic_rates())
    with pytest.raises(DomainError):
        evolve_hubbard(model, np.ones(4) / 2.0)
    with pytest.raises(DomainError):
        evolve_hubbard(model, np.ones(3))


def test_three_mode_dark_track_reaches_right(traj):
    model = ThreeModeModel(1.0, traj, _synthetic_rates())
    track = dark_state_of(model, n_slices=201)
    assert track.reaches_target
    assert track.final_target_population > 0.9
    assert len(track.coefficients) == 201
    assert len(track.coefficients[0]) == 3


def test_degenerate_clusters():
    groups = degenerate_clusters(np.array([0.0, 1e-9, 0.5, 1.0, 1.0 + 1e-8]), 1e-7)
    assert [g.tolist() for g in groups] == [[0, 1], [2], [3, 4]]


# ============================================================
# 실제 rate table (Gram-Schmidt, 기본 격자)
# ============================================================
BOSE_MIRROR = [2, 1, 0, 4, 3, 5]     # L↔R: (2,0,0)↔(0,0,2), (1,1,0)↔(0,1,1)


@pytest.fixture(scope="module")
def bose_125():
    return get_hubbard_model("bose", 1.25, TrajectoryParams(T=12000.0))


@pytest.fixture(scope="module")
def fermi_16():
    return get_hubbard_model("fermi", 1.6, TrajectoryParams(T=4000.0))


def test_excited_band_rate_dominates_over_range():
    for d in np.linspace(3.0, 9.0, 13):
        assert abs(excited_band_rate(d)) > abs(single_particle_rate(d))


def test_rates_vanish_at_initial_separation():
    assert abs(single_particle_rate(9.0)) < 1e-6
    assert abs(excited_band_rate(9.0)) < 1e-6


def test_bose_mirror_symmetry(bose_125):
    T = bose_125.traj.T
    P = np.eye(6)[BOSE_MIRROR]
    for t in (0.1 * T, 0.35 * T, 0.5 * T):
        assert np.allclose(P @ bose_125.matrix(t) @ P.T, bose_125.matrix(T - t), atol=1e-12)


def test_fermi_mirror_spectrum(fermi_16):
    T = fermi_16.traj.T
    for t in (0.2 * T, 0.4 * T):
        assert np.allclose(np.linalg.eigvalsh(fermi_16.matrix(t)),
                           np.linalg.eigvalsh(fermi_16.matrix(T - t)), atol=1e-10)


def _middle_occupation(state, kind):
    return state[1] if kind == "bose" else state[1] + state[4]


def _flipped(table):
    """단일 입자 rate 부호만 뒤집은 table"""
    return RateTable(g=table.g, d=table.d, omega0=-table.omega0, omega1=-table.omega1, omega_co=table.omega_co)


def test_spectrum_independent_of_hopping_sign(bose_125, fermi_16):
    # 가운데 우물 모드에 (-1)^{n_M} 를 곱하는 게이지 변환
    for model, kind in ((bose_125, "bose"), (fermi_16, "fermi")):
        flipped = get_hubbard_model(kind, model.E_g, model.traj, rates=_flipped(model.rates))
        gauge = np.diag([(-1.0) ** _middle_occupation(s, kind) for s in model.basis])
        t = 0.45 * model.traj.T
        assert np.allclose(gauge @ model.matrix(t) @ gauge, flipped.matrix(t), atol=1e-14)
        assert np.allclose(model.eigensystem(t)[0], flipped.eigensystem(t)[0], atol=1e-12)


def _bose_by_hand(r, E_g):
    """Fock 기저 (2,0,0), (0,2,0), (0,0,2), (1,1,0), (0,1,1), (1,0,1) 를 직접 채운 행렬"""
    s2 = np.sqrt(2.0)
    H = np.diag([E_g, E_g, E_g, 1.0, 1.0, 1.0])
    for (a, b), v in {(0, 3): s2 * r.omega_LM, (1, 3): s2 * r.omega_LM, (1, 4): s2 * r.omega_MR,
                      (2, 4): s2 * r.omega_MR, (3, 5): r.omega_MR, (4, 5): r.omega_LM,
                      (0, 1): r.omega_co_LM, (1, 2): r.omega_co_MR}.items():
        H[a, b] = H[b, a] = v
    return H


@pytest.mark.parametrize("fraction", [0.2, 0.45, 0.5, 0.7])
def test_bose_eigenvalues_match_dense_oracle(bose_125, fraction):
    t = fraction * bose_125.traj.T
    energies, vectors = bose_125.eigensystem(t)
    oracle = np.linalg.eigvalsh(_bose_by_hand(bose_125.rate_set(t), 1.25))
    assert np.allclose(energies, oracle, atol=1e-12)
    H = bose_125.matrix(t)
    assert np.allclose(H @ vectors, vectors * energies, atol=1e-12)


@pytest.mark.parametrize("fraction", [0.3, 0.5])
def test_fermi_eigenvalues_match_dense_oracle(fermi_16, fraction):
    t = fraction * fermi_16.traj.T
    energies, _ = fermi_16.eigensystem(t)
    H = fermi_16.matrix(t)
    assert np.allclose(energies, np.sort(np.linalg.eigvals(H).real), atol=1e-9)
    # 특성 다항식 det(H - E) = 0
    for e in energies:
        assert np.linalg.svd(H - e * np.eye(9), compute_uv=False)[-1] < 1e-10


# ============================================================
# co-tunneling 필요성
# ============================================================
@pytest.mark.parametrize("cotunneling", [True, False])
def test_cotunneling_decides_pair_transfer(bose_125, cotunneling):
    model = get_hubbard_model("bose", 1.25, bose_125.traj, cotunneling, rates=bose_125.rates)
    evolution = evolve_hubbard(model, fock_vector(model, model.left_state), dt=0.1, n_records=101)
    final = evolution.populations[-1, model.right_state]
    if cotunneling:
        assert final >= 0.99
    else:
        assert final <= 0.9
    assert evolution.norm_drift < 1e-8


@pytest.mark.parametrize("cotunneling", [True, False])
def test_bose_dark_track_needs_cotunneling(bose_125, cotunneling):
    model = get_hubbard_model("bose", 1.25, bose_125.traj, cotunneling, rates=bose_125.rates)
    track = dark_state_of(model)
    assert track.reaches_target is cotunneling
    # t=0 에서는 |2,0,0⟩
    assert track.coefficients[0][model.left_state] ** 2 > 0.99


def test_fermi_dark_track_without_cotunneling(fermi_16):
    model = get_hubbard_model("fermi", 1.6, fermi_16.traj, False, rates=fermi_16.rates)
    assert dark_state_of(model).reaches_target
