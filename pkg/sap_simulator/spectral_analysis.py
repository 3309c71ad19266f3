"""
스펙트럼 흐름 분석

1. track_bands: 시각별 고유쌍을 겹침 최대 배정 (linear_sum_assignment) + 위상 정렬로 track 으로 잇기
2. detect_crossings: dark track 과 다른 track 사이 gap 의 국소 최소
3. nonadiabatic_coupling / transition_probability: 정규화된 교차 전이 확률

    p = |∫ ⟨j|∂_t|i⟩ e^{i∫(E_j - E_i)} dt|² / |∫ ⟨j|∂_t|i⟩ dt|²

흐름은 한 번 프로토콜 시간 (길이 T₀) 으로 계산하고, 다른 T 는 s = t/T 로 재스케일한다:
결합 적분은 T 에 무관하고 위상만 T/T₀ 배가 된다.
"""
import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid, simpson
from scipy.interpolate import CubicSpline
from scipy.optimize import linear_sum_assignment

from .config import (
    DEFAULT_NUMERICS, DEFAULT_RATES, DEFAULT_SPECTRAL, NumericsConfig, RateTableConfig, SpectralConfig,
)
from .errors import ContractError, NumericalError, SingularityError, WindowTooNarrowError
from .exact_dynamics import EigenSlice, lowest_eigenpairs
from .hubbard import BaseHubbardModel, degenerate_clusters, get_hubbard_model
from .busch_model import pair_ground_state, resolve_interaction
from .lattice import to_symmetric
from .models import (
    CrossingEvent, ExactControls, Grid2D, TrajectoryParams, TransitionEstimate, TransitionMapCell,
)
from .trap_geometry import positions_at

logger = logging.getLogger(__name__)

Slicer = Callable[[float], EigenSlice]

BAND_ANCHORS = {"single": 1.0, "excited": 2.0}

# 두 교차만 관련 있는 E_g 구간
VALIDATED_E_G = (1.1, 1.8)


# ============================================================
# 흐름 타입
# ============================================================
@dataclass
class SpectralFlow:
    """
    track 별 에너지/고유벡터 시계열

    vectors[s, :, j] 는 시각 s 에서 track j 의 위상 정렬된 고유벡터,
    columns[s, j] 는 그 slice 의 (오름차순) 고유값 인덱스.
    """
    times: np.ndarray
    energies: np.ndarray                 # (n_t, k)
    vectors: np.ndarray                  # (n_t, dim, k)
    columns: np.ndarray                  # (n_t, k)
    overlaps: np.ndarray                 # (n_t, k) 직전 slice 와의 |겹침| (첫 행 1)
    bands: List[str]
    T: float
    ambiguities: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def n_tracks(self) -> int:
        return self.energies.shape[1]

    def gap(self, i: int, j: int) -> np.ndarray:
        return np.abs(self.energies[:, i] - self.energies[:, j])

    def nearest_index(self, t: float) -> int:
        return int(np.argmin(np.abs(self.times - t)))

    def energy_rows(self) -> List[List[float]]:
        return [[float(t)] + [float(e) for e in row] for t, row in zip(self.times, self.energies)]


# ============================================================
# track 잇기
# ============================================================
def _polar_align(block: np.ndarray, refs: np.ndarray) -> np.ndarray:
    """축퇴 묶음 기저를 refs 방향에 가장 가깝게 회전 (열 순서 = refs 순서, 모자라면 나머지 뒤에)"""
    M = block.conj().T @ refs                       # (m, r)
    U, _, Wh = np.linalg.svd(M, full_matrices=True)
    m, r = M.shape
    if r == m:
        return block @ (U @ Wh)
    # r < m: 앞 r 열만 정렬, 나머지는 직교 보완
    R = U.astype(np.result_type(U, Wh), copy=True)
    R[:, :r] = U[:, :r] @ Wh
    return block @ R


def _rotate_clusters(V: np.ndarray, energies: np.ndarray, prev: np.ndarray, tol: float) -> np.ndarray:
    Q = V.astype(np.result_type(V, prev), copy=True)
    for group in degenerate_clusters(energies, tol):
        if len(group) < 2:
            continue
        block = V[:, group]
        weights = np.linalg.norm(block.conj().T @ prev, axis=0)
        chosen = np.argsort(weights)[::-1][:len(group)]
        chosen = chosen[weights[chosen] > 1e-12]
        if len(chosen) == 0:
            continue
        Q[:, group] = _polar_align(block, prev[:, chosen])
    return Q


def _gauge(vec: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """⟨ref|vec⟩ 를 실수 양수로"""
    ov = np.vdot(ref, vec)
    if abs(ov) < 1e-300:
        return vec
    return vec * (np.conj(ov) / abs(ov))


def _assign(prev: np.ndarray, V: np.ndarray, energies: np.ndarray,
            spectral: SpectralConfig) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    prev (dim×k) 의 track 을 새 slice 의 열로 배정

    Returns:
        (track 순서 벡터, track 에너지, 열 인덱스, |겹침|)
    """
    Q = _rotate_clusters(V, energies, prev, spectral.degeneracy_tol)
    O = np.abs(prev.conj().T @ Q)
    rows, cols = linear_sum_assignment(-O)
    k = prev.shape[1]
    columns = np.empty(k, dtype=int)
    columns[rows] = cols
    vectors = np.empty((Q.shape[0], k), dtype=Q.dtype)
    for j in range(k):
        vectors[:, j] = _gauge(Q[:, columns[j]], prev[:, j])
    return vectors, energies[columns], columns, O[np.arange(k), columns]


def _label_bands(energies: np.ndarray, E_g: Optional[float]) -> List[str]:
    anchors = dict(BAND_ANCHORS)
    if E_g is not None:
        anchors["pair"] = E_g
    names = list(anchors)
    values = np.array([anchors[n] for n in names])
    return [names[int(np.argmin(np.abs(values - e)))] for e in energies]


def track_bands(slices: Sequence[EigenSlice], E_g: Optional[float] = None,
                reference: Optional[np.ndarray] = None,
                spectral: SpectralConfig = DEFAULT_SPECTRAL) -> SpectralFlow:
    """
    EigenSlice 열 → SpectralFlow

    Args:
        slices: 시간순 slice (고유벡터 보존 필수, 2 개 이상)
        E_g: band 이름 (single ≈ 1, pair ≈ E_g, excited ≈ 2) 판정용
        reference: (dim, k) 이면 직전 slice 처럼 써서 track 번호를 이어받고,
            열이 k 보다 적으면 첫 slice 의 축퇴 묶음만 그 방향으로 회전한다.
        spectral: 허용치

    Returns:
        SpectralFlow
    """
    if len(slices) < 2:
        raise ContractError("track_bands needs at least two slices", details={"slices": len(slices)})
    if any(s.states is None for s in slices):
        raise ContractError("eigenvectors must be retained for tracking",
                            details={"missing": [s.t for s in slices if s.states is None][:5]})
    k = min(len(s.energies) for s in slices)
    first = slices[0]
    V0, E0 = first.states[:, :k], np.asarray(first.energies[:k])

    if reference is not None and reference.shape[1] == k:
        vec, en, cols, ov = _assign(reference, V0, E0, spectral)
    else:
        vec = V0.copy() if reference is None else _rotate_clusters(V0, E0, reference, spectral.degeneracy_tol)
        if reference is not None:
            for j in range(k):
                best = int(np.argmax(np.abs(reference.conj().T @ vec[:, j])))
                vec[:, j] = _gauge(vec[:, j], reference[:, best])
        en, cols, ov = E0.copy(), np.arange(k), np.ones(k)

    times = [first.t]
    energies, vectors, columns, overlaps = [en], [vec], [cols], [ov]
    ambiguities: List[Dict[str, Any]] = []
    for s in slices[1:]:
        vec, en, cols, ov = _assign(vectors[-1], s.states[:, :k], np.asarray(s.energies[:k]), spectral)
        for j in np.where(ov < spectral.overlap_warn)[0]:
            ambiguities.append({"t": float(s.t), "track": int(j), "overlap": float(ov[j])})
            logger.warning(f"[Spectrum] weak continuation t={s.t:.3f} track={j} overlap={ov[j]:.3f}")
        times.append(s.t)
        energies.append(en)
        vectors.append(vec)
        columns.append(cols)
        overlaps.append(ov)

    t_arr = np.array(times)
    return SpectralFlow(
        times=t_arr,
        energies=np.array(energies),
        vectors=np.array(vectors),
        columns=np.array(columns),
        overlaps=np.array(overlaps),
        bands=_label_bands(energies[0], E_g),
        T=float(t_arr[-1]),
        ambiguities=ambiguities,
    )


def build_flow(slicer: Slicer, times: Sequence[float], E_g: Optional[float] = None,
               reference: Optional[np.ndarray] = None, T: Optional[float] = None,
               spectral: SpectralConfig = DEFAULT_SPECTRAL) -> SpectralFlow:
    """slicer 로 시각마다 고유쌍을 계산해 track_bands"""
    slices = [slicer(float(t)) for t in times]
    flow = track_bands(slices, E_g=E_g, reference=reference, spectral=spectral)
    if T is not None:
        flow.T = T
    return flow


def find_dark_track(flow: SpectralFlow, reference: np.ndarray) -> int:
    """첫 slice 에서 reference (보통 |L⟩) 와 가장 많이 겹치는 track"""
    return int(np.argmax(np.abs(flow.vectors[0].conj().T @ reference)))


# ============================================================
# 교차
# ============================================================
def _window_around(gap: np.ndarray, i: int, lo: int, hi: int, factor: float) -> Tuple[int, int]:
    target = factor * gap[i]
    a = i
    while a > lo and gap[a] < target:
        a -= 1
    b = i
    while b < hi and gap[b] < target:
        b += 1
    return a, b


def _side_peak(values: np.ndarray, level: float) -> float:
    """level 보다 낮은 값을 만나기 전까지의 최대값"""
    peak = level
    for v in values:
        if v < level:
            break
        peak = max(peak, float(v))
    return peak


def _crossing_minima(gap: np.ndarray, threshold: float, spectral: SpectralConfig) -> List[int]:
    """
    threshold 미만의 국소 최소 중 실제 회피 교차만

    - gap ≤ degeneracy_tol: 수치적으로 축퇴된 구간 (d_max 근처 pair band) 의 반올림 잡음
    - 양쪽 이웃 최대가 crossing_prominence × gap 미만: 잡음 요철
    """
    n = len(gap)
    found = []
    for i in range(1, n - 1):
        if not (gap[i] <= gap[i - 1] and gap[i] < gap[i + 1] and gap[i] < threshold):
            continue
        if gap[i] <= spectral.degeneracy_tol:
            continue
        need = spectral.crossing_prominence * gap[i]
        if _side_peak(gap[i - 1::-1], gap[i]) < need or _side_peak(gap[i + 1:], gap[i]) < need:
            continue
        found.append(i)
    return found


def detect_crossings(flow: SpectralFlow, dark: int, threshold: Optional[float] = None,
                     spectral: SpectralConfig = DEFAULT_SPECTRAL) -> List[CrossingEvent]:
    """
    dark track 과 다른 track 사이 gap 의 국소 최소 (threshold 미만) → 시간순 CrossingEvent

    축퇴 허용치 이하의 최소와 두드러지지 않은 최소는 버린다.
    분석 구간은 gap 이 최소의 1.3/√endpoint_decay 배가 될 때까지 (Landau-Zener 형
    결합 ∝ Δ²/gap² 이 endpoint_decay 아래로 떨어지는 폭) 또는 이웃 최소까지.
    """
    threshold = spectral.crossing_gap_threshold if threshold is None else threshold
    factor = 1.3 / np.sqrt(spectral.endpoint_decay)
    t = flow.times
    n = len(t)
    events: List[CrossingEvent] = []
    for j in range(flow.n_tracks):
        if j == dark:
            continue
        gap = flow.gap(dark, j)
        minima = _crossing_minima(gap, threshold, spectral)
        for m_idx, i in enumerate(minima):
            lo = (minima[m_idx - 1] + i) // 2 if m_idx > 0 else 0
            hi = (minima[m_idx + 1] + i) // 2 if m_idx + 1 < len(minima) else n - 1
            # 세 점 포물선으로 최소 위치/값 보정
            y0, y1, y2 = gap[i - 1], gap[i], gap[i + 1]
            denom = y0 - 2 * y1 + y2
            shift = 0.5 * (y0 - y2) / denom if denom > 0 else 0.0
            shift = float(np.clip(shift, -0.5, 0.5))
            step = 0.5 * (t[i + 1] - t[i - 1])
            t_c = float(t[i] + shift * step)
            g_c = float(max(0.0, y1 - 0.25 * (y0 - y2) * shift))
            a, b = _window_around(gap, i, lo, hi, factor)
            events.append(CrossingEvent(t_c=t_c, gap=min(g_c, float(y1)), track_a=dark, track_b=j,
                                        window=(float(t[a]), float(t[b]))))
    events.sort(key=lambda e: e.t_c)
    logger.info(f"[Spectrum] {len(events)} crossing(s) on track {dark}")
    return events


# ============================================================
# 비단열 결합
# ============================================================
def coupling_series(flow: SpectralFlow, i: int, j: int) -> np.ndarray:
    """slice 시각마다 ⟨j|∂_t|i⟩ (정렬된 벡터의 2 차 중앙 차분)"""
    dv = np.gradient(flow.vectors[:, :, i], flow.times, axis=0)
    return np.einsum("sd,sd->s", flow.vectors[:, :, j].conj(), dv)


def nonadiabatic_coupling(flow: SpectralFlow, i: int, j: int, t: float,
                          slicer: Optional[Slicer] = None,
                          spectral: SpectralConfig = DEFAULT_SPECTRAL) -> complex:
    """
    시각 t 의 ⟨j|∂_t|i⟩

    slicer 가 있으면 t ± δ 에서 다시 대각화한다 (δ 는 국소 gap 변화에 맞춤). 없으면 흐름 위
    coupling_series 를 선형 보간.
    """
    gap_t = float(np.interp(t, flow.times, flow.gap(i, j)))
    if gap_t < spectral.singular_gap:
        raise SingularityError("tracks are exactly degenerate", details={"t": t, "i": i, "j": j, "gap": gap_t})
    if slicer is None:
        series = coupling_series(flow, i, j)
        return complex(np.interp(t, flow.times, series.real) + 1j * np.interp(t, flow.times, series.imag))

    s = flow.nearest_index(t)
    spacing = float(np.min(np.diff(flow.times)))
    slope = abs(float(np.interp(t, flow.times, np.gradient(flow.gap(i, j), flow.times))))
    delta = 0.05 * gap_t / slope if slope > 0 else spacing
    delta = float(np.clip(delta, 1e-6 * flow.T, 0.5 * spacing))
    # 흐름 끝에서는 한쪽 차분
    lo = max(float(flow.times[0]), t - delta)
    hi = min(float(flow.times[-1]), t + delta)
    prev = flow.vectors[s]
    k = prev.shape[1]
    aligned = []
    for tau in (lo, t, hi):
        sl = slicer(tau)
        vec, _, _, _ = _assign(prev, sl.states[:, :k], np.asarray(sl.energies[:k]), spectral)
        aligned.append(vec)
    d_i = (aligned[2][:, i] - aligned[0][:, i]) / (hi - lo)
    return complex(np.vdot(aligned[1][:, j], d_i))


# ============================================================
# 전이 확률
# ============================================================
def landau_zener_probability(delta: float, sweep_rate: float) -> float:
    """H = ½[[v t, Δ], [Δ, -v t]] 의 diabatic 전이 확률 exp(-πΔ²/(2v))"""
    return float(np.exp(-np.pi * delta * delta / (2.0 * abs(sweep_rate))))


def _integrals(t_mesh: np.ndarray, c: np.ndarray, dE: np.ndarray, scale: float) -> Tuple[float, float]:
    phase = cumulative_trapezoid(dE, t_mesh, initial=0.0) * scale
    num = abs(simpson(c * np.exp(1j * phase), x=t_mesh)) ** 2
    den = abs(simpson(c, x=t_mesh)) ** 2
    return float(num), float(den)


def transition_probability(flow: SpectralFlow, i: int, j: int, window: Tuple[float, float],
                           T: Optional[float] = None,
                           spectral: SpectralConfig = DEFAULT_SPECTRAL) -> TransitionEstimate:
    """
    track i → j 전이 확률 (window 안에서)

    Args:
        flow: 흐름 (프로토콜 시간 길이 flow.T)
        i, j: track
        window: [t_a, t_b] (flow 시간)
        T: 평가할 전체 시간 (기본 flow.T)

    Returns:
        TransitionEstimate (p, 분자, 분모)
    """
    T = flow.T if T is None else T
    t_a, t_b = window
    mask = (flow.times >= t_a - 1e-12) & (flow.times <= t_b + 1e-12)
    if mask.sum() < 4:
        raise WindowTooNarrowError("window holds fewer than four slices",
                                   details={"window": list(window), "slices": int(mask.sum())})
    ts = flow.times[mask]
    c = coupling_series(flow, i, j)[mask]
    dE = (flow.energies[:, j] - flow.energies[:, i])[mask]
    peak = float(np.max(np.abs(c)))
    if peak == 0.0:
        raise SingularityError("coupling vanishes over the window", details={"window": list(window)})
    ends = (abs(c[0]) / peak, abs(c[-1]) / peak)
    if max(ends) >= spectral.endpoint_decay:
        raise WindowTooNarrowError(
            "coupling has not decayed at the window edges",
            details={"window": list(window), "edge_ratio": [float(e) for e in ends],
                     "required": spectral.endpoint_decay},
        )

    c_re, c_im, e_sp = CubicSpline(ts, c.real), CubicSpline(ts, c.imag), CubicSpline(ts, dE)
    scale = T / flow.T
    n = spectral.fine_mesh
    prev = None
    for _ in range(8):
        mesh = np.linspace(ts[0], ts[-1], n)
        num, den = _integrals(mesh, c_re(mesh) + 1j * c_im(mesh), e_sp(mesh), scale)
        if prev is not None and abs(num - prev[0]) <= spectral.quadrature_tol * max(den, 1e-300) \
                and abs(den - prev[1]) <= spectral.quadrature_tol * max(den, 1e-300):
            break
        prev = (num, den)
        n = 2 * n - 1
    if den <= 0.0:
        raise SingularityError("normalization integral vanishes", details={"window": list(window)})
    p = num / den
    clamped = False
    if p > 1.0:
        logger.warning(f"[Transition] p={p:.6f} > 1 clamped (window={window}, T={T:g})")
        p, clamped = 1.0, True
    return TransitionEstimate(p=float(p), numerator=num, denominator=den,
                              window=(float(t_a), float(t_b)), T=float(T), clamped=clamped)


def refine_crossing(slicer: Slicer, flow: SpectralFlow, event: CrossingEvent, T_values: Sequence[float],
                    spectral: SpectralConfig = DEFAULT_SPECTRAL) -> List[TransitionEstimate]:
    """
    교차 구간만 촘촘한 slice 로 다시 계산하고 T 마다 p 를 구한다

    slice 수를 2 배씩 늘려 p 변화가 refine_tol 미만이면 멈춤. 결합이 구간 끝에서 덜 감쇠했으면
    구간을 넓힌다.
    """
    t_a, t_b = event.window
    t0, t1 = float(flow.times[0]), float(flow.times[-1])
    for widening in range(spectral.max_window_widenings + 1):
        try:
            n = spectral.window_slices
            previous: Optional[List[TransitionEstimate]] = None
            for _ in range(spectral.max_refinements + 1):
                seed = flow.vectors[flow.nearest_index(t_a)]
                sub = build_flow(slicer, np.linspace(t_a, t_b, n), reference=seed, T=flow.T, spectral=spectral)
                estimates = [transition_probability(sub, event.track_a, event.track_b, (t_a, t_b), T, spectral)
                             for T in T_values]
                if previous is not None and max(abs(a.p - b.p) for a, b in zip(estimates, previous)) < spectral.refine_tol:
                    return estimates
                previous = estimates
                n = 2 * n - 1
            logger.warning(f"[Transition] p not converged after {spectral.max_refinements} refinements "
                           f"(t_c={event.t_c:.3f})")
            return previous
        except WindowTooNarrowError:
            if widening == spectral.max_window_widenings:
                raise
            half = 0.75 * (t_b - t_a)
            t_a, t_b = max(t0, event.t_c - half), min(t1, event.t_c + half)
            logger.info(f"[Transition] widening window to [{t_a:.3f}, {t_b:.3f}]")
    raise WindowTooNarrowError("window could not be widened", details={"t_c": event.t_c})


# ============================================================
# slicer
# ============================================================
def hubbard_slicer(model: BaseHubbardModel) -> Slicer:
    def slicer(t: float) -> EigenSlice:
        w, v = model.eigensystem(t)
        return EigenSlice(t=t, energies=w, states=v)
    return slicer


def exact_slicer(controls: ExactControls, k: int, numerics: NumericsConfig = DEFAULT_NUMERICS) -> Slicer:
    def slicer(t: float) -> EigenSlice:
        return lowest_eigenpairs(t, k, controls, numerics)
    return slicer


def pair_references(controls: ExactControls, numerics: NumericsConfig = DEFAULT_NUMERICS,
                    t: float = 0.0) -> np.ndarray:
    """시각 t 배치의 |L⟩, |M⟩, |R⟩ pair state (대칭 기저 열 벡터)"""
    layout = positions_at(t, controls.traj)
    h = controls.grid.h
    cols = [to_symmetric(pair_ground_state(controls.g, c, controls.grid, numerics).embed().real) * h
            for c in (layout.d_L, layout.d_M, layout.d_R)]
    return np.column_stack(cols)


# ============================================================
# 전이 지도
# ============================================================
@dataclass
class CrossingAnalysis:
    flow: SpectralFlow
    dark_track: int
    events: List[CrossingEvent]
    estimates: List[List[TransitionEstimate]]     # [event][T]


def analyze_transitions(E_g: float, T_values: Sequence[float], model: str = "exact",
                        n_slices: int = 161, k: int = 12, grid: Optional[Grid2D] = None,
                        traj: Optional[TrajectoryParams] = None, cotunneling: bool = True,
                        numerics: NumericsConfig = DEFAULT_NUMERICS,
                        spectral: SpectralConfig = DEFAULT_SPECTRAL,
                        rate_config: RateTableConfig = DEFAULT_RATES) -> CrossingAnalysis:
    """
    E_g 하나: 흐름 → dark track → 교차 → 교차마다 T 별 전이 확률

    흐름은 T_values[0] 길이의 프로토콜 시간으로 한 번만 계산한다.
    rate_config 는 Hubbard 모델의 rate table 격자.
    """
    E_g, g = resolve_interaction(E_g=E_g)
    T0 = float(T_values[0])
    traj = traj.rescaled(T0) if traj is not None else TrajectoryParams(T=T0)
    times = np.linspace(0.0, T0, n_slices)
    if model == "exact":
        controls = ExactControls(g=g, traj=traj, grid=grid or Grid2D())
        slicer = exact_slicer(controls, k, numerics)
        refs = pair_references(controls, numerics)
        flow = build_flow(slicer, times, E_g=E_g, reference=refs, spectral=spectral)
        dark = find_dark_track(flow, refs[:, 0])
    else:
        hub = get_hubbard_model(model, E_g, traj, cotunneling, rate_config=rate_config)
        slicer = hubbard_slicer(hub)
        eye = np.eye(hub.dimension)
        flow = build_flow(slicer, times, E_g=E_g, reference=eye, spectral=spectral)
        dark = find_dark_track(flow, eye[:, hub.left_state])
    events = detect_crossings(flow, dark, spectral=spectral)
    estimates = [refine_crossing(slicer, flow, ev, T_values, spectral) for ev in events]
    return CrossingAnalysis(flow=flow, dark_track=dark, events=events, estimates=estimates)


def _map_cells(E_g: float, T_values: Sequence[float], options: Dict[str, Any]) -> List[TransitionMapCell]:
    """E_g 한 행 (ProcessPool 작업 단위)"""
    try:
        analysis = analyze_transitions(E_g, T_values, **options)
    except NumericalError as e:
        return [TransitionMapCell(E_g=E_g, T=T, crossing_index=-1, error=f"{e.error_code}: {e}") for T in T_values]
    if not analysis.events:
        return [TransitionMapCell(E_g=E_g, T=T, crossing_index=-1, error="no crossing on dark track")
                for T in T_values]
    cells = []
    for idx, row in enumerate(analysis.estimates):
        for T, est in zip(T_values, row):
            cells.append(TransitionMapCell(E_g=E_g, T=T, crossing_index=idx, estimate=est))
    return cells


def scan_transition_map(E_g_values: Sequence[float], T_values: Sequence[float], workers: int = 1,
                        **options) -> List[TransitionMapCell]:
    """
    (E_g, T) 격자의 전이 확률. 교차마다 한 셀 (crossing_index 0 이 첫 교차).

    E_g 행 단위로 worker pool 에 나눈다. VALIDATED_E_G 밖의 E_g 는 경고만 하고 계산한다.
    """
    lo, hi = VALIDATED_E_G
    outside = [float(E) for E in E_g_values if not (lo <= E <= hi)]
    if outside:
        logger.warning(f"[Transition] E_g outside validated range [{lo}, {hi}]: {outside} "
                       f"(crossing structure not guaranteed)")
    T_values = sorted(float(T) for T in T_values)
    cells: List[TransitionMapCell] = []
    if workers <= 1:
        for E_g in E_g_values:
            cells.extend(_map_cells(float(E_g), T_values, options))
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = {executor.submit(_map_cells, float(E_g), T_values, options): E_g for E_g in E_g_values}
            for future in as_completed(futures):
                cells.extend(future.result())
    cells.sort(key=lambda c: (c.E_g, c.crossing_index, c.T))
    return cells
