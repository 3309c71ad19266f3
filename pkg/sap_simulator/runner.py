"""
Scenario 실행기

mode 별 파이프라인 → CSV/JSON 출력 + manifest.json
독립적인 스윕 셀은 ProcessPoolExecutor 로 나눈다.
"""
import logging
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from datetime import datetime, timezone
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import scipy
from pydantic import BaseModel, Field

from . import __version__
from .config import get_output_dir, get_workers
from .exact_dynamics import SCHEME, CheckpointPolicy, run_sap
from .hubbard import dark_state_of, evolve_hubbard, fock_vector, get_hubbard_model, load_rate_table
from .hubbard.rates import RATE_COLUMNS
from .hubbard.three_mode import ThreeModeModel
from .models import ExactControls, FidelityRecord
from .progress import ProgressTracker, logging_callback
from .scenario import ModelChoice, RunMode, Scenario
from .spectral_analysis import (
    SpectralFlow, build_flow, detect_crossings, exact_slicer, find_dark_track, hubbard_slicer,
    pair_references, scan_transition_map, track_bands,
)
from .store import ensure_dir, write_csv, write_json
from .trap_geometry import trajectory_table

logger = logging.getLogger(__name__)


class RunManifest(BaseModel):
    """출력 디렉터리마다 하나. 같은 scenario_hash 면 같은 숫자 출력."""
    scenario_hash: str
    scenario_name: str
    mode: str
    code_version: str = __version__
    scheme: str = SCHEME
    ramp: str
    eig_seed: int
    resolved: Dict[str, Any] = Field(default_factory=dict)
    scenario: Dict[str, Any] = Field(default_factory=dict)
    diagnostics: Dict[str, Any] = Field(default_factory=dict)
    outputs: List[str] = Field(default_factory=list)
    environment: Dict[str, str] = Field(default_factory=dict)
    started_at: str = ""
    finished_at: str = ""
    elapsed_seconds: float = 0.0


class RunContext:
    """출력 경로 관리 + manifest 누적"""

    def __init__(self, scenario: Scenario, out_dir: str, workers: int):
        self.scenario = scenario
        self.out_dir = ensure_dir(out_dir)
        self.workers = workers
        self.outputs: List[str] = []
        self.diagnostics: Dict[str, Any] = {}
        self.resolved: Dict[str, Any] = {}
        self.tracker = ProgressTracker(logging_callback)

    @property
    def wants_csv(self) -> bool:
        return "csv" in self.scenario.output.formats

    def csv(self, name: str, header: List[str], rows) -> None:
        if self.wants_csv:
            write_csv(os.path.join(self.out_dir, name), header, rows)
            self.outputs.append(name)

    def json(self, name: str, data: Dict[str, Any]) -> None:
        write_json(os.path.join(self.out_dir, name), data)
        self.outputs.append(name)


def default_out_dir(scenario: Scenario) -> str:
    base = scenario.output.directory or get_output_dir()
    return os.path.join(base, f"{scenario.name}-{scenario.scenario_hash()[:12]}")


# ============================================================
# mode: trajectory / rates
# ============================================================
def _run_trajectory(ctx: RunContext) -> None:
    traj = ctx.scenario.physics.trajectory_params()
    rows = trajectory_table(traj, ctx.scenario.numerics.trajectory_samples)
    ctx.resolved["trajectory"] = traj.model_dump(mode="json")
    ctx.csv("trajectory.csv", ["t", "d_L", "d_M", "d_R"], rows)


def _run_rates(ctx: RunContext) -> None:
    point = ctx.scenario.interaction()
    traj = ctx.scenario.physics.trajectory_params()
    cfg = ctx.scenario.numerics.rates
    table = load_rate_table(point["g"], d_lo=traj.d_min, d_hi=traj.d_max, config=cfg)
    ctx.resolved.update(point)
    ctx.resolved["d_range"] = list(table.bounds)
    ctx.csv("rates.csv", RATE_COLUMNS, table.rows())


# ============================================================
# mode: sweep-fidelity
# ============================================================
def _fidelity_cell(E_g: float, T: float, scenario: Scenario, out_dir: str,
                   with_progress: bool) -> FidelityRecord:
    """스윕 셀 하나 (worker 프로세스에서도 실행)"""
    nm = scenario.numerics
    checkpoint = None
    if nm.checkpoint_every:
        stem = os.path.join(out_dir, "checkpoints", f"Eg{E_g:.10g}_T{T:g}")
        checkpoint = CheckpointPolicy(stem=stem, every=nm.checkpoint_every,
                                      metadata={"scenario_hash": scenario.scenario_hash()})
    tracker = ProgressTracker(logging_callback) if with_progress else None
    return run_sap(E_g, T, grid=nm.grid, dt=nm.dt, traj=scenario.physics.trajectory_params(T),
                   numerics=nm.tolerances, tracker=tracker, checkpoint=checkpoint)


def _run_sweep(ctx: RunContext) -> None:
    sc = ctx.scenario
    cells = [(E_g, T) for E_g in sc.energies() for T in sc.physics.durations()]
    logger.info(f"[Runner] sweep-fidelity: {len(cells)} cell(s), workers={ctx.workers}")
    records: List[FidelityRecord] = []
    if ctx.workers <= 1 or len(cells) == 1:
        for E_g, T in cells:
            records.append(_fidelity_cell(E_g, T, sc, ctx.out_dir, True))
    else:
        with ProcessPoolExecutor(max_workers=ctx.workers) as executor:
            futures = {executor.submit(_fidelity_cell, E_g, T, sc, ctx.out_dir, False): (E_g, T)
                       for E_g, T in cells}
            for done, future in enumerate(as_completed(futures), 1):
                records.append(future.result())
                ctx.tracker.update(done / len(cells), "sweep", f"{done}/{len(cells)} cells", force=True)
    records.sort(key=lambda r: (r.E_g, r.T))
    header = ["E_g", "g", "T", "F", "norm_drift", "symmetry_violation", "runtime_seconds"]
    ctx.csv("fidelity.csv", header, ([getattr(r, k) for k in header] for r in records))
    ctx.diagnostics["max_norm_drift"] = max(r.norm_drift for r in records)
    ctx.diagnostics["max_symmetry_violation"] = max(r.symmetry_violation for r in records)
    ctx.resolved["cells"] = [[E_g, T] for E_g, T in cells]


# ============================================================
# mode: spectrum
# ============================================================
def _flow_outputs(ctx: RunContext, flow: SpectralFlow, dark: int, labels: Optional[List[str]] = None) -> None:
    k = flow.n_tracks
    ctx.csv("tracks.csv", ["t"] + [f"track_{j}" for j in range(k)], flow.energy_rows())
    events = detect_crossings(flow, dark, spectral=ctx.scenario.numerics.spectral)
    ctx.json("crossings.json", {
        "dark_track": dark,
        "bands": flow.bands,
        "crossings": [e.model_dump(mode="json") for e in events],
        "ambiguities": flow.ambiguities,
    })
    if labels is not None:
        rows = []
        for s, t in enumerate(flow.times):
            for j in range(k):
                rows.append([float(t), j] + [float(v) for v in np.abs(flow.vectors[s, :, j]) ** 2])
        ctx.csv("eigenstate_populations.csv", ["t", "track"] + labels, rows)
    ctx.diagnostics["continuation_ambiguities"] = len(flow.ambiguities)
    ctx.diagnostics["min_continuation_overlap"] = float(np.min(flow.overlaps))
    ctx.diagnostics["crossings"] = len(events)


def _run_spectrum_exact(ctx: RunContext) -> None:
    sc = ctx.scenario
    nm = sc.numerics
    point = sc.interaction()
    traj = sc.physics.trajectory_params()
    controls = ExactControls(g=point["g"], traj=traj, grid=nm.grid, dt=nm.dt)
    times = np.linspace(0.0, traj.T, nm.n_slices)
    slicer = exact_slicer(controls, nm.k, nm.tolerances)
    slices = []
    for s, t in enumerate(times):
        slices.append(slicer(float(t)))
        ctx.tracker.update((s + 1) / len(times), "spectrum", f"slice {s + 1}/{len(times)}")
    ctx.csv("spectrum.csv", ["t"] + [f"E_{i}" for i in range(nm.k)],
            ([sl.t] + [float(e) for e in sl.energies] for sl in slices))
    ctx.diagnostics["max_eig_residual"] = float(max(np.max(sl.residuals) for sl in slices))

    refs = pair_references(controls, nm.tolerances)
    flow = track_bands(slices, E_g=point["E_g"], reference=refs, spectral=nm.spectral)
    dark = find_dark_track(flow, refs[:, 0])
    _flow_outputs(ctx, flow, dark)

    # dark track 의 |L⟩,|M⟩,|R⟩ pair-state 성분 (각 시각의 트랩 배치 기준)
    rows = []
    for s, t in enumerate(flow.times):
        local = pair_references(controls, nm.tolerances, t=float(t))
        rows.append([float(t), float(flow.energies[s, dark])]
                    + [float(v) for v in np.abs(local.T @ flow.vectors[s, :, dark]) ** 2])
    ctx.csv("dark_state.csv", ["t", "energy", "L", "M", "R"], rows)
    ctx.resolved.update(point)


def _run_spectrum_hubbard(ctx: RunContext) -> None:
    sc = ctx.scenario
    nm = sc.numerics
    point = sc.interaction()
    traj = sc.physics.trajectory_params()
    model = get_hubbard_model(sc.flags.model.value, point["E_g"], traj, sc.flags.cotunneling,
                              rate_config=sc.numerics.rates)
    times = np.linspace(0.0, traj.T, nm.n_slices)
    slicer = hubbard_slicer(model)
    ctx.csv("spectrum.csv", ["t"] + [f"E_{i}" for i in range(model.dimension)],
            ([float(t)] + [float(e) for e in slicer(float(t)).energies] for t in times))

    eye = np.eye(model.dimension)
    flow = build_flow(slicer, times, E_g=point["E_g"], reference=eye, spectral=nm.spectral)
    dark = find_dark_track(flow, eye[:, model.left_state])
    _flow_outputs(ctx, flow, dark, labels=model.labels)

    track = dark_state_of(model, n_slices=nm.n_slices, spectral=nm.spectral)
    ctx.csv("dark_state.csv", ["t", "energy"] + model.labels,
            ([t, e] + list(c) for t, e, c in zip(track.times, track.energies, track.coefficients)))
    ctx.diagnostics["dark_state_reaches_target"] = track.reaches_target
    ctx.diagnostics["dark_state_final_population"] = track.final_target_population
    ctx.diagnostics["degeneracy_warnings"] = len(track.degeneracy_warnings)

    if isinstance(model, ThreeModeModel):
        rows = []
        for t in times:
            theta = model.mixing_angle(float(t))
            rows.append([float(t), theta] + [float(v) for v in model.dark_vector(float(t))])
        ctx.csv("mixing_angle.csv", ["t", "theta", "l", "m", "r"], rows)
    ctx.resolved.update(point)
    ctx.resolved["model"] = repr(model)


# ============================================================
# mode: hubbard-run / transitions
# ============================================================
def _run_hubbard(ctx: RunContext) -> None:
    sc = ctx.scenario
    nm = sc.numerics
    point = sc.interaction()
    traj = sc.physics.trajectory_params()
    model = get_hubbard_model(sc.flags.model.value, point["E_g"], traj, sc.flags.cotunneling,
                              rate_config=sc.numerics.rates)
    evolution = evolve_hubbard(model, fock_vector(model, model.left_state), dt=nm.hubbard_dt,
                               n_records=nm.n_records, numerics=nm.tolerances, tracker=ctx.tracker)
    ctx.csv("populations.csv", ["t"] + evolution.labels,
            ([float(t)] + [float(v) for v in row] for t, row in zip(evolution.times, evolution.populations)))
    final = {label: float(v) for label, v in zip(evolution.labels, evolution.populations[-1])}
    ctx.json("final_populations.json", {"final": final, "target": evolution.labels[model.right_state],
                                        "target_population": final[evolution.labels[model.right_state]]})
    ctx.diagnostics["norm_drift"] = evolution.norm_drift
    ctx.resolved.update(point)
    ctx.resolved["cotunneling"] = sc.flags.cotunneling


def _run_transitions(ctx: RunContext) -> None:
    sc = ctx.scenario
    nm = sc.numerics
    traj = sc.physics.trajectory_params()
    cells = scan_transition_map(
        sc.energies(), sc.physics.durations(), workers=ctx.workers,
        model=sc.flags.model.value, n_slices=nm.n_slices, k=nm.k, grid=nm.grid, traj=traj,
        cotunneling=sc.flags.cotunneling, numerics=nm.tolerances, spectral=nm.spectral, rate_config=nm.rates,
    )
    header = ["E_g", "T", "crossing_index", "p", "numerator", "denominator", "t_a", "t_b", "clamped", "error"]
    rows = []
    for c in cells:
        e = c.estimate
        rows.append([c.E_g, c.T, c.crossing_index,
                     e.p if e else None, e.numerator if e else None, e.denominator if e else None,
                     e.window[0] if e else None, e.window[1] if e else None,
                     e.clamped if e else None, c.error or ""])
    ctx.csv("transition_map.csv", header, rows)
    ctx.diagnostics["failed_cells"] = sum(1 for c in cells if c.error)
    ctx.diagnostics["clamped"] = sum(1 for c in cells if c.estimate and c.estimate.clamped)


_DISPATCH: Dict[RunMode, Callable[[RunContext], None]] = {
    RunMode.TRAJECTORY: _run_trajectory,
    RunMode.RATES: _run_rates,
    RunMode.SWEEP_FIDELITY: _run_sweep,
    RunMode.HUBBARD_RUN: _run_hubbard,
    RunMode.TRANSITIONS: _run_transitions,
}


def run(scenario: Scenario, out_dir: Optional[str] = None, workers: Optional[int] = None) -> Tuple[str, RunManifest]:
    """
    시나리오 한 개 실행

    Args:
        scenario: 검증된 Scenario
        out_dir: 출력 디렉터리 (기본: SAP_OUTPUT_DIR/<name>-<hash>)
        workers: 프로세스 수 (기본: SAP_WORKERS)

    Returns:
        (출력 디렉터리, RunManifest)
    """
    out_dir = out_dir or default_out_dir(scenario)
    ctx = RunContext(scenario, out_dir, workers or get_workers())
    started = time.perf_counter()
    started_at = datetime.now(timezone.utc).isoformat()
    logger.info(f"[Runner] {scenario.name} mode={scenario.mode.value} model={scenario.flags.model.value} → {out_dir}")

    if scenario.mode == RunMode.SPECTRUM:
        handler = _run_spectrum_exact if scenario.flags.model == ModelChoice.EXACT else _run_spectrum_hubbard
    else:
        handler = _DISPATCH[scenario.mode]
    handler(ctx)

    traj = scenario.physics.trajectory_params()
    manifest = RunManifest(
        scenario_hash=scenario.scenario_hash(),
        scenario_name=scenario.name,
        mode=scenario.mode.value,
        ramp=traj.ramp.value,
        eig_seed=scenario.numerics.tolerances.eig_seed,
        resolved=ctx.resolved,
        scenario=scenario.model_dump(mode="json"),
        diagnostics=ctx.diagnostics,
        outputs=list(ctx.outputs),
        environment={"python": platform.python_version(), "platform": platform.platform(),
                     "numpy": np.__version__, "scipy": scipy.__version__},
        started_at=started_at,
        finished_at=datetime.now(timezone.utc).isoformat(),
        elapsed_seconds=time.perf_counter() - started,
    )
    write_json(os.path.join(out_dir, "manifest.json"), manifest.model_dump(mode="json"))
    logger.info(f"[Runner] done in {manifest.elapsed_seconds:.1f}s, {len(ctx.outputs)} output file(s)")
    return out_dir, manifest
