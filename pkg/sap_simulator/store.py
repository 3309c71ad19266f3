"""
파일 기반 결과 저장소
CSV (RFC-4180, 헤더 + 전체 정밀도), JSON (manifest / 이벤트), 바이너리 checkpoint
"""
import csv
import json
import logging
import os
from datetime import datetime
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ResourceError

logger = logging.getLogger(__name__)

# 재현성: float 은 round-trip 가능한 17 자리
FLOAT_FORMAT = ".17g"


def _fmt(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return format(float(value), FLOAT_FORMAT)
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if value is None:
        return ""
    return str(value)


def _atomic_replace(temp_path: str, file_path: str) -> None:
    os.replace(temp_path, file_path)


def ensure_dir(path: str) -> str:
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as e:
        raise ResourceError(f"cannot create output directory {path}: {e}", details={"path": path})
    return path


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """
    CSV 저장 (임시 파일에 먼저 쓰고 원자적으로 이동)

    Args:
        path: 출력 경로
        header: 컬럼 이름
        rows: 행 iterable

    Returns:
        저장된 경로
    """
    ensure_dir(os.path.dirname(os.path.abspath(path)))
    temp_path = f"{path}.tmp"
    try:
        with open(temp_path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\r\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
        _atomic_replace(temp_path, path)
    except OSError as e:
        raise ResourceError(f"failed to write {path}: {e}", details={"path": path})
    logger.debug(f"[Store] wrote {path}")
    return path


def read_csv(path: str) -> Tuple[List[str], List[List[str]]]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        return header, [row for row in reader]


def write_json(path: str, data: Dict[str, Any]) -> str:
    """JSON 저장 (sort_keys: 같은 입력 → 같은 바이트)"""
    ensure_dir(os.path.dirname(os.path.abspath(path)))
    temp_path = f"{path}.tmp"
    try:
        with open(temp_path, "w", encoding="utf-8") as f:
            json.dump(data, f, ensure_ascii=False, indent=2, sort_keys=True, default=str)
            f.write("\n")
        _atomic_replace(temp_path, path)
    except OSError as e:
        raise ResourceError(f"failed to write {path}: {e}", details={"path": path})
    return path


def read_json(path: str) -> Optional[Dict[str, Any]]:
    if not os.path.exists(path):
        return None
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        logger.error(f"[Store] Failed to read {path}: {e}")
        return None


# ============================================================
# Checkpoint: <stem>.npy (amplitudes) + <stem>.json (sidecar)
# ============================================================
def save_checkpoint(stem: str, amplitudes: np.ndarray, t: float, metadata: Dict[str, Any]) -> str:
    """
    전파 중간 상태 저장

    Args:
        stem: 확장자 없는 경로
        amplitudes: 복소 격자 진폭
        t: 현재 시각
        metadata: scheme, dt, h, g, trajectory, code version 등

    Returns:
        sidecar JSON 경로
    """
    ensure_dir(os.path.dirname(os.path.abspath(stem)))
    npy_path = f"{stem}.npy"
    try:
        # np.save 는 확장자를 붙이므로 임시 이름도 .npy 로 끝나게
        temp_npy = f"{stem}.tmp.npy"
        np.save(temp_npy, amplitudes, allow_pickle=False)
        _atomic_replace(temp_npy, npy_path)
    except OSError as e:
        raise ResourceError(f"failed to write checkpoint {npy_path}: {e}", details={"path": npy_path})
    sidecar = dict(metadata)
    sidecar.update({
        "t": float(t),
        "amplitudes_file": os.path.basename(npy_path),
        "shape": list(amplitudes.shape),
        "saved_at": datetime.now().isoformat(),
    })
    logger.info(f"[Checkpoint] t={t:.3f} → {npy_path}")
    return write_json(f"{stem}.json", sidecar)


def load_checkpoint(stem: str) -> Optional[Tuple[np.ndarray, float, Dict[str, Any]]]:
    """(amplitudes, t, sidecar) 또는 checkpoint 가 없으면 None"""
    sidecar = read_json(f"{stem}.json")
    npy_path = f"{stem}.npy"
    if sidecar is None or not os.path.exists(npy_path):
        return None
    amplitudes = np.load(npy_path, allow_pickle=False)
    return amplitudes, float(sidecar["t"]), sidecar
