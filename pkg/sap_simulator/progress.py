"""
Progress Callback System for long numerical loops
"""
import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional

logger = logging.getLogger(__name__)


@dataclass
class ProgressUpdate:
    """진행 상태 업데이트 데이터"""
    progress: float  # 0.0 ~ 1.0
    step: str  # 현재 단계 이름 (propagate, spectrum, rates ...)
    message: str
    details: Optional[Dict[str, Any]] = None


ProgressCallback = Callable[[ProgressUpdate], None]


class ProgressTracker:
    """
    Progress 추적 및 콜백 호출 관리

    min_interval 이상 진행됐을 때만 콜백을 부른다 (propagation 은 수십만 step).
    """
    def __init__(self, callback: Optional[ProgressCallback] = None, min_interval: float = 0.05):
        self.callback = callback
        self.min_interval = min_interval
        self.current_progress = 0.0
        self.current_step = "init"
        self._last_reported = -1.0

    def update(self, progress: float, step: str, message: str,
               details: Optional[Dict[str, Any]] = None, force: bool = False):
        """Progress 업데이트 및 콜백 호출"""
        same_step = step == self.current_step
        self.current_progress = progress
        self.current_step = step
        if not self.callback:
            return
        if not force and same_step and progress - self._last_reported < self.min_interval:
            return
        self._last_reported = progress
        self.callback(ProgressUpdate(progress=progress, step=step, message=message, details=details))

    def __repr__(self):
        return f"ProgressTracker(progress={self.current_progress:.0%}, step={self.current_step})"


def logging_callback(update: ProgressUpdate) -> None:
    """CLI 기본 콜백: 로거로 출력"""
    logger.info(f"[{update.step}] {update.progress:6.1%} {update.message}")
