"""
SAP 시뮬레이터 에러 정의

CLI 종료 코드:
- ConfigError: 2
- NumericalError 계열: 3
- ResourceError: 4
"""
from typing import Any, Dict, Optional


class SapError(Exception):
    """공통 베이스 에러"""
    exit_code = 1

    def __init__(self, message: str, error_code: str = "sap_error", details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.error_code = error_code
        self.details = details or {}


class ConfigError(SapError):
    """시나리오 설정 오류"""
    exit_code = 2

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, error_code="config", details=details)


class DomainError(SapError, ValueError):
    """입력 값이 정의역 밖"""
    exit_code = 2

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, error_code="domain", details=details)


class GeometryError(SapError):
    """트랩 간격이 너무 가까워 상태가 독립적이지 않음"""
    exit_code = 3

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, error_code="geometry", details=details)


class NumericalError(SapError):
    """수치 계약 위반 (norm drift, 수렴 실패 등)"""
    exit_code = 3

    def __init__(self, message: str, error_code: str = "numerical", details: Optional[Dict[str, Any]] = None):
        super().__init__(message, error_code=error_code, details=details)


class ResolutionError(NumericalError):
    """그리드 해상도 부족"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, error_code="resolution", details=details)


class StepSizeError(NumericalError):
    """dt 불안정 (norm drift)"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, error_code="step_size", details=details)


class ConvergenceError(NumericalError):
    """root solver / eigensolver 미수렴"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, error_code="convergence", details=details)


class SingularityError(NumericalError):
    """정확한 축퇴 (gap ~ 0)에서 비단열 결합 계산 불가"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, error_code="singularity", details=details)


class WindowTooNarrowError(NumericalError):
    """적분 구간 끝에서 결합이 충분히 감쇠하지 않음"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, error_code="window_too_narrow", details=details)


class ContractError(NumericalError):
    """입력 계약 위반 (예: 고유벡터 미보존 slice)"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, error_code="contract", details=details)


class ResourceError(SapError):
    """메모리/디스크 등 리소스 부족"""
    exit_code = 4

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, error_code="resource", details=details)
