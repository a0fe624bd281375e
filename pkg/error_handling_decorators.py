"""
Error Handling Decorators and Solver Exceptions

Provides the solver exception hierarchy and decorators for consistent error
handling across the solvers, couplings and sweep harness.
Integrates with structured logging and the sweep error tracker.
"""

import time
from functools import wraps
from typing import Any, Callable, Dict, List, Optional, Union

import numpy as np

from structured_logging import get_logger

logger = get_logger(__name__)


class SolverError(Exception):
    """Base class for numerical failures"""
    pass


class SingularMatrixError(SolverError):
    """Zero pivot met during tridiagonal elimination"""

    def __init__(self, message: str, row: Optional[int] = None):
        super().__init__(message)
        self.row = row


class NonFiniteError(SolverError):
    """A solver produced NaN or infinite values"""
    pass


class ConvergenceError(SolverError):
    """An interface iteration did not reach its tolerance"""

    def __init__(self, message: str, history: Optional[List[float]] = None):
        super().__init__(message)
        self.history = list(history or [])


class DataSpecError(SolverError):
    """Unsupported query on a data function (derivative, domain)"""
    pass


class QuadratureError(SolverError):
    """Adaptive quadrature did not reach its tolerance"""
    pass


def _has_non_finite(value: Any) -> bool:
    """Check arrays and objects carrying a `values` array"""
    values = getattr(value, 'values', value)
    if isinstance(values, np.ndarray):
        return not bool(np.all(np.isfinite(values)))
    return False


def ensure_finite(operation: str):
    """Decorator raising NonFiniteError when the returned array holds NaN/inf"""
    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args, **kwargs):
            result = func(*args, **kwargs)
            if _has_non_finite(result):
                logger.error(
                    f"Non-finite values produced - Operation: {operation}",
                    event_type='operation_error',
                    operation=operation
                )
                raise NonFiniteError(f"{operation} produced non-finite values")
            return result
        return wrapper
    return decorator


def handle_errors(
    exceptions: Union[type, tuple] = Exception,
    fallback_value: Any = None,
    log_level: str = "error",
    reraise: bool = False,
    on_error: Optional[Callable[[Exception, Dict[str, Any]], None]] = None
):
    """Decorator for consistent error handling"""
    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args, **kwargs):
            start_time = time.time()
            operation_name = f"{func.__module__}.{func.__name__}"

            try:
                return func(*args, **kwargs)

            except exceptions as e:
                execution_time = time.time() - start_time

                log_method = getattr(logger, log_level, logger.error)
                log_method(
                    f"Function execution failed - Operation: {operation_name}, "
                    f"Error: {str(e)}, Type: {type(e).__name__}, "
                    f"Execution Time: {execution_time:.4f}s",
                    operation=operation_name,
                    error_type=type(e).__name__
                )

                if on_error is not None:
                    on_error(e, {'operation': operation_name, 'kwargs': kwargs})

                if reraise:
                    raise
                return fallback_value

        return wrapper
    return decorator


def performance_monitor(threshold_ms: float = 1000.0):
    """Decorator for monitoring solver run time"""
    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args, **kwargs):
            start_time = time.time()
            operation_name = f"{func.__module__}.{func.__name__}"

            try:
                return func(*args, **kwargs)
            finally:
                execution_time_ms = (time.time() - start_time) * 1000

                if execution_time_ms > threshold_ms:
                    logger.info(
                        f"Performance threshold exceeded - Operation: {operation_name}, "
                        f"Execution Time: {execution_time_ms:.2f}ms, Threshold: {threshold_ms}ms",
                        event_type='performance',
                        operation=operation_name,
                        duration_ms=execution_time_ms
                    )
                else:
                    logger.debug(
                        f"Performance monitor - Operation: {operation_name}, "
                        f"Execution Time: {execution_time_ms:.2f}ms",
                        event_type='performance',
                        operation=operation_name,
                        duration_ms=execution_time_ms
                    )

        return wrapper
    return decorator
