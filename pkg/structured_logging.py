"""
Structured logging system for the factorization-dd solvers

This module provides JSON structured logging with a per-run correlation ID,
operation tracking and performance monitoring for solver stages, sweep cells
and CLI commands.
"""

import logging
import os
import time
import uuid
from datetime import datetime, timezone
from functools import wraps
from typing import Any, Dict, Optional

from pythonjsonlogger import jsonlogger

SERVICE_NAME = 'factorization-dd'
SERVICE_VERSION = '1.0.0'

# Fields attached to every record of the current process
_run_context: Dict[str, Any] = {}


class StructuredLogger:
    """Structured logger with JSON formatting and run correlation"""

    def __init__(self, name: str, log_dir: Optional[str] = None, level: int = logging.INFO):
        self.name = name
        self.logger = logging.getLogger(name)
        self.log_dir = log_dir
        self.level = level
        self._setup_logger()

    def _setup_logger(self):
        """Setup structured logger with JSON formatter"""
        # Remove existing handlers
        for handler in self.logger.handlers[:]:
            self.logger.removeHandler(handler)

        formatter = jsonlogger.JsonFormatter(
            fmt='%(asctime)s %(name)s %(levelname)s %(message)s %(filename)s %(lineno)d',
            datefmt='%Y-%m-%dT%H:%M:%S'
        )

        # Console handler (stderr keeps stdout free for command output)
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(formatter)
        self.logger.addHandler(console_handler)

        if self.log_dir:
            error_handler = logging.FileHandler(os.path.join(self.log_dir, 'error.log'))
            error_handler.setLevel(logging.ERROR)
            error_handler.setFormatter(formatter)
            self.logger.addHandler(error_handler)

            file_handler = logging.FileHandler(os.path.join(self.log_dir, 'run.log'))
            file_handler.setFormatter(formatter)
            self.logger.addHandler(file_handler)

        self.logger.setLevel(self.level)
        self.logger.propagate = False

    def _get_context(self) -> Dict[str, Any]:
        """Get run context for logging"""
        context = {
            'timestamp': datetime.now(timezone.utc).isoformat(),
            'service': SERVICE_NAME,
            'version': SERVICE_VERSION,
        }
        context.update(_run_context)
        return context

    def _log(self, level: int, message: str, /, exc_info: bool = False, **kwargs):
        """Log with structured context"""
        if not self.logger.isEnabledFor(level):
            return
        context = self._get_context()
        context.update(kwargs)
        self.logger.log(level, message, extra=context, exc_info=exc_info)

    def debug(self, message: str, **kwargs):
        """Log debug message"""
        self._log(logging.DEBUG, message, **kwargs)

    def info(self, message: str, **kwargs):
        """Log info message"""
        self._log(logging.INFO, message, **kwargs)

    def warning(self, message: str, **kwargs):
        """Log warning message"""
        self._log(logging.WARNING, message, **kwargs)

    def error(self, message: str, **kwargs):
        """Log error message"""
        self._log(logging.ERROR, message, **kwargs)

    def exception(self, message: str, **kwargs):
        """Log exception with traceback"""
        self._log(logging.ERROR, message, exc_info=True, **kwargs)

    def log_performance(self, operation: str, duration: float, **kwargs):
        """Log performance metrics"""
        context = {
            'event_type': 'performance',
            'operation': operation,
            'duration_ms': duration * 1000
        }
        context.update(kwargs)

        self.info(f"Performance: {operation}", **context)

    def log_solver_warning(self, warning_type: str, **kwargs):
        """Log a numerical warning that does not stop the run"""
        context = {
            'event_type': 'solver_warning',
            'warning_type': warning_type
        }
        context.update(kwargs)

        self.warning(f"Solver warning: {warning_type}", **context)

    def log_iteration(self, method: str, iteration: int, **kwargs):
        """Log one coupling iteration"""
        context = {
            'event_type': 'iteration',
            'method': method,
            'iteration': iteration
        }
        context.update(kwargs)

        self.debug(f"Iteration {iteration}: {method}", **context)


# Global logger instances
_loggers: Dict[str, StructuredLogger] = {}
_settings: Dict[str, Any] = {'log_dir': None, 'level': logging.INFO}


def get_logger(name: str = 'fdd') -> StructuredLogger:
    """Get or create structured logger instance"""
    if name not in _loggers:
        _loggers[name] = StructuredLogger(name, _settings['log_dir'], _settings['level'])
    return _loggers[name]


def set_run_context(**fields):
    """Attach fields (run_id, command, ...) to every subsequent record"""
    _run_context.update(fields)


def init_logging(log_dir: Optional[str] = None, level: str = 'INFO', command: Optional[str] = None) -> StructuredLogger:
    """
    Initialize the logging system for one CLI invocation.

    Args:
        log_dir: Directory for run.log/error.log, console only when None
        level: Logging level name
        command: CLI subcommand recorded in the run context

    Returns:
        The main structured logger
    """
    if log_dir:
        os.makedirs(log_dir, exist_ok=True)

    _settings['log_dir'] = log_dir
    _settings['level'] = logging.getLevelName(level.upper())
    if not isinstance(_settings['level'], int):
        _settings['level'] = logging.INFO

    # Rebuild existing loggers with the new handlers
    for logger in _loggers.values():
        logger.log_dir = log_dir
        logger.level = _settings['level']
        logger._setup_logger()

    set_run_context(run_id=str(uuid.uuid4()), command=command)

    logger = get_logger('fdd')
    logger.info(
        "Run started",
        event_type='run_start',
        log_dir=log_dir,
        level=level
    )
    return logger


def log_performance(operation: str):
    """Decorator to log function performance"""
    def decorator(f):
        @wraps(f)
        def decorated_function(*args, **kwargs):
            start_time = time.time()
            logger = get_logger(f.__module__)
            try:
                result = f(*args, **kwargs)
                logger.log_performance(
                    operation=operation,
                    duration=time.time() - start_time,
                    function=f.__name__,
                    success=True
                )
                return result
            except Exception as e:
                logger.log_performance(
                    operation=operation,
                    duration=time.time() - start_time,
                    function=f.__name__,
                    success=False,
                    error=str(e)
                )
                raise

        return decorated_function
    return decorator


class ErrorContext:
    """Context manager for operation logging"""

    def __init__(self, operation: str, logger_name: str = 'fdd', **context):
        self.operation = operation
        self.context = context
        self.logger = get_logger(logger_name)
        self.start_time: Optional[float] = None

    def __enter__(self):
        self.start_time = time.time()
        self.logger.info(
            f"Starting operation: {self.operation}",
            event_type='operation_start',
            operation=self.operation,
            **self.context
        )
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        duration = time.time() - self.start_time if self.start_time else None

        if exc_type:
            self.logger.error(
                f"Operation failed: {self.operation}",
                event_type='operation_error',
                operation=self.operation,
                duration_ms=duration * 1000 if duration else None,
                error_type=exc_type.__name__,
                error_message=str(exc_val) if exc_val else None,
                **self.context
            )
        else:
            self.logger.info(
                f"Operation completed: {self.operation}",
                event_type='operation_complete',
                operation=self.operation,
                duration_ms=duration * 1000 if duration else None,
                **self.context
            )

        return False  # Don't suppress exceptions
