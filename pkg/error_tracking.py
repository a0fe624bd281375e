"""
Error tracking for parameter sweeps

Collects the failures of individual (nu, method) cells so that a sweep can
keep going and report what went wrong at the end.
"""

import traceback
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

from structured_logging import get_logger


class ErrorTracker:
    """Error tracking and summary for one sweep"""

    def __init__(self):
        self.logger = get_logger('error_tracker')
        self.errors: List[Dict[str, Any]] = []
        self.error_stats: Dict[str, Any] = {
            'total_errors': 0,
            'by_type': {},
            'last_error': None
        }

    def track_error(self, error: Exception, context: Optional[Dict[str, Any]] = None) -> int:
        """
        Record a failure.

        Args:
            error: The exception raised by the cell
            context: Cell identification (nu, method, ...)

        Returns:
            Index of the stored error entry
        """
        entry = {
            'timestamp': datetime.now(timezone.utc).isoformat(),
            'type': type(error).__name__,
            'message': str(error),
            'context': dict(context or {}),
            'traceback': ''.join(traceback.format_exception(type(error), error, error.__traceback__)),
        }
        history = getattr(error, 'history', None)
        if history:
            entry['history'] = list(history)

        self.errors.append(entry)
        self.error_stats['total_errors'] += 1
        by_type = self.error_stats['by_type']
        by_type[entry['type']] = by_type.get(entry['type'], 0) + 1
        self.error_stats['last_error'] = {
            'timestamp': entry['timestamp'],
            'type': entry['type'],
            'message': entry['message']
        }

        self.logger.error(
            f"Sweep cell failed: {entry['message']}",
            event_type='operation_error',
            error_type=entry['type'],
            **{k: v for k, v in entry['context'].items() if isinstance(v, (str, int, float))}
        )
        return len(self.errors) - 1

    def merge(self, entries: List[Dict[str, Any]]):
        """Fold entries produced by a worker process into this tracker"""
        for entry in entries:
            self.errors.append(entry)
            self.error_stats['total_errors'] += 1
            by_type = self.error_stats['by_type']
            by_type[entry['type']] = by_type.get(entry['type'], 0) + 1
            self.error_stats['last_error'] = {
                'timestamp': entry['timestamp'],
                'type': entry['type'],
                'message': entry['message']
            }

    def has_errors(self) -> bool:
        return self.error_stats['total_errors'] > 0

    def get_summary(self) -> Dict[str, Any]:
        """Summary without tracebacks"""
        return {
            'total_errors': self.error_stats['total_errors'],
            'by_type': dict(self.error_stats['by_type']),
            'last_error': self.error_stats['last_error'],
            'cells': [
                {'type': e['type'], 'message': e['message'], 'context': e['context']}
                for e in self.errors
            ]
        }
