"""
CSV tables of a run

Error tables, long-format fields, interface traces, snapshots and slope
fits. Numbers are written with 17 significant digits and read back with
round-trip precision, so a table survives write/read unchanged.
"""

import math
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from analysis import ErrorRecord, SlopeFit
from models import CoupledSolution, CouplingMethod, Field, Trace

FLOAT_FORMAT = '%.17g'
ERROR_COLUMNS = ['nu', 'method', 'err_omega1', 'err_omega2', 'peclet', 'resolved']
SLOPE_COLUMNS = ['method', 'region', 'slope', 'intercept', 'pair_slopes']


class TableFormatError(Exception):
    """Raised when a CSV does not have the expected layout"""
    pass


def _write(df: pd.DataFrame, path: str):
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')


def _read(source) -> pd.DataFrame:
    return pd.read_csv(source, float_precision='round_trip')


def write_errors(records: Sequence[ErrorRecord], path: str):
    """errors.csv: nu,method,err_omega1,err_omega2,peclet,resolved"""
    df = pd.DataFrame([r.to_row() for r in records], columns=ERROR_COLUMNS)
    _write(df, path)


def read_errors(path: str) -> pd.DataFrame:
    """
    Read an errors.csv.

    Raises:
        TableFormatError: If the file is unreadable or lacks a column
    """
    try:
        df = _read(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise TableFormatError(f"cannot read {path}: {e}")
    missing = [c for c in ERROR_COLUMNS if c not in df.columns]
    if missing:
        raise TableFormatError(f"missing columns in {path}: {', '.join(missing)}")
    return df


class ErrorTableImporter:
    """Turns error table rows back into ErrorRecords, collecting row errors"""

    REQUIRED_FIELDS = ['nu', 'method']

    def __init__(self):
        self.errors: List[str] = []

    def validate_required_fields(self, data: Dict, required_fields: Sequence[str]):
        missing = [f for f in required_fields if f not in data or pd.isna(data[f]) or str(data[f]).strip() == '']
        if missing:
            return False, f"Missing required fields: {', '.join(missing)}"
        return True, None

    def process_dataframe(self, df: pd.DataFrame) -> List[ErrorRecord]:
        records = []
        for index, row in df.iterrows():
            data = {col: (None if pd.isna(row[col]) else row[col]) for col in df.columns}
            is_valid, message = self.validate_required_fields(data, self.REQUIRED_FIELDS)
            if not is_valid:
                self.errors.append(f"Row {index + 1}: {message}")
                continue
            try:
                method = CouplingMethod.from_label(str(data['method']))
            except ValueError as e:
                self.errors.append(f"Row {index + 1}: {e}")
                continue
            records.append(ErrorRecord(
                nu=float(data['nu']),
                method=method,
                err_omega1=math.nan if data['err_omega1'] is None else float(data['err_omega1']),
                err_omega2=math.nan if data['err_omega2'] is None else float(data['err_omega2']),
                peclet=float(data['peclet']) if data['peclet'] is not None else math.nan,
                resolved=_as_bool(data['resolved']),
            ))
        return records


def _as_bool(value) -> bool:
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    return str(value).strip().lower() in ('true', '1')


def records_from_csv(path: str) -> List[ErrorRecord]:
    """
    Raises:
        TableFormatError: If the file or any row is malformed
    """
    importer = ErrorTableImporter()
    records = importer.process_dataframe(read_errors(path))
    if importer.errors:
        raise TableFormatError('; '.join(importer.errors))
    return records


def field_frame(field: Field, subdomain: str) -> pd.DataFrame:
    xs, ts = np.meshgrid(field.grid.nodes, field.time.times)
    return pd.DataFrame({
        'x': xs.ravel(), 't': ts.ravel(), 'value': field.values.ravel(), 'subdomain': subdomain
    })


def write_fields(solution: CoupledSolution, path: str):
    """Long format x,t,value,subdomain; subdomains omega1 then omega2, time-major"""
    df = pd.concat([field_frame(solution.u_ad, 'omega1'), field_frame(solution.u_a, 'omega2')],
                   ignore_index=True)
    _write(df, path)


def write_traces(series: Dict[str, Trace], path: str):
    """Long format series,t,value in insertion order of `series`"""
    frames = [
        pd.DataFrame({'series': name, 't': trace.time.times, 'value': trace.values})
        for name, trace in series.items()
    ]
    df = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=['series', 't', 'value'])
    _write(df, path)


def interface_series(solution: CoupledSolution, reference: Optional[Field] = None) -> Dict[str, Trace]:
    """Reference and per-iteration interface traces, then auxiliary traces"""
    series: Dict[str, Trace] = {}
    if reference is not None:
        series['reference'] = reference.trace_at(0.0)
    for k, trace in enumerate(solution.diagnostics.interface_traces, start=1):
        series[f'iteration_{k}'] = trace
    for name, traces in solution.diagnostics.auxiliary_traces.items():
        for k, trace in enumerate(traces, start=1):
            series[f'{name}_{k}'] = trace
    return series


def write_snapshots(reference: Field, solution: CoupledSolution, times: Iterable[float], path: str):
    """
    t,x,reference,coupled,subdomain at the time levels nearest to `times`.

    The interface node appears once per subdomain.
    """
    frames = []
    for t in times:
        n = reference.time.nearest_level(t)
        for name, part in (('omega1', solution.u_ad), ('omega2', solution.u_a)):
            ref = reference.restrict(part.grid)
            frames.append(pd.DataFrame({
                't': reference.time.times[n],
                'x': part.grid.nodes,
                'reference': ref.values[n],
                'coupled': part.values[n],
                'subdomain': name,
            }))
    columns = ['t', 'x', 'reference', 'coupled', 'subdomain']
    df = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=columns)
    _write(df[columns], path)


def write_slopes(fits: Dict[str, Dict[str, SlopeFit]], path: str):
    """slopes.csv from {region: {method: fit}}; pair slopes joined by ';'"""
    rows = []
    for region, by_method in fits.items():
        for method, fit in by_method.items():
            rows.append({
                'method': method,
                'region': region,
                'slope': fit.slope,
                'intercept': fit.intercept,
                'pair_slopes': ';'.join(FLOAT_FORMAT % s for s in fit.pair_slopes),
            })
    _write(pd.DataFrame(rows, columns=SLOPE_COLUMNS), path)


def read_slopes(path: str) -> pd.DataFrame:
    return pd.read_csv(path, float_precision='round_trip', dtype={'pair_slopes': str}, keep_default_na=False)
