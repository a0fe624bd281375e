"""
Log-log error plots

One SVG per subdomain: a polyline per method, hollow markers for
unresolved runs and reference slopes nu^p as dashed guides.
"""

import os
from typing import Dict, List, NamedTuple, Sequence, Tuple

import matplotlib
matplotlib.use('Agg')

import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402
from matplotlib.ticker import LogLocator  # noqa: E402

GUIDE_SLOPES = (1.0, 1.5, 2.0, 2.5, 4.0)
PANELS = {'omega1': 'err_omega1', 'omega2': 'err_omega2'}
TITLES = {'omega1': 'Error on the viscous subdomain', 'omega2': 'Error on the inviscid subdomain'}
CANVAS = (8.0, 6.0)
DPI = 100


class Series(NamedTuple):
    nu: np.ndarray
    err: np.ndarray
    resolved: np.ndarray


def plot_series(df: pd.DataFrame, column: str) -> Dict[str, Series]:
    """
    Plottable points per method, in increasing nu.

    Rows with nonpositive or non-finite errors (monodomain, failed runs)
    cannot be drawn on log axes and are dropped.
    """
    series = {}
    for method, group in df.groupby('method', sort=False):
        group = group[np.isfinite(group[column]) & (group[column] > 0) & (group['nu'] > 0)]
        if group.empty:
            continue
        group = group.sort_values('nu')
        series[str(method)] = Series(
            group['nu'].to_numpy(dtype=float),
            group[column].to_numpy(dtype=float),
            group['resolved'].astype(bool).to_numpy()
        )
    return series


def guide_lines(series: Dict[str, Series], slopes: Sequence[float] = GUIDE_SLOPES
                ) -> List[Tuple[float, np.ndarray, np.ndarray]]:
    """
    Lines err = C nu^p over the plotted nu range, anchored at the largest
    plotted error at the largest nu.
    """
    if not series:
        return []
    nu_all = np.concatenate([s.nu for s in series.values()])
    lo, hi = float(nu_all.min()), float(nu_all.max())
    if lo == hi:
        return []
    anchor = max(float(s.err[-1]) for s in series.values() if s.nu[-1] == hi)
    nu = np.array([lo, hi])
    return [(p, nu, anchor * (nu / hi) ** p) for p in slopes]


def render(df: pd.DataFrame, panel: str, path: str):
    """
    Write the SVG of one panel ('omega1' or 'omega2').

    Element ids: series-<method>, unresolved-<method>, guide-<p>.
    """
    column = PANELS[panel]
    series = plot_series(df, column)

    fig = Figure(figsize=CANVAS, dpi=DPI)
    ax = fig.add_subplot(1, 1, 1)
    ax.set_xscale('log')
    ax.set_yscale('log')

    for p, nu, err in guide_lines(series):
        ax.plot(nu, err, linestyle='--', color='0.6', linewidth=0.8, gid=f'guide-{p:g}')
        ax.annotate(f'nu^{p:g}', (nu[0], err[0]), fontsize=7, color='0.4')

    for label, s in series.items():
        line, = ax.plot(s.nu, s.err, marker='o', label=label, gid=f'series-{label}')
        hollow = ~s.resolved
        if np.any(hollow):
            ax.scatter(s.nu[hollow], s.err[hollow], s=60, facecolors='white',
                       edgecolors=line.get_color(), zorder=3, gid=f'unresolved-{label}')

    ax.xaxis.set_major_locator(LogLocator(numticks=6))
    ax.yaxis.set_major_locator(LogLocator(numticks=6))
    ax.set_xlabel('nu')
    ax.set_ylabel('L2 space-time error')
    ax.set_title(TITLES[panel])
    if series:
        ax.legend(loc='lower right')
    else:
        ax.set_xlim(1e-4, 1.0)
        ax.set_ylim(1e-8, 1.0)
    ax.grid(True, which='major', linewidth=0.3)
    fig.savefig(path, format='svg')


def render_all(df: pd.DataFrame, out_dir: str) -> List[str]:
    """Both panels as errors_omega1.svg and errors_omega2.svg"""
    paths = []
    for panel in PANELS:
        path = os.path.join(out_dir, f'errors_{panel}.svg')
        render(df, panel, path)
        paths.append(path)
    return paths
