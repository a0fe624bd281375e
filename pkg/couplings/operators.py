"""
Operators of the factorization

    L_ad = (nu/a^2) (L_ma L_a - R),   R = (d/dt + c)^2

with L_a = d/dt + a d/dx + c and L_ma = d/dt - a d/dx + c + a^2/nu.
"""

import numpy as np

from models import Field


def time_derivatives(values: np.ndarray, dt: float):
    """
    First and second time derivatives along axis 0, second order everywhere.

    Central stencils inside; one-sided stencils at both ends (four points
    for the second derivative when available, three otherwise).
    """
    n = values.shape[0]
    if n < 3:
        raise ValueError(f"need at least 3 time levels, got {n}")
    first = np.gradient(values, dt, axis=0, edge_order=2)

    second = np.empty_like(values)
    second[1:-1] = (values[2:] - 2.0 * values[1:-1] + values[:-2]) / dt ** 2
    if n >= 4:
        second[0] = (2.0 * values[0] - 5.0 * values[1] + 4.0 * values[2] - values[3]) / dt ** 2
        second[-1] = (2.0 * values[-1] - 5.0 * values[-2] + 4.0 * values[-3] - values[-4]) / dt ** 2
    else:
        second[0] = second[-1] = second[1]
    return first, second


def apply_remainder(v: Field, c: float) -> Field:
    """
    R v = d2v/dt2 + 2c dv/dt + c^2 v, nodewise.

    Args:
        v: Field with at least 3 time levels
        c: Reaction coefficient

    Returns:
        Field on the same grids

    Raises:
        ValueError: If v has fewer than 3 time levels
    """
    first, second = time_derivatives(v.values, v.time.dt)
    return Field(v.grid, v.time, second + 2.0 * c * first + c ** 2 * v.values)


def factorization_identity_check(a: float, nu: float, c: float, alpha: float, beta: float) -> float:
    """
    Residual of the factorization on u = exp(alpha x + beta t).

    Every operator acts on the exponential by multiplication with its symbol,
    so the identity reduces to
        (nu/a^2) (s_ma s_a - (beta + c)^2) = beta - nu alpha^2 + a alpha + c.

    Returns:
        Absolute residual
    """
    if a == 0 or not nu > 0:
        raise ValueError("need a != 0 and nu > 0")
    s_a = beta + a * alpha + c
    s_ma = beta - a * alpha + c + a ** 2 / nu
    s_r = (beta + c) ** 2
    s_ad = beta - nu * alpha ** 2 + a * alpha + c
    return abs((nu / a ** 2) * (s_ma * s_a - s_r) - s_ad)
