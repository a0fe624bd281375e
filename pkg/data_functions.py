"""
Catalog of analytic data functions

Forcing terms, boundary data, initial conditions and manufactured solutions,
each with exact derivatives where the coupling algorithms need them. All
evaluations broadcast over numpy arrays.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from error_handling_decorators import DataSpecError

ArrayLike = np.ndarray


class DataSpec(ABC):
    """
    Base class for space-time data functions.

    Subclasses implement `value`; derivative methods raise DataSpecError
    unless the variant knows its exact derivative.
    """

    kind: str = 'data'

    @abstractmethod
    def value(self, x, t):
        """Exact value at (x, t)"""
        pass

    def dt(self, x, t):
        """Exact time derivative at (x, t)"""
        raise DataSpecError(f"{self.kind} data has no exact time derivative")

    def dx(self, x, t):
        """Exact first spatial derivative at (x, t)"""
        raise DataSpecError(f"{self.kind} data has no exact spatial derivative")

    def dxx(self, x, t):
        """Exact second spatial derivative at (x, t)"""
        raise DataSpecError(f"{self.kind} data has no exact second spatial derivative")

    def describe(self) -> str:
        return self.kind


def _broadcast(x, t):
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    return np.broadcast_arrays(x, t)


def _result(value):
    if np.ndim(value) == 0:
        return float(value)
    return value


@dataclass(frozen=True)
class Zero(DataSpec):
    """Identically zero data"""

    kind = 'zero'

    def value(self, x, t):
        x, t = _broadcast(x, t)
        return _result(np.zeros(x.shape))

    def dt(self, x, t):
        return self.value(x, t)

    def dx(self, x, t):
        return self.value(x, t)

    def dxx(self, x, t):
        return self.value(x, t)


@dataclass(frozen=True)
class GaussianBump(DataSpec):
    """Time independent bump exp(-scale (x - x0)^2)"""

    x0: float
    scale: float = 100.0

    kind = 'gaussian'

    def value(self, x, t):
        x, t = _broadcast(x, t)
        return _result(np.exp(-self.scale * (x - self.x0) ** 2))

    def dt(self, x, t):
        x, t = _broadcast(x, t)
        return _result(np.zeros(x.shape))

    def dx(self, x, t):
        x, t = _broadcast(x, t)
        s = x - self.x0
        return _result(-2.0 * self.scale * s * np.exp(-self.scale * s ** 2))

    def dxx(self, x, t):
        x, t = _broadcast(x, t)
        s = x - self.x0
        k = self.scale
        return _result((4.0 * k * k * s * s - 2.0 * k) * np.exp(-k * s ** 2))

    def describe(self) -> str:
        return f"gaussian(x0={self.x0!r}, scale={self.scale!r})"


def _pulse(t, t0):
    """sin^4(4 pi s) + sin^4(2 pi s)/2 for s = t - t0 > 0, else 0, and its derivative"""
    s = t - t0
    active = s > 0.0
    s4, c4 = np.sin(4.0 * np.pi * s), np.cos(4.0 * np.pi * s)
    s2, c2 = np.sin(2.0 * np.pi * s), np.cos(2.0 * np.pi * s)
    value = s4 ** 4 + 0.5 * s2 ** 4
    slope = 16.0 * np.pi * s4 ** 3 * c4 + 4.0 * np.pi * s2 ** 3 * c2
    return np.where(active, value, 0.0), np.where(active, slope, 0.0)


@dataclass(frozen=True)
class TimePulse(DataSpec):
    """Space independent pulse, the time factor of the reference forcing"""

    t0: float = 0.1
    amplitude: float = 1.0

    kind = 'pulse'

    def value(self, x, t):
        x, t = _broadcast(x, t)
        return _result(self.amplitude * _pulse(t, self.t0)[0])

    def dt(self, x, t):
        x, t = _broadcast(x, t)
        return _result(self.amplitude * _pulse(t, self.t0)[1])

    def dx(self, x, t):
        x, t = _broadcast(x, t)
        return _result(np.zeros(x.shape))

    def dxx(self, x, t):
        return self.dx(x, t)

    def describe(self) -> str:
        return f"pulse(t0={self.t0!r}, amplitude={self.amplitude!r})"


@dataclass(frozen=True)
class ReferenceForcing(DataSpec):
    """
    f(x, t) = f1(t) f2(x, t) with

        f1(t) = (sin^4(4 pi (t - t0)) + sin^4(2 pi (t - t0)) / 2) for t > t0, 0 otherwise
        f2(x, t) = exp(-25 x^2) + exp(-100 (x - t/4 - 0.4)^2) + exp(-100 (x + t/2 + 0.4)^2)
    """

    t0: float = 0.1

    kind = 'reference_forcing'

    @staticmethod
    def _space_terms(x, t):
        centers = (np.zeros_like(x), t / 4.0 + 0.4, -t / 2.0 - 0.4)
        scales = (25.0, 100.0, 100.0)
        speeds = (0.0, 0.25, -0.5)
        return centers, scales, speeds

    def _f2(self, x, t):
        centers, scales, _ = self._space_terms(x, t)
        return sum(np.exp(-k * (x - m) ** 2) for m, k in zip(centers, scales))

    def value(self, x, t):
        x, t = _broadcast(x, t)
        f1, _ = _pulse(t, self.t0)
        return _result(f1 * self._f2(x, t))

    def dt(self, x, t):
        x, t = _broadcast(x, t)
        f1, f1_slope = _pulse(t, self.t0)
        centers, scales, speeds = self._space_terms(x, t)
        # d/dt exp(-k (x - m(t))^2) = 2 k (x - m) m' exp(...)
        f2_dt = sum(
            2.0 * k * (x - m) * v * np.exp(-k * (x - m) ** 2)
            for m, k, v in zip(centers, scales, speeds)
        )
        return _result(f1_slope * self._f2(x, t) + f1 * f2_dt)

    def dx(self, x, t):
        x, t = _broadcast(x, t)
        f1, _ = _pulse(t, self.t0)
        centers, scales, _ = self._space_terms(x, t)
        f2_dx = sum(-2.0 * k * (x - m) * np.exp(-k * (x - m) ** 2) for m, k in zip(centers, scales))
        return _result(f1 * f2_dx)

    def dxx(self, x, t):
        x, t = _broadcast(x, t)
        f1, _ = _pulse(t, self.t0)
        centers, scales, _ = self._space_terms(x, t)
        f2_dxx = sum(
            (4.0 * k * k * (x - m) ** 2 - 2.0 * k) * np.exp(-k * (x - m) ** 2)
            for m, k in zip(centers, scales)
        )
        return _result(f1 * f2_dxx)

    def describe(self) -> str:
        return f"reference_forcing(t0={self.t0!r})"


@dataclass(frozen=True)
class SineManufactured(DataSpec):
    """u(x, t) = amplitude * exp(-decay t) * sin(pi (x - x_left) / length)"""

    x_left: float = -1.0
    length: float = 2.0
    amplitude: float = 1.0
    decay: float = 1.0

    kind = 'sine'

    def _parts(self, x, t):
        k = np.pi / self.length
        phase = k * (x - self.x_left)
        envelope = self.amplitude * np.exp(-self.decay * t)
        return k, phase, envelope

    def value(self, x, t):
        x, t = _broadcast(x, t)
        _, phase, envelope = self._parts(x, t)
        return _result(envelope * np.sin(phase))

    def dt(self, x, t):
        x, t = _broadcast(x, t)
        _, phase, envelope = self._parts(x, t)
        return _result(-self.decay * envelope * np.sin(phase))

    def dx(self, x, t):
        x, t = _broadcast(x, t)
        k, phase, envelope = self._parts(x, t)
        return _result(k * envelope * np.cos(phase))

    def dxx(self, x, t):
        x, t = _broadcast(x, t)
        k, phase, envelope = self._parts(x, t)
        return _result(-k * k * envelope * np.sin(phase))

    def describe(self) -> str:
        return f"sine(x_left={self.x_left!r}, length={self.length!r})"


@dataclass(frozen=True)
class ExpEigen(DataSpec):
    """u(x, t) = exp(alpha x + beta t), an eigenfunction of every constant coefficient operator"""

    alpha: float
    beta: float

    kind = 'exp'

    def value(self, x, t):
        x, t = _broadcast(x, t)
        return _result(np.exp(self.alpha * x + self.beta * t))

    def dt(self, x, t):
        return _result(self.beta * np.asarray(self.value(x, t)))

    def dx(self, x, t):
        return _result(self.alpha * np.asarray(self.value(x, t)))

    def dxx(self, x, t):
        return _result(self.alpha ** 2 * np.asarray(self.value(x, t)))

    def describe(self) -> str:
        return f"exp(alpha={self.alpha!r}, beta={self.beta!r})"


@dataclass(frozen=True, eq=False)
class Custom(DataSpec):
    """
    Tabulated data, linearly interpolated.

    Provide `times` for time-only data, `nodes` for space-only data, or both
    with `values` of shape (len(times), len(nodes)). Derivative queries are
    rejected.
    """

    values: np.ndarray
    times: Optional[np.ndarray] = None
    nodes: Optional[np.ndarray] = None
    _interp: Optional[RegularGridInterpolator] = field(default=None, init=False, repr=False)

    kind = 'custom'

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, 'values', values)
        if self.times is None and self.nodes is None:
            raise DataSpecError("custom data needs times, nodes or both")
        if self.times is not None and self.nodes is not None:
            interp = RegularGridInterpolator(
                (np.asarray(self.times, dtype=float), np.asarray(self.nodes, dtype=float)),
                values, method='linear', bounds_error=True
            )
            object.__setattr__(self, '_interp', interp)

    def value(self, x, t):
        x, t = _broadcast(x, t)
        if self._interp is not None:
            points = np.stack([t.ravel(), x.ravel()], axis=-1)
            try:
                out = self._interp(points).reshape(x.shape)
            except ValueError as e:
                raise DataSpecError(f"custom data evaluated outside its table: {e}") from e
            return _result(out)
        if self.times is not None:
            return _result(np.interp(t, self.times, self.values))
        return _result(np.interp(x, self.nodes, self.values))


@dataclass(frozen=True)
class LinearOperatorData(DataSpec):
    """
    d_t * du/dt + d_xx * d2u/dx2 + d_x * du/dx + d_0 * u applied to `base`.

    Builds manufactured forcings (L_ad u*) and boundary traces (L_a u*,
    L_ma u*) from data that carries exact derivatives.
    """

    base: DataSpec
    d_t: float = 0.0
    d_xx: float = 0.0
    d_x: float = 0.0
    d_0: float = 0.0

    kind = 'operator'

    def value(self, x, t):
        out = 0.0
        if self.d_t:
            out = out + self.d_t * np.asarray(self.base.dt(x, t))
        if self.d_xx:
            out = out + self.d_xx * np.asarray(self.base.dxx(x, t))
        if self.d_x:
            out = out + self.d_x * np.asarray(self.base.dx(x, t))
        if self.d_0:
            out = out + self.d_0 * np.asarray(self.base.value(x, t))
        x, t = _broadcast(x, t)
        return _result(np.broadcast_to(out, x.shape).astype(float))

    def describe(self) -> str:
        return (f"operator({self.base.describe()}; d_t={self.d_t!r}, d_xx={self.d_xx!r}, "
                f"d_x={self.d_x!r}, d_0={self.d_0!r})")


def advection_diffusion_of(base: DataSpec, a: float, nu: float, c: float) -> LinearOperatorData:
    """Forcing L_ad u = u_t - nu u_xx + a u_x + c u for a manufactured u"""
    return LinearOperatorData(base, d_t=1.0, d_xx=-nu, d_x=a, d_0=c)


def transport_of(base: DataSpec, speed: float, eta: float) -> LinearOperatorData:
    """Trace data (d_t + speed d_x + eta) u for a manufactured u"""
    return LinearOperatorData(base, d_t=1.0, d_x=speed, d_0=eta)


Domain = Tuple[float, float, float]


def _check_domain(x, t, domain: Optional[Domain]):
    if domain is None:
        return
    x_min, x_max, t_final = domain
    tol = 1e-12 * max(1.0, abs(x_min), abs(x_max), t_final)
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(x < x_min - tol) or np.any(x > x_max + tol) or np.any(t < -tol) or np.any(t > t_final + tol):
        raise DataSpecError(f"evaluation outside the domain [{x_min}, {x_max}] x [0, {t_final}]")


def evaluate(d: DataSpec, x, t, domain: Optional[Domain] = None):
    """
    Evaluate a data function.

    Args:
        d: Data function
        x: Position(s)
        t: Time(s)
        domain: Optional (x_min, x_max, t_final) closed domain to enforce

    Returns:
        Exact value(s)

    Raises:
        DataSpecError: If (x, t) lies outside `domain`
    """
    _check_domain(x, t, domain)
    return d.value(x, t)


def eval_dt(d: DataSpec, t, x=0.0):
    """Exact time derivative of (time-only) data, sampled at x"""
    return d.dt(x, t)


def eval_dx(d: DataSpec, x, t=0.0):
    """Exact first spatial derivative"""
    return d.dx(x, t)


def eval_dxx(d: DataSpec, x, t=0.0):
    """Exact second spatial derivative"""
    return d.dxx(x, t)
