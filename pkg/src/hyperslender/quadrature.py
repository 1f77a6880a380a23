import logging
import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy import integrate

_LOG = logging.getLogger(__name__)

DEFAULT_ABS_TOL = 1e-12
DEFAULT_REL_TOL = 1e-10
DEFAULT_MAX_SUBDIVISIONS = 200
DEFAULT_PANELS = 256
DEFAULT_BUMP_ORDER = 4
PANEL_NODES = 16
# accept a QUADPACK warning when the estimate is within this factor of the target
ROUNDOFF_SLACK = 10.0

__all__ = [
    'QuadratureError',
    'NoConvergence',
    'QuadratureConfig',
    'TestFunction',
    'Antiderivative',
    'integrate_1d',
    'fixed_gauss',
    'H_of',
    'M_of',
    'curvature_moment_of',
    'cone_moment_of',
    'make_bump',
    'eval_bump',
]


class QuadratureError(Exception):
    pass


class NoConvergence(QuadratureError):
    pass


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = DEFAULT_ABS_TOL
    rel_tol: float = DEFAULT_REL_TOL
    max_subdivisions: int = DEFAULT_MAX_SUBDIVISIONS
    panels: int = DEFAULT_PANELS

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise QuadratureError('Tolerances must be positive')
        if self.max_subdivisions < 1 or self.panels < 1:
            raise QuadratureError('Subdivisions and panels must be positive')

    def as_dict(self):
        return {
            'abs_tol': self.abs_tol,
            'rel_tol': self.rel_tol,
            'max_subdivisions': self.max_subdivisions,
            'panels': self.panels,
        }


DEFAULT_CONFIG = QuadratureConfig()


def integrate_1d(g, a, b, cfg=None, points=None):
    """Adaptive Gauss-Kronrod integral of a scalar integrand over [a, b]

    Returns (value, error_estimate). Interior `points` are passed on as
    breakpoints where g is known to lose smoothness.
    """
    cfg = cfg or DEFAULT_CONFIG
    a = float(a)
    b = float(b)
    if b < a:
        raise QuadratureError('Empty interval [%g, %g]' % (a, b))
    if a == b:
        return 0.0, 0.0
    if points is not None:
        points = sorted(set(float(p) for p in points if a < p < b))
    limit = max(cfg.max_subdivisions, 2 * len(points or ()) + 2)
    result = integrate.quad(
        lambda t: float(g(t)), a, b,
        epsabs=cfg.abs_tol, epsrel=cfg.rel_tol, limit=limit,
        points=points or None, full_output=1,
    )
    value, error = result[0], result[1]
    if len(result) > 3:
        target = max(cfg.abs_tol, cfg.rel_tol * abs(value))
        if not error <= ROUNDOFF_SLACK * target:
            raise NoConvergence('No convergence on [%g, %g]: %s' % (a, b, result[3]))
        _LOG.debug('Accepted [%g, %g] at error %g: %s', a, b, error, result[3])
    return value, error


@lru_cache(maxsize=None)
def gauss_legendre(n):
    return np.polynomial.legendre.leggauss(n)


def fixed_gauss(g, a, b, n):
    """n-point Gauss-Legendre rule for a vectorized integrand

    a and b may be arrays of equal shape; the rule is then applied to each
    interval and g receives an array of shape a.shape + (n,).
    """
    nodes, weights = gauss_legendre(n)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    half = np.asarray(0.5 * (b - a))
    mid = np.asarray(0.5 * (b + a))
    t = mid[..., None] + half[..., None] * nodes
    return half * np.sum(weights * g(t), axis=-1)


class Antiderivative(object):
    """x -> integral of g from 0 to x on [0, end]

    Tabulated on `panels` equal panels with integrate_1d, finished inside a
    panel with a fixed Gauss-Legendre rule. Accepts scalars and arrays.
    """

    def __init__(self, g, end, cfg=None, panels=None):
        cfg = cfg or DEFAULT_CONFIG
        self.g = g
        self.end = float(end)
        self.panels = panels or cfg.panels
        self.edges = np.linspace(0.0, self.end, self.panels + 1)
        pieces = [integrate_1d(g, lo, hi, cfg)[0]
                  for lo, hi in zip(self.edges[:-1], self.edges[1:])]
        self.table = np.array([math.fsum(pieces[:i]) for i in range(len(pieces) + 1)])
        self._scalar = lru_cache(maxsize=8192)(self._evaluate_scalar)

    def _evaluate(self, x):
        i = np.clip(np.searchsorted(self.edges, x, side='right') - 1, 0, self.panels - 1)
        start = self.edges[i]
        return self.table[i] + fixed_gauss(self.g, start, x, PANEL_NODES)

    def _evaluate_scalar(self, x):
        return float(self._evaluate(np.asarray(x)))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 0:
            return self._scalar(float(x))
        return self._evaluate(x)


def h_integrand(profile, tau):
    def g(t):
        db = profile.eval(t)[1]
        return db / np.sqrt(1 + tau**2 * db**2)
    return g


def m_integrand(profile, tau):
    def g(t):
        f, df, _ = profile.eval(t)
        return f * df / np.sqrt(1 + tau**2 * df**2)
    return g


def curvature_integrand(profile):
    def g(t):
        b, db, ddb = profile.eval(t)
        return b * db * ddb
    return g


def cone_integrand(profile):
    def g(t):
        f, df, ddf = profile.eval(t)
        return f * f * df * ddf
    return g


def _integral_to(g, profile, x, cfg):
    x = float(x)
    if not 0 <= x <= profile.domain_end * (1 + 1e-12):
        from hyperslender.geometry import OutOfDomain
        raise OutOfDomain('x outside [0, %g]' % profile.domain_end)
    if x == 0.0:
        return 0.0
    return integrate_1d(g, 0.0, min(x, profile.domain_end), cfg)[0]


def H_of(profile, tau, x, cfg=None):
    return _integral_to(h_integrand(profile, tau), profile, x, cfg)


def M_of(profile, tau, x, cfg=None):
    return _integral_to(m_integrand(profile, tau), profile, x, cfg)


def curvature_moment_of(profile, x, cfg=None):
    return _integral_to(curvature_integrand(profile), profile, x, cfg)


def cone_moment_of(profile, x, cfg=None):
    return _integral_to(cone_integrand(profile), profile, x, cfg)


def h_antiderivative(profile, tau, cfg=None):
    return Antiderivative(h_integrand(profile, tau), profile.domain_end, cfg)


def m_antiderivative(profile, tau, cfg=None):
    return Antiderivative(m_integrand(profile, tau), profile.domain_end, cfg)


def curvature_antiderivative(profile, cfg=None):
    return Antiderivative(curvature_integrand(profile), profile.domain_end, cfg)


def cone_antiderivative(profile, cfg=None):
    return Antiderivative(cone_integrand(profile), profile.domain_end, cfg)


@dataclass(frozen=True)
class TestFunction:
    """phi(x, y) = amplitude * max(0, 1 - s)**order

    with s = ((x - x0) / rx)**2 + ((y - y0) / ry)**2, supported on a closed
    ellipse and of class C^(order - 1).
    """
    center: tuple
    radii: tuple
    order: int = DEFAULT_BUMP_ORDER
    amplitude: float = 1.0

    def __post_init__(self):
        if not (self.radii[0] > 0 and self.radii[1] > 0):
            raise QuadratureError('Bump radii must be positive: %r' % (self.radii,))
        if int(self.order) != self.order or self.order < 3:
            raise QuadratureError('Bump order must be an integer >= 3: %r' % self.order)

    def __call__(self, x, y):
        return self.evaluate(x, y)[0]

    def evaluate(self, x, y):
        "(phi, d_x phi, d_y phi), zero outside the support"
        (x0, y0), (rx, ry), k = self.center, self.radii, self.order
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        dx = x - x0
        dy = y - y0
        one_minus_s = np.maximum(0.0, 1 - (dx / rx)**2 - (dy / ry)**2)
        power = one_minus_s**(k - 1)
        phi = self.amplitude * power * one_minus_s
        common = -2 * k * self.amplitude * power
        return phi, common * dx / rx**2, common * dy / ry**2

    def x_extent(self):
        return self.center[0] - self.radii[0], self.center[0] + self.radii[0]

    def y_extent(self, x):
        "Lower and upper edge of the support above x (equal outside)"
        (x0, y0), (rx, ry) = self.center, self.radii
        xi = (np.asarray(x, dtype=float) - x0) / rx
        half = ry * np.sqrt(np.maximum(0.0, 1 - xi**2))
        return y0 - half, y0 + half

    def inside(self, x, y):
        (x0, y0), (rx, ry) = self.center, self.radii
        return ((x - x0) / rx)**2 + ((y - y0) / ry)**2 < 1

    def scaled(self, alpha):
        return replace(self, amplitude=self.amplitude * alpha)

    def unit(self):
        return replace(self, amplitude=1.0)

    def to_physical(self, tau):
        "The bump (x, y) -> self(x, y / tau)"
        (x0, y0), (rx, ry) = self.center, self.radii
        return replace(self, center=(x0, tau * y0), radii=(rx, tau * ry))

    def as_dict(self):
        return {
            'center': list(self.center),
            'radii': list(self.radii),
            'order': self.order,
            'amplitude': self.amplitude,
        }


def make_bump(center, radii, order=DEFAULT_BUMP_ORDER):
    return TestFunction(tuple(float(c) for c in center), tuple(float(r) for r in radii), int(order))


def eval_bump(phi, x, y):
    values = phi.evaluate(x, y)
    if np.ndim(values[0]) == 0:
        return tuple(float(v) for v in values)
    return values
