import logging
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy import optimize

from hyperslender.quadrature import fixed_gauss, integrate_1d

_LOG = logging.getLogger(__name__)

PLANAR = 'planar'
PLANAR_SCALED = 'planar_scaled'
AXISYM = 'axisym'
AXISYM_SCALED = 'axisym_scaled'
FLAVORS = (PLANAR, PLANAR_SCALED, AXISYM, AXISYM_SCALED)
AXISYM_FLAVORS = (AXISYM, AXISYM_SCALED)

ABOVE_CURVE = 'above_curve_2d'
OUTSIDE_CURVE_AXISYM = 'outside_curve_axisym'
REGION_KINDS = (ABOVE_CURVE, OUTSIDE_CURVE_AXISYM)

NONE = 'none'
D_X = 'd_x'
D_Y = 'd_y'
_DERIV_INDEX = {NONE: 0, D_X: 1, D_Y: 2}

CROSSING_SAMPLES = 256
CROSSING_XTOL = 1e-13
# inner Gauss-Legendre nodes beyond the bump order; exact for the r-weighted polynomial
INNER_EXTRA_NODES = 2

__all__ = [
    'MeasureError',
    'SupportOutsideWindow',
    'FlavorMismatch',
    'BoundaryCurve',
    'RegionSpec',
    'RadonMeasure',
    'ac_pairing',
    'dirac_pairing',
    'inflow_pairing',
    'pair',
    'inflow_term',
    'tau_factor_pairing',
]


class MeasureError(Exception):
    pass


class SupportOutsideWindow(MeasureError):
    pass


class FlavorMismatch(MeasureError):
    pass


@dataclass(frozen=True)
class BoundaryCurve:
    "g(x) = factor * profile(x)"
    profile: object
    factor: float = 1.0

    def __call__(self, x):
        return self.factor * self.profile(x)

    def values(self, x):
        b, db, _ = self.profile.eval(x)
        return self.factor * b, self.factor * db

    @property
    def end(self):
        return self.profile.domain_end

    @property
    def spec(self):
        if self.factor == 1.0:
            return self.profile.spec
        return '%r*(%s)' % (self.factor, self.profile.spec)


@dataclass(frozen=True)
class RegionSpec:
    """
    kind  - above_curve_2d: {y > g(x), x >= 0}
            outside_curve_axisym: {r > g(x), x >= 0} in the meridian half plane
    curve - the body boundary g
    x_max, y_max - test function supports must stay below these
    """
    kind: str
    curve: BoundaryCurve
    x_max: float
    y_max: float

    def __post_init__(self):
        if self.kind not in REGION_KINDS:
            raise MeasureError('Unknown region kind %r' % self.kind)

    @classmethod
    def over(cls, profile, factor=1.0, axisymmetric=False, y_max=None):
        curve = BoundaryCurve(profile, float(factor))
        x_max = profile.domain_end
        if y_max is None:
            y_max = curve(x_max) + x_max
        kind = OUTSIDE_CURVE_AXISYM if axisymmetric else ABOVE_CURVE
        return cls(kind, curve, x_max, float(y_max))

    @property
    def axisymmetric(self):
        return self.kind == OUTSIDE_CURVE_AXISYM

    def scaled(self):
        "The same region in the stretched coordinate y / factor"
        factor = self.curve.factor
        return replace(self, curve=BoundaryCurve(self.curve.profile, 1.0), y_max=self.y_max / factor)

    def check_support(self, phi):
        (x0, y0), (rx, ry) = phi.center, phi.radii
        slack = 1e-12 * max(1.0, self.x_max, self.y_max)
        if x0 + rx > self.x_max + slack or y0 + ry > self.y_max + slack:
            raise SupportOutsideWindow(
                'Support of bump at (%g, %g) leaves the window [0, %g] x [0, %g]'
                % (x0, y0, self.x_max, self.y_max))

    def x_window(self, phi):
        lo, hi = phi.x_extent()
        lo = max(0.0, lo)
        hi = min(self.x_max, hi)
        if hi <= lo:
            return None
        return lo, hi

    def as_dict(self):
        return {'kind': self.kind, 'curve': self.curve.spec, 'x_max': self.x_max, 'y_max': self.y_max}


def _constant(value):
    return isinstance(value, (int, float, np.floating))


class RadonMeasure(object):
    """Absolutely continuous density on a region plus a weighted Dirac
    measure on the region's boundary curve.

    ac     - constant or callable (x, y) -> density relative to the area
             element of the flavor (dx dy, or r dx dr for axisym flavors)
    weight - callable x -> weight of the Dirac part, or None
    """

    def __init__(self, region, flavor, ac=0.0, weight=None, label=''):
        if flavor not in FLAVORS:
            raise FlavorMismatch('Unknown flavor %r' % flavor)
        if (flavor in AXISYM_FLAVORS) != region.axisymmetric:
            raise FlavorMismatch('Flavor %s does not fit a %s region' % (flavor, region.kind))
        self.region = region
        self.flavor = flavor
        self.ac = float(ac) if _constant(ac) else ac
        self.weight = weight
        self.label = label

    @property
    def axisymmetric(self):
        return self.flavor in AXISYM_FLAVORS

    @property
    def ac_constant(self):
        "The AC density when it is constant, else None"
        return self.ac if _constant(self.ac) else None

    @property
    def has_ac(self):
        return not (_constant(self.ac) and self.ac == 0.0)

    def density(self, x, y):
        if _constant(self.ac):
            return self.ac
        return self.ac(x, y)

    def weight_at(self, x):
        if self.weight is None:
            return np.zeros_like(np.asarray(x, dtype=float))
        return self.weight(x)

    def _combine(self, other, alpha, beta):
        if not isinstance(other, RadonMeasure):
            return NotImplemented
        if other.flavor != self.flavor or other.region != self.region:
            raise FlavorMismatch('Cannot combine %s and %s measures over different regions'
                                 % (self.flavor, other.flavor))
        if _constant(self.ac) and _constant(other.ac):
            ac = alpha * self.ac + beta * other.ac
        else:
            ac = lambda x, y: alpha * self.density(x, y) + beta * other.density(x, y)
        if self.weight is None and other.weight is None:
            weight = None
        else:
            weight = lambda x: alpha * self.weight_at(x) + beta * other.weight_at(x)
        return RadonMeasure(self.region, self.flavor, ac, weight)

    def __add__(self, other):
        return self._combine(other, 1.0, 1.0)

    def __sub__(self, other):
        return self._combine(other, 1.0, -1.0)

    def __mul__(self, alpha):
        if not _constant(alpha):
            return NotImplemented
        return self._combine(self, float(alpha), 0.0)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def as_dict(self, grid=None):
        data = {
            'label': self.label,
            'flavor': self.flavor,
            'region': self.region.as_dict(),
            'ac': self.ac if _constant(self.ac) else 'callable',
        }
        if grid is not None:
            grid = np.asarray(grid, dtype=float)
            data['weights'] = {'x': grid.tolist(), 'w': np.asarray(self.weight_at(grid)).tolist()}
        return data

    def __repr__(self):
        return '<RadonMeasure %s %s>' % (self.flavor, self.label or self.region.curve.spec)


@lru_cache(maxsize=4096)
def curve_crossings(curve, phi, lo, hi):
    "Abscissae in (lo, hi) where g crosses the boundary of phi's support"
    (x0, y0), (rx, ry) = phi.center, phi.radii

    def h(x):
        return ((x - x0) / rx)**2 + ((curve(x) - y0) / ry)**2 - 1

    xs = np.linspace(lo, hi, CROSSING_SAMPLES + 1)
    values = h(xs)
    roots = []
    for a, b, fa, fb in zip(xs[:-1], xs[1:], values[:-1], values[1:]):
        if fa == 0.0 and a > lo:
            roots.append(float(a))
        elif fa * fb < 0:
            roots.append(optimize.brentq(h, a, b, xtol=CROSSING_XTOL))
    return tuple(roots)


def ac_pairing(m, phi, deriv=NONE, cfg=None):
    """AC part of <m, psi> with psi = phi, d_x phi or d_y phi

    Outer adaptive integral in x, split where the curve enters or leaves the
    support; inner Gauss-Legendre integral in y (or r) from max(g, bottom)
    to the top of the support, exact for the polynomial bump.
    """
    region = m.region
    region.check_support(phi)
    if not m.has_ac:
        return 0.0, 0.0
    unit = phi.unit()
    window = region.x_window(unit)
    if window is None:
        return 0.0, 0.0
    lo, hi = window
    index = _DERIV_INDEX[deriv]
    nodes = unit.order + INNER_EXTRA_NODES
    axisym = m.axisymmetric

    def inner(x):
        bottom, top = unit.y_extent(x)
        lower = max(region.curve(x), float(bottom))
        if lower >= top:
            return 0.0

        def g(y):
            value = unit.evaluate(x, y)[index] * m.density(x, y)
            return value * y if axisym else value

        return fixed_gauss(g, lower, float(top), nodes)

    points = curve_crossings(region.curve, unit, lo, hi)
    value, error = integrate_1d(inner, lo, hi, cfg, points=points)
    return phi.amplitude * value, abs(phi.amplitude) * error


def dirac_pairing(m, phi, deriv=NONE, cfg=None):
    "Dirac part: integral of w(x) psi(x, g(x)) sqrt(1 + g'(x)^2) [g(x)] dx"
    region = m.region
    region.check_support(phi)
    if m.weight is None:
        return 0.0, 0.0
    unit = phi.unit()
    window = region.x_window(unit)
    if window is None:
        return 0.0, 0.0
    lo, hi = window
    index = _DERIV_INDEX[deriv]
    axisym = m.axisymmetric
    curve = region.curve

    def integrand(x):
        g, dg = curve.values(x)
        psi = unit.evaluate(x, g)[index]
        if psi == 0.0:
            return 0.0
        arc = np.sqrt(1 + dg**2)
        if axisym:
            arc = arc * g
        return m.weight_at(x) * psi * arc

    edges = [lo] + list(curve_crossings(curve, unit, lo, hi)) + [hi]
    total = 0.0
    error = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (a + b)
        if not unit.inside(mid, curve(mid)):
            continue
        value, err = integrate_1d(integrand, a, b, cfg)
        total += value
        error += err
    return phi.amplitude * total, abs(phi.amplitude) * error


def inflow_pairing(c, phi, flavor, cfg=None):
    "c times the integral of phi(0, y) [y] dy over y > 0"
    if flavor not in FLAVORS:
        raise FlavorMismatch('Unknown flavor %r' % flavor)
    if c == 0.0:
        return 0.0, 0.0
    unit = phi.unit()
    lo, hi = unit.x_extent()
    if not lo < 0.0 < hi:
        return 0.0, 0.0
    bottom, top = unit.y_extent(0.0)
    lower = max(0.0, float(bottom))
    if lower >= top:
        return 0.0, 0.0
    axisym = flavor in AXISYM_FLAVORS

    def g(y):
        value = unit(0.0, y)
        return value * y if axisym else value

    value, error = integrate_1d(g, lower, float(top), cfg)
    return c * phi.amplitude * value, abs(c * phi.amplitude) * error


def pair(m, phi, deriv=NONE, cfg=None):
    return ac_pairing(m, phi, deriv, cfg)[0] + dirac_pairing(m, phi, deriv, cfg)[0]


def inflow_term(c, phi, flavor, cfg=None):
    return inflow_pairing(c, phi, flavor, cfg)[0]


def tau_factor_pairing(rho, phi_bar, tau, rho_inf=None, cfg=None):
    """(lhs, rhs) of the change of variables y = tau * y_bar for a density measure

    lhs pairs the dimensional density with phi_bar(x, y / tau), divided by
    rho_inf. rhs is tau (planar) or tau^2 (axisymmetric) times the pairing
    of the stretched measure with phi_bar, whose Dirac weight is
    w_rho / (tau rho_inf) along the stretched curve.
    """
    if rho.flavor not in (PLANAR, AXISYM):
        raise FlavorMismatch('Expected a dimensional density, got %s' % rho.flavor)
    region = rho.region
    if not np.isclose(region.curve.factor, tau, rtol=1e-14, atol=0.0):
        raise MeasureError('Region curve is scaled by %r, not tau=%r' % (region.curve.factor, tau))
    if rho_inf is None:
        rho_inf = rho.ac_constant
    if not rho_inf:
        raise MeasureError('rho_inf is needed to normalize the pairing')
    profile = region.curve.profile

    lhs = pair(rho, phi_bar.to_physical(tau), NONE, cfg) / rho_inf

    if rho.ac_constant is not None:
        ac = rho.ac_constant / rho_inf
    else:
        ac = lambda x, y: rho.density(x, tau * y) / rho_inf
    weight = None
    if rho.weight is not None:
        def weight(x):
            db = profile.eval(x)[1]
            stretch = np.sqrt(1 + tau**2 * db**2) / np.sqrt(1 + db**2)
            return rho.weight_at(x) / (tau * rho_inf) * stretch
    flavor = AXISYM_SCALED if rho.axisymmetric else PLANAR_SCALED
    stretched = RadonMeasure(region.scaled(), flavor, ac, weight, label='stretched density')
    factor = tau**2 if rho.axisymmetric else tau
    rhs = factor * pair(stretched, phi_bar, NONE, cfg)
    return lhs, rhs
