import logging

import numpy as np

from hyperslender.flow_state import check_similarity
from hyperslender.quadrature import h_antiderivative, m_antiderivative

_LOG = logging.getLogger(__name__)

DEFAULT_DOMAIN_END = 5.0
DEFAULT_GRID_POINTS = 2048
MONOTONICITY_GRID_POINTS = 10000

__all__ = [
    'Registry',
    'GeometryError',
    'NonMonotone',
    'BadCoefficient',
    'BadExponent',
    'OutOfDomain',
    'BadProfileSpec',
    'AdmissibilityVerdict',
    'make_profile',
    'parse_profile',
    'admissible_A',
    'admissible_B',
    'admissible_A3',
    'admissible_B3',
]


class GeometryError(Exception):
    pass


class NonMonotone(GeometryError):
    pass


class BadCoefficient(GeometryError):
    pass


class BadExponent(BadCoefficient):
    pass


class OutOfDomain(GeometryError):
    pass


class BadProfileSpec(GeometryError):
    pass


class AbstractProfile(object):
    """Do not use directly.

    A generator curve b(x) (or f(x) for cones) on [0, domain_end] with
    b(0) = 0 and exact first and second derivatives.
    """
    name = 'abstract'
    family = 'abstract'
    parameters = ()
    defaults = {}

    def __init__(self, coefficients=(), domain_end=DEFAULT_DOMAIN_END, **kwargs):
        domain_end = float(domain_end)
        if not domain_end > 0:
            raise OutOfDomain('domain_end must be positive, got %r' % domain_end)
        self.domain_end = domain_end
        values = dict(self.defaults)
        values.update(zip(self.parameters, coefficients))
        for key, value in kwargs.items():
            if key not in self.parameters:
                raise BadProfileSpec('%s has no coefficient %r' % (self.name, key))
            values[key] = value
        missing = [p for p in self.parameters if p not in values]
        if missing:
            raise BadProfileSpec('%s is missing %s' % (self.name, ', '.join(missing)))
        self.coefficients = tuple(float(values[p]) for p in self.parameters)
        if not all(np.isfinite(self.coefficients)):
            raise BadCoefficient('Coefficients must be finite: %r' % (self.coefficients,))
        for key, value in zip(self.parameters, self.coefficients):
            setattr(self, key, value)
        self.validate()
        self.check_monotone()

    def validate(self):
        pass

    def values(self, x):
        raise NotImplementedError

    def curvature_moment(self, x):
        "Closed form of the integral of b b' b'' from 0 to x, if known"
        return None

    def cone_moment(self, x):
        "Closed form of the integral of f^2 f' f'' from 0 to x, if known"
        return None

    def eval(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < 0) or np.any(x > self.domain_end * (1 + 1e-12)):
            raise OutOfDomain('x outside [0, %g]' % self.domain_end)
        b, db, ddb = self.values(x)
        if x.ndim == 0:
            return float(b), float(db), float(ddb)
        return b, db, ddb

    def __call__(self, x):
        return self.eval(x)[0]

    def derivative(self, x):
        return self.eval(x)[1]

    def check_monotone(self, points=MONOTONICITY_GRID_POINTS):
        grid = np.linspace(0.0, self.domain_end, points + 1)[1:]
        b, db, ddb = self.values(grid)
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(db)) and np.all(np.isfinite(ddb))):
            raise NonMonotone('%s is not finite on (0, %g]' % (self.spec, self.domain_end))
        if np.any(db <= 0):
            worst = grid[np.argmin(db)]
            raise NonMonotone("%s has b' <= 0 at x=%g" % (self.spec, worst))
        b0 = self.values(np.zeros(1))[0][0]
        if b0 != 0.0:
            raise NonMonotone('%s has b(0) = %r' % (self.spec, b0))

    @property
    def spec(self):
        args = ','.join('%s=%s' % (k, repr(v)) for k, v in zip(self.parameters, self.coefficients))
        return '%s:%s' % (self.name, args) if args else self.name

    def as_dict(self):
        return {'family': self.family, 'spec': self.spec, 'domain_end': self.domain_end}

    def __repr__(self):
        return '<%s %s on [0, %g]>' % (self.__class__.__name__, self.spec, self.domain_end)


class LinearProfile(AbstractProfile):
    name = 'linear'
    family = 'linear'
    parameters = ('a',)
    defaults = {'a': 1.0}

    def values(self, x):
        return self.a * x, np.full_like(x, self.a), np.zeros_like(x)

    def curvature_moment(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def cone_moment(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))


class PowerProfile(AbstractProfile):
    """a * x**p with p == 1 or p >= 2, so that b'' stays bounded at 0"""
    name = 'power'
    family = 'power'
    parameters = ('a', 'p')
    defaults = {'a': 1.0, 'p': 2.0}

    def validate(self):
        if self.p != 1.0 and self.p < 2.0:
            raise BadExponent('Power exponent must be 1 or >= 2, got %g' % self.p)

    def values(self, x):
        a, p = self.a, self.p
        b = a * x**p
        db = a * p * x**(p - 1)
        if p == 1.0:
            ddb = np.zeros_like(x)
        else:
            ddb = a * p * (p - 1) * x**(p - 2)
        return b, db, ddb

    def curvature_moment(self, x):
        a, p = self.a, self.p
        x = np.asarray(x, dtype=float)
        return a**3 * p**2 * (p - 1) * x**(3 * p - 2) / (3 * p - 2)

    def cone_moment(self, x):
        a, p = self.a, self.p
        x = np.asarray(x, dtype=float)
        return a**4 * p**2 * (p - 1) * x**(4 * p - 2) / (4 * p - 2)


class ExponentialProfile(AbstractProfile):
    "a * (exp(k x) - 1)"
    name = 'exp'
    family = 'exponential'
    parameters = ('a', 'k')
    defaults = {'a': 1.0, 'k': 1.0}

    def validate(self):
        if self.k == 0.0:
            raise BadCoefficient('exp rate k must be nonzero')

    def values(self, x):
        a, k = self.a, self.k
        e = np.exp(k * x)
        return a * np.expm1(k * x), a * k * e, a * k * k * e

    def curvature_moment(self, x):
        a, k = self.a, self.k
        x = np.asarray(x, dtype=float)
        return a**3 * k**2 * (np.expm1(3 * k * x) / 3 - np.expm1(2 * k * x) / 2)

    def cone_moment(self, x):
        a, k = self.a, self.k
        x = np.asarray(x, dtype=float)
        return a**4 * k**3 * (np.expm1(4 * k * x) / 4
                              - 2 * np.expm1(3 * k * x) / 3
                              + np.expm1(2 * k * x) / 2)


class LogarithmicProfile(AbstractProfile):
    "a * log(1 + k x)"
    name = 'log'
    family = 'logarithmic'
    parameters = ('a', 'k')
    defaults = {'a': 1.0, 'k': 1.0}

    def validate(self):
        if self.k <= 0.0:
            raise BadCoefficient('log rate k must be positive, got %g' % self.k)

    def values(self, x):
        a, k = self.a, self.k
        s = 1 + k * x
        return a * np.log1p(k * x), a * k / s, -a * k * k / s**2

    def curvature_moment(self, x):
        a, k = self.a, self.k
        s = 1 + k * np.asarray(x, dtype=float)
        ls = np.log(s)
        primitive = -ls / (2 * s**2) - 1 / (4 * s**2)
        return -a**3 * k**2 * (primitive + 0.25)

    def cone_moment(self, x):
        a, k = self.a, self.k
        s = 1 + k * np.asarray(x, dtype=float)
        ls = np.log(s)
        primitive = -ls**2 / (2 * s**2) - ls / (2 * s**2) - 1 / (4 * s**2)
        return -a**4 * k**2 * (primitive + 0.25)


class SumProfile(AbstractProfile):
    "Sum of profiles sharing one domain"
    name = 'sum'
    family = 'sum'

    def __init__(self, terms=(), domain_end=DEFAULT_DOMAIN_END, **kwargs):
        if kwargs:
            raise BadProfileSpec('sum takes terms, not coefficients')
        if not terms:
            raise BadProfileSpec('sum needs at least one term')
        self.terms = tuple(terms)
        for term in self.terms:
            if isinstance(term, SumProfile):
                raise BadProfileSpec('sum terms cannot be sums')
        super(SumProfile, self).__init__((), domain_end=domain_end)

    def values(self, x):
        b = np.zeros_like(x)
        db = np.zeros_like(x)
        ddb = np.zeros_like(x)
        for term in self.terms:
            tb, tdb, tddb = term.values(x)
            b = b + tb
            db = db + tdb
            ddb = ddb + tddb
        return b, db, ddb

    @property
    def spec(self):
        return 'sum:' + '+'.join(term.spec for term in self.terms)


class Registry(object):
    _profiles = {}

    def register(self, name, profile):
        self._profiles[name] = profile

    def unregister(self, name):
        if name in self.available():
            del self._profiles[name]

    def available(self):
        return list(self._profiles.keys())

    def get(self, profile, fallback=None):
        found = self._profiles.get(profile, fallback)
        if found == fallback and fallback is None:
            raise BadProfileSpec('Invalid profile family %r' % profile)
        return found

    def reset(self):
        reset()


registry = Registry()

DEFAULT_PROFILES = (
    LinearProfile,
    PowerProfile,
    ExponentialProfile,
    LogarithmicProfile,
    SumProfile,
)

DEFAULT_PROFILE_NAMES = []


def reset():
    global DEFAULT_PROFILE_NAMES
    DEFAULT_PROFILE_NAMES = []
    for profile in DEFAULT_PROFILES:
        for name in (profile.name, profile.family):
            registry.register(name, profile)
            if name not in DEFAULT_PROFILE_NAMES:
                DEFAULT_PROFILE_NAMES.append(name)
    for name in registry.available():
        if name not in DEFAULT_PROFILE_NAMES:
            registry.unregister(name)


reset()


def make_profile(family, coefficients=(), domain_end=DEFAULT_DOMAIN_END):
    "Build a profile of a registered family; sum takes a list of profiles"
    cls = registry.get(family)
    if issubclass(cls, SumProfile):
        return cls(terms=coefficients, domain_end=domain_end)
    return cls(coefficients, domain_end=domain_end)


def _parse_term(text, domain_end):
    family, _, args = text.strip().partition(':')
    cls = registry.get(family.strip(), False)
    if not cls:
        raise BadProfileSpec('Unknown profile family %r' % family)
    kwargs = {}
    if args.strip():
        for item in args.split(','):
            key, sep, value = item.partition('=')
            if not sep:
                raise BadProfileSpec('Expected key=value, got %r' % item)
            try:
                kwargs[key.strip()] = float(value)
            except ValueError:
                raise BadProfileSpec('Not a number: %r' % value)
    return cls(domain_end=domain_end, **kwargs)


def parse_profile(spec, domain_end=DEFAULT_DOMAIN_END):
    """Parse `family:key=value,...` or `sum:term+term+...`

    >>> parse_profile('power:a=1,p=2').spec
    'power:a=1.0,p=2.0'
    """
    family, _, rest = spec.strip().partition(':')
    if family.strip() == SumProfile.name:
        terms = [_parse_term(part, domain_end) for part in rest.split('+') if part.strip()]
        return SumProfile(terms=terms, domain_end=domain_end)
    return _parse_term(spec, domain_end)


class AdmissibilityVerdict(object):
    """
    admissible   - outcome of the relevant inequality on the whole grid
    worst_margin - grid minimum of the inequality's left-hand side
    worst_x      - where that minimum sits
    strict       - whether the inequality is strict (> 0) or not (>= 0)
    """

    def __init__(self, problem, worst_margin, worst_x, strict=True):
        self.problem = problem
        self.worst_margin = float(worst_margin)
        self.worst_x = float(worst_x)
        self.strict = strict
        if strict:
            self.admissible = self.worst_margin > 0
        else:
            self.admissible = self.worst_margin >= 0

    def __bool__(self):
        return self.admissible

    def as_dict(self):
        return {
            'problem': self.problem,
            'admissible': self.admissible,
            'worst_margin': self.worst_margin,
            'worst_x': self.worst_x,
            'strict': self.strict,
        }

    def __repr__(self):
        return '<AdmissibilityVerdict %s %s margin=%g at x=%g>' % (
            self.problem, self.admissible, self.worst_margin, self.worst_x)


def _verdict(problem, grid, margin, strict=True):
    i = int(np.argmin(margin))
    verdict = AdmissibilityVerdict(problem, margin[i], grid[i], strict=strict)
    _LOG.debug('%r', verdict)
    return verdict


def _closed_grid(profile, points):
    return np.linspace(0.0, profile.domain_end, points)


def _open_grid(profile, points):
    return np.linspace(0.0, profile.domain_end, points + 1)[1:]


def admissible_A(profile, tau, gamma, K, points=DEFAULT_GRID_POINTS, cfg=None):
    check_similarity(gamma, K, tau, allow_zero_tau=True)
    grid = _closed_grid(profile, points)
    b, db, ddb = profile.eval(grid)
    s = np.sqrt(1 + tau**2 * db**2)
    H = h_antiderivative(profile, tau, cfg)(grid)
    H[0] = 0.0
    margin = s**3 / (gamma * K**2) + ddb * H + db**2 * s
    return _verdict('A', grid, margin)


def admissible_B(profile, gamma, K, points=DEFAULT_GRID_POINTS):
    check_similarity(gamma, K)
    grid = _closed_grid(profile, points)
    b, db, ddb = profile.eval(grid)
    margin = 1 / (gamma * K**2) + db**2 + b * ddb
    return _verdict('B', grid, margin)


def admissible_A3(profile, tau, gamma, K, points=DEFAULT_GRID_POINTS, cfg=None):
    check_similarity(gamma, K, tau, allow_zero_tau=True)
    grid = _open_grid(profile, points)
    f, df, ddf = profile.eval(grid)
    s = np.sqrt(1 + tau**2 * df**2)
    M = m_antiderivative(profile, tau, cfg)(grid)
    margin = f * s**3 + gamma * K**2 * (ddf * M + s * f * df**2)
    return _verdict('A3', grid, margin, strict=False)


def admissible_B3(profile, gamma, K, points=DEFAULT_GRID_POINTS):
    check_similarity(gamma, K)
    grid = _open_grid(profile, points)
    f, df, ddf = profile.eval(grid)
    margin = 2 * f + gamma * K**2 * (2 * f * df**2 + f**2 * ddf)
    return _verdict('B3', grid, margin)
