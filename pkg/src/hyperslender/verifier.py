import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from hyperslender import settings
from hyperslender.closed_forms import EQUATIONS, solve_A, solve_A3
from hyperslender.measure import (
    D_X,
    D_Y,
    NONE,
    ac_pairing,
    curve_crossings,
    dirac_pairing,
    inflow_pairing,
    tau_factor_pairing,
)
from hyperslender.quadrature import DEFAULT_BUMP_ORDER, DEFAULT_CONFIG, make_bump

_LOG = logging.getLogger(__name__)

NORMALIZATION_FLOOR = 1e-30
DEFAULT_RESIDUAL_TOL = 1e-6
DEFAULT_SCALE_RANGE = (0.1, 0.5)

BOUNDARY = 'boundary'
INTERIOR = 'interior'
INFLOW = 'inflow'
BUMP_CLASSES = (BOUNDARY, INTERIOR, INFLOW)

__all__ = [
    'VerificationError',
    'Term',
    'BumpResidual',
    'ResidualReport',
    'TauIdentityResult',
    'equation_terms',
    'evaluate_terms',
    'classify_bump',
    'verify_weak',
    'verify_tau_identity',
    'sample_bumps',
    'check_scale_range',
    'summarize',
]


class VerificationError(Exception):
    pass


@dataclass(frozen=True)
class Term:
    label: str
    measure: object
    derivative: str = NONE


@dataclass
class BumpResidual:
    index: int
    bump: object
    kind: str
    raw: float
    normalized: float
    terms: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            'index': self.index,
            'bump': self.bump.as_dict(),
            'class': self.kind,
            'raw': self.raw,
            'normalized': self.normalized,
            'terms': self.terms,
        }


@dataclass
class ResidualReport:
    problem: str
    equation: str
    residuals: list = field(default_factory=list)

    @property
    def max_normalized(self):
        return max((r.normalized for r in self.residuals), default=0.0)

    @property
    def coverage(self):
        counts = dict((kind, 0) for kind in BUMP_CLASSES)
        for residual in self.residuals:
            counts[residual.kind] += 1
        return counts

    def passed(self, tol=DEFAULT_RESIDUAL_TOL):
        return self.max_normalized <= tol

    def check(self, tol=DEFAULT_RESIDUAL_TOL):
        if not self.passed(tol):
            worst = max(self.residuals, key=lambda r: r.normalized)
            raise VerificationError(
                'Problem %s, %s balance: normalized residual %g above %g at bump %d'
                % (self.problem, self.equation, worst.normalized, tol, worst.index))

    def as_dict(self, tol=DEFAULT_RESIDUAL_TOL):
        return {
            'problem': self.problem,
            'equation': self.equation,
            'max_normalized': self.max_normalized,
            'passed': self.passed(tol),
            'coverage': self.coverage,
            'residuals': [r.as_dict() for r in self.residuals],
        }


@dataclass(frozen=True)
class TauIdentityResult:
    bump: object
    lhs: float
    rhs: float

    @property
    def rel_err(self):
        scale = max(abs(self.lhs), abs(self.rhs))
        if scale == 0.0:
            return 0.0
        return abs(self.lhs - self.rhs) / scale

    def as_dict(self):
        return {'bump': self.bump.as_dict(), 'lhs': self.lhs, 'rhs': self.rhs, 'rel_err': self.rel_err}


def equation_terms(sol):
    """equation -> (terms, inflow constant) of the weak balance laws of sol

    Every term enters with a plus sign; the boundary pressure uses the
    normal pointing into the flow region.
    """
    c = sol.components
    terms = {
        'mass': [
            Term('mass_x', c['mass_x'], D_X),
            Term('mass_y', c['mass_y'], D_Y),
        ],
        'mom_x': [
            Term('momx_x', c['momx_x'], D_X),
            Term('pressure', c['pressure'], D_X),
            Term('momx_y', c['momx_y'], D_Y),
            Term('boundary_pressure', sol.boundary_pressure(0), NONE),
        ],
        'mom_y': [
            Term('momy_x', c['momy_x'], D_X),
            Term('momy_y', c['momy_y'], D_Y),
            Term('pressure', c['pressure'], D_Y),
            Term('boundary_pressure', sol.boundary_pressure(1), NONE),
        ],
        'energy': [
            Term('energy_x', c['energy_x'], D_X),
            Term('energy_y', c['energy_y'], D_Y),
        ],
    }
    if sol.axisymmetric:
        terms['mom_y'].append(Term('pressure_zeroth', c['pressure_zeroth'], NONE))
    return dict((eq, (terms[eq], sol.inflow[eq])) for eq in EQUATIONS)


def _snap(value, error, cfg):
    "Values within the quadrature resolution count as exact zeros"
    if abs(value) <= max(error, cfg.abs_tol):
        return 0.0
    return value


def evaluate_terms(terms, inflow, flavor, phi, cfg=None):
    """(raw, normalized, term values) of one balance law against phi

    Terms are evaluated for the unit-amplitude bump and rescaled, so the
    normalized residual does not depend on the amplitude of phi.
    """
    cfg = cfg or DEFAULT_CONFIG
    unit = phi.unit()
    values = {}
    for term in terms:
        ac = _snap(*ac_pairing(term.measure, unit, term.derivative, cfg), cfg)
        dirac = _snap(*dirac_pairing(term.measure, unit, term.derivative, cfg), cfg)
        values['%s.ac' % term.label] = ac
        values['%s.dirac' % term.label] = dirac
    values['inflow'] = _snap(*inflow_pairing(inflow, unit, flavor, cfg), cfg)
    total = sum(values.values())
    magnitude = sum(abs(v) for v in values.values())
    normalized = abs(total) / (magnitude + NORMALIZATION_FLOOR)
    amplitude = phi.amplitude
    values = dict((label, amplitude * v) for label, v in values.items())
    return amplitude * total, normalized, values


def classify_bump(region, phi):
    lo, hi = phi.x_extent()
    if lo < 0.0:
        return INFLOW
    x0 = phi.center[0]
    curve = region.curve
    window = region.x_window(phi)
    if phi.unit().inside(x0, curve(x0)) or (window and curve_crossings(curve, phi.unit(), *window)):
        return BOUNDARY
    return INTERIOR


def _verify_bump(sol, equations, index, phi, cfg):
    kind = classify_bump(sol.region, phi)
    results = {}
    for eq, (terms, inflow) in equations.items():
        raw, normalized, values = evaluate_terms(terms, inflow, sol.flavor, phi, cfg)
        results[eq] = BumpResidual(index, phi, kind, raw, normalized, values)
    _LOG.debug('Bump %d (%s): %s', index, kind,
               ', '.join('%s=%.3g' % (eq, r.normalized) for eq, r in results.items()))
    return index, results


def verify_weak(sol, bumps, cfg=None, workers=None):
    """Residuals of each balance law of sol for every bump

    Returns one ResidualReport per equation, residuals ordered by bump index.
    """
    bumps = list(bumps)
    for phi in bumps:
        sol.region.check_support(phi)
    equations = equation_terms(sol)
    workers = workers or settings.worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_verify_bump, sol, equations, i, phi, cfg)
                       for i, phi in enumerate(bumps)]
            outcomes = [f.result() for f in futures]
    else:
        outcomes = [_verify_bump(sol, equations, i, phi, cfg) for i, phi in enumerate(bumps)]
    outcomes.sort(key=lambda outcome: outcome[0])
    reports = []
    for eq in EQUATIONS:
        report = ResidualReport(sol.problem, eq, [results[eq] for _, results in outcomes])
        _LOG.info('Problem %s %s: max normalized residual %g over %d bumps',
                  sol.problem, eq, report.max_normalized, len(bumps))
        reports.append(report)
    return reports


def summarize(sol, reports, tol=DEFAULT_RESIDUAL_TOL):
    return {
        'problem': sol.problem,
        'params': sol.as_dict(),
        'tolerance': tol,
        'max_normalized': dict((r.equation, r.max_normalized) for r in reports),
        'passed': all(r.passed(tol) for r in reports),
        'equations': [r.as_dict(tol) for r in reports],
    }


def verify_tau_identity(profile, state, bumps, axisymmetric=False, cfg=None):
    """Compare the dimensional density measure with its stretched image

    bumps live in the stretched plane (x, y / tau).
    """
    sol = solve_A3(profile, state, cfg) if axisymmetric else solve_A(profile, state, cfg)
    results = []
    for phi in bumps:
        lhs, rhs = tau_factor_pairing(sol.density, phi, state.tau, state.rho_inf, cfg)
        results.append(TauIdentityResult(phi, lhs, rhs))
    worst = max((r.rel_err for r in results), default=0.0)
    _LOG.info('Stretching identity for %s: worst relative error %g', profile.spec, worst)
    return results


def check_scale_range(scale_range):
    "(low, high) with 0 < low <= high, or VerificationError"
    try:
        low, high = (float(s) for s in scale_range)
    except (TypeError, ValueError):
        raise VerificationError('Scale range must be two numbers, got %r' % (scale_range,))
    if not (0.0 < low <= high and np.isfinite(high)):
        raise VerificationError('Scale range needs 0 < low <= high, got %r' % (scale_range,))
    return low, high


def sample_bumps(region, n, seed, scale_range=DEFAULT_SCALE_RANGE, order=DEFAULT_BUMP_ORDER):
    """Seeded bumps, cycling through supports that straddle the body curve,
    lie inside the flow region and straddle the inflow line x = 0

    Radii are capped so that every support fits in a short window.
    """
    if n < 1:
        raise VerificationError('Need at least one bump, got %r' % n)
    low, high = check_scale_range(scale_range)
    rng = np.random.default_rng(seed)
    curve = region.curve
    end = region.x_max
    headroom = region.y_max - curve(end)
    bumps = []
    for i in range(n):
        rx, ry = rng.uniform(low, high, size=2)
        rx = min(rx, end / 2)
        if headroom > 0:
            ry = min(ry, headroom / 3.1)
        kind = BUMP_CLASSES[i % 3]
        if kind == BOUNDARY:
            xc = rng.uniform(rx, end - rx)
            yc = curve(xc) + rng.uniform(-0.5, 0.5) * ry
        elif kind == INTERIOR:
            xc = rng.uniform(rx, end - rx)
            yc = curve(xc + rx) + ry * (1.1 + rng.uniform(0.0, 1.0))
        else:
            xc = rng.uniform(-0.5, 0.5) * rx
            yc = rng.uniform(0.0, 2.0) * ry
        bumps.append(make_bump((xc, yc), (rx, ry), order))
    return bumps
