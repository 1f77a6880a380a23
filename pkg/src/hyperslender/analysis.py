"""Hypersonic similarity sweeps and the eigenstructure of the
small-disturbance system in the unknowns U = (rho, u, v, E)
"""
import csv
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from hyperslender import settings
from hyperslender.closed_forms import NotAdmissible, solve
from hyperslender.flow_state import BadParameter, scaled_upstream, upstream

_LOG = logging.getLogger(__name__)

QUANTITIES = ('u_trace', 'v_trace', 'E_trace', 'density_weight_ratio', 'pressure_weight')
CSV_COLUMNS = ('tau', 'sup_err_u', 'sup_err_v', 'sup_err_E', 'sup_err_density_ratio', 'sup_err_wp')

DEFAULT_GRID_START = 1e-3
DEFAULT_GRID_POINTS = 512
FD_RELATIVE_STEP = 1e-6
DEGENERACY_TOL = 1e-6

GENUINELY_NONLINEAR = 'genuinely_nonlinear'
LINEARLY_DEGENERATE = 'linearly_degenerate'

__all__ = [
    'AnalysisError',
    'NonHyperbolic',
    'HSDState',
    'EigenReport',
    'ConvergenceReport',
    'scaled_trace_A',
    'scaled_trace_A3',
    'converge',
    'write_convergence_csv',
    'hsd_flux_jacobians',
    'char_poly',
    'char_poly_closed_form',
    'hsd_eigen',
    'characteristic_field_class',
    'field_value_closed_form',
]


class AnalysisError(Exception):
    pass


class NonHyperbolic(AnalysisError):
    pass


@dataclass(frozen=True)
class HSDState:
    rho: float
    u: float
    v: float
    E: float

    @property
    def q(self):
        "E - 2u - v^2, proportional to the temperature"
        return self.E - 2 * self.u - self.v**2

    def sound_speed(self, gamma):
        c2 = (gamma - 1) * self.q / 2
        if not (c2 > 0 and self.rho > 0):
            raise NonHyperbolic('Sound speed squared %g (rho=%g) is not positive' % (c2, self.rho))
        return math.sqrt(c2)

    def pressure(self, gamma):
        return (gamma - 1) * self.rho * self.q / (2 * gamma)

    def as_array(self):
        return np.array([self.rho, self.u, self.v, self.E])

    @classmethod
    def from_sound_speed(cls, rho, u, v, c, gamma):
        "The state with E chosen so that the sound speed equals c"
        return cls(rho, u, v, 2 * u + v**2 + 2 * c**2 / (gamma - 1))

    def as_dict(self):
        return {'rho': self.rho, 'u': self.u, 'v': self.v, 'E': self.E}


@dataclass
class EigenReport:
    state: HSDState
    gamma: float
    eigenvalues: tuple
    eigenvectors: np.ndarray
    char_fields: list = field(default_factory=list)

    def as_dict(self):
        return {
            'state': self.state.as_dict(),
            'gamma': self.gamma,
            'sound_speed': self.state.sound_speed(self.gamma),
            'eigenvalues': list(self.eigenvalues),
            'eigenvectors': self.eigenvectors.tolist(),
            'char_fields': [{'field': i + 1, 'value': value, 'class': kind}
                            for i, (value, kind) in enumerate(self.char_fields)],
        }


def _finite_or_none(value):
    return value if math.isfinite(value) else None


@dataclass
class ConvergenceReport:
    """
    sup_errors      - per tau, sup over the grid of the deviation from the limit
    endpoint_errors - per tau, the deviation at the nose x = 0, from analytic limits
    admissible      - per tau, whether the slender-body problem could be solved
    """
    quantity: str
    taus: list
    sup_errors: list
    fitted_rate: float
    grid: np.ndarray
    admissible: list = field(default_factory=list)
    endpoint_errors: list = field(default_factory=list)

    @property
    def decreasing(self):
        errors = [e for e in self.sup_errors if math.isfinite(e)]
        return all(b < a for a, b in zip(errors[:-1], errors[1:]))

    @property
    def finite(self):
        "Every error of an admissible tau is a number"
        checked = [e for e, ok in zip(self.sup_errors, self.admissible) if ok]
        checked += [e for e, ok in zip(self.endpoint_errors, self.admissible) if ok]
        return all(math.isfinite(e) for e in checked)

    def as_dict(self):
        return {
            'quantity': self.quantity,
            'taus': list(self.taus),
            'sup_errors': [_finite_or_none(e) for e in self.sup_errors],
            'endpoint_errors': [_finite_or_none(e) for e in self.endpoint_errors],
            'fitted_rate': _finite_or_none(self.fitted_rate),
            'admissible': list(self.admissible),
            'finite': self.finite,
            'grid': {'start': float(self.grid[0]), 'end': float(self.grid[-1]), 'points': len(self.grid)},
        }


def _scaled_traces(sol, x):
    st = sol.state
    u, v, E = sol.traces(x)
    u_bar = (u - st.u_inf) / (st.u_inf * st.tau**2)
    v_bar = v / (st.u_inf * st.tau)
    E_bar = (2 * E - st.u_inf**2) / (st.u_inf**2 * st.tau**2)
    return u_bar, v_bar, E_bar


def scaled_trace_A(profile, K, gamma, tau, x, cfg=None):
    "Traces of problem A on the body, in the small-disturbance scaling"
    return _scaled_traces(solve('A', profile, upstream(K, tau, gamma), cfg), x)


def scaled_trace_A3(profile, K, gamma, tau, x, cfg=None):
    return _scaled_traces(solve('A3', profile, upstream(K, tau, gamma), cfg), x)


def _stretched_density(sol, x):
    "w_rho sqrt(1 + tau^2 b'^2) / (tau rho_inf), to compare with the scaled density"
    st = sol.state
    _, _, arc = sol.shape(x)
    return sol.density_weight(x) * arc / (st.tau * st.rho_inf)


def _density_ratio(sol, x):
    """Stretched density weight over its small-disturbance counterpart

    Both vanish at the nose, where the ratio tends to 1 + tau^2 b'(0)^2.
    """
    b = sol.profile(x)
    limit = b / 2 if sol.axisymmetric else b
    _, dg, _ = sol.shape(0.0)
    positive = limit > 0
    return np.where(positive, _stretched_density(sol, x) / np.where(positive, limit, 1.0), 1 + dg**2)


def _deviations(sol, reference, x):
    st = sol.state
    u, v, E = _scaled_traces(sol, x)
    u_ref, v_ref, E_ref = reference.traces(x)
    pressure = sol.pressure_weight(x) / (st.gamma * st.p_inf * st.K**2)
    return {
        'u_trace': np.abs(u - u_ref),
        'v_trace': np.abs(v - v_ref),
        'E_trace': np.abs(E - E_ref),
        'density_weight_ratio': np.abs(_density_ratio(sol, x) - 1),
        'pressure_weight': np.abs(pressure - reference.pressure_weight(x)),
    }


def _errors(sol, reference, grid):
    "(sup over grid, value at the nose) per quantity"
    sup = _deviations(sol, reference, grid)
    nose = _deviations(sol, reference, np.zeros(1))
    return (dict((q, float(np.max(sup[q]))) for q in QUANTITIES),
            dict((q, float(nose[q][0])) for q in QUANTITIES))


def _fit_rate(taus, errors):
    "Least-squares slope of log error against log tau, leaving out the largest tau"
    pairs = sorted(zip(taus, errors), reverse=True)[1:]
    pairs = [(t, e) for t, e in pairs if math.isfinite(e) and e > 0]
    if len(pairs) < 2:
        return float('nan')
    t, e = np.log(np.array(pairs)).T
    return float(np.polyfit(t, e, 1)[0])


def default_grid(profile, points=DEFAULT_GRID_POINTS, start=DEFAULT_GRID_START):
    return np.linspace(start, profile.domain_end, points)


def converge(profile, K, gamma, taus, grid=None, axisymmetric=False, cfg=None, workers=None,
             rho_inf=1.0, u_inf=1.0):
    """Sup-norm distance between the scaled slender-body solution and its
    small-disturbance limit along a sequence of slenderness ratios

    The nose x = 0 may be part of the grid; it is also reported on its own
    through the analytic limits.
    """
    taus = [float(t) for t in taus]
    if not taus or any(t <= 0 for t in taus):
        raise BadParameter('Slenderness ratios must be positive: %r' % (taus,))
    grid = default_grid(profile) if grid is None else np.asarray(grid, dtype=float)
    if grid.ndim != 1 or not len(grid):
        raise BadParameter('Need a non-empty one dimensional grid')
    problem, limit_problem = ('A3', 'B3') if axisymmetric else ('A', 'B')
    reference = solve(limit_problem, profile, scaled_upstream(K, gamma), cfg)

    def sweep(tau):
        try:
            sol = solve(problem, profile, upstream(K, tau, gamma, rho_inf, u_inf), cfg)
        except NotAdmissible as exc:
            _LOG.warning('Skipping tau=%g: %s', tau, exc)
            return None
        return _errors(sol, reference, grid)

    workers = workers or settings.worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(sweep, taus))
    else:
        outcomes = [sweep(tau) for tau in taus]

    nan = float('nan')
    reports = []
    for quantity in QUANTITIES:
        errors = [nan if o is None else o[0][quantity] for o in outcomes]
        endpoint = [nan if o is None else o[1][quantity] for o in outcomes]
        report = ConvergenceReport(quantity, taus, errors, _fit_rate(taus, errors), grid,
                                   [o is not None for o in outcomes], endpoint)
        if not report.finite:
            _LOG.error('Non-finite %s errors for %s: %r', quantity, profile.spec, errors)
        reports.append(report)
    _LOG.info('Convergence sweep for %s over %d ratios finished', profile.spec, len(taus))
    return reports


def write_convergence_csv(reports, stream, config=None):
    if config is not None:
        stream.write('# config: %s\n' % json.dumps(config, sort_keys=True))
    by_quantity = dict((r.quantity, r) for r in reports)
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(CSV_COLUMNS)
    taus = reports[0].taus if reports else []
    for i, tau in enumerate(taus):
        writer.writerow([repr(tau)] + [repr(by_quantity[q].sup_errors[i]) for q in QUANTITIES])


def hsd_flux_jacobians(state, gamma):
    """(dW/dU, dH/dU) for the system d_x W(U) + d_y H(U) = 0"""
    rho, u, v, E = state.rho, state.u, state.v, state.E
    q = state.q
    beta = (gamma - 1) / (2 * gamma)
    dW = np.array([
        [1.0, 0.0, 0.0, 0.0],
        [u + beta * q, rho / gamma, (1 - gamma) * rho * v / gamma, beta * rho],
        [v, 0.0, rho, 0.0],
        [E, 0.0, 0.0, rho],
    ])
    dH = np.array([
        [v, 0.0, rho, 0.0],
        [u * v, rho * v, rho * u, 0.0],
        [v**2 + beta * q, (1 - gamma) * rho / gamma, (gamma + 1) * rho * v / gamma, beta * rho],
        [v * E, 0.0, rho * E, rho * v],
    ])
    return dW, dH


def char_poly(state, gamma, lam):
    dW, dH = hsd_flux_jacobians(state, gamma)
    return float(np.linalg.det(lam * dW - dH))


def char_poly_closed_form(state, gamma, lam):
    c = state.sound_speed(gamma)
    d = lam - state.v
    return state.rho**3 / gamma * d**2 * (d**2 - c**2)


def _eigenvalues(rho, u, v, E, gamma):
    c = math.sqrt((gamma - 1) * (E - 2 * u - v**2) / 2)
    return (v - c, v, v, v + c)


def _eigenvectors(state, gamma):
    rho, v, q = state.rho, state.v, state.q
    c = state.sound_speed(gamma)
    return np.array([
        [-rho / c, c - v, 1.0, 0.0],
        [2 * rho / q, 1.0, 0.0, 0.0],
        [-rho / q, 0.0, 0.0, 1.0],
        [rho / c, -v - c, 1.0, 0.0],
    ])


def field_value_closed_form(state, gamma, index):
    "grad(lambda_i) . r_i: (gamma + 1) / 2 for the acoustic fields, 0 otherwise"
    if index not in (1, 2, 3, 4):
        raise AnalysisError('Field index must be 1..4, got %r' % index)
    state.sound_speed(gamma)
    return (gamma + 1) / 2 if index in (1, 4) else 0.0


def characteristic_field_class(state, gamma, index):
    """(grad(lambda_i) . r_i, classification) with the gradient taken by
    central differences in (rho, u, v, E)
    """
    if index not in (1, 2, 3, 4):
        raise AnalysisError('Field index must be 1..4, got %r' % index)
    state.sound_speed(gamma)
    point = state.as_array()
    gradient = np.zeros(4)
    for k in range(4):
        h = FD_RELATIVE_STEP * max(abs(point[k]), 1.0)
        up = point.copy()
        down = point.copy()
        up[k] += h
        down[k] -= h
        gradient[k] = (_eigenvalues(*up, gamma)[index - 1] - _eigenvalues(*down, gamma)[index - 1]) / (2 * h)
    value = float(gradient @ _eigenvectors(state, gamma)[index - 1])
    kind = LINEARLY_DEGENERATE if abs(value) <= DEGENERACY_TOL else GENUINELY_NONLINEAR
    return value, kind


def hsd_eigen(state, gamma):
    """Eigenvalues, right eigenvectors (as rows) and characteristic fields"""
    state.sound_speed(gamma)
    report = EigenReport(
        state, gamma,
        _eigenvalues(state.rho, state.u, state.v, state.E, gamma),
        _eigenvectors(state, gamma),
        [characteristic_field_class(state, gamma, i) for i in (1, 2, 3, 4)],
    )
    for i, (value, kind) in enumerate(report.char_fields, start=1):
        expected = field_value_closed_form(state, gamma, i)
        if abs(value - expected) > 1e-5 * max(1.0, abs(expected)):
            _LOG.warning('Field %d: finite differences give %g, expected %g', i, value, expected)
    return report
