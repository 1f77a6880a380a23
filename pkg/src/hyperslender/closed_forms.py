import csv
import json
import logging

import numpy as np

from hyperslender.flow_state import ScaledUpstreamState, UpstreamState
from hyperslender.geometry import admissible_A, admissible_A3, admissible_B, admissible_B3
from hyperslender.measure import (
    AXISYM,
    AXISYM_SCALED,
    PLANAR,
    PLANAR_SCALED,
    RadonMeasure,
    RegionSpec,
)
from hyperslender.quadrature import (
    cone_antiderivative,
    curvature_antiderivative,
    h_antiderivative,
    m_antiderivative,
)

_LOG = logging.getLogger(__name__)

PROBLEMS = ('A', 'B', 'A3', 'B3')
EQUATIONS = ('mass', 'mom_x', 'mom_y', 'energy')
WEIGHT_ROLES = (
    'mass_x', 'mass_y',
    'momx_x', 'momx_y',
    'momy_x', 'momy_y',
    'energy_x', 'energy_y',
)
ROLES = WEIGHT_ROLES + ('pressure', 'pressure_zeroth')

_PLANAR_COLUMNS = ('w_m0', 'w_n0', 'w_m1', 'w_n1', 'w_m2', 'w_n2', 'w_m3', 'w_n3')
_AXISYM_COLUMNS = ('w_a0', 'w_b0', 'w_a1', 'w_b1', 'w_a2', 'w_b2', 'w_a3', 'w_b3')

__all__ = [
    'ClosedFormError',
    'NotAdmissible',
    'MeasureSolution',
    'solve',
    'solve_A',
    'solve_B',
    'solve_A3',
    'solve_B3',
    'pressure_force_density',
    'nonlinear_constraint_residuals',
    'weight_ode_residuals',
    'sample_table',
    'write_csv',
]


class ClosedFormError(Exception):
    pass


class NotAdmissible(ClosedFormError):
    pass


def _ratio(num, den, limit=0.0):
    "num / den, with `limit` where den vanishes"
    num, den, limit = np.broadcast_arrays(
        np.asarray(num, dtype=float), np.asarray(den, dtype=float), np.asarray(limit, dtype=float))
    out = np.array(limit, dtype=float)
    np.divide(num, den, out=out, where=den != 0)
    return out if out.ndim else float(out)


class MeasureSolution(object):
    """Do not use directly.

    problem  - one of A, B, A3, B3
    state    - UpstreamState (A, A3) or ScaledUpstreamState (B, B3)
    region   - flow region bounded by the body curve
    weights  - role -> Dirac weight of that component
    inflow   - equation -> constant carried in by the oncoming flow
    ac       - role -> constant AC density
    """
    problem = 'abstract'
    axisymmetric = False
    scaled = False

    def __init__(self, profile, state, cfg=None):
        self.profile = profile
        self.state = state
        self.cfg = cfg
        self.verdict = self.admissibility()
        if not self.verdict:
            raise NotAdmissible('%s is not admissible for problem %s: margin %g at x=%g' % (
                profile.spec, self.problem, self.verdict.worst_margin, self.verdict.worst_x))
        self.prepare()
        self.region = RegionSpec.over(profile, self.slope, axisymmetric=self.axisymmetric)
        self.weights = self.weight_functions()
        self.ac = self.ac_densities()
        self.inflow = self.inflow_constants()
        self.components = self.build_components()
        self.density = RadonMeasure(self.region, self.flavor, self.density_ac,
                                    self.density_weight, label='density')
        _LOG.info('Built problem %s solution for %s', self.problem, profile.spec)

    @property
    def flavor(self):
        if self.axisymmetric:
            return AXISYM_SCALED if self.scaled else AXISYM
        return PLANAR_SCALED if self.scaled else PLANAR

    @property
    def slope(self):
        "Factor between the body curve and the profile"
        return 1.0 if self.scaled else self.state.tau

    def admissibility(self):
        raise NotImplementedError

    def prepare(self):
        pass

    def weight_functions(self):
        raise NotImplementedError

    def ac_densities(self):
        raise NotImplementedError

    def inflow_constants(self):
        raise NotImplementedError

    def traces(self, x):
        raise NotImplementedError

    def density_weight(self, x):
        raise NotImplementedError

    def pressure_weight(self, x):
        raise NotImplementedError

    @property
    def density_ac(self):
        raise NotImplementedError

    def shape(self, x):
        "(g, g', sqrt(1 + g'^2)) of the body curve"
        b, db, _ = self.profile.eval(x)
        g = self.slope * b
        dg = self.slope * db
        return g, dg, np.sqrt(1 + dg**2)

    def normal(self, x):
        "Unit normal on the body pointing into the flow"
        _, dg, arc = self.shape(x)
        return np.stack([-dg / arc, np.ones_like(dg) / arc], axis=-1)

    def build_components(self):
        components = {}
        for role in WEIGHT_ROLES:
            components[role] = RadonMeasure(self.region, self.flavor, self.ac.get(role, 0.0),
                                            self.weights[role], label=role)
        pressure = self.ac['pressure']
        components['pressure'] = RadonMeasure(self.region, self.flavor, pressure, label='pressure')
        if self.axisymmetric:
            zeroth = lambda x, r: pressure / r
        else:
            zeroth = 0.0
        components['pressure_zeroth'] = RadonMeasure(self.region, self.flavor, zeroth,
                                                     label='pressure_zeroth')
        return components

    def boundary_pressure(self, axis):
        "w_p n_axis on the body, paired undifferentiated in the momentum balances"
        def weight(x):
            return self.pressure_weight(x) * self.normal(x)[..., axis]
        return RadonMeasure(self.region, self.flavor, 0.0, weight,
                            label='boundary_pressure_%s' % 'xy'[axis])

    def weight_columns(self):
        return _AXISYM_COLUMNS if self.axisymmetric else _PLANAR_COLUMNS

    def as_dict(self):
        return {
            'problem': self.problem,
            'profile': self.profile.as_dict(),
            'state': self.state.as_dict(),
            'flavor': self.flavor,
            'ac': self.ac,
            'inflow': self.inflow,
            'admissibility': self.verdict.as_dict(),
        }

    def __repr__(self):
        return '<%s %s>' % (self.__class__.__name__, self.profile.spec)


class ProblemA(MeasureSolution):
    "Slender wedge, dimensional variables"
    problem = 'A'

    def admissibility(self):
        st = self.state
        return admissible_A(self.profile, st.tau, st.gamma, st.K, cfg=self.cfg)

    def prepare(self):
        self.H = h_antiderivative(self.profile, self.state.tau, self.cfg)

    def weight_functions(self):
        st = self.state
        rho, u, E, tau = st.rho_inf, st.u_inf, st.E_inf, st.tau

        def mass_x(x):
            g, _, arc = self.shape(x)
            return rho * u * g / arc

        def mass_y(x):
            g, dg, arc = self.shape(x)
            return dg * rho * u * g / arc

        def momx_x(x):
            _, _, arc = self.shape(x)
            return rho * u * u * tau * self.H(x) / arc**2

        def momx_y(x):
            _, dg, arc = self.shape(x)
            return dg * rho * u * u * tau * self.H(x) / arc**2

        def momy_y(x):
            _, dg, arc = self.shape(x)
            return dg**2 * rho * u * u * tau * self.H(x) / arc**2

        return {
            'mass_x': mass_x,
            'mass_y': mass_y,
            'momx_x': momx_x,
            'momx_y': momx_y,
            'momy_x': momx_y,
            'momy_y': momy_y,
            'energy_x': lambda x: E * mass_x(x),
            'energy_y': lambda x: E * mass_y(x),
        }

    def ac_densities(self):
        st = self.state
        return {
            'mass_x': st.rho_inf * st.u_inf,
            'momx_x': st.rho_inf * st.u_inf**2,
            'energy_x': st.rho_inf * st.u_inf * st.E_inf,
            'pressure': st.p_inf,
        }

    def inflow_constants(self):
        st = self.state
        return {
            'mass': st.rho_inf * st.u_inf,
            'mom_x': st.rho_inf * st.u_inf**2 + st.p_inf,
            'mom_y': 0.0,
            'energy': st.rho_inf * st.u_inf * st.E_inf,
        }

    @property
    def density_ac(self):
        return self.state.rho_inf

    def traces(self, x):
        st = self.state
        g, dg, arc = self.shape(x)
        u = _ratio(st.u_inf * self.H(x), g / st.tau * arc, st.u_inf / arc**2)
        return u, dg * u, st.E_inf * np.ones_like(dg)

    def density_weight(self, x):
        st = self.state
        g, _, _ = self.shape(x)
        b = g / st.tau
        return _ratio(st.rho_inf * st.tau * b**2, self.H(x), 0.0)

    def pressure_weight(self, x):
        st = self.state
        _, db, ddb = self.profile.eval(x)
        _, _, arc = self.shape(x)
        H = self.H(x)
        return st.p_inf + st.rho_inf * st.u_inf**2 * st.tau**2 * (ddb * H + db**2 * arc) / arc**3


class ProblemB(MeasureSolution):
    "Hypersonic small-disturbance limit of problem A"
    problem = 'B'
    scaled = True

    def admissibility(self):
        return admissible_B(self.profile, self.state.gamma, self.state.K)

    def prepare(self):
        self.moment = curvature_antiderivative(self.profile, self.cfg)

    def weight_functions(self):
        E = self.state.E_bar_inf

        def mass_x(x):
            b, _, arc = self.shape(x)
            return b / arc

        def mass_y(x):
            b, db, arc = self.shape(x)
            return b * db / arc

        def momx_x(x):
            b, db, arc = self.shape(x)
            return (-b * db**2 + self.moment(x)) / arc

        def momx_y(x):
            return self.profile.derivative(x) * momx_x(x)

        def momy_y(x):
            b, db, arc = self.shape(x)
            return b * db**2 / arc

        return {
            'mass_x': mass_x,
            'mass_y': mass_y,
            'momx_x': momx_x,
            'momx_y': momx_y,
            'momy_x': mass_y,
            'momy_y': momy_y,
            'energy_x': lambda x: E * mass_x(x),
            'energy_y': lambda x: E * mass_y(x),
        }

    def ac_densities(self):
        st = self.state
        return {'mass_x': 1.0, 'energy_x': st.E_bar_inf, 'pressure': st.p_bar_inf}

    def inflow_constants(self):
        st = self.state
        return {'mass': 1.0, 'mom_x': st.p_bar_inf, 'mom_y': 0.0, 'energy': st.E_bar_inf}

    @property
    def density_ac(self):
        return 1.0

    def traces(self, x):
        b, db, _ = self.profile.eval(x)
        u = -db**2 + _ratio(self.moment(x), b, 0.0)
        return u, db, self.state.E_bar_inf * np.ones_like(db)

    def density_weight(self, x):
        b, _, arc = self.shape(x)
        return b / arc

    def pressure_weight(self, x):
        b, db, ddb = self.profile.eval(x)
        return self.state.p_bar_inf + db**2 + b * ddb


class ProblemA3(MeasureSolution):
    "Slender axisymmetric cone in cylindrical coordinates (x, r)"
    problem = 'A3'
    axisymmetric = True

    def admissibility(self):
        st = self.state
        return admissible_A3(self.profile, st.tau, st.gamma, st.K, cfg=self.cfg)

    def prepare(self):
        self.M = m_antiderivative(self.profile, self.state.tau, self.cfg)

    def weight_functions(self):
        st = self.state
        rho, u, E, tau = st.rho_inf, st.u_inf, st.E_inf, st.tau

        def mass_x(x):
            g, _, arc = self.shape(x)
            return rho * u * g / (2 * arc)

        def mass_y(x):
            g, dg, arc = self.shape(x)
            return dg * rho * u * g / (2 * arc)

        def momx_x(x):
            f, _, _ = self.profile.eval(x)
            _, _, arc = self.shape(x)
            return tau * rho * u * u * _ratio(self.M(x), f, 0.0) / arc**2

        def momx_y(x):
            _, dg, _ = self.shape(x)
            return dg * momx_x(x)

        def momy_y(x):
            _, dg, _ = self.shape(x)
            return dg**2 * momx_x(x)

        return {
            'mass_x': mass_x,
            'mass_y': mass_y,
            'momx_x': momx_x,
            'momx_y': momx_y,
            'momy_x': momx_y,
            'momy_y': momy_y,
            'energy_x': lambda x: E * mass_x(x),
            'energy_y': lambda x: E * mass_y(x),
        }

    ac_densities = ProblemA.ac_densities
    inflow_constants = ProblemA.inflow_constants
    density_ac = ProblemA.density_ac

    def traces(self, x):
        st = self.state
        f, df, _ = self.profile.eval(x)
        _, dg, arc = self.shape(x)
        u = _ratio(2 * st.u_inf * self.M(x), f**2 * arc, st.u_inf / arc**2)
        return u, dg * u, st.E_inf * np.ones_like(dg)

    def density_weight(self, x):
        st = self.state
        f, _, _ = self.profile.eval(x)
        return _ratio(st.tau * st.rho_inf * f**3, 4 * self.M(x), 0.0)

    def pressure_weight(self, x):
        st = self.state
        f, df, ddf = self.profile.eval(x)
        _, _, arc = self.shape(x)
        bracket = ddf * _ratio(self.M(x), f, 0.0) + arc * df**2
        return st.p_inf + st.tau**2 * st.rho_inf * st.u_inf**2 * bracket / arc**3


class ProblemB3(MeasureSolution):
    "Hypersonic small-disturbance limit of problem A3"
    problem = 'B3'
    axisymmetric = True
    scaled = True

    def admissibility(self):
        return admissible_B3(self.profile, self.state.gamma, self.state.K)

    def prepare(self):
        self.moment = cone_antiderivative(self.profile, self.cfg)

    def weight_functions(self):
        E = self.state.E_bar_inf

        def mass_x(x):
            f, _, arc = self.shape(x)
            return f / (2 * arc)

        def mass_y(x):
            f, df, arc = self.shape(x)
            return f * df / (2 * arc)

        def momx_x(x):
            f, df, arc = self.shape(x)
            return (-f * df**2 + _ratio(self.moment(x), f, 0.0)) / (2 * arc)

        def momx_y(x):
            return self.profile.derivative(x) * momx_x(x)

        def momy_y(x):
            f, df, arc = self.shape(x)
            return f * df**2 / (2 * arc)

        return {
            'mass_x': mass_x,
            'mass_y': mass_y,
            'momx_x': momx_x,
            'momx_y': momx_y,
            'momy_x': mass_y,
            'momy_y': momy_y,
            'energy_x': lambda x: E * mass_x(x),
            'energy_y': lambda x: E * mass_y(x),
        }

    ac_densities = ProblemB.ac_densities
    inflow_constants = ProblemB.inflow_constants
    density_ac = ProblemB.density_ac

    def traces(self, x):
        f, df, _ = self.profile.eval(x)
        u = -df**2 + _ratio(self.moment(x), f**2, 0.0)
        return u, df, self.state.E_bar_inf * np.ones_like(df)

    def density_weight(self, x):
        f, _, arc = self.shape(x)
        return f / (2 * arc)

    def pressure_weight(self, x):
        f, df, ddf = self.profile.eval(x)
        return self.state.p_bar_inf + df**2 + f * ddf / 2


SOLVERS = {
    'A': ProblemA,
    'B': ProblemB,
    'A3': ProblemA3,
    'B3': ProblemB3,
}


def solve(problem, profile, state, cfg=None):
    try:
        cls = SOLVERS[problem]
    except KeyError:
        raise ClosedFormError('Unknown problem %r' % problem)
    if cls.scaled and isinstance(state, UpstreamState):
        state = state.scaled()
    if not cls.scaled and not isinstance(state, UpstreamState):
        raise ClosedFormError('Problem %s needs a dimensional upstream state' % problem)
    if cls.scaled and not isinstance(state, ScaledUpstreamState):
        raise ClosedFormError('Problem %s needs a scaled upstream state' % problem)
    return cls(profile, state, cfg)


def solve_A(profile, state, cfg=None):
    return solve('A', profile, state, cfg)


def solve_B(profile, scaled_state, cfg=None):
    return solve('B', profile, scaled_state, cfg)


def solve_A3(profile, state, cfg=None):
    return solve('A3', profile, state, cfg)


def solve_B3(profile, scaled_state, cfg=None):
    return solve('B3', profile, scaled_state, cfg)


def pressure_force_density(sol, x):
    "Force per unit body length exerted by the flow: w_p times the outward body normal"
    w_p = np.asarray(sol.pressure_weight(x), dtype=float)
    if np.any(w_p < 0):
        if sol.axisymmetric and not sol.scaled:
            _LOG.warning('Negative pressure weight on %s (min %g)', sol.profile.spec, w_p.min())
        else:
            raise NotAdmissible('Negative pressure weight on %s (min %g)'
                                % (sol.profile.spec, w_p.min()))
    return -w_p[..., None] * sol.normal(x)


def _relative(lhs, rhs):
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    scale = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), 1e-300)
    return float(np.max(np.abs(lhs - rhs) / scale))


def nonlinear_constraint_residuals(sol, grid):
    """Max relative deviation of each weight from its Radon-Nikodym product form"""
    grid = np.asarray(grid, dtype=float)
    u, v, E = sol.traces(grid)
    w_rho = sol.density_weight(grid)
    if sol.scaled:
        expected = {
            'mass_x': w_rho,
            'mass_y': v * w_rho,
            'momx_x': u * w_rho,
            'momx_y': u * v * w_rho,
            'momy_x': v * w_rho,
            'momy_y': v * v * w_rho,
            'energy_x': E * w_rho,
            'energy_y': E * v * w_rho,
        }
    else:
        expected = {
            'mass_x': u * w_rho,
            'mass_y': v * w_rho,
            'momx_x': u * u * w_rho,
            'momx_y': u * v * w_rho,
            'momy_x': u * v * w_rho,
            'momy_y': v * v * w_rho,
            'energy_x': E * u * w_rho,
            'energy_y': E * v * w_rho,
        }
    return dict((role, _relative(sol.weights[role](grid), expected[role])) for role in WEIGHT_ROLES)


def _five_point(f, x, h):
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)


def weight_ode_residuals(sol, grid, h=1e-3):
    """Max residual of the weight ODEs relative to the sup of their right-hand sides

    Each x-weight w obeys (S w)' = rhs with S = sqrt(1 + g'^2) [g] on the body
    curve g; grid points must keep 2h away from both ends of the domain.
    """
    grid = np.asarray(grid, dtype=float)

    def arc_factor(x):
        g, _, arc = sol.shape(x)
        return arc * g if sol.axisymmetric else arc

    g, dg, _ = sol.shape(grid)
    radius = g if sol.axisymmetric else np.ones_like(g)
    w_p = sol.pressure_weight(grid)
    rhs = {
        'mass': sol.inflow['mass'] * dg * radius,
        'mom_x': (sol.inflow['mom_x'] - w_p) * dg * radius,
        'mom_y': (w_p - sol.ac['pressure']) * radius,
        'energy': sol.inflow['energy'] * dg * radius,
    }
    roles = {'mass': 'mass_x', 'mom_x': 'momx_x', 'mom_y': 'momy_x', 'energy': 'energy_x'}
    residuals = {}
    for equation in EQUATIONS:
        weight = sol.weights[roles[equation]]
        lhs = _five_point(lambda x: arc_factor(x) * weight(x), grid, h)
        scale = max(float(np.max(np.abs(rhs[equation]))), 1e-300)
        residuals[equation] = float(np.max(np.abs(lhs - rhs[equation]))) / scale
    return residuals


def sample_table(sol, grid):
    "Column names and rows of the solution sampled on grid"
    grid = np.asarray(grid, dtype=float)
    u, v, E = sol.traces(grid)
    columns = [grid, sol.density_weight(grid)]
    columns += [sol.weights[role](grid) for role in WEIGHT_ROLES]
    columns += [sol.pressure_weight(grid), u, v, E]
    names = ('x', 'w_rho') + sol.weight_columns() + ('w_p', 'u_trace', 'v_trace', 'E_trace')
    rows = np.column_stack([np.broadcast_to(np.asarray(c, dtype=float), grid.shape) for c in columns])
    return names, rows


def write_csv(sol, grid, stream, config=None):
    if config is not None:
        stream.write('# config: %s\n' % json.dumps(config, sort_keys=True))
    names, rows = sample_table(sol, grid)
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(names)
    for row in rows:
        writer.writerow([repr(float(value)) for value in row])
