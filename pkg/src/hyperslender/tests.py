import contextlib
import io
import json
import logging
import math
import os
import shutil
import tempfile
import unittest
from unittest import mock

import numpy as np
from numpy import testing as npt

from hyperslender import settings
from hyperslender.analysis import (
    GENUINELY_NONLINEAR,
    LINEARLY_DEGENERATE,
    QUANTITIES,
    ConvergenceReport,
    HSDState,
    NonHyperbolic,
    char_poly,
    char_poly_closed_form,
    characteristic_field_class,
    converge,
    field_value_closed_form,
    hsd_eigen,
    hsd_flux_jacobians,
    scaled_trace_A,
    scaled_trace_A3,
    write_convergence_csv,
)
from hyperslender.cli import EXIT_NOT_ADMISSIBLE, EXIT_OK, EXIT_USAGE, EXIT_VERIFICATION, run
from hyperslender.closed_forms import (
    EQUATIONS,
    ClosedFormError,
    NotAdmissible,
    nonlinear_constraint_residuals,
    pressure_force_density,
    sample_table,
    solve,
    solve_A,
    solve_A3,
    solve_B,
    solve_B3,
    weight_ode_residuals,
    write_csv,
)
from hyperslender.flow_state import (
    BadParameter,
    pressure_from_state,
    scale_fields,
    scale_point,
    scaled_pressure,
    scaled_upstream,
    unscale_point,
    upstream,
)
from hyperslender.geometry import (
    DEFAULT_PROFILE_NAMES,
    AbstractProfile,
    BadCoefficient,
    BadExponent,
    BadProfileSpec,
    LinearProfile,
    NonMonotone,
    OutOfDomain,
    PowerProfile,
    Registry,
    admissible_A,
    admissible_A3,
    admissible_B,
    admissible_B3,
    make_profile,
    parse_profile,
)
from hyperslender.measure import (
    AXISYM,
    D_X,
    D_Y,
    PLANAR,
    FlavorMismatch,
    RadonMeasure,
    RegionSpec,
    SupportOutsideWindow,
    inflow_term,
    pair,
    tau_factor_pairing,
)
from hyperslender.quadrature import (
    Antiderivative,
    QuadratureConfig,
    QuadratureError,
    H_of,
    M_of,
    cone_moment_of,
    curvature_moment_of,
    eval_bump,
    fixed_gauss,
    h_integrand,
    integrate_1d,
    m_integrand,
    make_bump,
)
from hyperslender.verifier import (
    BOUNDARY,
    INFLOW,
    INTERIOR,
    Term,
    VerificationError,
    check_scale_range,
    classify_bump,
    equation_terms,
    evaluate_terms,
    sample_bumps,
    verify_tau_identity,
    verify_weak,
)

# the ellipse integral of (1 - s)^4 is pi rx ry / 5; its chord integral is r 256/315
BUMP_AREA_FACTOR = math.pi / 5
BUMP_CHORD_FACTOR = 256 / 315

TIGHT = QuadratureConfig(abs_tol=1e-15)

logging.getLogger('hyperslender').addHandler(logging.NullHandler())


def linear():
    return make_profile('linear', [1.0])


class RegistryTest(unittest.TestCase):

    def setUp(self):
        registry = Registry()
        registry.reset()

    def tearDown(self):
        registry = Registry()
        registry.unregister('wedge')

    def test_available(self):
        registry = Registry()
        self.assertEqual(set(registry.available()), set(DEFAULT_PROFILE_NAMES))
        self.assertIn('logarithmic', registry.available())

    def test_get(self):
        registry = Registry()
        self.assertEqual(registry.get('power'), PowerProfile)
        self.assertRaises(BadProfileSpec, registry.get, 'wedge')
        self.assertFalse(registry.get('wedge', False))

    def test_register(self):
        registry = Registry()
        registry.register('wedge', LinearProfile)
        self.assertEqual(parse_profile('wedge:a=2').spec, 'linear:a=2.0')

    def test_reset(self):
        registry = Registry()
        registry.register('wedge', LinearProfile)
        registry.reset()
        self.assertEqual(set(registry.available()), set(DEFAULT_PROFILE_NAMES))

    def test_profile_classes(self):
        registry = Registry()
        for name in DEFAULT_PROFILE_NAMES:
            self.assertTrue(issubclass(registry.get(name), AbstractProfile), name)
        self.assertFalse(hasattr(AbstractProfile, 'register'))
        self.assertFalse(hasattr(AbstractProfile, 'second_derivative'))


class ProfileTest(unittest.TestCase):

    def test_linear(self):
        self.assertEqual(linear().eval(0.0), (0.0, 1.0, 0.0))

    def test_power(self):
        profile = make_profile('power', [1.0, 2.0], domain_end=2.0)
        npt.assert_allclose(profile.eval(1.5), (2.25, 3.0, 2.0))

    def test_logarithmic(self):
        profile = make_profile('logarithmic', [1.0])
        npt.assert_allclose(profile.eval(1.0), (math.log(2), 0.5, -0.25))

    def test_vectorized(self):
        b, db, ddb = make_profile('power', [1.0, 2.0]).eval(np.array([0.0, 1.0, 2.0]))
        npt.assert_allclose(b, [0, 1, 4])
        npt.assert_allclose(db, [0, 2, 4])
        npt.assert_allclose(ddb, [2, 2, 2])

    def test_out_of_domain(self):
        self.assertRaises(OutOfDomain, linear().eval, 5.5)
        self.assertRaises(OutOfDomain, linear().eval, -0.1)

    def test_bad_exponent(self):
        self.assertRaises(BadExponent, make_profile, 'power', [1.0, 1.5])

    def test_non_monotone(self):
        self.assertRaises(NonMonotone, make_profile, 'linear', [-1.0])

    def test_bad_coefficient(self):
        self.assertRaises(BadCoefficient, make_profile, 'log', [1.0, 0.0])
        self.assertRaises(BadCoefficient, make_profile, 'linear', [float('nan')])

    def test_parse(self):
        self.assertEqual(parse_profile('power:a=1,p=2').spec, 'power:a=1.0,p=2.0')
        self.assertEqual(parse_profile('linear').spec, 'linear:a=1.0')
        profile = parse_profile('sum:linear+log:k=2')
        npt.assert_allclose(profile(1.0), 1 + math.log(3))
        self.assertEqual(parse_profile(profile.spec).spec, profile.spec)

    def test_parse_errors(self):
        for spec in ('wedge:a=1', 'power:q=1', 'power:a=x', 'power:a', 'sum:'):
            self.assertRaises(BadProfileSpec, parse_profile, spec)

    def test_moments(self):
        for spec in ('power:a=1,p=2', 'power:a=0.5,p=3', 'exp:a=0.1,k=0.5', 'log:a=1,k=2'):
            profile = parse_profile(spec)
            self.assertAlmostEqual(profile.curvature_moment(2.0),
                                   curvature_moment_of(profile, 2.0), places=8)
            self.assertAlmostEqual(profile.cone_moment(2.0),
                                   cone_moment_of(profile, 2.0), places=8)


class AdmissibilityTest(unittest.TestCase):

    def test_A_linear(self):
        self.assertTrue(admissible_A(linear(), 0.1, 1.4, 1.0))

    def test_A_collapse(self):
        verdict = admissible_A(linear(), 0.0, 1.4, 1.0)
        self.assertTrue(verdict)
        self.assertGreaterEqual(verdict.worst_margin, 1 / 1.4)

    def test_B_linear(self):
        verdict = admissible_B(linear(), 1.4, 1.0)
        self.assertTrue(verdict)
        self.assertAlmostEqual(verdict.worst_margin, 1 / 1.4 + 1)

    def test_B_quadratic(self):
        self.assertTrue(admissible_B(make_profile('power', [1.0, 2.0]), 1.4, 1.0))

    def test_B_log_fails(self):
        profile = parse_profile('log', domain_end=20.0)
        verdict = admissible_B(profile, 1.4, 10.0)
        self.assertFalse(verdict)
        self.assertAlmostEqual(verdict.worst_x, math.exp(1.5) - 1, delta=0.02)

    def test_A_log(self):
        profile = parse_profile('log')
        verdict = admissible_A(profile, 0.1, 1.4, 1.0)
        self.assertTrue(verdict)
        b, db, ddb = profile.eval(verdict.worst_x)
        s = math.sqrt(1 + 0.01 * db**2)
        H = H_of(profile, 0.1, verdict.worst_x)
        self.assertAlmostEqual(verdict.worst_margin, s**3 / 1.4 + ddb * H + db**2 * s, places=9)
        # (1 - log(1 + x)) / (1 + x)^2 is smallest at x = e^1.5 - 1, shifted a little by tau
        self.assertAlmostEqual(verdict.worst_x, math.exp(1.5) - 1, delta=0.1)
        self.assertAlmostEqual(verdict.worst_margin, 1 / 1.4 - math.exp(-3) / 2, delta=0.01)

    def test_B3_pressure_weight_sign(self):
        cases = (
            (linear(), 1.0),
            (make_profile('power', [1.0, 2.0]), 1.0),
            (parse_profile('log'), 1.0),
            (parse_profile('log', domain_end=20.0), 30.0),
        )
        for profile, K in cases:
            with self.subTest(profile=profile.spec, K=K):
                grid = np.linspace(0.0, profile.domain_end, 2049)[1:]
                f, df, ddf = profile.eval(grid)
                w_p = scaled_upstream(K, 1.4).p_bar_inf + df**2 + f * ddf / 2
                self.assertEqual(bool(admissible_B3(profile, 1.4, K)), bool(np.all(w_p > 0)))
        self.assertFalse(admissible_B3(parse_profile('log', domain_end=20.0), 1.4, 30.0))

    def test_cones(self):
        self.assertTrue(admissible_A3(linear(), 0.1, 1.4, 1.0))
        self.assertFalse(admissible_A3(linear(), 0.1, 1.4, 1.0).strict)
        self.assertTrue(admissible_B3(linear(), 1.4, 1.0))
        self.assertTrue(admissible_A3(make_profile('power', [1.0, 2.0]), 0.2, 1.4, 2.0))

    def test_bad_parameters(self):
        self.assertRaises(BadParameter, admissible_B, linear(), 1.0, 1.0)
        self.assertRaises(BadParameter, admissible_A, linear(), 1.0, 1.4, 1.0)


class FlowStateTest(unittest.TestCase):

    def test_upstream(self):
        state = upstream(1.0, 0.1, 1.4)
        self.assertAlmostEqual(state.p_inf, 0.0071428571, places=10)
        self.assertAlmostEqual(state.E_inf, 0.525)
        self.assertAlmostEqual(state.mach, 10.0)

    def test_upstream_small_tau(self):
        state = upstream(1.0, 1e-8, 1.4)
        self.assertAlmostEqual(state.p_inf / 7.142857e-17, 1.0, places=6)
        self.assertAlmostEqual(state.E_inf, 0.5)

    def test_upstream_dimensional(self):
        state = upstream(2.0, 0.1, 2.0, rho_inf=2.0, u_inf=3.0)
        self.assertAlmostEqual(state.p_inf, 0.0225)
        self.assertAlmostEqual(state.E_inf, 4.5225)

    def test_scaled_upstream(self):
        scaled = scaled_upstream(1.0, 1.4)
        self.assertAlmostEqual(scaled.E_bar_inf, 5.0)
        self.assertAlmostEqual(scaled.p_bar_inf, 0.7142857, places=7)
        scaled = scaled_upstream(1.0, 3.0)
        self.assertAlmostEqual(scaled.E_bar_inf, 1.0)
        self.assertAlmostEqual(scaled.p_bar_inf, 1 / 3)
        self.assertLess(scaled_upstream(1e3, 1.4).E_bar_inf, 1e-5)

    def test_scale_point(self):
        x, y = scale_point(2.0, 0.3, 0.1)
        self.assertAlmostEqual(x, 2.0)
        self.assertAlmostEqual(y, 3.0)
        npt.assert_allclose(unscale_point(x, y, 0.1), (2.0, 0.3))
        self.assertEqual(len(scale_point(1.0, 0.2, 0.1, z=0.1)), 3)

    def test_scale_fields(self):
        state = upstream(1.0, 0.1, 1.4)
        u, v, E, rho, p = scale_fields(1.0, 0.0, 0.5, 1.0, state.p_inf, state)
        self.assertEqual((u, v), (0.0, 0.0))
        self.assertAlmostEqual(E, 0.0)
        E_bar = scale_fields(1.0, 0.0, state.E_inf, 1.0, state.p_inf, state)[2]
        self.assertAlmostEqual(E_bar, state.scaled().E_bar_inf)

    def test_equation_of_state(self):
        state = upstream(1.0, 0.1, 1.4)
        self.assertAlmostEqual(pressure_from_state(1.0, 1.0, 0.0, state.E_inf, 1.4), state.p_inf)
        scaled = scaled_upstream(1.0, 1.4)
        self.assertAlmostEqual(scaled_pressure(1.0, 0.0, 0.0, scaled.E_bar_inf, 1.4), scaled.p_bar_inf)

    def test_bad_parameters(self):
        self.assertRaises(BadParameter, upstream, 1.0, 0.1, 1.0)
        self.assertRaises(BadParameter, upstream, 1.0, 1.0, 1.4)
        self.assertRaises(BadParameter, upstream, 0.0, 0.1, 1.4)


class QuadratureTest(unittest.TestCase):

    def test_integrate_1d(self):
        self.assertAlmostEqual(integrate_1d(lambda t: 1.0, 0, 1)[0], 1.0)
        value = integrate_1d(lambda t: 2 * t / math.sqrt(1 + t * t), 0, 1)[0]
        self.assertAlmostEqual(value, 2 * (math.sqrt(2) - 1), places=12)
        self.assertAlmostEqual(integrate_1d(lambda t: t**3, 0, 2)[0], 4.0)
        self.assertEqual(integrate_1d(lambda t: 1.0, 1, 1), (0.0, 0.0))
        self.assertRaises(QuadratureError, integrate_1d, lambda t: 1.0, 1, 0)

    def test_fixed_gauss(self):
        self.assertAlmostEqual(fixed_gauss(lambda t: t**5, 0.0, 2.0, 3), 64 / 6)
        npt.assert_allclose(fixed_gauss(lambda t: t, np.zeros(2), np.array([1.0, 2.0]), 2), [0.5, 2.0])

    def test_H(self):
        self.assertAlmostEqual(H_of(linear(), 0.1, 1.0), 1 / math.sqrt(1.01), places=12)
        log = parse_profile('log')
        self.assertAlmostEqual(H_of(log, 0.0, 3.0), math.log(4), places=12)
        quadratic = parse_profile('power:a=1,p=2')
        self.assertAlmostEqual(H_of(quadratic, 0.5, 1.0), 2 * (math.sqrt(2) - 1), places=12)
        self.assertRaises(OutOfDomain, H_of, linear(), 0.1, 6.0)

    def test_M(self):
        self.assertAlmostEqual(M_of(linear(), 0.1, 2.0), 2 / math.sqrt(1.01), places=12)
        log = parse_profile('log')
        self.assertAlmostEqual(M_of(log, 0.0, 2.0), math.log(3)**2 / 2, places=12)
        quadratic = parse_profile('power:a=1,p=2')
        self.assertAlmostEqual(M_of(quadratic, 1.0, 1.0), (1 + math.sqrt(5)) / 12, places=12)

    def test_antiderivative(self):
        profile = parse_profile('log:a=1,k=2')
        H = Antiderivative(h_integrand(profile, 0.3), profile.domain_end)
        for x in (0.0, 0.01, 1.3, 5.0):
            self.assertAlmostEqual(H(x), H_of(profile, 0.3, x), places=12)
        npt.assert_allclose(H(np.array([0.5, 2.5])),
                            [H_of(profile, 0.3, 0.5), H_of(profile, 0.3, 2.5)], rtol=1e-12)

    def test_bump(self):
        phi = make_bump((0, 0), (1, 1), 3)
        self.assertEqual(eval_bump(phi, 0.0, 0.0), (1.0, 0.0, 0.0))
        self.assertEqual(eval_bump(phi, 2.0, 0.0), (0.0, 0.0, 0.0))
        value, dx, dy = eval_bump(phi, 0.5, 0.0)
        self.assertAlmostEqual(value, 0.421875)
        self.assertAlmostEqual(dx, -1.6875)
        self.assertEqual(dy, 0.0)

    def test_H_M_monotone(self):
        for spec in ('linear', 'power:a=1,p=2', 'log', 'exp:a=0.1,k=0.5'):
            profile = parse_profile(spec)
            grid = np.linspace(0.0, profile.domain_end, 200)
            for name, integrand in (('H', h_integrand), ('M', m_integrand)):
                with self.subTest(profile=spec, antiderivative=name):
                    values = Antiderivative(integrand(profile, 0.3), profile.domain_end)(grid)
                    self.assertEqual(values[0], 0.0)
                    self.assertTrue(np.all(np.diff(values) >= 0))

    def test_bump_gradient(self):
        rng = np.random.default_rng(3)
        h = 1e-6
        for phi in sample_bumps(RegionSpec.over(linear()), 6, 8):
            (x0, y0), (rx, ry) = phi.center, phi.radii
            radius = 0.95 * np.sqrt(rng.uniform(0.0, 1.0, 100))
            angle = rng.uniform(0.0, 2 * math.pi, 100)
            x = x0 + rx * radius * np.cos(angle)
            y = y0 + ry * radius * np.sin(angle)
            _, dx, dy = eval_bump(phi, x, y)
            npt.assert_allclose(dx, (eval_bump(phi, x + h, y)[0] - eval_bump(phi, x - h, y)[0]) / (2 * h),
                                atol=1e-6)
            npt.assert_allclose(dy, (eval_bump(phi, x, y + h)[0] - eval_bump(phi, x, y - h)[0]) / (2 * h),
                                atol=1e-6)

    def test_bump_validation(self):
        self.assertRaises(QuadratureError, make_bump, (0, 0), (0, 1))
        self.assertRaises(QuadratureError, make_bump, (0, 0), (1, 1), 2)

    def test_bump_transforms(self):
        phi = make_bump((1, 3), (0.5, 0.5))
        self.assertEqual(phi.scaled(2.0)(1.0, 3.0), 2.0)
        self.assertEqual(phi.scaled(2.0).unit(), phi)
        physical = phi.to_physical(0.1)
        self.assertAlmostEqual(physical(1.2, 0.31), phi(1.2, 3.1))


class MeasureTest(unittest.TestCase):

    def setUp(self):
        self.region = RegionSpec.over(linear())

    def test_zero(self):
        m = RadonMeasure(self.region, PLANAR)
        self.assertEqual(pair(m, make_bump((2, 2), (0.5, 0.5))), 0.0)

    def test_ac(self):
        m = RadonMeasure(self.region, PLANAR, 1.0)
        phi = make_bump((1, 3), (0.5, 0.5))
        self.assertAlmostEqual(pair(m, phi), BUMP_AREA_FACTOR * 0.25, places=12)
        self.assertAlmostEqual(pair(m, phi, D_X), 0.0, places=12)

    def test_dirac(self):
        m = RadonMeasure(self.region, PLANAR, 0.0, lambda x: np.ones_like(np.asarray(x, dtype=float)))
        phi = make_bump((2, 2), (0.5, 0.5))
        self.assertAlmostEqual(pair(m, phi), 128 / 315, places=12)

    def test_inflow(self):
        phi = make_bump((0, 1), (0.5, 0.5))
        self.assertAlmostEqual(inflow_term(2.0, phi, PLANAR), BUMP_CHORD_FACTOR, places=12)
        self.assertAlmostEqual(inflow_term(1.0, phi, AXISYM), BUMP_CHORD_FACTOR / 2, places=12)
        self.assertEqual(inflow_term(1.0, make_bump((1, 3), (0.4, 0.4)), PLANAR), 0.0)

    def test_linear_combination(self):
        a = RadonMeasure(self.region, PLANAR, 1.0)
        b = RadonMeasure(self.region, PLANAR, 0.0, lambda x: 2 * x)
        phi = make_bump((2, 2), (0.5, 0.5))
        self.assertAlmostEqual(pair(a + b, phi), pair(a, phi) + pair(b, phi), places=12)
        self.assertAlmostEqual(pair(3 * a - b, phi), 3 * pair(a, phi) - pair(b, phi), places=12)
        self.assertAlmostEqual(pair(-b, phi), -pair(b, phi), places=12)

    def test_flavor_mismatch(self):
        self.assertRaises(FlavorMismatch, RadonMeasure, self.region, AXISYM)
        axisym = RegionSpec.over(linear(), axisymmetric=True)
        a = RadonMeasure(self.region, PLANAR, 1.0)
        b = RadonMeasure(axisym, AXISYM, 1.0)
        self.assertRaises(FlavorMismatch, lambda: a + b)

    def test_window(self):
        m = RadonMeasure(self.region, PLANAR, 1.0)
        self.assertRaises(SupportOutsideWindow, pair, m, make_bump((4.8, 2), (0.5, 0.5)))

    def test_stretching_constant_density(self):
        region = RegionSpec.over(linear(), 0.25)
        rho = RadonMeasure(region, PLANAR, 2.0)
        phi = make_bump((1, 3), (0.5, 0.5))
        lhs, rhs = tau_factor_pairing(rho, phi, 0.25)
        self.assertAlmostEqual(lhs, 0.25 * BUMP_AREA_FACTOR * 0.25, places=12)
        self.assertAlmostEqual(rhs, lhs, places=12)


class ClosedFormTest(unittest.TestCase):

    def setUp(self):
        self.state = upstream(1.0, 0.1, 1.4)
        self.scaled = scaled_upstream(1.0, 1.4)
        self.grid = np.linspace(0.0, 5.0, 512)

    def test_A_wedge(self):
        sol = solve_A(linear(), self.state)
        x = np.array([0.5, 2.0, 4.5])
        u, v, E = sol.traces(x)
        npt.assert_allclose(u, 1 / 1.01, rtol=1e-12)
        npt.assert_allclose(v, 0.1 / 1.01, rtol=1e-12)
        npt.assert_allclose(E, 0.525)
        npt.assert_allclose(sol.pressure_weight(x), 0.0170438472, rtol=1e-9)
        npt.assert_allclose(sol.density_weight(x), 0.1 * math.sqrt(1.01) * x, rtol=1e-12)

    def test_A_limits(self):
        sol = solve_A(parse_profile('log'), self.state)
        self.assertAlmostEqual(sol.traces(0.0)[0], 1 / 1.01)
        self.assertEqual(sol.density_weight(0.0), 0.0)

    def test_B_wedge(self):
        sol = solve_B(linear(), self.scaled)
        x = np.array([0.5, 2.0])
        u, v, E = sol.traces(x)
        npt.assert_allclose(u, -1.0)
        npt.assert_allclose(v, 1.0)
        npt.assert_allclose(E, 5.0)
        npt.assert_allclose(sol.pressure_weight(x), 1 / 1.4 + 1)
        npt.assert_allclose(sol.density_weight(x), x / math.sqrt(2))

    def test_B_quadratic(self):
        sol = solve_B(parse_profile('power:a=1,p=2'), self.scaled)
        u, v, _ = sol.traces(1.0)
        self.assertAlmostEqual(u, -3.0, places=10)
        self.assertAlmostEqual(v, 2.0)
        self.assertAlmostEqual(sol.pressure_weight(1.0), 1 / 1.4 + 6)

    def test_A3_cone(self):
        sol = solve_A3(linear(), self.state)
        x = np.array([0.5, 3.0])
        u, v, E = sol.traces(x)
        npt.assert_allclose(u, 1 / 1.01, rtol=1e-12)
        npt.assert_allclose(E, 0.525)
        npt.assert_allclose(sol.pressure_weight(x), 0.0170438472, rtol=1e-9)
        npt.assert_allclose(sol.density_weight(x), 0.05 * math.sqrt(1.01) * x, rtol=1e-12)
        self.assertAlmostEqual(sol.traces(0.0)[0], 1 / 1.01)
        self.assertEqual(sol.density_weight(0.0), 0.0)

    def test_B3_cone(self):
        sol = solve_B3(linear(), self.scaled)
        u, v, E = sol.traces(2.0)
        self.assertAlmostEqual(u, -1.0)
        self.assertAlmostEqual(v, 1.0)
        self.assertAlmostEqual(E, 5.0)
        self.assertAlmostEqual(sol.pressure_weight(2.0), 1 / 1.4 + 1)
        self.assertAlmostEqual(sol.density_weight(2.0), 2 / (2 * math.sqrt(2)))
        sol = solve_B3(parse_profile('power:a=1,p=2'), self.scaled)
        self.assertAlmostEqual(sol.traces(1.0)[0], -10 / 3, places=10)
        self.assertAlmostEqual(sol.pressure_weight(1.0), 1 / 1.4 + 5)

    def test_not_admissible(self):
        profile = parse_profile('log', domain_end=20.0)
        self.assertRaises(NotAdmissible, solve_B, profile, scaled_upstream(10.0, 1.4))

    def test_dispatch(self):
        self.assertEqual(solve('B', linear(), self.state).state, self.scaled)
        self.assertRaises(ClosedFormError, solve, 'A', linear(), self.scaled)
        self.assertRaises(ClosedFormError, solve, 'C', linear(), self.state)

    def test_force(self):
        force = pressure_force_density(solve_B(linear(), self.scaled), 1.0)
        npt.assert_allclose(force, np.array([1.0, -1.0]) * (1 / 1.4 + 1) / math.sqrt(2))
        force = pressure_force_density(solve_A(linear(), self.state), np.array([1.0, 2.0]))
        npt.assert_allclose(np.hypot(force[:, 0], force[:, 1]), 0.0170438472, rtol=1e-9)

    def test_nonlinear_constraints(self):
        for spec in ('linear', 'power:a=1,p=2', 'log'):
            profile = parse_profile(spec)
            for sol in (solve_A(profile, self.state), solve_B(profile, self.scaled),
                        solve_A3(profile, self.state), solve_B3(profile, self.scaled)):
                with self.subTest(problem=sol.problem, profile=spec):
                    residuals = nonlinear_constraint_residuals(sol, self.grid)
                    self.assertLessEqual(max(residuals.values()), 1e-10)

    def test_weight_odes(self):
        grid = np.linspace(0.05, 4.95, 512)
        for spec in ('linear', 'power:a=1,p=2', 'log'):
            profile = parse_profile(spec)
            for sol in (solve_A(profile, self.state), solve_B(profile, self.scaled),
                        solve_A3(profile, self.state), solve_B3(profile, self.scaled)):
                with self.subTest(problem=sol.problem, profile=spec):
                    residuals = weight_ode_residuals(sol, grid)
                    self.assertLessEqual(max(residuals.values()), 1e-6)

    def test_csv(self):
        sol = solve_B(linear(), self.scaled)
        stream = io.StringIO()
        write_csv(sol, np.linspace(0, 5, 101), stream, {'problem': 'B'})
        lines = stream.getvalue().splitlines()
        self.assertEqual(lines[0], '# config: {"problem": "B"}')
        header = lines[1].split(',')
        self.assertEqual(header[:3], ['x', 'w_rho', 'w_m0'])
        self.assertEqual(len(lines), 103)
        column = header.index('w_p')
        for line in lines[2:]:
            self.assertAlmostEqual(float(line.split(',')[column]), 1.7142857, places=7)

    def test_csv_genfromtxt(self):
        sol = solve_B(linear(), self.scaled)
        grid = np.linspace(0, 5, 101)
        stream = io.StringIO()
        write_csv(sol, grid, stream, {'problem': 'B', 'grid': '0:5:101'})
        table = np.genfromtxt(io.StringIO(stream.getvalue()), delimiter=',', names=True, skip_header=1)
        self.assertEqual(len(table), 101)
        npt.assert_array_equal(table['x'], grid)
        npt.assert_allclose(table['w_p'], 1 / 1.4 + 1, rtol=1e-12)

    def test_weights_vanish_at_nose(self):
        for spec in ('linear', 'power:a=1,p=2', 'log'):
            profile = parse_profile(spec)
            for sol in (solve_A(profile, self.state), solve_B(profile, self.scaled),
                        solve_A3(profile, self.state), solve_B3(profile, self.scaled)):
                for role, weight in sol.weights.items():
                    with self.subTest(problem=sol.problem, profile=spec, role=role):
                        self.assertAlmostEqual(float(weight(0.0)), 0.0, places=12)

    def test_upstream_scaling(self):
        x = np.linspace(0.0, 5.0, 11)
        base = solve_A(linear(), self.state)
        heavy = solve_A(linear(), upstream(1.0, 0.1, 1.4, rho_inf=2.0, u_inf=3.0))
        npt.assert_allclose(heavy.density_weight(x), 2 * base.density_weight(x), rtol=1e-12)
        npt.assert_allclose(heavy.pressure_weight(x), 18 * base.pressure_weight(x), rtol=1e-12)
        npt.assert_allclose(heavy.weights['mass_x'](x), 6 * base.weights['mass_x'](x), rtol=1e-12)

    def test_axisymmetric_columns(self):
        names, rows = sample_table(solve_B3(linear(), self.scaled), self.grid)
        self.assertIn('w_a0', names)
        self.assertNotIn('w_m0', names)
        self.assertEqual(rows.shape, (512, len(names)))


class VerifierTest(unittest.TestCase):

    def setUp(self):
        self.state = upstream(1.0, 0.1, 1.4)
        self.scaled = scaled_upstream(1.0, 1.4)

    def assertVerified(self, sol, n=6, seed=7):
        bumps = sample_bumps(sol.region, n, seed)
        reports = verify_weak(sol, bumps, workers=1)
        self.assertEqual([r.equation for r in reports], ['mass', 'mom_x', 'mom_y', 'energy'])
        for report in reports:
            self.assertLessEqual(report.max_normalized, 1e-6, report.equation)
            report.check(1e-6)
        return reports

    def test_all_problems(self):
        self.assertVerified(solve_A(linear(), self.state))
        self.assertVerified(solve_B(linear(), self.scaled))
        self.assertVerified(solve_A3(linear(), self.state))
        self.assertVerified(solve_B3(linear(), self.scaled))

    def test_curved_profiles(self):
        for spec in ('power:a=1,p=2', 'log'):
            profile = parse_profile(spec)
            with self.subTest(profile=spec):
                self.assertVerified(solve_B(profile, self.scaled), n=3, seed=1)
                self.assertVerified(solve_A3(profile, self.state), n=3, seed=1)

    def test_interior_terms_vanish(self):
        sol = solve_A(linear(), self.state)
        bumps = [b for b in sample_bumps(sol.region, 9, 3) if classify_bump(sol.region, b) == INTERIOR]
        self.assertTrue(bumps)
        for report in verify_weak(sol, bumps, workers=1):
            for residual in report.residuals:
                self.assertLessEqual(abs(residual.raw), 1e-12)

    def test_threads(self):
        sol = solve_B(linear(), self.scaled)
        bumps = sample_bumps(sol.region, 4, 11)
        serial = verify_weak(sol, bumps, workers=1)
        threaded = verify_weak(sol, bumps, workers=3)
        for a, b in zip(serial, threaded):
            self.assertEqual([r.index for r in b.residuals], [0, 1, 2, 3])
            self.assertEqual([r.raw for r in a.residuals], [r.raw for r in b.residuals])

    def test_defect_detected(self):
        sol = solve_B(linear(), self.scaled)
        bumps = [b for b in sample_bumps(sol.region, 12, 5) if classify_bump(sol.region, b) == BOUNDARY]
        clean = verify_weak(sol, bumps, workers=1)[2].max_normalized
        pressure_weight = sol.pressure_weight
        sol.pressure_weight = lambda x: 1.05 * pressure_weight(x)
        report = verify_weak(sol, bumps, workers=1)[2]
        self.assertGreaterEqual(report.max_normalized, 1e-3)
        self.assertGreater(report.max_normalized, 100 * clean)
        self.assertRaises(VerificationError, report.check, 1e-6)

    def test_every_weight_matters(self):
        roles = {
            'mass_x': 'mass', 'mass_y': 'mass',
            'momx_x': 'mom_x', 'momx_y': 'mom_x',
            'momy_x': 'mom_y', 'momy_y': 'mom_y',
            'energy_x': 'energy', 'energy_y': 'energy',
        }
        for sol in (solve_A(linear(), self.state), solve_B(linear(), self.scaled),
                    solve_A3(linear(), self.state), solve_B3(linear(), self.scaled)):
            bumps = [b for b in sample_bumps(sol.region, 9, 5) if classify_bump(sol.region, b) == BOUNDARY]
            clean = dict((r.equation, r.max_normalized) for r in verify_weak(sol, bumps, workers=1))
            weights = dict(sol.weights)
            for role, equation in roles.items():
                with self.subTest(problem=sol.problem, role=role):
                    sol.weights[role] = lambda x, w=weights[role]: 1.05 * w(x)
                    sol.components = sol.build_components()
                    try:
                        report = verify_weak(sol, bumps, workers=1)[EQUATIONS.index(equation)]
                    finally:
                        sol.weights = dict(weights)
                        sol.components = sol.build_components()
                    self.assertGreater(report.max_normalized, 1e-5)
                    self.assertGreater(report.max_normalized, 10 * clean[equation])
            pressure_weight = sol.pressure_weight
            sol.pressure_weight = lambda x: 1.05 * pressure_weight(x)
            try:
                reports = dict((r.equation, r) for r in verify_weak(sol, bumps, workers=1))
            finally:
                del sol.pressure_weight
            for equation in ('mom_x', 'mom_y'):
                with self.subTest(problem=sol.problem, role='pressure', equation=equation):
                    self.assertGreater(reports[equation].max_normalized, 1e-5)
                    self.assertGreater(reports[equation].max_normalized, 10 * clean[equation])

    def test_fifty_bumps(self):
        for spec in ('linear', 'power:a=1,p=2', 'log'):
            profile = parse_profile(spec)
            for sol in (solve_A(profile, self.state), solve_B(profile, self.scaled),
                        solve_A3(profile, self.state), solve_B3(profile, self.scaled)):
                with self.subTest(problem=sol.problem, profile=spec):
                    reports = self.assertVerified(sol, n=50, seed=7)
                    self.assertEqual(reports[0].coverage, {BOUNDARY: 17, INTERIOR: 17, INFLOW: 16})

    def test_short_domain(self):
        region = RegionSpec.over(make_profile('linear', [1.0], domain_end=0.6))
        bumps = sample_bumps(region, 12, 3)
        for phi in bumps:
            region.check_support(phi)
            (x0, y0), (rx, ry) = phi.center, phi.radii
            self.assertLessEqual(x0 + rx, 0.6 + 1e-12)
            self.assertLessEqual(y0 + ry, region.y_max + 1e-12)
        sol = solve_B(make_profile('linear', [1.0], domain_end=0.6), self.scaled)
        self.assertVerified(sol, n=6, seed=7)

    def test_scale_range(self):
        self.assertEqual(check_scale_range([0.2, 0.3]), (0.2, 0.3))
        for scale_range in ((0.5,), (0.5, 0.1), (0.0, 1.0), (0.1, float('inf')), ('a', 'b'), None):
            with self.subTest(scale_range=scale_range):
                self.assertRaises(VerificationError, check_scale_range, scale_range)
        self.assertRaises(VerificationError, sample_bumps, RegionSpec.over(linear()), 3, 1, (0.5,))

    def test_scaling_invariance(self):
        sol = solve_B3(linear(), self.scaled)
        phi = sample_bumps(sol.region, 1, 2)[0]
        terms, inflow = equation_terms(sol)['mom_y']
        raw, normalized, _ = evaluate_terms(terms, inflow, sol.flavor, phi)
        for alpha in (1e-3, 1.0, 1e3):
            scaled_raw, scaled_normalized, _ = evaluate_terms(terms, inflow, sol.flavor, phi.scaled(alpha))
            self.assertAlmostEqual(scaled_normalized, normalized, places=12)
            self.assertAlmostEqual(scaled_raw, alpha * raw, delta=1e-12 * max(1.0, alpha))

    def test_zero_solution(self):
        region = RegionSpec.over(linear())
        zero = RadonMeasure(region, PLANAR)
        phi = make_bump((2, 2), (0.5, 0.5))
        terms = [Term('zero_x', zero, D_X), Term('zero_y', zero, D_Y), Term('zero', zero)]
        raw, normalized, values = evaluate_terms(terms, 0.0, PLANAR, phi)
        self.assertEqual((raw, normalized), (0.0, 0.0))
        self.assertEqual(set(values.values()), {0.0})

    def test_sample_bumps(self):
        region = RegionSpec.over(linear())
        self.assertEqual(sample_bumps(region, 3, 42), sample_bumps(region, 3, 42))
        bumps = sample_bumps(region, 50, 7)
        self.assertEqual(len(set(b.center for b in bumps)), 50)
        for b in sample_bumps(region, 30, 1, scale_range=(0.1, 0.5)):
            self.assertTrue(all(0.1 <= r <= 0.5 for r in b.radii))
        self.assertRaises(VerificationError, sample_bumps, region, 0, 1)

    def test_coverage(self):
        sol = solve_B(linear(), self.scaled)
        report = verify_weak(sol, sample_bumps(sol.region, 6, 9), workers=1)[0]
        self.assertEqual(report.coverage, {BOUNDARY: 2, INTERIOR: 2, INFLOW: 2})

    def test_tau_identity(self):
        for spec, tau, axisymmetric in (('linear', 0.1, False), ('power:a=1,p=2', 0.5, False),
                                        ('linear', 0.1, True)):
            profile = parse_profile(spec)
            state = upstream(1.0, tau, 1.4)
            region = RegionSpec.over(profile, tau, axisymmetric).scaled()
            with self.subTest(profile=spec, tau=tau, axisymmetric=axisymmetric):
                results = verify_tau_identity(profile, state, sample_bumps(region, 6, 4),
                                              axisymmetric, TIGHT)
                self.assertLessEqual(max(r.rel_err for r in results), 1e-9)

    def test_tau_identity_disjoint(self):
        phi = make_bump((4, 1), (0.3, 0.3))
        result = verify_tau_identity(linear(), self.state, [phi])[0]
        self.assertEqual((result.lhs, result.rhs, result.rel_err), (0.0, 0.0, 0.0))


class AnalysisTest(unittest.TestCase):

    taus = [0.2, 0.1, 0.05, 0.025]

    def test_scaled_traces(self):
        x = np.array([0.1, 1.0, 4.0])
        for trace in (scaled_trace_A, scaled_trace_A3):
            u, v, E = trace(linear(), 1.0, 1.4, 0.1, x)
            npt.assert_allclose(u, -1 / 1.01, rtol=1e-9)
            npt.assert_allclose(v, 1 / 1.01, rtol=1e-12)
            npt.assert_allclose(E, 5.0, rtol=1e-12)

    def test_converge_wedge(self):
        for axisymmetric in (False, True):
            reports = dict((r.quantity, r) for r in converge(linear(), 1.0, 1.4, self.taus,
                                                               axisymmetric=axisymmetric, workers=1))
            expected = [t * t / (1 + t * t) for t in self.taus]
            npt.assert_allclose(reports['u_trace'].sup_errors, expected, rtol=1e-8)
            npt.assert_allclose(reports['v_trace'].sup_errors, expected, rtol=1e-8)
            npt.assert_allclose(reports['density_weight_ratio'].sup_errors,
                                [t * t for t in self.taus], rtol=1e-9)
            self.assertLessEqual(max(reports['E_trace'].sup_errors), 1e-9)
            self.assertTrue(reports['pressure_weight'].decreasing)
            self.assertAlmostEqual(reports['u_trace'].fitted_rate, 2.0, delta=0.05)

    def test_converge_curved(self):
        for spec in ('power:a=1,p=2', 'log'):
            reports = converge(parse_profile(spec), 1.0, 1.4, self.taus, workers=2)
            for report in reports:
                if report.quantity == 'E_trace':
                    continue
                with self.subTest(profile=spec, quantity=report.quantity):
                    self.assertTrue(report.decreasing)
                    self.assertTrue(all(report.admissible))

    def test_converge_from_nose(self):
        grid = np.linspace(0, 5, 11)
        for axisymmetric in (False, True):
            with self.subTest(axisymmetric=axisymmetric):
                reports = dict((r.quantity, r) for r in converge(linear(), 1.0, 1.4, self.taus, grid=grid,
                                                                   axisymmetric=axisymmetric, workers=1))
                squares = [t * t for t in self.taus]
                npt.assert_allclose(reports['density_weight_ratio'].sup_errors, squares, rtol=1e-9)
                npt.assert_allclose(reports['density_weight_ratio'].endpoint_errors, squares, rtol=1e-9)
                npt.assert_allclose(reports['u_trace'].endpoint_errors,
                                    [t * t / (1 + t * t) for t in self.taus], rtol=1e-8)
                for report in reports.values():
                    self.assertTrue(report.finite, report.quantity)
                    self.assertNotIn(None, report.as_dict()['sup_errors'])
                    self.assertNotIn(None, report.as_dict()['endpoint_errors'])

    def test_finite(self):
        nan = float('nan')
        grid = np.linspace(0, 1, 3)
        self.assertFalse(ConvergenceReport('u_trace', [0.1], [nan], nan, grid, [True], [0.0]).finite)
        self.assertFalse(ConvergenceReport('u_trace', [0.1], [0.0], nan, grid, [True], [nan]).finite)
        self.assertTrue(ConvergenceReport('u_trace', [0.1], [nan], nan, grid, [False], [nan]).finite)

    def test_empty_grid(self):
        self.assertRaises(BadParameter, converge, linear(), 1.0, 1.4, self.taus, grid=[], workers=1)

    def test_csv(self):
        reports = converge(linear(), 1.0, 1.4, [0.2, 0.1], workers=1)
        stream = io.StringIO()
        write_convergence_csv(reports, stream)
        lines = stream.getvalue().splitlines()
        self.assertEqual(lines[0], 'tau,sup_err_u,sup_err_v,sup_err_E,sup_err_density_ratio,sup_err_wp')
        self.assertEqual(len(lines), 3)
        self.assertIsNone(reports[0].as_dict()['fitted_rate'])

    def test_jacobians(self):
        state = HSDState(1.0, 0.0, 0.0, 2 / 0.4)
        dW, dH = hsd_flux_jacobians(state, 1.4)
        npt.assert_allclose(dW[1], [1 / 1.4, 1 / 1.4, 0.0, 0.4 / 2.8])
        self.assertEqual(dW[1, 2], 0.0)
        self.assertAlmostEqual(char_poly(state, 1.4, state.v), 0.0, places=12)

    def random_states(self, n=20):
        rng = np.random.default_rng(2024)
        for _ in range(n):
            rho, u, v, c = rng.uniform(0.5, 2.0), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.2, 2.0)
            gamma = rng.uniform(1.2, 3.0)
            yield HSDState.from_sound_speed(rho, u, v, c, gamma), gamma

    def hadamard(self, state, gamma, lam):
        "Product of the row norms of lam dW - dH, a bound on its determinant"
        dW, dH = hsd_flux_jacobians(state, gamma)
        return float(np.prod(np.linalg.norm(lam * dW - dH, axis=1)))

    def test_char_poly(self):
        for state, gamma in self.random_states():
            for lam in hsd_eigen(state, gamma).eigenvalues:
                scale = self.hadamard(state, gamma, lam)
                self.assertLessEqual(abs(char_poly(state, gamma, lam)), 1e-10 * scale)
            for lam in (-1.0, 0.5, 2.0):
                scale = self.hadamard(state, gamma, lam)
                difference = char_poly(state, gamma, lam) - char_poly_closed_form(state, gamma, lam)
                self.assertLessEqual(abs(difference), 1e-10 * scale)

    def test_eigenvalues(self):
        state = HSDState.from_sound_speed(1.0, 0.0, 0.3, 1.0, 1.4)
        npt.assert_allclose(hsd_eigen(state, 1.4).eigenvalues, [-0.7, 0.3, 0.3, 1.3])
        state = HSDState.from_sound_speed(1.0, 0.0, 0.0, 1.0, 1.4)
        npt.assert_allclose(hsd_eigen(state, 1.4).eigenvalues, [-1.0, 0.0, 0.0, 1.0])

    def test_eigenvectors(self):
        for state, gamma in self.random_states():
            report = hsd_eigen(state, gamma)
            dW, dH = hsd_flux_jacobians(state, gamma)
            for lam, r in zip(report.eigenvalues, report.eigenvectors):
                residual = (lam * dW - dH) @ r
                scale = (abs(lam) * np.abs(dW).max() + np.abs(dH).max()) * np.abs(r).max()
                self.assertLessEqual(np.abs(residual).max(), 1e-10 * scale)
            numeric = np.sort(np.linalg.eigvals(np.linalg.solve(dW, dH)).real)
            npt.assert_allclose(numeric, report.eigenvalues, atol=1e-7)

    def test_characteristic_fields(self):
        for state, gamma in self.random_states():
            for i in (2, 3):
                value, kind = characteristic_field_class(state, gamma, i)
                self.assertLessEqual(abs(value), 1e-6)
                self.assertEqual(kind, LINEARLY_DEGENERATE)
            for i in (1, 4):
                value, kind = characteristic_field_class(state, gamma, i)
                self.assertAlmostEqual(value, field_value_closed_form(state, gamma, i), delta=1e-5)
                self.assertEqual(kind, GENUINELY_NONLINEAR)

    def test_field_value_at_half_sound_speed(self):
        state = HSDState.from_sound_speed(1.0, 0.0, 0.0, 0.5, 1.4)
        value, _ = characteristic_field_class(state, 1.4, 4)
        self.assertAlmostEqual(value, (1.4 - 1) * 0.5 + 1, delta=1e-5)

    def test_non_hyperbolic(self):
        state = HSDState(1.0, 1.0, 0.0, 1.0)
        self.assertRaises(NonHyperbolic, hsd_eigen, state, 1.4)


class SettingsTest(unittest.TestCase):

    def test_load(self):
        with mock.patch.dict(os.environ, {settings.SETTINGS_VARIABLE: ''}):
            self.assertEqual(settings.load().RESIDUAL_TOL, 1e-6)
        self.assertEqual(settings.load('test').BUMP_COUNT, 6)
        self.assertRaises(settings.SettingsError, settings.load, 'staging')

    def test_logging_levels(self):
        self.assertEqual(settings.load('base').LOGGING['loggers']['hyperslender']['level'], 'WARNING')
        self.assertEqual(settings.load('development').LOGGING['loggers']['hyperslender']['level'], 'DEBUG')

    def test_worker_count(self):
        for value, expected in (('4', 4), ('0', 1), ('many', 1)):
            with mock.patch.dict(os.environ, {settings.THREADS_VARIABLE: value}):
                self.assertEqual(settings.worker_count(), expected)


class CliTest(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmp)

    def invoke(self, *argv):
        stdout = io.StringIO()
        stderr = io.StringIO()
        with contextlib.redirect_stderr(stderr):
            code = run(list(argv), stdout, stderr)
        return code, stdout.getvalue(), stderr.getvalue()

    def path(self, name):
        return os.path.join(self.tmp, name)

    def test_solve(self):
        out = self.path('sol.csv')
        code, stdout, _ = self.invoke('solve', '--problem', 'B', '--profile', 'linear:a=1', '--K', '1',
                                      '--gamma', '1.4', '--grid', '0:5:101', '--out', out)
        self.assertEqual(code, EXIT_OK)
        config = json.loads(stdout)
        self.assertEqual(config['problem'], 'B')
        with open(out) as stream:
            lines = stream.read().splitlines()
        self.assertTrue(lines[0].startswith('# config: '))
        self.assertEqual(len(lines), 103)
        column = lines[1].split(',').index('w_p')
        self.assertAlmostEqual(float(lines[50].split(',')[column]), 1.7142857, places=7)

    def test_deterministic(self):
        outputs = []
        for name in ('one.csv', 'two.csv'):
            self.invoke('solve', '--problem', 'A3', '--profile', 'log', '--tau', '0.1', '--out', self.path(name))
            with open(self.path(name), 'rb') as stream:
                outputs.append(stream.read().replace(name.encode(), b''))
        self.assertEqual(outputs[0], outputs[1])

    def test_tau_rejected(self):
        code, _, stderr = self.invoke('solve', '--problem', 'B', '--profile', 'linear', '--tau', '0.1')
        self.assertEqual(code, EXIT_USAGE)
        self.assertIn('--tau', stderr)

    def test_tau_required(self):
        code, _, stderr = self.invoke('solve', '--problem', 'A', '--profile', 'linear')
        self.assertEqual(code, EXIT_USAGE)
        self.assertIn('--tau', stderr)

    def test_bad_profile(self):
        code, _, stderr = self.invoke('solve', '--problem', 'B', '--profile', 'wedge')
        self.assertEqual(code, EXIT_USAGE)
        self.assertIn('wedge', stderr)

    def test_not_admissible(self):
        code, _, _ = self.invoke('solve', '--problem', 'B', '--profile', 'log', '--K', '10',
                                 '--domain-end', '20')
        self.assertEqual(code, EXIT_NOT_ADMISSIBLE)
        code, stdout, _ = self.invoke('admissible', '--problem', 'B', '--profile', 'log', '--K', '10',
                                      '--domain-end', '20')
        self.assertEqual(code, EXIT_NOT_ADMISSIBLE)

    def test_eigen(self):
        out = self.path('eig.json')
        code, _, _ = self.invoke('eigen', '--rho', '1', '--u', '0', '--v', '0.3', '--E', '5.09',
                                 '--gamma', '1.4', '--out', out)
        self.assertEqual(code, EXIT_OK)
        with open(out) as stream:
            report = json.load(stream)
        npt.assert_allclose(report['eigenvalues'], [-0.7, 0.3, 0.3, 1.3], atol=1e-12)

    def test_verify(self):
        out = self.path('report.json')
        code, _, _ = self.invoke('verify', '--problem', 'A', '--profile', 'linear:a=1', '--K', '1',
                                 '--tau', '0.1', '--gamma', '1.4', '--bumps', '6', '--seed', '7',
                                 '--tau-identity', '--out', out)
        self.assertEqual(code, EXIT_OK)
        with open(out) as stream:
            report = json.load(stream)
        self.assertTrue(report['passed'])
        self.assertLessEqual(max(report['max_normalized'].values()), 1e-6)

    def test_converge(self):
        out = self.path('conv.csv')
        rates = self.path('rates.json')
        code, _, _ = self.invoke('converge', '--profile', 'linear', '--taus', '0.2,0.1,0.05',
                                 '--grid', '0.001:5:64', '--out', out, '--report', rates)
        self.assertEqual(code, EXIT_OK)
        with open(rates) as stream:
            self.assertEqual(len(json.load(stream)['reports']), 5)

    def test_converge_from_nose(self):
        rates = self.path('rates.json')
        code, _, _ = self.invoke('converge', '--profile', 'linear', '--taus', '0.2,0.1,0.05',
                                 '--grid', '0:5:11', '--out', self.path('conv.csv'), '--report', rates)
        self.assertEqual(code, EXIT_OK)
        with open(rates) as stream:
            for report in json.load(stream)['reports']:
                self.assertTrue(report['finite'], report['quantity'])
                self.assertNotIn(None, report['sup_errors'])
                self.assertNotIn(None, report['endpoint_errors'])

    def test_converge_not_finite(self):
        nan = float('nan')
        reports = [ConvergenceReport(q, [0.1], [nan], nan, np.linspace(0, 1, 3), [True], [0.0])
                   for q in QUANTITIES]
        with mock.patch('hyperslender.cli.converge', return_value=reports):
            code, _, _ = self.invoke('converge', '--profile', 'linear', '--out', self.path('conv.csv'))
        self.assertEqual(code, EXIT_VERIFICATION)

    def test_upstream_flags(self):
        tables = []
        for extra in ((), ('--rho-inf', '2', '--u-inf', '3')):
            out = self.path('sol.csv')
            code, stdout, _ = self.invoke('solve', '--problem', 'A', '--profile', 'linear', '--tau', '0.1',
                                          '--grid', '0:5:11', '--out', out, *extra)
            self.assertEqual(code, EXIT_OK)
            tables.append(np.genfromtxt(out, delimiter=',', names=True, skip_header=1))
        config = json.loads(stdout)
        self.assertEqual((config['rho_inf'], config['u_inf']), (2.0, 3.0))
        base, heavy = tables
        npt.assert_allclose(heavy['w_rho'], 2 * base['w_rho'], rtol=1e-12)
        npt.assert_allclose(heavy['w_p'], 9 * 2 * base['w_p'], rtol=1e-12)

    def test_quadrature_flags(self):
        code, stdout, _ = self.invoke('--quad-abs-tol', '1e-12', '--quad-rel-tol', '1e-10', 'eigen',
                                      '--rho', '1', '--u', '0', '--v', '0.3', '--E', '5.09')
        self.assertEqual(code, EXIT_OK)
        config = json.JSONDecoder().raw_decode(stdout)[0]
        self.assertEqual((config['quad_abs_tol'], config['quad_rel_tol']), (1e-12, 1e-10))

    def test_short_domain(self):
        code, _, stderr = self.invoke('verify', '--problem', 'B', '--profile', 'linear', '--domain-end', '0.6',
                                      '--bumps', '6', '--out', self.path('report.json'))
        self.assertEqual(code, EXIT_OK, stderr)

    def test_bad_bump_options(self):
        for argv in (('--bumps', '0'), ('--bumps', 'many'), ('--scale-range', '0.5'),
                     ('--scale-range', '0.5,0.1'), ('--scale-range', '0,1')):
            with self.subTest(argv=argv):
                code, _, _ = self.invoke('verify', '--problem', 'B', '--profile', 'linear', *argv)
                self.assertEqual(code, EXIT_USAGE)

    def test_tau_identity_needs_dimensional_problem(self):
        code, _, stderr = self.invoke('verify', '--problem', 'B', '--profile', 'linear', '--tau-identity')
        self.assertEqual(code, EXIT_USAGE)
        self.assertIn('--tau-identity', stderr)
