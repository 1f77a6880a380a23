"""Upstream states and the similarity scaling

Dimensional variables (x, y, u, v, E, rho, p) are mapped to the barred
small-disturbance variables by

    x_bar = x, y_bar = y / tau
    u_bar = (u - u_inf) / (u_inf tau^2), v_bar = v / (u_inf tau)
    rho_bar = rho / rho_inf, p_bar = p / (gamma p_inf M_inf^2 tau^2)
    E_bar = (2 E - u_inf^2) / (u_inf^2 tau^2)

and, for cones, z_bar = z / tau, w_bar = w / (u_inf tau).
"""
from dataclasses import dataclass, asdict
import math

__all__ = [
    'FlowStateError',
    'BadParameter',
    'UpstreamState',
    'ScaledUpstreamState',
    'upstream',
    'scaled_upstream',
    'scale_point',
    'unscale_point',
    'scale_fields',
    'pressure_from_state',
    'scaled_pressure',
]


class FlowStateError(Exception):
    pass


class BadParameter(FlowStateError):
    pass


def _positive(name, value):
    value = float(value)
    if not (math.isfinite(value) and value > 0):
        raise BadParameter('%s must be positive, got %r' % (name, value))
    return value


def check_similarity(gamma, K, tau=None, allow_zero_tau=False):
    "Validate (gamma, K[, tau]) and return them as floats"
    gamma = float(gamma)
    if not (math.isfinite(gamma) and gamma > 1):
        raise BadParameter('gamma must exceed 1, got %r' % gamma)
    K = _positive('K', K)
    if tau is None:
        return gamma, K, None
    tau = float(tau)
    if allow_zero_tau and tau == 0.0:
        return gamma, K, tau
    if not (math.isfinite(tau) and 0 < tau < 1):
        raise BadParameter('tau must lie in (0, 1), got %r' % tau)
    return gamma, K, tau


@dataclass(frozen=True)
class ScaledUpstreamState:
    E_bar_inf: float
    p_bar_inf: float
    gamma: float
    K: float

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class UpstreamState:
    rho_inf: float
    u_inf: float
    E_inf: float
    p_inf: float
    gamma: float
    tau: float
    K: float

    @property
    def mach(self):
        return self.K / self.tau

    M_inf = mach

    def scaled(self):
        return scaled_upstream(self.K, self.gamma)

    def as_dict(self):
        data = asdict(self)
        data['M_inf'] = self.mach
        return data


def upstream(K, tau, gamma, rho_inf=1.0, u_inf=1.0):
    gamma, K, tau = check_similarity(gamma, K, tau)
    rho_inf = _positive('rho_inf', rho_inf)
    u_inf = _positive('u_inf', u_inf)
    E_inf = 0.5 * u_inf**2 * (1 + 2 * tau**2 / ((gamma - 1) * K**2))
    p_inf = rho_inf * u_inf**2 * tau**2 / (gamma * K**2)
    return UpstreamState(rho_inf, u_inf, E_inf, p_inf, gamma, tau, K)


def scaled_upstream(K, gamma):
    gamma, K, _ = check_similarity(gamma, K)
    return ScaledUpstreamState(2 / ((gamma - 1) * K**2), 1 / (gamma * K**2), gamma, K)


def scale_point(x, y, tau, z=None):
    if z is None:
        return x, y / tau
    return x, y / tau, z / tau


def unscale_point(x_bar, y_bar, tau):
    return x_bar, y_bar * tau


def scale_fields(u, v, E, rho, p, state, w=None):
    """Map dimensional fields to (u_bar, v_bar, E_bar, rho_bar, p_bar[, w_bar])"""
    u_inf, tau = state.u_inf, state.tau
    u_bar = (u - u_inf) / (u_inf * tau**2)
    v_bar = v / (u_inf * tau)
    E_bar = (2 * E - u_inf**2) / (u_inf**2 * tau**2)
    rho_bar = rho / state.rho_inf
    p_bar = p / (state.gamma * state.p_inf * state.mach**2 * tau**2)
    if w is None:
        return u_bar, v_bar, E_bar, rho_bar, p_bar
    return u_bar, v_bar, E_bar, rho_bar, p_bar, w / (u_inf * tau)


def pressure_from_state(rho, u, v, E, gamma, w=0.0):
    "Polytropic equation of state with E the total enthalpy per unit mass"
    return (gamma - 1) / gamma * rho * (E - 0.5 * (u**2 + v**2 + w**2))


def scaled_pressure(rho_bar, u_bar, v_bar, E_bar, gamma):
    return (gamma - 1) * rho_bar * (E_bar - 2 * u_bar - v_bar**2) / (2 * gamma)
