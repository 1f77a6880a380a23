"""Command line entry point

    hyperslender solve --problem B --profile linear:a=1 --K 1 --grid 0:5:101 --out sol.csv
    hyperslender verify --problem A --profile linear:a=1 --K 1 --tau 0.1 --bumps 50 --seed 7
    hyperslender solve --problem A --profile log --tau 0.1 --rho-inf 2 --u-inf 3
    hyperslender converge --profile power:a=1,p=2 --K 1 --taus 0.2,0.1,0.05,0.025
    hyperslender eigen --rho 1 --u 0 --v 0.3 --E 5.09 --gamma 1.4
    hyperslender admissible --problem A3 --profile linear --K 1 --tau 0.1

Every run first prints its resolved configuration as JSON on standard output.
"""
import argparse
import json
import logging
import sys

import numpy as np

from hyperslender import settings
from hyperslender.analysis import (
    AnalysisError,
    HSDState,
    converge,
    hsd_eigen,
    write_convergence_csv,
)
from hyperslender.closed_forms import SOLVERS, ClosedFormError, NotAdmissible, solve, write_csv
from hyperslender.flow_state import FlowStateError, scaled_upstream, upstream
from hyperslender.geometry import (
    GeometryError,
    admissible_A,
    admissible_A3,
    admissible_B,
    admissible_B3,
    parse_profile,
)
from hyperslender.measure import MeasureError
from hyperslender.quadrature import QuadratureConfig, QuadratureError
from hyperslender.verifier import (
    VerificationError,
    check_scale_range,
    sample_bumps,
    summarize,
    verify_tau_identity,
    verify_weak,
)

_LOG = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_ADMISSIBLE = 2
EXIT_VERIFICATION = 3

DIMENSIONAL_PROBLEMS = ('A', 'A3')

__all__ = ['ArgumentParser', 'build_parser', 'run', 'main']


class ArgumentParser(argparse.ArgumentParser):

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, '%s: error: %s\n' % (self.prog, message))


def parse_grid(text):
    "start:end:count -> evenly spaced points"
    try:
        start, end, count = text.split(':')
        start, end, count = float(start), float(end), int(count)
    except ValueError:
        raise argparse.ArgumentTypeError('Grid must read start:end:count, got %r' % text)
    if count < 1 or end < start:
        raise argparse.ArgumentTypeError('Empty grid %r' % text)
    return text


def parse_floats(text):
    try:
        return [float(t) for t in text.split(',') if t]
    except ValueError:
        raise argparse.ArgumentTypeError('Expected comma separated numbers, got %r' % text)


def parse_scale_range(text):
    "low,high with 0 < low <= high"
    try:
        return list(check_scale_range(parse_floats(text)))
    except VerificationError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def parse_count(text):
    try:
        count = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError('Expected a whole number, got %r' % text)
    if count < 1:
        raise argparse.ArgumentTypeError('Need at least one, got %d' % count)
    return count


def _grid_points(text):
    start, end, count = text.split(':')
    return np.linspace(float(start), float(end), int(count))


def _add_flow(parser, conf, with_problem=True):
    if with_problem:
        parser.add_argument('--problem', choices=sorted(SOLVERS), required=True)
    parser.add_argument('--profile', required=True, help='e.g. linear:a=1, power:a=1,p=2, sum:linear+log:k=2')
    parser.add_argument('--K', type=float, default=conf.K, help='hypersonic similarity parameter')
    parser.add_argument('--gamma', type=float, default=conf.GAMMA)
    parser.add_argument('--domain-end', type=float, default=conf.DOMAIN_END)
    parser.add_argument('--rho-inf', type=float, default=conf.RHO_INF, help='upstream density')
    parser.add_argument('--u-inf', type=float, default=conf.U_INF, help='upstream speed')


def _add_tau(parser):
    parser.add_argument('--tau', type=float, help='slenderness ratio (problems A and A3 only)')


def build_parser(conf=None):
    conf = conf or settings.load()
    parser = ArgumentParser(prog='hyperslender', description='Measure solutions of hypersonic flow past slender bodies')
    parser.add_argument('--settings', help='settings module (default: $HYPERSLENDER_SETTINGS or base)')
    parser.add_argument('--quad-abs-tol', type=float, default=conf.QUADRATURE_ABS_TOL)
    parser.add_argument('--quad-rel-tol', type=float, default=conf.QUADRATURE_REL_TOL)
    commands = parser.add_subparsers(dest='command', metavar='command')
    commands.required = True

    solve_cmd = commands.add_parser('solve', help='tabulate a closed-form solution as CSV')
    _add_flow(solve_cmd, conf)
    _add_tau(solve_cmd)
    solve_cmd.add_argument('--grid', type=parse_grid, help='start:end:count (default 0:<domain end>:101)')
    solve_cmd.add_argument('--out', help='CSV path (default standard output)')

    verify_cmd = commands.add_parser('verify', help='check the weak balance laws on seeded bumps')
    _add_flow(verify_cmd, conf)
    _add_tau(verify_cmd)
    verify_cmd.add_argument('--bumps', type=parse_count, default=conf.BUMP_COUNT)
    verify_cmd.add_argument('--seed', type=int, default=conf.BUMP_SEED)
    verify_cmd.add_argument('--scale-range', type=parse_scale_range, default=list(conf.BUMP_SCALE_RANGE))
    verify_cmd.add_argument('--residual-tol', type=float, default=conf.RESIDUAL_TOL)
    verify_cmd.add_argument('--tau-identity', action='store_true',
                            help='also compare the density measure with its stretched image')
    verify_cmd.add_argument('--out', help='JSON report path (default standard output)')

    converge_cmd = commands.add_parser('converge', help='similarity-law convergence sweep')
    _add_flow(converge_cmd, conf, with_problem=False)
    converge_cmd.add_argument('--taus', type=parse_floats, default=list(conf.CONVERGENCE_TAUS))
    converge_cmd.add_argument('--grid', type=parse_grid)
    converge_cmd.add_argument('--axisymmetric', action='store_true')
    converge_cmd.add_argument('--out', help='CSV path (default standard output)')
    converge_cmd.add_argument('--report', help='JSON path for the fitted rates')

    eigen_cmd = commands.add_parser('eigen', help='eigenstructure of the small-disturbance system')
    for name in ('rho', 'u', 'v', 'E'):
        eigen_cmd.add_argument('--%s' % name, type=float, required=True)
    eigen_cmd.add_argument('--gamma', type=float, default=conf.GAMMA)
    eigen_cmd.add_argument('--out', help='JSON path (default standard output)')

    admissible_cmd = commands.add_parser('admissible', help='check the admissibility condition')
    _add_flow(admissible_cmd, conf)
    _add_tau(admissible_cmd)
    return parser


def _check_tau(parser, args):
    if args.problem in DIMENSIONAL_PROBLEMS:
        if args.tau is None:
            parser.error('--tau is required for problem %s' % args.problem)
    elif args.tau is not None:
        parser.error('--tau is not used by problem %s' % args.problem)


def resolve(argv, conf=None):
    "(args, config dict, settings module)"
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument('--settings')
    known, _ = pre.parse_known_args(argv)
    conf = conf or settings.load(known.settings)
    parser = build_parser(conf)
    args = parser.parse_args(argv)
    if getattr(args, 'problem', None) is not None:
        _check_tau(parser, args)
    if getattr(args, 'tau_identity', False) and args.problem not in DIMENSIONAL_PROBLEMS:
        parser.error('--tau-identity needs problem A or A3, got %s' % args.problem)
    if getattr(args, 'grid', None) is None and args.command == 'solve':
        args.grid = '0:%r:101' % args.domain_end
    if getattr(args, 'grid', None) is None and args.command == 'converge':
        args.grid = '%r:%r:%d' % (conf.CONVERGENCE_GRID_START, args.domain_end, conf.CONVERGENCE_GRID_POINTS)
    config = dict(vars(args))
    config['settings'] = conf.__name__.rsplit('.', 1)[-1]
    config['panels'] = conf.ANTIDERIVATIVE_PANELS
    config['max_subdivisions'] = conf.QUADRATURE_MAX_SUBDIVISIONS
    return args, config, conf


def _quadrature(args, conf):
    return QuadratureConfig(args.quad_abs_tol, args.quad_rel_tol, conf.QUADRATURE_MAX_SUBDIVISIONS,
                            conf.ANTIDERIVATIVE_PANELS)


def _state(args):
    if args.problem in DIMENSIONAL_PROBLEMS:
        return upstream(args.K, args.tau, args.gamma, args.rho_inf, args.u_inf)
    return scaled_upstream(args.K, args.gamma)


def _emit(text, path, stdout):
    if path:
        with open(path, 'w', newline='') as stream:
            stream.write(text)
    else:
        stdout.write(text)


def _dump(data):
    return json.dumps(data, indent=2, sort_keys=True) + '\n'


def cmd_solve(args, config, conf, stdout):
    cfg = _quadrature(args, conf)
    profile = parse_profile(args.profile, args.domain_end)
    sol = solve(args.problem, profile, _state(args), cfg)
    if args.out:
        with open(args.out, 'w', newline='') as stream:
            write_csv(sol, _grid_points(args.grid), stream, config)
    else:
        write_csv(sol, _grid_points(args.grid), stdout, config)
    return EXIT_OK


def cmd_verify(args, config, conf, stdout):
    cfg = _quadrature(args, conf)
    profile = parse_profile(args.profile, args.domain_end)
    state = _state(args)
    sol = solve(args.problem, profile, state, cfg)
    bumps = sample_bumps(sol.region, args.bumps, args.seed, tuple(args.scale_range), conf.BUMP_ORDER)
    reports = verify_weak(sol, bumps, cfg)
    summary = summarize(sol, reports, args.residual_tol)
    summary['config'] = config
    passed = summary['passed']
    if args.tau_identity:
        stretched = sample_bumps(sol.region.scaled(), args.bumps, args.seed,
                                 tuple(args.scale_range), conf.BUMP_ORDER)
        identity = verify_tau_identity(profile, state, stretched, sol.axisymmetric, cfg)
        worst = max(r.rel_err for r in identity)
        summary['tau_identity'] = {
            'tolerance': conf.TAU_IDENTITY_TOL,
            'max_rel_err': worst,
            'results': [r.as_dict() for r in identity],
        }
        passed = passed and worst <= conf.TAU_IDENTITY_TOL
    _emit(_dump(summary), args.out, stdout)
    if not passed:
        _LOG.error('Verification of problem %s failed', sol.problem)
        return EXIT_VERIFICATION
    return EXIT_OK


def cmd_converge(args, config, conf, stdout):
    cfg = _quadrature(args, conf)
    profile = parse_profile(args.profile, args.domain_end)
    reports = converge(profile, args.K, args.gamma, args.taus, _grid_points(args.grid),
                       args.axisymmetric, cfg, rho_inf=args.rho_inf, u_inf=args.u_inf)
    if args.out:
        with open(args.out, 'w', newline='') as stream:
            write_convergence_csv(reports, stream, config)
    else:
        write_convergence_csv(reports, stdout, config)
    if args.report:
        _emit(_dump({'config': config, 'reports': [r.as_dict() for r in reports]}), args.report, stdout)
    if not all(r.finite for r in reports):
        _LOG.error('Convergence sweep for %s produced non-finite errors', profile.spec)
        return EXIT_VERIFICATION
    return EXIT_OK


def cmd_eigen(args, config, conf, stdout):
    report = hsd_eigen(HSDState(args.rho, args.u, args.v, args.E), args.gamma)
    data = report.as_dict()
    data['config'] = config
    _emit(_dump(data), args.out, stdout)
    return EXIT_OK


def cmd_admissible(args, config, conf, stdout):
    profile = parse_profile(args.profile, args.domain_end)
    points = conf.ADMISSIBILITY_GRID_POINTS
    cfg = _quadrature(args, conf)
    if args.problem == 'A':
        verdict = admissible_A(profile, args.tau, args.gamma, args.K, points, cfg)
    elif args.problem == 'A3':
        verdict = admissible_A3(profile, args.tau, args.gamma, args.K, points, cfg)
    elif args.problem == 'B':
        verdict = admissible_B(profile, args.gamma, args.K, points)
    else:
        verdict = admissible_B3(profile, args.gamma, args.K, points)
    stdout.write(_dump(verdict.as_dict()))
    return EXIT_OK if verdict else EXIT_NOT_ADMISSIBLE


COMMANDS = {
    'solve': cmd_solve,
    'verify': cmd_verify,
    'converge': cmd_converge,
    'eigen': cmd_eigen,
    'admissible': cmd_admissible,
}


def run(argv, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args, config, conf = resolve(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except settings.SettingsError as exc:
        stderr.write('hyperslender: %s\n' % exc)
        return EXIT_USAGE
    settings.configure_logging(conf)
    stdout.write(_dump(config))
    try:
        return COMMANDS[args.command](args, config, conf, stdout)
    except NotAdmissible as exc:
        stderr.write('hyperslender: %s\n' % exc)
        return EXIT_NOT_ADMISSIBLE
    except VerificationError as exc:
        stderr.write('hyperslender: %s\n' % exc)
        return EXIT_VERIFICATION
    except (GeometryError, FlowStateError, QuadratureError, MeasureError,
            ClosedFormError, AnalysisError) as exc:
        stderr.write('hyperslender: %s\n' % exc)
        return EXIT_USAGE


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == '__main__':
    main()
