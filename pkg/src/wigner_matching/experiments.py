"""
Named experiments. Each one reproduces a demonstration and returns its checks,
a measured value next to the tolerance it has to meet; `run_experiment` wraps
them into a Result the way a single command is validated.
"""
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Sequence

import numpy as np
from scipy.special import wofz

from wigner_matching import Result
from wigner_matching.catalog import ClosedFormSymbol, PointInteractionParams, build, point_scatter, step_scatter
from wigner_matching.catalog.symbols import oscillating_terms
from wigner_matching.config import ExperimentConfig
from wigner_matching.evolve import ComplexTime, evolution_series, moyal_rhs, oscillator_pair, stationary_ansatz_check
from wigner_matching.exceptions import ConfigException, WignerMatchingException
from wigner_matching.matcher import assemble_and_match, basis, coefficient_error, fit_coefficients
from wigner_matching.phase import Hamiltonian, SampledSymbol, make_grid, norms
from wigner_matching.phase.derivative import FiniteDifferenceBackend, SpectralBackend
from wigner_matching.phase.loader import dump_json, dump_symbol
from wigner_matching.phase.special import faddeeva
from wigner_matching.star import PolySymbol, check_associativity_identities, check_sign_convention
from wigner_matching.transform import fit_scale, wigner_of
from wigner_matching.verifier import (convergence_study, eigen_residual, harmonic_sse_residual, imaginary_part_checks,
                                      long_form_residual, quartic_free_residual, reflection_conflict, sse_residual)

ROBIN_K = (0.5, 1.0, 2.0)
ROBIN_L = (0.0, 1.0, math.inf)
ROBIN_BOUND_L = (1.0, 2.0)
POINT_DRAWS = 10
POINT_K = 1.0
JUMP_BELOW = ((1.0, 2.0),)
JUMP_ABOVE = ((2.0, 1.0),)
LONG_FORM_DRAWS = 20
FADDEEVA_POINTS = 200
FADDEEVA_RADIUS = 20.0
TRANSFORM_CASES = (('robin_scatter', {'k': 1.0, 'L': 1.0}), ('robin_bound', {'L': 1.0}), ('match_free_sho', {}))
REGION_NAMES = {'x<0': 'left', 'x>0': 'right', 'all': 'all'}

logger = logging.getLogger(__name__)


def _check(name: str, value: float, tolerance: float, bound: str = 'max', report=None):
    value = float(value)
    passed = value <= tolerance if bound == 'max' else value >= tolerance
    data = {'name': name, 'value': value, 'tolerance': tolerance, 'bound': bound, 'passed': bool(passed)}
    if report is not None:
        data['report'] = report
    if not passed:
        logger.error(f'{name}: {value:.3e} violates the {bound} bound {tolerance:.3e}')
    return data


def hamiltonian_for(symbols: Sequence[ClosedFormSymbol]) -> Hamiltonian:
    """Two-piece Hamiltonian split at x = 0 carrying the potentials of an entry's regions."""
    by_domain = {symbol.domain: symbol.potential for symbol in symbols}
    left = by_domain.get('x<0', by_domain.get('x>0', (0.0,)))
    right = by_domain.get('x>0', left)
    return Hamiltonian([(-math.inf, 0.0, left), (0.0, math.inf, right)], symbols[0].entry_id)


def _is_free(symbol: ClosedFormSymbol):
    return not any(symbol.potential[1:])


def _harmonic_checks(config: ExperimentConfig, symbol: ClosedFormSymbol, h: Hamiltonian):
    backend = config.derivative_backend()
    base = config.region_grid(symbol.domain, refine=2)

    def evaluate(grid):
        return harmonic_sse_residual(None, symbol, grid, backend)

    report = convergence_study(evaluate, base, levels=3)
    finite_orders = [order for order in report.extra['orders'] if math.isfinite(order)]
    worst_order = min(finite_orders) if finite_orders else math.inf
    imaginary = imaginary_part_checks(h, symbol, base, backend)
    return [
        _check(report.name, report.normalized, config.tolerance('harmonic_sse'), report=report.to_json()),
        _check(f'{report.name}:order', worst_order, config.tolerance('harmonic_order'), 'min'),
        _check(imaginary.name, imaginary.normalized, config.tolerance('imaginary_part'), 'min',
               report=imaginary.to_json()),
    ]


def entry_residuals(config: ExperimentConfig, entry_id: str, params: dict):
    """Star-eigen-star passes and star-eigen fails on every region of one entry."""
    symbols = build(entry_id, **params)
    h = hamiltonian_for(symbols)
    backend = config.derivative_backend()
    checks = []
    for symbol in symbols:
        if not _is_free(symbol):
            checks += _harmonic_checks(config, symbol, h)
            continue
        grid = config.region_grid(symbol.domain)
        sse = sse_residual(h, None, symbol, grid, backend)
        left, right = eigen_residual(h, None, symbol, grid, backend)
        checks.append(_check(f'{sse.name}{symbol.params}', sse.normalized, config.tolerance('sse'),
                             report=sse.to_json()))
        checks.append(_check(f'{symbol.name}:eigen{symbol.params}', max(left.normalized, right.normalized),
                             config.tolerance('eigen'), 'min', report=left.to_json()))
    return checks


def _point_draws(config: ExperimentConfig, bound: bool):
    rng = np.random.default_rng(config.seed)
    return [PointInteractionParams.random(rng, bound=bound) for _ in range(POINT_DRAWS)]


def catalog_experiment(config: ExperimentConfig):
    checks = []
    for k in ROBIN_K:
        for length in ROBIN_L:
            checks += entry_residuals(config, 'robin_scatter', {'k': k, 'L': length})
    for length in ROBIN_BOUND_L:
        checks += entry_residuals(config, 'robin_bound', {'L': length})
    for params in _point_draws(config, bound=True):
        checks += entry_residuals(config, 'point_bound', params.to_json())
    for params in _point_draws(config, bound=False):
        checks += entry_residuals(config, 'point_scatter', dict(params.to_json(), k=POINT_K))
    for k, v0 in JUMP_BELOW:
        checks += entry_residuals(config, 'jump_below', {'k': k, 'V0': v0})
    for k, v0 in JUMP_ABOVE:
        checks += entry_residuals(config, 'jump_above', {'k': k, 'V0': v0})
    return checks


def harmonic_experiment(config: ExperimentConfig):
    return entry_residuals(config, 'match_free_sho', {})


def identities_experiment(config: ExperimentConfig):
    rng = np.random.default_rng(config.seed)
    worst = {'jacobi': 0.0, 'mixed': 0.0, 'cyclic': 0.0}
    for _ in range(config.trials):
        f, g, h = (PolySymbol.random(rng, int(rng.integers(0, 5))) for _ in range(3))
        report = check_associativity_identities(f, g, h)
        scale = max(report['scale'] ** 3, np.finfo(float).tiny)
        for name in worst:
            worst[name] = max(worst[name], report[name] / scale)
    sign_error = check_sign_convention()
    summary = dict(worst, trials=config.trials, seed=config.seed, sign_error=sign_error)
    return [_check('associativity', max(worst.values()), config.tolerance('associativity'), report=summary)]


def _band_limited(rng: np.random.Generator, grid):
    modes = [(rng.uniform(-1.0, 1.0), rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5), rng.uniform(0.0, 2.0 * np.pi))
             for _ in range(3)]

    def field(xx, pp):
        total = np.zeros(np.broadcast(xx, pp).shape)
        for amplitude, kx, kp, phase in modes:
            total = total + amplitude * np.cos(kx * xx + kp * pp + phase)
        return total * np.exp(-(xx * xx + pp * pp) / 4.0)

    return SampledSymbol.from_function(grid, field, real=True, label='band_limited')


def long_form_experiment(config: ExperimentConfig):
    rng = np.random.default_rng(config.seed)
    grid = make_grid(-4.0, 4.0, -4.0, 4.0, 33, 33)
    backend = config.derivative_backend() or FiniteDifferenceBackend(4)
    worst, draws = 0.0, []
    for _ in range(LONG_FORM_DRAWS):
        degree = int(rng.integers(0, 4))
        potential = PolySymbol.from_terms({(m, 0): rng.uniform(-1.0, 1.0) for m in range(degree + 1)})
        energy = rng.uniform(-2.0, 2.0)
        rho = _band_limited(rng, grid)
        long_form = long_form_residual(potential, energy, rho, grid, backend)
        sse = sse_residual(PolySymbol.kinetic() + potential, energy, rho, grid, backend)
        interior = ~(long_form.residual.mask | sse.residual.mask)
        gap = np.max(np.abs(long_form.residual.values - sse.residual.values)[interior], initial=0.0)
        relative = float(gap) / max(sse.sup, np.finfo(float).tiny)
        worst = max(worst, relative)
        draws.append({'degree': degree, 'energy': energy, 'relative_gap': relative, 'terms': long_form.extra['terms']})
    return [_check('long_form', worst, config.tolerance('long_form'), report={'draws': draws})]


def transform_checks(config: ExperimentConfig, entry_id: str, params: dict):
    """Quadrature transform of an entry's wave function against each of its regions."""
    symbols = build(entry_id, **params)
    quadrature = config.quadrature_spec()
    checks = []
    for symbol in symbols:
        if symbol.wave is None:
            raise WignerMatchingException(f'{symbol.name} carries no wave function to transform.')
        grid = config.region_grid(symbol.domain)
        numeric = wigner_of(symbol.wave, grid, quadrature)
        model = symbol.sample(grid)
        scale = fit_scale(numeric, model) if symbol.transform_scale is None else symbol.transform_scale
        interior = ~(numeric.mask | model.mask)
        gap = np.abs(numeric.values - scale * model.values)[interior]
        reference = max(float(np.max(np.abs(numeric.values[interior]), initial=0.0)), np.finfo(float).tiny)
        report = {'scale': [complex(scale).real, complex(scale).imag], 'quadrature': numeric.meta,
                  'grid': grid.to_json()}
        checks.append(_check(f'{symbol.name}:transform{symbol.params}', float(np.max(gap, initial=0.0)) / reference,
                             config.tolerance('transform'), report=report))
    return checks


def transform_experiment(config: ExperimentConfig):
    checks = []
    for entry_id, params in TRANSFORM_CASES:
        checks += transform_checks(config, entry_id, params)
    return checks


def unitarity_experiment(config: ExperimentConfig):
    draws = _point_draws(config, bound=False)
    flux = max(abs(abs(t) ** 2 + abs(r) ** 2 - 1.0) for t, r, _ in (d.scattering_data(POINT_K) for d in draws))
    checks = [_check('point_scatter:unitarity', flux, config.tolerance('unitarity'))]
    worst = 0.0
    for params in draws:
        point = point_scatter(params, POINT_K)
        t, r, _ = params.scattering_data(POINT_K)
        step = step_scatter(POINT_K, POINT_K, r, t)
        for a, b in zip(point, step):
            grid = config.region_grid(a.domain)
            sa, sb = a.sample(grid), b.sample(grid)
            interior = ~(sa.mask | sb.mask)
            gap = np.max(np.abs(sa.values - sb.values)[interior], initial=0.0)
            reference = max(float(np.max(np.abs(sa.values[interior]), initial=0.0)), np.finfo(float).tiny)
            worst = max(worst, float(gap) / reference)
    checks.append(_check('jump_above:free_limit', worst, config.tolerance('free_limit')))
    return checks


def _fit_checks(config: ExperimentConfig, symbol: ClosedFormSymbol, tag: str):
    grid = config.region_grid(symbol.domain)
    fit = fit_coefficients(symbol, basis(symbol.local_energy), grid.p, x_range=(grid.x_min, grid.x_max))
    fit.to_csv(os.path.join(config.out_dir, 'match', f'{tag}_{REGION_NAMES[symbol.domain]}_fit.csv'))
    return _check(f'{symbol.name}:coefficients', coefficient_error(fit, symbol), config.tolerance('coefficients'),
                  report=fit.to_json())


def _interface_checks(config: ExperimentConfig, symbols: Sequence[ClosedFormSymbol]):
    p = config.region_grid('all').p
    if len(symbols) == 1:
        report = assemble_and_match(symbols[0], None, p, conditions=('wall',))
        return [_check(f'{symbols[0].name}:wall', report['conditions']['wall']['max'], config.tolerance('wall'),
                       report=report)]
    report = assemble_and_match(symbols[0], symbols[1], p, conditions=('c0', 'c1'))
    return [_check(f'{symbols[0].entry_id}:{name}', report['conditions'][name]['relative'],
                   config.tolerance('interface'), report=report) for name in ('c0', 'c1')]


def match_checks(config: ExperimentConfig, entry_id: str, params: dict):
    symbols = build(entry_id, **params)
    checks = [_fit_checks(config, symbol, entry_id) for symbol in symbols
              if _is_free(symbol) and symbol.local_energy != 0.0]
    return checks + _interface_checks(config, symbols)


def match_experiment(config: ExperimentConfig):
    return match_checks(config, 'robin_scatter', {'k': 1.0, 'L': 1.0}) + match_checks(config, 'match_free_sho', {})


def evolve_experiment(config: ExperimentConfig):
    pair = oscillator_pair(0, 1)
    h = Hamiltonian.harmonic()
    grid = make_grid(-6.0, 6.0, -6.0, 6.0, 49, 49)
    backend = config.derivative_backend() or SpectralBackend(0.0)
    times = [ComplexTime.from_complex(z) for z in config.complex_times]
    tolerance = config.tolerance('evolve')
    path = os.path.join(config.out_dir, 'evolve', 'time_series.csv')
    results = evolution_series(pair, h, times, grid, config.quadrature_spec(), backend, path)
    checks = []
    for result in results:
        tag = f'evolve(t={result.z.t}, s={result.z.s})'
        for report in result.reports:
            checks.append(_check(f'{tag}:{report.equation}', report.normalized, tolerance, report=report.to_json()))
        rhs = moyal_rhs(h, result.symbol, backend=backend)
        expected = -1j * (pair.e1 - pair.e2) * result.symbol.values
        interior = rhs.interior
        gap = np.max(np.abs(rhs.values - expected)[interior], initial=0.0)
        reference = max(float(np.max(np.abs(expected[interior]), initial=0.0)), np.finfo(float).tiny)
        checks.append(_check(f'{tag}:moyal_equation', float(gap) / reference, tolerance))
    first = results[0]
    rho12 = SampledSymbol(grid, first.symbol.values / first.factor, first.symbol.mask, label='rho_12')
    stationary = stationary_ansatz_check(h, pair.e1, pair.e2, rho12, grid, backend)
    for name, report in stationary.items():
        checks.append(_check(f'evolve:{name}', report.normalized, tolerance, report=report.to_json()))
    return checks


def _plane_reflection(k: float, signs=(-1.0,)) -> ClosedFormSymbol:
    """Sum of cos(2(p + s k)x) over the given signs s: real parts of single fundamental solutions."""
    components = []
    for sign in signs:
        components += oscillating_terms(lambda p: 0.0 * p, lambda p: 1.0 + 0.0 * p,
                                        lambda p, s=sign: 2.0 * (p + s * k), (1, int(sign)))
    return ClosedFormSymbol('plane_reflection', {'k': k, 'signs': list(signs)}, 'all', k * k, (0.0,), components)


def reflection_experiment(config: ExperimentConfig):
    k = 1.0
    grid = config.region_grid('all')
    backend = config.derivative_backend()
    tolerance = config.tolerance('reflection')
    floor = config.tolerance('eigen')
    single = _plane_reflection(k)
    conflict = reflection_conflict(k, single, grid, backend)
    quartic = quartic_free_residual(single, k=k, grid=grid, backend=backend)
    mixed = reflection_conflict(k, _plane_reflection(k, (-1.0, 1.0)), grid, backend)
    return [
        _check('reflection:eigen', conflict['eigen'], floor, 'min', report=conflict),
        _check('reflection:one_sided_minus', conflict['one_sided_minus'], tolerance),
        _check('reflection:sse', conflict['sse'], tolerance),
        _check('reflection:quartic', quartic.normalized, tolerance, report=quartic.to_json()),
        _check('reflection_mixed:eigen', mixed['eigen'], floor, 'min', report=mixed),
        _check('reflection_mixed:sse', mixed['sse'], tolerance),
    ]


def faddeeva_experiment(config: ExperimentConfig):
    rng = np.random.default_rng(config.seed)
    radius = FADDEEVA_RADIUS * np.sqrt(rng.uniform(0.0, 1.0, FADDEEVA_POINTS))
    angle = rng.uniform(0.0, 2.0 * np.pi, FADDEEVA_POINTS)
    z = radius * np.exp(1j * angle)
    reference = wofz(z)
    relative = np.abs(faddeeva(z) - reference) / np.abs(reference)
    worst = int(np.argmax(relative))
    report = {'points': FADDEEVA_POINTS, 'worst_at': [z[worst].real, z[worst].imag]}
    return [_check('faddeeva', float(relative[worst]), config.tolerance('faddeeva'), report=report)]


def _entry_experiment(checks_for):
    def run(config: ExperimentConfig):
        if not config.entry:
            raise ConfigException('An --entry is required.')
        return checks_for(config, config.entry, dict(config.params))
    return run


EXPERIMENTS = {
    'identities': identities_experiment,
    'long_form': long_form_experiment,
    'catalog': catalog_experiment,
    'harmonic': harmonic_experiment,
    'transform': transform_experiment,
    'unitarity': unitarity_experiment,
    'match': match_experiment,
    'evolve': evolve_experiment,
    'reflection': reflection_experiment,
    'faddeeva': faddeeva_experiment,
    'entry_residual': _entry_experiment(entry_residuals),
    'entry_transform': _entry_experiment(transform_checks),
    'entry_match': _entry_experiment(match_checks),
}

ACCEPTANCE = ('identities', 'long_form', 'catalog', 'harmonic', 'transform', 'unitarity', 'match', 'evolve',
              'reflection', 'faddeeva')


def experiments_for(command: str, with_entry: bool = False):
    """Experiment names behind a subcommand."""
    if command == 'all':
        return list(ACCEPTANCE)
    if command == 'residual':
        return ['entry_residual'] if with_entry else ['catalog', 'harmonic']
    if command in ('transform', 'match'):
        return [f'entry_{command}'] if with_entry else [command]
    if command in ('identities', 'evolve'):
        return [command]
    raise ConfigException(f'Unknown experiment group {command!r}.')


def run_experiment(name: str, config: ExperimentConfig) -> Result:
    if name not in EXPERIMENTS:
        raise ConfigException(f'Unknown experiment {name!r}; known: {", ".join(sorted(EXPERIMENTS))}.')
    logger.info(f'Running experiment {name}')
    try:
        checks = EXPERIMENTS[name](config)
    except ConfigException:
        raise
    except WignerMatchingException as e:
        logger.error(f'{name}: {e.msg}')
        return Result(False, e.msg)
    failures = [check['name'] for check in checks if not check['passed']]
    if failures:
        return Result(False, f'Failing reports: {", ".join(failures)}', checks)
    return Result(True, '', checks)


class ExperimentRunner(object):
    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.results: Dict[str, Result] = {}

    def run(self, names: List[str]) -> Dict[str, Result]:
        """
        Run independent experiments, in a process pool when more than one worker is allowed
        :param names: experiment names
        :return: Result per experiment, also dumped as `<out>/<name>.json`
        """
        check_sign_convention()
        jobs = min(self.config.jobs or os.cpu_count() or 1, len(names))
        if jobs <= 1:
            results = [run_experiment(name, self.config) for name in names]
        else:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(run_experiment, names, [self.config] * len(names)))
        self.results = dict(zip(names, results))
        self.dump()
        return self.results

    @property
    def passed(self):
        return all(result.passed for result in self.results.values())

    def dump(self):
        out_dir = self.config.out_dir
        for name, result in self.results.items():
            dump_json(result.to_json(), os.path.join(out_dir, f'{name}.json'))
        summary = {name: {'passed': result.passed, 'msg': result.msg} for name, result in self.results.items()}
        dump_json({'config': self.config.to_json(), 'experiments': summary}, os.path.join(out_dir, 'summary.json'))

    def to_json(self):
        return {name: result.to_json() for name, result in self.results.items()}


def catalog_dump(config: ExperimentConfig):
    """Evaluate one entry on its region grids and dump every region as CSV plus JSON header."""
    symbols = build(config.entry, **dict(config.params))
    listing = []
    for symbol in symbols:
        grid = config.region_grid(symbol.domain)
        path = os.path.join(config.out_dir, 'catalog', f'{symbol.entry_id}_{REGION_NAMES[symbol.domain]}')
        sampled = symbol.sample(grid)
        dump_symbol(sampled, path, symbol.params, provenance='closed form')
        listing.append(dict(symbol.to_json(), path=path, sup=norms(sampled)['sup']))
    return listing
