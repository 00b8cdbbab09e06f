"""
Registry of closed-form Wigner functions.

`build(entry_id, **params)` always returns a tuple of ClosedFormSymbol, one per
region the entry covers.
"""
import logging
import math

from wigner_matching.catalog.entries import (PointInteractionParams, jump_above, jump_below, jump_phase,
                                             match_free_sho, point_bound, point_scatter, robin_bound, robin_phase,
                                             robin_scatter, step_amplitudes, step_scatter)
from wigner_matching.catalog.symbols import POLE_BAND, ClosedFormSymbol, ErfcTerm, ExpTerm
from wigner_matching.exceptions import ConfigException

logger = logging.getLogger(__name__)


class EntrySchema(object):
    def __init__(self, entry_id, builder, params, regions, description):
        self.entry_id = entry_id
        self.builder = builder
        self.params = params
        self.regions = regions
        self.description = description

    def to_json(self):
        return {'id': self.entry_id, 'params': self.params, 'regions': list(self.regions),
                'description': self.description}


def _point_params(params):
    try:
        return PointInteractionParams(params.pop('alpha'), params.pop('beta'), params.pop('gamma'),
                                      params.pop('delta'))
    except KeyError as e:
        raise ConfigException(f'Point interaction parameter {e.args[0]} is required.')


def _build_robin_scatter(params):
    return (robin_scatter(params.pop('k'), params.pop('L', 0.0), params.pop('form', 'three_term')),)


def _build_robin_bound(params):
    return (robin_bound(params.pop('L')),)


def _build_point_bound(params):
    return point_bound(_point_params(params))


def _build_point_scatter(params):
    point = _point_params(params)
    return point_scatter(point, params.pop('k'))


def _build_jump_below(params):
    return jump_below(params.pop('k'), params.pop('V0'))


def _build_jump_above(params):
    return jump_above(params.pop('k'), params.pop('V0'))


def _build_match_free_sho(params):
    return match_free_sho()


_POINT = {'alpha': 'float', 'beta': 'float', 'gamma': 'float, alpha*gamma - beta*delta = 1', 'delta': 'float'}

ENTRIES = {schema.entry_id: schema for schema in (
    EntrySchema('robin_scatter', _build_robin_scatter,
                {'k': 'float > 0', 'L': 'float or inf (default 0)', 'form': 'three_term | four_term'},
                ('x<0',), 'Scattering state off a Robin wall at x = 0'),
    EntrySchema('robin_bound', _build_robin_bound, {'L': 'float > 0'}, ('x<0',),
                'Bound state of a Robin wall, E = -1/L^2'),
    EntrySchema('point_bound', _build_point_bound, dict(_POINT), ('x<0', 'x>0'),
                'Bound state of a general point interaction'),
    EntrySchema('point_scatter', _build_point_scatter, dict(_POINT, k='float > 0'), ('x<0', 'x>0'),
                'Scattering state of a general point interaction'),
    EntrySchema('jump_below', _build_jump_below, {'k': 'float > 0', 'V0': 'float > k^2'}, ('x<0', 'x>0'),
                'Potential step V0 theta(x), E < V0'),
    EntrySchema('jump_above', _build_jump_above, {'k': 'float > 0', 'V0': '0 <= V0 < k^2'}, ('x<0', 'x>0'),
                'Potential step V0 theta(x), E > V0'),
    EntrySchema('match_free_sho', _build_match_free_sho, {}, ('x<0', 'x>0'),
                'E = 1 state of p^2 + theta(x) x^2'),
)}


def list_entries():
    return [ENTRIES[name].to_json() for name in sorted(ENTRIES)]


def build(entry_id: str, **params):
    """
    Build a catalog entry by id
    :param entry_id: one of ENTRIES
    :param params: entry parameters, see `list_entries()`
    :return: tuple of ClosedFormSymbol
    """
    if entry_id not in ENTRIES:
        raise ConfigException(f'Unknown catalog entry {entry_id!r}; known entries: {", ".join(sorted(ENTRIES))}.')
    params = {key: (math.inf if value in ('inf', 'Infinity') else value) for key, value in params.items()}
    try:
        symbols = ENTRIES[entry_id].builder(params)
    except KeyError as e:
        raise ConfigException(f'{entry_id}: parameter {e.args[0]} is required.')
    if params:
        raise ConfigException(f'{entry_id}: unknown parameters {sorted(params)}.')
    logger.debug(f'Built catalog entry {entry_id} with {len(symbols)} region(s)')
    return symbols


__all__ = ['ENTRIES', 'POLE_BAND', 'ClosedFormSymbol', 'ErfcTerm', 'ExpTerm', 'PointInteractionParams', 'build',
           'jump_above', 'jump_below', 'jump_phase', 'list_entries', 'match_free_sho', 'point_bound',
           'point_scatter', 'robin_bound', 'robin_phase', 'robin_scatter', 'step_amplitudes', 'step_scatter']
