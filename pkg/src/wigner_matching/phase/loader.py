import json
import logging
import os
import shutil
from json import JSONDecodeError
from typing import Optional

import numpy as np

from wigner_matching.exceptions import GridException
from wigner_matching.phase import PhaseGrid, SampledSymbol

CSV_COLUMNS = ('x', 'p', 're', 'im')
FLOAT_FORMAT = '%.17g'

logger = logging.getLogger(__name__)


def _ensure_parent(path: str):
    parent = os.path.dirname(path)
    if parent and not os.path.exists(parent):
        os.makedirs(parent)


def dump_json(data, path: str):
    """Write `data` with sorted keys so equal reports give identical files."""
    _ensure_parent(path)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write('\n')


def load_json(path: str):
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except (FileNotFoundError, JSONDecodeError) as e:
        logger.error(f'Loading {path} failed: {e}')
    return None


def dump_csv(path: str, columns, rows):
    """
    Write a numeric table
    :param path: target csv file
    :param columns: column names, written as the header line
    :param rows: 2-D array, one row per record
    """
    _ensure_parent(path)
    np.savetxt(path, np.asarray(rows, dtype=float).reshape(-1, len(columns)), delimiter=',',
               header=','.join(columns), comments='', fmt=FLOAT_FORMAT)


def dump_symbol(symbol: SampledSymbol, path: str, params: Optional[dict] = None, provenance: str = ''):
    """
    Dump a sampled symbol as `<path>.csv` (x, p, re, im) plus a `<path>.json` header
    :param symbol: symbol to dump
    :param path: target path without extension
    :param params: physical parameters recorded in the header
    :param provenance: free-form description of how the values were produced
    """
    xx, pp = symbol.grid.mesh()
    rows = np.column_stack([xx.ravel(), pp.ravel(), symbol.values.real.ravel(), symbol.values.imag.ravel()])
    dump_csv(f'{path}.csv', CSV_COLUMNS, rows)
    header = {
        'grid': symbol.grid.to_json(),
        'label': symbol.label,
        'real': symbol.real,
        'params': params or {},
        'provenance': provenance,
        'masked': np.flatnonzero(symbol.mask.ravel()).tolist(),
    }
    dump_json(header, f'{path}.json')


def load_symbol(path: str) -> Optional[SampledSymbol]:
    """
    Load a symbol written by `dump_symbol`
    :param path: path without extension
    :return: the symbol, None if either file is missing or corrupted
    """
    if not os.path.exists(f'{path}.json') or not os.path.exists(f'{path}.csv'):
        return None
    header = load_json(f'{path}.json')
    if header is None:
        return None
    try:
        grid = PhaseGrid.from_json(header['grid'])
        table = np.loadtxt(f'{path}.csv', delimiter=',', skiprows=1, ndmin=2)
        values = (table[:, 2] + 1j * table[:, 3]).reshape(grid.shape)
    except (KeyError, ValueError, GridException) as e:
        logger.error(f'Loading symbol {path} failed: {e}')
        return None
    mask = np.zeros(grid.nx * grid.n_p, dtype=bool)
    mask[header.get('masked', [])] = True
    return SampledSymbol(grid, values, mask.reshape(grid.shape), header.get('real', False), header.get('label', ''))


def clear(out_dir: str):
    """
    Remove an output directory and everything dumped into it
    :param out_dir: directory to remove
    """
    if os.path.exists(out_dir):
        shutil.rmtree(out_dir)
