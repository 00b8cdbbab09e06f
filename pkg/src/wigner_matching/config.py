import dataclasses
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Optional

from wigner_matching.exceptions import ConfigException, GridException
from wigner_matching.phase import PhaseGrid, make_grid
from wigner_matching.phase.derivative import make_backend
from wigner_matching.phase.loader import load_json
from wigner_matching.transform import QuadratureSpec

OUT_ENV = 'WIGNER_MATCHING_OUT'
DEFAULT_OUT = './wigner_matching_out'
DEFAULT_SEED = 7

# "must be small" bounds; scaled by --tol-scale
DEFAULT_TOLERANCES = {
    'associativity': 1e-12,
    'long_form': 1e-9,
    'sse': 1e-10,
    'harmonic_sse': 1e-5,
    'transform': 1e-6,
    'unitarity': 1e-12,
    'free_limit': 1e-10,
    'coefficients': 1e-6,
    'wall': 1e-10,
    'interface': 1e-6,
    'evolve': 1e-8,
    'reflection': 1e-10,
    'faddeeva': 1e-10,
}

# "must be large" bounds; never scaled
DEFAULT_FLOORS = {
    'eigen': 1e-2,
    'imaginary_part': 1e-2,
    'harmonic_order': 1.8,
}

DEFAULT_GRID = {'x_extent': 3.0, 'p_min': -2.9, 'p_max': 3.1, 'nx': 31, 'np': 31}

logger = logging.getLogger(__name__)


@dataclass
class ExperimentConfig(object):
    experiment: str = 'all'
    entry: Optional[str] = None
    params: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    backend: Optional[str] = None
    quadrature: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    out: Optional[str] = None
    seed: int = DEFAULT_SEED
    jobs: Optional[int] = None
    tol_scale: float = 1.0
    trials: int = 100
    times: list = field(default_factory=lambda: [[0.0, 0.0], [1.0, 0.0], [1.0, 0.5]])

    @classmethod
    def from_json(cls, data: dict):
        if not isinstance(data, dict):
            raise ConfigException('A configuration must be a JSON object.')
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigException(f'Unknown configuration keys: {", ".join(unknown)}.')
        config = cls(**data)
        config.validate()
        return config

    @classmethod
    def load(cls, path: str):
        data = load_json(path)
        if data is None:
            raise ConfigException(f'Configuration {path} is missing or is not valid JSON.')
        return cls.from_json(data)

    def to_json(self):
        return dataclasses.asdict(self)

    def validate(self):
        unknown = sorted(set(self.grid) - set(DEFAULT_GRID))
        if unknown:
            raise ConfigException(f'Unknown grid keys: {", ".join(unknown)}.')
        unknown = sorted(set(self.tolerances) - set(DEFAULT_TOLERANCES) - set(DEFAULT_FLOORS))
        if unknown:
            raise ConfigException(f'Unknown tolerances: {", ".join(unknown)}.')
        if not (math.isfinite(self.tol_scale) and self.tol_scale > 0.0):
            raise ConfigException(f'tol_scale must be positive, got {self.tol_scale}.')
        if self.jobs is not None and int(self.jobs) < 1:
            raise ConfigException(f'jobs must be at least 1, got {self.jobs}.')
        if int(self.trials) < 1:
            raise ConfigException(f'trials must be at least 1, got {self.trials}.')
        for name in ('x_extent', 'p_min', 'p_max'):
            if name in self.grid and not isinstance(self.grid[name], (int, float)):
                raise ConfigException(f'grid.{name} must be a number.')
        self.region_grid('all')
        if self.backend:
            self.derivative_backend()
        self.quadrature_spec()
        for z in self.times:
            if len(z) != 2:
                raise ConfigException(f'Complex times are [t, s] pairs, got {z!r}.')

    def region_grid(self, domain: str, refine: int = 1) -> PhaseGrid:
        """Default window of the region a symbol lives on; a GridException turns into a ConfigException."""
        spec = dict(DEFAULT_GRID, **self.grid)
        extent = spec['x_extent']
        x_min, x_max = {'x<0': (-extent, 0.0), 'x>0': (0.0, extent)}.get(domain, (-extent, extent))
        try:
            grid = make_grid(x_min, x_max, spec['p_min'], spec['p_max'], spec['nx'], spec['np'])
        except GridException as e:
            raise ConfigException(e.msg)
        return grid.refined(refine) if refine > 1 else grid

    def derivative_backend(self):
        if not self.backend:
            return None
        try:
            return make_backend(self.backend)
        except Exception as e:
            raise ConfigException(getattr(e, 'msg', str(e)))

    def quadrature_spec(self) -> QuadratureSpec:
        try:
            return QuadratureSpec(**self.quadrature)
        except TypeError as e:
            raise ConfigException(f'Invalid quadrature settings: {e}.')
        except Exception as e:
            raise ConfigException(getattr(e, 'msg', str(e)))

    def tolerance(self, name: str) -> float:
        if name in DEFAULT_FLOORS:
            return float(self.tolerances.get(name, DEFAULT_FLOORS[name]))
        if name not in DEFAULT_TOLERANCES:
            raise ConfigException(f'Unknown tolerance {name!r}.')
        return float(self.tolerances.get(name, DEFAULT_TOLERANCES[name])) * self.tol_scale

    @property
    def out_dir(self) -> str:
        return self.out or os.environ.get(OUT_ENV) or DEFAULT_OUT

    @property
    def complex_times(self):
        return [complex(t, -s) for t, s in self.times]
