import json
import logging
import sys
from typing import List, Optional

from wigner_matching.catalog import list_entries
from wigner_matching.cli.parser import CLIParser
from wigner_matching.config import ExperimentConfig
from wigner_matching.exceptions import ConfigException, WignerMatchingException
from wigner_matching.experiments import ExperimentRunner, catalog_dump, experiments_for

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_CONFIG = 2

# flags that override the configuration file when given
OVERRIDES = ('out', 'seed', 'jobs', 'tol_scale', 'backend', 'trials', 'times', 'entry')

logger = logging.getLogger(__name__)


def configure_logging(args):
    if getattr(args, '_log_verbosity_debug', False):
        level = logging.DEBUG
    elif getattr(args, '_log_verbosity_verbose', False):
        level = logging.INFO
    elif getattr(args, '_log_verbosity_only_show_errors', False):
        level = logging.ERROR
    else:
        level = logging.WARNING
    logging.basicConfig(level=level, format='%(levelname)s: %(name)s: %(message)s')
    logging.getLogger().setLevel(level)


def make_config(parser: CLIParser, args) -> ExperimentConfig:
    config = ExperimentConfig.load(args.config) if getattr(args, 'config', None) else ExperimentConfig()
    config.experiment = args.command
    for name in OVERRIDES:
        value = getattr(args, name, None)
        if value is not None:
            setattr(config, name, value)
    config.params = dict(config.params, **parser.entry_params(args))
    config.validate()
    return config


def emit(output, args):
    if getattr(args, CLIParser.OUTPUT_DEST, 'json') == 'none':
        return
    query = getattr(args, '_jmespath_query', None)
    if query is not None:
        output = query.search(output)
    print(json.dumps(output, indent=2, sort_keys=True))


def main(argv: Optional[List[str]] = None) -> int:
    """
    Command-line entry point
    :param argv: arguments without the program name, sys.argv[1:] by default
    :return: 0 when every selected tolerance is met, 1 on a tolerance failure, 2 on a configuration error
    """
    parser = CLIParser.create()
    try:
        args = parser.parse_args(argv)
        configure_logging(args)
        config = make_config(parser, args)
        if args.command == 'catalog':
            emit(catalog_dump(config) if config.entry else list_entries(), args)
            return EXIT_OK
        runner = ExperimentRunner(config)
        runner.run(experiments_for(args.command, bool(config.entry)))
    except ConfigException as e:
        logger.error(e.msg)
        print(f'error: {e.msg}', file=sys.stderr)
        return EXIT_CONFIG
    except WignerMatchingException as e:
        logger.error(e.msg)
        return EXIT_TOLERANCE
    emit(runner.to_json(), args)
    for name, result in runner.results.items():
        if not result.passed:
            logger.error(f'Experiment {name} failed: {result.msg}')
    return EXIT_OK if runner.passed else EXIT_TOLERANCE


__all__ = ['EXIT_CONFIG', 'EXIT_OK', 'EXIT_TOLERANCE', 'ExperimentConfig', 'main']
