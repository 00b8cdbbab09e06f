import argparse
from typing import NoReturn

from wigner_matching.exceptions import ConfigException

SUBCOMMANDS = {
    'catalog': 'List catalog entries, or evaluate one on its region grid.',
    'residual': 'Star-eigen and star-eigen-star residuals per catalog entry.',
    'identities': 'Star-product associativity identities on random polynomials.',
    'transform': 'Numerical Wigner transforms against the closed forms.',
    'match': 'Fundamental-basis coefficient fits and interface conditions.',
    'evolve': 'Complexified-time evolution identities on oscillator states.',
    'all': 'The full acceptance suite.',
}

# entry parameters accepted as flags; only the given ones are forwarded
ENTRY_PARAMS = (
    ('--k', 'k', float),
    ('--L', 'L', float),
    ('--V0', 'V0', float),
    ('--alpha', 'alpha', float),
    ('--beta', 'beta', float),
    ('--gamma', 'gamma', float),
    ('--delta', 'delta', float),
    ('--form', 'form', str),
)


class CLIParser(argparse.ArgumentParser):
    DEBUG_FLAG = '--debug'
    VERBOSE_FLAG = '--verbose'
    ONLY_SHOW_ERRORS_FLAG = '--only-show-errors'

    OUTPUT_DEST = '_output_format'

    _OUTPUT_FORMATS = ('json', 'none')

    @staticmethod
    def jmespath_type(raw_query):
        """Compile the query with JMESPath and return the compiled result.
        JMESPath raises exceptions which subclass from ValueError.
        In addition, though, JMESPath can raise a KeyError.
        ValueErrors are caught by argparse so argument errors can be generated.
        """
        from jmespath import compile as compile_jmespath
        try:
            return compile_jmespath(raw_query)
        except KeyError as ex:
            # Raise a ValueError which argparse can handle
            raise ValueError from ex

    @staticmethod
    def complex_time(raw):
        """`t` or `t-sj` (z = t - i s), e.g. `1-0.5j`"""
        try:
            z = complex(raw.replace('i', 'j'))
        except ValueError as ex:
            raise argparse.ArgumentTypeError(f'invalid complex time {raw!r}') from ex
        return [z.real, -z.imag]

    @staticmethod
    def create_global_parser():
        """
        Create a global Argument Parser for Global Arguments. This should be the parent of all subcommands.
        """
        global_parser = argparse.ArgumentParser(add_help=False)
        arg_group = global_parser.add_argument_group('global', 'Global Arguments')
        arg_group.add_argument(CLIParser.VERBOSE_FLAG, dest='_log_verbosity_verbose', action='store_true',
                               help='Increase logging verbosity. Use --debug for full debug logs.')
        arg_group.add_argument(CLIParser.DEBUG_FLAG, dest='_log_verbosity_debug', action='store_true',
                               help='Increase logging verbosity to show all debug logs.')
        arg_group.add_argument(CLIParser.ONLY_SHOW_ERRORS_FLAG, dest='_log_verbosity_only_show_errors',
                               action='store_true',
                               help='Only show errors, suppressing warnings.')
        arg_group.add_argument('--output', '-o', dest=CLIParser.OUTPUT_DEST,
                               choices=list(CLIParser._OUTPUT_FORMATS),
                               default='json',
                               help='Output format',
                               type=str.lower)
        arg_group.add_argument('--query', dest='_jmespath_query', metavar='JMESPATH',
                               help='JMESPath query string. See http://jmespath.org/ for more'
                                    ' information and examples.',
                               type=CLIParser.jmespath_type)
        arg_group.add_argument('--config', dest='config', metavar='PATH', help='ExperimentConfig JSON file.')
        arg_group.add_argument('--out', dest='out', metavar='DIR',
                               help='Output directory (default: $WIGNER_MATCHING_OUT or ./wigner_matching_out).')
        arg_group.add_argument('--seed', dest='seed', type=int, help='Seed of the random property suites.')
        arg_group.add_argument('--jobs', dest='jobs', type=int, help='Worker processes (default: logical cores).')
        arg_group.add_argument('--tol-scale', dest='tol_scale', type=float,
                               help='Multiply every upper tolerance by this factor.')
        arg_group.add_argument('--backend', dest='backend', help='Derivative backend: fd2, fd4, fd6, spectral[:taper].')
        return global_parser

    @staticmethod
    def create_entry_parser():
        entry_parser = argparse.ArgumentParser(add_help=False)
        arg_group = entry_parser.add_argument_group('entry', 'Catalog Entry')
        arg_group.add_argument('--entry', dest='entry', help='Catalog entry id, see `catalog`.')
        for option, dest, typ in ENTRY_PARAMS:
            arg_group.add_argument(option, dest=f'param_{dest}', type=typ, default=None)
        return entry_parser

    @classmethod
    def create(cls, prog: str = 'wigner-matching'):
        """Top-level parser with one subparser per experiment group."""
        global_parser = cls.create_global_parser()
        entry_parser = cls.create_entry_parser()
        parser = cls(prog=prog, description='Star-eigen-star checks of contact-interaction Wigner functions.')
        subparsers = parser.add_subparsers(dest='command', parser_class=CLIParser)
        subparsers.required = True
        for name, description in SUBCOMMANDS.items():
            parents = [global_parser]
            if name in ('catalog', 'residual', 'transform', 'match'):
                parents.append(entry_parser)
            sub = subparsers.add_parser(name, help=description, description=description, parents=parents)
            parser.subparsers[name] = sub
            if name == 'identities':
                sub.add_argument('--trials', dest='trials', type=int, help='Random polynomial triples.')
            if name == 'evolve':
                sub.add_argument('--z', dest='times', type=cls.complex_time, action='append',
                                 help='Complex time t-sj; repeatable.')
        return parser

    def __init__(self, **kwargs):
        self.subparsers = {}
        super().__init__(**kwargs)

    def entry_params(self, namespace):
        """Entry parameters given on the command line, by catalog name."""
        return {dest: getattr(namespace, f'param_{dest}') for _, dest, _ in ENTRY_PARAMS
                if getattr(namespace, f'param_{dest}', None) is not None}

    def error(self, message: str) -> NoReturn:
        """
        Raise an exception when parse fails.
        :param message: error message
        """
        raise ConfigException(message)
