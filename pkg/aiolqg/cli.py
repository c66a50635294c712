"""``aiolqg`` command line.

Exit codes: 0 success, 2 a verification check failed, 3 invalid configuration,
4 any other error. Errors are printed to stderr as JSON documents.
"""
import argparse
import asyncio
import sys
from typing import Any, List, Mapping, NoReturn, Optional, Sequence

from . import __version__
from .config import FIELD_KINDS, ROOT_MODES, build_config
from .cqrs import ListChecksQuery, SimpleCommandBus, SimpleQueryBus, command_for
from .errors import BaseError, ChecksFailedError, InvalidConfigError, UnknownError
from .handlers import ListChecksHandler, experiment_handlers
from .utils import get_simple_logger, get_str_env

EXIT_OK = 0
EXIT_CHECKS_FAILED = 2
EXIT_INVALID_CONFIG = 3
EXIT_RUNTIME_ERROR = 4


def _number(text: str) -> float:
    """A float, also written as a power such as ``2^-8``."""
    if '^' in text:
        base, exponent = text.split('^', 1)
        return float(base) ** float(exponent)
    return float(text)


def number_list(text: str) -> List[float]:
    try:
        return [_number(item.strip()) for item in text.split(',') if item.strip()]
    except ValueError as err:
        raise argparse.ArgumentTypeError(f'expected comma separated numbers, got {text!r}') from err


def name_list(text: str) -> List[str]:
    return [item.strip() for item in text.split(',') if item.strip()]


class ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        raise InvalidConfigError.create(detail={'arguments': message})


def build_parser() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument('--config', help='JSON document with RunConfig keys; flags override it')
    common.add_argument('--out', dest='output_dir', help='output directory (default: out)')
    common.add_argument('--seed', type=int, help='64-bit master seed')
    common.add_argument('--gamma', type=float, help='coupling constant in [0, 2)')
    common.add_argument('--resolution', type=int, help='grid side n, a power of two')
    common.add_argument('--cutoff', type=int, help='spectral cutoff M (default from eps = 1/n)')
    common.add_argument('--replicates', type=int, help='field replicates / Monte Carlo size override')
    common.add_argument('--workers', type=int, help='worker threads; never changes results')
    common.add_argument('--log-level', help='logging level (default: AIOLQG_LOG_LEVEL or INFO)')

    parser = ArgumentParser(prog='aiolqg', description='Gaussian free field, Liouville measure and KPZ experiments.')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    commands = parser.add_subparsers(dest='command', required=True, metavar='command')

    sample = commands.add_parser('sample-field', parents=[common], help='sample a field and render it')
    sample.add_argument('--kind', choices=FIELD_KINDS, help='spectral GFF or lattice DGFF')

    measure = commands.add_parser('build-measure', parents=[common], help='build mu_eps and render log-mass')
    measure.add_argument('--overlay', action='store_true', default=None, help='add the equal-mass dyadic squares')
    measure.add_argument('--mass-delta', dest='mass_delta', type=_number, help='mass bound of the overlay squares')

    euclid = commands.add_parser('euclid-exponent', parents=[common], help='Euclidean scaling exponent of a set')
    euclid.add_argument('--set', dest='fractal', help='segment, point, box-fractal or full-square')
    euclid.add_argument('--scales', type=number_list, help='radii eps, e.g. 2^-6,2^-7,2^-8')
    euclid.add_argument('--samples', type=int, help='initial number of uniform points')

    quantum = commands.add_parser('quantum-exponent', parents=[common], help='quantum scaling exponent of a set')
    quantum.add_argument('--set', dest='fractal', help='segment, point, box-fractal or full-square')
    quantum.add_argument('--delta-scales', dest='delta_scales', type=number_list, help='quantum areas delta')
    quantum.add_argument('--root-mode', dest='root_mode', choices=ROOT_MODES, help='how roots are drawn')

    verify = commands.add_parser('verify', parents=[common], help='run verification checks')
    verify.add_argument('--checks', type=name_list, help='comma separated check names (default: all)')
    verify.add_argument('--list', action='store_true', help='list the registered checks and exit')
    verify.add_argument(
        '--green-cutoff', dest='green_cutoff', type=int, help='modes per axis of the truncated sine series (M_G)'
    )

    table = commands.add_parser('kpz-table', parents=[common], help='tabulate the KPZ relation')
    table.add_argument('--gammas', type=number_list, help='coupling constants')
    table.add_argument('--xs', type=number_list, help='Euclidean exponents')

    quads = commands.add_parser('count-quads', parents=[common], help='count rooted planar quadrangulations')
    quads.add_argument('--max-faces', dest='max_faces', type=int, help='largest face count')
    return parser


async def list_checks() -> int:
    bus = SimpleQueryBus([ListChecksHandler()])
    rows = await bus.ask(ListChecksQuery())
    for row in rows or []:
        print(f'{row["name"]}\t{row["description"]}')
    return EXIT_OK


async def run(command: str, flags: Mapping[str, Any], config_path: Optional[str]) -> int:
    config = build_config(command, flags, config_path)
    bus = SimpleCommandBus(experiment_handlers(__version__))
    await bus.dispatch(command_for(config))
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        get_simple_logger('aiolqg', (args.log_level or get_str_env('AIOLQG_LOG_LEVEL', 'INFO')).upper())
        if getattr(args, 'list', False):
            return asyncio.run(list_checks())
        return asyncio.run(run(args.command, vars(args), args.config))
    except ChecksFailedError as err:
        print(err, file=sys.stderr)
        return EXIT_CHECKS_FAILED
    except InvalidConfigError as err:
        print(err, file=sys.stderr)
        return EXIT_INVALID_CONFIG
    except BaseError as err:
        print(err, file=sys.stderr)
        return EXIT_RUNTIME_ERROR
    except Exception as err:  # pylint: disable=broad-except
        print(UnknownError.create(detail={'error': type(err).__name__}).with_exception(err), file=sys.stderr)
        return EXIT_RUNTIME_ERROR
