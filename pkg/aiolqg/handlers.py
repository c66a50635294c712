"""Command handlers: one experiment per subcommand, each leaving its files and a manifest in the output directory."""
import asyncio
from abc import ABC, abstractmethod
from logging import WARNING, Handler, LogRecord, getLogger
from typing import Any, Dict, List, NamedTuple, Optional, Type

import numpy as np

from .aggregates import MANIFEST_NAME, ExperimentRun
from .checks import CHECKS, RESULT_FIELDS, CheckContext, run_checks
from .config import RunConfig
from .cqrs import (
    BuildMeasureCommand,
    Command,
    CommandHandler,
    CountQuadsCommand,
    EuclidExponentCommand,
    ExperimentCommand,
    KpzTableCommand,
    ListChecksQuery,
    OptionalResponse,
    QuantumExponentCommand,
    Query,
    QueryHandler,
    Response,
    SampleFieldCommand,
    VerifyCommand,
)
from .errors import ChecksFailedError
from .events import EventBus, LogRunEventHandler, SimpleEventBus
from .fitting import ExponentFit
from .geometry import UNIT_SQUARE
from .gff import NORMALIZATION, cutoff_for, evaluate_field, sample_dgff, sample_spectral_gff
from .io import (
    write_csv,
    write_field_image,
    write_grid,
    write_json,
    write_log_mass_image,
    write_overlay_image,
    write_squares,
)
from .kpz import (
    RootMode,
    count_quadrangulations,
    euclidean_exponent,
    fractal_set,
    kpz_inverse,
    kpz_table,
    quantum_exponent,
)
from .liouville import SQRT2, build_measure, decomposition_spread, dyadic_decomposition
from .rng import stream

logger = getLogger(__name__)

FIT_FIELDS = ('scale', 'estimate', 'log_scale', 'log_estimate', 'stderr', 'samples', 'discarded')
DEFAULT_QUANTUM_REPLICATES = 200


class Outcome(NamedTuple):
    status: str = 'completed'
    detail: Dict[str, Any] = {}


class WarningCollector(Handler):
    """Keeps every WARNING record logged under ``aiolqg`` while an experiment runs."""

    def __init__(self) -> None:
        super().__init__(level=WARNING)
        self.records: List[LogRecord] = []

    def emit(self, record: LogRecord) -> None:
        self.records.append(record)


def _category(record: LogRecord) -> str:
    return record.name.rsplit('.', 1)[-1]


class ExperimentHandler(CommandHandler, ABC):
    command_type: Type[ExperimentCommand]

    def __init__(self, code_version: str, event_bus: Optional[EventBus] = None) -> None:
        self._code_version = code_version
        self._event_bus = event_bus or SimpleEventBus([LogRunEventHandler()])

    def subscribed_to(self) -> Type[Command]:
        return self.command_type

    async def handle(self, command: Command) -> None:
        assert isinstance(command, ExperimentCommand)  # nosec
        config = command.config
        config.out.mkdir(parents=True, exist_ok=True)
        # a manifest in the directory must always describe its last completed run
        (config.out / MANIFEST_NAME).unlink(missing_ok=True)
        run = ExperimentRun.start(
            config.command, config.to_dict(), config.config_hash(), config.out, self._code_version
        )
        await self._event_bus.notify(run.pull_aggregate_events())
        if config.gamma >= SQRT2:
            run.warn('gamma_range', f'gamma={config.gamma:g} is outside the L^2 regime gamma < sqrt(2)')
        logger.debug('Executing %s into %s', config.command, config.out)
        collector = WarningCollector()
        package = getLogger('aiolqg')
        package.addHandler(collector)
        try:
            outcome = await asyncio.to_thread(self.execute, config, run)
        finally:
            package.removeHandler(collector)
        warnings = dict.fromkeys((_category(record), record.getMessage()) for record in collector.records)
        for category, message in warnings:
            run.warn(category, message)
        await self._event_bus.notify(run.pull_aggregate_events())
        run.finish(outcome.status)
        await self._event_bus.notify(run.pull_aggregate_events())
        if outcome.status == 'failed':
            raise ChecksFailedError.create(detail={'run_id': str(run.run_id), **outcome.detail})

    @abstractmethod
    def execute(self, config: RunConfig, run: ExperimentRun) -> Outcome:
        pass  # pragma: no cover


def _fit_rows(fit: ExponentFit, scale_power: float = 1.0) -> List[Dict[str, Any]]:
    return [
        {
            'scale': float(np.exp(point.log_scale / scale_power)),
            'estimate': float(np.exp(point.log_estimate)),
            **point._asdict(),
        }
        for point in fit.points
    ]


def _write_fit(run: ExperimentRun, fit: ExponentFit, summary: Dict[str, Any], scale_power: float = 1.0) -> None:
    out = run.output_dir
    run.output(write_csv(out / 'fit.csv', _fit_rows(fit, scale_power), FIT_FIELDS))
    run.output(write_json(out / 'fit.json', {**summary, 'fit': fit.to_dict()}))


class SampleFieldHandler(ExperimentHandler):
    command_type = SampleFieldCommand

    def execute(self, config: RunConfig, run: ExperimentRun) -> Outcome:
        n = config.resolution
        rng = stream(config.seed)
        if config.kind == 'dgff':
            values = sample_dgff(n, rng).values
            meta: Dict[str, Any] = {
                'kind': 'dgff',
                'grid_side': n,
                'points': 'lattice vertices i/N, i = 0..N',
                'normalization': 'covariance is the inverse graph Laplacian on the interior vertices',
            }
        else:
            cutoff = config.cutoff or cutoff_for(1.0 / n)
            values = evaluate_field(sample_spectral_gff(cutoff, rng), n)
            meta = {
                'kind': 'spectral',
                'cutoff': cutoff,
                'resolution': n,
                'points': 'cell centers (i + 1/2)/n',
                'normalization': 'c_{j,k} = sqrt(8 / pi) / sqrt(j^2 + k^2)',
                'normalization_constant': NORMALIZATION,
            }
        meta.update(
            {
                'domain': UNIT_SQUARE.kind.value,
                'seed': config.seed,
                'config_hash': config.config_hash(),
                'code_version': self._code_version,
            }
        )
        binary, sidecar = write_grid(run.output_dir / 'field.bin', values, meta)
        run.output(binary)
        run.output(sidecar)
        run.output(write_field_image(run.output_dir / 'field.png', values))
        return Outcome()


class BuildMeasureHandler(ExperimentHandler):
    command_type = BuildMeasureCommand

    def execute(self, config: RunConfig, run: ExperimentRun) -> Outcome:
        n = config.resolution
        cutoff = config.cutoff or cutoff_for(1.0 / n)
        measure = build_measure(sample_spectral_gff(cutoff, stream(config.seed)), config.gamma, n)
        out = run.output_dir
        meta = {
            'gamma': config.gamma,
            'resolution': n,
            'eps': measure.eps,
            'cutoff': cutoff,
            'seed': config.seed,
            'domain': UNIT_SQUARE.kind.value,
            'code_version': self._code_version,
        }
        binary, sidecar = write_grid(out / 'measure.bin', measure.masses, meta)
        run.output(binary)
        run.output(sidecar)
        run.output(write_log_mass_image(out / 'measure.png', measure.masses))
        summary: Dict[str, Any] = {**meta, 'total_mass': measure.total, 'config_hash': config.config_hash()}
        if config.overlay:
            squares = dyadic_decomposition(measure, config.mass_delta)
            summary.update(
                {'mass_delta': config.mass_delta, 'squares': len(squares), 'spread': decomposition_spread(squares)}
            )
            run.output(write_squares(out / 'squares.csv', squares))
            run.output(write_overlay_image(out / 'overlay.png', measure.masses, squares))
        run.output(write_json(out / 'summary.json', summary))
        return Outcome()


class EuclidExponentHandler(ExperimentHandler):
    command_type = EuclidExponentCommand

    def execute(self, config: RunConfig, run: ExperimentRun) -> Outcome:
        target_set = fractal_set(config.fractal)
        fit = euclidean_exponent(target_set, config.scales, config.samples, stream(config.seed))
        run.count('samples', fit.meta.get('samples', 0.0))
        summary = {
            'kind': 'euclidean',
            'set': target_set.describe(),
            'expected': target_set.euclidean_exponent_target(),
            'config_hash': config.config_hash(),
        }
        # points are fitted against eps^2
        _write_fit(run, fit, summary, scale_power=2.0)
        return Outcome()


class QuantumExponentHandler(ExperimentHandler):
    command_type = QuantumExponentCommand

    def execute(self, config: RunConfig, run: ExperimentRun) -> Outcome:
        target_set = fractal_set(config.fractal)
        result = quantum_exponent(
            target_set,
            config.gamma,
            config.delta_scales,
            config.replicates or DEFAULT_QUANTUM_REPLICATES,
            config.resolution,
            config.seed,
            RootMode(config.root_mode),
            cutoff=config.cutoff,
            workers=config.workers,
        )
        run.count('balls', result.balls)
        run.count('discarded', result.discarded)
        summary = {
            'kind': 'quantum',
            'gamma': config.gamma,
            'root_mode': config.root_mode,
            'set': target_set.describe(),
            'expected': kpz_inverse(config.gamma, target_set.euclidean_exponent_target()),
            'hits': result.hits,
            'discard_rate': result.discard_rate,
            'config_hash': config.config_hash(),
        }
        _write_fit(run, result.fit, summary)
        return Outcome()


class VerifyHandler(ExperimentHandler):
    command_type = VerifyCommand

    def execute(self, config: RunConfig, run: ExperimentRun) -> Outcome:
        context = CheckContext(
            seed=config.seed, replicates=config.replicates, workers=config.workers, green_cutoff=config.green_cutoff
        )
        results = run_checks(config.checks, context)
        rows = [item.row() for item in results]
        failed = [item.name for item in results if not item.passed]
        out = run.output_dir
        run.output(write_csv(out / 'verify.csv', rows, RESULT_FIELDS))
        run.output(
            write_json(
                out / 'verify.json',
                {'config_hash': config.config_hash(), 'passed': not failed, 'failed': failed, 'results': rows},
            )
        )
        run.count('checks', len(results))
        run.count('failed', len(failed))
        return Outcome('failed', {'failed': failed}) if failed else Outcome()


class KpzTableHandler(ExperimentHandler):
    command_type = KpzTableCommand

    def execute(self, config: RunConfig, run: ExperimentRun) -> Outcome:
        rows = kpz_table(config.gammas, config.xs)
        run.output(write_csv(run.output_dir / 'kpz_table.csv', rows, ('gamma', 'x', 'delta', 'beta')))
        return Outcome()


class CountQuadsHandler(ExperimentHandler):
    command_type = CountQuadsCommand

    def execute(self, config: RunConfig, run: ExperimentRun) -> Outcome:
        rows = [{'n': n, 'count': count_quadrangulations(n)} for n in range(1, config.max_faces + 1)]
        run.output(write_csv(run.output_dir / 'count_quads.csv', rows, ('n', 'count')))
        return Outcome()


EXPERIMENT_HANDLERS: List[Type[ExperimentHandler]] = [
    SampleFieldHandler,
    BuildMeasureHandler,
    EuclidExponentHandler,
    QuantumExponentHandler,
    VerifyHandler,
    KpzTableHandler,
    CountQuadsHandler,
]


def experiment_handlers(code_version: str, event_bus: Optional[EventBus] = None) -> List[CommandHandler]:
    return [handler(code_version, event_bus) for handler in EXPERIMENT_HANDLERS]


class ListChecksHandler(QueryHandler):
    def subscribed_to(self) -> Type[Query]:
        return ListChecksQuery

    async def handle(self, query: Query) -> OptionalResponse:
        return [Response(name=item.name, description=item.description) for item in CHECKS.values()]
