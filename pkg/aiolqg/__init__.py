# type: ignore
# pylint: skip-file
from .aggregates import Aggregate, AggregateRoot, ExperimentRun
from .checks import CHECKS, CheckContext, CheckResult, run_checks
from .config import RunConfig, build_config
from .cqrs import (
    BuildMeasureCommand,
    Command,
    CommandBus,
    CommandHandler,
    CountQuadsCommand,
    EuclidExponentCommand,
    KpzTableCommand,
    ListChecksQuery,
    OptionalResponse,
    QuantumExponentCommand,
    Query,
    QueryBus,
    QueryHandler,
    Response,
    SampleFieldCommand,
    SimpleCommandBus,
    SimpleQueryBus,
    VerifyCommand,
)
from .errors import (
    BadRequestError,
    BaseError,
    BoundaryTooCloseError,
    CheckNotRegisteredError,
    ChecksFailedError,
    CoincidentPointsError,
    CommandNotRegisteredError,
    DegenerateAngleError,
    DeltaOutOfRangeError,
    DimensionMismatchError,
    GammaOutOfRangeError,
    InsufficientHitsError,
    InsufficientScalesError,
    InvalidConfigError,
    InvalidCutoffError,
    NotFoundError,
    OutOfDomainError,
    QueryNotRegisteredError,
    ResolutionTooCoarseError,
    UnknownError,
)
from .events import Event, EventBus, EventHandler, EventMapper, SimpleEventBus
from .fitting import ExponentFit, ScalePoint, fit_log_log
from .geometry import UNIT_DISC, UNIT_SQUARE, DomainSpec, conformal_radius, green, green_regularized, green_series
from .gff import (
    DiscreteField,
    SpectralField,
    circle_average,
    circle_process,
    cutoff_for,
    dgff_covariance,
    sample_dgff,
    sample_spectral_gff,
)
from .handlers import experiment_handlers
from .kpz import (
    FractalSet,
    RootMode,
    count_quadrangulations,
    euclidean_exponent,
    first_passage_oracle,
    kpz_formula,
    kpz_inverse,
    quantum_ball,
    quantum_exponent,
)
from .liouville import (
    GridMeasure,
    RootedField,
    build_measure,
    cauchy_diagnostic,
    measure_apply,
    root_shift,
    rooted_ball_mass,
    weak_star_distance,
)
from .rng import RandomStream, run_replicates, stream
from .utils import get_simple_logger

__version__ = '0.1.0'

__all__ = (
    # aggregates
    'Aggregate',
    'AggregateRoot',
    'ExperimentRun',
    # checks
    'CHECKS',
    'CheckContext',
    'CheckResult',
    'run_checks',
    # config
    'RunConfig',
    'build_config',
    # cqrs
    'Command',
    'CommandHandler',
    'CommandBus',
    'SimpleCommandBus',
    'Query',
    'Response',
    'OptionalResponse',
    'QueryHandler',
    'QueryBus',
    'SimpleQueryBus',
    'SampleFieldCommand',
    'BuildMeasureCommand',
    'EuclidExponentCommand',
    'QuantumExponentCommand',
    'VerifyCommand',
    'KpzTableCommand',
    'CountQuadsCommand',
    'ListChecksQuery',
    # errors
    'BaseError',
    'NotFoundError',
    'BadRequestError',
    'UnknownError',
    'CoincidentPointsError',
    'OutOfDomainError',
    'BoundaryTooCloseError',
    'DegenerateAngleError',
    'InvalidCutoffError',
    'DimensionMismatchError',
    'GammaOutOfRangeError',
    'ResolutionTooCoarseError',
    'DeltaOutOfRangeError',
    'InsufficientHitsError',
    'InsufficientScalesError',
    'InvalidConfigError',
    'CommandNotRegisteredError',
    'QueryNotRegisteredError',
    'CheckNotRegisteredError',
    'ChecksFailedError',
    # events
    'Event',
    'EventMapper',
    'EventHandler',
    'EventBus',
    'SimpleEventBus',
    # fitting
    'ExponentFit',
    'ScalePoint',
    'fit_log_log',
    # geometry
    'DomainSpec',
    'UNIT_SQUARE',
    'UNIT_DISC',
    'green',
    'green_series',
    'green_regularized',
    'conformal_radius',
    # gff
    'SpectralField',
    'DiscreteField',
    'sample_spectral_gff',
    'sample_dgff',
    'dgff_covariance',
    'circle_average',
    'circle_process',
    'cutoff_for',
    # handlers
    'experiment_handlers',
    # kpz
    'FractalSet',
    'RootMode',
    'kpz_formula',
    'kpz_inverse',
    'euclidean_exponent',
    'quantum_ball',
    'quantum_exponent',
    'first_passage_oracle',
    'count_quadrangulations',
    # liouville
    'GridMeasure',
    'RootedField',
    'build_measure',
    'measure_apply',
    'cauchy_diagnostic',
    'weak_star_distance',
    'root_shift',
    'rooted_ball_mass',
    # rng
    'RandomStream',
    'stream',
    'run_replicates',
    # utils
    'get_simple_logger',
)
