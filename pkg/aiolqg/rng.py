"""Reproducible random streams.

Every ensemble member draws from its own counter-based Philox stream keyed by
(seed, replicate), so results never depend on scheduling or worker count.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, TypeVar, Union

import numpy as np

from .value_objects import Seed

_T = TypeVar('_T')


@dataclass(frozen=True)
class RandomStream:
    seed: int
    replicate: int = 0
    substream: int = 0
    generator: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        Seed(self.seed)
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.replicate, self.substream))
        object.__setattr__(self, 'generator', np.random.Generator(np.random.Philox(sequence)))

    def record(self) -> Dict[str, int]:
        return {'seed': self.seed, 'replicate': self.replicate, 'substream': self.substream}

    def child(self, index: int) -> 'RandomStream':
        """A stream for sub-task ``index`` that never overlaps its siblings."""
        return RandomStream(seed=self.seed, replicate=self.replicate, substream=index + 1)


def stream(seed: Union[int, Seed], replicate: int = 0) -> RandomStream:
    return RandomStream(seed=int(seed), replicate=replicate)


def run_replicates(
    fn: Callable[[RandomStream], _T],
    seed: Union[int, Seed],
    replicates: int,
    workers: Optional[int] = None,
    first: int = 0,
) -> List[_T]:
    """Evaluate ``fn`` on replicates ``first..first+replicates-1``; results come back in replicate order."""
    streams = [stream(seed, first + index) for index in range(replicates)]
    if workers is None or workers <= 1 or replicates <= 1:
        return [fn(item) for item in streams]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, streams))
