"""Bootstrap sampling of sentences and aggregation over repetitions.

Every random stream is derived from (run seed, treebank id, repetition
index, stream tag), so results do not depend on execution order or on how
work is spread over processes.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Mapping

import numpy as np

from .conllu import Sentence, Token, Treebank

# Stream tags keep the sampling draw, the per-measure draws and the single
# inflection-learner sample independent of each other.
_STREAM_SAMPLE = 1
_STREAM_MEASURE = 2
_STREAM_INFLECTION = 3

MeasureFn = Callable[["Sample", np.random.Generator], float | None]


class MeasureError(RuntimeError):
    """A measure failed; the message carries the repetition index."""


@dataclass(frozen=True)
class SampleConfig:
    target_tokens: int = 20000
    repetitions: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.target_tokens < 1:
            raise ValueError("target_tokens must be >= 1")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")


@dataclass(frozen=True)
class Sample:
    """Sentences drawn with replacement; the last one may be truncated."""

    sentences: tuple[Sentence, ...]
    n_tokens: int

    def tokens(self) -> Iterator[Token]:
        for sent in self.sentences:
            yield from sent.tokens


@dataclass(frozen=True)
class MeasureStats:
    """Mean and population standard deviation over repetitions."""

    mean: float | None
    stddev: float | None
    n_repetitions: int
    n_available: int

    @property
    def available(self) -> bool:
        return self.n_available == self.n_repetitions and self.mean is not None


def _id_hash(treebank_id: str) -> int:
    digest = hashlib.sha256(treebank_id.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def _name_hash(name: str) -> int:
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def sample_rng(seed: int, treebank_id: str, repetition: int) -> np.random.Generator:
    """Generator that drives sentence drawing for one repetition."""
    return np.random.default_rng([seed, _id_hash(treebank_id), repetition, _STREAM_SAMPLE])


def measure_rng(seed: int, treebank_id: str, repetition: int, measure: str) -> np.random.Generator:
    """Generator owned by one measure within one repetition."""
    return np.random.default_rng(
        [seed, _id_hash(treebank_id), repetition, _STREAM_MEASURE, _name_hash(measure)]
    )


def inflection_rng(seed: int, treebank_id: str) -> np.random.Generator:
    """Generator for the single inflection-learner sample and search."""
    return np.random.default_rng([seed, _id_hash(treebank_id), _STREAM_INFLECTION])


def bootstrap_sample(treebank: Treebank, target_tokens: int, rng: np.random.Generator) -> Sample:
    """Draw sentences uniformly with replacement until the token budget.

    The final sentence is truncated so the sample holds exactly
    ``target_tokens`` tokens; order inside each sentence is preserved.
    """
    if not treebank.sentences or treebank.n_tokens == 0:
        raise ValueError(f"treebank {treebank.id}: cannot sample from an empty treebank")
    if target_tokens < 1:
        raise ValueError("target_tokens must be >= 1")
    n_sent = len(treebank.sentences)
    drawn: list[Sentence] = []
    total = 0
    while total < target_tokens:
        sent = treebank.sentences[int(rng.integers(0, n_sent))]
        if total + len(sent) >= target_tokens:
            keep = target_tokens - total
            if keep < len(sent):
                sent = Sentence(sent.tokens[:keep])
            drawn.append(sent)
            total += keep
        else:
            drawn.append(sent)
            total += len(sent)
    return Sample(tuple(drawn), total)


def run_repetitions(
    treebank: Treebank,
    config: SampleConfig,
    measure_fns: Mapping[str, MeasureFn],
) -> dict[str, MeasureStats]:
    """Evaluate sample-level measures over bootstrap repetitions.

    Each repetition derives its own generators, so permuting or
    parallelising repetitions cannot change the summary.  A measure is
    reported as available only when every repetition produced a value.
    """
    if not measure_fns:
        raise ValueError("measure_fns must be nonempty")
    values: dict[str, list[float | None]] = {name: [] for name in measure_fns}
    for rep in range(config.repetitions):
        sample = bootstrap_sample(
            treebank, config.target_tokens, sample_rng(config.seed, treebank.id, rep)
        )
        for name, fn in measure_fns.items():
            try:
                value = fn(sample, measure_rng(config.seed, treebank.id, rep, name))
            except Exception as exc:
                raise MeasureError(
                    f"measure {name!r} failed on repetition {rep} of {treebank.id}: {exc}"
                ) from exc
            values[name].append(value)
    summary: dict[str, MeasureStats] = {}
    for name, vals in values.items():
        present = [v for v in vals if v is not None]
        if len(present) == len(vals):
            mean = float(np.mean(present))
            stddev = float(np.std(present))  # population convention
            if math.isnan(mean):
                raise MeasureError(f"measure {name!r} produced NaN on {treebank.id}")
            summary[name] = MeasureStats(mean, stddev, config.repetitions, len(present))
        else:
            summary[name] = MeasureStats(None, None, config.repetitions, len(present))
    return summary
