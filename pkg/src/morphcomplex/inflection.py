"""Inflection accuracy: predict inflected forms from lemma + features.

The learner maps each (lemma, form) training pair to an edit script
(prefix/suffix operations around the longest common substring), then
trains a multiclass averaged perceptron over script classes with sparse
character and feature-bundle indicators.  The reported measure is the
negative best mean exact-match accuracy under 3-fold cross validation,
searched over random hyperparameter draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .sampling import Sample


def canonical_bundle(feats: Iterable[tuple[str, str]]) -> str:
    """Order-insensitive Key=Value bundle string."""
    return "|".join(f"{k}={v}" for k, v in sorted(feats))


@dataclass(frozen=True)
class InflectionInstance:
    lemma: str
    feature_bundle: str
    form: str


def extract_instances(sample: Sample) -> list[InflectionInstance]:
    """One instance per token with a lemma and features; exact duplicates
    collapse to one, but conflicting forms for a (lemma, bundle) all stay."""
    seen: dict[InflectionInstance, None] = {}
    for tok in sample.tokens():
        if not tok.lemma or not tok.form or not tok.feats:
            continue
        inst = InflectionInstance(tok.lemma, canonical_bundle(tok.feats), tok.form)
        seen.setdefault(inst, None)
    return list(seen)


@dataclass(frozen=True, order=True)
class EditScript:
    """Prefix/suffix rewrite turning a lemma into an inflected form."""

    prefix_drop: int
    prefix_add: str
    suffix_drop: int
    suffix_add: str

    def fits(self, lemma: str) -> bool:
        return self.prefix_drop + self.suffix_drop <= len(lemma)

    def apply(self, lemma: str) -> str:
        stem = lemma[self.prefix_drop : len(lemma) - self.suffix_drop]
        return self.prefix_add + stem + self.suffix_add

    def apply_clamped(self, lemma: str) -> str:
        """Total fallback application when the drops do not fit."""
        pd = min(self.prefix_drop, len(lemma))
        sd = min(self.suffix_drop, len(lemma) - pd)
        return self.prefix_add + lemma[pd : len(lemma) - sd] + self.suffix_add


def _longest_common_substring(a: str, b: str) -> tuple[int, int, int]:
    """Return (start_a, start_b, length) of the longest common substring.

    Ties break on the leftmost start in ``a``, then the leftmost in ``b``.
    """
    best = (0, 0, 0)
    prev = [0] * (len(b) + 1)
    for i in range(1, len(a) + 1):
        cur = [0] * (len(b) + 1)
        ai = a[i - 1]
        for j in range(1, len(b) + 1):
            if ai == b[j - 1]:
                run = prev[j - 1] + 1
                cur[j] = run
                if run > best[2]:
                    best = (i - run, j - run, run)
        prev = cur
    return best


def derive_edit_script(lemma: str, form: str) -> EditScript:
    """Align lemma and form on their longest common substring.

    With no common substring the script degenerates to a full replacement.
    Applying the result to the lemma reproduces the form exactly.
    """
    if not lemma or not form:
        raise ValueError("lemma and form must be nonempty")
    start_l, start_f, length = _longest_common_substring(lemma, form)
    if length == 0:
        return EditScript(len(lemma), form, 0, "")
    return EditScript(
        prefix_drop=start_l,
        prefix_add=form[:start_f],
        suffix_drop=len(lemma) - (start_l + length),
        suffix_add=form[start_f + length :],
    )


def featurize(lemma: str, feature_bundle: str, ngram_order: int) -> list[str]:
    """Sparse binary features for one instance.

    Edge-anchored lemma character n-grams of orders 1..K, one indicator
    per Key=Value pair, and each pair conjoined with the final lemma
    character.
    """
    feats = ["bias"]
    top = min(ngram_order, len(lemma))
    for n in range(1, top + 1):
        feats.append("^" + lemma[:n])
        feats.append(lemma[-n:] + "$")
    last = lemma[-1]
    for pair in feature_bundle.split("|"):
        feats.append(pair)
        feats.append(f"{pair}&end={last}")
    return feats


class _AveragedWeights:
    """Sparse multiclass weights with lazily-averaged accumulators."""

    __slots__ = ("n_classes", "_w", "_acc", "_stamp", "_t")

    def __init__(self, n_classes: int):
        self.n_classes = n_classes
        self._w: dict[str, dict[int, float]] = {}
        self._acc: dict[str, dict[int, float]] = {}
        self._stamp: dict[str, dict[int, int]] = {}
        self._t = 0

    def tick(self):
        self._t += 1

    def scores(self, features: Sequence[str]) -> np.ndarray:
        s = np.zeros(self.n_classes)
        for f in features:
            row = self._w.get(f)
            if row:
                for c, w in row.items():
                    s[c] += w
        return s

    def _bump(self, feature: str, cls: int, amount: float):
        w = self._w.setdefault(feature, {})
        acc = self._acc.setdefault(feature, {})
        stamp = self._stamp.setdefault(feature, {})
        acc[cls] = acc.get(cls, 0.0) + (self._t - stamp.get(cls, 0)) * w.get(cls, 0.0)
        stamp[cls] = self._t
        w[cls] = w.get(cls, 0.0) + amount

    def update(self, features: Sequence[str], gold: int, predicted: int, step: float):
        for f in features:
            self._bump(f, gold, step)
            self._bump(f, predicted, -step)

    def averaged(self) -> dict[str, dict[int, float]]:
        if self._t == 0:
            return {}
        out: dict[str, dict[int, float]] = {}
        for f, row in self._w.items():
            acc = self._acc[f]
            stamp = self._stamp[f]
            avg = {}
            for c, w in row.items():
                total = acc.get(c, 0.0) + (self._t - stamp.get(c, 0)) * w
                value = total / self._t
                if value != 0.0:
                    avg[c] = value
            if avg:
                out[f] = avg
        return out


@dataclass(frozen=True)
class Hyperparams:
    ngram_order: int
    epochs: int
    step: float


@dataclass
class InflectionModel:
    scripts: tuple[EditScript, ...]
    weights: dict[str, dict[int, float]]
    params: Hyperparams

    def score_classes(self, features: Sequence[str]) -> np.ndarray:
        s = np.zeros(len(self.scripts))
        for f in features:
            row = self.weights.get(f)
            if row:
                for c, w in row.items():
                    s[c] += w
        return s


def train(
    instances: Sequence[InflectionInstance],
    params: Hyperparams,
    rng: np.random.Generator,
    feature_cache: Sequence[Sequence[str]] | None = None,
    script_cache: Sequence[EditScript] | None = None,
) -> InflectionModel:
    """Averaged-perceptron training over edit-script classes.

    The rng only shuffles instance order, so identical (instances, params,
    seed) give identical weights.  A single-class training set yields a
    degenerate model that always predicts that class.
    """
    if not instances:
        raise ValueError("empty training set")
    scripts = script_cache or [derive_edit_script(i.lemma, i.form) for i in instances]
    classes = tuple(sorted(set(scripts)))
    class_index = {s: i for i, s in enumerate(classes)}
    labels = [class_index[s] for s in scripts]
    feats = feature_cache or [
        featurize(i.lemma, i.feature_bundle, params.ngram_order) for i in instances
    ]
    weights = _AveragedWeights(len(classes))
    if len(classes) > 1:
        n = len(instances)
        for _ in range(params.epochs):
            for idx in rng.permutation(n):
                weights.tick()
                x = feats[idx]
                predicted = int(np.argmax(weights.scores(x)))
                if predicted != labels[idx]:
                    weights.update(x, labels[idx], predicted, params.step)
    return InflectionModel(classes, weights.averaged(), params)


def predict(model: InflectionModel, lemma: str, feature_bundle: str) -> str:
    """Apply the best-scoring edit script that fits the lemma.

    Scripts whose drops exceed the lemma length are skipped down the
    ranking; if nothing fits, the top script is applied with clamped drops
    so prediction is total.
    """
    features = featurize(lemma, feature_bundle, model.params.ngram_order)
    scores = model.score_classes(features)
    order = np.argsort(-scores, kind="stable")
    for c in order:
        script = model.scripts[int(c)]
        if script.fits(lemma):
            return script.apply(lemma)
    return model.scripts[int(order[0])].apply_clamped(lemma)


@dataclass(frozen=True)
class IASearchConfig:
    n_folds: int = 3
    n_draws: int = 20
    ngram_range: tuple[int, int] = (1, 4)
    epoch_range: tuple[int, int] = (5, 30)
    step_range: tuple[float, float] = (0.01, 1.0)


@dataclass(frozen=True)
class IAResult:
    fold_accuracies: tuple[float, ...]
    mean_accuracy: float
    params: Hyperparams
    n_draws: int

    @property
    def measure_value(self) -> float:
        return -self.mean_accuracy


def _draw_params(prng: np.random.Generator, config: IASearchConfig) -> Hyperparams:
    lo, hi = config.step_range
    return Hyperparams(
        ngram_order=int(prng.integers(config.ngram_range[0], config.ngram_range[1] + 1)),
        epochs=int(prng.integers(config.epoch_range[0], config.epoch_range[1] + 1)),
        step=float(10 ** prng.uniform(math.log10(lo), math.log10(hi))),
    )


def cross_validate(
    instances: Sequence[InflectionInstance],
    config: IASearchConfig,
    rng: np.random.Generator,
) -> IAResult:
    """Best mean exact-match accuracy over random hyperparameter draws.

    Instances are shuffled once and split into folds round-robin; every
    draw is evaluated on the same folds with its own derived generator, so
    draws may be reordered or parallelised without changing the result.
    Ties between draws break toward the earlier draw index.
    """
    if len(instances) < config.n_folds:
        raise ValueError(f"need at least {config.n_folds} instances, got {len(instances)}")
    root = int(rng.integers(0, 2**63))
    order = np.random.default_rng([root, 1]).permutation(len(instances))
    folds: list[list[int]] = [[] for _ in range(config.n_folds)]
    for pos, idx in enumerate(order):
        folds[pos % config.n_folds].append(int(idx))

    scripts = [derive_edit_script(i.lemma, i.form) for i in instances]
    features_by_k: dict[int, list[list[str]]] = {}

    def features_for(k: int) -> list[list[str]]:
        if k not in features_by_k:
            features_by_k[k] = [
                featurize(i.lemma, i.feature_bundle, k) for i in instances
            ]
        return features_by_k[k]

    best: IAResult | None = None
    for draw in range(config.n_draws):
        params = _draw_params(np.random.default_rng([root, 2, draw]), config)
        feats = features_for(params.ngram_order)
        fold_acc: list[float] = []
        for f in range(config.n_folds):
            test_idx = folds[f]
            train_idx = [i for g in range(config.n_folds) if g != f for i in folds[g]]
            model = train(
                [instances[i] for i in train_idx],
                params,
                np.random.default_rng([root, 3, draw, f]),
                feature_cache=[feats[i] for i in train_idx],
                script_cache=[scripts[i] for i in train_idx],
            )
            correct = sum(
                1
                for i in test_idx
                if predict(model, instances[i].lemma, instances[i].feature_bundle)
                == instances[i].form
            )
            fold_acc.append(correct / len(test_idx))
        mean = float(np.mean(fold_acc))
        if best is None or mean > best.mean_accuracy:
            best = IAResult(tuple(fold_acc), mean, params, config.n_draws)
    assert best is not None
    return best
