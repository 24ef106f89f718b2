import numpy as np
import pytest

from morphcomplex.sampling import (
    MeasureError,
    SampleConfig,
    bootstrap_sample,
    measure_rng,
    run_repetitions,
    sample_rng,
)
from morphcomplex.conllu import Treebank
from morphcomplex.measures import ttr

from synthdata import make_token, make_treebank


def five_token_treebank():
    return make_treebank("one", "xx", [[make_token(f"w{i}") for i in range(5)]])


def varied_treebank():
    sentences = [[make_token(f"s{j}w{i}") for i in range(j + 1)] for j in range(7)]
    return make_treebank("varied", "xx", sentences)


def sample_forms(sample):
    return [t.form for t in sample.tokens()]


class TestBootstrapSample:
    def test_truncation_forced_by_single_sentence(self):
        sample = bootstrap_sample(five_token_treebank(), 12, np.random.default_rng(0))
        assert [len(s) for s in sample.sentences] == [5, 5, 2]
        assert sample.n_tokens == 12

    def test_exact_token_budget(self):
        tb = varied_treebank()
        for target in (1, 2, 13, 50, 199):
            sample = bootstrap_sample(tb, target, np.random.default_rng(1))
            assert sample.n_tokens == target
            assert sum(len(s) for s in sample.sentences) == target

    def test_same_seed_same_sample(self):
        tb = varied_treebank()
        a = bootstrap_sample(tb, 40, sample_rng(7, tb.id, 3))
        b = bootstrap_sample(tb, 40, sample_rng(7, tb.id, 3))
        assert sample_forms(a) == sample_forms(b)

    def test_different_repetition_different_sample(self):
        tb = varied_treebank()
        a = bootstrap_sample(tb, 40, sample_rng(7, tb.id, 0))
        b = bootstrap_sample(tb, 40, sample_rng(7, tb.id, 1))
        assert sample_forms(a) != sample_forms(b)

    def test_sentence_internal_order_preserved(self):
        tb = varied_treebank()
        originals = {tuple(t.form for t in s.tokens) for s in tb.sentences}
        sample = bootstrap_sample(tb, 60, np.random.default_rng(2))
        for sent in sample.sentences[:-1]:
            assert tuple(t.form for t in sent.tokens) in originals
        last = tuple(t.form for t in sample.sentences[-1].tokens)
        assert any(orig[: len(last)] == last for orig in originals)

    def test_empty_treebank_rejected(self):
        empty = Treebank("empty", "xx", (), 0, 0)
        with pytest.raises(ValueError):
            bootstrap_sample(empty, 10, np.random.default_rng(0))


class TestRunRepetitions:
    def test_constant_measure(self):
        config = SampleConfig(target_tokens=10, repetitions=100, seed=5)
        stats = run_repetitions(five_token_treebank(), config, {"one": lambda s, rng: 1.0})
        assert stats["one"].mean == 1.0
        assert stats["one"].stddev == 0.0
        assert stats["one"].n_repetitions == 100
        assert stats["one"].available

    def test_ttr_stddev_zero_on_single_unique_sentence(self):
        config = SampleConfig(target_tokens=5, repetitions=20, seed=1)
        stats = run_repetitions(five_token_treebank(), config, {"ttr": lambda s, rng: ttr(s)})
        assert stats["ttr"].mean == 1.0
        assert stats["ttr"].stddev == 0.0

    def test_registration_order_does_not_matter(self):
        tb = varied_treebank()
        config = SampleConfig(target_tokens=30, repetitions=10, seed=9)
        fns = {
            "ttr": lambda s, rng: ttr(s),
            "noise": lambda s, rng: float(rng.uniform()),
        }
        forward = run_repetitions(tb, config, fns)
        backward = run_repetitions(tb, config, dict(reversed(list(fns.items()))))
        assert forward == backward

    def test_repetition_values_match_independent_recomputation(self):
        tb = varied_treebank()
        config = SampleConfig(target_tokens=30, repetitions=8, seed=11)
        stats = run_repetitions(tb, config, {"ttr": lambda s, rng: ttr(s)})
        values = []
        for rep in reversed(range(config.repetitions)):
            sample = bootstrap_sample(tb, 30, sample_rng(11, tb.id, rep))
            values.append(ttr(sample))
        assert stats["ttr"].mean == pytest.approx(np.mean(values), abs=1e-12)
        assert stats["ttr"].stddev == pytest.approx(np.std(values), abs=1e-12)

    def test_unavailable_when_any_repetition_lacks_value(self):
        config = SampleConfig(target_tokens=5, repetitions=4, seed=0)
        stats = run_repetitions(five_token_treebank(), config, {"never": lambda s, rng: None})
        assert not stats["never"].available
        assert stats["never"].mean is None
        assert stats["never"].n_available == 0

    def test_measure_error_carries_repetition_index(self):
        config = SampleConfig(target_tokens=5, repetitions=3, seed=0)

        def boom(sample, rng):
            raise RuntimeError("bad measure")

        with pytest.raises(MeasureError, match="repetition 0"):
            run_repetitions(five_token_treebank(), config, {"boom": boom})

    def test_empty_measure_set_rejected(self):
        with pytest.raises(ValueError):
            run_repetitions(five_token_treebank(), SampleConfig(), {})


class TestStreams:
    def test_measure_streams_are_independent_of_each_other(self):
        a = measure_rng(3, "tb", 0, "ws").uniform(size=4)
        b = measure_rng(3, "tb", 0, "other").uniform(size=4)
        assert not np.allclose(a, b)

    def test_streams_differ_across_treebanks(self):
        a = sample_rng(3, "tb1", 0).uniform(size=4)
        b = sample_rng(3, "tb2", 0).uniform(size=4)
        assert not np.allclose(a, b)


class TestSampleConfig:
    def test_invalid_values_rejected(self):
        with pytest.raises(ValueError):
            SampleConfig(target_tokens=0)
        with pytest.raises(ValueError):
            SampleConfig(repetitions=0)
