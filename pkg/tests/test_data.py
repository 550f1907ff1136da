import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdae_ivs.data import (Dataset, SyntheticSpec, VariableMask, apply_mask,
                           compact, compact_dataset, expand, gen_synthetic,
                           load_amat, masked_dataset, split)
from sdae_ivs.errors import DataError, DimensionError
from sdae_ivs.numerics import make_rng

BG_RAND_TRAIN = Path(os.environ.get(
    "SDAE_IVS_DATA", "data")) / "mnist_background_random_train.amat"


def write(tmp_path, text):
    path = tmp_path / "toy.amat"
    path.write_text(text)
    return path


class TestLoadAmat:
    def test_minimal_file(self, tmp_path):
        d = load_amat(write(tmp_path, "0.0 1.0 0\n0.5 0.5 1\n"))
        assert (d.n, d.m, d.num_classes) == (2, 2, 2)
        assert d.labels.tolist() == [1, 2]
        np.testing.assert_array_equal(d.x, [[0.0, 1.0], [0.5, 0.5]])

    def test_one_based_labels(self, tmp_path):
        d = load_amat(write(tmp_path, "0.1 1\n0.2 2\n"), zero_based_labels=False)
        assert d.labels.tolist() == [1, 2]

    def test_ragged_row_names_row_number(self, tmp_path):
        path = write(tmp_path, "0 0 0\n0 0 0 0\n")
        with pytest.raises(DataError, match="row 2"):
            load_amat(path)

    def test_feature_outside_unit_interval(self, tmp_path):
        with pytest.raises(DataError, match=r"\[0, 1\]"):
            load_amat(write(tmp_path, "0.5 1.5 0\n"))

    def test_non_integer_label(self, tmp_path):
        with pytest.raises(DataError, match="non-integer label"):
            load_amat(write(tmp_path, "0.5 0.5 1.25\n"))

    def test_missing_file_names_path(self, tmp_path):
        with pytest.raises(DataError, match="nowhere.amat"):
            load_amat(tmp_path / "nowhere.amat")

    def test_label_below_base(self, tmp_path):
        with pytest.raises(DataError, match="below"):
            load_amat(write(tmp_path, "0.5 0\n"), zero_based_labels=False)

    @pytest.mark.skipif(not BG_RAND_TRAIN.is_file(),
                        reason="bg-rand corpus not available")
    def test_bg_rand_train_dimensions(self):
        d = load_amat(BG_RAND_TRAIN)
        assert (d.n, d.m, d.num_classes) == (12000, 784, 10)


class TestSplit:
    def test_benchmark_protocol_sizes(self):
        d = Dataset(np.zeros((12000, 2)), np.ones(12000, dtype=int), 2)
        train, valid, test = split(d, (10000, 2000))
        assert (train.n, valid.n, test.n) == (10000, 2000, 0)

    def test_oversized_split_rejected(self):
        d = Dataset(np.zeros((10, 2)), np.ones(10, dtype=int), 2)
        with pytest.raises(DataError):
            split(d, (10, 1))

    def test_partition_concatenates_back(self):
        rng = make_rng(0)
        d = Dataset(rng.uniform(size=(5, 3)), np.ones(5, dtype=int), 2)
        train, valid, test = split(d, (3, 1))
        assert (train.n, valid.n, test.n) == (3, 1, 1)
        np.testing.assert_array_equal(
            np.concatenate([train.x, valid.x, test.x]), d.x)

    @given(st.integers(0, 20), st.integers(0, 20), st.integers(0, 20))
    def test_partition_property(self, a, b, c):
        n = a + b + c
        rng = make_rng(n + 1)
        d = Dataset(rng.uniform(size=(n, 2)),
                    rng.integers(1, 3, size=n), 2)
        train, valid, test = split(d, (a, b))
        np.testing.assert_array_equal(
            np.concatenate([train.x, valid.x, test.x]), d.x)
        np.testing.assert_array_equal(
            np.concatenate([train.labels, valid.labels, test.labels]), d.labels)


class TestSynthetic:
    spec = SyntheticSpec(num_relevant=4, num_irrelevant=6, num_classes=3,
                         class_separation=2.0, noise_sd=0.3,
                         examples_per_split=(30, 10, 10))

    def test_deterministic(self):
        d1, m1 = gen_synthetic(self.spec, make_rng(11))
        d2, m2 = gen_synthetic(self.spec, make_rng(11))
        assert np.array_equal(d1.x, d2.x)
        assert np.array_equal(d1.labels, d2.labels)
        assert m1 == m2

    def test_ground_truth_popcount(self):
        _, truth = gen_synthetic(self.spec, make_rng(3))
        assert truth.popcount == self.spec.num_relevant

    def test_no_irrelevant_means_all_ones(self):
        spec = SyntheticSpec(4, 0, 3, 2.0, 0.3, (10, 5, 5))
        _, truth = gen_synthetic(spec, make_rng(3))
        assert truth == VariableMask.all_ones(4)

    def test_values_in_unit_interval(self):
        d, _ = gen_synthetic(self.spec, make_rng(5))
        assert d.x.min() >= 0.0 and d.x.max() <= 1.0

    def test_easy_spec_supports_accurate_classifier(self):
        # Oracle for selection tests: the planted task must be learnable.
        from sdae_ivs.mlr import TrainConfig, train_mlr, validation_error
        spec = SyntheticSpec(20, 80, 5, 3.0, 0.5, (1000, 300, 0))
        d, _truth = gen_synthetic(spec, make_rng(17))
        train, valid, _ = split(d, (1000, 300))
        model = train_mlr(train, valid, VariableMask.all_ones(d.m),
                          TrainConfig(0.1, 30, 5, seed=1))
        err = validation_error(model.weights, model.biases, valid.x, valid.labels)
        assert err <= 0.05


class TestMasks:
    def test_apply_mask_definition(self):
        out = apply_mask(np.array([0.2, 0.9, 0.4]),
                         VariableMask(np.array([1, 0, 1], dtype=bool)))
        np.testing.assert_array_equal(out, [0.2, 0.0, 0.4])

    def test_identity_and_annihilation(self):
        x = np.array([0.3, 0.7])
        assert np.array_equal(apply_mask(x, VariableMask.all_ones(2)), x)
        zeros = apply_mask(x, VariableMask(np.zeros(2, dtype=bool)))
        assert np.array_equal(zeros, np.zeros(2))

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            apply_mask(np.zeros(3), VariableMask.all_ones(4))

    def test_compact_expand_example(self):
        mask = VariableMask(np.array([0, 1, 1], dtype=bool))
        x = np.array([0.1, 0.2, 0.3])
        reduced = compact(x, mask)
        np.testing.assert_array_equal(reduced, [0.2, 0.3])
        np.testing.assert_array_equal(expand(reduced, mask), [0.0, 0.2, 0.3])

    def test_compact_identity_under_full_mask(self):
        x = np.array([0.4, 0.5])
        assert np.array_equal(compact(x, VariableMask.all_ones(2)), x)

    @settings(max_examples=100)
    @given(st.integers(1, 12), st.integers(0, 2**32 - 1))
    def test_round_trip_equals_apply_mask(self, m, seed):
        rng = make_rng(seed)
        x = rng.uniform(size=m)
        bits = rng.integers(0, 2, size=m).astype(bool)
        if not bits.any():
            bits[0] = True
        mask = VariableMask(bits)
        np.testing.assert_array_equal(expand(compact(x, mask), mask),
                                      apply_mask(x, mask))

    def test_dataset_level_helpers(self):
        d = Dataset(np.array([[0.1, 0.2], [0.3, 0.4]]),
                    np.array([1, 2]), 2)
        mask = VariableMask(np.array([0, 1], dtype=bool))
        masked = masked_dataset(d, mask)
        assert masked.m == 2 and masked.x[0, 0] == 0.0
        reduced = compact_dataset(d, mask)
        assert reduced.m == 1
        np.testing.assert_array_equal(reduced.x[:, 0], [0.2, 0.4])
