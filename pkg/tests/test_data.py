# -*- coding: utf-8 -*-
"""
Tests for datasets, IDX loading and the heterogeneity partitioners.
"""

import gzip

import numpy as np
import pytest
from sklearn.linear_model import LogisticRegression

from d2d_topology.data import (
    digits_dataset,
    dirichlet_partition,
    idx_dataset,
    label_histograms,
    load_idx,
    prepare_federated_data,
    rotate_image,
    rotate_test_set,
    rotation_angles,
    rotation_partition,
    shard_partition,
    synthetic_dataset,
)
from d2d_topology.errors import DataError
from d2d_topology.models import DataConfig, Dataset


def idx_bytes(array: np.ndarray) -> bytes:
    header = bytes([0, 0, 0x08, array.ndim]) + np.array(array.shape, dtype=">u4").tobytes()
    return header + array.astype(np.uint8).tobytes()


def image_dataset(gen: np.random.Generator, examples: int = 12, side: int = 4) -> Dataset:
    return Dataset(
        features=gen.uniform(size=(examples, side * side)),
        labels=np.arange(examples) % 3,
        class_count=3,
    )


class TestSyntheticDataset:
    """Test Gaussian class clusters."""

    def test_balanced_classes(self, rng):
        """Test class counts differ by at most one."""
        splits = synthetic_dataset(5, 3, 301, rng)
        labels = np.concatenate([splits.train.labels, splits.test.labels])
        counts = np.bincount(labels, minlength=3)
        assert counts.max() - counts.min() <= 1
        assert len(splits.train) + len(splits.test) == 301
        assert splits.test.split == "test"

    def test_same_seed_same_bytes(self):
        """Test generation is deterministic given the seed."""
        a = synthetic_dataset(4, 2, 50, np.random.default_rng(3))
        b = synthetic_dataset(4, 2, 50, np.random.default_rng(3))
        np.testing.assert_array_equal(a.train.features, b.train.features)
        np.testing.assert_array_equal(a.test.labels, b.test.labels)

    def test_separated_classes_are_linearly_separable(self, rng):
        """Test two well-separated clusters give a logistic regression at least 99% test accuracy."""
        splits = synthetic_dataset(5, 2, 400, rng, separation=12.0)
        classifier = LogisticRegression().fit(splits.train.features, splits.train.labels)
        assert classifier.score(splits.test.features, splits.test.labels) >= 0.99

    def test_invalid_arguments(self, rng):
        """Test a single class or too few examples raise ValueError."""
        with pytest.raises(ValueError):
            synthetic_dataset(4, 1, 10, rng)
        with pytest.raises(ValueError):
            synthetic_dataset(4, 5, 3, rng)


class TestDigitsDataset:
    """Test the bundled 8x8 digits."""

    def test_shapes_and_scale(self, rng):
        """Test 64 features in [0, 1] and ten classes."""
        splits = digits_dataset(rng)
        assert splits.train.input_dim == 64
        assert splits.train.class_count == 10
        assert len(splits.train) + len(splits.test) == 1797
        assert 0.0 <= splits.train.features.min() and splits.train.features.max() <= 1.0


class TestDirichletPartition:
    """Test label-skew partitioning."""

    def test_covers_every_example(self, rng):
        """Test each example goes to exactly one client and no client is empty."""
        ds = synthetic_dataset(4, 5, 500, rng).train
        partition = dirichlet_partition(ds, 8, 0.5, rng)
        assert partition.assignment.shape == (len(ds),)
        assert np.all(partition.counts() >= 1)
        assert partition.counts().sum() == len(ds)

    def test_large_alpha_is_near_iid(self, rng):
        """Test alpha=1e6 keeps client histograms within 5% of the global one."""
        ds = synthetic_dataset(4, 3, 3000, rng, test_fraction=0.1).train
        partition = dirichlet_partition(ds, 4, 1e6, rng)
        hist = label_histograms(partition, ds.labels, 3)
        global_hist = np.bincount(ds.labels, minlength=3) / len(ds)
        assert np.max(np.abs(hist - global_hist)) <= 0.05

    def test_small_alpha_is_skewed(self):
        """Test alpha=0.1, N=16 leaves clients with fewer than all classes on average."""
        distinct = []
        for seed in range(3):
            gen = np.random.default_rng(seed)
            ds = synthetic_dataset(4, 10, 2000, gen).train
            partition = dirichlet_partition(ds, 16, 0.1, gen)
            hist = label_histograms(partition, ds.labels, 10)
            distinct.append(np.mean(np.count_nonzero(hist, axis=1)))
        assert np.mean(distinct) < 10

    def test_single_client(self, rng):
        """Test N=1 assigns everything to client 0."""
        ds = synthetic_dataset(4, 3, 60, rng).train
        np.testing.assert_array_equal(dirichlet_partition(ds, 1, 0.1, rng).assignment, 0)

    def test_empty_clients_are_repaired(self, rng):
        """Test extreme skew still gives every client an example."""
        ds = synthetic_dataset(4, 2, 40, rng).train
        partition = dirichlet_partition(ds, 10, 1e-3, rng)
        assert np.all(partition.counts() >= 1)

    def test_invalid_arguments(self, rng):
        """Test bad alpha and too many clients are rejected."""
        ds = synthetic_dataset(4, 2, 20, rng).train
        with pytest.raises(ValueError):
            dirichlet_partition(ds, 2, 0.0, rng)
        with pytest.raises(DataError):
            dirichlet_partition(ds, len(ds) + 1, 1.0, rng)


class TestRotation:
    """Test rotation feature skew."""

    def test_zero_and_full_turn(self, rng):
        """Test 0 and 360 degrees return the image."""
        image = rng.uniform(size=(5, 5))
        np.testing.assert_array_equal(rotate_image(image, 0.0), image)
        np.testing.assert_allclose(rotate_image(image, 360.0), image, atol=1e-6)

    def test_four_quarter_turns(self, rng):
        """Test four successive 90 degree rotations are the identity."""
        image = rng.uniform(size=(4, 4))
        rotated = image
        for _ in range(4):
            rotated = rotate_image(rotated, 90.0)
        np.testing.assert_array_equal(rotated, image)

    def test_clockwise_direction(self):
        """Test top-middle moves to right-middle under a clockwise quarter turn."""
        image = np.zeros((3, 3))
        image[0, 1] = 1.0
        assert rotate_image(image, 90.0)[1, 2] == 1.0
        assert rotate_image(image, 89.999)[1, 2] > 0.99

    def test_interpolated_rotation_keeps_center(self, rng):
        """Test the center pixel of an odd image is fixed at any angle."""
        image = rng.uniform(size=(5, 5))
        assert rotate_image(image, 37.0)[2, 2] == pytest.approx(image[2, 2])

    def test_angles(self):
        """Test N=100 gives 3.6 degrees per client."""
        np.testing.assert_allclose(rotation_angles(100)[:4], [0.0, 3.6, 7.2, 10.8])
        np.testing.assert_allclose(rotation_angles(4), [0.0, 90.0, 180.0, 270.0])

    def test_partition_preserves_counts_and_labels(self, rng):
        """Test shards keep every example and label."""
        ds = image_dataset(rng, examples=13)
        clients = rotation_partition(ds, 4, rng)
        assert sum(len(c) for c in clients) == 13
        labels = np.sort(np.concatenate([c.labels for c in clients]))
        np.testing.assert_array_equal(labels, np.sort(ds.labels))

    def test_partition_rotates_each_shard(self, rng):
        """Test client 1 of four holds quarter-turned images of its shard."""
        ds = image_dataset(rng, examples=8)
        clients = rotation_partition(ds, 4)
        shard = ds.subset(shard_partition(ds, 4).indices_of(1))
        expected = np.rot90(shard.features[0].reshape(4, 4), k=-1).ravel()
        np.testing.assert_allclose(clients[1].features[0], expected)

    def test_non_square_features(self, rng):
        """Test a non-square feature dimension raises DataError."""
        ds = Dataset(features=rng.uniform(size=(4, 5)), labels=np.zeros(4), class_count=2)
        with pytest.raises(DataError, match="square"):
            rotation_partition(ds, 2)

    def test_test_set_uses_example_index(self, rng):
        """Test example e of the test set takes client e mod N's angle."""
        ds = image_dataset(rng, examples=6)
        rotated = rotate_test_set(ds, 4)
        np.testing.assert_array_equal(rotated.features[0], ds.features[0])
        np.testing.assert_allclose(
            rotated.features[5], np.rot90(ds.features[5].reshape(4, 4), k=-1).ravel()
        )


class TestIdx:
    """Test the IDX reader."""

    def test_plain_and_gzip(self, tmp_path):
        """Test both encodings decode the same array."""
        images = np.arange(2 * 2 * 3).reshape(2, 2, 3).astype(np.uint8)
        plain = tmp_path / "images.idx"
        packed = tmp_path / "images.idx.gz"
        plain.write_bytes(idx_bytes(images))
        packed.write_bytes(gzip.compress(idx_bytes(images)))
        np.testing.assert_array_equal(load_idx(plain), images)
        np.testing.assert_array_equal(load_idx(packed), images)

    def test_dataset_scaling(self, tmp_path):
        """Test uint8 images are flattened and scaled to [0, 1]."""
        images = np.array([[[0, 255], [51, 102]], [[255, 255], [0, 0]]], dtype=np.uint8)
        (tmp_path / "x.idx").write_bytes(idx_bytes(images))
        (tmp_path / "y.idx").write_bytes(idx_bytes(np.array([1, 0], dtype=np.uint8)))
        ds = idx_dataset(tmp_path / "x.idx", tmp_path / "y.idx", split="test")
        np.testing.assert_allclose(ds.features[0], [0.0, 1.0, 0.2, 0.4])
        assert ds.class_count == 2
        assert ds.split == "test"

    def test_bad_magic(self, tmp_path):
        """Test a non-IDX file raises DataError."""
        path = tmp_path / "bad.idx"
        path.write_bytes(b"\x01\x02\x08\x01\x00\x00\x00\x01\x00")
        with pytest.raises(DataError, match="magic"):
            load_idx(path)

    def test_truncated_data(self, tmp_path):
        """Test a short payload raises DataError."""
        path = tmp_path / "short.idx"
        path.write_bytes(idx_bytes(np.zeros(4, dtype=np.uint8))[:-1])
        with pytest.raises(DataError, match="data bytes"):
            load_idx(path)

    def test_missing_file(self, tmp_path):
        """Test an unreadable path raises DataError."""
        with pytest.raises(DataError, match="Cannot read"):
            load_idx(tmp_path / "missing.idx")

    def test_mismatched_counts(self, tmp_path):
        """Test image and label counts must agree."""
        (tmp_path / "x.idx").write_bytes(idx_bytes(np.zeros((3, 2, 2), dtype=np.uint8)))
        (tmp_path / "y.idx").write_bytes(idx_bytes(np.zeros(2, dtype=np.uint8)))
        with pytest.raises(DataError, match="labels"):
            idx_dataset(tmp_path / "x.idx", tmp_path / "y.idx")


class TestPrepareFederatedData:
    """Test configured client splits."""

    def test_dirichlet_split(self, rng):
        """Test label skew keeps the unrotated test split."""
        cfg = DataConfig(dataset="synthetic", synthetic_dim=9, synthetic_classes=3, synthetic_examples=200)
        data = prepare_federated_data(cfg, 4, rng)
        assert len(data.clients) == 4
        assert sum(len(c) for c in data.clients) == data.partition.assignment.size
        assert len(data.test) == 40

    def test_rotation_split(self, rng):
        """Test rotation skew gives equal shards."""
        cfg = DataConfig(
            dataset="synthetic", partition="rotation", synthetic_dim=16, synthetic_classes=3, synthetic_examples=200,
        )
        data = prepare_federated_data(cfg, 4, rng)
        assert [len(c) for c in data.clients] == [40, 40, 40, 40]

    def test_label_histograms_rows_sum_to_one(self, rng):
        """Test per-client label distributions are normalized."""
        ds = synthetic_dataset(4, 3, 90, rng).train
        partition = dirichlet_partition(ds, 3, 1.0, rng)
        hist = label_histograms(partition, ds.labels, 3)
        np.testing.assert_allclose(hist.sum(axis=1), 1.0)
