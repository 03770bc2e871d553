"""
Datasets and heterogeneity partitioners.

Desk-scale sources (scikit-learn 8x8 digits, Gaussian clusters, IDX files)
and the two client skews: Dirichlet label skew and rotation feature skew.
"""

import gzip
import logging
import math
from pathlib import Path
from typing import List, NamedTuple, Optional, Union

import numpy as np
from scipy.ndimage import map_coordinates
from sklearn.datasets import load_digits
from sklearn.model_selection import train_test_split

from .errors import DataError
from .models.config import DataConfig
from .models.learning import Dataset, DatasetSplits, Partition

logger = logging.getLogger(__name__)

_IDX_DTYPES = {
    0x08: np.dtype(np.uint8),
    0x09: np.dtype(np.int8),
    0x0B: np.dtype(">i2"),
    0x0C: np.dtype(">i4"),
    0x0D: np.dtype(">f4"),
    0x0E: np.dtype(">f8"),
}


class FederatedData(NamedTuple):
    """Per-client training sets, the global test set and the example assignment."""
    clients: List[Dataset]
    test: Dataset
    partition: Partition


def _split_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2 ** 31 - 1))


def synthetic_dataset(
    input_dim: int,
    class_count: int,
    examples: int,
    rng: np.random.Generator,
    separation: float = 3.0,
    test_fraction: float = 0.2,
) -> DatasetSplits:
    """
    Gaussian class clusters with unit noise.

    Class centers are random directions scaled to norm `separation`; labels
    cycle through the classes before shuffling, so class counts differ by at
    most one.
    """
    if class_count < 2:
        raise ValueError(f"class_count must be at least 2, got {class_count}")
    if examples < class_count:
        raise ValueError(f"need at least one example per class, got {examples}")
    centers = rng.standard_normal((class_count, input_dim))
    centers *= separation / np.linalg.norm(centers, axis=1, keepdims=True)
    labels = rng.permutation(np.arange(examples) % class_count)
    features = centers[labels] + rng.standard_normal((examples, input_dim))

    x_train, x_test, y_train, y_test = train_test_split(
        features, labels, test_size=test_fraction, random_state=_split_seed(rng), stratify=labels,
    )
    return DatasetSplits(
        train=Dataset(x_train, y_train, class_count, "train"),
        test=Dataset(x_test, y_test, class_count, "test"),
    )


def digits_dataset(rng: np.random.Generator, test_fraction: float = 0.2) -> DatasetSplits:
    """scikit-learn 8x8 handwritten digits scaled to [0, 1] with a stratified held-out split."""
    digits = load_digits()
    features = digits.data / 16.0
    x_train, x_test, y_train, y_test = train_test_split(
        features, digits.target, test_size=test_fraction,
        random_state=_split_seed(rng), stratify=digits.target,
    )
    return DatasetSplits(
        train=Dataset(x_train, y_train, 10, "train"),
        test=Dataset(x_test, y_test, 10, "test"),
    )


def load_idx(path: Union[str, Path]) -> np.ndarray:
    """
    Read an IDX file (optionally gzip-compressed).

    Format: two zero bytes, a dtype code, the number of dimensions, one
    big-endian uint32 per dimension, then the raw row-major data.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise DataError(f"Cannot read IDX file {path}: {exc}") from exc
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    if len(raw) < 4 or raw[0] != 0 or raw[1] != 0:
        raise DataError(f"{path} is not an IDX file (bad magic)")
    dtype = _IDX_DTYPES.get(raw[2])
    if dtype is None:
        raise DataError(f"{path}: unknown IDX dtype code 0x{raw[2]:02x}")
    ndim = raw[3]
    header = 4 + 4 * ndim
    if len(raw) < header:
        raise DataError(f"{path}: truncated IDX header")
    shape = tuple(int(v) for v in np.frombuffer(raw, dtype=">u4", count=ndim, offset=4))
    expected = int(np.prod(shape)) * dtype.itemsize
    if len(raw) - header != expected:
        raise DataError(f"{path}: expected {expected} data bytes, found {len(raw) - header}")
    return np.frombuffer(raw, dtype=dtype, offset=header).reshape(shape)


def idx_dataset(
    images_path: Union[str, Path],
    labels_path: Union[str, Path],
    class_count: Optional[int] = None,
    split: str = "train",
) -> Dataset:
    """Flattened IDX images (uint8 scaled to [0, 1]) with their labels."""
    images = load_idx(images_path)
    labels = load_idx(labels_path).astype(np.int64).ravel()
    if images.shape[0] != labels.shape[0]:
        raise DataError(f"{images.shape[0]} images but {labels.shape[0]} labels")
    features = images.reshape(images.shape[0], -1).astype(float)
    if images.dtype == np.uint8:
        features /= 255.0
    if class_count is None:
        class_count = max(int(labels.max()) + 1, 2)
    return Dataset(features, labels, class_count, split)


def idx_splits(cfg: DataConfig) -> DatasetSplits:
    """Train/test IDX pair sharing one class count."""
    train_labels = load_idx(cfg.idx_train_labels)
    test_labels = load_idx(cfg.idx_test_labels)
    class_count = max(int(train_labels.max()), int(test_labels.max())) + 1
    return DatasetSplits(
        train=idx_dataset(cfg.idx_train_images, cfg.idx_train_labels, class_count, "train"),
        test=idx_dataset(cfg.idx_test_images, cfg.idx_test_labels, class_count, "test"),
    )


def dirichlet_partition(ds: Dataset, num_clients: int, alpha: float, rng: np.random.Generator) -> Partition:
    """
    Label-skew split: per class, proportions ~ Dirichlet(alpha * 1_N).

    Rounding remainders go to the largest fractional shares. Clients left
    empty receive one example from the currently largest client.
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if num_clients < 1:
        raise ValueError(f"num_clients must be at least 1, got {num_clients}")
    if len(ds) < num_clients:
        raise DataError(f"{len(ds)} examples cannot cover {num_clients} clients")

    assignment = np.zeros(len(ds), dtype=np.int64)
    for c in range(ds.class_count):
        idx = rng.permutation(np.flatnonzero(ds.labels == c))
        if idx.size == 0:
            continue
        proportions = rng.dirichlet(np.full(num_clients, alpha))
        shares = proportions * idx.size
        splits = shares.astype(int)
        remainder = idx.size - int(splits.sum())
        if remainder > 0:
            splits[np.argsort(-(shares - splits), kind="stable")[:remainder]] += 1
        assignment[idx] = np.repeat(np.arange(num_clients), splits)

    counts = np.bincount(assignment, minlength=num_clients)
    for client in np.flatnonzero(counts == 0):
        donor = int(np.argmax(counts))
        moved = np.flatnonzero(assignment == donor)[0]
        assignment[moved] = client
        counts[donor] -= 1
        counts[client] += 1
        logger.warning(f"Client {client} received no examples; moved one from client {donor}")

    return Partition(assignment=assignment, num_clients=num_clients)


def shard_partition(ds: Dataset, num_clients: int, rng: Optional[np.random.Generator] = None) -> Partition:
    """Equal (up to one) shards; shuffled when rng is given, contiguous otherwise."""
    if len(ds) < num_clients:
        raise DataError(f"{len(ds)} examples cannot cover {num_clients} clients")
    order = rng.permutation(len(ds)) if rng is not None else np.arange(len(ds))
    assignment = np.empty(len(ds), dtype=np.int64)
    for client, shard in enumerate(np.array_split(order, num_clients)):
        assignment[shard] = client
    return Partition(assignment=assignment, num_clients=num_clients)


def rotation_angles(num_clients: int) -> np.ndarray:
    """Client i rotates by i * 360 / N degrees clockwise."""
    return np.arange(num_clients) * (360.0 / num_clients)


def image_side(input_dim: int) -> int:
    side = math.isqrt(input_dim)
    if side * side != input_dim:
        raise DataError(f"feature dimension {input_dim} is not a square image")
    return side


def rotate_image(image: np.ndarray, degrees: float) -> np.ndarray:
    """
    Rotate a square image clockwise about its center.

    Multiples of 90 degrees are exact array rotations; other angles use
    bilinear interpolation with zeros outside the source.
    """
    image = np.asarray(image, dtype=float)
    rest = float(degrees) % 90.0
    if min(rest, 90.0 - rest) < 1e-12:
        turns = int(round(float(degrees) / 90.0))
        return np.rot90(image, k=-turns % 4).copy()

    side = image.shape[0]
    center = (side - 1) / 2.0
    theta = math.radians(degrees)
    cos, sin = math.cos(theta), math.sin(theta)
    rows, cols = np.mgrid[0:side, 0:side].astype(float)
    x_out, y_out = cols - center, rows - center
    x_src = x_out * cos + y_out * sin
    y_src = -x_out * sin + y_out * cos
    return map_coordinates(image, [y_src + center, x_src + center], order=1, mode="constant", cval=0.0)


def rotate_dataset(ds: Dataset, degrees: float) -> Dataset:
    side = image_side(ds.input_dim)
    images = ds.features.reshape(len(ds), side, side)
    rotated = np.stack([rotate_image(img, degrees) for img in images]) if len(ds) else images
    return Dataset(rotated.reshape(len(ds), -1), ds.labels, ds.class_count, ds.split)


def client_datasets(ds: Dataset, partition: Partition) -> List[Dataset]:
    return [ds.subset(partition.indices_of(i)) for i in range(partition.num_clients)]


def rotate_shards(shards: List[Dataset]) -> List[Dataset]:
    return [rotate_dataset(shard, angle) for shard, angle in zip(shards, rotation_angles(len(shards)))]


def rotation_partition(ds: Dataset, num_clients: int, rng: Optional[np.random.Generator] = None) -> List[Dataset]:
    """Feature-skew split: equal shards, shard i rotated by rotation_angles(N)[i]."""
    image_side(ds.input_dim)
    return rotate_shards(client_datasets(ds, shard_partition(ds, num_clients, rng)))


def rotate_test_set(ds: Dataset, num_clients: int) -> Dataset:
    """Global test set under the union of client rotations: example e uses client e mod N's angle."""
    side = image_side(ds.input_dim)
    angles = rotation_angles(num_clients)
    images = ds.features.reshape(len(ds), side, side)
    rotated = np.stack([rotate_image(img, angles[e % num_clients]) for e, img in enumerate(images)])
    return Dataset(rotated.reshape(len(ds), -1), ds.labels, ds.class_count, ds.split)


def label_histograms(partition: Partition, labels: np.ndarray, class_count: int) -> np.ndarray:
    """Per-client label distributions, shape (N, C), rows summing to 1."""
    counts = np.zeros((partition.num_clients, class_count))
    np.add.at(counts, (partition.assignment, np.asarray(labels, dtype=np.int64)), 1.0)
    return counts / counts.sum(axis=1, keepdims=True)


def load_splits(cfg: DataConfig, rng: np.random.Generator) -> DatasetSplits:
    if cfg.dataset == "digits":
        return digits_dataset(rng, cfg.test_fraction)
    if cfg.dataset == "synthetic":
        return synthetic_dataset(
            cfg.synthetic_dim, cfg.synthetic_classes, cfg.synthetic_examples, rng,
            separation=cfg.synthetic_separation, test_fraction=cfg.test_fraction,
        )
    return idx_splits(cfg)


def prepare_federated_data(cfg: DataConfig, num_clients: int, rng: np.random.Generator) -> FederatedData:
    """Load the configured dataset and split it across clients with the configured skew."""
    splits = load_splits(cfg, rng)
    if cfg.partition == "dirichlet":
        partition = dirichlet_partition(splits.train, num_clients, cfg.dirichlet_alpha, rng)
        clients = client_datasets(splits.train, partition)
        test = splits.test
    else:
        partition = shard_partition(splits.train, num_clients, rng)
        clients = rotate_shards(client_datasets(splits.train, partition))
        test = rotate_test_set(splits.test, num_clients)
    sizes = [len(c) for c in clients]
    logger.info(
        f"Prepared {cfg.dataset} data with {cfg.partition} skew: {num_clients} clients, "
        f"{min(sizes)}-{max(sizes)} examples each, {len(test)} test examples"
    )
    return FederatedData(clients=clients, test=test, partition=partition)

