"""Shared fixtures: synthetic corpora at two sizes, plus on-disk layouts.

The full pool (70,000 examples, 7,000 per class) feeds the acceptance
suites; the small pool (7,000 examples) keeps the per-module experiment and
CLI tests fast.  Both are built once per session.  The on-disk fixtures
write the corpora in the standard four-file layout so the CLI paths get
exercised against real files, including the published byte lengths for the
60,000/10,000 file split.
"""

import struct

import pytest

import corpus
from rwwce import load_idx

IMAGE_BYTES = 28 * 28


@pytest.fixture(scope="session")
def full_bytes():
    return corpus.synthetic_idx_pair(7000)


@pytest.fixture(scope="session")
def full_pool(full_bytes):
    return load_idx(*full_bytes)


@pytest.fixture(scope="session")
def small_bytes():
    return corpus.synthetic_idx_pair(700, seed=990)


@pytest.fixture(scope="session")
def small_pool(small_bytes):
    return load_idx(*small_bytes)


def split_idx_pair(images_bytes, labels_bytes, n_first):
    """Split one IDX pair into two, the first holding n_first examples."""
    count = struct.unpack(">I", images_bytes[4:8])[0]
    assert 0 < n_first < count
    rows, cols = struct.unpack(">II", images_bytes[8:16])
    pixels = images_bytes[16:]
    labels = labels_bytes[8:]
    cut = n_first * IMAGE_BYTES

    def images_file(n, payload):
        return struct.pack(">IIII", 0x00000803, n, rows, cols) + payload

    def labels_file(n, payload):
        return struct.pack(">II", 0x00000801, n) + payload

    first = (images_file(n_first, pixels[:cut]), labels_file(n_first, labels[:n_first]))
    rest = (
        images_file(count - n_first, pixels[cut:]),
        labels_file(count - n_first, labels[n_first:]),
    )
    return first, rest


def write_standard_layout(directory, images_bytes, labels_bytes, n_train):
    """Write a corpus as the four standard files under directory."""
    (train, t10k) = split_idx_pair(images_bytes, labels_bytes, n_train)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "train-images-idx3-ubyte").write_bytes(train[0])
    (directory / "train-labels-idx1-ubyte").write_bytes(train[1])
    (directory / "t10k-images-idx3-ubyte").write_bytes(t10k[0])
    (directory / "t10k-labels-idx1-ubyte").write_bytes(t10k[1])
    return directory


@pytest.fixture(scope="session")
def mnist_dir(tmp_path_factory, full_bytes):
    """70,000 examples split 60,000/10,000: matches the published byte lengths."""
    directory = tmp_path_factory.mktemp("mnist-layout")
    return write_standard_layout(directory, *full_bytes, n_train=60_000)


@pytest.fixture(scope="session")
def small_dir(tmp_path_factory, small_bytes):
    """7,000 examples split 6,000/1,000: fast CLI runs, non-standard lengths."""
    directory = tmp_path_factory.mktemp("small-layout")
    return write_standard_layout(directory, *small_bytes, n_train=6_000)
