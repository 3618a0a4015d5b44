import time
import tracemalloc

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scatpalm.dataset import (
    DatasetError,
    SplitSpec,
    export_directory,
    load_directory,
    split,
    split_indices,
    synth_generate,
    write_image,
)


def make_tree(root, classes=3, per_class=4, size=128, seed=0):
    r = np.random.default_rng(seed)
    for c in range(classes):
        d = root / f"person{c:02d}"
        d.mkdir(parents=True)
        for s in range(per_class):
            write_image(str(d / f"img{s:02d}.pgm"), r.random((size, size)))


def test_load_counts(tmp_path):
    make_tree(tmp_path)
    ds = load_directory(str(tmp_path), 128)
    assert len(ds) == 12 and ds.n_classes == 3 and ds.samples_per_class == 4
    assert ds.class_names == ["person00", "person01", "person02"]
    assert ds.images.min() >= 0 and ds.images.max() <= 1
    assert list(ds.sample_index[:4]) == [0, 1, 2, 3]


def test_load_pixel_scaling(tmp_path):
    d = tmp_path / "a"
    d.mkdir()
    img = np.zeros((8, 8))
    img[0, 0] = 1.0
    img[0, 1] = 128 / 255
    write_image(str(d / "x.png"), img)
    ds = load_directory(str(tmp_path), 8)
    assert ds.images[0, 0, 0] == 1.0 and ds.images[0, 0, 1] == 128 / 255 and ds.images[0, 1, 1] == 0


def test_load_empty_root(tmp_path):
    with pytest.raises(DatasetError, match="no classes found"):
        load_directory(str(tmp_path), 128)


def test_load_rejects_wrong_size(tmp_path):
    make_tree(tmp_path)
    bad = tmp_path / "person01" / "img99.pgm"
    write_image(str(bad), np.zeros((64, 64)))
    ds = load_directory(str(tmp_path), 128)
    assert len(ds) == 12
    assert [p for p, _ in ds.rejected] == [str(bad)]


def test_load_reports_unreadable_and_empty_class(tmp_path):
    make_tree(tmp_path, classes=2)
    (tmp_path / "person01" / "junk.pgm").write_bytes(b"not an image")
    (tmp_path / "zempty").mkdir()
    with pytest.raises(DatasetError) as err:
        load_directory(str(tmp_path), 128)
    paths = [p for p, _ in err.value.problems]
    assert str(tmp_path / "zempty") in paths
    assert str(tmp_path / "person01" / "junk.pgm") in paths


def test_export_round_trip(tmp_path):
    ds = synth_generate(3, 2, 32, seed=5)
    assert export_directory(ds, str(tmp_path)) == 6
    back = load_directory(str(tmp_path), 32)
    assert np.array_equal(back.labels, ds.labels)
    assert np.max(np.abs(back.images - ds.images)) <= 0.5 / 255 + 1e-12


def test_synth_deterministic():
    a = synth_generate(4, 3, 64, seed=9)
    b = synth_generate(4, 3, 64, seed=9)
    assert a.images.tobytes() == b.images.tobytes()
    c = synth_generate(4, 3, 64, seed=10)
    assert not np.array_equal(a.images, c.images)


def test_synth_shapes_and_range():
    ds = synth_generate(5, 3, 64, seed=1)
    assert ds.images.shape == (15, 64, 64)
    assert ds.images.min() >= 0 and ds.images.max() <= 1
    assert list(np.bincount(ds.labels)) == [3] * 5


def test_synth_signatures_distinct():
    ds = synth_generate(50, 1, 32, seed=0)
    params = [s.params() for s in ds.signatures]
    for i in range(len(params)):
        for j in range(i + 1, len(params)):
            assert params[i].shape != params[j].shape or not np.array_equal(params[i], params[j])


def test_synth_intra_class_variation_is_bounded():
    # same class differs only by shift, gain and noise: undoing the shift leaves small residuals
    ds = synth_generate(1, 6, 64, seed=2, noise=0.0, brightness=0.0)
    base = ds.images[0]
    for img in ds.images[1:]:
        best = min(np.max(np.abs(np.roll(img, (dy, dx), axis=(0, 1)) - base))
                   for dy in range(-6, 7) for dx in range(-6, 7))
        assert best <= 1e-12


def test_synth_rejects():
    with pytest.raises(ValueError):
        synth_generate(0, 3, 64)
    with pytest.raises(ValueError):
        synth_generate(2, 3, 100)


def test_synth_budget():
    tracemalloc.start()
    t0 = time.perf_counter()
    ds = synth_generate(50, 12, 128, seed=0)
    elapsed = time.perf_counter() - t0
    _, peak = tracemalloc.get_traced_memory()
    tracemalloc.stop()
    assert len(ds) == 600
    assert peak < 2 * 1024**3
    assert elapsed < 30


@pytest.mark.slow
def test_within_class_closer_in_feature_space(synth_features):
    X, labels, _ = synth_features
    r = np.random.default_rng(0)
    wins = 0
    trials = 2000
    for _ in range(trials):
        c, o = r.choice(50, size=2, replace=False)
        a, b = r.choice(np.flatnonzero(labels == c), size=2, replace=False)
        x = r.choice(np.flatnonzero(labels == o))
        wins += np.linalg.norm(X[a] - X[b]) < np.linalg.norm(X[a] - X[x])
    assert wins / trials >= 0.95


def test_split_half():
    ds = synth_generate(3, 12, 32, seed=0)
    train, test = split(ds, SplitSpec(6))
    assert list(np.bincount(train.labels)) == [6, 6, 6]
    assert list(np.bincount(test.labels)) == [6, 6, 6]
    assert set(train.sample_index.tolist()) == set(range(6))


def test_split_singleton_test():
    ds = synth_generate(2, 5, 32, seed=0)
    _, test = split(ds, SplitSpec(4, mode="random-k", seed=3))
    assert list(np.bincount(test.labels)) == [1, 1]


def test_split_rejects_bad_k():
    ds = synth_generate(2, 5, 32, seed=0)
    for k in (0, 5):
        with pytest.raises(ValueError):
            split(ds, SplitSpec(k))
    with pytest.raises(ValueError):
        SplitSpec(2, mode="stratified")


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 11), st.integers(0, 10_000), st.sampled_from(["first-k", "random-k"]))
def test_split_partitions(k, seed, mode):
    labels = np.repeat(np.arange(7), 12)
    index = np.tile(np.arange(12), 7)
    train, test = split_indices(labels, index, SplitSpec(k, seed, mode))
    assert set(train) | set(test) == set(range(len(labels)))
    assert not set(train) & set(test)
    assert np.all(np.bincount(labels[train]) == k)
    again = split_indices(labels, index, SplitSpec(k, seed, mode))
    assert np.array_equal(train, again[0]) and np.array_equal(test, again[1])
