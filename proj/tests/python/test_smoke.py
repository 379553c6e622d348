"""End-to-end checks of the Python module against known values."""

import math

import numpy as np
import pytest

import mdsgnn


def ring_dataset():
    """Three well-separated feature clusters on a 12-node ring."""
    n, f, c = 12, 4, 3
    edges = [(i, i + 1) for i in range(n - 1)] + [(0, n - 1)]
    feats = np.zeros((n, f))
    labels = []
    for i in range(n):
        k = i // 4
        feats[i, k] = 1.0
        feats[i, 3] = 0.1 * (i % 4)
        labels.append(k)
    train = [0, 4, 8]
    val = [1, 5, 9]
    test = [2, 3, 6, 7, 10, 11]
    return mdsgnn.make_dataset(n, f, c, edges, feats, labels, train, val, test)


FAST = "epochs=6\nhidden=8\nknn_k=3\nproj_dim=8\n"


def test_dataset_roundtrip_properties():
    ds = ring_dataset()
    assert (ds.n, ds.f, ds.c) == (12, 4, 3)
    assert len(ds.edges) == 12
    assert ds.labels[:4] == [0, 0, 0, 0]
    assert ds.known == [1] * 12
    assert np.asarray(ds.features).shape == (12, 4)
    assert "Dataset(n=12" in repr(ds)


def test_dataset_rejects_inconsistent_inputs():
    with pytest.raises(ValueError):
        mdsgnn.make_dataset(2, 1, 1, [(0, 0)], np.zeros((2, 1)), [0, 0], [0], [], [])


def test_corrupt_counts_and_determinism():
    ds = ring_dataset()
    a = mdsgnn.corrupt(ds, 0.5, 0.25, seed=3)
    b = mdsgnn.corrupt(ds, 0.5, 0.25, seed=3)
    assert sum(a.known) == 12 - int(0.5 * 12)
    assert len(a.edges) == 12 - int(0.25 * 12)
    assert a.known == b.known and a.edges == b.edges
    masked = np.asarray(a.features)
    for i, k in enumerate(a.known):
        if not k:
            assert not masked[i].any()


def test_knn_edges_symmetric_chain():
    x = np.array([[1.0, 0.0], [1.0, 0.2], [0.0, 1.0]])
    edges = mdsgnn.knn_edges(x, 1)
    assert (0, 1) in edges
    assert all(u < v for u, v in edges)


def test_propagate_hand_value():
    x = np.array([[1.0], [0.0]])
    out = mdsgnn.propagate(x, x, k=1, alpha=0.5, steps=2)
    assert out == pytest.approx(np.array([[0.75], [0.25]]), abs=1e-12)


def test_ntxent_closed_form():
    for n in (2, 3, 10):
        z = np.tile([0.3, -1.2, 2.0], (n, 1))
        val = mdsgnn.ntxent_value(z, z, tau=0.2)
        assert val == pytest.approx(math.log(n - 1), abs=1e-9)


def test_train_returns_losses_and_is_deterministic():
    ds = ring_dataset()
    a = mdsgnn.train(ds, FAST)
    b = mdsgnn.train(ds, FAST)
    assert set(a) == {"best_epoch", "val_acc", "test_acc", "losses"}
    assert len(a["losses"]["total"]) == 6
    assert a == b
    assert 0.0 <= a["test_acc"] <= 1.0
    baseline = mdsgnn.train(ds, FAST, method="gcn")
    assert 0.0 <= baseline["test_acc"] <= 1.0


def test_run_seeds_summary():
    ds = ring_dataset()
    out = mdsgnn.run_seeds(ds, FAST + "feature_missing=0.3\n", n_seeds=2)
    assert len(out["accs"]) == 2
    assert out["mean"] == pytest.approx(sum(out["accs"]) / 2)


def test_config_errors_surface_as_value_errors():
    ds = ring_dataset()
    with pytest.raises(ValueError):
        mdsgnn.train(ds, "nonsense=1\n")
    with pytest.raises(ValueError):
        mdsgnn.train(ds, "lr=-1\n")


def test_default_config_renders_every_knob():
    text = mdsgnn.default_config()
    assert "lr=0.01" in text
    assert "recon_loss=bce" in text
