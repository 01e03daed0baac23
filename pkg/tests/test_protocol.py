import numpy as np
import pytest

import gcndiag.baselines
from gcndiag import (ExperimentResult, InputError, ablate_features,
                     apply_masking, build_graph, carve_validation, derive_seed,
                     generate_features, generate_graph, make_split,
                     normalized_adjacency, run_grid, stratified_split)
from gcndiag.synth import SyntheticSpec


def test_derive_seed_frozen_values():
    # frozen reference values; a change here silently reshuffles every split
    assert derive_seed(0, "split") == 6394492921669977765
    assert derive_seed(0, "mask") == 6916287089139834623
    assert derive_seed(7, "gcn", 50, "original") == 4844291297921623869


def test_derive_seed_properties():
    a = derive_seed(0, "split")
    assert a == derive_seed(0, "split")
    assert a != derive_seed(1, "split")
    assert a != derive_seed(0, "mask")
    assert derive_seed(3, "x", 1) != derive_seed(3, "x", 2)
    assert 0 <= a < 2**63


def labels(counts):
    return np.concatenate([np.full(c, i) for i, c in enumerate(counts)])


def test_stratified_split_counts():
    y = labels([10, 7, 3])
    train, test = stratified_split(y, 0.8, seed=0)
    assert sorted(np.concatenate([train, test])) == list(range(20))
    assert np.intersect1d(train, test).size == 0
    # per class: floor(n_c * 0.8 + 0.5) = 8, 6, 2
    assert list(np.bincount(y[train], minlength=3)) == [8, 6, 2]
    assert list(np.bincount(y[test], minlength=3)) == [2, 1, 1]
    assert list(train) == sorted(train)


def test_stratified_split_keeps_both_sides_nonempty():
    y = labels([2, 2])
    train, test = stratified_split(y, 0.9, seed=1)
    assert np.bincount(y[train], minlength=2).min() >= 1
    assert np.bincount(y[test], minlength=2).min() >= 1


def test_stratified_split_errors():
    with pytest.raises(InputError):
        stratified_split(labels([5, 1]), 0.8, seed=0)
    with pytest.raises(InputError):
        stratified_split(labels([5, 5]), 1.0, seed=0)


def test_masking_counts_and_floor():
    y = labels([20, 10, 3])
    train = np.arange(33)
    vis = apply_masking(y, train, 0.9, seed=0)
    # keep max(1, floor(0.1 * n_c + 0.5)) = 2, 1, 1
    assert list(np.bincount(y[vis], minlength=3)) == [2, 1, 1]
    vis50 = apply_masking(y, train, 0.5, seed=0)
    assert list(np.bincount(y[vis50], minlength=3)) == [10, 5, 2]


def test_masking_is_nested():
    rng = np.random.default_rng(16)
    y = rng.integers(0, 4, size=200)
    train = np.sort(rng.choice(200, size=160, replace=False))
    previous = set(train)
    for rate in (0.0, 0.3, 0.5, 0.7, 0.9):
        vis = set(apply_masking(y, train, rate, seed=5))
        assert vis <= previous
        previous = vis


def test_masking_rejects_bad_rate():
    y = labels([4, 4])
    with pytest.raises(InputError):
        apply_masking(y, np.arange(8), 1.0, seed=0)
    with pytest.raises(InputError):
        apply_masking(y, np.arange(8), -0.1, seed=0)


def test_carve_validation_counts():
    y = labels([10, 5, 1])
    vis = np.arange(16)
    sub, val = carve_validation(y, vis, 0.2, seed=0)
    assert sorted(np.concatenate([sub, val])) == list(range(16))
    # n_val = min(n_c - 1, max(1, floor(n_c/5 + 0.5))) = 2, 1, 0
    assert list(np.bincount(y[val], minlength=3)) == [2, 1, 0]
    assert 15 in sub  # the lone class-2 node stays trainable


def test_make_split_structure():
    y = labels([40, 30, 30])
    split = make_split(y, 0.5, seed=2, num_classes=3)
    assert np.intersect1d(split.train_idx, split.test_idx).size == 0
    assert set(split.visible_idx) <= set(split.train_idx)
    assert set(split.subtrain_idx) | set(split.val_idx) == set(split.visible_idx)
    assert np.intersect1d(split.subtrain_idx, split.val_idx).size == 0
    assert split.masking_rate == 0.5
    # masked-but-true-labeled train nodes stay out of every labeled subset
    hidden = set(split.train_idx) - set(split.visible_idx)
    assert hidden and not (hidden & set(split.subtrain_idx))


def test_make_split_nesting_across_rates():
    y = labels([50, 40, 30])
    v0 = set(make_split(y, 0.0, seed=3).visible_idx)
    v5 = set(make_split(y, 0.5, seed=3).visible_idx)
    v9 = set(make_split(y, 0.9, seed=3).visible_idx)
    assert v9 <= v5 <= v0


def test_make_split_too_thin():
    y = labels([2, 2])
    with pytest.raises(InputError):
        make_split(y, 0.9, seed=0, num_classes=2)


def test_ablate_features():
    x = np.full((400, 30), 7.0)
    r1 = ablate_features(x, seed=1)
    r2 = ablate_features(x, seed=1)
    r3 = ablate_features(x, seed=2)
    assert r1.shape == x.shape
    assert np.array_equal(r1, r2)
    assert not np.array_equal(r1, r3)
    assert abs(r1.mean()) < 0.05
    assert abs(r1.std() - 1.0) < 0.05


def small_dataset(seed=20):
    spec = SyntheticSpec(n=150, num_classes=3, target_homophily=0.85,
                         avg_degree=6.0, dim=6, signal=1.5, seed=seed)
    g, y = generate_graph(spec)
    x = generate_features(y, 6, 1.5, seed=seed + 1)
    return normalized_adjacency(g), x, y


def test_run_grid_complete_and_deterministic(monkeypatch):
    a, x, y = small_dataset()
    monkeypatch.setenv("DIAGNOSE_THREADS", "1")
    serial = run_grid(a, x, y, base_seed=4)
    monkeypatch.setenv("DIAGNOSE_THREADS", "4")
    parallel = run_grid(a, x, y, base_seed=4)

    assert len(serial.cells) == 18
    for model in ("gcn", "logreg", "svm"):
        for pct in (0, 50, 90):
            for mode in ("original", "random"):
                assert f"{model}:{pct}:{mode}" in serial.cells
    assert serial.to_dict() == parallel.to_dict()
    assert all(not c.error for c in serial.cells.values())


def test_run_grid_records_cell_failure(monkeypatch):
    a, x, y = small_dataset()

    def boom(*args, **kwargs):
        raise RuntimeError("synthetic failure")

    monkeypatch.setattr(gcndiag.baselines, "train_logreg", boom)
    monkeypatch.setenv("DIAGNOSE_THREADS", "2")
    result = run_grid(a, x, y, base_seed=4)
    lr_cells = [c for k, c in result.cells.items() if k.startswith("logreg")]
    assert lr_cells and all(c.scores is None for c in lr_cells)
    assert all("synthetic failure" in c.error for c in lr_cells)
    gcn_cells = [c for k, c in result.cells.items() if k.startswith("gcn")]
    assert all(c.scores is not None for c in gcn_cells)
    with pytest.raises(InputError):
        result.delta(0.0)


def test_run_grid_subset():
    a, x, y = small_dataset()
    result = run_grid(a, x, y, base_seed=1, models=("logreg",),
                      masking_rates=(0.0,), feature_modes=("original",))
    assert list(result.cells) == ["logreg:0:original"]
    with pytest.raises(KeyError):
        result.cell("gcn", 0.0)


def test_experiment_result_round_trip():
    a, x, y = small_dataset()
    result = run_grid(a, x, y, base_seed=6, models=("gcn", "logreg"),
                      feature_modes=("original",))
    again = ExperimentResult.from_dict(result.to_dict())
    assert again.to_dict() == result.to_dict()
    assert again.delta(0.9) == result.delta(0.9)


def test_random_features_shared_across_cells():
    a, x, y = small_dataset()
    result = run_grid(a, x, y, base_seed=2, models=("logreg",),
                      masking_rates=(0.0, 0.5), feature_modes=("random",))
    # same noise draw at both rates: identical split at rate 0 vs 0.5 would
    # differ, but the feature fingerprint must match; proxy through scores
    # being reproducible against a manual rerun of the same cell
    manual = run_grid(a, x, y, base_seed=2, models=("logreg",),
                      masking_rates=(0.5,), feature_modes=("random",))
    assert (result.cell("logreg", 0.5, "random").scores.to_dict()
            == manual.cell("logreg", 0.5, "random").scores.to_dict())
