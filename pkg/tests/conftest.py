import numpy as np
import pytest

from paramkl import ParameterGrid, SnapshotSet


def random_set(rng, n, m, d_p=1, weights="random"):
    pts = rng.standard_normal((m, d_p))
    w = rng.uniform(0.2, 2.0, m) if weights == "random" else np.ones(m)
    return SnapshotSet(rng.standard_normal((n, m)), ParameterGrid(pts, w))


def unit_set(values):
    values = np.asarray(values, dtype=float)
    m = values.shape[1]
    return SnapshotSet(values, ParameterGrid(np.arange(m, dtype=float)[:, None], np.ones(m)))


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def write_fixture_suite(root, seed=5):
    """Small on-disk inputs for every CLI subcommand; returns a dict of paths."""
    from pathlib import Path

    from paramkl import FeatureMapSamples, FullTensor, SPDFieldSet, io

    root = Path(root)
    rng = np.random.default_rng(seed)
    s = random_set(rng, 12, 8, d_p=2)
    io.save_snapshots(s, root / "snaps")
    t = FullTensor.from_array(rng.standard_normal((4, 5, 3)))
    io.save_tensor(t, root / "tensor")
    a = rng.standard_normal((10, 3, 3))
    mats = a @ np.swapaxes(a, 1, 2) + 0.2 * np.eye(3)
    io.save_spd_field(SPDFieldSet(mats), ParameterGrid.uniform(np.arange(10.0)), root / "spd")
    io.save_features(FeatureMapSamples(s.values.T, np.ones(12)), s.grid, root / "features")
    return {"snaps": root / "snaps", "tensor": root / "tensor", "spd": root / "spd",
            "features": root / "features", "snapset": s, "tensor_obj": t}
