"""On-disk formats.

Every persisted object is a directory (a file pair for densities) holding a
JSON manifest and CSV payloads. CSV is RFC-4180 without header, ``.``
decimal point, LF line endings, 17 significant digits, so float64 payloads
round-trip bit for bit. The manifest records a SHA-256 over the referenced
files, checked on load.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .core import ParameterGrid, SnapshotSet
from .factorization import Factor
from .fields import SPDFieldModel, SPDFieldSet
from .kernels import FeatureMapSamples
from .spectral import ReducedModel, SpectralData
from .stationary import SpectralDensity
from .tensor import FullTensor, TTRepresentation

SCHEMA_VERSION = "1"
MANIFEST_NAMES = {
    "snapshots": "manifest.json",
    "spd_field": "manifest.json",
    "features": "manifest.json",
    "arrays": "manifest.json",
    "model": "model.json",
    "spd_model": "model.json",
    "factor": "factor.json",
    "tt": "tt.json",
    "tensor": "tensor.json",
}


class DataError(ValueError):
    """Base class for problems with files on disk."""


class MissingManifestError(DataError):
    pass


class SchemaError(DataError):
    pass


class HashMismatchError(DataError):
    pass


class MalformedCSVError(DataError):
    pass


# --- low level -------------------------------------------------------------------

def write_csv(path, a):
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise ValueError("CSV payloads are 2-D")
    lines = [",".join(f"{x:.17g}" for x in row) for row in a]
    Path(path).write_bytes(("\n".join(lines) + ("\n" if lines else "")).encode("ascii"))


def read_csv(path, shape=None):
    path = Path(path)
    if not path.exists():
        raise DataError(f"missing payload file {path}")
    text = path.read_bytes().decode("ascii")
    rows = [line for line in text.split("\n") if line != ""]
    try:
        data = [[float(x) for x in line.split(",")] for line in rows]
    except ValueError as exc:
        raise MalformedCSVError(f"{path.name}: {exc}") from None
    widths = {len(r) for r in data}
    if len(widths) > 1:
        raise MalformedCSVError(f"{path.name}: ragged rows (widths {sorted(widths)})")
    a = np.array(data, dtype=float).reshape(len(data), widths.pop() if widths else 0)
    if shape is not None and a.shape != tuple(shape):
        if not (a.size == 0 and np.prod(shape) == 0):
            raise MalformedCSVError(f"{path.name}: expected shape {tuple(shape)}, found {a.shape}")
        a = a.reshape(shape)
    return a


def write_f64(path, a):
    Path(path).write_bytes(np.asarray(a, dtype="<f8").tobytes(order="F"))


def read_f64(path, shape):
    raw = Path(path).read_bytes()
    if len(raw) != 8 * int(np.prod(shape)):
        raise MalformedCSVError(f"{Path(path).name}: expected {np.prod(shape)} float64 values")
    return np.frombuffer(raw, dtype="<f8").reshape(shape, order="F").astype(float)


def files_hash(directory, names):
    h = hashlib.sha256()
    for name in sorted(names):
        h.update(name.encode() + b"\0")
        h.update((Path(directory) / name).read_bytes())
    return h.hexdigest()


def _write_manifest(directory, kind, manifest, files):
    directory = Path(directory)
    manifest = dict(manifest)
    manifest["schema_version"] = SCHEMA_VERSION
    manifest["kind"] = kind
    manifest["files"] = sorted(files)
    manifest["hash"] = files_hash(directory, files)
    name = MANIFEST_NAMES[kind]
    (directory / name).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def read_manifest(directory, kind=None):
    directory = Path(directory)
    if directory.is_file():
        return _read_manifest_file(directory, kind)
    candidates = [MANIFEST_NAMES[kind]] if kind else sorted(set(MANIFEST_NAMES.values()))
    for name in candidates:
        p = directory / name
        if p.exists():
            return _read_manifest_file(p, kind)
    raise MissingManifestError(f"no manifest found in {directory}")


def _read_manifest_file(path, kind):
    try:
        m = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from None
    if m.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(f"{path}: unsupported schema_version {m.get('schema_version')!r}")
    if kind is not None and m.get("kind") != kind:
        raise SchemaError(f"{path}: expected kind {kind!r}, found {m.get('kind')!r}")
    directory = Path(path).parent
    for f in m.get("files", []):
        if not (directory / f).exists():
            raise DataError(f"{path}: referenced file {f} is missing")
    digest = files_hash(directory, m.get("files", []))
    if digest != m.get("hash"):
        raise HashMismatchError(f"{path}: content hash mismatch")
    return m


def _prep(directory):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def _save_grid(d, grid):
    write_csv(d / "points.csv", grid.points)
    write_csv(d / "weights.csv", grid.weights)
    return ["points.csv", "weights.csv"]


def _load_grid(d, m, points_file="points.csv", weights_file="weights.csv", dim=None):
    pts = read_csv(d / points_file)
    if pts.shape[0] != m or (dim is not None and pts.shape[1] != dim):
        raise MalformedCSVError(f"{points_file}: expected {m} x {dim} points, found {pts.shape}")
    w = read_csv(d / weights_file, (m, 1))
    return ParameterGrid(pts, w[:, 0])


# --- snapshots ---------------------------------------------------------------------

def save_snapshots(s: SnapshotSet, directory, layout="column-major-csv"):
    d = _prep(directory)
    n, m = s.values.shape
    files = _save_grid(d, s.grid)
    if layout == "column-major-csv":
        values_file = "values.csv"
        write_csv(d / values_file, s.values)
    elif layout == "raw-f64-le":
        values_file = "values.f64"
        write_f64(d / values_file, s.values)
    else:
        raise ValueError(f"unknown layout {layout!r}")
    files.append(values_file)
    manifest = {"name": s.name, "N": n, "M": m, "d_p": s.grid.dim,
                "points_file": "points.csv", "weights_file": "weights.csv",
                "values_file": values_file, "layout": layout}
    if s.labels is not None:
        (d / "labels.txt").write_text("\n".join(s.labels) + "\n")
        files.append("labels.txt")
        manifest["labels_file"] = "labels.txt"
    _write_manifest(d, "snapshots", manifest, files)
    return d


def load_snapshots(directory) -> SnapshotSet:
    d = Path(directory)
    m = read_manifest(d, "snapshots")
    n_rows, n_cols = m["N"], m["M"]
    weights_file = m.get("weights_file")
    if weights_file:
        grid = _load_grid(d, n_cols, m["points_file"], weights_file, m.get("d_p"))
    else:
        grid = ParameterGrid.uniform(read_csv(d / m["points_file"]))
    layout = m.get("layout", "column-major-csv")
    if layout == "column-major-csv":
        values = read_csv(d / m["values_file"], (n_rows, n_cols))
    elif layout == "raw-f64-le":
        values = read_f64(d / m["values_file"], (n_rows, n_cols))
    else:
        raise SchemaError(f"unknown layout {layout!r}")
    labels = None
    if m.get("labels_file"):
        labels = (d / m["labels_file"]).read_text().splitlines()
    return SnapshotSet(values, grid, labels, m.get("name", "snapshots"))


# --- reduced models ------------------------------------------------------------------

def _save_reduced_payload(d, rm: ReducedModel):
    sd = rm.spectral
    write_csv(d / "eigenvalues.csv", sd.eigenvalues.reshape(-1, 1))
    write_csv(d / "spatial_modes.csv", sd.spatial_modes)
    write_csv(d / "parameter_modes.csv", sd.parameter_modes)
    files = ["eigenvalues.csv", "spatial_modes.csv", "parameter_modes.csv"] + _save_grid(d, sd.grid)
    meta = {"name": rm.source_name, "N": sd.spatial_modes.shape[0], "M": sd.parameter_modes.shape[0],
            "n": rm.truncation_rank, "d_p": sd.grid.dim, "tail_energy": rm.tail_energy,
            "source_hash": rm.source_hash, "clamped": rm.clamped}
    return files, meta


def _load_reduced_payload(d, m) -> ReducedModel:
    n_rows, n_cols, n = m["N"], m["M"], m["n"]
    grid = _load_grid(d, n_cols, dim=m.get("d_p"))
    lam = read_csv(d / "eigenvalues.csv", (n, 1))[:, 0]
    v = read_csv(d / "spatial_modes.csv", (n_rows, n))
    s = read_csv(d / "parameter_modes.csv", (n_cols, n))
    return ReducedModel(SpectralData(lam, v, s, grid), n, float(m["tail_energy"]),
                        m.get("name", ""), m.get("source_hash", ""), bool(m.get("clamped", False)))


def save_model(rm, directory):
    """Persist a ReducedModel (a bare SpectralData is saved untruncated)."""
    if isinstance(rm, SpectralData):
        rm = ReducedModel.full(rm)
    d = _prep(directory)
    files, meta = _save_reduced_payload(d, rm)
    _write_manifest(d, "model", meta, files)
    return d


def load_model(directory) -> ReducedModel:
    d = Path(directory)
    return _load_reduced_payload(d, read_manifest(d, "model"))


# --- factors -------------------------------------------------------------------------

def save_factor(b: Factor, directory, correlation_hash=""):
    d = _prep(directory)
    write_csv(d / "matrix.csv", b.matrix)
    if not correlation_hash:
        correlation_hash = hashlib.sha256(
            np.ascontiguousarray(b.correlation, dtype="<f8").tobytes()).hexdigest()
    meta = {"factor_kind": b.kind.value, "dims": list(b.matrix.shape),
            "correlation_hash": correlation_hash}
    _write_manifest(d, "factor", meta, ["matrix.csv"])
    return d


def load_factor(directory) -> Factor:
    d = Path(directory)
    m = read_manifest(d, "factor")
    return Factor(read_csv(d / "matrix.csv", tuple(m["dims"])), m["factor_kind"])


# --- tensors -------------------------------------------------------------------------

def save_tensor(t: FullTensor, directory):
    d = _prep(directory)
    write_csv(d / "data.csv", t.data.reshape(t.dims[0], -1))
    _write_manifest(d, "tensor", {"dims": list(t.dims), "data_file": "data.csv",
                                  "layout": "row-major"}, ["data.csv"])
    return d


def load_tensor(directory) -> FullTensor:
    d = Path(directory)
    m = read_manifest(d, "tensor")
    dims = tuple(m["dims"])
    data = read_csv(d / m["data_file"], (dims[0], int(np.prod(dims[1:]))))
    return FullTensor(dims, data.reshape(-1))


def save_tt(tt: TTRepresentation, directory):
    d = _prep(directory)
    files = []
    for k, c in enumerate(tt.cores):
        name = f"core_{k}.csv"
        write_csv(d / name, c.reshape(-1, 1))
        files.append(name)
    meta = {"dims": list(tt.mode_dims), "ranks": list(tt.ranks),
            "core_shapes": [list(c.shape) for c in tt.cores],
            "discarded": [s.tolist() for s in tt.discarded]}
    _write_manifest(d, "tt", meta, files)
    return d


def load_tt(directory) -> TTRepresentation:
    d = Path(directory)
    m = read_manifest(d, "tt")
    cores = []
    for k, shape in enumerate(m["core_shapes"]):
        cores.append(read_csv(d / f"core_{k}.csv", (int(np.prod(shape)), 1)).reshape(shape))
    return TTRepresentation(tuple(cores), tuple(np.array(s, dtype=float) for s in m["discarded"]))


# --- stationary densities -------------------------------------------------------------

def density_manifest_path(path):
    return Path(path).with_suffix(".json")


def save_density(dens: SpectralDensity, path):
    """Write ``path`` (CSV rows ``zeta_k, khat_k``) and a JSON sidecar next to it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_csv(path, np.column_stack([dens.frequencies, dens.values]))
    meta = {"M": dens.size, "length": dens.length, "clamped": dens.clamped,
            "density_file": path.name}
    directory = path.parent
    manifest = dict(meta, schema_version=SCHEMA_VERSION, kind="density", files=[path.name],
                    hash=files_hash(directory, [path.name]))
    density_manifest_path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def load_density(path) -> SpectralDensity:
    path = Path(path)
    side = density_manifest_path(path)
    if not side.exists():
        raise MissingManifestError(f"no density manifest {side.name} next to {path.name}")
    m = _read_manifest_file(side, "density")
    table = read_csv(path, (m["M"], 2))
    return SpectralDensity(table[:, 1], float(m["length"]), float(m.get("clamped", 0.0)))


# --- SPD fields -----------------------------------------------------------------------

def save_spd_field(f: SPDFieldSet, grid: ParameterGrid, directory):
    d = _prep(directory)
    m, n = f.matrices.shape[:2]
    write_csv(d / "matrices.csv", f.matrices.reshape(m, n * n))
    files = ["matrices.csv"] + _save_grid(d, grid)
    meta = {"M": m, "n": n, "d_p": grid.dim, "layout": "single-csv",
            "matrices_file": "matrices.csv"}
    _write_manifest(d, "spd_field", meta, files)
    return d


def load_spd_field(directory):
    """Returns ``(SPDFieldSet, ParameterGrid)``."""
    d = Path(directory)
    m = read_manifest(d, "spd_field")
    count, n = m["M"], m["n"]
    layout = m.get("layout", "single-csv")
    if layout == "single-csv":
        mats = read_csv(d / m["matrices_file"], (count, n * n)).reshape(count, n, n)
    elif layout == "per-sample":
        mats = np.array([read_csv(d / name, (n, n)) for name in m["sample_files"]])
        if mats.shape[0] != count:
            raise SchemaError(f"expected {count} sample files, found {mats.shape[0]}")
    else:
        raise SchemaError(f"unknown SPD layout {layout!r}")
    grid = _load_grid(d, count, dim=m.get("d_p"))
    return SPDFieldSet(mats), grid


def save_spd_model(model: SPDFieldModel, directory):
    d = _prep(directory)
    files, meta = _save_reduced_payload(d, model.reduced)
    write_csv(d / "mean.csv", model.mean.reshape(-1, 1))
    files.append("mean.csv")
    meta.update({"matrix_size": model.n, "centered": model.centered,
                 "packing": "upper-triangle-row-major-sqrt2-offdiag"})
    _write_manifest(d, "spd_model", meta, files)
    return d


def load_spd_model(directory) -> SPDFieldModel:
    d = Path(directory)
    m = read_manifest(d, "spd_model")
    rm = _load_reduced_payload(d, m)
    mean = read_csv(d / "mean.csv", (m["N"], 1))[:, 0]
    return SPDFieldModel(rm, mean, int(m["matrix_size"]), bool(m["centered"]))


# --- feature samples and generic arrays -------------------------------------------------

def save_features(f: FeatureMapSamples, grid: ParameterGrid, directory):
    d = _prep(directory)
    write_csv(d / "g.csv", f.g_matrix)
    write_csv(d / "x_weights.csv", f.x_weights)
    files = ["g.csv", "x_weights.csv"] + _save_grid(d, grid)
    meta = {"M": f.g_matrix.shape[0], "L": f.g_matrix.shape[1], "d_p": grid.dim,
            "g_file": "g.csv", "x_weights_file": "x_weights.csv",
            "points_file": "points.csv", "weights_file": "weights.csv"}
    _write_manifest(d, "features", meta, files)
    return d


def load_features(directory):
    """Returns ``(FeatureMapSamples, ParameterGrid)``."""
    d = Path(directory)
    m = read_manifest(d, "features")
    g = read_csv(d / m["g_file"], (m["M"], m["L"]))
    nu = read_csv(d / m["x_weights_file"], (m["L"], 1))[:, 0]
    grid = _load_grid(d, m["M"], m["points_file"], m["weights_file"], m.get("d_p"))
    return FeatureMapSamples(g, nu), grid


def save_arrays(arrays: dict, directory, **meta):
    """Named 2-D payloads (eigenvalue tables, mode matrices) with a manifest."""
    d = _prep(directory)
    files, shapes = [], {}
    for key in sorted(arrays):
        a = np.asarray(arrays[key], dtype=float)
        a = a.reshape(-1, 1) if a.ndim == 1 else a
        write_csv(d / f"{key}.csv", a)
        files.append(f"{key}.csv")
        shapes[key] = list(a.shape)
    _write_manifest(d, "arrays", dict(meta, shapes=shapes), files)
    return d


def load_arrays(directory) -> dict:
    d = Path(directory)
    m = read_manifest(d, "arrays")
    return {key: read_csv(d / f"{key}.csv", tuple(shape)) for key, shape in m["shapes"].items()}


LOADERS = {
    "snapshots": load_snapshots, "model": load_model, "factor": load_factor,
    "tensor": load_tensor, "tt": load_tt, "spd_field": load_spd_field,
    "spd_model": load_spd_model, "features": load_features, "arrays": load_arrays,
}


def load(path):
    """Load any persisted object, dispatching on the manifest kind."""
    path = Path(path)
    if path.is_file() or path.suffix == ".csv":
        return load_density(path)
    if not path.is_dir():
        raise MissingManifestError(f"{path} does not exist")
    return LOADERS[read_manifest(path)["kind"]](path)
