"""End-to-end orchestration: configs, seeded datasets, training runs, sweeps.

A single ExperimentConfig describes one experiment cell: the interface
model, the PDE and its discretization, the evaluation points, the sample
counts and the training protocol.  Datasets are generated with a
counter-based RNG so that sample n is reproducible independently of the
worker count, and persisted as CSV matrices plus a JSON metadata sidecar
keyed by a hash of the data-affecting part of the config.
"""

import dataclasses
import hashlib
import itertools
import json
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import plotting, surrogate
from .geometry import DomainMap, InterfaceModel, max_shape_variation
from .mesh import build_disk_mesh, build_square_mesh
from .pde import (
    EllipticProblem,
    HelmholtzProblem,
    SolverError,
    circle_points,
    evaluate_qoi,
)

# reference outer wavenumber (wavelength 0.03)
K0 = 200.0 * np.pi / 3.0

# offset added to the sample-stream key to get the disjoint test stream
TEST_STREAM = 2**64


class PipelineError(RuntimeError):
    pass


@dataclasses.dataclass
class ExperimentConfig:
    """One experiment cell; None fields resolve to problem-specific defaults."""

    problem: str = "elliptic"
    d: int = 8
    p: float = 3.0
    c: float = 0.08
    r0: float = None
    r_inner: float = None
    r_outer: float = None
    alpha_i: float = 10.0
    kappa_o: float = None
    kappa_i: float = None
    R: float = 0.055
    pml_thickness: float = 0.02
    pml_damping: float = 0.5
    direction: tuple = (1.0, 0.0)
    n_points: int = 1
    point_radius: float = None
    h_interface: float = None
    h_far: float = None
    cg_tol: float = 1e-10
    n_train: int = 2048
    n_test: int = 512
    epochs: int = 5000
    restarts: int = 3
    lr: float = 2e-4
    beta: float = 0.2
    depth: int = 10
    seed: int = 0
    out_dir: str = "runs"

    def __post_init__(self):
        if self.problem not in ("elliptic", "helmholtz"):
            raise PipelineError(f"unknown problem kind {self.problem!r}")
        self.direction = tuple(float(v) for v in self.direction)
        if self.n_points < 1:
            raise PipelineError("n_points must be >= 1")
        if not (0 <= self.seed < 2**63):
            raise PipelineError("seed must be in [0, 2**63)")
        if self.problem == "helmholtz":
            ko, ki = self.wavenumbers()
            if ki**2 / ko**2 > self.alpha_i + 1e-12:
                raise PipelineError(
                    f"trapping configuration: (kappa_i/kappa_o)^2 = "
                    f"{ki**2 / ko**2:.4g} exceeds alpha_i = {self.alpha_i:.4g}"
                )

    # -- resolved parameters ---------------------------------------------

    def nominal_radius(self):
        if self.r0 is not None:
            return float(self.r0)
        return 0.5 if self.problem == "elliptic" else 0.01

    def mollifier_radii(self):
        r0 = self.nominal_radius()
        inner = r0 / 4 if self.r_inner is None else float(self.r_inner)
        if self.r_outer is not None:
            outer = float(self.r_outer)
        else:
            outer = 1.75 * r0 if self.problem == "elliptic" else self.R
        return inner, outer

    def wavenumbers(self):
        ko = K0 if self.kappa_o is None else float(self.kappa_o)
        ki = 0.8 * ko if self.kappa_i is None else float(self.kappa_i)
        return ko, ki

    def mesh_sizes(self):
        if self.problem == "elliptic":
            r0 = self.nominal_radius()
            h_int = 0.06 * r0 if self.h_interface is None else self.h_interface
            h_far = 0.16 * r0 if self.h_far is None else self.h_far
        else:
            # hold elements per wavelength fixed under wavenumber sweeps
            wavelength = 2 * np.pi / self.wavenumbers()[0]
            h_int = wavelength / 12 if self.h_interface is None else self.h_interface
            h_far = wavelength / 12 if self.h_far is None else self.h_far
        return float(h_int), float(h_far)

    def eval_points(self):
        radius = self.nominal_radius() if self.point_radius is None else self.point_radius
        return circle_points(radius, self.n_points)

    def qoi_kind(self):
        return "value" if self.problem == "elliptic" else "amplitude"

    def widths(self):
        return surrogate.default_widths(self.d, self.n_points, depth=self.depth)

    # -- builders ----------------------------------------------------------

    def domain_map(self):
        model = InterfaceModel(self.nominal_radius(), self.d, self.p, self.c)
        inner, outer = self.mollifier_radii()
        return DomainMap(model, inner, outer)

    def build_mesh(self):
        r0 = self.nominal_radius()
        inner, outer = self.mollifier_radii()
        h_int, h_far = self.mesh_sizes()
        if self.problem == "elliptic":
            return build_square_mesh(r0, inner, outer, h_int, h_far)
        return build_disk_mesh(r0, inner, self.R, self.pml_thickness, h_int, h_far)

    def make_problem(self, mesh, dm):
        if self.problem == "elliptic":
            return EllipticProblem(mesh, dm, self.alpha_i, cg_tol=self.cg_tol)
        ko, ki = self.wavenumbers()
        return HelmholtzProblem(mesh, dm, self.alpha_i, ki, ko,
                                direction=self.direction,
                                pml_damping=self.pml_damping)

    # -- identity ----------------------------------------------------------

    def data_signature(self):
        """Resolved values of every field that affects dataset content."""
        inner, outer = self.mollifier_radii()
        h_int, h_far = self.mesh_sizes()
        radius = self.nominal_radius() if self.point_radius is None else self.point_radius
        sig = {
            "problem": self.problem,
            "d": self.d,
            "p": self.p,
            "c": self.c,
            "r0": self.nominal_radius(),
            "r_inner": inner,
            "r_outer": outer,
            "alpha_i": self.alpha_i,
            "n_points": self.n_points,
            "point_radius": radius,
            "h_interface": h_int,
            "h_far": h_far,
        }
        if self.problem == "elliptic":
            sig["cg_tol"] = self.cg_tol
        else:
            ko, ki = self.wavenumbers()
            sig.update({
                "kappa_o": ko, "kappa_i": ki, "R": self.R,
                "pml_thickness": self.pml_thickness,
                "pml_damping": self.pml_damping,
                "direction": list(self.direction),
            })
        return sig

    def data_hash(self):
        blob = json.dumps(self.data_signature(), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()

    def tag(self):
        parts = [self.problem, f"d{self.d}", f"p{self.p:g}",
                 f"a{self.alpha_i:g}", f"np{self.n_points}"]
        if self.problem == "helmholtz":
            ko, ki = self.wavenumbers()
            parts.append(f"k{ki / ko:g}")
            if abs(ko - K0) > 1e-9:
                parts.append(f"w{ko / K0:g}")
        return "-".join(parts)

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["direction"] = list(self.direction)
        return d

    @classmethod
    def from_dict(cls, data):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise PipelineError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json_file(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


# ------------------------------------------------------------------ presets

_DESK = dict(n_train=2048, n_test=512, epochs=5000, restarts=3, lr=2e-3)
_FULL = dict(n_train=8192, n_test=2048, epochs=50_000, restarts=20, lr=2e-4)

PRESETS = {
    "desk-elliptic": dict(problem="elliptic", d=8, p=3.0, alpha_i=10.0,
                          n_points=1, **_DESK),
    "desk-helmholtz": dict(problem="helmholtz", d=8, p=3.0, alpha_i=10.0,
                           n_points=1, **_DESK),
    "table2-alpha10": dict(problem="elliptic", d=8, p=3.0, alpha_i=10.0,
                           n_points=1, h_interface=0.002, h_far=0.035, **_FULL),
    "table2-alpha100": dict(problem="elliptic", d=8, p=3.0, alpha_i=100.0,
                            n_points=1, h_interface=0.002, h_far=0.035, **_FULL),
    "table2-alpha1000": dict(problem="elliptic", d=8, p=3.0, alpha_i=1000.0,
                             n_points=1, h_interface=0.002, h_far=0.035, **_FULL),
    "table3-alpha100": dict(problem="elliptic", d=8, p=3.0, alpha_i=100.0,
                            n_points=64, h_interface=0.002, h_far=0.035, **_FULL),
    "table5-alpha10": dict(problem="helmholtz", d=8, p=3.0, alpha_i=10.0,
                           n_points=1, **_FULL),
    "table5-alpha100": dict(problem="helmholtz", d=8, p=3.0, alpha_i=100.0,
                            n_points=1, **_FULL),
    "table5-alpha1000": dict(problem="helmholtz", d=8, p=3.0, alpha_i=1000.0,
                             n_points=1, **_FULL),
    "table7-c1": dict(problem="helmholtz", d=16, p=3.0, alpha_i=1.0,
                      n_points=1, **_FULL),
    "table8-2k0": dict(problem="helmholtz", d=16, p=3.0, alpha_i=10.0,
                       kappa_o=2 * K0, kappa_i=1.6 * K0, n_points=1, **_FULL),
}

SWEEPS = {
    "table1": {"base": "desk-elliptic", "kind": "geometry",
               "axes": {"p": [1.0, 2.0, 3.0], "d": [8, 16, 32, 64]}},
    "desk-contrast-elliptic": {"base": "desk-elliptic", "kind": "table",
                               "axes": {"p": [1.0, 3.0], "d": [8, 16]}},
    "desk-contrast-helmholtz": {"base": "desk-helmholtz", "kind": "table",
                                "axes": {"p": [1.0, 3.0], "d": [8, 16]}},
    "desk-points-elliptic": {"base": "desk-elliptic", "kind": "figure",
                             "axes": {"n_points": [1, 8, 64]}},
    "desk-points-helmholtz": {"base": "desk-helmholtz", "kind": "figure",
                              "axes": {"n_points": [1, 8, 64]}},
    "desk-frequency": {"base": "desk-helmholtz", "kind": "figure",
                       "axes": {"kappa_o": [K0, 2 * K0]}},
}


def preset(name):
    if name not in PRESETS:
        raise PipelineError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")
    return ExperimentConfig(**PRESETS[name])


def sweep_spec(name):
    if name not in SWEEPS:
        raise PipelineError(
            f"unknown sweep {name!r}; available: {', '.join(sorted(SWEEPS))}")
    spec = SWEEPS[name]
    return preset(spec["base"]), spec["axes"], spec["kind"]


# ----------------------------------------------------------------- sampling


def sample_parameters(seed, n, d):
    """Parameter draw for sample n of the stream keyed by seed.

    Each sample owns a disjoint counter block of the same keyed stream, so
    the draw depends only on (seed, n), not on worker scheduling.
    """
    bitgen = np.random.Philox(key=seed, counter=[0, n, 0, 0])
    return np.random.Generator(bitgen).uniform(-1.0, 1.0, d)


def mesh_checksum(mesh):
    h = hashlib.sha256()
    for arr in (mesh.vertices, mesh.triangles, mesh.region, mesh.band,
                mesh.boundary):
        h.update(np.ascontiguousarray(arr).tobytes())
    return h.hexdigest()


class Workspace:
    """Per-process solver state reused across samples of one config."""

    def __init__(self, config):
        self.config = config
        self.dm = config.domain_map()
        self.mesh = config.build_mesh()
        self.problem = config.make_problem(self.mesh, self.dm)
        self.points = config.eval_points()
        self.kind = config.qoi_kind()

    def solve(self, y):
        field = self.problem.solve(y)
        return evaluate_qoi(field, self.dm, y, self.points, self.kind)


_WORKER_WS = None


def _init_worker(config):
    global _WORKER_WS
    _WORKER_WS = Workspace(config)


def _solve_indexed(args):
    n, seed = args
    y = sample_parameters(seed, n, _WORKER_WS.config.d)
    try:
        q = _WORKER_WS.solve(y)
    except SolverError as exc:
        raise PipelineError(f"sample {n} failed: {exc}; y = {y.tolist()}") from exc
    return n, y, q


# ----------------------------------------------------------------- datasets


@dataclasses.dataclass
class Dataset:
    samples: np.ndarray
    qoi: np.ndarray
    meta: dict

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        self.qoi = np.asarray(self.qoi, dtype=float)
        if self.samples.ndim != 2 or self.qoi.ndim != 2:
            raise PipelineError("samples and qoi must be matrices")
        if self.samples.shape[0] != self.qoi.shape[0]:
            raise PipelineError("sample and qoi row counts differ")
        if self.samples.size and np.abs(self.samples).max() > 1.0:
            raise PipelineError("parameter rows must lie in [-1, 1]^d")

    @property
    def n(self):
        return self.samples.shape[0]

    def as_pair(self):
        return self.samples, self.qoi


def gen_data(config, n=None, seed=None, workers=1):
    """Generate n (y, q) pairs for config; see sample_parameters for seeding."""
    n = config.n_train if n is None else int(n)
    seed = config.seed if seed is None else int(seed)
    if n < 1:
        raise PipelineError("need at least one sample")
    t0 = time.time()
    samples = np.empty((n, config.d))
    qoi = np.empty((n, config.n_points))
    if workers <= 1:
        ws = Workspace(config)
        mesh = ws.mesh
        for i in range(n):
            y = sample_parameters(seed, i, config.d)
            try:
                q = ws.solve(y)
            except SolverError as exc:
                raise PipelineError(
                    f"sample {i} failed: {exc}; y = {y.tolist()}") from exc
            samples[i] = y
            qoi[i] = q
    else:
        mesh = config.build_mesh()
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                 initargs=(config,)) as pool:
            chunk = max(1, n // (4 * workers))
            for i, y, q in pool.map(_solve_indexed,
                                    [(i, seed) for i in range(n)],
                                    chunksize=chunk):
                samples[i] = y
                qoi[i] = q
    if config.problem == "elliptic":
        solver = {"method": "jacobi-cg", "tol": config.cg_tol}
    else:
        solver = {"method": "sparse-lu"}
    meta = {
        "config": config.to_dict(),
        "config_hash": config.data_hash(),
        "seed": seed,
        "n_samples": n,
        "d": config.d,
        "n_points": config.n_points,
        "mesh_checksum": mesh_checksum(mesh),
        "solver": solver,
        "wall_time": time.time() - t0,
        "created": datetime.now(timezone.utc).isoformat(),
    }
    return Dataset(samples, qoi, meta)


def _paths(base, binary):
    base = Path(base)
    if binary:
        return {"meta": base.with_name(base.name + ".meta.json"),
                "data": base.with_name(base.name + ".data.npz")}
    return {"meta": base.with_name(base.name + ".meta.json"),
            "samples": base.with_name(base.name + ".samples.csv"),
            "qoi": base.with_name(base.name + ".qoi.csv")}


def save_dataset(ds, base, binary=False):
    """Write dataset files under the path prefix base; returns the paths."""
    paths = _paths(base, binary)
    paths["meta"].parent.mkdir(parents=True, exist_ok=True)
    if binary:
        np.savez_compressed(paths["data"], samples=ds.samples, qoi=ds.qoi)
    else:
        np.savetxt(paths["samples"], ds.samples, fmt="%.17g", delimiter=",")
        np.savetxt(paths["qoi"], ds.qoi, fmt="%.17g", delimiter=",")
    with open(paths["meta"], "w") as fh:
        json.dump(ds.meta, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return paths


def dataset_exists(base):
    p = _paths(base, False)
    pb = _paths(base, True)
    return p["meta"].exists() and (
        (p["samples"].exists() and p["qoi"].exists()) or pb["data"].exists())


def load_dataset(base, config=None):
    """Load a dataset saved under base; verify hash against config if given."""
    paths = _paths(base, False)
    if not paths["meta"].exists():
        raise PipelineError(f"no dataset at {base}")
    with open(paths["meta"]) as fh:
        meta = json.load(fh)
    stored = ExperimentConfig.from_dict(meta["config"])
    if stored.data_hash() != meta["config_hash"]:
        raise PipelineError(f"{base}: metadata hash does not match stored config")
    if config is not None and config.data_hash() != meta["config_hash"]:
        raise PipelineError(
            f"{base}: dataset was generated under a different configuration")
    npz = _paths(base, True)["data"]
    if npz.exists():
        with np.load(npz) as data:
            samples, qoi = data["samples"], data["qoi"]
    else:
        samples = np.loadtxt(paths["samples"], delimiter=",", ndmin=2)
        qoi = np.loadtxt(paths["qoi"], delimiter=",", ndmin=2)
    return Dataset(samples, qoi, meta)


def _ensure_dataset(config, split, out_dir, workers, reuse, binary=False):
    n = config.n_train if split == "train" else config.n_test
    seed = config.seed if split == "train" else config.seed + TEST_STREAM
    base = Path(out_dir) / f"{config.tag()}-{split}"
    if reuse and dataset_exists(base):
        ds = load_dataset(base, config)
        if ds.n >= n:
            return Dataset(ds.samples[:n], ds.qoi[:n], ds.meta)
    ds = gen_data(config, n, seed, workers)
    save_dataset(ds, base, binary)
    return ds


# ----------------------------------------------------------------- training


def _check_splits(train_ds, test_ds):
    seen = {row.tobytes() for row in train_ds.samples}
    for i, row in enumerate(test_ds.samples):
        if row.tobytes() in seen:
            raise PipelineError(f"test sample {i} collides with a training row")


def train_on_datasets(config, train_ds, test_ds, out_dir=None, tag=None):
    """Train the configured network on prepared datasets; returns the record."""
    _check_splits(train_ds, test_ds)
    spread = np.ptp(train_ds.qoi, axis=0).max() if train_ds.n else 0.0
    if spread < 1e-12:
        warnings.warn("zero-variance target: QoI is constant over samples")
    t0 = time.time()
    net, best, reports = surrogate.train(
        train_ds.as_pair(), test_ds.as_pair(), config.widths(),
        epochs=config.epochs, restarts=config.restarts,
        base_seed=config.seed, beta=config.beta, lr=config.lr)
    record = {
        "tag": tag or config.tag(),
        "config": config.to_dict(),
        "config_hash": config.data_hash(),
        "widths": config.widths(),
        "test_error": best.test_error,
        "train_error": best.train_error,
        "gap": best.gap,
        "best_restart": best.restart,
        "restarts": [r.to_dict() for r in reports],
        "dataset": {
            "train_seed": train_ds.meta.get("seed"),
            "test_seed": test_ds.meta.get("seed"),
            "n_train": train_ds.n,
            "n_test": test_ds.n,
            "mesh_checksum": train_ds.meta.get("mesh_checksum"),
        },
        "wall_time": time.time() - t0,
    }
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        name = record["tag"]
        surrogate.save_network(net, out / f"{name}.mlpc")
        with open(out / f"{name}.result.json", "w") as fh:
            json.dump(record, fh, indent=1, sort_keys=True)
            fh.write("\n")
    return net, record


def run_experiment(config, out_dir=None, workers=1, reuse=True):
    """Generate or load datasets for config, train, persist, return record."""
    out = Path(out_dir if out_dir is not None else config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    train_ds = _ensure_dataset(config, "train", out, workers, reuse)
    test_ds = _ensure_dataset(config, "test", out, workers, reuse)
    _, record = train_on_datasets(config, train_ds, test_ds, out)
    return record


# ------------------------------------------------------------------- sweeps


def _axis_values(base, axes):
    names = list(axes)
    valid = {f.name for f in dataclasses.fields(ExperimentConfig)}
    for name in names:
        if name not in valid:
            raise PipelineError(f"unknown sweep axis {name!r}")
    for combo in itertools.product(*(axes[n] for n in names)):
        yield dict(zip(names, combo))


def _slice_points(ds, config, stride_count):
    """View of a max-point dataset restricted to n_points equispaced columns."""
    total = ds.qoi.shape[1]
    step = total // stride_count
    cols = np.arange(0, total, step)
    meta = dict(ds.meta)
    meta.update({"config": config.to_dict(), "config_hash": config.data_hash(),
                 "n_points": stride_count, "sliced_from": total})
    return Dataset(ds.samples, ds.qoi[:, cols], meta)


def sweep(base_config, axes, out_dir, kind=None, workers=1, reuse=True,
          name="sweep"):
    """Run one experiment per axis combination and emit table/figure files.

    kind: "table" (CSV + Markdown, rows = first axis, columns = second),
    "figure" (series CSV + fit JSON + SVG, x = last axis), or "geometry"
    (no PDE: the cell value is the maximal shape variation in percent).
    A failed cell is recorded and skipped; completed cells are kept.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    axes = {k: list(v) for k, v in axes.items()}
    if kind is None:
        kind = "figure" if len(axes) == 1 else "table"
    cells = []
    for overrides in _axis_values(base_config, axes):
        cell = {"axes": overrides}
        try:
            cfg = dataclasses.replace(base_config, **overrides)
            cell["tag"] = cfg.tag()
            if kind == "geometry":
                model = InterfaceModel(cfg.nominal_radius(), cfg.d, cfg.p, cfg.c)
                cell["value"] = 100.0 * max_shape_variation(model)
            else:
                record = run_experiment(cfg, out, workers=workers, reuse=reuse)
                cell["value"] = record["test_error"]
        except (PipelineError, SolverError, ArithmeticError, ValueError) as exc:
            cell["error"] = str(exc)
        cells.append(cell)
        with open(out / f"{name}.cells.json", "w") as fh:
            json.dump({"axes": axes, "kind": kind, "cells": cells}, fh,
                      indent=1, sort_keys=True)
            fh.write("\n")
    summary = {"axes": axes, "kind": kind, "cells": cells}
    if kind in ("table", "geometry"):
        _emit_table(out, name, axes, cells)
    else:
        _emit_figure(out, name, axes, cells)
    return summary


def _cell_lookup(cells):
    table = {}
    for cell in cells:
        key = tuple(sorted(cell["axes"].items()))
        table[key] = cell.get("value")
    return table


def _emit_table(out, name, axes, cells):
    names = list(axes)
    if len(names) == 1:
        rows, cols = names[0], None
    else:
        rows, cols = names[0], names[1]
    lookup = _cell_lookup(cells)
    col_vals = axes[cols] if cols else [None]
    header = [rows] + [f"{cols}={v:g}" if cols else "value" for v in col_vals]
    lines_csv = [",".join(header)]
    lines_md = ["| " + " | ".join(header) + " |",
                "|" + "---|" * len(header)]
    for rv in axes[rows]:
        row = [f"{rv:g}"]
        for cv in col_vals:
            key = {rows: rv}
            if cols:
                key[cols] = cv
            v = lookup.get(tuple(sorted(key.items())))
            row.append("" if v is None else format(v, ".6g"))
        lines_csv.append(",".join(row))
        lines_md.append("| " + " | ".join(row) + " |")
    (out / f"{name}.csv").write_text("\n".join(lines_csv) + "\n")
    (out / f"{name}.md").write_text("\n".join(lines_md) + "\n")


def _emit_figure(out, name, axes, cells):
    names = list(axes)
    x_axis = names[-1]
    series_axis = names[0] if len(names) > 1 else None
    groups = {}
    order = []
    for cell in cells:
        if "value" not in cell:
            continue
        label = (f"{series_axis} = {cell['axes'][series_axis]:g}"
                 if series_axis else "error")
        if label not in groups:
            groups[label] = {"label": label, "x": [], "y": []}
            order.append(label)
        groups[label]["x"].append(float(cell["axes"][x_axis]))
        groups[label]["y"].append(float(cell["value"]))
    series = [groups[k] for k in order]
    if not series:
        return
    plotting.save_series_csv(out / f"{name}.series.csv", series)
    fits = {}
    for s in series:
        if len(s["x"]) >= 2 and min(s["x"]) > 0:
            a, b = plotting.fit_log_line(s["x"], s["y"])
            fits[s["label"]] = {"intercept": a, "slope": b}
    with open(out / f"{name}.fits.json", "w") as fh:
        json.dump(fits, fh, indent=1, sort_keys=True)
        fh.write("\n")
    svg = plotting.render_plot(series, title=name, xlabel=x_axis,
                               ylabel="test error")
    plotting.write_svg(out / f"{name}.svg", svg)


def sweep_points(base_config, point_counts, out_dir, workers=1, reuse=True,
                 name="points"):
    """n_points sweep sharing one dataset generated at the largest count.

    The evaluation circle at count m is a subset of the circle at count k*m,
    so the QoI matrix of the largest count is column-sliced per cell.
    """
    counts = sorted(set(int(v) for v in point_counts))
    top = max(counts)
    if any(top % v for v in counts):
        raise PipelineError("point counts must divide the largest count")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    base_top = dataclasses.replace(base_config, n_points=top)
    train_top = _ensure_dataset(base_top, "train", out, workers, reuse)
    test_top = _ensure_dataset(base_top, "test", out, workers, reuse)
    cells = []
    for m in counts:
        cfg = dataclasses.replace(base_config, n_points=m)
        cell = {"axes": {"n_points": m}, "tag": cfg.tag()}
        try:
            _, record = train_on_datasets(
                cfg, _slice_points(train_top, cfg, m),
                _slice_points(test_top, cfg, m), out)
            cell["value"] = record["test_error"]
        except (PipelineError, ArithmeticError, ValueError) as exc:
            cell["error"] = str(exc)
        cells.append(cell)
        with open(out / f"{name}.cells.json", "w") as fh:
            json.dump({"axes": {"n_points": counts}, "kind": "figure",
                       "cells": cells}, fh, indent=1, sort_keys=True)
            fh.write("\n")
    _emit_figure(out, name, {"n_points": counts}, cells)
    return {"axes": {"n_points": counts}, "kind": "figure", "cells": cells}
